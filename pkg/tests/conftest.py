"""Shared fixtures: the Rb87 25 G/cm scenario most tests run against."""

import pytest

import mwselect as mw

ETA = 0.25  # T/m
DELTA_T = 28e-3
TAU = 10e-6
Z_SECOND = 1e-2


@pytest.fixture(scope="session")
def rb87():
    return mw.get_species("Rb87")


@pytest.fixture(scope="session")
def cfg(rb87):
    return mw.FieldConfig(eta=ETA, bias=0.0, species=rb87)


@pytest.fixture(scope="session")
def branch():
    return mw.StretchedBranch(sigma=1)


@pytest.fixture(scope="session")
def pulse_first(cfg, branch):
    return mw.PulseSpec.resonant_at(0.0, cfg, t0=0.0, tau=TAU, branch=branch)


@pytest.fixture(scope="session")
def pulse_second(cfg, branch):
    return mw.PulseSpec.resonant_at(Z_SECOND, cfg, t0=DELTA_T, tau=TAU, branch=branch)

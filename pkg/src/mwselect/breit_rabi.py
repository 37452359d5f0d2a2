"""Stretched-state hyperfine energies in a linear magnetic field gradient.

An alkali ground state splits into the hyperfine levels F = I -/+ 1/2.
In a field B(z) = eta*z + bias the fully polarized (stretched) sublevels
m_F = +/-F are the only ones whose energies stay analytic at all fields,
and the microwave transition between the paired stretched states
|F-, s*F-> and |F+, s*F+> (s = +/-1) acquires a position-dependent
frequency.  This module evaluates those energies, the transition
frequency and its spatial derivative, and inverts frequency to position.

Energies are offset so the two zero-field hyperfine levels sit at
-/+ hbar*delta_W/2.  The dimensionless field coordinate is
x = g_sum * B / (hbar * delta_W), which for a pure gradient reduces to
kappa * z with kappa = g_sum * eta / (hbar * delta_W).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .constants import CONST, AtomSpecies
from .errors import NoBracketError, ZeroGradientError

_BISECTION_WIDTH = 1e-12  # m, bracket width before the Newton polish


class Level(enum.Enum):
    """Hyperfine level label: LOWER is F = I - 1/2, UPPER is F = I + 1/2."""

    LOWER = "lower"
    UPPER = "upper"


@dataclass(frozen=True)
class StretchedBranch:
    """One stretched-state pair, selected by the sign s of m_F = s*F.

    sigma picks the |F-, s*F-> <-> |F+, s*F+> pair; level labels which of
    the two states an energy refers to.  Transition-level quantities use
    only sigma.
    """

    sigma: int
    level: Level = Level.LOWER

    def __post_init__(self) -> None:
        if self.sigma not in (1, -1):
            raise ValueError("sigma must be +1 or -1")
        if not isinstance(self.level, Level):
            raise ValueError("level must be a Level enum member")


@dataclass(frozen=True)
class EnergyScale:
    """Magnetic-moment combinations that set the Zeeman slopes.

    g_sum   = g_s*mu_B + g_I*mu_N            (J/T)
    gamma1  = (g_s*mu_B - 2*I*g_I*mu_N) / (2*g_sum)
    gamma2  = g_I*mu_N / g_sum
    """

    g_sum: float
    gamma1: float
    gamma2: float

    @classmethod
    def for_species(cls, species: AtomSpecies, const=CONST) -> "EnergyScale":
        g_sum = species.g_s * const.mu_B + species.g_I * const.mu_N
        gamma2 = species.g_I * const.mu_N / g_sum
        gamma1 = (
            species.g_s * const.mu_B
            - 2.0 * species.nuclear_spin * species.g_I * const.mu_N
        ) / (2.0 * g_sum)
        return cls(g_sum=g_sum, gamma1=gamma1, gamma2=gamma2)


@dataclass(frozen=True)
class FieldConfig:
    """Static field model B(z) = eta*z + bias for one species.

    eta in T/m, bias in T.  eta = 0 is allowed here (kappa and epsilon
    are still defined) but every position-selective operation rejects it
    with ZeroGradientError.
    """

    eta: float
    bias: float
    species: AtomSpecies

    def __post_init__(self) -> None:
        if not np.isfinite(self.eta) or not np.isfinite(self.bias):
            raise ValueError("eta and bias must be finite")

    @property
    def scale(self) -> EnergyScale:
        return EnergyScale.for_species(self.species)


def kappa(cfg: FieldConfig) -> float:
    """Inverse length scale g_sum*eta/(hbar*delta_W) of the gradient (1/m)."""
    return cfg.scale.g_sum * cfg.eta / (CONST.hbar * cfg.species.delta_W)


def epsilon(cfg: FieldConfig) -> float:
    """Dimensionless recoil-to-hyperfine ratio hbar*kappa^2/(2*M*delta_W).

    Quantifies how strongly the gradient couples the internal transition
    to the center-of-mass motion; always >= 0 and ~1e-20 for realistic
    gradients.
    """
    k = kappa(cfg)
    return CONST.hbar * k * k / (2.0 * cfg.species.mass * cfg.species.delta_W)


def field_coordinate(cfg: FieldConfig, z):
    """Dimensionless field coordinate x = g_sum*(eta*z + bias)/(hbar*delta_W)."""
    return cfg.scale.g_sum * (cfg.eta * z + cfg.bias) / (
        CONST.hbar * cfg.species.delta_W
    )


def _energy_dimensionless(level: Level, sigma: int, x, species: AtomSpecies):
    """Stretched-state energy in units of hbar*delta_W at field coordinate x."""
    sc = EnergyScale.for_species(species)
    u = sigma * x
    if level is Level.UPPER:
        return 0.5 + sc.gamma1 * u
    fm = species.f_minus
    ratio = fm / species.f_plus
    return -fm * sc.gamma2 * u - 0.5 * np.sqrt(1.0 + 2.0 * ratio * u + u * u)


def _slope_dimensionless(level: Level, sigma: int, x, species: AtomSpecies):
    """d/dx of _energy_dimensionless, same units."""
    sc = EnergyScale.for_species(species)
    u = sigma * x
    if level is Level.UPPER:
        return sigma * sc.gamma1 * np.ones_like(np.asarray(x, dtype=float))
    fm = species.f_minus
    ratio = fm / species.f_plus
    root = np.sqrt(1.0 + 2.0 * ratio * u + u * u)
    return sigma * (-fm * sc.gamma2 - (ratio + u) / (2.0 * root))


def eigenvalue(branch: StretchedBranch, kz, species: AtomSpecies):
    """Energy (J) of the branch's stretched state at dimensionless field kz."""
    return CONST.hbar * species.delta_W * _energy_dimensionless(
        branch.level, branch.sigma, kz, species
    )


def d_eigenvalue_dkz(branch: StretchedBranch, kz, species: AtomSpecies):
    """Analytic derivative of eigenvalue with respect to kz (J per unit kz)."""
    return CONST.hbar * species.delta_W * _slope_dimensionless(
        branch.level, branch.sigma, kz, species
    )


def _transition_dimensionless(sigma: int, x, species: AtomSpecies):
    return _energy_dimensionless(Level.UPPER, sigma, x, species) - (
        _energy_dimensionless(Level.LOWER, sigma, x, species)
    )


def transition_angular_frequency(branch: StretchedBranch, z, cfg: FieldConfig):
    """Angular frequency (rad/s) of the stretched pair transition at z.

    Equals delta_W exactly where the total field vanishes.
    """
    x = field_coordinate(cfg, z)
    return cfg.species.delta_W * _transition_dimensionless(branch.sigma, x, cfg.species)


def d_transition_dz(branch: StretchedBranch, z, cfg: FieldConfig):
    """Analytic spatial derivative of the transition frequency (rad/s/m).

    Never computed by finite differences; the finite-difference version
    exists only as a test oracle.
    """
    x = field_coordinate(cfg, z)
    dslope = _slope_dimensionless(
        Level.UPPER, branch.sigma, x, cfg.species
    ) - _slope_dimensionless(Level.LOWER, branch.sigma, x, cfg.species)
    return kappa(cfg) * cfg.species.delta_W * dslope


def resonant_position(
    omega_A: float,
    branch: StretchedBranch,
    cfg: FieldConfig,
    bracket: tuple[float, float] = (-1.0, 1.0),
) -> float:
    """Position (m) where the transition frequency equals omega_A.

    Bisects the bracket down to 1e-12 m and polishes with Newton steps
    using the analytic derivative.  Requires a nonzero gradient and a
    bracket over which the transition frequency actually straddles
    omega_A (it is monotonic in z at low field for fixed sigma).
    """
    if kappa(cfg) == 0.0:
        raise ZeroGradientError("resonant_position requires a nonzero gradient")
    za, zb = bracket
    if not zb > za:
        raise ValueError("bracket must satisfy bracket[0] < bracket[1]")

    def f(z: float) -> float:
        return float(transition_angular_frequency(branch, z, cfg)) - omega_A

    fa, fb = f(za), f(zb)
    if fa == 0.0:
        return za
    if fb == 0.0:
        return zb
    if fa * fb > 0.0:
        lo, hi = sorted((fa + omega_A, fb + omega_A))
        raise NoBracketError(
            f"omega_A = {omega_A:.6e} rad/s is outside the transition range "
            f"[{lo:.6e}, {hi:.6e}] attained on [{za:g}, {zb:g}] m"
        )
    while zb - za > _BISECTION_WIDTH:
        zm = 0.5 * (za + zb)
        if zm <= za or zm >= zb:  # bracket at floating point resolution
            break
        fm = f(zm)
        if fm == 0.0:
            za = zb = zm
            break
        if fa * fm < 0.0:
            zb = zm
        else:
            za, fa = zm, fm
    z = 0.5 * (za + zb)
    for _ in range(3):
        slope = float(d_transition_dz(branch, z, cfg))
        if slope == 0.0:
            break
        step = f(z) / slope
        candidate = z - step
        if candidate < za - _BISECTION_WIDTH or candidate > zb + _BISECTION_WIDTH:
            break  # polish left the bracket, keep the bisection answer
        z = candidate
    return z

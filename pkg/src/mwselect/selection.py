"""Resonant microwave pulses and the widths they select.

A square pulse of duration tau drives the stretched-pair transition with
coupling omega0 = pi/(2*tau), so on resonance it is exactly a pi pulse
(Rabi frequency 2*omega0, area pi).  In a gradient the detuning grows
linearly away from the resonant position, and the full width at half
maximum of the flip probability defines the selected position slice;
two pulses separated by delta_t turn that slice into a velocity slice.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

from .breit_rabi import (
    FieldConfig,
    StretchedBranch,
    d_transition_dz,
    epsilon,
    field_coordinate,
    kappa,
    resonant_position,
    transition_angular_frequency,
)
from .constants import CONST, AtomSpecies
from .errors import ZeroGradientError

_COUPLING_MODELS = ("pi_pulse_calibrated",)


@dataclass(frozen=True)
class PulseSpec:
    """One square microwave pulse addressing a stretched pair.

    t0 is the pulse center time (s), tau the duration (s), omega_A the
    microwave angular frequency (rad/s).  The coupling is tied to tau so
    the resonant pulse area is always pi.
    """

    t0: float
    tau: float
    omega_A: float
    branch: StretchedBranch
    coupling_model: str = "pi_pulse_calibrated"

    def __post_init__(self) -> None:
        if self.tau <= 0.0:
            raise ValueError("tau must be positive")
        if self.omega_A <= 0.0:
            raise ValueError("omega_A must be positive")
        if self.coupling_model not in _COUPLING_MODELS:
            raise ValueError(
                f"unknown coupling model {self.coupling_model!r}; "
                f"supported: {_COUPLING_MODELS}"
            )

    @property
    def coupling_omega0(self) -> float:
        """Coupling strength omega0 = pi/(2*tau) (rad/s)."""
        return math.pi / (2.0 * self.tau)

    @property
    def rabi_at_resonance(self) -> float:
        """On-resonance Rabi frequency 2*omega0 = pi/tau (rad/s)."""
        return math.pi / self.tau

    @classmethod
    def resonant_at(
        cls,
        z: float,
        cfg: FieldConfig,
        t0: float,
        tau: float,
        branch: StretchedBranch,
    ) -> "PulseSpec":
        """Pulse tuned to the transition frequency at position z."""
        omega_A = float(transition_angular_frequency(branch, z, cfg))
        return cls(t0=t0, tau=tau, omega_A=omega_A, branch=branch)


def detuning(z, pulse: PulseSpec, cfg: FieldConfig):
    """Detuning transition(z) - omega_A (rad/s); vectorizes over z."""
    return transition_angular_frequency(pulse.branch, z, cfg) - pulse.omega_A


def rabi_frequency(z, pulse: PulseSpec, cfg: FieldConfig):
    """Generalized Rabi frequency sqrt(detuning^2 + 4*omega0^2) (rad/s)."""
    d = detuning(z, pulse, cfg)
    w0 = pulse.coupling_omega0
    return (d * d + 4.0 * w0 * w0) ** 0.5


def position_width(pulse: PulseSpec, cfg: FieldConfig, z_center: float) -> float:
    """FWHM (m) of the flip probability around the resonant position.

    The half-maximum points sit where |detuning| equals the resonant
    Rabi frequency, so the width is 2*(pi/tau) divided by the local
    frequency gradient, evaluated with the exact analytic slope.
    """
    slope = float(d_transition_dz(pulse.branch, z_center, cfg))
    if slope == 0.0:
        raise ZeroGradientError("position width is undefined at zero slope")
    return 2.0 * pulse.rabi_at_resonance / abs(slope)


def position_width_low_field(
    pulse: PulseSpec,
    species: AtomSpecies,
    eta: float,
    z_center: float | None = None,
    cfg: FieldConfig | None = None,
) -> float:
    """Low-field estimate hbar*Omega_R*(I+1/2)/(I*mu_B*eta) of the FWHM (m).

    Drops the nuclear moment and the field curvature, leaving a width
    that depends only on I, the pulse duration and the gradient.  Warns
    when evaluated at a center where the dimensionless field coordinate
    is no longer small, since the estimate degrades there.
    """
    if eta == 0.0:
        raise ZeroGradientError("low-field width requires a nonzero gradient")
    if z_center is not None and cfg is not None:
        x = abs(float(field_coordinate(cfg, z_center)))
        if x >= 0.05:
            warnings.warn(
                f"low-field width evaluated at |x| = {x:.3g} >= 0.05; "
                "the exact-slope width should be preferred here",
                UserWarning,
                stacklevel=2,
            )
    spin = species.nuclear_spin
    return (
        CONST.hbar
        * pulse.rabi_at_resonance
        * species.f_plus
        / (spin * CONST.mu_B * abs(eta))
    )


def velocity_width(delta_z: float, delta_t: float) -> float:
    """Selected velocity FWHM 2*delta_z/delta_t (m/s) for pulse gap delta_t."""
    if delta_t <= 0.0:
        raise ValueError("delta_t must be positive")
    return 2.0 * delta_z / delta_t


def raman_velocity_width(k: float, delta_t: float) -> float:
    """Velocity FWHM 1/(2*k*delta_t) of a two-photon Doppler-sensitive pair.

    Reference point for comparing the microwave scheme against optical
    selection with effective wavevector k (rad/m) and the same gap.
    """
    if k <= 0.0 or delta_t <= 0.0:
        raise ValueError("k and delta_t must be positive")
    return 1.0 / (2.0 * k * delta_t)


def validity_diagnostic(
    pulse: PulseSpec,
    cfg: FieldConfig,
    momentum: float,
    width_initial: float,
    width_at_pulse: float,
    t_pulse: float,
) -> float:
    """Size of the leading correction to the frozen-motion pulse model.

    The flip-probability formula treats the atom as frozen during the
    pulse.  The first correction is proportional to epsilon and involves
    the wavepacket momentum and widths; this returns its raw magnitude
    (dimensionless), small when the frozen treatment is good.  The
    internal phase-spread term is complex because free dispersion mixes
    position and momentum quadratures.
    """
    k = kappa(cfg)
    if k == 0.0:
        raise ZeroGradientError("validity diagnostic requires a nonzero gradient")
    eps = epsilon(cfg)
    d_w = cfg.species.delta_W
    scaled_p = momentum / (CONST.hbar * k)
    spread = complex(k * k * width_initial * width_initial, eps * d_w * t_pulse)
    term = abs(scaled_p * scaled_p + 1.0 / (2.0 * spread))
    norm = (2.0 * math.pi * k * k * width_at_pulse * width_at_pulse) ** -0.25
    return eps * term * (math.pi * d_w / pulse.rabi_at_resonance) * norm


@dataclass(frozen=True)
class SelectionResult:
    """Widths selected by one pulse, all in SI units.

    velocity fields are None when no pulse gap was supplied.
    """

    z_center: float
    position_width: float
    position_width_low_field: float
    rabi_at_resonance: float
    transition_slope: float
    velocity_width: float | None = None
    delta_t: float | None = None


def select(
    pulse: PulseSpec,
    cfg: FieldConfig,
    delta_t: float | None = None,
    bracket: tuple[float, float] = (-1.0, 1.0),
) -> SelectionResult:
    """Locate the resonant position of a pulse and the widths it selects."""
    z_c = resonant_position(pulse.omega_A, pulse.branch, cfg, bracket=bracket)
    width = position_width(pulse, cfg, z_c)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", UserWarning)
        width_lf = position_width_low_field(
            pulse, cfg.species, cfg.eta, z_center=z_c, cfg=cfg
        )
    v_width = velocity_width(width, delta_t) if delta_t is not None else None
    return SelectionResult(
        z_center=z_c,
        position_width=width,
        position_width_low_field=width_lf,
        rabi_at_resonance=pulse.rabi_at_resonance,
        transition_slope=float(d_transition_dz(pulse.branch, z_c, cfg)),
        velocity_width=v_width,
        delta_t=delta_t,
    )

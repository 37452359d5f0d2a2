"""Center-of-mass motion and dispersion of a selected wavepacket.

z points up, so gravity contributes -g0 to the acceleration.  An atom in
the upper stretched state sees a potential linear in z, which just adds
a constant to gravity: it falls with an effective, state- and
sign-dependent g.  The lower stretched state sees a nonlinear potential
and is integrated numerically.  Wavepacket widths disperse as for a free
particle; a linear potential rigidly translates the packet and does not
change its spreading.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

from .breit_rabi import (
    EnergyScale,
    FieldConfig,
    Level,
    field_coordinate,
    _slope_dimensionless,
)
from .constants import CONST, AtomSpecies
from .errors import LevelMismatchError

_RK4_MAX_STEP = 1e-5  # s, integration step cap for the nonlinear branch
_HEISENBERG_SLACK = 1.0 - 1e-9


@dataclass(frozen=True)
class WavepacketState:
    """Gaussian wavepacket summary: means, widths, internal state.

    z, v are the position (m) and velocity (m/s) expectation values; dz
    and dp the position (m) and momentum (kg m/s) standard deviations.
    dz_ref and t_ref record the width and time of the minimum-width
    reference from which free dispersion is measured; they default to
    the initial values.
    """

    z: float
    v: float
    dz: float
    dp: float
    level: Level
    sigma: int
    t: float = 0.0
    dz_ref: float | None = None
    t_ref: float | None = None

    def __post_init__(self) -> None:
        if self.sigma not in (1, -1):
            raise ValueError("sigma must be +1 or -1")
        if not isinstance(self.level, Level):
            raise ValueError("level must be a Level enum member")
        if self.dz <= 0.0 or self.dp <= 0.0:
            raise ValueError("widths dz and dp must be positive")
        if self.dz * self.dp < 0.5 * CONST.hbar * _HEISENBERG_SLACK:
            raise ValueError(
                f"dz*dp = {self.dz * self.dp:.3e} violates the uncertainty "
                f"bound hbar/2 = {0.5 * CONST.hbar:.3e}"
            )
        if self.dz_ref is None:
            object.__setattr__(self, "dz_ref", self.dz)
        if self.t_ref is None:
            object.__setattr__(self, "t_ref", self.t)

    @classmethod
    def minimum_uncertainty(
        cls,
        z: float,
        v: float,
        dz: float,
        level: Level,
        sigma: int,
        t: float = 0.0,
    ) -> "WavepacketState":
        """State with dp = hbar/(2*dz), the tightest allowed momentum width."""
        return cls(
            z=z, v=v, dz=dz, dp=0.5 * CONST.hbar / dz, level=level, sigma=sigma, t=t
        )

    def flipped(self) -> "WavepacketState":
        """Same packet on the other hyperfine level (after a pi pulse)."""
        other = Level.UPPER if self.level is Level.LOWER else Level.LOWER
        return replace(self, level=other)


def g_effective(species: AtomSpecies, eta: float, level: Level, sigma: int) -> float:
    """Effective downward acceleration (m/s^2) on the upper stretched state.

    The upper-branch potential is exactly linear in z, so the gradient
    shifts gravity by sigma*gamma1*g_sum*eta/M.  Positive means downward
    (the acceleration used in z(t) = z0 + v0*t - g_eff*t^2/2).  The lower
    branch has no such constant; asking for one raises.
    """
    if level is not Level.UPPER:
        raise LevelMismatchError(
            "g_effective is defined only on the upper stretched state; "
            "integrate the lower branch numerically"
        )
    if sigma not in (1, -1):
        raise ValueError("sigma must be +1 or -1")
    sc = EnergyScale.for_species(species)
    return CONST.g0 + sigma * sc.gamma1 * sc.g_sum * eta / species.mass


def acceleration(z: float, level: Level, sigma: int, cfg: FieldConfig) -> float:
    """Signed vertical acceleration (m/s^2, z up) at position z.

    -g0 plus the magnetic force from the branch potential, with the bias
    field folded into the field coordinate.
    """
    x = field_coordinate(cfg, z)
    dv_dx = _slope_dimensionless(level, sigma, x, cfg.species)
    # dV/dz = hbar*delta_W * f'(x) * dx/dz and dx/dz = g_sum*eta/(hbar*delta_W)
    force = -float(dv_dx) * cfg.scale.g_sum * cfg.eta
    return -CONST.g0 + force / cfg.species.mass


def rk4_evolve(
    z: float,
    v: float,
    duration: float,
    level: Level,
    sigma: int,
    cfg: FieldConfig,
    max_step: float = _RK4_MAX_STEP,
) -> tuple[float, float]:
    """Integrate z'' = a(z) for one packet center with classic RK4.

    Step count is ceil(duration/max_step) so results are deterministic
    for a given duration.  Used for the lower branch, where no closed
    form exists; works for either level.
    """
    if duration < 0.0:
        raise ValueError("duration must be nonnegative")
    if duration == 0.0:
        return z, v
    n = max(1, math.ceil(duration / max_step))
    h = duration / n

    def acc(zz: float) -> float:
        return acceleration(zz, level, sigma, cfg)

    for _ in range(n):
        a1 = acc(z)
        z2 = z + 0.5 * h * v
        a2 = acc(z2)
        z3 = z + 0.5 * h * v + 0.25 * h * h * a1
        a3 = acc(z3)
        z4 = z + h * v + 0.5 * h * h * a2
        a4 = acc(z4)
        z = z + h * v + h * h * (a1 + a2 + a3) / 6.0
        v = v + h * (a1 + 2.0 * a2 + 2.0 * a3 + a4) / 6.0
    return z, v


def evolve_expected(
    state: WavepacketState, duration: float, cfg: FieldConfig
) -> tuple[float, float]:
    """New (z, v) of the packet center after free evolution for duration.

    Upper branch uses the exact constant-acceleration form; lower branch
    integrates the nonlinear potential numerically.
    """
    if state.level is Level.UPPER:
        g = g_effective(cfg.species, cfg.eta, state.level, state.sigma)
        z = state.z + state.v * duration - 0.5 * g * duration * duration
        v = state.v - g * duration
        return z, v
    return rk4_evolve(state.z, state.v, duration, state.level, state.sigma, cfg)


def spread_width(dz_ref: float, elapsed: float, species: AtomSpecies) -> float:
    """Free-dispersion width sqrt(dz_ref^2 + (hbar*t/(2*M*dz_ref))^2) (m).

    dz_ref is the width at the reference (minimum-width) time, elapsed
    the time since then; valid for minimum-uncertainty packets, whose
    momentum width stays hbar/(2*dz_ref) throughout.
    """
    if dz_ref <= 0.0:
        raise ValueError("dz_ref must be positive")
    drift = CONST.hbar * elapsed / (2.0 * species.mass * dz_ref)
    return math.hypot(dz_ref, drift)


def evolve_width(state: WavepacketState, duration: float, species: AtomSpecies) -> float:
    """Position width after another duration of free dispersion (m)."""
    elapsed = (state.t + duration) - state.t_ref
    return spread_width(state.dz_ref, elapsed, species)


def evolve(state: WavepacketState, duration: float, cfg: FieldConfig) -> WavepacketState:
    """Propagate center and width together; momentum width is conserved."""
    z, v = evolve_expected(state, duration, cfg)
    dz = evolve_width(state, duration, cfg.species)
    return replace(state, z=z, v=v, dz=dz, t=state.t + duration)

"""Phase-space geometry of two-pulse selection and a Monte Carlo check.

Each pulse accepts a position slice of full width delta_z at its own
time.  Mapped to the time of the second pulse through the upper-branch
ballistic flow, the first pulse's slice becomes a tilted band in the
(z, v) plane and the second stays vertical; atoms passing both lie in
the intersection parallelogram, which is what "velocity selection"
means here.  run_monte_carlo samples a thermal cloud through the same
two pulses and reports who survived.

Atoms are assumed prepared in the lower stretched state; the first pulse
transfers the selected slice to the upper branch (which then falls with
the effective g), and the second transfers it back.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .breit_rabi import FieldConfig, Level, resonant_position
from .dynamics import g_effective, spread_width
from .errors import EmptyIntersectionError, LevelMismatchError
from .probability import averaged_probability_batch, point_probability
from .selection import PulseSpec, detuning, position_width

_CHUNK = 8192  # atoms per vectorized batch
_PARALLEL_TOL = 1e-15


@dataclass(frozen=True)
class PhaseSpaceBand:
    """Linear band {(z, v): |a_z*z + a_v*v - center| <= half_width}.

    Coordinates are taken at the second pulse's time.  A pulse's own
    band has a_z = 1; a_v encodes how far back in time it acts.
    """

    a_z: float
    a_v: float
    center: float
    half_width: float

    def __post_init__(self) -> None:
        if self.half_width <= 0.0:
            raise ValueError("half_width must be positive")
        if self.a_z == 0.0 and self.a_v == 0.0:
            raise ValueError("band normal (a_z, a_v) must be nonzero")

    def contains(self, z, v):
        """Membership test; vectorizes, and NaN coordinates test False."""
        s = self.a_z * np.asarray(z) + self.a_v * np.asarray(v)
        return np.abs(s - self.center) <= self.half_width


def band_from_first_pulse(
    pulse: PulseSpec,
    cfg: FieldConfig,
    delta_t: float,
    bracket: tuple[float, float] = (-1.0, 1.0),
) -> PhaseSpaceBand:
    """First pulse's acceptance band, pushed forward to the second pulse.

    Backtracking z(t2) - v(t2)*delta_t - g_eff*delta_t^2/2 recovers the
    position at the first pulse, so the band tilts with slope 1/delta_t
    in (z, v).  Uses the upper-branch g because accepted atoms spend the
    gap on the upper branch.
    """
    if delta_t <= 0.0:
        raise ValueError("delta_t must be positive")
    z_c = resonant_position(pulse.omega_A, pulse.branch, cfg, bracket=bracket)
    width = position_width(pulse, cfg, z_c)
    g = g_effective(cfg.species, cfg.eta, Level.UPPER, pulse.branch.sigma)
    return PhaseSpaceBand(
        a_z=1.0,
        a_v=-delta_t,
        center=z_c + 0.5 * g * delta_t * delta_t,
        half_width=0.5 * width,
    )


def band_from_second_pulse(
    pulse: PulseSpec,
    cfg: FieldConfig,
    bracket: tuple[float, float] = (-1.0, 1.0),
) -> PhaseSpaceBand:
    """Second pulse's band: a vertical position slice at its own time."""
    z_c = resonant_position(pulse.omega_A, pulse.branch, cfg, bracket=bracket)
    width = position_width(pulse, cfg, z_c)
    return PhaseSpaceBand(a_z=1.0, a_v=0.0, center=z_c, half_width=0.5 * width)


@dataclass(frozen=True)
class SelectionCell:
    """Bounded intersection of the two pulse bands.

    z_center/v_center is the cell midpoint; velocity_support the full
    extent of selected velocities; area the parallelogram area, equal to
    delta_z1*delta_z2/delta_t for the standard band pair.
    """

    band_first: PhaseSpaceBand
    band_second: PhaseSpaceBand
    z_center: float
    v_center: float
    velocity_support: float
    area: float

    def contains(self, z, v):
        return self.band_first.contains(z, v) & self.band_second.contains(z, v)

    def dilated(self, factor: float) -> "SelectionCell":
        """Same cell with both half-widths scaled by factor (tolerance tests)."""
        if factor <= 0.0:
            raise ValueError("factor must be positive")
        b1 = PhaseSpaceBand(
            self.band_first.a_z,
            self.band_first.a_v,
            self.band_first.center,
            self.band_first.half_width * factor,
        )
        b2 = PhaseSpaceBand(
            self.band_second.a_z,
            self.band_second.a_v,
            self.band_second.center,
            self.band_second.half_width * factor,
        )
        return selection_cell(b1, b2)


def selection_cell(
    band_first: PhaseSpaceBand, band_second: PhaseSpaceBand
) -> SelectionCell:
    """Intersect two bands into a bounded cell.

    Raises EmptyIntersectionError for parallel disjoint bands and
    ValueError for parallel overlapping ones (an unbounded strip).
    """
    det = band_first.a_z * band_second.a_v - band_first.a_v * band_second.a_z
    norm = math.hypot(band_first.a_z, band_first.a_v) * math.hypot(
        band_second.a_z, band_second.a_v
    )
    if abs(det) <= _PARALLEL_TOL * norm:
        # parallel normals: compare the two strips along the common normal
        scale = math.hypot(band_second.a_z, band_second.a_v) / math.hypot(
            band_first.a_z, band_first.a_v
        )
        sign = 1.0 if (
            band_first.a_z * band_second.a_z + band_first.a_v * band_second.a_v
        ) >= 0.0 else -1.0
        c1 = sign * scale * band_first.center
        w1 = scale * band_first.half_width
        if abs(c1 - band_second.center) > w1 + band_second.half_width:
            raise EmptyIntersectionError(
                "parallel bands do not overlap: no phase-space cell is selected"
            )
        raise ValueError("parallel overlapping bands bound no finite cell")
    # cell center solves both band equations at their centers
    z_c = (
        band_first.center * band_second.a_v - band_second.center * band_first.a_v
    ) / det
    v_c = (
        band_first.a_z * band_second.center - band_second.a_z * band_first.center
    ) / det
    # velocity extent: v ranges over solutions as both offsets span their widths
    v_half = (
        abs(band_second.a_z) * band_first.half_width
        + abs(band_first.a_z) * band_second.half_width
    ) / abs(det)
    area = 4.0 * band_first.half_width * band_second.half_width / abs(det)
    return SelectionCell(
        band_first=band_first,
        band_second=band_second,
        z_center=z_c,
        v_center=v_c,
        velocity_support=2.0 * v_half,
        area=area,
    )


def cell_polygon(cell: SelectionCell) -> np.ndarray:
    """Vertices of the cell as a (4, 2) array of (z, v), counterclockwise."""
    b1, b2 = cell.band_first, cell.band_second
    det = b1.a_z * b2.a_v - b1.a_v * b2.a_z
    corners = []
    for s1, s2 in ((-1.0, -1.0), (1.0, -1.0), (1.0, 1.0), (-1.0, 1.0)):
        c1 = b1.center + s1 * b1.half_width
        c2 = b2.center + s2 * b2.half_width
        z = (c1 * b2.a_v - c2 * b1.a_v) / det
        v = (b1.a_z * c2 - b2.a_z * c1) / det
        corners.append((z, v))
    poly = np.asarray(corners)
    # enforce counterclockwise orientation via the shoelace sign
    area2 = 0.0
    for i in range(4):
        z0, v0 = poly[i]
        z1, v1 = poly[(i + 1) % 4]
        area2 += z0 * v1 - z1 * v0
    if area2 < 0.0:
        poly = poly[::-1].copy()
    return poly


def marginal_velocity(
    cell: SelectionCell, resolution: int = 513
) -> tuple[np.ndarray, np.ndarray]:
    """Velocity marginal of the uniform density on the cell.

    Returns (v, density) with density integrating to 1 over the support;
    for equal band widths the shape is an isosceles triangle.  Assumes
    the standard band pair (a_z = 1 for both, tilted first band).
    """
    if resolution < 3:
        raise ValueError("resolution must be at least 3")
    b1, b2 = cell.band_first, cell.band_second
    if b1.a_z == 0.0 or b2.a_z == 0.0:
        raise ValueError("marginal_velocity expects position-slice bands (a_z != 0)")
    half = 0.5 * cell.velocity_support
    v = np.linspace(cell.v_center - half, cell.v_center + half, resolution)
    # slice length in z at fixed v: overlap of the two position intervals
    lo1 = (b1.center - b1.half_width - b1.a_v * v) / b1.a_z
    hi1 = (b1.center + b1.half_width - b1.a_v * v) / b1.a_z
    lo2 = (b2.center - b2.half_width - b2.a_v * v) / b2.a_z
    hi2 = (b2.center + b2.half_width - b2.a_v * v) / b2.a_z
    lo = np.maximum(np.minimum(lo1, hi1), np.minimum(lo2, hi2))
    hi = np.minimum(np.maximum(lo1, hi1), np.maximum(lo2, hi2))
    length = np.clip(hi - lo, 0.0, None)
    return v, length / cell.area


_PROBABILITY_MODES = ("averaged", "point")
_DECISION_MODES = ("bernoulli", "band")


@dataclass(frozen=True)
class EnsembleSpec:
    """Thermal cloud and sampling policy for the Monte Carlo run.

    Positions and velocities are drawn from independent Gaussians at the
    first pulse's time; dz0 is each atom's quantum packet width there.
    probability_mode picks how the flip probability is computed
    ("averaged" over the packet, or "point" at the packet center);
    decision_mode is "bernoulli" (accept with that probability) or
    "band" (accept exactly when the Rabi envelope is at least 1/2, the
    deterministic geometric rule).  survival_efficiency applies an
    extra per-stage Bernoulli loss.
    """

    n: int
    z_mean: float
    z_rms: float
    v_mean: float
    v_rms: float
    dz0: float
    seed: int
    sigma: int = 1
    probability_mode: str = "averaged"
    decision_mode: str = "bernoulli"
    survival_efficiency: float = 1.0

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError("n must be at least 1")
        if self.z_rms < 0.0 or self.v_rms < 0.0:
            raise ValueError("z_rms and v_rms must be nonnegative")
        if self.dz0 <= 0.0:
            raise ValueError("dz0 must be positive")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must fit in 64 bits")
        if self.sigma not in (1, -1):
            raise ValueError("sigma must be +1 or -1")
        if self.probability_mode not in _PROBABILITY_MODES:
            raise ValueError(f"probability_mode must be one of {_PROBABILITY_MODES}")
        if self.decision_mode not in _DECISION_MODES:
            raise ValueError(f"decision_mode must be one of {_DECISION_MODES}")
        if not 0.0 < self.survival_efficiency <= 1.0:
            raise ValueError("survival_efficiency must be in (0, 1]")


@dataclass(frozen=True)
class MonteCarloResult:
    """Per-atom outcomes plus the predicted cell.

    z_final/v_final are at the second pulse's time and are NaN for atoms
    lost at either stage.
    """

    z0: np.ndarray
    v0: np.ndarray
    survived_first: np.ndarray
    survived_both: np.ndarray
    z_final: np.ndarray
    v_final: np.ndarray
    cell: SelectionCell
    delta_t: float
    spec: EnsembleSpec = field(repr=False)

    @property
    def n_total(self) -> int:
        return self.z0.size

    @property
    def n_survived_first(self) -> int:
        return int(np.count_nonzero(self.survived_first))

    @property
    def n_survived_both(self) -> int:
        return int(np.count_nonzero(self.survived_both))

    def summary(self) -> dict:
        """Scalar digest used by the CLI and tests."""
        out = {
            "n_total": self.n_total,
            "n_survived_first": self.n_survived_first,
            "n_survived_both": self.n_survived_both,
            "fraction_both": self.n_survived_both / self.n_total,
            "cell_z_center_m": self.cell.z_center,
            "cell_v_center_m_s": self.cell.v_center,
            "cell_velocity_support_m_s": self.cell.velocity_support,
            "cell_area_m2_s": self.cell.area,
        }
        if self.n_survived_both:
            vf = self.v_final[self.survived_both]
            zf = self.z_final[self.survived_both]
            out.update(
                survivor_v_mean_m_s=float(np.mean(vf)),
                survivor_v_std_m_s=float(np.std(vf)),
                survivor_v_min_m_s=float(np.min(vf)),
                survivor_v_max_m_s=float(np.max(vf)),
                survivor_v_range_m_s=float(np.max(vf) - np.min(vf)),
                survivor_z_mean_m=float(np.mean(zf)),
                survivor_z_std_m=float(np.std(zf)),
            )
        else:
            out.update(
                survivor_v_mean_m_s=None,
                survivor_v_std_m_s=None,
                survivor_v_min_m_s=None,
                survivor_v_max_m_s=None,
                survivor_v_range_m_s=None,
                survivor_z_mean_m=None,
                survivor_z_std_m=None,
            )
        return out


def _atom_draws(seed: int, index: int, spec: EnsembleSpec):
    """Fixed six-draw layout on the atom's private counter-based stream.

    One stream per atom keyed by (seed, index) makes every atom's draw
    sequence independent of batching, worker count and atom order.
    """
    rng = np.random.Generator(np.random.Philox(key=[seed, index]))
    z = spec.z_mean + spec.z_rms * rng.standard_normal()
    v = spec.v_mean + spec.v_rms * rng.standard_normal()
    u1, e1, u2, e2 = rng.random(4)
    return z, v, u1, e1, u2, e2


def _accept(
    u: np.ndarray,
    eff: np.ndarray,
    z: np.ndarray,
    dz: float,
    pulse: PulseSpec,
    cfg: FieldConfig,
    spec: EnsembleSpec,
) -> np.ndarray:
    if spec.decision_mode == "band":
        keep = np.abs(detuning(z, pulse, cfg)) <= 2.0 * pulse.coupling_omega0
    else:
        if spec.probability_mode == "point":
            p = point_probability(z, pulse, cfg)
        else:
            p = averaged_probability_batch(z, dz, pulse, cfg)
        keep = u < p
    return keep & (eff < spec.survival_efficiency)


def run_monte_carlo(
    spec: EnsembleSpec,
    pulse_first: PulseSpec,
    pulse_second: PulseSpec,
    cfg: FieldConfig,
    delta_t: float,
    workers: int = 1,
) -> MonteCarloResult:
    """Sample the cloud through both pulses.

    workers only partitions the atom index range into contiguous blocks
    (as a parallel scheduler would); results are bit-identical for any
    worker count because every atom owns its random stream and all
    per-atom arithmetic is row-independent.
    """
    if workers < 1:
        raise ValueError("workers must be at least 1")
    if delta_t <= 0.0:
        raise ValueError("delta_t must be positive")
    for pulse in (pulse_first, pulse_second):
        if pulse.branch.sigma != spec.sigma:
            raise LevelMismatchError(
                "pulse addresses a different stretched pair than the ensemble"
            )
    gap = pulse_second.t0 - pulse_first.t0
    if not math.isclose(gap, delta_t, rel_tol=1e-9, abs_tol=0.0):
        raise ValueError(
            f"pulse centers are {gap:g} s apart but delta_t = {delta_t:g} s"
        )

    n = spec.n
    z0 = np.empty(n)
    v0 = np.empty(n)
    u1 = np.empty(n)
    e1 = np.empty(n)
    u2 = np.empty(n)
    e2 = np.empty(n)
    for i in range(n):
        z0[i], v0[i], u1[i], e1[i], u2[i], e2[i] = _atom_draws(spec.seed, i, spec)

    dz_first = spec.dz0
    dz_second = spread_width(spec.dz0, delta_t, cfg.species)
    g = g_effective(cfg.species, cfg.eta, Level.UPPER, spec.sigma)

    survived_first = np.zeros(n, dtype=bool)
    survived_both = np.zeros(n, dtype=bool)
    z_final = np.full(n, np.nan)
    v_final = np.full(n, np.nan)

    for block in np.array_split(np.arange(n), workers):
        for start in range(0, block.size, _CHUNK):
            idx = block[start : start + _CHUNK]
            if idx.size == 0:
                continue
            z = z0[idx]
            v = v0[idx]
            ok1 = _accept(u1[idx], e1[idx], z, dz_first, pulse_first, cfg, spec)
            z2 = z + v * delta_t - 0.5 * g * delta_t * delta_t
            v2 = v - g * delta_t
            ok2 = _accept(u2[idx], e2[idx], z2, dz_second, pulse_second, cfg, spec)
            ok2 &= ok1
            survived_first[idx] = ok1
            survived_both[idx] = ok2
            z_final[idx[ok2]] = z2[ok2]
            v_final[idx[ok2]] = v2[ok2]

    band1 = band_from_first_pulse(pulse_first, cfg, delta_t)
    band2 = band_from_second_pulse(pulse_second, cfg)
    cell = selection_cell(band1, band2)
    return MonteCarloResult(
        z0=z0,
        v0=v0,
        survived_first=survived_first,
        survived_both=survived_both,
        z_final=z_final,
        v_final=v_final,
        cell=cell,
        delta_t=delta_t,
        spec=spec,
    )

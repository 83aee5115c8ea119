"""
Space vector PWM for a two-level, three-leg inverter.

The q-d stationary frame follows ``V_qds = V_q - j V_d``: a balanced
positive-sequence set ``a = cos(wt)`` maps to ``vq = cos(wt)``,
``vd = -sin(wt)`` and the space-vector angle ``alpha = wt``.

"""
from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from imdrive.errors import InvalidInputError

SQRT3 = math.sqrt(3.0)
TWO_PI = 2.0 * math.pi
SECTOR_WIDTH = math.pi / 3.0


@dataclass(frozen=True)
class ThreePhase:
    """Instantaneous phase quantities (V)."""
    a: float
    b: float
    c: float

    def __post_init__(self):
        if not all(math.isfinite(x) for x in (self.a, self.b, self.c)):
            raise InvalidInputError(f"non-finite three-phase value {self}")

    def __iter__(self):
        return iter((self.a, self.b, self.c))


@dataclass(frozen=True)
class SpaceVector:
    """
    Space vector in the stationary q-d frame.

    Parameters
    ----------
    vq : float
        q-axis (phase-a aligned) component.
    vd : float
        d-axis component; lags vq by 90 degrees in the ``vq - j vd`` phasor.

    """
    vq: float
    vd: float

    @property
    def mag(self) -> float:
        return math.hypot(self.vq, self.vd)

    @property
    def alpha(self) -> float:
        """Angle from the positive real axis in [0, 2*pi)."""
        ang = math.atan2(-self.vd, self.vq)
        if ang < 0.0:
            ang += TWO_PI
        return 0.0 if ang >= TWO_PI else ang

    @classmethod
    def from_polar(cls, mag: float, alpha: float) -> "SpaceVector":
        return cls(mag * math.cos(alpha), -mag * math.sin(alpha))


class SwitchState(NamedTuple):
    """Leg states, 1 meaning the upper device of that leg conducts."""
    sa: int
    sb: int
    sc: int

    def __str__(self):
        return f"{self.sa}{self.sb}{self.sc}"

    @property
    def index(self) -> int:
        """Position in ``SWITCH_STATES`` (binary code, phase a as MSB)."""
        return 4 * self.sa + 2 * self.sb + self.sc


# All eight inverter states; index = 4*sa + 2*sb + sc.
SWITCH_STATES = tuple(SwitchState(i >> 2 & 1, i >> 1 & 1, i & 1) for i in range(8))
V0 = SwitchState(0, 0, 0)
V7 = SwitchState(1, 1, 1)

# Active vectors bounding each sector, leading edge first (applied for T1),
# trailing edge second (applied for T2).
SECTOR_VECTORS = {
    1: (SwitchState(1, 0, 0), SwitchState(1, 1, 0)),
    2: (SwitchState(1, 1, 0), SwitchState(0, 1, 0)),
    3: (SwitchState(0, 1, 0), SwitchState(0, 1, 1)),
    4: (SwitchState(0, 1, 1), SwitchState(0, 0, 1)),
    5: (SwitchState(0, 0, 1), SwitchState(1, 0, 1)),
    6: (SwitchState(1, 0, 1), SwitchState(1, 0, 0)),
}


@dataclass(frozen=True)
class DwellTimes:
    """Active and zero vector times within one half switching period (s)."""
    t1: float
    t2: float
    t0: float


@dataclass(frozen=True)
class SwitchingSequence:
    """Ordered ``(state, duration)`` segments filling one switching period."""
    segments: tuple
    period: float

    @property
    def states(self) -> list:
        return [s for s, _ in self.segments]

    @property
    def durations(self) -> np.ndarray:
        return np.array([d for _, d in self.segments])

    @property
    def starts(self) -> np.ndarray:
        """Segment start times relative to the period start."""
        d = self.durations
        return np.concatenate(([0.0], np.cumsum(d[:-1])))


@dataclass(frozen=True)
class ModulatorConfig:
    """
    Modulator settings.

    Parameters
    ----------
    fsw : float
        Switching frequency (Hz).
    vdc : float
        DC bus voltage (V).
    mod_index : float
        Reference amplitude relative to the active-vector length 2/3*vdc.
    fo : float
        Fundamental output frequency (Hz).

    """
    fsw: float
    vdc: float = 625.0
    mod_index: float = 0.9
    fo: float = 60.0

    def __post_init__(self):
        if not (self.fsw > 0 and self.vdc > 0 and self.fo > 0):
            raise InvalidInputError("fsw, vdc and fo must be positive")
        if not 0.0 < self.mod_index <= 1.0:
            raise InvalidInputError(f"mod_index {self.mod_index} outside (0, 1]")

    @property
    def ts(self) -> float:
        return 1.0 / self.fsw

    @property
    def vm(self) -> float:
        """Length of an active switching vector."""
        return 2.0 / 3.0 * self.vdc

    @property
    def vref(self) -> float:
        """Peak phase amplitude of the commanded reference."""
        return self.mod_index * self.vm

    @property
    def omega_o(self) -> float:
        return TWO_PI * self.fo


def clarke_transform(abc: ThreePhase) -> SpaceVector:
    """Project phase quantities onto the q-d stationary frame."""
    a, b, c = abc
    if not all(math.isfinite(x) for x in (a, b, c)):
        raise InvalidInputError(f"non-finite input {abc!r}")
    return SpaceVector((2.0 * a - b - c) / 3.0, -(b - c) / SQRT3)


def inverse_clarke(vq: float, vd: float) -> ThreePhase:
    """Zero-sequence-free phase quantities of a q-d vector."""
    return ThreePhase(vq, 0.5 * (-vq - SQRT3 * vd), 0.5 * (-vq + SQRT3 * vd))


def sector_of(alpha: float) -> tuple[int, float]:
    """
    Locate the hexagon sector of an angle.

    Sectors are half-open, ``[(s-1)*60deg, s*60deg)``. Angles outside
    [0, 2*pi) are wrapped first.

    Returns
    -------
    sector : int
        Sector index 1..6.
    theta : float
        Angle measured from the sector's leading edge.

    """
    alpha = alpha % TWO_PI
    if alpha >= TWO_PI:  # -tiny % 2pi rounds up to 2pi
        alpha = 0.0
    s = min(int(alpha // SECTOR_WIDTH), 5)
    return s + 1, alpha - s * SECTOR_WIDTH


def dwell_times(vref_mag: float, theta_in_sector: float, cfg: ModulatorConfig) -> DwellTimes:
    """
    Active and zero vector times for one half switching period.

    Outside the hexagon the active times are scaled down together so the
    zero time never goes negative.

    """
    if vref_mag < 0 or not math.isfinite(vref_mag):
        raise InvalidInputError(f"reference magnitude must be >= 0, got {vref_mag}")
    half = 0.5 * cfg.ts
    k = vref_mag / (cfg.vm * math.sin(SECTOR_WIDTH)) * half
    t1 = k * math.sin(SECTOR_WIDTH - theta_in_sector)
    t2 = k * math.sin(theta_in_sector)
    if t1 + t2 > half:
        scale = half / (t1 + t2)
        t1, t2 = t1 * scale, t2 * scale
        t0 = 0.0
    else:
        t0 = half - t1 - t2
    return DwellTimes(t1, t2, t0)


def build_sequence(sector: int, dwell: DwellTimes) -> SwitchingSequence:
    """
    Symmetric seven-segment sequence for one switching period.

    The zero time is shared equally by V0 and V7. The active vectors are
    ordered so that each transition toggles a single leg, which means the
    single-one vector always follows V0.
    """
    if sector not in SECTOR_VECTORS:
        raise InvalidInputError(f"sector must be 1..6, got {sector!r}")
    lead, trail = SECTOR_VECTORS[sector]
    first, second = (lead, trail), (dwell.t1, dwell.t2)
    if sum(lead) == 2:
        first, second = (trail, lead), (dwell.t2, dwell.t1)
    half_zero = 0.5 * dwell.t0
    segments = (
        (V0, half_zero),
        (first[0], second[0]),
        (first[1], second[1]),
        (V7, dwell.t0),
        (first[1], second[1]),
        (first[0], second[0]),
        (V0, half_zero),
    )
    period = 2.0 * (dwell.t1 + dwell.t2 + dwell.t0)
    return SwitchingSequence(segments, period)


def sample_gates(seq: SwitchingSequence, t_in_period: float) -> SwitchState:
    """State of the (left-closed) segment containing ``t_in_period``."""
    t = t_in_period % seq.period
    starts = seq.starts
    i = bisect_right(starts, t) - 1
    # zero-length segments share a start with their successor; bisect skips them
    return seq.segments[max(i, 0)][0]


def reference_vector(t: float, cfg: ModulatorConfig) -> SpaceVector:
    """Rotating reference at time ``t``, obtained from its phase references."""
    th = cfg.omega_o * t
    ref = ThreePhase(
        cfg.vref * math.cos(th),
        cfg.vref * math.cos(th - TWO_PI / 3.0),
        cfg.vref * math.cos(th + TWO_PI / 3.0),
    )
    return clarke_transform(ref)


def sequence_for(ref: SpaceVector, cfg: ModulatorConfig) -> SwitchingSequence:
    """Full modulation chain: sector, dwell times and switching sequence."""
    sector, theta = sector_of(ref.alpha)
    return build_sequence(sector, dwell_times(ref.mag, theta, cfg))

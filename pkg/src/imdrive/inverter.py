"""Ideal two-level voltage source inverter feeding an isolated-neutral star load."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from imdrive.errors import InvalidInputError
from imdrive.svpwm import SWITCH_STATES, SwitchState, clarke_transform, ThreePhase


@dataclass(frozen=True)
class DcBus:
    """Stiff DC source, constant for the whole run."""
    vdc: float

    def __post_init__(self):
        if not self.vdc > 0:
            raise InvalidInputError(f"vdc must be positive, got {self.vdc}")


@dataclass(frozen=True)
class PhaseVoltages:
    """Line-to-neutral voltages (V)."""
    van: float
    vbn: float
    vcn: float

    def __iter__(self):
        return iter((self.van, self.vbn, self.vcn))


def phase_voltages(state: SwitchState, bus: DcBus) -> PhaseVoltages:
    sa, sb, sc = state
    k = bus.vdc / 3.0
    return PhaseVoltages(
        k * (2 * sa - sb - sc),
        k * (2 * sb - sa - sc),
        k * (2 * sc - sa - sb),
    )


def state_table(bus: DcBus) -> np.ndarray:
    """
    Output voltages for every switch state.

    Returns
    -------
    ndarray, shape (8, 5)
        Columns ``van, vbn, vcn, vq, vd``; row ``i`` is ``SWITCH_STATES[i]``.

    """
    rows = []
    for s in SWITCH_STATES:
        v = phase_voltages(s, bus)
        sv = clarke_transform(ThreePhase(*v))
        rows.append((*v, sv.vq, sv.vd))
    return np.array(rows)

"""
Squirrel-cage induction machine in the stationary q-d frame.

The state is the four flux linkages plus electrical rotor speed. Currents
follow from the inductance relations; torque uses the amplitude-invariant
3/2 factor consistent with the Clarke scaling in :mod:`imdrive.svpwm`.

"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from numba import njit

from imdrive.errors import InvalidInputError, SingularParameterError


@dataclass(frozen=True)
class Nameplate:
    """
    Per-phase equivalent-circuit data as found on a machine data sheet.

    Defaults are the 100 hp, 4-pole, 60 Hz test machine.

    Parameters
    ----------
    r1, r2 : float
        Stator and rotor resistance (Ω).
    x1, x2 : float
        Stator and rotor leakage reactance at ``f_base`` (Ω).
    xm : float
        Magnetizing reactance at ``f_base`` (Ω).

    """
    v_rated_ll: float = 460.0
    r1: float = 0.0425
    r2: float = 0.0425
    x1: float = 0.284
    x2: float = 0.284
    xm: float = 8.51
    j: float = 2.0
    slip_rated: float = 0.0177
    poles: int = 4
    f_base: float = 60.0
    hp: float = 100.0


@dataclass(frozen=True)
class MachineParams:
    rs: float
    rr: float
    lls: float
    llr: float
    lm: float
    poles: int
    j: float
    f_base: float
    v_rated_ll: float
    slip_rated: float

    @property
    def ls(self) -> float:
        return self.lls + self.lm

    @property
    def lr(self) -> float:
        return self.llr + self.lm

    @property
    def det(self) -> float:
        return self.ls * self.lr - self.lm ** 2

    @property
    def pole_pairs(self) -> float:
        return self.poles / 2

    @property
    def omega_base(self) -> float:
        return 2.0 * math.pi * self.f_base

    @property
    def omega_sync_mech(self) -> float:
        return self.omega_base / self.pole_pairs

    def coeffs(self) -> np.ndarray:
        """Flat parameter vector consumed by :func:`rhs`."""
        if not self.det > 0:
            raise SingularParameterError(f"ls*lr - lm^2 = {self.det} <= 0")
        return np.array([self.rs, self.rr, self.ls, self.lr, self.lm,
                         self.det, self.pole_pairs, self.j])


class MachineState(NamedTuple):
    lam_qs: float = 0.0
    lam_ds: float = 0.0
    lam_qr: float = 0.0
    lam_dr: float = 0.0
    omega_r: float = 0.0


class DqCurrents(NamedTuple):
    iqs: float
    ids: float
    iqr: float
    idr: float


@dataclass(frozen=True)
class MachineOutputs:
    iqs: float
    ids: float
    iqr: float
    idr: float
    ia: float
    ib: float
    ic: float
    te: float
    omega_m: float
    speed_pu: float


def params_from_nameplate(table: Nameplate = Nameplate()) -> MachineParams:
    """Convert reactances at base frequency to inductances."""
    values = (table.r1, table.r2, table.x1, table.x2, table.xm, table.j,
              table.f_base, table.v_rated_ll, table.poles)
    if not all(v > 0 for v in values):
        raise InvalidInputError(f"nameplate entries must be positive: {table}")
    if table.poles % 2:
        raise InvalidInputError(f"pole count must be even, got {table.poles}")
    wb = 2.0 * math.pi * table.f_base
    return MachineParams(
        rs=table.r1, rr=table.r2,
        lls=table.x1 / wb, llr=table.x2 / wb, lm=table.xm / wb,
        poles=table.poles, j=table.j, f_base=table.f_base,
        v_rated_ll=table.v_rated_ll, slip_rated=table.slip_rated,
    )


def flux_to_currents(s: MachineState, p: MachineParams) -> DqCurrents:
    d = p.det
    if not d > 0:
        raise SingularParameterError(f"ls*lr - lm^2 = {d} <= 0")
    ls, lr, lm = p.ls, p.lr, p.lm
    return DqCurrents(
        (lr * s.lam_qs - lm * s.lam_qr) / d,
        (lr * s.lam_ds - lm * s.lam_dr) / d,
        (ls * s.lam_qr - lm * s.lam_qs) / d,
        (ls * s.lam_dr - lm * s.lam_ds) / d,
    )


def currents_to_flux(i: DqCurrents, p: MachineParams) -> MachineState:
    """Flux linkages for given currents, rotor speed zero."""
    return MachineState(
        p.ls * i.iqs + p.lm * i.iqr,
        p.ls * i.ids + p.lm * i.idr,
        p.lr * i.iqr + p.lm * i.iqs,
        p.lr * i.idr + p.lm * i.ids,
    )


def electromagnetic_torque(s: MachineState, i: DqCurrents, p: MachineParams) -> float:
    return 1.5 * p.pole_pairs * (s.lam_ds * i.iqs - s.lam_qs * i.ids)


def state_derivative(s: MachineState, vqs: float, vds: float, tl: float,
                     p: MachineParams) -> MachineState:
    """
    Time derivative of the machine state.

    The rotor is referred to the stator frame, so its flux equations carry
    the speed voltages ``+omega_r*lam_dr`` (q) and ``-omega_r*lam_qr`` (d).
    """
    i = flux_to_currents(s, p)
    te = electromagnetic_torque(s, i, p)
    return MachineState(
        vqs - p.rs * i.iqs,
        vds - p.rs * i.ids,
        -p.rr * i.iqr + s.omega_r * s.lam_dr,
        -p.rr * i.idr - s.omega_r * s.lam_qr,
        p.pole_pairs * (te - tl) / p.j,
    )


@njit(cache=True)
def rhs(y, vqs, vds, tl, c):
    """Array form of :func:`state_derivative`; ``c`` from ``MachineParams.coeffs``."""
    rs, rr, ls, lr, lm, d, pp, j = c[0], c[1], c[2], c[3], c[4], c[5], c[6], c[7]
    qs, ds, qr, dr, wr = y[0], y[1], y[2], y[3], y[4]
    iqs = (lr * qs - lm * qr) / d
    ids = (lr * ds - lm * dr) / d
    iqr = (ls * qr - lm * qs) / d
    idr = (ls * dr - lm * ds) / d
    te = 1.5 * pp * (ds * iqs - qs * ids)
    out = np.empty(5)
    out[0] = vqs - rs * iqs
    out[1] = vds - rs * ids
    out[2] = -rr * iqr + wr * dr
    out[3] = -rr * idr - wr * qr
    out[4] = pp * (te - tl) / j
    return out


def outputs(states: np.ndarray, p: MachineParams) -> dict:
    """
    Currents, torque and speed for a trajectory.

    Parameters
    ----------
    states : ndarray, shape (n, 5)
        Rows of ``MachineState`` fields.

    Returns
    -------
    dict of ndarray
        Keys are the ``MachineOutputs`` field names.

    """
    qs, ds, qr, dr, wr = np.asarray(states, dtype=float).T
    d = p.det
    iqs = (p.lr * qs - p.lm * qr) / d
    ids = (p.lr * ds - p.lm * dr) / d
    iqr = (p.ls * qr - p.lm * qs) / d
    idr = (p.ls * dr - p.lm * ds) / d
    s3 = math.sqrt(3.0)
    omega_m = wr / p.pole_pairs
    return {
        "iqs": iqs, "ids": ids, "iqr": iqr, "idr": idr,
        "ia": iqs,
        "ib": 0.5 * (-iqs - s3 * ids),
        "ic": 0.5 * (-iqs + s3 * ids),
        "te": 1.5 * p.pole_pairs * (ds * iqs - qs * ids),
        "omega_m": omega_m,
        "speed_pu": omega_m / p.omega_sync_mech,
    }


def machine_outputs(s: MachineState, p: MachineParams) -> MachineOutputs:
    out = outputs(np.array([s]), p)
    return MachineOutputs(**{k: float(v[0]) for k, v in out.items()})


def equivalent_circuit_torque(slip: float, v_phase_rms: float, p: MachineParams,
                              f: float | None = None) -> float:
    """
    Steady-state shaft torque from the per-phase equivalent circuit.

    The stator side is Thevenin-reduced so the rotor branch current is
    exact. ``f`` is the supply frequency, base frequency by default.
    """
    if slip == 0:
        return 0.0
    f = p.f_base if f is None else f
    w = 2.0 * math.pi * f
    zs = complex(p.rs, w * p.lls)
    zm = complex(0.0, w * p.lm)
    vth = v_phase_rms * zm / (zs + zm)
    zth = zs * zm / (zs + zm)
    i2 = vth / (zth + complex(p.rr / slip, w * p.llr))
    w_sync = w / p.pole_pairs
    return 3.0 * abs(i2) ** 2 * (p.rr / slip) / w_sync


def slip_at_torque(tl: float, v_phase_rms: float, p: MachineParams,
                   f: float | None = None) -> float:
    """Stable-branch slip at which the equivalent circuit delivers ``tl``."""
    from scipy.optimize import brentq, minimize_scalar

    if tl == 0:
        return 0.0
    # stable branch lies between zero slip and breakdown slip
    res = minimize_scalar(lambda s: -equivalent_circuit_torque(s, v_phase_rms, p, f),
                          bounds=(1e-6, 1.0), method="bounded")
    if -res.fun < tl:
        raise InvalidInputError(f"load {tl} N·m exceeds breakdown torque {-res.fun:.1f} N·m")
    return brentq(lambda s: equivalent_circuit_torque(s, v_phase_rms, p, f) - tl,
                  1e-12, res.x, xtol=1e-14)

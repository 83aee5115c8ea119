"""
Fixed-step classical Runge-Kutta integration.

:func:`rk4_step` and :func:`integrate` take any right-hand side. The drive
loop in :func:`integrate_machine` is compiled and reads the switched
forcing from precomputed stage arrays.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

from imdrive.errors import IntegrationDivergedError, InvalidInputError
from imdrive.machine import rhs


@dataclass(frozen=True)
class IntegratorConfig:
    dt: float

    def __post_init__(self):
        if not self.dt > 0:
            raise InvalidInputError(f"dt must be positive, got {self.dt}")

    @classmethod
    def for_switching(cls, fsw: float) -> "IntegratorConfig":
        """Ten steps per switching period."""
        return cls(1.0 / (10.0 * fsw))


def rk4_step(f, state, t, dt):
    """Advance ``dy/dt = f(t, y)`` by one step of length ``dt``."""
    if not dt > 0:
        raise InvalidInputError(f"dt must be positive, got {dt}")
    y = np.asarray(state, dtype=float)
    k1 = np.asarray(f(t, y), dtype=float)
    k2 = np.asarray(f(t + 0.5 * dt, y + 0.5 * dt * k1), dtype=float)
    k3 = np.asarray(f(t + 0.5 * dt, y + 0.5 * dt * k2), dtype=float)
    k4 = np.asarray(f(t + dt, y + dt * k3), dtype=float)
    for k in (k1, k2, k3, k4):
        if not np.all(np.isfinite(k)):
            raise IntegrationDivergedError(t)
    return y + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def integrate(f, y0, t0, dt, n_steps):
    """Trajectory of ``n_steps`` RK4 steps, shape ``(n_steps + 1, len(y0))``."""
    y = np.asarray(y0, dtype=float)
    out = np.empty((n_steps + 1, y.size))
    out[0] = y
    for n in range(n_steps):
        y = rk4_step(f, y, t0 + n * dt, dt)
        out[n + 1] = y
    return out


@njit(cache=True)
def _machine_loop(y0, vq, vd, tl, dt, c):
    n = (vq.shape[0] - 1) // 2
    out = np.empty((n + 1, 5))
    out[0] = y0
    y = y0.copy()
    h = 0.5 * dt
    for i in range(n):
        m = 2 * i
        k1 = rhs(y, vq[m], vd[m], tl[m], c)
        k2 = rhs(y + h * k1, vq[m + 1], vd[m + 1], tl[m + 1], c)
        k3 = rhs(y + h * k2, vq[m + 1], vd[m + 1], tl[m + 1], c)
        k4 = rhs(y + dt * k3, vq[m + 2], vd[m + 2], tl[m + 2], c)
        y = y + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        for v in y:
            if not np.isfinite(v):
                return out[: i + 1], i
        out[i + 1] = y
    return out, -1


def integrate_machine(y0, vq_stage, vd_stage, tl_stage, dt, coeffs):
    """
    Integrate the machine under a tabulated forcing.

    Parameters
    ----------
    y0 : array_like, shape (5,)
        Initial ``MachineState``.
    vq_stage, vd_stage, tl_stage : ndarray, shape (2*n + 1,)
        Inputs at the RK4 stage instants ``k*dt/2``: even entries fall on
        grid points, odd entries on step midpoints.
    dt : float
        Step length (s).
    coeffs : ndarray
        ``MachineParams.coeffs()``.

    Returns
    -------
    ndarray, shape (n + 1, 5)

    """
    vq = np.ascontiguousarray(vq_stage, dtype=float)
    vd = np.ascontiguousarray(vd_stage, dtype=float)
    tl = np.ascontiguousarray(tl_stage, dtype=float)
    if not (vq.shape == vd.shape == tl.shape) or vq.size % 2 == 0:
        raise InvalidInputError("stage arrays must share an odd length 2*n + 1")
    states, bad = _machine_loop(np.asarray(y0, dtype=float), vq, vd, tl, float(dt), coeffs)
    if bad >= 0:
        raise IntegrationDivergedError(bad * dt)
    return states

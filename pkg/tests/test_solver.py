import math

import numpy as np
import pytest

from imdrive.errors import IntegrationDivergedError, InvalidInputError
from imdrive.solver import IntegratorConfig, integrate, integrate_machine, rk4_step


def decay(t, y):
    return -y


def _global_error(dt):
    n = int(round(1.0 / dt))
    return abs(integrate(decay, [1.0], 0.0, dt, n)[-1, 0] - math.exp(-1.0))


def test_constant_state():
    assert rk4_step(lambda t, y: np.zeros(1), [5.0], 0.0, 0.1)[0] == 5.0


def test_exponential_decay():
    y = integrate(decay, [1.0], 0.0, 1e-3, 1000)
    assert y[-1, 0] == pytest.approx(0.367879441171, abs=1e-9)


def test_fourth_order_convergence():
    ratio = _global_error(0.02) / _global_error(0.01)
    assert 12.0 <= ratio <= 20.0


def test_time_dependent_rhs_uses_stage_times():
    # dy/dt = cos t integrates sin exactly to RK4 (Simpson) accuracy
    y = integrate(lambda t, y: np.array([math.cos(t)]), [0.0], 0.0, 0.01, 100)
    assert y[-1, 0] == pytest.approx(math.sin(1.0), abs=1e-10)


def test_deterministic():
    a = integrate(decay, [1.0, 2.0], 0.0, 1e-2, 50)
    b = integrate(decay, [1.0, 2.0], 0.0, 1e-2, 50)
    assert a.tobytes() == b.tobytes()


def test_divergence_reports_time():
    with pytest.raises(IntegrationDivergedError) as exc:
        integrate(lambda t, y: y / (0.5 - t) if t < 0.5 else np.array([math.inf]), [1.0], 0.0, 0.1, 10)
    assert exc.value.t == pytest.approx(0.4)


def test_bad_step():
    with pytest.raises(InvalidInputError):
        rk4_step(decay, [1.0], 0.0, 0.0)
    with pytest.raises(InvalidInputError):
        IntegratorConfig(-1.0)


def test_switching_step_default():
    assert IntegratorConfig.for_switching(7000.0).dt == pytest.approx(1 / 70000)


def test_machine_loop_divergence():
    from imdrive.machine import params_from_nameplate

    n = 10
    vq = np.full(2 * n + 1, 1e308)
    with pytest.raises(IntegrationDivergedError):
        integrate_machine(np.zeros(5), vq, np.zeros_like(vq), np.zeros_like(vq), 1e-3,
                          params_from_nameplate().coeffs())


def test_machine_loop_rejects_mismatched_stages():
    from imdrive.machine import params_from_nameplate

    with pytest.raises(InvalidInputError):
        integrate_machine(np.zeros(5), np.zeros(4), np.zeros(4), np.zeros(4), 1e-3,
                          params_from_nameplate().coeffs())

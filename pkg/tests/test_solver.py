import math

import numpy as np
import pytest

from stgncde.autodiff import Tensor
from stgncde.errors import ConfigError, DivergenceError
from stgncde.solver import SolverConfig, integrate


def _exp_field(t, state):
    return state


def test_constant_field_euler_is_exact():
    c = np.array([0.5, -2.0])
    final = integrate(lambda t, s: Tensor(c), Tensor([1.0, 1.0]), (0.0, 11.0), SolverConfig("euler", 2))
    np.testing.assert_array_equal(final.data, [1.0 + 5.5, 1.0 - 22.0])


def test_constant_field_rk4():
    c = np.array([0.5, -2.0])
    final = integrate(lambda t, s: Tensor(c), Tensor([1.0, 1.0]), (0.0, 11.0), SolverConfig("rk4", 1))
    np.testing.assert_allclose(final.data, [6.5, -21.0], atol=1e-12)


def test_rk4_single_step_of_exponential():
    final = integrate(_exp_field, Tensor([1.0]), (0.0, 0.1), SolverConfig("rk4", 10))
    assert final.data[0] == pytest.approx(1.10517083333, abs=1e-10)


def test_euler_linear_field():
    final = integrate(lambda t, s: Tensor([2.0 * t]), Tensor([0.0]), (0.0, 1.0), SolverConfig("euler", 4))
    assert final.data[0] == pytest.approx(0.75, abs=1e-14)


def test_zero_steps_rejected():
    with pytest.raises(ConfigError):
        integrate(_exp_field, Tensor([1.0]), (0.0, 0.1), SolverConfig("rk4", 1))


@pytest.mark.parametrize("method,steps_per_unit", [("midpoint", 1), ("rk4", 0), ("euler", 1.5)])
def test_invalid_solver_config(method, steps_per_unit):
    with pytest.raises(ConfigError):
        SolverConfig(method, steps_per_unit)


def _exp_error(method, steps_per_unit):
    final = integrate(_exp_field, Tensor([1.0]), (0.0, 1.0), SolverConfig(method, steps_per_unit))
    return abs(final.data[0] - math.e)


def test_euler_is_first_order():
    ratio = _exp_error("euler", 8) / _exp_error("euler", 16)
    assert 1.7 <= ratio <= 2.3


def test_rk4_is_fourth_order():
    ratio = _exp_error("rk4", 4) / _exp_error("rk4", 8)
    assert 12.0 <= ratio <= 20.0


def test_euler_matches_the_recurrence_bitwise():
    rng = np.random.default_rng(0)
    W = rng.normal(size=(3, 3)) * 0.3

    def field(t, state):
        return (state @ Tensor(W)).tanh() + Tensor(np.full(3, 0.01 * t))

    final = integrate(field, Tensor(np.ones((1, 3))), (0.0, 11.0), SolverConfig("euler", 1))
    manual = Tensor(np.ones((1, 3)))
    for k in range(11):
        manual = manual + 1.0 * field(float(k), manual)
    np.testing.assert_array_equal(final.data, manual.data)


def test_stage_times_stay_inside_the_span():
    seen = []

    def field(t, state):
        seen.append(t)
        return state

    integrate(field, Tensor([1.0]), (0.0, 1.0), SolverConfig("rk4", 3))
    assert max(seen) <= 1.0
    assert min(seen) == 0.0


def test_divergence_names_the_step():
    def field(t, state):
        return Tensor([np.inf]) if t >= 2.0 else state

    with pytest.raises(DivergenceError) as info:
        integrate(field, Tensor([1.0]), (0.0, 5.0), SolverConfig("euler", 1))
    assert "step 3" in str(info.value)

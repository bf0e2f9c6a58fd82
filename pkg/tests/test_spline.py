import numpy as np
import pytest

from stgncde.errors import DomainError, ShapeError, SplineError
from stgncde.interpolation import ControlPath, build_control_paths, eval_derivative, eval_spline, fit_natural_cubic


def _segment_value(spline, j, u):
    return spline.a[j] + u * (spline.b[j] + u * (spline.c[j] + u * spline.d[j]))


def _segment_slope(spline, j, u):
    return spline.b[j] + u * (2.0 * spline.c[j] + 3.0 * u * spline.d[j])


def _segment_curvature(spline, j, u):
    return 2.0 * spline.c[j] + 6.0 * u * spline.d[j]


def test_two_knots_give_a_line():
    spline = fit_natural_cubic([0.0, 1.0], [0.0, 1.0])
    assert eval_spline(spline, 0.5) == pytest.approx(0.5, abs=1e-12)
    assert eval_derivative(spline, 0.5) == pytest.approx(1.0, abs=1e-12)


def test_constant_values_give_a_constant():
    spline = fit_natural_cubic([0.0, 1.0, 2.0], [3.0, 3.0, 3.0])
    for t in (0.0, 0.7, 1.5, 2.0):
        assert eval_spline(spline, t) == pytest.approx(3.0, abs=1e-12)
        assert eval_derivative(spline, t) == pytest.approx(0.0, abs=1e-12)


def test_symmetric_bump():
    spline = fit_natural_cubic([0.0, 1.0, 2.0], [0.0, 1.0, 0.0])
    assert eval_spline(spline, 1.0) == pytest.approx(1.0, abs=1e-12)
    assert eval_derivative(spline, 1.0) == pytest.approx(0.0, abs=1e-12)
    assert eval_spline(spline, 0.5) == pytest.approx(eval_spline(spline, 1.5), abs=1e-12)


def test_linear_extrapolation_outside_knots():
    spline = fit_natural_cubic([0.0, 1.0, 2.0], [0.0, 1.0, 0.0])
    slope_left = eval_derivative(spline, 0.0)
    assert eval_spline(spline, -1.0) == pytest.approx(0.0 - slope_left, abs=1e-12)
    assert spline.second_derivative(-1.0) == 0.0
    assert spline.second_derivative(3.0) == 0.0


@pytest.mark.parametrize("times", [[0.0], [0.0, 0.0, 1.0], [0.0, 2.0, 1.0]])
def test_bad_knots_rejected(times):
    with pytest.raises(SplineError):
        fit_natural_cubic(times, np.zeros(len(times)))


def test_value_count_mismatch_rejected():
    with pytest.raises(SplineError):
        fit_natural_cubic([0.0, 1.0, 2.0], [1.0, 2.0])


def test_random_windows_satisfy_spline_conditions():
    rng = np.random.default_rng(0)
    times = np.arange(12, dtype=np.float64)
    for _ in range(200):
        values = rng.uniform(-1.0, 1.0, size=12)
        spline = fit_natural_cubic(times, values)

        assert np.abs(eval_spline(spline, times) - values).max() < 1e-10

        for j in range(1, 11):
            assert abs(_segment_value(spline, j - 1, 1.0) - spline.a[j]) < 1e-8
            assert abs(_segment_slope(spline, j - 1, 1.0) - _segment_slope(spline, j, 0.0)) < 1e-8
            assert abs(_segment_curvature(spline, j - 1, 1.0) - _segment_curvature(spline, j, 0.0)) < 1e-8

        assert abs(_segment_curvature(spline, 0, 0.0)) < 1e-8
        assert abs(_segment_curvature(spline, 10, 1.0)) < 1e-8


def test_derivative_matches_finite_differences():
    rng = np.random.default_rng(1)
    times = np.arange(12, dtype=np.float64)
    spline = fit_natural_cubic(times, rng.normal(size=12))
    step = 1e-6
    for t in rng.uniform(0.0, 11.0, size=100):
        numeric = (eval_spline(spline, t + step) - eval_spline(spline, t - step)) / (2.0 * step)
        assert eval_derivative(spline, t) == pytest.approx(numeric, abs=1e-6)


def test_channels_are_fitted_independently():
    rng = np.random.default_rng(2)
    times = np.arange(6, dtype=np.float64)
    values = rng.normal(size=(6, 3))
    joint = fit_natural_cubic(times, values)
    for channel in range(3):
        single = fit_natural_cubic(times, values[:, channel])
        np.testing.assert_allclose(joint.a[:, channel], single.a, atol=1e-12)
        np.testing.assert_allclose(joint.d[:, channel], single.d, atol=1e-12)


def test_unit_segments_reproduce_the_spline():
    rng = np.random.default_rng(3)
    spline = fit_natural_cubic([1.0, 3.0, 4.0, 7.0], rng.normal(size=4))
    cells = spline.unit_segments(9)
    for i, u in [(0, 0.3), (2, 0.5), (5, 0.9), (8, 0.25)]:
        a, b, c, d = cells[i]
        local = a + u * (b + u * (c + u * d))
        assert local == pytest.approx(eval_spline(spline, i + u), abs=1e-10)


class TestControlPath:

    def test_fully_observed_path_hits_every_point(self, tiny_window):
        path = build_control_paths(tiny_window)
        assert path.coeffs.shape == (2, 4, 1, 11, 4)
        for t in range(12):
            np.testing.assert_allclose(path.evaluate(t), tiny_window[:, :, t, :], atol=1e-10)

    def test_derivative_matches_the_spline(self, tiny_window):
        path = build_control_paths(tiny_window)
        spline = fit_natural_cubic(np.arange(12.0), tiny_window[1, 2, :, 0])
        for t in (0.0, 0.5, 3.25, 10.9, 11.0):
            assert path.derivative(t)[1, 2, 0] == pytest.approx(eval_derivative(spline, t), abs=1e-10)

    def test_masked_points_are_skipped(self):
        window = np.array([[[5.0], [1.0], [-7.0], [3.0]]])  # V=1, L=4, D=1
        mask = np.array([[False, True, False, True]])
        path = build_control_paths(window, mask)
        assert path.evaluate(1.0)[0, 0] == pytest.approx(1.0, abs=1e-12)
        assert path.evaluate(3.0)[0, 0] == pytest.approx(3.0, abs=1e-12)
        # two observed knots: straight line through them, extended linearly
        assert path.evaluate(0.0)[0, 0] == pytest.approx(0.0, abs=1e-12)
        assert path.evaluate(2.0)[0, 0] == pytest.approx(2.0, abs=1e-12)
        assert path.derivative(0.5)[0, 0] == pytest.approx(1.0, abs=1e-12)

    def test_single_observation_gives_a_constant(self):
        window = np.array([[[5.0], [1.0], [-7.0], [3.0]]])
        mask = np.array([[False, False, True, False]])
        path = build_control_paths(window, mask)
        for t in (0.0, 1.5, 3.0):
            assert path.evaluate(t)[0, 0] == -7.0
            assert path.derivative(t)[0, 0] == 0.0

    def test_no_observation_uses_the_fill_value(self):
        window = np.ones((1, 4, 2))
        mask = np.zeros((1, 4), dtype=bool)
        path = build_control_paths(window, mask, fill_value=[0.25, -0.5])
        np.testing.assert_array_equal(path.evaluate(2.0)[0], [0.25, -0.5])

    def test_rows_with_different_masks_are_fitted_separately(self):
        rng = np.random.default_rng(5)
        window = rng.normal(size=(3, 2, 6, 1))
        mask = np.ones((3, 2, 6), dtype=bool)
        mask[1, 0, [1, 4]] = False
        path = build_control_paths(window, mask)
        alone = build_control_paths(window[1:2, 0:1], mask[1:2, 0:1])
        np.testing.assert_allclose(path.coeffs[1, 0], alone.coeffs[0, 0], atol=1e-12)
        np.testing.assert_allclose(path.evaluate(2.0)[2], window[2, :, 2, :], atol=1e-10)

    def test_flat_window_has_zero_derivative(self):
        path = build_control_paths(np.full((3, 12, 1), 4.0))
        assert np.all(path.derivative(5.5) == 0.0)

    def test_indexing_keeps_batch_rows(self, tiny_path):
        row = tiny_path[1]
        assert isinstance(row, ControlPath)
        np.testing.assert_array_equal(row.evaluate(3.5), tiny_path.evaluate(3.5)[1])
        assert len(tiny_path) == 2

    @pytest.mark.parametrize("t", [-0.5, 11.5])
    def test_times_outside_the_window_rejected(self, tiny_path, t):
        with pytest.raises(DomainError):
            tiny_path.evaluate(t)

    def test_mask_shape_must_match(self, tiny_window):
        with pytest.raises(ShapeError):
            build_control_paths(tiny_window, np.ones((2, 4, 5), dtype=bool))

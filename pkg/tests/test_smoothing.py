import numpy as np
import pytest

from tsdecomp import (
    ChangepointSet,
    smooth_lowess,
    smooth_moving_average,
    smooth_penalized,
    smooth_segmented,
)
from tsdecomp.errors import EvenWindow, SegmentTooShort, WindowTooLarge


def penalized_objective(y, z, lam):
    return float(np.sum((y - z) ** 2) + lam * np.sum(np.diff(z, 2) ** 2))


class TestLowess:
    def test_exact_on_affine(self):
        t = np.arange(50.0)
        y = 2.0 * t + 1.0
        for span in (0.1, 0.3, 1.0):
            np.testing.assert_allclose(smooth_lowess(y, span, 0), y, atol=1e-8)

    def test_exact_on_affine_with_robustness(self):
        y = -0.5 * np.arange(40.0) + 3.0
        np.testing.assert_allclose(smooth_lowess(y, 0.3, 2), y, atol=1e-8)

    def test_constant_preserved(self):
        np.testing.assert_allclose(smooth_lowess(np.full(30, 7.0)), 7.0)

    def test_reduces_noise_on_sine(self):
        rng = np.random.Generator(np.random.PCG64(4))
        t = np.arange(200)
        true = np.sin(2 * np.pi * t / 200)
        y = true + rng.normal(0, 0.3, 200)
        out = smooth_lowess(y, 0.3, 2)
        assert np.sqrt(np.mean((out - true) ** 2)) < np.sqrt(np.mean((y - true) ** 2))

    def test_robustness_downweights_spike(self):
        rng = np.random.Generator(np.random.PCG64(8))
        t = np.arange(80.0)
        true = 0.05 * t
        y = true + rng.normal(0, 0.1, 80)
        y[40] += 30.0
        plain = smooth_lowess(y, 0.3, 0)
        robust = smooth_lowess(y, 0.3, 2)
        # bisquare reweighting pulls the fit near the spike back to the line
        assert np.abs(robust[35:46] - true[35:46]).max() < 0.1
        assert np.abs(plain[35:46] - true[35:46]).max() > 1.0

    def test_too_short(self):
        with pytest.raises(SegmentTooShort):
            smooth_lowess([1.0, 2.0, 3.0])


class TestMovingAverage:
    def test_constant(self):
        np.testing.assert_allclose(smooth_moving_average(np.full(20, 3.0), 5), 3.0)

    def test_ramp_interior_unchanged(self):
        y = np.arange(30.0)
        out = smooth_moving_average(y, 7)
        np.testing.assert_allclose(out, y)  # symmetric windows preserve lines

    def test_edge_windows_shrink_to_one(self):
        out = smooth_moving_average([1.0, 2.0, 4.0], 3)
        np.testing.assert_allclose(out, [1.0, 7.0 / 3.0, 4.0])

    def test_even_window_rejected(self):
        with pytest.raises(EvenWindow):
            smooth_moving_average(np.arange(10.0), 4)

    def test_window_too_large(self):
        with pytest.raises(WindowTooLarge):
            smooth_moving_average(np.arange(5.0), 7)

    def test_output_within_input_range(self):
        rng = np.random.Generator(np.random.PCG64(8))
        y = rng.normal(0, 5, 100)
        out = smooth_moving_average(y, 11)
        assert out.min() >= y.min() - 1e-12
        assert out.max() <= y.max() + 1e-12

    def test_linearity_as_operator(self):
        rng = np.random.Generator(np.random.PCG64(9))
        y1, y2 = rng.normal(size=(2, 80))
        for a, b in [(2.0, -3.0), (0.5, 1.5)]:
            lhs = smooth_moving_average(a * y1 + b * y2, 9)
            rhs = a * smooth_moving_average(y1, 9) + b * smooth_moving_average(y2, 9)
            np.testing.assert_allclose(lhs, rhs, atol=1e-9)


class TestPenalized:
    def test_lambda_zero_is_identity(self):
        rng = np.random.Generator(np.random.PCG64(10))
        y = rng.normal(size=40)
        np.testing.assert_allclose(smooth_penalized(y, 0.0), y)

    def test_exact_on_affine(self):
        y = 1.7 * np.arange(50.0) - 4.0
        for lam in (1.0, 1600.0, 1e8):
            np.testing.assert_allclose(smooth_penalized(y, lam), y, atol=1e-8)

    def test_huge_lambda_matches_ols_line(self):
        rng = np.random.Generator(np.random.PCG64(2))
        t = np.arange(60.0)
        y = 0.3 * t + 1.0 + rng.normal(0, 1, 60)
        z = smooth_penalized(y, 1e8)
        design = np.vstack([np.ones(60), t]).T
        coef, *_ = np.linalg.lstsq(design, y, rcond=None)
        np.testing.assert_allclose(z, design @ coef, atol=1e-4)

    def test_linearity_as_operator(self):
        rng = np.random.Generator(np.random.PCG64(11))
        y1, y2 = rng.normal(size=(2, 70))
        lhs = smooth_penalized(1.5 * y1 - 2.0 * y2, 100.0)
        rhs = 1.5 * smooth_penalized(y1, 100.0) - 2.0 * smooth_penalized(y2, 100.0)
        np.testing.assert_allclose(lhs, rhs, atol=1e-9)

    def test_solution_is_local_optimum(self):
        rng = np.random.Generator(np.random.PCG64(12))
        y = rng.normal(size=80)
        lam = 50.0
        z = smooth_penalized(y, lam)
        base = penalized_objective(y, z, lam)
        assert base <= penalized_objective(y, y, lam) + 1e-9
        for _ in range(10):
            perturbed = z + rng.normal(0, 0.01, 80)
            assert base <= penalized_objective(y, perturbed, lam) + 1e-12

    def test_too_short(self):
        with pytest.raises(SegmentTooShort):
            smooth_penalized([1.0, 2.0, 3.0])


class TestSegmented:
    def test_single_segment_equals_direct_call(self):
        rng = np.random.Generator(np.random.PCG64(13))
        y = rng.normal(size=60)
        cps = ChangepointSet(breaks=(), n=60)
        np.testing.assert_array_equal(
            smooth_segmented(y, cps, "lowess", span=0.4),
            smooth_lowess(y, 0.4, 2),
        )

    def test_step_with_break_is_exact(self):
        y = np.array([0.0] * 50 + [10.0] * 50)
        cps = ChangepointSet(breaks=(49,), n=100)
        for method in ("lowess", "moving_average", "penalized"):
            trend = smooth_segmented(y, cps, method, window=11)
            np.testing.assert_allclose(trend[:50], 0.0, atol=1e-9)
            np.testing.assert_allclose(trend[50:], 10.0, atol=1e-9)

    def test_step_without_break_smears(self):
        y = np.array([0.0] * 50 + [10.0] * 50)
        cps = ChangepointSet(breaks=(), n=100)
        trend = smooth_segmented(y, cps, "moving_average", window=11)
        near = trend[45:55]
        assert ((near > 0.0) & (near < 10.0)).any()

    def test_short_segment_falls_back_to_mean(self):
        y = np.concatenate([np.zeros(50), [4.0, 6.0]])
        cps = ChangepointSet(breaks=(49,), n=52)
        trend = smooth_segmented(y, cps, "lowess")
        np.testing.assert_allclose(trend[50:], 5.0)  # 2-point segment -> mean

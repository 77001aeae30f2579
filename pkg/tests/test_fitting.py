import numpy as np
import pytest

from pwhelm.dispersion import numerator_denominator, pq
from pwhelm.errors import FitError, SpecError
from pwhelm.fitting import (FitConfig, estimate_IG, fit_params, ig_from_wavenumbers,
                            linear_system, lsq_rows_17, lsq_rows_25, sample_grid,
                            validation_max_J)
from pwhelm.stencils import SchemeParams17, SchemeParams25


def free_params(p):
    names = ("a1", "c2", "c3", "c4") if isinstance(p, SchemeParams25) else ("b1", "d2", "d3")
    return np.array([getattr(p, n) for n in names])


class TestEstimateIG:
    def test_example_wavenumbers(self):
        est = ig_from_wavenumbers(75.0, 150.0, 1 / 130)
        assert est.G_min == pytest.approx(5.445, abs=1e-3)
        assert est.G_max == pytest.approx(2 * np.pi * 130 / 75, rel=1e-12)
        assert est.warnings == ()

    def test_velocity_frequency(self):
        est = estimate_IG(1500, 3000, 5, 30, 10)
        assert (est.G_min, est.G_max) == pytest.approx((5.0, 60.0))

    def test_clipping_warns(self):
        with pytest.warns(UserWarning, match="clipped"):
            est = estimate_IG(1000, 3000, 0.5, 80, 10)
        assert est.G_min == 2.0 and est.G_max == 400.0
        assert len(est.warnings) == 2

    def test_degenerate_widened(self):
        est = estimate_IG(2000, 2000, 10, 10, 20, emit=False)
        assert (est.G_min, est.G_max) == pytest.approx((9.5, 10.5))
        assert "widened" in est.warnings[0]

    @pytest.mark.parametrize("args", [(0, 1, 1, 1, 1), (2, 1, 1, 1, 1), (1, 2, 3, 1, 1),
                                      (1, 2, 1, 2, -1)])
    def test_invalid(self, args):
        with pytest.raises(SpecError):
            estimate_IG(*args)

    def test_empty_below_floor(self):
        with pytest.raises(SpecError):
            estimate_IG(100, 150, 10, 100, 10)


class TestFitConfig:
    @pytest.mark.parametrize("kw", [dict(I_G=(1.0, 5.0)), dict(I_G=(5.0, 5.0)),
                                    dict(I_G=(5.0, 500.0)), dict(I_G=(4, 8), gamma=0),
                                    dict(I_G=(4, 8), l=1), dict(I_G=(4, 8), I_theta=(1, 0))])
    def test_rejects(self, kw):
        with pytest.raises(SpecError):
            FitConfig(**kw)

    def test_theta_range(self):
        assert FitConfig((4, 8)).theta_range == pytest.approx((0, np.pi / 4))
        assert FitConfig((4, 8), gamma=2).theta_range == pytest.approx((0, np.pi / 2))


class TestSampleGrid:
    def test_two_by_two(self):
        s = sample_grid(FitConfig((4.0, 8.0), l=2, r=2))
        assert s.shape == (4, 2)
        assert s[:, 0] == pytest.approx([0, 0, np.pi / 4, np.pi / 4])
        assert s[:, 1] == pytest.approx([8, 4, 8, 4])

    def test_middle_points(self):
        s = sample_grid(FitConfig((4.0, 8.0), l=3, r=3))
        assert s[4] == pytest.approx([np.pi / 8, 16 / 3])

    def test_inverse_G_uniform(self):
        s = sample_grid(FitConfig((3.0, 30.0), l=2, r=7))
        inv = 1 / s[:7, 1]
        assert np.allclose(np.diff(inv), np.diff(inv)[0])


class TestRows:
    def test_axis_zero_entries(self):
        S = lsq_rows_25((0.0, 6.0))
        W = lsq_rows_17((0.0, 6.0))
        assert S[0] == pytest.approx(0, abs=1e-12)
        assert W[0] == pytest.approx(0, abs=1e-12)

    def test_long_wave_rows_vanish(self):
        # at P = Q = 1 only the constant in S5 survives
        S = lsq_rows_25((0.3, 1e9))
        assert np.allclose(S[:4], 0, atol=1e-6)
        assert S[4] + 36 * np.pi**2 == pytest.approx(0, abs=1e-6)

    @pytest.mark.parametrize("scheme", ["pw25", "pw17"])
    @pytest.mark.parametrize("gamma", [1.0, 0.6])
    def test_row_identity(self, rng, scheme, gamma):
        # row residual is proportional to G^2 N - 4 pi^2 D, for every parameter choice
        for theta, G in rng.uniform([0, 2.5], [np.pi / 2, 20], size=(4, 2)):
            P, Q = pq(theta, G, gamma)
            eta = 1 + 1 / gamma**2
            ratios = []
            for _ in range(4):
                if scheme == "pw25":
                    x = rng.uniform(-1, 1, 4)
                    *cols, rhs = lsq_rows_25((theta, G), gamma)
                    row = np.dot(cols, x) - rhs
                    N, D = numerator_denominator(scheme, SchemeParams25(*x), P, Q, eta)
                else:
                    x = rng.uniform(-1, 1, 3)
                    *cols, W4 = lsq_rows_17((theta, G), gamma)
                    row = np.dot(cols, x) + W4
                    N, D = numerator_denominator(scheme, SchemeParams17(*x), P, Q, eta)
                ratios.append(row / (G**2 * N - 4 * np.pi**2 * D))
            assert np.allclose(ratios, ratios[0], rtol=1e-9)

    def test_unknown_scheme(self):
        with pytest.raises(SpecError):
            linear_system("nc4", FitConfig((4, 8)))


class TestFit:
    @pytest.mark.parametrize("scheme", ["pw25", "pw17"])
    @pytest.mark.parametrize("IG", [(4.0, 10.0), (2.5, 40.0)])
    def test_improves_on_baseline(self, scheme, IG):
        rep = fit_params(scheme, FitConfig(IG, l=24, r=24))
        assert rep.max_abs_J < rep.baseline_max_abs_J
        assert rep.rank == (4 if scheme == "pw25" else 3)
        assert not rep.out_of_range

    @pytest.mark.parametrize("scheme", ["pw25", "pw17"])
    def test_anisotropic(self, scheme):
        rep = fit_params(scheme, FitConfig((4.0, 12.0), gamma=0.5, l=24, r=24))
        assert rep.max_abs_J < rep.baseline_max_abs_J

    def test_subinterval_fits_beat_baseline(self):
        for iv in [(3.0, 6.0), (6.0, 12.0), (12.0, 30.0)]:
            rep = fit_params("pw25", FitConfig(iv, l=24, r=24))
            assert rep.max_abs_J < rep.baseline_max_abs_J

    @pytest.mark.parametrize("scheme", ["pw25", "pw17"])
    def test_sampling_refinement_stable(self, scheme):
        p1 = free_params(fit_params(scheme, FitConfig((4.0, 10.0))).params)
        p2 = free_params(fit_params(scheme, FitConfig((4.0, 10.0), l=128, r=128)).params)
        assert np.linalg.norm(p2 - p1) < 0.1 * np.linalg.norm(p1)

    def test_deterministic(self):
        cfg = FitConfig((4.0, 10.0), l=16, r=16)
        assert fit_params("pw17", cfg).params == fit_params("pw17", cfg).params

    def test_stationary(self):
        # least-squares solution: perturbing it cannot lower the residual norm
        cfg = FitConfig((4.0, 10.0), l=16, r=16)
        rep = fit_params("pw25", cfg)
        A, b = linear_system("pw25", cfg)
        x = free_params(rep.params)
        base = np.linalg.norm(A @ x - b)
        assert base == pytest.approx(rep.residual, rel=1e-10)
        for e in np.eye(4):
            for s in (1e-4, -1e-4):
                assert np.linalg.norm(A @ (x + s * e * max(1, abs(x).max())) - b) >= base

    def test_rank_deficient(self):
        with pytest.raises(FitError):
            fit_params("pw25", FitConfig((4.0, 10.0), l=2, r=2))

    def test_single_angle_rank_deficient(self):
        # on the axis alone the a1 column is zero
        with pytest.raises(FitError):
            fit_params("pw17", FitConfig((4.0, 10.0), l=2, r=8, I_theta=(0.0, 1e-14)))

    def test_validation_baseline(self):
        cfg = FitConfig((4.0, 10.0), n_validation=8)
        assert validation_max_J("pw25", SchemeParams25(), cfg) > 0

    def test_report_dict(self):
        d = fit_params("pw17", FitConfig((4.0, 10.0), l=8, r=8)).to_dict()
        assert set(d["params"]) == {"b1", "d1", "d2", "d3"}
        assert d["IG"] == [4.0, 10.0]

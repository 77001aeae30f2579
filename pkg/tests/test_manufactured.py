import numpy as np
import pytest
import sympy

from pwhelm.errors import SpecError
from pwhelm.stencils import SchemeParams17
from pwhelm.verify.manufactured import (cnorm, convergence_study, manufactured_exact,
                                        manufactured_rhs, manufactured_wavenumber,
                                        run_manufactured)


@pytest.fixture(scope="module")
def symbolic_rhs():
    x, z, k0, t = sympy.symbols("x z k0 t", real=True)
    p = sympy.sin(sympy.pi * x) * sympy.sin(sympy.pi * z) * \
        sympy.exp(sympy.I * k0 * (x * sympy.cos(t) + z * sympy.sin(t)))
    k = k0 * (sympy.exp(-k0 * (x + z)) + 1)
    g = sympy.diff(p, x, 2) + sympy.diff(p, z, 2) + k**2 * p
    return sympy.lambdify((k0, t, x, z), g, "numpy")


class TestCnorm:
    @pytest.mark.parametrize("values, expected", [([3 + 4j, -1], 5.0), ([], 0.0),
                                                  ([[0, -2j], [1, 0]], 2.0)])
    def test_values(self, values, expected):
        assert cnorm(values) == expected


class TestExact:
    def test_quarter_point(self):
        assert manufactured_exact(75.0, 0.0, 0.25, 0.25) == pytest.approx(0.5 * np.exp(18.75j))

    def test_vanishes_on_boundary(self):
        s = np.linspace(0, 1, 7)
        assert np.allclose(manufactured_exact(75.0, 0.3, s, 0.0), 0, atol=1e-15)
        assert np.allclose(manufactured_exact(75.0, 0.3, 1.0, s), 0, atol=1e-14)

    def test_wavenumber(self):
        assert manufactured_wavenumber(75.0, 0.0, 0.0) == 150.0
        assert manufactured_wavenumber(2.0, 0.5, 0.5) == pytest.approx(2 * (np.exp(-2) + 1))

    @pytest.mark.parametrize("k0, theta", [(75.0, np.pi / 4), (75.0, 0.0), (10.0, 1.1)])
    def test_rhs_matches_symbolic(self, symbolic_rhs, rng, k0, theta):
        x, z = rng.uniform(0, 1, (2, 20))
        expected = symbolic_rhs(k0, theta, x, z)
        assert np.allclose(manufactured_rhs(k0, theta, x, z), expected,
                           rtol=1e-12, atol=1e-10 * np.abs(expected).max())


class TestRun:
    def test_fits_params_on_nodal_range(self):
        run = run_manufactured("pw17", 21, k0=10.0, l=16, r=16)
        h = 1 / 20
        # unknowns span x + z in [4h, 2 - 4h]
        lo = 2 * np.pi / (h * manufactured_wavenumber(10.0, 2 * h, 2 * h))
        hi = 2 * np.pi / (h * manufactured_wavenumber(10.0, 1 - 2 * h, 1 - 2 * h))
        assert run.I_G == pytest.approx((lo, hi))
        assert isinstance(run.params, SchemeParams17)
        assert run.residual <= 1e-10

    def test_given_params_used(self):
        p = SchemeParams17(0.95, 0.16, -0.003)
        run = run_manufactured("pw17", 21, k0=10.0, params=p)
        assert run.params is p and run.I_G == ()

    def test_too_small(self):
        with pytest.raises(SpecError):
            run_manufactured("pw25", 5)

    @pytest.mark.parametrize("scheme", ["pw25", "pw17"])
    def test_fourth_order_at_small_k0(self, scheme):
        rows = convergence_study(scheme, [41, 81], k0=10.0, l=16, r=16)
        assert rows[0]["ratio"] is None
        assert 12 <= rows[1]["ratio"] <= 20

    def test_point_weighting_beats_second_order(self):
        pw = run_manufactured("pw25", 41, k0=10.0, l=16, r=16).error
        c5 = run_manufactured("conv5", 41, k0=10.0).error
        assert pw < c5 / 100

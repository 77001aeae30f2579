"""Acceptance criteria 1-11; a summary line per criterion is printed at the end of the run."""

import time

import mpmath
import numpy as np
import pytest
import sympy

from pwhelm.dispersion import numerical_wavenumber
from pwhelm.fitting import FitConfig, fit_params
from pwhelm.linsys import assemble
from pwhelm.pml import CoefficientFields, GridSpec
from pwhelm.stencils import SchemeParams17, SchemeParams25, stencil_weights
from pwhelm.verify.layered import layered_demo, pml_decay_metric
from pwhelm.verify.manufactured import convergence_study, manufactured_exact, manufactured_rhs, \
    manufactured_wavenumber, run_manufactured
from pwhelm.verify.seismogram import example2_setup, homogeneous_exact_trace, time_synthesis, \
    trace_error
from pwhelm.verify.special import RickerSpec, hankel0_2

from conftest import check, pml_fields, uniform_fields
from test_dispersion import printed_T17, printed_T25
from test_special import mp_hankel

# 7-point central second derivative, sixth order
FD7 = ((1, 90), (-3, 20), (3, 2), (-49, 18), (3, 2), (-3, 20), (1, 90))

REF_K75_PW17 = (7.6295e-04, 4.2110e-05, 2.5961e-06)
REF_K75_PW25 = (6.6847e-04, 2.6623e-05, 1.4675e-06)
REF_K150_PW25_N481 = 3.1931e-05
REF_RICKER_PW17_R1 = 1.9495e-02


def _mp_exact(k0, theta, x, z):
    return mpmath.sin(mpmath.pi * x) * mpmath.sin(mpmath.pi * z) * \
        mpmath.expj(k0 * (x * mpmath.cos(theta) + z * mpmath.sin(theta)))


def test_c1_manufactured_rhs_transcription(rng):
    # field samples in 30-digit arithmetic so the 1e-4 step is not swamped by roundoff
    t0 = time.perf_counter()
    k0, theta, step = 75.0, np.pi / 4, 1e-4
    x, z = rng.uniform(0.01, 0.99, (2, 100))
    lap = np.empty(100, complex)
    with mpmath.workdps(30):
        h = mpmath.mpf(step)
        coef = [mpmath.mpf(a) / b for a, b in FD7]
        for i, (xi, zi) in enumerate(zip(x, z)):
            xi, zi = mpmath.mpf(xi), mpmath.mpf(zi)
            acc = sum(c * (_mp_exact(k0, theta, xi + o * h, zi)
                                       + _mp_exact(k0, theta, xi, zi + o * h))
                      for c, o in zip(coef, range(-3, 4)))
            lap[i] = complex(acc / h**2)
    k = manufactured_wavenumber(k0, x, z)
    res = np.abs(lap + k**2 * manufactured_exact(k0, theta, x, z)
                 - manufactured_rhs(k0, theta, x, z))
    dt = time.perf_counter() - t0
    check(1, "FD residual at 100 points", res.max() < 1e-6, f"max {res.max():.2e} < 1e-6")
    check(1, "runtime", dt < 1.0, f"{dt:.3f} s < 1 s")


def test_c2_reduction_to_nc4(rng):
    f = pml_fields(n=40, L=100.0)
    ms, ns = rng.integers(2, 38, (2, 50))
    # include nodes inside the absorbing layer explicitly
    ms[:5], ns[:5] = [2, 3, 37, 5, 20], [20, 36, 2, 4, 37]
    nc4 = stencil_weights("nc4", f, None, ms, ns)
    worst = 0.0
    for scheme, params in (("pw25", SchemeParams25(1.0, 0.0, 0.0, 0.0)),
                           ("pw17", SchemeParams17(1.0, 0.0, 0.0))):
        w = stencil_weights(scheme, f, params, ms, ns)
        worst = max(worst, float(np.max(np.abs(w - nc4) / np.abs(nc4).max(axis=(1, 2))[:, None,
                                                                                        None])))
    check(2, "pw25/pw17 equal NC4 at 50 nodes", worst <= 1e-14, f"max rel diff {worst:.1e}")


def test_c3_symbol_oracle(rng):
    from pwhelm.dispersion import SYMBOL_OFFSETS_17, SYMBOL_OFFSETS_25
    worst = 0.0
    for _ in range(20):
        gamma, h, k = rng.uniform(0.3, 3), rng.uniform(0.05, 2), rng.uniform(0.1, 5)
        f = uniform_fields(h=h, gamma=gamma, k=k)
        for scheme in ("pw25", "pw17"):
            if scheme == "pw25":
                p = SchemeParams25(*rng.uniform(-1, 1, 4))
                T, offs = printed_T25(p, k, h, f.grid.eta), SYMBOL_OFFSETS_25
            else:
                p = SchemeParams17(*rng.uniform(-1, 1, 3))
                T, offs = printed_T17(p, k, h, f.grid.eta), SYMBOL_OFFSETS_17
            w = stencil_weights(scheme, f, p, [4], [4])[0]
            for t, (i, j) in zip(T, offs):
                for si in (1, -1):
                    for sj in (1, -1):
                        worst = max(worst, abs(w[si * i + 2, sj * j + 2] - t) / abs(t))
    check(3, "grouped weights vs symbol table, 20 draws", worst <= 1e-12,
          f"max rel diff {worst:.1e}")


@pytest.fixture(scope="module")
def smooth_operator():
    X, Z = sympy.symbols("x z")
    r = sympy.Rational
    A = 1 + r(3, 10) * sympy.sin(2 * X + r(2, 5)) * sympy.cos(Z) + r(1, 5) * sympy.I * sympy.cos(X - Z)
    B = 1 + r(1, 4) * sympy.cos(X + 2 * Z) - r(1, 10) * sympy.I * sympy.sin(X * Z + r(3, 10))
    C = 1 + r(1, 5) * sympy.sin(X + Z) + r(3, 20) * sympy.I * sympy.cos(2 * X)
    k = 3 + r(1, 2) * sympy.cos(X - Z / 2)
    p = sympy.sin(3 * X + r(1, 5)) * sympy.sin(2 * Z + r(1, 10)) * sympy.exp(sympy.I * (X + Z / 2))
    L = sympy.diff(A * sympy.diff(p, X), X) + sympy.diff(B * sympy.diff(p, Z), Z) + k**2 * C * p
    f = {name: sympy.lambdify((X, Z), e, "numpy") for name, e in
         dict(A=A, B=B, C=C, k=k, p=p, L=L).items()}
    return f


def test_c4_taylor_order(smooth_operator):
    t0 = time.perf_counter()
    f = smooth_operator
    x0, z0 = 0.37, 0.21
    lo = 10.0
    hi = 0.0
    for gamma in (0.5, 1.0, 2.0):
        for scheme, params in (("pw25", SchemeParams25(0.8, 0.2, 0.1, 0.15)),
                               ("pw17", SchemeParams17(0.7, 0.3, 0.1))):
            errs = []
            for h in (0.04, 0.02, 0.01):
                g = GridSpec(5, 5, h, gamma, (x0 - 2 * h, z0 - 2 * gamma * h))
                Xg, Zg = g.meshgrid()
                one = np.ones(g.shape)
                fields = CoefficientFields(
                    A={j: f["A"](Xg + 0.5 * j * g.dx, Zg) * one for j in (-3, -1, 1, 3)},
                    B={j: f["B"](Xg, Zg + 0.5 * j * g.dz) * one for j in (-3, -1, 1, 3)},
                    C=f["C"](Xg, Zg) * one, k=np.real(f["k"](Xg, Zg)) * one, grid=g)
                w = stencil_weights(scheme, fields, params, [2], [2])[0]
                errs.append(abs(np.sum(w * f["p"](Xg, Zg).T) - f["L"](x0, z0)))
            order = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
            lo, hi = min(lo, order.min()), max(hi, order.max())
    dt = time.perf_counter() - t0
    check(4, "local order, both schemes, gamma in {0.5, 1, 2}", 3.7 <= lo and hi <= 4.3,
          f"orders in [{lo:.3f}, {hi:.3f}]")
    check(4, "runtime", dt < 10, f"{dt:.2f} s < 10 s")


def test_c5_dispersion_order():
    t0 = time.perf_counter()
    G = np.array([20.0, 40.0, 80.0, 160.0])
    slopes = []
    for scheme, params in (("pw25", SchemeParams25(0.8, 0.2, 0.1, 0.15)),
                           ("pw17", SchemeParams17(0.7, 0.3, 0.1))):
        for theta in (0.0, np.pi / 8, np.pi / 4):
            # fixed k, h = 2 pi / (k G)
            err = [abs((numerical_wavenumber(scheme, params, theta, g) * g / (2 * np.pi))**2 - 1)
                   for g in G]
            slopes.append(np.polyfit(np.log(1 / G), np.log(err), 1)[0])
    dt = time.perf_counter() - t0
    check(5, "log-log slope, 3 angles x 2 schemes", all(3.7 <= s <= 4.3 for s in slopes),
          f"slopes in [{min(slopes):.3f}, {max(slopes):.3f}]")
    check(5, "runtime", dt < 1, f"{dt:.3f} s < 1 s")


def test_c6_optimizer_improvement():
    t0 = time.perf_counter()
    worst = 0.0
    bad = []
    for IG in ((2.5, 3.0), (4.0, 5.0), (6.0, 8.0), (10.0, 400.0)):
        for gamma in (0.5, 1.0):
            for scheme in ("pw25", "pw17"):
                rep = fit_params(scheme, FitConfig(IG, gamma, n_validation=128))
                q = rep.max_abs_J / rep.baseline_max_abs_J
                worst = max(worst, q)
                if q > 1:
                    bad.append((scheme, IG, gamma))
    dt = time.perf_counter() - t0
    check(6, "fitted maxJ <= baseline maxJ, 16 cases", not bad,
          f"worst fitted/baseline {worst:.3g}; failing {bad}")
    check(6, "runtime", dt < 30, f"{dt:.1f} s < 30 s")


@pytest.fixture(scope="module")
def k75_runs():
    return {s: convergence_study(s, [131, 261, 521], k0=75.0, theta=np.pi / 4)
            for s in ("pw17", "pw25")}


def _within3(errs, ref):
    return all(ref_i / 3 <= e <= 3 * ref_i for e, ref_i in zip(errs, ref))


@pytest.mark.slow
def test_c7_pw17_k75(k75_runs):
    errs = [r["error"] for r in k75_runs["pw17"]]
    ratios = [r["ratio"] for r in k75_runs["pw17"][1:]]
    check(7, "pw17 errors within 3x of reference", _within3(errs, REF_K75_PW17),
          "errors " + ", ".join(f"{e:.4e}" for e in errs))
    check(7, "pw17 ratios in [12, 20]", all(12 <= q <= 20 for q in ratios),
          "ratios " + ", ".join(f"{q:.2f}" for q in ratios))


@pytest.mark.slow
def test_c7_pw25_errors(k75_runs):
    errs = [r["error"] for r in k75_runs["pw25"]]
    check(7, "pw25 errors within 3x of reference", _within3(errs, REF_K75_PW25),
          "errors " + ", ".join(f"{e:.4e}" for e in errs))


@pytest.mark.slow
@pytest.mark.xfail(strict=True, reason="N=131->261 ratio is 25.1, the same as the reference "
                   "errors' own ratio 6.6847e-4 / 2.6623e-5; see the decisions ledger")
def test_c7_pw25_ratios(k75_runs):
    ratios = [r["ratio"] for r in k75_runs["pw25"][1:]]
    check(7, "pw25 ratios in [12, 20]", all(12 <= q <= 20 for q in ratios),
          "ratios " + ", ".join(f"{q:.2f}" for q in ratios))


@pytest.mark.slow
def test_c8_k150_spot_check():
    run = run_manufactured("pw25", 481, k0=150.0, theta=np.pi / 4)
    check(8, "pw25 k0=150 N=481 within 3x of 3.1931e-05",
          REF_K150_PW25_N481 / 3 <= run.error <= 3 * REF_K150_PW25_N481, f"error {run.error:.4e}")


@pytest.mark.parametrize("N", [20, 50, 110])
def test_c9_nonzero_counts(N):
    f = uniform_fields(n=N + 4, k=0.5)
    for scheme, params, formula in (
            ("pw25", SchemeParams25(0.93, 0.05, -0.01, 0.08), 25 * N**2 - 60 * N + 36),
            ("pw17", SchemeParams17(0.95, 0.16, -0.003), 17 * N**2 - 36 * N + 20)):
        nnz = assemble(scheme, f.grid, f, params).nnz
        check(9, f"{scheme} N={N}", nnz == formula, f"nnz {nnz} vs formula {formula}")
    if N == 110:
        check(9, "N=110 reference counts", (25 * N**2 - 60 * N + 36, 17 * N**2 - 36 * N + 20)
              == (295936, 201760), "295936 / 201760")


@pytest.mark.slow
def test_c10_example2():
    setup = example2_setup()
    rk = RickerSpec(15.0, 0.008, 1.024)
    src, rc = (700.0, 500.0), (100.0, 500.0)
    run = time_synthesis(setup, rk, src, [rc], scheme="pw17", threads=4)
    exact = homogeneous_exact_trace(src, rc, 2000.0, rk)
    err = trace_error(run.traces[0], exact)
    check(10, "pw17 receiver-1 error within 3x of 1.9495e-02",
          REF_RICKER_PW17_R1 / 3 <= err <= 3 * REF_RICKER_PW17_R1, f"error {err:.4e}")
    check(10, "every solve meets 1e-10", bool(np.all(run.residuals <= 1e-10)),
          f"max residual {run.residuals.max():.1e}")

    long = RickerSpec(15.0, 0.004, 4.096)
    r = 600.0
    tr = homogeneous_exact_trace(src, rc, 2000.0, long)
    early = tr.times < r / 2000.0 - 2 / 15.0
    lead = np.max(np.abs(tr.values[early])) / np.max(np.abs(tr.values))
    check(10, "exact trace causal", lead < 0.01, f"early/peak {lead:.1e} < 1%")
    near = homogeneous_exact_trace((0.0, 0.0), (1000.0, 0.0), 2000.0, long)
    far = homogeneous_exact_trace((0.0, 0.0), (4000.0, 0.0), 2000.0, long)
    ratio = np.abs(near.values).max() / np.abs(far.values).max()
    check(10, "1/sqrt(r) decay between r and 4r", abs(ratio / 2 - 1) < 0.05,
          f"peak ratio {ratio:.3f} vs 2")

    x = np.geomspace(1e-3, 1e3, 61)
    ref = np.array([mp_hankel(v) for v in x])
    herr = float(np.max(np.abs(hankel0_2(x) - ref) / np.abs(ref)))
    check(10, "Hankel vs 40-digit oracle on [1e-3, 1e3]", herr <= 1e-10, f"max rel {herr:.1e}")


@pytest.mark.slow
def test_c11_example3():
    rk = RickerSpec(20.0, 0.004, 1.024)
    a = layered_demo(scheme="pw25", frequency=62.5, ricker=rk, threads=4)
    check(11, "PML decay at 62.5 Hz", a.decay < 1e-3, f"ring/interior {a.decay:.2e} < 1e-3")
    check(11, "wavefield finite across interfaces", bool(np.all(np.isfinite(a.wavefield.values))),
          "no NaN/Inf")
    check(11, "every solve meets 1e-10", bool(np.all(a.residuals <= 1e-10)),
          f"{len(a.residuals)} solves, max residual {a.residuals.max():.1e}")
    snap_decay = pml_decay_metric(a.snapshot, a.setup)
    check(11, "snapshot decays across PML", snap_decay < 1e-2, f"{snap_decay:.2e}")
    b = layered_demo(scheme="pw25", frequency=62.5, ricker=rk, threads=2)
    same = (np.array_equal(a.wavefield.values, b.wavefield.values)
            and np.array_equal(a.snapshot, b.snapshot)
            and np.array_equal(a.trace.values, b.trace.values))
    check(11, "deterministic (thread counts 4 and 2)", same, "bitwise equal outputs")

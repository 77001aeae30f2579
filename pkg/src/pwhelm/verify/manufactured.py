"""Manufactured-solution convergence test on the unit square.

The exact field is ``sin(pi x) sin(pi z) exp(i k0 (x cos t + z sin t))`` in a
medium with wavenumber ``k0 (exp(-k0 (x + z)) + 1)``; the source term is
obtained by applying the Helmholtz operator to it analytically.
"""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field

import numpy as np

from ..errors import SpecError
from ..fitting import FitConfig, fit_params, ig_from_wavenumbers
from ..linsys import apply_boundary, assemble, solve
from ..pml import GridSpec, MediumModel, PmlConfig, coefficient_fields
from ..stencils import SchemeParams17, SchemeParams25

__all__ = [
    "cnorm",
    "manufactured_exact",
    "manufactured_wavenumber",
    "manufactured_rhs",
    "manufactured_IG",
    "ManufacturedRun",
    "run_manufactured",
    "convergence_study",
]

log = logging.getLogger(__name__)


def cnorm(diff) -> float:
    """Largest complex modulus over all entries."""
    diff = np.asarray(diff)
    if diff.size == 0:
        return 0.0
    return float(np.max(np.abs(diff)))


def manufactured_exact(k0, theta, x, z):
    x, z = np.asarray(x, float), np.asarray(z, float)
    phase = k0 * (x * np.cos(theta) + z * np.sin(theta))
    return np.sin(np.pi * x) * np.sin(np.pi * z) * np.exp(1j * phase)


def manufactured_wavenumber(k0, x, z):
    return k0 * (np.exp(-k0 * (np.asarray(x, float) + np.asarray(z, float))) + 1.0)


def manufactured_rhs(k0, theta, x, z):
    """``g = laplacian(p) + k^2 p`` for the manufactured field."""
    x, z = np.asarray(x, float), np.asarray(z, float)
    s = x + z
    sx, sz = np.sin(np.pi * x), np.sin(np.pi * z)
    cx, cz = np.cos(np.pi * x), np.cos(np.pi * z)
    E = np.exp(1j * k0 * (x * np.cos(theta) + z * np.sin(theta)))
    decay = np.exp(-k0 * s)
    real_part = sx * sz * (k0**2 * decay * (2.0 + decay) - 2.0 * np.pi**2)
    cross = 2j * np.pi * k0 * (cx * sz * np.cos(theta) + cz * sx * np.sin(theta))
    return E * (real_part + cross)


@dataclass
class ManufacturedRun:
    N: int
    h: float
    error: float
    params: object
    residual: float
    seconds: float
    I_G: tuple = field(default=())
    solution: object = field(default=None, repr=False)


def manufactured_IG(k_nodes, unknown, h):
    """``[2 pi/(h k_max), 2 pi/(h k_min)]`` over the nodes actually solved for."""
    k = k_nodes[unknown]
    return ig_from_wavenumbers(float(k.min()), float(k.max()), h)


def _default_params(scheme, k_nodes, unknown, h, l, r):
    if scheme not in ("pw25", "pw17"):
        return None, ()
    ig = manufactured_IG(k_nodes, unknown, h)
    report = fit_params(scheme, FitConfig((ig.G_min, ig.G_max), gamma=1.0, l=l, r=r))
    return report.params, (ig.G_min, ig.G_max)


def run_manufactured(scheme, N, k0=75.0, theta=np.pi / 4, params=None, l=64, r=64,
                     tol=1e-10, boundary="two-ring-exact") -> ManufacturedRun:
    """Solve the manufactured problem on ``N x N`` nodes (``h = 1/(N-1)``).

    Eliminated boundary nodes carry the exact solution; the error is the
    C-norm over the unknowns.  ``params=None`` fits the scheme parameters on
    the range of G spanned by the nodal wavenumber at the unknowns.
    """
    if N < 6:
        raise SpecError(f"need at least 6 nodes per side, got {N}")
    t0 = time.perf_counter()
    grid = GridSpec(N, N, 1.0 / (N - 1))
    X, Z = grid.meshgrid()
    k_nodes = manufactured_wavenumber(k0, X, Z)
    ig = ()
    if params is None:
        unknown = ~apply_boundary(boundary, grid, np.zeros(grid.shape)).known
        params, ig = _default_params(scheme, k_nodes, unknown, grid.h, l, r)
    medium = MediumModel.from_wavenumber(k_nodes)
    fields = coefficient_fields(grid, medium, PmlConfig())
    exact = manufactured_exact(k0, theta, X, Z)
    system = assemble(scheme, grid, fields, params, boundary=boundary,
                      source=manufactured_rhs(k0, theta, X, Z), boundary_data=exact)
    sol = solve(system, tol=tol)
    mask = system.ordering >= 0
    err = cnorm(sol.values[mask] - exact[mask])
    dt = time.perf_counter() - t0
    log.info("%s N=%d params=%s error=%.4e residual=%.2e (%.1fs)",
             scheme, N, _fmt(params), err, sol.residual, dt)
    return ManufacturedRun(N, grid.h, err, params, sol.residual, dt, ig, sol)


def _fmt(params):
    if isinstance(params, (SchemeParams25, SchemeParams17)):
        return {k: round(v, 8) for k, v in params.as_dict().items()}
    return None


def convergence_study(scheme, N_list, k0=75.0, theta=np.pi / 4, params=None, l=64, r=64,
                      tol=1e-10, boundary="two-ring-exact") -> list[dict]:
    """Errors and successive error ratios for a sequence of grids.

    Returns one dict per grid with keys scheme, k0, theta, N, h, error, ratio
    (``None`` for the first grid), params and I_G.
    """
    rows, prev = [], None
    for N in N_list:
        run = run_manufactured(scheme, N, k0, theta, params, l, r, tol, boundary)
        rows.append({
            "scheme": scheme, "k0": k0, "theta": theta, "N": N, "h": run.h,
            "error": run.error,
            "ratio": None if prev is None else prev / run.error,
            "params": _fmt(run.params), "I_G": list(run.I_G),
            "residual": run.residual,
        })
        prev = run.error
    return rows

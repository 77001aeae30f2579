"""Point-weighting fourth-order stencils for the Helmholtz-PML operator.

Every scheme is assembled from two fixed 1D tables: the outer weights that
combine the fluxes ``A dp/dx`` at offsets -3/2, -1/2, 1/2, 3/2, and the
inner first-derivative weights at those offsets.  The point-weighting
schemes then replace the nodal values fed to the flux operator by weighted
combinations of neighbouring nodes.

Weight arrays are indexed ``w[..., i + 2, j + 2]`` where ``i`` is the x
offset (``m``) and ``j`` the z offset (``n``).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import FootprintError, SpecError
from .pml import CoefficientFields, GridSpec

__all__ = [
    "SchemeParams25",
    "SchemeParams17",
    "Stencil",
    "SCHEMES",
    "base_flux_stencil_x",
    "base_flux_stencil_z",
    "mass_stencil",
    "stencil_weights",
    "pw25_stencil",
    "pw17_stencil",
    "nc4_stencil",
    "conventional5_stencil",
    "TRANSVERSE_AVERAGE",
]

SCHEMES = ("pw25", "pw17", "nc4", "conv5")

# half-cell offsets of the flux samples and their outer (divergence) weights
FLUX_OFFSETS = (-3, -1, 1, 3)
OUTER = {-3: 1 / 24, -1: -9 / 8, 1: 9 / 8, 3: -1 / 24}

# fourth-order dp/dx at x_m + j dx/2 from p_{m-2..m+2}
INNER = {
    -3: np.array([-11 / 12, 17 / 24, 3 / 8, -5 / 24, 1 / 24]),
    -1: np.array([1 / 24, -9 / 8, 9 / 8, -1 / 24, 0.0]),
    1: np.array([0.0, 1 / 24, -9 / 8, 9 / 8, -1 / 24]),
    3: np.array([-1 / 24, 5 / 24, -3 / 8, -17 / 24, 11 / 12]),
}

# fourth-order estimate of p at the centre from its four transverse neighbours
TRANSVERSE_AVERAGE = np.array([-1 / 6, 2 / 3, 0.0, 2 / 3, -1 / 6])

_E0 = np.array([0.0, 0.0, 1.0, 0.0, 0.0])


def _finite(name, value):
    value = float(value)
    if not np.isfinite(value):
        raise SpecError(f"{name} must be finite, got {value}")
    return value


@dataclass(frozen=True)
class SchemeParams25:
    """Weights of the point-weighting 25-point scheme.

    ``a2 = 1 - a1`` and ``c1 = 1 - c2 - c3 - c4`` are derived, so the
    sum-to-one constraints hold by construction.
    """

    a1: float = 1.0
    c2: float = 0.0
    c3: float = 0.0
    c4: float = 0.0

    def __post_init__(self):
        for name in ("a1", "c2", "c3", "c4"):
            object.__setattr__(self, name, _finite(name, getattr(self, name)))

    @property
    def a2(self) -> float:
        return 1.0 - self.a1

    @property
    def c1(self) -> float:
        return 1.0 - self.c2 - self.c3 - self.c4

    @property
    def mass_weights(self) -> tuple[float, float, float, float]:
        return (self.c1, self.c2, self.c3, self.c4)

    def as_dict(self) -> dict:
        return {"a1": self.a1, "c1": self.c1, "c2": self.c2, "c3": self.c3, "c4": self.c4}

    @classmethod
    def from_vector(cls, x) -> "SchemeParams25":
        return cls(*map(float, x))


@dataclass(frozen=True)
class SchemeParams17:
    """Weights of the point-weighting 17-point scheme (``b2``, ``d1`` derived)."""

    b1: float = 1.0
    d2: float = 0.0
    d3: float = 0.0

    def __post_init__(self):
        for name in ("b1", "d2", "d3"):
            object.__setattr__(self, name, _finite(name, getattr(self, name)))

    @property
    def b2(self) -> float:
        return 1.0 - self.b1

    @property
    def d1(self) -> float:
        return 1.0 - self.d2 - self.d3

    @property
    def mass_weights(self) -> tuple[float, float, float]:
        return (self.d1, self.d2, self.d3)

    def as_dict(self) -> dict:
        return {"b1": self.b1, "d1": self.d1, "d2": self.d2, "d3": self.d3}

    @classmethod
    def from_vector(cls, x) -> "SchemeParams17":
        return cls(*map(float, x))


@dataclass(frozen=True, eq=False)
class Stencil:
    """Complex weights on the 5x5 footprint centred at node ``(m, n)``."""

    weights: np.ndarray
    center: tuple[int, int]

    def entries(self, tol: float = 0.0) -> list[tuple[int, int, complex]]:
        out = []
        for i in range(-2, 3):
            for j in range(-2, 3):
                w = self.weights[i + 2, j + 2]
                if abs(w) > tol:
                    out.append((i, j, complex(w)))
        return out

    def nonzero_count(self, tol: float = 0.0) -> int:
        return int(np.count_nonzero(np.abs(self.weights) > tol))

    def apply(self, p: np.ndarray) -> complex:
        """Apply to a full ``(nz, nx)`` field at the stencil centre."""
        m, n = self.center
        patch = p[n - 2:n + 3, m - 2:m + 3]  # [j, i]
        return complex(np.sum(self.weights * patch.T))


def base_flux_stencil_x(A_samples, h: float) -> np.ndarray:
    """Five weights of the fourth-order ``d/dx (A d/dx)`` operator.

    Parameters
    ----------
    A_samples : array_like, shape (..., 4)
        A at offsets -3/2, -1/2, +1/2, +3/2 cells from the node.
    h : float
        Grid spacing along x.
    """
    A = np.asarray(A_samples)
    w = sum(OUTER[j] * A[..., q, None] * INNER[j] for q, j in enumerate(FLUX_OFFSETS))
    return w / h**2


def base_flux_stencil_z(B_samples, h: float, gamma: float) -> np.ndarray:
    return base_flux_stencil_x(B_samples, gamma * h)


_MASS = {}


def mass_stencil(j: int) -> np.ndarray:
    """Averaging footprint ``I^(j)`` applied to the nodal values ``k^2 C p``."""
    if j not in (1, 2, 3, 4):
        raise SpecError(f"mass operator index must be 1..4, got {j}")
    if j not in _MASS:
        w = np.zeros((5, 5))
        if j == 1:
            w[2, 2] = 1.0
        elif j == 2:
            for i, jj in ((1, 0), (-1, 0), (0, 1), (0, -1)):
                w[i + 2, jj + 2] = 1 / 3
                w[2 * i + 2, 2 * jj + 2] = -1 / 12
        elif j == 3:
            for i, jj in ((1, 1), (1, -1), (-1, 1), (-1, -1)):
                w[i + 2, jj + 2] = 1 / 3
                w[2 * i + 2, 2 * jj + 2] = -1 / 12
        else:
            for i, jj in ((1, 1), (1, -1), (-1, 1), (-1, -1)):
                w[i + 2, jj + 2] = 4 / 9
                w[2 * i + 2, 2 * jj + 2] = 1 / 36
                w[i + 2, 2 * jj + 2] = -1 / 9
                w[2 * i + 2, jj + 2] = -1 / 9
        w.setflags(write=False)
        _MASS[j] = w
    return _MASS[j]


def combined_mass(weights) -> np.ndarray:
    """``sum_j weights[j-1] I^(j)`` as one 5x5 footprint."""
    return sum(c * mass_stencil(j) for j, c in enumerate(weights, start=1))


def _check_nodes(grid: GridSpec, ms, ns, reach: int):
    if (np.min(ms) < reach or np.max(ms) > grid.nx - 1 - reach
            or np.min(ns) < reach or np.max(ns) > grid.nz - 1 - reach):
        raise FootprintError(
            f"stencil footprint of reach {reach} leaves the {grid.nx}x{grid.nz} grid")


def _flux_weights(fields: CoefficientFields, grid: GridSpec, ms, ns):
    A = np.stack([fields.A[j][ns, ms] for j in FLUX_OFFSETS], axis=-1)
    B = np.stack([fields.B[j][ns, ms] for j in FLUX_OFFSETS], axis=-1)
    return base_flux_stencil_x(A, grid.dx), base_flux_stencil_z(B, grid.h, grid.gamma)


def _gather(values: np.ndarray, ms, ns) -> np.ndarray:
    """``values[n + j, m + i]`` for the 25 footprint offsets -> (len, 5, 5)."""
    off = np.arange(-2, 3)
    return values[ns[:, None, None] + off[None, None, :], ms[:, None, None] + off[None, :, None]]


def stencil_weights(scheme: str, fields: CoefficientFields, params, ms, ns) -> np.ndarray:
    """Weights for a batch of nodes, shape ``(len(ms), 5, 5)``.

    ``params`` is a :class:`SchemeParams25` for ``pw25``, a
    :class:`SchemeParams17` for ``pw17`` and ignored otherwise.
    """
    grid = fields.grid
    ms = np.atleast_1d(np.asarray(ms, dtype=np.intp))
    ns = np.atleast_1d(np.asarray(ns, dtype=np.intp))
    if scheme == "conv5":
        return _conv5_weights(fields, grid, ms, ns)
    if scheme not in SCHEMES:
        raise SpecError(f"unknown scheme {scheme!r}; expected one of {SCHEMES}")
    _check_nodes(grid, ms, ns, 2)
    Wx, Wz = _flux_weights(fields, grid, ms, ns)
    Q = _gather(fields.k2C, ms, ns)

    if scheme == "nc4":
        w = Wx[:, :, None] * _E0 + _E0[:, None] * Wz[:, None, :]
        w[:, 2, 2] += Q[:, 2, 2]
        return w

    if scheme == "pw25":
        if not isinstance(params, SchemeParams25):
            raise SpecError("pw25 needs SchemeParams25")
        r = params.a1 * _E0 + params.a2 * TRANSVERSE_AVERAGE
        w = Wx[:, :, None] * r + r[:, None] * Wz[:, None, :]
        return w + combined_mass(params.mass_weights) * Q

    if not isinstance(params, SchemeParams17):
        raise SpecError("pw17 needs SchemeParams17")
    w = params.b1 * (Wx[:, :, None] * _E0 + _E0[:, None] * Wz[:, None, :])
    half = 0.5 * params.b2
    for i in (-2, -1, 1, 2):
        s = abs(i)
        cx = half * Wx[:, i + 2]
        cz = half * Wz[:, i + 2]
        for sign in (1, -1):
            # x flux: row m+i borrows from z-neighbours, minus the same at column m
            w[:, i + 2, sign * s + 2] += cx
            w[:, 2, sign * s + 2] -= cx
            w[:, sign * s + 2, i + 2] += cz
            w[:, sign * s + 2, 2] -= cz
    return w + combined_mass(params.mass_weights) * Q


def _conv5_weights(fields, grid, ms, ns):
    _check_nodes(grid, ms, ns, 1)
    w = np.zeros((len(ms), 5, 5), dtype=complex)
    am, ap = fields.A[-1][ns, ms] / grid.dx**2, fields.A[1][ns, ms] / grid.dx**2
    bm, bp = fields.B[-1][ns, ms] / grid.dz**2, fields.B[1][ns, ms] / grid.dz**2
    w[:, 1, 2] = am
    w[:, 3, 2] = ap
    w[:, 2, 1] = bm
    w[:, 2, 3] = bp
    w[:, 2, 2] = -(am + ap + bm + bp) + fields.k2C[ns, ms]
    return w


def _single(scheme, node, fields, params, grid):
    if grid != fields.grid:
        raise SpecError("grid does not match the coefficient fields")
    m, n = node
    return Stencil(stencil_weights(scheme, fields, params, [m], [n])[0], (int(m), int(n)))


def pw25_stencil(node, fields: CoefficientFields, params: SchemeParams25, grid: GridSpec) -> Stencil:
    """25-point point-weighting stencil at ``node = (m, n)``."""
    return _single("pw25", node, fields, params, grid)


def pw17_stencil(node, fields: CoefficientFields, params: SchemeParams17, grid: GridSpec) -> Stencil:
    """17-point point-weighting stencil at ``node = (m, n)``."""
    return _single("pw17", node, fields, params, grid)


def nc4_stencil(node, fields: CoefficientFields, grid: GridSpec) -> Stencil:
    return _single("nc4", node, fields, None, grid)


def conventional5_stencil(node, fields: CoefficientFields, grid: GridSpec) -> Stencil:
    return _single("conv5", node, fields, None, grid)

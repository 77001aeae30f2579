"""Global sparse system for the discrete Helmholtz-PML operator.

Unknowns are numbered row-major over the non-eliminated nodes.  The matrix
pattern is fixed by the scheme (25, 17, 9 or 5 entries per full row), not by
the numerical values, so nonzero counts do not depend on the medium.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import SolverError, SpecError
from .pml import CoefficientFields, GridSpec
from .stencils import SCHEMES, stencil_weights

__all__ = [
    "PointSource",
    "BoundaryClosure",
    "SparseSystem",
    "Field",
    "POLICIES",
    "stencil_pattern",
    "apply_boundary",
    "assemble",
    "solve",
    "point_source_rhs",
    "nested_dissection",
]

log = logging.getLogger(__name__)

POLICIES = ("two-ring-dirichlet", "two-ring-exact", "fallback-5p")
_CHUNK = 20000


def stencil_pattern(scheme: str) -> np.ndarray:
    """Boolean 5x5 structural footprint, indexed ``[di + 2, dj + 2]``."""
    mask = np.zeros((5, 5), dtype=bool)
    if scheme == "pw25":
        mask[:] = True
    elif scheme == "pw17":
        mask[:] = True
        for i, j in ((1, 2), (2, 1)):
            for si in (1, -1):
                for sj in (1, -1):
                    mask[si * i + 2, sj * j + 2] = False
    elif scheme == "nc4":
        mask[2, :] = mask[:, 2] = True
    elif scheme == "conv5":
        mask[1:4, 2] = mask[2, 1:4] = True
    else:
        raise SpecError(f"unknown scheme {scheme!r}; expected one of {SCHEMES}")
    return mask


@dataclass(frozen=True)
class PointSource:
    """Discrete delta at the node nearest ``(x, z)``.

    The nodal value is ``amplitude / (h * gamma h)`` so that the grid sum
    approximates a unit impulse.
    """

    x: float
    z: float
    amplitude: complex = 1.0


def point_source_rhs(grid: GridSpec, source: PointSource) -> np.ndarray:
    g = np.zeros(grid.shape, dtype=complex)
    m, n = grid.nearest_node(source.x, source.z)
    g[n, m] = source.amplitude / (grid.dx * grid.dz)
    return g


@dataclass(frozen=True, eq=False)
class BoundaryClosure:
    """Which nodes are eliminated, their values, and which use 5-point rows."""

    policy: str
    known: np.ndarray
    values: np.ndarray
    low_order: np.ndarray


def apply_boundary(policy: str, grid: GridSpec, data=None) -> BoundaryClosure:
    """Closure of the nodes that cannot carry the 5-wide stencil.

    ``two-ring-dirichlet`` eliminates the two outer rings with ``data`` (zero
    when omitted); ``two-ring-exact`` is the same but insists on data;
    ``fallback-5p`` eliminates only the outer ring and gives the next ring
    second-order 5-point rows.
    """
    if policy not in POLICIES:
        raise SpecError(f"unknown boundary policy {policy!r}; expected one of {POLICIES}")
    if policy == "two-ring-exact" and data is None:
        raise SpecError("boundary policy 'two-ring-exact' needs boundary data")
    values = np.zeros(grid.shape, dtype=complex)
    if data is not None:
        data = np.asarray(data)
        if data.shape != grid.shape:
            raise SpecError(f"boundary data shape {data.shape} does not match grid {grid.shape}")
        values[:] = data
    n, m = np.indices(grid.shape)
    dist = np.minimum(np.minimum(m, grid.nx - 1 - m), np.minimum(n, grid.nz - 1 - n))
    rings = 1 if policy == "fallback-5p" else 2
    known = dist < rings
    low_order = (dist == 1) if policy == "fallback-5p" else np.zeros(grid.shape, bool)
    values[~known] = 0.0
    return BoundaryClosure(policy, known, values, low_order)


@dataclass(eq=False)
class SparseSystem:
    """Assembled ``A x = r`` with the map back to grid nodes."""

    matrix: sp.csr_matrix
    rhs: np.ndarray
    ordering: np.ndarray
    closure: BoundaryClosure
    grid: GridSpec
    scheme: str

    @property
    def dimension(self) -> int:
        return self.matrix.shape[0]

    @property
    def nnz(self) -> int:
        return int(self.matrix.nnz)

    def expand(self, x: np.ndarray) -> np.ndarray:
        """Scatter an unknown vector back onto the grid, with known values."""
        full = self.closure.values.copy()
        full[self.ordering >= 0] = x
        return full


def _rhs_field(grid, source):
    if source is None:
        return np.zeros(grid.shape, dtype=complex)
    if isinstance(source, PointSource):
        return point_source_rhs(grid, source)
    if isinstance(source, (list, tuple)) and all(isinstance(s, PointSource) for s in source):
        return sum((point_source_rhs(grid, s) for s in source),
                   np.zeros(grid.shape, dtype=complex))
    g = np.asarray(source, dtype=complex)
    if g.shape != grid.shape:
        raise SpecError(f"source array shape {g.shape} does not match grid {grid.shape}")
    return g


def assemble(scheme: str, grid: GridSpec, fields: CoefficientFields, params=None,
             boundary: str = "two-ring-dirichlet", source=None,
             boundary_data=None) -> SparseSystem:
    """Build the sparse system of one frequency.

    Parameters
    ----------
    scheme : {"pw25", "pw17", "nc4", "conv5"}
    params : SchemeParams25 or SchemeParams17
        Required for the point-weighting schemes.
    boundary : str
        Closure policy, see :func:`apply_boundary`.
    source : PointSource, list of PointSource, array of shape (nz, nx) or None
        Right-hand side ``g`` sampled at the nodes.
    boundary_data : array of shape (nz, nx), optional
        Values for the eliminated nodes (only the eliminated entries are read).
    """
    if fields.grid != grid:
        raise SpecError("coefficient fields were built for a different grid")
    if scheme not in SCHEMES:
        raise SpecError(f"unknown scheme {scheme!r}; expected one of {SCHEMES}")
    closure = apply_boundary(boundary, grid, boundary_data)
    g = _rhs_field(grid, source)

    ordering = np.full(grid.shape, -1, dtype=np.int64)
    unknown = ~closure.known
    ordering[unknown] = np.arange(int(unknown.sum()))
    ns, ms = np.nonzero(unknown)
    rhs = g[ns, ms].astype(complex)

    rows, cols, vals = [], [], []
    groups = [(scheme, ~closure.low_order[ns, ms])]
    if closure.low_order.any():
        groups.append(("conv5", closure.low_order[ns, ms]))
    for name, sel in groups:
        pattern = stencil_pattern(name)
        offs = np.argwhere(pattern) - 2  # (k, 2) of (di, dj)
        idx_all = np.nonzero(sel)[0]
        for start in range(0, len(idx_all), _CHUNK):
            idx = idx_all[start:start + _CHUNK]
            m, n = ms[idx], ns[idx]
            w = stencil_weights(name, fields, params, m, n)
            if not np.all(np.isfinite(w)):
                raise SpecError("non-finite stencil weight (coefficient sampled outside the grid?)")
            for di, dj in offs:
                wv = w[:, di + 2, dj + 2]
                cn, cm = n + dj, m + di
                col = ordering[cn, cm]
                inside = col >= 0
                rows.append(idx[inside])
                cols.append(col[inside])
                vals.append(wv[inside])
                ext = ~inside
                if ext.any():
                    np.subtract.at(rhs, idx[ext], wv[ext] * closure.values[cn[ext], cm[ext]])
    dim = len(ms)
    A = sp.csr_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(dim, dim))
    A.sum_duplicates()
    return SparseSystem(A, rhs, ordering, closure, grid, scheme)


@dataclass(eq=False)
class Field:
    """Complex nodal field with the achieved solver residual."""

    values: np.ndarray
    grid: GridSpec
    residual: float = 0.0
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        v = np.asarray(self.values)
        if v.shape != self.grid.shape:
            raise SpecError(f"field shape {v.shape} does not match grid {self.grid.shape}")
        self.values = v

    def at(self, x: float, z: float) -> complex:
        m, n = self.grid.nearest_node(x, z)
        return complex(self.values[n, m])

    def _sidecar(self) -> dict:
        return {"nx": self.grid.nx, "nz": self.grid.nz, "h": self.grid.h,
                "gamma": self.grid.gamma, "origin": list(self.grid.origin),
                "residual": self.residual, **self.meta}

    def to_csv(self, stem) -> tuple[Path, Path]:
        """Write ``<stem>_re.csv`` and ``<stem>_im.csv`` (nz rows, nx columns)."""
        stem = Path(stem)
        re, im = stem.with_name(stem.name + "_re.csv"), stem.with_name(stem.name + "_im.csv")
        np.savetxt(re, self.values.real, delimiter=",", fmt="%.17g")
        np.savetxt(im, self.values.imag, delimiter=",", fmt="%.17g")
        return re, im

    def to_binary(self, path) -> tuple[Path, Path]:
        """Little-endian interleaved re/im float64 plus a JSON sidecar."""
        path = Path(path)
        np.ascontiguousarray(self.values, dtype="<c16").tofile(path)
        side = path.with_suffix(path.suffix + ".json")
        side.write_text(json.dumps(self._sidecar(), indent=2))
        return path, side

    @classmethod
    def from_binary(cls, path) -> "Field":
        path = Path(path)
        meta = json.loads(path.with_suffix(path.suffix + ".json").read_text())
        grid = GridSpec(meta["nx"], meta["nz"], meta["h"], meta["gamma"], tuple(meta["origin"]))
        vals = np.fromfile(path, dtype="<c16").reshape(grid.shape)
        extra = {k: v for k, v in meta.items()
                 if k not in ("nx", "nz", "h", "gamma", "origin", "residual")}
        return cls(vals, grid, meta.get("residual", 0.0), extra)

    @classmethod
    def from_csv(cls, stem, grid: GridSpec) -> "Field":
        stem = Path(stem)
        re = np.loadtxt(stem.with_name(stem.name + "_re.csv"), delimiter=",", ndmin=2)
        im = np.loadtxt(stem.with_name(stem.name + "_im.csv"), delimiter=",", ndmin=2)
        return cls(re + 1j * im, grid)


def nested_dissection(nx: int, nz: int, reach: int = 2, leaf: int = 64) -> np.ndarray:
    """Fill-reducing order of the row-major nodes of an ``nx x nz`` block.

    The block is bisected recursively across its longer side; each separator
    is ``reach`` lines wide so that no stencil couples the two halves, and is
    numbered after them.
    """
    parts = []

    def block(m0, m1, n0, n1):
        mm, nn = np.meshgrid(np.arange(m0, m1), np.arange(n0, n1))
        return (nn * nx + mm).ravel()

    stack = [(0, nx, 0, nz, False)]
    # iterative post-order traversal: children first, then separator
    while stack:
        m0, m1, n0, n1, emit = stack.pop()
        w, h = m1 - m0, n1 - n0
        if w <= 0 or h <= 0:
            continue
        if emit:
            parts.append(block(m0, m1, n0, n1))
            continue
        if w * h <= leaf or (w <= 2 * reach + 1 and h <= 2 * reach + 1):
            parts.append(block(m0, m1, n0, n1))
        elif w >= h:
            c = m0 + (w - reach) // 2
            stack += [(c, c + reach, n0, n1, True), (c + reach, m1, n0, n1, False),
                      (m0, c, n0, n1, False)]
        else:
            c = n0 + (h - reach) // 2
            stack += [(m0, m1, c, c + reach, True), (m0, m1, c + reach, n1, False),
                      (m0, m1, n0, c, False)]
    return np.concatenate(parts)


def _unknown_block(system: SparseSystem):
    """Bounding box of the unknowns if they fill it exactly, else None."""
    ns, ms = np.nonzero(system.ordering >= 0)
    if len(ns) == 0:
        return None
    m0, m1, n0, n1 = ms.min(), ms.max() + 1, ns.min(), ns.max() + 1
    if (m1 - m0) * (n1 - n0) != len(ns):
        return None
    return int(m1 - m0), int(n1 - n0)


def _relres(A, x, b, bnorm):
    return float(np.linalg.norm(A @ x - b) / bnorm)


def _lu_solve(A, b, perm, max_refine, tol):
    """Factor ``A[perm][:, perm]`` (or A itself) and refine; return x, residual."""
    bnorm = float(np.linalg.norm(b))
    if perm is not None:
        Ap = A[perm][:, perm].tocsc()
        # geometric ordering kept intact: diagonal pivots only
        lu = spla.splu(Ap, permc_spec="NATURAL", diag_pivot_thresh=0.0,
                       options={"SymmetricMode": True})
        bp = b[perm]
    else:
        Ap, bp = A.tocsc(), b
        lu = spla.splu(Ap, permc_spec="MMD_AT_PLUS_A")
    x = lu.solve(bp)
    res = _relres(Ap, x, bp, bnorm)
    for _ in range(max_refine):
        if res <= tol or not np.isfinite(res):
            break
        x = x + lu.solve(bp - Ap @ x)
        res = _relres(Ap, x, bp, bnorm)
    if perm is not None:
        out = np.empty_like(x)
        out[perm] = x
        x = out
    return x, res


def solve(system: SparseSystem, tol: float = 1e-10, max_refine: int = 3,
          frequency=None) -> Field:
    """Sparse LU solve with iterative refinement.

    The unknowns are first ordered by geometric nested dissection and
    factored with diagonal pivoting; if that misses ``tol`` the system is
    refactored with a minimum-degree ordering and partial pivoting.

    Raises
    ------
    SolverError
        If the factorization fails or ``||A x - r|| / ||r||`` stays above
        ``tol``; the achieved residual is attached.
    """
    A, b = system.matrix, system.rhs
    if not np.all(np.isfinite(b)):
        raise SolverError("right-hand side is not finite", frequency=frequency)
    if float(np.linalg.norm(b)) == 0.0:
        return Field(system.expand(np.zeros(system.dimension, complex)), system.grid, 0.0)
    shape = _unknown_block(system)
    attempts = [nested_dissection(*shape)] if shape else []
    attempts.append(None)
    res = np.inf
    for perm in attempts:
        try:
            x, res = _lu_solve(A, b, perm, max_refine, tol)
        except RuntimeError as exc:  # exactly singular pivot
            log.debug("factorization attempt failed: %s", exc)
            continue
        if np.isfinite(res) and res <= tol:
            log.debug("solved %d unknowns, relative residual %.3e", system.dimension, res)
            return Field(system.expand(x), system.grid, res)
    raise SolverError(f"relative residual {res:.3e} exceeds tolerance {tol:.1e}",
                      residual=float(res), frequency=frequency)

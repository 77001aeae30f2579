"""Grid, medium and PML coefficient fields for the 2D Helmholtz-PML equation.

The equation solved everywhere in this package is

    d/dx (A dp/dx) + d/dz (B dp/dz) + C k^2 p = g

with A = s_z/s_x, B = s_x/s_z, C = s_x s_z and s = 1 - i sigma/omega.
Arrays are stored with shape ``(nz, nx)``: row ``n`` is depth ``z_n`` and
column ``m`` is ``x_m``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import SpecError

__all__ = [
    "GridSpec",
    "PmlConfig",
    "MediumModel",
    "CoefficientFields",
    "sigma_profile",
    "stretch_factor",
    "coefficient_fields",
    "SIDES",
]

SIDES = ("left", "right", "top", "bottom")

# sample offsets (in half cells) needed by the fourth-order flux operators
_HALF_OFFSETS = (-3, -1, 1, 3)


@dataclass(frozen=True)
class GridSpec:
    """Uniform lattice ``x_m = x0 + m h``, ``z_n = z0 + n gamma h``."""

    nx: int
    nz: int
    h: float
    gamma: float = 1.0
    origin: tuple[float, float] = (0.0, 0.0)

    def __post_init__(self):
        if self.nx < 5 or self.nz < 5:
            raise SpecError(f"grid needs at least 5x5 nodes, got {self.nx}x{self.nz}")
        if not self.h > 0:
            raise SpecError(f"spacing h must be positive, got {self.h}")
        if not self.gamma > 0:
            raise SpecError(f"gamma must be positive, got {self.gamma}")
        object.__setattr__(self, "origin", (float(self.origin[0]), float(self.origin[1])))

    @property
    def dx(self) -> float:
        return self.h

    @property
    def dz(self) -> float:
        return self.gamma * self.h

    @property
    def eta(self) -> float:
        return 1.0 + 1.0 / self.gamma**2

    @property
    def shape(self) -> tuple[int, int]:
        return (self.nz, self.nx)

    @property
    def x(self) -> np.ndarray:
        return self.origin[0] + self.h * np.arange(self.nx)

    @property
    def z(self) -> np.ndarray:
        return self.origin[1] + self.dz * np.arange(self.nz)

    @property
    def extent(self) -> tuple[float, float, float, float]:
        """(x_min, x_max, z_min, z_max)."""
        return (self.origin[0], self.origin[0] + (self.nx - 1) * self.dx,
                self.origin[1], self.origin[1] + (self.nz - 1) * self.dz)

    def meshgrid(self) -> tuple[np.ndarray, np.ndarray]:
        """Node coordinates, each of shape ``(nz, nx)``."""
        return np.meshgrid(self.x, self.z, indexing="xy")

    def nearest_node(self, x: float, z: float) -> tuple[int, int]:
        """Index pair ``(m, n)`` of the node closest to ``(x, z)``."""
        m = int(round((x - self.origin[0]) / self.dx))
        n = int(round((z - self.origin[1]) / self.dz))
        if not (0 <= m < self.nx and 0 <= n < self.nz):
            raise SpecError(f"point ({x}, {z}) lies outside the grid")
        return m, n

    def padded(self, thickness: float, sides=SIDES) -> tuple["GridSpec", tuple[int, int]]:
        """Grow the grid outward by ``thickness`` on the given sides.

        Returns the enlarged grid and the ``(m, n)`` index of the original
        grid's first node inside it.  Used to wrap a physical domain in PML.
        """
        px = int(round(thickness / self.dx))
        pz = int(round(thickness / self.dz))
        left = px if "left" in sides else 0
        right = px if "right" in sides else 0
        top = pz if "top" in sides else 0
        bottom = pz if "bottom" in sides else 0
        grid = GridSpec(
            nx=self.nx + left + right,
            nz=self.nz + top + bottom,
            h=self.h,
            gamma=self.gamma,
            origin=(self.origin[0] - left * self.dx, self.origin[1] - top * self.dz),
        )
        return grid, (left, top)


@dataclass(frozen=True)
class PmlConfig:
    """Quadratic damping profile ``sigma = 2 pi a0 f_M (l / L_pml)^2``.

    ``L_pml = 0`` switches the layer off and the model reduces to the plain
    Helmholtz equation.  ``top`` is the side at the smallest ``z``.
    """

    L_pml: float = 0.0
    a0: float = 1.79
    f_M: float = 1.0
    sides: tuple[str, ...] = SIDES

    def __post_init__(self):
        if self.L_pml < 0:
            raise SpecError(f"L_pml must be >= 0, got {self.L_pml}")
        if not self.a0 > 0:
            raise SpecError(f"a0 must be positive, got {self.a0}")
        if not self.f_M > 0:
            raise SpecError(f"f_M must be positive, got {self.f_M}")
        sides = tuple(self.sides)
        bad = set(sides) - set(SIDES)
        if bad:
            raise SpecError(f"unknown PML sides {sorted(bad)}; expected a subset of {SIDES}")
        object.__setattr__(self, "sides", sides)

    @property
    def active(self) -> bool:
        return self.L_pml > 0 and len(self.sides) > 0

    @property
    def sigma_max(self) -> float:
        return 2.0 * np.pi * self.a0 * self.f_M


@dataclass(frozen=True)
class MediumModel:
    """Nodal velocity and a single frequency.

    For manufactured problems posed directly in terms of a wavenumber field
    use :meth:`from_wavenumber`.
    """

    velocity: np.ndarray
    frequency: float

    def __post_init__(self):
        v = np.array(self.velocity, dtype=float)
        if v.ndim != 2:
            raise SpecError("velocity must be a 2D array of shape (nz, nx)")
        if not np.all(v > 0):
            raise SpecError("velocity must be positive at every node")
        if not self.frequency > 0:
            raise SpecError(f"frequency must be positive, got {self.frequency}")
        v.setflags(write=False)
        object.__setattr__(self, "velocity", v)

    @classmethod
    def constant(cls, grid: GridSpec, velocity: float, frequency: float) -> "MediumModel":
        return cls(np.full(grid.shape, float(velocity)), frequency)

    @classmethod
    def from_wavenumber(cls, wavenumber: np.ndarray, frequency: float = 1.0) -> "MediumModel":
        k = np.asarray(wavenumber, dtype=float)
        if not np.all(k > 0):
            raise SpecError("wavenumber must be positive at every node")
        return cls(2.0 * np.pi * frequency / k, frequency)

    @property
    def omega(self) -> float:
        return 2.0 * np.pi * self.frequency

    @property
    def wavenumber(self) -> np.ndarray:
        return self.omega / self.velocity


@dataclass(frozen=True, eq=False)
class CoefficientFields:
    """Complex coefficients sampled where the stencils read them.

    ``A[j]`` holds A at ``(x_m + j dx/2, z_n)`` and ``B[j]`` holds B at
    ``(x_m, z_n + j dz/2)`` for ``j`` in (-3, -1, 1, 3); each array has the
    grid shape.  Samples that would fall more than one cell outside the grid
    (outward offsets of the outermost ring) are NaN: no stencil reads them.
    """

    A: dict
    B: dict
    C: np.ndarray
    k: np.ndarray
    grid: GridSpec = field(repr=False)

    @property
    def k2C(self) -> np.ndarray:
        return self.k**2 * self.C

    def is_uniform(self) -> bool:
        arrays = [self.C, self.k, *self.A.values(), *self.B.values()]
        return all(np.all(a == a.flat[0]) for a in arrays)


def _interface(grid: GridSpec, pml: PmlConfig, axis: str) -> tuple[float, float]:
    x_min, x_max, z_min, z_max = grid.extent
    lo, hi = (x_min, x_max) if axis == "x" else (z_min, z_max)
    lo_side, hi_side = ("left", "right") if axis == "x" else ("top", "bottom")
    L = pml.L_pml if pml.active else 0.0
    lo_if = lo + L if lo_side in pml.sides else -np.inf
    hi_if = hi - L if hi_side in pml.sides else np.inf
    return lo_if, hi_if


def _penetration(pos, grid: GridSpec, pml: PmlConfig, axis: str) -> np.ndarray:
    lo_if, hi_if = _interface(grid, pml, axis)
    pos = np.asarray(pos, dtype=float)
    return np.maximum(np.maximum(lo_if - pos, pos - hi_if), 0.0)


def _check_axis(axis: str):
    if axis not in ("x", "z"):
        raise ValueError(f"axis must be 'x' or 'z', got {axis!r}")


def sigma_profile(pos: float, axis: str, grid: GridSpec, pml: PmlConfig) -> float:
    """Damping ``sigma`` at coordinate ``pos`` along ``axis``.

    Raises
    ------
    ValueError
        If the point penetrates more than one cell beyond the PML thickness,
        i.e. lies outside the computational domain.
    """
    _check_axis(axis)
    if not pml.active:
        return 0.0
    step = grid.dx if axis == "x" else grid.dz
    depth = float(_penetration(pos, grid, pml, axis))
    if depth > pml.L_pml + step * (1 + 1e-12):
        raise ValueError(
            f"{axis}={pos} lies {depth - pml.L_pml:.6g} beyond the PML outer edge")
    return pml.sigma_max * (depth / pml.L_pml) ** 2


def _sigma_array(pos: np.ndarray, axis: str, grid: GridSpec, pml: PmlConfig) -> np.ndarray:
    """Vectorised :func:`sigma_profile`; out-of-domain points become NaN."""
    if not pml.active:
        return np.zeros_like(np.asarray(pos, dtype=float))
    step = grid.dx if axis == "x" else grid.dz
    depth = _penetration(pos, grid, pml, axis)
    sigma = pml.sigma_max * (depth / pml.L_pml) ** 2
    return np.where(depth > pml.L_pml + step * (1 + 1e-12), np.nan, sigma)


def stretch_factor(sigma, omega):
    """Complex coordinate stretch ``1 - i sigma / omega``."""
    if np.any(np.asarray(omega) == 0):
        raise ZeroDivisionError("stretch factor undefined at omega = 0")
    return 1.0 - 1j * np.asarray(sigma) / omega


def coefficient_fields(grid: GridSpec, medium: MediumModel, pml: PmlConfig) -> CoefficientFields:
    """Evaluate A, B at the half offsets and C, k at the nodes.

    The stretch factors are evaluated in closed form at every sample point
    (no interpolation between nodes).
    """
    if medium.velocity.shape != grid.shape:
        raise SpecError(
            f"velocity shape {medium.velocity.shape} does not match grid {grid.shape}")
    omega = medium.omega
    X, Z = grid.meshgrid()
    k = medium.wavenumber
    if not pml.active:
        ones = np.ones(grid.shape, dtype=complex)
        fields = CoefficientFields(
            A={j: ones.copy() for j in _HALF_OFFSETS},
            B={j: ones.copy() for j in _HALF_OFFSETS},
            C=ones.copy(), k=k.copy(), grid=grid)
        _freeze(fields)
        return fields

    sx_node = stretch_factor(_sigma_array(X, "x", grid, pml), omega)
    sz_node = stretch_factor(_sigma_array(Z, "z", grid, pml), omega)
    A, B = {}, {}
    with np.errstate(invalid="ignore"):
        for j in _HALF_OFFSETS:
            sx = stretch_factor(_sigma_array(X + 0.5 * j * grid.dx, "x", grid, pml), omega)
            A[j] = sz_node / sx
            sz = stretch_factor(_sigma_array(Z + 0.5 * j * grid.dz, "z", grid, pml), omega)
            B[j] = sx_node / sz
    fields = CoefficientFields(A=A, B=B, C=sx_node * sz_node, k=k.copy(), grid=grid)
    _freeze(fields)
    return fields


def _freeze(fields: CoefficientFields):
    for a in (*fields.A.values(), *fields.B.values(), fields.C, fields.k):
        a.setflags(write=False)

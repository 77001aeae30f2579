"""Plane-wave dispersion analysis of the point-weighting schemes.

Substituting ``p = exp(i (k_x x + k_z z))`` into a constant-medium stencil
collapses it onto a polynomial in

    P = cos(k h cos(theta)),    Q = cos(gamma k h sin(theta)),

and the relation ``L(P, Q)/h^2 + k^2 M(P, Q) = 0`` fixes the numerical
wavenumber ``k_N^2 h^2 = N / D``.  ``N`` and ``D`` are kept as monomial
tables so that values and P/Q-derivatives come from the same data.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import comb

import numpy as np

from .errors import DegenerateDenominatorError, EvanescentModeError, SpecError
from .stencils import SchemeParams17, SchemeParams25

__all__ = [
    "DispersionPoint",
    "DispersionResult",
    "pq",
    "symbols_25",
    "symbols_17",
    "relation_basis_25",
    "relation_basis_17",
    "numerator_denominator",
    "numerical_wavenumber",
    "phase_velocity_ratio",
    "group_velocity_ratio",
    "dispersion_functional",
    "evaluate_grid",
    "baseline_params",
]

TWO_PI = 2.0 * np.pi
DENOM_TOL = 1e-12


def baseline_params(scheme: str):
    """Parameters that reduce either scheme to the NC fourth-order stencil."""
    if scheme == "pw25":
        return SchemeParams25()
    if scheme == "pw17":
        return SchemeParams17()
    raise SpecError(f"dispersion analysis supports 'pw25' and 'pw17', got {scheme!r}")


def _check_params(scheme, params):
    if params is None:
        return baseline_params(scheme)
    expected = {"pw25": SchemeParams25, "pw17": SchemeParams17}.get(scheme)
    if expected is None:
        raise SpecError(f"dispersion analysis supports 'pw25' and 'pw17', got {scheme!r}")
    if not isinstance(params, expected):
        raise SpecError(f"{scheme} needs {expected.__name__}, got {type(params).__name__}")
    return params


@dataclass(frozen=True)
class DispersionPoint:
    """A propagation angle and sampling density."""

    theta: float
    G: float
    gamma: float = 1.0

    def __post_init__(self):
        if not self.G >= 2:
            raise SpecError(f"G must be >= 2 (Nyquist), got {self.G}")
        if not self.gamma > 0:
            raise SpecError(f"gamma must be positive, got {self.gamma}")

    @property
    def P(self) -> float:
        return pq(self.theta, self.G, self.gamma)[0]

    @property
    def Q(self) -> float:
        return pq(self.theta, self.G, self.gamma)[1]


@dataclass(frozen=True)
class DispersionResult:
    kN_over_k: float
    vph_ratio: float
    vgr_ratio: float
    N_val: float
    D_val: float


def pq(theta, G, gamma=1.0):
    """``P = cos((2 pi/G) cos theta)``, ``Q = cos(gamma (2 pi/G) sin theta)``."""
    kh = TWO_PI / np.asarray(G, dtype=float)
    theta = np.asarray(theta, dtype=float)
    P = np.cos(kh * np.cos(theta))
    Q = np.cos(gamma * kh * np.sin(theta))
    if P.ndim == 0:
        return float(P), float(Q)
    return P, Q


def symbols_25(params: SchemeParams25, k, h, eta):
    """Stencil weights of the 25-point scheme grouped by symmetry class.

    Returns ``T1..T9`` for the offsets (2,2), (1,2), (0,2), (2,1), (1,1),
    (0,1), (2,0), (1,0), (0,0) as (x, z) pairs; ``h`` is the x spacing.
    """
    a1, c2, c3, c4 = params.a1, params.c2, params.c3, params.c4
    h2, k2 = h * h, k * k
    return np.array([
        (1 - a1) * eta / (72 * h2) - (3 * c3 - c4) * k2 / 36,
        (eta + 3) * (a1 - 1) / (18 * h2) - c4 * k2 / 9,
        (5 - a1 * (eta + 4)) / (12 * h2) - c2 * k2 / 12,
        (4 * eta - 3) * (a1 - 1) / (18 * h2) - c4 * k2 / 9,
        8 * eta * (1 - a1) / (9 * h2) + (3 * c3 + 4 * c4) * k2 / 9,
        (a1 * (4 * eta + 1) - 5) / (3 * h2) + c2 * k2 / 3,
        (4 * a1 + 5 * eta * (1 - a1) - 5) / (12 * h2) - c2 * k2 / 12,
        (5 * eta * (a1 - 1) - a1 + 5) / (3 * h2) + c2 * k2 / 3,
        -5 * a1 * eta / (2 * h2) + params.c1 * k2,
    ])


SYMBOL_OFFSETS_25 = ((2, 2), (1, 2), (0, 2), (2, 1), (1, 1), (0, 1), (2, 0), (1, 0), (0, 0))
SYMBOL_OFFSETS_17 = ((2, 2), (0, 2), (1, 1), (0, 1), (2, 0), (1, 0), (0, 0))


def symbols_17(params: SchemeParams17, k, h, eta):
    """Grouped weights ``T~1..T~7`` of the 17-point scheme (offsets in
    ``SYMBOL_OFFSETS_17``)."""
    b1, d2, d3 = params.b1, params.d2, params.d3
    h2, k2 = h * h, k * k
    return np.array([
        (b1 - 1) * eta / (24 * h2) - d3 * k2 / 12,
        (1 - b1 * eta) / (12 * h2) - d2 * k2 / 12,
        2 * (1 - b1) * eta / (3 * h2) + d3 * k2 / 3,
        (4 * b1 * eta - 4) / (3 * h2) + d2 * k2 / 3,
        ((1 - b1) * eta - 1) / (12 * h2) - d2 * k2 / 12,
        (4 * (b1 - 1) * eta + 4) / (3 * h2) + d2 * k2 / 3,
        -5 * b1 * eta / (2 * h2) + params.d1 * k2,
    ])


def relation_basis_25(P, Q):
    """Plane-wave sums of each symmetry class, matching :func:`symbols_25`."""
    P, Q = np.asarray(P), np.asarray(Q)
    one = np.ones_like(P * Q)
    return np.stack([
        4 * (2 * P**2 - 1) * (2 * Q**2 - 1),
        4 * P * (2 * Q**2 - 1),
        (4 * Q**2 - 2) * one,
        4 * Q * (2 * P**2 - 1),
        4 * P * Q,
        2 * Q * one,
        (4 * P**2 - 2) * one,
        2 * P * one,
        one,
    ])


def relation_basis_17(P, Q):
    P, Q = np.asarray(P), np.asarray(Q)
    one = np.ones_like(P * Q)
    return np.stack([
        4 * (2 * P**2 - 1) * (2 * Q**2 - 1),
        (4 * Q**2 - 2) * one,
        4 * P * Q,
        2 * Q * one,
        (4 * P**2 - 2) * one,
        2 * P * one,
        one,
    ])


def _poly_25(params: SchemeParams25, eta):
    """Monomial tables {(i, j): coef of P^i Q^j} for N* and D*."""
    a1, c2, c3, c4 = params.a1, params.c2, params.c3, params.c4
    N = {
        (2, 2): 2 * eta * (1 - a1),
        (1, 1): 32 * eta * (1 - a1),
        (2, 1): 4 * (4 * eta - 3) * (a1 - 1),
        (1, 2): 4 * (eta + 3) * (a1 - 1),
        (2, 0): 14 * (1 - a1) * eta + 3 * (4 * a1 - 5),
        (0, 2): -((2 * a1 + 1) * eta + 3 * (4 * a1 - 5)),
        (0, 0): -7 * (2 * a1 + 1) * eta,
        (1, 0): 28 * (a1 - 1) * eta + 12 * (3 - a1),
        (0, 1): 8 * (2 * a1 + 1) * eta + 12 * (a1 - 3),
    }
    D = {
        (2, 2): 4 * (3 * c3 - c4),
        (2, 1): 8 * c4,
        (1, 2): 8 * c4,
        (2, 0): 3 * c2 - 6 * c3 + 2 * c4,
        (0, 2): 3 * c2 - 6 * c3 + 2 * c4,
        (1, 1): -4 * (3 * c3 + 4 * c4),
        (1, 0): -2 * (3 * c2 + 2 * c4),
        (0, 1): -2 * (3 * c2 + 2 * c4),
        (0, 0): 6 * c2 + 12 * c3 + 8 * c4 - 9,
    }
    return N, D


def _poly_17(params: SchemeParams17, eta):
    b1, d2, d3 = params.b1, params.d2, params.d3
    N = {
        (2, 2): 2 * eta * (b1 - 1),
        (2, 0): (2 - 2 * b1) * eta - 1,
        (1, 1): -8 * eta * (b1 - 1),
        (1, 0): 8 * ((b1 - 1) * eta + 1),
        (0, 2): (1 - 2 * b1) * eta + 1,
        (0, 1): 8 * (b1 * eta - 1),
        (0, 0): -eta - 6 * b1 * eta,
    }
    D = {
        (2, 2): 4 * d3,
        (2, 0): d2 - 2 * d3,
        (0, 2): d2 - 2 * d3,
        (1, 1): -4 * d3,
        (1, 0): -2 * d2,
        (0, 1): -2 * d2,
        (0, 0): 2 * d2 + 4 * d3 - 3,
    }
    return N, D


def _shift(poly, drop_constant=False):
    """Re-expand a table in powers of ``x = P - 1`` and ``y = Q - 1``.

    Near ``P = Q = 1`` (large G) the plain monomial sum cancels to a few
    digits; the shifted form with accurately computed ``x, y`` does not.
    ``N`` vanishes identically at ``P = Q = 1`` (stencils annihilate
    constants), so its constant term is exactly zero and dropped.
    """
    out = {}
    for (i, j), c in poly.items():
        for a in range(i + 1):
            for b in range(j + 1):
                out[(a, b)] = out.get((a, b), 0.0) + c * comb(i, a) * comb(j, b)
    if drop_constant:
        out.pop((0, 0), None)
    return out


def _poly_eval(poly, x, y, dx=0, dy=0):
    """Value (or first partial) of a monomial table."""
    total = 0.0
    for (i, j), c in poly.items():
        if dx and i == 0 or dy and j == 0:
            continue
        fi = i * x ** (i - 1) if dx else x**i
        fj = j * y ** (j - 1) if dy else y**j
        total = total + c * fi * fj
    return total


def _polys(scheme, params, eta):
    params = _check_params(scheme, params)
    N, D = _poly_25(params, eta) if scheme == "pw25" else _poly_17(params, eta)
    return _shift(N, drop_constant=True), _shift(D)


def numerator_denominator(scheme, params, P, Q, eta):
    """Closed-form ``(N, D)`` with ``k_N^2 h^2 = N / D``."""
    Np, Dp = _polys(scheme, params, eta)
    x, y = np.asarray(P) - 1.0, np.asarray(Q) - 1.0
    return _poly_eval(Np, x, y), _poly_eval(Dp, x, y)


def _eta(gamma):
    if not gamma > 0:
        raise SpecError(f"gamma must be positive, got {gamma}")
    return 1.0 + 1.0 / gamma**2


def _ratio(N, D, scale=1.0):
    if abs(D) <= DENOM_TOL * max(1.0, abs(N)):
        raise DegenerateDenominatorError(f"dispersion denominator vanishes (D = {D:.3e})")
    r = N / D
    if r < 0:
        raise EvanescentModeError(f"N/D = {r:.3e} < 0: no propagating numerical mode")
    return r


def numerical_wavenumber(scheme, params, theta, G, gamma=1.0, h=1.0) -> float:
    """``k_N = sqrt(N/D)/h`` for a plane wave sampled at ``G`` points per wavelength.

    Raises
    ------
    DegenerateDenominatorError
        If ``|D|`` is numerically zero.
    EvanescentModeError
        If ``N/D < 0``.
    """
    _, N, D, _, _ = _dk_terms(scheme, params, theta, G, gamma)
    return float(np.sqrt(_ratio(float(N), float(D)))) / h


def phase_velocity_ratio(scheme, params, theta, G, gamma=1.0) -> float:
    """``V_ph / v = k_N / k = (G / 2 pi) sqrt(N / D)``."""
    return G / TWO_PI * numerical_wavenumber(scheme, params, theta, G, gamma)


def dispersion_functional(scheme, params, theta, G, gamma=1.0) -> float:
    """``J = V_ph / v - 1``."""
    return phase_velocity_ratio(scheme, params, theta, G, gamma) - 1.0


def _dk_terms(scheme, params, theta, G, gamma):
    """N, D and their k-derivatives at h = 1, k = 2 pi / G."""
    eta = _eta(gamma)
    Np, Dp = _polys(scheme, params, eta)
    k = TWO_PI / np.asarray(G, dtype=float)
    c, s = np.cos(theta), np.sin(theta)
    x = -2.0 * np.sin(0.5 * k * c) ** 2
    y = -2.0 * np.sin(0.5 * gamma * k * s) ** 2
    dx = -c * np.sin(k * c)
    dy = -gamma * s * np.sin(gamma * k * s)
    N, D = _poly_eval(Np, x, y), _poly_eval(Dp, x, y)
    Nk = _poly_eval(Np, x, y, dx=1) * dx + _poly_eval(Np, x, y, dy=1) * dy
    Dk = _poly_eval(Dp, x, y, dx=1) * dx + _poly_eval(Dp, x, y, dy=1) * dy
    return k, N, D, Nk, Dk


def group_velocity_ratio(scheme, params, theta, G, gamma=1.0) -> float:
    """``V_gr / v = d k_N / d k`` by the chain rule through P and Q."""
    k, N, D, Nk, Dk = _dk_terms(scheme, params, theta, G, gamma)
    kN = np.sqrt(_ratio(float(N), float(D)))
    return float((Nk * D - N * Dk) / (2.0 * kN * D * D))


def evaluate(scheme, params, theta, G, gamma=1.0) -> DispersionResult:
    _, N, D, _, _ = _dk_terms(scheme, params, theta, G, gamma)
    kN = np.sqrt(_ratio(float(N), float(D)))
    return DispersionResult(
        kN_over_k=float(kN * G / TWO_PI),
        vph_ratio=float(kN * G / TWO_PI),
        vgr_ratio=group_velocity_ratio(scheme, params, theta, G, gamma),
        N_val=float(N), D_val=float(D))


def evaluate_grid(scheme, params, theta, G, gamma=1.0):
    """Vectorised phase/group ratios over broadcast ``theta`` and ``G``.

    Returns
    -------
    vph, vgr : ndarray
        NaN where the sample is degenerate or evanescent.
    valid : ndarray of bool
    """
    theta, G = np.broadcast_arrays(np.asarray(theta, float), np.asarray(G, float))
    k, N, D, Nk, Dk = _dk_terms(scheme, params, theta, G, gamma)
    degenerate = np.abs(D) <= DENOM_TOL * np.maximum(1.0, np.abs(N))
    with np.errstate(divide="ignore", invalid="ignore"):
        r = np.where(degenerate, np.nan, N / np.where(degenerate, 1.0, D))
        valid = np.isfinite(r) & (r >= 0)
        kN = np.sqrt(np.where(valid, r, np.nan))
        vph = kN / k
        vgr = (Nk * D - N * Dk) / (2.0 * kN * D * D)
    return vph, np.where(valid, vgr, np.nan), valid

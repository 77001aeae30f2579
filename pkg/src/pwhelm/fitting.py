"""Refined choice of the point-weighting parameters.

Requiring the dispersion functional ``J`` to vanish at a sample ``(theta, G)``
is equivalent to ``G^2 N - 4 pi^2 D = 0``, which is linear in the free
parameters.  Stacking that identity over a grid of angles and gridpoints per
wavelength gives an overdetermined linear system, solved by least squares.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
import scipy.linalg

from .dispersion import evaluate_grid, pq
from .errors import FitError, SpecError
from .stencils import SchemeParams17, SchemeParams25

__all__ = [
    "FitConfig",
    "FitReport",
    "IGEstimate",
    "estimate_IG",
    "ig_from_wavenumbers",
    "sample_grid",
    "lsq_rows_25",
    "lsq_rows_17",
    "fit_params_25",
    "fit_params_17",
    "fit_params",
    "validation_max_J",
]

G_FLOOR = 2.0
G_CEIL = 400.0
ROW_DROP_TOL = 1e-12
PI2 = np.pi**2


class IGEstimate(NamedTuple):
    G_min: float
    G_max: float
    warnings: tuple = ()


def _finalize_ig(lo, hi, widen, emit=True):
    notes = []
    if hi < G_FLOOR:
        raise SpecError(f"I_G = [{lo:.4g}, {hi:.4g}] lies entirely below the Nyquist floor 2")
    if lo < G_FLOOR:
        notes.append(f"G_min {lo:.4g} clipped to {G_FLOOR}")
        lo = G_FLOOR
    if hi > G_CEIL:
        notes.append(f"G_max {hi:.4g} clipped to {G_CEIL}")
        hi = G_CEIL
    if hi <= lo * (1 + 1e-12):
        # single-velocity, single-frequency problems give a point interval
        lo, hi = max(G_FLOOR, lo * (1 - widen)), min(G_CEIL, hi * (1 + widen))
        notes.append(f"degenerate interval widened by +/-{widen:.0%}")
        if hi <= lo:
            raise SpecError("I_G is empty after clipping")
    if emit:
        for note in notes:
            warnings.warn(note, stacklevel=3)
    return IGEstimate(float(lo), float(hi), tuple(notes))


def estimate_IG(v_min, v_max, f_min, f_max, h, widen=0.05, emit=True) -> IGEstimate:
    """A-priori range ``[v_min/(h f_max), v_max/(h f_min)]`` of G.

    The lower end is clipped to 2 and the upper to 400 (with a warning); a
    point interval is widened by ``widen`` relative on both sides.  With
    ``emit=False`` the notes are only returned in ``warnings``.
    """
    if not (0 < v_min <= v_max and 0 < f_min <= f_max and h > 0):
        raise SpecError("estimate_IG needs 0 < v_min <= v_max, 0 < f_min <= f_max, h > 0")
    return _finalize_ig(v_min / (h * f_max), v_max / (h * f_min), widen, emit)


def ig_from_wavenumbers(k_min, k_max, h, widen=0.05) -> IGEstimate:
    """``[2 pi/(h k_max), 2 pi/(h k_min)]`` for problems posed by wavenumber."""
    if not (0 < k_min <= k_max and h > 0):
        raise SpecError("ig_from_wavenumbers needs 0 < k_min <= k_max and h > 0")
    return _finalize_ig(2 * np.pi / (h * k_max), 2 * np.pi / (h * k_min), widen)


@dataclass(frozen=True)
class FitConfig:
    """Sampling set-up for the least-squares fit.

    ``I_theta`` defaults to ``[0, pi/4]`` when ``gamma == 1`` (the x/z
    symmetry covers the rest) and ``[0, pi/2]`` otherwise.
    """

    I_G: tuple[float, float]
    gamma: float = 1.0
    l: int = 64
    r: int = 64
    I_theta: tuple[float, float] | None = None
    n_validation: int = 128

    def __post_init__(self):
        lo, hi = map(float, self.I_G)
        if not (G_FLOOR <= lo < hi <= G_CEIL):
            raise SpecError(f"I_G must satisfy 2 <= G_min < G_max <= 400, got [{lo}, {hi}]")
        object.__setattr__(self, "I_G", (lo, hi))
        if not self.gamma > 0:
            raise SpecError(f"gamma must be positive, got {self.gamma}")
        if self.l < 2 or self.r < 2:
            raise SpecError(f"need l >= 2 and r >= 2, got l={self.l}, r={self.r}")
        if self.n_validation < 2:
            raise SpecError("n_validation must be >= 2")
        if self.I_theta is not None:
            a, b = map(float, self.I_theta)
            if not b > a:
                raise SpecError(f"I_theta must be increasing, got [{a}, {b}]")
            object.__setattr__(self, "I_theta", (a, b))

    @property
    def theta_range(self) -> tuple[float, float]:
        if self.I_theta is not None:
            return self.I_theta
        return (0.0, np.pi / 4 if self.gamma == 1.0 else np.pi / 2)


def _axes(config: FitConfig, l: int, r: int):
    t0, t1 = config.theta_range
    theta = t0 + (t1 - t0) * np.arange(l) / (l - 1)
    lo, hi = config.I_G
    inv = 1.0 / hi + (1.0 / lo - 1.0 / hi) * np.arange(r) / (r - 1)
    return theta, 1.0 / inv


def sample_grid(config: FitConfig) -> np.ndarray:
    """``(l*r, 2)`` array of ``(theta_m, G_n)``; theta varies slowest.

    Angles are uniform over the theta range and ``1/G`` is uniform between
    ``1/G_max`` and ``1/G_min``.
    """
    theta, G = _axes(config, config.l, config.r)
    T, GG = np.meshgrid(theta, G, indexing="ij")
    return np.column_stack([T.ravel(), GG.ravel()])


def lsq_rows_25(sample, gamma=1.0):
    """Row entries ``(S1, S2, S3, S4, S5)`` with ``S1 a1 + S2 c2 + S3 c3 + S4 c4 = S5``.

    ``sample`` is ``(theta, G)``; arrays broadcast.  ``S5`` already includes
    the constant ``-36 pi^2`` so the identity holds exactly when ``J = 0``.
    """
    theta, G = sample
    P, Q = pq(np.asarray(theta, float), np.asarray(G, float), gamma)
    P, Q = np.asarray(P), np.asarray(Q)
    eta = 1.0 + 1.0 / gamma**2
    G2 = np.asarray(G, float) ** 2
    S1 = -2 * G2 * (Q - 1) * (P - 1) * (eta * (P - 1) * (Q - 7) + 6 * (P - Q))
    S2 = -12 * PI2 * (P**2 + Q**2 - 2 * (P + Q - 1))
    S3 = -24 * PI2 * ((2 * P**2 - 1) * Q**2 - 2 * (P * Q - 1) - P**2)
    S4 = 8 * PI2 * ((2 * P**2 - 4 * P - 1) * Q * (Q - 2) - P**2 + 2 * P - 4)
    S5 = -((Q - 1) * (Q - 7) * (2 * P**2 - 4 * P - 1) * eta
           + 3 * (P - Q) * ((4 * P - 5) * Q - 5 * P + 12)) * G2 - 36 * PI2
    return S1, S2, S3, S4, S5


def lsq_rows_17(sample, gamma=1.0):
    """Row entries ``(W1, W2, W3, W4)`` with ``W1 b1 + W2 d2 + W3 d3 + W4 = 0``."""
    theta, G = sample
    P, Q = pq(np.asarray(theta, float), np.asarray(G, float), gamma)
    P, Q = np.asarray(P), np.asarray(Q)
    eta = 1.0 + 1.0 / gamma**2
    G2 = np.asarray(G, float) ** 2
    W1 = -2 * eta * (Q - 1) * (P - 1) * (P + Q + P * Q - 3) * G2
    W2 = 4 * PI2 * (P**2 - 2 * P + Q**2 - 2 * Q + 2)
    W3 = 8 * PI2 * (2 * P**2 * Q**2 - P**2 - 2 * P * Q - Q**2 + 2)
    W4 = ((Q - 1) * (2 * P**2 * Q - Q - 8 * P + 2 * P**2 - 1) * eta
          + (P - Q) * (P + Q - 8)) * G2 - 12 * PI2
    return W1, W2, W3, W4


def linear_system(scheme: str, config: FitConfig):
    """Stacked ``(matrix, rhs)`` before degenerate-row removal."""
    samples = sample_grid(config)
    sample = (samples[:, 0], samples[:, 1])
    if scheme == "pw25":
        *cols, rhs = lsq_rows_25(sample, config.gamma)
    elif scheme == "pw17":
        *cols, W4 = lsq_rows_17(sample, config.gamma)
        rhs = -W4
    else:
        raise SpecError(f"fitting supports 'pw25' and 'pw17', got {scheme!r}")
    return np.column_stack(cols), np.asarray(rhs, float)


@dataclass(frozen=True)
class FitReport:
    """Outcome of a least-squares parameter fit."""

    scheme: str
    params: SchemeParams25 | SchemeParams17
    residual: float
    max_abs_J: float
    baseline_max_abs_J: float
    n_rows: int
    rank: int
    config: FitConfig
    warnings: tuple = field(default=())

    @property
    def out_of_range(self) -> bool:
        return any("outside (0, 1]" in w for w in self.warnings)

    def to_dict(self) -> dict:
        return {
            "scheme": self.scheme,
            "params": self.params.as_dict(),
            "residual": self.residual,
            "maxJ": self.max_abs_J,
            "baseline_maxJ": self.baseline_max_abs_J,
            "n_rows": self.n_rows,
            "rank": self.rank,
            "IG": list(self.config.I_G),
            "gamma": self.config.gamma,
            "l": self.config.l,
            "r": self.config.r,
            "warnings": list(self.warnings),
        }


def validation_max_J(scheme, params, config: FitConfig) -> float:
    """``max |J|`` over an ``n_validation``-square grid of the fit domain.

    Samples where the scheme has no propagating mode count as infinite error.
    """
    theta, G = _axes(config, config.n_validation, config.n_validation)
    vph, _, valid = evaluate_grid(scheme, params, theta[:, None], G[None, :], config.gamma)
    if not np.all(valid):
        return float("inf")
    return float(np.max(np.abs(vph - 1.0)))


def _solve(scheme, config: FitConfig, n_params: int):
    A, b = linear_system(scheme, config)
    keep = np.max(np.abs(np.column_stack([A, b])), axis=1) >= ROW_DROP_TOL
    A, b = A[keep], b[keep]
    if A.shape[0] < n_params:
        raise FitError(f"only {A.shape[0]} usable rows for {n_params} parameters")
    scale = np.linalg.norm(A, axis=0)
    if np.any(scale == 0):
        raise FitError("a parameter column vanishes on every sample; system is rank deficient")
    x, _, rank, sv = scipy.linalg.lstsq(A / scale, b, lapack_driver="gelsy",
                                        cond=1e-13)
    if rank < n_params:
        raise FitError(f"least-squares system is rank deficient (rank {rank} < {n_params})")
    x = x / scale
    residual = float(np.linalg.norm(A @ x - b))
    return x, residual, int(A.shape[0]), int(rank)


def _report(scheme, params, residual, n_rows, rank, config, first_name):
    notes = []
    first = getattr(params, first_name)
    if not 0 < first <= 1:
        notes.append(f"{first_name} = {first:.6g} outside (0, 1]")
        warnings.warn(notes[-1], stacklevel=3)
    baseline = SchemeParams25() if scheme == "pw25" else SchemeParams17()
    return FitReport(
        scheme=scheme, params=params, residual=residual,
        max_abs_J=validation_max_J(scheme, params, config),
        baseline_max_abs_J=validation_max_J(scheme, baseline, config),
        n_rows=n_rows, rank=rank, config=config, warnings=tuple(notes))


def fit_params_25(config: FitConfig) -> FitReport:
    """Least-squares ``(a1, c2, c3, c4)`` for the 25-point scheme."""
    x, res, n, rank = _solve("pw25", config, 4)
    return _report("pw25", SchemeParams25.from_vector(x), res, n, rank, config, "a1")


def fit_params_17(config: FitConfig) -> FitReport:
    """Least-squares ``(b1, d2, d3)`` for the 17-point scheme."""
    x, res, n, rank = _solve("pw17", config, 3)
    return _report("pw17", SchemeParams17.from_vector(x), res, n, rank, config, "b1")


def fit_params(scheme: str, config: FitConfig) -> FitReport:
    if scheme == "pw25":
        return fit_params_25(config)
    if scheme == "pw17":
        return fit_params_17(config)
    raise SpecError(f"fitting supports 'pw25' and 'pw17', got {scheme!r}")

"""Frequency-domain synthesis of time traces and the free-space reference.

A zero-phase Ricker source is expanded in its DFT; each retained frequency
is one Helmholtz-PML solve with a unit point source, and receiver traces (or
whole-field snapshots) are recombined by an inverse real FFT.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ..errors import SpecError
from ..fitting import FitConfig, estimate_IG, fit_params
from ..linsys import PointSource, assemble, solve
from ..pml import GridSpec, MediumModel, PmlConfig, coefficient_fields
from .manufactured import cnorm
from .special import RickerSpec, TraceSeries, hankel0_2

__all__ = [
    "ModelSetup",
    "padded_model",
    "frequency_params",
    "solve_frequency",
    "homogeneous_exact_trace",
    "SynthesisResult",
    "time_synthesis",
    "EXAMPLE2_RECEIVERS",
    "example2_setup",
    "trace_error",
]

log = logging.getLogger(__name__)

# free-space field of the source term 4 pi delta is i pi H0^(2)(k r)
SOURCE_SCALE = 4.0 * np.pi

EXAMPLE2_RECEIVERS = ((100.0, 500.0), (300.0, 300.0), (700.0, 700.0), (100.0, 700.0),
                      (900.0, 500.0), (700.0, 300.0), (300.0, 900.0), (500.0, 900.0))


@dataclass(frozen=True, eq=False)
class ModelSetup:
    """Computational grid (physical domain plus PML) and its velocity."""

    grid: GridSpec
    velocity: np.ndarray
    pml: PmlConfig
    physical: GridSpec

    @property
    def v_min(self) -> float:
        return float(self.velocity.min())

    @property
    def v_max(self) -> float:
        return float(self.velocity.max())

    def physical_slice(self):
        m0, n0 = _offset(self.physical, self.grid)
        return (slice(n0, n0 + self.physical.nz), slice(m0, m0 + self.physical.nx))


def _offset(inner: GridSpec, outer: GridSpec):
    m0 = int(round((inner.origin[0] - outer.origin[0]) / outer.dx))
    n0 = int(round((inner.origin[1] - outer.origin[1]) / outer.dz))
    return m0, n0


def padded_model(physical: GridSpec, velocity, L_pml: float, a0: float = 1.79,
                 f_M: float = 15.0, sides=("left", "right", "top", "bottom")) -> ModelSetup:
    """Surround a physical model with a PML of thickness ``L_pml``.

    The velocity is extended into the layer by repeating the edge values.
    """
    v = np.asarray(velocity, float)
    if v.ndim == 0:
        v = np.full(physical.shape, float(v))
    if v.shape != physical.shape:
        raise SpecError(f"velocity shape {v.shape} does not match grid {physical.shape}")
    grid, (left, top) = physical.padded(L_pml, sides)
    right = grid.nx - physical.nx - left
    bottom = grid.nz - physical.nz - top
    vp = np.pad(v, ((top, bottom), (left, right)), mode="edge")
    return ModelSetup(grid, vp, PmlConfig(L_pml, a0, f_M, tuple(sides)), physical)


def frequency_params(scheme, setup: ModelSetup, f: float, l: int = 64, r: int = 64):
    """Fit the scheme parameters for one frequency on ``I_G = [v_min, v_max]/(f h)``."""
    if scheme not in ("pw25", "pw17"):
        return None
    ig = estimate_IG(setup.v_min, setup.v_max, f, f, setup.grid.h, emit=False)
    for note in ig.warnings:
        log.debug("f=%.4g Hz: %s", f, note)
    return fit_params(scheme, FitConfig((ig.G_min, ig.G_max), gamma=setup.grid.gamma,
                                        l=l, r=r)).params


def solve_frequency(setup: ModelSetup, f: float, scheme: str, source_xy, params=None,
                    tol: float = 1e-10, amplitude: complex = SOURCE_SCALE):
    """Wavefield of a point source of strength ``amplitude`` at frequency ``f``."""
    if params is None:
        params = frequency_params(scheme, setup, f)
    medium = MediumModel(setup.velocity, f)
    fields = coefficient_fields(setup.grid, medium, setup.pml)
    system = assemble(scheme, setup.grid, fields, params, boundary="two-ring-dirichlet",
                      source=PointSource(source_xy[0], source_xy[1], amplitude))
    sol = solve(system, tol=tol, frequency=f)
    sol.meta.update({"frequency": f, "scheme": scheme,
                     "params": params.as_dict() if params is not None else None})
    log.info("%s f=%.4g Hz residual=%.2e params=%s", scheme, f, sol.residual,
             sol.meta["params"])
    return sol


def homogeneous_exact_trace(source, receiver, v: float, ricker: RickerSpec) -> TraceSeries:
    """``i pi`` times the inverse DFT of ``H0^(2)(omega r / v)`` times the Ricker DFT."""
    r = float(np.hypot(receiver[0] - source[0], receiver[1] - source[1]))
    if r == 0.0:
        raise SpecError("receiver coincides with the source (Hankel singularity)")
    freqs = ricker.frequencies
    spec = np.zeros(len(freqs), dtype=complex)
    w = 2.0 * np.pi * freqs[1:]
    spec[1:] = 1j * np.pi * hankel0_2(w * r / v) * ricker.spectrum()[1:]
    return TraceSeries(ricker.times, np.fft.irfft(spec, ricker.n), tuple(receiver))


@dataclass(eq=False)
class SynthesisResult:
    traces: list
    frequencies: np.ndarray
    residuals: np.ndarray
    params: list
    snapshots: dict = field(default_factory=dict)
    wavefields: dict = field(default_factory=dict)


def _retained(ricker: RickerSpec, setup: ModelSetup, rel: float):
    idx = ricker.retained(rel)
    f = ricker.frequencies[idx]
    # the grid cannot carry waves with fewer than two points per wavelength
    ok = setup.v_min / (setup.grid.h * f) >= 2.0
    if not np.all(ok):
        log.info("dropping %d frequencies above the grid Nyquist limit %.3g Hz",
                 int((~ok).sum()), setup.v_min / (2 * setup.grid.h))
    return idx[ok]


def time_synthesis(setup: ModelSetup, ricker: RickerSpec, source_xy, receivers,
                   scheme: str = "pw17", params=None, tol: float = 1e-10, threads: int = 1,
                   rel_cut: float = 1e-4, snapshot_times=(), keep_frequencies=()):
    """Traces at ``receivers`` from one Helmholtz-PML solve per retained frequency.

    Parameters
    ----------
    params : optional
        Fixed scheme parameters; by default they are refitted per frequency.
    snapshot_times : sequence of float
        Times at which the whole wavefield is synthesised as well.
    keep_frequencies : sequence of float
        Frequencies (Hz) whose complex wavefield is returned; the nearest
        retained DFT frequency is used.

    Raises
    ------
    SolverError
        If any frequency fails; the failing frequency is attached.
    """
    idx = _retained(ricker, setup, rel_cut)
    freqs = ricker.frequencies
    R = ricker.spectrum()
    nodes = [setup.grid.nearest_node(x, z) for x, z in receivers]
    keep_idx = {int(idx[np.argmin(np.abs(freqs[idx] - fk))]): fk for fk in keep_frequencies}

    def one(j):
        f = float(freqs[j])
        p = params if params is not None else frequency_params(scheme, setup, f)
        sol = solve_frequency(setup, f, scheme, source_xy, p, tol)
        return j, sol, p

    spectra = np.zeros((len(receivers), len(freqs)), dtype=complex)
    snaps = {t: np.zeros(setup.grid.shape) for t in snapshot_times}
    residuals = np.zeros(len(idx))
    used = []
    wavefields = {}
    with ThreadPoolExecutor(max_workers=max(1, int(threads))) as pool:
        results = list(pool.map(one, idx))
    # deterministic join in frequency order
    n = ricker.n
    for q, (j, sol, p) in enumerate(results):
        residuals[q] = sol.residual
        used.append(p.as_dict() if p is not None else None)
        for i, (m, nn) in enumerate(nodes):
            spectra[i, j] = R[j] * sol.values[nn, m]
        if j in keep_idx:
            wavefields[float(freqs[j])] = sol
        w = 2.0 * np.pi * freqs[j]
        weight = 1.0 if (n % 2 == 0 and j == n // 2) else 2.0
        for t in snapshot_times:
            snaps[t] += weight * np.real(R[j] * sol.values * np.exp(1j * w * t)) / n
    traces = [TraceSeries(ricker.times, np.fft.irfft(spectra[i], n), tuple(rc))
              for i, rc in enumerate(receivers)]
    return SynthesisResult(traces, freqs[idx], residuals, used, snaps, wavefields)


def example2_setup(h: float = 20.0, v: float = 2000.0, L_pml: float = 500.0,
                   f_M: float = 15.0, size: float = 1000.0) -> ModelSetup:
    n = int(round(size / h)) + 1
    return padded_model(GridSpec(n, n, h), v, L_pml, 1.79, f_M)


def trace_error(numerical: TraceSeries, exact: TraceSeries) -> float:
    return cnorm(np.asarray(numerical.values) - np.asarray(exact.values))

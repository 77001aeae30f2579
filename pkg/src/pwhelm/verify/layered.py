"""Layered-model demonstration: monofrequency wavefield, snapshot and trace.

The model has horizontal layers; the physical grid is wrapped in a PML on all
four sides.  Acceptance is property based: the field has to decay across the
absorbing layer and every per-frequency solve has to meet the residual target.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from ..errors import SpecError
from ..pml import GridSpec
from .seismogram import ModelSetup, padded_model, solve_frequency, time_synthesis
from .special import RickerSpec

__all__ = [
    "layered_velocity",
    "layered_setup",
    "pml_decay_metric",
    "LayeredResult",
    "layered_demo",
]

log = logging.getLogger(__name__)

DEFAULT_VELOCITIES = (2000.0, 2500.0, 3000.0)
DEFAULT_INTERFACES = (800.0, 1400.0)


def layered_velocity(grid: GridSpec, velocities=DEFAULT_VELOCITIES,
                     interfaces=DEFAULT_INTERFACES) -> np.ndarray:
    """Velocity on ``grid`` for horizontal layers; ``z`` increases downward.

    A node exactly on an interface takes the velocity of the layer below.
    """
    velocities = np.asarray(velocities, float)
    interfaces = np.asarray(interfaces, float)
    if len(velocities) != len(interfaces) + 1:
        raise SpecError("need exactly one more layer velocity than interfaces")
    if np.any(velocities <= 0) or np.any(np.diff(interfaces) <= 0):
        raise SpecError("velocities must be positive and interfaces increasing")
    _, Z = grid.meshgrid()
    return velocities[np.searchsorted(interfaces, Z, side="right")]


def layered_setup(n: int = 201, h: float = 10.0, velocity=None, L_pml: float = 500.0,
                  a0: float = 1.79, f_M: float = 20.0) -> ModelSetup:
    """``n x n`` physical grid with spacing ``h`` wrapped in a PML of width ``L_pml``."""
    physical = GridSpec(n, n, h)
    v = layered_velocity(physical) if velocity is None else velocity
    return padded_model(physical, v, L_pml, a0, f_M)


def pml_decay_metric(values: np.ndarray, setup: ModelSetup, ring: int = 2) -> float:
    """``max |p|`` on a grid ring over ``max |p|`` in the physical domain.

    ``ring`` counts from the outer edge; the default is the outermost ring of
    unknowns, since the two rings outside it are eliminated as zeros.
    """
    v = np.abs(np.asarray(values))
    nz, nx = v.shape
    if not 0 <= ring < min(nx, nz) // 2:
        raise SpecError(f"ring {ring} is outside the grid")
    lo_z, hi_z, lo_x, hi_x = ring, nz - 1 - ring, ring, nx - 1 - ring
    edge = np.concatenate([v[lo_z, lo_x:hi_x + 1], v[hi_z, lo_x:hi_x + 1],
                           v[lo_z:hi_z + 1, lo_x], v[lo_z:hi_z + 1, hi_x]])
    interior = v[setup.physical_slice()].max()
    if interior == 0:
        raise SpecError("field vanishes in the physical domain")
    return float(edge.max() / interior)


@dataclass(eq=False)
class LayeredResult:
    setup: ModelSetup
    wavefield: object
    decay: float
    snapshot: np.ndarray | None
    trace: object | None
    residuals: np.ndarray


def layered_demo(setup: ModelSetup | None = None, scheme: str = "pw25",
                 source=(1000.0, 0.0), frequency: float = 62.5, ricker: RickerSpec | None = None,
                 snapshot_time: float = 0.52, receiver=(500.0, 0.0), params=None,
                 tol: float = 1e-10, threads: int = 1) -> LayeredResult:
    """Monofrequency wavefield at ``frequency``; with ``ricker`` also a snapshot and trace.

    Parameters
    ----------
    setup : ModelSetup, optional
        Defaults to :func:`layered_setup`.
    ricker : RickerSpec, optional
        When given, a full time synthesis is run for the snapshot at
        ``snapshot_time`` and the trace at ``receiver``.
    """
    setup = layered_setup() if setup is None else setup
    field = solve_frequency(setup, frequency, scheme, source, params, tol)
    decay = pml_decay_metric(field.values, setup)
    log.info("layered %s f=%.4g Hz: PML decay %.3e", scheme, frequency, decay)
    residuals = np.array([field.residual])
    snapshot = trace = None
    if ricker is not None:
        run = time_synthesis(setup, ricker, source, [receiver], scheme, params, tol, threads,
                             snapshot_times=(snapshot_time,))
        snapshot = run.snapshots[snapshot_time]
        trace = run.traces[0]
        residuals = np.concatenate([residuals, run.residuals])
    return LayeredResult(setup, field, decay, snapshot, trace, residuals)

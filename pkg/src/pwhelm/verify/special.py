"""Source wavelet and the free-space solution used by the seismogram test."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.special

from ..errors import SpecError

__all__ = ["ricker", "hankel0_2", "RickerSpec", "TraceSeries"]


def ricker(t, f_M):
    """``(1 - 2 pi^2 f^2 t^2) exp(-pi^2 f^2 t^2)``, peak at ``t = 0``."""
    a = (np.pi * f_M * np.asarray(t, float)) ** 2
    return (1.0 - 2.0 * a) * np.exp(-a)


def hankel0_2(x):
    """``H0^(2)(x) = J0(x) - i Y0(x)`` for ``x > 0``.

    Backed by the AMOS routines in :mod:`scipy.special`.
    """
    x = np.asarray(x, float)
    if np.any(~(x > 0)):
        raise ValueError("hankel0_2 is defined for x > 0 only")
    out = scipy.special.hankel2(0, x)
    return complex(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class RickerSpec:
    """Ricker source sampled on a periodic record.

    Samples are ``t_i = i dt`` for ``i = 0..n-1``; the zero-phase wavelet is
    centred on ``t = 0`` and its negative-time half wraps to the end of the
    record, so its DFT is real.  ``amplitude`` scales the whole wavelet.
    """

    f_M: float
    dt: float
    T: float
    amplitude: float = 1.0

    def __post_init__(self):
        if not (self.f_M > 0 and self.dt > 0 and self.T > self.dt):
            raise SpecError("RickerSpec needs f_M > 0, dt > 0 and T > dt")
        if not np.isfinite(self.amplitude):
            raise SpecError("RickerSpec amplitude must be finite")
        # continuous spectrum ~ x exp(-x), x = (f/f_M)^2, peak e^-1 at f = f_M
        x = (0.5 / (self.dt * self.f_M)) ** 2
        if x <= 1 or x * np.exp(1.0 - x) > 1e-4:
            raise SpecError(f"dt = {self.dt} under-samples a {self.f_M} Hz Ricker")

    @property
    def n(self) -> int:
        return int(round(self.T / self.dt))

    @property
    def times(self) -> np.ndarray:
        return self.dt * np.arange(self.n)

    @property
    def frequencies(self) -> np.ndarray:
        """Non-negative DFT frequencies ``j / T``."""
        return np.fft.rfftfreq(self.n, self.dt)

    def samples(self) -> np.ndarray:
        n = self.n
        lag = np.where(np.arange(n) < (n + 1) // 2, np.arange(n), np.arange(n) - n)
        return self.amplitude * ricker(lag * self.dt, self.f_M)

    def spectrum(self) -> np.ndarray:
        return np.fft.rfft(self.samples())

    def retained(self, rel: float = 1e-4) -> np.ndarray:
        """Indices ``j >= 1`` whose spectral magnitude is at least ``rel`` of the peak.

        A zero wavelet retains nothing.
        """
        mag = np.abs(self.spectrum())
        if mag.max() == 0:
            return np.zeros(0, dtype=int)
        keep = mag >= rel * mag.max()
        keep[0] = False
        return np.nonzero(keep)[0]


@dataclass(frozen=True, eq=False)
class TraceSeries:
    """Uniformly sampled real trace at a receiver."""

    times: np.ndarray
    values: np.ndarray
    receiver: tuple[float, float]

    def __post_init__(self):
        t = np.asarray(self.times, float)
        if t.ndim != 1 or len(t) != len(self.values):
            raise SpecError("times and values must be 1D arrays of equal length")
        if len(t) > 1:
            d = np.diff(t)
            if not (np.all(d > 0) and np.allclose(d, d[0], rtol=1e-9, atol=0)):
                raise SpecError("trace times must be strictly increasing and uniform")

    @property
    def dt(self) -> float:
        return float(self.times[1] - self.times[0])

    def to_csv(self, path):
        np.savetxt(path, np.column_stack([self.times, self.values]), delimiter=",",
                   header="t,value", comments="", fmt="%.17g")

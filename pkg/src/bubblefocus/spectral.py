"""Pulse synthesis and the discrete time/frequency pipeline.

Synthesis convention: ``s(t_n) = sum_k c_k exp(-i w_k t_n)`` with
``w_k = k * dw`` and ``dw = 2 pi / T``. A :class:`Spectrum` stores the
one-sided coefficients ``c_k``, ``k = 0 .. n // 2``, of a real signal; the
negative-frequency half is ``conj(c_k)``. Parseval then reads
``sum |s_n|^2 dt = T * sum_{all k} |c_k|^2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError, InvalidWindowError

ENVELOPE_ANGULAR_RATE = 5000 * math.pi  # rad/s
DEFAULT_WINDOW = 2e-4  # s, one half-period of the envelope
DEFAULT_DURATION = 5e-2  # s
DEFAULT_DT = 1e-6  # s
DEFAULT_T0 = 2e-3  # s
DEFAULT_OMEGA_R = 57.5e3 * 2 * math.pi  # rad/s


@dataclass(frozen=True, eq=False)
class TimeSeries:
    samples: np.ndarray
    dt: float
    t_start: float = 0.0

    def __post_init__(self):
        s = np.asarray(self.samples, dtype=float)
        if not self.dt > 0:
            raise InvalidInputError("dt must be > 0")
        if s.shape[-1] < 2:
            raise InvalidInputError("a time series needs at least 2 samples")
        object.__setattr__(self, "samples", s)

    @property
    def n(self) -> int:
        return self.samples.shape[-1]

    @property
    def duration(self) -> float:
        return self.n * self.dt

    @property
    def times(self) -> np.ndarray:
        return self.t_start + self.dt * np.arange(self.n)

    def energy(self) -> float:
        return float(np.sum(self.samples**2) * self.dt)

    def scaled(self, factor: float) -> "TimeSeries":
        return TimeSeries(self.samples * factor, self.dt, self.t_start)


@dataclass(frozen=True, eq=False)
class Spectrum:
    coefficients: np.ndarray  # one-sided, shape (..., n_samples // 2 + 1)
    domega: float
    n_samples: int
    t_start: float = 0.0

    @property
    def omegas(self) -> np.ndarray:
        return self.domega * np.arange(self.coefficients.shape[-1])

    @property
    def omega_nyquist(self) -> float:
        return self.domega * (self.n_samples // 2)

    @property
    def dt(self) -> float:
        return 2 * math.pi / (self.n_samples * self.domega)

    def full(self) -> np.ndarray:
        """Two-sided coefficients in ``numpy.fft`` ordering."""
        n = self.n_samples
        c = self.coefficients
        full = np.empty(c.shape[:-1] + (n,), dtype=complex)
        full[..., : c.shape[-1]] = c
        m = n - c.shape[-1]
        # c_{-k} = conj(c_k); for even n the Nyquist bin is shared
        full[..., c.shape[-1]:] = np.conj(c[..., 1 : m + 1][..., ::-1])
        return full

    def energy(self) -> float:
        T = self.n_samples * self.dt
        return float(T * np.sum(np.abs(self.full()) ** 2))

    def with_coefficients(self, coefficients: np.ndarray) -> "Spectrum":
        return Spectrum(np.asarray(coefficients, dtype=complex), self.domega, self.n_samples, self.t_start)


def synthesize_pulse(
    omega_R: float = DEFAULT_OMEGA_R,
    t0: float = DEFAULT_T0,
    T: float = DEFAULT_DURATION,
    dt: float = DEFAULT_DT,
    window: float = DEFAULT_WINDOW,
) -> TimeSeries:
    """Carrier ``sin(omega_R t)`` under the half-sine envelope ``sin(5000 pi (t - t0))``.

    The pulse is nonzero for ``0 < t - t0 < window`` on the grid ``t_n = n dt``,
    ``0 <= t_n < T``.
    """
    if not (0 < t0 < T):
        raise InvalidWindowError(f"need 0 < t0 < T, got t0={t0!r}, T={T!r}")
    if not window > 0 or t0 + window > T:
        raise InvalidWindowError(f"pulse window [t0, t0 + {window!r}] does not fit in [0, {T!r}]")
    n = int(round(T / dt))
    if abs(n * dt - T) > 1e-9 * T:
        raise InvalidWindowError(f"dt={dt!r} does not divide T={T!r}")
    if abs(round(window / dt) * dt - window) > dt:
        raise InvalidWindowError(f"dt={dt!r} does not resolve window={window!r}")
    t = dt * np.arange(n)
    tau = t - t0
    # grid points that sit on a window edge up to rounding count as outside
    eps = 1e-9 * dt
    mask = (tau > eps) & (tau < window - eps)
    s = np.zeros(n)
    s[mask] = np.sin(omega_R * t[mask]) * np.sin(ENVELOPE_ANGULAR_RATE * tau[mask])
    return TimeSeries(s, dt, 0.0)


def to_spectrum(ts: TimeSeries) -> Spectrum:
    n = ts.n
    c = np.conj(np.fft.rfft(ts.samples, axis=-1)) / n
    domega = 2 * math.pi / (n * ts.dt)
    if ts.t_start:
        c = c * np.exp(1j * domega * np.arange(c.shape[-1]) * ts.t_start)
    return Spectrum(c, domega, n, ts.t_start)


def to_time(sp: Spectrum) -> TimeSeries:
    n = sp.n_samples
    c = sp.coefficients
    if sp.t_start:
        c = c * np.exp(-1j * sp.omegas * sp.t_start)
    samples = n * np.fft.irfft(np.conj(c), n=n, axis=-1)
    return TimeSeries(samples, sp.dt, sp.t_start)


def band_indices(sp: Spectrum, lo: float, hi: float) -> np.ndarray:
    """Indices of the one-sided grid with ``lo < omega <= hi``."""
    k = np.arange(sp.coefficients.shape[-1])
    # grid frequencies are k * domega; compare in units of domega to avoid rounding at the edges
    klo, khi = lo / sp.domega, hi / sp.domega
    eps = 1e-9
    return k[(k > klo + eps) & (k <= khi + eps)]


def default_band(omega_R: float) -> tuple[float, float]:
    return 0.0, 2.0 * omega_R


def time_reverse(ts: TimeSeries, T: float | None = None) -> TimeSeries:
    """``r(T - t)`` on the sample grid, with ``T`` the record length (periodic wrap at 0)."""
    n = ts.n
    if T is not None and abs(T - ts.duration) > 0.5 * ts.dt:
        raise InvalidInputError(f"reversal time {T!r} differs from the record length {ts.duration!r}")
    idx = (-np.arange(n)) % n
    return TimeSeries(ts.samples[..., idx], ts.dt, ts.t_start)


def band_limited(ts: TimeSeries, lo: float, hi: float) -> TimeSeries:
    """Keep only the spectral lines with ``lo < omega <= hi``."""
    sp = to_spectrum(ts)
    idx = band_indices(sp, lo, hi)
    c = np.zeros_like(sp.coefficients)
    c[..., idx] = sp.coefficients[..., idx]
    return to_time(sp.with_coefficients(c))

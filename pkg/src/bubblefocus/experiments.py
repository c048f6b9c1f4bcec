"""Time-reversal and Green's-function experiments over frequency sweeps.

Every sweep is a set of independent per-frequency tasks (assemble, factor,
solve, evaluate). Tasks run on a bounded thread pool and write into
preallocated slots, so results do not depend on the worker count.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import (
    BubbleFocusError,
    ConfigMismatchError,
    InvalidInputError,
    UnboundedWidthError,
)
from .foldy_lax import ScattererSystem, free_green
from .physics import (
    DEFAULT_MAX_ATTEMPTS,
    BubbleCloud,
    MediaParams,
    bubble_count_for_fraction,
    line_points,
    place_bubbles,
)
from .single_bubble import ScatteringModel, Variant, greens_of_distance
from .spectral import (
    DEFAULT_DT,
    DEFAULT_DURATION,
    DEFAULT_OMEGA_R,
    DEFAULT_T0,
    DEFAULT_WINDOW,
    TimeSeries,
    band_indices,
    synthesize_pulse,
    time_reverse,
    to_spectrum,
    to_time,
)

logger = logging.getLogger(__name__)

DEFAULT_RECEIVERS = (
    (0.02, 0.0, 0.0),
    (-0.02, 0.0, 0.0),
    (0.0, 0.02, 0.0),
    (0.0, -0.02, 0.0),
)
KHZ = 2 * math.pi * 1e3  # rad/s per kHz


@dataclass(frozen=True)
class ExperimentConfig:
    media: MediaParams = field(default_factory=MediaParams)
    radius: float = 5e-5
    box_length: float = 0.01
    volume_fraction: float = 2e-4
    n_bubbles: int | None = None
    seed: int = 0
    exclusion_factor: float = 2.0  # exclusion radius around source/receivers/line, in units of R
    max_attempts: int = DEFAULT_MAX_ATTEMPTS
    source: tuple[float, float, float] = (0.0, 0.0, 0.0)
    receivers: tuple[tuple[float, float, float], ...] = DEFAULT_RECEIVERS
    omega_r: float = DEFAULT_OMEGA_R
    t0: float = DEFAULT_T0
    duration: float = DEFAULT_DURATION
    dt: float = DEFAULT_DT
    window: float = DEFAULT_WINDOW
    pulse_amplitude: float = 1.0
    band_factor: float = 2.0  # sweep band is (0, band_factor * omega_r]
    line_extent: float | None = None  # defaults to box_length
    line_samples: int = 201
    green_omega_min: float = 15 * KHZ
    green_omega_max: float = 155 * KHZ
    reverse_t_min: float = 0.035
    reverse_t_max: float = 0.05
    variant: str = Variant.SIMPLIFIED.value
    threads: int = 1

    def __post_init__(self):
        object.__setattr__(self, "source", tuple(float(v) for v in self.source))
        object.__setattr__(self, "receivers", tuple(tuple(float(v) for v in r) for r in self.receivers))
        if len(self.source) != 3 or any(len(r) != 3 for r in self.receivers):
            raise InvalidInputError("source and receivers must be 3-vectors")
        half = self.box_length / 2
        if not (self.radius > 0 and self.box_length > 2 * self.radius):
            raise InvalidInputError("need box_length > 2 * radius > 0")
        if any(abs(v) > half for v in self.source):
            raise InvalidInputError("source must lie inside the bubble cube")
        for r in self.receivers:
            if all(abs(v) <= half for v in r):
                raise InvalidInputError(f"receiver {r} lies inside the bubble cube")
        if self.volume_fraction < 0 or (self.n_bubbles is not None and self.n_bubbles < 0):
            raise InvalidInputError("bubble count and volume fraction must be >= 0")
        nyquist = math.pi / self.dt
        if not (0 < self.band_factor * self.omega_r <= nyquist):
            raise InvalidInputError("sweep band must lie within (0, omega_max]")
        if not (0 < self.green_omega_min < self.green_omega_max):
            raise InvalidInputError("need 0 < green_omega_min < green_omega_max")
        if self.line_samples < 3:
            raise InvalidInputError("line_samples must be >= 3")
        if self.threads < 1:
            raise InvalidInputError("threads must be >= 1")
        Variant(self.variant)

    # derived pieces

    @property
    def extent(self) -> float:
        return self.box_length if self.line_extent is None else self.line_extent

    @property
    def n_target(self) -> int:
        if self.n_bubbles is not None:
            return self.n_bubbles
        if self.volume_fraction == 0:
            return 0
        return bubble_count_for_fraction(self.volume_fraction, self.box_length, self.radius)

    @property
    def band(self) -> tuple[float, float]:
        return 0.0, self.band_factor * self.omega_r

    @property
    def domega(self) -> float:
        return 2 * math.pi / self.duration

    def model(self) -> ScatteringModel:
        return ScatteringModel.from_media(self.variant, self.media, self.radius)

    @property
    def omega_M(self) -> float:
        return self.model().omega_M

    def line(self) -> np.ndarray:
        return line_points(self.extent, self.line_samples)

    def pulse(self) -> TimeSeries:
        s = synthesize_pulse(self.omega_r, self.t0, self.duration, self.dt, self.window)
        return s if self.pulse_amplitude == 1.0 else s.scaled(self.pulse_amplitude)

    def exclusion_points(self) -> np.ndarray:
        return np.vstack([np.asarray(self.source)[None, :], np.asarray(self.receivers), self.line()])

    def snapshot(self) -> dict:
        d = dataclasses.asdict(self)
        d["media"] = dataclasses.asdict(self.media)
        return d

    def hash(self) -> str:
        blob = json.dumps(self.snapshot(), sort_keys=True, default=repr).encode()
        return hashlib.sha256(blob).hexdigest()


def build_cloud(cfg: ExperimentConfig) -> BubbleCloud:
    n = cfg.n_target
    if n == 0:
        return BubbleCloud.empty(cfg.radius, cfg.box_length, cfg.seed)
    return place_bubbles(
        cfg.seed,
        n,
        cfg.box_length,
        cfg.radius,
        exclusion_points=cfg.exclusion_points(),
        exclusion_radius=cfg.exclusion_factor * cfg.radius,
        max_attempts=cfg.max_attempts,
    )


def run_sweep(n_tasks: int, task: Callable[[int], None], threads: int = 1) -> None:
    """Run ``task(i)`` for ``i in range(n_tasks)`` on up to ``threads`` workers."""
    if threads <= 1 or n_tasks < 2:
        for i in range(n_tasks):
            task(i)
        return
    chunks = np.array_split(np.arange(n_tasks), min(threads * 4, n_tasks))

    def work(chunk):
        for i in chunk:
            task(int(i))

    with ThreadPoolExecutor(max_workers=threads) as pool:
        for _ in pool.map(work, chunks):
            pass


def _attach_omega(exc: BubbleFocusError, omega: float) -> BubbleFocusError:
    if getattr(exc, "omega", None) is None:
        exc.omega = omega
        exc.args = (f"{exc.args[0] if exc.args else exc} (at omega = {omega:.6g} rad/s)",) + exc.args[1:]
    return exc


@dataclass(frozen=True, eq=False)
class FieldMap:
    axis1: np.ndarray  # space, m
    axis2: np.ndarray  # omega (rad/s) or t (s)
    values: np.ndarray  # shape (len(axis1), len(axis2))
    axis2_name: str = "omega"
    value_name: str = "ImG"
    normalization: str = "none"

    def __post_init__(self):
        if self.values.shape != (len(self.axis1), len(self.axis2)):
            raise InvalidInputError("field map values do not match its axes")
        if not np.all(np.isfinite(self.values)):
            raise InvalidInputError("field map has non-finite values")

    def normalized_magnitude(self) -> "FieldMap":
        mag = np.abs(self.values)
        peak = mag.max()
        return dataclasses.replace(self, values=mag / peak if peak > 0 else mag, normalization="unit-peak")


@dataclass(frozen=True, eq=False)
class Recordings:
    signals: TimeSeries  # shape (n_receivers, n_samples)
    receivers: np.ndarray
    pulse: TimeSeries
    cloud_fingerprint: str
    band: np.ndarray  # spectral indices that were solved
    transfer: np.ndarray  # (n_receivers, len(band)) receiver response to a unit point source
    timings: dict = field(default_factory=dict)

    def channel(self, j: int) -> TimeSeries:
        return TimeSeries(self.signals.samples[j], self.signals.dt, self.signals.t_start)


def run_forward(cfg: ExperimentConfig, cloud: BubbleCloud | None = None, model=None) -> Recordings:
    """Emit the pulse from the source and record it at every receiver."""
    t_start = time.perf_counter()
    cloud = build_cloud(cfg) if cloud is None else cloud
    model = cfg.model() if model is None else model
    pulse = cfg.pulse()
    sp = to_spectrum(pulse)
    idx = band_indices(sp, *cfg.band)
    omegas = sp.omegas[idx]
    receivers = np.asarray(cfg.receivers)
    system = ScattererSystem(cloud)
    r_src = np.linalg.norm(receivers - np.asarray(cfg.source), axis=1)
    transfer = np.empty((len(receivers), len(idx)), dtype=complex)
    c_w = cfg.media.c_w

    def task(i):
        omega = float(omegas[i])
        k = omega / c_w
        u = greens_of_distance(r_src, k)
        if system.n:
            try:
                f_s = model.amplitude(omega)
                v = system.factor(k, f_s, omega).solve(system.incident_from(cfg.source, k))
                u = u + system.scattered(receivers, k, f_s, v)
            except BubbleFocusError as exc:
                raise _attach_omega(exc, omega)
        transfer[:, i] = u

    run_sweep(len(idx), task, cfg.threads)
    coeffs = np.zeros((len(receivers), sp.coefficients.shape[-1]), dtype=complex)
    coeffs[:, idx] = transfer * sp.coefficients[idx]
    signals = to_time(sp.with_coefficients(coeffs))
    elapsed = time.perf_counter() - t_start
    logger.info("forward sweep: %d frequencies, %d bubbles, %.1f s", len(idx), cloud.n, elapsed)
    return Recordings(
        signals=signals,
        receivers=receivers,
        pulse=pulse,
        cloud_fingerprint=cloud.fingerprint(),
        band=idx,
        transfer=transfer,
        timings={"forward": elapsed},
    )


@dataclass(frozen=True, eq=False)
class TimeReversalResult:
    refocused: TimeSeries  # s#(t) at the source
    field: FieldMap  # u(x1, t) on the evaluation line, t in the reverse window
    timings: dict = field(default_factory=dict)

    @property
    def peak_time(self) -> float:
        s = self.refocused
        return float(s.times[int(np.argmax(np.abs(s.samples)))])

    def spatial_profile(self, t: float | None = None) -> np.ndarray:
        """``|u(x1, t)|`` on the line at ``t`` (default: the refocusing peak time)."""
        t = self.peak_time if t is None else t
        j = int(np.argmin(np.abs(self.field.axis2 - t)))
        return np.abs(self.field.values[:, j])

    def focal_width(self) -> float:
        return fwhm(self.field.axis1, self.spatial_profile())


def run_time_reversal(
    cfg: ExperimentConfig,
    recordings: Recordings,
    cloud: BubbleCloud | None = None,
    model=None,
) -> TimeReversalResult:
    """Re-emit every recording reversed in time from its receiver; record at the source and on the line."""
    t_start = time.perf_counter()
    cloud = build_cloud(cfg) if cloud is None else cloud
    if cloud.fingerprint() != recordings.cloud_fingerprint:
        raise ConfigMismatchError("recordings were made with a different bubble cloud")
    model = cfg.model() if model is None else model
    reversed_ = time_reverse(recordings.signals, cfg.duration)
    sp = to_spectrum(reversed_)
    idx = band_indices(sp, *cfg.band)
    omegas = sp.omegas[idx]
    weights = sp.coefficients[:, idx]  # (n_receivers, n_band)
    receivers = recordings.receivers
    points = np.vstack([np.asarray(cfg.source)[None, :], cfg.line()])
    system = ScattererSystem(cloud)
    d_rec = np.linalg.norm(points[:, None, :] - receivers[None, :, :], axis=2)
    out = np.empty((len(points), len(idx)), dtype=complex)
    c_w = cfg.media.c_w

    def task(i):
        omega = float(omegas[i])
        k = omega / c_w
        a = weights[:, i]
        u = greens_of_distance(d_rec, k) @ a
        if system.n:
            try:
                f_s = model.amplitude(omega)
                v = system.factor(k, f_s, omega).solve(system.incident_from(receivers, k, a))
                u = u + system.scattered(points, k, f_s, v)
            except BubbleFocusError as exc:
                raise _attach_omega(exc, omega)
        out[:, i] = u

    run_sweep(len(idx), task, cfg.threads)
    coeffs = np.zeros((len(points), sp.coefficients.shape[-1]), dtype=complex)
    coeffs[:, idx] = out
    fields = to_time(sp.with_coefficients(coeffs))
    times = fields.times
    window = (times >= cfg.reverse_t_min) & (times <= cfg.reverse_t_max)
    refocused = TimeSeries(fields.samples[0], fields.dt, fields.t_start)
    fmap = FieldMap(
        axis1=points[1:, 0].copy(),
        axis2=times[window],
        values=fields.samples[1:, window],
        axis2_name="t",
        value_name="u",
    )
    elapsed = time.perf_counter() - t_start
    logger.info("time-reversal sweep: %d frequencies, %.1f s", len(idx), elapsed)
    return TimeReversalResult(refocused=refocused, field=fmap, timings={"reverse": elapsed})


@dataclass(frozen=True, eq=False)
class GreenMaps:
    bubbly: FieldMap  # Im G_m
    free: FieldMap  # Im G
    omega_M: float
    timings: dict = field(default_factory=dict)


def native_omega_grid(cfg: ExperimentConfig, lo: float, hi: float) -> np.ndarray:
    """Multiples of the record's frequency step ``2 pi / T`` within ``[lo, hi]``."""
    dw = cfg.domega
    k = np.arange(math.ceil(lo / dw - 1e-9), math.floor(hi / dw + 1e-9) + 1)
    return k * dw


def green_map(
    cfg: ExperimentConfig,
    omega_grid: Sequence[float] | None = None,
    x_line: np.ndarray | None = None,
    cloud: BubbleCloud | None = None,
    model=None,
) -> GreenMaps:
    """``Im G_m`` and ``Im G`` on the evaluation line over ``omega_grid``."""
    t_start = time.perf_counter()
    cloud = build_cloud(cfg) if cloud is None else cloud
    model = cfg.model() if model is None else model
    if omega_grid is None:
        omega_grid = native_omega_grid(cfg, cfg.green_omega_min, cfg.green_omega_max)
    omegas = np.asarray(omega_grid, dtype=float)
    if np.any(omegas <= 0):
        raise InvalidInputError("omega grid must be strictly positive")
    pts = cfg.line() if x_line is None else np.asarray(x_line, dtype=float).reshape(-1, 3)
    system = ScattererSystem(cloud)
    bubbly = np.empty((len(pts), len(omegas)))
    free = np.empty_like(bubbly)
    c_w = cfg.media.c_w

    def task(i):
        omega = float(omegas[i])
        k = omega / c_w
        g = free_green(pts, k, cfg.source)
        free[:, i] = g.imag
        if system.n:
            try:
                f_s = model.amplitude(omega)
                v = system.factor(k, f_s, omega).solve(system.incident_from(cfg.source, k))
                g = g + system.scattered(pts, k, f_s, v)
            except BubbleFocusError as exc:
                raise _attach_omega(exc, omega)
        bubbly[:, i] = g.imag

    run_sweep(len(omegas), task, cfg.threads)
    x1 = pts[:, 0].copy()
    elapsed = time.perf_counter() - t_start
    logger.info("green map: %d frequencies x %d points, %.1f s", len(omegas), len(pts), elapsed)
    return GreenMaps(
        bubbly=FieldMap(x1, omegas, bubbly, "omega", "ImGm"),
        free=FieldMap(x1, omegas, free, "omega", "ImG"),
        omega_M=model.omega_M,
        timings={"greenmap": elapsed},
    )


def frequency_average(fmap: FieldMap, lo: float, hi: float) -> np.ndarray:
    """Mean over ``omega`` in ``[lo, hi]`` of each row, by the trapezoid rule."""
    w = fmap.axis2
    tol = 1e-9 * max(abs(hi), 1.0)
    if lo < w.min() - tol or hi > w.max() + tol or not lo < hi:
        raise InvalidInputError(f"averaging band [{lo}, {hi}] is not inside the map's omega axis")
    sel = (w >= lo - tol) & (w <= hi + tol)
    if sel.sum() < 2:
        raise InvalidInputError("averaging band holds fewer than two frequency samples")
    ws = w[sel]
    return np.trapezoid(fmap.values[:, sel], ws, axis=1) / (ws[-1] - ws[0])


def fwhm(x: np.ndarray, profile: np.ndarray, normalize: bool = True) -> float:
    """Full width at half maximum of ``|profile|`` around its global peak.

    The half-maximum crossings nearest the peak on either side are located by
    linear interpolation between samples.
    """
    a = np.abs(np.asarray(profile, dtype=float))
    x = np.asarray(x, dtype=float)
    if normalize and a.max() > 0:
        a = a / a.max()
    i = int(np.argmax(a))
    half = a[i] / 2

    right = i
    while right < len(a) and a[right] > half:
        right += 1
    left = i
    while left >= 0 and a[left] > half:
        left -= 1
    if right == len(a) or left < 0:
        raise UnboundedWidthError("profile does not fall to half maximum inside the domain")
    xr = x[right - 1] + (half - a[right - 1]) * (x[right] - x[right - 1]) / (a[right] - a[right - 1])
    xl = x[left] + (half - a[left]) * (x[left + 1] - x[left]) / (a[left + 1] - a[left])
    return float(xr - xl)


@dataclass(frozen=True, eq=False)
class FocusProfile:
    x: np.ndarray
    bubbly: np.ndarray
    free: np.ndarray
    lo: float
    hi: float
    omega_M: float

    @property
    def width_bubbly(self) -> float:
        return fwhm(self.x, self.bubbly)

    @property
    def width_free(self) -> float:
        return fwhm(self.x, self.free)


def averaged_profiles(
    cfg: ExperimentConfig,
    lo_factor: float,
    hi_factor: float,
    cloud: BubbleCloud | None = None,
) -> FocusProfile:
    """Frequency-averaged ``Im G_m`` and ``Im G`` over ``[lo, hi] * omega_M`` on the native grid."""
    model = cfg.model()
    lo, hi = lo_factor * model.omega_M, hi_factor * model.omega_M
    maps = green_map(cfg, native_omega_grid(cfg, lo, hi), cloud=cloud, model=model)
    w = maps.bubbly.axis2
    return FocusProfile(
        x=maps.bubbly.axis1,
        bubbly=frequency_average(maps.bubbly, w[0], w[-1]),
        free=frequency_average(maps.free, w[0], w[-1]),
        lo=lo,
        hi=hi,
        omega_M=model.omega_M,
    )

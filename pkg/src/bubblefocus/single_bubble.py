"""Breathing-mode theory of a single spherical bubble.

Layer potentials of the constant density on a sphere, the 2x2 system for the
interior and exterior density amplitudes, the scattering functions and the
Minnaert resonance.

Green's function sign convention: ``G(x, y, k) = -exp(ik|x-y|) / (4 pi |x-y|)``.
"""

from __future__ import annotations

import cmath
import enum
import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import DomainError, InvalidInputError, NearSingularWarning, SingularEvaluationError
from .physics import MediaParams

SERIES_THRESHOLD = 1e-6
# below this x the cubic-order combination sin x - x cos x is summed as a series
CUBIC_SERIES_THRESHOLD = 0.1
PEAK_SEARCH_INTERVAL = (0.0, 0.1)
PEAK_GRID_POINTS = 100_000
DET_RELATIVE_TOLERANCE = 1e-14


def greens_fn(x, y, k: float) -> complex:
    """Outgoing Helmholtz Green's function ``-exp(ik r) / (4 pi r)`` with ``r = |x - y|``."""
    r = float(np.linalg.norm(np.asarray(x, dtype=float) - np.asarray(y, dtype=float)))
    if r == 0.0:
        raise SingularEvaluationError("Green's function evaluated at coincident points")
    return -cmath.exp(1j * k * r) / (4 * math.pi * r)


def greens_of_distance(r: np.ndarray, k: float) -> np.ndarray:
    """Vectorized Green's function of the distance array ``r`` (no singularity check)."""
    r = np.asarray(r, dtype=float)
    return -np.exp(1j * k * r) / (4 * np.pi * r)


def _sinc_R(k: float, R: float) -> float:
    """``sin(kR) / k`` with the ``k -> 0`` limit ``R``."""
    x = k * R
    if abs(x) < SERIES_THRESHOLD:
        return R * (1 - x * x / 6)
    return math.sin(x) / k


def single_layer_boundary(k: float, R: float) -> complex:
    """Single-layer potential of the unit density on ``|x| = R``, evaluated on the sphere."""
    return -cmath.exp(1j * k * R) * _sinc_R(k, R)


def neumann_poincare_boundary(k: float, R: float) -> complex:
    """Adjoint Neumann-Poincare operator applied to the unit density on the sphere."""
    x = k * R
    sinc = 1 - x * x / 6 if abs(x) < SERIES_THRESHOLD else math.sin(x) / x
    return sinc * cmath.exp(1j * x) - cmath.exp(2j * x) / 2


def single_layer_exterior(k: float, R: float, r: float) -> complex:
    """Single-layer potential of the unit density at distance ``r >= R`` from the center."""
    if r < R:
        raise DomainError(f"exterior potential needs r >= R, got r={r!r} < R={R!r}")
    return -R * _sinc_R(k, R) * cmath.exp(1j * k * r) / r


def _sin_minus_x_cos(x):
    """``sin x - x cos x`` without cancellation for small ``x`` (works on arrays)."""
    x = np.asarray(x, dtype=float)
    x2 = x * x
    series = x * x2 * (1 / 3 - x2 * (1 / 30 - x2 * (1 / 840 - x2 * (1 / 45360 - x2 / 3991680))))
    direct = np.sin(x) - x * np.cos(x)
    return np.where(np.abs(x) < CUBIC_SERIES_THRESHOLD, series, direct)


def _sinc(x: float) -> float:
    return 1 - x * x / 6 if abs(x) < SERIES_THRESHOLD else math.sin(x) / x


def _sinc_minus_cos(x: float) -> float:
    """``sin x / x - cos x``, the ``x -> 0`` limit being 0."""
    if x == 0:
        return 0.0
    return float(_sin_minus_x_cos(x)) / x


@dataclass(frozen=True)
class BreathingMatrix:
    """The 2x2 restriction of the transmission operator to constant densities.

    Rows are the Dirichlet and Neumann transmission conditions (divided by R),
    columns the interior and exterior amplitudes.
    """

    a11: complex
    a12: complex
    a21: complex
    a22: complex
    x_b: float
    x_w: float
    delta: float

    def as_array(self) -> np.ndarray:
        return np.array([[self.a11, self.a12], [self.a21, self.a22]], dtype=complex)

    @property
    def det(self) -> complex:
        return self.a11 * self.a22 - self.a12 * self.a21

    def det_closed_form(self) -> complex:
        """Determinant in factored form (requires ``x_w > 0``)."""
        xb, xw, d = self.x_b, self.x_w, self.delta
        return (
            cmath.exp(1j * (xb + xw))
            * math.sin(xw)
            * (_sinc(xb) * (1 / xw - 1j) - _sinc_minus_cos(xb) / (d * xw))
        )


def breathing_matrix(x_b: float, x_w: float, delta: float) -> BreathingMatrix:
    if x_b < 0 or x_w < 0:
        raise InvalidInputError("x_b and x_w must be >= 0")
    if not delta > 0:
        raise InvalidInputError("delta must be > 0")
    eb, ew = cmath.exp(1j * x_b), cmath.exp(1j * x_w)
    return BreathingMatrix(
        a11=-eb * _sinc(x_b),
        a12=ew * _sinc(x_w),
        a21=eb * _sinc_minus_cos(x_b) / delta,
        a22=-ew * (_sinc(x_w) - 1j * math.sin(x_w)),
        x_b=x_b,
        x_w=x_w,
        delta=delta,
    )


@dataclass(frozen=True)
class BreathingSolution:
    C_b: complex
    C_w: complex
    u_in0: complex


def solve_breathing(m: BreathingMatrix, u_in0: complex, R: float) -> BreathingSolution:
    """Solve for the interior/exterior density amplitudes under a constant incident field."""
    det = m.det
    scale = max(abs(m.a11), abs(m.a12), abs(m.a21), abs(m.a22)) ** 2
    if abs(det) <= DET_RELATIVE_TOLERANCE * scale:
        warnings.warn(
            NearSingularWarning(f"breathing matrix is near singular, |det| = {abs(det):.3e}", det=abs(det)),
            stacklevel=2,
        )
    rhs = u_in0 / R
    # Cramer's rule on [[a11, a12], [a21, a22]] (C_b, C_w) = (rhs, 0)
    C_b = m.a22 * rhs / det
    C_w = -m.a21 * rhs / det
    return BreathingSolution(C_b=C_b, C_w=C_w, u_in0=u_in0)


def exterior_amplitude_closed_form(x_b: float, x_w: float, delta: float, u_in0: complex, R: float) -> complex:
    """Exterior density amplitude ``C_w`` from its explicit expression (``sin x_b, sin x_w != 0``)."""
    q = 1 / x_b - 1 / math.tan(x_b)
    denom = math.sin(x_w) * (q / x_w - delta / x_b * (1 / x_w - 1j))
    return cmath.exp(-1j * x_w) * q / denom * u_in0 / R


class Variant(str, enum.Enum):
    EXACT = "exact"
    TILDE = "tilde"
    SIMPLIFIED = "simplified"


@dataclass(frozen=True)
class ScatteringModel:
    """Selector among the three scattering-function forms.

    ``EXACT`` and ``TILDE`` take ``x_b = k_b R`` as argument; ``SIMPLIFIED``
    takes the angular frequency. ``EXACT`` carries the length ``R``; the other
    two are dimensionless and are scaled by ``R`` in :meth:`amplitude`.
    """

    variant: Variant
    R: float
    delta: float
    speed_ratio: float  # c_b / c_w
    c_b: float
    c_w: float
    x_M: float
    omega_M: float

    @classmethod
    def from_media(cls, variant: Variant | str, media: MediaParams, R: float) -> "ScatteringModel":
        x_M = minnaert_root(media.delta)
        return cls(
            variant=Variant(variant),
            R=R,
            delta=media.delta,
            speed_ratio=media.speed_ratio,
            c_b=media.c_b,
            c_w=media.c_w,
            x_M=x_M,
            omega_M=media.c_b * x_M / R,
        )

    def argument(self, omega: float) -> float:
        """Native argument of :func:`scattering_fn` at angular frequency ``omega``."""
        if self.variant is Variant.SIMPLIFIED:
            return omega
        return omega * self.R / self.c_b

    def amplitude(self, omega):
        """Scattering length (m) at ``omega``: the monopole field is ``amplitude * u_in * e^{ikr}/r``."""
        value = scattering_fn(self, self.argument(omega))
        return value if self.variant is Variant.EXACT else self.R * value


def _exact(x, R, delta, beta):
    q = _sin_minus_x_cos(x)
    s = np.sin(x)
    with np.errstate(invalid="ignore", divide="ignore"):
        out = R * q / (-q + delta * s - 1j * delta * beta * x * s)
    return np.where(x == 0, 0.0, out)


def _tilde(x, x_M, beta):
    return x * x / (x_M**2 - x * x - 1j * beta * x**3)


def _simplified(omega, omega_M, R, c_w):
    eps = R * omega / c_w
    return omega * omega / (omega_M**2 - omega * omega - 1j * eps * omega * omega)


def scattering_fn(model: ScatteringModel, at):
    """Evaluate the selected scattering function at ``at`` (``x_b`` or ``omega``).

    Accepts scalars or arrays. The exact form is evaluated as
    ``R q / (-q + delta sin x - i delta (c_b/c_w) x sin x)`` with
    ``q = sin x - x cos x``, which stays finite at ``x = n pi``.
    """
    a = np.asarray(at, dtype=float)
    if np.any(a < 0):
        raise InvalidInputError("scattering function argument must be >= 0")
    if model.variant is Variant.EXACT:
        out = _exact(a, model.R, model.delta, model.speed_ratio)
    elif model.variant is Variant.TILDE:
        out = _tilde(a, model.x_M, model.speed_ratio)
    else:
        out = _simplified(a, model.omega_M, model.R, model.c_w)
    return complex(out) if out.ndim == 0 else out


def _q_scalar(x: float) -> float:
    if abs(x) < CUBIC_SERIES_THRESHOLD:
        x2 = x * x
        return x * x2 * (1 / 3 - x2 * (1 / 30 - x2 * (1 / 840 - x2 * (1 / 45360 - x2 / 3991680))))
    return math.sin(x) - x * math.cos(x)


def minnaert_root(delta: float, tol: float = 0.0) -> float:
    """Smallest positive root of ``1 - delta - x cot x``, by bisection on ``(0, pi/2)``.

    With the default ``tol = 0`` the bracket is halved until it cannot shrink
    any further in double precision.
    """
    if not (0 < delta < 1):
        raise InvalidInputError(f"delta must lie in (0, 1), got {delta!r}")
    # (1 - delta - x cot x) sin x: same sign on (0, pi/2), no cancellation near 0
    lo, hi = 0.0, math.pi / 2
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if _q_scalar(mid) - delta * math.sin(mid) > 0:
            hi = mid
        else:
            lo = mid
    g_lo = abs(_q_scalar(lo) - delta * math.sin(lo))
    g_hi = abs(_q_scalar(hi) - delta * math.sin(hi))
    return lo if g_lo <= g_hi else hi


def minnaert_frequency(media: MediaParams, R: float) -> float:
    """Minnaert angular frequency ``c_b x_M / R`` in rad/s."""
    if not R > 0:
        raise InvalidInputError("R must be > 0")
    return media.c_b * minnaert_root(media.delta) / R


def peak_scattering_arg(model: ScatteringModel, points: int = PEAK_GRID_POINTS) -> float:
    """Maximizer of ``|f_s|`` over ``[0, 0.1]``: dense grid, then bounded local refinement."""
    lo, hi = PEAK_SEARCH_INTERVAL
    x = np.linspace(lo, hi, points + 1)
    mag = np.abs(scattering_fn(model, x))
    i = int(np.argmax(mag))
    step = x[1] - x[0]
    a, b = max(lo, x[i] - step), min(hi, x[i] + step)
    res = minimize_scalar(
        lambda t: -abs(scattering_fn(model, t)),
        bounds=(a, b),
        method="bounded",
        options={"xatol": 1e-14},
    )
    if -res.fun >= mag[i]:
        return float(res.x)
    return float(x[i])


def monopole_field(x, center, f_s: complex, u_in0: complex, k: float) -> complex:
    """Radiated monopole ``f_s u_in0 exp(ik r) / r`` at ``x``."""
    r = float(np.linalg.norm(np.asarray(x, dtype=float) - np.asarray(center, dtype=float)))
    if r == 0.0:
        raise SingularEvaluationError("monopole field evaluated at its center")
    return f_s * u_in0 * cmath.exp(1j * k * r) / r

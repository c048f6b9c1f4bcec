"""Point-interaction (Foldy-Lax) model of N identical bubbles.

Each bubble is a monopole of scattering length ``f_s`` driven by the total
field at its center, excluding its own contribution:

    u_i = u_in(x_i) - sum_{j != i} 4 pi f_s G(x_i - x_j) u_j

i.e. ``M u = u_in`` with ``M_ii = 1`` and ``M_ij = 4 pi f_s G(x_i - x_j)``.
The matrix is never inverted; every use goes through an LU factorization.
"""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np
import scipy.linalg as sla
from scipy.linalg import lapack

from .errors import AssemblyError, IllConditionedWarning, NearFieldError, SingularSystemError
from .physics import BubbleCloud, MediaParams, _pairwise_distances
from .single_bubble import ScatteringModel, greens_of_distance

logger = logging.getLogger(__name__)

RESIDUAL_TOLERANCE = 1e-8
CONDITION_WARNING = 1e12


@dataclass(frozen=True, eq=False)
class InteractionMatrix:
    entries: np.ndarray
    f_s: complex
    k_w: float

    @property
    def n(self) -> int:
        return self.entries.shape[0]

    def condition_estimate(self) -> float:
        """1-norm condition number estimate (LAPACK ``zgecon``)."""
        if self.n == 0:
            return 1.0
        return Factorization.of(self).condition_estimate()


@dataclass(frozen=True)
class IncidentTrace:
    values: np.ndarray
    source: str = "point source"

    def __post_init__(self):
        v = np.asarray(self.values, dtype=complex).reshape(-1)
        if not np.all(np.isfinite(v)):
            raise ValueError("incident trace has non-finite entries")
        object.__setattr__(self, "values", v)


def _coupling(distances: np.ndarray, f_s: complex, k_w: float) -> np.ndarray:
    m = 4 * np.pi * f_s * greens_of_distance(distances, k_w)
    np.fill_diagonal(m, 1.0)
    return m


def _centers_of(cloud) -> np.ndarray:
    if isinstance(cloud, BubbleCloud):
        return cloud.centers
    return np.asarray(cloud, dtype=float).reshape(-1, 3)


def assemble(cloud: BubbleCloud | np.ndarray, f_s: complex, k_w: float) -> InteractionMatrix:
    centers = _centers_of(cloud)
    d = _pairwise_distances(centers)
    np.fill_diagonal(d, np.inf)
    if centers.shape[0] > 1 and d.min() == 0.0:
        raise AssemblyError("coincident bubble centers")
    np.fill_diagonal(d, 1.0)
    entries = _coupling(d, f_s, k_w)
    if not np.all(np.isfinite(entries)):
        raise AssemblyError("interaction matrix has non-finite entries")
    return InteractionMatrix(entries=entries, f_s=complex(f_s), k_w=float(k_w))


@dataclass(frozen=True, eq=False)
class Factorization:
    """LU factors of an interaction matrix; immutable and shareable across threads."""

    matrix: InteractionMatrix
    lu: np.ndarray
    piv: np.ndarray
    anorm: float

    @classmethod
    def of(cls, m: InteractionMatrix, omega: float | None = None) -> "Factorization":
        a = m.entries
        if m.n == 0:
            return cls(m, a, np.zeros(0, dtype=np.int32), 1.0)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", sla.LinAlgWarning)
            lu, piv = sla.lu_factor(a, check_finite=False)
        pivot = float(np.abs(np.diag(lu)).min())
        if pivot == 0.0 or not np.isfinite(pivot):
            raise SingularSystemError(
                f"interaction matrix is numerically singular (min pivot {pivot:.3e})",
                pivot=pivot,
                omega=omega,
            )
        return cls(m, lu, piv, float(np.abs(a).sum(axis=0).max()))

    def condition_estimate(self) -> float:
        if self.matrix.n == 0:
            return 1.0
        rcond, _ = lapack.zgecon(self.lu, self.anorm, norm="1")
        return np.inf if rcond == 0 else 1.0 / rcond

    def solve(self, b: np.ndarray) -> np.ndarray:
        b = np.asarray(b, dtype=complex)
        if self.matrix.n == 0:
            return b.copy()
        x = sla.lu_solve((self.lu, self.piv), b, check_finite=False)
        r = b - self.matrix.entries @ x
        bn = np.linalg.norm(b)
        if bn > 0 and np.linalg.norm(r) > RESIDUAL_TOLERANCE * bn:
            # one pass of iterative refinement
            x = x + sla.lu_solve((self.lu, self.piv), r, check_finite=False)
        return x


def solve_incident(m: InteractionMatrix, incident: IncidentTrace | np.ndarray) -> np.ndarray:
    """Exciting field at each bubble: the solution ``v`` of ``M v = u_in(x_j)``."""
    b = incident.values if isinstance(incident, IncidentTrace) else np.asarray(incident, dtype=complex)
    fac = Factorization.of(m)
    cond = fac.condition_estimate()
    if cond > CONDITION_WARNING:
        warnings.warn(f"interaction matrix condition estimate {cond:.3e}", IllConditionedWarning, stacklevel=2)
    return fac.solve(b)


def _check_far_field(points: np.ndarray, centers: np.ndarray, R: float) -> np.ndarray:
    d = _pairwise_distances(points, centers)
    if d.size and d.min() < R:
        raise NearFieldError(f"evaluation point within R of a bubble center (distance {d.min():.3e})")
    return d


def scattered_field(points, centers, f_s: complex, k_w: float, solved: np.ndarray, R: float) -> np.ndarray:
    """Sum of bubble monopoles ``-4 pi f_s G(x - x_i) v_i`` at each point."""
    points = np.asarray(points, dtype=float).reshape(-1, 3)
    centers = np.asarray(centers, dtype=float).reshape(-1, 3)
    if centers.shape[0] == 0:
        return np.zeros(points.shape[0], dtype=complex)
    d = _check_far_field(points, centers, R)
    return -4 * np.pi * f_s * (greens_of_distance(d, k_w) @ np.asarray(solved, dtype=complex))


def total_field(
    x,
    cloud: BubbleCloud,
    f_s: complex,
    k_w: float,
    solved: np.ndarray,
    incident_fn: Callable[[np.ndarray], np.ndarray],
) -> complex | np.ndarray:
    """Incident plus multiply-scattered field at ``x`` (one point or an ``(n, 3)`` array)."""
    pts = np.asarray(x, dtype=float)
    single = pts.ndim == 1
    pts = pts.reshape(-1, 3)
    u = np.asarray(incident_fn(pts), dtype=complex).reshape(-1)
    u = u + scattered_field(pts, cloud.centers, f_s, k_w, solved, cloud.radius)
    return complex(u[0]) if single else u


def point_source(source, k_w: float, amplitude: complex = 1.0) -> Callable[[np.ndarray], np.ndarray]:
    """Incident field ``amplitude * G(x - source, k_w)``."""
    s = np.asarray(source, dtype=float).reshape(3)

    def field(points):
        r = np.linalg.norm(np.asarray(points, dtype=float).reshape(-1, 3) - s, axis=1)
        return amplitude * greens_of_distance(r, k_w)

    return field


def plane_wave(direction, k_w: float, amplitude: complex = 1.0) -> Callable[[np.ndarray], np.ndarray]:
    d = np.asarray(direction, dtype=float).reshape(3)
    d = d / np.linalg.norm(d)

    def field(points):
        return amplitude * np.exp(1j * k_w * (np.asarray(points, dtype=float).reshape(-1, 3) @ d))

    return field


def free_green(points, k: float, source=(0.0, 0.0, 0.0), finite_part: bool = True) -> np.ndarray:
    """Free-space ``G(x - source, k)``; at the source the finite part ``-ik/(4 pi)`` is returned."""
    pts = np.asarray(points, dtype=float).reshape(-1, 3)
    r = np.linalg.norm(pts - np.asarray(source, dtype=float).reshape(3), axis=1)
    at_source = r == 0.0
    if np.any(at_source) and not finite_part:
        raise NearFieldError("free-space Green's function evaluated at the source")
    with np.errstate(divide="ignore", invalid="ignore"):
        g = greens_of_distance(r, k)
    g[at_source] = -1j * k / (4 * np.pi)
    return g


def effective_green(
    x,
    omega: float,
    cloud: BubbleCloud,
    media: MediaParams,
    model: ScatteringModel,
    source=(0.0, 0.0, 0.0),
    finite_part: bool = True,
) -> complex | np.ndarray:
    """Green's function of the bubbly medium for a point source at ``source``.

    This is the total field excited by the incident field ``G(x - source)``,
    computed with one factorization and one solve. At ``x == source`` the
    singular ``-1/(4 pi r)`` part of the free-space term is dropped when
    ``finite_part`` is set.
    """
    k = omega / media.c_w
    pts = np.asarray(x, dtype=float)
    single = pts.ndim == 1
    pts = pts.reshape(-1, 3)
    g = free_green(pts, k, source, finite_part)
    if cloud.n:
        f_s = model.amplitude(omega)
        system = ScattererSystem(cloud)
        v = system.factor(k, f_s, omega).solve(system.incident_from(source, k))
        g = g + system.scattered(pts, k, f_s, v)
    return complex(g[0]) if single else g


class ScattererSystem:
    """Geometry cache for repeated assemble/solve/evaluate cycles over frequency.

    Distances are computed once; evaluation-point distances are cached by
    the point coordinates, so a sweep pays for them only on its first step.
    """

    def __init__(self, cloud: BubbleCloud):
        self.cloud = cloud
        d = _pairwise_distances(cloud.centers)
        np.fill_diagonal(d, 1.0)
        self._distances = d
        self._cache: dict[bytes, np.ndarray] = {}

    @property
    def n(self) -> int:
        return self.cloud.n

    def distances_to(self, points) -> np.ndarray:
        pts = np.ascontiguousarray(np.asarray(points, dtype=float).reshape(-1, 3))
        key = pts.tobytes()
        d = self._cache.get(key)
        if d is None:
            d = _check_far_field(pts, self.cloud.centers, self.cloud.radius)
            self._cache[key] = d
        return d

    def assemble(self, k: float, f_s: complex) -> InteractionMatrix:
        return InteractionMatrix(entries=_coupling(self._distances, f_s, k), f_s=complex(f_s), k_w=float(k))

    def factor(self, k: float, f_s: complex, omega: float | None = None) -> Factorization:
        return Factorization.of(self.assemble(k, f_s), omega=omega)

    def incident_from(self, sources, k: float, weights=None) -> np.ndarray:
        """Trace at the centers of point sources at ``sources`` with complex ``weights``."""
        g = greens_of_distance(self.distances_to(sources).T, k)
        w = np.ones(g.shape[1]) if weights is None else np.asarray(weights, dtype=complex)
        return g @ w

    def scattered(self, points, k: float, f_s: complex, solved: np.ndarray) -> np.ndarray:
        if self.n == 0:
            return np.zeros(np.asarray(points).reshape(-1, 3).shape[0], dtype=complex)
        return -4 * np.pi * f_s * (greens_of_distance(self.distances_to(points), k) @ solved)

"""Media parameters, derived acoustic quantities and bubble-cloud geometry.

All quantities are SI; angular frequencies are in rad/s.
"""

from __future__ import annotations

import hashlib
import math
import warnings
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import (
    DegenerateConfigurationError,
    InvalidInputError,
    MediumRegimeWarning,
    PackingError,
)

# Water / air values used for the time-reversal and Green's function runs.
RHO_WATER = 1.0e3  # kg m^-3
RHO_AIR = 1.2  # kg m^-3
KAPPA_WATER = 2.07e9  # N m^-2
KAPPA_AIR = 1.27e5  # N m^-2

DEFAULT_MAX_ATTEMPTS = 1_000_000


@dataclass(frozen=True)
class MediaParams:
    """Densities and bulk moduli of the host liquid (``_w``) and the gas (``_b``)."""

    rho_w: float = RHO_WATER
    rho_b: float = RHO_AIR
    kappa_w: float = KAPPA_WATER
    kappa_b: float = KAPPA_AIR

    def __post_init__(self):
        for name in ("rho_w", "rho_b", "kappa_w", "kappa_b"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise InvalidInputError(f"{name} must be strictly positive, got {value!r}")
        if not (self.rho_b < self.rho_w and self.kappa_b < self.kappa_w):
            warnings.warn(
                "gas phase is not lighter and softer than the liquid; "
                "the bubble resonance picture may not apply",
                MediumRegimeWarning,
                stacklevel=3,
            )

    @property
    def c_w(self) -> float:
        return math.sqrt(self.kappa_w / self.rho_w)

    @property
    def c_b(self) -> float:
        return math.sqrt(self.kappa_b / self.rho_b)

    @property
    def delta(self) -> float:
        return self.rho_b / self.rho_w

    @property
    def speed_ratio(self) -> float:
        """c_b / c_w."""
        return self.c_b / self.c_w


@dataclass(frozen=True)
class DerivedAcoustics:
    c_w: float
    c_b: float
    delta: float
    omega: float
    k_w: float
    k_b: float
    x_w: float
    x_b: float


def derive_acoustics(media: MediaParams, omega: float, R: float) -> DerivedAcoustics:
    """Sound speeds, contrast, wavenumbers and dimensionless sizes ``kR`` at ``omega``."""
    if not (omega >= 0 and math.isfinite(omega)):
        raise InvalidInputError(f"omega must be >= 0, got {omega!r}")
    if not (R > 0 and math.isfinite(R)):
        raise InvalidInputError(f"R must be > 0, got {R!r}")
    c_w, c_b = media.c_w, media.c_b
    k_w, k_b = omega / c_w, omega / c_b
    return DerivedAcoustics(
        c_w=c_w,
        c_b=c_b,
        delta=media.delta,
        omega=omega,
        k_w=k_w,
        k_b=k_b,
        x_w=k_w * R,
        x_b=k_b * R,
    )


def sphere_volume(R: float) -> float:
    return 4.0 / 3.0 * math.pi * R**3


def bubble_count_for_fraction(phi: float, L: float, R: float) -> int:
    """Number of radius-``R`` bubbles giving gas volume fraction ``phi`` in a cube of side ``L``."""
    if not (0 < phi < 0.5):
        if phi <= 0:
            raise DegenerateConfigurationError(f"volume fraction {phi!r} gives no bubbles")
        raise InvalidInputError(f"volume fraction must be < 0.5, got {phi!r}")
    if not (R > 0 and L > 2 * R):
        raise InvalidInputError(f"need L > 2R > 0, got L={L!r}, R={R!r}")
    # the relative nudge keeps exact fractions (phi = k * v / L^3) from flooring to k - 1
    n = math.floor(phi * L**3 / sphere_volume(R) * (1 + 1e-12))
    if n == 0:
        raise DegenerateConfigurationError(
            f"volume fraction {phi!r} is below one bubble of radius {R!r} in a cube of side {L!r}"
        )
    return n


@dataclass(frozen=True, eq=False)
class BubbleCloud:
    """Centers of ``N`` equal spheres inside the cube ``[-L/2, L/2]^3``."""

    centers: np.ndarray
    radius: float
    box_length: float
    seed: int = 0
    _fingerprint: str = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        centers = np.ascontiguousarray(np.asarray(self.centers, dtype=float).reshape(-1, 3))
        centers.setflags(write=False)
        object.__setattr__(self, "centers", centers)
        if not self.radius > 0:
            raise InvalidInputError(f"radius must be > 0, got {self.radius!r}")
        half = self.box_length / 2
        if centers.size and np.any(np.abs(centers) > half):
            raise InvalidInputError("bubble center outside the box")
        if len(centers) > 1:
            d = _pairwise_distances(centers)
            np.fill_diagonal(d, np.inf)
            if d.min() < 2 * self.radius:
                raise InvalidInputError(
                    f"overlapping bubbles: min center distance {d.min():.3e} < 2R"
                )
        h = hashlib.sha256()
        h.update(np.float64(self.radius).tobytes())
        h.update(np.float64(self.box_length).tobytes())
        h.update(centers.tobytes())
        object.__setattr__(self, "_fingerprint", h.hexdigest())

    def __len__(self):
        return len(self.centers)

    @property
    def n(self) -> int:
        return len(self.centers)

    @property
    def half_length(self) -> float:
        return self.box_length / 2

    @property
    def volume_fraction(self) -> float:
        return self.n * sphere_volume(self.radius) / self.box_length**3

    def fingerprint(self) -> str:
        """SHA-256 over radius, box size and center coordinates."""
        return self._fingerprint

    @classmethod
    def empty(cls, radius: float, box_length: float, seed: int = 0) -> "BubbleCloud":
        return cls(np.empty((0, 3)), radius, box_length, seed)


def _pairwise_distances(a: np.ndarray, b: np.ndarray | None = None) -> np.ndarray:
    b = a if b is None else b
    diff = a[:, None, :] - b[None, :, :]
    return np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))


def line_points(extent: float, samples: int) -> np.ndarray:
    """Points ``(x1, 0, 0)`` with ``x1`` uniform on ``[-extent, extent]``."""
    pts = np.zeros((samples, 3))
    pts[:, 0] = np.linspace(-extent, extent, samples)
    return pts


def place_bubbles(
    seed: int,
    n: int,
    L: float,
    R: float,
    exclusion_points: Sequence[Sequence[float]] | np.ndarray = (),
    exclusion_radius: float = 0.0,
    max_attempts: int = DEFAULT_MAX_ATTEMPTS,
) -> BubbleCloud:
    """Random sequential placement of ``n`` non-overlapping bubbles.

    Candidate centers are drawn uniformly in ``[-L/2, L/2]^3`` and rejected if
    closer than ``2R`` to an accepted center or closer than ``exclusion_radius``
    to any exclusion point. ``max_attempts`` bounds the total number of draws.
    """
    if n < 0:
        raise InvalidInputError(f"n must be >= 0, got {n}")
    if not (R > 0 and L > 2 * R):
        raise InvalidInputError(f"need L > 2R > 0, got L={L!r}, R={R!r}")
    if exclusion_radius < 0:
        raise InvalidInputError("exclusion_radius must be >= 0")
    excl = np.asarray(exclusion_points, dtype=float).reshape(-1, 3)
    excl_r2 = exclusion_radius**2
    min_d2 = (2 * R) ** 2

    rng = np.random.default_rng(seed)
    centers = np.empty((n, 3))
    placed = 0
    attempts = 0
    batch = 256
    while placed < n:
        candidates = rng.uniform(-L / 2, L / 2, size=(batch, 3))
        for p in candidates:
            if attempts >= max_attempts:
                raise PackingError(
                    f"placed {placed} of {n} bubbles after {attempts} draws",
                    placed=placed,
                    attempts=attempts,
                )
            attempts += 1
            if excl.size and np.min(np.sum((excl - p) ** 2, axis=1)) < excl_r2:
                continue
            if placed and np.min(np.sum((centers[:placed] - p) ** 2, axis=1)) < min_d2:
                continue
            centers[placed] = p
            placed += 1
            if placed == n:
                break
    return BubbleCloud(centers, R, L, seed)

"""Acoustic scattering by bubble clouds near the Minnaert resonance.

Single-bubble breathing-mode theory, the Foldy-Lax point-interaction model,
time-reversal refocusing and frequency-averaged Green's function analysis.
"""

__version__ = "0.1.0"

from .physics import BubbleCloud, MediaParams, bubble_count_for_fraction, derive_acoustics, place_bubbles
from .single_bubble import (
    ScatteringModel,
    Variant,
    greens_fn,
    minnaert_frequency,
    minnaert_root,
    scattering_fn,
)
from .foldy_lax import assemble, effective_green, solve_incident, total_field
from .experiments import (
    ExperimentConfig,
    averaged_profiles,
    frequency_average,
    fwhm,
    green_map,
    run_forward,
    run_time_reversal,
)

__all__ = [
    "BubbleCloud",
    "MediaParams",
    "bubble_count_for_fraction",
    "derive_acoustics",
    "place_bubbles",
    "ScatteringModel",
    "Variant",
    "greens_fn",
    "minnaert_frequency",
    "minnaert_root",
    "scattering_fn",
    "assemble",
    "effective_green",
    "solve_incident",
    "total_field",
    "ExperimentConfig",
    "averaged_profiles",
    "frequency_average",
    "fwhm",
    "green_map",
    "run_forward",
    "run_time_reversal",
]

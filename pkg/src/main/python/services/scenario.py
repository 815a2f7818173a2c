"""Device deployment and large-scale channel gains."""

import logging
from typing import Callable, Dict

import numpy as np

from ..core.exceptions import ConfigurationError, DomainError
from ..models import Deployment, LargeScaleGain

logger = logging.getLogger(__name__)


def _umi_nlos(d, f_ghz):
    # TR 38.901 UMi street canyon NLOS closed form
    return 35.3 * np.log10(d) + 22.4 + 21.3 * np.log10(f_ghz)


def _umi_los(d, f_ghz):
    return 32.4 + 21.0 * np.log10(d) + 20.0 * np.log10(f_ghz)


def _inh_nlos(d, f_ghz):
    # TR 38.901 InH office NLOS closed form
    return 38.3 * np.log10(d) + 17.30 + 24.9 * np.log10(f_ghz)


def _inh_los(d, f_ghz):
    return 32.4 + 17.3 * np.log10(d) + 20.0 * np.log10(f_ghz)


PATHLOSS_MODELS: Dict[str, Callable] = {
    "umi_nlos": _umi_nlos,
    "umi_los": _umi_los,
    "inh_nlos": _inh_nlos,
    "inh_los": _inh_los,
}

# scenario -> default model
DEFAULT_MODELS = {
    "outdoor": "umi_nlos",
    "outdoor_umi": "umi_nlos",
    "indoor": "inh_nlos",
    "indoor_inh": "inh_nlos",
}


def draw_radius(r_min: float, r_max: float, rng: np.random.Generator, size=None):
    """Radius uniform in area over the annulus: r = sqrt(u (r_max^2 - r_min^2) + r_min^2)."""
    u = rng.random(size)
    return np.sqrt(u * (r_max ** 2 - r_min ** 2) + r_min ** 2)


def deploy_nodes(m: int, r_min: float, r_max: float, rng: np.random.Generator) -> Deployment:
    """
    Drop m devices uniformly in area on the annulus r_min <= r <= r_max.

    Args:
        m: Number of devices
        r_min: Inner radius in meters
        r_max: Outer radius in meters
        rng: Random source

    Returns:
        Deployment with m polar positions around the gateway at the origin
    """
    if not 0 < r_min < r_max:
        raise ConfigurationError(f"0 < r_min < r_max violated: r_min={r_min}, r_max={r_max}")
    if m < 1:
        raise ConfigurationError(f"m >= 1 violated: m={m}")
    radii = np.clip(draw_radius(r_min, r_max, rng, m), r_min, r_max)
    angles = rng.uniform(0.0, 2.0 * np.pi, m)
    return Deployment(radii=radii, angles=angles, r_min=r_min, r_max=r_max)


def pathloss_db(scenario: str, distance, carrier: float = 2.0, model: str = None):
    """
    Deterministic pathloss in dB.

    Args:
        scenario: "outdoor"/"outdoor_umi" or "indoor"/"indoor_inh"
        distance: Link distance(s) in meters
        carrier: Carrier frequency in GHz
        model: Closed form to use instead of the scenario default

    Returns:
        Loss in dB (scalar or array matching distance)
    """
    distance = np.asarray(distance, dtype=float)
    if np.any(distance <= 0):
        raise DomainError(f"distance must be positive, got {distance}")
    if carrier <= 0:
        raise DomainError(f"carrier must be positive, got {carrier} GHz")

    name = model or DEFAULT_MODELS.get(scenario)
    if name not in PATHLOSS_MODELS:
        raise ConfigurationError(f"unknown pathloss model {name!r} for scenario {scenario!r}")

    loss = PATHLOSS_MODELS[name](distance, carrier)
    return float(loss) if loss.ndim == 0 else loss


def draw_shadowing(mean_db: float, variance_db2: float, rng: np.random.Generator, size=None):
    """
    Log-normal shadowing: a Gaussian sample in the dB domain.

    Args:
        mean_db: Mean in dB
        variance_db2: Variance in dB^2
        rng: Random source
        size: Optional sample shape

    Returns:
        Shadowing loss in dB
    """
    if variance_db2 < 0:
        raise DomainError(f"shadowing variance must be >= 0, got {variance_db2}")
    sample = rng.normal(mean_db, np.sqrt(variance_db2), size)
    return float(sample) if size is None else sample


def large_scale_gain(
    scenario: str,
    distance: float,
    rng: np.random.Generator,
    carrier: float = 2.0,
    shadowing_mean_db: float = 4.0,
    shadowing_variance_db2: float = 2.0,
    model: str = None,
) -> LargeScaleGain:
    """Pathloss at the given distance plus one shadowing draw."""
    return LargeScaleGain(
        pathloss_db=pathloss_db(scenario, distance, carrier, model),
        shadowing_db=draw_shadowing(shadowing_mean_db, shadowing_variance_db2, rng),
    )

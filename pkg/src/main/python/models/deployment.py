"""Deployment geometry and large-scale gain models."""

from dataclasses import dataclass
from typing import List, Tuple

import numpy as np

from ..core.exceptions import ContractViolation


@dataclass(frozen=True)
class Deployment:
    """Device positions on an annulus around a gateway at the origin."""

    radii: np.ndarray  # meters
    angles: np.ndarray  # radians, [0, 2*pi)
    r_min: float
    r_max: float

    def __post_init__(self):
        if self.radii.shape != self.angles.shape:
            raise ContractViolation("radii and angles must have the same length")
        if np.any(self.radii < self.r_min) or np.any(self.radii > self.r_max):
            raise ContractViolation(
                f"radius outside [{self.r_min}, {self.r_max}] m"
            )

    def __len__(self) -> int:
        return int(self.radii.size)

    @property
    def positions(self) -> List[Tuple[float, float]]:
        """Polar coordinates (radius, angle) of every device."""
        return [(float(r), float(a)) for r, a in zip(self.radii, self.angles)]

    @property
    def cartesian(self) -> np.ndarray:
        """Positions as an (M, 2) array of x/y meters."""
        return np.column_stack((self.radii * np.cos(self.angles), self.radii * np.sin(self.angles)))


@dataclass(frozen=True)
class LargeScaleGain:
    """Pathloss plus shadowing of one device-to-gateway link, both as losses in dB."""

    pathloss_db: float
    shadowing_db: float

    @property
    def total_loss_db(self) -> float:
        return self.pathloss_db + self.shadowing_db

    @property
    def amplitude(self) -> float:
        """Linear amplitude gain 10^(-(PL+SH)/20)."""
        return 10.0 ** (-self.total_loss_db / 20.0)

    @property
    def power_gain(self) -> float:
        return self.amplitude ** 2

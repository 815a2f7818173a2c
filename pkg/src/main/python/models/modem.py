"""Constellation description."""

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class Constellation:
    """
    A Gray-labelled PSK/QAM point set or an FSK tone set.

    For FSK `points` holds tone indices. `labels[i]` is the integer bit label
    carried by point i.
    """

    kind: str
    order: int
    points: np.ndarray
    labels: np.ndarray
    tone_spacing: float = 1.0  # multiples of 1/T_symbol (FSK only)
    index_of_label: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        inverse = np.empty(self.order, dtype=int)
        inverse[self.labels] = np.arange(self.order)
        object.__setattr__(self, "index_of_label", inverse)

    @property
    def bits_per_symbol(self) -> int:
        return int(np.log2(self.order))

    @property
    def is_fsk(self) -> bool:
        return self.kind == "fsk"

    @property
    def average_energy(self) -> float:
        if self.is_fsk:
            return 1.0
        return float(np.mean(np.abs(self.points) ** 2))

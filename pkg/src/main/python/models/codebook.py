"""Dispersion-vector codebooks."""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..core.exceptions import ContractViolation


@dataclass(frozen=True)
class Codebook:
    """
    A set of Q dispersion vectors of length T.

    Every vector satisfies the power constraint sum(|v_i|^2) = T.
    """

    vectors: np.ndarray  # (Q, T) complex
    construction: str
    criterion: Optional[str] = None
    seed: Optional[int] = None
    score: Optional[float] = None

    def __post_init__(self):
        if self.vectors.ndim != 2 or self.vectors.shape[0] < 1:
            raise ContractViolation("codebook vectors must be a non-empty (Q, T) array")

    @property
    def q(self) -> int:
        return int(self.vectors.shape[0])

    @property
    def t(self) -> int:
        return int(self.vectors.shape[1])

    def vector(self, index: int) -> np.ndarray:
        return self.vectors[index]

    def powers(self) -> np.ndarray:
        """Per-vector energy, equal to T for a valid codebook."""
        return np.sum(np.abs(self.vectors) ** 2, axis=1)

    def nonzero_counts(self) -> np.ndarray:
        return np.count_nonzero(self.vectors, axis=1)

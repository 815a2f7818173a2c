"""Channel estimates and decoder decisions."""

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class ChannelEstimate:
    """Estimated composite taps per (device, antenna)."""

    taps: np.ndarray  # (M, N, n_taps) complex
    estimator: str
    pilot_len: int

    def for_device(self, device: int) -> np.ndarray:
        return self.taps[device]


@dataclass(frozen=True)
class Decision:
    """Decoder output for one block."""

    vector_index: int
    symbol_indices: np.ndarray
    symbols: np.ndarray
    bits: np.ndarray
    cost: float = float("nan")


@dataclass(frozen=True)
class EqualizedBlock:
    """Per-antenna equalizer output; `spectral_null` marks a regularized inversion."""

    samples: np.ndarray  # (N, block_len)
    spectral_null: bool = False

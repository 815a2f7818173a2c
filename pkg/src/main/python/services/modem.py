"""Gray-mapped PSK/QAM/FSK modulation, stream splitting and square-law detection."""

import logging
from typing import Tuple

import numpy as np

from ..core.exceptions import ConfigurationError, ContractViolation
from ..models import Constellation

logger = logging.getLogger(__name__)


def gray(n):
    return np.asarray(n) ^ (np.asarray(n) >> 1)


def make_constellation(kind: str, order: int, tone_spacing: float = 1.0) -> Constellation:
    """
    Build a unit-energy Gray-labelled constellation.

    Args:
        kind: "psk", "qam" or "fsk"
        order: Number of points (power of 2; a power of 4 for QAM). PSK of
            order 1 is the unmodulated carrier used when only FSK carries data.
        tone_spacing: FSK tone spacing in multiples of 1/T_symbol

    Returns:
        Constellation
    """
    kind = kind.lower()
    if order < 1 or order & (order - 1):
        raise ConfigurationError(f"constellation order must be a power of 2, got {order}")

    index = np.arange(order)
    if kind == "psk":
        offset = np.pi / 4 if order == 4 else 0.0
        points = np.exp(1j * (2 * np.pi * index / order + offset))
        labels = gray(index)
    elif kind == "qam":
        side = int(round(np.sqrt(order)))
        if side * side != order or order < 4:
            raise ConfigurationError(f"square QAM needs a power-of-4 order, got {order}")
        half = int(np.log2(side))
        a, b = index // side, index % side
        levels = 2 * np.arange(side) - (side - 1)
        points = (levels[a] + 1j * levels[b]) / np.sqrt(2.0 * (order - 1) / 3.0)
        labels = (gray(a) << half) | gray(b)
    elif kind == "fsk":
        if order < 2:
            raise ConfigurationError(f"FSK needs at least 2 tones, got {order}")
        points = index.copy()
        labels = gray(index)
    else:
        raise ConfigurationError(f"unknown constellation kind {kind!r}")

    return Constellation(kind=kind, order=order, points=points, labels=labels, tone_spacing=tone_spacing)


def bits_to_indices(bits, c: Constellation) -> np.ndarray:
    """Map bit groups (MSB first) to constellation point indices."""
    bits = np.asarray(bits, dtype=int).ravel()
    k = c.bits_per_symbol
    if k == 0:
        if bits.size:
            raise ContractViolation("an order-1 constellation carries no bits")
        return np.zeros(1, dtype=int)
    if bits.size % k:
        raise ContractViolation(f"{bits.size} bits not divisible by {k} bits per symbol")
    weights = 1 << np.arange(k - 1, -1, -1)
    labels = bits.reshape(-1, k) @ weights
    return c.index_of_label[labels]


def indices_to_bits(indices, c: Constellation) -> np.ndarray:
    """Inverse of bits_to_indices."""
    k = c.bits_per_symbol
    labels = c.labels[np.asarray(indices, dtype=int).ravel()]
    if k == 0:
        return np.zeros(0, dtype=int)
    shifts = np.arange(k - 1, -1, -1)
    return ((labels[:, None] >> shifts) & 1).ravel()


def modulate(bits, c: Constellation) -> np.ndarray:
    """
    Gray-map bits onto the constellation.

    Returns:
        Complex symbols for PSK/QAM, tone indices for FSK
    """
    return c.points[bits_to_indices(bits, c)]


def slice_symbols(values, c: Constellation) -> np.ndarray:
    """Nearest-point indices; ties go to the lowest index."""
    values = np.atleast_1d(np.asarray(values, dtype=complex))
    distances = np.abs(values[:, None] - c.points[None, :])
    return np.argmin(distances, axis=1)


def demodulate(values, c: Constellation) -> np.ndarray:
    """Hard-decision bits for received PSK/QAM values."""
    return indices_to_bits(slice_symbols(values, c), c)


def split_stream(bits, ratio: Tuple[int, int]) -> Tuple[np.ndarray, np.ndarray]:
    """
    Split one bit-stream into the PSK/QAM and FSK streams.

    Each combined symbol takes k1 bits for the first stream then k2 for the second.

    Args:
        bits: Input bit-sequence
        ratio: (k1, k2) bits per combined symbol

    Returns:
        (stream_psk_qam, stream_fsk)
    """
    bits = np.asarray(bits).ravel()
    k1, k2 = ratio
    width = k1 + k2
    if width < 1 or bits.size % width:
        raise ContractViolation(f"{bits.size} bits not divisible by k1+k2={width}")
    chunks = bits.reshape(-1, width)
    return chunks[:, :k1].ravel(), chunks[:, k1:].ravel()


def merge_streams(first, second, ratio: Tuple[int, int]) -> np.ndarray:
    """Interleave the two streams back into the original order."""
    k1, k2 = ratio
    first = np.asarray(first).reshape(-1, k1) if k1 else None
    second = np.asarray(second).reshape(-1, k2) if k2 else None
    parts = [p for p in (first, second) if p is not None]
    if not parts:
        return np.zeros(0, dtype=int)
    if len(parts) == 2 and parts[0].shape[0] != parts[1].shape[0]:
        raise ContractViolation("streams hold different numbers of symbols")
    return np.hstack(parts).ravel()


def square_law_detect(tone_energies) -> int:
    """
    Noncoherent FSK decision.

    Args:
        tone_energies: (N antennas, order) matched-filter energies, or (order,)

    Returns:
        Tone with the largest energy summed over antennas (lowest index on ties)
    """
    energies = np.atleast_2d(np.asarray(tone_energies, dtype=float))
    if energies.shape[-1] < 2:
        raise ContractViolation("square-law detection needs at least 2 tones")
    return int(np.argmax(energies.sum(axis=0)))


def fsk_waveform(tone: int, samples_per_symbol: int, tone_spacing: float = 1.0) -> np.ndarray:
    """Complex baseband tone over one symbol period."""
    n = np.arange(samples_per_symbol)
    return np.exp(2j * np.pi * tone * tone_spacing * n / samples_per_symbol)

"""Pilot-based channel estimation, equalization and symbol/vector decoding."""

import logging
from typing import Optional

import numpy as np
from scipy.linalg import convolution_matrix as _toeplitz_full

from ..core.exceptions import ConfigurationError, ContractViolation
from ..models import ChannelEstimate, Codebook, Constellation, Decision, EqualizedBlock
from .modem import indices_to_bits, slice_symbols

logger = logging.getLogger(__name__)

ZF_EPSILON = 1e-8


def pilot_sequences(m: int, length: int) -> np.ndarray:
    """
    Mutually orthogonal pilots: the first m rows of a length x length DFT matrix.

    Each pilot has unit-modulus samples, so its energy equals its length.
    """
    if length < m:
        raise ConfigurationError(f"{m} orthogonal pilots need length >= {m}, got {length}")
    n = np.arange(length)
    return np.exp(-2j * np.pi * np.outer(np.arange(m), n) / length)


def check_pilot_orthogonality(pilots: np.ndarray, tol: float = 1e-9) -> None:
    gram = pilots @ pilots.conj().T
    scale = np.max(np.abs(np.diag(gram)))
    off = gram - np.diag(np.diag(gram))
    if off.size and np.max(np.abs(off)) > tol * scale:
        raise ConfigurationError("pilot sequences are not mutually orthogonal")


def convolution_matrix(sequence: np.ndarray, n_taps: int, out_len: int) -> np.ndarray:
    """(out_len, n_taps) matrix C with (C h)[t] = sum_k h[k] sequence[t-k]."""
    full = _toeplitz_full(np.asarray(sequence, dtype=complex), n_taps, mode="full")
    if full.shape[0] >= out_len:
        return full[:out_len]
    return np.vstack((full, np.zeros((out_len - full.shape[0], n_taps), dtype=complex)))


def estimate_csi(
    pilot_obs,
    pilots: np.ndarray,
    estimator: str = "ls",
    noise_power: float = 0.0,
    n_taps: int = 4,
    prior: Optional[np.ndarray] = None,
) -> ChannelEstimate:
    """
    Estimate every device's taps from its demapped pilot block.

    Args:
        pilot_obs: Per-device (N, block_len) observations of the pilot row
        pilots: (M, pilot_len) orthogonal pilot sequences
        estimator: "ls" or "mmse"
        noise_power: Per-sample noise power
        n_taps: Taps to estimate
        prior: (M, n_taps) prior tap variances for MMSE (default: uniform, unit total)

    Returns:
        ChannelEstimate with taps of shape (M, N, n_taps)
    """
    pilots = np.atleast_2d(pilots)
    pilot_len = pilots.shape[1]
    if pilot_len < n_taps:
        raise ConfigurationError(f"pilot_len >= n_taps violated: {pilot_len} < {n_taps}")
    check_pilot_orthogonality(pilots)
    if estimator not in ("ls", "mmse"):
        raise ConfigurationError(f"unknown estimator {estimator!r}")
    if prior is None:
        prior = np.full((pilots.shape[0], n_taps), 1.0 / n_taps)

    estimates = []
    for m, obs in enumerate(pilot_obs):
        obs = np.atleast_2d(obs)
        c = convolution_matrix(pilots[m], n_taps, obs.shape[-1])
        if estimator == "ls":
            w = np.linalg.pinv(c)
        else:
            r = np.diag(prior[m]).astype(complex)
            w = r @ c.conj().T @ np.linalg.inv(c @ r @ c.conj().T + noise_power * np.eye(c.shape[0]))
        estimates.append(obs @ w.T)
    return ChannelEstimate(taps=np.asarray(estimates), estimator=estimator, pilot_len=pilot_len)


def _invert_spectrum(block_obs, taps, regularization=None, eps: float = ZF_EPSILON) -> EqualizedBlock:
    obs = np.atleast_2d(np.asarray(block_obs, dtype=complex))
    taps = np.atleast_2d(np.asarray(taps, dtype=complex))
    if taps.shape[0] != obs.shape[0]:
        raise ContractViolation(f"{taps.shape[0]} tap rows for {obs.shape[0]} antennas")
    n_fft = obs.shape[-1]
    spectrum = np.fft.fft(taps, n=n_fft, axis=-1)
    power = np.abs(spectrum) ** 2
    floor = eps * np.mean(power, axis=-1, keepdims=True)

    if regularization is None:
        null = power < floor
        denominator = np.where(null, power + floor, power)
    else:
        null = np.zeros_like(power, dtype=bool)
        denominator = power + regularization
    flagged = bool(np.any(null)) or bool(np.any(denominator == 0))
    denominator = np.where(denominator == 0, 1.0, denominator)

    samples = np.fft.ifft(np.fft.fft(obs, axis=-1) * spectrum.conj() / denominator, axis=-1)
    if flagged:
        logger.debug("Equalizer hit a spectral null; regularized inversion applied")
    return EqualizedBlock(samples=samples, spectral_null=flagged)


def zf_equalize(block_obs, taps, eps: float = ZF_EPSILON) -> EqualizedBlock:
    """
    Per-antenna zero-forcing deconvolution in the frequency domain of the block.

    Spectral bins below eps times the mean spectral power are regularized and flagged.

    Args:
        block_obs: (N, block_len) observation
        taps: (N, n_taps) channel taps
        eps: Regularization floor relative to the mean spectral power

    Returns:
        EqualizedBlock with (N, block_len) samples
    """
    return _invert_spectrum(block_obs, taps, eps=eps)


def mmse_equalize(block_obs, taps, noise_power: float) -> EqualizedBlock:
    """Wiener deconvolution for unit-energy chips."""
    return _invert_spectrum(block_obs, taps, regularization=max(noise_power, 0.0))


def _combine(equalized: EqualizedBlock, taps, t: int) -> np.ndarray:
    """Weight antennas by their channel energy and keep the T chips."""
    weights = np.sum(np.abs(np.atleast_2d(taps)) ** 2, axis=-1)
    total = weights.sum()
    if total == 0:
        return np.zeros(t, dtype=complex)
    return (weights @ equalized.samples)[:t] / total


def templates(taps, codebook: Codebook, block_len: int) -> np.ndarray:
    """Received images of every dispersion vector, shape (Q, N, block_len)."""
    taps = np.atleast_2d(np.asarray(taps, dtype=complex))
    padded = np.zeros((codebook.q, block_len), dtype=complex)
    width = min(codebook.t, block_len)
    padded[:, :width] = codebook.vectors[:, :width]
    out = np.zeros((codebook.q, taps.shape[0], block_len), dtype=complex)
    for k in range(min(taps.shape[1], block_len)):
        shifted = np.zeros_like(padded)
        shifted[:, k:] = padded[:, : block_len - k]
        out += taps[None, :, k, None] * shifted[:, None, :]
    return out


def hypothesis_cost(block_obs, taps, vector, symbol) -> float:
    """Squared distance between the observation and one (vector, symbol) hypothesis."""
    obs = np.atleast_2d(np.asarray(block_obs, dtype=complex))
    book = Codebook(vectors=np.atleast_2d(np.asarray(vector, dtype=complex)), construction="hypothesis")
    image = symbol * templates(taps, book, obs.shape[-1])[0]
    return float(np.sum(np.abs(obs - image) ** 2))


def _decision(q: int, k: int, constellation: Constellation, cost: float = float("nan")) -> Decision:
    return Decision(
        vector_index=int(q),
        symbol_indices=np.array([k]),
        symbols=np.array([constellation.points[k]]),
        bits=indices_to_bits([k], constellation),
        cost=cost,
    )


def ml_decode(block_obs, taps, codebook: Codebook, constellation: Constellation, noise_power: float = 0.0) -> Decision:
    """
    Exhaustive joint search over (vector q, symbol s).

    Minimizes sum over antennas of ||obs - h * (s v_q)||^2; ties go to the
    lowest q, then the lowest symbol index.
    """
    obs = np.atleast_2d(np.asarray(block_obs, dtype=complex))
    images = templates(taps, codebook, obs.shape[-1])
    corr = np.einsum("qnt,nt->q", images.conj(), obs)
    energy = np.sum(np.abs(images) ** 2, axis=(1, 2))
    points = np.asarray(constellation.points, dtype=complex)
    cost = (
        np.sum(np.abs(obs) ** 2)
        - 2.0 * np.real(points.conj()[None, :] * corr[:, None])
        + (np.abs(points) ** 2)[None, :] * energy[:, None]
    )
    q, k = np.unravel_index(np.argmin(cost), cost.shape)
    return _decision(q, k, constellation, float(cost[q, k]))


def _slice_equalized(chips: np.ndarray, codebook: Codebook, constellation: Constellation) -> Decision:
    corr = codebook.vectors.conj() @ chips
    q = int(np.argmax(np.abs(corr)))
    estimate = corr[q] / codebook.powers()[q]
    k = int(slice_symbols(estimate, constellation)[0])
    residual = float(np.sum(np.abs(chips - constellation.points[k] * codebook.vectors[q]) ** 2))
    return _decision(q, k, constellation, residual)


def zf_decode(block_obs, taps, codebook: Codebook, constellation: Constellation, noise_power: float = 0.0) -> Decision:
    """ZF equalization, antenna combining, matched vector correlation and nearest-point slicing."""
    equalized = zf_equalize(block_obs, taps)
    return _slice_equalized(_combine(equalized, taps, codebook.t), codebook, constellation)


def mmse_decode(block_obs, taps, codebook: Codebook, constellation: Constellation, noise_power: float = 0.0) -> Decision:
    equalized = mmse_equalize(block_obs, taps, noise_power)
    return _slice_equalized(_combine(equalized, taps, codebook.t), codebook, constellation)


def mf_decode(block_obs, taps, codebook: Codebook, constellation: Constellation, noise_power: float = 0.0) -> Decision:
    """Matched filter against every vector image; the strongest normalized output wins."""
    obs = np.atleast_2d(np.asarray(block_obs, dtype=complex))
    images = templates(taps, codebook, obs.shape[-1])
    corr = np.einsum("qnt,nt->q", images.conj(), obs)
    energy = np.sum(np.abs(images) ** 2, axis=(1, 2))
    safe = np.where(energy > 0, energy, 1.0)
    q = int(np.argmax(np.abs(corr) ** 2 / safe))
    k = int(slice_symbols(corr[q] / safe[q], constellation)[0])
    return _decision(q, k, constellation)


DECODERS = {
    "ml": ml_decode,
    "zf": zf_decode,
    "mmse": mmse_decode,
    "mf": mf_decode,
}


def get_decoder(name: str):
    if name not in DECODERS:
        raise ConfigurationError(f"unknown decoder {name!r} (expected one of {sorted(DECODERS)})")
    return DECODERS[name]

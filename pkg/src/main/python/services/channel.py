"""Small-scale fading, Doppler evolution and the multi-antenna MAC."""

import logging
from typing import Optional, Sequence

import numpy as np

from ..core.exceptions import ContractViolation, DomainError
from ..models import LargeScaleGain, LinkArray, TapSet

logger = logging.getLogger(__name__)


def power_delay_profile(n_taps: int, kind: str = "exponential", decay_db: float = 3.0) -> np.ndarray:
    """
    Normalized power-delay profile.

    Args:
        n_taps: Number of taps
        kind: "exponential" (decay_db per tap) or "uniform"
        decay_db: Per-tap decay for the exponential profile

    Returns:
        Tap variances summing to 1
    """
    if n_taps < 1:
        raise DomainError(f"n_taps must be >= 1, got {n_taps}")
    if kind == "uniform":
        weights = np.ones(n_taps)
    elif kind == "exponential":
        weights = 10.0 ** (-decay_db * np.arange(n_taps) / 10.0)
    else:
        raise DomainError(f"unknown power-delay profile {kind!r}")
    return weights / weights.sum()


def resolved_profile(profile: Sequence[float], n_subbands: int) -> np.ndarray:
    """
    Power-delay profile as seen at the sample rate of one subband.

    Splitting the band into `n_subbands` stretches a block sample over that many
    wideband samples, so wideband tap k lands in block sample k // n_subbands.
    Taps sharing a block sample merge; the tail is zero-padded to keep the length.

    Args:
        profile: Wideband tap variances
        n_subbands: Subbands per slot of the mode

    Returns:
        Tap variances of the same length, still summing to 1
    """
    profile = np.asarray(profile, dtype=float)
    if n_subbands < 1:
        raise DomainError(f"n_subbands must be >= 1, got {n_subbands}")
    merged = np.zeros_like(profile)
    np.add.at(merged, np.arange(profile.size) // n_subbands, profile)
    return merged


def resolved_shifts(n_taps: int, n_subbands: int) -> np.ndarray:
    """Block-sample delay of each wideband tap."""
    return np.arange(n_taps) // n_subbands


def _checked_profile(n_taps: int, profile: Sequence[float], fd_norm: float) -> np.ndarray:
    profile = np.asarray(profile, dtype=float)
    if n_taps < 1 or profile.shape != (n_taps,):
        raise DomainError(f"profile must hold {n_taps} weights, got {profile.shape}")
    if np.any(profile < 0) or not np.isclose(profile.sum(), 1.0, rtol=0, atol=1e-9):
        raise DomainError("profile weights must be non-negative and sum to 1")
    if fd_norm < 0:
        raise DomainError(f"fd_norm must be >= 0, got {fd_norm}")
    return profile


def _oscillators(profile: np.ndarray, rng: np.random.Generator, fd_norm: float, n_oscillators: int, lead=()):
    """Weights and Doppler frequencies of shape lead + (n_taps, n_oscillators)."""
    shape = tuple(lead) + (profile.size, n_oscillators)
    scale = np.sqrt(profile / n_oscillators / 2.0)[:, None]
    weights = scale * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))
    alpha = rng.uniform(0.0, 2.0 * np.pi, shape)
    return weights, fd_norm * np.cos(alpha)


def gen_taps(
    n_taps: int,
    profile: Sequence[float],
    rng: np.random.Generator,
    fd_norm: float = 0.0,
    n_oscillators: int = 16,
) -> TapSet:
    """
    Draw a Rayleigh tap set with Jakes Doppler state.

    Each tap k is a sum of `n_oscillators` sinusoids with circular Gaussian
    weights of total variance profile[k] and Doppler shifts fd*cos(alpha),
    alpha uniform on [0, 2*pi).

    Args:
        n_taps: Number of taps
        profile: Tap variances, must sum to 1
        rng: Random source
        fd_norm: Normalized Doppler f_d * T_symbol
        n_oscillators: Sinusoids per tap

    Returns:
        TapSet at time 0
    """
    profile = _checked_profile(n_taps, profile, fd_norm)
    weights, frequencies = _oscillators(profile, rng, fd_norm, n_oscillators)
    return TapSet(
        weights=weights,
        frequencies=frequencies,
        fd_norm=float(fd_norm),
        profile=profile,
    )


def evolve_doppler(state: TapSet, steps: int) -> TapSet:
    """Advance the fading state by `steps` symbol periods."""
    if state.fd_norm < 0:
        raise DomainError(f"fd_norm must be >= 0, got {state.fd_norm}")
    return state.advanced(steps)


def doppler_leakage(fd_norm: float, block_len: int) -> float:
    """Power fraction leaking into each adjacent subband, (pi*fd*block_len)^2 / 6, at most 1/2."""
    return min((np.pi * fd_norm * block_len) ** 2 / 6.0, 0.5)


def gen_link_channels(
    gains: Sequence[LargeScaleGain],
    n_antennas: int,
    profile: Sequence[float],
    rngs: Sequence[np.random.Generator],
    fd_norm: float = 0.0,
    n_oscillators: int = 16,
) -> LinkArray:
    """
    Build the (device, antenna) grid of link channels.

    The array is co-located, so every antenna of a device shares its large-scale
    gain while the fading taps are independent per antenna. Each device draws
    all of its antennas from its own stream in one call.

    Returns:
        LinkArray over M devices and n_antennas antennas
    """
    profile = _checked_profile(len(profile), profile, fd_norm)
    weights, frequencies = [], []
    for gain, rng in zip(gains, rngs):
        w, f = _oscillators(profile, rng, fd_norm, n_oscillators, lead=(n_antennas,))
        weights.append(gain.amplitude * w)
        frequencies.append(f)
    return LinkArray(weights=np.stack(weights), frequencies=np.stack(frequencies))


def as_link_array(channels) -> LinkArray:
    """Accept a LinkArray or a nested channels[m][n] list of LinkChannel."""
    if isinstance(channels, LinkArray):
        return channels
    if not channels or any(len(row) != len(channels[0]) for row in channels):
        raise ContractViolation("a channel is required for every (device, antenna) pair")
    return LinkArray.from_links(channels)


def tap_tensor(channels, sample_times: Optional[np.ndarray], frame_len: int) -> np.ndarray:
    """
    Composite taps for every link at every sample, shape (M, N, n_taps, frame_len).

    Only the distinct times in `sample_times` are evaluated.
    """
    links = as_link_array(channels)
    if sample_times is None:
        return np.repeat(links.taps_at(0.0)[..., None], frame_len, axis=-1)
    unique, inverse = np.unique(np.asarray(sample_times), return_inverse=True)
    return links.taps_at(unique)[..., inverse.reshape(-1)]


def apply_row_leakage(signal: np.ndarray, leakage: float) -> np.ndarray:
    """Leak `leakage` of each row's power into its two neighbouring rows (axis -2)."""
    if leakage <= 0 or signal.shape[-2] < 2:
        return signal
    amp = np.sqrt(leakage)
    out = signal.copy()
    out[..., 1:, :] += amp * signal[..., :-1, :]
    out[..., :-1, :] += amp * signal[..., 1:, :]
    return out


def mac_superpose(
    frames: np.ndarray,
    channels,
    noise_power: float,
    rng: Optional[np.random.Generator],
    sample_times: Optional[np.ndarray] = None,
    leakage: float = 0.0,
    return_components: bool = False,
):
    """
    Superpose device frames at the gateway antennas.

    r_n[t] = sum_m sum_k g_m h_{m,n,k}[t] s_m[t-k] + w_n[t]

    Each device is only propagated over the samples from its first active
    sample to the end of its channel memory.

    Args:
        frames: (M, rows, frame_len) transmit signals
        channels: LinkArray, or a nested channels[m][n] list of LinkChannel
        noise_power: Per-sample AWGN power (linear)
        rng: Noise source (may be None when noise_power is 0)
        sample_times: Optional per-sample fading time; taps are static when omitted
        leakage: Power fraction leaking into each adjacent row
        return_components: Also return the noiseless per-device contributions

    Returns:
        (N, rows, frame_len) received frame, plus (M, N, rows, frame_len)
        components when requested
    """
    frames = np.asarray(frames, dtype=complex)
    if frames.ndim == 2:
        frames = frames[:, None, :]
    m_dev, n_rows, frame_len = frames.shape
    links = as_link_array(channels)
    if links.n_devices != m_dev:
        raise ContractViolation("a channel is required for every (device, antenna) pair")
    if sample_times is not None and len(sample_times) != frame_len:
        raise ContractViolation(f"sample_times has {len(sample_times)} entries, frame has {frame_len}")

    received = np.zeros((links.n_antennas, n_rows, frame_len), dtype=complex)
    components = np.zeros((m_dev,) + received.shape, dtype=complex) if return_components else None
    for m in range(m_dev):
        active = np.flatnonzero(np.any(frames[m] != 0, axis=0))
        if active.size == 0:
            continue
        start, stop = int(active[0]), min(int(active[-1]) + links.n_taps, frame_len)
        times = None if sample_times is None else np.asarray(sample_times)[start:stop]
        taps = tap_tensor(links.device(m), times, stop - start)[0]  # (N, K, window)
        part = np.zeros((links.n_antennas, n_rows, stop - start), dtype=complex)
        for k in range(min(links.n_taps, stop - start)):
            part[:, :, k:] += taps[:, k, None, k:] * frames[m, None, :, start:stop - k]
        part = apply_row_leakage(part, leakage)
        received[..., start:stop] += part
        if components is not None:
            components[m, ..., start:stop] = part

    if noise_power > 0:
        if rng is None:
            raise ContractViolation("a random source is required for noisy superposition")
        scale = np.sqrt(noise_power / 2.0)
        received = received + scale * (rng.standard_normal(received.shape)
                                       + 1j * rng.standard_normal(received.shape))
    if return_components:
        return received, components
    return received

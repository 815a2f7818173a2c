"""Small-scale fading state and composite link channels."""

from dataclasses import dataclass, replace

import numpy as np

from .deployment import LargeScaleGain


@dataclass(frozen=True)
class TapSet:
    """
    Frequency-selective fading taps with sum-of-sinusoids Doppler state.

    Each tap is a sum of oscillators with complex Gaussian weights, so the tap
    value at any instant is exactly circular Gaussian with the profile variance
    while its autocorrelation follows J0(2*pi*fd*lag).
    """

    weights: np.ndarray  # (n_taps, n_oscillators) complex
    frequencies: np.ndarray  # (n_taps, n_oscillators), cycles per sample
    fd_norm: float
    profile: np.ndarray  # (n_taps,) tap variances
    time: int = 0

    @classmethod
    def from_taps(cls, taps) -> "TapSet":
        """Static tap set with fixed coefficients (no Doppler)."""
        taps = np.atleast_1d(np.asarray(taps, dtype=complex))
        return cls(
            weights=taps[:, None],
            frequencies=np.zeros((taps.size, 1)),
            fd_norm=0.0,
            profile=np.abs(taps) ** 2,
        )

    @property
    def n_taps(self) -> int:
        return int(self.weights.shape[0])

    @property
    def taps(self) -> np.ndarray:
        """Tap coefficients at the current time."""
        return self.taps_at(self.time)

    def taps_at(self, t) -> np.ndarray:
        """
        Evaluate the taps at absolute sample time(s).

        Args:
            t: Scalar time or 1-D array of times (samples)

        Returns:
            (n_taps,) for a scalar time, (n_taps, len(t)) for an array
        """
        t_arr = np.asarray(t, dtype=float)
        phase = np.exp(2j * np.pi * self.frequencies[..., None] * t_arr.reshape(-1))
        values = np.einsum("ko,kot->kt", self.weights, phase)
        if t_arr.ndim == 0:
            return values[:, 0]
        return values

    def advanced(self, steps: int) -> "TapSet":
        return replace(self, time=self.time + int(steps))


@dataclass(frozen=True)
class LinkChannel:
    """One device-to-antenna link: large-scale amplitude applied to the fading taps."""

    large_scale: LargeScaleGain
    small_scale: TapSet

    @property
    def amplitude(self) -> float:
        return self.large_scale.amplitude

    @property
    def taps(self) -> np.ndarray:
        """Composite taps at the current fading time."""
        return self.amplitude * self.small_scale.taps

    def taps_at(self, t) -> np.ndarray:
        return self.amplitude * self.small_scale.taps_at(t)


@dataclass(frozen=True)
class LinkArray:
    """
    Every (device, antenna) link of a frame held as stacked oscillator arrays.

    Large-scale amplitudes are folded into the weights, so tap k of link (m, n)
    at absolute time t is
    sum_o weights[m, n, k, o] * exp(2j*pi*frequencies[m, n, k, o]*t).
    """

    weights: np.ndarray  # (M, N, n_taps, n_oscillators) complex
    frequencies: np.ndarray  # (M, N, n_taps, n_oscillators), cycles per sample

    @classmethod
    def from_links(cls, channels) -> "LinkArray":
        """Stack a nested channels[m][n] list of LinkChannel; shorter oscillator sets are zero-padded."""
        links = [link for row in channels for link in row]
        shape = (len(channels), len(channels[0]))
        n_taps = max(link.small_scale.n_taps for link in links)
        n_osc = max(link.small_scale.weights.shape[1] for link in links)
        weights = np.zeros(shape + (n_taps, n_osc), dtype=complex)
        frequencies = np.zeros(shape + (n_taps, n_osc))
        for i, link in enumerate(links):
            m, n = divmod(i, shape[1])
            state = link.small_scale
            k, o = state.weights.shape
            weights[m, n, :k, :o] = link.amplitude * state.weights
            frequencies[m, n, :k, :o] = state.frequencies
        return cls(weights=weights, frequencies=frequencies)

    @property
    def n_devices(self) -> int:
        return int(self.weights.shape[0])

    @property
    def n_antennas(self) -> int:
        return int(self.weights.shape[1])

    @property
    def n_taps(self) -> int:
        return int(self.weights.shape[2])

    def taps_at(self, t) -> np.ndarray:
        """
        Composite taps of every link at absolute sample time(s).

        Returns:
            (M, N, n_taps) for a scalar time, (M, N, n_taps, len(t)) for an array
        """
        t_arr = np.asarray(t, dtype=float)
        values = np.stack(
            [np.einsum("mnko,mnko->mnk", self.weights, np.exp(2j * np.pi * self.frequencies * ti))
             for ti in t_arr.reshape(-1)],
            axis=-1,
        )
        if t_arr.ndim == 0:
            return values[..., 0]
        return values

    def taps_per_device(self, times) -> np.ndarray:
        """Taps of device m's links at times[m], shape (M, N, n_taps)."""
        t = np.asarray(times, dtype=float).reshape(-1, 1, 1, 1)
        return np.einsum("mnko,mnko->mnk", self.weights, np.exp(2j * np.pi * self.frequencies * t))

    def device(self, m: int) -> "LinkArray":
        """The links of device m alone, as a one-device array."""
        return LinkArray(weights=self.weights[m:m + 1], frequencies=self.frequencies[m:m + 1])

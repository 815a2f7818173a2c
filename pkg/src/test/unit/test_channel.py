"""Tests for fading taps, Doppler evolution and the multi-antenna MAC."""

import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal
from scipy import special, stats

from src.main.python.core.exceptions import ContractViolation, DomainError
from src.main.python.models import LargeScaleGain, LinkArray, LinkChannel, TapSet
from src.main.python.services.channel import (
    apply_row_leakage,
    doppler_leakage,
    evolve_doppler,
    gen_link_channels,
    gen_taps,
    mac_superpose,
    power_delay_profile,
    resolved_profile,
    resolved_shifts,
    tap_tensor,
)

UNIT_GAIN = LargeScaleGain(pathloss_db=0.0, shadowing_db=0.0)


def identity_link() -> LinkChannel:
    return LinkChannel(UNIT_GAIN, TapSet.from_taps([1.0]))


class TestPowerDelayProfile:
    def test_exponential_3db(self):
        assert_allclose(power_delay_profile(4, "exponential", 3.0),
                        [0.532405, 0.266833, 0.133735, 0.067026], atol=1e-5)

    @pytest.mark.parametrize("kind", ["exponential", "uniform"])
    def test_normalized(self, kind):
        assert power_delay_profile(6, kind).sum() == pytest.approx(1.0)

    def test_unknown_kind(self):
        with pytest.raises(DomainError):
            power_delay_profile(4, "lognormal")


class TestGenTaps:
    def test_flat_rayleigh_envelope(self):
        """|h|^2 of a single unit tap is exponential with mean 1."""
        rng = np.random.default_rng(11)
        power = np.array([abs(gen_taps(1, [1.0], rng).taps[0]) ** 2 for _ in range(5000)])
        assert stats.kstest(power, "expon").pvalue > 0.001

    def test_unit_total_power(self):
        rng = np.random.default_rng(12)
        profile = power_delay_profile(4, "uniform")
        total = np.mean([np.sum(np.abs(gen_taps(4, profile, rng).taps) ** 2) for _ in range(20000)])
        assert total == pytest.approx(1.0, rel=0.03)

    def test_per_tap_variance_follows_profile(self):
        rng = np.random.default_rng(13)
        profile = power_delay_profile(4)
        taps = np.array([gen_taps(4, profile, rng).taps for _ in range(20000)])
        assert_allclose(np.mean(np.abs(taps) ** 2, axis=0), profile, rtol=0.06)

    @pytest.mark.parametrize("profile", [[], [0.5, 0.6], [1.2, -0.2]])
    def test_invalid_profile(self, profile):
        with pytest.raises(DomainError):
            gen_taps(2, profile, np.random.default_rng(0))


class TestDoppler:
    def test_static_channel(self):
        state = gen_taps(4, power_delay_profile(4), np.random.default_rng(14), fd_norm=0.0)
        assert_array_equal(evolve_doppler(state, 1000).taps, state.taps)

    def test_jakes_autocorrelation(self):
        """Ensemble autocorrelation of one tap follows J0(2 pi fd n)."""
        rng = np.random.default_rng(15)
        lags = np.array([0, 5, 10, 25, 40])
        series = np.array([gen_taps(1, [1.0], rng, fd_norm=0.01).taps_at(lags)[0] for _ in range(20000)])
        rho = np.mean(series[:, :1].conj() * series, axis=0).real
        assert_allclose(rho, special.j0(2 * np.pi * 0.01 * lags), atol=0.05)

    def test_decorrelates_at_high_doppler(self):
        rng = np.random.default_rng(16)
        series = np.array([gen_taps(1, [1.0], rng, fd_norm=0.5).taps_at([0, 101])[0] for _ in range(20000)])
        rho = np.mean(series[:, 0].conj() * series[:, 1]).real
        assert abs(rho) < 0.05 + abs(special.j0(2 * np.pi * 0.5 * 101))

    def test_marginal_variance_is_stationary(self):
        rng = np.random.default_rng(17)
        series = np.array([gen_taps(1, [1.0], rng, fd_norm=0.05).taps_at([0, 300])[0] for _ in range(20000)])
        assert_allclose(np.mean(np.abs(series) ** 2, axis=0), [1.0, 1.0], rtol=0.05)

    def test_evolve_matches_time_shift(self):
        state = gen_taps(4, power_delay_profile(4), np.random.default_rng(18), fd_norm=0.02)
        assert_allclose(evolve_doppler(state, 37).taps, state.taps_at(37))

    def test_leakage_formula(self):
        assert doppler_leakage(0.01, 11) == pytest.approx((np.pi * 0.11) ** 2 / 6)
        assert doppler_leakage(0.0, 11) == 0.0

    def test_leakage_is_capped_at_half(self):
        assert doppler_leakage(0.2, 41) == 0.5


class TestResolvedProfile:
    def test_wideband_mode_keeps_every_tap(self):
        profile = power_delay_profile(4)
        assert_allclose(resolved_profile(profile, 1), profile)

    def test_two_subbands_merge_tap_pairs(self):
        profile = power_delay_profile(4)
        merged = resolved_profile(profile, 2)
        assert_allclose(merged, [profile[0] + profile[1], profile[2] + profile[3], 0.0, 0.0])
        assert merged.sum() == pytest.approx(1.0)

    def test_narrow_subbands_are_flat(self):
        assert_allclose(resolved_profile(power_delay_profile(4), 8), [1.0, 0.0, 0.0, 0.0])

    def test_shifts(self):
        assert_array_equal(resolved_shifts(4, 1), [0, 1, 2, 3])
        assert_array_equal(resolved_shifts(4, 2), [0, 0, 1, 1])
        assert_array_equal(resolved_shifts(4, 5), [0, 0, 0, 0])

    def test_invalid_subband_count(self):
        with pytest.raises(DomainError):
            resolved_profile([1.0], 0)


class TestLinkArray:
    def test_matches_per_link_taps(self):
        rng = np.random.default_rng(24)
        gain = LargeScaleGain(pathloss_db=10.0, shadowing_db=2.0)
        links = [[LinkChannel(gain, gen_taps(4, power_delay_profile(4), rng, 0.02))
                  for _ in range(3)] for _ in range(2)]
        times = np.array([0, 7, 30])

        array = LinkArray.from_links(links)

        for m in range(2):
            for n in range(3):
                assert_allclose(array.taps_at(times)[m, n], links[m][n].taps_at(times), atol=1e-12)
                assert_allclose(array.taps_at(12)[m, n], links[m][n].taps_at(12), atol=1e-12)

    def test_taps_per_device(self):
        rng = np.random.default_rng(25)
        array = LinkArray.from_links(
            [[LinkChannel(UNIT_GAIN, gen_taps(2, [0.5, 0.5], rng, 0.05)) for _ in range(2)] for _ in range(3)])
        times = [0, 4, 9]

        per_device = array.taps_per_device(times)

        assert per_device.shape == (3, 2, 2)
        for m, t in enumerate(times):
            assert_allclose(per_device[m], array.taps_at(t)[m], atol=1e-12)

    def test_generated_links(self):
        gains = [UNIT_GAIN, LargeScaleGain(pathloss_db=20.0, shadowing_db=0.0)]
        rngs = [np.random.default_rng(s) for s in (26, 27)]

        array = gen_link_channels(gains, 5, power_delay_profile(4), rngs, 0.01, n_oscillators=8)

        assert array.weights.shape == (2, 5, 4, 8)
        assert (array.n_devices, array.n_antennas, array.n_taps) == (2, 5, 4)

    def test_device_draws_do_not_depend_on_the_others(self):
        profile = power_delay_profile(4)
        alone = gen_link_channels([UNIT_GAIN], 3, profile, [np.random.default_rng(28)])
        pair = gen_link_channels([UNIT_GAIN, UNIT_GAIN], 3, profile,
                                 [np.random.default_rng(28), np.random.default_rng(29)])
        assert_allclose(pair.weights[0], alone.weights[0])

    def test_large_scale_amplitude_is_folded_in(self):
        profile = power_delay_profile(4)
        unit = gen_link_channels([UNIT_GAIN], 2, profile, [np.random.default_rng(30)])
        weak = gen_link_channels([LargeScaleGain(pathloss_db=20.0, shadowing_db=0.0)], 2, profile,
                                 [np.random.default_rng(30)])
        assert_allclose(weak.weights, 0.1 * unit.weights)

    def test_tap_tensor_repeats_static_taps(self):
        array = gen_link_channels([UNIT_GAIN], 2, power_delay_profile(4), [np.random.default_rng(31)])
        tensor = tap_tensor(array, None, 6)
        assert tensor.shape == (1, 2, 4, 6)
        assert_allclose(tensor[..., 5], array.taps_at(0.0))


class TestMacSuperpose:
    def test_identity_channel(self):
        frame = np.random.default_rng(19).standard_normal((1, 1, 16)) + 0j
        channels = [[identity_link() for _ in range(3)]]

        received = mac_superpose(frame, channels, 0.0, None)

        assert received.shape == (3, 1, 16)
        for n in range(3):
            assert_allclose(received[n], frame[0])

    def test_silent_device_changes_nothing(self):
        rng = np.random.default_rng(20)
        profile = power_delay_profile(4)
        a = [LinkChannel(UNIT_GAIN, gen_taps(4, profile, rng)) for _ in range(2)]
        b = [LinkChannel(UNIT_GAIN, gen_taps(4, profile, rng)) for _ in range(2)]
        frame = rng.standard_normal((1, 2, 12)) + 1j * rng.standard_normal((1, 2, 12))

        alone = mac_superpose(frame, [a], 0.0, None)
        with_silent = mac_superpose(np.concatenate([frame, np.zeros_like(frame)]), [a, b], 0.0, None)

        assert_allclose(with_silent, alone)

    def test_linearity(self):
        rng = np.random.default_rng(21)
        channels = [[LinkChannel(UNIT_GAIN, gen_taps(4, power_delay_profile(4), rng, 0.01))]
                    for _ in range(2)]
        x = rng.standard_normal((2, 1, 20)) + 0j
        y = rng.standard_normal((2, 1, 20)) + 0j
        times = np.arange(20)

        total = mac_superpose(x + y, channels, 0.0, None, sample_times=times)
        parts = mac_superpose(x, channels, 0.0, None, sample_times=times) + \
            mac_superpose(y, channels, 0.0, None, sample_times=times)

        assert_allclose(total, parts, atol=1e-12)

    def test_convolution_with_large_scale_gain(self):
        gain = LargeScaleGain(pathloss_db=20.0, shadowing_db=0.0)
        link = LinkChannel(gain, TapSet.from_taps([1.0, 0.5j]))
        frame = np.zeros((1, 1, 6), dtype=complex)
        frame[0, 0, 1] = 2.0

        received = mac_superpose(frame, [[link]], 0.0, None)

        assert_allclose(received[0, 0], 0.1 * np.array([0, 2.0, 1.0j, 0, 0, 0]))

    def test_noise_power(self):
        frame = np.zeros((1, 1, 200_000), dtype=complex)
        received = mac_superpose(frame, [[identity_link()]], 0.25, np.random.default_rng(22))
        assert np.mean(np.abs(received) ** 2) == pytest.approx(0.25, rel=0.02)

    def test_components(self):
        rng = np.random.default_rng(23)
        frames = rng.standard_normal((2, 1, 8)) + 0j
        channels = [[identity_link()], [identity_link()]]

        received, components = mac_superpose(frames, channels, 0.0, None, return_components=True)

        assert components.shape == (2, 1, 1, 8)
        assert_allclose(components.sum(axis=0), received)

    def test_block_frames_match_full_convolution(self):
        rng = np.random.default_rng(32)
        channels = gen_link_channels([UNIT_GAIN] * 3, 2, power_delay_profile(4),
                                     [np.random.default_rng(s) for s in (33, 34, 35)], 0.02)
        frames = np.zeros((3, 2, 15), dtype=complex)
        frames[0, 0, 0:5] = rng.standard_normal(5)
        frames[1, 1, 5:10] = rng.standard_normal(5)
        frames[2, 0, 10:15] = rng.standard_normal(5)
        times = np.repeat([0, 10, 20], 5)

        received, components = mac_superpose(frames, channels, 0.0, None, sample_times=times,
                                              leakage=0.1, return_components=True)

        taps = tap_tensor(channels, times, 15)
        expected = np.zeros_like(components)
        for k in range(4):
            delayed = np.zeros_like(frames)
            delayed[..., k:] = frames[..., :15 - k]
            expected += taps[:, :, k, None, :] * delayed[:, None]
        expected = apply_row_leakage(expected, 0.1)
        assert_allclose(components, expected, atol=1e-12)
        assert_allclose(received, expected.sum(axis=0), atol=1e-12)

    def test_missing_channel(self):
        with pytest.raises(ContractViolation):
            mac_superpose(np.zeros((2, 1, 4)), [[identity_link()]], 0.0, None)

    def test_sample_time_mismatch(self):
        with pytest.raises(ContractViolation):
            mac_superpose(np.zeros((1, 1, 4)), [[identity_link()]], 0.0, None, sample_times=np.arange(3))

    def test_noise_needs_a_random_source(self):
        with pytest.raises(ContractViolation):
            mac_superpose(np.zeros((1, 1, 4)), [[identity_link()]], 1.0, None)


class TestRowLeakage:
    def test_no_leakage_is_identity(self):
        signal = np.ones((3, 4), dtype=complex)
        assert apply_row_leakage(signal, 0.0) is signal

    def test_neighbours_receive_amplitude(self):
        signal = np.zeros((3, 2), dtype=complex)
        signal[1] = 1.0

        out = apply_row_leakage(signal, 0.04)

        assert_allclose(out[:, 0], [0.2, 1.0, 0.2])

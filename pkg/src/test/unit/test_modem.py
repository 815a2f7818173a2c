"""Tests for Gray mapping, stream splitting and FSK detection."""

import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal

from src.main.python.core.exceptions import ConfigurationError, ContractViolation
from src.main.python.services.modem import (
    demodulate,
    fsk_waveform,
    make_constellation,
    merge_streams,
    modulate,
    slice_symbols,
    split_stream,
    square_law_detect,
)


def hamming(a: int, b: int) -> int:
    return bin(int(a) ^ int(b)).count("1")


class TestConstellations:
    def test_bpsk_points(self):
        c = make_constellation("psk", 2)
        assert_allclose(c.points, [1.0, -1.0], atol=1e-12)
        assert_array_equal(modulate([0, 1, 1], c), c.points[[0, 1, 1]])

    def test_qpsk_neighbours_differ_in_one_bit(self):
        c = make_constellation("psk", 4)
        assert_allclose(np.abs(c.points), 1.0)
        assert_allclose(np.angle(c.points[0]), np.pi / 4)
        for i in range(4):
            assert hamming(c.labels[i], c.labels[(i + 1) % 4]) == 1

    def test_qam16_unit_energy_and_gray(self):
        c = make_constellation("qam", 16)
        assert c.average_energy == pytest.approx(1.0)
        spacing = np.min(np.abs(c.points[1:] - c.points[0]))
        for i in range(16):
            neighbours = np.where(np.isclose(np.abs(c.points - c.points[i]), spacing))[0]
            assert len(neighbours) >= 2
            for j in neighbours:
                assert hamming(c.labels[i], c.labels[j]) == 1

    def test_noiseless_bits_survive(self):
        rng = np.random.default_rng(0)
        for kind, order in (("psk", 2), ("psk", 4), ("psk", 8), ("qam", 16)):
            c = make_constellation(kind, order)
            bits = rng.integers(0, 2, 60 * c.bits_per_symbol)
            assert_array_equal(demodulate(modulate(bits, c), c), bits)

    def test_unmodulated_carrier(self):
        c = make_constellation("psk", 1)
        assert c.bits_per_symbol == 0
        assert_allclose(modulate([], c), [1.0])
        with pytest.raises(ContractViolation):
            modulate([1], c)

    def test_slicer_ties_go_to_lowest_index(self):
        c = make_constellation("psk", 2)
        assert slice_symbols(0.0, c)[0] == 0

    @pytest.mark.parametrize("kind,order", [("psk", 3), ("qam", 8), ("fsk", 1), ("ask", 4)])
    def test_invalid_constellations(self, kind, order):
        with pytest.raises(ConfigurationError):
            make_constellation(kind, order)

    def test_bit_count_must_fill_symbols(self):
        with pytest.raises(ContractViolation):
            modulate([0, 1, 1], make_constellation("psk", 4))


class TestStreams:
    def test_split_takes_k1_then_k2(self):
        first, second = split_stream([1, 0, 1, 1, 0, 1], (2, 1))
        assert_array_equal(first, [1, 0, 1, 0])
        assert_array_equal(second, [1, 1])

    def test_merge_restores_order(self):
        bits = np.random.default_rng(1).integers(0, 2, 30)
        first, second = split_stream(bits, (2, 3))
        assert_array_equal(merge_streams(first, second, (2, 3)), bits)

    def test_single_stream(self):
        first, second = split_stream([1, 0, 1], (0, 1))
        assert first.size == 0
        assert_array_equal(merge_streams(first, second, (0, 1)), [1, 0, 1])

    def test_split_length_mismatch(self):
        with pytest.raises(ContractViolation):
            split_stream([1, 0, 1, 1], (2, 1))


class TestFsk:
    def test_tones_are_orthogonal(self):
        waves = np.stack([fsk_waveform(k, 16) for k in range(4)])
        assert_allclose(waves @ waves.conj().T, 16 * np.eye(4), atol=1e-9)

    def test_fsk_points_are_tone_indices(self):
        c = make_constellation("fsk", 4)
        assert_array_equal(c.points, np.arange(4))
        assert c.is_fsk and c.average_energy == 1.0

    def test_square_law_picks_strongest_tone(self):
        assert square_law_detect([0.1, 0.9, 0.2, 0.3]) == 1

    def test_energy_summed_over_antennas(self):
        assert square_law_detect([[1.0, 0.0], [0.0, 2.0]]) == 1

    def test_tie_goes_to_lowest_tone(self):
        assert square_law_detect([[1.0, 1.0, 0.0, 0.0]]) == 0

    def test_needs_two_tones(self):
        with pytest.raises(ContractViolation):
            square_law_detect([[1.0]])

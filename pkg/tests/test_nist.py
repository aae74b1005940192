"""Tests for the SP 800-22 subset and the fingerprint bitstream helpers."""

from itertools import product

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from radioprint.nist import (
    TEST_NAMES,
    NistConfig,
    approximate_entropy_p,
    block_frequency_p,
    cumulative_sums_p,
    dft_p,
    frequency_p,
    longest_run_p,
    nist_subset,
    puf_bitstream,
    quantize_to_bits,
    runs_p,
    serial_p,
)
from radioprint.params import ParamSpec, sample_fleet
from radioprint.seeds import rng_for

# 128-bit sequence from the SP 800-22 rev 1a longest-run worked example
LONGEST_RUN_EXAMPLE = (
    "11001100000101010110110001001100111000000000001001"
    "00110101010001000100111101011010000000110101111100"
    "1100111001101101100010110010"
)


class TestPublishedExamples:
    """Worked examples from SP 800-22 rev 1a, matched to the printed digits."""

    def test_frequency(self):
        assert frequency_p("1011010101") == pytest.approx(0.527089, abs=1e-6)

    def test_block_frequency(self):
        assert block_frequency_p("0110011010", 3) == pytest.approx(0.801252, abs=1e-6)

    def test_runs(self):
        assert runs_p("1001101011") == pytest.approx(0.147232, abs=1e-6)

    def test_longest_run(self):
        # exact with the dyadic M=8 category probabilities (55/94/59/48 over 256)
        assert longest_run_p(LONGEST_RUN_EXAMPLE) == pytest.approx(0.180609, abs=1e-6)

    def test_approximate_entropy(self):
        assert approximate_entropy_p("0100110101", 3) == pytest.approx(0.261961, abs=1e-6)

    def test_serial(self):
        p1, p2 = serial_p("0011011101", 3)
        assert p1 == pytest.approx(0.808792, abs=1e-6)
        assert p2 == pytest.approx(0.670320, abs=1e-6)


class TestRegressionValues:
    """Implementation-stability constants, cross-checked by the tests below."""

    def test_cumulative_sums(self):
        assert cumulative_sums_p("1011010101") == pytest.approx(0.9409627014, abs=1e-9)
        # this walk and its reversal share the same maximum excursion
        assert cumulative_sums_p("1011010101", reverse=True) == pytest.approx(
            0.9409627014, abs=1e-9
        )

    def test_dft(self):
        assert dft_p("1001010011") == pytest.approx(0.468160, abs=1e-6)


def _exact_excursion_tail(n: int) -> dict[int, float]:
    """P(max |partial sum| >= z) by enumerating all 2^n walks."""
    counts: dict[int, int] = {}
    for bits in product((0, 1), repeat=n):
        steps = np.where(np.array(bits) == 1, 1, -1)
        z = int(np.max(np.abs(np.cumsum(steps))))
        counts[z] = counts.get(z, 0) + 1
    tail = {}
    acc = 0
    for z in sorted(counts, reverse=True):
        acc += counts[z]
        tail[z] = acc / 2.0**n
    return tail


class TestCumulativeSumsAgainstEnumeration:
    """The closed-form tail is asymptotic; it must track the exact one."""

    def test_tracks_exact_tail(self):
        # max excursion 3: climbs to 3 then oscillates between 2 and 3
        p = cumulative_sums_p("11101010101010")
        assert p == pytest.approx(_exact_excursion_tail(14)[3], abs=5e-3)

    def test_error_shrinks_with_n(self):
        gap10 = abs(cumulative_sums_p("1110101010") - _exact_excursion_tail(10)[3])
        gap14 = abs(cumulative_sums_p("11101010101010") - _exact_excursion_tail(14)[3])
        assert gap14 < gap10


class TestAnalyticSequences:
    def test_alternating_is_balanced(self):
        assert frequency_p("01" * 500) == pytest.approx(1.0)

    def test_alternating_fails_runs(self):
        assert runs_p("01" * 500) < 1e-100

    def test_alternating_fails_dft(self):
        # all spectral energy in one bin starves the rest below threshold
        assert dft_p("01" * 500) < 1e-6

    def test_all_zeros_fails_frequency(self):
        assert frequency_p("0" * 1000) < 1e-100

    def test_all_zeros_fails_runs_prerequisite(self):
        assert runs_p("0" * 1000) == 0.0

    def test_rejects_non_binary(self):
        with pytest.raises(ValueError):
            frequency_p("0120")
        with pytest.raises(ValueError):
            frequency_p("")

    def test_serial_needs_m_of_three(self):
        with pytest.raises(ValueError):
            serial_p("0011011101", 2)


class TestQuantizer:
    def test_three_level_example(self):
        out = quantize_to_bits(np.array([0.0, 0.5, 1.0]), 2)
        np.testing.assert_array_equal(out, [0, 0, 1, 0, 1, 1])

    def test_output_length(self):
        out = quantize_to_bits(np.linspace(0, 1, 7), 16)
        assert out.shape == (7 * 16,)
        assert out.dtype == np.uint8

    def test_codes_monotone_in_value(self):
        v = np.array([0.1, 0.9, 0.3, 0.7])
        out = quantize_to_bits(v, 8).reshape(4, 8)
        weights = 1 << np.arange(7, -1, -1)
        codes = out @ weights
        assert np.all(np.argsort(codes) == np.argsort(v))

    def test_constant_batch_raises(self):
        with pytest.raises(ValueError, match="constant"):
            quantize_to_bits(np.ones(5), 8)

    def test_bit_width_bounds(self):
        with pytest.raises(ValueError):
            quantize_to_bits(np.array([0.0, 1.0]), 0)
        with pytest.raises(ValueError):
            quantize_to_bits(np.array([0.0, 1.0]), 33)

    @given(
        values=st.lists(st.floats(-1e6, 1e6), min_size=2, max_size=40).filter(
            lambda v: max(v) > min(v)
        ),
        bits=st.integers(min_value=1, max_value=16),
    )
    def test_extremes_span_the_code_range(self, values, bits):
        v = np.array(values)
        out = quantize_to_bits(v, bits).reshape(v.size, bits)
        codes = out @ (1 << np.arange(bits - 1, -1, -1))
        assert codes[np.argmin(v)] == 0
        assert codes[np.argmax(v)] == (1 << bits) - 1
        assert set(np.unique(out)) <= {0, 1}


class TestBitstream:
    def test_sixteen_bits_per_device(self):
        fleet = sample_fleet(50, ParamSpec(), seed=3)
        assert puf_bitstream(fleet).shape == (800,)

    def test_deterministic(self):
        fleet = sample_fleet(10, ParamSpec(), seed=3)
        np.testing.assert_array_equal(puf_bitstream(fleet), puf_bitstream(fleet))

    def test_needs_two_devices(self):
        fleet = sample_fleet(2, ParamSpec(), seed=3)
        with pytest.raises(ValueError):
            puf_bitstream(fleet[:1])

    def test_rank_normalization_balances_ones(self):
        fleet = sample_fleet(100, ParamSpec(), seed=3)
        assert abs(puf_bitstream(fleet).mean() - 0.5) < 0.05


class TestRecordHandling:
    def test_partial_trailing_record_dropped(self):
        bits = rng_for(1, "records").integers(0, 2, size=25_000, dtype=np.uint8)
        res = nist_subset(bits, NistConfig(record_bits=10_000))
        assert res["frequency"].n_records == 2

    def test_result_keys_are_the_eight_tests(self):
        bits = rng_for(1, "records").integers(0, 2, size=10_000, dtype=np.uint8)
        assert list(nist_subset(bits)) == TEST_NAMES
        assert len(TEST_NAMES) == 8

    def test_too_few_bits_raises(self):
        with pytest.raises(ValueError):
            nist_subset(np.zeros(9_999, dtype=np.uint8))

    def test_record_bits_minimum(self):
        with pytest.raises(ValueError):
            NistConfig(record_bits=50)

    def test_short_records_skip_infeasible_tests(self):
        bits = rng_for(2, "records").integers(0, 2, size=10_000, dtype=np.uint8)
        res = nist_subset(bits, NistConfig(record_bits=100))
        for name in ("block_frequency", "longest_run", "approximate_entropy",
                     "serial", "dft"):
            assert res[name].skipped
            assert not res[name].passed
            assert res[name].n_records == 0
        for name in ("frequency", "runs", "cumulative_sums"):
            assert not res[name].skipped
            assert res[name].n_records == 100


class TestCalibration:
    def test_prng_stream_passes_all_tests(self):
        rng = rng_for(0xCA11B, "nist-calibration")
        bits = rng.integers(0, 2, size=100 * 100_000, dtype=np.uint8)
        res = nist_subset(bits, NistConfig(record_bits=100_000))
        for name, r in res.items():
            assert not r.skipped, name
            assert r.n_records == 100, name
            assert r.pass_rate >= 0.96, (name, r.pass_rate)

    def test_fleet_bitstream_passes_all_tests(self):
        fleet = sample_fleet(1000, ParamSpec(), seed=42)
        res = nist_subset(puf_bitstream(fleet), NistConfig())
        for name, r in res.items():
            assert r.passed, (name, r.pass_rate)

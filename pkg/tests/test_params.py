import numpy as np
import pytest

from radioprint.params import (
    Dist,
    ParamSpec,
    TxProfile,
    load_fleet,
    sample_channel,
    sample_fleet,
    sample_truncated_normal,
    save_fleet,
)
from radioprint.seeds import rng_for

# std of a standard normal truncated to +-3 sigma (scipy.stats.truncnorm(-3, 3).std())
TRUNC3_STD = 0.9865783926


def test_defaults_match_the_radio_model():
    spec = ParamSpec()
    assert spec.carrier_frequency_hz == 2.412e9
    assert spec.lo_offset_ppm == Dist(0.0, 8.3)
    assert spec.iq_gain_imbalance_db == Dist(0.0, 1.0)
    assert spec.iq_phase_imbalance_deg == Dist(0.0, 5.0)
    assert spec.pa_backoff_db == Dist(30.0, 1.0)
    assert spec.eb_n0_db == Dist(15.0, 2.0)
    assert spec.doppler_hz == Dist(0.0, 1.0)
    assert spec.channel_gain_db_range == (-30.0, 0.0)
    assert spec.lo_offset_std_hz() == pytest.approx(20019.6)


def test_truncated_normal_respects_bounds():
    rng = rng_for(0, "trunc")
    x = sample_truncated_normal(rng, Dist(10.0, 2.0), size=50_000)
    assert x.min() >= 4.0
    assert x.max() <= 16.0


def test_truncated_normal_moments():
    # rejection to +-3 sigma shrinks the std by the truncnorm factor
    rng = rng_for(1, "trunc")
    x = sample_truncated_normal(rng, Dist(0.0, 8.3), size=200_000)
    assert np.mean(x) == pytest.approx(0.0, abs=0.06)
    assert np.std(x) == pytest.approx(8.3 * TRUNC3_STD, rel=0.01)


def test_truncated_normal_zero_std_is_exact():
    rng = rng_for(2, "trunc")
    assert sample_truncated_normal(rng, Dist(5.0, 0.0)) == 5.0
    np.testing.assert_array_equal(
        sample_truncated_normal(rng, Dist(5.0, 0.0), size=4), np.full(4, 5.0)
    )


def test_fleet_device_independent_of_fleet_size():
    spec = ParamSpec()
    small = sample_fleet(10, spec, seed=7)
    large = sample_fleet(200, spec, seed=7)
    assert small == large[:10]


def test_fleet_population_statistics():
    spec = ParamSpec()
    fleet = sample_fleet(2000, spec, seed=3)
    lo = np.array([tx.lo_offset_ppm for tx in fleet])
    backoff = np.array([tx.pa_backoff_db for tx in fleet])
    assert np.std(lo) == pytest.approx(8.3 * TRUNC3_STD, rel=0.05)
    assert np.mean(backoff) == pytest.approx(30.0, abs=0.1)
    assert np.abs(lo).max() <= 3 * 8.3


def test_fleet_devices_are_distinct():
    fleet = sample_fleet(50, ParamSpec(), seed=11)
    assert len({tx.lo_offset_ppm for tx in fleet}) == 50
    assert [tx.device_id for tx in fleet] == list(range(50))


def test_channel_draws_cover_the_gain_range():
    spec = ParamSpec()
    gains = [sample_channel(spec, 5, "env", k).gain_db for k in range(2000)]
    gains = np.array(gains)
    assert gains.min() >= -30.0 and gains.max() <= 0.0
    assert np.mean(gains) == pytest.approx(-15.0, abs=0.6)
    ch = sample_channel(spec, 5, "env", 0)
    assert ch == sample_channel(spec, 5, "env", 0)
    assert ch != sample_channel(spec, 5, "env", 1)


def test_fleet_round_trip_is_exact(tmp_path):
    fleet = sample_fleet(17, ParamSpec(), seed=23)
    path = tmp_path / "fleet.txt"
    save_fleet(path, fleet)
    assert load_fleet(path) == fleet


def test_load_fleet_rejects_malformed_lines(tmp_path):
    path = tmp_path / "bad.txt"
    path.write_text("0 1.0 2.0\n")
    with pytest.raises(ValueError, match="expected 5 fields"):
        load_fleet(path)


def test_sample_fleet_rejects_empty():
    with pytest.raises(ValueError):
        sample_fleet(0, ParamSpec(), seed=0)

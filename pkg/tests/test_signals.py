import numpy as np
import pytest

from radioprint.signals import FrameConfig, IqFrame, load_frame, rms, save_frame


def test_rms_known_values():
    assert rms(np.array([3.0, 4.0])) == pytest.approx(np.sqrt(12.5))
    assert rms(np.array([1j, -1j, 1, -1])) == pytest.approx(1.0)


def test_frame_config_defaults():
    cfg = FrameConfig()
    assert cfg.sample_rate_hz == 8e6
    assert cfg.frame_bits == 30_000
    assert cfg.carrier_frequency_hz == 2.412e9


@pytest.mark.parametrize(
    "kwargs",
    [
        {"samples_per_symbol": 2},
        {"rrc_span_symbols": 9},
        {"frame_bits": 30_001},
    ],
)
def test_frame_config_validation(kwargs):
    with pytest.raises(ValueError):
        FrameConfig(**kwargs)


def test_iq_frame_rejects_fractional_sps():
    with pytest.raises(ValueError):
        IqFrame(np.zeros(8), sample_rate_hz=3e6, symbol_rate_hz=1e6)


def test_with_samples_accumulates_delay():
    frame = IqFrame(np.zeros(64), 8e6, 1e6, delay_samples=40)
    out = frame.with_samples(np.ones(80), extra_delay=40)
    assert out.delay_samples == 80
    assert frame.delay_samples == 40  # original untouched
    assert out.samples_per_symbol == 8


def test_frame_round_trip_exact(tmp_path):
    rng = np.random.default_rng(0)
    frame = IqFrame(
        rng.normal(size=257) + 1j * rng.normal(size=257), 8e6, 1e6, delay_samples=40
    )
    path = tmp_path / "frame.iq"
    save_frame(path, frame)
    back = load_frame(path)
    np.testing.assert_array_equal(back.samples, frame.samples)
    assert back.sample_rate_hz == frame.sample_rate_hz
    assert back.symbol_rate_hz == frame.symbol_rate_hz
    assert back.delay_samples == frame.delay_samples


def test_load_frame_detects_truncation(tmp_path):
    frame = IqFrame(np.ones(32, dtype=complex), 8e6, 1e6)
    path = tmp_path / "frame.iq"
    save_frame(path, frame)
    data = path.read_bytes()
    path.write_bytes(data[:-16])
    with pytest.raises(ValueError):
        load_frame(path)

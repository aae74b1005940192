import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from radioprint.metrics import (
    MEASUREMENT_SIGMA,
    FarFrrPoint,
    compute_distances,
    crp_count,
    false_detection_probability,
    far_frr_curve,
    feature_scales,
    feature_vector_from_profile,
    geo_mean_ppm,
    guess_probability_log2,
    resolvable_features,
    wilson_interval,
)
from radioprint.mlp import MlpModel
from radioprint.params import Dist, ParamSpec, TxProfile, sample_fleet
from radioprint.receiver import DEVICE_FEATURE_NAMES, FeatureVector
from radioprint.signals import FrameConfig


def _zero_spread_spec():
    z = lambda m: Dist(m, 0.0)
    return ParamSpec(
        lo_offset_ppm=z(0.0),
        iq_gain_imbalance_db=z(0.0),
        iq_phase_imbalance_deg=z(0.0),
        pa_backoff_db=z(30.0),
    )


class TestFeatureScales:
    def test_spec_entries_pass_through(self):
        nominal, sigma = feature_scales(ParamSpec())
        assert sigma[0] == 8.3
        assert sigma[1] == 1.0
        assert sigma[2] == 5.0
        assert nominal[0] == nominal[1] == nominal[2] == 0.0

    def test_ring_spread_is_below_resolution(self):
        # the modulator imbalance map is linear, so it scales both rings
        # identically and the ring ratio carries no population spread
        _, sigma = feature_scales(ParamSpec())
        assert sigma[3] < MEASUREMENT_SIGMA[3]

    def test_distortion_spread_is_resolvable(self):
        _, sigma = feature_scales(ParamSpec())
        assert 0.02 < sigma[4] < 0.05
        assert sigma[4] > MEASUREMENT_SIGMA[4]

    def test_nominal_profile_maps_to_clean_features(self):
        nominal, _ = feature_scales(ParamSpec())
        assert nominal[3] == pytest.approx(1.0, abs=1e-9)
        assert nominal[4] == pytest.approx(0.0, abs=1e-9)

    def test_default_resolvable_mask(self):
        mask = resolvable_features(ParamSpec())
        assert mask.tolist() == [True, True, True, False, True]


class TestProfileFeatures:
    def test_imbalance_read_back_exactly(self):
        fv = feature_vector_from_profile(TxProfile(0, 8.3, 1.0, 5.0, 30.0))
        assert fv.est_freq_offset_ppm == 8.3
        assert fv.est_gain_imbalance_db == pytest.approx(1.0, abs=1e-6)
        assert fv.est_phase_imbalance_deg == pytest.approx(5.0, abs=1e-6)
        assert fv.est_ring_compression == pytest.approx(1.0, abs=1e-9)

    def test_residual_distortion_after_alignment(self):
        # the mean rotation hidden inside the imbalance map is removed by
        # carrier alignment, leaving roughly half the raw displacement
        fv = feature_vector_from_profile(TxProfile(0, 0.0, 1.0, 5.0, 30.0))
        assert fv.est_residual_evm == pytest.approx(0.0721, abs=5e-4)

    def test_clean_profile_is_featureless(self):
        fv = feature_vector_from_profile(TxProfile(0, 0.0, 0.0, 0.0, 30.0))
        assert fv.est_gain_imbalance_db == pytest.approx(0.0, abs=1e-9)
        assert fv.est_residual_evm == pytest.approx(0.0, abs=1e-9)


class TestGeoMean:
    def test_nominal_is_zero(self):
        nominal, _ = feature_scales(ParamSpec())
        fv = FeatureVector(0, 0, 0, nominal[3], nominal[4], 0, 0, np.inf)
        with pytest.warns(UserWarning, match="ring"):
            assert geo_mean_ppm(fv, ParamSpec()) == 0.0

    def test_three_sigma_is_half_scale(self):
        spec = ParamSpec()
        nominal, sigma = feature_scales(spec)
        fv = FeatureVector(
            3 * sigma[0],
            3 * sigma[1],
            3 * sigma[2],
            nominal[3],
            nominal[4] + 3 * sigma[4],
            0,
            0,
            np.inf,
        )
        with pytest.warns(UserWarning, match="ring"):
            assert geo_mean_ppm(fv, spec) == pytest.approx(500_000.0, rel=1e-9)

    def test_unresolvable_feature_warns(self):
        fv = feature_vector_from_profile(TxProfile(0, 2.0, 0.5, 1.0, 30.0))
        with pytest.warns(UserWarning, match="ring"):
            geo_mean_ppm(fv, ParamSpec())

    def test_all_degenerate_spec_raises(self):
        fv = FeatureVector(0, 0, 0, 1.0, 0, 0, 0, np.inf)
        with pytest.raises(ValueError):
            with pytest.warns(UserWarning):
                geo_mean_ppm(fv, _zero_spread_spec())

    def test_robust_three_sigma_near_half_scale(self):
        spec = ParamSpec()
        nominal, sigma = feature_scales(spec)
        span = np.hypot(sigma, MEASUREMENT_SIGMA)
        fv = FeatureVector(*(nominal + 3 * span), 0, 0, np.inf)
        assert geo_mean_ppm(fv, spec, robust=True) == pytest.approx(500_000.0, rel=1e-3)

    def test_robust_monotone_in_frequency(self):
        spec = ParamSpec()
        values = []
        for ppm in [0.5, 2.0, 8.0, 20.0]:
            fv = FeatureVector(ppm, 0.1, 0.5, 1.0, 0.01, 0, 0, np.inf)
            values.append(geo_mean_ppm(fv, spec, robust=True))
        assert all(a < b for a, b in zip(values, values[1:]))

    def test_robust_is_finite_at_nominal(self):
        nominal, _ = feature_scales(ParamSpec())
        fv = FeatureVector(0, 0, 0, nominal[3], nominal[4], 0, 0, np.inf)
        g = geo_mean_ppm(fv, ParamSpec(), robust=True)
        assert np.isfinite(g) and g > 0.0


@pytest.fixture(scope="module")
def small_run():
    spec = ParamSpec()
    fleet = sample_fleet(6, spec, seed=9)
    return compute_distances(fleet, 4, FrameConfig(), seed=13, spec=spec, threads=2)


class TestDistances:
    def test_sample_counts(self, small_run):
        assert small_run.d_intra.size == 6 * 6  # n * C(k,2)
        assert small_run.d_inter.size == 15 * 4  # C(n,2) * k

    def test_worst_cases_are_extremes(self, small_run):
        assert small_run.worst_case_d_intra == small_run.d_intra.max()
        assert small_run.worst_case_d_inter == small_run.d_inter.min()

    def test_devices_identify_themselves(self, small_run):
        assert small_run.identifiability > 0.95
        assert np.median(small_run.d_inter) > 3 * np.median(small_run.d_intra)

    def test_deterministic(self, small_run):
        spec = ParamSpec()
        fleet = sample_fleet(6, spec, seed=9)
        again = compute_distances(fleet, 4, FrameConfig(), seed=13, spec=spec, threads=1)
        np.testing.assert_array_equal(again.d_intra, small_run.d_intra)
        np.testing.assert_array_equal(again.d_inter, small_run.d_inter)
        assert again.identifiability == small_run.identifiability

    def test_exhaustive_matches_sampling(self):
        spec = ParamSpec()
        fleet = sample_fleet(6, spec, seed=9)
        ex = compute_distances(fleet, 4, FrameConfig(), seed=13, spec=spec, threads=2, exhaustive=True)
        sa = compute_distances(fleet, 4, FrameConfig(), seed=13, spec=spec, threads=2, exhaustive=False)
        band = 3 * np.sqrt(max(ex.identifiability * (1 - ex.identifiability), 1e-12) / 200_000)
        assert abs(ex.identifiability - sa.identifiability) <= band + 1e-3

    def test_indistinct_fleet_cannot_be_identified(self):
        spec = _zero_spread_spec()
        fleet = sample_fleet(6, spec, seed=3)
        d = compute_distances(fleet, 4, FrameConfig(), seed=5, spec=spec, threads=2)
        assert 0.3 < d.identifiability < 0.65

    def test_validation(self):
        fleet = sample_fleet(3, ParamSpec(), seed=1)
        with pytest.raises(ValueError):
            compute_distances(fleet, 1)
        with pytest.raises(ValueError):
            compute_distances(fleet[:1], 4)


def _two_class_model() -> MlpModel:
    # saturating single hidden unit: prediction follows the sign of x0,
    # confidence 1/(1+e^-4) on either side
    return MlpModel(
        w1=np.array([[50.0, 0.0]]),
        b1=np.zeros(1),
        w2=np.array([[2.0], [-2.0]]),
        b2=np.zeros(2),
        norm_mean=np.zeros(2),
        norm_scale=np.ones(2),
        classes=np.array([7, 9]),
        final_error=0.0,
        epochs_run=0,
    )


class TestFalseDetection:
    def test_matches_error_fraction(self):
        model = _two_class_model()
        x = np.array([[1.0, 0.0]] * 5 + [[-1.0, 0.0]] * 5)
        labels = np.array([7] * 5 + [9] * 3 + [7] * 2)  # two rows mislabeled
        fd = false_detection_probability(model, x, labels)
        assert fd.probability == pytest.approx(0.2)
        assert fd.n_errors == 2
        assert fd.ci_low < 0.2 < fd.ci_high

    def test_empty_set_rejected(self):
        with pytest.raises(ValueError):
            false_detection_probability(_two_class_model(), np.empty((0, 2)), np.array([]))


class TestWilson:
    def test_symmetric_midpoint(self):
        lo, hi = wilson_interval(50, 100)
        assert lo == pytest.approx(0.40383, abs=1e-3)
        assert hi == pytest.approx(0.59617, abs=1e-3)

    def test_edge_cases(self):
        lo, _ = wilson_interval(0, 20)
        _, hi = wilson_interval(20, 20)
        assert lo == 0.0
        assert hi == 1.0

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            wilson_interval(0, 0)

    @given(n=st.integers(min_value=1, max_value=10_000), frac=st.floats(0.0, 1.0))
    def test_brackets_the_point_estimate(self, n, frac):
        k = min(n, int(frac * n))
        lo, hi = wilson_interval(k, n)
        assert 0.0 <= lo <= k / n <= hi <= 1.0


class TestFarFrr:
    def _sets(self):
        genuine_x = np.array([[1.0, 0.0]] * 3 + [[-1.0, 0.0]] * 3)
        genuine_ids = np.array([7, 7, 7, 9, 9, 9])
        # one impostor presents a clone of device 7, one claims 7 from afar
        impostor_x = np.array([[1.0, 0.0], [-1.0, 0.0]])
        impostor_claims = np.array([7, 7])
        return genuine_x, genuine_ids, impostor_x, impostor_claims

    def test_curve_and_eer(self):
        gx, gi, ix, ic = self._sets()
        curve = far_frr_curve(_two_class_model(), gx, gi, ix, ic, np.array([0.5, 0.9, 0.99]))
        assert [p.frr for p in curve.points] == [0.0, 0.0, 1.0]
        assert [p.far for p in curve.points] == [0.5, 0.5, 0.0]
        assert curve.eer == pytest.approx(1.0 / 3.0)
        assert 0.9 < curve.eer_threshold < 0.99

    def test_monotone_in_threshold(self):
        gx, gi, ix, ic = self._sets()
        curve = far_frr_curve(
            _two_class_model(), gx, gi, ix, ic, np.linspace(0.05, 0.999, 25)
        )
        fars = [p.far for p in curve.points]
        frrs = [p.frr for p in curve.points]
        assert all(a >= b for a, b in zip(fars, fars[1:]))
        assert all(a <= b for a, b in zip(frrs, frrs[1:]))

    def test_extreme_thresholds(self):
        gx, gi, ix, ic = self._sets()
        curve = far_frr_curve(_two_class_model(), gx, gi, ix, ic, np.array([1e-6, 1.0 + 1e-9]))
        assert curve.points[0].frr == 0.0  # perfect classifier, negligible bar
        assert curve.points[-1].frr == 1.0  # nothing clears a bar above 1
        assert curve.points[-1].far == 0.0

    def test_unsorted_thresholds_rejected(self):
        gx, gi, ix, ic = self._sets()
        with pytest.raises(ValueError):
            far_frr_curve(_two_class_model(), gx, gi, ix, ic, np.array([0.9, 0.5]))

    def test_empty_sets_rejected(self):
        gx, gi, ix, ic = self._sets()
        with pytest.raises(ValueError):
            far_frr_curve(_two_class_model(), gx, gi, np.empty((0, 2)), np.array([]), np.array([0.5]))


class TestCrpCount:
    def test_reference_point(self):
        n = crp_count(5, 16)
        assert n == 2**80
        assert isinstance(n, int)
        assert np.log10(float(n)) == pytest.approx(24.082, abs=0.01)

    def test_single_bit(self):
        assert crp_count(1, 1) == 2

    def test_no_overflow_far_past_word_size(self):
        assert crp_count(8, 16) == 2**128

    def test_guess_probability(self):
        assert guess_probability_log2(5, 16) == -80.0

    def test_validation(self):
        with pytest.raises(ValueError):
            crp_count(0, 16)
        with pytest.raises(ValueError):
            crp_count(5, 0)

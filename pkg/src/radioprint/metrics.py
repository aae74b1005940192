"""Fingerprint quality metrics.

Distances between device observations are measured on a single scalar: the
geometric mean of ppm-normalized deviations of the device features from
their population nominals.  On top of that sit identifiability (how often a
device resembles itself more than it resembles any other), false-detection
probability, FAR/FRR trade-off curves, and the challenge-response count.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .params import ParamSpec, TxProfile
from .pipeline import evaluate_transmitted, parallel_map, transmit_frame
from .receiver import (
    DEVICE_FEATURE_NAMES,
    FeatureVector,
    FrameRejected,
    extract_iq_features,
)
from .seeds import child_seed, rng_for
from .signals import FrameConfig, IqFrame, rms
from .transmitter import apply_iq_imbalance, demap_16qam, ideal_constellation

__all__ = [
    "PufDistances",
    "FalseDetection",
    "FarFrrPoint",
    "FarFrrCurve",
    "feature_vector_from_profile",
    "feature_scales",
    "resolvable_features",
    "geo_mean_ppm",
    "compute_distances",
    "false_detection_probability",
    "far_frr_curve",
    "wilson_interval",
    "crp_count",
    "guess_probability_log2",
]

# Estimator resolution (one standard deviation of repeated estimates of the
# same device) at the nominal operating point: Eb/N0 15 dB, 7500 symbols,
# matched filtering on.  Used by the robust normalization to keep features
# that the receiver cannot actually resolve from injecting log-scale noise
# into the geometric mean.
MEASUREMENT_SIGMA = np.array(
    [
        3e-5,  # est_freq_offset_ppm
        0.012,  # est_gain_imbalance_db
        0.085,  # est_phase_imbalance_deg
        0.0035,  # est_ring_compression
        0.0006,  # est_residual_evm
    ]
)
_FLOOR_SIGMAS = 4.0  # robust deviations roll off softly below this many resolutions
_GRID_TILE = 100  # 1600 points satisfy the ring-occupancy precondition
_SCALE_DRAWS = 2000


def _aligned_imbalance_features(gain_db: float, phase_deg: float) -> dict:
    """Noiseless receiver view of a modulator imbalance.

    Applies the rail map to the tiled constellation and runs the same
    alignment the carrier recovery performs (mean decision-phase removal,
    unit RMS), then the same feature extractor.  No separate closed form to
    drift out of sync with the estimator.
    """
    grid = np.tile(ideal_constellation(), _GRID_TILE)
    frame = IqFrame(grid, 8e6, 1e6)
    s = apply_iq_imbalance(frame, gain_db, phase_deg).samples
    for _ in range(2):
        s = s / rms(s)
        decisions = ideal_constellation()[demap_16qam(s)]
        s = s * np.exp(-1j * np.mean(np.angle(s * np.conj(decisions))))
    s = s / rms(s)
    return extract_iq_features(s)


def feature_vector_from_profile(tx: TxProfile) -> FeatureVector:
    """The enrollment-time fingerprint: what an ideal receiver would measure
    over a noise-free channel.

    The PA's ring compression at the modeled back-off levels sits well below
    the estimator's resolution, so the ring feature here carries only the
    imbalance-induced part.
    """
    feats = _aligned_imbalance_features(tx.iq_gain_imbalance_db, tx.iq_phase_imbalance_deg)
    return FeatureVector(
        est_freq_offset_ppm=tx.lo_offset_ppm,
        est_gain_imbalance_db=feats["gain_db"],
        est_phase_imbalance_deg=feats["phase_deg"],
        est_ring_compression=feats["ring_compression"],
        est_residual_evm=feats["systematic_evm"],
        est_agc_gain_db=0.0,
        est_freq_drift_hz=0.0,
        est_snr_db=np.inf,
    )


@lru_cache(maxsize=8)
def feature_scales(spec: ParamSpec) -> tuple[np.ndarray, np.ndarray]:
    """(nominal, population sigma) per device feature.

    Frequency and imbalance scales come straight from the population spec.
    The ring and distortion features have no spec entry of their own; their
    population spread is induced by the imbalance distributions and is
    derived here by pushing a fixed Monte-Carlo population of profiles
    through the noiseless feature map.
    """
    from .params import sample_truncated_normal

    rng = rng_for(0x5CA1E5, "feature-scales")
    gains = sample_truncated_normal(rng, spec.iq_gain_imbalance_db, _SCALE_DRAWS)
    phases = sample_truncated_normal(rng, spec.iq_phase_imbalance_deg, _SCALE_DRAWS)
    rc = np.empty(_SCALE_DRAWS)
    evm = np.empty(_SCALE_DRAWS)
    for i in range(_SCALE_DRAWS):
        feats = _aligned_imbalance_features(float(gains[i]), float(phases[i]))
        rc[i] = feats["ring_compression"]
        evm[i] = feats["systematic_evm"]

    nominal_feats = _aligned_imbalance_features(0.0, 0.0)
    nominal = np.array(
        [0.0, 0.0, 0.0, nominal_feats["ring_compression"], nominal_feats["systematic_evm"]]
    )
    sigma = np.array(
        [
            spec.lo_offset_ppm.std,
            spec.iq_gain_imbalance_db.std,
            spec.iq_phase_imbalance_deg.std,
            float(np.std(rc)),
            float(np.std(evm)),
        ]
    )
    return nominal, sigma


def resolvable_features(spec: ParamSpec) -> np.ndarray:
    """Mask of device features whose population span the receiver can resolve.

    A spread below the estimator's own resolution carries no usable identity
    (the ring feature under the default population, or anything with a
    zeroed spec entry) and is excluded from span-normalized products.
    """
    _, sigma = feature_scales(spec)
    return sigma >= MEASUREMENT_SIGMA


def geo_mean_ppm(
    fv: FeatureVector, spec: ParamSpec | None = None, *, robust: bool = False
) -> float:
    """Scalar fingerprint value: geometric mean of per-feature ppm deviations.

    Each device feature maps to |value - nominal| / (6 sigma) * 1e6, i.e.
    parts per million of its full-scale population span, then the geometric
    mean is taken over the device features.  Channel features never enter.

    ``robust=True`` switches to the normalization used for distance
    comparisons: a measurement-precision-weighted geometric mean.  Each
    feature's log term is weighted by its signal-to-measurement variance
    ratio, so a feature the receiver resolves over many bits (the frequency
    offset) counts for far more than one barely above its estimation noise,
    and an unresolvable feature drops out on its own.  Deviations also roll
    off softly onto a resolution floor instead of diving to log-domain
    negative infinity.
    """
    spec = spec or ParamSpec()
    nominal, sigma = feature_scales(spec)
    values = fv.to_array()[: len(DEVICE_FEATURE_NAMES)]
    deviation = np.abs(values - nominal)

    if robust:
        span = np.hypot(sigma, MEASUREMENT_SIGMA)
        weight = (sigma / MEASUREMENT_SIGMA) ** 2
        if weight.sum() <= 0.0:
            weight = np.ones_like(weight)  # fully degenerate population: floors carry it
        floor = _FLOOR_SIGMAS * MEASUREMENT_SIGMA
        terms = np.hypot(deviation, floor) / (6.0 * span) * 1e6
        return float(np.exp(np.log(terms) @ weight / weight.sum()))

    usable = resolvable_features(spec)
    if not usable.all():
        skipped = [DEVICE_FEATURE_NAMES[i] for i in np.nonzero(~usable)[0]]
        warnings.warn(f"unresolvable feature(s) excluded from geometric mean: {skipped}")
    if not usable.any():
        raise ValueError("no feature has a resolvable population span")
    terms = deviation[usable] / (6.0 * sigma[usable]) * 1e6
    if np.any(terms == 0.0):
        return 0.0
    return float(np.exp(np.mean(np.log(terms))))


@dataclass(frozen=True)
class PufDistances:
    """Same-device and cross-device distance samples in ppm."""

    d_intra: np.ndarray
    d_inter: np.ndarray
    worst_case_d_intra: float
    worst_case_d_inter: float
    identifiability: float


def compute_distances(
    fleet: list[TxProfile],
    n_evaluations: int,
    cfg: FrameConfig = FrameConfig(),
    seed: int = 0,
    *,
    spec: ParamSpec = ParamSpec(),
    threads: int = 1,
    exhaustive: bool | None = None,
    max_pair_samples: int = 200_000,
) -> PufDistances:
    """Evaluate every device repeatedly and compare fingerprint values.

    All devices answer the same challenge (one shared payload), each
    evaluation under a fresh channel realization.  Same-device pairs give
    d_intra, cross-device pairs at matching evaluation slots give d_inter;
    identifiability is the probability that a random intra distance is
    smaller than a random inter distance (ties count half).
    """
    if n_evaluations < 2:
        raise ValueError("need at least 2 evaluations per device")
    if len(fleet) < 2:
        raise ValueError("need at least 2 devices")
    challenge = child_seed(seed, "challenge")

    def device_geos(tx: TxProfile) -> np.ndarray:
        frame = transmit_frame(tx, cfg, challenge)
        geos = np.empty(n_evaluations)
        for e in range(n_evaluations):
            env_seed = child_seed(seed, "env", tx.device_id, e)
            try:
                fv = evaluate_transmitted(frame, spec, cfg, env_seed)
            except FrameRejected:
                geos[e] = np.nan
                continue
            geos[e] = geo_mean_ppm(fv, spec, robust=True)
        return geos

    geos = np.array(parallel_map(device_geos, fleet, threads))
    if np.isnan(geos).mean() > 0.1:
        raise RuntimeError("more than 10% of evaluations were rejected")

    n, k = geos.shape
    ia, ib = np.triu_indices(k, 1)
    d_intra = np.abs(geos[:, ia] - geos[:, ib]).ravel()
    da, db = np.triu_indices(n, 1)
    d_inter = np.abs(geos[da, :] - geos[db, :]).ravel()
    d_intra = d_intra[~np.isnan(d_intra)]
    d_inter = d_inter[~np.isnan(d_inter)]
    if d_intra.size == 0 or d_inter.size == 0:
        raise RuntimeError("insufficient usable evaluations")

    if exhaustive is None:
        exhaustive = d_intra.size * d_inter.size <= max_pair_samples
    if exhaustive:
        comparisons = d_intra[:, None] - d_inter[None, :]
        wins = np.mean(comparisons < 0) + 0.5 * np.mean(comparisons == 0)
    else:
        rng = rng_for(seed, "identifiability")
        xi = d_intra[rng.integers(0, d_intra.size, max_pair_samples)]
        xj = d_inter[rng.integers(0, d_inter.size, max_pair_samples)]
        wins = np.mean(xi < xj) + 0.5 * np.mean(xi == xj)

    return PufDistances(
        d_intra=d_intra,
        d_inter=d_inter,
        worst_case_d_intra=float(d_intra.max()),
        worst_case_d_inter=float(d_inter.min()),
        identifiability=float(wins),
    )


def wilson_interval(successes: int, n: int, z: float = 1.96) -> tuple[float, float]:
    """Wilson score interval for a binomial proportion."""
    if n < 1:
        raise ValueError("empty sample")
    p = successes / n
    denom = 1.0 + z**2 / n
    center = (p + z**2 / (2 * n)) / denom
    half = z * np.sqrt(p * (1 - p) / n + z**2 / (4 * n**2)) / denom
    # the exact interval always brackets p; keep rounding from violating that
    return max(0.0, min(center - half, p)), min(1.0, max(center + half, p))


@dataclass(frozen=True)
class FalseDetection:
    """Misclassification fraction with its Wilson confidence interval."""

    probability: float
    ci_low: float
    ci_high: float
    n_evaluations: int
    n_errors: int


def false_detection_probability(model, features: np.ndarray, labels: np.ndarray) -> FalseDetection:
    """1 - accuracy of the classifier on a held-out evaluation set."""
    from .mlp import predict_batch

    labels = np.asarray(labels)
    if labels.size == 0:
        raise ValueError("empty evaluation set")
    predicted, _ = predict_batch(model, features)
    errors = int(np.count_nonzero(predicted != labels))
    lo, hi = wilson_interval(errors, labels.size)
    return FalseDetection(errors / labels.size, lo, hi, int(labels.size), errors)


@dataclass(frozen=True)
class FarFrrPoint:
    threshold: float
    far: float
    frr: float


@dataclass(frozen=True)
class FarFrrCurve:
    points: list[FarFrrPoint]
    eer: float
    eer_threshold: float


def far_frr_curve(
    model,
    genuine_features: np.ndarray,
    genuine_ids: np.ndarray,
    impostor_features: np.ndarray,
    impostor_claims: np.ndarray,
    thresholds: np.ndarray,
) -> FarFrrCurve:
    """Verification trade-off versus the confidence threshold.

    A genuine attempt is rejected (FRR) when the classifier names a
    different device or its confidence falls below the threshold.  An
    impostor claiming some other device's identity is falsely accepted
    (FAR) when the classifier names exactly the claimed device with
    confidence at or above the threshold.
    """
    thresholds = np.asarray(thresholds, dtype=float)
    if thresholds.size == 0:
        raise ValueError("no thresholds")
    if np.any(np.diff(thresholds) <= 0):
        raise ValueError("thresholds must be strictly increasing")
    genuine_ids = np.asarray(genuine_ids)
    impostor_claims = np.asarray(impostor_claims)
    if genuine_ids.size == 0 or impostor_claims.size == 0:
        raise ValueError("genuine and impostor sets must both be non-empty")

    from .mlp import predict_batch

    g_pred, g_conf = predict_batch(model, genuine_features)
    i_pred, i_conf = predict_batch(model, impostor_features)
    g_wrong = g_pred != genuine_ids
    i_match = i_pred == impostor_claims

    points = []
    for tau in thresholds:
        frr = float(np.mean(g_wrong | (g_conf < tau)))
        far = float(np.mean(i_match & (i_conf >= tau)))
        points.append(FarFrrPoint(float(tau), far, frr))

    eer, eer_tau = _equal_error_rate(points)
    return FarFrrCurve(points, eer, eer_tau)


def _equal_error_rate(points: list[FarFrrPoint]) -> tuple[float, float]:
    """Linear interpolation of the FAR/FRR crossing."""
    for a, b in zip(points, points[1:]):
        ga, gb = a.frr - a.far, b.frr - b.far
        if ga == 0.0:
            return a.far, a.threshold
        if ga < 0 <= gb:
            t = ga / (ga - gb) if ga != gb else 0.0
            tau = a.threshold + t * (b.threshold - a.threshold)
            eer = a.far + t * (b.far - a.far)
            return float(eer), float(tau)
    # no crossing inside the sweep: closest approach
    best = min(points, key=lambda p: abs(p.frr - p.far))
    return float((best.far + best.frr) / 2.0), float(best.threshold)


def crp_count(m: int, bits_per_feature: int = 16) -> int:
    """Size of the challenge-response space for m quantized features."""
    if m < 1 or bits_per_feature < 1:
        raise ValueError("m and bits_per_feature must be >= 1")
    return 2 ** (bits_per_feature * m)


def guess_probability_log2(m: int, bits_per_feature: int = 16) -> float:
    """log2 of an adversary's single-guess success probability."""
    return -float(bits_per_feature * m)

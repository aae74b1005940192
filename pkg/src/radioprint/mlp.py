"""Device classifier and receiver-signature compensation.

A three-layer network (8 inputs, tanh hidden layer, softmax output) maps a
receiver feature vector to a transmitter identity.  Training is full-batch
scaled conjugate gradient on the cross-entropy; a plain momentum descent is
available behind a flag for cross-checking.  The compensator is a per-feature
affine map fitted by least squares from loopback feature pairs.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .params import ParamSpec, TxProfile, sample_channel
from .pipeline import evaluate_frame, evaluate_transmitted, parallel_map, transmit_frame
from .receiver import FEATURE_NAMES, IDEAL_RX, FeatureVector, FrameRejected, RxProfile
from .seeds import child_seed, rng_for
from .signals import FrameConfig

__all__ = [
    "Hyperparameters",
    "MlpModel",
    "CompensatorModel",
    "train_classifier",
    "predict",
    "predict_batch",
    "build_training_set",
    "build_loopback_pairs",
    "train_compensator",
    "apply_compensator",
    "save_model",
    "load_model",
]


@dataclass(frozen=True)
class Hyperparameters:
    hidden_dim: int = 50
    target_error: float = 1e-3  # mean cross-entropy on the training set
    max_epochs: int = 2000
    method: str = "scg"  # or "momentum"
    learning_rate: float = 0.05  # momentum method only
    momentum: float = 0.9


@dataclass
class MlpModel:
    """Trained classifier: weights plus the feature normalization that the
    training data was standardized with."""

    w1: np.ndarray  # (hidden, in)
    b1: np.ndarray
    w2: np.ndarray  # (out, hidden)
    b2: np.ndarray
    norm_mean: np.ndarray
    norm_scale: np.ndarray
    classes: np.ndarray  # sorted original labels, output unit k <-> classes[k]
    final_error: float = np.nan
    epochs_run: int = 0

    @property
    def input_dim(self) -> int:
        return self.w1.shape[1]

    @property
    def hidden_dim(self) -> int:
        return self.w1.shape[0]

    @property
    def output_dim(self) -> int:
        return self.w2.shape[0]


def _softmax(z: np.ndarray) -> np.ndarray:
    z = z - z.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


def _forward(params, x):
    w1, b1, w2, b2 = params
    a1 = np.tanh(x @ w1.T + b1)
    return a1, _softmax(a1 @ w2.T + b2)


def _loss_and_grad(theta, shapes, x, y):
    """Mean cross-entropy and its gradient, both over the full batch."""
    params = _unflatten(theta, shapes)
    w1, b1, w2, b2 = params
    n = x.shape[0]
    a1, p = _forward(params, x)
    loss = -float(np.mean(np.sum(y * np.log(np.maximum(p, 1e-300)), axis=1)))

    dz2 = (p - y) / n
    gw2 = dz2.T @ a1
    gb2 = dz2.sum(axis=0)
    dz1 = (dz2 @ w2) * (1.0 - a1**2)
    gw1 = dz1.T @ x
    gb1 = dz1.sum(axis=0)
    return loss, _flatten((gw1, gb1, gw2, gb2))


def _flatten(params):
    return np.concatenate([p.ravel() for p in params])


def _unflatten(theta, shapes):
    out, k = [], 0
    for shape in shapes:
        size = int(np.prod(shape))
        out.append(theta[k : k + size].reshape(shape))
        k += size
    return tuple(out)


def _init_params(n_in, n_hidden, n_out, seed):
    rng = rng_for(seed, "mlp-init")
    w1 = rng.uniform(-1, 1, (n_hidden, n_in)) / np.sqrt(n_in)
    b1 = np.zeros(n_hidden)
    w2 = rng.uniform(-1, 1, (n_out, n_hidden)) / np.sqrt(n_hidden)
    b2 = np.zeros(n_out)
    return (w1, b1, w2, b2)


def _train_scg(theta, fun, target_error, max_epochs):
    """Moller's scaled conjugate gradient: line-search-free second-order
    steps with a Levenberg-style trust scaling."""
    sigma0 = 1e-5
    lam, lam_bar = 1e-6, 0.0
    n_params = theta.size

    loss, grad = fun(theta)
    r = -grad
    p = r.copy()
    success = True
    pp = float(p @ p)
    delta = 0.0
    epochs = 0

    for k in range(1, max_epochs + 1):
        epochs = k
        if loss <= target_error or np.sqrt(pp) < 1e-12:
            epochs = k - 1
            break
        if success:
            sigma = sigma0 / np.sqrt(pp)
            _, grad_probe = fun(theta + sigma * p)
            s = (grad_probe - grad) / sigma
            delta = float(p @ s)
        delta += (lam - lam_bar) * pp
        if delta <= 0:  # make the Hessian model positive definite
            lam_bar = 2.0 * (lam - delta / pp)
            delta = -delta + lam * pp
            lam = lam_bar
        mu = float(p @ r)
        alpha = mu / delta
        loss_new, grad_new = fun(theta + alpha * p)
        comparison = 2.0 * delta * (loss - loss_new) / mu**2

        if comparison >= 0:
            theta = theta + alpha * p
            loss, grad = loss_new, grad_new
            r_new = -grad
            lam_bar = 0.0
            success = True
            if k % n_params == 0:
                p = r_new.copy()
            else:
                beta = float(r_new @ r_new - r_new @ r) / mu
                p = r_new + beta * p
            r = r_new
            pp = float(p @ p)
            if comparison >= 0.75:
                lam = max(0.25 * lam, 1e-15)
        else:
            lam_bar = lam
            success = False
        if comparison < 0.25:
            lam = min(lam + delta * (1.0 - comparison) / pp, 1e15)

    return theta, loss, epochs


def _train_momentum(theta, fun, target_error, max_epochs, lr, momentum):
    velocity = np.zeros_like(theta)
    loss = np.inf
    epochs = 0
    for k in range(1, max_epochs + 1):
        loss, grad = fun(theta)
        epochs = k - 1
        if loss <= target_error:
            break
        velocity = momentum * velocity - lr * grad
        theta = theta + velocity
        epochs = k
    return theta, loss, epochs


def _normalize_columns(x):
    mean = x.mean(axis=0)
    scale = x.std(axis=0)
    constant = scale < 1e-12
    if constant.any():
        warnings.warn(
            f"constant feature column(s) {np.nonzero(constant)[0].tolist()}: scale forced to 1",
            stacklevel=3,
        )
        scale = np.where(constant, 1.0, scale)
    return mean, scale


def train_classifier(
    features: np.ndarray,
    labels: np.ndarray,
    hp: Hyperparameters = Hyperparameters(),
    seed: int = 0,
) -> MlpModel:
    """Fit the softmax classifier on feature rows.

    Rows are canonically re-ordered before training, so any permutation of
    the same training set produces the same model bit for bit.
    """
    x = np.asarray(features, dtype=float)
    y_raw = np.asarray(labels)
    if x.ndim != 2:
        raise ValueError("features must be a 2-D matrix")
    if x.shape[0] != y_raw.shape[0]:
        raise ValueError("features and labels row counts differ")
    classes, y_idx = np.unique(y_raw, return_inverse=True)
    if x.shape[0] < classes.size:
        raise ValueError("fewer rows than classes")

    # canonical order: label first, then feature columns left to right
    order = np.lexsort(tuple(x[:, c] for c in range(x.shape[1] - 1, -1, -1)) + (y_idx,))
    x, y_idx = x[order], y_idx[order]

    mean, scale = _normalize_columns(x)
    xn = (x - mean) / scale
    y = np.zeros((x.shape[0], classes.size))
    y[np.arange(x.shape[0]), y_idx] = 1.0

    params = _init_params(x.shape[1], hp.hidden_dim, classes.size, seed)
    shapes = [p.shape for p in params]
    theta = _flatten(params)
    fun = lambda t: _loss_and_grad(t, shapes, xn, y)

    if hp.method == "scg":
        theta, loss, epochs = _train_scg(theta, fun, hp.target_error, hp.max_epochs)
    elif hp.method == "momentum":
        theta, loss, epochs = _train_momentum(
            theta, fun, hp.target_error, hp.max_epochs, hp.learning_rate, hp.momentum
        )
    else:
        raise ValueError(f"unknown training method {hp.method!r}")

    w1, b1, w2, b2 = _unflatten(theta, shapes)
    if not all(np.all(np.isfinite(p)) for p in (w1, b1, w2, b2)):
        raise RuntimeError("training diverged to non-finite weights")
    return MlpModel(w1, b1, w2, b2, mean, scale, classes, final_error=loss, epochs_run=epochs)


def predict_batch(model: MlpModel, features: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Class labels and softmax confidences for a matrix of feature rows."""
    x = np.atleast_2d(np.asarray(features, dtype=float))
    if x.shape[1] != model.input_dim:
        raise ValueError(f"expected {model.input_dim} features, got {x.shape[1]}")
    xn = (x - model.norm_mean) / model.norm_scale
    _, p = _forward((model.w1, model.b1, model.w2, model.b2), xn)
    idx = np.argmax(p, axis=1)  # first maximum -> lowest class id on ties
    return model.classes[idx], p[np.arange(len(idx)), idx]


def predict(model: MlpModel, fv) -> tuple[int, float]:
    """Identify one transmission; returns (device id, confidence)."""
    row = fv.to_array() if isinstance(fv, FeatureVector) else np.asarray(fv, dtype=float)
    ids, conf = predict_batch(model, row[None, :])
    return int(ids[0]), float(conf[0])


def build_training_set(
    fleet: list[TxProfile],
    n_iterations: int,
    cfg: FrameConfig = FrameConfig(),
    seed: int = 0,
    *,
    spec: ParamSpec = ParamSpec(),
    rx: RxProfile = IDEAL_RX,
    rrc_enabled: bool = True,
    compensator: "CompensatorModel | None" = None,
    max_reject_fraction: float = 0.1,
    threads: int = 1,
) -> tuple[np.ndarray, np.ndarray]:
    """One feature row per (device, iteration), fresh bits and channel each.

    Channel-dependent features stay in the rows on purpose: seeing many
    channel draws per device is what lets the classifier separate device
    identity from environment.  Rejected frames are skipped; more than
    ``max_reject_fraction`` of them aborts the build.  Per-item seeds make
    the result independent of ``threads``.
    """
    if n_iterations < 1:
        raise ValueError("n_iterations must be >= 1")

    def one(item):
        tx, it = item
        eval_seed = child_seed(seed, "train", tx.device_id, it)
        try:
            fv = evaluate_frame(tx, spec, cfg, eval_seed, rx=rx, rrc_enabled=rrc_enabled)
        except FrameRejected:
            return None
        if compensator is not None:
            fv = apply_compensator(compensator, fv)
        return fv.to_array()

    items = [(tx, it) for tx in fleet for it in range(n_iterations)]
    results = parallel_map(one, items, threads=threads)
    rows = [r for r in results if r is not None]
    labels = [tx.device_id for (tx, _), r in zip(items, results) if r is not None]
    rejected = len(items) - len(rows)
    if rejected > max_reject_fraction * len(items):
        raise RuntimeError(
            f"frame rejection rate {rejected}/{len(items)} exceeds {max_reject_fraction:.0%}"
        )
    return np.array(rows), np.array(labels)


@dataclass(frozen=True)
class CompensatorModel:
    """Per-feature affine correction: ideal ~= scale * nonideal + offset."""

    scale: np.ndarray
    offset: np.ndarray

    def inverse(self) -> "CompensatorModel":
        return CompensatorModel(1.0 / self.scale, -self.offset / self.scale)


IDENTITY_COMPENSATOR = CompensatorModel(np.ones(len(FEATURE_NAMES)), np.zeros(len(FEATURE_NAMES)))


def build_loopback_pairs(
    fleet: list[TxProfile],
    rx: RxProfile,
    n_iterations: int = 10,
    cfg: FrameConfig = FrameConfig(),
    seed: int = 0,
    *,
    spec: ParamSpec = ParamSpec(),
) -> tuple[np.ndarray, np.ndarray]:
    """Paired (ideal, nonideal) feature rows from identical transmissions.

    Every pair shares its frame, channel, and noise; only the receiver front
    end differs.  This is the calibration data a loopback measurement of the
    receiver would provide.
    """
    ideal_rows, nonideal_rows = [], []
    for tx in fleet:
        for it in range(n_iterations):
            pair_seed = child_seed(seed, "loopback", tx.device_id, it)
            frame = transmit_frame(tx, cfg, child_seed(pair_seed, "bits"))
            channel = sample_channel(spec, child_seed(pair_seed, "env"))
            try:
                fv_ideal = evaluate_transmitted(
                    frame, spec, cfg, pair_seed, rx=IDEAL_RX, channel=channel
                )
                fv_nonideal = evaluate_transmitted(
                    frame, spec, cfg, pair_seed, rx=rx, channel=channel
                )
            except FrameRejected:
                continue
            ideal_rows.append(fv_ideal.to_array())
            nonideal_rows.append(fv_nonideal.to_array())
    if not ideal_rows:
        raise RuntimeError("no usable loopback pairs")
    return np.array(ideal_rows), np.array(nonideal_rows)


def train_compensator(ideal_rows: np.ndarray, nonideal_rows: np.ndarray) -> CompensatorModel:
    """Least-squares affine fit per feature, non-ideal -> ideal."""
    a = np.asarray(ideal_rows, dtype=float)
    b = np.asarray(nonideal_rows, dtype=float)
    if a.shape != b.shape or a.ndim != 2:
        raise ValueError("paired row matrices must share an (n, features) shape")
    scale = np.ones(a.shape[1])
    offset = np.zeros(a.shape[1])
    for j in range(a.shape[1]):
        var = np.var(b[:, j])
        if var < 1e-18:
            warnings.warn(f"feature column {j} is constant; compensator left at identity")
            continue
        scale[j] = np.cov(b[:, j], a[:, j], bias=True)[0, 1] / var
        offset[j] = np.mean(a[:, j]) - scale[j] * np.mean(b[:, j])
    return CompensatorModel(scale, offset)


def apply_compensator(comp: CompensatorModel, fv: FeatureVector) -> FeatureVector:
    corrected = comp.scale * fv.to_array() + comp.offset
    return FeatureVector.from_array(corrected)


def save_model(path, model: MlpModel) -> None:
    """Structured text, exact round trip at 17 significant digits."""

    def fmt(arr):
        return " ".join(f"{v:.17g}" for v in np.asarray(arr, dtype=float).ravel())

    with open(path, "w") as fh:
        fh.write(f"dims {model.input_dim} {model.hidden_dim} {model.output_dim}\n")
        fh.write(f"classes {' '.join(str(int(c)) for c in model.classes)}\n")
        fh.write(f"final_error {model.final_error:.17g}\n")
        fh.write(f"epochs_run {model.epochs_run}\n")
        for name in ("norm_mean", "norm_scale", "w1", "b1", "w2", "b2"):
            fh.write(f"{name} {fmt(getattr(model, name))}\n")


def load_model(path) -> MlpModel:
    fields_ = {}
    with open(path) as fh:
        for line in fh:
            key, _, rest = line.strip().partition(" ")
            fields_[key] = rest
    n_in, n_hidden, n_out = (int(v) for v in fields_["dims"].split())

    def arr(name, shape):
        flat = np.array([float(v) for v in fields_[name].split()])
        return flat.reshape(shape)

    return MlpModel(
        w1=arr("w1", (n_hidden, n_in)),
        b1=arr("b1", (n_hidden,)),
        w2=arr("w2", (n_out, n_hidden)),
        b2=arr("b2", (n_out,)),
        norm_mean=arr("norm_mean", (n_in,)),
        norm_scale=arr("norm_scale", (n_in,)),
        classes=np.array([int(v) for v in fields_["classes"].split()]),
        final_error=float(fields_["final_error"]),
        epochs_run=int(fields_["epochs_run"]),
    )

"""Generator / discriminator / classifier model, its losses and training loop.

Training follows the three-step scheme: one Adam step on the discriminator,
then on the classifier, then on the generator, each on an independently drawn
minibatch.  Each step draws from its own random stream (derived from the
config seed), so skipping the classifier step leaves the discriminator and
generator trajectories untouched.  That is what makes GAIN mode and SS-GACN
with no labels produce bit-identical generator/discriminator parameters.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, dataclass, field
from typing import Callable, Sequence

import numpy as np

from .dataset import (
    DEFAULT_NOISE_HIGH,
    Dataset,
    DatasetError,
    as_rng,
    sample_minibatch,
    sample_noise,
    sample_selection_batch,
)
from .nn_core import (
    AdamState,
    ConfigurationError,
    GradientSet,
    Mlp,
    NumericError,
    ShapeError,
    adam_step,
    mlp_from_dict,
    mlp_init,
    mlp_to_dict,
)
from .rng import derive_rng, derive_seed

PROB_FLOOR = 1e-8
MODES = ("gacn", "ss_gacn", "gain")
CHECKPOINT_VERSION = 1


def clamp(p):
    return np.clip(p, PROB_FLOOR, 1.0 - PROB_FLOOR)


def _clamp_grad(p):
    # derivative of clamp: 1 strictly inside the interval, 0 on the flats
    return ((p > PROB_FLOOR) & (p < 1.0 - PROB_FLOOR)).astype(np.float64)


def _check_finite(value, term, iteration=None):
    if not np.all(np.isfinite(value)):
        where = f" at iteration {iteration}" if iteration is not None else ""
        raise NumericError(f"non-finite {term}{where}", term=term)


# -- configuration -------------------------------------------------------------


@dataclass(frozen=True)
class TrainConfig:
    alpha: float = 10.0
    beta: float = 1.0
    gamma: float = 1000.0
    batch_d: int = 128
    batch_a: int = 128
    batch_g: int = 128
    iterations: int = 1000
    mode: str = "gacn"
    learning_rate: float = 0.001
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    noise_high: float = DEFAULT_NOISE_HIGH
    eval_every: int = 10
    hidden_activation: str = "relu"
    generator_hidden: tuple[int, ...] | None = None  # default: two layers of width d
    discriminator_hidden: tuple[int, ...] | None = None
    classifier_hidden: tuple[int, ...] = (30, 20, 20)
    generator_sees_mask: bool = False  # also feed m to the generator (input width 2d)
    seed: int = 0

    def __post_init__(self):
        errors = self.problems()
        if errors:
            raise ConfigurationError("; ".join(errors))
        if self.mode == "gain" and self.gamma != 0.0:
            object.__setattr__(self, "gamma", 0.0)
        for name in ("generator_hidden", "discriminator_hidden", "classifier_hidden"):
            v = getattr(self, name)
            if v is not None:
                object.__setattr__(self, name, tuple(int(s) for s in v))

    def problems(self) -> list[str]:
        out = []
        if self.mode not in MODES:
            out.append(f"mode must be one of {MODES}, got {self.mode!r}")
        for name in ("alpha", "beta", "gamma"):
            v = getattr(self, name)
            if not (isinstance(v, (int, float)) and v >= 0 and math.isfinite(v)):
                out.append(f"{name} must be a finite non-negative number, got {v!r}")
        for name in ("batch_d", "batch_a", "batch_g", "eval_every"):
            if int(getattr(self, name)) < 1:
                out.append(f"{name} must be >= 1")
        if int(self.iterations) < 0:
            out.append("iterations must be >= 0")
        if not self.learning_rate > 0:
            out.append("learning_rate must be > 0")
        if not (0 <= self.beta1 < 1 and 0 <= self.beta2 < 1):
            out.append("beta1 and beta2 must lie in [0, 1)")
        if not 0 < self.noise_high <= 1:
            out.append("noise_high must lie in (0, 1]")
        return out

    def to_dict(self) -> dict:
        d = asdict(self)
        for k, v in d.items():
            if isinstance(v, tuple):
                d[k] = list(v)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "TrainConfig":
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(d) - known
        if unknown:
            raise ConfigurationError(f"unknown TrainConfig fields: {sorted(unknown)}")
        return cls(**d)


# -- model ---------------------------------------------------------------------


@dataclass
class GacnModel:
    generator: Mlp
    discriminator: Mlp
    classifier: Mlp | None
    d: int
    class_count: int
    adam_g: AdamState | None = None
    adam_d: AdamState | None = None
    adam_a: AdamState | None = None
    normalization: np.ndarray | None = None

    def copy(self) -> "GacnModel":
        return GacnModel(
            self.generator.copy(),
            self.discriminator.copy(),
            None if self.classifier is None else self.classifier.copy(),
            self.d,
            self.class_count,
            self.adam_g,
            self.adam_d,
            self.adam_a,
            self.normalization,
        )

    def digests(self) -> dict:
        return {
            "generator": self.generator.digest(),
            "discriminator": self.discriminator.digest(),
            "classifier": None if self.classifier is None else self.classifier.digest(),
        }


def init_model(
    d: int,
    class_count: int,
    config: TrainConfig = TrainConfig(),
    with_classifier: bool = True,
) -> GacnModel:
    """Fresh model; each network's initialization has its own derived seed."""
    if d < 1:
        raise ConfigurationError(f"d must be >= 1, got {d}")
    if class_count < 2:
        raise ConfigurationError(f"class_count must be >= 2, got {class_count}")
    act = config.hidden_activation
    g_hidden = config.generator_hidden or (d, d)
    d_hidden = config.discriminator_hidden or (d, d)
    g_in = 2 * d if config.generator_sees_mask else d
    gen = mlp_init([g_in, *g_hidden, d], act, "sigmoid_elementwise", derive_seed(config.seed, "init", "generator"))
    disc = mlp_init(
        [2 * d, *d_hidden, d], act, "sigmoid_elementwise", derive_seed(config.seed, "init", "discriminator")
    )
    clf = None
    if with_classifier:
        clf = mlp_init(
            [d, *config.classifier_hidden, class_count],
            act,
            "softmax",
            derive_seed(config.seed, "init", "classifier"),
        )
    return GacnModel(gen, disc, clf, d, class_count)


def _adam_for(net: Mlp, config: TrainConfig) -> AdamState:
    return AdamState.for_model(net, config.learning_rate, config.beta1, config.beta2, config.epsilon)


# -- forward pieces ------------------------------------------------------------


@dataclass
class CompletedSample:
    x_hat: np.ndarray
    x_check: np.ndarray
    m: np.ndarray


def merge(x, m, x_check):
    """Observed values where m == 1, generated values elsewhere."""
    return np.where(np.asarray(m) == 1, x, x_check)


def generator_input(x, m, z, with_mask: bool = False):
    """``m*x + (1-m)*z``, optionally followed by ``m`` itself."""
    m = np.asarray(m, dtype=np.float64)
    u = m * x + (1.0 - m) * z
    return np.concatenate([u, m], axis=-1) if with_mask else u


def _gen_input(model, x, m, z):
    return generator_input(x, m, z, model.generator.layer_sizes[0] == 2 * model.d)


def _check_dims(d, *arrays):
    for a in arrays:
        if np.shape(a)[-1] != d:
            raise ShapeError(f"expected trailing dimension {d}, got shape {np.shape(a)}")


def generate(model: GacnModel, x, m, z) -> CompletedSample:
    x = np.asarray(x, dtype=np.float64)
    m = np.asarray(m, dtype=np.float64)
    z = np.asarray(z, dtype=np.float64)
    if x.shape != m.shape or x.shape != z.shape:
        raise ShapeError(f"x {x.shape}, m {m.shape}, z {z.shape} must match")
    _check_dims(model.d, x)
    x_check = model.generator.forward(_gen_input(model, x, m, z))
    return CompletedSample(merge(x, m, x_check), x_check, m)


def discriminator_probs(model: GacnModel, x_hat, hint):
    x_hat = np.asarray(x_hat, dtype=np.float64)
    hint = np.asarray(hint, dtype=np.float64)
    if x_hat.shape != hint.shape:
        raise ShapeError(f"x_hat {x_hat.shape} and hint {hint.shape} must match")
    _check_dims(model.d, x_hat)
    return clamp(model.discriminator.forward(np.concatenate([x_hat, hint], axis=-1)))


def p_hat(dprobs, m, r):
    """Discriminator output at the selected coordinate (r == 0), the mask elsewhere."""
    return np.where(np.asarray(r) == 0, dprobs, np.asarray(m, dtype=np.float64))


# -- loss terms ----------------------------------------------------------------


def loss_d(m, p) -> float:
    """Log-likelihood of the observed/missing pattern; the discriminator maximizes it."""
    p = np.asarray(p, dtype=np.float64)
    _check_finite(p, "loss_d")
    m = np.asarray(m, dtype=np.float64)
    pc = clamp(p)
    return float(np.sum(m * np.log(pc) + (1.0 - m) * np.log(1.0 - pc)))


def _class_index(probs, t):
    t = int(t)
    if not 0 <= t < np.shape(probs)[-1]:
        raise ConfigurationError(f"class index {t} outside [0, {np.shape(probs)[-1]})")
    return t


def loss_a(class_probs, t) -> float:
    t = _class_index(class_probs, t)
    return float(-np.log(clamp(np.asarray(class_probs, dtype=np.float64)[t])))


def loss_m(x, x_check, m) -> float:
    """Squared reconstruction error of the raw generator output on observed cells."""
    m = np.asarray(m, dtype=np.float64)
    return float(np.sum(m * (np.asarray(x) - np.asarray(x_check)) ** 2))


def loss_g(m, p) -> float:
    m = np.asarray(m, dtype=np.float64)
    return float(-np.sum((1.0 - m) * np.log(clamp(np.asarray(p, dtype=np.float64)))))


def loss_p(class_probs, t, m) -> float:
    """Classification cross-entropy scaled by the number of missing features."""
    n_missing = float(np.sum(1.0 - np.asarray(m, dtype=np.float64)))
    return loss_a(class_probs, t) * n_missing


def weighted_objective(l_m, l_g, l_p, kappa, alpha, beta, gamma, mode="gacn") -> float:
    """Sum over samples of alpha*L_M + beta*L_G + kappa*gamma*L_P."""
    l_m, l_g, l_p, kappa = (np.atleast_1d(np.asarray(a, dtype=np.float64)) for a in (l_m, l_g, l_p, kappa))
    if mode == "gacn" and np.any(kappa == 0):
        raise ConfigurationError("mode 'gacn' needs every sample labeled (kappa == 1)")
    total = alpha * l_m + beta * l_g
    if mode != "gain":
        total = total + kappa * gamma * l_p
    return float(np.sum(total))


# -- batched passes with gradients -----------------------------------------------


@dataclass
class DiscriminatorPass:
    loss: float  # minimized: -sum_j L_D
    grads: GradientSet
    x_hat: np.ndarray


def discriminator_pass(model: GacnModel, x, m, z, r, hint) -> DiscriminatorPass:
    """Objective and gradients for the discriminator; the completed batch is held fixed."""
    x_check = model.generator.forward(_gen_input(model, x, m, z))
    x_hat = merge(x, m, x_check)
    raw, cache = model.discriminator.forward_cached(np.concatenate([x_hat, hint], axis=1))
    ph = p_hat(raw, m, r)
    pc = clamp(ph)
    loss = -float(np.sum(m * np.log(pc) + (1.0 - m) * np.log(1.0 - pc)))
    sel = (r == 0).astype(np.float64)
    grad_raw = -(m / pc - (1.0 - m) / (1.0 - pc)) * _clamp_grad(ph) * sel
    grads, _ = model.discriminator.backward(cache, grad_raw)
    return DiscriminatorPass(loss, grads, x_hat)


@dataclass
class ClassifierPass:
    loss: float
    grads: GradientSet
    x_hat: np.ndarray


def _xent_grad(probs, t, weight):
    """Value and d/dprobs of sum_j weight_j * -log clamp(probs[j, t_j])."""
    rows = np.arange(len(t))
    pt = probs[rows, t]
    pc = clamp(pt)
    values = -np.log(pc)
    grad = np.zeros_like(probs)
    grad[rows, t] = -weight / pc * _clamp_grad(pt)
    return values, grad


def classifier_pass(clf: Mlp, x_hat, t) -> ClassifierPass:
    probs, cache = clf.forward_cached(x_hat)
    values, grad = _xent_grad(probs, t, np.ones(len(t)))
    grads, _ = clf.backward(cache, grad)
    return ClassifierPass(float(values.sum()), grads, x_hat)


@dataclass
class GeneratorPass:
    objective: float
    loss_m: float
    loss_g: float
    loss_p: float
    grads: GradientSet | None
    x_hat: np.ndarray
    x_check: np.ndarray


def generator_pass(
    model: GacnModel,
    x,
    m,
    z,
    r,
    hint,
    t,
    kappa,
    config: TrainConfig,
    need_grad: bool = True,
) -> GeneratorPass:
    """Weighted generator objective over a batch and its gradient w.r.t. the generator.

    ``loss_m``, ``loss_g`` and ``loss_p`` are unweighted batch sums; the
    classification branch is skipped entirely in GAIN mode or when no sample
    in the batch is labeled.
    """
    u = _gen_input(model, x, m, z)
    x_check, g_cache = model.generator.forward_cached(u)
    x_hat = merge(x, m, x_check)
    miss = 1.0 - m

    diff = x - x_check
    lm = float(np.sum(m * diff**2))
    d_check = config.alpha * (-2.0 * m * diff)

    raw, d_cache = model.discriminator.forward_cached(np.concatenate([x_hat, hint], axis=1))
    ph = p_hat(raw, m, r)
    pc = clamp(ph)
    lg = float(-np.sum(miss * np.log(pc)))
    sel = (r == 0).astype(np.float64)
    grad_raw = config.beta * (-miss / pc) * _clamp_grad(ph) * sel
    d_hat = None
    if need_grad:
        _, d_in = model.discriminator.backward(d_cache, grad_raw)
        d_hat = d_in[:, : model.d]

    lp = 0.0
    use_clf = config.mode != "gain" and model.classifier is not None and np.any(kappa > 0)
    if use_clf:
        labeled = kappa > 0
        t_safe = np.where(labeled, t, 0)
        probs, a_cache = model.classifier.forward_cached(x_hat)
        n_missing = miss.sum(axis=1)
        values, grad_probs = _xent_grad(probs, t_safe, config.gamma * kappa * n_missing)
        lp = float(np.sum(kappa * values * n_missing))
        if need_grad:
            _, a_in = model.classifier.backward(a_cache, grad_probs)
            d_hat = d_hat + a_in

    objective = config.alpha * lm + config.beta * lg
    if use_clf:
        objective += config.gamma * lp
    grads = None
    if need_grad:
        d_check = d_check + miss * d_hat
        grads, _ = model.generator.backward(g_cache, d_check)
    return GeneratorPass(objective, lm, lg, lp, grads, x_hat, x_check)


def generator_objective(batch, model: GacnModel, config: TrainConfig, rng) -> float:
    """Weighted generator objective for a sampled batch (fresh noise and selection from ``rng``)."""
    if config.mode == "gacn" and np.any(batch.kappa == 0):
        raise ConfigurationError("mode 'gacn' needs every sample labeled (kappa == 1)")
    z = sample_noise(model.d, rng, config.noise_high, batch=len(batch))
    sel = sample_selection_batch(batch.m, rng)
    return generator_pass(
        model, batch.x, batch.m, z, sel.r, sel.hint, batch.labels, batch.kappa, config, need_grad=False
    ).objective


# -- training ------------------------------------------------------------------

HISTORY_COLUMNS = (
    "iteration",
    "loss_d",
    "loss_a",
    "loss_m",
    "loss_g",
    "loss_p",
    "objective_g",
    "val_accuracy",
)


@dataclass
class History:
    """Per-iteration loss traces (batch means) plus rows at the evaluation cadence."""

    loss_d: list = field(default_factory=list)
    loss_a: list = field(default_factory=list)
    loss_m: list = field(default_factory=list)
    loss_g: list = field(default_factory=list)
    loss_p: list = field(default_factory=list)
    objective_g: list = field(default_factory=list)
    rows: list = field(default_factory=list)

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(HISTORY_COLUMNS)
            for row in self.rows:
                w.writerow([row[c] if c == "iteration" else repr(float(row[c])) for c in HISTORY_COLUMNS])


Callback = Callable[[int, str, GacnModel, dict], None]


def _validate_training_set(model: GacnModel, ds: Dataset, config: TrainConfig):
    if ds.d != model.d:
        raise ShapeError(f"training set has {ds.d} features, model expects {model.d}")
    if ds.n == 0:
        raise DatasetError("training set is empty")
    if config.mode == "gacn" and not ds.fully_labeled:
        raise ConfigurationError("mode 'gacn' needs a fully labeled training set")
    if config.mode != "gain" and model.classifier is None:
        raise ConfigurationError(f"mode {config.mode!r} needs a classifier network")
    if ds.normalization is None and (ds.features.min() < 0 or ds.features.max() > 1):
        raise DatasetError("training set must be normalized to [0, 1]")


def train(
    model: GacnModel,
    train_set: Dataset,
    config: TrainConfig,
    validation: Dataset | None = None,
    callbacks: Sequence[Callback] = (),
):
    """Run ``config.iterations`` rounds of discriminator, classifier, generator updates.

    Returns ``(trained_model, History)``; the input model is not modified.
    Callbacks are invoked after every stage as ``cb(iteration, stage, model, info)``
    where ``info`` carries the stage's batch (``x``, ``m``, ``x_hat``).
    """
    _validate_training_set(model, train_set, config)
    model = model.copy()
    model.adam_g = model.adam_g or _adam_for(model.generator, config)
    model.adam_d = model.adam_d or _adam_for(model.discriminator, config)
    if model.classifier is not None:
        model.adam_a = model.adam_a or _adam_for(model.classifier, config)
    if model.normalization is None:
        model.normalization = train_set.normalization

    rng_d = derive_rng(config.seed, "train", "discriminator")
    rng_a = derive_rng(config.seed, "train", "classifier")
    rng_g = derive_rng(config.seed, "train", "generator")
    rng_eval = derive_rng(config.seed, "train", "validation")

    labeled = train_set.labeled() if config.mode == "ss_gacn" else train_set
    run_classifier = config.mode != "gain" and labeled.n > 0
    d = model.d
    hist = History()

    for it in range(config.iterations):
        # (1) discriminator
        b = sample_minibatch(train_set, config.batch_d, rng_d)
        z = sample_noise(d, rng_d, config.noise_high, batch=len(b))
        sel = sample_selection_batch(b.m, rng_d)
        dp = discriminator_pass(model, b.x, b.m, z, sel.r, sel.hint)
        _check_finite(dp.loss, "loss_d", it)
        model.discriminator, model.adam_d = adam_step(model.discriminator, dp.grads, model.adam_d)
        for cb in callbacks:
            cb(it, "discriminator", model, {"x": b.x, "m": b.m, "x_hat": dp.x_hat})

        # (2) classifier, labeled rows only
        la = float("nan")
        if run_classifier:
            b = sample_minibatch(labeled, config.batch_a, rng_a)
            z = sample_noise(d, rng_a, config.noise_high, batch=len(b))
            x_hat = merge(b.x, b.m, model.generator.forward(_gen_input(model, b.x, b.m, z)))
            cp = classifier_pass(model.classifier, x_hat, b.labels)
            _check_finite(cp.loss, "loss_a", it)
            model.classifier, model.adam_a = adam_step(model.classifier, cp.grads, model.adam_a)
            la = cp.loss / len(b)
            for cb in callbacks:
                cb(it, "classifier", model, {"x": b.x, "m": b.m, "x_hat": x_hat})

        # (3) generator
        b = sample_minibatch(train_set, config.batch_g, rng_g)
        z = sample_noise(d, rng_g, config.noise_high, batch=len(b))
        sel = sample_selection_batch(b.m, rng_g)
        kappa = np.ones(len(b)) if config.mode == "gacn" else b.kappa
        gp = generator_pass(model, b.x, b.m, z, sel.r, sel.hint, b.labels, kappa, config)
        for term in ("loss_m", "loss_g", "loss_p", "objective"):
            _check_finite(getattr(gp, term), term, it)
        model.generator, model.adam_g = adam_step(model.generator, gp.grads, model.adam_g)
        for cb in callbacks:
            cb(it, "generator", model, {"x": b.x, "m": b.m, "x_hat": gp.x_hat})

        nb = len(b)
        hist.loss_d.append(dp.loss / config.batch_d)
        hist.loss_a.append(la)
        hist.loss_m.append(gp.loss_m / nb)
        hist.loss_g.append(gp.loss_g / nb)
        hist.loss_p.append(gp.loss_p / nb)
        hist.objective_g.append(gp.objective / nb)

        if (it + 1) % config.eval_every == 0:
            val_acc = float("nan")
            if validation is not None and validation.n and config.mode != "gain":
                lab = validation.labeled()
                if lab.n:
                    pred, _ = classify(model, lab, rng_eval, config.noise_high)
                    val_acc = float(np.mean(pred == lab.labels))
            hist.rows.append(
                {
                    "iteration": it + 1,
                    "loss_d": hist.loss_d[-1],
                    "loss_a": la,
                    "loss_m": hist.loss_m[-1],
                    "loss_g": hist.loss_g[-1],
                    "loss_p": hist.loss_p[-1],
                    "objective_g": hist.objective_g[-1],
                    "val_accuracy": val_acc,
                }
            )
    return model, hist


# -- inference -----------------------------------------------------------------


def impute(model: GacnModel, ds: Dataset, seed=0, noise_high: float = DEFAULT_NOISE_HIGH) -> Dataset:
    """Fill missing cells with generator output; observed cells pass through untouched.

    The result has an all-ones feature mask.
    """
    if ds.d != model.d:
        raise ShapeError(f"dataset has {ds.d} features, model expects {model.d}")
    rng = as_rng(seed)
    m = ds.feature_mask.astype(np.float64)
    z = sample_noise(model.d, rng, noise_high, batch=ds.n) if ds.n else np.zeros((0, model.d))
    x_check = model.generator.forward(_gen_input(model, ds.features, m, z)) if ds.n else z
    filled = merge(ds.features, m, x_check)
    return ds.with_features(filled, np.ones_like(ds.feature_mask))


def predict_proba(clf: Mlp, x) -> np.ndarray:
    return clf.forward(np.asarray(x, dtype=np.float64))


def argmax_lowest(probs) -> np.ndarray:
    # np.argmax already returns the first maximal index
    return np.argmax(probs, axis=1)


def classify(model: GacnModel, ds: Dataset, seed=0, noise_high: float = DEFAULT_NOISE_HIGH):
    """Impute then classify. Returns (predicted class per row, probability rows)."""
    if model.classifier is None:
        raise ConfigurationError("model has no classifier network")
    completed = impute(model, ds, seed, noise_high)
    probs = predict_proba(model.classifier, completed.features)
    return argmax_lowest(probs), probs


def train_classifier(
    completed: Dataset,
    class_count: int,
    config: TrainConfig,
    seed_label: str = "posthoc",
) -> Mlp:
    """Fit a classifier with the classifier architecture on an already completed dataset.

    Used to score imputers that have no classifier of their own (GAIN mode,
    mean imputation, external imputations). Same iterations, batch size and
    optimizer as the classifier step of :func:`train`.
    """
    lab = completed.labeled()
    clf = mlp_init(
        [completed.d, *config.classifier_hidden, class_count],
        config.hidden_activation,
        "softmax",
        derive_seed(config.seed, "init", "classifier"),
    )
    if lab.n == 0:
        return clf
    state = _adam_for(clf, config)
    rng = derive_rng(config.seed, seed_label, "classifier")
    for it in range(config.iterations):
        b = sample_minibatch(lab, config.batch_a, rng)
        cp = classifier_pass(clf, b.x, b.labels)
        _check_finite(cp.loss, "loss_a", it)
        clf, state = adam_step(clf, cp.grads, state)
    return clf


# -- checkpoints ---------------------------------------------------------------


def model_to_dict(model: GacnModel, config: TrainConfig | None = None) -> dict:
    return {
        "format": "gacn-checkpoint",
        "version": CHECKPOINT_VERSION,
        "d": model.d,
        "class_count": model.class_count,
        "generator": mlp_to_dict(model.generator),
        "discriminator": mlp_to_dict(model.discriminator),
        "classifier": None if model.classifier is None else mlp_to_dict(model.classifier),
        "normalization": None if model.normalization is None else model.normalization.tolist(),
        "config": None if config is None else config.to_dict(),
    }


def model_from_dict(d: dict):
    if d.get("format") != "gacn-checkpoint" or d.get("version") != CHECKPOINT_VERSION:
        raise ConfigurationError("not a supported gacn checkpoint")
    model = GacnModel(
        mlp_from_dict(d["generator"]),
        mlp_from_dict(d["discriminator"]),
        None if d["classifier"] is None else mlp_from_dict(d["classifier"]),
        int(d["d"]),
        int(d["class_count"]),
        normalization=None if d["normalization"] is None else np.asarray(d["normalization"], dtype=np.float64),
    )
    config = None if d["config"] is None else TrainConfig.from_dict(d["config"])
    return model, config


def save_checkpoint(path, model: GacnModel, config: TrainConfig | None = None) -> None:
    with open(path, "w") as fh:
        json.dump(model_to_dict(model, config), fh)


def load_checkpoint(path):
    with open(path) as fh:
        return model_from_dict(json.load(fh))

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fdcheck import fd_gradients, generic_point, rel_err
from gacn.dataset import (
    Dataset,
    SchemaError,
    SplitSpec,
    inject_mar,
    mask_labels,
    normalize,
    sample_noise,
    sample_selection_batch,
    split,
)
from gacn.model import (
    TrainConfig,
    classifier_pass,
    classify,
    discriminator_pass,
    discriminator_probs,
    generate,
    generator_pass,
    impute,
    init_model,
    load_checkpoint,
    loss_a,
    loss_d,
    loss_g,
    loss_m,
    loss_p,
    merge,
    p_hat,
    predict_proba,
    save_checkpoint,
    train,
    weighted_objective,
)
from gacn.nn_core import ConfigurationError, NumericError, ShapeError
from gacn.synthetic import make_benchmark

EPS = 1e-8


# -- merge / generate ----------------------------------------------------------


def test_merge_example():
    assert merge(np.array([1.0, 2, 3]), np.array([1, 0, 1]), np.array([9.0, 8, 7])).tolist() == [1, 8, 3]


def test_generate_all_observed_returns_x():
    model = init_model(3, 2, TrainConfig(seed=4))
    x = np.array([[0.1, 0.2, 0.3]])
    out = generate(model, x, np.ones((1, 3)), np.full((1, 3), 0.005))
    assert np.array_equal(out.x_hat, x)


def test_generate_all_missing_returns_generator_output():
    model = init_model(3, 2, TrainConfig(seed=4))
    out = generate(model, np.zeros((1, 3)), np.zeros((1, 3)), np.full((1, 3), 0.005))
    assert np.array_equal(out.x_hat, out.x_check)
    assert np.all((out.x_check > 0) & (out.x_check < 1))


def test_generate_dimension_mismatch():
    model = init_model(3, 2, TrainConfig())
    with pytest.raises(ShapeError):
        generate(model, np.zeros(3), np.ones(2), np.zeros(3))


def test_generator_sees_masked_input():
    # x under missing cells must not matter
    model = init_model(3, 2, TrainConfig(seed=1))
    m = np.array([[1.0, 0.0, 1.0]])
    z = np.full((1, 3), 0.004)
    a = generate(model, np.array([[0.2, 0.9, 0.4]]), m, z)
    b = generate(model, np.array([[0.2, -55.0, 0.4]]), m, z)
    assert np.array_equal(a.x_check, b.x_check)


# -- discriminator -------------------------------------------------------------


def test_zero_discriminator_outputs_half():
    model = init_model(4, 2, TrainConfig())
    for p in model.discriminator.params():
        p[...] = 0
    assert np.array_equal(discriminator_probs(model, np.ones(4), np.ones(4)), np.full(4, 0.5))


def test_p_hat_example():
    out = p_hat(np.array([0.9, 0.3, 0.2]), np.array([1, 0, 1]), np.array([1, 0, 1]))
    assert out.tolist() == [1, 0.3, 1]


def test_p_hat_without_selection_is_mask():
    m = np.array([1, 0, 0, 1])
    assert p_hat(np.full(4, 0.7), m, np.ones(4)).tolist() == m.tolist()


def test_loss_through_p_hat_depends_only_on_selected_index():
    m = np.array([1.0, 0.0, 1.0, 0.0])
    r = np.array([1.0, 1.0, 0.0, 1.0])
    base = np.array([0.6, 0.3, 0.8, 0.4])
    h = 1e-6
    grads = []
    for i in range(4):
        up, dn = base.copy(), base.copy()
        up[i] += h
        dn[i] -= h
        grads.append((loss_d(m, p_hat(up, m, r)) - loss_d(m, p_hat(dn, m, r))) / (2 * h))
    assert [g != 0 for g in grads] == [False, False, True, False]


# -- loss values ---------------------------------------------------------------


@pytest.mark.parametrize(
    "m,p,expected",
    [
        ([1, 0], [1 - EPS, EPS], 0.0),
        ([1, 0], [0.5, 0.5], 2 * math.log(0.5)),
        ([1, 1, 0], [0.9, 0.8, 0.3], math.log(0.9) + math.log(0.8) + math.log(0.7)),
    ],
)
def test_loss_d_examples(m, p, expected):
    assert loss_d(m, p) == pytest.approx(expected, abs=1e-7)


def test_loss_d_reference_values():
    assert round(loss_d([1, 0], [0.5, 0.5]), 4) == -1.3863
    assert loss_d([1, 1, 0], [0.9, 0.8, 0.3]) == pytest.approx(-0.6851, abs=1e-4)


def test_loss_d_non_finite():
    with pytest.raises(NumericError) as info:
        loss_d([1, 0], [np.nan, 0.5])
    assert info.value.term == "loss_d"


def test_loss_a_examples():
    assert loss_a([1 - EPS, EPS], 0) == pytest.approx(0, abs=1e-7)
    assert loss_a([0.5, 0.5], 1) == pytest.approx(0.6931, abs=5e-5)
    assert loss_a([0.2, 0.3, 0.5], 1) == pytest.approx(-math.log(0.3))
    assert round(loss_a([0.2, 0.3, 0.5], 1), 4) == 1.2040


def test_loss_m_examples():
    assert loss_m([2, 5], [3, 9], [0, 0]) == 0
    assert loss_m([2, 5], [3, 9], [1, 0]) == 1
    assert loss_m([2, 5], [2, 5], [1, 1]) == 0


def test_loss_g_examples():
    assert loss_g([1, 1], [0.1, 0.2]) == 0
    assert loss_g([0, 1], [0.5, 0.123]) == pytest.approx(math.log(2))
    assert round(loss_g([0, 0], [0.9, 0.8]), 4) == 0.3285


def test_loss_p_examples():
    assert loss_p([0.1, 0.9], 0, [1, 1, 1]) == 0
    assert loss_p([0.5, 0.5], 1, [0, 1, 0]) == pytest.approx(2 * math.log(2))
    assert round(loss_p([0.9, 0.1], 0, [0, 0, 0, 1]), 4) == 0.3161


@given(st.integers(0, 12), st.floats(0.01, 0.99))
@settings(max_examples=40, deadline=None)
def test_loss_p_linear_in_missing_count(k, q):
    m = np.r_[np.zeros(k), np.ones(3)]
    assert loss_p([q, 1 - q], 0, m) == pytest.approx(k * loss_a([q, 1 - q], 0))


def test_weighted_objective_examples():
    assert weighted_objective(0.1, 0.7, 0.02, 1, 0, 0, 0) == 0
    assert weighted_objective(0.1, 0.7, 0.02, 1, 10, 1, 1000) == pytest.approx(21.7)
    assert weighted_objective(0.1, 0.7, 0.02, 0, 10, 1, 1000, mode="ss_gacn") == pytest.approx(1.7)


def test_weighted_objective_gacn_needs_labels():
    with pytest.raises(ConfigurationError):
        weighted_objective([0.1, 0.1], [0.7, 0.7], [0.02, 0.02], [1, 0], 10, 1, 1000, mode="gacn")


def test_gain_config_forces_gamma_zero():
    assert TrainConfig(mode="gain", gamma=1000).gamma == 0


def test_config_reports_every_problem():
    with pytest.raises(ConfigurationError) as info:
        TrainConfig(alpha=-1, batch_d=0, mode="nope")
    msg = str(info.value)
    assert "alpha" in msg and "batch_d" in msg and "mode" in msg


# -- finite-difference checks on every loss ----------------------------------------

SMALL = dict(generator_hidden=(3, 3), discriminator_hidden=(3,), classifier_hidden=(3,))


def small_batch(seed, d=3, n=5):
    rng = np.random.default_rng(seed)
    x = rng.uniform(0, 1, (n, d))
    m = (rng.random((n, d)) > 0.4).astype(float)
    m[0] = 0.0
    m[1] = 1.0
    x = m * x
    z = rng.uniform(0, 0.01, (n, d))
    sel = sample_selection_batch(m, rng)
    t = rng.integers(0, 2, n)
    return x, m, z, sel.r, sel.hint, t


def test_small_networks_stay_under_hundred_parameters():
    model = init_model(3, 2, TrainConfig(**SMALL))
    for net in (model.generator, model.discriminator, model.classifier):
        assert net.n_params <= 100


@pytest.mark.parametrize("seed", range(6))
def test_fd_loss_d(seed):
    model = generic_point(init_model(3, 2, TrainConfig(seed=seed, **SMALL)), seed)
    x, m, z, r, hint, _ = small_batch(seed)
    analytic = discriminator_pass(model, x, m, z, r, hint).grads.arrays()
    numeric = fd_gradients(model.discriminator, lambda: discriminator_pass(model, x, m, z, r, hint).loss)
    assert rel_err(analytic, numeric) <= 1e-4


@pytest.mark.parametrize("seed", range(6))
def test_fd_loss_a(seed):
    model = generic_point(init_model(3, 2, TrainConfig(seed=seed, **SMALL)), seed)
    _, _, _, _, _, t = small_batch(seed)
    # completed vectors, away from the relu kink at exactly zero input
    x = np.random.default_rng(seed).uniform(0.05, 1, (5, 3))
    clf = model.classifier
    analytic = classifier_pass(clf, x, t).grads.arrays()
    numeric = fd_gradients(clf, lambda: sum(loss_a(p, k) for p, k in zip(predict_proba(clf, x), t)))
    assert rel_err(analytic, numeric) <= 1e-4


GEN_TERMS = {
    "loss_m": dict(alpha=1.0, beta=0.0, gamma=0.0),
    "loss_g": dict(alpha=0.0, beta=1.0, gamma=0.0),
    "loss_p": dict(alpha=0.0, beta=0.0, gamma=1.0),
    "weighted": dict(alpha=10.0, beta=1.0, gamma=1000.0),
}


@pytest.mark.parametrize("term", list(GEN_TERMS))
@pytest.mark.parametrize("mode", ["gacn", "ss_gacn"])
@pytest.mark.parametrize("seed", range(6))
def test_fd_generator_terms(term, mode, seed):
    cfg = TrainConfig(seed=seed, mode=mode, **GEN_TERMS[term], **SMALL)
    model = generic_point(init_model(3, 2, cfg), seed)
    x, m, z, r, hint, t = small_batch(seed)
    kappa = np.ones(len(x)) if mode == "gacn" else np.array([1, 0, 1, 1, 0], dtype=float)

    def objective():
        return generator_pass(model, x, m, z, r, hint, t, kappa, cfg, need_grad=False).objective

    gp = generator_pass(model, x, m, z, r, hint, t, kappa, cfg)
    assert gp.grads is not None
    numeric = fd_gradients(model.generator, objective)
    assert rel_err(gp.grads.arrays(), numeric) <= 1e-4


def test_generator_pass_matches_per_sample_losses():
    cfg = TrainConfig(seed=2, **SMALL)
    model = init_model(3, 2, cfg)
    x, m, z, r, hint, t = small_batch(2)
    gp = generator_pass(model, x, m, z, r, hint, t, np.ones(len(x)), cfg)
    dprobs = discriminator_probs(model, gp.x_hat, hint)
    probs = predict_proba(model.classifier, gp.x_hat)
    lm = [loss_m(x[j], gp.x_check[j], m[j]) for j in range(len(x))]
    lg = [loss_g(m[j], p_hat(dprobs[j], m[j], r[j])) for j in range(len(x))]
    lp = [loss_p(probs[j], t[j], m[j]) for j in range(len(x))]
    assert gp.loss_m == pytest.approx(sum(lm))
    assert gp.loss_g == pytest.approx(sum(lg))
    assert gp.loss_p == pytest.approx(sum(lp))
    assert gp.objective == pytest.approx(weighted_objective(lm, lg, lp, np.ones(len(x)), 10, 1, 1000))


# -- training loop -------------------------------------------------------------


def tiny_set(seed=0, p_miss=0.3, n=300):
    return inject_mar(normalize(make_benchmark(n=n, n_important=2, n_noise=2, seed=seed)), p_miss, seed + 1)


def quick(**kw):
    base = dict(iterations=30, batch_d=32, batch_a=32, batch_g=32, seed=5)
    base.update(kw)
    return TrainConfig(**base)


def test_zero_iterations_leave_model_unchanged():
    cfg = quick(iterations=0)
    model = init_model(4, 2, cfg)
    trained, hist = train(model, tiny_set(), cfg)
    assert trained.digests() == model.digests()
    assert hist.rows == []


def test_train_does_not_mutate_input_model():
    cfg = quick()
    model = init_model(4, 2, cfg)
    before = model.digests()
    train(model, tiny_set(), cfg)
    assert model.digests() == before


def test_observed_values_preserved_every_stage():
    seen = []

    def check(it, stage, model, info):
        obs = info["m"] == 1
        assert np.array_equal(info["x_hat"][obs], info["x"][obs])
        seen.append(stage)

    cfg = quick(mode="ss_gacn")
    train(init_model(4, 2, cfg), mask_labels(tiny_set(), 0.5, 3), cfg, callbacks=[check])
    assert seen.count("generator") == cfg.iterations
    assert seen.count("discriminator") == cfg.iterations
    assert seen.count("classifier") == cfg.iterations


def test_each_stage_updates_only_its_network():
    cfg = quick()
    model = init_model(4, 2, cfg)
    last = dict(model.digests())
    owner = {"discriminator": "discriminator", "classifier": "classifier", "generator": "generator"}

    def check(it, stage, m, info):
        now = m.digests()
        changed = {k for k in now if now[k] != last[k]}
        assert changed == {owner[stage]}, (it, stage, changed)
        last.update(now)

    train(model, tiny_set(), cfg, callbacks=[check])


def _trajectory(cfg, ds, with_classifier=True):
    steps = []
    model = init_model(ds.d, 2, cfg, with_classifier=with_classifier)

    def rec(it, stage, m, info):
        if stage == "generator":
            steps.append(m.digests())

    train(model, ds, cfg, callbacks=[rec])
    return steps


def test_gain_mode_equals_run_without_classifier():
    ds = tiny_set()
    with_a = _trajectory(quick(mode="gain"), ds)
    without_a = _trajectory(quick(mode="gain"), ds, with_classifier=False)
    gamma_zero = _trajectory(quick(mode="ss_gacn", gamma=0.0), mask_labels(ds, 0.0, 1))
    for a, b, c in zip(with_a, without_a, gamma_zero):
        assert (a["generator"], a["discriminator"]) == (b["generator"], b["discriminator"])
        assert (a["generator"], a["discriminator"]) == (c["generator"], c["discriminator"])


def test_ss_gacn_with_all_labels_is_gacn():
    ds = tiny_set()
    assert _trajectory(quick(mode="ss_gacn"), ds) == _trajectory(quick(mode="gacn"), ds)


def test_ss_gacn_with_no_labels_is_gain():
    ds = tiny_set()
    ss = _trajectory(quick(mode="ss_gacn"), mask_labels(ds, 0.0, 2))
    gain = _trajectory(quick(mode="gain"), ds, with_classifier=False)
    assert [(s["generator"], s["discriminator"]) for s in ss] == [(g["generator"], g["discriminator"]) for g in gain]


def test_gacn_rejects_unlabeled_rows():
    cfg = quick()
    with pytest.raises(ConfigurationError):
        train(init_model(4, 2, cfg), mask_labels(tiny_set(), 0.5, 1), cfg)


def test_training_is_deterministic():
    cfg = quick()
    a, _ = train(init_model(4, 2, cfg), tiny_set(), cfg)
    b, _ = train(init_model(4, 2, cfg), tiny_set(), cfg)
    assert a.digests() == b.digests()


def test_numeric_abort_names_iteration_and_term():
    def poison(it, stage, model, info):
        if it == 2 and stage == "discriminator":
            model.generator.weights[0][...] = np.nan

    cfg = quick()
    with pytest.raises(NumericError) as info:
        train(init_model(4, 2, cfg), tiny_set(), cfg, callbacks=[poison])
    assert info.value.term == "loss_a"
    assert "iteration 2" in str(info.value)


def test_history_rows_follow_cadence():
    cfg = quick(iterations=30, eval_every=7)
    train_set, val, _ = split(tiny_set(), SplitSpec(seed=1))
    _, hist = train(init_model(4, 2, cfg), train_set, cfg, validation=val)
    assert [r["iteration"] for r in hist.rows] == [7, 14, 21, 28]
    assert all(0 <= r["val_accuracy"] <= 1 for r in hist.rows)
    assert len(hist.loss_d) == 30


def test_losses_trend_down_on_two_feature_data():
    ds = inject_mar(normalize(make_benchmark(n=2000, n_important=2, n_noise=0, seed=0)), 0.3, 0)
    cfg = TrainConfig(iterations=500, seed=0)
    _, hist = train(init_model(2, 2, cfg), ds, cfg)
    assert np.mean(hist.loss_d[-10:]) < np.mean(hist.loss_d[:10])
    assert np.mean(hist.objective_g[-10:]) < np.mean(hist.objective_g[:10])


def test_hint_changes_discriminator_output_after_training():
    ds = tiny_set(n=600)
    cfg = quick(iterations=200, mode="gain")
    model, _ = train(init_model(4, 2, cfg, with_classifier=False), ds, cfg)
    x_hat = impute(model, ds.subset(np.arange(20)), 0).features
    hint = np.ones_like(x_hat)
    other = hint.copy()
    other[:, 1] = 0.0
    assert not np.allclose(discriminator_probs(model, x_hat, hint)[:, 1], discriminator_probs(model, x_hat, other)[:, 1])


# -- inference -----------------------------------------------------------------


def test_impute_fully_observed_is_identity():
    ds = normalize(make_benchmark(n=50, seed=1))
    model = init_model(ds.d, 2, TrainConfig())
    out = impute(model, ds, 0)
    assert np.array_equal(out.features, ds.features)


def test_impute_missing_row_is_generator_output():
    ds = normalize(make_benchmark(n=5, seed=1))
    mask = np.ones_like(ds.feature_mask)
    mask[2] = 0
    ds = ds.with_features(np.where(mask == 1, ds.features, 0.0), mask)
    model = init_model(ds.d, 2, TrainConfig(seed=3))
    out = impute(model, ds, 11)
    z = sample_noise(ds.d, np.random.default_rng(11), 0.01, batch=ds.n)
    expect = generate(model, ds.features, ds.feature_mask, z).x_check[2]
    assert np.array_equal(out.features[2], expect)
    assert np.all(out.feature_mask == 1) and np.all(np.isfinite(out.features))


def test_impute_is_seeded():
    ds = tiny_set()
    model = init_model(4, 2, TrainConfig(seed=2))
    assert np.array_equal(impute(model, ds, 5).features, impute(model, ds, 5).features)


def test_zero_classifier_predicts_class_zero():
    ds = tiny_set()
    model = init_model(4, 2, TrainConfig())
    for p in model.classifier.params():
        p[...] = 0
    pred, probs = classify(model, ds, 0)
    assert np.all(pred == 0)
    assert np.allclose(probs, 0.5)


def test_class_probabilities_on_simplex():
    model = init_model(4, 3, TrainConfig(seed=9))
    _, probs = classify(model, tiny_set(), 0)
    assert np.allclose(probs.sum(axis=1), 1.0, atol=1e-9)


def test_trained_model_separates_benchmark():
    full = normalize(make_benchmark(seed=21))
    tr, _, te = split(inject_mar(full, 0.2, 22), SplitSpec(seed=23))
    cfg = TrainConfig(seed=24)
    model, _ = train(init_model(full.d, 2, cfg), tr, cfg)
    pred, _ = classify(model, te, 25)
    assert np.mean(pred == te.labels) > 0.95


def test_checkpoint_round_trip(tmp_path):
    cfg = quick(iterations=5)
    model, _ = train(init_model(4, 2, cfg), tiny_set(), cfg)
    save_checkpoint(tmp_path / "c.json", model, cfg)
    back, back_cfg = load_checkpoint(tmp_path / "c.json")
    assert back.digests() == model.digests()
    assert back_cfg == cfg
    assert np.array_equal(back.normalization, model.normalization)


def test_checkpoint_rejects_foreign_file(tmp_path):
    (tmp_path / "x.json").write_text('{"format": "other"}')
    with pytest.raises(ConfigurationError):
        load_checkpoint(tmp_path / "x.json")


def test_dataset_rejects_label_outside_classes():
    with pytest.raises(SchemaError):
        Dataset(np.zeros((2, 1)), np.ones((2, 1), dtype=np.int8), np.array([0, 5]), None, ["a"], ("0", "1"))

import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from lesionkit.classifiers import (
    LinearSvmModel,
    MissingFeatureError,
    ModelFormatError,
    Risk,
    Stage,
    SvmHyper,
    TrainingDataError,
    cascade_assess,
    fit_linear_svm,
    gradients,
    init_model,
    load_mlp,
    load_svm,
    mlp_assess,
    mlp_forward,
    mse_loss,
    save_mlp,
    save_svm,
    scale_features,
    svm_assess,
    svm_level,
    svm_objective,
    svm_rfe,
    train_mlp,
    train_svm,
)
from lesionkit.classifiers import mlp as mlp_module
from lesionkit.classifiers.mlp import MlpModel
from lesionkit.classifiers.store import mlp_to_dict, svm_to_dict
from lesionkit.classifiers.svm import signed_labels
from lesionkit.features import FEATURE_NAMES
from oracles import mlp_forward_oracle, svm_grid_minimum, svm_objective_oracle

# -- feature scaling ------------------------------------------------------------------


def test_scale_examples():
    lo, hi = np.array([2.0, -5.0]), np.array([6.0, 5.0])
    assert scale_features(lo, lo, hi).tolist() == [-1.0, -1.0]
    assert scale_features(hi, lo, hi).tolist() == [1.0, 1.0]
    assert scale_features((lo + hi) / 2, lo, hi).tolist() == [0.0, 0.0]
    assert scale_features([100.0, -100.0], lo, hi).tolist() == [1.0, -1.0]
    assert scale_features([7.0], [3.0], [3.0]).tolist() == [0.0]


finite = st.floats(-1e6, 1e6, allow_nan=False)


@given(finite, finite, finite, finite)
def test_scale_range_and_monotone(a, b, f, g):
    lo, hi = min(a, b), max(a, b)
    s1, s2 = scale_features([min(f, g)], [lo], [hi])[0], scale_features([max(f, g)], [lo], [hi])[0]
    assert -1.0 <= s1 <= 1.0 and -1.0 <= s2 <= 1.0
    assert s1 <= s2


# -- SVM --------------------------------------------------------------------------------


def toy_set(seed=0):
    rng = np.random.default_rng(seed)
    neg = np.array([-1.0, -1.0]) + rng.normal(0, 0.1, (10, 2))
    pos = np.array([1.0, 1.0]) + rng.normal(0, 0.1, (10, 2))
    return np.vstack([neg, pos]), np.r_[np.zeros(10), np.ones(10)].astype(int)


@given(hnp.arrays(np.float64, (5, 3), elements=st.floats(-3, 3)),
       hnp.arrays(np.float64, 3, elements=st.floats(-3, 3)),
       st.floats(-3, 3), st.floats(0.1, 10))
def test_objective_matches_oracle(X, w, b, C):
    ys = np.array([1, -1, 1, -1, 1.0])
    assert svm_objective(w, b, X, ys, C) == pytest.approx(
        svm_objective_oracle(w, b, X, ys, C), rel=1e-12, abs=1e-12)


def test_svm_toy_set():
    X, y = toy_set()
    model = train_svm(X, y)
    pred = model.decision(X) > 0
    assert (pred == (y == 1)).all()
    assert model.decision(np.array([1.0, 1.0])) > 0
    # the subgradient optimum agrees with a brute-force search of the objective
    Xs = scale_features(X, model.feature_min, model.feature_max)
    ys = signed_labels(y)
    best, _ = svm_grid_minimum(Xs, ys, model.hyper.C)
    got = svm_objective(model.weights, model.bias, Xs, ys, model.hyper.C)
    assert got <= best + 1e-3
    assert model.decision_lo < model.decision_hi


def test_duplicated_samples_equal_doubled_c():
    X, y = toy_set(3)
    Xs = scale_features(X, X.min(axis=0), X.max(axis=0))
    ys = signed_labels(y)
    w1, b1 = fit_linear_svm(np.vstack([Xs, Xs]), np.r_[ys, ys], SvmHyper(C=0.5))
    w2, b2 = fit_linear_svm(Xs, ys, SvmHyper(C=1.0))
    assert np.allclose(w1, w2, atol=1e-9) and b1 == pytest.approx(b2, abs=1e-9)
    assert svm_objective(w1, b1, np.vstack([Xs, Xs]), np.r_[ys, ys], 0.5) == pytest.approx(
        svm_objective(w1, b1, Xs, ys, 1.0), rel=1e-12)


def test_flipped_labels_negate_weights():
    X, y = toy_set(5)
    a = train_svm(X, y)
    b = train_svm(X, 1 - y)
    assert np.allclose(a.weights, -b.weights, atol=1e-3)
    assert a.bias == pytest.approx(-b.bias, abs=1e-3)


def test_single_class_rejected():
    X, _ = toy_set()
    with pytest.raises(TrainingDataError):
        train_svm(X, np.ones(20, int))
    with pytest.raises(TrainingDataError):
        train_svm(X[:3], np.array([0, 1, 1]))


def test_affine_rescaling_leaves_decisions_unchanged():
    rng = np.random.default_rng(7)
    X = rng.normal(size=(30, 4))
    y = (X[:, 0] + 0.5 * X[:, 1] > 0).astype(int)
    scale = np.array([3.0, 0.01, 250.0, 1.5])
    shift = np.array([-4.0, 100.0, 7.0, 0.0])
    a = train_svm(X, y)
    b = train_svm(X * scale + shift, y)
    da, db = a.decision(X), b.decision(X * scale + shift)
    assert np.allclose(da, db, atol=1e-6)
    assert ((da > 0) == (db > 0)).all()


def rfe_data(seed=0, n=40):
    rng = np.random.default_rng(seed)
    y = np.r_[np.zeros(n // 2), np.ones(n // 2)].astype(int)
    f0 = 2.0 * y + rng.normal(0, 0.4, n)
    f1 = 1.0 * y + rng.normal(0, 0.4, n)
    f2 = rng.permutation(np.linspace(-1, 1, n))  # independent of the labels
    return np.column_stack([f0, f1, f2]), y


def test_rfe_drops_noise_first():
    X, y = rfe_data()
    names = ("signal_a", "signal_b", "noise")
    full = train_svm(X, y, names=names)
    assert np.argmin(np.abs(full.weights)) == 2
    res = svm_rfe(X, y, None, 2, names)
    assert res.selected == ("signal_a", "signal_b")
    assert [n for n, _ in res.trace] == ["noise"]


def test_rfe_trace_and_subsets():
    rng = np.random.default_rng(11)
    X = rng.normal(size=(24, 6))
    y = (X[:, 0] - X[:, 3] > 0).astype(int)
    names = tuple(f"f{i}" for i in range(6))
    res = svm_rfe(X, y, SvmHyper(epochs=500), 2, names)
    assert len(res.trace) == 6 - 2
    removed = [n for n, _ in res.trace]
    assert len(set(removed)) == len(removed)
    assert set(res.selected) | set(removed) == set(names)
    assert list(res.selected) == sorted(res.selected, key=names.index)
    one = svm_rfe(X, y, SvmHyper(epochs=500), 5, names)
    assert len(one.trace) == 1
    with pytest.raises(ValueError):
        svm_rfe(X, y, None, 6, names)
    with pytest.raises(ValueError):
        svm_rfe(X, y, None, 0, names)


def test_rfe_tie_drops_later_feature():
    X, y = rfe_data(1)
    X = np.column_stack([X[:, 0], X[:, 2], X[:, 2]])  # two identical noise columns
    res = svm_rfe(X, y, None, 2, ("a", "b", "c"))
    assert res.trace[0][0] == "c"


# -- risk rules ---------------------------------------------------------------------------


def test_svm_level_sweep():
    for i in range(10001):
        p = i / 10000
        want = Risk.LOW if p < 0.30 else Risk.MEDIUM if p < 0.40 else Risk.HIGH
        assert svm_level(p) is want


def identity_svm():
    """One feature whose value is the calibrated probability."""
    return LinearSvmModel(("asymmetry",), np.array([1.0]), 0.0,
                          np.array([0.0]), np.array([1.0]), -1.0, 1.0)


@pytest.mark.parametrize("p,level", [(0.45, Risk.HIGH), (0.35, Risk.MEDIUM), (0.10, Risk.LOW)])
def test_svm_assess_table(p, level):
    out = svm_assess(identity_svm(), {"asymmetry": p})
    assert out.level is level and out.stage is Stage.SVM
    assert out.probability_pct == pytest.approx(100 * p)


def test_svm_assess_missing_feature():
    with pytest.raises(MissingFeatureError):
        svm_assess(identity_svm(), {"compactness": 1.0})


# -- MLP ----------------------------------------------------------------------------------


def constant_mlp(output):
    z = np.zeros
    b2 = np.array([math.log(output / (1 - output))])
    return MlpModel(z((8, 10)), z(10), z((10, 1)), b2, -np.ones(8), np.ones(8))


def test_forward_matches_oracle(rng):
    m = init_model(17)
    for _ in range(5):
        x = rng.uniform(-1, 1, 8)
        want = mlp_forward_oracle(m.w1.tolist(), m.b1.tolist(), m.w2.tolist(), m.b2.tolist(), x.tolist())
        assert mlp_forward(m, x) == pytest.approx(want, rel=1e-12, abs=1e-12)


def test_forward_limits(rng):
    zero = constant_mlp(0.5)
    for _ in range(5):
        assert mlp_forward(zero, rng.uniform(-1, 1, 8)) == 0.5
    m = init_model(3)
    sat = MlpModel(m.w1, m.b1, m.w2, np.array([50.0]), m.feature_min, m.feature_max)
    assert mlp_forward(sat, rng.uniform(-1, 1, 8)) > 0.9999
    with pytest.raises(ValueError):
        mlp_forward(m, np.zeros(7))
    with pytest.raises(ValueError):
        MlpModel(np.zeros((8, 9)), np.zeros(9), np.zeros((9, 1)), np.zeros(1), np.zeros(8), np.ones(8))


def test_gradient_matches_finite_differences(rng):
    m = init_model(5)
    X = rng.uniform(-1, 1, (6, 8))
    y = rng.integers(0, 2, 6).astype(float)
    g = gradients(m, X, y)
    h = 1e-5
    worst = 0.0
    for name in ("w1", "b1", "w2", "b2"):
        base = getattr(m, name)
        for idx in np.ndindex(base.shape):
            plus, minus = base.copy(), base.copy()
            plus[idx] += h
            minus[idx] -= h
            mp = MlpModel(**{**m.__dict__, name: plus})
            mm = MlpModel(**{**m.__dict__, name: minus})
            num = (mse_loss(mp, X, y) - mse_loss(mm, X, y)) / (2 * h)
            ana = g[name][idx]
            worst = max(worst, abs(num - ana) / max(abs(num), abs(ana), 1e-8))
    assert worst < 1e-4


def xor_set():
    X = np.zeros((4, 8))
    X[:, :2] = [(0, 0), (0, 1), (1, 0), (1, 1)]
    return X, np.array([0, 1, 1, 0])


def test_xor_converges_for_some_seed():
    X, y = xor_set()
    solved = []
    for seed in (42, 0, 1, 2, 3):
        m = train_mlp(X, y, lr=0.5, epochs=20000, seed=seed)
        out = np.array([mlp_assess(m, x).ann_output for x in X])
        solved.append(bool(((out >= 0.5) == (y == 1)).all()))
        if solved[-1]:
            break
    assert any(solved)


def test_zero_epochs_is_initialization():
    X, y = xor_set()
    m = train_mlp(X, y, epochs=0, seed=9)
    init = init_model(9)
    for name in ("w1", "b1", "w2", "b2"):
        assert np.array_equal(getattr(m, name), getattr(init, name))


def test_loss_non_increasing_at_small_rate():
    X, y = xor_set()
    losses = []
    for epochs in range(0, 101, 5):
        m = train_mlp(X, y, lr=0.01, epochs=epochs, seed=2)
        Xs = scale_features(X, m.feature_min, m.feature_max)
        losses.append(mse_loss(m, Xs, y))
    assert all(b <= a for a, b in zip(losses, losses[1:]))


def test_training_is_deterministic():
    X, y = xor_set()
    a = train_mlp(X, y, epochs=200, seed=4)
    b = train_mlp(X, y, epochs=200, seed=4)
    assert mlp_to_dict(a) == mlp_to_dict(b)
    Xt, yt = toy_set()
    assert svm_to_dict(train_svm(Xt, yt)) == svm_to_dict(train_svm(Xt, yt))


def test_train_mlp_empty():
    with pytest.raises(ValueError):
        train_mlp(np.zeros((0, 8)), np.zeros(0))


@pytest.mark.parametrize("out,level", [(0.7, Risk.HIGH), (0.3, Risk.LOW), (0.5, Risk.HIGH)])
def test_mlp_assess_threshold(out, level):
    a = mlp_assess(constant_mlp(out), np.zeros(8))
    assert a.level is level and a.stage is Stage.ANN
    assert a.ann_output == pytest.approx(out)
    assert a.probability_pct == pytest.approx(100 * out)


# -- cascade ------------------------------------------------------------------------------


def features_with(p):
    f = dict.fromkeys(FEATURE_NAMES, 0.0)
    f["asymmetry"] = p
    return f


def counting(monkeypatch):
    calls = []
    real = mlp_module.mlp_assess

    def wrapped(model, x):
        calls.append(x)
        return real(model, x)
    monkeypatch.setattr(mlp_module, "mlp_assess", wrapped)
    return calls


def test_cascade_short_circuits(monkeypatch):
    calls = counting(monkeypatch)
    for p, level in ((0.9, Risk.HIGH), (0.1, Risk.LOW)):
        out = cascade_assess(identity_svm(), constant_mlp(0.9), features_with(p))
        assert out.level is level and out.stage is Stage.SVM
    assert calls == []


@pytest.mark.parametrize("ann,level", [(0.8, Risk.HIGH), (0.2, Risk.LOW)])
def test_cascade_resolves_medium(monkeypatch, ann, level):
    calls = counting(monkeypatch)
    out = cascade_assess(identity_svm(), constant_mlp(ann), features_with(0.35))
    assert len(calls) == 1 and len(calls[0]) == 8
    assert out.level is level and out.stage is Stage.CASCADE
    assert out.ann_output == pytest.approx(ann)


@given(st.floats(0, 1), st.floats(0.01, 0.99))
def test_cascade_never_medium(p, ann):
    out = cascade_assess(identity_svm(), constant_mlp(ann), features_with(p))
    assert out.level is not Risk.MEDIUM


# -- persistence --------------------------------------------------------------------------


def test_model_round_trip(tmp_path):
    X, y = toy_set()
    svm = train_svm(X, y, names=("asymmetry", "compactness"))
    save_svm(tmp_path / "svm.json", svm)
    back = load_svm(tmp_path / "svm.json")
    assert svm_to_dict(back) == svm_to_dict(svm)
    assert np.array_equal(back.decision(X), svm.decision(X))
    Xm, ym = xor_set()
    mlp = train_mlp(Xm, ym, epochs=50, seed=1)
    save_mlp(tmp_path / "mlp.json", mlp)
    assert mlp_to_dict(load_mlp(tmp_path / "mlp.json")) == mlp_to_dict(mlp)


@pytest.mark.parametrize("field,value", [("registry_hash", "0" * 64), ("version", 99),
                                         ("format", "something.else")])
def test_model_header_checks(tmp_path, field, value):
    X, y = toy_set()
    d = svm_to_dict(train_svm(X, y))
    d[field] = value
    p = tmp_path / "svm.json"
    p.write_text(json.dumps(d))
    with pytest.raises(ModelFormatError):
        load_svm(p)


def test_model_malformed_file(tmp_path):
    p = tmp_path / "mlp.json"
    p.write_text("{not json")
    with pytest.raises(ModelFormatError):
        load_mlp(p)
    d = mlp_to_dict(init_model(0))
    d["topology"] = [8, 12, 1]
    p.write_text(json.dumps(d))
    with pytest.raises(ModelFormatError):
        load_mlp(p)

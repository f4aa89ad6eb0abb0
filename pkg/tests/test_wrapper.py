import numpy as np
import pytest

from hawkfs.baselines import KnnClassifier, RwnClassifier
from hawkfs.dataset import Dataset
from hawkfs.hho import HhoParams, SolutionLayout, encode
from hawkfs.wrapper import (CandidateError, CandidateEvaluator, FitnessWeights, evaluate_candidate,
                            fitness_value, repeat_runs, run_wrapper)


def task(n=120, d=5, seed=0):
    rng = np.random.default_rng(seed)
    X = rng.random((n, d))
    y = (X[:, 0] > 0.5).astype(int)
    names = [f"f{i}" for i in range(d)]
    return Dataset(X, y, names, ["a", "b"], sample_ids=np.arange(n) + 1000 * seed)


class Counting:
    """Wraps a classifier, recording every training call."""

    name = "counting"

    def __init__(self, inner=None):
        self.inner = inner or KnnClassifier(3)
        self.calls = []

    def fit(self, X, y, n_classes, n_hidden, seed):
        self.calls.append((X.shape, n_hidden, seed))
        return self.inner.fit(X, y, n_classes, n_hidden, seed)


# ---------------------------------------------------------------- fitness


def test_fitness_examples():
    assert abs(fitness_value(0.0, 20, 20, 1024, 1024) - 0.02) <= 1e-12
    assert abs(fitness_value(1.0, 20, 20, 1024, 1024) - 1.01) <= 1e-12
    assert abs(fitness_value(0.1, 10, 100, 512, 1024) - 0.105) <= 1e-12


@pytest.mark.parametrize("args", [(-0.1, 1, 2, 1, 2), (1.1, 1, 2, 1, 2), (0.1, 0, 2, 1, 2),
                                  (0.1, 3, 2, 1, 2), (0.1, 1, 2, 0, 2), (0.1, 1, 2, 3, 2)])
def test_fitness_preconditions(args):
    with pytest.raises(ValueError):
        fitness_value(*args)


def test_weights_range():
    with pytest.raises(ValueError):
        FitnessWeights(alpha=1.5)


def test_fitness_strictly_increasing_in_each_argument():
    base = (0.3, 5, 20, 100, 1024)
    for pos, bigger in ((0, 0.31), (1, 6), (3, 101)):
        moved = list(base)
        moved[pos] = bigger
        assert fitness_value(*moved) > fitness_value(*base)


# ---------------------------------------------------------------- candidates


def test_cache_hit_trains_once():
    data = task()
    lay = SolutionLayout(5, 4)
    clf = Counting()
    ev = CandidateEvaluator(data.take(range(80)), data.take(range(80, 120)), lay, FitnessWeights(), clf, 7)
    pos = encode(np.array([1, 0, 1, 0, 0], bool), 9, lay)
    a, b = ev.evaluate(pos), ev.evaluate(pos.copy())
    assert a == b and len(clf.calls) == 1 and ev.n_trainings == 1


def test_perfect_validation_fitness():
    data = task()
    lay = SolutionLayout(5, 4)
    pos = encode(np.array([1, 0, 0, 0, 0], bool), 3, lay)
    ev = evaluate_candidate(pos, lay, data.take(range(80)), data.take(range(80, 120)),
                            classifier=KnnClassifier(1))
    assert ev.err == 0.0
    assert ev.fitness == pytest.approx(0.01 * 1 / 5 + 0.01 * 3 / 16, abs=1e-15)


def test_informative_feature_beats_all_features():
    data = task(300, 8, seed=1)
    lay = SolutionLayout(8, 10)
    tr, va = data.take(range(200)), data.take(range(200, 300))
    only = evaluate_candidate(encode(np.eye(8, dtype=bool)[0], 40, lay), lay, tr, va, seed=3)
    full = evaluate_candidate(encode(np.ones(8, bool), 40, lay), lay, tr, va, seed=3)
    assert only.fitness < full.fitness


def test_candidate_trains_only_selected_columns():
    data = task()
    lay = SolutionLayout(5, 4)
    clf = Counting()
    mask = np.array([0, 1, 1, 0, 1], bool)
    evaluate_candidate(encode(mask, 5, lay), lay, data.take(range(80)), data.take(range(80, 120)),
                       classifier=clf)
    assert clf.calls[0][0] == (80, 3) and clf.calls[0][1] == 5


def test_shared_cache_dict():
    data = task()
    lay = SolutionLayout(5, 4)
    cache = {}
    clf = Counting()
    pos = encode(np.array([1, 1, 0, 0, 0], bool), 2, lay)
    for _ in range(3):
        evaluate_candidate(pos, lay, data.take(range(80)), data.take(range(80, 120)),
                           classifier=clf, cache=cache)
    assert len(clf.calls) == 1 and len(cache) == 1


def test_classifier_failure_carries_candidate_context():
    class Broken:
        name = "broken"

        def fit(self, *a):
            raise np.linalg.LinAlgError("boom")

    data = task()
    lay = SolutionLayout(5, 4)
    with pytest.raises(CandidateError, match="broken failed on candidate"):
        evaluate_candidate(encode(np.ones(5, bool), 4, lay), lay, data.take(range(80)),
                           data.take(range(80, 120)), classifier=Broken())


def test_layout_mismatch():
    data = task()
    with pytest.raises(ValueError):
        CandidateEvaluator(data, data, SolutionLayout(4, 4), FitnessWeights(), KnnClassifier(), 0)


# ---------------------------------------------------------------- full runs


def splits(seed=0):
    data = task(150, 6, seed)
    return data.take(range(75)), data.take(range(75, 100)), data.take(range(100, 150))


def fingerprint(r):
    return (r.decoded.key(), r.test_metrics, r.validation_eval, r.curve.tolist())


def test_run_wrapper_deterministic():
    tr, va, te = splits()
    params = HhoParams(6, 5)
    lay = SolutionLayout(6, 6)
    a = run_wrapper(tr, va, te, params, layout=lay, run_seed=4)
    b = run_wrapper(tr, va, te, params, layout=lay, run_seed=4)
    assert fingerprint(a) == fingerprint(b)


def test_cache_transparency():
    tr, va, te = splits(1)
    params = HhoParams(6, 6)
    lay = SolutionLayout(6, 6)
    a = run_wrapper(tr, va, te, params, layout=lay, run_seed=2, use_cache=True)
    b = run_wrapper(tr, va, te, params, layout=lay, run_seed=2, use_cache=False)
    assert fingerprint(a) == fingerprint(b)
    assert a.n_trainings <= b.n_trainings


def test_final_model_uses_train_and_validation_only():
    tr, va, te = splits(2)
    clf = Counting(RwnClassifier())
    res = run_wrapper(tr, va, te, HhoParams(4, 3), layout=SolutionLayout(6, 5),
                      classifier=clf, run_seed=0)
    shape, n_hidden, _ = clf.calls[-1]
    assert shape == (100, res.decoded.n_selected) and n_hidden == res.decoded.n_hidden
    assert set(res.train_ids) == set(tr.sample_ids) | set(va.sample_ids)
    assert not set(res.train_ids) & set(te.sample_ids)
    assert res.selected_features == [n for n, m in zip(tr.feature_names, res.decoded.feature_mask) if m]


def test_search_result_serializes():
    import json

    tr, va, te = splits()
    res = run_wrapper(tr, va, te, HhoParams(4, 2), layout=SolutionLayout(6, 5), run_seed=1)
    doc = json.loads(json.dumps(res.to_dict()))
    assert doc["n_hidden"] == res.decoded.n_hidden
    assert doc["test_metrics"]["f_measure"] == res.test_metrics.f_measure


def test_repeat_runs_identity_and_mean():
    tr, va, te = splits(3)
    params, lay = HhoParams(4, 3), SolutionLayout(6, 5)
    one = repeat_runs(1, tr, va, te, params, layout=lay, run_seed=9)
    single = run_wrapper(tr, va, te, params, layout=lay, run_seed=9)
    assert one.aggregate["f_measure"] == single.test_metrics.f_measure
    assert one.aggregate["f_measure_std"] == 0.0
    three = repeat_runs(3, tr, va, te, params, layout=lay, run_seed=9)
    assert [r.run_seed for r in three.runs] == [9, 10, 11]
    fs = [r.test_metrics.f_measure for r in three.runs]
    assert three.aggregate["f_measure"] == pytest.approx(sum(fs) / 3, abs=1e-15)
    with pytest.raises(ValueError):
        repeat_runs(0, tr, va, te, params)


def test_repeat_runs_process_pool_matches_sequential():
    tr, va, te = splits(4)
    params, lay = HhoParams(4, 3), SolutionLayout(6, 5)
    seq = repeat_runs(2, tr, va, te, params, layout=lay, run_seed=1)
    par = repeat_runs(2, tr, va, te, params, layout=lay, run_seed=1, workers=2)
    assert [fingerprint(r) for r in seq.runs] == [fingerprint(r) for r in par.runs]

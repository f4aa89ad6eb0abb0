import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hawkfs.metrics import BINARY, MACRO, MetricsReport, confusion, evaluate, report


def test_confusion_perfect():
    cm = confusion([0, 1, 0], [0, 1, 0], 2)
    np.testing.assert_array_equal(cm, [[2, 0], [0, 1]])


def test_confusion_all_wrong():
    cm = confusion([0, 1, 1, 0], [1, 0, 0, 1], 2)
    assert np.trace(cm) == 0


def test_confusion_matches_tally():
    rng = np.random.default_rng(7)
    yt, yp = rng.integers(0, 4, 100), rng.integers(0, 4, 100)
    tally = [[0] * 4 for _ in range(4)]
    for a, b in zip(yt, yp):
        tally[a][b] += 1
    np.testing.assert_array_equal(confusion(yt, yp, 4), tally)


def test_confusion_errors():
    with pytest.raises(ValueError):
        confusion([0, 1], [0], 2)
    with pytest.raises(ValueError):
        confusion([0, 2], [0, 1], 2)


def test_report_perfect_binary():
    r = report([[50, 0], [0, 50]])
    assert (r.accuracy, r.precision, r.recall, r.f_measure) == (1.0, 1.0, 1.0, 1.0)
    assert r.averaging == BINARY


def test_report_binary_arithmetic():
    # rows true, cols predicted; class 1 positive: TP=8, FN=2, FP=2, TN=88
    r = report([[88, 2], [2, 8]])
    assert r.precision == pytest.approx(0.8, abs=1e-12)
    assert r.recall == pytest.approx(0.8, abs=1e-12)
    assert r.f_measure == pytest.approx(0.8, abs=1e-12)
    assert r.accuracy == pytest.approx(0.96, abs=1e-12)


def test_report_macro_three_classes():
    cm = np.array([[5, 2, 0], [1, 7, 3], [0, 4, 6]])
    # hand table: precision = diag / column sums, recall = diag / row sums
    P = [5 / 6, 7 / 13, 6 / 9]
    R = [5 / 7, 7 / 11, 6 / 10]
    F = [2 * p * r / (p + r) for p, r in zip(P, R)]
    out = report(cm)
    assert out.averaging == MACRO
    assert out.precision == pytest.approx(sum(P) / 3, abs=1e-12)
    assert out.recall == pytest.approx(sum(R) / 3, abs=1e-12)
    assert out.f_measure == pytest.approx(sum(F) / 3, abs=1e-12)
    assert out.accuracy == pytest.approx(18 / 28, abs=1e-12)
    assert [c.support for c in out.per_class] == [7, 11, 10]


def test_zero_denominators():
    r = report([[10, 0], [0, 0]], BINARY)
    assert (r.precision, r.recall, r.f_measure) == (0.0, 0.0, 0.0)
    with pytest.raises(ValueError):
        report([[0, 0], [0, 0]])


def test_json_roundtrip():
    r = evaluate([0, 1, 2, 2], [0, 2, 2, 1], 3)
    back = MetricsReport.from_dict(r.to_dict())
    assert back == r


@settings(max_examples=100, deadline=None)
@given(st.integers(2, 4), st.lists(st.tuples(st.integers(0, 3), st.integers(0, 3)), min_size=1, max_size=60), st.randoms())
def test_metric_properties(k, pairs, rnd):
    yt = [a % k for a, _ in pairs]
    yp = [b % k for _, b in pairs]
    r = evaluate(yt, yp, k)
    for v in (r.accuracy, r.precision, r.recall, r.f_measure):
        assert 0.0 <= v <= 1.0
    cm = confusion(yt, yp, k)
    assert (r.accuracy == 1.0) == (np.count_nonzero(cm - np.diag(np.diag(cm))) == 0)
    for c in r.per_class:
        if c.precision + c.recall > 0:
            assert min(c.precision, c.recall) - 1e-12 <= c.f_measure <= max(c.precision, c.recall) + 1e-12
    order = list(range(len(yt)))
    rnd.shuffle(order)
    s = evaluate([yt[i] for i in order], [yp[i] for i in order], k)
    assert s == r

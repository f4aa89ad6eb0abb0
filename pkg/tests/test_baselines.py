import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hawkfs.baselines import KnnClassifier, RwnClassifier, knn_predict, knn_train, make_classifier


def brute_knn(X, y, q, k, n_classes):
    d = [(float(((q - x) ** 2).sum()), i) for i, x in enumerate(X)]
    d.sort()
    votes = [0] * n_classes
    for _, i in d[:k]:
        votes[y[i]] += 1
    return votes.index(max(votes))


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000), st.integers(1, 7), st.integers(2, 4))
def test_knn_matches_brute_force(seed, k, n_classes):
    rng = np.random.default_rng(seed)
    # coarse grid values make equal distances common
    X = rng.integers(0, 3, (30, 2)).astype(float)
    y = rng.integers(0, n_classes, 30)
    Q = rng.integers(0, 3, (10, 2)).astype(float)
    model = knn_train(X, y, k, n_classes)
    expect = [brute_knn(X, y, q, k, n_classes) for q in Q]
    assert knn_predict(model, Q).tolist() == expect
    assert knn_predict(model, Q, chunk_cells=1).tolist() == expect


def test_distance_tie_prefers_lower_index():
    X = np.array([[1.0], [-1.0], [5.0]])
    model = knn_train(X, [1, 0, 0], k=1)
    assert knn_predict(model, [[0.0]]).tolist() == [1]


def test_vote_tie_prefers_lower_class():
    X = np.array([[1.0], [2.0]])
    model = knn_train(X, [1, 0], k=2)
    assert knn_predict(model, [[0.0]]).tolist() == [0]


def test_k_larger_than_training_set():
    with pytest.raises(ValueError, match="exceeds"):
        knn_train(np.zeros((3, 2)), [0, 1, 0], k=5)


def test_column_mismatch():
    model = knn_train(np.zeros((3, 2)), [0, 1, 0], k=1)
    with pytest.raises(ValueError):
        knn_predict(model, np.zeros((1, 3)))


def test_make_classifier():
    assert isinstance(make_classifier("knn", k=3), KnnClassifier)
    assert make_classifier("rwn").weight_range == (-1.0, 1.0)
    with pytest.raises(ValueError, match="unknown classifier"):
        make_classifier("svm")


def test_rwn_classifier_respects_hidden_size_and_seed():
    rng = np.random.default_rng(0)
    X, y = rng.random((40, 3)), rng.integers(0, 2, 40)
    a = RwnClassifier().fit(X, y, 2, 17, seed=3)
    b = RwnClassifier().fit(X, y, 2, 17, seed=3)
    assert a.input_weights.shape == (17, 3)
    np.testing.assert_array_equal(a.predict(X), b.predict(X))


def test_knn_ignores_hidden_size():
    X = np.random.default_rng(1).random((20, 2))
    y = (X[:, 0] > 0.5).astype(int)
    a = KnnClassifier(3).fit(X, y, 2, 1, 0).predict(X)
    b = KnnClassifier(3).fit(X, y, 2, 1024, 9).predict(X)
    np.testing.assert_array_equal(a, b)


def test_two_far_clusters():
    rng = np.random.default_rng(2)
    X = np.vstack([rng.normal(0, 0.1, (20, 2)), rng.normal(10, 0.1, (20, 2))])
    y = np.r_[np.zeros(20, int), np.ones(20, int)]
    model = knn_train(X, y, 5)
    assert knn_predict(model, [[0.2, -0.1], [9.8, 10.1]]).tolist() == [0, 1]


def test_200_point_instance_matches_brute_force():
    rng = np.random.default_rng(3)
    X, y = rng.random((200, 4)), rng.integers(0, 3, 200)
    Q = rng.random((50, 4))
    model = knn_train(X, y, 5, 3)
    assert knn_predict(model, Q).tolist() == [brute_knn(X, y, q, 5, 3) for q in Q]


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10_000))
def test_permutation_invariance_without_ties(seed):
    rng = np.random.default_rng(seed)
    X, y, Q = rng.random((60, 3)), rng.integers(0, 2, 60), rng.random((15, 3))
    perm = rng.permutation(60)
    a = knn_predict(knn_train(X, y, 3, 2), Q)
    b = knn_predict(knn_train(X[perm], y[perm], 3, 2), Q)
    np.testing.assert_array_equal(a, b)

import numpy as np
import pytest

from hawkfs.baselines import KnnClassifier
from hawkfs.dataset import Dataset, concat, partition_clients
from hawkfs.distributed import ClientError, DistributedReport, compare, run_distributed
from hawkfs.hho import HhoParams, SolutionLayout
from hawkfs.metrics import MetricsReport


def splits(n=200, seed=0):
    rng = np.random.default_rng(seed)
    X = rng.random((n, 5))
    y = (X[:, 0] + X[:, 1] > 1.0).astype(int)
    data = Dataset(X, y, [f"f{i}" for i in range(5)], ["a", "b"], sample_ids=np.arange(n))
    return data.take(range(0, 100)), data.take(range(100, 140)), data.take(range(140, n))


PARAMS = HhoParams(4, 3)
LAYOUT = SolutionLayout(5, 5)


class Recording:
    name = "recording"

    def __init__(self):
        self.inputs = []

    def fit(self, X, y, n_classes, n_hidden, seed):
        self.inputs.append(np.array(X))
        return KnnClassifier(3).fit(X, y, n_classes, n_hidden, seed)


def run(n_clients=2, seed=0, workers=1, classifier=None):
    tr, va, te = splits()
    return run_distributed(tr, va, te, n_clients, PARAMS, classifier=classifier or KnnClassifier(3),
                           seed=seed, layout=LAYOUT, workers=workers, dataset_id="ds")


def fingerprint(rep: DistributedReport):
    return [(c.client_id, c.result.decoded.key(), c.result.test_metrics, c.sample_ids.tolist())
            for c in rep.per_client], rep.mean, rep.std


def test_client_rows_disjoint():
    rep = run(3)
    ids = [set(c.result.train_ids) for c in rep.per_client]
    for i in range(3):
        for j in range(i + 1, 3):
            assert not ids[i] & ids[j]
    assert sum(c.local_train_size for c in rep.per_client) == 140


def test_single_client_rejected():
    with pytest.raises(ClientError, match="at least 2"):
        run(1)


def test_single_class_client_rejected():
    tr, va, te = splits()
    y = np.zeros(tr.n_samples, int)
    y[:1] = 1
    lopsided = Dataset(tr.features, y, tr.feature_names, tr.class_names, tr.sample_ids)
    vz = Dataset(va.features, np.zeros(va.n_samples, int), va.feature_names, va.class_names, va.sample_ids)
    with pytest.raises(ClientError, match="single class"):
        run_distributed(lopsided, vz, te, 2, PARAMS, seed=0, layout=LAYOUT)


def test_data_locality():
    clf = Recording()
    rep = run(2, classifier=clf)
    tr, va, _ = splits()
    shards = partition_clients(concat([tr, va]), 2, 0)
    values = [set(s.features.ravel().tolist()) for s in shards]
    owners = []
    for X in clf.inputs:
        seen = set(X.ravel().tolist())
        owner = [i for i, v in enumerate(values) if seen <= v]
        assert len(owner) == 1
        owners.append(owner[0])
    # client 0 runs to completion before client 1 starts
    assert owners == sorted(owners) and set(owners) == {0, 1}
    assert [c.sample_ids.tolist() for c in rep.per_client] == [s.sample_ids.tolist() for s in shards]


def test_deterministic_and_parallel_equivalent():
    a, b = run(2, seed=5), run(2, seed=5)
    assert fingerprint(a) == fingerprint(b)
    assert fingerprint(run(2, seed=5, workers=2)) == fingerprint(a)


def test_means_are_client_means_within_range():
    rep = run(3, seed=1)
    for name, mean in rep.mean.items():
        vals = [getattr(c.result.test_metrics, name) for c in rep.per_client]
        assert mean == pytest.approx(np.mean(vals), abs=1e-15)
        assert min(vals) <= mean <= max(vals)


def test_compare_identical_gives_zero():
    rep = run(2)
    cen = dict(rep.mean)
    table = compare(cen, rep, "ds")
    assert all(row["delta"] == 0.0 for row in table.values())


def test_compare_table_gap():
    cen = MetricsReport(0.974, 0.973, 0.975, 0.974, "binary_positive_class", ())
    dist = {"mean": {"accuracy": 0.963, "precision": 0.963, "recall": 0.963, "f_measure": 0.963},
            "dataset_id": "x"}
    table = compare(cen, dist, "x")
    assert table["f_measure"]["delta"] == pytest.approx(0.011, abs=1e-12)


def test_compare_from_serialized_report():
    rep = run(2)
    doc = rep.to_dict()
    assert compare(rep.mean, doc, "ds") == compare(rep.mean, rep, "ds")


def test_compare_dataset_mismatch():
    rep = run(2)
    with pytest.raises(ValueError, match="mismatch"):
        compare(rep.mean, rep, "other")

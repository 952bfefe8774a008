import json
import os

import numpy as np
import pytest

from malady.active import ALBudget
from malady.errors import ConfigError, FormatError
from malady.harness import (BoundsConfig, ExperimentConfig, FileDataset, SyntheticBlobsSpec,
                            SyntheticDataset, aggregate_records, config_hash, generate_blobs,
                            load_dataset, run_experiment, write_binary_dataset,
                            write_csv_dataset)


def test_load_csv(tmp_path):
    path = tmp_path / "d.csv"
    path.write_text("0,0,1\n1,0,1\n0,1,0\n")
    X, labels, mapping = load_dataset(path)
    assert X.shape == (3, 2) and labels.tolist() == [1, 1, 0] and mapping == (0, 1)


def test_load_csv_remaps(tmp_path):
    path = tmp_path / "d.csv"
    path.write_text("0.5,7\n1.5,3\n2.5,7\n")
    X, labels, mapping = load_dataset(path)
    assert labels.tolist() == [1, 0, 1] and mapping == (3, 7)


def test_load_csv_label_column(tmp_path):
    path = tmp_path / "d.csv"
    path.write_text("2,0.1,0.2\n5,0.3,0.4\n")
    X, labels, _ = load_dataset(path, label_column=0)
    np.testing.assert_array_equal(X, [[0.1, 0.2], [0.3, 0.4]])
    assert labels.tolist() == [0, 1]


def test_load_csv_no_labels(tmp_path):
    path = tmp_path / "d.csv"
    path.write_text("1,2\n3,4\n")
    X, labels, mapping = load_dataset(path, label_column=None)
    assert X.shape == (2, 2) and labels is None


@pytest.mark.parametrize("body,line", [
    ("0,0,1\n1,0\n", 2),
    ("0,0,1\n1,0,x\n", 2),
    ("0,nan,1\n", 1),
    ("0,0,1.5\n", 1),
])
def test_load_csv_errors_name_line(tmp_path, body, line):
    path = tmp_path / "d.csv"
    path.write_text(body)
    with pytest.raises(FormatError, match=f"line {line}"):
        load_dataset(path)


def test_csv_roundtrip(tmp_path):
    X, labels = generate_blobs(SyntheticBlobsSpec(points_per_cluster=5), seed=3)
    write_csv_dataset(tmp_path / "b.csv", X, labels)
    X2, labels2, _ = load_dataset(tmp_path / "b.csv")
    np.testing.assert_array_equal(X, X2)
    np.testing.assert_array_equal(labels, labels2)


def test_binary_roundtrip_and_truncation(tmp_path):
    X = np.random.default_rng(0).normal(size=(7, 3))
    path = tmp_path / "x.bin"
    write_binary_dataset(path, X)
    X2, labels, _ = load_dataset(path, "binary", None)
    np.testing.assert_array_equal(X, X2)
    assert labels is None
    path.write_bytes(path.read_bytes()[:-8])
    with pytest.raises(FormatError):
        load_dataset(path, "binary", None)


def test_blobs():
    X, labels = generate_blobs(seed=0)
    assert X.shape == (2400, 2) and np.bincount(labels).tolist() == [1200, 1200]
    C = SyntheticBlobsSpec().centers()
    for c in range(6):
        mean = X[400 * c: 400 * (c + 1)].mean(axis=0)
        assert np.all(np.abs(mean - C[c]) <= 3 * 0.25 / np.sqrt(400))
        assert np.all(labels[400 * c: 400 * (c + 1)] == c % 2)
    np.testing.assert_array_equal(X, generate_blobs(seed=0)[0])


TINY = {"dataset": {"synthetic": {"points_per_cluster": 20, "seed": 1}},
        "kernel": {"kind": "gaussian", "k_neighbors": 8},
        "budget": {"initial_per_class": 2, "total": 8},
        "seeds": [0, 1]}


def tiny(tmp_path, **kw):
    return ExperimentConfig.from_dict({**TINY, "output": str(tmp_path), **kw})


def test_config_roundtrip(tmp_path):
    cfg = tiny(tmp_path, bounds={"mode": "flexible", "slack": 0.1})
    again = ExperimentConfig.from_dict(cfg.to_dict())
    assert again.to_dict() == cfg.to_dict() and config_hash(again) == config_hash(cfg)
    path = tmp_path / "c.json"
    path.write_text(json.dumps(cfg.to_dict()))
    assert ExperimentConfig.from_json(path).to_dict() == cfg.to_dict()


@pytest.mark.parametrize("bad", [
    {**TINY, "colour": 1},
    {**TINY, "kernel": {"kind": "gaussian", "k": 3}},
    {**TINY, "dataset": {"synthetic": {"spread": 2}}},
    {**TINY, "kernel": {"kind": "laplace"}},
    {**TINY, "acquisition": "entropy"},
    {**TINY, "seeds": []},
    {**TINY, "bounds": {"mode": "exact", "sizes": [1, 2]}},
    {**TINY, "dataset": {"path": "x.bin", "format": "binary"}},
    {"kernel": {}},
])
def test_config_rejects(bad):
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict(bad)


def test_hash_ignores_output_only(tmp_path):
    base = tiny(tmp_path)
    assert config_hash(base) == config_hash(base.replace(output="elsewhere"))
    variants = [base.replace(steps=99), base.replace(seeds=(0, 2)),
                base.replace(bounds=BoundsConfig("none")),
                base.replace(budget=ALBudget(2, 9)), base.replace(acquisition="random"),
                base.replace(dataset=SyntheticDataset(SyntheticBlobsSpec(points_per_cluster=20),
                                                      2))]
    hashes = {config_hash(v) for v in variants} | {config_hash(base)}
    assert len(hashes) == len(variants) + 1


def test_degenerate_budget(tmp_path):
    cfg = tiny(tmp_path, budget={"initial_per_class": 2, "total": 4})
    res = run_experiment(cfg)
    curve = res.aggregate["curve"]
    assert len(curve) == 1 and curve[0]["num_labeled"] == 4 and curve[0]["n_seeds"] == 2
    for s in (0, 1):
        lines = open(os.path.join(res.directory, f"seed-{s}.csv")).read().splitlines()
        assert len(lines) == 2 and lines[1].startswith(f"{s},0,4,-1,")


def test_outputs_and_aggregate(tmp_path):
    res = run_experiment(tiny(tmp_path))
    assert sorted(os.listdir(res.directory)) == [
        "aggregate.json", "curve.csv", "meta.json", "seed-0.csv", "seed-1.csv"]
    agg = json.load(open(os.path.join(res.directory, "aggregate.json")))
    for point in agg["curve"]:
        accs = [r[3] for s in (0, 1) for r in res.records[s].rows if r[1] == point["num_labeled"]]
        assert point["mean"] == pytest.approx(np.mean(accs), abs=0)
        assert point["std"] == pytest.approx(np.std(accs), abs=0)
    assert agg["failures"] == []
    curve_csv = open(os.path.join(res.directory, "curve.csv")).read().splitlines()
    assert curve_csv[0] == "acquisition,seed,num_labeled,accuracy"
    assert len(curve_csv) == 1 + sum(len(r.rows) for r in res.records.values())


def test_rerun_is_byte_identical(tmp_path):
    first = run_experiment(tiny(tmp_path / "a"))
    second = run_experiment(tiny(tmp_path / "b"), n_jobs=2)
    for name in ("aggregate.json", "curve.csv", "seed-0.csv", "seed-1.csv"):
        with open(os.path.join(first.directory, name), "rb") as f1, \
                open(os.path.join(second.directory, name), "rb") as f2:
            assert f1.read() == f2.read(), name


def test_graph_built_once(tmp_path, monkeypatch):
    import malady.harness.experiment as exp
    calls = []
    real = exp.build_graph

    def counting(*args):
        calls.append(1)
        return real(*args)

    monkeypatch.setattr(exp, "build_graph", counting)
    run_experiment(tiny(tmp_path, seeds=[0, 1, 2], budget={"initial_per_class": 2,
                                                          "total": 5}))
    assert len(calls) == 1


def test_seed_failure_is_recorded(tmp_path):
    # each class has 60 points, so no seed can draw 61 initial labels
    cfg = tiny(tmp_path, budget={"initial_per_class": 61, "total": 120})
    res = run_experiment(cfg)
    assert set(res.failures) == {0, 1}
    agg = json.load(open(os.path.join(res.directory, "aggregate.json")))
    assert [f["seed"] for f in agg["failures"]] == [0, 1]
    assert agg["final_accuracy"]["mean"] is None


def test_file_dataset_experiment(tmp_path):
    X, labels = generate_blobs(SyntheticBlobsSpec(points_per_cluster=20), seed=1)
    write_csv_dataset(tmp_path / "blobs.csv", X, labels)
    from_file = tiny(tmp_path / "f", dataset={"path": str(tmp_path / "blobs.csv")})
    synthetic = tiny(tmp_path / "s")
    assert isinstance(from_file.dataset, FileDataset)
    a, b = run_experiment(from_file), run_experiment(synthetic)
    assert a.records[0].rows == b.records[0].rows


def test_aggregate_records_groups_by_size(tmp_path):
    res = run_experiment(tiny(tmp_path))
    curve = aggregate_records(res.records)
    assert [c["num_labeled"] for c in curve] == list(range(4, 9))

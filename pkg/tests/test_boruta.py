import csv
import json
import math

import numpy as np
import pytest
from scipy import stats

from rferns import bench
from rferns.boruta import (
    BorutaConfig,
    Status,
    add_shadows,
    boruta_run,
    hit_test,
)
from rferns.dataset import from_arrays


def small_problem(seed=0, extra=20):
    return bench.augment_with_shadow_features(bench.gen_gaussian_classes(30, 2, 2, 3.0, seed), extra, seed)


# add_shadows --------------------------------------------------------------

def test_add_shadows_shape_and_names():
    p = small_problem()
    aug = add_shadows(p.dataset, 5)
    m = p.dataset.n_attributes
    assert aug.n_attributes == 2 * m
    assert aug.n_objects == p.dataset.n_objects and aug.n_classes == p.dataset.n_classes
    assert aug.names[m:] == tuple(nm + "_shadow" for nm in p.dataset.names)
    assert np.array_equal(aug.labels, p.dataset.labels)
    assert np.array_equal(aug.matrix[:, :m], p.dataset.matrix)


def test_shadows_are_permutations():
    p = small_problem()
    aug = add_shadows(p.dataset, 5)
    m = p.dataset.n_attributes
    for j in range(m):
        assert np.array_equal(np.sort(aug.matrix[:, m + j]), np.sort(p.dataset.matrix[:, j]))
    assert not np.array_equal(aug.matrix[:, m:], p.dataset.matrix)


def test_constant_column_shadow_is_constant():
    ds = from_arrays(np.column_stack([np.full(10, 2.5), np.arange(10.0)]), np.arange(10) % 2)
    aug = add_shadows(ds, 1)
    assert np.all(aug.matrix[:, 2] == 2.5)


def test_add_shadows_seeded():
    ds = small_problem().dataset
    assert np.array_equal(add_shadows(ds, 3).matrix, add_shadows(ds, 3).matrix)
    assert not np.array_equal(add_shadows(ds, 3).matrix, add_shadows(ds, 4).matrix)


# hit_test -----------------------------------------------------------------

def test_all_hits_confirm():
    assert hit_test(15, 15, 0.01) is Status.CONFIRMED
    assert 0.5**15 == pytest.approx(3.05e-5, rel=1e-3)


def test_no_hits_reject():
    assert hit_test(0, 15, 0.01) is Status.REJECTED


def test_one_trial_is_undecided():
    assert hit_test(1, 1, 0.01) is Status.TENTATIVE
    assert hit_test(0, 1, 0.01) is Status.TENTATIVE


def test_hit_test_matches_scipy_binomtest():
    for trials in (5, 12, 30):
        for hits in range(trials + 1):
            p_hi = stats.binomtest(hits, trials, 0.5, alternative="greater").pvalue
            p_lo = stats.binomtest(hits, trials, 0.5, alternative="less").pvalue
            want = Status.TENTATIVE
            if min(1, 2 * p_hi) < 0.05:
                want = Status.CONFIRMED
            elif min(1, 2 * p_lo) < 0.05:
                want = Status.REJECTED
            assert hit_test(hits, trials, 0.05) is want


# config -------------------------------------------------------------------

@pytest.mark.parametrize("kw", [{"alpha": 0.0}, {"alpha": 1.0}, {"max_iterations": 0}])
def test_config_validation(kw):
    with pytest.raises(ValueError):
        BorutaConfig(**kw)


# boruta_run with scripted providers ---------------------------------------

class Recorder:
    """Scripted importance: ``strong`` names always beat the shadows, ``weak``
    names never do, and everything else wins every other iteration."""

    def __init__(self, strong=(), weak=()):
        self.strong, self.weak = set(strong), set(weak)
        self.seen = []

    def __call__(self, data, seed):
        self.seen.append(data.names)
        m = data.n_attributes // 2
        imp = np.zeros(2 * m)
        neutral = 2.0 if len(self.seen) % 2 else 0.5
        for j, nm in enumerate(data.names[:m]):
            imp[j] = 10.0 if nm in self.strong else (-10.0 if nm in self.weak else neutral)
        imp[m:] = 1.0
        return imp


def test_scripted_decisions_and_partition():
    ds = small_problem().dataset
    rec = Recorder(strong={"F1"}, weak=set(ds.names[2:]))
    res = boruta_run(ds, BorutaConfig(max_iterations=40), rec)
    assert res.confirmed == [0]
    assert res.rejected == list(range(2, ds.n_attributes))
    assert res.tentative == [1]
    assert sorted(res.confirmed + res.rejected + res.tentative) == list(range(ds.n_attributes))
    assert res.iterations == 40
    for f in res.features:
        assert f.hits <= f.trials


def test_rejected_never_reappear():
    ds = small_problem().dataset
    rec = Recorder(weak=set(ds.names[5:]))
    res = boruta_run(ds, BorutaConfig(max_iterations=30), rec)
    assert res.rejected == list(range(5, ds.n_attributes))
    for f in res.features:
        present = [f.name in names for names in rec.seen]
        shadow = [f.name + "_shadow" in names for names in rec.seen]
        # an attribute takes part in a prefix of the iterations, one per trial
        assert present == [True] * f.trials + [False] * (len(rec.seen) - f.trials)
        assert shadow == present
    assert res.history == [len(n) // 2 for n in rec.seen]


def test_stops_when_all_decided():
    ds = small_problem(extra=3).dataset
    rec = Recorder(strong={"F1", "F2"}, weak=set(ds.names[2:]))
    res = boruta_run(ds, BorutaConfig(max_iterations=100), rec)
    assert not res.tentative
    assert res.iterations < 100
    assert len(rec.seen) == res.iterations


def test_tiny_alpha_makes_no_decisions():
    ds = small_problem().dataset
    rec = Recorder(strong={"F1"}, weak=set(ds.names[2:]))
    res = boruta_run(ds, BorutaConfig(max_iterations=20, alpha=1e-12), rec)
    assert res.counts() == {"Tentative": ds.n_attributes, "Confirmed": 0, "Rejected": 0}


def test_bonferroni_delays_decisions():
    ds = small_problem().dataset
    cfg = dict(max_iterations=9, alpha=0.01)
    rec = Recorder(strong={"F1"})
    corrected = boruta_run(ds, BorutaConfig(**cfg), rec)
    plain = boruta_run(ds, BorutaConfig(correction=False, **cfg), Recorder(strong={"F1"}))
    assert plain.confirmed == [0]
    assert corrected.confirmed == []


def test_provider_failure_returns_partial():
    ds = small_problem().dataset
    calls = []

    def flaky(data, seed):
        calls.append(seed)
        if len(calls) == 3:
            raise RuntimeError("boom")
        return Recorder(strong={"F1"})(data, seed)

    res = boruta_run(ds, BorutaConfig(max_iterations=10), flaky)
    assert res.iterations == 2
    assert "boom" in res.error
    assert all(f.trials == 2 for f in res.features)


def test_bad_provider_shape_is_an_error():
    ds = small_problem().dataset
    res = boruta_run(ds, BorutaConfig(max_iterations=3), lambda d, s: np.zeros(3))
    assert "shape" in res.error and res.iterations == 0


def test_nan_importance_never_hits():
    ds = small_problem(extra=2).dataset
    res = boruta_run(ds, BorutaConfig(max_iterations=5),
                     lambda d, s: np.full(d.n_attributes, math.nan))
    assert all(f.hits == 0 for f in res.features)


# with the ferns provider --------------------------------------------------

def test_ferns_provider_finds_relevant():
    p = small_problem(extra=40)
    res = boruta_run(p.dataset, BorutaConfig(max_iterations=20, depth=5, scans=100, seed=1))
    assert res.confirmed[:2] == [0, 1]
    assert len(res.rejected) >= 30
    again = boruta_run(p.dataset, BorutaConfig(max_iterations=20, depth=5, scans=100, seed=1))
    assert again.rows() == res.rows()


def test_one_iteration_all_tentative():
    p = small_problem()
    res = boruta_run(p.dataset, BorutaConfig(max_iterations=1, depth=3, scans=20))
    assert len(res.tentative) == p.dataset.n_attributes


def test_boruta_deterministic_across_workers():
    p = small_problem(extra=30)
    a = boruta_run(p.dataset, BorutaConfig(max_iterations=8, depth=5, scans=60, seed=2, workers=1))
    b = boruta_run(p.dataset, BorutaConfig(max_iterations=8, depth=5, scans=60, seed=2, workers=8))
    assert a.rows() == b.rows()


# serialization ------------------------------------------------------------

def test_result_files(tmp_path):
    ds = small_problem(extra=4).dataset
    res = boruta_run(ds, BorutaConfig(max_iterations=12), Recorder(strong={"F1"}, weak={"F2"}))
    res.write_json(tmp_path / "b.json")
    res.write_csv(tmp_path / "b.csv")
    doc = json.loads((tmp_path / "b.json").read_text())
    assert [f["status"] for f in doc["features"]][:2] == ["Confirmed", "Rejected"]
    rows = list(csv.DictReader(open(tmp_path / "b.csv")))
    assert list(rows[0]) == ["name", "status", "hits", "trials", "final_importance"]
    assert res.iterations == 12
    assert rows[0]["hits"] == rows[0]["trials"] and float(rows[0]["final_importance"]) == 10.0

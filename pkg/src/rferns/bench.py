"""Synthetic benchmark problems with known relevant attributes, and a grid
runner that scores selections by false positives and false negatives.

Problem family (desk-scale stand-ins for the classic benchmarks):

=========  ==========================================================
Iri        gaussian classes (3 x 50, 4 features) + 4996 shuffled copies
Iri2       the same base + 1000 shuffled copies
Mad        5-bit parity with 15 noisy linear combinations + 480 noise
Mad_w      Mad keeping only the first ``w`` noise columns
Rnd/Rnd2   feature-shuffled gaussian classes (72 x 1000)
Rnd3       label-shuffled gaussian classes (72 x 1000)
=========  ==========================================================
"""

from __future__ import annotations

import csv
import json
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, replace
from typing import Callable, Iterable, Sequence

import numpy as np

from ._random import TAG_GENERATOR, stream_generator
from .dataset import Dataset, Schema, from_arrays, write_csv
from .importance import ferns_for_scans, compute_importance, select_features

MADELON_BASE = 5
MADELON_COMBOS = 15
MADELON_BASE_NOISE = 0.3
MADELON_COMBO_NOISE = 0.1


@dataclass
class BenchProblem:
    dataset: Dataset
    relevant: np.ndarray
    name: str
    gen_seed: int

    def __post_init__(self):
        self.relevant = np.asarray(self.relevant, dtype=bool)
        if self.relevant.shape != (self.dataset.n_attributes,):
            raise ValueError("relevant mask length must equal the attribute count")

    def sidecar(self) -> dict:
        names = self.dataset.names
        return {
            "name": self.name,
            "gen_seed": self.gen_seed,
            "n_objects": self.dataset.n_objects,
            "n_attributes": self.dataset.n_attributes,
            "relevant": [names[j] for j in np.flatnonzero(self.relevant)],
        }

    def export(self, csv_path, sidecar_path, label: str = "class") -> None:
        write_csv(self.dataset, csv_path, label)
        with open(sidecar_path, "w") as fh:
            json.dump(self.sidecar(), fh, indent=1)
            fh.write("\n")


def gen_gaussian_classes(
    n_per_class: int, n_features: int, n_classes: int, class_separation: float, seed: int
) -> BenchProblem:
    """Spherical unit gaussians; class ``c`` is centred at ``c * class_separation`` on every axis."""
    if min(n_per_class, n_features, n_classes) < 1:
        raise ValueError("counts must be positive")
    rng = stream_generator(seed, TAG_GENERATOR, 0)
    y = np.repeat(np.arange(n_classes), n_per_class)
    X = rng.standard_normal((y.size, n_features)) + class_separation * y[:, None]
    ds = from_arrays(X, y, names=[f"F{j + 1}" for j in range(n_features)], n_classes=max(n_classes, 2))
    return BenchProblem(ds, np.ones(n_features, dtype=bool), "gauss", seed)


def augment_with_shadow_features(p: BenchProblem, count: int, seed: int) -> BenchProblem:
    """Append ``count`` irrelevant columns; column ``t`` shuffles original column ``t mod M``."""
    if count < 1:
        raise ValueError("count must be >= 1")
    rng = stream_generator(seed, TAG_GENERATOR, 1)
    ds = p.dataset
    m = ds.n_attributes
    src = [t % m for t in range(count)]
    extra = np.column_stack([ds.matrix[rng.permutation(ds.n_objects), j] for j in src])
    schema = Schema(
        ds.names + tuple(f"{ds.names[j]}_perm{t + 1}" for t, j in enumerate(src)),
        ds.schema.levels + tuple(ds.schema.levels[j] for j in src),
        ds.schema.class_names,
    )
    out = Dataset(np.column_stack([ds.matrix, extra]), ds.labels.copy(), schema)
    rel = np.concatenate([p.relevant, np.zeros(count, dtype=bool)])
    return BenchProblem(out, rel, f"{p.name}+{count}", p.gen_seed)


def gen_madelon(n_objects: int, n_irrelevant: int, seed: int) -> BenchProblem:
    """XOR-style problem: label is the parity of 5 hidden bits.

    Columns are 5 jittered bit features, 15 noisy random linear combinations
    of the clean bits and ``n_irrelevant`` standard-normal noise columns.
    The first 20 columns are relevant.  Noise column ``j`` comes from its own
    stream, so smaller ``n_irrelevant`` gives a column prefix of larger ones.
    """
    if n_objects < 20:
        raise ValueError("n_objects must be >= 20")
    if n_irrelevant < 0:
        raise ValueError("n_irrelevant must be >= 0")
    rng = stream_generator(seed, TAG_GENERATOR, 2)
    bits = rng.integers(0, 2, size=(n_objects, MADELON_BASE))
    signs = 2.0 * bits - 1.0
    y = bits.sum(axis=1) % 2
    base = signs + MADELON_BASE_NOISE * rng.standard_normal(signs.shape)
    weights = rng.standard_normal((MADELON_BASE, MADELON_COMBOS))
    combos = signs @ weights + MADELON_COMBO_NOISE * rng.standard_normal((n_objects, MADELON_COMBOS))
    cols = [base, combos]
    for j in range(n_irrelevant):
        cols.append(stream_generator(seed, TAG_GENERATOR, 1000 + j).standard_normal((n_objects, 1)))
    X = np.column_stack(cols)
    names = (
        [f"B{i + 1}" for i in range(MADELON_BASE)]
        + [f"L{i + 1}" for i in range(MADELON_COMBOS)]
        + [f"N{i + 1}" for i in range(n_irrelevant)]
    )
    rel = np.zeros(X.shape[1], dtype=bool)
    rel[: MADELON_BASE + MADELON_COMBOS] = True
    return BenchProblem(from_arrays(X, y, names, n_classes=2), rel, f"mad{n_irrelevant}", seed)


def nonsense_by_feature_shuffle(p: BenchProblem, seed: int) -> BenchProblem:
    """Shuffle every column independently; labels are kept, nothing stays relevant."""
    rng = stream_generator(seed, TAG_GENERATOR, 3)
    ds = p.dataset
    X = np.column_stack([ds.matrix[rng.permutation(ds.n_objects), j] for j in range(ds.n_attributes)])
    out = Dataset(X, ds.labels.copy(), ds.schema)
    return BenchProblem(out, np.zeros(ds.n_attributes, dtype=bool), f"{p.name}/fshuf", p.gen_seed)


def nonsense_by_label_shuffle(p: BenchProblem, seed: int) -> BenchProblem:
    """Shuffle the labels only, keeping every inter-attribute relation."""
    rng = stream_generator(seed, TAG_GENERATOR, 4)
    ds = p.dataset
    out = ds.with_labels(ds.labels[rng.permutation(ds.n_objects)])
    return BenchProblem(out, np.zeros(ds.n_attributes, dtype=bool), f"{p.name}/lshuf", p.gen_seed)


def iri(seed: int = 0, n_irrelevant: int = 4996, separation: float = 3.0) -> BenchProblem:
    p = gen_gaussian_classes(50, 4, 3, separation, seed)
    p = augment_with_shadow_features(p, n_irrelevant, seed)
    return replace(p, name="iri" if n_irrelevant == 4996 else f"iri{n_irrelevant}")


def iri2(seed: int = 0) -> BenchProblem:
    return replace(iri(seed, 1000), name="iri2")


def rnd(seed: int = 0, n_objects: int = 72, n_features: int = 1000, label_shuffle: bool = False) -> BenchProblem:
    base = gen_gaussian_classes(n_objects // 2, n_features, 2, 1.0, seed)
    if label_shuffle:
        return replace(nonsense_by_label_shuffle(base, seed), name="rnd3")
    return replace(nonsense_by_feature_shuffle(base, seed), name="rnd")


@dataclass
class ExperimentResult:
    problem: str
    depth: int
    scans: int
    ferns: int
    seed: int
    false_positives: int
    false_negatives: int
    runtime_seconds: float
    selected: int = 0
    error: str = ""


CSV_COLUMNS = ["problem", "D", "scans", "K", "seed", "fp", "fn", "runtime_s"]


def score_selection(selected: Iterable[int], relevant: np.ndarray) -> tuple[int, int]:
    mask = np.zeros(relevant.shape, dtype=bool)
    mask[list(selected)] = True
    return int(np.sum(mask & ~relevant)), int(np.sum(~mask & relevant))


def _run_cell(p: BenchProblem, depth: int, scans: int, seed: int, selector, inner_workers: int) -> ExperimentResult:
    m = p.dataset.n_attributes
    try:
        k = ferns_for_scans(m, depth, scans)
        t0 = time.perf_counter()
        if selector is None:
            _, report = compute_importance(p.dataset, depth, k, seed, inner_workers, return_model=False)
            sel = select_features(report)
        else:
            sel = selector(p.dataset, depth, k, seed)
        dt = time.perf_counter() - t0
        fp, fn = score_selection(sel, p.relevant)
        return ExperimentResult(p.name, depth, scans, k, seed, fp, fn, dt, len(sel))
    except Exception as e:  # a failed cell must not stop the sweep
        return ExperimentResult(p.name, depth, scans, 0, seed, -1, -1, 0.0, 0, f"{type(e).__name__}: {e}")


def run_experiment(
    problem: BenchProblem,
    grid: Sequence[tuple[int, int]],
    repeats: int = 10,
    seed: int = 0,
    workers: int = 1,
    selector: Callable | None = None,
) -> list[ExperimentResult]:
    """Run every ``(depth, scans)`` cell ``repeats`` times; repeat ``r`` uses seed ``seed + r``.

    ``selector(dataset, depth, n_ferns, seed) -> indices`` replaces the
    embedded selection when given.  Results come back ordered by
    ``(depth, scans, repeat)`` for any ``workers``.
    """
    if not grid:
        raise ValueError("grid must not be empty")
    jobs = [(d, s, seed + r) for d, s in grid for r in range(repeats)]
    if workers <= 1:
        return [_run_cell(problem, d, s, sd, selector, 1) for d, s, sd in jobs]
    with ThreadPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(lambda j: _run_cell(problem, *j, selector, 1), jobs))


def write_results_csv(results: Sequence[ExperimentResult], path, runtime: bool = True) -> None:
    """``runtime=False`` blanks the wall-clock column so reruns are byte-identical."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for r in results:
            w.writerow([r.problem, r.depth, r.scans, r.ferns, r.seed, r.false_positives,
                        r.false_negatives, f"{r.runtime_seconds:.4f}" if runtime else ""])


def write_results_json(results: Sequence[ExperimentResult], path, runtime: bool = True) -> None:
    rows = []
    for r in results:
        d = asdict(r)
        if not runtime:
            d["runtime_seconds"] = None
        rows.append(d)
    with open(path, "w") as fh:
        json.dump(rows, fh, indent=1)
        fh.write("\n")

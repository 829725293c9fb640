"""Random ferns: seeded bagging, random trunks, leaf scores, ensemble voting."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels as K
from ._random import SEED_SCHEME, TAG_FERNS, as_seed, bag_counts, derive
from .dataset import Dataset, Schema

MAX_DEPTH = 30


@dataclass(frozen=True)
class SplitCriterion:
    """One binary test of a trunk.

    Numeric attributes pass when ``x >= threshold``; categorical attributes
    pass when bit ``level`` of ``mask`` is set.
    """

    attr_index: int
    threshold: float | None = None
    mask: int | None = None

    def passes(self, x: float) -> bool:
        if self.mask is not None:
            return bool((self.mask >> int(x)) & 1)
        return x >= self.threshold


@dataclass(frozen=True)
class FernTrunk:
    criteria: tuple[SplitCriterion, ...]

    @property
    def depth(self) -> int:
        return len(self.criteria)

    def _arrays(self):
        attrs = np.array([c.attr_index for c in self.criteria], dtype=np.int64)
        thr = np.array([0.0 if c.threshold is None else c.threshold for c in self.criteria])
        masks = np.array([0 if c.mask is None else c.mask for c in self.criteria], dtype=np.uint64)
        return attrs, thr, masks


@dataclass(frozen=True)
class Bag:
    """Bootstrap multiset over ``0..n-1``: ``counts[i]`` is the multiplicity of object i."""

    seed: int
    counts: np.ndarray

    @property
    def oob_indices(self) -> np.ndarray:
        return np.flatnonzero(self.counts == 0)

    @property
    def size(self) -> int:
        return int(self.counts.sum())


@dataclass(frozen=True)
class Fern:
    trunk: FernTrunk
    scores: np.ndarray  # (2**depth, n_classes) leaf log-scores
    bag_seed: int


def sample_bag(seed: int, n: int) -> Bag:
    """Draw ``n`` indices uniformly with replacement from a stream seeded by ``seed``."""
    if n < 1:
        raise ValueError(f"bag size must be positive, got {n}")
    return Bag(int(as_seed(seed)), bag_counts(as_seed(seed), n))


def draw_trunk(data: Dataset, depth: int, seed: int) -> FernTrunk:
    """Random trunk: attributes uniform with replacement, thresholds at the
    midpoint of two randomly drawn training values, categorical masks with
    each level kept with probability 1/2.

    ``seed`` is the starting state of the trunk's random stream.
    """
    if depth < 1:
        raise ValueError("depth must be >= 1")
    attrs = np.empty(depth, dtype=np.int64)
    thr = np.empty(depth)
    masks = np.empty(depth, dtype=np.uint64)
    K.draw_trunk_into(
        as_seed(seed), data.matrix, data.schema.is_categorical, data.schema.n_levels,
        depth, attrs, thr, masks,
    )
    return _trunk_from_arrays(attrs, thr, masks, data.schema.is_categorical)


def _trunk_from_arrays(attrs, thr, masks, is_cat) -> FernTrunk:
    crit = []
    for a, t, mk in zip(attrs, thr, masks):
        if is_cat[a]:
            crit.append(SplitCriterion(int(a), mask=int(mk)))
        else:
            crit.append(SplitCriterion(int(a), threshold=float(t)))
    return FernTrunk(tuple(crit))


def leaf_index(trunk: FernTrunk, x) -> int:
    """Bit ``i`` of the leaf is the outcome of criterion ``i``."""
    leaf = 0
    for i, c in enumerate(trunk.criteria):
        if c.passes(x[c.attr_index]):
            leaf |= 1 << i
    return leaf


def trunk_leaves(trunk: FernTrunk, data: Dataset) -> np.ndarray:
    attrs, thr, masks = trunk._arrays()
    out = np.empty(data.n_objects, dtype=np.int64)
    K.leaves_into(data.matrix, data.schema.is_categorical, attrs, thr, masks, trunk.depth, out)
    return out


def fit_leaf_scores(trunk: FernTrunk, bag: Bag, data: Dataset) -> np.ndarray:
    """Log-score table ``log[(1+n_ly)/(C+n_l) * (C+N)/(1+n_y)]`` over bag counts."""
    if len(bag.counts) != data.n_objects:
        raise ValueError("bag was drawn for a different number of objects")
    leaves = trunk_leaves(trunk, data)
    return K.fit_table(leaves, bag.counts, data.labels, data.n_classes, trunk.depth)


def fern_scores(fern: Fern, x) -> np.ndarray:
    return fern.scores[leaf_index(fern.trunk, x)]


@dataclass
class FernModel:
    """A trained ensemble, stored as stacked per-fern arrays.

    ``attrs``, ``thresholds`` and ``masks`` have shape ``(K, D)``;
    ``tables`` has shape ``(K, 2**D, C)``.
    """

    depth: int
    master_seed: int
    schema: Schema
    attrs: np.ndarray
    thresholds: np.ndarray
    masks: np.ndarray
    tables: np.ndarray
    bag_seeds: np.ndarray
    seed_scheme: str = SEED_SCHEME

    @property
    def n_ferns(self) -> int:
        return self.attrs.shape[0]

    def fern(self, k: int) -> Fern:
        trunk = _trunk_from_arrays(
            self.attrs[k], self.thresholds[k], self.masks[k], self.schema.is_categorical
        )
        return Fern(trunk, self.tables[k], int(self.bag_seeds[k]))

    def bag(self, k: int, n: int) -> Bag:
        return sample_bag(int(self.bag_seeds[k]), n)


def _check_hyper(depth: int, n_ferns: int) -> None:
    if depth < 1:
        raise ValueError(f"depth must be >= 1, got {depth}")
    if depth > MAX_DEPTH:
        raise ValueError(f"depth {depth} exceeds the supported maximum of {MAX_DEPTH}")
    if n_ferns < 1:
        raise ValueError(f"need at least one fern, got {n_ferns}")


def _alloc(n_ferns: int, depth: int, n_classes: int, tables: bool = True):
    return (
        np.zeros((n_ferns, depth), dtype=np.int64),
        np.zeros((n_ferns, depth)),
        np.zeros((n_ferns, depth), dtype=np.uint64),
        np.zeros((n_ferns if tables else 0, 1 << depth, n_classes)),
        np.zeros(n_ferns, dtype=np.uint64),
    )


def train(data: Dataset, depth: int, n_ferns: int, seed: int = 0, workers: int = 1) -> FernModel:
    """Train ``n_ferns`` ferns of the given depth; identical for any ``workers``."""
    _check_hyper(depth, n_ferns)
    master = as_seed(seed)
    attrs, thr, masks, tables, seeds = _alloc(n_ferns, depth, data.n_classes)
    sc = data.schema

    def work(k0, k1):
        K.train_range(
            k0, k1, master, data.matrix, data.labels, sc.is_categorical, sc.n_levels,
            data.n_classes, depth, attrs, thr, masks, tables, seeds,
        )

    K.run_chunks(work, n_ferns, workers)
    return FernModel(depth, int(master), sc, attrs, thr, masks, tables, seeds)


def _as_matrix(model: FernModel, X) -> np.ndarray:
    if isinstance(X, Dataset):
        X = X.matrix
    X = np.ascontiguousarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X[None, :]
    if X.shape[1] != model.schema.n_attributes:
        raise ValueError(f"expected {model.schema.n_attributes} attributes, got {X.shape[1]}")
    return X


def decision_scores(model: FernModel, X, workers: int = 1):
    """Summed fern scores ``(n, C)`` and the argmax class (ties go to the lowest code)."""
    X = _as_matrix(model, X)
    n = X.shape[0]
    scores = np.empty((n, model.schema.n_classes))
    cls = np.empty(n, dtype=np.int64)

    def work(i0, i1):
        K.predict_range(
            i0, i1, X, model.schema.is_categorical, model.attrs, model.thresholds,
            model.masks, model.tables, model.depth, scores, cls,
        )

    K.run_chunks(work, n, workers)
    return scores, cls


def predict(model: FernModel, X, workers: int = 1):
    """Predicted class codes; a single row returns a plain int."""
    single = not isinstance(X, Dataset) and np.ndim(X) == 1
    _, cls = decision_scores(model, X, workers)
    return int(cls[0]) if single else cls


@dataclass(frozen=True)
class OOBResult:
    error: float  # nan when undefined
    n_evaluated: int

    @property
    def defined(self) -> bool:
        return self.n_evaluated > 0


def oob_error(model: FernModel, data: Dataset, workers: int = 1) -> OOBResult:
    """Error of votes restricted to ferns whose bag excludes each object.

    Objects that are in every bag are left out of the denominator; if no
    object has an out-of-bag fern the result is undefined (``error`` is nan).
    """
    if data.n_attributes != model.schema.n_attributes:
        raise ValueError("dataset does not match the model schema")
    n, kf = data.n_objects, model.n_ferns
    leaves = np.empty((kf, n), dtype=np.int32)
    in_bag = np.empty((kf, n), dtype=np.bool_)
    sc = model.schema

    def fern_work(k0, k1):
        K.oob_leaves_range(
            k0, k1, model.bag_seeds, data.matrix, sc.is_categorical, model.attrs,
            model.thresholds, model.masks, model.depth, leaves, in_bag,
        )

    K.run_chunks(fern_work, kf, workers)
    cls = np.empty(n, dtype=np.int64)
    n_oob = np.empty(n, dtype=np.int64)

    def obj_work(i0, i1):
        K.oob_vote_range(i0, i1, leaves, in_bag, model.tables, data.labels, cls, n_oob)

    K.run_chunks(obj_work, n, workers)
    ok = n_oob > 0
    n_eval = int(ok.sum())
    if n_eval == 0:
        return OOBResult(math.nan, 0)
    return OOBResult(float(np.mean(cls[ok] != data.labels[ok])), n_eval)


def fern_bag_seed(master_seed: int, k: int) -> int:
    return int(derive(master_seed, TAG_FERNS, k))

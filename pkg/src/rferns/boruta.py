"""Boruta all-relevant wrapper with explicit shadow attributes.

Each iteration appends a freshly shuffled copy of every still-tentative
attribute, computes importance on the augmented set, and gives a hit to
each original attribute that beats the best shadow.  Hit counts are tested
against Binomial(trials, 1/2); significant excess confirms an attribute,
significant deficit rejects it and drops it from later iterations.
"""

from __future__ import annotations

import csv
import json
import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable

import numpy as np
from scipy.stats import binom

from ._random import TAG_BORUTA, derive, stream_generator
from .dataset import Dataset, Schema
from .importance import compute_importance, ferns_for_scans

logger = logging.getLogger(__name__)

SHADOW_SUFFIX = "_shadow"


class Status(str, Enum):
    TENTATIVE = "Tentative"
    CONFIRMED = "Confirmed"
    REJECTED = "Rejected"


@dataclass
class FeatureStatus:
    name: str
    status: Status = Status.TENTATIVE
    hits: int = 0
    trials: int = 0
    importance: float = math.nan


@dataclass
class BorutaConfig:
    """Wrapper settings; ``n_ferns`` overrides the ``scans`` budget when given."""

    max_iterations: int = 100
    alpha: float = 0.01
    correction: bool = True
    depth: int = 7
    scans: int = 200
    n_ferns: int | None = None
    seed: int = 0
    workers: int = 1

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise ValueError(f"alpha must lie in (0, 1), got {self.alpha}")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")


@dataclass
class BorutaResult:
    features: list[FeatureStatus]
    iterations: int
    seed: int
    error: str = ""
    history: list[int] = field(default_factory=list)  # tentative count entering each iteration

    def indices(self, status: Status) -> list[int]:
        return [i for i, f in enumerate(self.features) if f.status == status]

    @property
    def confirmed(self) -> list[int]:
        return self.indices(Status.CONFIRMED)

    @property
    def rejected(self) -> list[int]:
        return self.indices(Status.REJECTED)

    @property
    def tentative(self) -> list[int]:
        return self.indices(Status.TENTATIVE)

    def counts(self) -> dict[str, int]:
        return {s.value: len(self.indices(s)) for s in Status}

    def rows(self) -> list[dict]:
        return [
            {
                "name": f.name,
                "status": f.status.value,
                "hits": f.hits,
                "trials": f.trials,
                "final_importance": None if math.isnan(f.importance) else f.importance,
            }
            for f in self.features
        ]

    def write_json(self, path) -> None:
        doc = {"iterations": self.iterations, "seed": self.seed, "error": self.error,
               "features": self.rows()}
        with open(path, "w") as fh:
            json.dump(doc, fh, indent=1)
            fh.write("\n")

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["name", "status", "hits", "trials", "final_importance"])
            for r in self.rows():
                imp = r["final_importance"]
                w.writerow([r["name"], r["status"], r["hits"], r["trials"], "" if imp is None else repr(imp)])


def add_shadows(data: Dataset, rng_seed: int) -> Dataset:
    """Append an independently shuffled copy of every attribute."""
    rng = stream_generator(rng_seed, TAG_BORUTA)
    n, m = data.n_objects, data.n_attributes
    shadows = np.column_stack([data.matrix[rng.permutation(n), j] for j in range(m)])
    schema = Schema(
        data.names + tuple(nm + SHADOW_SUFFIX for nm in data.names),
        data.schema.levels + data.schema.levels,
        data.schema.class_names,
    )
    return Dataset(np.column_stack([data.matrix, shadows]), data.labels.copy(), schema)


def rferns_importance(cfg: BorutaConfig) -> Callable[[Dataset, int], np.ndarray]:
    """Regular OOB permutation importance from a random ferns ensemble.

    Attributes no fern looked at get ``nan`` so they can neither score a hit
    nor set the shadow maximum.
    """

    def provider(data: Dataset, seed: int) -> np.ndarray:
        k = cfg.n_ferns or ferns_for_scans(data.n_attributes, cfg.depth, cfg.scans)
        _, rep = compute_importance(
            data, cfg.depth, k, seed, cfg.workers, shadow=False, return_model=False
        )
        imp = rep.regular.copy()
        imp[rep.never_scanned] = np.nan
        return imp

    return provider


def hit_test(hits: int, trials: int, alpha: float) -> Status:
    """Two-sided binomial test of ``hits`` against a fair coin."""
    if trials == 0:
        return Status.TENTATIVE
    upper = binom.sf(hits - 1, trials, 0.5)
    lower = binom.cdf(hits, trials, 0.5)
    if min(1.0, 2.0 * upper) < alpha:
        return Status.CONFIRMED
    if min(1.0, 2.0 * lower) < alpha:
        return Status.REJECTED
    return Status.TENTATIVE


def boruta_run(
    data: Dataset,
    cfg: BorutaConfig | None = None,
    importance: Callable[[Dataset, int], np.ndarray] | None = None,
) -> BorutaResult:
    """Run the wrapper until every attribute is decided or iterations run out.

    ``importance(dataset, seed)`` must return one score per column of the
    augmented dataset; the default is :func:`rferns_importance`.
    """
    cfg = cfg or BorutaConfig()
    importance = importance or rferns_importance(cfg)
    feats = [FeatureStatus(nm) for nm in data.names]
    result = BorutaResult(feats, 0, cfg.seed)
    for it in range(cfg.max_iterations):
        active = [j for j, f in enumerate(feats) if f.status == Status.TENTATIVE]
        if not active:
            break
        result.history.append(len(active))
        sub = data.take_attributes(active)
        aug = add_shadows(sub, int(derive(cfg.seed, TAG_BORUTA, 2 * it)))
        try:
            imp = np.asarray(importance(aug, int(derive(cfg.seed, TAG_BORUTA, 2 * it + 1))), dtype=float)
        except Exception as e:
            result.error = f"iteration {it + 1}: {type(e).__name__}: {e}"
            logger.error("importance provider failed, returning partial result: %s", result.error)
            break
        if imp.shape != (2 * len(active),):
            result.error = f"iteration {it + 1}: provider returned shape {imp.shape}"
            break
        real, shad = imp[: len(active)], imp[len(active):]
        shad = shad[~np.isnan(shad)]
        best = shad.max() if shad.size else math.inf
        alpha = cfg.alpha / len(active) if cfg.correction else cfg.alpha
        for pos, j in enumerate(active):
            f = feats[j]
            f.trials += 1
            f.importance = float(real[pos])
            if real[pos] > best:
                f.hits += 1
            f.status = hit_test(f.hits, f.trials, alpha)
        result.iterations = it + 1
    return result

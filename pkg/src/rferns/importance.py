"""Out-of-bag permutation importance, implicit shadow importance and the
embedded all-relevant selection rule.

For every fern and every distinct attribute ``a`` in its trunk two numbers
are computed on the fern's out-of-bag (OOB) objects:

* the regular contribution: mean true-class score minus the mean score after
  permuting ``a`` within the OOB set;
* the shadow contribution: the same difference, but with the leaf scores
  refit on the same bag after replacing ``a`` by a globally shuffled copy
  (one shuffle per attribute, shared by all ferns).

Averaging over the ferns that use ``a`` gives ``I_a`` and ``J_a``; an
attribute is selected when ``I_a`` exceeds the largest ``J``.
"""

from __future__ import annotations

import csv
import json
import logging
import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels as K
from ._random import SEED_SCHEME, TAG_PLAN, as_seed, derive, permutation
from .dataset import Dataset
from .ferns import FernModel, _alloc, _check_hyper

logger = logging.getLogger(__name__)

MIN_SCANS_WARNING = 10

SHADOW_MODES = {"shuffled": K.SHADOW_OOB_SHUFFLED, "original": K.SHADOW_OOB_ORIGINAL}


def ferns_for_scans(n_attributes: int, depth: int, target_scans: int) -> int:
    """Ensemble size giving on average ``target_scans`` ferns per attribute.

    A fern of depth D touches a given attribute with probability close to
    D/M, hence ``K = ceil(scans * M / D)``.
    """
    if n_attributes < 1 or depth < 1:
        raise ValueError("need n_attributes >= 1 and depth >= 1")
    if target_scans < 1:
        raise ValueError("target_scans must be positive")
    return math.ceil(target_scans * n_attributes / depth)


def shadow_plan(master_seed: int, n_attributes: int, n_objects: int) -> np.ndarray:
    """Row ``a`` is the permutation that defines attribute a's shadow column."""
    plan = np.empty((n_attributes, n_objects), dtype=np.int64)
    for a in range(n_attributes):
        plan[a] = permutation(derive(master_seed, TAG_PLAN, a), n_objects)
    return plan


@dataclass
class ImportanceReport:
    names: list[str]
    regular: np.ndarray
    shadow: np.ndarray
    scans: np.ndarray
    depth: int
    n_ferns: int
    seed: int
    dataset_hash: str = ""
    usage: np.ndarray | None = None
    shadow_mode: str = "shuffled"
    warnings: list[str] = field(default_factory=list)

    @property
    def never_scanned(self) -> np.ndarray:
        return self.scans == 0

    @property
    def max_shadow(self) -> float:
        ok = ~self.never_scanned
        if not ok.any():
            return math.nan
        return float(self.shadow[ok].max())

    @property
    def selected(self) -> list[int]:
        return select_features(self)

    def to_dict(self) -> dict:
        sel = set(self.selected)
        ms = self.max_shadow
        return {
            "attributes": [
                {
                    "name": self.names[a],
                    "index": a,
                    "I": float(self.regular[a]),
                    "J": float(self.shadow[a]),
                    "scans": int(self.scans[a]),
                    "selected": a in sel,
                    "never_scanned": bool(self.scans[a] == 0),
                }
                for a in range(len(self.names))
            ],
            "max_shadow": None if math.isnan(ms) else ms,
            "hyper": {"depth": self.depth, "ferns": self.n_ferns, "shadow_mode": self.shadow_mode},
            "seed": self.seed,
            "seed_scheme": SEED_SCHEME,
            "dataset_hash": self.dataset_hash,
            "warnings": list(self.warnings),
        }

    def write_json(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=1)
            fh.write("\n")

    def write_csv(self, path) -> None:
        d = self.to_dict()
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["name", "index", "I", "J", "scans", "selected", "never_scanned"])
            for r in d["attributes"]:
                w.writerow([r["name"], r["index"], repr(r["I"]), repr(r["J"]), r["scans"],
                            int(r["selected"]), int(r["never_scanned"])])

    @classmethod
    def from_dict(cls, d: dict) -> ImportanceReport:
        attrs = d["attributes"]
        return cls(
            names=[r["name"] for r in attrs],
            regular=np.array([r["I"] for r in attrs]),
            shadow=np.array([r["J"] for r in attrs]),
            scans=np.array([r["scans"] for r in attrs], dtype=np.int64),
            depth=d["hyper"]["depth"],
            n_ferns=d["hyper"]["ferns"],
            seed=d["seed"],
            dataset_hash=d.get("dataset_hash", ""),
            shadow_mode=d["hyper"].get("shadow_mode", "shuffled"),
            warnings=list(d.get("warnings", [])),
        )


def select_features(report: ImportanceReport) -> list[int]:
    """Attributes with ``I_a`` strictly above the maximal shadow importance.

    Never-scanned attributes are neither selectable nor part of the maximum.
    """
    ok = ~report.never_scanned
    if not ok.any():
        if "all attributes never scanned" not in report.warnings:
            report.warnings.append("all attributes never scanned")
        return []
    ms = report.shadow[ok].max()
    return [int(a) for a in np.flatnonzero(ok & (report.regular > ms))]


def compute_importance(
    data: Dataset,
    depth: int,
    n_ferns: int,
    seed: int = 0,
    workers: int = 1,
    shadow: bool = True,
    shadow_mode: str = "shuffled",
    return_model: bool = True,
) -> tuple[FernModel | None, ImportanceReport]:
    """Train an ensemble and compute regular and shadow importance in one pass.

    ``shadow_mode`` chooses which values the unpermuted OOB term of the
    shadow importance sees for the shadowed attribute: its shuffled shadow
    values (default) or the original ones.  With ``shadow=False`` only the
    regular importance is computed and ``J`` is all zeros.

    ``return_model=False`` skips storing score tables, which dominate memory
    for large ensembles.
    """
    _check_hyper(depth, n_ferns)
    if shadow_mode not in SHADOW_MODES:
        raise ValueError(f"shadow_mode must be one of {sorted(SHADOW_MODES)}")
    master = as_seed(seed)
    n, m = data.n_objects, data.n_attributes
    sc = data.schema
    attrs, thr, masks, tables, seeds = _alloc(n_ferns, depth, data.n_classes, return_model)
    plan = shadow_plan(master, m, n) if shadow else np.zeros((0, 0), dtype=np.int64)
    oob_size = np.zeros(n_ferns, dtype=np.int64)
    st_attr = np.full((n_ferns, depth), -1, dtype=np.int64)
    st_reg = np.zeros((n_ferns, depth))
    st_shd = np.zeros((n_ferns, depth))
    mode = SHADOW_MODES[shadow_mode]

    def work(k0, k1):
        K.importance_range(
            k0, k1, master, data.matrix, data.labels, sc.is_categorical, sc.n_levels,
            data.n_classes, depth, plan, shadow, mode, return_model,
            attrs, thr, masks, tables, seeds, oob_size, st_attr, st_reg, st_shd,
        )

    K.run_chunks(work, n_ferns, workers)
    regular, shadow_imp, scans = K.reduce_importance(st_attr, st_reg, st_shd, oob_size, m)
    report = ImportanceReport(
        names=list(sc.names),
        regular=regular,
        shadow=shadow_imp,
        scans=scans,
        depth=depth,
        n_ferns=n_ferns,
        seed=int(master),
        dataset_hash=data.hash(),
        usage=K.usage_counts(attrs, m),
        shadow_mode=shadow_mode,
    )
    low = int(scans.min())
    if low < MIN_SCANS_WARNING:
        msg = f"minimum scans per attribute is {low} (< {MIN_SCANS_WARNING}); importance is unreliable"
        report.warnings.append(msg)
        logger.warning(msg)
    if not (~report.never_scanned).any():
        report.warnings.append("all attributes never scanned")
    model = FernModel(depth, int(master), sc, attrs, thr, masks, tables, seeds) if return_model else None
    return model, report


def select(
    data: Dataset, depth: int, scans: int, seed: int = 0, workers: int = 1, **kw
) -> ImportanceReport:
    """Embedded all-relevant selection with the ensemble sized by a scan budget."""
    n_ferns = ferns_for_scans(data.n_attributes, depth, scans)
    _, report = compute_importance(data, depth, n_ferns, seed, workers, return_model=False, **kw)
    return report

"""Versioned JSON model files.

Floats are written with Python's shortest round-trip ``repr`` and 64-bit
seeds and masks as hex strings, so ``load`` followed by ``dumps`` reproduces
the file byte for byte.
"""

from __future__ import annotations

import json

import numpy as np

from ._random import SEED_SCHEME
from .dataset import Schema
from .ferns import FernModel

FORMAT = "rferns-model"
VERSION = 1


class ModelFormatError(ValueError):
    pass


def to_dict(model: FernModel) -> dict:
    is_cat = model.schema.is_categorical
    ferns = []
    for k in range(model.n_ferns):
        crit = []
        for i in range(model.depth):
            a = int(model.attrs[k, i])
            if is_cat[a]:
                crit.append({"attr": a, "mask": hex(int(model.masks[k, i]))})
            else:
                crit.append({"attr": a, "threshold": float(model.thresholds[k, i])})
        ferns.append({
            "bag_seed": hex(int(model.bag_seeds[k])),
            "criteria": crit,
            "scores": model.tables[k].tolist(),
        })
    return {
        "format": FORMAT,
        "version": VERSION,
        "seed_scheme": model.seed_scheme,
        "hyper": {"depth": model.depth, "ferns": model.n_ferns, "seed": hex(model.master_seed)},
        "schema": model.schema.to_dict(),
        "ferns": ferns,
    }


def from_dict(d: dict) -> FernModel:
    if d.get("format") != FORMAT:
        raise ModelFormatError("not an rferns model file")
    if d.get("version") != VERSION:
        raise ModelFormatError(f"unsupported model version {d.get('version')!r}")
    if d.get("seed_scheme") != SEED_SCHEME:
        raise ModelFormatError(f"unknown seed scheme {d.get('seed_scheme')!r}")
    schema = Schema.from_dict(d["schema"])
    depth = int(d["hyper"]["depth"])
    ferns = d["ferns"]
    k = len(ferns)
    if k != d["hyper"]["ferns"]:
        raise ModelFormatError("fern count does not match the header")
    attrs = np.zeros((k, depth), dtype=np.int64)
    thr = np.zeros((k, depth))
    masks = np.zeros((k, depth), dtype=np.uint64)
    seeds = np.zeros(k, dtype=np.uint64)
    tables = np.array([f["scores"] for f in ferns], dtype=np.float64)
    if tables.shape != (k, 1 << depth, schema.n_classes):
        raise ModelFormatError(f"score tables have shape {tables.shape}")
    for j, f in enumerate(ferns):
        seeds[j] = int(f["bag_seed"], 16)
        if len(f["criteria"]) != depth:
            raise ModelFormatError(f"fern {j} has {len(f['criteria'])} criteria, expected {depth}")
        for i, c in enumerate(f["criteria"]):
            attrs[j, i] = c["attr"]
            if "mask" in c:
                masks[j, i] = int(c["mask"], 16)
            else:
                thr[j, i] = c["threshold"]
    return FernModel(depth, int(d["hyper"]["seed"], 16), schema, attrs, thr, masks, tables, seeds,
                     d["seed_scheme"])


def dumps(model: FernModel) -> str:
    return json.dumps(to_dict(model), separators=(",", ":")) + "\n"


def loads(text: str) -> FernModel:
    return from_dict(json.loads(text))


def save(model: FernModel, path) -> None:
    with open(path, "w") as fh:
        fh.write(dumps(model))


def load(path) -> FernModel:
    with open(path) as fh:
        return loads(fh.read())

"""Command-line front end: ``rferns {train,select,boruta,gen,bench}``.

Exit codes: 0 success, 1 runtime failure, 2 usage or input error.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import bench, persist
from .boruta import BorutaConfig, boruta_run
from .dataset import SchemaError, read_csv
from .ferns import oob_error, train
from .importance import MIN_SCANS_WARNING, compute_importance, ferns_for_scans, select_features

DEFAULT_SEED = 0


class UsageError(Exception):
    pass


def _int_list(text: str) -> list[int]:
    text = text.split("=", 1)[-1]
    try:
        return [int(v) for v in text.split(",") if v]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _common(p: argparse.ArgumentParser, data: bool = True) -> None:
    if data:
        p.add_argument("--data", required=True, help="input CSV with a header row")
        p.add_argument("--label", default="class", help="name of the class column")
        p.add_argument("--schema", help="JSON file forcing column types")
    p.add_argument("--depth", "-D", type=int, default=7)
    budget = p.add_mutually_exclusive_group()
    budget.add_argument("--ferns", "-K", type=int, help="ensemble size")
    budget.add_argument("--scans", type=int, help="average ferns per attribute; sets K")
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--out", required=True)
    p.add_argument("--format", choices=["json", "csv", "both"], default="both")


def _n_ferns(args, n_attributes: int, default_scans: int) -> int:
    if args.ferns is not None:
        if args.ferns < 1:
            raise UsageError("--ferns must be >= 1")
        return args.ferns
    scans = args.scans if args.scans is not None else default_scans
    if scans < 1:
        raise UsageError("--scans must be >= 1")
    return ferns_for_scans(n_attributes, args.depth, scans)


def _outputs(out: str, fmt: str) -> dict[str, Path]:
    stem = Path(out)
    if stem.suffix in (".json", ".csv"):
        stem = stem.with_suffix("")
    kinds = ["json", "csv"] if fmt == "both" else [fmt]
    return {k: stem.with_suffix("." + k) for k in kinds}


def _load(args):
    return read_csv(args.data, args.label, args.schema)


def cmd_train(args) -> int:
    data = _load(args)
    k = _n_ferns(args, data.n_attributes, default_scans=100)
    model = train(data, args.depth, k, args.seed, args.threads)
    persist.save(model, args.out)
    oob = oob_error(model, data, args.threads)
    err = f"{oob.error:.6f}" if oob.defined else "undefined"
    print(f"N={data.n_objects} M={data.n_attributes} C={data.n_classes} "
          f"D={args.depth} K={k} seed={args.seed} oob_error={err}")
    return 0


def cmd_select(args) -> int:
    data = _load(args)
    k = _n_ferns(args, data.n_attributes, default_scans=1000)
    _, report = compute_importance(data, args.depth, k, args.seed, args.threads,
                                   shadow_mode=args.shadow_mode, return_model=False)
    if report.scans.min() < MIN_SCANS_WARNING:
        print(f"warning: minimum scans per attribute is {report.scans.min()} "
              f"(< {MIN_SCANS_WARNING})", file=sys.stderr)
    paths = _outputs(args.out, args.format)
    if "json" in paths:
        report.write_json(paths["json"])
    if "csv" in paths:
        report.write_csv(paths["csv"])
    sel = select_features(report)
    print(f"D={args.depth} K={k} seed={args.seed} max_shadow={report.max_shadow!r}")
    print(f"selected {len(sel)} of {data.n_attributes}: " + ",".join(data.names[a] for a in sel))
    return 0


def cmd_boruta(args) -> int:
    data = _load(args)
    cfg = BorutaConfig(
        max_iterations=args.max_iter, alpha=args.alpha, correction=not args.no_correction,
        depth=args.depth, scans=args.scans or 200, n_ferns=args.ferns, seed=args.seed,
        workers=args.threads,
    )
    res = boruta_run(data, cfg)
    paths = _outputs(args.out, args.format)
    if "json" in paths:
        res.write_json(paths["json"])
    if "csv" in paths:
        res.write_csv(paths["csv"])
    c = res.counts()
    print(f"iterations={res.iterations} seed={args.seed} Confirmed={c['Confirmed']} "
          f"Rejected={c['Rejected']} Tentative={c['Tentative']}")
    if res.confirmed:
        print("confirmed: " + ",".join(data.names[a] for a in res.confirmed))
    if res.error:
        print(f"error: {res.error}", file=sys.stderr)
        return 1
    return 0


def _make_problem(args, w: int | None = None) -> bench.BenchProblem:
    kind = args.problem
    n = args.n or (72 if kind in ("rnd", "rnd3") else 2000)
    features = args.features or (1000 if kind in ("rnd", "rnd3") else 4)
    if kind == "gauss":
        p = bench.gen_gaussian_classes(args.per_class, features, args.classes, args.separation, args.seed)
        if args.shadows:
            p = bench.augment_with_shadow_features(p, args.shadows, args.seed)
    elif kind in ("iri", "iri2"):
        p = bench.iri(args.seed) if kind == "iri" else bench.iri2(args.seed)
    elif kind == "madelon":
        p = bench.gen_madelon(n, args.w if w is None else w, args.seed)
    elif kind in ("rnd", "rnd3"):
        p = bench.rnd(args.seed, n, features, label_shuffle=kind == "rnd3")
    else:
        raise UsageError(f"unknown problem {kind!r}")
    if args.shuffle == "features":
        p = bench.nonsense_by_feature_shuffle(p, args.seed)
    elif args.shuffle == "labels":
        p = bench.nonsense_by_label_shuffle(p, args.seed)
    return p


def cmd_gen(args) -> int:
    p = _make_problem(args)
    out = Path(args.out)
    truth = Path(args.truth) if args.truth else out.with_suffix(".truth.json")
    p.export(out, truth, args.label)
    print(f"{p.name}: N={p.dataset.n_objects} M={p.dataset.n_attributes} "
          f"relevant={int(p.relevant.sum())} seed={args.seed} -> {out}, {truth}")
    return 0


def cmd_bench(args) -> int:
    grid = [(d, s) for d in args.grid for s in args.scan_list]
    if not grid:
        raise UsageError("empty grid")
    if args.problem == "madelon" and args.w_list:
        problems = [_make_problem(args, w) for w in args.w_list]
    else:
        problems = [_make_problem(args)]
    results = []
    for p in problems:
        results += bench.run_experiment(p, grid, args.repeats, args.seed, args.threads)
    paths = _outputs(args.out, args.format)
    if "csv" in paths:
        bench.write_results_csv(results, paths["csv"], runtime=not args.no_runtime)
    if "json" in paths:
        bench.write_results_json(results, paths["json"], runtime=not args.no_runtime)
    failed = [r for r in results if r.error]
    for r in failed:
        print(f"cell failed: {r.problem} D={r.depth} scans={r.scans} seed={r.seed}: {r.error}",
              file=sys.stderr)
    print(f"{len(results)} runs, {len(failed)} failed -> " + ", ".join(str(p) for p in paths.values()))
    return 1 if failed else 0


def _gen_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("problem", choices=["gauss", "iri", "iri2", "madelon", "rnd", "rnd3"])
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--label", default="class")
    p.add_argument("--per-class", type=int, default=50)
    p.add_argument("--features", type=int, help="feature count (gauss: 4, rnd: 1000)")
    p.add_argument("--classes", type=int, default=3)
    p.add_argument("--separation", type=float, default=3.0)
    p.add_argument("--shadows", type=int, default=0, help="append this many shuffled copies")
    p.add_argument("--n", type=int, help="object count (madelon: 2000, rnd: 72)")
    p.add_argument("--w", type=int, default=480, help="madelon noise columns")
    p.add_argument("--shuffle", choices=["none", "features", "labels"], default="none")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="rferns", description=__doc__.splitlines()[0])
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="train a ferns ensemble and save it as JSON")
    _common(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("select", help="embedded all-relevant selection with shadow importance")
    _common(p)
    p.add_argument("--shadow-mode", choices=["shuffled", "original"], default="shuffled")
    p.set_defaults(func=cmd_select)

    p = sub.add_parser("boruta", help="Boruta wrapper with the ferns importance")
    _common(p)
    p.add_argument("--max-iter", type=int, default=100)
    p.add_argument("--alpha", type=float, default=0.01)
    p.add_argument("--no-correction", action="store_true", help="disable Bonferroni correction")
    p.set_defaults(func=cmd_boruta)

    p = sub.add_parser("gen", help="write a synthetic benchmark dataset and its ground truth")
    _gen_args(p)
    p.add_argument("--out", required=True)
    p.add_argument("--truth", help="ground-truth sidecar path (default: <out>.truth.json)")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("bench", help="run a selection grid on a synthetic problem")
    _gen_args(p)
    p.add_argument("--grid", type=_int_list, default=[7], help="depths, e.g. D=1,3,5,7")
    p.add_argument("--scans", dest="scan_list", type=_int_list, default=[1000])
    p.add_argument("--w-list", type=_int_list, help="madelon noise counts to sweep")
    p.add_argument("--repeats", type=int, default=10)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--out", required=True)
    p.add_argument("--format", choices=["json", "csv", "both"], default="csv")
    p.add_argument("--no-runtime", action="store_true", help="blank the runtime column")
    p.set_defaults(func=cmd_bench)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.ERROR,
                        format="%(levelname)s %(name)s: %(message)s")
    if getattr(args, "threads", 1) < 1:
        print("rferns: error: --threads must be >= 1", file=sys.stderr)
        return 2
    try:
        return args.func(args)
    except (SchemaError, UsageError) as e:
        print(f"rferns: error: {e}", file=sys.stderr)
        return 2
    except (OSError, ValueError) as e:
        print(f"rferns: error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

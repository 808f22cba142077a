"""Command-line experiment runner.

Subcommands:

  run          fit on a manifest dataset, repeat the final k-means, write
               results.json / trace.csv / gstar.csv / predicted labels
  synth        generate a synthetic multi-view blob dataset + manifest
  metrics      score one label file against another
  similarity   emit the reordered pairwise-similarity matrix of a run

Exit codes: 0 success, 1 data/fit failure, 2 usage error.
"""

import argparse
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import dataio, metrics
from .core import DmfawConfig, fit
from .exceptions import DmfawError
from .kmeans import kmeans

_GRID_K1 = (8, 10, 12)
_GRID_K2 = (4, 5, 6)


def _parse_int_list(text, flag):
    try:
        values = tuple(int(part) for part in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"{flag} expects comma-separated integers")
    if not values:
        raise argparse.ArgumentTypeError(f"{flag} must not be empty")
    return values


def _write_matrix_csv(path, matrix):
    with open(path, "w") as fh:
        for row in np.asarray(matrix):
            fh.write(",".join(f"{x:.17g}" for x in row) + "\n")


def _write_labels(path, labels):
    Path(path).write_text("\n".join(str(int(x)) for x in labels) + "\n")


def _final_clustering(result, dataset, repeats, seed, jobs):
    """Repeat k-means on the consensus columns; score each repeat."""
    points = result.fusion.consensus.T
    k = dataset.k
    rep_seeds = np.random.SeedSequence([int(seed), 1]).spawn(repeats)

    def one(index):
        km = kmeans(points, k, seed=rep_seeds[index], max_iter=300, n_init=1)
        entry = {"repeat": index, "inertia": km.inertia}
        if dataset.labels is not None:
            entry["acc"] = metrics.accuracy(km.labels, dataset.labels)
            entry["nmi"] = metrics.nmi(km.labels, dataset.labels)
            entry["purity"] = metrics.purity(km.labels, dataset.labels)
        return entry, km.labels

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            outcomes = list(pool.map(one, range(repeats)))
    else:
        outcomes = [one(i) for i in range(repeats)]

    entries = [entry for entry, _ in outcomes]
    if dataset.labels is not None:
        best_idx = max(
            range(repeats),
            key=lambda i: (
                entries[i]["acc"],
                entries[i]["nmi"],
                entries[i]["purity"],
                -i,
            ),
        )
        scores = {
            name: np.array([e[name] for e in entries])
            for name in ("acc", "nmi", "purity")
        }
        best = dict(entries[best_idx])
        mean = {name: float(vals.mean()) for name, vals in scores.items()}
        std = {name: float(vals.std()) for name, vals in scores.items()}
    else:
        best_idx = min(range(repeats), key=lambda i: (entries[i]["inertia"], i))
        best, mean, std = dict(entries[best_idx]), None, None
    return entries, best, mean, std, outcomes[best_idx][1]


def _run_single(dataset, config, repeats, jobs):
    result = fit(dataset, config)
    entries, best, mean, std, best_labels = _final_clustering(
        result, dataset, repeats, config.seed, jobs
    )
    summary = {
        "fit": {
            "iterations": len(result.trace),
            "converged": result.converged,
            "final_total": result.trace.total[-1],
            "final_recon": result.trace.recon[-1],
            "final_align": result.trace.align[-1],
            "final_p": result.controller.p,
            "final_tol": result.controller.tol,
            "wall_seconds": result.trace.seconds[-1],
        },
        "repeats": entries,
        "best": best,
        "mean": mean,
        "std": std,
    }
    return result, summary, best_labels


def _config_from_args(args, layer_dims, k):
    adaptive = args.fixed_p is None
    return DmfawConfig(
        layer_dims=tuple(layer_dims) + (k,),
        lam=args.lam,
        n1=args.n1,
        n2=args.n2,
        p_init=args.p_init if adaptive else args.fixed_p,
        tol_init=args.tol_init,
        max_outer_iter=args.max_iters,
        conv_rel_tol=args.conv_tol,
        seed=args.seed,
        adaptive_p=adaptive,
    ).validate(k)


def cmd_run(args):
    dataset = dataio.load(args.manifest)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    config_echo = {
        "manifest": str(args.manifest),
        "lambda": args.lam,
        "seed": args.seed,
        "repeats": args.repeats,
        "max_iters": args.max_iters,
        "conv_tol": args.conv_tol,
        "n1": args.n1,
        "n2": args.n2,
        "p_init": args.p_init,
        "tol_init": args.tol_init,
        "fixed_p": args.fixed_p,
        "adaptive_p": args.fixed_p is None,
        "jobs": args.jobs,
    }

    if args.grid:
        cells = [(k1 * dataset.k, k2 * dataset.k) for k1 in _GRID_K1 for k2 in _GRID_K2]

        def run_cell(dims):
            config = _config_from_args(args, dims, dataset.k)
            return _run_single(dataset, config, args.repeats, 1)

        if args.jobs > 1:
            with ThreadPoolExecutor(max_workers=args.jobs) as pool:
                outcomes = list(pool.map(run_cell, cells))
        else:
            outcomes = [run_cell(dims) for dims in cells]

        def cell_key(i):
            summary = outcomes[i][1]
            if summary["best"] is not None and "acc" in summary["best"]:
                b = summary["best"]
                return (b["acc"], b["nmi"], b["purity"], -i)
            return (-summary["fit"]["final_total"], 0.0, 0.0, -i)

        selected = max(range(len(cells)), key=cell_key)
        result, summary, best_labels = outcomes[selected]
        layers_used = cells[selected]
        grid_report = {
            "cells": [
                {
                    "k1": cells[i][0],
                    "k2": cells[i][1],
                    "best": outcomes[i][1]["best"],
                    "mean": outcomes[i][1]["mean"],
                    "iterations": outcomes[i][1]["fit"]["iterations"],
                    "final_total": outcomes[i][1]["fit"]["final_total"],
                }
                for i in range(len(cells))
            ],
            "selected": {"k1": layers_used[0], "k2": layers_used[1]},
        }
    else:
        layers_used = args.layers
        config = _config_from_args(args, layers_used, dataset.k)
        result, summary, best_labels = _run_single(
            dataset, config, args.repeats, args.jobs
        )
        grid_report = None

    config_echo["layers"] = list(layers_used) + [dataset.k]
    results = {
        "dataset": {
            "name": dataset.name,
            "views": dataset.n_views,
            "samples": dataset.n_samples,
            "clusters": dataset.k,
            "features": [int(v.shape[0]) for v in dataset.views],
        },
        "config": config_echo,
        **summary,
    }
    if grid_report is not None:
        results["grid"] = grid_report
    results["wall_seconds_total"] = summary["fit"]["wall_seconds"]

    with open(out / "results.json", "w") as fh:
        json.dump(results, fh, indent=2)
        fh.write("\n")
    with open(out / "trace.csv", "w") as fh:
        fh.write("iter,total,recon,align,p,tol,seconds\n")
        for row in result.trace.csv_rows():
            fh.write(",".join(f"{x:.17g}" for x in row) + "\n")
    _write_matrix_csv(out / "gstar.csv", result.fusion.consensus)
    _write_labels(out / "labels_pred.txt", best_labels)
    if dataset.labels is not None:
        _write_labels(out / "labels_true.txt", dataset.labels)
    print(f"wrote {out / 'results.json'}")
    return 0


def cmd_synth(args):
    dims = args.dims
    if len(dims) != args.views:
        print(
            f"error: --dims lists {len(dims)} values for {args.views} views",
            file=sys.stderr,
        )
        return 2
    try:
        dataset = dataio.synth_blobs(
            views=args.views,
            n=args.n,
            k=args.k,
            dims=dims,
            noise_sigma=args.noise_sigma,
            irrelevant_frac=args.irrelevant_frac,
            seed=args.seed,
        )
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    manifest = dataio.save_dataset(dataset, args.out)
    print(f"wrote {manifest}")
    return 0


def cmd_metrics(args):
    pred = dataio.read_labels(args.pred)
    truth = dataio.read_labels(args.truth)
    scores = {
        "acc": metrics.accuracy(pred, truth),
        "nmi": metrics.nmi(pred, truth),
        "purity": metrics.purity(pred, truth),
    }
    print(json.dumps(scores))
    return 0


def cmd_similarity(args):
    run_dir = Path(args.run_dir)
    gstar_path = run_dir / "gstar.csv"
    if not gstar_path.exists():
        print(f"error: {gstar_path} not found", file=sys.stderr)
        return 1
    g = np.loadtxt(gstar_path, delimiter=",", ndmin=2)
    labels_path = run_dir / "labels_true.txt"
    if labels_path.exists():
        order = metrics.order_by_labels(dataio.read_labels(labels_path))
    else:
        print(
            "warning: no labels_true.txt in run directory; "
            "emitting the unordered similarity matrix",
            file=sys.stderr,
        )
        order = None
    sim = metrics.pairwise_similarity(g, order)
    _write_matrix_csv(args.out, sim)
    print(f"wrote {args.out}")
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="dmfaw",
        description="Multi-view clustering via weighted deep matrix "
        "factorization with adaptive feature weights.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="fit a dataset and score the clustering")
    run.add_argument("--manifest", required=True, help="dataset manifest JSON")
    run.add_argument("--lambda", dest="lam", type=float, default=1.0,
                     help="alignment balance (default 1.0)")
    run.add_argument("--layers", type=lambda s: _parse_int_list(s, "--layers"),
                     help="layer widths before the final cluster count, e.g. 30,15")
    run.add_argument("--grid", action="store_true",
                     help="sweep k1 in {8k,10k,12k} x k2 in {4k,5k,6k}")
    run.add_argument("--seed", type=int, default=0)
    run.add_argument("--repeats", type=int, default=50,
                     help="final k-means repetitions (default 50)")
    run.add_argument("--max-iters", type=int, default=100)
    run.add_argument("--conv-tol", type=float, default=1e-5)
    run.add_argument("--n1", type=float, default=1.0)
    run.add_argument("--n2", type=float, default=0.2)
    run.add_argument("--p-init", type=float, default=2.0)
    run.add_argument("--fixed-p", type=float, default=None,
                     help="disable the adaptive controller and pin p")
    run.add_argument("--tol-init", type=float, default=1e-3)
    run.add_argument("--jobs", type=int, default=1)
    run.add_argument("--out", required=True, help="output directory")
    run.set_defaults(func=cmd_run)

    synth = sub.add_parser("synth", help="generate a synthetic dataset")
    synth.add_argument("--views", type=int, required=True)
    synth.add_argument("--n", type=int, required=True)
    synth.add_argument("--k", type=int, required=True)
    synth.add_argument("--dims", type=lambda s: _parse_int_list(s, "--dims"),
                       required=True)
    synth.add_argument("--noise-sigma", type=float, default=0.5)
    synth.add_argument("--irrelevant-frac", type=float, default=0.0)
    synth.add_argument("--seed", type=int, default=0)
    synth.add_argument("--out", required=True)
    synth.set_defaults(func=cmd_synth)

    met = sub.add_parser("metrics", help="score predicted labels against truth")
    met.add_argument("pred")
    met.add_argument("truth")
    met.set_defaults(func=cmd_metrics)

    sim = sub.add_parser("similarity", help="pairwise-similarity matrix of a run")
    sim.add_argument("run_dir")
    sim.add_argument("out")
    sim.set_defaults(func=cmd_similarity)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "run":
        if args.grid and args.layers:
            parser.error("--grid and --layers are mutually exclusive")
        if not args.grid and not args.layers:
            parser.error("one of --layers or --grid is required")
    try:
        return args.func(args)
    except DmfawError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

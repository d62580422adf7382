"""Command-line front end.

One binary, subcommand style.  Every run takes a master seed and every
output file gets a ``.run.json`` sidecar recording the effective config,
so any artifact can be regenerated from its sidecar alone.

Exit codes: 0 success, 2 usage or bad option combination, 3 unreadable or
malformed input data, 4 numeric failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from tgdist import __version__
from tgdist.distances import (
    lambda_vector,
    matched_distance,
    pairwise_distances,
    save_distance_matrix,
    save_lambda_vectors,
    unmatched_distance,
)
from tgdist.embedding import EmbedConfig, embed, load_embedding, save_embedding
from tgdist.experiments import (
    ModelClassesConfig,
    RandomizationPairsConfig,
    RelabelConfig,
    _to_jsonable,
    bursty_test_graph,
    experiment_model_classes,
    experiment_randomization_pairs,
    experiment_relabel,
)
from tgdist.graph import (
    DataFormatError,
    aggregate,
    load_contact_list,
    load_graph,
    save_graph,
)
from tgdist.randomize import RandomizationKind, generate_replicas
from tgdist.synth import preset, synthetic_activity, temporalize
from tgdist.transition import build_operator

log = logging.getLogger(__name__)

KINDS = tuple(k.value for k in RandomizationKind)


def _write_sidecar(out_path, args):
    cfg = {k: v for k, v in vars(args).items()
           if k not in ("func",) and not callable(v)}
    cfg = {k: (str(v) if isinstance(v, Path) else _to_jsonable(v))
           for k, v in cfg.items()}
    payload = {"tool": "tgdist", "version": __version__, "config": cfg}
    with open(str(out_path) + ".run.json", "w") as fh:
        json.dump(payload, fh, sort_keys=True, indent=2)
        fh.write("\n")


def _replica_path(template, idx, reps):
    if reps == 1:
        return Path(template)
    p = Path(template)
    return p.with_name(f"{p.stem}.r{idx}{p.suffix}")


def _embed_config(args):
    return EmbedConfig(d=args.d, q=args.q, epochs=args.epochs, step=args.step,
                       seed=args.seed, z_mode=args.z_mode, tol=args.tol)


def cmd_ingest(args):
    g = load_contact_list(args.input, t_res=args.t_res)
    if args.aggregate > 1:
        g = aggregate(g, args.aggregate)
    save_graph(g, args.output)
    _write_sidecar(args.output, args)
    print(f"wrote {args.output}: n={g.n} T={g.T} "
          f"temporal_edges={g.num_temporal_edges()}")


def cmd_embed(args):
    g = load_graph(args.input)
    op = build_operator(g, mode=args.mode)
    res = embed(op, _embed_config(args))
    save_embedding(res.X, args.output)
    _write_sidecar(args.output, args)
    print(f"wrote {args.output}: n={res.X.shape[0]} d={res.X.shape[1]} "
          f"loss={res.losses[-1]:.6f} converged={res.converged}")


def cmd_dist(args):
    X1 = load_embedding(args.emb_a)
    X2 = load_embedding(args.emb_b)
    if args.kind == "matched":
        value = matched_distance(X1, X2)
    else:
        value = unmatched_distance(X1, X2)
    print(value)


def cmd_distmat(args):
    ids = [Path(p).stem for p in args.embeddings]
    if len(set(ids)) != len(ids):
        ids = [f"{s}_{i}" for i, s in enumerate(ids)]
    Xs = [load_embedding(p) for p in args.embeddings]
    dm = pairwise_distances(Xs, kind=args.kind, ids=ids)
    save_distance_matrix(dm, args.output)
    _write_sidecar(args.output, args)
    print(f"wrote {args.output}: {len(ids)}x{len(ids)} {args.kind}")


def cmd_randomize(args):
    g = load_graph(args.input)
    reps = generate_replicas(g, RandomizationKind(args.kind),
                             seed=args.seed, reps=args.reps)
    for idx, rg in enumerate(reps):
        path = _replica_path(args.output, idx, args.reps)
        save_graph(rg, path)
        _write_sidecar(path, args)
    print(f"wrote {args.reps} {args.kind} replica(s) to {args.output}")


def cmd_generate(args):
    root = np.random.SeedSequence(args.seed)
    s_static, s_bank, s_temp = (int(c.generate_state(1)[0])
                                for c in root.spawn(3))
    sg = preset(args.model, args.n, args.mean_degree, seed=s_static)
    bank = synthetic_activity(args.T, n_series=args.series, seed=s_bank)
    g = temporalize(sg, bank, seed=s_temp)
    save_graph(g, args.output)
    _write_sidecar(args.output, args)
    print(f"wrote {args.output}: model={args.model} n={g.n} T={g.T} "
          f"temporal_edges={g.num_temporal_edges()}")


def _maybe(cfg, **overrides):
    return replace(cfg, **{k: v for k, v in overrides.items() if v is not None})


def _write_matrix_csv(path, ids, M):
    with open(path, "w") as fh:
        fh.write("kind," + ",".join(ids) + "\n")
        for name, row in zip(ids, M):
            fh.write(name + "," + ",".join(repr(float(v)) for v in row) + "\n")


def cmd_experiment(args):
    out = Path(args.output)
    stem = out.parent / out.stem
    if args.which == "classes":
        cfg = (ModelClassesConfig.paper_scale(seed=args.seed)
               if args.paper_scale else ModelClassesConfig(seed=args.seed))
        cfg = _maybe(cfg, instances=args.instances, epochs=args.epochs,
                     n_min=args.n_min, n_max=args.n_max, n_jobs=args.threads,
                     activity_path=args.activity)
        report = experiment_model_classes(cfg)
        with open(f"{stem}_nmi.csv", "w") as fh:
            fh.write("d,nmi\n")
            for d, v in zip(report.results["d_values"],
                            report.results["nmi_by_d"]):
                fh.write(f"{d},{v!r}\n")
        lam = [np.asarray(v) for v in report.results["lambda_vectors_max_d"]]
        models = report.results["models"]
        ids = [f"{models[j]}_{i}"
               for i, j in enumerate(report.results["labels_true"])]
        save_lambda_vectors(lam, ids, f"{stem}_lambda.csv")
    elif args.which == "relabel":
        cfg = (RelabelConfig.paper_scale(seed=args.seed)
               if args.paper_scale else RelabelConfig(seed=args.seed))
        cfg = _maybe(cfg, n=args.n, reps=args.reps, d=args.d,
                     epochs=args.epochs, n_jobs=args.threads)
        report = experiment_relabel(cfg)
        with open(f"{stem}_curve.csv", "w") as fh:
            fh.write("model,alpha,mean,std\n")
            for model in report.results["models"]:
                for alpha, mu, sd in zip(report.results["alphas"],
                                         report.results["mean"][model],
                                         report.results["std"][model]):
                    fh.write(f"{model},{alpha},{mu!r},{sd!r}\n")
    else:
        cfg = (RandomizationPairsConfig.paper_scale(seed=args.seed)
               if args.paper_scale else RandomizationPairsConfig(seed=args.seed))
        cfg = _maybe(cfg, reps=args.reps, d=args.d, epochs=args.epochs,
                     n_jobs=args.threads)
        if args.input is not None:
            g = load_graph(args.input)
        else:
            g = bursty_test_graph(seed=args.seed)
        report = experiment_randomization_pairs(g, cfg)
        kinds = report.results["kinds"]
        _write_matrix_csv(f"{stem}_nmi_matched.csv", kinds,
                          report.results["nmi_matched"])
        _write_matrix_csv(f"{stem}_nmi_unmatched.csv", kinds,
                          report.results["nmi_unmatched"])
    report.save(out)
    _write_sidecar(out, args)
    print(f"wrote {out} ({report.name}, {report.elapsed_s:.1f}s)")


def cmd_export_lambda(args):
    ids = [Path(p).stem for p in args.embeddings]
    vecs = [lambda_vector(load_embedding(p)) for p in args.embeddings]
    if len({v.shape[0] for v in vecs}) > 1:
        raise ValueError("embeddings must share the same dimension d")
    save_lambda_vectors(vecs, ids, args.output)
    _write_sidecar(args.output, args)
    print(f"wrote {args.output}: {len(ids)} vector(s)")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="tgdist",
        description="Embedding-based distances between temporal graphs.")
    parser.add_argument("--version", action="version",
                        version=f"tgdist {__version__}")
    parser.add_argument("--verbose", action="store_true",
                        help="log progress at INFO level")
    parser.add_argument("--config", default=None,
                        help="JSON file whose entries override flag values")
    sub = parser.add_subparsers(dest="command")

    p = sub.add_parser("ingest", help="contact list -> snapshot graph file")
    p.add_argument("input")
    p.add_argument("output")
    p.add_argument("--t-res", type=float, default=1.0,
                   help="seconds per snapshot bin")
    p.add_argument("--aggregate", type=int, default=1,
                   help="merge this many snapshots after binning")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("embed", help="graph file -> embedding CSV")
    p.add_argument("input")
    p.add_argument("output")
    p.add_argument("--d", type=int, default=32)
    p.add_argument("--q", type=int, default=1,
                   help="mixture groups for the normalization estimate")
    p.add_argument("--epochs", type=int, default=30)
    p.add_argument("--step", type=float, default=0.5)
    p.add_argument("--z-mode", default="auto",
                   choices=("auto", "exact", "mixture"))
    p.add_argument("--tol", type=float, default=1e-5)
    p.add_argument("--mode", default="auto",
                   choices=("auto", "lazy", "materialized"),
                   help="transition operator storage")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_embed)

    p = sub.add_parser("dist", help="print the distance between two embeddings")
    p.add_argument("--kind", default="matched",
                   choices=("matched", "unmatched"))
    p.add_argument("emb_a")
    p.add_argument("emb_b")
    p.set_defaults(func=cmd_dist)

    p = sub.add_parser("distmat",
                       help="pairwise distance matrix over embeddings")
    p.add_argument("--kind", default="unmatched",
                   choices=("matched", "unmatched"))
    p.add_argument("output")
    p.add_argument("embeddings", nargs="+")
    p.set_defaults(func=cmd_distmat)

    p = sub.add_parser("randomize", help="draw null-model replicas of a graph")
    p.add_argument("input")
    p.add_argument("output", help="template path; .rK is inserted when reps>1")
    p.add_argument("--kind", required=True, choices=KINDS)
    p.add_argument("--reps", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_randomize)

    p = sub.add_parser("generate",
                       help="synthetic temporal graph from a model preset")
    p.add_argument("output")
    p.add_argument("--model", required=True, choices=("er", "sbm", "cm", "gm"))
    p.add_argument("--n", type=int, default=300)
    p.add_argument("--mean-degree", type=float, default=4.8)
    p.add_argument("--T", type=int, default=150)
    p.add_argument("--series", type=int, default=100,
                   help="size of the synthetic activity bank")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("experiment", help="run a seeded experiment driver")
    p.add_argument("which", choices=("classes", "relabel", "randomization"))
    p.add_argument("output", help="JSON report path; CSV tables share its stem")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--paper-scale", action="store_true",
                   help="use the full published ensemble sizes")
    p.add_argument("--threads", type=int, default=None,
                   help="worker processes; results do not depend on it")
    p.add_argument("--instances", type=int, default=None)
    p.add_argument("--reps", type=int, default=None)
    p.add_argument("--epochs", type=int, default=None)
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--n-min", type=int, default=None)
    p.add_argument("--n-max", type=int, default=None)
    p.add_argument("--d", type=int, default=None)
    p.add_argument("--input", default=None,
                   help="graph file for the randomization experiment")
    p.add_argument("--activity", default=None,
                   help="saved graph whose edge activity series replace the "
                        "synthetic bank (classes experiment)")
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("export-lambda",
                       help="spectral summaries of embeddings -> CSV")
    p.add_argument("output")
    p.add_argument("embeddings", nargs="+")
    p.set_defaults(func=cmd_export_lambda)
    return parser


def _apply_config_file(args):
    if args.config is None:
        return
    with open(args.config) as fh:
        overrides = json.load(fh)
    if not isinstance(overrides, dict):
        raise ValueError("config file must contain a JSON object")
    for key, value in overrides.items():
        attr = key.replace("-", "_")
        if not hasattr(args, attr):
            raise ValueError(f"config file sets unknown option {key!r}")
        setattr(args, attr, value)


def main(argv=None):
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 2
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s")
    if args.command is None:
        build_parser().print_usage(sys.stderr)
        return 2
    try:
        _apply_config_file(args)
        args.func(args)
    except (DataFormatError, FileNotFoundError, IsADirectoryError,
            json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except np.linalg.LinAlgError as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return 4
    except ArithmeticError as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return 4
    except (ValueError, NotImplementedError) as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    return 0


def entrypoint():
    raise SystemExit(main())

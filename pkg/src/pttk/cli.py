"""Command line entry point ``pttk``.

Exit codes: 0 success, 2 approximation did not reach its tolerance, 3 bad
configuration or arguments.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys

import numpy as np

from . import io
from .baselines import MatrixOracle, aca
from .harness import (
    ConfigError,
    ExperimentConfig,
    env_seed,
    generate_points,
    load_config,
    relative_error,
    run_experiment,
)
from .kernels import KernelOracle
from .parametric import (
    GlobalFactorization,
    OfflineConfig,
    evaluate,
    global_offline,
    global_online,
    offline,
)

EXIT_OK, EXIT_UNCONVERGED, EXIT_CONFIG = 0, 2, 3


def _config_from_args(args) -> ExperimentConfig:
    if args.config:
        cfg = load_config(args.config, seed_fallback=env_seed())
    else:
        cfg = ExperimentConfig(seed=env_seed())
    if getattr(args, "seed", None) is not None:
        cfg = cfg.replace(seed=args.seed)
    return cfg


def _points(cfg: ExperimentConfig):
    """Source and target points exactly as :func:`run_experiment` draws them."""
    ss = np.random.SeedSequence(cfg.seed)
    r_src, r_tgt, _, _ = (np.random.default_rng(s) for s in ss.spawn(4))
    geom = cfg.geometry()
    X = generate_points(geom.source_box, cfg.n_sources, r_src)
    Y = X if cfg.mode.startswith("global") else generate_points(geom.target_box, cfg.n_targets, r_tgt)
    return X, Y


def _load_points(path, fallback):
    return fallback if path is None else np.loadtxt(path, ndmin=2)


def cmd_compress(args) -> int:
    cfg = _config_from_args(args)
    X, Y = _points(cfg)
    X = _load_points(args.sources, X)
    Y = X if cfg.mode.startswith("global") else _load_points(args.targets, Y)
    oracle = KernelOracle(cfg.spec(), cfg.geometry())
    ocfg = OfflineConfig(n=cfg.n, eps=cfg.eps[0], seed=cfg.seed, max_sweeps=cfg.max_sweeps)
    if cfg.mode.startswith("global"):
        f = global_offline(oracle, X, config=ocfg)
    else:
        f = offline(oracle, X, Y, config=ocfg)
    size = io.save(f, args.output)
    print(json.dumps({"output": args.output, "bytes": size, "converged": f.converged,
                      "evaluations": f.meta["evaluations"]}))
    return EXIT_OK if f.converged else EXIT_UNCONVERGED


def cmd_instantiate(args) -> int:
    f = io.load(args.input)
    theta = np.array(args.theta, dtype=float)
    if isinstance(f, GlobalFactorization):
        out = global_online(f, theta, eps=args.eps, compress=args.compress)
        K = out.evaluate()
        rank = out.rank
    else:
        K = evaluate(f, theta)
        rank = list(f.ranks)
    report = {"rank": rank, "shape": list(K.shape)}
    if args.config:
        cfg = _config_from_args(args)
        X, Y = _points(cfg)
        oracle = KernelOracle(cfg.spec(), cfg.geometry())
        report["relative_error"] = relative_error(oracle.matrix(X, Y, theta), K, cfg.norm)
    if args.dump:
        np.save(args.dump, K)
        report["dump"] = args.dump
    print(json.dumps(report))
    return EXIT_OK


def cmd_experiment(args) -> int:
    cfg = _config_from_args(args)
    if args.output:
        cfg = cfg.replace(output=args.output)
    result = run_experiment(cfg)
    for r in result.rows:
        print(json.dumps(r.__dict__))
    if any(r.status.startswith("error") for r in result.rows):
        return EXIT_CONFIG
    return EXIT_UNCONVERGED if any(r.status == "unconverged" for r in result.rows) else EXIT_OK


def cmd_baseline_aca(args) -> int:
    cfg = _config_from_args(args)
    X, Y = _points(cfg)
    oracle = KernelOracle(cfg.spec(), cfg.geometry())
    theta = np.array(args.theta or [], dtype=float)
    pair = aca(MatrixOracle.from_kernel(oracle, X, Y, theta), cfg.eps[0], args.max_rank)
    err = relative_error(oracle.matrix(X, Y, theta), pair.evaluate(), cfg.norm)
    print(json.dumps({"rank": pair.rank, "converged": pair.converged, "relative_error": err}))
    return EXIT_OK if pair.converged else EXIT_UNCONVERGED


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="pttk", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("compress", help="offline stage, writes a PTTK1 file")
    c.add_argument("config", nargs="?", help="key = value config file")
    c.add_argument("-o", "--output", required=True)
    c.add_argument("--sources", help="text file of source points (one per row)")
    c.add_argument("--targets", help="text file of target points (one per row)")
    c.add_argument("--seed", type=int)
    c.set_defaults(func=cmd_compress)

    i = sub.add_parser("instantiate", help="online stage for one parameter value")
    i.add_argument("input", help="PTTK1 file")
    i.add_argument("theta", nargs="*", type=float)
    i.add_argument("--config", help="config used for compression; enables the error report")
    i.add_argument("--dump", help="write the dense matrix to this .npy file")
    i.add_argument("--eps", type=float, default=1e-5, help="truncation tolerance (global files)")
    i.add_argument("--compress", action="store_true", help="eigenpair truncation (global files)")
    i.add_argument("--seed", type=int)
    i.set_defaults(func=cmd_instantiate)

    e = sub.add_parser("experiment", help="run a config and write CSV/JSON reports")
    e.add_argument("config", nargs="?")
    e.add_argument("-o", "--output")
    e.add_argument("--seed", type=int)
    e.set_defaults(func=cmd_experiment)

    a = sub.add_parser("baseline-aca", help="ACA on the config's kernel matrix")
    a.add_argument("config", nargs="?")
    a.add_argument("--theta", nargs="*", type=float)
    a.add_argument("--max-rank", type=int)
    a.add_argument("--seed", type=int)
    a.set_defaults(func=cmd_baseline_aca)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_CONFIG
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ConfigError, io.ContainerError, FileNotFoundError) as exc:
        print(f"pttk: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ValueError as exc:
        print(f"pttk: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())

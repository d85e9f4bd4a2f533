"""Run experiment configs and collect their rows into one Markdown table.

Usage::

    python scripts/run_experiments.py                    # every config in scripts/configs
    python scripts/run_experiments.py scripts/configs/smoke.cfg --out results

Each config writes ``<out>/<name>.csv`` and ``<out>/<name>.json``; the
combined table goes to ``<out>/summary.md``.
"""

from __future__ import annotations

import argparse
import logging
from pathlib import Path

from pttk.harness import env_seed, load_config, run_experiment

HERE = Path(__file__).resolve().parent
COLUMNS = ("kernel", "tol", "offline_time_s", "storage_bytes", "online_time_s",
           "error_mean", "error_max", "ranks", "evaluations", "status")


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return f"{value:.3g}"
    return str(value)


def main(argv=None) -> int:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("configs", nargs="*", type=Path)
    p.add_argument("--out", type=Path, default=Path("results"))
    p.add_argument("--seed", type=int, help="overrides the seed of every config")
    p.add_argument("-v", "--verbose", action="store_true")
    args = p.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)

    paths = args.configs or sorted((HERE / "configs").glob("*.cfg"))
    lines = ["| config | mode | " + " | ".join(COLUMNS) + " |", "|---" * (len(COLUMNS) + 2) + "|"]
    for path in paths:
        cfg = load_config(path, seed_fallback=env_seed())
        if args.seed is not None:
            cfg = cfg.replace(seed=args.seed)
        cfg = cfg.replace(output=str(args.out / path.stem))
        print(f"running {path.name} ({cfg.mode}, eps {', '.join(f'{e:g}' for e in cfg.eps)})", flush=True)
        for row in run_experiment(cfg).rows:
            cells = [_fmt(getattr(row, c)) for c in COLUMNS]
            lines.append(f"| {path.stem} | {cfg.mode} | " + " | ".join(cells) + " |")
            print("  " + lines[-1], flush=True)
    args.out.mkdir(parents=True, exist_ok=True)
    (args.out / "summary.md").write_text("\n".join(lines) + "\n")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())

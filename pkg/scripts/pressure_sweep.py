#!/usr/bin/env python3
"""Pressure-approximation study on the bundled models.

Sweeps P_k(t) over a (k, t) grid for one bundled model, prints the
largest-k estimates with their Cauchy gaps, and writes the CSV/JSON pair
into a fresh run directory.
"""

from __future__ import annotations

import argparse
from dataclasses import dataclass

from gibbsline import BUNDLED_NAMES, bundled_pair, pressure_sweep
from gibbsline.cli import _fmt, emit
from gibbsline.runstore import RunStore


@dataclass(frozen=True)
class StudyConfig:
    model: str = "log_quadratic"
    k_max: int = 12
    ts: tuple[float, ...] = (2.0, 4.0, 8.0, 16.0, 32.0, 64.0)
    words: tuple[tuple[int, ...], ...] = ((0,), (0, 0))
    out: str = "runs"


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--model", choices=BUNDLED_NAMES, default="log_quadratic")
    parser.add_argument("--k-max", type=int, default=12)
    parser.add_argument("--out", default="runs")
    args = parser.parse_args()
    cfg = StudyConfig(model=args.model, k_max=args.k_max, out=args.out)

    model, potential = bundled_pair(cfg.model)
    result = pressure_sweep(model, potential, ks=tuple(range(1, cfg.k_max + 1)), ts=cfg.ts, words=cfg.words)

    store = RunStore(cfg.out)
    run_id = store.new_run("script-pressure-" + cfg.model, "pressure_sweep.py", "0.1.0")
    run_dir = store.run_dir(run_id)
    emit(result, "csv", run_dir / "pressure.csv")
    emit(result, "json", run_dir / "pressure.json")

    print(f"model: {cfg.model}")
    for t, info in sorted(result.diagnostics["p_estimate"].items()):
        print(f"  P({_fmt(t)}) ~ {_fmt(info['value'])}   cauchy gap {_fmt(info['cauchy_gap'])}")
    print(f"monotone in k: {all(result.diagnostics['monotone_in_k'].values())}")
    print(f"outputs in {run_dir}")


if __name__ == "__main__":
    main()

"""NRF versus waveplate angle for the singlet and for PsiPlus.

Writes one CSV per (state, plate) into --out-dir and prints a short summary:
the singlet curves should be flat, the PsiPlus curves modulated.

    python scripts/polarization_sweeps.py --pulses 20000 --out-dir results/sweeps
"""

from __future__ import annotations

import argparse
from dataclasses import replace
from pathlib import Path

import numpy as np

from polbell import experiment
from polbell.config import load_config

CONFIGS = Path(__file__).resolve().parents[1] / "configs"


def summarize(name: str, plate: str, rows) -> str:
    a = np.array([r.nrf_analytic for r in rows])
    line = f"{name:8s} {plate}: analytic min {a.min():.4g} max {a.max():.4g}"
    mc = np.array([r.nrf_mc for r in rows])
    if np.all(np.isfinite(mc)):
        z = (mc - a) / np.array([r.nrf_mc_err for r in rows])
        line += f", MC chi2/dof {np.mean(z**2):.2f}, max |z| {np.max(np.abs(z)):.2f}"
    return line


def main(argv=None) -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out-dir", default="results/sweeps")
    ap.add_argument("--pulses", type=int, default=None, help="override mc.pulses")
    ap.add_argument("--seed", type=int, default=None, help="override mc.seed")
    ap.add_argument("--step", type=float, default=None, help="angle step in degrees")
    args = ap.parse_args(argv)

    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for name, cfg_file in (("singlet", "headline.yaml"), ("psiplus", "psi_plus.yaml")):
        cfg = load_config(CONFIGS / cfg_file).with_overrides(seed=args.seed, pulses=args.pulses)
        if args.step is not None:
            cfg = replace(cfg, sweep=replace(cfg.sweep, step=args.step))
        for plate, rows in experiment.run_sweep(cfg).items():
            path = out / f"{name}_{plate.lower()}.csv"
            path.write_text(experiment.sweep_csv(rows))
            print(summarize(name, plate, rows))
    print(f"CSV files in {out}")


if __name__ == "__main__":
    main()

"""Monte Carlo NRF of S1, S2, S3 for a scenario, next to the analytic value.

    python scripts/headline_nrf.py                       # configs/headline.yaml
    python scripts/headline_nrf.py configs/singlet_eta065.yaml --pulses 200000
"""

from __future__ import annotations

import argparse
from pathlib import Path

from polbell import experiment
from polbell.config import load_config

DEFAULT = Path(__file__).resolve().parents[1] / "configs" / "headline.yaml"


def main(argv=None) -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("config", nargs="?", default=str(DEFAULT))
    ap.add_argument("--pulses", type=int, default=None)
    ap.add_argument("--seed", type=int, default=None)
    args = ap.parse_args(argv)

    cfg = load_config(args.config).with_overrides(seed=args.seed, pulses=args.pulses)
    res = experiment.run_mc(cfg)
    print(f"lossless <S0> = {res['source']['s0_lossless']:.4g}, eta = {res['source']['eta']}, pulses = {res['pulses']}, seed = {res['seed']}")
    print(f"{'':4s}{'analytic':>10s}{'MC':>10s}{'err':>9s}{'z':>7s}")
    for name, r in res["stokes"].items():
        print(f"{name:4s}{r['nrf_analytic']:10.4f}{r['value']:10.4f}{r['std_error']:9.4f}{r['z_score']:7.2f}")
    print(f"Wigner sampling bias <= {res['wigner_bias_bound']:.2g}")


if __name__ == "__main__":
    main()

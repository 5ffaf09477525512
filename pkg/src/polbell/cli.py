"""Command-line entry point: ``polbell {analytic,sweep,mc,validate,calibrate}``.

Exit codes: 0 success, 1 runtime error, 2 configuration error,
3 validation failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
from pathlib import Path

from . import experiment
from .config import ConfigError, ScenarioConfig, load_config
from .fock import TruncationError

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_CONFIG = 2
EXIT_VALIDATION = 3

log = logging.getLogger("polbell")


def _json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=False, allow_nan=True) + "\n"


def _rows_csv(rows) -> str:
    buf = io.StringIO()
    csv.writer(buf, lineterminator="\n").writerows(rows)
    return buf.getvalue()


def _emit(text: str, path: str | None) -> None:
    if path is None:
        sys.stdout.write(text)
        return
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    Path(path).write_text(text, encoding="utf-8")
    log.info("wrote %s", path)


def _plate_path(path: str | None, plate: str, n_plates: int) -> str | None:
    if path is None or n_plates == 1:
        return path
    p = Path(path)
    return str(p.with_name(f"{p.stem}_{plate.lower()}{p.suffix}"))


def _load(args) -> ScenarioConfig:
    cfg = load_config(args.config)
    return cfg.with_overrides(seed=args.seed, pulses=args.pulses, path=args.out, fmt=args.format)


def cmd_analytic(args) -> int:
    cfg = _load(args)
    result = experiment.run_analytic(cfg)
    if cfg.outputs.format == "csv":
        rows = [("quantity", "value")] + [(k, experiment.format_value(v)) for k, v in experiment.analytic_rows(result)]
        _emit(_rows_csv(rows), cfg.outputs.path)
    else:
        _emit(_json(result), cfg.outputs.path)
    return EXIT_OK


def cmd_sweep(args) -> int:
    cfg = _load(args)
    sweeps = experiment.run_sweep(cfg)
    if cfg.outputs.format == "csv":
        for plate, rows in sweeps.items():
            if cfg.outputs.path is None and len(sweeps) > 1:
                sys.stdout.write(f"# {plate}\n")
            _emit(experiment.sweep_csv(rows), _plate_path(cfg.outputs.path, plate, len(sweeps)))
    else:
        payload = {plate: [dict(zip(experiment.SWEEP_COLUMNS, (r.angle_deg, r.nrf_analytic, r.nrf_mc,
                                                              r.nrf_mc_err, r.mean_det1, r.mean_det2)))
                           for r in rows] for plate, rows in sweeps.items()}
        _emit(_json(payload), cfg.outputs.path)
    return EXIT_OK


def cmd_mc(args) -> int:
    cfg = _load(args)
    result = experiment.run_mc(cfg)
    if cfg.outputs.format == "csv":
        _emit(_rows_csv(experiment.mc_rows(result)), cfg.outputs.path)
    else:
        _emit(_json(result), cfg.outputs.path)
    return EXIT_OK


def cmd_validate(args) -> int:
    report = experiment.run_validate(args.max_gamma, args.cutoff)
    if args.format == "csv":
        rows = [("check", "deviation", "bound", "passed")]
        rows += [(c["name"], experiment.format_value(c["deviation"]), experiment.format_value(c["bound"]), c["passed"])
                 for c in report["checks"]]
        _emit(_rows_csv(rows), args.out)
    else:
        _emit(_json(report), args.out)
    status = "PASS" if report["passed"] else "FAIL"
    print(f"validate: {status} ({report['n_checks']} checks, max deviation {report['max_deviation']:.3g})",
          file=sys.stderr)
    return EXIT_OK if report["passed"] else EXIT_VALIDATION


def cmd_calibrate(args) -> int:
    cfg = _load(args)
    result = experiment.run_calibrate(cfg)
    if cfg.outputs.format == "csv":
        rows = [("quantity", "value")] + [(k, v) for k, v in result.items()]
        _emit(_rows_csv(rows), cfg.outputs.path)
    else:
        _emit(_json(result), cfg.outputs.path)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="polbell", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, config=True):
        if config:
            p.add_argument("--config", required=True, help="scenario YAML file")
            p.add_argument("--seed", type=int)
            p.add_argument("--pulses", type=int)
        p.add_argument("--out", help="output path (default: stdout)")
        p.add_argument("--format", choices=("csv", "json"))
        return p

    common(sub.add_parser("analytic", help="exact Stokes means, variances, NRF and bounds")).set_defaults(
        func=cmd_analytic)
    common(sub.add_parser("sweep", help="NRF versus HWP/QWP angle")).set_defaults(func=cmd_sweep)
    common(sub.add_parser("mc", help="Monte Carlo NRF for S1, S2, S3")).set_defaults(func=cmd_mc)
    common(sub.add_parser("calibrate", help="shot-noise calibration with coherent light")).set_defaults(
        func=cmd_calibrate)
    val = common(sub.add_parser("validate", help="Gaussian engine vs Fock oracle"), config=False)
    val.add_argument("--max-gamma", type=float, default=0.4)
    val.add_argument("--cutoff", type=int, default=14)
    val.set_defaults(func=cmd_validate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (ConfigError, TruncationError) as exc:
        print(f"config error:\n{exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG if getattr(exc, "filename", None) == getattr(args, "config", None) else EXIT_RUNTIME
    except Exception as exc:  # noqa: BLE001 - stable exit-code contract
        log.debug("runtime failure", exc_info=True)
        print(f"runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())

"""Scenario runners behind the command-line tool."""

from __future__ import annotations

import csv
import io
import math
import time
from dataclasses import astuple, dataclass, fields

import numpy as np

from . import fock
from .config import ConfigError, ScenarioConfig
from .detection import (
    STOKES_SETTINGS,
    DetectorModel,
    Setting,
    electronic_fraction,
    estimate_nrf,
    sample_pulses,
    shot_noise_calibration,
    shot_noise_dominance_level,
    wigner_bias_bound,
)
from .gaussian import GaussianState, apply_loss, quadratic_mean, quadratic_variance, vacuum_state
from .optics import (
    BellKind,
    DichroicPlate,
    SourceConfig,
    apply_dichroic_plate,
    make_bell_state,
    mzi_source,
    polarized_coherent_state,
    preparation_chain,
    rotate_basis,
)
from .stokes import analyzer_form, nrf_bounds, rotated_form, stokes_form, stokes_report, uncertainty_check

CSV_DIGITS = 9

# floating-point allowance added to every oracle bound, relative to max(1, |value|)
ROUNDOFF = 1e-12


def detector_model(cfg: ScenarioConfig) -> DetectorModel:
    return DetectorModel(cfg.detector.electronic_noise_sigma, cfg.detector.gain)


def dichroic_plate(cfg: ScenarioConfig) -> DichroicPlate:
    p = cfg.optics.plate
    return DichroicPlate(math.radians(p.axis_deg), math.radians(p.retardance_w1_deg), math.radians(p.retardance_w2_deg))


def build_state(cfg: ScenarioConfig) -> GaussianState:
    """Source, optional dichroic plate, extra polarization rotation, then loss."""
    src = cfg.source
    phase = math.radians(src.resolved_pump_phase)
    plate = dichroic_plate(cfg) if cfg.dichroic_on else None
    if src.kind == "coherent":
        state = polarized_coherent_state(src.s0, src.polarization)
    else:
        gamma = src.resolved_gain
        if src.kind == "bell":
            state = make_bell_state(src.state, gamma)
        elif src.kind == "mzi":
            state = mzi_source(SourceConfig(gamma, phase, (1.0,) * 4, src.gain_h, src.gain_v))
        else:
            state = preparation_chain(
                gamma, 1.0, pump_phase=phase, dichroic=plate, gain_h=src.gain_h, gain_v=src.gain_v
            )
    if plate is not None and src.kind != "chain":
        state = apply_dichroic_plate(state, plate)
    if cfg.optics.extra_rotation:
        state = rotate_basis(state, math.radians(cfg.optics.extra_rotation))
    return apply_loss(state, cfg.loss.eta)


def _source_summary(cfg: ScenarioConfig) -> dict:
    src = cfg.source
    out = {"kind": src.kind, "s0_lossless": src.s0}
    if src.kind != "coherent":
        out["gain"] = src.resolved_gain
    if src.kind == "bell":
        out["state"] = src.state
    if src.kind in ("mzi", "chain"):
        out["pump_phase_deg"] = src.resolved_pump_phase
    if src.kind == "coherent":
        out["polarization"] = src.polarization
    out["dichroic"] = cfg.dichroic_on
    out["eta"] = list(cfg.loss.eta)
    return out


def run_analytic(cfg: ScenarioConfig) -> dict:
    state = build_state(cfg)
    report = stokes_report(state)
    eta = cfg.loss.eta
    eta_eff = float(np.mean(eta))
    lo, hi = nrf_bounds(cfg.source.s0 / 4.0, eta_eff)
    unc = uncertainty_check(state)
    notes = list(report.notes)
    if len(set(eta)) > 1:
        notes.append("nrf_bounds use the mean of a non-uniform eta")
    return {
        "source": _source_summary(cfg),
        "means": list(report.means),
        "variances": list(report.variances),
        "nrf": None if report.nrf is None else list(report.nrf),
        "nrf_bounds": {"eta": eta_eff, "min": lo, "max": hi},
        "uncertainty": {"margins": list(unc.margins), "satisfied": list(unc.satisfied)},
        "notes": notes,
    }


def analytic_rows(result: dict) -> list[tuple[str, float]]:
    rows = [(f"mean_S{k}", v) for k, v in enumerate(result["means"])]
    rows += [(f"var_S{k}", v) for k, v in enumerate(result["variances"])]
    if result["nrf"] is not None:
        rows += [(f"nrf_S{k + 1}", v) for k, v in enumerate(result["nrf"])]
    rows += [("nrf_min", result["nrf_bounds"]["min"]), ("nrf_max", result["nrf_bounds"]["max"])]
    rows += [(f"uncertainty_margin_{i}", v) for i, v in enumerate(result["uncertainty"]["margins"])]
    return rows


@dataclass(frozen=True)
class SweepRow:
    angle_deg: float
    nrf_analytic: float
    nrf_mc: float
    nrf_mc_err: float
    mean_det1: float
    mean_det2: float


SWEEP_COLUMNS = tuple(f.name for f in fields(SweepRow))


def run_sweep(cfg: ScenarioConfig) -> dict[str, list[SweepRow]]:
    """NRF versus waveplate angle for every configured plate.

    Each (plate, angle) point draws from its own seed stream
    ``(seed, plate index, angle index)``.
    """
    state = build_state(cfg)
    det = detector_model(cfg)
    s0 = quadratic_mean(state, stokes_form(0))
    out = {}
    for p_idx, plate in enumerate(cfg.sweep.plates):
        rows = []
        for a_idx, angle in enumerate(cfg.sweep.angles()):
            theta = math.radians(angle)
            form = analyzer_form(plate, theta)
            nrf_a = quadratic_variance(state, form) / s0 if s0 > 1e-12 else math.nan
            det1 = 0.5 * (s0 + quadratic_mean(state, form))
            if s0 > 1e-12:
                m1, m2 = det1 / s0, (s0 - det1) / s0
            else:
                m1 = m2 = math.nan
            nrf_mc = err = math.nan
            if cfg.mc.enabled:
                est = _mc_point(state, Setting(plate, theta), det, cfg, (cfg.mc.seed, p_idx, a_idx))
                nrf_mc, err = est.value, est.std_error
                total = est.mean_q1 + est.mean_q2
                m1, m2 = est.mean_q1 / total, est.mean_q2 / total
            rows.append(SweepRow(float(angle), nrf_a, nrf_mc, err, m1, m2))
        out[plate] = rows
    return out


def _mc_point(state, setting: Setting, det: DetectorModel, cfg: ScenarioConfig, stream):
    batch = sample_pulses(state, setting, det, cfg.mc.pulses, list(stream), cfg.mc.workers)
    dark = None
    if cfg.detector.dark_run:
        dark = sample_pulses(vacuum_state(), setting, det, cfg.mc.pulses, list(stream) + [1], cfg.mc.workers)
    return estimate_nrf(batch, 1.0, det, dark=dark, rng_seed=list(stream))


def format_value(x: float) -> str:
    return format(float(x), f".{CSV_DIGITS}g")


def sweep_csv(rows: list[SweepRow]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(SWEEP_COLUMNS)
    for row in rows:
        writer.writerow([format_value(v) for v in astuple(row)])
    return buf.getvalue()


def parse_sweep_csv(text: str) -> list[SweepRow]:
    reader = csv.reader(io.StringIO(text))
    header = next(reader)
    if tuple(header) != SWEEP_COLUMNS:
        raise ValueError(f"unexpected sweep header {header}")
    return [SweepRow(*(float(v) for v in line)) for line in reader if line]


def run_mc(cfg: ScenarioConfig) -> dict:
    """Monte Carlo NRF for S1, S2, S3 next to the analytic values."""
    state = build_state(cfg)
    det = detector_model(cfg)
    bias = wigner_bias_bound(state)
    results = {}
    for k, setting in STOKES_SETTINGS.items():
        analytic = quadratic_variance(state, stokes_form(k)) / quadratic_mean(state, stokes_form(0))
        est = _mc_point(state, setting, det, cfg, (cfg.mc.seed, k))
        results[f"S{k}"] = {
            "setting": {"plate": setting.plate, "angle_deg": math.degrees(setting.angle)},
            "nrf_analytic": analytic,
            **est.to_dict(),
            "z_score": (est.value - analytic) / est.std_error,
        }
    return {
        "source": _source_summary(cfg),
        "detector": {"electronic_noise_sigma": det.electronic_noise_sigma, "gain": det.gain},
        "pulses": cfg.mc.pulses,
        "seed": cfg.mc.seed,
        "workers": cfg.mc.workers,
        "wigner_bias_bound": bias,
        "stokes": results,
    }


def mc_rows(result: dict) -> list[list]:
    header = ["observable", "nrf_analytic", "value", "std_error", "n_pulses", "mean_q1", "mean_q2"]
    rows = [header]
    for name, r in result["stokes"].items():
        rows.append([name] + [format_value(r[c]) for c in header[1:]])
    return rows


def run_validate(
    max_gamma: float = 0.4,
    cutoff: int = 14,
    *,
    stokes=stokes_form,
    moment_orders: int = 4,
) -> dict:
    """Compare the Gaussian engine with the Fock oracle over a gain grid.

    ``stokes`` builds the Stokes forms used on the Gaussian side; tests pass
    a deliberately broken one to check that the harness fails.
    """
    if max_gamma > fock.MAX_ORACLE_GAMMA:
        raise fock.TruncationError(f"max_gamma {max_gamma} exceeds the oracle regime {fock.MAX_ORACLE_GAMMA}")
    t0 = time.perf_counter()
    checks = []

    def check(name, deviation, bound, scale=1.0):
        bound = bound + ROUNDOFF * max(1.0, abs(scale))
        checks.append({"name": name, "deviation": float(deviation), "bound": float(bound),
                       "passed": bool(deviation <= bound)})

    forms = [stokes(k) for k in range(4)]
    for label, plate, deg, target in (("HWP 0deg = S1", "HWP", 0.0, 1), ("HWP 22.5deg = S2", "HWP", 22.5, 2),
                                      ("QWP 45deg = S3", "QWP", 45.0, 3)):
        m = rotated_form(forms[1], plate, math.radians(deg)).m
        check(label, np.max(np.abs(m - forms[target].m)), 0.0)

    gammas = np.round(np.arange(0.1, max_gamma + 1e-9, 0.1), 12) if max_gamma >= 0.1 else np.array([max_gamma])
    norm_deficits = {}
    for gamma in gammas:
        mean_bound = fock.moment_truncation_bound(gamma, cutoff, 1)
        for kind in BellKind:
            g_state = make_bell_state(kind, gamma)
            f_state = fock.build_fock_state(kind, gamma, cutoff)
            norm_deficits[f"{kind.value}@{gamma:g}"] = 1.0 - f_state.norm**2
            for k in range(4):
                g_mean = quadratic_mean(g_state, forms[k])
                f_mean = fock.stokes_moment_fock(f_state, k, 1)
                check(f"{kind.value} G={gamma:g} <S{k}>", abs(g_mean - f_mean), mean_bound, g_mean)
                g_var = quadratic_variance(g_state, forms[k])
                f_var = fock.stokes_variance_fock(f_state, k)
                check(f"{kind.value} G={gamma:g} Var(S{k})", abs(g_var - f_var),
                      fock.variance_truncation_bound(gamma, cutoff, abs(g_mean)), g_var)
            if kind is BellKind.PsiMinus:
                for k in (1, 2, 3):
                    for order in range(1, moment_orders + 1):
                        check(f"singlet G={gamma:g} <S{k}^{order}>", abs(fock.stokes_moment_fock(f_state, k, order)),
                              fock.moment_truncation_bound(gamma, cutoff, order))
                    check(f"singlet G={gamma:g} ||S{k} psi||", fock.annihilation_test(f_state, k),
                          fock.annihilation_bound(gamma, cutoff))

    failed = [c for c in checks if not c["passed"]]
    worst = max(checks, key=lambda c: c["deviation"] / c["bound"] if c["bound"] > 0 else math.inf)
    return {
        "passed": not failed,
        "cutoff": cutoff,
        "gammas": [float(g) for g in gammas],
        "n_checks": len(checks),
        "failed": [c["name"] for c in failed],
        "max_deviation": max(c["deviation"] for c in checks),
        "worst_relative": worst,
        "renormalization": {"norm_deficit": norm_deficits},
        "checks": checks,
        "seconds": time.perf_counter() - t0,
    }


def run_calibrate(cfg: ScenarioConfig) -> dict:
    if cfg.source.kind != "coherent":
        raise ConfigError("calibrate: source.kind must be 'coherent' (attenuated laser)")
    det = detector_model(cfg)
    mean_photons = quadratic_mean(build_state(cfg), stokes_form(0))
    est = shot_noise_calibration(mean_photons, cfg.mc.pulses, det, cfg.mc.seed, cfg.mc.workers)
    level = shot_noise_dominance_level(det)
    ratio = electronic_fraction(mean_photons, det)
    return {
        "mean_photons": mean_photons,
        "snl": est.value,
        "snl_std_error": est.std_error,
        "electronic_noise_sigma": det.electronic_noise_sigma,
        "electronic_to_shot_ratio": ratio,
        "shot_exceeds_electronic_tenfold_at": level,
        "shot_exceeds_electronic_tenfold": bool(mean_photons >= level),
        "pulses": cfg.mc.pulses,
        "seed": cfg.mc.seed,
    }

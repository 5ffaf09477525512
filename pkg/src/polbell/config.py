"""Scenario configuration: YAML document -> validated :class:`ScenarioConfig`.

Angles are given in degrees in the document and stored in degrees here;
conversion to radians happens where states are built.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np
import yaml

from .optics import BellKind

SOURCE_KINDS = ("bell", "mzi", "chain", "coherent")
PLATES = ("HWP", "QWP")
FORMATS = ("csv", "json")
POLARIZATIONS = ("H", "V", "D", "A", "R", "L")


class ConfigError(ValueError):
    """Raised with every problem found in a document, one per line."""

    def __init__(self, problems):
        if isinstance(problems, str):
            problems = [problems]
        self.problems = list(problems)
        super().__init__("\n".join(self.problems))


@dataclass(frozen=True)
class SourceSpec:
    kind: str = "bell"
    state: str = "PsiMinus"
    gain: float | None = None
    target_s0: float | None = None
    pump_phase: float | None = None  # degrees; None -> 180 for chain, 0 for mzi
    gain_h: float | None = None
    gain_v: float | None = None
    polarization: str = "D"

    @property
    def resolved_gain(self) -> float:
        if self.gain is not None:
            return float(self.gain)
        return float(np.arcsinh(np.sqrt(self.target_s0 / 4.0)))

    @property
    def s0(self) -> float:
        """Lossless mean total photon number."""
        if self.target_s0 is not None:
            return float(self.target_s0)
        return float(4.0 * np.sinh(self.gain) ** 2)

    @property
    def resolved_pump_phase(self) -> float:
        if self.pump_phase is not None:
            return float(self.pump_phase)
        return 180.0 if self.kind == "chain" else 0.0


@dataclass(frozen=True)
class PlateSpec:
    axis_deg: float = 0.0
    retardance_w1_deg: float = 180.0
    retardance_w2_deg: float = 0.0


@dataclass(frozen=True)
class OpticsSpec:
    dichroic: bool | None = None  # None -> on for chain, off otherwise
    plate: PlateSpec = field(default_factory=PlateSpec)
    extra_rotation: float = 0.0  # degrees


@dataclass(frozen=True)
class LossSpec:
    eta: tuple[float, float, float, float] = (1.0, 1.0, 1.0, 1.0)


@dataclass(frozen=True)
class DetectorSpec:
    electronic_noise_sigma: float = 180.0
    gain: float = 1.0
    dark_run: bool = False


@dataclass(frozen=True)
class SweepSpec:
    plates: tuple[str, ...] = ("HWP",)
    start: float = 0.0
    stop: float = 90.0
    step: float = 2.0

    def angles(self) -> np.ndarray:
        count = int(np.floor((self.stop - self.start) / self.step + 1e-9)) + 1
        return self.start + self.step * np.arange(count)


@dataclass(frozen=True)
class MCSpec:
    enabled: bool = True
    pulses: int = 100_000
    seed: int = 2011
    workers: int = 1


@dataclass(frozen=True)
class OutputSpec:
    path: str | None = None
    format: str = "json"


@dataclass(frozen=True)
class ScenarioConfig:
    source: SourceSpec = field(default_factory=SourceSpec)
    optics: OpticsSpec = field(default_factory=OpticsSpec)
    loss: LossSpec = field(default_factory=LossSpec)
    detector: DetectorSpec = field(default_factory=DetectorSpec)
    sweep: SweepSpec = field(default_factory=SweepSpec)
    mc: MCSpec = field(default_factory=MCSpec)
    outputs: OutputSpec = field(default_factory=OutputSpec)

    @property
    def dichroic_on(self) -> bool:
        if self.optics.dichroic is None:
            return self.source.kind == "chain"
        return self.optics.dichroic

    def with_overrides(self, seed=None, pulses=None, path=None, fmt=None) -> "ScenarioConfig":
        mc = replace(
            self.mc,
            seed=self.mc.seed if seed is None else int(seed),
            pulses=self.mc.pulses if pulses is None else int(pulses),
        )
        outputs = replace(
            self.outputs,
            path=self.outputs.path if path is None else path,
            format=self.outputs.format if fmt is None else fmt,
        )
        problems = []
        if mc.pulses < 100:
            problems.append("mc.pulses: must be >= 100")
        if outputs.format not in FORMATS:
            problems.append(f"outputs.format: must be one of {FORMATS}")
        if problems:
            raise ConfigError(problems)
        return replace(self, mc=mc, outputs=outputs)


_SECTIONS = {
    "source": {"kind", "state", "gain", "target_s0", "pump_phase", "gain_h", "gain_v", "polarization"},
    "optics": {"dichroic", "plate", "extra_rotation"},
    "loss": {"eta"},
    "detector": {"electronic_noise_sigma", "gain", "dark_run"},
    "sweep": {"plate", "start", "stop", "step"},
    "mc": {"enabled", "pulses", "seed", "workers"},
    "outputs": {"path", "format"},
}
_PLATE_KEYS = {"axis_deg", "retardance_w1_deg", "retardance_w2_deg"}


def _number(value, where, problems, *, integer=False):
    if isinstance(value, str):
        # YAML 1.1 reads "1e6" as a string
        try:
            value = float(value)
        except ValueError:
            pass
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        problems.append(f"{where}: expected a number, got {value!r}")
        return None
    if integer and int(value) != value:
        problems.append(f"{where}: expected an integer, got {value!r}")
        return None
    if not np.isfinite(value):
        problems.append(f"{where}: must be finite")
        return None
    return int(value) if integer else float(value)


def _flag(value, where, problems):
    if isinstance(value, bool):
        return value
    if isinstance(value, str) and value.lower() in ("on", "off"):
        return value.lower() == "on"
    problems.append(f"{where}: expected true/false or on/off, got {value!r}")
    return None


def _section(doc, name, problems) -> dict:
    raw = doc.get(name, {}) or {}
    if not isinstance(raw, dict):
        problems.append(f"{name}: expected a mapping")
        return {}
    for key in sorted(set(raw) - _SECTIONS[name]):
        problems.append(f"{name}.{key}: unknown key")
    return raw


def _parse_source(raw, problems) -> SourceSpec:
    kw = {}
    kind = raw.get("kind", "bell")
    if kind not in SOURCE_KINDS:
        problems.append(f"source.kind: must be one of {SOURCE_KINDS}, got {kind!r}")
    kw["kind"] = kind
    if "state" in raw:
        try:
            kw["state"] = BellKind.parse(raw["state"]).value
        except ValueError as exc:
            problems.append(f"source.state: {exc}")
    for key in ("gain", "target_s0", "pump_phase", "gain_h", "gain_v"):
        if key in raw:
            kw[key] = _number(raw[key], f"source.{key}", problems)
    if "gain" in raw and "target_s0" in raw:
        problems.append("source: give exactly one of gain / target_s0, not both")
    elif "gain" not in raw and "target_s0" not in raw:
        problems.append("source: one of gain / target_s0 is required")
    for key in ("gain", "target_s0", "gain_h", "gain_v"):
        if kw.get(key) is not None and kw[key] < 0:
            problems.append(f"source.{key}: must be non-negative")
    if "polarization" in raw:
        pol = str(raw["polarization"]).upper()
        if pol not in POLARIZATIONS:
            problems.append(f"source.polarization: must be one of {POLARIZATIONS}")
        kw["polarization"] = pol
    return SourceSpec(**kw)


def _parse_optics(raw, problems) -> OpticsSpec:
    kw = {}
    if "dichroic" in raw:
        kw["dichroic"] = _flag(raw["dichroic"], "optics.dichroic", problems)
    if "plate" in raw:
        plate = raw["plate"] or {}
        if not isinstance(plate, dict):
            problems.append("optics.plate: expected a mapping")
        else:
            for key in sorted(set(plate) - _PLATE_KEYS):
                problems.append(f"optics.plate.{key}: unknown key")
            vals = {k: _number(plate[k], f"optics.plate.{k}", problems) for k in _PLATE_KEYS & set(plate)}
            kw["plate"] = PlateSpec(**{k: v for k, v in vals.items() if v is not None})
    if "extra_rotation" in raw:
        kw["extra_rotation"] = _number(raw["extra_rotation"], "optics.extra_rotation", problems)
    return OpticsSpec(**{k: v for k, v in kw.items() if v is not None or k == "dichroic"})


def _parse_loss(raw, problems) -> LossSpec:
    if "eta" not in raw:
        return LossSpec()
    eta = raw["eta"]
    values = eta if isinstance(eta, list) else [eta] * 4
    if len(values) != 4:
        problems.append(f"loss.eta: expected a scalar or 4 values, got {len(values)}")
        return LossSpec()
    parsed = [_number(v, f"loss.eta[{i}]", problems) for i, v in enumerate(values)]
    for i, v in enumerate(parsed):
        if v is not None and not 0.0 <= v <= 1.0:
            problems.append(f"loss.eta[{i}]: efficiency {v} outside [0, 1]")
    if any(v is None for v in parsed):
        return LossSpec()
    return LossSpec(tuple(parsed))


def _parse_detector(raw, problems) -> DetectorSpec:
    kw = {}
    for key in ("electronic_noise_sigma", "gain"):
        if key in raw:
            kw[key] = _number(raw[key], f"detector.{key}", problems)
    if kw.get("electronic_noise_sigma") is not None and kw["electronic_noise_sigma"] < 0:
        problems.append("detector.electronic_noise_sigma: must be >= 0")
    if kw.get("gain") is not None and kw["gain"] <= 0:
        problems.append("detector.gain: must be > 0")
    if "dark_run" in raw:
        kw["dark_run"] = _flag(raw["dark_run"], "detector.dark_run", problems)
    return DetectorSpec(**{k: v for k, v in kw.items() if v is not None})


def _parse_sweep(raw, problems) -> SweepSpec:
    kw = {}
    if "plate" in raw:
        plates = raw["plate"]
        if isinstance(plates, str):
            plates = list(PLATES) if plates.lower() == "both" else [plates]
        if not isinstance(plates, list) or not plates:
            problems.append("sweep.plate: expected HWP, QWP, both, or a list of them")
        else:
            upper = [str(p).upper() for p in plates]
            bad = [p for p in upper if p not in PLATES]
            if bad:
                problems.append(f"sweep.plate: unknown plate(s) {bad}")
            kw["plates"] = tuple(upper)
    for key in ("start", "stop", "step"):
        if key in raw:
            kw[key] = _number(raw[key], f"sweep.{key}", problems)
    spec = SweepSpec(**{k: v for k, v in kw.items() if v is not None})
    if spec.step <= 0:
        problems.append("sweep.step: must be > 0")
    elif spec.stop < spec.start:
        problems.append("sweep.stop: must be >= sweep.start")
    return spec


def _parse_mc(raw, problems) -> MCSpec:
    kw = {}
    if "enabled" in raw:
        kw["enabled"] = _flag(raw["enabled"], "mc.enabled", problems)
    for key in ("pulses", "seed", "workers"):
        if key in raw:
            kw[key] = _number(raw[key], f"mc.{key}", problems, integer=True)
    spec = MCSpec(**{k: v for k, v in kw.items() if v is not None})
    if spec.pulses < 100:
        problems.append("mc.pulses: must be >= 100")
    if spec.workers < 1:
        problems.append("mc.workers: must be >= 1")
    if spec.seed < 0:
        problems.append("mc.seed: must be >= 0")
    return spec


def _parse_outputs(raw, problems) -> OutputSpec:
    fmt = raw.get("format", "json")
    if fmt not in FORMATS:
        problems.append(f"outputs.format: must be one of {FORMATS}, got {fmt!r}")
    path = raw.get("path")
    return OutputSpec(None if path is None else str(path), fmt)


def parse_config(text: str) -> ScenarioConfig:
    """Parse and validate a YAML scenario; all problems are reported together."""
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        where = f"line {mark.line + 1}, column {mark.column + 1}: " if mark else ""
        raise ConfigError(f"parse error: {where}{getattr(exc, 'problem', exc)}") from None
    if doc is None:
        doc = {}
    if not isinstance(doc, dict):
        raise ConfigError("parse error: top level must be a mapping")

    problems: list[str] = [f"{key}: unknown section" for key in sorted(set(doc) - set(_SECTIONS))]
    cfg = ScenarioConfig(
        source=_parse_source(_section(doc, "source", problems), problems),
        optics=_parse_optics(_section(doc, "optics", problems), problems),
        loss=_parse_loss(_section(doc, "loss", problems), problems),
        detector=_parse_detector(_section(doc, "detector", problems), problems),
        sweep=_parse_sweep(_section(doc, "sweep", problems), problems),
        mc=_parse_mc(_section(doc, "mc", problems), problems),
        outputs=_parse_outputs(_section(doc, "outputs", problems), problems),
    )
    if problems:
        raise ConfigError(problems)
    return cfg


def load_config(path) -> ScenarioConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())

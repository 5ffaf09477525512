"""State preparation: the four macroscopic Bell states and the interferometric source chain."""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .gaussian import (
    A1,
    A2,
    B1,
    B2,
    GaussianState,
    apply_displacement,
    apply_loss,
    apply_passive_polarization_unitary,
    apply_two_mode_squeeze,
    vacuum_state,
)
from .stokes import rotation, waveplate


class BellKind(enum.Enum):
    PsiMinus = "PsiMinus"
    PsiPlus = "PsiPlus"
    PhiMinus = "PhiMinus"
    PhiPlus = "PhiPlus"

    @classmethod
    def parse(cls, value) -> "BellKind":
        if isinstance(value, cls):
            return value
        try:
            return cls(value)
        except ValueError:
            raise ValueError(f"unknown Bell state {value!r}; expected one of {[k.value for k in cls]}") from None

    @property
    def pairs(self) -> tuple[tuple[int, int], tuple[int, int]]:
        if self in (BellKind.PsiMinus, BellKind.PsiPlus):
            return (A1, B2), (B1, A2)
        return (A1, A2), (B1, B2)

    @property
    def relative_phase(self) -> float:
        return np.pi if self in (BellKind.PsiMinus, BellKind.PhiMinus) else 0.0


def make_bell_state(kind, gamma: float) -> GaussianState:
    kind = BellKind.parse(kind)
    if gamma < 0:
        raise ValueError("gamma must be non-negative")
    (i, j), (k, l) = kind.pairs
    state = apply_two_mode_squeeze(vacuum_state(), i, j, gamma, 0.0)
    return apply_two_mode_squeeze(state, k, l, gamma, kind.relative_phase)


def gain_for_s0(target_s0: float) -> float:
    """Gain giving ``<S0> = 4 sinh^2(gamma)`` equal to ``target_s0``."""
    if target_s0 < 0:
        raise ValueError("target_s0 must be non-negative")
    return float(np.arcsinh(np.sqrt(target_s0 / 4.0)))


@dataclass(frozen=True)
class DichroicPlate:
    """Waveplate with a different retardance in each frequency band (radians)."""

    axis_angle: float = 0.0
    retardance_w1: float = np.pi
    retardance_w2: float = 0.0

    def jones(self, band: int) -> np.ndarray:
        delta = self.retardance_w1 if band == 1 else self.retardance_w2
        return waveplate(self.axis_angle, delta)


CANONICAL_PLATE = DichroicPlate()


@dataclass(frozen=True)
class SourceConfig:
    gain: float
    pump_phase: float = 0.0
    eta: tuple[float, float, float, float] = (1.0, 1.0, 1.0, 1.0)
    # crystal gains for the H and V squeezers; None means both equal ``gain``
    gain_h: float | None = None
    gain_v: float | None = None

    def __post_init__(self):
        if not np.isfinite(self.gain) or self.gain < 0:
            raise ValueError("gain must be finite and non-negative")
        eta = np.broadcast_to(np.asarray(self.eta, dtype=float), (4,))
        if np.any(eta < 0) or np.any(eta > 1):
            raise ValueError("eta components must lie in [0, 1]")
        object.__setattr__(self, "eta", tuple(float(e) for e in eta))


def mzi_source(cfg: SourceConfig) -> GaussianState:
    """Two crystals in a polarizing Mach-Zehnder: H pairs (a1, a2), V pairs (b1, b2) with pump phase."""
    gh = cfg.gain if cfg.gain_h is None else cfg.gain_h
    gv = cfg.gain if cfg.gain_v is None else cfg.gain_v
    state = apply_two_mode_squeeze(vacuum_state(), A1, A2, gh, 0.0)
    state = apply_two_mode_squeeze(state, B1, B2, gv, cfg.pump_phase)
    return apply_loss(state, cfg.eta)


def apply_dichroic_plate(state: GaussianState, plate: DichroicPlate = CANONICAL_PLATE) -> GaussianState:
    state = apply_passive_polarization_unitary(state, plate.jones(1), 1)
    return apply_passive_polarization_unitary(state, plate.jones(2), 2)


def rotate_basis(state: GaussianState, theta: float) -> GaussianState:
    return apply_passive_polarization_unitary(state, rotation(theta), "both")


def preparation_chain(
    gamma: float,
    eta=1.0,
    *,
    pump_phase: float = np.pi,
    dichroic: DichroicPlate | None = CANONICAL_PLATE,
    gain_h: float | None = None,
    gain_v: float | None = None,
) -> GaussianState:
    """Interferometer at phase pi, 45 degree basis rotation, dichroic plate, then loss.

    With ``dichroic=None`` the output is the PsiPlus state instead of the singlet.
    """
    state = mzi_source(SourceConfig(gamma, pump_phase, (1.0,) * 4, gain_h, gain_v))
    state = rotate_basis(state, np.pi / 4)
    if dichroic is not None:
        state = apply_dichroic_plate(state, dichroic)
    return apply_loss(state, eta)


def polarized_coherent_state(total_photons: float, polarization: str = "D") -> GaussianState:
    """Coherent light with ``total_photons`` split equally over both bands in one polarization."""
    jones = {
        "H": np.array([1.0, 0.0]),
        "V": np.array([0.0, 1.0]),
        "D": np.array([1.0, 1.0]) / np.sqrt(2.0),
        "A": np.array([1.0, -1.0]) / np.sqrt(2.0),
        "R": np.array([1.0, 1j]) / np.sqrt(2.0),
        "L": np.array([1.0, -1j]) / np.sqrt(2.0),
    }[polarization.upper()]
    amp = np.sqrt(total_photons / 2.0)
    alpha = np.concatenate([amp * jones, amp * jones])
    return apply_displacement(vacuum_state(), alpha)

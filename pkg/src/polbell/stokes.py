"""Stokes observables summed over both frequency bands, waveplate rotations and NRF."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .gaussian import BAND_MODES, GaussianState, N_MODES, quadratic_mean, quadratic_variance

PAULI_BLOCKS = (
    np.eye(2, dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
)

NRF_UNDEFINED_BELOW = 1e-12


@dataclass(frozen=True, eq=False)
class StokesForm:
    """Quadratic observable ``sum_ij m_ij c_i^dag c_j`` over modes (a1, b1, a2, b2)."""

    m: np.ndarray
    label: str

    def __post_init__(self):
        m = np.array(self.m, dtype=complex)
        if m.shape != (N_MODES, N_MODES):
            raise ValueError("Stokes form must be a 4x4 matrix")
        if np.max(np.abs(m - m.conj().T)) > 1e-12 * max(1.0, np.max(np.abs(m))):
            raise ValueError("Stokes form must be Hermitian")
        m.setflags(write=False)
        object.__setattr__(self, "m", m)

    def allclose(self, other: "StokesForm", atol: float = 1e-12) -> bool:
        return bool(np.allclose(self.m, other.m, atol=atol, rtol=0.0))


def per_band(block: np.ndarray) -> np.ndarray:
    """Place the same 2x2 polarization block on both frequency bands."""
    m = np.zeros((N_MODES, N_MODES), dtype=complex)
    for h, v in BAND_MODES.values():
        m[np.ix_([h, v], [h, v])] = block
    return m


def stokes_form(k: int) -> StokesForm:
    if k not in (0, 1, 2, 3):
        raise ValueError(f"Stokes index must be 0..3, got {k!r}")
    return StokesForm(per_band(PAULI_BLOCKS[k]), f"S{k}")


def rotation(theta: float) -> np.ndarray:
    c, s = np.cos(theta), np.sin(theta)
    return np.array([[c, -s], [s, c]], dtype=complex)


def waveplate(theta: float, retardance: float) -> np.ndarray:
    """Jones matrix of a waveplate with its axis at ``theta``: ``R diag(1, e^{i delta}) R^T``."""
    r = rotation(theta)
    return r @ np.diag([1.0, np.exp(1j * retardance)]) @ r.T


def plate_jones(plate: str, theta: float) -> np.ndarray:
    plate = plate.upper()
    if plate == "HWP":
        return waveplate(theta, np.pi)
    if plate == "QWP":
        return waveplate(theta, np.pi / 2)
    raise ValueError(f"plate must be HWP or QWP, got {plate!r}")


def rotated_form(base: StokesForm, plate: str, theta: float) -> StokesForm:
    """Observable measured by ``base`` after a waveplate at angle ``theta`` (radians)."""
    u = per_band(plate_jones(plate, theta))
    m = u.conj().T @ base.m @ u
    m = 0.5 * (m + m.conj().T)
    return StokesForm(m, f"rotated({plate.upper()}, {np.degrees(theta):.6g}deg)")


def analyzer_form(plate: str, theta: float) -> StokesForm:
    return rotated_form(stokes_form(1), plate, theta)


@dataclass(frozen=True)
class StokesReport:
    means: tuple[float, float, float, float]
    variances: tuple[float, float, float, float]
    nrf: tuple[float, float, float] | None
    notes: list[str] = field(default_factory=list)

    @property
    def nrf_defined(self) -> bool:
        return self.nrf is not None

    def to_dict(self) -> dict:
        return {
            "means": list(self.means),
            "variances": list(self.variances),
            "nrf": None if self.nrf is None else list(self.nrf),
            "notes": list(self.notes),
        }


def nrf(state: GaussianState, form: StokesForm) -> float:
    """Normalized variance ``Var(O)/<S0>``; NaN when the beam is empty."""
    s0 = quadratic_mean(state, stokes_form(0))
    if s0 < NRF_UNDEFINED_BELOW:
        return float("nan")
    return quadratic_variance(state, form) / s0


def stokes_report(state: GaussianState) -> StokesReport:
    forms = [stokes_form(k) for k in range(4)]
    means = tuple(quadratic_mean(state, f) for f in forms)
    variances = tuple(quadratic_variance(state, f) for f in forms)
    if means[0] < NRF_UNDEFINED_BELOW:
        return StokesReport(means, variances, None, ["nrf undefined: <S0> is zero"])
    return StokesReport(means, variances, tuple(v / means[0] for v in variances[1:]))


@dataclass(frozen=True)
class UncertaintyCheck:
    """Margins ``dS_i dS_j - |<S_k>|`` for (i, j, k) = (1,2,3), (2,3,1), (3,1,2)."""

    margins: tuple[float, float, float]
    tol: float = 1e-9

    @property
    def satisfied(self) -> tuple[bool, bool, bool]:
        return tuple(m >= -self.tol for m in self.margins)


def uncertainty_check(state: GaussianState, tol: float = 1e-9) -> UncertaintyCheck:
    means = [quadratic_mean(state, stokes_form(k)) for k in range(4)]
    sd = [np.sqrt(max(quadratic_variance(state, stokes_form(k)), 0.0)) for k in range(4)]
    margins = tuple(
        float(sd[i] * sd[j] - abs(means[k])) for i, j, k in ((1, 2, 3), (2, 3, 1), (3, 1, 2))
    )
    return UncertaintyCheck(margins, tol)


def nrf_bounds(n: float, eta: float) -> tuple[float, float]:
    """Squeezed and anti-squeezed NRF for per-mode photon number ``n`` and efficiency ``eta``."""
    if n < 0:
        raise ValueError("n must be non-negative")
    if not 0.0 <= eta <= 1.0:
        raise ValueError("eta must lie in [0, 1]")
    s0 = 4.0 * n
    return 1.0 - eta, 1.0 + eta + eta * s0 / 2.0

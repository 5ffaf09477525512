"""Brute-force truncated Fock-space oracle for the macroscopic Bell states.

Independent of :mod:`polbell.gaussian`: amplitudes are built from the
two-mode squeezed vacuum series, passive polarization optics act exactly
inside each per-band photon-number sector, and Stokes operators are applied
as sparse ladder-operator products.

Each pair is cut at ``cutoff`` photons, so a band holds at most
``2 * cutoff`` photons.  Every mode axis therefore has length
``2 * cutoff + 1``; this is what keeps polarization mixing free of
truncation error.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import comb, factorial

import numpy as np

from .optics import BellKind

MAX_ORACLE_GAMMA = 1.5
MAX_TAIL = 1e-6

# tensor axes per band: (H axis, V axis)
BAND_AXES = {1: (0, 1), 2: (2, 3)}

_STOKES_BLOCKS = {
    # (coefficient of a^dag b, coefficient of b^dag a) for the off-diagonal Stokes operators
    2: (1.0, 1.0),
    3: (-1j, 1j),
}


class TruncationError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class FockState:
    """Amplitude tensor indexed by ``(n_a1, n_b1, n_a2, n_b2)``."""

    amp: np.ndarray
    cutoff: int
    tail: float = 0.0
    renormalized: bool = False

    @property
    def dim(self) -> int:
        return self.amp.shape[0]

    @property
    def norm(self) -> float:
        return float(np.sqrt(np.vdot(self.amp, self.amp).real))

    def normalized(self) -> "FockState":
        return FockState(self.amp / self.norm, self.cutoff, self.tail, True)

    def overlap(self, other: "FockState") -> complex:
        return complex(np.vdot(self.amp, other.amp))

    def photon_mean(self, mode: int) -> float:
        p = np.abs(self.amp) ** 2
        n = np.arange(self.dim)
        marg = p.sum(axis=tuple(a for a in range(4) if a != mode))
        return float(marg @ n / p.sum())

    def probabilities(self) -> np.ndarray:
        p = np.abs(self.amp) ** 2
        return p / p.sum()


def truncation_tail(gamma: float, cutoff: int) -> float:
    """Probability mass of the two-pair product state lying beyond ``cutoff`` in either pair."""
    if gamma < 0:
        raise ValueError("gamma must be non-negative")
    lam = np.tanh(gamma) ** 2
    x = lam ** (cutoff + 1)
    return float(2.0 * x - x * x)


def _sector_counts(total: np.ndarray, cutoff: int) -> tuple[np.ndarray, np.ndarray]:
    inside = np.where(total <= 2 * cutoff, np.minimum(total, 2 * cutoff - total) + 1, 0)
    inside = np.minimum(inside, cutoff + 1)
    return inside.astype(float), (total + 1 - inside).astype(float)


def moment_truncation_bound(gamma: float, cutoff: int, order: int) -> float:
    """Bound on the error of a renormalized truncated ``<O>`` with ``|O| <= S0^order``.

    Every Stokes operator conserves the photon number of each band, and for
    all four Bell states both bands carry ``T = n1 + n2`` photons, where n1
    and n2 are the pair occupations.  Within a sector ``|S_k| <= S0 = 2T``, so
    the in/out cross terms are bounded sector by sector.
    """
    lam = np.tanh(gamma) ** 2
    if lam == 0.0:
        return 0.0
    t_max = 2 * cutoff + 2 + int(np.ceil((order + 2) * 40 / max(-np.log(lam), 1e-3)))
    t = np.arange(t_max + 1)
    c_in, c_out = _sector_counts(t, cutoff)
    weight = (1.0 - lam) ** 2 * np.exp(t * np.log(lam)) * (2.0 * t) ** order
    cross = np.sum(weight * (2.0 * np.sqrt(c_in * c_out) + c_out))
    tail = truncation_tail(gamma, cutoff)
    renorm = np.sum(weight * c_in) * tail / (1.0 - tail)
    return float(cross + renorm)


def annihilation_bound(gamma: float, cutoff: int) -> float:
    """Bound on ``||S_k psi||`` for the truncated singlet (the exact singlet gives zero).

    ``S_k psi_in = -S_k psi_out`` and ``|S_k| <= 2T`` sector by sector.
    """
    lam = np.tanh(gamma) ** 2
    if lam == 0.0:
        return 0.0
    t_max = 2 * cutoff + 2 + int(np.ceil(160 / max(-np.log(lam), 1e-3)))
    t = np.arange(t_max + 1)
    _, c_out = _sector_counts(t, cutoff)
    weight = (1.0 - lam) ** 2 * np.exp(t * np.log(lam)) * (2.0 * t) ** 2
    return float(np.sqrt(np.sum(weight * c_out)))


def variance_truncation_bound(gamma: float, cutoff: int, mean_abs: float) -> float:
    b1 = moment_truncation_bound(gamma, cutoff, 1)
    b2 = moment_truncation_bound(gamma, cutoff, 2)
    return b2 + 2.0 * mean_abs * b1 + b1 * b1


def _pair_amplitudes(gamma: float, phase: float, cutoff: int) -> np.ndarray:
    n = np.arange(cutoff + 1)
    return (np.exp(1j * phase) * np.tanh(gamma)) ** n / np.cosh(gamma)


def build_fock_state(kind, gamma: float, cutoff: int) -> FockState:
    """Truncated product of two two-mode squeezed vacua on the kind's mode pairing."""
    kind = BellKind.parse(kind)
    if cutoff < 1:
        raise ValueError("cutoff must be at least 1")
    if gamma < 0:
        raise ValueError("gamma must be non-negative")
    if gamma > MAX_ORACLE_GAMMA:
        raise TruncationError(f"gamma={gamma} outside the oracle regime (<= {MAX_ORACLE_GAMMA})")
    tail = truncation_tail(gamma, cutoff)
    if tail > MAX_TAIL:
        raise TruncationError(f"truncation tail {tail:.3g} exceeds {MAX_TAIL:g}; raise the cutoff")

    dim = 2 * cutoff + 1
    amp = np.zeros((dim,) * 4, dtype=complex)
    first = _pair_amplitudes(gamma, 0.0, cutoff)
    second = _pair_amplitudes(gamma, kind.relative_phase, cutoff)
    (i, j), (k, l) = kind.pairs
    n = np.arange(cutoff + 1)
    n1, n2 = np.meshgrid(n, n, indexing="ij")
    index = [None] * 4
    index[i] = index[j] = n1
    index[k] = index[l] = n2
    amp[tuple(index)] = np.outer(first, second)
    return FockState(amp, cutoff, tail)


def vacuum_fock(cutoff: int) -> FockState:
    dim = 2 * cutoff + 1
    amp = np.zeros((dim,) * 4, dtype=complex)
    amp[0, 0, 0, 0] = 1.0
    return FockState(amp, cutoff)


def _sector_matrix(u: np.ndarray, total: int) -> np.ndarray:
    """Passive two-mode unitary restricted to ``n_a + n_b = total``; column index is input ``n_a``.

    The Heisenberg action ``c -> u c`` means ``a^dag -> u00 a^dag + u10 b^dag``
    and ``b^dag -> u01 a^dag + u11 b^dag`` on states.
    """
    out = np.zeros((total + 1, total + 1), dtype=complex)
    for na in range(total + 1):
        nb = total - na
        # polynomial coefficients in powers of a^dag
        pa = np.array([comb(na, p) * u[0, 0] ** p * u[1, 0] ** (na - p) for p in range(na + 1)])
        pb = np.array([comb(nb, p) * u[0, 1] ** p * u[1, 1] ** (nb - p) for p in range(nb + 1)])
        coeff = np.convolve(pa, pb)
        for q in range(total + 1):
            out[q, na] = coeff[q] * np.sqrt(factorial(q) * factorial(total - q) / (factorial(na) * factorial(nb)))
    return out


def _bands(frequency) -> tuple[int, ...]:
    if frequency in ("both", 0, None):
        return (1, 2)
    if frequency in (1, 2):
        return (int(frequency),)
    raise ValueError(f"frequency must be 1, 2 or 'both', got {frequency!r}")


def _band_view(amp: np.ndarray, band: int) -> np.ndarray:
    h, v = BAND_AXES[band]
    return np.moveaxis(amp, (h, v), (0, 1))


def _apply_band_unitary(amp: np.ndarray, u: np.ndarray, band: int) -> np.ndarray:
    dim = amp.shape[0]
    src = _band_view(amp, band)
    na, nb = np.meshgrid(np.arange(dim), np.arange(dim), indexing="ij")
    if np.any(np.abs(src[na + nb >= dim]) > 0):
        raise TruncationError("state has amplitude in an incomplete photon-number sector")
    out = np.zeros_like(src)
    for total in range(dim):
        ks = np.arange(total + 1)
        out[ks, total - ks] = np.tensordot(_sector_matrix(u, total), src[ks, total - ks], axes=1)
    h, v = BAND_AXES[band]
    return np.moveaxis(out, (0, 1), (h, v))


def apply_polarization_unitary_fock(state: FockState, u: np.ndarray, frequency="both") -> FockState:
    u = np.asarray(u, dtype=complex)
    if u.shape != (2, 2) or np.linalg.norm(u.conj().T @ u - np.eye(2)) >= 1e-10:
        raise ValueError("polarization transform must be a 2x2 unitary")
    amp = state.amp
    for band in _bands(frequency):
        amp = _apply_band_unitary(amp, u, band)
    return FockState(amp, state.cutoff, state.tail, state.renormalized)


def band_number_distribution(state: FockState, band: int) -> np.ndarray:
    """Probability of each total photon number in one band (unnormalized weights)."""
    dim = state.dim
    p = _band_view(np.abs(state.amp) ** 2, band).sum(axis=(2, 3))
    na, nb = np.meshgrid(np.arange(dim), np.arange(dim), indexing="ij")
    return np.bincount((na + nb).ravel(), weights=p.ravel(), minlength=2 * dim - 1)


def _apply_band_stokes(amp: np.ndarray, k: int, band: int) -> np.ndarray:
    dim = amp.shape[0]
    src = _band_view(amp, band)
    n = np.arange(dim, dtype=float)
    if k in (0, 1):
        sign = 1.0 if k == 0 else -1.0
        diag = n[:, None] + sign * n[None, :]
        out = diag[:, :, None, None] * src
    else:
        c_ab, c_ba = _STOKES_BLOCKS[k]
        out = np.zeros_like(src)
        hop = (np.sqrt(n[1:])[:, None] * np.sqrt(n[1:])[None, :])[:, :, None, None]
        # a^dag b: (na, nb) -> (na + 1, nb - 1)
        out[1:, :-1] += c_ab * hop * src[:-1, 1:]
        # b^dag a: (na, nb) -> (na - 1, nb + 1)
        out[:-1, 1:] += c_ba * hop * src[1:, :-1]
    h, v = BAND_AXES[band]
    return np.moveaxis(out, (0, 1), (h, v))


def apply_stokes(amp: np.ndarray, k: int) -> np.ndarray:
    """``S_k |psi>`` with ``S_k`` summed over both frequency bands."""
    if k not in (0, 1, 2, 3):
        raise ValueError(f"Stokes index must be 0..3, got {k!r}")
    return _apply_band_stokes(amp, k, 1) + _apply_band_stokes(amp, k, 2)


def stokes_moment_fock(state: FockState, k: int, order: int) -> float:
    """``<S_k^order>`` on the renormalized truncated state.

    Stokes operators conserve the per-band photon number, so repeated
    application never leaves the stored tensor.
    """
    if order < 1:
        raise ValueError("order must be >= 1")
    half = order // 2
    left = state.amp
    for _ in range(half):
        left = apply_stokes(left, k)
    right = left
    for _ in range(order - 2 * half):
        right = apply_stokes(right, k)
    norm2 = np.vdot(state.amp, state.amp).real
    return float(np.vdot(left, right).real / norm2)


def stokes_variance_fock(state: FockState, k: int) -> float:
    m1 = stokes_moment_fock(state, k, 1)
    return stokes_moment_fock(state, k, 2) - m1 * m1


def annihilation_test(state: FockState, k: int) -> float:
    """Residual norm ``||S_k psi||``; vanishes when the state is an eigenvector with eigenvalue 0."""
    if k not in (1, 2, 3):
        raise ValueError("annihilation test is defined for S1, S2, S3")
    return float(np.linalg.norm(apply_stokes(state.amp, k)))


def sample_photon_tuple(state: FockState, eta, rng_seed, size: int | None = None) -> np.ndarray:
    """Photon counts ``(n_a1, n_b1, n_a2, n_b2)`` with binomial-thinning loss ``eta`` per mode.

    Draws from the renormalized ``|amp|^2``.  Returns shape ``(4,)`` for a
    single draw, ``(size, 4)`` otherwise.
    """
    eta = np.broadcast_to(np.asarray(eta, dtype=float), (4,))
    if np.any(eta < 0) or np.any(eta > 1):
        raise ValueError("eta components must lie in [0, 1]")
    rng = np.random.default_rng(rng_seed)
    p = state.probabilities().ravel()
    count = 1 if size is None else size
    flat = rng.choice(p.size, size=count, p=p)
    n = np.stack(np.unravel_index(flat, state.amp.shape), axis=-1)
    detected = rng.binomial(n, eta)
    return detected[0] if size is None else detected

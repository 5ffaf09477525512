"""Four-mode Gaussian state engine.

Modes are ordered globally as ``(a1, b1, a2, b2)``: horizontal and vertical
polarization at frequency 1, then at frequency 2.  Quadratures are
``x = (c + c^dag)/sqrt(2)`` and ``p = (c - c^dag)/(i sqrt(2))`` so the vacuum
has variance 1/2, and the real phase-space vector is interleaved as
``(x0, p0, x1, p1, x2, p2, x3, p3)``.

All operations are pure: they return new :class:`GaussianState` objects.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

N_MODES = 4
DIM = 2 * N_MODES

A1, B1, A2, B2 = range(N_MODES)

# Intermediate arithmetic runs in extended precision: at <S0> ~ 1e6 squeezed
# variances are differences of O(n^2) terms and float64 alone loses ~1e-9.
EXT = np.longdouble
MODE_LABELS = ("a1", "b1", "a2", "b2")

# frequency band -> (H mode, V mode)
BAND_MODES = {1: (A1, B1), 2: (A2, B2)}


class InvalidModePair(ValueError):
    pass


class InvalidTransform(ValueError):
    pass


class InvalidEfficiency(ValueError):
    pass


def symplectic_form() -> np.ndarray:
    return np.kron(np.eye(N_MODES), np.array([[0.0, 1.0], [-1.0, 0.0]]))


OMEGA = symplectic_form()


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class GaussianState:
    """Mean vector and covariance matrix of a four-mode Gaussian state.

    ``cov[k, l] = <{dr_k, dr_l}>/2`` with ``dr = r - <r>``.
    """

    mean: np.ndarray
    cov: np.ndarray

    def __post_init__(self):
        mean = np.asarray(self.mean, dtype=float)
        cov = np.asarray(self.cov, dtype=float)
        if mean.shape != (DIM,) or cov.shape != (DIM, DIM):
            raise ValueError(f"expected mean of shape ({DIM},) and cov of shape ({DIM}, {DIM})")
        object.__setattr__(self, "mean", _frozen(mean))
        object.__setattr__(self, "cov", _frozen(cov))

    def is_symmetric(self, rtol: float = 1e-12) -> bool:
        scale = max(1.0, float(np.max(np.abs(self.cov))))
        return bool(np.max(np.abs(self.cov - self.cov.T)) <= rtol * scale)

    def min_uncertainty_eigenvalue(self) -> float:
        """Smallest eigenvalue of ``cov + (i/2) Omega``; non-negative for physical states."""
        herm = self.cov + 0.5j * OMEGA
        return float(np.linalg.eigvalsh(herm).min())

    def is_physical(self, tol: float = 1e-9) -> bool:
        # eigenvalue round-off grows with the largest covariance entry
        scale = max(1.0, float(np.max(np.abs(self.cov))))
        return self.is_symmetric() and self.min_uncertainty_eigenvalue() >= -tol * scale

    def purity(self) -> float:
        """``1/sqrt(det(2 cov))``; equal to 1 for pure states."""
        return float(1.0 / np.sqrt(np.linalg.det(2.0 * self.cov)))

    def photon_mean(self, mode: int) -> float:
        """Mean photon number ``<c^dag c>`` of one mode."""
        x, p = 2 * mode, 2 * mode + 1
        return 0.5 * (self.cov[x, x] + self.cov[p, p] + self.mean[x] ** 2 + self.mean[p] ** 2 - 1.0)

    def allclose(self, other: "GaussianState", atol: float = 1e-10, rtol: float = 0.0) -> bool:
        return bool(
            np.allclose(self.mean, other.mean, atol=atol, rtol=rtol)
            and np.allclose(self.cov, other.cov, atol=atol, rtol=rtol)
        )


@dataclass(frozen=True, eq=False)
class ComplexCorrelations:
    """Ladder-operator moments: ``N_ij = <c_i^dag c_j>``, ``A_ij = <c_i c_j>``, ``d_i = <c_i>``.

    ``N`` and ``A`` are full (uncentred) moments.
    """

    N: np.ndarray
    A: np.ndarray
    d: np.ndarray

    @property
    def N_centered(self) -> np.ndarray:
        return self.N - np.outer(self.d.conj(), self.d)

    @property
    def A_centered(self) -> np.ndarray:
        return self.A - np.outer(self.d, self.d)


def vacuum_state() -> GaussianState:
    return GaussianState(np.zeros(DIM), 0.5 * np.eye(DIM))


def bogoliubov_symplectic(u: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Real phase-space matrix of the Heisenberg map ``c -> u c + v c^dag``."""
    s_plus = u + v
    s_minus = u - v
    S = np.zeros((DIM, DIM), dtype=s_plus.real.dtype)
    S[0::2, 0::2] = s_plus.real
    S[0::2, 1::2] = -s_minus.imag
    S[1::2, 0::2] = s_plus.imag
    S[1::2, 1::2] = s_minus.real
    return S


def apply_symplectic(state: GaussianState, S: np.ndarray) -> GaussianState:
    S = np.asarray(S, dtype=EXT)
    cov = S @ state.cov.astype(EXT) @ S.T
    return GaussianState(S @ state.mean.astype(EXT), 0.5 * (cov + cov.T))


def _check_mode(i: int) -> int:
    if int(i) != i or not 0 <= i < N_MODES:
        raise InvalidModePair(f"mode index {i!r} outside 0..{N_MODES - 1}")
    return int(i)


def two_mode_squeeze_symplectic(i: int, j: int, gamma: float, phase: float = 0.0) -> np.ndarray:
    i, j = _check_mode(i), _check_mode(j)
    if i == j:
        raise InvalidModePair(f"two-mode squeeze needs distinct modes, got ({i}, {j})")
    if not np.isfinite(gamma):
        raise ValueError("gamma must be finite")
    g = EXT(gamma)
    u = np.eye(N_MODES, dtype=np.clongdouble)
    v = np.zeros((N_MODES, N_MODES), dtype=np.clongdouble)
    u[i, i] = u[j, j] = np.cosh(g)
    v[i, j] = v[j, i] = (np.cos(EXT(phase)) + 1j * np.sin(EXT(phase))) * np.sinh(g)
    return bogoliubov_symplectic(u, v)


def apply_two_mode_squeeze(
    state: GaussianState, i: int, j: int, gamma: float, phase: float = 0.0
) -> GaussianState:
    """Two-mode squeezer ``c_i -> c_i cosh(g) + e^{i phase} c_j^dag sinh(g)`` (and i <-> j)."""
    return apply_symplectic(state, two_mode_squeeze_symplectic(i, j, gamma, phase))


def _bands(frequency) -> tuple[int, ...]:
    if frequency in ("both", 0, None):
        return (1, 2)
    if frequency in (1, 2, "1", "2"):
        return (int(frequency),)
    raise ValueError(f"frequency must be 1, 2 or 'both', got {frequency!r}")


def passive_symplectic(u: np.ndarray, frequency=1) -> np.ndarray:
    u = np.asarray(u, dtype=complex)
    if u.shape != (2, 2) or np.linalg.norm(u.conj().T @ u - np.eye(2)) >= 1e-10:
        raise InvalidTransform("polarization transform must be a 2x2 unitary")
    big = np.eye(N_MODES, dtype=complex)
    for band in _bands(frequency):
        h, v = BAND_MODES[band]
        big[np.ix_([h, v], [h, v])] = u
    return bogoliubov_symplectic(big, np.zeros_like(big))


def apply_passive_polarization_unitary(state: GaussianState, u: np.ndarray, frequency="both") -> GaussianState:
    """Apply the Jones unitary ``u`` to ``(a_j, b_j)`` of the selected band(s)."""
    return apply_symplectic(state, passive_symplectic(u, frequency))


def apply_loss(state: GaussianState, eta) -> GaussianState:
    """Independent beamsplitter loss channel with transmission ``eta[m]`` on mode m."""
    eta = np.broadcast_to(np.asarray(eta, dtype=float), (N_MODES,))
    if np.any(~np.isfinite(eta)) or np.any(eta < 0.0) or np.any(eta > 1.0):
        raise InvalidEfficiency(f"efficiencies must lie in [0, 1], got {eta.tolist()}")
    eta2 = np.repeat(eta.astype(EXT), 2)
    t = np.sqrt(eta2)
    cov = t[:, None] * state.cov.astype(EXT) * t[None, :] + np.diag(0.5 * (1 - eta2))
    return GaussianState(t * state.mean, cov)


def apply_displacement(state: GaussianState, alpha) -> GaussianState:
    alpha = np.broadcast_to(np.asarray(alpha, dtype=complex), (N_MODES,))
    shift = np.empty(DIM)
    shift[0::2] = np.sqrt(2.0) * alpha.real
    shift[1::2] = np.sqrt(2.0) * alpha.imag
    return GaussianState(state.mean + shift, state.cov)


def coherent_state(alpha) -> GaussianState:
    return apply_displacement(vacuum_state(), alpha)


def correlations(state: GaussianState) -> ComplexCorrelations:
    c = _correlations(state, np.float64)
    return ComplexCorrelations(*(np.asarray(a, dtype=complex) for a in (c.N, c.A, c.d)))


def _correlations(state: GaussianState, dtype=EXT) -> ComplexCorrelations:
    s = state.cov.astype(dtype)
    sxx, spp = s[0::2, 0::2], s[1::2, 1::2]
    sxp, spx = s[0::2, 1::2], s[1::2, 0::2]
    n_c = 0.5 * (sxx + spp + 1j * (sxp - spx)) - 0.5 * np.eye(N_MODES)
    a_c = 0.5 * (sxx - spp + 1j * (sxp + spx))
    mean = state.mean.astype(dtype)
    d = (mean[0::2] + 1j * mean[1::2]) / np.sqrt(dtype(2))
    return ComplexCorrelations(n_c + np.outer(d.conj(), d), a_c + np.outer(d, d), d)


def from_correlations(corr: ComplexCorrelations) -> GaussianState:
    n_c, a_c, d = corr.N_centered, corr.A_centered, corr.d
    cov = np.empty((DIM, DIM))
    cov[0::2, 0::2] = (n_c + a_c).real + 0.5 * np.eye(N_MODES)
    cov[1::2, 1::2] = (n_c - a_c).real + 0.5 * np.eye(N_MODES)
    cov[0::2, 1::2] = (n_c + a_c).imag
    cov[1::2, 0::2] = (a_c - n_c).imag
    mean = np.empty(DIM)
    mean[0::2] = np.sqrt(2.0) * d.real
    mean[1::2] = np.sqrt(2.0) * d.imag
    return GaussianState(mean, cov)


def _matrix(form) -> np.ndarray:
    return np.asarray(getattr(form, "m", form), dtype=complex)


def quadratic_mean(state: GaussianState, form) -> float:
    """Exact ``<sum_ij M_ij c_i^dag c_j>``; ``form`` is a StokesForm or a 4x4 Hermitian matrix."""
    m = _matrix(form).astype(np.clongdouble)
    corr = _correlations(state)
    return float(np.einsum("ij,ij->", m, corr.N).real)


def quadratic_variance(state: GaussianState, form) -> float:
    """Exact variance of ``c^dag M c`` by Wick factorization.

    Splitting ``c = d + delta``, the observable is a constant plus a linear
    part plus ``delta^dag M delta``.  Third central moments of a Gaussian state
    vanish, so the two parts contribute independently.
    """
    m = _matrix(form).astype(np.clongdouble)
    corr = _correlations(state)
    n_c, a_c, d = corr.N_centered, corr.A_centered, corr.d
    eye = np.eye(N_MODES, dtype=EXT)

    quad = np.einsum("ij,kl,ik,jl->", m, m, a_c.conj(), a_c)
    quad += np.einsum("ij,kl,il,kj->", m, m, n_c, n_c + eye)

    w = d.conj() @ m
    lin = 2.0 * np.real(w @ a_c @ w)
    lin += np.einsum("i,j,ji->", w, w.conj(), n_c + eye)
    lin += np.einsum("i,j,ij->", w.conj(), w, n_c)

    # round-off can leave tiny negatives on exactly squeezed observables
    return max(float(np.real(quad + lin)), 0.0)

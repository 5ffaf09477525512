"""Monte Carlo of the two-detector Stokes measurement in the macroscopic regime.

Pulses are drawn by symmetric-ordered (Wigner) quadrature sampling from the
Gaussian state after the analyzer waveplate.  Each mode's photon number is
estimated as ``(x^2 + p^2 - 1)/2``; the estimate is unbiased in the mean and
inflates ``Var(q1 - q2)`` by exactly one photon^2 (1/4 per mode), see
:func:`wigner_bias_bound`.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterable, NamedTuple

import numpy as np

from .gaussian import A1, A2, B1, B2, GaussianState, apply_passive_polarization_unitary, quadratic_mean
from .optics import polarized_coherent_state
from .stokes import plate_jones, stokes_form

log = logging.getLogger(__name__)

# Var_W(n) - Var(n) = 1/4 for every mode; four modes enter q1 - q2
WIGNER_VARIANCE_BIAS = 1.0
ORACLE_REGIME_S0 = 100.0


class TooFewRecords(ValueError):
    pass


class ZeroIntensity(ValueError):
    pass


class Setting(NamedTuple):
    """Analyzer waveplate and its angle in radians."""

    plate: str
    angle: float


S1_SETTING = Setting("HWP", 0.0)
S2_SETTING = Setting("HWP", np.pi / 8)
S3_SETTING = Setting("QWP", np.pi / 4)
STOKES_SETTINGS = {1: S1_SETTING, 2: S2_SETTING, 3: S3_SETTING}


@dataclass(frozen=True)
class DetectorModel:
    electronic_noise_sigma: float = 180.0
    gain: float = 1.0

    def __post_init__(self):
        if self.electronic_noise_sigma < 0:
            raise ValueError("electronic_noise_sigma must be non-negative")
        if self.gain <= 0:
            raise ValueError("gain must be positive")

    @property
    def noise_variance(self) -> float:
        """Electronic contribution to ``Var(q1 - q2)`` in photon^2."""
        return 2.0 * self.electronic_noise_sigma**2


NOISELESS = DetectorModel(0.0, 1.0)


@dataclass(frozen=True)
class PulseRecord:
    q1: float
    q2: float
    setting: Setting


@dataclass(frozen=True, eq=False)
class PulseBatch:
    """Column storage for many pulses at one analyzer setting."""

    q1: np.ndarray
    q2: np.ndarray
    setting: Setting

    def __len__(self) -> int:
        return len(self.q1)

    def records(self) -> Iterable[PulseRecord]:
        for a, b in zip(self.q1, self.q2):
            yield PulseRecord(float(a), float(b), self.setting)

    @classmethod
    def from_records(cls, records) -> "PulseBatch":
        records = list(records)
        if not records:
            raise TooFewRecords("no records")
        settings = {r.setting for r in records}
        if len(settings) != 1:
            raise ValueError("records mix several analyzer settings")
        q1 = np.array([r.q1 for r in records], dtype=float)
        q2 = np.array([r.q2 for r in records], dtype=float)
        return cls(q1, q2, records[0].setting)


@dataclass(frozen=True)
class NrfEstimate:
    value: float
    std_error: float
    n_pulses: int
    snl_reference: float
    mean_q1: float = float("nan")
    mean_q2: float = float("nan")

    def to_dict(self) -> dict:
        return {
            "value": self.value,
            "std_error": self.std_error,
            "n_pulses": self.n_pulses,
            "snl_reference": self.snl_reference,
            "mean_q1": self.mean_q1,
            "mean_q2": self.mean_q2,
        }


def analyzer_state(state: GaussianState, setting: Setting) -> GaussianState:
    return apply_passive_polarization_unitary(state, plate_jones(setting.plate, setting.angle), "both")


def _sqrt_cov(cov: np.ndarray) -> np.ndarray:
    # eigh rather than Cholesky: squeezed covariances are ill-conditioned at high gain
    w, v = np.linalg.eigh(cov)
    return v * np.sqrt(np.clip(w, 0.0, None))


def _sample_chunk(mean, root, det: DetectorModel, n: int, seed) -> tuple[np.ndarray, np.ndarray]:
    rng = np.random.default_rng(seed)
    r = mean + rng.standard_normal((n, mean.size)) @ root.T
    photons = 0.5 * (r[:, 0::2] ** 2 + r[:, 1::2] ** 2 - 1.0)
    n1 = photons[:, A1] + photons[:, A2]
    n2 = photons[:, B1] + photons[:, B2]
    if det.electronic_noise_sigma > 0:
        n1 = n1 + det.electronic_noise_sigma * rng.standard_normal(n)
        n2 = n2 + det.electronic_noise_sigma * rng.standard_normal(n)
    return det.gain * n1, det.gain * n2


def sample_pulses(
    state: GaussianState,
    setting: Setting,
    det: DetectorModel,
    n_pulses: int,
    rng_seed: int,
    workers: int = 1,
) -> PulseBatch:
    """Draw ``n_pulses`` detector records.

    The pulses are split into ``workers`` contiguous streams seeded by
    ``SeedSequence(rng_seed).spawn(workers)``, so output is reproducible for
    a fixed (seed, workers) pair.
    """
    if n_pulses < 1:
        raise ValueError("n_pulses must be positive")
    workers = max(1, int(workers))
    rotated = analyzer_state(state, setting)
    root = _sqrt_cov(rotated.cov)
    seeds = np.random.SeedSequence(rng_seed).spawn(workers)
    sizes = [len(c) for c in np.array_split(np.arange(n_pulses), workers)]
    jobs = [(rotated.mean, root, det, n, s) for n, s in zip(sizes, seeds) if n > 0]
    if workers == 1:
        chunks = [_sample_chunk(*job) for job in jobs]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            chunks = list(pool.map(lambda job: _sample_chunk(*job), jobs))
    q1 = np.concatenate([c[0] for c in chunks])
    q2 = np.concatenate([c[1] for c in chunks])
    return PulseBatch(q1, q2, Setting(setting.plate.upper(), float(setting.angle)))


def sample_pulse(state: GaussianState, setting: Setting, det: DetectorModel, rng_seed) -> PulseRecord:
    return next(sample_pulses(state, setting, det, 1, rng_seed).records())


def _block_sums(q1, q2, n_blocks):
    d = q1 - q2
    s = q1 + q2
    blocks = np.array_split(np.arange(len(d)), n_blocks)
    return np.array([[len(b), d[b].sum(), (d[b] ** 2).sum(), s[b].sum()] for b in blocks])


def _nrf_from_sums(sums: np.ndarray, noise_var: float, snl: float) -> np.ndarray:
    n, sd, sd2, ss = sums[..., 0], sums[..., 1], sums[..., 2], sums[..., 3]
    var = (sd2 - sd * sd / n) / (n - 1)
    return (var - noise_var) / (ss / n) / snl


def estimate_nrf(
    records,
    snl: float = 1.0,
    det: DetectorModel | None = None,
    *,
    dark: PulseBatch | None = None,
    n_blocks: int = 100,
    n_resamples: int = 1000,
    rng_seed: int = 0,
) -> NrfEstimate:
    """``Var(q1 - q2) / <q1 + q2>`` in photon units, relative to the shot-noise level ``snl``.

    Electronic noise is removed from the numerator: analytically from
    ``det.electronic_noise_sigma``, or from the difference variance of a
    ``dark`` run when one is given.  The error bar is a blocked bootstrap over
    contiguous blocks of pulses.
    """
    batch = records if isinstance(records, PulseBatch) else PulseBatch.from_records(records)
    if len(batch) < 100:
        raise TooFewRecords(f"need at least 100 records, got {len(batch)}")
    det = det or NOISELESS
    q1 = batch.q1 / det.gain
    q2 = batch.q2 / det.gain
    if dark is not None:
        noise_var = float(np.var((dark.q1 - dark.q2) / det.gain, ddof=1))
    else:
        noise_var = det.noise_variance
    mean_sum = q1.mean() + q2.mean()
    if abs(mean_sum) < 1e-12:
        raise ZeroIntensity("mean detector sum is zero; NRF undefined")

    sums = _block_sums(q1, q2, min(n_blocks, len(q1)))
    value = float(_nrf_from_sums(sums.sum(axis=0), noise_var, snl))
    rng = np.random.default_rng(rng_seed)
    picks = rng.integers(0, len(sums), size=(n_resamples, len(sums)))
    boot = _nrf_from_sums(sums[picks].sum(axis=1), noise_var, snl)
    return NrfEstimate(value, float(np.std(boot, ddof=1)), len(q1), snl, float(q1.mean()), float(q2.mean()))


def shot_noise_calibration(
    mean_photons: float,
    n_pulses: int,
    det: DetectorModel,
    rng_seed: int,
    workers: int = 1,
) -> NrfEstimate:
    """Normalized difference variance of diagonally polarized coherent pulses on a 50/50 analyzer.

    The electronic-noise variance is subtracted, so an ideal result is 1.
    """
    if mean_photons <= 0:
        raise ValueError("mean_photons must be positive")
    state = polarized_coherent_state(mean_photons, "D")
    batch = sample_pulses(state, S1_SETTING, det, n_pulses, rng_seed, workers)
    return estimate_nrf(batch, 1.0, det, rng_seed=rng_seed)


def electronic_fraction(mean_photons: float, det: DetectorModel) -> float:
    """Electronic-noise variance relative to the shot-noise variance ``<S0>``."""
    return det.noise_variance / mean_photons


def shot_noise_dominance_level(det: DetectorModel, factor: float = 10.0) -> float:
    """Photon number at which shot noise exceeds the electronic noise ``factor`` times."""
    return factor * det.noise_variance


def wigner_bias_bound(state: GaussianState) -> float:
    """Bias of the sampled NRF caused by symmetric ordering.

    Equals ``1 / <S0>``; for an empty beam the NRF is undefined and the
    absolute variance bias (1 photon^2) is returned instead.
    """
    s0 = quadratic_mean(state, stokes_form(0))
    if s0 <= 1e-12:
        return WIGNER_VARIANCE_BIAS
    if s0 < ORACLE_REGIME_S0:
        log.warning("<S0> = %.3g is in the oracle regime; prefer Fock-space sampling", s0)
    return WIGNER_VARIANCE_BIAS / s0

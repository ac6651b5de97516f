"""Finite-shot measurement emulation and two-qubit state tomography.

The four-level internal state is measured projectively in the sixteen
two-qubit Pauli settings (I is read in the computational basis).  Outcome
counts are multinomial draws from the exact projector probabilities using
numpy's PCG64 generator; the stream for setting k of a run seeded with s is
``default_rng([s, k])``, so results are reproducible and independent of
evaluation order.

Reconstruction is linear inversion over the Pauli basis followed by a
projection to the physical set: eigenvalues are clipped at zero and the
trace renormalized.  The enlarged-space density matrix maps to the original
space as rho = M rho_4 M^dag.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product

import numpy as np

from .core import ID2, RECOVERY_MATRIX, SIGMA_X, SIGMA_Y, SIGMA_Z
from .observables import ObservableSeries

__all__ = [
    "PAULI_SETTINGS", "ShotRecord", "sample", "exact_records",
    "reconstruct", "map_to_original", "measured_operator", "error_bars",
    "check_density_matrix",
]

_PAULI = {"I": ID2, "X": SIGMA_X, "Y": SIGMA_Y, "Z": SIGMA_Z}

# Measurement eigenbases (columns) and outcome eigenvalues; I is measured in
# the computational basis with both outcomes counting +1.
_BASES = {
    "I": (np.eye(2, dtype=complex), np.array([1.0, 1.0])),
    "X": (np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2.0),
          np.array([1.0, -1.0])),
    "Y": (np.array([[1, 1], [1j, -1j]], dtype=complex) / np.sqrt(2.0),
          np.array([1.0, -1.0])),
    "Z": (np.eye(2, dtype=complex), np.array([1.0, -1.0])),
}

PAULI_SETTINGS: tuple[str, ...] = tuple(
    a + b for a, b in product("IXYZ", repeat=2))


@dataclass(frozen=True, eq=False)
class ShotRecord:
    """Outcome counts of one Pauli setting.

    Counts are integers for sampled data; ``exact_records`` stores the
    un-rounded expected counts (seed None) for infinite-shot checks.
    """

    setting: str
    counts: np.ndarray
    shots: int
    seed: int | None

    def __post_init__(self):
        counts = np.asarray(self.counts)
        if counts.shape != (4,) or np.any(counts < 0):
            raise ValueError("counts must be 4 non-negative outcomes")
        if abs(float(counts.sum()) - self.shots) > 1e-6 * max(1, self.shots):
            raise ValueError("counts must sum to shots")
        object.__setattr__(self, "counts", counts)


def _setting_probabilities(chi: np.ndarray, setting: str) -> np.ndarray:
    u = np.kron(_BASES[setting[0]][0], _BASES[setting[1]][0])
    return np.abs(u.conj().T @ chi) ** 2


def sample(chi, settings=PAULI_SETTINGS, shots: int = 1000,
           seed: int = 0) -> list[ShotRecord]:
    """Multinomial shot counts for each measurement setting.

    ``chi`` must be normalized.  Identical (seed, settings, shots) give
    bit-identical counts; each setting owns the substream
    ``default_rng([seed, setting_index])``.
    """
    chi = np.asarray(chi, dtype=complex)
    if abs(np.linalg.norm(chi) - 1.0) > 1e-9:
        raise ValueError("chi must be normalized")
    if shots < 1:
        raise ValueError("shots must be >= 1")
    records = []
    for setting in settings:
        probs = _setting_probabilities(chi, setting)
        probs = np.maximum(probs, 0.0)
        probs = probs / probs.sum()
        rng = np.random.default_rng([seed, PAULI_SETTINGS.index(setting)])
        counts = rng.multinomial(shots, probs)
        records.append(ShotRecord(setting=setting, counts=counts,
                                  shots=shots, seed=seed))
    return records


def exact_records(chi, shots: int = 10 ** 9) -> list[ShotRecord]:
    """Infinite-shot limit: counts proportional to the exact probabilities.

    Fractional counts are kept (the reconstruction only uses frequencies),
    so the limit is exact rather than rounded.
    """
    chi = np.asarray(chi, dtype=complex)
    return [ShotRecord(setting=setting,
                       counts=_setting_probabilities(chi, setting) * shots,
                       shots=shots, seed=None)
            for setting in PAULI_SETTINGS]


def _pauli_expectations(records) -> dict[str, float]:
    values = {}
    for rec in records:
        lam = np.outer(_BASES[rec.setting[0]][1], _BASES[rec.setting[1]][1])
        freqs = np.asarray(rec.counts, dtype=float) / rec.shots
        values[rec.setting] = float(np.sum(lam.ravel() * freqs))
    return values


def reconstruct(records) -> np.ndarray:
    """Density matrix from a complete 16-setting record set.

    Linear inversion over the Pauli basis, then eigenvalue clipping and
    trace renormalization to land on a physical state.
    """
    settings = {rec.setting for rec in records}
    missing = set(PAULI_SETTINGS) - settings
    if missing:
        raise ValueError(f"incomplete settings, missing {sorted(missing)}")
    expectations = _pauli_expectations(records)
    rho = np.zeros((4, 4), dtype=complex)
    for setting, value in expectations.items():
        op = np.kron(_PAULI[setting[0]], _PAULI[setting[1]])
        rho += value * op
    rho /= 4.0
    rho = (rho + rho.conj().T) / 2.0
    vals, vecs = np.linalg.eigh(rho)
    vals = np.clip(vals, 0.0, None)
    rho = (vecs * vals) @ vecs.conj().T
    rho = rho / np.trace(rho).real
    check_density_matrix(rho, tol=1e-10)
    return rho


def check_density_matrix(rho: np.ndarray, tol: float = 1e-12) -> None:
    """Assert hermiticity, unit trace and positivity of a reconstruction."""
    if np.max(np.abs(rho - rho.conj().T)) > tol:
        raise ValueError("density matrix is not Hermitian")
    if abs(np.trace(rho).real - 1.0) > tol:
        raise ValueError("density matrix trace differs from one")
    if np.linalg.eigvalsh(rho).min() < -tol:
        raise ValueError("density matrix has negative eigenvalues")


def map_to_original(rho4: np.ndarray) -> np.ndarray:
    """Original-space density matrix rho = M rho_4 M^dag."""
    rho4 = np.asarray(rho4, dtype=complex)
    if rho4.shape != (4, 4):
        raise ValueError("expected a 4x4 density matrix")
    return RECOVERY_MATRIX @ rho4 @ RECOVERY_MATRIX.conj().T


def measured_operator(chi, operator: np.ndarray, shots: int,
                      seed: int) -> float:
    """One finite-shot estimate of Tr[rho operator] via full tomography.

    Runs the complete chain including the positivity projection, which
    slightly shrinks fluctuations relative to the raw binomial estimate.
    """
    rho = reconstruct(sample(chi, shots=shots, seed=seed))
    return float(np.real(np.trace(rho @ operator)))


def measured_pauli(chi, setting: str, shots: int, seed: int) -> float:
    """Direct finite-shot estimate of one Pauli expectation.

    Uses only that setting's counts (linear inversion restricted to one
    Pauli), so the spread is the plain binomial/multinomial projection
    noise of a repeat-each-measurement experiment.
    """
    if setting not in PAULI_SETTINGS:
        raise ValueError(f"unknown setting {setting!r}")
    records = sample(chi, settings=(setting,), shots=shots, seed=seed)
    return _pauli_expectations(records)[setting]


def error_bars(times, runs, label: str = "") -> ObservableSeries:
    """Attach statistical error bars from repeated seeded runs.

    ``runs`` has shape (n_runs, n_times); the value is the mean over runs
    and the error the standard deviation across runs (the spread of a
    single finite-shot measurement of the mean value).
    """
    runs = np.asarray(runs, dtype=float)
    if runs.ndim != 2 or runs.shape[0] < 2:
        raise ValueError("need at least two seeded runs")
    return ObservableSeries(times=np.asarray(times, dtype=float),
                            values=runs.mean(axis=0),
                            stderr=runs.std(axis=0, ddof=1),
                            label=label)

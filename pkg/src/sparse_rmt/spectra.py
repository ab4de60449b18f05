"""Eigenvalue-level statistics.

Indices follow the 1-based convention ``lambda_1 <= ... <= lambda_N``
throughout the public API.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .ensemble import exponents
from .errors import InputError, InsufficientDataError, NumericalError, PreconditionError
from .semicircle import quantile

__all__ = [
    "SpectralData",
    "IndexSet",
    "FluctuationSeries",
    "ShiftResidual",
    "eigen_decompose",
    "counting_function",
    "index_set",
    "relaxed_index_set",
    "fluctuation_series",
    "eigenvalue_shift_residual",
    "write_spectra_csv",
]

SYMMETRY_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class SpectralData:
    """Sorted spectrum of one matrix, optionally with eigenvectors (columns)."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray | None = None
    source: dict = field(default_factory=dict)

    @property
    def N(self) -> int:
        return self.eigenvalues.size


def eigen_decompose(matrix, want_vectors: bool = False, source: dict | None = None) -> SpectralData:
    """Full symmetric eigendecomposition, eigenvalues ascending.

    Uses LAPACK: Householder tridiagonalisation followed by implicit QL/QR
    (``dsyev``) for eigenvalues only, divide and conquer (``dsyevd``) when
    eigenvectors are requested.
    """
    H = np.asarray(matrix, dtype=float)
    if H.ndim != 2 or H.shape[0] != H.shape[1]:
        raise InputError(f"expected a square matrix, got shape {H.shape}")
    scale = max(1.0, float(np.max(np.abs(H)))) if H.size else 1.0
    if H.size and np.max(np.abs(H - H.T)) > SYMMETRY_TOL * scale:
        raise InputError("matrix is not symmetric")
    try:
        if want_vectors:
            w, V = scipy.linalg.eigh(H, driver="evd", check_finite=True)
        else:
            w = scipy.linalg.eigh(H, eigvals_only=True, driver="ev", check_finite=True)
            V = None
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise NumericalError(f"eigendecomposition failed: {exc}") from exc
    return SpectralData(eigenvalues=w, eigenvectors=V, source=dict(source or {}))


def counting_function(spectrum, E):
    """Number of eigenvalues ``<= E`` (inclusive). Vectorised over ``E``."""
    lam = spectrum.eigenvalues if isinstance(spectrum, SpectralData) else np.asarray(spectrum)
    out = np.searchsorted(lam, E, side="right")
    return int(out) if np.ndim(out) == 0 else out


@dataclass(frozen=True)
class IndexSet:
    """Integer index set with its construction record.

    ``relaxed`` marks user-chosen bands that do not follow the theorem's
    central gap; such sets are for exploration only.
    """

    indices: tuple
    N: int
    tau: float
    gap: float
    relaxed: bool = False

    @property
    def empty(self) -> bool:
        return len(self.indices) == 0

    def __iter__(self):
        return iter(self.indices)

    def __len__(self):
        return len(self.indices)


def _int_range(lo, hi):
    a, b = math.ceil(lo - 1e-12), math.floor(hi + 1e-12)
    return list(range(max(a, 1), b + 1))


def index_set(N: int, tau: float, beta: float) -> IndexSet:
    """``([tau N, N/2 - N^(1-zeta/17)] u [N/2 + N^(1-zeta/17), (1-tau) N])`` in the naturals.

    At desk-scale ``N`` the central gap is close to ``N`` itself and the set is
    usually empty; check ``.empty`` and fall back to :func:`relaxed_index_set`.
    """
    if not 0.0 < tau < 0.5:
        raise PreconditionError(f"tau must lie in (0, 1/2), got {tau}")
    zeta, _, _ = exponents(beta, 0.0)
    gap = float(N) ** (1.0 - zeta / 17.0)
    low = _int_range(tau * N, N / 2.0 - gap)
    high = _int_range(N / 2.0 + gap, (1.0 - tau) * N)
    idx = tuple(i for i in sorted(set(low + high)) if i <= N)
    return IndexSet(indices=idx, N=N, tau=tau, gap=gap)


def relaxed_index_set(N: int, fractions, tau: float = 0.0) -> IndexSet:
    """Indices ``floor(f N)`` for user-chosen fractions (non-theorem bands)."""
    idx = []
    for f in fractions:
        i = int(math.floor(f * N))
        if not 1 <= i <= N:
            raise PreconditionError(f"fraction {f} gives index {i} outside [1, {N}]")
        if quantile(i, N) == 0.0:
            raise PreconditionError(f"index {i} sits at the spectral centre (gamma_i = 0)")
        idx.append(i)
    return IndexSet(indices=tuple(idx), N=N, tau=tau, gap=0.0, relaxed=True)


def _eigen_matrix(spectra):
    if isinstance(spectra, np.ndarray):
        lam = np.atleast_2d(spectra)
    else:
        lam = np.array([s.eigenvalues if isinstance(s, SpectralData) else s for s in spectra], dtype=float)
    if lam.shape[0] < 2:
        raise InsufficientDataError("at least two replicas are required")
    return lam


def _columns(indices, N):
    idx = np.asarray(list(indices), dtype=int)
    if idx.size and (idx.min() < 1 or idx.max() > N):
        raise PreconditionError("index outside [1, N]")
    return idx


@dataclass(frozen=True, eq=False)
class FluctuationSeries:
    """Normalised eigenvalue fluctuations; ``x_values[r, k]`` is replica r, index k."""

    index_set: tuple
    x_values: np.ndarray
    mean_lambda: np.ndarray
    gamma: np.ndarray
    scale: float


def fluctuation_series(spectra, indices, m4: float) -> FluctuationSeries:
    """``X_i = (lambda_i - mean lambda_i) / (gamma_i sqrt(m4 / 2))``.

    The expectation is replaced by the across-replica sample mean.
    """
    lam = _eigen_matrix(spectra)
    N = lam.shape[1]
    idx = _columns(indices, N)
    gamma = np.array([quantile(int(i), N) for i in idx])
    if np.any(gamma == 0.0):
        raise PreconditionError("indices must avoid gamma_i = 0")
    sel = lam[:, idx - 1]
    mean = sel.mean(axis=0)
    scale = math.sqrt(0.5 * m4)
    x = (sel - mean) / (gamma * scale)
    return FluctuationSeries(index_set=tuple(int(i) for i in idx), x_values=x,
                             mean_lambda=mean, gamma=gamma, scale=scale)


@dataclass(frozen=True, eq=False)
class ShiftResidual:
    """``r = (lambda_i - mean) - (gamma_i / 2)(H2 - 1)`` per replica and index."""

    index_set: tuple
    residuals: np.ndarray
    centered: np.ndarray
    std_residual: np.ndarray
    std_centered: np.ndarray

    @property
    def ratio(self) -> np.ndarray:
        with np.errstate(divide="ignore", invalid="ignore"):
            return self.std_residual / self.std_centered


def eigenvalue_shift_residual(spectra, indices, h2_values) -> ShiftResidual:
    lam = _eigen_matrix(spectra)
    N = lam.shape[1]
    idx = _columns(indices, N)
    h2 = np.asarray(h2_values, dtype=float)
    if h2.shape != (lam.shape[0],):
        raise PreconditionError("need one H2 value per replica")
    gamma = np.array([quantile(int(i), N) for i in idx])
    sel = lam[:, idx - 1]
    centered = sel - sel.mean(axis=0)
    resid = centered - np.outer(h2, gamma / 2.0)
    return ShiftResidual(index_set=tuple(int(i) for i in idx), residuals=resid,
                         centered=centered, std_residual=resid.std(axis=0, ddof=1),
                         std_centered=centered.std(axis=0, ddof=1))


def write_spectra_csv(spectra, path) -> None:
    """Long table ``replica, i, lambda_i`` (1-based indices)."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["replica", "i", "lambda_i"])
        for r, s in enumerate(spectra):
            lam = s.eigenvalues if isinstance(s, SpectralData) else np.asarray(s)
            for i, v in enumerate(lam, start=1):
                w.writerow([r, i, repr(float(v))])

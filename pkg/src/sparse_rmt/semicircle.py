"""Closed-form semicircle-law utilities.

All functions accept scalars or numpy arrays. ``stieltjes`` selects the root
of ``1 + z m + m^2 = 0`` by an explicit sign test on ``Im m * Im z`` instead
of relying on a library branch cut.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError

__all__ = [
    "density",
    "cdf",
    "quantile",
    "quantiles",
    "SemicircleQuantiles",
    "semicircle_quantiles",
    "stieltjes",
    "stieltjes_prime",
    "SpectralPoint",
    "classify",
    "write_quantile_csv",
]


def density(x):
    """Semicircle density ``sqrt((4 - x^2)_+) / (2 pi)``."""
    x = np.asarray(x, dtype=float)
    out = np.sqrt(np.clip(4.0 - x * x, 0.0, None)) / (2.0 * np.pi)
    return out[()] if out.ndim == 0 else out


def cdf(x):
    """Distribution function of the semicircle law."""
    x = np.asarray(x, dtype=float)
    xc = np.clip(x, -2.0, 2.0)
    val = 0.5 + xc * np.sqrt(4.0 - xc * xc) / (4.0 * np.pi) + np.arcsin(xc / 2.0) / np.pi
    out = np.where(x <= -2.0, 0.0, np.where(x >= 2.0, 1.0, val))
    return out[()] if out.ndim == 0 else out


def _cdf_scalar(x):
    if x <= -2.0:
        return 0.0
    if x >= 2.0:
        return 1.0
    return 0.5 + x * math.sqrt(4.0 - x * x) / (4.0 * math.pi) + math.asin(x / 2.0) / math.pi


def _bisect_cdf(target):
    # Runs until the bracket cannot shrink in floating point.
    lo, hi = -2.0, 2.0
    while True:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        val = _cdf_scalar(mid)
        if val == target:
            return mid
        if val < target:
            lo = mid
        else:
            hi = mid
    return lo if abs(_cdf_scalar(lo) - target) <= abs(_cdf_scalar(hi) - target) else hi


def quantile(i: int, N: int) -> float:
    """Classical location ``gamma_i``: ``N F(gamma_i) = i - 1/2``.

    Indices are 1-based. Values for ``i > (N+1)/2`` are obtained by reflection,
    so ``gamma_i == -gamma_{N+1-i}`` holds exactly.
    """
    if isinstance(i, bool) or int(i) != i or int(N) != N or N < 1:
        raise DomainError(f"invalid index/size ({i}, {N})")
    i, N = int(i), int(N)
    if not 1 <= i <= N:
        raise DomainError(f"index {i} outside [1, {N}]")
    mirror = N + 1 - i
    if 2 * i == N + 1:
        return 0.0
    if i > mirror:
        return -quantile(mirror, N)
    return _bisect_cdf((i - 0.5) / N)


def quantiles(N: int) -> np.ndarray:
    """All ``gamma_1 < ... < gamma_N``."""
    return np.array([quantile(i, N) for i in range(1, N + 1)])


@dataclass(frozen=True)
class SemicircleQuantiles:
    N: int
    gamma: np.ndarray


def semicircle_quantiles(N: int) -> SemicircleQuantiles:
    return SemicircleQuantiles(N=N, gamma=quantiles(N))


def write_quantile_csv(N: int, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["i", "gamma_i"])
        for i, g in enumerate(quantiles(N), start=1):
            w.writerow([i, repr(float(g))])


def stieltjes(z):
    """Stieltjes transform ``m(z)`` of the semicircle law.

    Solves ``1 + z m + m^2 = 0`` and keeps the root with
    ``Im m * Im z > 0``. Raises ``DomainError`` for real ``z``.
    """
    z = np.asarray(z, dtype=complex)
    if np.any(z.imag == 0):
        raise DomainError("stieltjes transform requires Im z != 0")
    s = np.sqrt(z * z - 4.0)
    # larger-modulus root without cancellation; the other is its reciprocal
    big = np.where(np.abs(-z + s) >= np.abs(-z - s), (-z + s) / 2.0, (-z - s) / 2.0)
    small = 1.0 / big
    m = np.where(small.imag * z.imag > 0, small, big)
    return m[()] if m.ndim == 0 else m


def stieltjes_prime(z):
    """Derivative ``m'(z) = m / (-z - 2m)``."""
    z = np.asarray(z, dtype=complex)
    m = np.asarray(stieltjes(z))
    out = m / (-z - 2.0 * m)
    return out[()] if out.ndim == 0 else out


@dataclass(frozen=True)
class SpectralPoint:
    """A spectral parameter ``z = E + i eta`` with its derived quantities.

    ``in_S``, ``in_S_tilde`` and ``in_D`` use closed boundaries.
    """

    E: float
    eta: float
    N: int
    tau: float
    alpha: float
    kappa: float
    in_S: bool
    in_S_tilde: bool
    in_D: bool

    @property
    def z(self) -> complex:
        return complex(self.E, self.eta)


def classify(z, N: int, tau: float) -> SpectralPoint:
    z = complex(z)
    E, eta = z.real, z.imag
    if eta <= 0:
        raise DomainError("classify requires Im z > 0")
    alpha = -math.log(eta) / math.log(N) if N > 1 else float("nan")
    kappa = min(abs(2.0 - E), abs(2.0 + E))
    lower = float(N) ** (-1.0 + tau)
    in_S = abs(E) <= 4.0 and 0.0 < eta <= 4.0
    in_S_tilde = abs(E) <= 4.0 and lower <= eta <= 4.0
    in_D = in_S_tilde and abs(4.0 - E * E) + eta >= tau
    return SpectralPoint(E=E, eta=eta, N=int(N), tau=float(tau), alpha=alpha,
                         kappa=kappa, in_S=in_S, in_S_tilde=in_S_tilde, in_D=in_D)

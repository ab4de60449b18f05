"""Streaming moments and descriptive distribution checks."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InsufficientDataError, PreconditionError

__all__ = [
    "Accumulator",
    "accumulate",
    "normal_cdf",
    "ks_normal",
    "NormalityReport",
    "normality_report",
    "CorrelationResult",
    "correlation_matrix",
    "ComplexGaussianReport",
    "complex_gaussian_report",
]

_SQRT2 = math.sqrt(2.0)


class Accumulator:
    """One-pass mean/variance (Welford) with a deterministic ``merge``."""

    __slots__ = ("n", "mean", "_m2")

    def __init__(self):
        self.n = 0
        self.mean = 0.0
        self._m2 = 0.0

    def add(self, x: float) -> None:
        x = float(x)
        self.n += 1
        d = x - self.mean
        self.mean += d / self.n
        self._m2 += d * (x - self.mean)

    def extend(self, xs) -> "Accumulator":
        for x in np.asarray(xs, dtype=float).ravel():
            self.add(x)
        return self

    def merge(self, other: "Accumulator") -> "Accumulator":
        """Combine two accumulators (Chan et al. pairwise update)."""
        out = Accumulator()
        n = self.n + other.n
        if n == 0:
            return out
        d = other.mean - self.mean
        out.n = n
        out.mean = self.mean + d * other.n / n
        out._m2 = self._m2 + other._m2 + d * d * self.n * other.n / n
        return out

    @property
    def variance(self) -> float:
        """Sample variance (``n - 1`` denominator); NaN below two samples."""
        return self._m2 / (self.n - 1) if self.n >= 2 else float("nan")

    @property
    def population_variance(self) -> float:
        return self._m2 / self.n if self.n >= 1 else float("nan")


def accumulate(series):
    """Return ``(mean, sample variance)`` of a stream in one pass."""
    acc = Accumulator()
    for x in series:
        acc.add(x)
    return acc.mean, acc.variance


def normal_cdf(x):
    """Standard normal CDF via ``erfc`` (full double precision in both tails)."""
    x = np.asarray(x, dtype=float)
    from scipy.special import erfc

    out = 0.5 * erfc(-x / _SQRT2)
    return out[()] if out.ndim == 0 else out


def ks_normal(samples, standardize: bool = False) -> float:
    """Kolmogorov-Smirnov distance between the empirical CDF and ``N(0, 1)``.

    With ``standardize=True`` the sample is first centred and scaled by its
    own standard deviation.
    """
    x = np.sort(np.asarray(samples, dtype=float).ravel())
    n = x.size
    if n == 0:
        raise InsufficientDataError("ks_normal needs at least one sample")
    if standardize:
        if n < 2:
            raise InsufficientDataError("standardisation needs at least two samples")
        sd = x.std(ddof=1)
        if sd == 0:
            raise PreconditionError("cannot standardise a constant sample")
        x = (x - x.mean()) / sd
    phi = normal_cdf(x)
    k = np.arange(1, n + 1)
    d_plus = np.max(k / n - phi)
    d_minus = np.max(phi - (k - 1) / n)
    return float(min(1.0, max(d_plus, d_minus, 0.0)))


@dataclass(frozen=True)
class NormalityReport:
    n: int
    mean: float
    variance: float
    skewness: float
    excess_kurtosis: float
    ks_distance: float
    standardized: bool

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def normality_report(samples, standardize: bool = False) -> NormalityReport:
    x = np.asarray(samples, dtype=float).ravel()
    if x.size < 2:
        raise InsufficientDataError("normality_report needs at least two samples")
    mean = float(x.mean())
    c = x - mean
    m2 = float(np.mean(c * c))
    var = float(c @ c / (x.size - 1))
    if m2 > 0:
        skew = float(np.mean(c**3) / m2**1.5)
        kurt = float(np.mean(c**4) / m2**2 - 3.0)
    else:
        skew = kurt = float("nan")
    # a constant sample has no standardised form; its KS distance is left undefined
    ks = float("nan") if standardize and m2 == 0 else ks_normal(x, standardize=standardize)
    return NormalityReport(n=int(x.size), mean=mean, variance=var, skewness=skew,
                           excess_kurtosis=kurt, ks_distance=ks,
                           standardized=bool(standardize))


@dataclass(frozen=True, eq=False)
class CorrelationResult:
    """Pearson correlations; ``undefined[a, b]`` marks entries with a zero-variance series."""

    values: np.ndarray
    undefined: np.ndarray

    @property
    def any_undefined(self) -> bool:
        return bool(self.undefined.any())


def correlation_matrix(multiseries) -> CorrelationResult:
    """Correlation of ``k`` aligned series given as rows of a ``k x n`` array.

    Undefined entries hold NaN and are flagged in ``undefined``.
    """
    X = np.atleast_2d(np.asarray(multiseries, dtype=float))
    if X.shape[1] < 2:
        raise InsufficientDataError("each series needs at least two observations")
    C = X - X.mean(axis=1, keepdims=True)
    sd = np.sqrt(np.einsum("ij,ij->i", C, C))
    bad = sd == 0
    undefined = bad[:, None] | bad[None, :]
    safe = np.where(bad, 1.0, sd)
    R = (C @ C.T) / np.outer(safe, safe)
    R = np.clip(0.5 * (R + R.T), -1.0, 1.0)
    np.fill_diagonal(R, 1.0)
    R = np.where(undefined, np.nan, R)
    return CorrelationResult(values=R, undefined=undefined)


@dataclass(frozen=True)
class ComplexGaussianReport:
    n: int
    e_abs2: float
    e_z2: complex
    ks_re: float
    ks_im: float

    def to_dict(self) -> dict:
        return {"n": self.n, "e_abs2": self.e_abs2, "e_z2_re": self.e_z2.real,
                "e_z2_im": self.e_z2.imag, "ks_re": self.ks_re, "ks_im": self.ks_im}


def complex_gaussian_report(samples) -> ComplexGaussianReport:
    """Moments ``E|Z|^2``, ``E Z^2`` and per-part KS against ``N(0, 1/2)``."""
    z = np.asarray(samples, dtype=complex).ravel()
    if z.size < 2:
        raise InsufficientDataError("complex_gaussian_report needs at least two samples")
    s = _SQRT2
    return ComplexGaussianReport(
        n=int(z.size),
        e_abs2=float(np.mean(np.abs(z) ** 2)),
        e_z2=complex(np.mean(z * z)),
        ks_re=ks_normal(z.real * s),
        ks_im=ks_normal(z.imag * s),
    )

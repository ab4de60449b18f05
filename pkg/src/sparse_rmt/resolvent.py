"""Green-function numerics built on a single eigendecomposition.

``G(z) = (H - z)^{-1} = V diag(1/(lambda - z)) V^T``; one decomposition
serves any number of spectral parameters.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, InsufficientDataError, NumericalError, PreconditionError
from .semicircle import stieltjes, stieltjes_prime
from .spectra import SpectralData

__all__ = [
    "GreenFunction",
    "ShiftedLinearStat",
    "LocalLawReport",
    "green_function",
    "trace_green",
    "shifted_stat",
    "ward_residual",
    "local_law_report",
    "hs_reconstruct",
    "smooth_cutoff",
    "write_resolvent_scan_csv",
]


@dataclass(frozen=True, eq=False)
class GreenFunction:
    z: complex
    entries: np.ndarray
    trace_normalized: complex

    @property
    def eta(self) -> float:
        return self.z.imag

    @property
    def N(self) -> int:
        return self.entries.shape[0]


def _check_z(z):
    z = complex(z)
    if z.imag == 0:
        raise DomainError("resolvent requires Im z != 0")
    return z


def green_function(spectrum: SpectralData, z) -> GreenFunction:
    """Full resolvent matrix at ``z`` from eigenpairs."""
    z = _check_z(z)
    V = spectrum.eigenvectors
    if V is None:
        raise PreconditionError("green_function needs eigenvectors (want_vectors=True)")
    w = 1.0 / (spectrum.eigenvalues - z)
    G = (V * w) @ V.T
    # enforce exact symmetry lost to rounding in the product
    G = 0.5 * (G + G.T)
    return GreenFunction(z=z, entries=G, trace_normalized=complex(w.mean()))


def trace_green(spectrum, z):
    """Normalised trace ``(1/N) sum_k 1/(lambda_k - z)``; vectorised over ``z``."""
    lam = spectrum.eigenvalues if isinstance(spectrum, SpectralData) else np.asarray(spectrum, dtype=float)
    zz = np.asarray(z, dtype=complex)
    if np.any(zz.imag == 0):
        raise DomainError("resolvent requires Im z != 0")
    out = (1.0 / (lam[:, None] - zz.reshape(1, -1))).mean(axis=0)
    return complex(out[0]) if zz.ndim == 0 else out.reshape(zz.shape)


@dataclass(frozen=True, eq=False)
class ShiftedLinearStat:
    """``[G] = Gbar - mean(Gbar) - (H2 - 1) m(z) m'(z)`` per replica."""

    z: complex
    g_bar: np.ndarray
    mean_g_bar: complex
    h2: np.ndarray
    value: np.ndarray


def shifted_stat(traces, h2, z, allow_single: bool = False) -> ShiftedLinearStat:
    """Linear statistic with the random ``H2 - 1`` shift removed.

    ``traces`` are normalised traces ``(1/N) tr G(z)`` per replica. The
    expectation is replaced by the across-replica mean; with
    ``allow_single=True`` a single replica is accepted and acts as its own mean.
    """
    z = _check_z(z)
    g = np.asarray(traces, dtype=complex).ravel()
    h = np.asarray(h2, dtype=float).ravel()
    if g.shape != h.shape:
        raise PreconditionError("traces and h2 must have equal length")
    if g.size < 2 and not allow_single:
        raise InsufficientDataError("shifted_stat needs at least two replicas")
    if g.size == 0:
        raise InsufficientDataError("no replicas")
    mean = complex(g.mean())
    mm = complex(stieltjes(z) * stieltjes_prime(z))
    value = g - mean - h * mm
    return ShiftedLinearStat(z=z, g_bar=g, mean_g_bar=mean, h2=h, value=value)


def ward_residual(green: GreenFunction) -> float:
    """``max_i | sum_j |G_ij|^2 - Im G_ii / eta |``."""
    G = green.entries
    lhs = np.einsum("ij,ij->i", G, G.conj()).real
    rhs = G.diagonal().imag / green.eta
    return float(np.max(np.abs(lhs - rhs)))


@dataclass(frozen=True)
class LocalLawReport:
    """Observed deviations from ``m(z)`` and the local-law control parameters.

    The bounds hold up to ``N^eps`` factors, so the ratios are diagnostics,
    not pass/fail criteria.
    """

    z: complex
    N: int
    q: float
    entry_deviation: float
    average_deviation: float
    entry_bound: float
    average_bound: float

    @property
    def ratio_entrywise(self) -> float:
        return self.entry_deviation / self.entry_bound

    @property
    def ratio_average(self) -> float:
        return self.average_deviation / self.average_bound


def local_law_report(green: GreenFunction, q: float, N: int | None = None) -> LocalLawReport:
    N = green.N if N is None else int(N)
    z = green.z
    eta = z.imag
    m = complex(stieltjes(z))
    G = green.entries
    dev = G - m * np.eye(G.shape[0])
    entry_dev = float(np.max(np.abs(dev)))
    avg_dev = abs(green.trace_normalized - m)
    kappa = min(abs(2.0 - z.real), abs(2.0 + z.real))
    n_eta = N * eta
    entry_bound = 1.0 / q + math.sqrt(max(m.imag, 0.0) / n_eta) + 1.0 / n_eta
    average_bound = min(1.0 / q, 1.0 / (q * q * (eta + kappa))) + 1.0 / n_eta
    return LocalLawReport(z=z, N=N, q=float(q), entry_deviation=entry_dev,
                          average_deviation=float(avg_dev), entry_bound=entry_bound,
                          average_bound=average_bound)


# -- Helffer-Sjostrand ---------------------------------------------------------

def _bump(t):
    with np.errstate(divide="ignore", over="ignore"):
        return np.where(t > 0, np.exp(-1.0 / np.where(t > 0, t, 1.0)), 0.0)


def smooth_cutoff(y, derivative: bool = False):
    """C-infinity cutoff: 1 for ``|y| <= 1``, 0 for ``|y| >= 2``."""
    y = np.asarray(y, dtype=float)
    t = np.clip(np.abs(y) - 1.0, 0.0, 1.0)
    a, b = _bump(1.0 - t), _bump(t)
    chi = a / (a + b)
    if not derivative:
        return chi
    inner = (t > 0) & (t < 1)
    ts = np.where(inner, t, 0.5)
    d = -a * b * (1.0 / (1.0 - ts) ** 2 + 1.0 / ts**2) / (a + b) ** 2
    return np.where(inner, d * np.sign(y), 0.0)


def _gl_nodes(edges, order):
    x, w = np.polynomial.legendre.leggauss(order)
    edges = np.asarray(edges, dtype=float)
    lo, hi = edges[:-1, None], edges[1:, None]
    half = 0.5 * (hi - lo)
    nodes = (lo + half * (1.0 + x)).ravel()
    weights = (half * w).ravel()
    return nodes, weights


def _graded(center, a, b, h0, ratio=2.0):
    """Panel edges on [a, b] refined geometrically towards ``center``."""
    edges = {a, b}
    if a < center < b:
        edges.add(center)
    for side in (-1.0, 1.0):
        h = h0
        while True:
            p = center + side * h
            if not a < p < b:
                break
            edges.add(p)
            h *= ratio
    return np.array(sorted(edges))


def hs_reconstruct(f, df, d2f, lam: float, support, eta_cut: float = 1e-6,
                   order: int = 24, tol: float = 1e-6, return_info: bool = False):
    """Recover ``f(lam)`` from the almost-analytic extension of ``f``.

    Evaluates ``(1/pi) int d_zbar(f~ chi)(z) / (lam - z) d^2z`` with
    ``f~(x + iy) = f(x) + i y f'(x)`` and ``chi`` from :func:`smooth_cutoff`.
    Conjugate symmetry of the integrand reduces the plane to ``y > 0``. The
    strip ``0 < y < eta_cut`` is skipped.

    Parameters
    ----------
    f, df, d2f : callable
        Vectorised test function and its first two derivatives.
    lam : float
        Evaluation point.
    support : (float, float)
        Interval outside of which ``f`` (numerically) vanishes.
    order, tol : int, float
        Gauss-Legendre points per panel; the estimate at ``order`` is accepted
        when it agrees with the one at ``order - 8`` to relative ``tol``.
    """
    a, b = map(float, support)
    if not a < b:
        raise DomainError("support must be an interval (a, b) with a < b")
    lam = float(lam)

    def integrate(n):
        xe = _graded(lam, a, b, h0=max(eta_cut, 1e-9))
        ye = np.unique(np.concatenate([eta_cut * 2.0 ** np.arange(0, 60), [1.0, 1.25, 1.5, 1.75, 2.0]]))
        ye = ye[(ye >= eta_cut) & (ye <= 2.0)]
        xs, wx = _gl_nodes(xe, n)
        ys, wy = _gl_nodes(ye, n)
        fx, dfx, d2fx = (np.asarray(g(xs), dtype=float) for g in (f, df, d2f))
        chi = smooth_cutoff(ys)
        dchi = smooth_cutoff(ys, derivative=True)
        total = 0.0
        # row blocks keep memory bounded
        for start in range(0, ys.size, 256):
            sl = slice(start, start + 256)
            Y = ys[sl, None]
            dbar = 0.5 * (1j * Y * d2fx[None, :] * chi[sl, None]
                          + 1j * (fx[None, :] + 1j * Y * dfx[None, :]) * dchi[sl, None])
            kern = dbar / (lam - xs[None, :] - 1j * Y)
            total += float(np.real(wy[sl] @ (kern @ wx)))
        return 2.0 * total / np.pi

    lower = max(4, order - 8)
    coarse = integrate(lower)
    fine = integrate(order)
    err = abs(fine - coarse)
    if not np.isfinite(fine) or err > tol * max(1.0, abs(fine)):
        raise NumericalError(
            f"Helffer-Sjostrand quadrature did not converge at lam={lam}: "
            f"order {lower} -> {coarse!r}, order {order} -> {fine!r}"
        )
    if return_info:
        return fine, {"estimate": fine, "coarse": coarse, "error_estimate": err, "eta_cut": eta_cut, "order": order}
    return fine


def write_resolvent_scan_csv(rows, path) -> None:
    """Rows of ``(replica, E, eta, trace, shifted)``; ``trace`` is the normalised trace."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["replica", "E", "eta", "re_trace", "im_trace", "re_shifted", "im_shifted"])
        for r, E, eta, tr, sh in rows:
            tr, sh = complex(tr), complex(sh)
            w.writerow([int(r), repr(float(E)), repr(float(eta)), repr(tr.real), repr(tr.imag),
                        repr(sh.real), repr(sh.imag)])

"""Sparse symmetric random-matrix ensembles.

Two entry laws are provided, both with variance ``1/N`` per entry and
``E|H_ij|^k ~ 1/(N q^(k-2))`` for ``k >= 3``, where ``q = N**beta``:

* ``ErdosRenyi`` -- the normalised adjacency matrix of G(N, p) with
  ``p = q**2 / N``; ``H`` is its centred part.
* ``SignedBernoulli`` -- ``H_ij = +-1/q`` each with probability
  ``q**2 / (2N)``, zero otherwise.

Samples are drawn from a Philox counter-based generator keyed by the replica
seed, with the upper triangle (row-major, diagonal included) consuming one
uniform per entry. Identical ``(spec, seed)`` pairs therefore give
bit-identical matrices regardless of process or worker layout.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from math import comb
from pathlib import Path

import numpy as np

from .errors import ConfigurationError, DomainError

__all__ = [
    "ERDOS_RENYI",
    "SIGNED_BERNOULLI",
    "EnsembleSpec",
    "MatrixSample",
    "EntryLawMoments",
    "sample",
    "entry_moments",
    "h2_statistic",
    "exponents",
    "spec_to_dict",
    "spec_from_dict",
    "load_spec",
    "save_spec",
    "dump_matrix",
    "load_matrix",
    "MATRIX_MAGIC",
]

ERDOS_RENYI = "ErdosRenyi"
SIGNED_BERNOULLI = "SignedBernoulli"

_LAW_ALIASES = {
    "erdosrenyi": ERDOS_RENYI,
    "erdos_renyi": ERDOS_RENYI,
    "er": ERDOS_RENYI,
    "signedbernoulli": SIGNED_BERNOULLI,
    "signed_bernoulli": SIGNED_BERNOULLI,
    "sb": SIGNED_BERNOULLI,
}

MATRIX_MAGIC = b"SPRMAT\x00\x01"
_MASK64 = (1 << 64) - 1


def _canonical_law(law):
    key = str(law).replace("-", "_").lower()
    try:
        return _LAW_ALIASES[key]
    except KeyError:
        raise ConfigurationError(f"unknown entry law {law!r}") from None


@dataclass(frozen=True)
class EnsembleSpec:
    """Parameters of a sparse ensemble.

    Parameters
    ----------
    N : int
        Matrix dimension.
    beta : float
        Sparsity exponent in ``(0, 1/2)``; ``q = N**beta``.
    law : str
        ``"ErdosRenyi"`` or ``"SignedBernoulli"`` (aliases accepted).
    f : float, optional
        Rank-one shift magnitude. Ignored for ``ErdosRenyi``, where it is
        fixed to ``sqrt(N p / (1 - p))`` so that ``H`` is exactly centred.
        Defaults to 0 for ``SignedBernoulli``.
    """

    N: int
    beta: float
    law: str = ERDOS_RENYI
    f: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "law", _canonical_law(self.law))
        if isinstance(self.N, bool) or int(self.N) != self.N or self.N < 1:
            raise ConfigurationError(f"N must be a positive integer, got {self.N!r}")
        object.__setattr__(self, "N", int(self.N))
        beta = float(self.beta)
        if not 0.0 < beta < 0.5:
            raise ConfigurationError(f"beta must lie in (0, 1/2), got {beta}")
        object.__setattr__(self, "beta", beta)
        if self.law == ERDOS_RENYI:
            p = self.p
            if not 0.0 < p < 1.0:
                raise ConfigurationError(f"edge probability p={p} outside (0, 1)")
        elif self.f is not None and float(self.f) < 0:
            raise ConfigurationError(f"shift f must be >= 0, got {self.f}")

    @property
    def q(self) -> float:
        return float(self.N) ** self.beta

    @property
    def p(self) -> float:
        """Edge probability (ErdosRenyi) or total nonzero probability."""
        return self.q**2 / self.N

    @property
    def shift(self) -> float:
        """Effective rank-one shift ``f``."""
        if self.law == ERDOS_RENYI:
            p = self.p
            return math.sqrt(self.N * p / (1.0 - p))
        return 0.0 if self.f is None else float(self.f)


@dataclass(frozen=True, eq=False)
class MatrixSample:
    """One realisation: centred part ``H`` and shifted matrix ``A``."""

    H: np.ndarray
    A: np.ndarray
    seed: int
    spec: EnsembleSpec

    @property
    def N(self):
        return self.spec.N


@dataclass(frozen=True)
class EntryLawMoments:
    """Closed-form moments of the off-diagonal entry ``H_12``.

    ``moments[k]``, ``abs_moments[k]`` and ``cumulants[k]`` are indexed by the
    order ``k`` (index 0 is unused for cumulants and equals 1 for moments).
    """

    m2: float
    m4: float
    moments: tuple
    abs_moments: tuple
    cumulants: tuple
    max_order: int = field(default=0)


def _uniforms(seed, count):
    seed = int(seed) & _MASK64
    rng = np.random.Generator(np.random.Philox(key=seed))
    return rng.random(count)


def sample(spec: EnsembleSpec, seed: int) -> MatrixSample:
    """Draw one realisation of ``spec`` deterministically from ``seed``."""
    N = spec.N
    iu = np.triu_indices(N)
    u = _uniforms(seed, iu[0].size)
    if spec.law == ERDOS_RENYI:
        p = spec.p
        scale = 1.0 / math.sqrt(p * (1.0 - p) * N)
        vals = np.where(u < p, scale, 0.0)
        A = np.empty((N, N))
        A[iu] = vals
        A.T[iu] = vals
        H = A - spec.shift / N
    else:
        half = spec.p / 2.0
        inv_q = 1.0 / spec.q
        vals = np.where(u < half, inv_q, np.where(u < 2.0 * half, -inv_q, 0.0))
        H = np.empty((N, N))
        H[iu] = vals
        H.T[iu] = vals
        A = H + spec.shift / N
    return MatrixSample(H=H, A=A, seed=int(seed) & _MASK64, spec=spec)


def _cumulants_from_moments(mu):
    """Moment-cumulant recursion on raw moments ``mu[0..K]``."""
    K = len(mu) - 1
    kappa = [0.0] * (K + 1)
    for n in range(1, K + 1):
        acc = mu[n]
        for m in range(1, n):
            acc -= comb(n - 1, m - 1) * kappa[m] * mu[n - m]
        kappa[n] = acc
    return kappa


def entry_moments(spec: EnsembleSpec, max_order: int = 8) -> EntryLawMoments:
    """Exact moments and cumulants of the off-diagonal entry law."""
    if max_order < 4:
        max_order = 4
    N = spec.N
    if spec.law == ERDOS_RENYI:
        p = spec.p
        s = math.sqrt(p * (1.0 - p) * N)
        mu = [p * (1 - p) ** k / s**k + (1 - p) * (-p) ** k / s**k for k in range(max_order + 1)]
        amu = [p * (1 - p) ** k / s**k + (1 - p) * p**k / s**k for k in range(max_order + 1)]
    else:
        q = spec.q
        w = q * q / N
        mu = [1.0] + [w * q ** (-k) if k % 2 == 0 else 0.0 for k in range(1, max_order + 1)]
        amu = [1.0] + [w * q ** (-k) for k in range(1, max_order + 1)]
    mu[0] = amu[0] = 1.0
    kappa = _cumulants_from_moments(mu)
    return EntryLawMoments(
        m2=mu[2],
        m4=mu[4],
        moments=tuple(mu),
        abs_moments=tuple(amu),
        cumulants=tuple(kappa),
        max_order=max_order,
    )


def h2_statistic(sample_or_matrix) -> float:
    """``(1/N) tr H^2 - 1`` for a sample (uses ``H``) or a bare matrix."""
    H = sample_or_matrix.H if isinstance(sample_or_matrix, MatrixSample) else np.asarray(sample_or_matrix)
    N = H.shape[0]
    return float(np.einsum("ij,ij->", H, H) / N - 1.0)


def exponents(beta: float, alpha: float):
    """Return ``(zeta, delta, xi)`` for sparsity ``beta`` and scale ``alpha``.

    ``zeta = min(1/2 - beta, beta)``, ``delta = min(beta, 1/2 - beta,
    (1 - alpha)/2)`` and ``xi = min(alpha/2, delta) / 8``.
    """
    if not 0.0 < beta < 0.5:
        raise DomainError(f"beta must lie in (0, 1/2), got {beta}")
    if not 0.0 <= alpha <= 1.0:
        raise DomainError(f"alpha must lie in [0, 1], got {alpha}")
    zeta = min(0.5 - beta, beta)
    delta = min(beta, 0.5 - beta, (1.0 - alpha) / 2.0)
    xi = min(alpha / 2.0, delta) / 8.0
    return zeta, delta, xi


# -- serialisation -----------------------------------------------------------

def spec_to_dict(spec: EnsembleSpec) -> dict:
    if spec.law == ERDOS_RENYI:
        f_mode = "centered"
    else:
        f_mode = 0.0 if spec.f is None else float(spec.f)
    return {"N": spec.N, "beta": spec.beta, "law": spec.law, "f_mode": f_mode}


def spec_from_dict(data: dict) -> EnsembleSpec:
    try:
        N = data["N"]
        beta = data["beta"]
    except KeyError as exc:
        raise ConfigurationError(f"ensemble config missing key {exc.args[0]!r}") from None
    law = _canonical_law(data.get("law", ERDOS_RENYI))
    f_mode = data.get("f_mode", "centered" if law == ERDOS_RENYI else 0.0)
    if law == ERDOS_RENYI:
        if f_mode != "centered":
            raise ConfigurationError("ErdosRenyi only supports f_mode='centered'")
        f = None
    else:
        if f_mode == "centered":
            f = 0.0
        else:
            try:
                f = float(f_mode)
            except (TypeError, ValueError):
                raise ConfigurationError(f"invalid f_mode {f_mode!r}") from None
    return EnsembleSpec(N=N, beta=beta, law=law, f=f)


def _read_mapping(path):
    path = Path(path)
    text = path.read_text()
    if path.suffix.lower() in (".yaml", ".yml"):
        import yaml

        data = yaml.safe_load(text)
    else:
        data = json.loads(text)
    if not isinstance(data, dict):
        raise ConfigurationError(f"{path}: top level must be a mapping")
    return data


def load_spec(path) -> EnsembleSpec:
    """Read an ensemble spec from a JSON or YAML file.

    The spec may sit at top level or under an ``ensemble`` section.
    """
    data = _read_mapping(path)
    return spec_from_dict(data.get("ensemble", data))


def save_spec(spec: EnsembleSpec, path) -> None:
    Path(path).write_text(json.dumps(spec_to_dict(spec), indent=2, sort_keys=True) + "\n")


def dump_matrix(matrix, path) -> None:
    """Write a square matrix as magic header + row-major little-endian float64."""
    M = np.ascontiguousarray(matrix, dtype="<f8")
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError("expected a square matrix")
    with open(path, "wb") as fh:
        fh.write(MATRIX_MAGIC)
        fh.write(M.tobytes(order="C"))


def load_matrix(path) -> np.ndarray:
    raw = Path(path).read_bytes()
    if raw[:8] != MATRIX_MAGIC:
        raise ValueError(f"{path}: bad magic header")
    body = np.frombuffer(raw, dtype="<f8", offset=8)
    N = math.isqrt(body.size)
    if N * N != body.size:
        raise ValueError(f"{path}: payload is not a square matrix")
    return body.reshape(N, N).astype(np.float64)

"""Replica experiments: seeding, per-replica statistics, deterministic aggregation.

A run is a pure function of its :class:`ExperimentConfig`. Replica ``r`` uses
seed ``derive_seed(master_seed, r)``; per-replica results are gathered and
folded in replica-index order, so the report does not depend on the number
of workers. Wall-clock timing is kept out of the report and written to a
separate ``timing.json``.
"""
from __future__ import annotations

import concurrent.futures as cf
import csv
import json
import math
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from threadpoolctl import threadpool_limits

from .ensemble import (EnsembleSpec, entry_moments, h2_statistic, sample, spec_from_dict,
                       spec_to_dict, _read_mapping)
from .errors import ConfigurationError, InsufficientDataError, NumericalError
from .resolvent import green_function, local_law_report, shifted_stat, trace_green
from .semicircle import classify, stieltjes, stieltjes_prime
from .spectra import (eigen_decompose, eigenvalue_shift_residual, fluctuation_series, index_set,
                      relaxed_index_set)
from .stats import (complex_gaussian_report, correlation_matrix, normality_report)

__all__ = [
    "RECIPES",
    "derive_seed",
    "ExperimentConfig",
    "ReplicaResult",
    "AggregateReport",
    "run_replica",
    "run",
    "aggregate",
    "counting_shift_residual",
    "load_config",
    "write_outputs",
]

RECIPES = ("EigenvalueCLT", "CountingCLT", "Mesoscopic", "LocalLaw", "ShiftedMoment")
_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
FAILURE_LIMIT = 0.01


def _splitmix64(x: int) -> int:
    x = (x + _GOLDEN) & _MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK64
    return x ^ (x >> 31)


def derive_seed(master: int, replica_index: int) -> int:
    """Stateless 64-bit seed for replica ``replica_index`` (splitmix64 finaliser)."""
    if replica_index < 0:
        raise ValueError("replica_index must be non-negative")
    return _splitmix64((int(master) + (int(replica_index) + 1) * _GOLDEN) & _MASK64)


# -- configuration -----------------------------------------------------------------

def _z_entries(params, N):
    """Normalise a z-grid to a list of complex numbers.

    Entries may be ``[E, eta]``, ``{"E": .., "eta": ..}`` or
    ``{"E": .., "eta_exponent": a}`` meaning ``eta = N^-a``.
    """
    grid = params.get("z")
    if grid is None:
        raise ConfigurationError("recipe needs a 'z' grid")
    out = []
    for item in grid:
        if isinstance(item, dict):
            E = float(item["E"])
            if "eta" in item:
                eta = float(item["eta"])
            elif "eta_exponent" in item:
                eta = float(N) ** (-float(item["eta_exponent"]))
            else:
                raise ConfigurationError(f"z entry {item!r} needs 'eta' or 'eta_exponent'")
        else:
            E, eta = map(float, item)
        out.append(complex(E, eta))
    if not out:
        raise ConfigurationError("empty z grid")
    return out


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything that determines a run.

    ``params`` holds recipe parameters: ``tau`` for all recipes; ``indices`` or
    ``fractions`` (EigenvalueCLT); ``energies`` (CountingCLT); ``z`` (the
    resolvent recipes). ``seed_policy="fixed"`` gives every replica the master
    seed, a degenerate mode for testing.
    """

    ensemble: EnsembleSpec
    recipe: str
    replicas: int = 100
    master_seed: int = 0
    params: dict = field(default_factory=dict)
    workers: int = 1
    out_dir: str | None = None
    seed_policy: str = "derived"

    def __post_init__(self):
        if self.recipe not in RECIPES:
            raise ConfigurationError(f"unknown recipe {self.recipe!r}; choose from {RECIPES}")
        if isinstance(self.replicas, bool) or int(self.replicas) != self.replicas or self.replicas < 1:
            raise ConfigurationError("replicas must be an integer >= 1")
        if int(self.workers) != self.workers or self.workers < 1:
            raise ConfigurationError("workers must be an integer >= 1")
        if self.seed_policy not in ("derived", "fixed"):
            raise ConfigurationError("seed_policy must be 'derived' or 'fixed'")
        object.__setattr__(self, "master_seed", int(self.master_seed) & _MASK64)
        object.__setattr__(self, "params", json.loads(json.dumps(self.params)))
        self.validate()

    @property
    def tau(self) -> float:
        return float(self.params.get("tau", 0.1))

    def seed(self, index: int) -> int:
        return self.master_seed if self.seed_policy == "fixed" else derive_seed(self.master_seed, index)

    def z_grid(self):
        return _z_entries(self.params, self.ensemble.N)

    def indices(self):
        N = self.ensemble.N
        p = self.params
        if "indices" in p:
            idx = [int(i) for i in p["indices"]]
            for i in idx:
                if not 1 <= i <= N:
                    raise ConfigurationError(f"index {i} outside [1, {N}]")
            return tuple(idx)
        if "fractions" in p:
            try:
                return relaxed_index_set(N, p["fractions"], self.tau).indices
            except ValueError as exc:
                raise ConfigurationError(str(exc)) from None
        s = index_set(N, self.tau, self.ensemble.beta)
        if s.empty:
            raise ConfigurationError(
                f"the theorem index set is empty at N={N} (central gap {s.gap:.1f}); "
                "give 'fractions' or 'indices' explicitly")
        return s.indices

    def validate(self) -> None:
        tau = self.tau
        if not 0.0 < tau < 0.5:
            raise ConfigurationError(f"tau must lie in (0, 1/2), got {tau}")
        N = self.ensemble.N
        r = self.recipe
        if r == "EigenvalueCLT":
            idx = self.indices()
            if any(2 * i == N + 1 for i in idx):
                raise ConfigurationError("indices must avoid the spectral centre (gamma_i = 0)")
        elif r == "CountingCLT":
            Es = self.params.get("energies")
            if not Es:
                raise ConfigurationError("CountingCLT needs a non-empty 'energies' list")
            for E in Es:
                if not -2.0 + tau <= float(E) <= 2.0 - tau:
                    raise ConfigurationError(f"energy {E} outside [-2+tau, 2-tau] = [{-2 + tau}, {2 - tau}]")
        else:
            for z in self.z_grid():
                if not z.imag > 0:
                    raise ConfigurationError(f"z={z} needs eta > 0")
                pt = classify(z, N, tau)
                if r == "Mesoscopic" and not pt.in_S_tilde:
                    raise ConfigurationError(f"z={z} is outside S~_tau (eta >= N^(-1+tau), |E| <= 4, eta <= 4)")
                if not pt.in_S:
                    raise ConfigurationError(f"z={z} is outside S")

    def to_dict(self, execution: bool = True) -> dict:
        """Config as nested sections; ``execution=False`` drops workers and output dir.

        Reports use the reduced form so they do not depend on how a run was executed.
        """
        exp = {"recipe": self.recipe, "replicas": self.replicas, "seed": self.master_seed,
               "seed_policy": self.seed_policy}
        d = {"ensemble": spec_to_dict(self.ensemble), "experiment": exp, "params": self.params}
        if execution:
            exp["workers"] = self.workers
            if self.out_dir is not None:
                d["output"] = {"dir": self.out_dir}
        return d

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        if "ensemble" not in data:
            raise ConfigurationError("config needs an 'ensemble' section")
        spec = spec_from_dict(data["ensemble"])
        exp = data.get("experiment", {})
        if "recipe" not in exp:
            raise ConfigurationError("config needs experiment.recipe")
        known = {"recipe", "replicas", "seed", "workers", "seed_policy"}
        extra = set(exp) - known
        if extra:
            raise ConfigurationError(f"unknown experiment keys {sorted(extra)}")
        return cls(ensemble=spec, recipe=exp["recipe"], replicas=exp.get("replicas", 100),
                   master_seed=exp.get("seed", 0), params=dict(data.get("params", {})),
                   workers=exp.get("workers", 1), out_dir=data.get("output", {}).get("dir"),
                   seed_policy=exp.get("seed_policy", "derived"))

    def with_changes(self, **kw) -> "ExperimentConfig":
        d = dict(ensemble=self.ensemble, recipe=self.recipe, replicas=self.replicas,
                 master_seed=self.master_seed, params=self.params, workers=self.workers,
                 out_dir=self.out_dir, seed_policy=self.seed_policy)
        d.update(kw)
        return ExperimentConfig(**d)


def load_config(path) -> ExperimentConfig:
    return ExperimentConfig.from_dict(_read_mapping(path))


# -- per replica -------------------------------------------------------------------

@dataclass(frozen=True)
class ReplicaResult:
    index: int
    seed: int
    values: dict | None
    error: str | None = None

    @property
    def ok(self) -> bool:
        return self.error is None


def _zlabel(z: complex) -> str:
    return f"{z.real!r}{'+' if z.imag >= 0 else '-'}{abs(z.imag)!r}i"


def _replica_values(config: ExperimentConfig, seed: int) -> dict:
    s = sample(config.ensemble, seed)
    out = {"h2": h2_statistic(s)}
    r = config.recipe
    if r in ("EigenvalueCLT", "CountingCLT"):
        lam = eigen_decompose(s.A).eigenvalues
        if r == "EigenvalueCLT":
            for i in config.indices():
                out[f"lambda[{i}]"] = float(lam[i - 1])
        else:
            for E in config.params["energies"]:
                out[f"Sigma[{float(E)!r}]"] = int(np.searchsorted(lam, float(E), side="right"))
    elif r in ("Mesoscopic", "ShiftedMoment"):
        spec = eigen_decompose(s.H)
        for z in config.z_grid():
            out[f"Gbar[{_zlabel(z)}]"] = complex(trace_green(spec, z))
    else:
        spec = eigen_decompose(s.H, want_vectors=True)
        for z in config.z_grid():
            rep = local_law_report(green_function(spec, z), config.ensemble.q, config.ensemble.N)
            out[f"entry_dev[{_zlabel(z)}]"] = rep.entry_deviation
            out[f"avg_dev[{_zlabel(z)}]"] = rep.average_deviation
    return out


def run_replica(config: ExperimentConfig, index: int) -> ReplicaResult:
    """Per-replica statistics; numeric failures are captured, not raised."""
    seed = config.seed(index)
    try:
        with threadpool_limits(limits=1):
            values = _replica_values(config, seed)
    except (NumericalError, np.linalg.LinAlgError, FloatingPointError) as exc:
        return ReplicaResult(index=index, seed=seed, values=None, error=f"{type(exc).__name__}: {exc}")
    return ReplicaResult(index=index, seed=seed, values=values)


def _worker(args):
    config, index = args
    return run_replica(config, index)


def _collect(config: ExperimentConfig) -> list:
    M = config.replicas
    if config.workers == 1 or M == 1:
        return [run_replica(config, r) for r in range(M)]
    chunk = max(1, M // (4 * config.workers))
    with cf.ProcessPoolExecutor(max_workers=config.workers) as ex:
        # ordered map: results come back in replica-index order
        return list(ex.map(_worker, ((config, r) for r in range(M)), chunksize=chunk))


# -- aggregation -------------------------------------------------------------------

def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (complex, np.complexfloating)):
        return {"re": _jsonable(x.real), "im": _jsonable(x.imag)}
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return x if math.isfinite(x) else None
    if hasattr(x, "to_dict"):
        return _jsonable(x.to_dict())
    return x


def _target(name, theory, observed, formula):
    ratio = observed / theory if theory else float("nan")
    return {"statistic": name, "theory": theory, "observed": observed, "ratio": ratio, "formula": formula}


def _var(x):
    return float(np.var(x, ddof=1))


def _column(raw, key):
    return np.array([v[key] for v in raw])


def _agg_eigenvalue(config, raw, m4):
    idx = config.indices()
    lam = np.array([[v[f"lambda[{i}]"] for i in idx] for v in raw])
    h2 = _column(raw, "h2")
    # columns of lam are indexed 0..k-1; relabel via a full-width view
    N = config.ensemble.N
    full = np.zeros((lam.shape[0], N))
    full[:, np.array(idx) - 1] = lam
    fs = fluctuation_series(full, idx, m4)
    sr = eigenvalue_shift_residual(full, idx, h2)
    per = {}
    targets = []
    for k, i in enumerate(idx):
        x = fs.x_values[:, k]
        per[f"X[{i}]"] = normality_report(x, standardize=True)
        targets.append(_target(f"Var X[{i}]", 1.0, _var(x),
                               "Var X_i -> 1, X_i = (lambda_i - E lambda_i)/(gamma_i sqrt(E H^4/2))"))
    corr = correlation_matrix(fs.x_values.T)
    derived = {
        "gamma": fs.gamma, "mean_lambda": fs.mean_lambda,
        "correlation": {"indices": idx, "values": corr.values, "undefined": corr.undefined,
                        "target": "matrix of ones"},
        "shift_residual": {"std_residual": sr.std_residual, "std_centered": sr.std_centered,
                           "ratio": sr.ratio, "formula": "r = (lambda_i - mean) - (gamma_i/2)(H2 - 1)"},
    }
    series = {f"X[{i}]": fs.x_values[:, k] for k, i in enumerate(idx)}
    return per, targets, derived, series


def _sigma2(E, m4, N):
    return E * E * (4.0 - E * E) * m4 * N * N / (8.0 * math.pi**2)


def _agg_counting(config, raw, m4):
    N = config.ensemble.N
    h2 = _column(raw, "h2")
    per, targets, series = {}, [], {}
    shift = {}
    for E in config.params["energies"]:
        E = float(E)
        s = _column(raw, f"Sigma[{E!r}]").astype(float)
        c = s - s.mean()
        sig2 = _sigma2(E, m4, N)
        targets.append(_target(f"Var Sigma({E!r})", sig2, _var(s),
                               "sigma(E)^2 = E^2 (4 - E^2) E H^4 N^2 / (8 pi^2)"))
        if sig2 > 0:
            z = c / math.sqrt(sig2)
            per[f"Sigma[{E!r}]/sigma"] = normality_report(z)
            series[f"Sigma[{E!r}]/sigma"] = z
        # dilation lambda_i ~ gamma_i (1 + (H2 - 1)/2) lowers Sigma(E) for E > 0
        r = c + E * math.sqrt(4.0 - E * E) / (4.0 * math.pi) * h2 * N
        std_c = float(c.std(ddof=1))
        shift[f"{E!r}"] = {"std_residual": float(r.std(ddof=1)), "std_centered": std_c,
                           "ratio": float(r.std(ddof=1)) / std_c if std_c > 0 else float("nan"),
                           "formula": "r = (Sigma(E) - mean) + (E sqrt(4 - E^2)/(4 pi)) (H2 - 1) N"}
    return per, targets, {"shift_residual": shift}, series


def _regime(z, config):
    q, N = config.ensemble.q, config.ensemble.N
    return 1 if z.imag > q / math.sqrt(N) else 2


def _agg_mesoscopic(config, raw, m4):
    N = config.ensemble.N
    per, targets, series, derived = {}, [], {}, {}
    for z in config.z_grid():
        lab = _zlabel(z)
        tr = N * _column(raw, f"Gbar[{lab}]")
        c = tr - tr.mean()
        mm = complex(stieltjes(z) * stieltjes_prime(z))
        eta = z.imag
        e_abs2 = float(np.mean(np.abs(c) ** 2))
        t1 = abs(mm) ** 2 * 2.0 * m4 * N * N
        targets.append(_target(f"E|trG - mean|^2 [{lab}] regime 1", t1, e_abs2,
                               "|m m'|^2 2 E H^4 N^2"))
        t2 = 1.0 / (2.0 * eta * eta)
        targets.append(_target(f"E|trG - mean|^2 [{lab}] regime 2", t2, e_abs2, "1 / (2 eta^2)"))
        u = c / mm
        Z = math.sqrt(2.0) * eta * c
        per[f"Z[{lab}]"] = complex_gaussian_report(Z)
        per[f"regime1[{lab}]"] = normality_report((u / math.sqrt(2.0 * m4) / N).real, standardize=True)
        derived[lab] = {
            "regime": _regime(z, config),
            "q_over_sqrtN": config.ensemble.q / math.sqrt(N),
            "aligned_var_re": _var(u.real),
            "aligned_var_im": _var(u.imag),
            "aligned_formula": "u = (trG - mean)/(m m')",
        }
        series[f"Re Z[{lab}]"] = Z.real * math.sqrt(2.0)
        series[f"Im Z[{lab}]"] = Z.imag * math.sqrt(2.0)
    return per, targets, derived, series


def _agg_shifted(config, raw, m4):
    N = config.ensemble.N
    h2 = _column(raw, "h2")
    per, targets, derived, series = {}, [], {}, {}
    for z in config.z_grid():
        lab = _zlabel(z)
        g = _column(raw, f"Gbar[{lab}]")
        st = shifted_stat(g, h2, z)
        neta = N * z.imag
        e2 = float(np.mean(np.abs(st.value) ** 2))
        targets.append(_target(f"E|[G]|^2 [{lab}]", 0.5 / neta**2, e2, "n!/2^n (N eta)^(-2n) at n=1"))
        cen = g - st.mean_g_bar
        var_s = float(np.sum(np.abs(st.value - st.value.mean()) ** 2) / (g.size - 1))
        var_c = float(np.sum(np.abs(cen) ** 2) / (g.size - 1))
        derived[lab] = {"var_shifted": var_s, "var_centered": var_c,
                        "ratio": var_s / var_c if var_c > 0 else float("nan"),
                        "formula": "[G] = Gbar - mean Gbar - (H2 - 1) m m'"}
        series[f"Re[G]*N*eta[{lab}]"] = st.value.real * neta
    return per, targets, derived, series


def _agg_locallaw(config, raw, m4):
    N, q = config.ensemble.N, config.ensemble.q
    derived, targets = {}, []
    for z in config.z_grid():
        lab = _zlabel(z)
        m = complex(stieltjes(z))
        kappa = min(abs(2 - z.real), abs(2 + z.real))
        neta = N * z.imag
        eb = 1.0 / q + math.sqrt(max(m.imag, 0.0) / neta) + 1.0 / neta
        ab = min(1.0 / q, 1.0 / (q * q * (z.imag + kappa))) + 1.0 / neta
        ed = _column(raw, f"entry_dev[{lab}]")
        ad = _column(raw, f"avg_dev[{lab}]")
        targets.append(_target(f"max entry deviation [{lab}]", eb, float(ed.max()),
                               "1/q + sqrt(Im m/(N eta)) + 1/(N eta)"))
        targets.append(_target(f"average deviation [{lab}]", ab, float(ad.max()),
                               "min(1/q, 1/(q^2 (eta + kappa))) + 1/(N eta)"))
        derived[lab] = {"ratio_entrywise_max": float(ed.max()) / eb,
                        "ratio_average_max": float(ad.max()) / ab,
                        "slack_reference_N^0.1": N**0.1}
    return {}, targets, derived, {}


_AGGREGATORS = {
    "EigenvalueCLT": _agg_eigenvalue,
    "CountingCLT": _agg_counting,
    "Mesoscopic": _agg_mesoscopic,
    "ShiftedMoment": _agg_shifted,
    "LocalLaw": _agg_locallaw,
}


@dataclass(eq=False)
class AggregateReport:
    """Result of one run.

    ``raw`` holds per-replica values for successful replicas, in index order.
    ``runtime_seconds`` is reported separately from :meth:`to_dict`.
    """

    config: ExperimentConfig
    statistics: dict
    targets: list
    derived: dict
    series: dict
    raw: list
    manifest: list
    failures: list
    runtime_seconds: float = 0.0

    def to_dict(self) -> dict:
        M = len(self.raw)
        h2 = np.array([v["h2"] for v in self.raw])
        m4 = entry_moments(self.config.ensemble).m4
        return _jsonable({
            "config": self.config.to_dict(execution=False),
            "replicas_ok": M,
            "replicas_failed": len(self.failures),
            "failures": self.failures,
            "estimator_note": "expectations replaced by replica means; standard error ~ std / sqrt(M)",
            "h2": {"mean": float(h2.mean()), "variance": _var(h2) if M > 1 else None,
                   "theory_variance": 2.0 * m4, "formula": "Var(H2 - 1) ~ 2 E H^4"},
            "statistics": self.statistics,
            "targets": self.targets,
            "derived": self.derived,
            "seeds": [{"replica": r, "seed": s, "status": st} for r, s, st in self.manifest],
        })

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    def column(self, key):
        return np.array([v[key] for v in self.raw])

    def target(self, name):
        for t in self.targets:
            if t["statistic"] == name:
                return t
        raise KeyError(name)


def aggregate(config: ExperimentConfig, raw: list, recipe: str | None = None):
    """Aggregate per-replica values; ``recipe`` may re-aggregate compatible raw data."""
    recipe = recipe or config.recipe
    if len(raw) < 2:
        raise InsufficientDataError("aggregation needs at least two successful replicas")
    m4 = entry_moments(config.ensemble).m4
    return _AGGREGATORS[recipe](config, raw, m4)


def run(config: ExperimentConfig, write: bool = True) -> AggregateReport:
    """Execute all replicas and aggregate; writes files when ``config.out_dir`` is set."""
    t0 = time.perf_counter()
    results = _collect(config)
    failures = [{"replica": r.index, "seed": r.seed, "error": r.error} for r in results if not r.ok]
    if len(failures) > FAILURE_LIMIT * config.replicas:
        raise NumericalError(f"{len(failures)} of {config.replicas} replicas failed (limit 1%): "
                             f"first error: {failures[0]['error']}")
    raw = [r.values for r in results if r.ok]
    stats_, targets, derived, series = aggregate(config, raw)
    report = AggregateReport(
        config=config, statistics=stats_, targets=targets, derived=derived, series=series, raw=raw,
        manifest=[(r.index, r.seed, "ok" if r.ok else "failed") for r in results], failures=failures,
        runtime_seconds=time.perf_counter() - t0)
    if write and config.out_dir is not None:
        write_outputs(report, config.out_dir)
    return report


def counting_shift_residual(source) -> dict:
    """Residual of the counting function after removing the ``H2 - 1`` shift.

    ``source`` is a CountingCLT config (which is run) or a finished report.
    """
    report = source if isinstance(source, AggregateReport) else run(source, write=False)
    if report.config.recipe != "CountingCLT":
        raise ConfigurationError("counting_shift_residual needs a CountingCLT config")
    return report.derived["shift_residual"]


# -- files -------------------------------------------------------------------------

_HIST_EDGES = np.linspace(-5.0, 5.0, 41)


def write_outputs(report: AggregateReport, out_dir) -> dict:
    """Write report.json, replicas.csv, seeds.csv, hist_*.csv and timing.json."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {"report": out / "report.json", "replicas": out / "replicas.csv",
             "seeds": out / "seeds.csv", "timing": out / "timing.json"}
    paths["report"].write_text(report.to_json())
    ok_index = [r for r, _, st in report.manifest if st == "ok"]
    with open(paths["replicas"], "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["replica", "statistic", "value"])
        for r, vals in zip(ok_index, report.raw):
            for k, v in vals.items():
                if isinstance(v, complex):
                    w.writerow([r, f"Re {k}", repr(v.real)])
                    w.writerow([r, f"Im {k}", repr(v.imag)])
                else:
                    w.writerow([r, k, repr(v)])
    with open(paths["seeds"], "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["replica", "seed", "status"])
        w.writerows(report.manifest)
    for n, (name, vals) in enumerate(sorted(report.series.items())):
        x = np.asarray(vals, dtype=float)
        sd = x.std(ddof=1) if x.size > 1 else 0.0
        zs = (x - x.mean()) / sd if sd > 0 else np.zeros_like(x)
        counts, _ = np.histogram(zs, bins=_HIST_EDGES)
        p = out / f"hist_{n:02d}.csv"
        with open(p, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["statistic", "bin_lo", "bin_hi", "count"])
            for lo, hi, c in zip(_HIST_EDGES[:-1], _HIST_EDGES[1:], counts):
                w.writerow([name, repr(float(lo)), repr(float(hi)), int(c)])
        paths[f"hist_{n:02d}"] = p
    paths["timing"].write_text(json.dumps({"runtime_seconds": report.runtime_seconds,
                                           "workers": report.config.workers}, indent=2) + "\n")
    return paths

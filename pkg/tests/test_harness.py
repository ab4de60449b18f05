import json

import numpy as np
import pytest
import yaml

from sparse_rmt import harness as hz
from sparse_rmt.ensemble import EnsembleSpec
from sparse_rmt.errors import ConfigurationError, InsufficientDataError, NumericalError
from sparse_rmt.harness import ExperimentConfig, derive_seed
from sparse_rmt.semicircle import quantiles


def _cfg(recipe="CountingCLT", N=80, M=4, **params):
    defaults = {
        "EigenvalueCLT": {"fractions": [0.25, 0.7]},
        "CountingCLT": {"energies": [1.0, -0.5]},
        "Mesoscopic": {"z": [[1.0, 0.5]]},
        "ShiftedMoment": {"z": [[1.0, 0.5]]},
        "LocalLaw": {"z": [[0.5, 0.3]]},
    }[recipe]
    defaults.update(params)
    return ExperimentConfig(ensemble=EnsembleSpec(N=N, beta=0.3), recipe=recipe, replicas=M,
                            master_seed=11, params=defaults)


class TestDeriveSeed:
    def test_deterministic(self):
        assert derive_seed(5, 3) == derive_seed(5, 3)
        assert derive_seed(5, 3) != derive_seed(5, 4) != derive_seed(6, 3)

    def test_no_collisions(self):
        seeds = {derive_seed(12345, i) for i in range(10**6 + 1)}
        assert len(seeds) == 10**6 + 1

    def test_avalanche(self):
        rng = np.random.default_rng(0)
        flips, trials = 0, 0
        for _ in range(300):
            m = int(rng.integers(0, 2**63))
            assert derive_seed(m, 0) != m
            base = derive_seed(m, 0)
            for b in range(0, 64, 7):
                flips += bin(base ^ derive_seed(m ^ (1 << b), 0)).count("1")
                trials += 64
        assert flips / trials >= 0.4

    def test_bad_index(self):
        with pytest.raises(ValueError):
            derive_seed(0, -1)


class TestConfig:
    def test_energy_out_of_range(self):
        with pytest.raises(ConfigurationError):
            _cfg(energies=[3.0])
        with pytest.raises(ConfigurationError):
            _cfg(energies=[1.95])  # outside [-2 + tau, 2 - tau] at tau = 0.1

    def test_recipe_params(self):
        with pytest.raises(ConfigurationError):
            _cfg("Mesoscopic", z=[[1.0, 1e-4]])  # below N^(-1 + tau)
        with pytest.raises(ConfigurationError):
            # the theorem index set is empty at desk scale, so bands must be explicit
            ExperimentConfig(ensemble=EnsembleSpec(N=1000, beta=0.2), recipe="EigenvalueCLT", params={})
        with pytest.raises(ConfigurationError):
            _cfg("EigenvalueCLT", N=81, indices=[41])  # gamma_41 = 0
        with pytest.raises(ConfigurationError):
            ExperimentConfig(ensemble=EnsembleSpec(N=10, beta=0.3), recipe="Nope")
        with pytest.raises(ConfigurationError):
            ExperimentConfig.from_dict({"ensemble": {"N": 10, "beta": 0.3},
                                        "experiment": {"recipe": "LocalLaw", "colour": 1}})

    def test_eta_exponent(self):
        c = _cfg("Mesoscopic", N=400, z=[{"E": 1.0, "eta_exponent": 0.5}])
        assert c.z_grid() == [complex(1.0, 400 ** -0.5)]

    def test_round_trip_yaml(self, tmp_path):
        c = _cfg("Mesoscopic")
        p = tmp_path / "c.yaml"
        p.write_text(yaml.safe_dump(c.to_dict()))
        assert hz.load_config(p) == c


class TestRun:
    def test_degenerate_fixed_seed(self):
        c = _cfg("EigenvalueCLT", M=2).with_changes(seed_policy="fixed")
        rep = hz.run(c, write=False)
        assert np.all(np.array(list(rep.series.values())) == 0)
        for t in rep.targets:
            assert t["observed"] == 0.0
        rc = hz.run(_cfg("CountingCLT", M=2).with_changes(seed_policy="fixed"), write=False)
        assert all(t["observed"] == 0.0 for t in rc.targets)
        rm = hz.run(_cfg("Mesoscopic", M=2).with_changes(seed_policy="fixed"), write=False)
        assert all(t["observed"] == 0.0 for t in rm.targets)

    def test_manifest_reproduces_replicas(self):
        c = _cfg("Mesoscopic", M=4)
        rep = hz.run(c, write=False)
        for (r, seed, status), vals in zip(rep.manifest, rep.raw):
            assert status == "ok" and seed == derive_seed(c.master_seed, r)
            assert hz.run_replica(c, r).values == vals

    def test_config_echo_round_trip(self):
        c = _cfg("ShiftedMoment", M=3)
        echo = json.loads(hz.run(c, write=False).to_json())["config"]
        assert ExperimentConfig.from_dict(echo) == c

    def test_targets_carry_formula(self):
        for recipe in hz.RECIPES:
            rep = hz.run(_cfg(recipe, M=3), write=False)
            assert rep.targets
            for t in rep.targets:
                assert t["formula"] and t["theory"] > 0
                assert t["ratio"] == pytest.approx(t["observed"] / t["theory"])

    def test_write_outputs(self, tmp_path):
        hz.run(_cfg("CountingCLT", M=3).with_changes(out_dir=str(tmp_path / "o")))
        out = tmp_path / "o"
        names = {p.name for p in out.iterdir()}
        assert {"report.json", "replicas.csv", "seeds.csv", "timing.json", "hist_00.csv"} <= names
        seeds = (out / "seeds.csv").read_text().splitlines()
        assert seeds[0] == "replica,seed,status" and len(seeds) == 4
        rows = (out / "replicas.csv").read_text().splitlines()
        assert rows[0] == "replica,statistic,value" and len(rows) == 1 + 3 * 3
        assert "workers" in json.loads((out / "timing.json").read_text())

    def test_workers_identical(self):
        c = _cfg("Mesoscopic", M=6)
        a = hz.run(c, write=False).to_json()
        b = hz.run(c.with_changes(workers=2), write=False).to_json()
        assert a == b

    def test_failure_policy(self, monkeypatch):
        real = hz._replica_values

        def flaky(config, seed):
            if seed == config.seed(1):
                raise NumericalError("synthetic")
            return real(config, seed)

        monkeypatch.setattr(hz, "_replica_values", flaky)
        with pytest.raises(NumericalError):
            hz.run(_cfg("CountingCLT", M=20), write=False)
        rep = hz.run(_cfg("CountingCLT", N=30, M=101), write=False)
        assert len(rep.raw) == 100 and rep.failures[0]["replica"] == 1
        assert "failed" in [s for _, _, s in rep.manifest]

    def test_aggregate_needs_two(self):
        with pytest.raises(InsufficientDataError):
            hz.aggregate(_cfg(), [{"h2": 0.0}])


class TestCountingShift:
    def test_zero_h2(self, monkeypatch):
        monkeypatch.setattr(hz, "h2_statistic", lambda s: 0.0)
        res = hz.counting_shift_residual(_cfg("CountingCLT", M=6))
        for v in res.values():
            assert v["std_residual"] == v["std_centered"] and v["ratio"] == 1.0

    def test_formula_sign(self):
        # a pure dilation lambda_i = gamma_i (1 + h/2) is removed by the residual
        N, E = 20000, 1.0
        g = quantiles(N)
        h = np.linspace(-0.02, 0.02, 9)
        raw = [{"h2": float(x), f"Sigma[{E!r}]": int(np.searchsorted(g * (1 + x / 2), E, side="right"))}
               for x in h]
        cfg = _cfg("CountingCLT", N=N, energies=[E])
        _, _, derived, _ = hz.aggregate(cfg, raw)
        assert derived["shift_residual"][repr(E)]["ratio"] < 0.1

    def test_requires_counting(self):
        rep = hz.run(_cfg("LocalLaw", M=2), write=False)
        with pytest.raises(ConfigurationError):
            hz.counting_shift_residual(rep)

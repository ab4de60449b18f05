import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from sparse_rmt import ensemble as ens
from sparse_rmt.errors import ConfigurationError, DomainError


def _bernoulli_central_moment(p, k):
    # oracle: E (B - p)^k for B ~ Bernoulli(p), exact in rationals
    return p * (1 - p) ** k + (1 - p) * (-p) ** k


class TestSpec:
    def test_derived_quantities(self):
        s = ens.EnsembleSpec(N=1000, beta=0.25)
        assert s.q == pytest.approx(1000 ** 0.25)
        assert s.p == pytest.approx(s.q**2 / 1000)
        assert s.shift == pytest.approx(math.sqrt(1000 * s.p / (1 - s.p)))

    @pytest.mark.parametrize("beta", [0.0, 0.5, -0.1, 0.7])
    def test_beta_range(self, beta):
        with pytest.raises(ConfigurationError):
            ens.EnsembleSpec(N=100, beta=beta)

    def test_bad_law_and_shift(self):
        with pytest.raises(ConfigurationError):
            ens.EnsembleSpec(N=100, beta=0.2, law="Gaussian")
        with pytest.raises(ConfigurationError):
            ens.EnsembleSpec(N=100, beta=0.2, law="SignedBernoulli", f=-1.0)
        with pytest.raises(ConfigurationError):
            ens.EnsembleSpec(N=0, beta=0.2)

    def test_aliases(self):
        assert ens.EnsembleSpec(N=10, beta=0.2, law="sb").law == ens.SIGNED_BERNOULLI
        assert ens.EnsembleSpec(N=10, beta=0.2, law="erdos-renyi").law == ens.ERDOS_RENYI

    def test_dict_round_trip(self, tmp_path):
        for spec in (ens.EnsembleSpec(N=64, beta=0.3),
                     ens.EnsembleSpec(N=64, beta=0.3, law="SignedBernoulli", f=2.5)):
            assert ens.spec_from_dict(ens.spec_to_dict(spec)) == spec
            ens.save_spec(spec, tmp_path / "s.json")
            assert ens.load_spec(tmp_path / "s.json") == spec

    def test_yaml_section(self, tmp_path):
        p = tmp_path / "c.yaml"
        p.write_text("ensemble:\n  N: 50\n  beta: 0.2\n  law: SignedBernoulli\n  f_mode: 1.0\n")
        s = ens.load_spec(p)
        assert (s.N, s.law, s.shift) == (50, ens.SIGNED_BERNOULLI, 1.0)

    def test_er_rejects_free_shift(self):
        with pytest.raises(ConfigurationError):
            ens.spec_from_dict({"N": 10, "beta": 0.2, "law": "ErdosRenyi", "f_mode": 3.0})
        with pytest.raises(ConfigurationError):
            ens.spec_from_dict({"beta": 0.2})


class TestSample:
    def test_signed_bernoulli_support(self):
        spec = ens.EnsembleSpec(N=4, beta=0.3, law="SignedBernoulli")
        s = ens.sample(spec, 11)
        assert np.array_equal(s.H, s.H.T)
        allowed = {-1 / spec.q, 0.0, 1 / spec.q}
        assert set(np.unique(s.H)) <= allowed

    def test_deterministic(self):
        spec = ens.EnsembleSpec(N=40, beta=0.3)
        a, b = ens.sample(spec, 123), ens.sample(spec, 123)
        assert a.H.tobytes() == b.H.tobytes() and a.A.tobytes() == b.A.tobytes()
        c = ens.sample(spec, 124)
        assert not np.array_equal(a.H, c.H)

    def test_shift_structure(self):
        spec = ens.EnsembleSpec(N=30, beta=0.3)
        s = ens.sample(spec, 5)
        assert np.array_equal(s.A, s.A.T)
        assert np.allclose(s.A - s.H, spec.shift / spec.N, rtol=0, atol=1e-15)
        sb = ens.EnsembleSpec(N=30, beta=0.3, law="SignedBernoulli", f=2.0)
        t = ens.sample(sb, 5)
        assert np.allclose(t.A - t.H, 2.0 / 30, rtol=0, atol=1e-15)

    def test_er_centering_monte_carlo(self):
        # >= 10^6 off-diagonal entries; mean within 4 standard errors of 0
        spec = ens.EnsembleSpec(N=1500, beta=0.25)
        s = ens.sample(spec, 2024)
        iu = np.triu_indices(spec.N, 1)
        x = s.H[iu]
        assert x.size >= 10**6
        se = math.sqrt(1.0 / spec.N / x.size)
        assert abs(x.mean()) <= 4 * se

    @pytest.mark.parametrize("law", ["ErdosRenyi", "SignedBernoulli"])
    def test_variance_monte_carlo(self, law):
        spec = ens.EnsembleSpec(N=1500, beta=0.25, law=law)
        mom = ens.entry_moments(spec)
        x = ens.sample(spec, 99).H[np.triu_indices(spec.N, 1)]
        sq = x * x
        se = math.sqrt((mom.m4 - mom.m2**2) / sq.size)
        assert abs(sq.mean() - 1.0 / spec.N) <= 5 * se


class TestMoments:
    def test_signed_bernoulli_closed_forms(self):
        spec = ens.EnsembleSpec(N=500, beta=0.3, law="SignedBernoulli")
        m = ens.entry_moments(spec, 8)
        N, q = spec.N, spec.q
        assert m.abs_moments[3] == pytest.approx(1 / (N * q), rel=1e-13)
        assert m.cumulants[3] == 0.0
        assert m.m2 == pytest.approx(1 / N, rel=1e-13)

    def test_er_fourth_moment_oracle(self):
        spec = ens.EnsembleSpec(N=800, beta=0.2)
        N, p = spec.N, spec.p
        m = ens.entry_moments(spec)
        # independent route: exact Fraction arithmetic on a rationalised p
        pf = Fraction(p).limit_denominator(10**12)
        c4 = _bernoulli_central_moment(pf, 4) / (pf * (1 - pf) * N) ** 2
        assert m.m4 == pytest.approx(float(c4), rel=1e-9)
        assert m.m4 == pytest.approx((1 - 3 * p + 3 * p * p) / (N * N * p * (1 - p)), rel=1e-12)
        assert m.m2 == pytest.approx(1 / N, rel=1e-13)

    @pytest.mark.parametrize("law", ["ErdosRenyi", "SignedBernoulli"])
    def test_cumulants_match_point_law(self, law):
        # oracle: raw moments of the explicit point law, then the closed-form k2/k4 expressions
        spec = ens.EnsembleSpec(N=300, beta=0.3, law=law)
        m = ens.entry_moments(spec, 6)
        if law == "ErdosRenyi":
            p = spec.p
            s = math.sqrt(p * (1 - p) * spec.N)
            pts, w = np.array([(1 - p) / s, -p / s]), np.array([p, 1 - p])
        else:
            a, h = 1 / spec.q, spec.p / 2
            pts, w = np.array([a, -a, 0.0]), np.array([h, h, 1 - 2 * h])
        mu = [float(w @ pts**k) for k in range(7)]
        k2 = mu[2]
        k4 = mu[4] - 4 * mu[3] * mu[1] - 3 * mu[2] ** 2 + 12 * mu[2] * mu[1] ** 2 - 6 * mu[1] ** 4
        assert m.cumulants[2] == pytest.approx(k2, rel=1e-12)
        assert m.cumulants[4] == pytest.approx(k4, rel=1e-9)

    @pytest.mark.parametrize("law", ["ErdosRenyi", "SignedBernoulli"])
    def test_cumulant_bound(self, law):
        # |C_k| <= C_k / (N q^(k-2)) with explicit per-law constants, k <= 8
        for N in (200, 2000, 20000):
            spec = ens.EnsembleSpec(N=N, beta=0.3, law=law)
            m = ens.entry_moments(spec, 8)
            for k in range(3, 9):
                ck = 2.0 ** (k + 2)
                assert abs(m.cumulants[k]) <= ck / (N * spec.q ** (k - 2))

    def test_abs_moment_scaling(self):
        for law in ("ErdosRenyi", "SignedBernoulli"):
            spec = ens.EnsembleSpec(N=5000, beta=0.3, law=law)
            m = ens.entry_moments(spec, 8)
            for k in range(3, 9):
                r = m.abs_moments[k] * spec.N * spec.q ** (k - 2)
                assert 0.25 <= r <= 4.0


class TestH2AndExponents:
    def test_h2_trivial(self):
        assert ens.h2_statistic(np.zeros((5, 5))) == -1.0
        H = np.eye(7)
        assert ens.h2_statistic(H) == 0.0

    def test_exponents_examples(self):
        assert ens.exponents(0.2, 0.0)[0] == pytest.approx(0.2)
        z, d, x = ens.exponents(0.3, 0.5)
        assert (d, x) == (pytest.approx(0.2), pytest.approx(0.025))
        z, d, x = ens.exponents(0.25, 0.0)
        assert (d, x) == (pytest.approx(0.25), 0.0)

    @pytest.mark.parametrize("beta,alpha", [(0.0, 0.5), (0.5, 0.5), (0.2, -0.1), (0.2, 1.1)])
    def test_exponents_domain(self, beta, alpha):
        with pytest.raises(DomainError):
            ens.exponents(beta, alpha)

    @given(st.floats(0.01, 0.49), st.floats(0.0, 1.0))
    def test_exponent_relations(self, beta, alpha):
        z, d, x = ens.exponents(beta, alpha)
        assert 0 <= x <= d / 8 + 1e-15 and d <= z + 1e-15


class TestMatrixIO:
    def test_round_trip(self, tmp_path):
        M = ens.sample(ens.EnsembleSpec(N=9, beta=0.3), 1).A
        ens.dump_matrix(M, tmp_path / "m.bin")
        raw = (tmp_path / "m.bin").read_bytes()
        assert raw[:8] == ens.MATRIX_MAGIC and len(raw) == 8 + 81 * 8
        assert np.array_equal(ens.load_matrix(tmp_path / "m.bin"), M)

    def test_bad_header(self, tmp_path):
        (tmp_path / "x.bin").write_bytes(b"NOTMAGIC" + bytes(8))
        with pytest.raises(ValueError):
            ens.load_matrix(tmp_path / "x.bin")


@settings(max_examples=25, deadline=None)
@given(st.integers(2, 40), st.floats(0.05, 0.45), st.sampled_from(["ErdosRenyi", "SignedBernoulli"]),
       st.integers(0, 2**64 - 1))
def test_sample_properties(N, beta, law, seed):
    try:
        spec = ens.EnsembleSpec(N=N, beta=beta, law=law)
    except ConfigurationError:
        return
    s = ens.sample(spec, seed)
    assert np.array_equal(s.H, s.H.T)
    assert np.array_equal(s.H, ens.sample(spec, seed).H)

import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bkmonitor import (Distribution, FactoredBelief, FactoredProcess, MixingReport, analyze,
                       cluster_mixing_rate, compound_mixing_bound, contraction_decompose,
                       doeblin_coefficient, kl_divergence, mixing_rate, verify_fact1, verify_theorem3,
                       verify_theorem45)
from bkmonitor.contraction import random_stochastic, sweep_fact1, sweep_theorem3, sweep_theorem45
from bkmonitor.metrics import random_distribution
from bkmonitor.synthetic import flip_process

from conftest import brute_mixing_rate


def flip(delta):
    return np.array([[1 - delta, delta], [delta, 1 - delta]])


class TestMixingRate:
    def test_identity(self):
        assert mixing_rate(np.eye(2)) == 0

    @pytest.mark.parametrize("delta", [0.01, 0.1, 0.25, 0.5])
    def test_flip_is_two_delta(self, delta):
        assert mixing_rate(flip(delta)) == pytest.approx(2 * delta, abs=1e-12)

    def test_single_row_and_identical_rows(self):
        assert mixing_rate([[0.2, 0.8]]) == 1
        assert mixing_rate([[0.2, 0.8], [0.2, 0.8]]) == pytest.approx(1)

    def test_two_flip_joint(self):
        g = mixing_rate(flip_process(2, 0.1).transition)
        assert g == pytest.approx(brute_mixing_rate(flip_process(2, 0.1).transition.rows), abs=1e-15)
        assert g == pytest.approx(0.2, abs=1e-12)
        assert g <= (4 * 0.1) ** (2 / 2)

    def test_matches_brute_force(self, rng):
        for _ in range(200):
            n, m = rng.integers(1, 7, size=2)
            q = random_stochastic(rng, n, m)
            assert mixing_rate(q) == pytest.approx(brute_mixing_rate(q), abs=1e-14)

    @settings(max_examples=100)
    @given(st.integers(0, 2 ** 32 - 1))
    def test_permutation_invariant(self, seed):
        rng = np.random.default_rng(seed)
        n, m = rng.integers(2, 6, size=2)
        q = random_stochastic(rng, n, m)
        perm = q[rng.permutation(n)][:, rng.permutation(m)]
        assert mixing_rate(perm) == pytest.approx(mixing_rate(q), abs=1e-14)

    def test_doeblin_is_lower_bound(self, rng):
        for _ in range(1000):
            n, m = rng.integers(2, 7, size=2)
            q = random_stochastic(rng, n, m)
            assert doeblin_coefficient(q) <= mixing_rate(q) + 1e-12


class TestClusterMixingRate:
    def test_uniform_cpt(self):
        m = FactoredProcess([("A", 3)], {"A": (["A"], np.full((3, 3), 1 / 3))})
        assert cluster_mixing_rate(m, 0) == pytest.approx(1.0)

    def test_self_flip(self):
        assert cluster_mixing_rate(flip_process(1, 0.15), 0) == pytest.approx(0.3, abs=1e-12)

    def test_two_variables_distinct_parents(self, rng):
        ta = np.stack([random_distribution(rng, 2) for _ in range(6)])   # A <- A B
        tb = np.stack([random_distribution(rng, 3) for _ in range(6)])   # B <- B C
        tc = np.stack([random_distribution(rng, 2) for _ in range(2)])   # C <- C
        m = FactoredProcess([("A", 2), ("B", 3), ("C", 2)],
                            {"A": (["A", "B"], ta), "B": (["B", "C"], tb), "C": (["C"], tc)},
                            clusters=[("ab", ["A", "B"]), ("c", ["C"])])
        # anterior: (A, B, C) assignments; ulterior: (A', B')
        rows = []
        for a, b, c in itertools.product(range(2), range(3), range(2)):
            rows.append([ta[a * 3 + b, a2] * tb[b * 2 + c, b2]
                         for a2, b2 in itertools.product(range(2), range(3))])
        assert cluster_mixing_rate(m, 0) == pytest.approx(brute_mixing_rate(rows), abs=1e-14)
        assert cluster_mixing_rate(m, 1) == pytest.approx(brute_mixing_rate(tc), abs=1e-14)


class TestCompoundBound:
    def test_values(self):
        assert compound_mixing_bound(0.00040, 2, 2) == pytest.approx(4e-8, rel=1e-12)
        assert compound_mixing_bound(0.0022, 3, 3) == pytest.approx(0.0022 ** 3 / 27, rel=1e-12)
        assert compound_mixing_bound(0.37, 1, 1) == 0.37

    @pytest.mark.parametrize("args", [(1.5, 1, 1), (0.5, 0, 1), (0.5, 1, 0)])
    def test_invalid(self, args):
        with pytest.raises(ValueError):
            compound_mixing_bound(*args)


class TestAnalyze:
    def test_reported_vectors(self):
        r = MixingReport.from_rates([0.00040, 0.0081], 2, 2)
        assert r.gamma_min == 0.00040
        assert r.gamma_star == pytest.approx(4e-8, rel=1e-12)
        r = MixingReport.from_rates([0.00077, 0.080, 0.0081, 0.96], 3, 2)
        assert r.gamma_star == pytest.approx(6.588e-8, rel=1e-3)

    def test_uniform_independent(self):
        m = FactoredProcess([("A", 2), ("B", 3)],
                            {"A": (["A"], np.full((2, 2), 0.5)), "B": (["B"], np.full((3, 3), 1 / 3))})
        r = analyze(m)
        assert r.gammas == pytest.approx((1.0, 1.0))
        assert r.gamma_star == pytest.approx(1.0)

    def test_flip_model(self):
        r = analyze(flip_process(2, 0.1))
        assert r.gammas == pytest.approx((0.2, 0.2), abs=1e-12)
        assert (r.r, r.q) == (1, 1)

    def test_invariants(self, corpus_model):
        r = analyze(corpus_model)
        assert all(0 <= g <= 1 for g in r.gammas)
        assert r.gamma_star <= r.gamma_min


class TestDecomposition:
    def test_identical_rows(self):
        q = np.array([[0.3, 0.7], [0.3, 0.7]])
        d = contraction_decompose(q, 1.0)
        np.testing.assert_allclose(d.q_gamma, q, atol=1e-15)
        np.testing.assert_allclose(d.q_delta, 0, atol=1e-15)

    def test_flip(self):
        d = contraction_decompose(flip(0.1), 0.2)
        np.testing.assert_allclose(d.q_gamma, [[0.1, 0.1], [0.1, 0.1]], atol=1e-15)
        np.testing.assert_allclose(d.q_delta, [[0.8, 0], [0, 0.8]], atol=1e-15)

    @pytest.mark.parametrize("gamma", [0.1, 0.5, 1.0])
    def test_identity_has_none(self, gamma):
        with pytest.raises(ValueError):
            contraction_decompose(np.eye(3), gamma)

    def test_out_of_range(self):
        with pytest.raises(ValueError):
            contraction_decompose(flip(0.1), 0.3)
        with pytest.raises(ValueError):
            contraction_decompose(flip(0.1), 0.0)

    def test_invariants(self, rng):
        for _ in range(300):
            n, m = rng.integers(2, 6, size=2)
            q = random_stochastic(rng, n, m)
            gamma = doeblin_coefficient(q) * rng.uniform(0.01, 1.0)
            d = contraction_decompose(q, gamma)
            np.testing.assert_allclose(d.q_gamma + d.q_delta, q, atol=1e-12)
            assert d.q_gamma.min() >= 0 and d.q_delta.min() >= 0
            np.testing.assert_allclose(d.q_gamma.sum(axis=1), gamma, atol=1e-12)
            phi, psi = random_distribution(rng, n), random_distribution(rng, n)
            np.testing.assert_allclose(phi @ d.q_gamma, psi @ d.q_gamma, atol=1e-12)


class TestTheorem3:
    def test_equal_inputs(self):
        c = verify_theorem3(flip(0.1), [0.3, 0.7], [0.3, 0.7])
        assert c == (0.0, 0.0, True)

    def test_point_masses_vacuous(self):
        c = verify_theorem3(flip(0.1), [1, 0], [0, 1])
        assert c.lhs == pytest.approx(0.8 * math.log(9), rel=1e-14)
        assert c.lhs == pytest.approx(1.757780, abs=5e-7)
        assert c.rhs == math.inf and c.holds

    def test_data_processing(self, rng):
        for _ in range(500):
            n, m = rng.integers(2, 7, size=2)
            q = random_stochastic(rng, n, m)
            p, s = random_distribution(rng, n), random_distribution(rng, n)
            assert kl_divergence(p @ q, s @ q) <= kl_divergence(p, s) + 1e-12

    def test_sweep(self):
        assert sweep_theorem3(300, seed=11).holds


class TestTheorem45:
    def test_equal_product(self):
        m = flip_process(2, 0.1)
        psi = FactoredBelief(m.space, m.clusters, [[0.3, 0.7], [0.6, 0.4]])
        phi = Distribution(m.space, np.kron([0.3, 0.7], [0.6, 0.4]))
        c = verify_theorem45(m, phi, psi)
        assert c.lhs == pytest.approx(0.0, abs=1e-15) and c.holds

    def test_point_vs_uniform(self):
        m = flip_process(2, 0.1)
        phi = Distribution.point(m.space, 0)
        psi = FactoredBelief(m.space, m.clusters, [[0.5, 0.5], [0.5, 0.5]])
        c = verify_theorem45(m, phi, psi)
        # phi' = (0.81, 0.09, 0.09, 0.01), psi' uniform, D[phi||psi] = ln 4
        expected = sum(x * math.log(x / 0.25) for x in (0.81, 0.09, 0.09, 0.01))
        assert c.lhs == pytest.approx(expected, rel=1e-12)
        assert c.rhs == pytest.approx(0.8 * math.log(4), rel=1e-12)
        assert c.holds

    def test_requires_product_form(self):
        m = flip_process(2, 0.1)
        with pytest.raises(TypeError):
            verify_theorem45(m, Distribution.uniform(m.space), Distribution.uniform(m.space))

    def test_sweeps(self):
        assert sweep_theorem45(200, seed=5, coupled=False).holds
        assert sweep_theorem45(200, seed=5, coupled=True).holds


class TestFact1:
    def test_uninformative(self, rng):
        o = np.tile(random_distribution(rng, 3), (4, 1))
        s, sh = random_distribution(rng, 4), random_distribution(rng, 4)
        c = verify_fact1(o, s, sh)
        assert c.expected_post_kl == pytest.approx(c.prior_kl, rel=1e-12)
        assert c.holds

    def test_equal(self):
        c = verify_fact1([[0.8, 0.2], [0.3, 0.7]], [0.4, 0.6], [0.4, 0.6])
        assert c == (0.0, 0.0, True)

    def test_chain_rule_gap(self, rng):
        # the gap is exactly D[rho || rho_hat]
        for _ in range(200):
            o = random_stochastic(rng, 4, 3)
            s, sh = random_distribution(rng, 4), random_distribution(rng, 4)
            c = verify_fact1(o, s, sh)
            assert c.prior_kl - c.expected_post_kl == pytest.approx(kl_divergence(s @ o, sh @ o), abs=1e-12)

    def test_sweep(self):
        assert sweep_fact1(300, seed=9).holds

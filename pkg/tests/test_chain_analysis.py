import json
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fusion_walk import chain_analysis as ca
from fusion_walk import multiplicity_graph as mg
from fusion_walk.verify import primes_up_to, random_weights

F = Fraction
PRIMES = primes_up_to(31, 5)


def exact_stationary(entries, states):
    """Solve pi Q = pi, sum pi = 1 on ``states`` by exact Gaussian elimination."""
    idx = [s - 1 for s in states]
    k = len(idx)
    # Rows: (Q^T - I) restricted, plus normalisation.
    rows = [[entries[j, i] - (1 if i == j else 0) for j in idx] + [F(0)] for i in idx]
    rows[-1] = [F(1)] * k + [F(1)]
    for col in range(k):
        pivot = next(r for r in range(col, k) if rows[r][col] != 0)
        rows[col], rows[pivot] = rows[pivot], rows[col]
        inv = 1 / rows[col][col]
        rows[col] = [x * inv for x in rows[col]]
        for r in range(k):
            if r != col and rows[r][col] != 0:
                f = rows[r][col]
                rows[r] = [x - f * y for x, y in zip(rows[r], rows[col])]
    return {s: rows[t][k] for t, s in enumerate(states)}


def weightings(p):
    return [ca.WeightFunction.uniform(p), ca.WeightFunction.dimension(p)] + [random_weights(p, s) for s in range(3)]


class TestWeights:
    def test_named(self):
        assert ca.WeightFunction.uniform(7).symmetric
        assert not ca.WeightFunction.dimension(7).symmetric
        assert ca.WeightFunction.dimension(7)(5) == 5

    def test_rejects_nonpositive(self):
        with pytest.raises(ValueError):
            ca.WeightFunction(5, (F(1), F(0), F(1), F(1)))
        with pytest.raises(ValueError):
            ca.WeightFunction(5, (F(1),) * 3)

    def test_parse(self):
        w = ca.WeightFunction.parse(5, "# weights\n1 1/2\n2 3\n\n3 3/1  # same\n4 1/2\n")
        assert w.values == (F(1, 2), F(3), F(3), F(1, 2))
        assert w.symmetric

    @pytest.mark.parametrize(
        "text", ["1 1\n2 1\n3 1\n", "1 1\n2 1\n3 1\n4 1\n5 1\n", "1 1\n1 2\n2 1\n3 1\n4 1\n", "1 x\n2 1\n3 1\n4 1\n", "1 1 1\n"]
    )
    def test_parse_errors(self, text):
        with pytest.raises(ValueError):
            ca.WeightFunction.parse(5, text)

    def test_format_fraction(self):
        assert ca.format_fraction(F(3)) == "3/1"
        assert ca.format_fraction(F(2, 4)) == "1/2"


class TestTransition:
    def test_reflecting_walk(self):
        q = ca.build_transition(7, 2, ca.WeightFunction.uniform(7))
        assert q.row(1) == [0, 1, 0, 0, 0, 0]
        assert q.row(6) == [0, 0, 0, 0, 1, 0]
        for i in range(2, 6):
            assert q.entry(i, i - 1) == q.entry(i, i + 1) == F(1, 2)

    def test_dimension_weights(self):
        q = ca.build_transition(7, 2, ca.WeightFunction.dimension(7))
        assert q.entry(2, 1) == F(1, 4)
        assert q.entry(2, 3) == F(3, 4)

    @pytest.mark.parametrize("p", PRIMES)
    def test_rows_stochastic_and_support(self, p):
        for n in range(2, p - 1):
            a = mg.build_adjacency(p, n).matrix
            for w in (ca.WeightFunction.uniform(p), ca.WeightFunction.dimension(p)):
                q = ca.build_transition(p, n, w)
                assert all(sum(q.row(i)) == 1 for i in range(1, p))
                assert all(isinstance(x, Fraction) for x in q.row(1))
                np.testing.assert_array_equal(q.entries != 0, a != 0)

    @pytest.mark.parametrize("n", [1, 6])
    def test_trivial(self, n):
        with pytest.raises(mg.TrivialChainError, match="trivial chain"):
            ca.build_transition(7, n, ca.WeightFunction.uniform(7))

    def test_lazy(self):
        q = ca.build_transition(7, 4, ca.WeightFunction.uniform(7))
        lq = ca.lazy(q)
        assert lq.is_lazy
        assert lq.entry(1, 1) == F(1, 2)
        assert lq.entry(1, 4) == F(1, 2)
        pi = ca.stationary(7, 4, ca.WeightFunction.uniform(7))[0]
        assert ca.detailed_balance_holds(lq, pi)

    def test_weight_mismatch(self):
        with pytest.raises(ValueError):
            ca.build_transition(7, 2, ca.WeightFunction.uniform(5))


class TestStationary:
    @pytest.mark.parametrize("p", [5, 7, 11, 13, 31])
    def test_n2_uniform(self, p):
        (pi,) = ca.stationary(p, 2, ca.WeightFunction.uniform(p))
        expected = [F(1)] + [F(2)] * (p - 3) + [F(1)]
        assert list(pi.probs) == [x / (2 * (p - 2)) for x in expected]

    def test_p7_n3_uniform_odd_component(self):
        odd, even = ca.stationary(7, 3, ca.WeightFunction.uniform(7))
        assert odd.component == "odd" and even.component == "even"
        assert [odd(i) for i in (1, 3, 5)] == [F(1, 6), F(1, 2), F(1, 3)]
        assert odd.support == (1, 3, 5)
        assert even.support == (2, 4, 6)

    def test_p7_n2_dimension(self):
        (pi,) = ca.stationary(7, 2, ca.WeightFunction.dimension(7))
        assert list(pi.probs) == [F(k, 70) for k in (1, 4, 9, 16, 25, 15)]

    @pytest.mark.parametrize("p", [5, 7, 11, 13])
    def test_against_exact_linear_solve(self, p):
        for n in range(2, p - 1):
            for w in weightings(p):
                q = ca.build_transition(p, n, w)
                for dist in ca.stationary(p, n, w):
                    solved = exact_stationary(q.entries, dist.support)
                    assert all(dist(i) == solved[i] for i in dist.support)

    @pytest.mark.parametrize("p", PRIMES)
    def test_detailed_balance(self, p):
        ws = [ca.WeightFunction.uniform(p), ca.WeightFunction.dimension(p)] + [random_weights(p, s) for s in range(20)]
        for n in range(2, p - 1):
            for w in ws:
                q = ca.build_transition(p, n, w)
                for dist in ca.stationary(p, n, w) + [ca.balanced_stationary(p, n, w)]:
                    assert sum(dist.probs) == 1
                    assert ca.detailed_balance_holds(q, dist)
                    pq = np.array(dist.probs, dtype=object) @ q.entries
                    assert list(pq) == list(dist.probs)

    def test_balanced_mixture(self):
        pi = ca.balanced_stationary(7, 3, ca.WeightFunction.uniform(7))
        assert sum(pi(i) for i in (1, 3, 5)) == F(1, 2)
        assert pi(3) == F(1, 4)


class TestClosedForms:
    def test_uniform_examples(self):
        assert ca.uniform_stationary_closed_form(7, 2, 3) == F(1, 5)
        assert ca.uniform_stationary_closed_form(7, 3, 3) == F(1, 4)
        odd, _ = ca.stationary(7, 3, ca.WeightFunction.uniform(7))
        assert ca.uniform_stationary_closed_form(7, 3, 3) == odd(3) / 2

    def test_dimension_examples(self):
        assert ca.dimension_stationary_closed_form(7, 2, 1) == F(1, 70)
        assert ca.dimension_stationary_closed_form(7, 2, 6) == F(3, 14)

    @pytest.mark.parametrize("p", PRIMES)
    def test_closed_forms_match(self, p):
        u, d = ca.WeightFunction.uniform(p), ca.WeightFunction.dimension(p)
        for n in range(2, p - 1):
            uniform = [ca.uniform_stationary_closed_form(p, n, i) for i in range(1, p)]
            dimension = [ca.dimension_stationary_closed_form(p, n, i) for i in range(1, p)]
            assert sum(uniform[0::2]) == sum(uniform[1::2]) == F(1, 2)
            assert sum(dimension) == 1
            assert tuple(uniform) == ca.balanced_stationary(p, n, u).probs
            assert tuple(dimension) == ca.whole_space_stationary(p, n, d).probs
            q = ca.build_transition(p, n, d)
            assert ca.detailed_balance_holds(q, ca.StationaryDistribution(tuple(dimension), "all"))

    def test_branches_agree_on_boundary(self):
        p = 13
        for n in range(2, p - 1):
            i = p - n
            assert F(6 * i * i, p * (p - n) * (2 * p - n)) == F(6 * i * (p - i), n * p * (2 * p - n))


class TestClassification:
    @pytest.mark.parametrize(
        "p,n,expected",
        [
            (7, 3, ca.Classification.TWO_COMPONENTS_APERIODIC),
            (7, 4, ca.Classification.IRREDUCIBLE_PERIOD_2),
            (11, 6, ca.Classification.IRREDUCIBLE_PERIOD_2),
        ],
    )
    def test_examples(self, p, n, expected):
        assert ca.classify_chain(p, n) is expected

    def test_all(self):
        for p in PRIMES:
            for n in range(2, p - 1):
                expected = ca.Classification.TWO_COMPONENTS_APERIODIC if n % 2 else ca.Classification.IRREDUCIBLE_PERIOD_2
                assert ca.classify_chain(p, n) is expected


class TestSymmetricStructure:
    @pytest.mark.parametrize("p", [5, 7, 11, 13])
    def test_duality_and_kronecker(self, p):
        t = mg.antidiagonal(p).astype(object)
        for n in range(2, p - 1):
            for w in (ca.WeightFunction.uniform(p), random_weights(p, 1, symmetric=True)):
                q = ca.build_transition(p, n, w).entries
                assert (t @ q @ t == q).all()
                assert (t @ ca.build_transition(p, p - n, w).entries == q).all()
                qbar = ca.reduced_transition(p, n, w)
                assert (mg.reorder(q, p) == np.kron(mg.swap_power(n).astype(object), qbar)).all()


class TestSpectrum:
    def test_p7_n3(self):
        u = ca.WeightFunction.uniform(7)
        np.testing.assert_allclose(ca.reduced_spectrum(7, 3, u), [1, 1 / 3, -1 / 2], atol=1e-9)
        np.testing.assert_allclose(ca.spectrum(7, 3, u), [1, 1, 1 / 3, 1 / 3, -1 / 2, -1 / 2], atol=1e-9)
        assert ca.lambda_star(7, 3, u) == pytest.approx(0.5, abs=1e-12)

    def test_p7_n4(self):
        values = ca.spectrum(7, 4, ca.WeightFunction.uniform(7))
        np.testing.assert_allclose(values, [1, 1 / 2, 1 / 3, -1 / 3, -1 / 2, -1], atol=1e-9)

    @pytest.mark.parametrize("p", [5, 7, 11, 13])
    def test_matches_unsymmetrised_oracle(self, p):
        for n in range(2, p - 1):
            for w in weightings(p):
                q = ca.build_transition(p, n, w).as_float()
                oracle = np.sort(np.linalg.eigvals(q).real)[::-1]
                np.testing.assert_allclose(ca.spectrum(p, n, w), oracle, atol=1e-8)

    @settings(max_examples=25, deadline=None)
    @given(st.sampled_from(primes_up_to(31, 5)), st.integers(0, 10**6), st.data())
    def test_signed_pairs_for_even_n(self, p, seed, data):
        n = data.draw(st.sampled_from(range(2, p - 1, 2)))
        values = np.array(ca.spectrum(p, n, random_weights(p, seed)))
        np.testing.assert_allclose(np.sort(values), np.sort(-values), atol=1e-9)

    @settings(max_examples=25, deadline=None)
    @given(st.sampled_from(primes_up_to(31, 7)), st.integers(0, 10**6), st.data())
    def test_even_multiplicity_for_odd_n(self, p, seed, data):
        n = data.draw(st.sampled_from(range(3, p - 1, 2)))
        values = np.array(ca.spectrum(p, n, random_weights(p, seed, symmetric=True)))
        np.testing.assert_allclose(values[0::2], values[1::2], atol=1e-9)

    @pytest.mark.parametrize("p", [7, 13, 31])
    def test_residual_and_range(self, p):
        for n in (2, 3, (p - 1) // 2):
            res = ca.spectral_decomposition(p, n, ca.WeightFunction.dimension(p))
            assert res.residual < 1e-8
            assert np.all(np.abs(res.values) <= 1 + 1e-9)
            assert len(res.values) == p - 1

    @pytest.mark.parametrize("p", primes_up_to(31, 5))
    def test_reduced_eigenvalue_set_at_middle(self, p):
        h = (p - 1) // 2
        # 1, -1/2, 1/3, ..., ending at +-2/(p-1)
        expected = sorted((-1) ** k / (k + 1) for k in range(h))
        for n in (h, h + 1):
            values = sorted(ca.reduced_spectrum(p, n, ca.WeightFunction.uniform(p)))
            np.testing.assert_allclose(values, expected, atol=1e-9)


class TestMixingBound:
    def test_p7_n3(self):
        u = ca.WeightFunction.uniform(7)
        # Whole-space min pi is 1/12, half the odd-component minimum.
        assert ca.mixing_bound(7, 3, u, 0.01) == pytest.approx(2 * math.log(1200), abs=1e-9)

    def test_monotone_in_eps(self):
        u = ca.WeightFunction.uniform(11)
        bounds = [ca.mixing_bound(11, 4, u, e) for e in (0.001, 0.01, 0.1, 0.5, 0.999)]
        assert bounds == sorted(bounds, reverse=True)
        limit = math.log(1 / float(min(ca.balanced_stationary(11, 4, u).probs))) / (1 - ca.lambda_star(11, 4, u))
        assert bounds[-1] == pytest.approx(limit, rel=1e-2)
        assert bounds[-1] > 0

    def test_asymmetric_weights_rejected(self):
        with pytest.raises(ca.AsymmetricWeightsError, match="simulator"):
            ca.mixing_bound(7, 3, ca.WeightFunction.dimension(7), 0.1)
        with pytest.raises(ca.AsymmetricWeightsError):
            ca.lambda_star(7, 3, ca.WeightFunction.dimension(7))

    @pytest.mark.parametrize("eps", [0, 1, -0.5])
    def test_eps_range(self, eps):
        with pytest.raises(ValueError):
            ca.mixing_bound(7, 3, ca.WeightFunction.uniform(7), eps)

    def test_report_agrees(self):
        u = ca.WeightFunction.uniform(13)
        for n in (4, 5):
            report = ca.chain_report(13, n, u, eps=(0.05,))
            assert report.mixing_bound(0.05) == pytest.approx(ca.mixing_bound(13, n, u, 0.05), abs=1e-12)
            assert report.mixing_bound_at[0.05] == pytest.approx(ca.mixing_bound(13, n, u, 0.05), abs=1e-12)


class TestReport:
    def test_schema(self):
        d = ca.chain_report(7, 3, ca.WeightFunction.uniform(7)).to_dict()
        json.dumps(d)
        assert d["classification"] == "two-components-aperiodic"
        assert d["components"] == [[1, 3, 5], [2, 4, 6]]
        assert [s["component"] for s in d["stationary"]] == ["odd", "even"]
        assert d["stationary"][0]["support"] == [1, 3, 5]
        assert d["stationary"][0]["probs"][0] == "1/6"
        assert len(d["spectrum"]) == 6
        assert d["lambda_star"] == pytest.approx(0.5)
        assert set(d["mixing_bound_at"]) == {"0.25", "0.01"}

    def test_asymmetric_report(self):
        report = ca.chain_report(7, 4, ca.WeightFunction.dimension(7))
        assert report.lambda_star is None and report.mixing_bound_at == {}
        with pytest.raises(ca.AsymmetricWeightsError):
            report.mixing_bound(0.1)

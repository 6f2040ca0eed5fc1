"""Exhaustive invariant checks over all primes up to a bound."""

from __future__ import annotations

import math
import random
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import permutations
from typing import Callable, Iterator

import numpy as np

from . import chain_analysis as ca
from . import multiplicity_graph as mg
from .tensor_core import P, V, clebsch_gordan, composition_factors_of_tensor, divides, is_prime

__all__ = ["CheckResult", "SUITES", "primes_up_to", "random_weights", "run_suites"]

RANDOM_WEIGHTINGS = 20
EIGEN_TOL = 1e-9


def primes_up_to(bound: int, start: int = 2) -> list[int]:
    return [q for q in range(start, bound + 1) if is_prime(q)]


def random_weights(p: int, seed: int, *, symmetric: bool = False) -> ca.WeightFunction:
    rng = random.Random(f"{p}:{seed}")
    values = [Fraction(rng.randint(1, 50), rng.randint(1, 50)) for _ in range(1, p)]
    if symmetric:
        values = [values[min(i, p - i) - 1] for i in range(1, p)]
    return ca.WeightFunction(p, tuple(values), f"random-{seed}")


@dataclass
class CheckResult:
    suite: str
    name: str
    primes: list[int] = field(default_factory=list)
    failures: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.failures


# Each check yields failure descriptions for one prime; silence means pass.
Check = Callable[[int], Iterator[str]]


def _cg_dimension(p: int) -> Iterator[str]:
    for a in range(1, p + 1):
        for b in range(1, p + 1):
            d = clebsch_gordan(p, a, b)
            if d.dimension != a * b:
                yield f"p={p} ({a},{b}): dim {d.dimension} != {a * b}"


def _cg_multiplicity(p: int) -> Iterator[str]:
    for a in range(1, p + 1):
        for b in range(1, p + 1):
            counts = Counter(clebsch_gordan(p, a, b).summands)
            repeated = {str(k): v for k, v in counts.items() if v > 1}
            if repeated:
                yield f"p={p} ({a},{b}): repeated summands {repeated}"
            vp_total = counts[V(p)] + counts[P(p)]
            expected = int(p <= a + b - 1 and (a + b - 1 - p) % 2 == 0) + int(a == b == p)
            if vp_total != expected:
                yield f"p={p} ({a},{b}): V{p} multiplicity {vp_total} != {expected}"


def _cg_commutative(p: int) -> Iterator[str]:
    for a in range(1, p + 1):
        for b in range(a + 1, p + 1):
            if clebsch_gordan(p, a, b).summands != clebsch_gordan(p, b, a).summands:
                yield f"p={p}: ({a},{b}) != ({b},{a})"


def _divides_matches_cg(p: int) -> Iterator[str]:
    for i in range(1, p):
        for j in range(1, p):
            simples = set(clebsch_gordan(p, i, j).simples())
            for l in range(1, p):
                if divides(p, l, i, j) != (V(l) in simples):
                    yield f"p={p}: divides({l},{i},{j}) disagrees with decomposition"


def _divides_symmetric(p: int) -> Iterator[str]:
    for l in range(1, p):
        for i in range(1, p):
            for j in range(1, p):
                values = {divides(p, *perm) for perm in permutations((l, i, j))}
                if len(values) != 1:
                    yield f"p={p}: divides not symmetric at {(l, i, j)}"


def _divides_rotation(p: int) -> Iterator[str]:
    for l in range(1, p):
        for i in range(1, p):
            for j in range(1, p):
                if divides(p, l, i, j) != divides(p, l, p - i, p - j):
                    yield f"p={p}: rotation fails at {(l, i, j)}"


def _factor_routes(p: int) -> Iterator[str]:
    for a in range(1, p + 1):
        for b in range(1, p + 1):
            f = composition_factors_of_tensor(p, a, b, "filtration")
            g = composition_factors_of_tensor(p, a, b, "cg")
            if f != g:
                yield f"p={p} ({a},{b}): routes disagree"


def _graphs(p: int):
    return [(n, mg.build_adjacency(p, n).matrix) for n in range(1, p)]


def _adjacency_symmetric(p: int) -> Iterator[str]:
    for n, a in _graphs(p):
        if not np.array_equal(a, a.T):
            yield f"p={p} n={n}: A not symmetric"


def _tat(p: int) -> Iterator[str]:
    t = mg.antidiagonal(p)
    for n, a in _graphs(p):
        if not np.array_equal(t @ a @ t, a):
            yield f"p={p} n={n}: TAT != A"


def _t_relates(p: int) -> Iterator[str]:
    t = mg.antidiagonal(p)
    for n, a in _graphs(p):
        other = mg.build_adjacency(p, p - n).matrix
        if not (np.array_equal(a, t @ other) and np.array_equal(a, other @ t)):
            yield f"p={p} n={n}: A(n) != T A(p-n) or A(p-n) T"


def _kronecker(p: int) -> Iterator[str]:
    for n, a in _graphs(p):
        expected = np.kron(mg.swap_power(n), mg.build_reduced(p, n))
        if not np.array_equal(mg.reorder(a, p), expected):
            yield f"p={p} n={n}: reordered A is not the Kronecker form"


def _degrees(p: int) -> Iterator[str]:
    for n, a in _graphs(p):
        rows = a.sum(axis=1)
        for i in range(1, p):
            if rows[i - 1] != mg.degree(p, n, i):
                yield f"p={p} n={n} i={i}: degree {rows[i - 1]} != {mg.degree(p, n, i)}"
        if rows.sum() != n * (p - n):
            yield f"p={p} n={n}: total degree {rows.sum()} != {n * (p - n)}"


def _reduced(p: int) -> Iterator[str]:
    half = (p - 1) // 2
    for n in range(1, p):
        rbar = mg.build_reduced(p, n)
        for i in range(1, half + 1):
            for j in range(1, half + 1):
                if bool(rbar[i - 1, j - 1]) != mg.reduced_condition(p, n, i, j):
                    yield f"p={p} n={n}: reduced entry ({i},{j}) breaks the closed form"
        if not np.array_equal(rbar, mg.build_reduced(p, p - n)):
            yield f"p={p} n={n}: reduced(n) != reduced(p-n)"
        if not np.array_equal(rbar, rbar.T):
            yield f"p={p} n={n}: reduced matrix not symmetric"
        if 1 < n < p - 1 and len(mg.connected_components(rbar)) != 1:
            yield f"p={p} n={n}: reduced graph disconnected"


def _classification(p: int) -> Iterator[str]:
    odds = tuple(range(1, p, 2))
    evens = tuple(range(2, p, 2))
    for n in range(2, p - 1):
        info = mg.classify_graph(p, n)
        if n % 2:
            ok = (
                set(info.components) == {odds, evens}
                and not info.bipartite
                and (p - 1) // 2 in info.loops
                and (p + 1) // 2 in info.loops
            )
        else:
            ok = (
                info.components == (tuple(range(1, p)),)
                and info.bipartite
                and set(info.classes) == {odds, evens}
                and not info.loops
            )
        if not ok:
            yield f"p={p} n={n}: classification {info}"
        expected = (
            ca.Classification.TWO_COMPONENTS_APERIODIC if n % 2 else ca.Classification.IRREDUCIBLE_PERIOD_2
        )
        if ca.classify_chain(p, n) is not expected:
            yield f"p={p} n={n}: chain classification wrong"


def _projective_free_rotation(p: int) -> Iterator[str]:
    for i in range(1, p):
        for j in range(1, p):
            left = {s.index for s in clebsch_gordan(p, i, j).projective_free()}
            right = {s.index for s in clebsch_gordan(p, p - i, p - j).projective_free()}
            if left != right:
                yield f"p={p}: projective-free parts differ at ({i},{j})"


def _weightings(p: int) -> list[ca.WeightFunction]:
    return [ca.WeightFunction.uniform(p), ca.WeightFunction.dimension(p)] + [
        random_weights(p, s) for s in range(RANDOM_WEIGHTINGS)
    ]


def _detailed_balance(p: int) -> Iterator[str]:
    for w in _weightings(p):
        for n in range(2, p - 1):
            q = ca.build_transition(p, n, w)
            a = mg.build_adjacency(p, n).matrix
            if any(sum(q.row(i)) != 1 for i in range(1, p)):
                yield f"p={p} n={n} {w.name}: row sums"
            if not np.array_equal(q.entries != 0, a != 0):
                yield f"p={p} n={n} {w.name}: support differs from A"
            for pi in ca.stationary(p, n, w) + [ca.whole_space_stationary(p, n, w)]:
                if sum(pi.probs) != 1 or min(pi.probs) < 0:
                    yield f"p={p} n={n} {w.name}: not a distribution"
                if not ca.detailed_balance_holds(q, pi):
                    yield f"p={p} n={n} {w.name}: detailed balance fails"
                pq = [sum(pi.probs[i] * q.entries[i, j] for i in range(p - 1)) for j in range(p - 1)]
                if tuple(pq) != pi.probs:
                    yield f"p={p} n={n} {w.name}: pi Q != pi"


def _closed_forms(p: int) -> Iterator[str]:
    uniform, dimension = ca.WeightFunction.uniform(p), ca.WeightFunction.dimension(p)
    for n in range(2, p - 1):
        balanced = ca.balanced_stationary(p, n, uniform)
        closed = tuple(ca.uniform_stationary_closed_form(p, n, i) for i in range(1, p))
        if closed != balanced.probs:
            yield f"p={p} n={n}: uniform closed form mismatch"
        half = Fraction(1, 2)
        if sum(closed[0::2]) != half or sum(closed[1::2]) != half:
            yield f"p={p} n={n}: uniform parity masses not 1/2"
        dim_closed = tuple(ca.dimension_stationary_closed_form(p, n, i) for i in range(1, p))
        if dim_closed != ca.whole_space_stationary(p, n, dimension).probs or sum(dim_closed) != 1:
            yield f"p={p} n={n}: dimension closed form mismatch"
    n2 = ca.stationary(p, 2, uniform)[0].probs
    expected = tuple(Fraction(1 if i in (1, p - 1) else 2, 2 * (p - 2)) for i in range(1, p))
    if n2 != expected:
        yield f"p={p}: n=2 stationary distribution mismatch"


def _symmetric_structure(p: int) -> Iterator[str]:
    t = mg.antidiagonal(p)
    for w in [ca.WeightFunction.uniform(p)] + [random_weights(p, s, symmetric=True) for s in range(3)]:
        for n in range(2, p - 1):
            q = ca.build_transition(p, n, w).entries
            other = ca.build_transition(p, p - n, w).entries
            if not np.array_equal(t @ q @ t, q):
                yield f"p={p} n={n} {w.name}: TQT != Q"
            if not (np.array_equal(q, t @ other) and np.array_equal(q, other @ t)):
                yield f"p={p} n={n} {w.name}: Q(n) != T Q(p-n)"
            qbar = ca.reduced_transition(p, n, w)
            if not np.array_equal(mg.reorder(q, p), np.kron(mg.swap_power(n), qbar)):
                yield f"p={p} n={n} {w.name}: reordered Q is not the Kronecker form"
            if not np.array_equal(qbar, ca.reduced_transition(p, p - n, w)):
                yield f"p={p} n={n} {w.name}: reduced Q(n) != reduced Q(p-n)"


def _spectral_pairing(p: int) -> Iterator[str]:
    for s in range(RANDOM_WEIGHTINGS):
        for n in range(2, p - 1):
            if n % 2 == 0:
                w = random_weights(p, s)
                values = np.array(ca.spectrum(p, n, w))
                if np.max(np.abs(np.sort(values) + np.sort(values)[::-1])) > EIGEN_TOL:
                    yield f"p={p} n={n} {w.name}: spectrum not closed under negation"
            else:
                w = random_weights(p, s, symmetric=True)
                values = np.sort(ca.spectrum(p, n, w))
                if np.max(np.abs(values[0::2] - values[1::2])) > EIGEN_TOL:
                    yield f"p={p} n={n} {w.name}: eigenvalues not paired"


def _eigen_residual(p: int) -> Iterator[str]:
    for w in [ca.WeightFunction.uniform(p), ca.WeightFunction.dimension(p), random_weights(p, 0)]:
        for n in range(2, p - 1):
            result = ca.spectral_decomposition(p, n, w)
            if result.residual >= 1e-8:
                yield f"p={p} n={n} {w.name}: residual {result.residual:.2e}"
            if np.any(np.abs(result.values) > 1 + EIGEN_TOL):
                yield f"p={p} n={n} {w.name}: eigenvalue outside [-1, 1]"


def _mixing_consistency(p: int) -> Iterator[str]:
    uniform = ca.WeightFunction.uniform(p)
    for n in ((p - 1) // 2, (p + 1) // 2):
        for eps in (0.25, 0.05, 0.01, 1e-4):
            got = ca.mixing_bound(p, n, uniform, eps)
            expected = 2 * math.log((p * p - 1) / (4 * eps))
            if abs(got - expected) > EIGEN_TOL:
                yield f"p={p} n={n} eps={eps}: bound {got} != {expected}"
        half = (p - 1) // 2
        reduced = sorted(ca.reduced_spectrum(p, n, uniform))
        expected_set = sorted([1.0] + [(-1) ** (k + 1) / k for k in range(2, half + 1)])
        if np.max(np.abs(np.array(reduced) - np.array(expected_set))) > EIGEN_TOL:
            yield f"p={p} n={n}: reduced eigenvalues {reduced}"


# suite -> [(check name, check, smallest prime it applies to)]
SUITES: dict[str, list[tuple[str, Check, int]]] = {
    "cg": [
        ("dimension-conservation", _cg_dimension, 2),
        ("multiplicity", _cg_multiplicity, 2),
        ("commutativity", _cg_commutative, 2),
        ("divides-matches-decomposition", _divides_matches_cg, 3),
        ("divides-symmetric", _divides_symmetric, 3),
        ("divides-rotation", _divides_rotation, 3),
        ("factor-routes-agree", _factor_routes, 3),
    ],
    "graph": [
        ("adjacency-symmetric", _adjacency_symmetric, 3),
        ("TAT=A", _tat, 3),
        ("A(n)=TA(p-n)=A(p-n)T", _t_relates, 3),
        ("kronecker-form", _kronecker, 3),
        ("degree-formula", _degrees, 3),
        ("reduced-matrix", _reduced, 3),
        ("classification", _classification, 5),
        ("projective-free-rotation", _projective_free_rotation, 3),
    ],
    "chain": [
        ("detailed-balance", _detailed_balance, 5),
        ("closed-forms", _closed_forms, 5),
        ("symmetric-weight-structure", _symmetric_structure, 5),
        ("spectral-pairing", _spectral_pairing, 5),
        ("eigen-residual", _eigen_residual, 5),
        ("mixing-bound", _mixing_consistency, 5),
    ],
}


def run_suites(max_p: int, suites: list[str] | None = None) -> list[CheckResult]:
    names = list(SUITES) if suites is None else suites
    results = []
    for suite in names:
        for name, check, smallest in SUITES[suite]:
            result = CheckResult(suite, name)
            for p in primes_up_to(max_p, smallest):
                result.primes.append(p)
                result.failures.extend(check(p))
            results.append(result)
    return results

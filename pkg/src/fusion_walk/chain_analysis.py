"""The weighted non-projective summand random walk.

From state ``i`` the walk tensors ``V_i`` with ``V_n`` and moves to a
non-projective summand ``V_j`` with probability proportional to ``w(j)``.
Transition matrices and stationary distributions are exact
(:class:`fractions.Fraction`); spectra are floating point.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Mapping

import numpy as np

from .linalg import jacobi_eigh
from .multiplicity_graph import (
    build_adjacency,
    check_nontrivial,
    classify_graph,
    reduced_indices,
    two_colouring,
)

__all__ = [
    "WeightFunction",
    "TransitionMatrix",
    "StationaryDistribution",
    "Classification",
    "ChainReport",
    "AsymmetricWeightsError",
    "build_transition",
    "lazy",
    "stationary",
    "whole_space_stationary",
    "balanced_stationary",
    "detailed_balance_holds",
    "uniform_stationary_closed_form",
    "dimension_stationary_closed_form",
    "classify_chain",
    "symmetrize",
    "spectral_decomposition",
    "spectrum",
    "reduced_transition",
    "reduced_spectrum",
    "lambda_star",
    "mixing_bound",
    "chain_report",
    "format_fraction",
    "cut_points",
    "SpectralResult",
]


class AsymmetricWeightsError(ValueError):
    """The mixing bound needs ``w(i) == w(p - i)``; use the simulator instead."""


def format_fraction(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator}"


@dataclass(frozen=True)
class WeightFunction:
    """Positive rational weights on the states ``1..p-1``."""

    p: int
    values: tuple[Fraction, ...]
    name: str = "custom"

    def __post_init__(self) -> None:
        if len(self.values) != self.p - 1:
            raise ValueError(f"need {self.p - 1} weights for p = {self.p}, got {len(self.values)}")
        values = tuple(Fraction(v) for v in self.values)
        for i, v in enumerate(values, start=1):
            if v <= 0:
                raise ValueError(f"weight of state {i} must be positive, got {v}")
        object.__setattr__(self, "values", values)

    def __call__(self, i: int) -> Fraction:
        return self.values[i - 1]

    @property
    def symmetric(self) -> bool:
        return all(self(i) == self(self.p - i) for i in range(1, self.p))

    @classmethod
    def uniform(cls, p: int) -> WeightFunction:
        return cls(p, (Fraction(1),) * (p - 1), "uniform")

    @classmethod
    def dimension(cls, p: int) -> WeightFunction:
        return cls(p, tuple(Fraction(i) for i in range(1, p)), "dimension")

    @classmethod
    def from_mapping(cls, p: int, weights: Mapping[int, Fraction | int | str], name: str = "custom"):
        missing = sorted(set(range(1, p)) - set(weights))
        if missing:
            raise ValueError(f"no weight given for states {missing}")
        extra = sorted(set(weights) - set(range(1, p)))
        if extra:
            raise ValueError(f"states {extra} outside [1, {p - 1}]")
        return cls(p, tuple(Fraction(weights[i]) for i in range(1, p)), name)

    @classmethod
    def parse(cls, p: int, text: str, name: str = "custom") -> WeightFunction:
        """Parse lines ``i num/den`` (blank lines and ``#`` comments ignored)."""
        weights: dict[int, Fraction] = {}
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) != 2:
                raise ValueError(f"line {lineno}: expected 'i num/den', got {raw!r}")
            try:
                state, weight = int(parts[0]), Fraction(parts[1])
            except ValueError as exc:
                raise ValueError(f"line {lineno}: {exc}") from None
            if state in weights:
                raise ValueError(f"line {lineno}: duplicate state {state}")
            weights[state] = weight
        return cls.from_mapping(p, weights, name)


def cut_points(probs) -> tuple[tuple[int, ...], tuple[int, ...]]:
    """Support states of ``probs`` and integer cumulative cut points out of ``2**53``.

    A 53-bit draw ``k`` selects the first support state whose cut point is
    ``>= k``, i.e. ``k / 2**53 <= F_j`` for the exact cumulative probability
    ``F_j``; a draw landing exactly on a boundary goes to the lower state.
    """
    states, cuts, total = [], [], Fraction(0)
    for j, x in enumerate(probs, start=1):
        if x:
            total += x
            states.append(j)
            cuts.append(math.floor(total * 2**53))
    if total != 1:
        raise ValueError(f"probabilities sum to {total}, not 1")
    return tuple(states), tuple(cuts)


def _readonly(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class TransitionMatrix:
    """Exact row-stochastic matrix on ``1..p-1`` (row/column ``k`` is state ``k+1``)."""

    p: int
    n: int
    weights: WeightFunction
    entries: np.ndarray  # dtype=object, Fraction entries
    is_lazy: bool = False

    def entry(self, i: int, j: int) -> Fraction:
        return self.entries[i - 1, j - 1]

    def row(self, i: int) -> list[Fraction]:
        return list(self.entries[i - 1])

    def support(self, i: int) -> list[int]:
        return [j for j in range(1, self.p) if self.entry(i, j)]

    def as_float(self) -> np.ndarray:
        return self.entries.astype(float)

    @cached_property
    def thresholds(self) -> tuple[tuple[tuple[int, ...], tuple[int, ...]], ...]:
        """Per row, the support states and their :func:`cut_points`."""
        return tuple(cut_points(self.row(i)) for i in range(1, self.p))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, TransitionMatrix):
            return NotImplemented
        return (self.p, self.n, self.is_lazy) == (other.p, other.n, other.is_lazy) and bool(
            np.all(self.entries == other.entries)
        )

    __hash__ = None


def build_transition(p: int, n: int, w: WeightFunction) -> TransitionMatrix:
    """``Q[i, j] = w(j) A[i, j] / sum_l w(l) A[i, l]``."""
    check_nontrivial(p, n)
    if w.p != p:
        raise ValueError(f"weights are for p = {w.p}, not {p}")
    a = build_adjacency(p, n)
    q = np.full((p - 1, p - 1), Fraction(0), dtype=object)
    for i in range(1, p):
        nbrs = a.neighbours(i)
        total = sum(w(j) for j in nbrs)
        for j in nbrs:
            q[i - 1, j - 1] = w(j) / total
    return TransitionMatrix(p, n, w, _readonly(q))


def lazy(q: TransitionMatrix) -> TransitionMatrix:
    """The lazy chain ``(I + Q) / 2``."""
    half = Fraction(1, 2)
    entries = q.entries * half
    for k in range(q.p - 1):
        entries[k, k] += half
    return TransitionMatrix(q.p, q.n, q.weights, _readonly(entries), is_lazy=True)


@dataclass(frozen=True)
class StationaryDistribution:
    probs: tuple[Fraction, ...]
    component: str  # "all", "odd" or "even"

    @property
    def support(self) -> tuple[int, ...]:
        return tuple(i for i, x in enumerate(self.probs, start=1) if x)

    def __call__(self, i: int) -> Fraction:
        return self.probs[i - 1]

    def as_float(self) -> np.ndarray:
        return np.array([float(x) for x in self.probs])

    def to_dict(self) -> dict:
        return {
            "component": self.component,
            "support": list(self.support),
            "probs": [format_fraction(x) for x in self.probs],
        }


def _edge_mass(p: int, n: int, w: WeightFunction) -> list[Fraction]:
    # w(i) * sum of w over neighbours of i; detailed balance holds for these.
    a = build_adjacency(p, n)
    return [w(i) * sum(w(j) for j in a.neighbours(i)) for i in range(1, p)]


def whole_space_stationary(p: int, n: int, w: WeightFunction) -> StationaryDistribution:
    """``pi_i = w(i) sum_{i~l} w(l) / C`` with ``C`` the sum of the numerators."""
    check_nontrivial(p, n)
    mass = _edge_mass(p, n, w)
    total = sum(mass)
    return StationaryDistribution(tuple(m / total for m in mass), "all")


def stationary(p: int, n: int, w: WeightFunction) -> list[StationaryDistribution]:
    """One stationary distribution per irreducible component.

    Even ``n`` gives a single distribution on all states; odd ``n`` gives
    one on the odd states and one on the even states.
    """
    check_nontrivial(p, n)
    if n % 2 == 0:
        return [whole_space_stationary(p, n, w)]
    mass = _edge_mass(p, n, w)
    out = []
    for parity, name in ((1, "odd"), (0, "even")):
        part = [m if (i % 2 == parity) else Fraction(0) for i, m in enumerate(mass, start=1)]
        total = sum(part)
        out.append(StationaryDistribution(tuple(x / total for x in part), name))
    return out


def balanced_stationary(p: int, n: int, w: WeightFunction) -> StationaryDistribution:
    """Stationary distribution giving mass 1/2 to each parity class when ``n`` is odd."""
    dists = stationary(p, n, w)
    if len(dists) == 1:
        return dists[0]
    half = Fraction(1, 2)
    return StationaryDistribution(
        tuple(half * (x + y) for x, y in zip(dists[0].probs, dists[1].probs)), "all"
    )


def detailed_balance_holds(q: TransitionMatrix, pi: StationaryDistribution) -> bool:
    flow = np.array(pi.probs, dtype=object)[:, None] * q.entries
    return bool(np.all(flow == flow.T))


def uniform_stationary_closed_form(p: int, n: int, i: int) -> Fraction:
    """``min(i, p-i, n, p-n) / (n (p-n))`` for ``w == 1``."""
    check_nontrivial(p, n)
    return Fraction(min(i, p - i, n, p - n), n * (p - n))


def dimension_stationary_closed_form(p: int, n: int, i: int) -> Fraction:
    """Whole-space stationary probability of ``i`` for ``w(i) = i``."""
    check_nontrivial(p, n)
    if i + n <= p:
        return Fraction(6 * i * i, p * (p - n) * (2 * p - n))
    return Fraction(6 * i * (p - i), n * p * (2 * p - n))


class Classification(str, enum.Enum):
    TWO_COMPONENTS_APERIODIC = "two-components-aperiodic"
    IRREDUCIBLE_PERIOD_2 = "irreducible-period-2"


def classify_chain(p: int, n: int) -> Classification:
    """Classify from the graph: communicating classes and their periods.

    A component of an undirected graph has period 2 exactly when it is
    bipartite, and is aperiodic otherwise.
    """
    info = classify_graph(p, n)
    matrix = build_adjacency(p, n).matrix
    periodic = []
    for comp in info.components:
        idx = np.array(comp) - 1
        periodic.append(two_colouring(matrix[np.ix_(idx, idx)]) is not None)
    if len(info.components) == 2 and not any(periodic):
        return Classification.TWO_COMPONENTS_APERIODIC
    if len(info.components) == 1 and periodic[0]:
        return Classification.IRREDUCIBLE_PERIOD_2
    raise RuntimeError(
        f"unexpected chain structure for p={p}, n={n}: "
        f"{len(info.components)} components, periodic={periodic}"
    )


def symmetrize(entries: np.ndarray, pi: Iterable[Fraction]) -> np.ndarray:
    """``S = D^(1/2) Q D^(-1/2)`` with ``D = diag(pi)``; symmetric when ``Q`` is reversible."""
    pi = list(pi)
    size = len(pi)
    s = np.zeros((size, size))
    for i in range(size):
        for j in range(size):
            if entries[i, j]:
                # pi_i Q_ij is exactly symmetric, so S is symmetric bit-for-bit.
                s[i, j] = float(pi[i] * entries[i, j]) / math.sqrt(float(pi[i]) * float(pi[j]))
    return s


@dataclass(frozen=True, eq=False)
class SpectralResult:
    values: np.ndarray
    vectors: np.ndarray
    symmetric: np.ndarray = field(repr=False)

    @property
    def residual(self) -> float:
        """``max |S v - lambda v|`` over all eigenpairs."""
        return float(np.max(np.abs(self.symmetric @ self.vectors - self.vectors * self.values)))


def spectral_decomposition(p: int, n: int, w: WeightFunction) -> SpectralResult:
    q = build_transition(p, n, w)
    s = symmetrize(q.entries, balanced_stationary(p, n, w).probs)
    values, vectors = jacobi_eigh(s)
    return SpectralResult(values, vectors, s)


def spectrum(p: int, n: int, w: WeightFunction) -> list[float]:
    """All ``p - 1`` eigenvalues of ``Q``, descending."""
    return [float(x) for x in spectral_decomposition(p, n, w).values]


def _require_symmetric(w: WeightFunction) -> None:
    if not w.symmetric:
        raise AsymmetricWeightsError(
            "this needs weights with w(i) == w(p-i); for other weightings "
            "estimate mixing empirically with the simulator"
        )


def reduced_transition(p: int, n: int, w: WeightFunction) -> np.ndarray:
    """The reduced ``(p-1)/2``-square block of ``Q`` (symmetric weights only)."""
    _require_symmetric(w)
    q = build_transition(p, n, w)
    rows, cols = reduced_indices(p, n)
    return q.entries[np.ix_(np.array(rows) - 1, np.array(cols) - 1)].copy()


def reduced_spectrum(p: int, n: int, w: WeightFunction) -> list[float]:
    """Eigenvalues of the reduced chain, descending.

    The reduced chain is reversible with respect to the stationary
    distribution restricted to the odd states.
    """
    qbar = reduced_transition(p, n, w)
    pi = balanced_stationary(p, n, w)
    rows, _ = reduced_indices(p, n)
    values, _ = jacobi_eigh(symmetrize(qbar, [pi(i) for i in rows]))
    return [float(x) for x in values]


def lambda_star(p: int, n: int, w: WeightFunction) -> float:
    """Largest ``|lambda|`` over the reduced eigenvalues other than the unit one."""
    values = reduced_spectrum(p, n, w)
    unit = min(range(len(values)), key=lambda k: abs(values[k] - 1.0))
    rest = [abs(v) for k, v in enumerate(values) if k != unit]
    return max(rest, default=0.0)


def mixing_bound(p: int, n: int, w: WeightFunction, eps: float) -> float:
    """Upper bound ``log(1 / (eps min_i pi_i)) / (1 - lambda_star)`` on ``t_mix(eps)``.

    ``pi`` is the stationary distribution on the whole state space.
    """
    if not 0 < eps < 1:
        raise ValueError(f"eps must lie in (0, 1), got {eps}")
    check_nontrivial(p, n)
    _require_symmetric(w)
    lam = lambda_star(p, n, w)
    pi_min = min(balanced_stationary(p, n, w).probs)
    return math.log(1.0 / (eps * float(pi_min))) / (1.0 - lam)


@dataclass(frozen=True)
class ChainReport:
    p: int
    n: int
    weighting: str
    classification: Classification
    components: tuple[tuple[int, ...], ...]
    stationary: tuple[StationaryDistribution, ...]
    spectrum: tuple[float, ...]
    lambda_star: float | None
    mixing_bound_at: dict[float, float] = field(default_factory=dict)

    def mixing_bound(self, eps: float) -> float:
        if self.lambda_star is None:
            raise AsymmetricWeightsError("mixing bound unavailable for asymmetric weights")
        pi_min = min(min(x for x in d.probs if x) for d in self.stationary)
        if len(self.stationary) == 2:
            pi_min /= 2
        return math.log(1.0 / (eps * float(pi_min))) / (1.0 - self.lambda_star)

    def to_dict(self) -> dict:
        return {
            "p": self.p,
            "n": self.n,
            "weighting": self.weighting,
            "classification": self.classification.value,
            "components": [list(c) for c in self.components],
            "stationary": [d.to_dict() for d in self.stationary],
            "spectrum": list(self.spectrum),
            "lambda_star": self.lambda_star,
            "mixing_bound_at": {repr(float(k)): v for k, v in self.mixing_bound_at.items()},
        }


def chain_report(
    p: int, n: int, w: WeightFunction, eps: Iterable[float] = (0.25, 0.01)
) -> ChainReport:
    classification = classify_chain(p, n)
    lam = lambda_star(p, n, w) if w.symmetric else None
    bounds = {float(e): mixing_bound(p, n, w, e) for e in eps} if lam is not None else {}
    return ChainReport(
        p=p,
        n=n,
        weighting=w.name,
        classification=classification,
        components=classify_graph(p, n).components,
        stationary=tuple(stationary(p, n, w)),
        spectrum=tuple(spectrum(p, n, w)),
        lambda_star=lam,
        mixing_bound_at=bounds,
    )

"""Clebsch-Gordan decompositions of simple SL2(F_p)-modules in characteristic p.

Modules are named by :class:`ModuleLabel`: ``V(i)`` is the simple module of
dimension ``i`` (``1 <= i <= p``) and ``P(i)`` its projective cover.
"""

from __future__ import annotations

import enum
from collections import Counter
from dataclasses import dataclass
from functools import lru_cache
from math import isqrt
from typing import Iterable

__all__ = [
    "Kind",
    "ModuleLabel",
    "V",
    "P",
    "Decomposition",
    "is_prime",
    "check_prime",
    "nm_string",
    "clebsch_gordan",
    "divides",
    "projective_heart",
    "projective_factors",
    "composition_factors_of_vj",
    "composition_factors_of_tensor",
    "format_factors",
]


def is_prime(p: int) -> bool:
    if p < 2:
        return False
    for d in range(2, isqrt(p) + 1):
        if p % d == 0:
            return False
    return True


def check_prime(p: int, *, odd: bool = False) -> int:
    """Validate ``p`` as a prime (trial division), optionally requiring ``p > 2``."""
    if isinstance(p, bool) or not isinstance(p, int):
        raise TypeError(f"p must be an integer, got {type(p).__name__}")
    if not is_prime(p):
        raise ValueError(f"p = {p} is not prime")
    if odd and p == 2:
        raise ValueError("p = 2 is not supported here; need an odd prime")
    return p


def _check_range(name: str, value: int, lo: int, hi: int) -> None:
    if not lo <= value <= hi:
        raise ValueError(f"{name} = {value} outside [{lo}, {hi}]")


class Kind(enum.IntEnum):
    # Ordering matters: simples sort before projectives.
    SIMPLE = 0
    PROJECTIVE = 1


@dataclass(frozen=True, order=True)
class ModuleLabel:
    kind: Kind
    index: int

    def __post_init__(self) -> None:
        if self.index < 1:
            raise ValueError(f"module index must be >= 1, got {self.index}")

    @property
    def is_simple(self) -> bool:
        return self.kind is Kind.SIMPLE

    def dimension(self, p: int) -> int:
        _check_range("index", self.index, 1, p)
        if self.kind is Kind.SIMPLE:
            return self.index
        return p if self.index in (1, p) else 2 * p

    def __str__(self) -> str:
        return f"{'V' if self.kind is Kind.SIMPLE else 'P'}{self.index}"


def V(i: int) -> ModuleLabel:
    return ModuleLabel(Kind.SIMPLE, i)


def P(i: int) -> ModuleLabel:
    return ModuleLabel(Kind.PROJECTIVE, i)


@dataclass(frozen=True)
class Decomposition:
    """Direct-sum decomposition of ``V_a (x) V_b``.

    ``summands`` is kept sorted (simples first, then projectives, each by
    ascending index) so that equal decompositions compare equal.
    """

    p: int
    a: int
    b: int
    summands: tuple[ModuleLabel, ...]

    @property
    def ambient_dim(self) -> int:
        return self.a * self.b

    @property
    def dimension(self) -> int:
        return sum(label.dimension(self.p) for label in self.summands)

    def multiplicity(self, label: ModuleLabel) -> int:
        return self.summands.count(label)

    def simples(self) -> tuple[ModuleLabel, ...]:
        return tuple(s for s in self.summands if s.is_simple)

    def projective_free(self) -> tuple[ModuleLabel, ...]:
        """Non-projective summands; ``V_p`` is projective and is dropped."""
        return tuple(s for s in self.summands if s.is_simple and s.index < self.p)

    def render(self) -> str:
        # V_p only ever occurs as the extra summand of V_p (x) V_p, which is
        # written last.
        extra = [s for s in self.summands if s == V(self.p)]
        rest = [s for s in self.summands if s != V(self.p)]
        return " + ".join(str(s) for s in rest + extra)

    def __str__(self) -> str:
        return f"V{self.a} (x) V{self.b} = {self.render()}"


def nm_string(n: int, m: int) -> tuple[int, ...]:
    """The (n, m)-string ``(n+m-1, n+m-3, ..., n-m+1)``, empty when ``m == 0``."""
    if n < 1 or m < 0:
        raise ValueError(f"need n >= 1 and m >= 0, got ({n}, {m})")
    if n < m:
        raise ValueError(f"need n >= m, got ({n}, {m}); swap the arguments")
    return tuple(range(n + m - 1, n - m, -2))


@lru_cache(maxsize=65536)
def clebsch_gordan(p: int, a: int, b: int) -> Decomposition:
    """Decompose ``V_a (x) V_b`` into indecomposable summands."""
    check_prime(p)
    _check_range("a", a, 1, p)
    _check_range("b", b, 1, p)
    n, m = max(a, b), min(a, b)
    string = set(nm_string(n, m))
    summands = []
    for i in string:
        if i > p:
            continue
        summands.append(P(i) if 2 * p - i in string else V(i))
    if n == m == p:
        summands.append(V(p))
    return Decomposition(p, a, b, tuple(sorted(summands)))


def divides(p: int, l: int, i: int, j: int) -> bool:
    """Whether ``V_l`` is a summand of ``V_i (x) V_j``, for ``l, i, j`` in ``[p-1]``."""
    for name, value in (("l", l), ("i", i), ("j", j)):
        _check_range(name, value, 1, p - 1)
    total = i + j + l
    return total % 2 == 1 and total < 2 * p and l < i + j and i < j + l and j < l + i


def projective_heart(p: int, i: int) -> tuple[ModuleLabel, ...]:
    """Middle Loewy layer ``rad(P_i) / soc(P_i)`` for odd ``p``."""
    check_prime(p, odd=True)
    _check_range("i", i, 1, p)
    if i == p:
        return ()
    if i == 1:
        return (V(p - 2),)
    if i == p - 1:
        return (V(2),)
    return tuple(sorted((V(p - i - 1), V(p - i + 1))))


def projective_factors(p: int, i: int) -> Counter:
    """Composition factors of ``P_i``: head and socle ``V_i`` around the heart."""
    if i == p:
        check_prime(p, odd=True)
        return Counter({V(p): 1})
    factors = Counter(projective_heart(p, i))
    factors[V(i)] += 2
    return factors


def composition_factors_of_vj(p: int, j: int) -> Counter:
    """Composition factors of the polynomial module ``V_j`` for ``1 <= j <= 2p-1``.

    Above ``p`` this uses ``V_{2p-i} = P_i / V_i (+ V_p if i = 1)``.
    """
    check_prime(p, odd=True)
    _check_range("j", j, 1, 2 * p - 1)
    if j <= p:
        return Counter({V(j): 1})
    i = 2 * p - j
    factors = projective_factors(p, i)
    factors[V(i)] -= 1
    if i == 1:
        factors[V(p)] += 1
    return +factors


def _tensor_factors_filtration(p: int, a: int, b: int) -> Counter:
    n, m = max(a, b), min(a, b)
    factors: Counter = Counter()
    for k in range(m):
        factors += composition_factors_of_vj(p, n + m - 1 - 2 * k)
    return factors


def _tensor_factors_cg(p: int, a: int, b: int) -> Counter:
    factors: Counter = Counter()
    for label in clebsch_gordan(p, a, b).summands:
        if label.is_simple:
            factors[label] += 1
        else:
            factors += projective_factors(p, label.index)
    return factors


def composition_factors_of_tensor(p: int, a: int, b: int, route: str = "filtration") -> Counter:
    """Composition factors of ``V_a (x) V_b`` as a ``Counter`` of simple labels.

    ``route="filtration"`` expands the layers ``V_{n+m-1-2k}`` of the standard
    filtration; ``route="cg"`` expands the Clebsch-Gordan summands. The two
    are computed independently and must agree.
    """
    check_prime(p, odd=True)
    _check_range("a", a, 1, p)
    _check_range("b", b, 1, p)
    if route == "filtration":
        return _tensor_factors_filtration(p, a, b)
    if route == "cg":
        return _tensor_factors_cg(p, a, b)
    raise ValueError(f"unknown route {route!r}; expected 'filtration' or 'cg'")


def format_factors(factors: Counter | Iterable[ModuleLabel]) -> str:
    counts = Counter(factors)
    return " + ".join(str(label) for label in sorted(counts.elements()))

"""Multiplicity graphs of tensoring by a fixed simple module.

Vertex ``i`` (1-based, ``1 <= i <= p-1``) is the simple module ``V_i``; there
is an edge ``i -- j`` when ``V_j`` is a summand of ``V_i (x) V_n``.  Matrices
are dense numpy arrays whose row/column ``k`` holds vertex ``k + 1``; every
function taking a vertex takes the 1-based label.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .tensor_core import V, check_prime, clebsch_gordan

__all__ = [
    "MultiplicityGraph",
    "GraphClassification",
    "TrivialChainError",
    "build_adjacency",
    "degree",
    "antidiagonal",
    "reorder_permutation",
    "reorder",
    "swap_power",
    "reduced_indices",
    "reduced_condition",
    "build_reduced",
    "connected_components",
    "two_colouring",
    "classify_graph",
    "to_dot",
    "matrix_to_csv",
]

SWAP = np.array([[0, 1], [1, 0]], dtype=np.int64)


class TrivialChainError(ValueError):
    """Raised for ``n`` in ``{1, p-1}``, where the walk is deterministic."""


def check_nontrivial(p: int, n: int) -> None:
    check_prime(p, odd=True)
    if not 1 <= n <= p - 1:
        raise ValueError(f"n = {n} outside [1, {p - 1}]")
    if n in (1, p - 1):
        raise TrivialChainError(
            f"trivial chain: n = {n} gives a deterministic walk; need 2 <= n <= p-2"
        )


def _frozen(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class MultiplicityGraph:
    p: int
    n: int
    matrix: np.ndarray

    @property
    def vertices(self) -> range:
        return range(1, self.p)

    def entry(self, i: int, j: int) -> int:
        return int(self.matrix[i - 1, j - 1])

    def neighbours(self, i: int) -> list[int]:
        return [int(k) + 1 for k in np.flatnonzero(self.matrix[i - 1])]

    def edges(self) -> list[tuple[int, int]]:
        """Undirected edges ``(i, j)`` with ``i <= j``; ``(i, i)`` is a loop."""
        return [(i, j) for i in self.vertices for j in self.neighbours(i) if i <= j]

    def loops(self) -> list[int]:
        return [i for i in self.vertices if self.entry(i, i)]

    def degrees(self) -> list[int]:
        return [int(x) for x in self.matrix.sum(axis=1)]


@lru_cache(maxsize=1024)
def build_adjacency(p: int, n: int) -> MultiplicityGraph:
    """Adjacency matrix ``A[i, j]`` = multiplicity of ``V_j`` in ``V_i (x) V_n``."""
    check_prime(p, odd=True)
    if not 1 <= n <= p - 1:
        raise ValueError(f"n = {n} outside [1, {p - 1}]")
    a = np.zeros((p - 1, p - 1), dtype=np.int64)
    for i in range(1, p):
        for label in clebsch_gordan(p, i, n).projective_free():
            a[i - 1, label.index - 1] += 1
    return MultiplicityGraph(p, n, _frozen(a))


def degree(p: int, n: int, i: int) -> int:
    """Degree of vertex ``i`` (loops count once): ``min(i, p-i, n, p-n)``."""
    return min(i, p - i, n, p - n)


def antidiagonal(p: int) -> np.ndarray:
    """The order-reversing permutation matrix ``T[i, j] = [i + j = p]``."""
    return np.fliplr(np.eye(p - 1, dtype=np.int64))


def reorder_permutation(p: int) -> tuple[int, ...]:
    """Vertex order ``1, 3, ..., p-2, p-1, p-3, ..., 4, 2``."""
    check_prime(p, odd=True)
    return tuple(range(1, p, 2)) + tuple(range(p - 1, 0, -2))


def reorder(matrix: np.ndarray, p: int) -> np.ndarray:
    """Conjugate ``matrix`` by the permutation of :func:`reorder_permutation`."""
    idx = np.array(reorder_permutation(p)) - 1
    return matrix[np.ix_(idx, idx)]


def swap_power(n: int) -> np.ndarray:
    return np.linalg.matrix_power(SWAP, n + 1)


def reduced_indices(p: int, n: int) -> tuple[list[int], list[int]]:
    """Row and column vertices picked out of ``A`` to form the reduced matrix."""
    half = (p - 1) // 2
    rows = [2 * i - 1 for i in range(1, half + 1)]
    if n % 2:
        cols = rows
    else:
        cols = [p + 1 - 2 * j for j in range(1, half + 1)]
    return rows, cols


def reduced_condition(p: int, n: int, i: int, j: int) -> bool:
    """Closed-form support of the reduced matrix: ``2|i-j| < r < 2(i+j-1) < 2p-r``."""
    r = n if n % 2 else p - n
    return 2 * abs(i - j) < r < 2 * (i + j - 1) < 2 * p - r


def build_reduced(p: int, n: int) -> np.ndarray:
    """The ``(p-1)/2``-square block of the reordered ``A`` that determines it."""
    a = build_adjacency(p, n)
    rows, cols = reduced_indices(p, n)
    return _frozen(a.matrix[np.ix_(np.array(rows) - 1, np.array(cols) - 1)].copy())


def connected_components(matrix: np.ndarray) -> list[list[int]]:
    """Components by breadth-first search, as sorted 1-based vertex lists."""
    size = len(matrix)
    seen = [False] * size
    components = []
    for start in range(size):
        if seen[start]:
            continue
        seen[start] = True
        queue = deque([start])
        component = []
        while queue:
            u = queue.popleft()
            component.append(u + 1)
            for v in np.flatnonzero(matrix[u]):
                if not seen[v]:
                    seen[v] = True
                    queue.append(int(v))
        components.append(sorted(component))
    return components


def two_colouring(matrix: np.ndarray) -> dict[int, int] | None:
    """A proper 2-colouring ``{vertex: 0 | 1}``, or ``None`` if there is none.

    A loop makes a graph non-bipartite.
    """
    colour: dict[int, int] = {}
    for start in range(len(matrix)):
        if start in colour:
            continue
        colour[start] = 0
        queue = deque([start])
        while queue:
            u = queue.popleft()
            for v in map(int, np.flatnonzero(matrix[u])):
                if v not in colour:
                    colour[v] = 1 - colour[u]
                    queue.append(v)
                elif colour[v] == colour[u]:
                    return None
    return {k + 1: c for k, c in colour.items()}


@dataclass(frozen=True)
class GraphClassification:
    components: tuple[tuple[int, ...], ...]
    bipartite: bool
    loops: tuple[int, ...]
    classes: tuple[tuple[int, ...], ...] | None = None


def classify_graph(p: int, n: int) -> GraphClassification:
    """Components, bipartiteness (by 2-colouring) and loops of the graph."""
    check_nontrivial(p, n)
    g = build_adjacency(p, n)
    colouring = two_colouring(g.matrix)
    classes = None
    if colouring is not None:
        classes = tuple(
            tuple(sorted(v for v, c in colouring.items() if c == side)) for side in (0, 1)
        )
    return GraphClassification(
        components=tuple(tuple(c) for c in connected_components(g.matrix)),
        bipartite=colouring is not None,
        loops=tuple(g.loops()),
        classes=classes,
    )


def to_dot(graph: MultiplicityGraph, *, dimensions: bool = False) -> str:
    lines = [f"graph G_{graph.n} {{", f'  label="p={graph.p}, n={graph.n}";']
    for i in graph.vertices:
        if dimensions:
            lines.append(f'  {i} [label="{i}", xlabel="dim {V(i).dimension(graph.p)}"];')
        else:
            lines.append(f'  {i} [label="{i}"];')
    for i, j in graph.edges():
        lines.append(f"  {i} -- {j};")
    lines.append("}")
    return "\n".join(lines) + "\n"


def matrix_to_csv(matrix: np.ndarray) -> str:
    """CSV with header ``i\\j,1,2,...``; LF line endings, no trailing comma."""
    size = len(matrix)
    rows = ["i\\j," + ",".join(str(j) for j in range(1, size + 1))]
    for i in range(size):
        rows.append(f"{i + 1}," + ",".join(str(int(x)) for x in matrix[i]))
    return "\n".join(rows) + "\n"

"""Cyclic Jacobi eigensolver for real symmetric matrices."""

from __future__ import annotations

import numpy as np

__all__ = ["ConvergenceError", "jacobi_eigh", "off_norm"]


class ConvergenceError(RuntimeError):
    pass


def off_norm(a: np.ndarray) -> float:
    """Frobenius norm of the off-diagonal part."""
    off = a - np.diag(np.diag(a))
    return float(np.sqrt(np.sum(off * off)))


def _round_robin(size: int):
    """Yield ``size - 1`` rounds of disjoint index pairs covering every pair once.

    An odd ``size`` gets a dummy player ``size`` whose pairings are dropped.
    """
    m = size + size % 2
    players = list(range(m))
    for _ in range(m - 1):
        pairs = [(players[k], players[m - 1 - k]) for k in range(m // 2)]
        pairs = [(min(a, b), max(a, b)) for a, b in pairs if a < size and b < size]
        if pairs:
            yield np.array([a for a, _ in pairs]), np.array([b for _, b in pairs])
        players = [players[0], players[-1]] + players[1:-1]


def jacobi_eigh(
    a: np.ndarray, *, tol: float = 1e-12, max_sweeps: int = 100
) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues (descending) and eigenvectors (columns) of a symmetric matrix.

    Each sweep visits every off-diagonal pair once. Pairs within a round are
    disjoint, so their rotations commute and are applied together.  Stops
    when the off-diagonal Frobenius norm drops below ``tol``.

    Raises
    ------
    ConvergenceError
        If ``max_sweeps`` sweeps do not reach ``tol``.
    """
    a = np.array(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    if not np.allclose(a, a.T, rtol=0, atol=1e-12):
        raise ValueError("matrix is not symmetric")
    a = (a + a.T) / 2
    size = len(a)
    vectors = np.eye(size)
    for _ in range(max_sweeps + 1):
        if off_norm(a) < tol:
            break
        for ps, qs in _round_robin(size):
            apq = a[ps, qs]
            active = apq != 0.0
            if not active.any():
                continue
            ps, qs, apq = ps[active], qs[active], apq[active]
            # A negligible apq sends theta to inf and t to 0, a no-op rotation.
            with np.errstate(divide="ignore", over="ignore"):
                theta = (a[qs, qs] - a[ps, ps]) / (2.0 * apq)
                t = np.where(theta >= 0, 1.0, -1.0) / (np.abs(theta) + np.hypot(theta, 1.0))
            c = 1.0 / np.sqrt(t * t + 1.0)
            s = t * c
            row_p, row_q = a[ps, :].copy(), a[qs, :].copy()
            a[ps, :] = c[:, None] * row_p - s[:, None] * row_q
            a[qs, :] = s[:, None] * row_p + c[:, None] * row_q
            col_p, col_q = a[:, ps].copy(), a[:, qs].copy()
            a[:, ps] = col_p * c - col_q * s
            a[:, qs] = col_p * s + col_q * c
            a[ps, qs] = a[qs, ps] = 0.0
            vec_p, vec_q = vectors[:, ps].copy(), vectors[:, qs].copy()
            vectors[:, ps] = vec_p * c - vec_q * s
            vectors[:, qs] = vec_p * s + vec_q * c
    else:
        raise ConvergenceError(
            f"Jacobi did not converge in {max_sweeps} sweeps (off-norm {off_norm(a):.3e})"
        )
    values = np.diag(a).copy()
    order = np.argsort(-values, kind="stable")
    return values[order], vectors[:, order]

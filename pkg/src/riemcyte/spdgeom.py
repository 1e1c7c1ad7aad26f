"""Riemannian geometry of symmetric positive definite matrices.

The SPD cone carries the affine-invariant metric <S1, S2>_P =
Tr(S1 P^-1 S2 P^-1). This module provides the symmetric matrix exponential
and logarithm, the geodesic distance, the exponential and logarithmic maps
at an arbitrary base point, tangent-space vectorization, and the Euclidean
and Frechet (geometric) means. Everything works on plain float64 arrays.
"""

from __future__ import annotations

from typing import NamedTuple, Sequence

import numpy as np

from .errors import (
    DegenerateInputError,
    DimensionMismatchError,
    NonSymmetricError,
    NotPositiveDefiniteError,
)

#: Relative symmetry tolerance for inputs declared symmetric.
SYM_TOL = 1e-12

#: Eigenvalues at or below this are treated as a positive-definiteness failure.
EIG_FLOOR = 1e-12

_SQRT2 = np.sqrt(2.0)


class EigenPair(NamedTuple):
    """Symmetric eigendecomposition, eigenvalues descending."""

    U: np.ndarray
    sigma: np.ndarray


class MeanResult(NamedTuple):
    """Outcome of the geometric-mean fixed-point iteration.

    ``stats`` holds the stopping statistic at the initial guess and after
    every accepted update, so ``len(stats) == n_iter + 1``.
    """

    mean: np.ndarray
    n_iter: int
    converged: bool
    stats: tuple


def _as_square(p) -> np.ndarray:
    p = np.asarray(p, dtype=np.float64)
    if p.ndim != 2 or p.shape[0] != p.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {p.shape}")
    return p


def _symmetrize(a: np.ndarray) -> np.ndarray:
    return (a + a.T) / 2.0


def sym_eig(p) -> EigenPair:
    """Eigendecomposition of a symmetric matrix with a fixed convention.

    Eigenvalues come out descending; each eigenvector is flipped so its
    largest-magnitude entry is positive, which pins the otherwise arbitrary
    signs and keeps downstream coordinates reproducible.

    Raises
    ------
    NonSymmetricError
        If the input is asymmetric beyond a 1e-12 relative tolerance.
    """
    p = _as_square(p)
    scale = max(np.abs(p).max(), 1.0)
    if np.abs(p - p.T).max() > SYM_TOL * scale:
        raise NonSymmetricError("matrix is not symmetric within tolerance")
    sigma, u = np.linalg.eigh(_symmetrize(p))
    order = np.argsort(sigma, kind="stable")[::-1]
    sigma = sigma[order]
    u = u[:, order]
    lead = np.abs(u).argmax(axis=0)
    signs = np.sign(u[lead, np.arange(u.shape[1])])
    signs[signs == 0] = 1.0
    return EigenPair(u * signs, sigma)


def _spd_eig(p) -> EigenPair:
    pair = sym_eig(p)
    if pair.sigma[-1] <= EIG_FLOOR:
        raise NotPositiveDefiniteError(
            f"matrix has eigenvalue {pair.sigma[-1]:.3e} <= {EIG_FLOOR:.0e}"
        )
    return pair


def _rebuild(u: np.ndarray, diag: np.ndarray) -> np.ndarray:
    return _symmetrize((u * diag) @ u.T)


def spd_exp(s) -> np.ndarray:
    """Matrix exponential of a symmetric matrix; the result is SPD."""
    u, sigma = sym_eig(s)
    return _rebuild(u, np.exp(sigma))


def spd_log(p) -> np.ndarray:
    """Matrix logarithm of an SPD matrix.

    Raises
    ------
    NotPositiveDefiniteError
        If any eigenvalue is at or below 1e-12.
    """
    u, sigma = _spd_eig(p)
    return _rebuild(u, np.log(sigma))


def _spd_power(p, exponent: float) -> np.ndarray:
    u, sigma = _spd_eig(p)
    return _rebuild(u, sigma**exponent)


def _check_same_shape(a: np.ndarray, b: np.ndarray) -> None:
    if a.shape != b.shape:
        raise DimensionMismatchError(f"shape mismatch: {a.shape} vs {b.shape}")


def metric_inner(s1, s2, p) -> float:
    """Affine-invariant inner product Tr(S1 P^-1 S2 P^-1) at base point P."""
    s1 = _as_square(s1)
    s2 = _as_square(s2)
    p = _as_square(p)
    _check_same_shape(s1, s2)
    _check_same_shape(s1, p)
    pinv = _spd_power(p, -1.0)
    return float(np.trace(s1 @ pinv @ s2 @ pinv))


def riemann_distance(p1, p2) -> float:
    """Geodesic distance sqrt(sum of log^2 eigenvalues of P1^-1 P2).

    Evaluated through the congruent symmetric form P1^-1/2 P2 P1^-1/2,
    which shares those eigenvalues but keeps the decomposition symmetric.
    """
    p1 = _as_square(p1)
    p2 = _as_square(p2)
    _check_same_shape(p1, p2)
    w = _spd_power(p1, -0.5)
    _, sigma = _spd_eig(_symmetrize(w @ p2 @ w))
    return float(np.sqrt(np.sum(np.log(sigma) ** 2)))


def exp_map(p, s) -> np.ndarray:
    """Riemannian exponential at P: P^1/2 exp(P^-1/2 S P^-1/2) P^1/2."""
    p = _as_square(p)
    s = _as_square(s)
    _check_same_shape(p, s)
    u, sigma = _spd_eig(p)
    r = _rebuild(u, np.sqrt(sigma))
    w = _rebuild(u, sigma**-0.5)
    return _symmetrize(r @ spd_exp(_symmetrize(w @ s @ w)) @ r)


def log_map(p, pi) -> np.ndarray:
    """Riemannian logarithm at P: P^1/2 log(P^-1/2 Pi P^-1/2) P^1/2.

    Inverse of :func:`exp_map` in its second argument.
    """
    p = _as_square(p)
    pi = _as_square(pi)
    _check_same_shape(p, pi)
    u, sigma = _spd_eig(p)
    r = _rebuild(u, np.sqrt(sigma))
    w = _rebuild(u, sigma**-0.5)
    return _symmetrize(r @ spd_log(_symmetrize(w @ pi @ w)) @ r)


def upper_vec(s) -> np.ndarray:
    """Row-major upper-triangular vectorization with sqrt(2) off-diagonals.

    The weighting makes the Euclidean norm of the vector equal the
    Frobenius norm of the matrix, so tangent norms survive flattening.
    """
    s = _as_square(s)
    n = s.shape[0]
    iu, ju = np.triu_indices(n)
    weights = np.where(iu == ju, 1.0, _SQRT2)
    return s[iu, ju] * weights


def unupper_vec(v, n: int) -> np.ndarray:
    """Rebuild the symmetric matrix behind an upper-triangular vector."""
    v = np.asarray(v, dtype=np.float64).ravel()
    m = n * (n + 1) // 2
    if v.shape[0] != m:
        raise DimensionMismatchError(f"vector length {v.shape[0]} != {m} for n = {n}")
    iu, ju = np.triu_indices(n)
    weights = np.where(iu == ju, 1.0, _SQRT2)
    s = np.zeros((n, n))
    s[iu, ju] = v / weights
    s[ju, iu] = s[iu, ju]
    return s


def tangent_coords(p, pi) -> np.ndarray:
    """Tangent coordinates of Pi at base P: upper of log(P^-1/2 Pi P^-1/2).

    The whitening folds the metric into the coordinates, so the plain
    Euclidean norm of the result equals riemann_distance(P, Pi).
    """
    p = _as_square(p)
    pi = _as_square(pi)
    _check_same_shape(p, pi)
    w = _spd_power(p, -0.5)
    return upper_vec(spd_log(_symmetrize(w @ pi @ w)))


def euclidean_mean(ps: Sequence) -> np.ndarray:
    """Arithmetic average of the input matrices."""
    mats = [_as_square(p) for p in ps]
    if not mats:
        raise DegenerateInputError("cannot average an empty set of matrices")
    for m in mats[1:]:
        _check_same_shape(mats[0], m)
    return np.mean(mats, axis=0)


def riemannian_mean(ps: Sequence, eps: float = 1e-8, max_iters: int = 50) -> MeanResult:
    """Geometric (Frechet) mean under the affine-invariant metric.

    Fixed-point iteration starting from the arithmetic mean:

        M <- M^1/2 exp[(1/K) sum_k log(M^-1/2 P_k M^-1/2)] M^1/2

    The stopping statistic is the Frobenius norm of sum_k log(P_k^-1 M);
    the product is not symmetric, so its logarithm is taken through the
    similarity log(P_k^-1 M) = W_k log(W_k M W_k) W_k^-1 with
    W_k = P_k^-1/2. Iteration ends once the statistic drops to ``eps`` or
    after ``max_iters`` updates. Non-convergence is reported through the
    flag, never as an exception, and the best iterate seen is returned.
    """
    mats = [_as_square(p) for p in ps]
    if not mats:
        raise DegenerateInputError("cannot average an empty set of matrices")
    for m in mats[1:]:
        _check_same_shape(mats[0], m)
    k = len(mats)
    # Whiteners of the fixed inputs, reused by every statistic evaluation.
    halves = []
    for p in mats:
        u, sigma = _spd_eig(p)
        halves.append((_rebuild(u, sigma**-0.5), _rebuild(u, np.sqrt(sigma))))

    def statistic(m: np.ndarray) -> float:
        acc = np.zeros_like(m)
        for w, r in halves:
            acc += w @ spd_log(_symmetrize(w @ m @ w)) @ r
        return float(np.linalg.norm(acc, "fro"))

    current = euclidean_mean(mats)
    stats = [statistic(current)]
    best = current
    best_stat = stats[0]
    converged = stats[0] <= eps
    n_iter = 0
    while not converged and n_iter < max_iters:
        u, sigma = _spd_eig(current)
        r = _rebuild(u, np.sqrt(sigma))
        w = _rebuild(u, sigma**-0.5)
        step = np.zeros_like(current)
        for p in mats:
            step += spd_log(_symmetrize(w @ p @ w))
        current = _symmetrize(r @ spd_exp(_symmetrize(step / k)) @ r)
        n_iter += 1
        stat = statistic(current)
        stats.append(stat)
        if stat < best_stat:
            best = current
            best_stat = stat
        converged = stat <= eps
    return MeanResult(best, n_iter, converged, tuple(stats))

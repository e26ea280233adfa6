"""Reference numpy implementation of the batched chart kernels."""

import numpy as np


def _lower(c, X):
    if c < 0:
        X = X.copy()
        X[..., 0] *= -1.0
    return X


def chart_points(c, p0, E, A):
    """Exponential chart of W: rows of A (K, j) -> points (K, N)."""
    p0 = np.asarray(p0, dtype=float)
    E = np.asarray(E, dtype=float)
    A = np.atleast_2d(np.asarray(A, dtype=float))
    V = A @ E.T
    s = np.sqrt(np.sum(A * A, axis=1))
    if c == 0:
        return p0[None, :] + V
    k = np.sqrt(abs(c))
    if c > 0:
        ca, sa = np.cos(k * s), np.sin(k * s)
    else:
        ca, sa = np.cosh(k * s), np.sinh(k * s)
    with np.errstate(invalid="ignore", divide="ignore"):
        scale = np.where(s > 0, sa / (k * s), 1.0)
    return ca[:, None] * p0[None, :] + scale[:, None] * V


def chart_log_components(c, q, p0, E, T, A):
    """Unit log directions from q to chart points, paired with a frame at q.

    Returns ``(comps, dist)`` where ``comps[k, i] = <T_i, unit log_q(w_k)>``
    and ``dist[k] = d(q, w_k)`` for ``w_k = chart(A[k])``.
    """
    q = np.asarray(q, dtype=float)
    T = np.asarray(T, dtype=float)
    W = chart_points(c, p0, E, A)
    if c == 0:
        U = W - q[None, :]
        nu = np.sqrt(np.sum(U * U, axis=1))
        dist = nu
    else:
        k = np.sqrt(abs(c))
        qw = _lower(c, W) @ q
        U = W - (c * qw)[:, None] * q[None, :]
        nu = np.sqrt(np.maximum(np.sum(_lower(c, U) * U, axis=1), 0.0))
        if c > 0:
            dist = np.arctan2(k * nu, c * qw) / k
        else:
            dist = np.arcsinh(k * nu) / k
    G = _lower(c, U) @ T
    with np.errstate(invalid="ignore", divide="ignore"):
        comps = np.where(nu[:, None] > 0, G / nu[:, None], 0.0)
    return comps, dist

"""Nonnegative least squares by the Lawson-Hanson active-set method.

Used to pick impulse magnitudes along fixed directions: the passive set never
exceeds the rank of the matrix, which caps the impulse count at the state
dimension for free.
"""

import numpy as np


def nnls(a, b, max_iter=None):
    """Minimize ||a @ x - b|| subject to x >= 0.

    Returns (x, residual_norm). a is (m, n) with m >= 1; the implementation
    is dense and intended for small n.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    m, n = a.shape
    if max_iter is None:
        max_iter = 5 * max(n, 3)
    eps = np.finfo(float).eps
    tol = 10.0 * eps * max(m, n) * max(1.0, float(np.max(np.abs(b), initial=0.0)))
    scale = np.max(np.abs(a), initial=1.0)

    x = np.zeros(n)
    passive = np.zeros(n, dtype=bool)
    resid = b.copy()
    w = a.T @ resid

    for _ in range(max_iter):
        candidates = ~passive
        if not np.any(candidates) or np.max(w[candidates], initial=-np.inf) <= tol * scale:
            break
        j = int(np.argmax(np.where(candidates, w, -np.inf)))
        passive[j] = True

        for _ in range(max_iter):
            idx = np.flatnonzero(passive)
            zp, *_ = np.linalg.lstsq(a[:, idx], b, rcond=None)
            if np.all(zp > 0.0):
                x = np.zeros(n)
                x[idx] = zp
                break
            # step toward zp until the first passive variable hits zero
            mask = zp <= 0.0
            ratios = x[idx][mask] / (x[idx][mask] - zp[mask])
            alpha = float(np.min(ratios))
            x[idx] = x[idx] + alpha * (zp - x[idx])
            drop = idx[x[idx] <= tol]
            passive[drop] = False
            x[drop] = 0.0
        resid = b - a @ x
        w = a.T @ resid

    return x, float(np.linalg.norm(b - a @ x))

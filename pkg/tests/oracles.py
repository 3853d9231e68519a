"""Independent reference solver used to validate the library.

Deliberately self-contained: plain cyclic coordinate descent with its own
duality-gap arithmetic, sharing no code with the package under test.
"""

import numpy as np


def cd_gap(A, b, lam, w):
    """Relative duality gap computed from scratch (no package imports)."""
    res = A @ w - b
    atr = A.T @ res
    f = 0.5 * float(res @ res) + lam * float(np.abs(w).sum())
    corr = float(np.abs(atr).max())
    scale = min(1.0, lam / corr) if corr > 0 else 1.0
    alpha = -scale * res
    d = -0.5 * float((alpha - b) @ (alpha - b)) + 0.5 * float(b @ b)
    return max(0.0, (f - d) / max(f, 1e-30)), f


def cd_lasso(A, b, lam, gap_tol=1e-10, max_sweeps=20000, w0=None):
    """Cyclic coordinate descent on 0.5*||Aw-b||^2 + lam*||w||_1.

    Full sweeps alternate with sweeps restricted to the current support,
    which carries most of the progress once the support settles.  Returns
    (w, primal value, sweeps used).
    """
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float).ravel()
    n = A.shape[1]
    w = np.zeros(n) if w0 is None else np.array(w0, dtype=float)
    colsq = (A * A).sum(axis=0)
    r = b - A @ w

    def sweep(indices):
        for j in indices:
            if colsq[j] == 0.0:
                continue
            wj = w[j]
            rho = float(A[:, j] @ r) + colsq[j] * wj
            wn = np.sign(rho) * max(abs(rho) - lam, 0.0) / colsq[j]
            if wn != wj:
                r[:] += A[:, j] * (wj - wn)
                w[j] = wn

    sweeps = 0
    all_idx = range(n)
    while sweeps < max_sweeps:
        sweep(all_idx)
        sweeps += 1
        support = np.flatnonzero(w)
        for _ in range(20):
            if support.size == 0:
                break
            before = w[support].copy()
            sweep(support)
            sweeps += 1
            if np.abs(w[support] - before).max() < 1e-15:
                break
        gap, f = cd_gap(A, b, lam, w)
        if gap <= gap_tol:
            return w, f, sweeps
    gap, f = cd_gap(A, b, lam, w)
    if gap > gap_tol:
        raise RuntimeError(f"oracle failed to reach gap {gap_tol:g} (at {gap:.2e})")
    return w, f, sweeps

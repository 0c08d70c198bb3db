"""Cyclic Jacobi eigenvalue solver for dense symmetric matrices.

Self-contained so the spectrum can be cross-checked against the Frobenius
shortcut without relying on the same LAPACK route twice.  Intended for the
small dense matrices produced by the toy model; size is capped at 500.
"""

from __future__ import annotations

import numpy as np

from ..errors import ValidationError

MAX_SIZE = 500


def jacobi_eigenvalues(
    matrix: np.ndarray,
    tol: float = 1e-12,
    max_sweeps: int = 100,
) -> np.ndarray:
    """Eigenvalues of a symmetric matrix via cyclic Jacobi rotations.

    Sweeps rotate every (p, q) pair in row order until the off-diagonal
    Frobenius norm falls below ``tol`` relative to the matrix norm.
    Returns the eigenvalues sorted ascending.
    """
    a = np.array(matrix, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValidationError(f"expected a square matrix, got shape {a.shape}")
    n = a.shape[0]
    if n > MAX_SIZE:
        raise ValidationError(f"matrix size {n} exceeds the Jacobi cap of {MAX_SIZE}")
    if not np.allclose(a, a.T, atol=1e-9, rtol=0.0):
        raise ValidationError("matrix is not symmetric within 1e-9")
    a = (a + a.T) / 2.0
    if n == 1:
        return a[0].copy()

    norm = np.sqrt(np.sum(a * a))
    stop = tol * max(norm, 1.0)
    diag_idx = np.diag_indices(n)
    for _ in range(max_sweeps):
        # off-diagonal Frobenius norm, summed directly so tiny residuals are
        # not lost to cancellation against the diagonal mass
        hollow = a.copy()
        hollow[diag_idx] = 0.0
        off = np.sqrt(np.sum(hollow * hollow))
        if off <= stop:
            break
        # rotations below this threshold are deferred to a later sweep
        skip = off / (n * n)
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if abs(apq) <= skip:
                    continue
                tau = (a[q, q] - a[p, p]) / (2.0 * apq)
                if tau >= 0.0:
                    t = 1.0 / (tau + np.hypot(1.0, tau))
                else:
                    t = -1.0 / (-tau + np.hypot(1.0, tau))
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c
                rp = a[p, :].copy()
                rq = a[q, :].copy()
                a[p, :] = c * rp - s * rq
                a[q, :] = s * rp + c * rq
                cp = a[:, p].copy()
                cq = a[:, q].copy()
                a[:, p] = c * cp - s * cq
                a[:, q] = s * cp + c * cq
                # rotation zeroes the (p, q) element exactly by construction
                a[p, q] = 0.0
                a[q, p] = 0.0
    else:
        hollow = a.copy()
        hollow[diag_idx] = 0.0
        off = np.sqrt(np.sum(hollow * hollow))
        if off > stop * 1e3:
            raise ValidationError(
                f"Jacobi failed to converge in {max_sweeps} sweeps "
                f"(off-diagonal norm {off:.3e})"
            )
    return np.sort(np.diag(a).copy())

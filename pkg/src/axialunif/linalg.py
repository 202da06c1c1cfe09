"""Cyclic Jacobi eigensolver for stacks of small symmetric matrices."""
from __future__ import annotations

import numpy as np

from .numerics import NumericalError

__all__ = ["jacobi_eigh"]


def jacobi_eigh(a, *, vectors=True, tol=1e-14, max_sweeps=100):
    """Eigen-decomposition of symmetric matrices by cyclic Jacobi rotations.

    Parameters
    ----------
    a : array_like, shape (..., p, p)
        Symmetric matrix or stack of symmetric matrices.
    vectors : bool
        Accumulate eigenvectors. Skipping them roughly halves the work.
    tol : float
        A matrix is converged once its off-diagonal Frobenius norm falls
        below ``tol * ||A||_F``.
    max_sweeps : int
        Upper bound on full sweeps over all ``(i, j)`` pairs.

    Returns
    -------
    w : ndarray, shape (..., p)
        Eigenvalues in descending order; ties keep the original column order.
    v : ndarray, shape (..., p, p), only if ``vectors``
        Orthonormal eigenvectors, column ``k`` paired with ``w[..., k]``. Each
        column is signed so that its largest-magnitude entry is positive.
    """
    a = np.array(a, dtype=float, copy=True)
    if a.ndim < 2 or a.shape[-1] != a.shape[-2]:
        raise ValueError("expected square matrices")
    batch_shape = a.shape[:-2]
    p = a.shape[-1]
    # batch on the last axis so every entry A[i, j] is a contiguous vector
    A = np.ascontiguousarray(np.moveaxis(a.reshape(-1, p, p), 0, -1))
    B = A.shape[-1]
    V = np.repeat(np.eye(p)[:, :, None], B, axis=2) if vectors else None

    fro = np.sqrt(np.einsum("ijb,ijb->b", A, A))
    thresh = tol * np.where(fro > 0, fro, 1.0)
    iu = np.triu_indices(p, 1)

    def off_norm():
        return np.sqrt(2.0 * np.sum(A[iu[0], iu[1]] ** 2, axis=0))

    for _ in range(max_sweeps):
        if np.all(off_norm() < thresh):
            break
        for i in range(p - 1):
            for j in range(i + 1, p):
                aij = A[i, j]
                active = np.abs(aij) > 1e-300
                if not active.any():
                    continue
                safe = np.where(active, aij, 1.0)
                zeta = (A[j, j] - A[i, i]) / (2.0 * safe)
                t = np.where(zeta >= 0, 1.0, -1.0) / (np.abs(zeta) + np.hypot(1.0, zeta))
                c = np.where(active, 1.0 / np.sqrt(1.0 + t * t), 1.0)
                s = np.where(active, t * c, 0.0)
                # A <- J' A J with J the (i, j) plane rotation [[c, s], [-s, c]]
                ci, cj = A[:, i].copy(), A[:, j].copy()
                A[:, i] = c * ci - s * cj
                A[:, j] = s * ci + c * cj
                ri, rj = A[i].copy(), A[j].copy()
                A[i] = c * ri - s * rj
                A[j] = s * ri + c * rj
                A[i, j] = np.where(active, 0.0, A[i, j])
                A[j, i] = A[i, j]
                if vectors:
                    vi, vj = V[:, i].copy(), V[:, j].copy()
                    V[:, i] = c * vi - s * vj
                    V[:, j] = s * vi + c * vj
    else:
        if not np.all(off_norm() < thresh):
            raise NumericalError("Jacobi iteration did not converge")

    w = np.diagonal(A, axis1=0, axis2=1).copy()  # (B, p)
    order = np.argsort(-w, axis=1, kind="stable")
    w = np.take_along_axis(w, order, axis=1)
    if not vectors:
        return w.reshape(batch_shape + (p,))
    V = np.moveaxis(V, -1, 0)
    V = np.take_along_axis(V, order[:, None, :], axis=2)
    lead = np.argmax(np.abs(V), axis=1)
    sign = np.sign(np.take_along_axis(V, lead[:, None, :], axis=1))
    V *= np.where(sign == 0, 1.0, sign)
    return w.reshape(batch_shape + (p,)), V.reshape(batch_shape + (p, p))

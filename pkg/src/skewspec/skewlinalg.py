"""Pfaffians, eigenvalues of real nonsymmetric matrices, Vandermonde products."""
from __future__ import annotations

import numpy as np

from .errors import NumericalError, ShapeError, ValidationError

__all__ = [
    "pfaffian",
    "eigenvalues_real_matrix",
    "vandermonde",
    "modified_vandermonde",
    "det_full_pivot",
]

SKEW_TOL = 1e-13


def _as_skew(A) -> np.ndarray:
    A = np.array(A, dtype=np.result_type(np.asarray(A), float), copy=True)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ShapeError(f"expected a square matrix, got shape {A.shape}")
    if A.shape[0] % 2:
        raise ShapeError(f"Pfaffian needs even dimension, got {A.shape[0]}")
    scale = np.max(np.abs(A)) if A.size else 0.0
    dev = np.max(np.abs(A + A.T)) if A.size else 0.0
    if dev > SKEW_TOL * max(scale, np.finfo(float).tiny):
        raise ValidationError(f"matrix is not skew-symmetric (|A + A^T| = {dev:.3e}, max |A| = {scale:.3e})")
    return 0.5 * (A - A.T)


def pfaffian(A):
    """Pfaffian of an even-dimensional skew-symmetric matrix.

    Parlett-Reid elimination: at each step the largest entry below the
    pivot in column k is swapped into row/column k+1 (each swap flips the
    sign), then rows and columns k+2.. are reduced by a rank-2 update.
    The sign convention gives Pf([[0, 1], [-1, 0]]) = 1.

    Parameters
    ----------
    A : array_like, shape (2n, 2n)

    Returns
    -------
    float or complex
    """
    A = _as_skew(A)
    n = A.shape[0]
    if n == 0:
        return A.dtype.type(1)
    pf = A.dtype.type(1)
    for k in range(0, n - 1, 2):
        kp = k + 1 + int(np.argmax(np.abs(A[k + 1 :, k])))
        if kp != k + 1:
            A[[k + 1, kp], :] = A[[kp, k + 1], :]
            A[:, [k + 1, kp]] = A[:, [kp, k + 1]]
            pf = -pf
        piv = A[k, k + 1]
        if piv == 0:
            return A.dtype.type(0)
        pf = pf * piv
        if k + 2 < n:
            t = A[k, k + 2 :] / piv
            col = A[k + 2 :, k + 1]
            A[k + 2 :, k + 2 :] += np.outer(t, col) - np.outer(col, t)
    return pf[()] if isinstance(pf, np.ndarray) else pf


def eigenvalues_real_matrix(M) -> np.ndarray:
    """Eigenvalues of a real square matrix, exactly closed under conjugation.

    LAPACK already returns complex eigenvalues of a real matrix in conjugate
    pairs; each pair is additionally rewritten as (re +/- i|im|) averaged over
    the two members so downstream classification never sees a lone member.
    """
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ShapeError(f"expected a square matrix, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise ValidationError("matrix has non-finite entries")
    try:
        ev = np.linalg.eigvals(M)
    except np.linalg.LinAlgError as exc:
        cond = np.linalg.cond(M)
        raise NumericalError(f"eigensolver did not converge (condition number {cond:.3e})") from exc
    ev = np.asarray(ev, dtype=complex)
    upper = np.flatnonzero(ev.imag > 0)
    lower = list(np.flatnonzero(ev.imag < 0))
    out = ev.copy()
    for i in upper:
        # partner: closest conjugate among unmatched lower members
        j = min(lower, key=lambda j: abs(ev[j] - np.conj(ev[i])))
        lower.remove(j)
        re = 0.5 * (ev[i].real + ev[j].real)
        im = 0.5 * (ev[i].imag - ev[j].imag)
        out[i], out[j] = complex(re, im), complex(re, -im)
    if lower:
        raise NumericalError("eigenvalues are not closed under conjugation")
    return out


def vandermonde(points) -> complex:
    """prod_{k > l} (z_k - z_l)."""
    z = np.asarray(points)
    out = np.ones((), dtype=np.result_type(z, float))
    for k in range(1, z.size):
        out = out * np.prod(z[k] - z[:k])
    return out[()]


def modified_vandermonde(points) -> complex:
    """Determinant of the Vandermonde matrix with the top row z^{N-1} replaced by z^N.

    Rows are powers 0..N-2 and N; columns are the points.  Equals
    (sum z) * vandermonde(points).
    """
    z = np.asarray(points)
    n = z.size
    if n == 0:
        return 0.0
    powers = list(range(n - 1)) + [n]
    V = np.array([z**p for p in powers])
    return det_full_pivot(V)


def det_full_pivot(A):
    """Determinant by Gaussian elimination with full (row and column) pivoting."""
    A = np.array(A, dtype=np.result_type(np.asarray(A), float), copy=True)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ShapeError(f"expected a square matrix, got shape {A.shape}")
    n = A.shape[0]
    det = A.dtype.type(1)
    for k in range(n):
        sub = np.abs(A[k:, k:])
        i, j = np.unravel_index(int(np.argmax(sub)), sub.shape)
        i, j = i + k, j + k
        if i != k:
            A[[k, i], :] = A[[i, k], :]
            det = -det
        if j != k:
            A[:, [k, j]] = A[:, [j, k]]
            det = -det
        piv = A[k, k]
        if piv == 0:
            return A.dtype.type(0)
        det = det * piv
        A[k + 1 :, k:] -= np.outer(A[k + 1 :, k] / piv, A[k, k:])
    return det

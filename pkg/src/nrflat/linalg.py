"""
Dense complex linear algebra for small square matrices.

Matrices are plain ``numpy`` arrays of dtype ``complex128``.  Functions here
never modify their inputs; :func:`as_matrix` returns a read-only copy so that
matrices can be shared freely.
"""

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "EigenConvergenceError",
    "TraceWords",
    "as_matrix",
    "adjoint",
    "hermitian_parts",
    "eig_hermitian",
    "trace_words",
    "is_nilpotent",
    "opnorm",
]


class EigenConvergenceError(RuntimeError):
    """Jacobi iteration did not reach the off-diagonal threshold."""


def as_matrix(a):
    """Validate ``a`` as a finite square matrix and return a read-only copy."""
    m = np.array(a, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] < 1:
        raise ValueError(f"expected a non-empty square matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix entries must be finite")
    m.setflags(write=False)
    return m


def adjoint(a):
    return np.conj(np.swapaxes(a, -1, -2))


def _symmetrize(h):
    # (h + h^*)/2 is exactly Hermitian in floating point: addition commutes.
    # Subnormal parts are flushed: rotation phases a_pq/|a_pq| overflow on
    # them, and they are far below any convergence threshold.
    out = (h + adjoint(h)) / 2
    tiny = np.finfo(float).tiny
    out.real[np.abs(out.real) < tiny] = 0.0
    out.imag[np.abs(out.imag) < tiny] = 0.0
    return out


def hermitian_parts(a):
    """Return ``(H, K)`` with ``H = (A + A*)/2`` and ``K = (A - A*)/(2i)``."""
    a = as_matrix(a)
    h = _symmetrize((a + adjoint(a)) / 2)
    k = _symmetrize((a - adjoint(a)) / 2j)
    return h, k


def _offdiag_norm(a):
    n = a.shape[-1]
    mask = ~np.eye(n, dtype=bool)
    return np.sqrt(np.sum(np.abs(a[:, mask]) ** 2, axis=1))


def eig_hermitian(h, max_sweeps=100, rtol=1e-14):
    """
    Eigen-decomposition of Hermitian matrices by cyclic complex Jacobi rotations.

    Parameters
    ----------
    h : array_like, shape (..., n, n)
        Hermitian matrix or stack of matrices.  Only the Hermitian part is used.
    max_sweeps : int
        Cap on the number of cyclic sweeps.
    rtol : float
        Iteration stops once the off-diagonal Frobenius norm is at most
        ``rtol * ||h||_F`` for every matrix in the stack.

    Returns
    -------
    values : ndarray, shape (..., n)
        Eigenvalues in ascending order.
    vectors : ndarray, shape (..., n, n)
        Orthonormal eigenvectors stored as columns, ordered like ``values``.
    """
    a = np.array(h, dtype=complex)
    if a.ndim < 2 or a.shape[-1] != a.shape[-2]:
        raise ValueError(f"expected square matrices, got shape {a.shape}")
    if a.ndim == 2 and a.shape[0] <= 8:
        return _eig_single(a, max_sweeps, rtol)
    batch, n = a.shape[:-2], a.shape[-1]
    a = _symmetrize(a.reshape(-1, n, n))
    v = np.broadcast_to(np.eye(n, dtype=complex), a.shape).copy()
    thresh = rtol * np.sqrt(np.sum(np.abs(a) ** 2, axis=(1, 2)))
    pairs = [(p, q) for p in range(n - 1) for q in range(p + 1, n)]

    for _ in range(max_sweeps + 1):
        active = np.nonzero(_offdiag_norm(a) > thresh)[0]
        if active.size == 0:
            break
        sub, vs = a[active], v[active]
        for p, q in pairs:
            _rotate(sub, vs, p, q)
        a[active], v[active] = sub, vs
    else:
        raise EigenConvergenceError(
            f"Jacobi did not converge in {max_sweeps} sweeps"
        )

    values = np.real(np.diagonal(a, axis1=1, axis2=2))
    order = np.argsort(values, axis=1, kind="stable")
    values = np.take_along_axis(values, order, axis=1)
    v = np.take_along_axis(v, order[:, None, :], axis=2)
    return values.reshape(batch + (n,)), v.reshape(batch + (n, n))


def _rotation(apq, app, aqq):
    """Entries of the 2x2 block of the rotation that zeroes ``apq``."""
    g = abs(apq)
    theta = (aqq - app) / (2 * g)
    t = (1.0 if theta >= 0 else -1.0) / (abs(theta) + math.sqrt(theta * theta + 1))
    c = 1 / math.sqrt(t * t + 1)
    s = t * c
    e = (apq / g).conjugate()
    return c, s, -s * e, c * e


def _eig_single(h, max_sweeps, rtol):
    # Scalar Python loop; for one small matrix this beats the batched path
    # by an order of magnitude (no per-call numpy overhead).
    n = h.shape[0]
    a = [[complex(x) for x in row] for row in _symmetrize(h).tolist()]
    v = [[1.0 + 0j if i == j else 0j for j in range(n)] for i in range(n)]
    thresh = rtol * math.sqrt(sum(abs(x) ** 2 for row in a for x in row))
    for _ in range(max_sweeps + 1):
        off = math.sqrt(
            sum(abs(a[i][j]) ** 2 for i in range(n) for j in range(n) if i != j)
        )
        if off <= thresh:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p][q]
                if apq == 0:
                    continue
                r00, r01, r10, r11 = _rotation(apq, a[p][p].real, a[q][q].real)
                for row in a:
                    x, y = row[p], row[q]
                    row[p] = x * r00 + y * r10
                    row[q] = x * r01 + y * r11
                ap, aq = a[p], a[q]
                c10, c11 = r10.conjugate(), r11.conjugate()
                for k in range(n):
                    x, y = ap[k], aq[k]
                    ap[k] = r00 * x + c10 * y
                    aq[k] = r01 * x + c11 * y
                for row in v:
                    x, y = row[p], row[q]
                    row[p] = x * r00 + y * r10
                    row[q] = x * r01 + y * r11
                a[p][q] = a[q][p] = 0j
                a[p][p] = complex(a[p][p].real)
                a[q][q] = complex(a[q][q].real)
    else:
        raise EigenConvergenceError(f"Jacobi did not converge in {max_sweeps} sweeps")
    values = np.array([a[i][i].real for i in range(n)])
    order = np.argsort(values, kind="stable")
    return values[order], np.array(v)[:, order]


def _rotate(a, v, p, q):
    """Annihilate ``a[:, p, q]`` in place by a unitary plane rotation."""
    apq = a[:, p, q]
    g = np.abs(apq)
    live = g > 0
    if not live.any():
        return
    app = a[:, p, p].real
    aqq = a[:, q, q].real
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        theta = (aqq - app) / (2 * g)
        t = np.where(theta >= 0, 1.0, -1.0) / (np.abs(theta) + np.sqrt(theta**2 + 1))
        phase = np.where(live, apq / g, 1.0)
    t = np.where(live & np.isfinite(t), t, 0.0)
    c = 1 / np.sqrt(t**2 + 1)
    s = t * c

    # R = [[c, s], [-s conj(e), c conj(e)]] acting on columns p, q; rows get R^H.
    r00 = c[:, None]
    r01 = s[:, None]
    r10 = (-s * np.conj(phase))[:, None]
    r11 = (c * np.conj(phase))[:, None]
    for m in (a, v):
        x, y = m[:, :, p].copy(), m[:, :, q]
        m[:, :, p] = x * r00 + y * r10
        m[:, :, q] = x * r01 + y * r11
    x, y = a[:, p, :].copy(), a[:, q, :]
    a[:, p, :] = r00 * x + np.conj(r10) * y
    a[:, q, :] = r01 * x + np.conj(r11) * y
    a[:, p, q] = 0
    a[:, q, p] = 0
    a[:, p, p] = a[:, p, p].real
    a[:, q, q] = a[:, q, q].real


@dataclass(frozen=True)
class TraceWords:
    """Traces of the words in ``A`` and ``A*`` that fix a 4x4 nilpotent pencil."""

    beta0: float    # tr(A* A A* A)
    beta11: float   # tr(A A*)
    beta22: float   # tr(A^2 A*^2)
    beta21: complex  # tr(A^2 A*)
    beta31: complex  # tr(A^3 A*)


def trace_words(a):
    a = as_matrix(a)
    s = adjoint(a)
    a2 = a @ a
    return TraceWords(
        beta0=float(np.trace(s @ a @ s @ a).real),
        beta11=float(np.trace(a @ s).real),
        beta22=float(np.trace(a2 @ s @ s).real),
        beta21=complex(np.trace(a2 @ s)),
        beta31=complex(np.trace(a2 @ a @ s)),
    )


def is_nilpotent(a, tol=1e-10):
    """True iff ``||A^n||_F <= tol * max(1, ||A||_F^n)`` with ``n = dim A``."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    a = as_matrix(a)
    if not np.any(np.tril(a)):
        return True
    n = a.shape[0]
    power = np.linalg.matrix_power(a, n)
    return bool(
        np.linalg.norm(power) <= tol * max(1.0, np.linalg.norm(a) ** n)
    )


def opnorm(a):
    """Operator (spectral) norm."""
    return float(np.linalg.norm(as_matrix(a), 2))

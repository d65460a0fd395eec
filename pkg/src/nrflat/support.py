"""
Support function of the numerical range and its top eigenspaces.

For a direction ``phi`` the support value ``h(phi)`` is the largest eigenvalue
of ``Re(exp(-i phi) A) = cos(phi) H + sin(phi) K``.  Its eigenvectors ``xi``
give boundary points ``<A xi, xi>`` on the support line
``x cos(phi) + y sin(phi) = h(phi)``.
"""

import math

import numpy as np

from .linalg import eig_hermitian, hermitian_parts

__all__ = [
    "rotated_parts",
    "support_spectrum",
    "golden_section",
    "refine_gap_minimum",
    "top_extremes",
    "gap_minima",
]

INV_PHI = (math.sqrt(5) - 1) / 2


def rotated_parts(h, k, phi):
    """``(Re, Im)`` of ``exp(-i phi) A`` from ``H = Re A``, ``K = Im A``; broadcasts."""
    phi = np.asarray(phi, dtype=float)
    cs = np.cos(phi)[..., None, None]
    sn = np.sin(phi)[..., None, None]
    return cs * h + sn * k, cs * k - sn * h


def support_spectrum(a, phis):
    """Eigen-decomposition of ``Re(exp(-i phi) A)`` for every ``phi``."""
    h, k = hermitian_parts(a)
    re, _ = rotated_parts(h, k, np.asarray(phis, dtype=float))
    return eig_hermitian(re)


def top_gap(h, k, phi):
    re, _ = rotated_parts(h, k, phi)
    w, _ = eig_hermitian(re)
    return w[-1] - w[-2]


def golden_section(f, lo, hi, xtol):
    """Minimize a unimodal scalar function on ``[lo, hi]``."""
    a, b = lo, hi
    c = b - INV_PHI * (b - a)
    d = a + INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    while b - a > xtol:
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - INV_PHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + INV_PHI * (b - a)
            fd = f(d)
    x = (a + b) / 2
    return x, f(x)


def refine_gap_minimum(h, k, lo, hi, xtol=1e-12):
    """Locate the minimum of ``lambda_1 - lambda_2`` on ``[lo, hi]``."""
    return golden_section(lambda phi: top_gap(h, k, phi), lo, hi, xtol)


def gap_minima(gaps, screen):
    """
    Indices of strict discrete local minima of a cyclic gap sequence that lie
    at or below ``screen``.  Flat plateaus are ignored.
    """
    gaps = np.asarray(gaps)
    prev = np.roll(gaps, 1)
    nxt = np.roll(gaps, -1)
    strict = (gaps <= prev) & (gaps <= nxt) & ((gaps < prev) | (gaps < nxt))
    return np.nonzero(strict & (gaps <= screen))[0]


def top_extremes(h, k, phi, cluster_tol):
    """
    Extreme boundary points carried by the top eigenspace at direction ``phi``.

    The eigenspace is spanned by all eigenvectors within ``cluster_tol`` of
    the largest eigenvalue.  Compressing ``Im(exp(-i phi) A)`` onto it and
    diagonalizing gives the lowest and highest reachable offsets along the
    support line.

    Returns
    -------
    support : float
        Mean of the clustered top eigenvalues.
    lo, hi : complex
        Extreme boundary points in the original (unrotated) plane, ordered
        counter-clockwise.
    multiplicity : int
    gap : float
        ``lambda_1 - lambda_2``.
    """
    re, im = rotated_parts(h, k, phi)
    w, vecs = eig_hermitian(re)
    m = int(np.sum(w[-1] - w <= cluster_tol))
    q = vecs[:, -m:]
    support = float(np.mean(w[-m:]))
    if m == 1:
        offsets = np.array([float(np.real(np.vdot(q[:, 0], im @ q[:, 0])))])
    else:
        offsets, _ = eig_hermitian(q.conj().T @ im @ q)
    rot = complex(math.cos(phi), math.sin(phi))
    lo = rot * complex(support, offsets[0])
    hi = rot * complex(support, offsets[-1])
    gap = float(w[-1] - w[-2]) if len(w) > 1 else math.inf
    return support, lo, hi, m, gap

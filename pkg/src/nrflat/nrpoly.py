"""
The numerical-range generating polynomial ``p_A(u, v, w) = det(uH + vK + wI)``.

A 4x4 matrix gives a real homogeneous quartic in three variables.  It is
stored densely as 15 coefficients in graded-lex order (u > v > w)::

    u^4, u^3 v, u^3 w, u^2 v^2, u^2 v w, u^2 w^2, u v^3, u v^2 w,
    u v w^2, u w^3, v^4, v^3 w, v^2 w^2, v w^3, w^4

This order is also the serialization order.  Two construction routes are
provided: :func:`nr_poly_general` interpolates the determinant, and
:func:`nr_poly_nilpotent` uses the closed form in terms of trace words, valid
for nilpotent input only.
"""

import functools
import itertools
import math
from dataclasses import dataclass

import numpy as np

from .linalg import as_matrix, hermitian_parts, is_nilpotent, trace_words

__all__ = [
    "EXPONENTS",
    "NotNilpotentError",
    "TernaryQuartic",
    "NilpotentCoefficients",
    "nr_poly_general",
    "nr_poly_nilpotent",
    "evaluate",
    "gradient",
    "hessian_uv",
]

DEGREE = 4
EXPONENTS = tuple(
    (i, j, DEGREE - i - j)
    for i in range(DEGREE, -1, -1)
    for j in range(DEGREE - i, -1, -1)
)
_INDEX = {e: n for n, e in enumerate(EXPONENTS)}

# Imaginary residue tolerated in determinant values before it is treated as
# a numerical failure (the pencil is Hermitian, so the exact value is real).
IMAG_TOL = 1e-10


class NotNilpotentError(ValueError):
    pass


def _interpolation_nodes():
    # Primitive integer triples in {-2..2}^3, one per +/- pair.  Normalized,
    # they give a 49x15 least-squares system with condition number ~6.5.
    nodes = []
    for t in itertools.product(range(-2, 3), repeat=3):
        if t == (0, 0, 0) or math.gcd(*map(abs, t)) != 1:
            continue
        if next(x for x in t if x != 0) < 0:
            continue
        nodes.append(t)
    nodes = np.array(nodes, dtype=float)
    return nodes / np.linalg.norm(nodes, axis=1)[:, None]


_NODES = _interpolation_nodes()
_VANDERMONDE = np.prod(
    _NODES[:, None, :] ** np.array(EXPONENTS)[None, :, :], axis=2
)
_PINV = np.linalg.pinv(_VANDERMONDE)
assert np.linalg.matrix_rank(_VANDERMONDE) == len(EXPONENTS)


AFFINE_ORDERS = (
    (0, 0, 0), (1, 0, 0), (0, 1, 0), (0, 0, 1), (2, 0, 0), (1, 1, 0), (0, 2, 0)
)
_AFFINE_BASIS = tuple((i, j) for i, j, _ in EXPONENTS)
_AFFINE_INDEX = {e: n for n, e in enumerate(_AFFINE_BASIS)}
_AFFINE_I = np.array([i for i, _ in _AFFINE_BASIS])
_AFFINE_J = np.array([j for _, j in _AFFINE_BASIS])


def _powers(x):
    out = [np.ones_like(x), x]
    for _ in range(DEGREE - 1):
        out.append(out[-1] * x)
    return out


def _power_table(x):
    out = np.empty((x.size, DEGREE + 1))
    out[:, 0] = 1.0
    for k in range(1, DEGREE + 1):
        np.multiply(out[:, k - 1], x, out=out[:, k])
    return out


def _falling(n, k):
    out = 1
    for m in range(k):
        out *= n - m
    return out


@dataclass(frozen=True, eq=False)
class TernaryQuartic:
    """Real homogeneous quartic in ``(u, v, w)``; ``coeffs`` in graded-lex order."""

    coeffs: np.ndarray

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=float).reshape(-1)
        if c.shape != (len(EXPONENTS),):
            raise ValueError(f"expected {len(EXPONENTS)} coefficients, got {c.size}")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    def __eq__(self, other):
        return isinstance(other, TernaryQuartic) and np.array_equal(
            self.coeffs, other.coeffs
        )

    def __repr__(self):
        terms = [
            f"{c:+.6g}*u^{i}v^{j}w^{k}"
            for c, (i, j, k) in zip(self.coeffs, EXPONENTS)
            if c != 0
        ]
        return "TernaryQuartic(" + (" ".join(terms) or "0") + ")"

    @classmethod
    def from_terms(cls, terms):
        """Build from a mapping ``{(i, j, k): coefficient}``."""
        c = np.zeros(len(EXPONENTS))
        for e, value in terms.items():
            c[_INDEX[tuple(e)]] += value
        return cls(c)

    def coefficient(self, i, j, k):
        return float(self.coeffs[_INDEX[(i, j, k)]])

    def derivative(self, du, dv, dw, u, v, w):
        """Evaluate the mixed partial of orders ``(du, dv, dw)``; broadcasts."""
        u, v, w = np.broadcast_arrays(
            np.asarray(u, float), np.asarray(v, float), np.asarray(w, float)
        )
        pu, pv, pw = (_powers(x) for x in (u, v, w))
        total = np.zeros(u.shape)
        for c, (i, j, k) in zip(self.coeffs, EXPONENTS):
            if c == 0 or i < du or j < dv or k < dw:
                continue
            f = c * _falling(i, du) * _falling(j, dv) * _falling(k, dw)
            total = total + f * pu[i - du] * pv[j - dv] * pw[k - dw]
        return total if total.ndim else float(total)

    def __call__(self, u, v, w):
        return self.derivative(0, 0, 0, u, v, w)

    def gradient(self, u, v, w):
        return tuple(self.derivative(*o, u, v, w) for o in ((1, 0, 0), (0, 1, 0), (0, 0, 1)))

    def hessian(self, u, v, w):
        """Full 3x3 Hessian (scalar arguments only)."""
        h = np.empty((3, 3))
        for a in range(3):
            for b in range(a, 3):
                o = [0, 0, 0]
                o[a] += 1
                o[b] += 1
                h[a, b] = h[b, a] = self.derivative(*o, u, v, w)
        return h

    def hessian_uv(self, u, v, w):
        """``(p_uu, p_uv, p_vv)`` at ``(u, v, w)``; broadcasts."""
        return (
            self.derivative(2, 0, 0, u, v, w),
            self.derivative(1, 1, 0, u, v, w),
            self.derivative(0, 2, 0, u, v, w),
        )

    @functools.cached_property
    def _affine_table(self):
        # Column o holds the coefficients of the partial of order AFFINE_ORDERS[o]
        # restricted to w = 1, in the monomial basis u^i v^j (i + j <= 4).
        table = np.zeros((len(_AFFINE_BASIS), len(AFFINE_ORDERS)))
        for col, (du, dv, dw) in enumerate(AFFINE_ORDERS):
            for c, (i, j, k) in zip(self.coeffs, EXPONENTS):
                if i < du or j < dv or k < dw:
                    continue
                f = c * _falling(i, du) * _falling(j, dv) * _falling(k, dw)
                table[_AFFINE_INDEX[(i - du, j - dv)], col] += f
        return table

    def affine_jet(self, u, v):
        """
        ``p, p_u, p_v, p_w, p_uu, p_uv, p_vv`` at ``(u, v, 1)`` as the columns
        of an ``(N, 7)`` array, for 1-d arrays ``u, v``.
        """
        u = np.asarray(u, dtype=float).reshape(-1)
        v = np.asarray(v, dtype=float).reshape(-1)
        basis = _power_table(u)[:, _AFFINE_I] * _power_table(v)[:, _AFFINE_J]
        return basis @ self._affine_table

    def gamma_polynomial(self, u0, v0):
        """
        Coefficients (highest power first) of ``g -> p(u0, v0, g)``.
        """
        out = np.zeros(DEGREE + 1)
        for c, (i, j, k) in zip(self.coeffs, EXPONENTS):
            out[DEGREE - k] += c * u0**i * v0**j
        return out

    def rotated(self, phi):
        """
        Polynomial of ``exp(i*phi) * A`` given this polynomial of ``A``.

        Uses ``p_B(u, v, w) = p_A(u cos + v sin, -u sin + v cos, w)``.
        """
        cs, sn = math.cos(phi), math.sin(phi)
        u, v, w = _NODES.T
        values = self(u * cs + v * sn, -u * sn + v * cs, w)
        return TernaryQuartic(_PINV @ values)

    def to_json(self):
        return {
            "degree": DEGREE,
            "coeffs": [
                {"i": i, "j": j, "k": k, "c": float(c)}
                for c, (i, j, k) in zip(self.coeffs, EXPONENTS)
            ],
        }

    @classmethod
    def from_json(cls, doc):
        if doc.get("degree") != DEGREE:
            raise ValueError(f"only degree {DEGREE} is supported")
        terms = {}
        for entry in doc["coeffs"]:
            e = (int(entry["i"]), int(entry["j"]), int(entry["k"]))
            if e not in _INDEX:
                raise ValueError(f"bad exponent triple {e}")
            terms[e] = float(entry["c"])
        return cls.from_terms(terms)


def evaluate(p, u, v, w):
    return p(u, v, w)


def gradient(p, u, v, w):
    return p.gradient(u, v, w)


def hessian_uv(p, u, v, w):
    return p.hessian_uv(u, v, w)


def pencil_determinants(a, nodes):
    """``det(uH + vK + wI)`` for each row ``(u, v, w)`` of ``nodes``."""
    h, k = hermitian_parts(a)
    nodes = np.asarray(nodes, dtype=float)
    eye = np.eye(h.shape[0])
    pencils = (
        nodes[:, 0, None, None] * h
        + nodes[:, 1, None, None] * k
        + nodes[:, 2, None, None] * eye
    )
    # LAPACK's LU overflows when it pivots on a subnormal; such entries
    # cannot change a determinant of normal-sized terms, so flush them.
    tiny = np.finfo(float).tiny
    pencils.real[np.abs(pencils.real) < tiny] = 0.0
    pencils.imag[np.abs(pencils.imag) < tiny] = 0.0
    return np.linalg.det(pencils)


def nr_poly_general(a):
    """Generating polynomial of a 4x4 matrix by determinant interpolation."""
    a = as_matrix(a)
    if a.shape != (4, 4):
        raise ValueError(f"nr_poly_general needs a 4x4 matrix, got {a.shape}")
    values = pencil_determinants(a, _NODES)
    if not np.all(np.isfinite(values)):
        raise ArithmeticError("pencil determinant is not finite")
    scale = max(1.0, float(np.max(np.abs(values))))
    residue = float(np.max(np.abs(values.imag)))
    if residue > IMAG_TOL * scale:
        raise ArithmeticError(
            f"pencil determinant has imaginary residue {residue:.3g}"
        )
    return TernaryQuartic(_PINV @ values.real)


@dataclass(frozen=True)
class NilpotentCoefficients:
    """The six free coefficients of the generating polynomial of a nilpotent 4x4."""

    c1: float
    c2: float
    c3: float
    c4: float
    c5: float
    c6: float

    def as_tuple(self):
        return (self.c1, self.c2, self.c3, self.c4, self.c5, self.c6)

    def expand(self):
        c1, c2, c3, c4, c5, c6 = self.as_tuple()
        return TernaryQuartic.from_terms({
            (4, 0, 0): c1,
            (3, 1, 0): c2,
            (3, 0, 1): c3,
            (2, 2, 0): c1 + c4,
            (2, 0, 2): c5,
            (2, 1, 1): c6,
            (1, 3, 0): c2,
            (1, 2, 1): c3,
            (0, 4, 0): c4,
            (0, 3, 1): c6,
            (0, 2, 2): c5,
            (0, 0, 4): 1.0,
        })


def nr_poly_nilpotent(a, tol=1e-10):
    """Closed-form coefficients from the trace words of a nilpotent 4x4 matrix."""
    a = as_matrix(a)
    if a.shape != (4, 4):
        raise ValueError(f"nr_poly_nilpotent needs a 4x4 matrix, got {a.shape}")
    if not is_nilpotent(a, tol):
        raise NotNilpotentError("matrix is not nilpotent")
    b = trace_words(a)
    half_sq = b.beta11**2 / 2
    return NilpotentCoefficients(
        c1=-(2 * b.beta31.real + b.beta22 + b.beta0 / 2 - half_sq) / 16,
        c2=-b.beta31.imag / 4,
        c3=b.beta21.real / 4,
        c4=(2 * b.beta31.real - b.beta22 - b.beta0 / 2 + half_sq) / 16,
        c5=-b.beta11 / 4,
        c6=b.beta21.imag / 4,
    )

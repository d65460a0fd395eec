"""
Nilpotent 4x4 matrices whose numerical range has two flat portions on
non-parallel lines at a common distance ``d`` from the origin.

The canonical form is ``exp(i t) * [[0, x, d1, y], [0, 0, y, d2], [0, 0, 0, x], 0]``
where ``d1, d2`` solve ``d s^2 - x y S s + d (x^2 + y^2 - 4 d^2) = 0``.
Throughout, ``S = sin(theta/2)`` and ``C = cos(theta/2)``, with ``theta`` the
angle at which the two lines meet.
"""

import math
from dataclasses import dataclass

import numpy as np

from .flatdetect import FlatPortion, flat_endpoints, flat_length
from .singularity import Singularity

__all__ = [
    "DomainError",
    "FamilyParams",
    "FamilyPrediction",
    "ymax",
    "deltas",
    "build_family_matrix",
    "build_Ak",
    "build_M",
    "theta_from_k",
    "k_from_theta",
    "maximal_side",
    "predicted_flats",
    "symmetry_line",
    "params_from_unit",
    "family_length",
    "family_hessian",
    "trace_invariant",
]

SLACK = 1e-12


class DomainError(ValueError):
    """Parameters outside the region where the family is defined."""


def _check_angle(theta):
    if not 0 < theta < math.pi:
        raise DomainError(f"theta must satisfy 0 < theta < pi (got theta={theta!r})")


def _check_common(d, theta, x):
    if not d > 0:
        raise DomainError(f"d must satisfy d > 0 (got d={d!r})")
    _check_angle(theta)
    if not 0 < x < 2 * d:
        raise DomainError(
            f"x must satisfy 0 < x < 2d (got x={x!r}, 2d={2 * d!r})"
        )


def ymax(d, theta, x):
    """Largest admissible ``y``: ``sqrt((16 d^4 - 4 d^2 x^2) / (4 d^2 - x^2 S^2))``."""
    _check_common(d, theta, x)
    s = math.sin(theta / 2)
    return math.sqrt((16 * d**4 - 4 * d**2 * x**2) / (4 * d**2 - x**2 * s**2))


def maximal_side(d, theta):
    """``x = y = 2d / sqrt(1 + C)``, the choice giving the longest flats (length ``d``)."""
    if not d > 0:
        raise DomainError(f"d must satisfy d > 0 (got d={d!r})")
    _check_angle(theta)
    return 2 * d / math.sqrt(1 + math.cos(theta / 2))


def theta_from_k(k):
    """Angle between the flats of ``A_k``: ``2 arcsin(k / sqrt 2)``."""
    if not 0 < k < math.sqrt(2):
        raise DomainError(f"k must satisfy 0 < k < sqrt(2) (got k={k!r})")
    return 2 * math.asin(k / math.sqrt(2))


def k_from_theta(theta):
    _check_angle(theta)
    return math.sqrt(2) * math.sin(theta / 2)


@dataclass(frozen=True)
class FamilyParams:
    d: float
    theta: float
    x: float
    y: float
    t: float = 0.0
    swap_deltas: bool = False

    def __post_init__(self):
        bound = ymax(self.d, self.theta, self.x)
        if not 0 < self.y <= bound * (1 + SLACK):
            raise DomainError(
                "y must satisfy 0 < y <= sqrt((16d^4 - 4d^2x^2)/(4d^2 - x^2 S^2))"
                f" (got y={self.y!r}, bound={bound!r})"
            )
        if self.discriminant < -SLACK * 16 * self.d**4:
            raise DomainError(
                "x^2 y^2 S^2 + 16 d^4 - 4 d^2 (x^2 + y^2) must be nonnegative"
                f" (got {self.discriminant!r})"
            )
        object.__setattr__(self, "t", float(self.t) % (2 * math.pi))

    @property
    def S(self):
        return math.sin(self.theta / 2)

    @property
    def C(self):
        return math.cos(self.theta / 2)

    @property
    def discriminant(self):
        d, x, y = self.d, self.x, self.y
        return x**2 * y**2 * self.S**2 + 16 * d**4 - 4 * d**2 * (x**2 + y**2)

    @classmethod
    def maximal(cls, d, theta, t=0.0, swap_deltas=False):
        side = maximal_side(d, theta)
        return cls(d, theta, side, side, t, swap_deltas)

    @classmethod
    def from_k(cls, k):
        """Parameters of ``A_k`` (``d = 1/sqrt 2``, ``x = y = 1``, zero in the (1,3) slot)."""
        return cls(1 / math.sqrt(2), theta_from_k(k), 1.0, 1.0, 0.0, True)

    def to_json(self):
        return {
            "d": self.d,
            "theta": self.theta,
            "x": self.x,
            "y": self.y,
            "t": self.t,
            "swap_deltas": self.swap_deltas,
        }

    @classmethod
    def from_json(cls, doc):
        return cls(
            float(doc["d"]),
            float(doc["theta"]),
            float(doc["x"]),
            float(doc["y"]),
            float(doc.get("t", 0.0)),
            bool(doc.get("swap_deltas", False)),
        )


def deltas(params):
    """The two roots ``(xyS +/- sqrt(disc)) / (2d)``; the + root first unless swapped."""
    root = math.sqrt(max(params.discriminant, 0.0))
    base = params.x * params.y * params.S
    plus = (base + root) / (2 * params.d)
    minus = (base - root) / (2 * params.d)
    return (minus, plus) if params.swap_deltas else (plus, minus)


def build_family_matrix(params):
    d1, d2 = deltas(params)
    x, y = params.x, params.y
    core = np.array([
        [0, x, d1, y],
        [0, 0, y, d2],
        [0, 0, 0, x],
        [0, 0, 0, 0],
    ], dtype=complex)
    m = np.exp(1j * params.t) * core
    m.setflags(write=False)
    return m


def build_Ak(k):
    theta_from_k(k)
    m = np.array([
        [0, 1, 0, 1],
        [0, 0, 1, k],
        [0, 0, 0, 1],
        [0, 0, 0, 0],
    ], dtype=complex)
    m.setflags(write=False)
    return m


def build_M(d, theta):
    """The maximal-length member ``M_{d,theta}``; both flats have length ``d``."""
    side = maximal_side(d, theta)
    inner = math.sin(theta / 2) / math.sqrt(1 + math.cos(theta / 2))
    m = side * np.array([
        [0, 1, inner, 1],
        [0, 0, 1, inner],
        [0, 0, 0, 1],
        [0, 0, 0, 0],
    ], dtype=complex)
    m.setflags(write=False)
    return m


def symmetry_line(theta1, theta2):
    """Angle in ``[0, pi)`` of the symmetry axis for singularities at polar angles ``theta1, theta2``."""
    return ((theta1 + theta2) / 2) % math.pi


def family_length(params):
    d, x, y = params.d, params.x, params.y
    return 8 * d**3 * x * y * params.C / (16 * d**4 - x**2 * y**2 * params.S**2)


def family_hessian(params, sign=1):
    """Second partials ``(p_uu, p_uv, p_vv)`` at the singularity ``(S, sign*C)/d`` for ``t = 0``."""
    d, S, C = params.d, params.S, params.C
    xy2 = (params.x * params.y) ** 2
    return (
        8 * d**2 * S**2 - xy2 / (2 * d**2),
        sign * 8 * d**2 * S * C,
        8 * d**2 * C**2,
    )


def trace_invariant(params):
    """``tr(A^2 A*^2) = x^2 y^2 (2 + x^2 S^2 / d^2)``."""
    x, y = params.x, params.y
    return x**2 * y**2 * (2 + x**2 * params.S**2 / params.d**2)


@dataclass(frozen=True)
class FamilyPrediction:
    singularities: tuple
    flats: tuple
    length: float
    symmetry_angle: float
    intersection: complex
    delta1: float
    delta2: float


def _rotate_uv(u, v, t):
    c, s = math.cos(t), math.sin(t)
    return u * c - v * s, u * s + v * c


def predicted_flats(params):
    """
    Closed-form flat portions of ``build_family_matrix(params)``.

    For ``t = 0`` the singularities are ``(S/d, +/-C/d)``; endpoints come
    from the closed-form second partials, and everything is then rotated by
    ``t``.
    """
    d, t = params.d, params.t
    rot = complex(math.cos(t), math.sin(t))
    sings, flats = [], []
    for sign in (1, -1):
        u0, v0 = params.S / d, sign * params.C / d
        a11, a12, a22 = family_hessian(params, sign)
        e1, e2 = flat_endpoints(a11, a12, a22, u0, v0)
        ru, rv = _rotate_uv(u0, v0, t)
        sings.append(Singularity(ru, rv, 0.0))
        flats.append(FlatPortion.from_line(
            ru, rv, rot * e1, rot * e2, source="prediction",
            length=flat_length(a11, a12, a22, u0, v0),
        ))
    d1, d2 = deltas(params)
    return FamilyPrediction(
        singularities=tuple(sings),
        flats=tuple(flats),
        length=family_length(params),
        symmetry_angle=t % math.pi,
        intersection=-d / params.S * rot,
        delta1=d1,
        delta2=d2,
    )


def params_from_unit(point, d_range=(0.3, 3.0), theta_margin=0.15, side_margin=0.05,
                     with_t=False):
    """
    Map a point of the unit cube to valid parameters.

    Coordinates are ``(d, theta, x, y[, t])``: ``d`` is linear in
    ``d_range``, ``theta`` stays ``theta_margin`` away from 0 and pi, and
    ``x / 2d`` and ``y / ymax`` stay ``side_margin`` away from their ends,
    so the sample avoids the degenerate boundary of the parameter region.
    """
    q = [float(c) for c in point]
    lo, hi = d_range
    d = lo + (hi - lo) * q[0]
    theta = theta_margin + (math.pi - 2 * theta_margin) * q[1]
    x = 2 * d * (side_margin + (1 - 2 * side_margin) * q[2])
    y = ymax(d, theta, x) * (side_margin + (1 - 2 * side_margin) * q[3])
    t = 2 * math.pi * q[4] if with_t else 0.0
    return FamilyParams(d, theta, x, y, t)

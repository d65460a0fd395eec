"""
Flat portions of the boundary of the numerical range.

Two independent detectors are provided.  :func:`check_singularity` applies
the second-order test at a real singular point of the generating polynomial
and produces closed-form endpoints.  :func:`flats_via_rotation_sweep` looks
for directions in which the top eigenvalue of ``Re(exp(-i phi) A)`` is
degenerate.  :func:`analyze` runs both and cross-checks them.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .linalg import as_matrix, hermitian_parts, is_nilpotent, opnorm
from .nrpoly import nr_poly_general, nr_poly_nilpotent
from .singularity import Singularity, default_radius, find_real_singularities
from .support import (
    gap_minima,
    refine_gap_minimum,
    rotated_parts,
    support_spectrum,
    top_extremes,
)
from .linalg import eig_hermitian

__all__ = [
    "DegenerateHessian",
    "FlatPortion",
    "FlatCheck",
    "FlatReport",
    "flat_endpoints",
    "flat_length",
    "check_singularity",
    "flat_from_singularity",
    "flats_via_rotation_sweep",
    "angle_between",
    "analyze",
    "find_singularities_of",
]

FALLBACK_ROTATION = math.pi / 7
SPREAD_MIN = 1e-7
MERGE_DPHI = 1e-6
LINE_MATCH_TOL = 1e-5
ENDPOINT_MATCH_TOL = 1e-4


class DegenerateHessian(ArithmeticError):
    """``p_vv`` vanishes at a singular point, also after rotating coordinates."""


@dataclass(frozen=True)
class FlatPortion:
    """
    A segment of the boundary on the line ``line_u0 * x + line_v0 * y + 1 = 0``.

    ``angle_of_line`` is the direction of the outward normal, so the line is
    also ``x cos(angle) + y sin(angle) = distance``.
    """

    line_u0: float
    line_v0: float
    endpoint1: tuple
    endpoint2: tuple
    length: float
    distance: float
    angle_of_line: float
    source: str

    @classmethod
    def from_line(cls, u0, v0, z1, z2, source, length=None):
        z1, z2 = complex(z1), complex(z2)
        return cls(
            float(u0), float(v0),
            (z1.real, z1.imag), (z2.real, z2.imag),
            abs(z2 - z1) if length is None else float(length),
            1 / math.hypot(u0, v0),
            math.atan2(-v0, -u0),
            source,
        )

    @classmethod
    def from_support(cls, phi, h, z1, z2, source):
        z1, z2 = complex(z1), complex(z2)
        with np.errstate(divide="ignore"):
            u0 = -math.cos(phi) / h if h != 0 else math.copysign(math.inf, -math.cos(phi))
            v0 = -math.sin(phi) / h if h != 0 else math.copysign(math.inf, -math.sin(phi))
        return cls(
            u0, v0,
            (z1.real, z1.imag), (z2.real, z2.imag),
            abs(z2 - z1), abs(h), math.atan2(math.sin(phi), math.cos(phi)), source,
        )

    @property
    def z1(self):
        return complex(*self.endpoint1)

    @property
    def z2(self):
        return complex(*self.endpoint2)

    @property
    def support(self):
        """Signed support value ``z . n`` of the line along its outward normal."""
        n = complex(math.cos(self.angle_of_line), math.sin(self.angle_of_line))
        return (self.z1 * n.conjugate()).real

    def rotated(self, t):
        r = complex(math.cos(t), math.sin(t))
        return FlatPortion.from_support(
            self.angle_of_line + t, self.support, r * self.z1, r * self.z2, self.source
        )

    def translated(self, c):
        c = complex(c)
        if c == 0:
            return self
        phi = self.angle_of_line
        h = self.support + c.real * math.cos(phi) + c.imag * math.sin(phi)
        return FlatPortion.from_support(phi, h, self.z1 + c, self.z2 + c, self.source)

    def to_json(self):
        return {
            "line": {"u0": self.line_u0, "v0": self.line_v0},
            "endpoints": [list(self.endpoint1), list(self.endpoint2)],
            "length": self.length,
            "distance": self.distance,
            "angle_of_line": self.angle_of_line,
            "source": self.source,
        }


def angle_between(f1, f2):
    """Interior angle at which the lines of two flats meet (the wedge holding ``W``)."""
    diff = abs(f1.angle_of_line - f2.angle_of_line) % (2 * math.pi)
    normals = min(diff, 2 * math.pi - diff)
    return math.pi - normals


def flat_endpoints(a11, a12, a22, u0, v0):
    """
    Endpoints of the flat on ``u0 x + v0 y + 1 = 0`` from the second partials
    ``a11 = p_uu``, ``a12 = p_uv``, ``a22 = p_vv`` at ``(u0, v0, 1)``.
    """
    root = math.sqrt(a12 * a12 - a11 * a22)
    out = []
    for m in (a12 - root, a12 + root):
        den = -a22 * v0 - m * u0
        out.append(complex(m / den, a22 / den))
    return tuple(out)


def flat_length(a11, a12, a22, u0, v0):
    quad = a11 * u0**2 + 2 * a12 * u0 * v0 + a22 * v0**2
    return 2 * math.sqrt(a12 * a12 - a11 * a22) * math.hypot(u0, v0) / abs(quad)


@dataclass
class FlatCheck:
    """Outcome of the second-order flat test at one singular point."""

    singularity: Singularity
    a11: float = math.nan
    a12: float = math.nan
    a22: float = math.nan
    discriminant: float = math.nan
    gamma_roots: tuple = ()
    flat: FlatPortion = None
    reason: str = None
    flags: list = field(default_factory=list)

    def to_json(self):
        return {
            "singularity": self.singularity.to_json(),
            "hessian": [self.a11, self.a12, self.a22],
            "discriminant": self.discriminant,
            "gamma_roots": [[z.real, z.imag] for z in self.gamma_roots],
            "flat": None if self.flat is None else self.flat.to_json(),
            "reason": self.reason,
            "flags": list(self.flags),
        }


def _gamma_roots(p, u0, v0):
    """Roots of ``g -> p(u0, v0, g)`` with the known double root at 1 deflated."""
    q = np.trim_zeros(p.gamma_polynomial(u0, v0), "f")
    if q.size < 3:
        return [1.0, 1.0]
    quotient, _ = np.polydiv(q, [1.0, -2.0, 1.0])
    extra = list(np.roots(quotient)) if quotient.size > 1 else []
    return [1.0, 1.0] + extra


def _test(p, u0, v0, check):
    a11, a12, a22 = (float(x) for x in p.hessian_uv(u0, v0, 1.0))
    check.a11, check.a12, check.a22 = a11, a12, a22
    scale = max(a11 * a11, a12 * a12, a22 * a22, 1e-300)
    disc = a12 * a12 - a11 * a22
    check.discriminant = disc
    if abs(disc) <= 1e-10 * scale:
        check.flags.append("borderline_discriminant")
        check.reason = "repeated_tangent"
        return None
    if disc < 0:
        check.reason = "no_real_tangents"
        return None
    quad = a11 * u0**2 + 2 * a12 * u0 * v0 + a22 * v0**2
    if abs(quad) <= 1e-10 * (abs(a11) + 2 * abs(a12) + abs(a22)) * (u0**2 + v0**2):
        check.reason = "degenerate_quadratic_form"
        return None
    roots = _gamma_roots(p, u0, v0)
    check.gamma_roots = tuple(complex(z) for z in roots)
    for z in roots:
        z = complex(z)
        if abs(z.imag) <= 1e-9 * (1 + abs(z)):
            if z.real > 1 + 1e-9:
                check.reason = "not_extreme_line"
                return None
        elif z.real > 1:
            check.flags.append("complex_gamma_root_beyond_1")
    return flat_endpoints(a11, a12, a22, u0, v0), flat_length(a11, a12, a22, u0, v0)


def check_singularity(p, s):
    """
    Second-order test for a flat portion on the line of singular point ``s``.

    Requires ``0 in W(A)``.  A flat is reported iff the two tangents at the
    singular point are real and distinct, the quadratic form does not vanish
    at ``(u0, v0)`` and every real root ``g`` of ``p(u0, v0, g)`` is at most 1.
    Only real roots are tested; complex roots with real part above 1 are
    flagged.  When ``p_vv`` vanishes the test is redone in coordinates
    rotated by ``pi/7``.
    """
    if not s.grad_residual <= 1e-8:
        raise ValueError(f"not a singular point (residual {s.grad_residual:.3g})")
    check = FlatCheck(singularity=s)
    u0, v0 = s.u0, s.v0
    a22 = float(p.derivative(0, 2, 0, u0, v0, 1.0))
    a11 = float(p.derivative(2, 0, 0, u0, v0, 1.0))
    a12 = float(p.derivative(1, 1, 0, u0, v0, 1.0))
    rotation = 0.0
    if abs(a22) <= 1e-10 * max(abs(a11), abs(a12), 1.0):
        rotation = FALLBACK_ROTATION
        p = p.rotated(rotation)
        c, sn = math.cos(rotation), math.sin(rotation)
        u0, v0 = u0 * c - v0 * sn, u0 * sn + v0 * c
        b11, b12, b22 = (float(x) for x in p.hessian_uv(u0, v0, 1.0))
        if abs(b22) <= 1e-10 * max(abs(b11), abs(b12), 1.0):
            raise DegenerateHessian(
                f"p_vv vanishes at ({s.u0:.6g}, {s.v0:.6g}) in both frames"
            )
        check.flags.append("rotated_fallback")
    result = _test(p, u0, v0, check)
    if result is None:
        return check
    (z1, z2), length = result
    flat = FlatPortion.from_line(u0, v0, z1, z2, "singularity_test", length=length)
    if rotation:
        flat = flat.rotated(-rotation)
    check.flat = flat
    return check


def flat_from_singularity(p, s):
    """The flat portion generated by singular point ``s``, or ``None``."""
    return check_singularity(p, s).flat


def _merge(flats):
    flats = sorted(flats, key=lambda f: f.angle_of_line % (2 * math.pi))
    merged = []
    for f in flats:
        if merged:
            d = abs(f.angle_of_line - merged[-1].angle_of_line) % (2 * math.pi)
            if min(d, 2 * math.pi - d) <= MERGE_DPHI:
                if f.length > merged[-1].length:
                    merged[-1] = f
                continue
        merged.append(f)
    if len(merged) > 1:
        d = abs(merged[0].angle_of_line - merged[-1].angle_of_line) % (2 * math.pi)
        if min(d, 2 * math.pi - d) <= MERGE_DPHI:
            keep = max(merged[0], merged[-1], key=lambda f: f.length)
            merged = [keep] + merged[1:-1]
    return merged


def flats_via_rotation_sweep(a, n_phi=2048, gap_tol=None):
    """
    Flat portions found where the top eigenvalue of ``Re(exp(-i phi) A)`` is
    degenerate.

    The gap ``lambda_1 - lambda_2`` is sampled on ``n_phi`` uniform
    directions; each small discrete minimum is refined by golden-section
    search to ``|dphi| <= 1e-12``.  If the refined gap is below ``gap_tol``
    (default ``1e-7 * ||A||``) the extreme points of the top eigenspace give
    the flat, kept if they are more than ``1e-7`` apart.
    """
    if n_phi < 360:
        raise ValueError("n_phi must be at least 360")
    a = as_matrix(a)
    norm = opnorm(a)
    if a.shape[0] < 2 or norm == 0:
        return []
    if gap_tol is None:
        gap_tol = 1e-7 * norm
    h, k = hermitian_parts(a)
    dphi = 2 * math.pi / n_phi
    phis = dphi * np.arange(n_phi)
    re, _ = rotated_parts(h, k, phis)
    w, _ = eig_hermitian(re)
    gaps = w[:, -1] - w[:, -2]

    flats = []
    for i in gap_minima(gaps, 2 * dphi * norm):
        phi, gap = refine_gap_minimum(h, k, phis[i] - dphi, phis[i] + dphi)
        if gap > gap_tol:
            continue
        support, z1, z2, _, _ = top_extremes(h, k, phi, gap_tol)
        if abs(z2 - z1) <= SPREAD_MIN:
            continue
        flats.append(FlatPortion.from_support(phi, support, z1, z2, "eigensweep"))
    return _merge(flats)


def _flats_match(f, g):
    if abs(f.line_u0 - g.line_u0) > LINE_MATCH_TOL or abs(f.line_v0 - g.line_v0) > LINE_MATCH_TOL:
        return False
    straight = max(abs(f.z1 - g.z1), abs(f.z2 - g.z2))
    crossed = max(abs(f.z1 - g.z2), abs(f.z2 - g.z1))
    return min(straight, crossed) <= ENDPOINT_MATCH_TOL


@dataclass
class FlatReport:
    nilpotent: bool
    shift: complex
    norm: float
    polynomial: object
    nilpotent_coefficients: object
    singularities: list
    checks: list
    flats: list
    sweep_flats: list
    matched: bool
    discrepancies: list
    symmetry_axis: float = None
    flat_angle: float = None

    def to_json(self):
        return {
            "nilpotent": self.nilpotent,
            "shift": [self.shift.real, self.shift.imag],
            "norm": self.norm,
            "polynomial": None if self.polynomial is None else self.polynomial.to_json(),
            "nilpotent_coefficients": (
                None if self.nilpotent_coefficients is None
                else list(self.nilpotent_coefficients.as_tuple())
            ),
            "singularities": [s.to_json() for s in self.singularities],
            "singularity_checks": [c.to_json() for c in self.checks],
            "flats": [f.to_json() for f in self.flats],
            "sweep_flats": [f.to_json() for f in self.sweep_flats],
            "cross_check": {"matched": self.matched, "discrepancies": list(self.discrepancies)},
            "symmetry_axis": self.symmetry_axis,
            "flat_angle": self.flat_angle,
        }


def _boundary_centroid(a, n=64):
    phis = 2 * math.pi * np.arange(n) / n
    _, vecs = support_spectrum(a, phis)
    top = vecs[:, :, -1]
    points = np.einsum("ni,ij,nj->n", top.conj(), a, top)
    return complex(np.mean(points))


def find_singularities_of(a, radius=None, grid_n=64, tol=1e-10, poly=None):
    """
    Real singular points of the generating polynomial of a 4x4 matrix.

    The default search radius comes from 64 support values of ``W(A)``.
    """
    a = as_matrix(a)
    if poly is None:
        poly = nr_poly_general(a)
    if radius is None:
        w, _ = support_spectrum(a, 2 * math.pi * np.arange(64) / 64)
        radius = default_radius(w[:, -1])
    return find_real_singularities(poly, radius, grid_n, tol)


def analyze(a, n_phi=2048, radius=None, grid_n=64, tol=1e-10):
    """
    Run both flat detectors on ``a`` and cross-check them.

    Non-nilpotent input is first translated by the centroid of 64 boundary
    samples so that the origin lies inside ``W(A)``; all results are
    reported in the original coordinates.
    """
    a = as_matrix(a)
    n = a.shape[0]
    nil = is_nilpotent(a)
    shift = 0j if nil else _boundary_centroid(a)
    b = a - shift * np.eye(n)
    norm = opnorm(a)
    discrepancies = []

    poly = coeffs = None
    sings, checks, flats = [], [], []
    if n == 4:
        poly = nr_poly_general(b)
        if nil:
            coeffs = nr_poly_nilpotent(b)
            gap = float(np.max(np.abs(coeffs.expand().coeffs - poly.coeffs)))
            if gap > 1e-9 * max(1.0, float(np.max(np.abs(poly.coeffs)))):
                discrepancies.append(f"closed-form coefficients differ by {gap:.3g}")
        sings = find_singularities_of(b, radius, grid_n, tol, poly)
        checks = [check_singularity(poly, s) for s in sings]
        flats = [c.flat for c in checks if c.flat is not None]

    sweep = flats_via_rotation_sweep(b, n_phi)

    if poly is not None:
        for f in flats:
            if not any(_flats_match(f, g) for g in sweep):
                discrepancies.append(
                    f"singularity flat at ({f.line_u0:.9g}, {f.line_v0:.9g}) has no sweep match"
                )
        for g in sweep:
            if not any(_flats_match(f, g) for f in flats):
                discrepancies.append(
                    f"sweep flat at angle {g.angle_of_line:.9g} has no singularity match"
                )

    canonical = flats if poly is not None else sweep
    axis = angle = None
    if len(canonical) == 2:
        f1, f2 = canonical
        angle = angle_between(f1, f2)
        if abs(f1.distance - f2.distance) <= 1e-8 * max(f1.distance, f2.distance):
            axis = ((f1.angle_of_line + f2.angle_of_line) / 2) % math.pi

    return FlatReport(
        nilpotent=nil,
        shift=shift,
        norm=norm,
        polynomial=poly,
        nilpotent_coefficients=coeffs,
        singularities=sings,
        checks=checks,
        flats=[f.translated(shift) for f in canonical],
        sweep_flats=[f.translated(shift) for f in sweep],
        matched=not discrepancies,
        discrepancies=discrepancies,
        symmetry_axis=axis,
        flat_angle=angle,
    )

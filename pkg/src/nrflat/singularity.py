"""Real affine singular points of the generating polynomial, ``grad p(u, v, 1) = 0``."""

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "Singularity",
    "find_real_singularities",
    "check_coefficient_consistency",
    "default_radius",
]

DEDUP_RADIUS = 1e-6
MAX_NEWTON_STEPS = 50
MAX_HALVINGS = 10
# A step that shrinks the residual by less than this factor means the seed
# is stalled near a local minimum of |grad p| that is not a root.
STALL_RATIO = 0.99


@dataclass(frozen=True)
class Singularity:
    """
    A real point ``(u0, v0)`` with ``grad p(u0, v0, 1) = 0``.

    It names the line ``u0 x + v0 y + 1 = 0``, at distance
    ``1/sqrt(u0^2 + v0^2)`` from the origin.  ``line_angle`` is the polar
    angle of ``(u0, v0)``; the outward normal of the line points the
    opposite way.
    """

    u0: float
    v0: float
    grad_residual: float
    hessian_degenerate: bool = False

    @property
    def distance_to_origin_of_line(self):
        return 1 / math.hypot(self.u0, self.v0)

    @property
    def line_angle(self):
        return math.atan2(self.v0, self.u0)

    def to_json(self):
        return {
            "u0": self.u0,
            "v0": self.v0,
            "grad_residual": self.grad_residual,
            "distance": self.distance_to_origin_of_line,
            "line_angle": self.line_angle,
            "hessian_degenerate": self.hessian_degenerate,
        }


def default_radius(support_values):
    """
    Search radius in ``(u, v)`` space from sampled support values of ``W(A)``.

    A support line at distance ``h`` corresponds to ``|(u, v)| = 1/h``, so
    twice the reciprocal of the smallest support value covers every support
    line with margin.
    """
    h = np.asarray(support_values, dtype=float)
    scale = float(np.max(np.abs(h)))
    if scale == 0:
        return 1.0
    return 2.0 / max(float(np.min(h)), 1e-3 * scale)


def _residual(p, u, v):
    jet = p.affine_jet(u, v)
    return np.hypot(jet[:, 1], jet[:, 2]), jet


def _newton_step(p, u, v, r, jet):
    gu, gv = jet[:, 1], jet[:, 2]
    a11, a12, a22 = jet[:, 4], jet[:, 5], jet[:, 6]
    # Levenberg-regularized Newton step on the symmetric 2x2 Jacobian; the
    # damping is negligible unless the Hessian is near singular.
    mu = 1e-26 * (a11**2 + 2 * a12**2 + a22**2) + 1e-300
    j11 = a11 * a11 + a12 * a12 + mu
    j12 = a11 * a12 + a12 * a22
    j22 = a12 * a12 + a22 * a22 + mu
    b1 = a11 * gu + a12 * gv
    b2 = a12 * gu + a22 * gv
    det = j11 * j22 - j12 * j12
    du = -(j22 * b1 - j12 * b2) / det
    dv = -(j11 * b2 - j12 * b1) / det

    # The same linear step, taken in polar coordinates about the origin.  The
    # curve is a set of nested ovals around the origin, and a nearly double
    # oval gives a long curved valley of small |grad p|; polar updates follow
    # it where Cartesian ones leave it and stall.
    rho = np.hypot(u, v)
    polar = rho > 1e-12
    c = np.where(polar, u / np.where(polar, rho, 1.0), 1.0)
    s = np.where(polar, v / np.where(polar, rho, 1.0), 0.0)
    drho = c * du + s * dv
    dphi = (c * dv - s * du) / np.where(polar, rho, 1.0)
    phi = np.arctan2(v, u)

    # Halve the step until the residual decreases.
    new_u, new_v, new_r = u.copy(), v.copy(), r.copy()
    moved = np.zeros(u.shape, dtype=bool)
    todo = np.arange(u.size)
    lam = 1.0
    for _ in range(MAX_HALVINGS):
        if todo.size == 0:
            break
        tp = phi[todo] + lam * dphi[todo]
        trho = rho[todo] + lam * drho[todo]
        tu = np.where(polar[todo], trho * np.cos(tp), u[todo] + lam * du[todo])
        tv = np.where(polar[todo], trho * np.sin(tp), v[todo] + lam * dv[todo])
        tr, _ = _residual(p, tu, tv)
        ok = np.isfinite(tr) & (tr < STALL_RATIO * r[todo])
        idx = todo[ok]
        new_u[idx], new_v[idx], new_r[idx] = tu[ok], tv[ok], tr[ok]
        moved[idx] = True
        todo = todo[~ok]
        lam /= 2
    return new_u, new_v, moved


def _newton(p, u, v, tol, bound):
    u, v = u.copy(), v.copy()
    live = np.arange(u.size)
    for _ in range(MAX_NEWTON_STEPS):
        r, jet = _residual(p, u[live], v[live])
        # Seeds run until they stall at the rounding floor (so that points
        # in an ill-conditioned valley still settle on the singularity) or
        # until they leave the search box far behind.
        busy = (r > 0) & (np.hypot(u[live], v[live]) <= bound)
        live, r, jet = live[busy], r[busy], jet[busy]
        if live.size == 0:
            break
        nu, nv, moved = _newton_step(p, u[live], v[live], r, jet)
        u[live], v[live] = nu, nv
        live = live[moved]
    return u, v


def find_real_singularities(p, radius, grid_n=64, tol=1e-10):
    """
    Real solutions of ``grad p(u, v, 1) = 0`` found from a grid of Newton seeds.

    Seeds cover ``[-radius, radius]^2`` with ``grid_n`` points per axis.
    Damped Newton drives ``(p_u, p_v)`` to zero; a limit is kept only if the
    full gradient, including ``p_w``, has norm at most ``tol``.  Points closer
    than ``1e-6`` are merged.  The result is sorted by polar angle, then
    radius, and is independent of seed evaluation order.
    """
    if radius <= 0:
        raise ValueError("radius must be positive")
    if grid_n < 8:
        raise ValueError("grid_n must be at least 8")
    if tol <= 0:
        raise ValueError("tol must be positive")

    axis = np.linspace(-radius, radius, grid_n)
    u, v = (x.ravel() for x in np.meshgrid(axis, axis, indexing="ij"))
    with np.errstate(all="ignore"):
        u, v = _newton(p, u, v, tol, 4 * radius)
        jet = p.affine_jet(u, v)
        res = np.linalg.norm(jet[:, 1:4], axis=1)
    keep = np.isfinite(res) & (res <= tol) & (np.hypot(u, v) <= 2 * radius)

    found = []
    for i in np.argsort(res[keep], kind="stable"):
        ui, vi, ri = u[keep][i], v[keep][i], res[keep][i]
        if any(math.hypot(ui - s[0], vi - s[1]) <= DEDUP_RADIUS for s in found):
            continue
        found.append((float(ui), float(vi), float(ri)))

    out = []
    for ui, vi, ri in found:
        a11, a12, a22 = p.hessian_uv(ui, vi, 1.0)
        scale = max(abs(a11), abs(a12), abs(a22)) ** 2
        degenerate = abs(a11 * a22 - a12 * a12) <= 1e-12 * scale
        out.append(Singularity(ui, vi, ri, bool(degenerate)))
    out.sort(key=lambda s: (round(s.line_angle, 9), math.hypot(s.u0, s.v0)))
    return out


def singularity_system(u, v):
    """
    Rows of the linear system in ``(c1, ..., c6)`` that expresses
    ``grad p(u, v, 1) = 0`` for the nilpotent normal form, with right-hand
    sides.
    """
    m = np.array([
        [4 * u**3 + 2 * u * v**2, v**3 + 3 * u**2 * v, 3 * u**2 + v**2,
         2 * u * v**2, 2 * u, 2 * u * v],
        [2 * u**2 * v, u**3 + 3 * u * v**2, 2 * u * v,
         4 * v**3 + 2 * u**2 * v, 2 * v, u**2 + 3 * v**2],
        [0.0, 0.0, u**3 + u * v**2, 0.0, 2 * u**2 + 2 * v**2, v**3 + u**2 * v],
    ])
    rhs = np.array([0.0, 0.0, -4.0])
    return m, rhs


def check_coefficient_consistency(c, u0, v0, tol=1e-9):
    """
    True iff ``c = (c1..c6)`` solves the singularity system at ``(u0, v0, 1)``.

    Independent of the polynomial evaluation code: it uses the linear system
    in the six nilpotent coefficients directly.
    """
    if u0 == 0 and v0 == 0:
        raise ValueError("(u0, v0) must be nonzero")
    m, rhs = singularity_system(u0, v0)
    coeffs = np.array(c.as_tuple() if hasattr(c, "as_tuple") else c, dtype=float)
    return bool(np.max(np.abs(m @ coeffs - rhs)) <= tol)

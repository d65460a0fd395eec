"""
Sampled boundary of the numerical range, used as an independent oracle.

For each direction ``phi`` the top eigenvector ``xi`` of ``Re(exp(-i phi) A)``
gives the boundary point ``<A xi, xi>`` on the support line
``x cos(phi) + y sin(phi) = h(phi)``.  Where the top eigenvalue is
degenerate the whole segment ``W(A)`` shares with that line is emitted as
three points: its two ends and its midpoint.  Flat portions then show up as
runs of collinear vertices, which :func:`extract_flats_geometric` recovers
without looking at the generating polynomial.
"""

import io
import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from .flatdetect import FlatPortion
from .linalg import as_matrix, eig_hermitian, hermitian_parts, opnorm
from .parallel import ordered_map
from .support import gap_minima, refine_gap_minimum, rotated_parts, top_extremes

__all__ = [
    "BoundarySample",
    "BoundaryTrace",
    "sample_boundary",
    "extract_flats_geometric",
    "check_symmetry",
    "hausdorff_to_polyline",
    "is_convex",
    "discretization_bound",
    "signed_distance",
    "render_svg",
]

DEGENERATE_GAP = 1e-9
CONVEX_TOL = 1e-8
DUPLICATE_TOL = 1e-12
CHUNK = 512


@dataclass(frozen=True)
class BoundarySample:
    phi: float
    support_value: float
    point: tuple
    eigen_gap: float


@dataclass(frozen=True, eq=False)
class BoundaryTrace:
    """Samples in counter-clockwise order and the closed polyline through them."""

    samples: tuple
    polyline: np.ndarray
    norm: float
    n: int

    @property
    def phis(self):
        return np.array([s.phi for s in self.samples])

    @property
    def support_values(self):
        return np.array([s.support_value for s in self.samples])

    @property
    def gaps(self):
        return np.array([s.eigen_gap for s in self.samples])

    def to_csv(self):
        buf = io.StringIO()
        buf.write("phi,support,x,y,gap\n")
        for s in self.samples:
            buf.write(",".join(
                _fmt(v) for v in (s.phi, s.support_value, s.point[0], s.point[1], s.eigen_gap)
            ) + "\n")
        return buf.getvalue()


def _fmt(x):
    return format(float(x), ".17g")


def _grid_chunk(args):
    h, k, a, phis = args
    re, _ = rotated_parts(h, k, phis)
    w, vecs = eig_hermitian(re)
    top = vecs[..., -1]
    points = np.einsum("ni,ij,nj->n", top.conj(), a, top)
    gaps = w[:, -1] - w[:, -2] if w.shape[1] > 1 else np.full(len(phis), np.inf)
    return w[:, -1], points, gaps


def _segment_samples(h, k, phi, cluster_tol):
    support, lo, hi, _, gap = top_extremes(h, k, phi, cluster_tol)
    return [
        BoundarySample(float(phi), support, (z.real, z.imag), gap)
        for z in (lo, (lo + hi) / 2, hi)
    ]


def sample_boundary(a, n=1024, refine=True, workers=None):
    """
    Sample ``W(A)`` at ``n`` uniform directions ``phi = 2 pi j / n``.

    Directions whose eigen gap is below ``1e-9 ||A||`` contribute the ends
    and midpoint of the segment in that support line.  With ``refine`` set,
    each small discrete minimum of the gap is also located to ``1e-12`` in
    ``phi`` by golden-section search, and if the gap there is degenerate the
    segment is inserted at that direction.  Sampling is split in chunks
    that may run on ``workers`` threads; assembly is always in ``phi``
    order, so the result does not depend on the worker count.
    """
    if n < 64:
        raise ValueError("n must be at least 64")
    a = as_matrix(a)
    norm = opnorm(a)
    h, k = hermitian_parts(a)
    dphi = 2 * math.pi / n
    phis = dphi * np.arange(n)
    chunks = [phis[i:i + CHUNK] for i in range(0, n, CHUNK)]
    parts = ordered_map(_grid_chunk, [(h, k, a, c) for c in chunks], workers)
    support = np.concatenate([p[0] for p in parts])
    points = np.concatenate([p[1] for p in parts])
    gaps = np.concatenate([p[2] for p in parts])

    degenerate = DEGENERATE_GAP * norm
    entries = []
    for j, phi in enumerate(phis):
        if norm > 0 and gaps[j] <= degenerate:
            entries.append((phi, _segment_samples(h, k, phi, degenerate)))
        else:
            z = points[j]
            entries.append((phi, [BoundarySample(
                float(phi), float(support[j]), (float(z.real), float(z.imag)), float(gaps[j])
            )]))

    if refine and norm > 0 and a.shape[0] > 1:
        for i in gap_minima(gaps, 2 * dphi * norm):
            if gaps[i] <= degenerate:
                continue
            phi, gap = refine_gap_minimum(h, k, phis[i] - dphi, phis[i] + dphi)
            if gap <= degenerate:
                entries.append((phi % (2 * math.pi), _segment_samples(h, k, phi, degenerate)))
    entries.sort(key=lambda e: e[0])

    samples = tuple(s for _, group in entries for s in group)
    polyline = np.array([s.point for s in samples], dtype=float)
    return BoundaryTrace(samples, polyline, norm, n)


def _dedup(polyline, tol):
    """Drop vertices equal (within ``tol``) to their predecessor, cyclically."""
    keep = [0]
    for i in range(1, len(polyline)):
        if np.linalg.norm(polyline[i] - polyline[keep[-1]]) > tol:
            keep.append(i)
    if len(keep) > 1 and np.linalg.norm(polyline[keep[-1]] - polyline[keep[0]]) <= tol:
        keep.pop()
    return polyline[keep]


def is_convex(polyline, norm=None, tol=CONVEX_TOL):
    """
    Cross-product test: no vertex lies more than ``tol * norm`` to the right
    of the line through the previous edge.
    """
    p = np.asarray(polyline, dtype=float)
    scale = norm if norm is not None else float(np.max(np.linalg.norm(p, axis=1), initial=0))
    p = _dedup(p, DUPLICATE_TOL * max(scale, 1e-300))
    if len(p) < 3:
        return True
    e = np.roll(p, -1, axis=0) - p
    nxt = np.roll(e, -1, axis=0)
    length = np.linalg.norm(e, axis=1)
    height = (e[:, 0] * nxt[:, 1] - e[:, 1] * nxt[:, 0]) / length
    return bool(np.min(height) >= -tol * scale)


def discretization_bound(trace):
    """
    Upper bound on ``h(phi) - max_v (cos phi, sin phi) . v`` over all ``phi``.

    Between two consecutive support points the boundary lies in the triangle
    cut off by the chord and the two support lines; its height is at most
    ``|chord| tan(dphi / 2) / 2``.
    """
    p = trace.polyline
    phis = trace.phis
    chord = np.linalg.norm(np.roll(p, -1, axis=0) - p, axis=1)
    dphi = (np.roll(phis, -1) - phis) % (2 * math.pi)
    return float(np.max(chord * np.tan(dphi / 2) / 2, initial=0.0))


def _turn(e1, e2):
    cross = e1[0] * e2[1] - e1[1] * e2[0]
    dot = e1[0] * e2[0] + e1[1] * e2[1]
    return abs(math.atan2(cross, dot))


def extract_flats_geometric(trace, samples=None, angle_tol=1e-6, collinear_tol=1e-6):
    """
    Flat portions read off a sampled boundary.

    After merging coincident vertices, a flat is a maximal cyclic run of at
    least three consecutive vertices in which consecutive edges turn by at
    most ``angle_tol`` and every vertex lies within ``collinear_tol * ||A||``
    of the chord joining the run's ends.  Its endpoints are the run's ends
    and its line is that chord, oriented with the polygon on the inner side.

    ``trace`` is a :class:`BoundaryTrace`; alternatively pass a bare polyline
    with ``samples`` giving the operator norm via ``BoundaryTrace.norm``.
    """
    if isinstance(trace, BoundaryTrace):
        polyline, norm = trace.polyline, trace.norm
    else:
        polyline = np.asarray(trace, dtype=float)
        norm = samples.norm if isinstance(samples, BoundaryTrace) else float(
            np.max(np.linalg.norm(polyline, axis=1), initial=0)
        )
    if norm == 0:
        return []
    p = _dedup(polyline, DUPLICATE_TOL * norm)
    m = len(p)
    if m < 3:
        return []
    edges = np.roll(p, -1, axis=0) - p
    straight = np.array([_turn(edges[i - 1], edges[i]) <= angle_tol for i in range(m)])
    if straight.all():
        return []

    # Vertex i is interior to a run when the turn at i is small.  Start the
    # scan at a corner so that no run wraps around the starting index.
    start = int(np.argmin(straight))
    order = [(start + j) % m for j in range(m)]
    flats = []
    j = 0
    while j < m:
        i0 = order[j]
        run = [i0]
        j += 1
        while j < m and straight[order[j]]:
            run.append(order[j])
            j += 1
        run.append(order[j] if j < m else order[0])
        if len(run) < 3:
            continue
        z1 = complex(*p[run[0]])
        z2 = complex(*p[run[-1]])
        chord = z2 - z1
        length = abs(chord)
        if length <= 1e-7 * norm:
            continue
        normal = -1j * chord / length
        dev = max(abs(((complex(*p[r]) - z1) * normal.conjugate()).real) for r in run)
        if dev > collinear_tol * norm:
            continue
        phi = math.atan2(normal.imag, normal.real)
        support = (z1 * normal.conjugate()).real
        flats.append(FlatPortion.from_support(phi, support, z1, z2, "geometric"))
    flats.sort(key=lambda f: f.angle_of_line % (2 * math.pi))
    return flats


def _segment_distance(q, a, b):
    ab = b - a
    denom = np.einsum("ij,ij->i", ab, ab)
    t = np.einsum("ij,ij->i", q - a, ab) / np.where(denom > 0, denom, 1.0)
    t = np.clip(np.where(denom > 0, t, 0.0), 0.0, 1.0)
    return np.linalg.norm(q - (a + t[:, None] * ab), axis=1)


def hausdorff_to_polyline(points, polyline, k=8):
    """
    ``max_q dist(q, P)`` for query points ``q`` and the closed polyline ``P``.

    Distances are to the polyline's segments, not just its vertices: for
    each query the ``k`` nearest vertices and the segments on both sides of
    them are examined.
    """
    points = np.asarray(points, dtype=float)
    poly = np.asarray(polyline, dtype=float)
    m = len(poly)
    if m == 0 or len(points) == 0:
        return 0.0
    if m == 1:
        return float(np.max(np.linalg.norm(points - poly[0], axis=1)))
    k = min(k, m)
    _, idx = cKDTree(poly).query(points, k=k)
    idx = np.asarray(idx).reshape(len(points), k)
    best = np.full(len(points), np.inf)
    for col in range(k):
        i = idx[:, col]
        for a, b in ((i, (i + 1) % m), ((i - 1) % m, i)):
            best = np.minimum(best, _segment_distance(points, poly[a], poly[b]))
    return float(np.max(best))


def reflect(points, line_angle):
    """Reflect plane points about the line through the origin at ``line_angle``."""
    c, s = math.cos(2 * line_angle), math.sin(2 * line_angle)
    m = np.array([[c, s], [s, -c]])
    return np.asarray(points, dtype=float) @ m.T


def check_symmetry(trace, line_angle):
    """
    Hausdorff distance between the polyline and its mirror image in the line
    through the origin at ``line_angle``.

    Every vertex is reflected and its distance to the original polyline's
    segments is measured.  The reflection is an isometric involution, so
    this one-sided maximum already equals the symmetric Hausdorff distance
    (up to the vertex-versus-segment discretization).
    """
    poly = trace.polyline if isinstance(trace, BoundaryTrace) else np.asarray(trace, dtype=float)
    if len(poly) == 0:
        raise ValueError("polyline is empty")
    mirrored = reflect(poly, line_angle)
    return max(hausdorff_to_polyline(mirrored, poly), hausdorff_to_polyline(poly, mirrored))


def signed_distance(polyline, point):
    """
    Signed distance from ``point`` to the convex polygon (negative inside).

    Exact inside; outside it is the largest violated edge half-plane, which
    is a lower bound on the true distance.
    """
    p = _dedup(np.asarray(polyline, dtype=float), 0.0)
    e = np.roll(p, -1, axis=0) - p
    length = np.linalg.norm(e, axis=1)
    ok = length > 0
    e, p, length = e[ok], p[ok], length[ok]
    outward = np.stack([e[:, 1], -e[:, 0]], axis=1) / length[:, None]
    q = np.asarray(point, dtype=float)
    return float(np.max(np.einsum("ij,ij->i", q - p, outward)))


def inradius(trace):
    """Smallest support value (distance from the origin to the nearest support line)."""
    return float(np.min(trace.support_values))


def circumradius(trace):
    return float(np.max(np.linalg.norm(trace.polyline, axis=1), initial=0.0))


def render_svg(trace, flats=(), symmetry_angle=None, size=480, title=None):
    """
    SVG drawing of the sampled boundary.

    The polyline is drawn as a closed path, flats as thick highlighted
    segments with dots at their endpoints, and the symmetry axis (if given)
    as a dashed line through the origin.  The view box covers the data with
    a 10% margin; the y axis points up.
    """
    poly = trace.polyline
    pts = [poly] + [np.array([f.endpoint1, f.endpoint2]) for f in flats]
    pts.append(np.zeros((1, 2)))
    allp = np.concatenate(pts)
    lo, hi = allp.min(axis=0), allp.max(axis=0)
    span = float(max(hi[0] - lo[0], hi[1] - lo[1], 1e-12))
    margin = 0.1 * span
    x0, y0 = lo[0] - margin, -(hi[1] + margin)
    w, h = (hi[0] - lo[0]) + 2 * margin, (hi[1] - lo[1]) + 2 * margin
    stroke = span / 400

    def xy(p):
        return f"{_num(p[0])},{_num(-p[1])}"

    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" '
        f'height="{int(round(size * h / w))}" '
        f'viewBox="{_num(x0)} {_num(y0)} {_num(w)} {_num(h)}">',
    ]
    if title:
        out.append(f"<title>{_escape(title)}</title>")
    axis_style = f'stroke="#bbbbbb" stroke-width="{_num(stroke / 2)}"'
    out.append(f'<line x1="{_num(x0)}" y1="0" x2="{_num(x0 + w)}" y2="0" {axis_style}/>')
    out.append(f'<line x1="0" y1="{_num(y0)}" x2="0" y2="{_num(y0 + h)}" {axis_style}/>')
    if len(poly):
        d = "M " + " L ".join(xy(p) for p in poly) + " Z"
        out.append(
            f'<path d="{d}" fill="#dde8f4" stroke="#1f4e79" '
            f'stroke-width="{_num(stroke)}" stroke-linejoin="round"/>'
        )
    if symmetry_angle is not None:
        r = span
        c, s = math.cos(symmetry_angle), math.sin(symmetry_angle)
        out.append(
            f'<line x1="{_num(-r * c)}" y1="{_num(r * s)}" x2="{_num(r * c)}" '
            f'y2="{_num(-r * s)}" stroke="#555555" stroke-width="{_num(stroke)}" '
            f'stroke-dasharray="{_num(6 * stroke)},{_num(4 * stroke)}"/>'
        )
    for f in flats:
        out.append(
            f'<line x1="{_num(f.endpoint1[0])}" y1="{_num(-f.endpoint1[1])}" '
            f'x2="{_num(f.endpoint2[0])}" y2="{_num(-f.endpoint2[1])}" '
            f'stroke="#c0392b" stroke-width="{_num(3 * stroke)}" stroke-linecap="round"/>'
        )
        for e in (f.endpoint1, f.endpoint2):
            out.append(
                f'<circle cx="{_num(e[0])}" cy="{_num(-e[1])}" r="{_num(4 * stroke)}" '
                'fill="#c0392b"/>'
            )
    out.append("</svg>")
    return "\n".join(out) + "\n"


def _num(x):
    return format(float(x), ".8g")


def _escape(text):
    return text.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")

"""
Verification suites behind ``nrflat verify``.

Each check returns a :class:`CriterionResult`.  The ``paper`` suite holds
the deterministic checks of closed-form results against both detectors and
the sampled boundary; the ``random`` suite is the flat-count property over
random nilpotent matrices.
"""

import math
import time
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import qmc, unitary_group

from .boundary import (
    check_symmetry,
    extract_flats_geometric,
    hausdorff_to_polyline,
    sample_boundary,
)
from .family import (
    FamilyParams,
    build_Ak,
    build_family_matrix,
    build_M,
    maximal_side,
    params_from_unit,
    predicted_flats,
    symmetry_line,
    trace_invariant,
)
from .flatdetect import (
    analyze,
    angle_between,
    find_singularities_of,
    flats_via_rotation_sweep,
)
from .linalg import opnorm, trace_words
from .nrpoly import EXPONENTS, TernaryQuartic, nr_poly_general, nr_poly_nilpotent
from .parallel import ordered_map

__all__ = ["CriterionResult", "run_suite", "CRITERIA", "random_nilpotent"]

GAU_WU = np.array([
    [0, 1, 0, -2],
    [0, 0, 2, 1j],
    [0, 0, 0, 1],
    [0, 0, 0, 0],
])
K_PI_6 = math.sqrt(1 - math.sqrt(3) / 2)
K_9PI_10 = math.sqrt(math.sqrt(math.sqrt(5) / 8 + 5 / 8) + 1)


@dataclass
class CriterionResult:
    number: int
    title: str
    passed: bool
    seconds: float = 0.0
    metrics: dict = field(default_factory=dict)
    detail: str = ""

    def line(self):
        status = "PASS" if self.passed else "FAIL"
        return f"{self.number}\t{status}\t{self.seconds:.1f}\t{self.title}\t{self.detail}"

    def to_json(self):
        return {
            "criterion": self.number,
            "title": self.title,
            "passed": self.passed,
            "seconds": self.seconds,
            "metrics": self.metrics,
            "detail": self.detail,
        }


def _pair(found, expected, key=lambda f: f.angle_of_line):
    """Match each expected flat to the found flat with the nearest normal angle."""
    out = []
    for e in expected:
        def gap(f):
            d = abs(key(f) - key(e)) % (2 * math.pi)
            return min(d, 2 * math.pi - d)
        out.append(min(found, key=gap) if found else None)
    return out


def _flat_errors(found, expected):
    """Largest distance, length and normal-angle errors over matched pairs."""
    errs = {"distance": 0.0, "length": 0.0, "normal": 0.0, "endpoint": 0.0}
    for f, e in zip(_pair(found, expected), expected):
        if f is None:
            return {k: math.inf for k in errs}
        d = abs(f.angle_of_line - e.angle_of_line) % (2 * math.pi)
        errs["normal"] = max(errs["normal"], min(d, 2 * math.pi - d))
        errs["distance"] = max(errs["distance"], abs(f.distance - e.distance))
        errs["length"] = max(errs["length"], abs(f.length - e.length))
        straight = max(abs(f.z1 - e.z1), abs(f.z2 - e.z2))
        crossed = max(abs(f.z1 - e.z2), abs(f.z2 - e.z1))
        errs["endpoint"] = max(errs["endpoint"], min(straight, crossed))
    return errs


def _timed(number, title, fn):
    start = time.perf_counter()
    passed, metrics, detail = fn()
    return CriterionResult(number, title, bool(passed), time.perf_counter() - start, metrics, detail)


def gau_wu(n_oracle=4096):
    def run():
        rep = analyze(GAU_WU)
        oracle = extract_flats_geometric(sample_boundary(GAU_WU, n_oracle))
        length = 2 * math.sqrt(55) / 19
        dist = math.sqrt(5) / 2
        angle = 2 * math.asin(math.sqrt(5) / 4)
        ok = len(rep.flats) == 2 and len(oracle) == 2
        m = {"flats": len(rep.flats), "oracle_flats": len(oracle)}
        if ok:
            m["distance_err"] = max(abs(f.distance - dist) for f in rep.flats)
            m["angle_err"] = abs(angle_between(*rep.flats) - angle)
            m["length_err"] = max(abs(f.length - length) for f in rep.flats)
            m["oracle_length_err"] = max(abs(f.length - length) for f in oracle)
            ok = (m["distance_err"] <= 1e-8 and m["angle_err"] <= 1e-8
                  and m["length_err"] <= 1e-6 and m["oracle_length_err"] <= 1e-3)
        return ok, m, f"length {length:.10f}, distance {dist:.10f}"
    return _timed(1, "Gau-Wu matrix: two flats", run)


def random_strict_upper(rng, n=4):
    z = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return np.triu(z, 1)


def closed_form_equivalence(samples=100, seed=0):
    def run():
        rng = np.random.default_rng(seed)
        worst = 0.0
        for _ in range(samples):
            a = random_strict_upper(rng)
            diff = nr_poly_nilpotent(a).expand().coeffs - nr_poly_general(a).coeffs
            worst = max(worst, float(np.max(np.abs(diff))))
        return worst <= 1e-9, {"max_abs": worst, "samples": samples}, f"max |diff| {worst:.3g}"
    return _timed(2, "closed-form coefficients equal interpolated ones", run)


def sobol_params(samples, seed, with_t=False):
    dim = 5 if with_t else 4
    with warnings.catch_warnings():
        # Balance properties need a power-of-two count; uniform coverage is enough here.
        warnings.simplefilter("ignore", UserWarning)
        points = qmc.Sobol(dim, scramble=True, seed=seed).random(samples)
    return [params_from_unit(p, with_t=with_t) for p in points]


def _round_trip_one(params, n_oracle):
    a = build_family_matrix(params)
    pred = predicted_flats(params)
    rep = analyze(a)
    oracle = extract_flats_geometric(sample_boundary(a, n_oracle))
    out = {"flats": len(rep.flats), "oracle_flats": len(oracle)}
    if len(rep.flats) != 2 or len(oracle) != 2:
        return out
    e = _flat_errors(rep.flats, pred.flats)
    o = _flat_errors(oracle, pred.flats)
    out["closed"] = max(e["distance"], e["length"], e["normal"],
                        abs(angle_between(*rep.flats) - params.theta))
    out["oracle"] = max(o["distance"], o["length"], o["normal"],
                        abs(angle_between(*oracle) - params.theta))
    return out


def family_round_trip(samples=200, seed=1, n_oracle=2048, workers=None):
    def run():
        params = sobol_params(samples, seed)
        rows = ordered_map(lambda p: _round_trip_one(p, n_oracle), params, workers)
        bad = [i for i, r in enumerate(rows) if r["flats"] != 2 or r["oracle_flats"] != 2]
        closed = max((r.get("closed", math.inf) for r in rows), default=0.0)
        oracle = max((r.get("oracle", math.inf) for r in rows), default=0.0)
        ok = not bad and closed <= 1e-7 and oracle <= 1e-3
        m = {"samples": samples, "wrong_count": bad, "closed_err": closed, "oracle_err": oracle}
        return ok, m, f"closed {closed:.3g}, oracle {oracle:.3g}, wrong counts {len(bad)}"
    return _timed(3, "family round trip", run)


def example_angles():
    def run():
        m = {}
        ok = True
        for name, k, theta in (("pi/6", K_PI_6, math.pi / 6), ("9pi/10", K_9PI_10, 0.9 * math.pi)):
            rep = analyze(build_Ak(k))
            if len(rep.flats) != 2:
                m[name] = math.inf
                ok = False
                continue
            m[name] = abs(angle_between(*rep.flats) - theta)
            ok = ok and m[name] <= 1e-8
        return ok, m, f"k = {K_PI_6:.10f}, {K_9PI_10:.10f}"
    return _timed(4, "A_k flat angles", run)


def maximal_length(n_oracle=4096):
    def run():
        theta = 2 * math.pi / 3
        a = build_M(1.0, theta)
        rep = analyze(a)
        oracle = extract_flats_geometric(sample_boundary(a, n_oracle))
        m = {"flats": len(rep.flats), "oracle_flats": len(oracle)}
        ok = len(rep.flats) == 2 and len(oracle) == 2
        if ok:
            m["length_err"] = max(abs(f.length - 1) for f in rep.flats)
            m["oracle_err"] = max(abs(f.length - 1) for f in oracle)
            side = maximal_side(1.0, theta)
            smaller = analyze(build_family_matrix(FamilyParams(1.0, theta, 0.99 * side, side)))
            m["perturbed_length"] = max((f.length for f in smaller.flats), default=math.nan)
            ok = (m["length_err"] <= 1e-7 and m["oracle_err"] <= 1e-3
                  and len(smaller.flats) == 2 and m["perturbed_length"] < 1)
        return ok, m, "L_max = d = 1"
    return _timed(5, "maximal flat length", run)


def symmetry(samples=50, seed=2, n=2048, workers=None):
    def one(params):
        a = build_family_matrix(params)
        sings = find_singularities_of(a)
        if len(sings) != 2:
            return math.inf
        s1, s2 = sings
        axis = symmetry_line(s1.line_angle, s2.line_angle)
        return check_symmetry(sample_boundary(a, n), axis) / opnorm(a)

    def run():
        params = sobol_params(samples, seed, with_t=True)
        worst = max(ordered_map(one, params, workers))
        return worst <= 1e-5, {"max_rel_hausdorff": worst}, f"max {worst:.3g} x ||A||"
    return _timed(6, "reflection symmetry", run)


def random_nilpotent(rng, kind):
    """
    A random nilpotent 4x4 matrix, conjugated by a random unitary.

    ``kind`` 0: dense Gaussian strictly upper triangle; 1: sparse entries
    from a small integer set (flats are common); 2: a family member.
    """
    if kind == 0:
        core = random_strict_upper(rng)
    elif kind == 1:
        values = np.array([0, 0, 1, -1, 2, -2, 1j, -1j, 2j])
        core = np.triu(rng.choice(values, size=(4, 4)), 1)
    else:
        core = build_family_matrix(params_from_unit(rng.random(5), with_t=True))
    q = unitary_group.rvs(4, random_state=rng)
    return q @ core @ q.conj().T


def _flat_count(args):
    seed, index = args
    rng = np.random.default_rng([seed, index])
    return len(flats_via_rotation_sweep(random_nilpotent(rng, index % 3)))


def flat_count(samples=1000, seed=42, workers=None):
    def run():
        counts = ordered_map(_flat_count, [(seed, i) for i in range(samples)], workers,
                             processes=True, chunksize=16)
        hist = np.bincount(counts, minlength=3).tolist()
        worst = max(counts, default=0)
        return worst <= 2, {"samples": samples, "histogram": hist}, f"histogram {hist}"
    return _timed(7, "at most two flats", run)


def derivatives(samples=1000, seed=3, step=1e-5):
    def run():
        rng = np.random.default_rng(seed)
        worst = 0.0
        for _ in range(samples):
            p = TernaryQuartic(rng.normal(size=len(EXPONENTS)))
            x = rng.uniform(-2, 2, size=3)
            g = np.array(p.gradient(*x))
            hs = np.array(p.hessian(*x))
            fd_g = np.empty(3)
            fd_h = np.empty((3, 3))
            for i in range(3):
                e = np.zeros(3)
                e[i] = step
                fd_g[i] = (p(*(x + e)) - p(*(x - e))) / (2 * step)
                fd_h[i] = (np.array(p.gradient(*(x + e))) - np.array(p.gradient(*(x - e)))) / (2 * step)
            scale = 1e-3 * float(np.sum(np.abs(p.coeffs))) * max(1.0, float(np.max(np.abs(x)))) ** 4
            worst = max(
                worst,
                float(np.max(np.abs(g - fd_g))) / max(float(np.max(np.abs(g))), scale),
                float(np.max(np.abs(hs - fd_h))) / max(float(np.max(np.abs(hs))), scale),
            )
        return worst <= 1e-6, {"max_rel": worst}, f"max relative {worst:.3g}"
    return _timed(8, "gradient and Hessian vs finite differences", run)


def disk(n=1024):
    def run():
        j4 = np.diag(np.ones(3), 1)
        rep = analyze(j4)
        trace = sample_boundary(j4, n)
        radius = math.cos(math.pi / 5)
        err = float(np.max(np.abs(np.linalg.norm(trace.polyline, axis=1) - radius)))
        m = {"singularities": len(rep.singularities), "flats": len(rep.flats),
             "sweep_flats": len(rep.sweep_flats), "radius_err": err}
        ok = not rep.singularities and not rep.flats and not rep.sweep_flats and err <= 1e-6
        return ok, m, f"radius error {err:.3g}"
    return _timed(9, "J4 circular disk", run)


def trace_invariants(samples=200, seed=4, n=2048):
    def run():
        worst = 0.0
        for params in sobol_params(samples, seed, with_t=True):
            got = trace_words(build_family_matrix(params)).beta22
            worst = max(worst, abs(got - trace_invariant(params)))
        d, theta = 1.0, 1.2
        p1 = FamilyParams(d, theta, 1.0, 1.2)
        p2 = FamilyParams(d, theta, 1.2, 1.0)
        a1, a2 = build_family_matrix(p1), build_family_matrix(p2)
        split = abs(trace_words(a1).beta22 - trace_words(a2).beta22)
        haus = _hausdorff(sample_boundary(a1, n), sample_boundary(a2, n))
        ok = worst <= 1e-10 and split > 1e-6 and haus <= 1e-4
        m = {"max_err": worst, "invariant_split": split, "hausdorff": haus}
        return ok, m, f"split {split:.3g}, Hausdorff {haus:.3g}"
    return _timed(10, "trace invariant separates equal numerical ranges", run)


def _hausdorff(t1, t2):
    return max(hausdorff_to_polyline(t1.polyline, t2.polyline),
               hausdorff_to_polyline(t2.polyline, t1.polyline))


CRITERIA = {
    1: gau_wu,
    2: closed_form_equivalence,
    3: family_round_trip,
    4: example_angles,
    5: maximal_length,
    6: symmetry,
    7: flat_count,
    8: derivatives,
    9: disk,
    10: trace_invariants,
}
SUITES = {
    "paper": (1, 2, 3, 4, 5, 6, 8, 9, 10),
    "random": (7,),
    "all": tuple(range(1, 11)),
}


def run_suite(suite="all", samples=1000, seed=42, workers=None, report=None):
    """Run a suite; ``report`` (if given) is called with each result as it finishes."""
    if suite not in SUITES:
        raise ValueError(f"unknown suite {suite!r}")
    results = []
    for number in SUITES[suite]:
        if number == 7:
            r = flat_count(samples, seed, workers)
        else:
            r = CRITERIA[number]()
        results.append(r)
        if report is not None:
            report(r)
    return results

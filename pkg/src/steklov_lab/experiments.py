"""Numerical studies: convergence, stability, divergence, singularity, continuity.

Each study returns a report dataclass whose ``to_dict`` output is plain JSON
data and whose ``rows`` give a flat table for CSV export.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .eigensolve import settings_hash, solve_on_mesh
from .geometry import (
    ArcSet,
    BoundaryCurve,
    GeometryError,
    complement,
    component_count,
    hausdorff_distance,
    lgl_sequence,
    perturb_endpoints,
    symmetric_difference_measure,
)
from .meshing import Mesh, mesh_domain, refine, retag, rotate_mesh

__all__ = [
    "StudyError",
    "richardson",
    "ConvergenceReport",
    "convergence_study",
    "StabilityReport",
    "stability_sweep",
    "DivergenceReport",
    "divergence_study",
    "fit_power_law",
    "sample_along_ray",
    "SingularityReport",
    "singularity_fit",
    "ContinuityReport",
    "continuity_study",
    "endpoint_approach",
    "stability_modulus",
]


class StudyError(RuntimeError):
    """A study's precondition does not hold."""


def _provenance(**inputs) -> dict:
    prov = dict(inputs)
    prov["settings_hash"] = settings_hash(prov)
    return prov


# ---------------------------------------------------------------------------
# convergence
# ---------------------------------------------------------------------------


def richardson(values: Sequence[float], ratio: float = 2.0):
    """Observed orders and extrapolated limit from a geometric refinement sequence.

    ``values[j]`` is computed at mesh size ``h / ratio**j``.  Orders come
    from consecutive triples; the limit uses the order of the finest triple.
    Returns ``(orders, limit, monotone)``; with non-monotone differences the
    orders and limit are ``None``.
    """
    v = np.asarray(values, dtype=float)
    if len(v) < 3:
        raise StudyError("Richardson extrapolation needs at least three levels")
    d = np.diff(v)
    monotone = bool(np.all(d > 0) or np.all(d < 0))
    if not monotone:
        return None, None, False
    orders = [float(math.log(d[j] / d[j + 1]) / math.log(ratio)) for j in range(len(d) - 1)]
    p = orders[-1]
    if p <= 0:
        return orders, None, monotone
    limit = float(v[-1] + (v[-1] - v[-2]) / (ratio**p - 1))
    return orders, limit, monotone


@dataclass
class ConvergenceReport:
    arcs: dict
    k: int
    h: list
    n_vertices: list
    eigenvalues: list
    orders: list
    extrapolated: list
    error_bars: list
    monotone: list
    provenance: dict

    def to_dict(self) -> dict:
        return asdict(self)

    @property
    def rows(self) -> list[dict]:
        out = []
        for lev, h in enumerate(self.h):
            row = {"level": lev, "h": h, "n_vertices": self.n_vertices[lev]}
            for j in range(self.k):
                row[f"lambda_{j + 1}"] = self.eigenvalues[lev][j]
            out.append(row)
        return out


def convergence_study(curve: BoundaryCurve, arcs: ArcSet, k: int, levels: int = 4,
                      h_target: float = 0.1) -> ConvergenceReport:
    """Solve on a mesh and its uniform refinements; extrapolate each eigenvalue."""
    if levels < 3:
        raise StudyError("convergence study needs at least three refinement levels")
    mesh = mesh_domain(curve, arcs, h_target)
    hs, nv, lams = [], [], []
    for lev in range(levels):
        if lev:
            mesh = refine(mesh)
        res = solve_on_mesh(mesh, k)
        hs.append(mesh.h)
        nv.append(mesh.n_vertices)
        lams.append([float(x) for x in res.eigenvalues])
    orders, limits, bars, mono = [], [], [], []
    for j in range(k):
        o, lim, m = richardson([row[j] for row in lams])
        orders.append(o)
        limits.append(lim)
        bars.append(None if lim is None else abs(lams[-1][j] - lim))
        mono.append(m)
    prov = _provenance(study="converge", curve=curve.to_dict(), arcs=arcs.to_dict()["arcs"],
                       k=k, levels=levels, h_target=h_target)
    return ConvergenceReport(arcs.to_dict(), k, hs, nv, lams, orders, limits, bars, mono, prov)


# ---------------------------------------------------------------------------
# stability
# ---------------------------------------------------------------------------


def stability_modulus(a: ArcSet, b: ArcSet) -> dict:
    """Distances entering the planar stability estimate for a pair of Steklov sets."""
    da, db = complement(a), complement(b)
    sd = symmetric_difference_measure(a, b)
    he = hausdorff_distance(da, db, "euclidean")
    hs = hausdorff_distance(da, db, "arclength")
    return {
        "symdiff": sd,
        "hausdorff_euclidean": he,
        "hausdorff_arclength": hs,
        "modulus": math.sqrt(sd) + math.sqrt(he),
    }


@dataclass
class StabilityReport:
    base: dict
    mode: str
    k: int
    eps: list
    symdiff: list
    hausdorff_euclidean: list
    hausdorff_arclength: list
    modulus: list
    delta_lambda: list
    noise_floor: list
    signal_ok: list
    slope: Optional[float]
    intercept: Optional[float]
    slope_residual: Optional[float]
    constant: Optional[float]
    envelope_ok: Optional[bool]
    provenance: dict

    def to_dict(self) -> dict:
        return asdict(self)

    @property
    def rows(self) -> list[dict]:
        out = []
        for i, e in enumerate(self.eps):
            row = {"eps": e, "symdiff": self.symdiff[i], "hausdorff_euclidean": self.hausdorff_euclidean[i],
                   "hausdorff_arclength": self.hausdorff_arclength[i], "modulus": self.modulus[i],
                   "noise_floor": self.noise_floor[i], "signal_ok": self.signal_ok[i]}
            for j in range(self.k):
                row[f"dlambda_{j + 1}"] = self.delta_lambda[i][j]
            out.append(row)
        return out


def _perturbed(arcs: ArcSet, eps: float, mode: str, which: int) -> ArcSet:
    n = component_count(arcs)
    d = np.zeros((n, 2))
    if mode == "endpoint-shift":
        d[which // 2, which % 2] = eps
    elif mode == "arc-translate":
        d[which % n] = eps
    else:
        raise StudyError(f"unknown perturbation mode {mode!r}")
    return perturb_endpoints(arcs, d)


def stability_sweep(curve: BoundaryCurve, arcs: ArcSet, k: int, eps_grid: Sequence[float],
                    mode: str = "endpoint-shift", h_target: float = 0.05, endpoint: int = 1,
                    calibration: int = 2, signal_factor: float = 10.0) -> StabilityReport:
    """Eigenvalue changes under endpoint perturbations of size ``eps``.

    In ``endpoint-shift`` mode endpoint number ``endpoint`` (0 = start of
    the first component, 1 = its end, ...) moves forward by ``eps``; in
    ``arc-translate`` mode component ``endpoint`` is rotated along the curve.

    Both configurations are solved on one mesh holding every perturbed
    endpoint, so the difference isolates the change of the set.  On the
    circle, arc translation instead uses the base mesh rotated with the arc.
    The noise floor is the change of the computed difference under one
    uniform refinement.  The slope of ``log|dlambda_1|`` against
    ``log eps`` is fitted over entries whose signal exceeds
    ``signal_factor`` times the noise floor; the envelope constant is
    calibrated on the ``calibration`` largest such entries and then checked
    on every smaller one.
    """
    eps = [float(e) for e in eps_grid]
    if any(e < 0 for e in eps) or any(b >= a for a, b in zip(eps, eps[1:])):
        raise StudyError("eps grid must be nonnegative and strictly decreasing")
    perturbed = [_perturbed(arcs, e, mode, endpoint) if e > 0 else arcs for e in eps]
    rotational = mode == "arc-translate" and curve.kind == "circle"

    if rotational:
        base_mesh = mesh_domain(curve, arcs, h_target)
        meshes = [base_mesh, refine(base_mesh)]
    else:
        extra = [x for p in perturbed for x in p.endpoints()]
        base_mesh = mesh_domain(curve, arcs, h_target, extra_breakpoints=extra)
        meshes = [base_mesh, refine(base_mesh)]

    diffs = []
    for mesh in meshes:
        base = solve_on_mesh(mesh, k).eigenvalues
        row = []
        for e, p in zip(eps, perturbed):
            if e == 0:
                row.append(np.zeros(k))
                continue
            if rotational:
                pm = retag(rotate_mesh(mesh, e), p)
            else:
                pm = retag(mesh, p)
            row.append(np.abs(solve_on_mesh(pm, k).eigenvalues - base))
        diffs.append(row)

    dist = [stability_modulus(arcs, p) if e > 0 else
            {"symdiff": 0.0, "hausdorff_euclidean": 0.0, "hausdorff_arclength": 0.0, "modulus": 0.0}
            for e, p in zip(eps, perturbed)]
    dl = [[float(x) for x in r] for r in diffs[0]]
    noise = [float(abs(a[0] - b[0])) for a, b in zip(diffs[0], diffs[1])]
    ok = [e > 0 and d[0] > 0 and d[0] >= signal_factor * nf for e, d, nf in zip(eps, dl, noise)]

    idx = [i for i, flag in enumerate(ok) if flag]
    slope = intercept = resid = const = None
    env_ok = None
    if len(idx) >= 2:
        x = np.log([eps[i] for i in idx])
        y = np.log([dl[i][0] for i in idx])
        coef, res = np.polyfit(x, y, 1, full=True)[:2]
        slope, intercept = float(coef[0]), float(coef[1])
        resid = float(math.sqrt(res[0] / len(idx))) if len(res) else 0.0
        cal = idx[:max(1, calibration)]
        const = max(dl[i][0] / dist[i]["modulus"] for i in cal)
        env_ok = all(dl[i][0] <= const * dist[i]["modulus"] * (1 + 1e-12) for i in idx)
    prov = _provenance(study="stability", curve=curve.to_dict(), arcs=arcs.to_dict()["arcs"], k=k,
                       eps=eps, mode=mode, h_target=h_target, endpoint=endpoint,
                       calibration=calibration, signal_factor=signal_factor)
    return StabilityReport(
        base=arcs.to_dict(), mode=mode, k=k, eps=eps,
        symdiff=[d["symdiff"] for d in dist],
        hausdorff_euclidean=[d["hausdorff_euclidean"] for d in dist],
        hausdorff_arclength=[d["hausdorff_arclength"] for d in dist],
        modulus=[d["modulus"] for d in dist],
        delta_lambda=dl, noise_floor=noise, signal_ok=ok,
        slope=slope, intercept=intercept, slope_residual=resid, constant=const,
        envelope_ok=env_ok, provenance=prov,
    )


# ---------------------------------------------------------------------------
# divergence
# ---------------------------------------------------------------------------


@dataclass
class DivergenceReport:
    m: float
    n: list
    h: list
    lambda_coarse: list
    lambda_fine: list
    ratio: list
    deviation: list
    converged: list
    strictly_increasing: bool
    max_deviation: float
    provenance: dict

    def to_dict(self) -> dict:
        return asdict(self)

    @property
    def rows(self) -> list[dict]:
        return [
            {"n": n, "h": h, "lambda_coarse": a, "lambda_fine": b, "ratio": r, "deviation": d, "converged": c}
            for n, h, a, b, r, d, c in zip(self.n, self.h, self.lambda_coarse, self.lambda_fine,
                                           self.ratio, self.deviation, self.converged)
        ]


def divergence_study(n_grid: Sequence[int] = (2, 4, 8, 16), m: float = 0.5, k: int = 1,
                     h_levels: Optional[Sequence[float]] = None, elements_per_arc: float = 24.0,
                     h_max: float = 0.03, endpoint_ratio: Optional[float] = 0.125,
                     max_deviation: float = 0.02,
                     curve: Optional[BoundaryCurve] = None) -> DivergenceReport:
    """First eigenvalue on the disk for ``n`` equally spaced arcs of total fraction ``m``.

    Each ``n`` is solved at a base mesh size and at its uniform refinement.
    Unless ``h_levels`` gives base sizes explicitly, the base size is
    ``min(h_max, arc_length / elements_per_arc)`` so that the relative
    discretization error stays comparable across ``n``; boundary spacing is
    graded down to ``endpoint_ratio * h`` at the arc endpoints.
    """
    curve = curve or BoundaryCurve.circle()
    ns = [int(n) for n in n_grid]
    if any(n < 1 for n in ns) or any(b <= a for a, b in zip(ns, ns[1:])):
        raise StudyError("n grid must be increasing positive integers")
    L = curve.total_length
    if h_levels is None:
        hs = [min(h_max, m * L / n / elements_per_arc) for n in ns]
    else:
        hs = [float(h) for h in h_levels]
        if len(hs) != len(ns):
            raise StudyError("h_levels must give one base mesh size per n")
    coarse, fine = [], []
    for n, h in zip(ns, hs):
        arcs = lgl_sequence(curve, m, n)
        eh = None if endpoint_ratio is None else endpoint_ratio * h
        mesh = mesh_domain(curve, arcs, h, endpoint_h=eh)
        coarse.append(float(solve_on_mesh(mesh, k).eigenvalues[k - 1]))
        fine.append(float(solve_on_mesh(refine(mesh), k).eigenvalues[k - 1]))
    dev = [abs(c - f) / f for c, f in zip(coarse, fine)]
    inc = all(b > a for a, b in zip(coarse, coarse[1:])) and all(b > a for a, b in zip(fine, fine[1:]))
    prov = _provenance(study="diverge", curve=curve.to_dict(), n_grid=ns, m=m, k=k, h=hs,
                       endpoint_ratio=endpoint_ratio, max_deviation=max_deviation)
    return DivergenceReport(m, ns, hs, coarse, fine, [f / n for f, n in zip(fine, ns)], dev,
                            [d <= max_deviation for d in dev], inc, max_deviation, prov)


# ---------------------------------------------------------------------------
# singularity
# ---------------------------------------------------------------------------


def fit_power_law(r, values) -> tuple[float, float]:
    """Least-squares ``(exponent, log-prefactor)`` of ``values ~ C r**exponent``."""
    r = np.asarray(r, dtype=float)
    v = np.abs(np.asarray(values, dtype=float))
    if np.any(v <= 0) or np.any(r <= 0):
        raise StudyError("power-law fit needs positive radii and nonzero values")
    slope, icpt = np.polyfit(np.log(r), np.log(v), 1)
    return float(slope), float(icpt)


def sample_along_ray(mesh: Mesh, u: np.ndarray, origin, direction, radii) -> np.ndarray:
    """Piecewise-linear interpolation of nodal ``u`` at ``origin + r * direction``."""
    P = mesh.vertices[mesh.triangles]
    d1 = P[:, 1] - P[:, 0]
    d2 = P[:, 2] - P[:, 0]
    det = d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0]
    out = []
    for r in radii:
        q = np.asarray(origin) + r * np.asarray(direction)
        w = q - P[:, 0]
        l1 = (w[:, 0] * d2[:, 1] - w[:, 1] * d2[:, 0]) / det
        l2 = (d1[:, 0] * w[:, 1] - d1[:, 1] * w[:, 0]) / det
        l0 = 1 - l1 - l2
        lo = np.minimum(np.minimum(l0, l1), l2)
        t = int(np.argmax(lo))
        if lo[t] < -1e-10:
            raise StudyError(f"sample point at r={r:.4g} lies outside the mesh")
        tri = mesh.triangles[t]
        out.append(l0[t] * u[tri[0]] + l1[t] * u[tri[1]] + l2[t] * u[tri[2]])
    return np.asarray(out)


@dataclass
class SingularityReport:
    interface_point: float
    direction: list
    radii: list
    values: list
    exponent: float
    log_prefactor: float
    h: float
    provenance: dict

    def to_dict(self) -> dict:
        return asdict(self)

    @property
    def rows(self) -> list[dict]:
        return [{"r": r, "abs_u": v} for r, v in zip(self.radii, self.values)]


def singularity_fit(curve: BoundaryCurve, arcs: ArcSet, interface_point: float,
                    radii_window: Optional[Sequence[float]] = None, h_target: float = 0.02,
                    k: int = 1, n_samples: int = 12,
                    field_fn: Optional[Callable] = None) -> SingularityReport:
    """Growth exponent of ``|u_k|`` away from an interface point.

    Samples along the inward ray bisecting the boundary tangents.  The
    default window is ``[2h, 0.1 L / (2 pi)]``.  With ``field_fn`` the
    callable is sampled instead of the discrete eigenfunction, which is how
    the fitter is checked on known power laws.
    """
    L = curve.total_length
    if not any(abs((interface_point - e + L / 2) % L - L / 2) < 1e-12 * L for e in arcs.endpoints()):
        raise StudyError("interface point must be an arc endpoint")
    origin = curve.point(interface_point)
    direction = curve.inward_bisector(interface_point)
    if field_fn is not None:
        h = 0.0
        rmin, rmax = radii_window if radii_window is not None else (1e-3, 1e-1)
        radii = np.geomspace(rmin, rmax, n_samples)
        vals = np.abs([field_fn(origin + r * direction) for r in radii])
    else:
        mesh = mesh_domain(curve, arcs, h_target)
        h = mesh.h
        rmin, rmax = radii_window if radii_window is not None else (2 * h, 0.1 * L / (2 * math.pi))
        if rmin < 2 * h:
            raise StudyError(f"window start {rmin:.4g} is below 2h = {2 * h:.4g}")
        radii = np.geomspace(rmin, rmax, n_samples)
        u = solve_on_mesh(mesh, k).eigenvectors[:, k - 1]
        vals = np.abs(sample_along_ray(mesh, u, origin, direction, radii))
    expo, icpt = fit_power_law(radii, vals)
    prov = _provenance(study="singularity", curve=curve.to_dict(), arcs=arcs.to_dict()["arcs"],
                       interface_point=interface_point, window=[float(rmin), float(rmax)],
                       h_target=h_target, k=k, n_samples=n_samples, synthetic=field_fn is not None)
    return SingularityReport(float(interface_point), [float(x) for x in direction],
                             [float(r) for r in radii], [float(v) for v in vals], expo, icpt, float(h), prov)


# ---------------------------------------------------------------------------
# continuity
# ---------------------------------------------------------------------------


def endpoint_approach(target: ArcSet, directions, eps_grid: Sequence[float]) -> list[ArcSet]:
    """Sequence ``perturb_endpoints(target, eps * directions)`` over ``eps_grid``."""
    d = np.asarray(directions, dtype=float)
    return [perturb_endpoints(target, e * d) for e in eps_grid]


@dataclass
class ContinuityReport:
    target: dict
    k: int
    sequence: list
    hausdorff: list
    symdiff: list
    modulus: list
    eigenvalues: list
    target_eigenvalues: list
    gaps: list
    monotone: bool
    envelope_constant: float
    envelope: list
    within_envelope: bool
    provenance: dict

    def to_dict(self) -> dict:
        return asdict(self)

    @property
    def rows(self) -> list[dict]:
        out = []
        for i in range(len(self.sequence)):
            row = {"index": i, "hausdorff": self.hausdorff[i], "symdiff": self.symdiff[i],
                   "modulus": self.modulus[i], "gap_1": self.gaps[i], "envelope": self.envelope[i]}
            for j in range(self.k):
                row[f"lambda_{j + 1}"] = self.eigenvalues[i][j]
            out.append(row)
        return out


def continuity_study(curve: BoundaryCurve, target: ArcSet, sequence: Sequence[ArcSet], k: int = 1,
                     h_target: float = 0.05, envelope_constant: Optional[float] = None) -> ContinuityReport:
    """Track ``lambda_1..k`` along a sequence of Steklov sets approaching ``target``.

    Every member must have the target's number of components (the bounded
    topology hypothesis).  All sets are solved on one mesh holding every
    endpoint.  Unless given, the envelope constant is calibrated on the
    first member: ``C = gap_0 / modulus_0``.
    """
    nc = component_count(target)
    for i, s in enumerate(sequence):
        if s.curve != curve or target.curve != curve:
            raise GeometryError("sequence members must live on the study curve")
        if component_count(s) != nc:
            raise StudyError(f"sequence member {i} has {component_count(s)} components, target has {nc}; "
                             "the component count must stay bounded and fixed")
    if not sequence:
        raise StudyError("empty approach sequence")
    extra = [x for s in sequence for x in s.endpoints()]
    mesh = mesh_domain(curve, target, h_target, extra_breakpoints=extra)
    lam_t = solve_on_mesh(mesh, k).eigenvalues
    lams, hd, sd, mod = [], [], [], []
    for s in sequence:
        lams.append([float(x) for x in solve_on_mesh(retag(mesh, s), k).eigenvalues])
        if s == target:
            hd.append(0.0)
            sd.append(0.0)
            mod.append(0.0)
        else:
            d = stability_modulus(target, s)
            hd.append(d["hausdorff_euclidean"])
            sd.append(d["symdiff"])
            mod.append(d["modulus"])
    gaps = [abs(l[0] - float(lam_t[0])) for l in lams]
    mono = all(b < a or (a == 0 and b == 0) for a, b in zip(gaps, gaps[1:]))
    if envelope_constant is None:
        envelope_constant = gaps[0] / mod[0] if mod[0] > 0 else 0.0
    env = [envelope_constant * x for x in mod]
    within = all(g <= e * (1 + 1e-12) + 1e-14 for g, e in zip(gaps, env))
    prov = _provenance(study="continuity", curve=curve.to_dict(), target=target.to_dict()["arcs"],
                       sequence=[s.to_dict()["arcs"] for s in sequence], k=k, h_target=h_target)
    return ContinuityReport(target.to_dict(), k, [s.to_dict()["arcs"] for s in sequence], hd, sd, mod, lams,
                            [float(x) for x in lam_t], gaps, mono, float(envelope_constant), env, within, prov)

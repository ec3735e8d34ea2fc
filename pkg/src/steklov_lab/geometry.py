"""Boundary curves and arc-level set algebra on them.

Every boundary subset handled by the lab is a finite union of arcs of a
simple closed curve, addressed by absolute arclength ``s`` in ``[0, L)``
where ``L`` is the curve length.  Open Steklov sets are stored as sorted
half-open intervals; their closed complements (the Dirichlet part) are
:class:`ClosedArcSet` values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence, Union

import numpy as np
from scipy.spatial import cKDTree

__all__ = [
    "GeometryError",
    "IncomparableSetsError",
    "BoundaryCurve",
    "ArcSet",
    "ClosedArcSet",
    "measure",
    "complement",
    "closure",
    "symmetric_difference_measure",
    "hausdorff_distance",
    "component_count",
    "lgl_sequence",
    "alternating_arcs",
    "perturb_endpoints",
    "is_subset",
]

# relative snapping tolerance for canonical interval arithmetic
SNAP = 1e-13
# sampling resolution (fraction of L) for curves without exact distance formulas
SAMPLING_RESOLUTION = 1e-5


class GeometryError(ValueError):
    """Invalid curve or boundary-set input."""


class IncomparableSetsError(GeometryError):
    """Operands live on different curves."""


# ---------------------------------------------------------------------------
# curves
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BoundaryCurve:
    """Simple closed curve parametrized by arclength, positively oriented.

    Use the constructors :meth:`circle`, :meth:`polygon`, :meth:`star` and
    :meth:`sector` rather than building instances by hand.  ``params`` is a
    tuple of ``(name, value)`` pairs so that curves are hashable.
    """

    kind: str
    params: tuple

    # -- constructors -----------------------------------------------------

    @classmethod
    def circle(cls, radius: float = 1.0, center: Sequence[float] = (0.0, 0.0)) -> "BoundaryCurve":
        if not radius > 0:
            raise GeometryError(f"circle radius must be positive, got {radius}")
        return cls("circle", (("radius", float(radius)), ("center", _pair(center))))

    @classmethod
    def polygon(cls, vertices: Sequence[Sequence[float]]) -> "BoundaryCurve":
        verts = tuple(_pair(v) for v in vertices)
        if len(verts) < 3:
            raise GeometryError("polygon needs at least 3 vertices")
        arr = np.asarray(verts)
        if _signed_area(arr) <= 0:
            raise GeometryError("polygon vertices must be in counterclockwise order")
        if _self_intersects(arr):
            raise GeometryError("polygon boundary self-intersects")
        return cls("polygon", (("vertices", verts),))

    @classmethod
    def unit_square(cls) -> "BoundaryCurve":
        return cls.polygon([(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)])

    @classmethod
    def star(
        cls,
        center: Sequence[float] = (0.0, 0.0),
        cos_coeffs: Sequence[float] = (1.0,),
        sin_coeffs: Sequence[float] = (),
    ) -> "BoundaryCurve":
        """Star-shaped curve ``c + r(phi) (cos phi, sin phi)``.

        ``r(phi) = a0 + sum_j a_j cos(j phi) + b_j sin(j phi)`` with
        ``cos_coeffs = (a0, a1, ...)`` and ``sin_coeffs = (b1, b2, ...)``.
        """
        a = tuple(float(x) for x in cos_coeffs)
        b = tuple(float(x) for x in sin_coeffs)
        if not a:
            raise GeometryError("star curve needs at least the constant radius coefficient")
        curve = cls("star", (("center", _pair(center)), ("cos", a), ("sin", b)))
        phi = np.linspace(0.0, 2 * np.pi, 4096, endpoint=False)
        if np.min(curve._radius(phi)[0]) <= 0:
            raise GeometryError("star radius function must be strictly positive")
        return curve

    @classmethod
    def sector(cls, radius: float = 1.0, angle: float = math.pi) -> "BoundaryCurve":
        """Circular sector with apex at the origin spanning polar angles ``[0, angle]``.

        Arclength starts at the apex, runs along the ray at angle 0, then the
        circular arc, then back to the apex.  ``angle = pi`` is the half-disk.
        """
        if not radius > 0 or not 0 < angle < 2 * math.pi:
            raise GeometryError("sector needs radius > 0 and 0 < angle < 2*pi")
        return cls("sector", (("radius", float(radius)), ("angle", float(angle))))

    # -- serialization ----------------------------------------------------

    def to_dict(self) -> dict:
        p = dict(self.params)
        if self.kind == "polygon":
            p = {"vertices": [list(v) for v in p["vertices"]]}
        elif self.kind == "circle":
            p = {"radius": p["radius"], "center": list(p["center"])}
        elif self.kind == "star":
            p = {"center": list(p["center"]), "cos": list(p["cos"]), "sin": list(p["sin"])}
        return {"kind": self.kind, "params": p}

    @classmethod
    def from_dict(cls, data: dict) -> "BoundaryCurve":
        kind = data.get("kind")
        p = data.get("params", {})
        if kind == "circle":
            return cls.circle(p.get("radius", 1.0), p.get("center", (0.0, 0.0)))
        if kind == "polygon":
            return cls.polygon(p["vertices"])
        if kind == "star":
            return cls.star(p.get("center", (0.0, 0.0)), p.get("cos", (1.0,)), p.get("sin", ()))
        if kind == "sector":
            return cls.sector(p.get("radius", 1.0), p.get("angle", math.pi))
        raise GeometryError(f"unknown curve kind {kind!r}")

    # -- geometry ---------------------------------------------------------

    def _p(self, name):
        return dict(self.params)[name]

    @cached_property
    def total_length(self) -> float:
        if self.kind == "circle":
            return 2 * math.pi * self._p("radius")
        if self.kind == "polygon":
            return float(self._edge_lengths.sum())
        if self.kind == "sector":
            r = self._p("radius")
            return 2 * r + r * self._p("angle")
        return 2 * math.pi * self._star_tables[0]

    @cached_property
    def _edge_lengths(self) -> np.ndarray:
        v = np.asarray(self._p("vertices"))
        return np.linalg.norm(np.roll(v, -1, axis=0) - v, axis=1)

    @cached_property
    def corners(self) -> tuple[float, ...]:
        """Arclength positions of the nonsmooth points of the curve."""
        if self.kind == "polygon":
            return tuple(float(x) for x in np.concatenate([[0.0], np.cumsum(self._edge_lengths)[:-1]]))
        if self.kind == "sector":
            r = self._p("radius")
            return (0.0, r, r + r * self._p("angle"))
        return ()

    def point(self, s) -> np.ndarray:
        """Map absolute arclength (scalar or array, taken mod L) to planar points."""
        s = np.mod(np.asarray(s, dtype=float), self.total_length)
        if self.kind == "circle":
            r = self._p("radius")
            c = self._p("center")
            th = s / r
            return np.stack([c[0] + r * np.cos(th), c[1] + r * np.sin(th)], axis=-1)
        if self.kind == "polygon":
            v = np.asarray(self._p("vertices"))
            starts = np.asarray(self.corners)
            i = np.clip(np.searchsorted(starts, s, side="right") - 1, 0, len(v) - 1)
            t = (s - starts[i]) / self._edge_lengths[i]
            a, b = v[i], v[(i + 1) % len(v)]
            return a + t[..., None] * (b - a)
        if self.kind == "sector":
            r = self._p("radius")
            al = self._p("angle")
            x = np.empty(s.shape)
            y = np.empty(s.shape)
            ray0 = s <= r
            arc = (s > r) & (s < r + r * al)
            ray1 = ~(ray0 | arc)
            x[ray0], y[ray0] = s[ray0], 0.0
            th = (s[arc] - r) / r
            x[arc], y[arc] = r * np.cos(th), r * np.sin(th)
            rho = r - (s[ray1] - r - r * al)
            x[ray1], y[ray1] = rho * math.cos(al), rho * math.sin(al)
            return np.stack([x, y], axis=-1)
        phi = self._star_angle(s)
        rad = self._radius(phi)[0]
        c = self._p("center")
        return np.stack([c[0] + rad * np.cos(phi), c[1] + rad * np.sin(phi)], axis=-1)

    def tangents(self, s: float) -> tuple[np.ndarray, np.ndarray]:
        """One-sided unit tangents (incoming, outgoing) at arclength ``s``."""
        d = 1e-7 * self.total_length
        p0, pm, pp = self.point(s), self.point(s - d), self.point(s + d)
        tin = (p0 - pm) / np.linalg.norm(p0 - pm)
        tout = (pp - p0) / np.linalg.norm(pp - p0)
        return tin, tout

    def inward_bisector(self, s: float) -> np.ndarray:
        """Unit vector bisecting the two boundary tangents at ``s``, pointing into the domain."""
        tin, tout = self.tangents(s)
        b = tout - tin
        if np.linalg.norm(b) < 1e-6:
            b = np.array([-tout[1], tout[0]])
        b = b / np.linalg.norm(b)
        if tout[0] * b[1] - tout[1] * b[0] < 0:
            b = -b
        return b

    # -- star curves ------------------------------------------------------

    def _radius(self, phi):
        a = self._p("cos")
        b = self._p("sin")
        r = np.full(np.shape(phi), a[0])
        dr = np.zeros(np.shape(phi))
        for j, aj in enumerate(a[1:], start=1):
            r = r + aj * np.cos(j * phi)
            dr = dr - j * aj * np.sin(j * phi)
        for j, bj in enumerate(b, start=1):
            r = r + bj * np.sin(j * phi)
            dr = dr + j * bj * np.cos(j * phi)
        return r, dr

    def _speed(self, phi):
        r, dr = self._radius(phi)
        return np.sqrt(r * r + dr * dr)

    @cached_property
    def _star_tables(self):
        # speed is a smooth periodic function; its Fourier series integrates exactly
        n = 4096
        phi = np.linspace(0.0, 2 * np.pi, n, endpoint=False)
        coef = np.fft.rfft(self._speed(phi)) / n
        c0 = coef[0].real
        k = np.arange(1, len(coef))
        alpha = 2 * coef[1:].real
        beta = -2 * coef[1:].imag
        if n % 2 == 0:
            alpha[-1] /= 2
            beta[-1] = 0.0
        return (c0, k, alpha, beta)

    def _star_arclength(self, phi):
        c0, k, alpha, beta = self._star_tables
        kp = np.multiply.outer(np.asarray(phi), k)
        return c0 * phi + (np.sin(kp) * (alpha / k)).sum(-1) - ((np.cos(kp) - 1) * (beta / k)).sum(-1)

    def _star_angle(self, s):
        grid = np.linspace(0.0, 2 * np.pi, 2049)
        sg = self._star_arclength(grid)
        phi = np.interp(s, sg, grid)
        for _ in range(30):
            step = (self._star_arclength(phi) - s) / self._speed(phi)
            phi = phi - step
            if np.max(np.abs(step), initial=0.0) < 1e-15:
                break
        return phi


def _pair(v) -> tuple[float, float]:
    x, y = v
    return (float(x), float(y))


def _signed_area(v: np.ndarray) -> float:
    x, y = v[:, 0], v[:, 1]
    return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))


def _self_intersects(v: np.ndarray) -> bool:
    n = len(v)

    def orient(a, b, c):
        return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])

    for i in range(n):
        a, b = v[i], v[(i + 1) % n]
        for j in range(i + 1, n):
            if j == i or (j + 1) % n == i or j == (i + 1) % n:
                continue
            c, d = v[j], v[(j + 1) % n]
            o1, o2 = orient(a, b, c), orient(a, b, d)
            o3, o4 = orient(c, d, a), orient(c, d, b)
            if o1 * o2 <= 0 and o3 * o4 <= 0:
                return True
    return False


# ---------------------------------------------------------------------------
# boundary sets
# ---------------------------------------------------------------------------


def _canonical(intervals: Iterable[Sequence[float]], length: float) -> tuple[tuple[float, float], ...]:
    tol = SNAP * length
    pieces = []
    for a, b in intervals:
        a, b = float(a), float(b)
        if b < a:
            b += length
        span = b - a
        if span <= tol:
            continue
        if span >= length - tol:
            raise GeometryError("Steklov set would cover the whole boundary; the Dirichlet part must have positive length")
        a0 = a % length
        if length - a0 <= tol:
            a0 = 0.0
        # shift b by the same amount as a so canonical input is a fixed point
        b0 = b - (a - a0) if a0 != a else b
        if b0 <= length + tol:
            pieces.append((a0, min(b0, length)))
        else:
            pieces.append((a0, length))
            pieces.append((0.0, b0 - length))
    pieces.sort()
    merged: list[list[float]] = []
    for a, b in pieces:
        if merged and a <= merged[-1][1] + tol:
            merged[-1][1] = max(merged[-1][1], b)
        else:
            merged.append([a, b])
    out = tuple((a, b) for a, b in merged if b - a > tol)
    if sum(b - a for a, b in out) >= length - tol:
        raise GeometryError("Steklov set would cover the whole boundary; the Dirichlet part must have positive length")
    return out


@dataclass(frozen=True)
class ArcSet:
    """Relatively open union of boundary arcs (the Steklov part).

    ``intervals`` is normalized on construction: intervals are mapped into
    ``[0, L]``, split at the seam ``s = 0``, sorted and merged.  An input
    pair ``(a, b)`` with ``b < a`` wraps through the seam.  A component that
    crosses the seam is stored as ``[a, L)`` plus ``[0, b)``.
    """

    curve: BoundaryCurve
    intervals: tuple = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "intervals", _canonical(self.intervals, self.curve.total_length))

    @classmethod
    def from_components(cls, curve: BoundaryCurve, comps: Iterable[Sequence[float]]) -> "ArcSet":
        """Build from cyclic ``(start, length)`` pairs."""
        return cls(curve, [(a, a + ln) for a, ln in comps])

    @property
    def length(self) -> float:
        return self.curve.total_length

    @cached_property
    def components(self) -> tuple[tuple[float, float], ...]:
        """Maximal connected arcs as cyclic ``(start, length)``, sorted by start."""
        iv = list(self.intervals)
        L = self.length
        if len(iv) >= 2 and iv[0][0] == 0.0 and iv[-1][1] == L:
            first = iv.pop(0)
            a, b = iv.pop()
            iv.append((a, b + first[1]))
        return tuple(sorted((a, b - a) for a, b in iv))

    def endpoints(self) -> list[float]:
        L = self.length
        out = []
        for a, ln in self.components:
            out.append(a % L)
            out.append((a + ln) % L)
        return out

    def contains(self, s) -> np.ndarray:
        """Membership in the open set (endpoints excluded)."""
        s = np.mod(np.asarray(s, dtype=float), self.length)
        inside = np.zeros(s.shape, dtype=bool)
        for a, ln in self.components:
            t = np.mod(s - a, self.length)
            inside |= (t > 0) & (t < ln)
        return inside

    def to_dict(self) -> dict:
        return {"curve": self.curve.to_dict(), "arcs": [[a, b] for a, b in self.intervals]}

    @classmethod
    def from_dict(cls, data: dict, curve: BoundaryCurve | None = None) -> "ArcSet":
        if curve is None:
            curve = BoundaryCurve.from_dict(data["curve"])
        return cls(curve, [tuple(p) for p in data["arcs"]])

    def __repr__(self):
        body = ", ".join(f"[{a:.6g}, {b:.6g})" for a, b in self.intervals)
        return f"ArcSet({self.curve.kind}, {{{body}}})"


@dataclass(frozen=True)
class ClosedArcSet:
    """Closed union of arcs given as cyclic ``(start, length)`` pieces.

    Zero-length pieces are single points.  ``full`` marks the whole curve.
    """

    curve: BoundaryCurve
    pieces: tuple = ()
    full: bool = False

    @classmethod
    def points(cls, curve: BoundaryCurve, positions: Iterable[float]) -> "ClosedArcSet":
        L = curve.total_length
        return cls(curve, tuple(sorted((float(p) % L, 0.0) for p in positions)))

    @classmethod
    def from_intervals(cls, curve: BoundaryCurve, intervals: Iterable[Sequence[float]]) -> "ClosedArcSet":
        """Closed arcs ``[a, b]``; ``b < a`` wraps through the seam."""
        L = curve.total_length
        out = []
        for a, b in intervals:
            span = b - a if b >= a else b + L - a
            out.append((float(a) % L, float(span)))
        return cls(curve, tuple(sorted(out)))

    @property
    def length(self) -> float:
        return self.curve.total_length

    def measure(self) -> float:
        return self.length if self.full else float(sum(ln for _, ln in self.pieces))

    def _pieces(self):
        return ((0.0, self.length),) if self.full else self.pieces

    def distance_to(self, s) -> np.ndarray:
        """Cyclic arclength distance from positions ``s`` to the set."""
        s = np.mod(np.asarray(s, dtype=float), self.length)
        L = self.length
        best = np.full(s.shape, np.inf)
        for a, ln in self._pieces():
            t = np.mod(s - a, L)
            inside = t <= ln
            d = np.where(inside, 0.0, np.minimum(t - ln, L - t))
            best = np.minimum(best, d)
        return best


BoundarySet = Union[ArcSet, ClosedArcSet]


# ---------------------------------------------------------------------------
# operations
# ---------------------------------------------------------------------------


def measure(s: BoundarySet) -> float:
    """Total arclength of an arc union."""
    if isinstance(s, ClosedArcSet):
        return s.measure()
    return float(sum(b - a for a, b in s.intervals))


def component_count(s: ArcSet) -> int:
    return len(s.components)


def closure(s: ArcSet) -> ClosedArcSet:
    return ClosedArcSet(s.curve, s.components)


def complement(s: ArcSet) -> ClosedArcSet:
    """Closed complement of an open arc union; arc endpoints belong to it."""
    comps = s.components
    L = s.length
    if not comps:
        return ClosedArcSet(s.curve, full=True)
    gaps = []
    for i, (a, ln) in enumerate(comps):
        end = a + ln
        nxt = comps[(i + 1) % len(comps)][0]
        if i == len(comps) - 1:
            nxt += L
        gaps.append((end % L, nxt - end))
    return ClosedArcSet(s.curve, tuple(sorted(gaps)))


def _same_curve(a, b):
    if a.curve != b.curve:
        raise IncomparableSetsError("boundary sets live on different curves")


def _intersection_measure(x, y) -> float:
    i = j = 0
    total = 0.0
    while i < len(x) and j < len(y):
        lo = max(x[i][0], y[j][0])
        hi = min(x[i][1], y[j][1])
        if hi > lo:
            total += hi - lo
        if x[i][1] < y[j][1]:
            i += 1
        else:
            j += 1
    return total


def symmetric_difference_measure(a: ArcSet, b: ArcSet) -> float:
    """Arclength of the points lying in exactly one of ``a`` and ``b``."""
    _same_curve(a, b)
    if a.intervals == b.intervals:
        return 0.0
    inter = _intersection_measure(a.intervals, b.intervals)
    return max(measure(a) + measure(b) - 2 * inter, 0.0)


def is_subset(a: ArcSet, b: ArcSet) -> bool:
    _same_curve(a, b)
    return all(any(ba <= aa and ab <= bb for ba, bb in b.intervals) for aa, ab in a.intervals)


def _as_closed(s: BoundarySet) -> ClosedArcSet:
    return closure(s) if isinstance(s, ArcSet) else s


def _directed_arclength(A: ClosedArcSet, B: ClosedArcSet) -> float:
    L = A.length
    cand = []
    for a, ln in A._pieces():
        cand += [a, a + ln]
    # distance to B peaks at midpoints of B's gaps
    if not B.full:
        bp = sorted(B.pieces)
        for i, (a, ln) in enumerate(bp):
            nxt = bp[(i + 1) % len(bp)][0] + (L if i == len(bp) - 1 else 0.0)
            gap = nxt - (a + ln)
            if gap > 0:
                cand.append(a + ln + gap / 2)
    cand = np.asarray(cand)
    inA = A.distance_to(cand) <= SNAP * L
    return float(np.max(B.distance_to(cand[inA]), initial=0.0))


def _straight_pieces(curve: BoundaryCurve, start: float, length: float):
    """Split a polygon arc into straight segments (pairs of points)."""
    L = curve.total_length
    corners = np.asarray(curve.corners)
    cuts = [start]
    rel = np.mod(corners - start, L)
    cuts += sorted(start + r for r in rel if 0 < r < length)
    cuts.append(start + length)
    pts = curve.point(np.asarray(cuts))
    if length == 0:
        return [(pts[0], pts[0])]
    return list(zip(pts[:-1], pts[1:]))


def _point_segment_distance(p: np.ndarray, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    d = b - a
    dd = float(d @ d)
    if dd == 0:
        return np.linalg.norm(p - a, axis=-1)
    t = np.clip(((p - a) @ d) / dd, 0.0, 1.0)
    return np.linalg.norm(p - (a + t[..., None] * d), axis=-1)


def _directed_euclidean_polygon(A: ClosedArcSet, B: ClosedArcSet) -> float:
    curve = A.curve
    bsegs = [seg for a, ln in B._pieces() for seg in _straight_pieces(curve, a, ln)]

    def feature_quadratics(p0, d):
        # squared distance from p0 + t d to each feature, as (c2, c1, c0)
        out = []
        for q0, q1 in bsegs:
            for q in (q0, q1):
                w = p0 - q
                out.append((d @ d, 2 * d @ w, w @ w))
            e = q1 - q0
            ne = np.linalg.norm(e)
            if ne > 0:
                n = np.array([-e[1], e[0]]) / ne
                u, v = n @ (p0 - q0), n @ d
                out.append((v * v, 2 * u * v, u * u))
        return out

    best = 0.0
    for a, ln in A._pieces():
        for p0, p1 in _straight_pieces(curve, a, ln):
            d = p1 - p0
            ts = [0.0, 1.0]
            quads = feature_quadratics(p0, d)
            for i in range(len(quads)):
                for j in range(i + 1, len(quads)):
                    c = np.subtract(quads[i], quads[j])
                    if abs(c[0]) > 1e-300:
                        roots = np.roots(c)
                    elif abs(c[1]) > 1e-300:
                        roots = np.array([-c[2] / c[1]])
                    else:
                        continue
                    ts += [r.real for r in roots if abs(r.imag) < 1e-12 and 0.0 <= r.real <= 1.0]
            pts = p0 + np.asarray(ts)[:, None] * d
            dist = np.min([_point_segment_distance(pts, q0, q1) for q0, q1 in bsegs], axis=0)
            best = max(best, float(dist.max()))
    return best


def _sample(S: ClosedArcSet) -> np.ndarray:
    step = SAMPLING_RESOLUTION * S.length
    out = []
    for a, ln in S._pieces():
        n = max(int(math.ceil(ln / step)), 1)
        out.append(a + np.linspace(0.0, ln, n + 1))
    return np.concatenate(out)


def hausdorff_distance(a: BoundarySet, b: BoundarySet, metric: str = "euclidean") -> float:
    """Hausdorff distance between two closed boundary sets.

    Open :class:`ArcSet` operands are replaced by their closures.  The
    arclength metric and the euclidean metric on circles and polygons are
    exact; for star and sector curves the euclidean variant uses endpoint-
    inclusive sampling at ``L * SAMPLING_RESOLUTION``.
    """
    _same_curve(a, b)
    A, B = _as_closed(a), _as_closed(b)
    if not (A.full or A.pieces) or not (B.full or B.pieces):
        raise GeometryError("Hausdorff distance to an empty set is undefined")
    if metric not in ("euclidean", "arclength"):
        raise ValueError(f"unknown metric {metric!r}")
    if A == B:
        return 0.0
    if metric == "arclength":
        return max(_directed_arclength(A, B), _directed_arclength(B, A))
    if metric != "euclidean":
        raise ValueError(f"unknown metric {metric!r}")
    curve = A.curve
    if curve.kind == "circle":
        r = dict(curve.params)["radius"]
        ds = max(_directed_arclength(A, B), _directed_arclength(B, A))
        return 2 * r * math.sin(min(ds / r, math.pi) / 2)
    if curve.kind == "polygon":
        return max(_directed_euclidean_polygon(A, B), _directed_euclidean_polygon(B, A))
    pa, pb = curve.point(_sample(A)), curve.point(_sample(B))
    return float(max(cKDTree(pb).query(pa)[0].max(), cKDTree(pa).query(pb)[0].max()))


def lgl_sequence(curve: BoundaryCurve, m: float, n: int, phase: float = 0.0) -> ArcSet:
    """``n`` equal arcs of total length ``m * L`` with equally spaced starts.

    Arc ``j`` occupies ``[phase + j L/n, phase + j L/n + m L/n)``.  As ``n``
    grows the indicator tends weakly-* to the constant ``m``.
    """
    if not 0 < m < 1:
        raise GeometryError(f"measure fraction must lie in (0, 1), got {m}")
    if n < 1:
        raise GeometryError(f"number of arcs must be positive, got {n}")
    L = curve.total_length
    return ArcSet.from_components(curve, [(phase + j * L / n, m * L / n) for j in range(n)])


def alternating_arcs(curve: BoundaryCurve, n: int) -> ArcSet:
    """Split the curve into ``n`` equal pieces and keep every other one (``n`` even)."""
    if n < 2 or n % 2:
        raise GeometryError(f"alternating configuration needs an even n >= 2, got {n}")
    return lgl_sequence(curve, 0.5, n // 2)


def perturb_endpoints(s: ArcSet, deltas) -> ArcSet:
    """Shift every component's endpoints by ``deltas[i] = (d_start, d_end)``.

    Positive shifts move an endpoint forward in arclength.
    """
    comps = s.components
    d = np.asarray(deltas, dtype=float).reshape(len(comps), 2) if comps else np.zeros((0, 2))
    L = s.length
    new = []
    for i, ((a, ln), (da, db)) in enumerate(zip(comps, d)):
        nl = ln + db - da
        if nl <= 0:
            raise GeometryError(f"perturbation reverses interval {i} (start {a:.6g}, length {ln:.6g})")
        new.append((a + da, nl))
    for i in range(len(new)):
        a, ln = new[i]
        nxt = new[(i + 1) % len(new)][0] + (L if i == len(new) - 1 else 0.0)
        if nxt - (a + ln) <= 0:
            raise GeometryError(f"perturbation makes interval {i} collide with interval {(i + 1) % len(new)}")
    return ArcSet.from_components(s.curve, new)

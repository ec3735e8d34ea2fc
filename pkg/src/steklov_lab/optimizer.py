"""Extremal Steklov-Dirichlet eigenvalues over arc sets of fixed measure and component count.

Feasible sets are parametrized so that the constraints hold by
construction: ``N`` arc lengths and ``N`` gap lengths are a mesh floor plus
a softmax share of the remaining length, and the first arc starts at a
phase that is either fixed or searched.  Each restart runs Nelder-Mead on
these coordinates.
"""

from __future__ import annotations

import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np
from scipy.optimize import minimize

from .eigensolve import settings_hash, solve_on_mesh, steklov_dirichlet_eigenvalues
from .geometry import ArcSet, BoundaryCurve, component_count, lgl_sequence, measure
from .meshing import MeshingError, deform_to, mesh_domain

__all__ = ["OptimConfig", "OptimResult", "OptimError", "Evaluator", "decode", "optimize_arcs"]

# arcs and gaps never get shorter than this multiple of h_target
FLOOR_FACTOR = 2.0 * (1 + 1e-6)
# a softmax share below this counts as clamped to the floor
CLAMP_SHARE = 1e-3


class OptimError(ValueError):
    """Invalid optimization setup."""


@dataclass(frozen=True)
class OptimConfig:
    objective: str = "minimize"
    k: int = 1
    m: float = 0.5
    N: int = 1
    h_target: float = 0.05
    endpoint_h: Optional[float] = None
    budget: int = 200
    tol: float = 1e-6
    restarts: int = 3
    seed: int = 0
    optimize_phase: bool = True
    phase: float = 0.0
    init_scale: float = 0.5
    tie_rtol: float = 1e-12
    mesh_mode: str = "deform"
    workers: int = 1

    def validate(self, curve: BoundaryCurve) -> None:
        if self.objective not in ("minimize", "maximize"):
            raise OptimError(f"objective must be 'minimize' or 'maximize', got {self.objective!r}")
        if self.mesh_mode not in ("deform", "remesh"):
            raise OptimError(f"mesh_mode must be 'deform' or 'remesh', got {self.mesh_mode!r}")
        if self.k < 1:
            raise OptimError("k must be at least 1")
        if not 0 < self.m < 1:
            raise OptimError(f"m must lie in (0, 1), got {self.m}")
        if self.N < 1:
            raise OptimError("N must be at least 1")
        if self.budget < 1 or self.restarts < 1 or self.workers < 1:
            raise OptimError("budget, restarts and workers must be at least 1")
        if not self.h_target > 0:
            raise OptimError("h_target must be positive")
        if self.endpoint_h is not None and not 0 < self.endpoint_h <= self.h_target:
            raise OptimError("endpoint_h must lie in (0, h_target]")
        L = curve.total_length
        floor = FLOOR_FACTOR * self.h_target
        for what, total in (("arc", self.m * L), ("gap", (1 - self.m) * L)):
            if total / self.N <= floor:
                raise OptimError(
                    f"{what}s of average length {total / self.N:.4g} are below the mesh floor "
                    f"{floor:.4g}; reduce h_target below {total / self.N / FLOOR_FACTOR:.4g}"
                )

    def n_params(self) -> int:
        return 2 * self.N - 2 + int(self.optimize_phase)


def _shares(z: np.ndarray) -> np.ndarray:
    logits = np.concatenate([[0.0], z])
    w = np.exp(logits - logits.max())
    return w / w.sum()


def decode(curve: BoundaryCurve, config: OptimConfig, x) -> tuple[ArcSet, bool]:
    """Arc set encoded by search coordinates ``x``, and whether any piece sits at the floor."""
    x = np.asarray(x, dtype=float)
    N = config.N
    L = curve.total_length
    floor = FLOOR_FACTOR * config.h_target
    a_sh = _shares(x[: N - 1])
    g_sh = _shares(x[N - 1: 2 * N - 2])
    arcs = floor + (config.m * L - N * floor) * a_sh
    gaps = floor + ((1 - config.m) * L - N * floor) * g_sh
    phase = float(x[2 * N - 2]) if config.optimize_phase else config.phase
    starts = phase + np.concatenate([[0.0], np.cumsum(arcs + gaps)[:-1]])
    s = ArcSet.from_components(curve, list(zip(starts.tolist(), arcs.tolist())))
    clamped = bool(N > 1 and (a_sh.min() < CLAMP_SHARE or g_sh.min() < CLAMP_SHARE))
    return s, clamped


class Evaluator:
    """Memoized ``lambda_k`` keyed by canonical arc set; safe for concurrent use.

    With a ``reference`` arc set on a curve without corners, candidates with
    the same component count are solved on the reference mesh deformed to
    their endpoints (see :func:`deform_to`), which makes the objective a
    smooth function of the endpoints.  Otherwise, or when the deformation
    is too distorted, each candidate is meshed afresh.
    """

    def __init__(self, curve: BoundaryCurve, k: int, h_target: float, endpoint_h: Optional[float] = None,
                 reference: Optional[ArcSet] = None):
        self.curve = curve
        self.k = k
        self.h_target = h_target
        self.endpoint_h = endpoint_h
        self._cache: dict = {}
        self._lock = threading.Lock()
        self.solves = 0
        self.remeshed = 0
        self._ref_mesh = None
        if reference is not None and not curve.corners:
            self._ref_mesh = mesh_domain(curve, reference, h_target, endpoint_h=endpoint_h)

    def _solve(self, arcs: ArcSet) -> float:
        ref = self._ref_mesh
        if ref is not None and component_count(arcs) == component_count(ref.arcs):
            try:
                return float(solve_on_mesh(deform_to(ref, arcs), self.k).eigenvalues[self.k - 1])
            except MeshingError:
                pass
        with self._lock:
            self.remeshed += 1
        res = steklov_dirichlet_eigenvalues(self.curve, arcs, self.h_target, self.k, endpoint_h=self.endpoint_h)
        return float(res.eigenvalues[self.k - 1])

    def __call__(self, arcs: ArcSet) -> float:
        with self._lock:
            if arcs in self._cache:
                return self._cache[arcs]
        val = self._solve(arcs)
        with self._lock:
            if arcs not in self._cache:
                self.solves += 1
            self._cache[arcs] = val
        return val

    def __len__(self) -> int:
        return len(self._cache)


@dataclass
class OptimResult:
    best: ArcSet
    best_value: float
    log: list
    incumbent: list
    best_restart: int
    termination: str
    config: dict
    provenance: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "best": self.best.to_dict(),
            "best_value": self.best_value,
            "best_restart": self.best_restart,
            "termination": self.termination,
            "config": self.config,
            "log": self.log,
            "incumbent": self.incumbent,
            "provenance": self.provenance,
        }

    @property
    def rows(self) -> list[dict]:
        return [{"evaluation": i, "incumbent": v} for i, v in enumerate(self.incumbent)]


def _run_restart(curve, config, evaluator, x0, r):
    sign = 1.0 if config.objective == "minimize" else -1.0
    log = []

    def f(x):
        s, clamped = decode(curve, config, x)
        v = evaluator(s)
        log.append({"restart": r, "iteration": len(log), "arcs": s.to_dict()["arcs"], "lambda": v,
                    "clamped": clamped, "_set": s})
        return sign * v

    n = len(x0)
    if n == 0:
        f(x0)
        return log, "converged (no free coordinates)"

    def simplex_at(x):
        # the phase coordinate steps by a fraction of the arc period
        sim = np.tile(x, (n + 1, 1))
        for i in range(n):
            phase = config.optimize_phase and i == n - 1
            sim[i + 1, i] += 0.1 * curve.total_length / config.N if phase else 0.5
        return sim

    # Nelder-Mead simplices collapse on noisy objectives; restart from the
    # incumbent with a fresh simplex until a round brings no improvement
    x, fx = np.asarray(x0, dtype=float), None
    while True:
        left = config.budget - len(log)
        if left <= n + 1:
            return log, "budget exhausted"
        res = minimize(f, x, method="Nelder-Mead",
                       options={"maxfev": left, "initial_simplex": simplex_at(x),
                                "xatol": 1e-4, "fatol": config.tol, "adaptive": n > 2})
        if fx is not None and res.fun >= fx - config.tol * max(abs(fx), 1.0):
            return log, "converged"
        x, fx = res.x, res.fun
        if not res.success:
            return log, "budget exhausted"


def optimize_arcs(curve: BoundaryCurve, config: OptimConfig,
                  evaluator: Optional[Evaluator] = None) -> OptimResult:
    """Multi-start derivative-free search for the extremal ``lambda_k``."""
    config.validate(curve)
    if evaluator is None:
        reference = None
        if config.mesh_mode == "deform":
            reference = lgl_sequence(curve, config.m, config.N, config.phase)
        evaluator = Evaluator(curve, config.k, config.h_target, config.endpoint_h, reference)
    rng = np.random.default_rng(config.seed)
    n = config.n_params()
    starts = []
    for _ in range(config.restarts):
        x0 = config.init_scale * rng.standard_normal(n)
        if config.optimize_phase:
            x0[-1] = rng.uniform(0.0, curve.total_length)
        starts.append(x0)

    if config.workers > 1:
        with ThreadPoolExecutor(config.workers) as pool:
            outs = list(pool.map(lambda a: _run_restart(curve, config, evaluator, *a),
                                 [(x0, r) for r, x0 in enumerate(starts)]))
    else:
        outs = [_run_restart(curve, config, evaluator, x0, r) for r, x0 in enumerate(starts)]

    log = [e for lg, _ in outs for e in lg]
    maximize = config.objective == "maximize"
    values = np.array([e["lambda"] for e in log])
    best_v = float(values.max() if maximize else values.min())
    tie = config.tie_rtol * abs(best_v)
    cands = [e for e in log if abs(e["lambda"] - best_v) <= tie]
    best = min(cands, key=lambda e: (e["arcs"], e["restart"], e["iteration"]))

    inc, cur = [], None
    for v in values:
        cur = v if cur is None else (max(cur, v) if maximize else min(cur, v))
        inc.append(float(cur))

    L = curve.total_length
    best_set = best["_set"]
    for e in log:
        s = e.pop("_set")
        if abs(measure(s) - config.m * L) > 1e-12 * max(L, 1.0) or component_count(s) != config.N:
            raise OptimError("search produced an infeasible configuration")
    reasons = sorted({r for _, r in outs})
    term = "; ".join(reasons)
    if best["clamped"]:
        term += "; best configuration clamped at the mesh floor"
    cfg = asdict(config)
    prov = {"curve": curve.to_dict(), "config": cfg}
    prov["settings_hash"] = settings_hash(prov)
    return OptimResult(best_set, float(best["lambda"]), log, inc, int(best["restart"]), term, cfg, prov)

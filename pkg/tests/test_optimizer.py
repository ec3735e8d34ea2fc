import math

import numpy as np
import pytest

from steklov_lab.geometry import ArcSet, component_count, lgl_sequence, measure, perturb_endpoints
from steklov_lab.optimizer import (
    FLOOR_FACTOR,
    Evaluator,
    OptimConfig,
    OptimError,
    decode,
    optimize_arcs,
)

from conftest import DISK, SQUARE

PI = math.pi


class ConstantEvaluator:
    def __init__(self, value=1.0):
        self.value = value
        self.calls = 0

    def __call__(self, arcs):
        self.calls += 1
        return self.value


def test_decode_feasible_and_floored():
    cfg = OptimConfig(N=3, m=0.4, h_target=0.05)
    rng = np.random.default_rng(0)
    for _ in range(50):
        s, _ = decode(DISK, cfg, 5 * rng.standard_normal(cfg.n_params()))
        assert component_count(s) == 3
        assert measure(s) == pytest.approx(0.4 * 2 * PI, abs=1e-12)
        lengths = [ln for _, ln in s.components]
        assert min(lengths) >= FLOOR_FACTOR * 0.05 * (1 - 1e-12)


def test_decode_flags_clamp():
    cfg = OptimConfig(N=2, optimize_phase=False)
    _, clamped = decode(DISK, cfg, np.array([-20.0, 0.0]))
    assert clamped
    _, clamped = decode(DISK, cfg, np.zeros(2))
    assert not clamped


def test_phase_invariance_on_disk():
    cfg = OptimConfig(N=1, m=0.3, h_target=0.1)
    ev = Evaluator(DISK, 1, 0.1, reference=lgl_sequence(DISK, 0.3, 1))
    vals = [ev(decode(DISK, cfg, np.array([ph]))[0]) for ph in (0.0, 1.3, 4.0)]
    np.testing.assert_allclose(vals, vals[0], rtol=1e-9)


def test_cache_hit_and_keys():
    ev = Evaluator(SQUARE, 1, 0.1)
    a = ArcSet(SQUARE, [(2.0, 3.0)])
    b = ArcSet(SQUARE, [(2.0, 2.5), (2.5, 3.0)])
    assert a == b and hash(a) == hash(b)
    v1 = ev(a)
    v2 = ev(b)
    assert v1 == v2 and ev.solves == 1 and len(ev) == 1


def test_rotated_set_distinct_key_equal_value():
    ev = Evaluator(DISK, 1, 0.1, reference=ArcSet(DISK, [(0.0, 1.5)]))
    a = ArcSet(DISK, [(0.0, 1.5)])
    b = perturb_endpoints(a, np.array([[0.7, 0.7]]))
    assert a != b
    va, vb = ev(a), ev(b)
    assert ev.solves == 2
    assert vb == pytest.approx(va, rel=1e-9)


def test_infeasible_config_rejected_before_search():
    ev = ConstantEvaluator()
    with pytest.raises(OptimError, match="reduce h_target"):
        optimize_arcs(DISK, OptimConfig(N=16, m=0.05, h_target=0.05), evaluator=ev)
    assert ev.calls == 0


@pytest.mark.parametrize("field,value", [("objective", "max"), ("m", 1.0), ("N", 0), ("mesh_mode", "x")])
def test_bad_fields(field, value):
    with pytest.raises(OptimError):
        OptimConfig(**{field: value}).validate(DISK)


def test_tie_break_is_lexicographic():
    cfg = OptimConfig(N=2, m=0.5, h_target=0.05, budget=30, restarts=2)
    res = optimize_arcs(DISK, cfg, evaluator=ConstantEvaluator())
    assert res.best.to_dict()["arcs"] == min(e["arcs"] for e in res.log)


def test_log_feasible_and_incumbent_monotone():
    cfg = OptimConfig(N=1, m=0.25, h_target=0.1, budget=25, restarts=2, objective="minimize")
    res = optimize_arcs(SQUARE, cfg)
    assert len(res.log) <= cfg.budget * cfg.restarts
    for e in res.log:
        s = ArcSet(SQUARE, [tuple(p) for p in e["arcs"]])
        assert measure(s) == pytest.approx(1.0, abs=1e-12)
        assert component_count(s) == 1
    assert np.all(np.diff(res.incumbent) <= 0)
    assert res.best_value == res.incumbent[-1]
    d = res.to_dict()
    assert d["provenance"]["settings_hash"]


def test_deterministic_for_seed():
    cfg = OptimConfig(N=1, m=0.25, h_target=0.1, budget=15, restarts=1, seed=4)
    a = optimize_arcs(SQUARE, cfg).to_dict()
    b = optimize_arcs(SQUARE, cfg).to_dict()
    assert a == b


def test_threaded_restarts_match_sequential():
    base = dict(N=1, m=0.25, h_target=0.1, budget=12, restarts=2, seed=1)
    a = optimize_arcs(SQUARE, OptimConfig(**base)).to_dict()
    b = optimize_arcs(SQUARE, OptimConfig(workers=2, **base)).to_dict()
    assert a["best_value"] == b["best_value"]


def test_equal_spacing_ladder_increases():
    lams = []
    for n in (1, 2, 4):
        ev = Evaluator(DISK, 1, 0.1, endpoint_h=0.1 / 8)
        lams.append(ev(lgl_sequence(DISK, 0.5, n)))
    assert lams[0] < lams[1] < lams[2]

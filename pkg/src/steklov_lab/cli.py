"""Command line entry point.

    python -m steklov_lab.cli solve --config configs/solve.json --out results/

Exit codes: 0 success, 1 numerical failure (stage named on stderr), 2 bad
arguments or config (nothing written).  Reports are written as
``<command>-<settings hash>.json`` plus a CSV table; wall-clock timestamps
go only to the ``.log`` sidecar, so reports are byte-identical across runs.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
import time
from pathlib import Path

import jsonschema

from .assembly import AssemblyError
from .eigensolve import EigenError, settings_hash, steklov_dirichlet_eigenvalues
from .experiments import (
    StudyError,
    continuity_study,
    convergence_study,
    divergence_study,
    endpoint_approach,
    singularity_fit,
    stability_sweep,
)
from .geometry import ArcSet, BoundaryCurve, GeometryError
from .meshing import MeshingError, mesh_domain, mesh_quality, refine
from .optimizer import OptimConfig, OptimError, optimize_arcs
from .schemas import CONFIG_SCHEMAS, REPORT_SCHEMAS

COMMANDS = tuple(CONFIG_SCHEMAS)


class ConfigError(ValueError):
    pass


def _stage(err: BaseException) -> str:
    for cls, name in ((MeshingError, "meshing"), (AssemblyError, "assembly"), (EigenError, "eigensolve"),
                      (StudyError, "experiment"), (OptimError, "optimizer"), (GeometryError, "geometry")):
        if isinstance(err, cls):
            return name
    return "numerics"


def load_config(command: str, path: str) -> dict:
    try:
        text = Path(path).read_text()
    except OSError as err:
        raise ConfigError(f"{path}: cannot read config: {err.strerror}") from err
    try:
        cfg = json.loads(text)
    except json.JSONDecodeError as err:
        raise ConfigError(f"{path}:{err.lineno}:{err.colno}: malformed JSON: {err.msg}") from err
    errors = sorted(jsonschema.Draft202012Validator(CONFIG_SCHEMAS[command]).iter_errors(cfg),
                    key=lambda e: list(e.absolute_path))
    if errors:
        e = errors[0]
        where = "/".join(str(p) for p in e.absolute_path) or "<root>"
        raise ConfigError(f"{path}: field '{where}': {e.message}")
    return cfg


def _curve(cfg) -> BoundaryCurve:
    try:
        return BoundaryCurve.from_dict(cfg["curve"])
    except (GeometryError, KeyError, TypeError) as err:
        raise ConfigError(f"field 'curve': {err}") from err


def _arcs(curve, data, name) -> ArcSet:
    try:
        return ArcSet(curve, [tuple(p) for p in data])
    except GeometryError as err:
        raise ConfigError(f"field '{name}': {err}") from err


def prepare(command: str, cfg: dict, seed: int | None):
    """Validate semantics and return a zero-argument job producing ``(report dict, csv rows)``."""
    curve = _curve(cfg)
    g = cfg.get
    if command == "solve":
        arcs = _arcs(curve, cfg["arcs"], "arcs")

        def job():
            res = steklov_dirichlet_eigenvalues(curve, arcs, cfg["h_target"], cfg["k"],
                                                g("refinements", 0), g("endpoint_h"))
            mesh = mesh_domain(curve, arcs, cfg["h_target"], endpoint_h=g("endpoint_h"))
            for _ in range(g("refinements", 0)):
                mesh = refine(mesh)
            out = res.to_dict()
            q = mesh_quality(mesh)
            out["mesh"] = {"n_vertices": q.n_vertices, "n_triangles": q.n_triangles,
                           "min_angle_deg": q.min_angle_deg, "max_aspect_ratio": q.max_aspect_ratio}
            rows = [{"index": j + 1, "lambda": lam, "residual": r}
                    for j, (lam, r) in enumerate(zip(out["lambda"], out["residuals"]))]
            return out, rows
        return job
    if command == "stability":
        arcs = _arcs(curve, cfg["arcs"], "arcs")
        eps = cfg["eps"]
        if any(b >= a for a, b in zip(eps, eps[1:])):
            raise ConfigError("field 'eps': grid must be strictly decreasing")
        kw = {k: cfg[k] for k in ("mode", "h_target", "endpoint", "calibration", "signal_factor") if k in cfg}

        def job():
            r = stability_sweep(curve, arcs, cfg["k"], eps, **kw)
            return r.to_dict(), r.rows
        return job
    if command == "diverge":
        kw = {k: cfg[k] for k in ("n_grid", "m", "k", "h_levels", "elements_per_arc", "h_max",
                                  "endpoint_ratio", "max_deviation") if k in cfg}
        if not 0 < g("m", 0.5) < 1:
            raise ConfigError("field 'm': must lie in (0, 1)")
        ns = g("n_grid", [2, 4, 8, 16])
        if any(n & (n - 1) for n in ns):
            raise ConfigError("field 'n_grid': entries must be powers of 2")

        def job():
            r = divergence_study(curve=curve, **kw)
            return r.to_dict(), r.rows
        return job
    if command == "singularity":
        arcs = _arcs(curve, cfg["arcs"], "arcs")
        kw = {k: cfg[k] for k in ("radii_window", "h_target", "k", "n_samples") if k in cfg}

        def job():
            r = singularity_fit(curve, arcs, cfg["interface_point"], **kw)
            return r.to_dict(), r.rows
        return job
    if command == "continuity":
        target = _arcs(curve, cfg["target"], "target")
        if "sequence" in cfg:
            seq = [_arcs(curve, s, f"sequence/{i}") for i, s in enumerate(cfg["sequence"])]
        elif "directions" in cfg and "eps" in cfg:
            try:
                seq = endpoint_approach(target, cfg["directions"], cfg["eps"])
            except (GeometryError, ValueError) as err:
                raise ConfigError(f"field 'directions': {err}") from err
        else:
            raise ConfigError("field '<root>': give either 'sequence' or both 'directions' and 'eps'")
        kw = {k: cfg[k] for k in ("h_target", "envelope_constant") if k in cfg}

        def job():
            r = continuity_study(curve, target, seq, cfg["k"], **kw)
            return r.to_dict(), r.rows
        return job
    if command == "converge":
        arcs = _arcs(curve, cfg["arcs"], "arcs")
        kw = {k: cfg[k] for k in ("levels", "h_target") if k in cfg}

        def job():
            r = convergence_study(curve, arcs, cfg["k"], **kw)
            return r.to_dict(), r.rows
        return job
    if command == "optimize":
        fields = {k: v for k, v in cfg.items() if k != "curve"}
        if seed is not None:
            fields["seed"] = seed
        try:
            oc = OptimConfig(**fields)
            oc.validate(curve)
        except (OptimError, TypeError) as err:
            raise ConfigError(f"optimizer config: {err}") from err

        def job():
            r = optimize_arcs(curve, oc)
            return r.to_dict(), r.rows
        return job
    raise ConfigError(f"unknown command {command!r}")


def _csv(rows) -> str:
    buf = io.StringIO()
    if rows:
        w = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
        w.writeheader()
        for r in rows:
            w.writerow({k: repr(v) if isinstance(v, float) else v for k, v in r.items()})
    return buf.getvalue()


def dumps(report: dict) -> str:
    return json.dumps(report, sort_keys=True, indent=1, allow_nan=False) + "\n"


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="steklov_lab", description="Steklov-Dirichlet eigenvalue studies")
    sub = p.add_subparsers(dest="command", required=True)
    for c in COMMANDS:
        s = sub.add_parser(c)
        s.add_argument("--config", required=True, help="JSON config file")
        s.add_argument("--out", required=True, help="output directory")
        s.add_argument("--seed", type=int, default=None, help="overrides the config seed")
        s.add_argument("--quiet", action="store_true")
    return p


def run(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as e:
        return 2 if e.code else 0
    say = (lambda *a: None) if args.quiet else (lambda *a: print(*a, file=sys.stderr))
    try:
        cfg = load_config(args.command, args.config)
        seed = args.seed if args.seed is not None else cfg.get("seed", 0)
        job = prepare(args.command, cfg, seed)
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return 2
    out = Path(args.out)
    if out.exists() and not out.is_dir():
        print(f"config error: output path {out} is not a directory", file=sys.stderr)
        return 2

    t0 = time.time()
    try:
        report, rows = job()
    except (MeshingError, AssemblyError, EigenError, StudyError, OptimError, GeometryError,
            ArithmeticError, ValueError, RuntimeError) as err:
        print(f"numerical failure in stage '{_stage(err)}': {err}", file=sys.stderr)
        return 1
    report["provenance"] = dict(report.get("provenance", {}), command=args.command, config=cfg, seed=seed)
    report["provenance"]["settings_hash"] = settings_hash({k: v for k, v in report["provenance"].items()
                                                           if k != "settings_hash"})
    jsonschema.validate(report, REPORT_SCHEMAS[args.command])

    out.mkdir(parents=True, exist_ok=True)
    stem = f"{args.command}-{report['provenance']['settings_hash']}"
    (out / f"{stem}.json").write_text(dumps(report))
    (out / f"{stem}.csv").write_text(_csv(rows))
    (out / f"{stem}.log").write_text(
        f"started {time.strftime('%Y-%m-%dT%H:%M:%S', time.localtime(t0))}\nseconds {time.time() - t0:.3f}\n")
    say(f"wrote {out / stem}.json")
    return 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()

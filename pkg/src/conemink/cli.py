"""Command line front end.

Exit codes: 0 success, 1 malformed input, 2 a hypothesis of the underlying
result fails for the input, 3 a solver did not converge.
"""

from __future__ import annotations

import argparse
import csv
import io as _io
import math
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import functionals, io, zoo3d
from .errors import ConvergenceError, PreconditionError
from .families import TailFamily
from .ma import SolverOptions, blaschke_sum, solve, solve_dominated
from .mink2d import AngularMeasure, approximate2d, condition_value, necessity_check, solve2d
from .pseudocone import is_asymptotic
from .sam import DiscreteMeasure, surface_measure
from .verify import SUITES, run_suite

EXIT_OK, EXIT_INPUT, EXIT_PRECONDITION, EXIT_CONVERGENCE = 0, 1, 2, 3


@dataclass
class RunConfig:
    command: str
    inputs: dict = field(default_factory=dict)
    outputs: dict = field(default_factory=dict)
    tol: float = 1e-9
    max_iter: int = 100_000
    depth_limit: float = 1e3
    method: str = "newton"
    options: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.tol <= 0 or self.max_iter <= 0 or self.depth_limit <= 0:
            raise io.InputError("tolerances must be positive", "arguments")
        for name, path in self.inputs.items():
            if path is not None and not Path(path).is_file():
                raise io.InputError("no such file", f"--{name} {path}")

    def solver_options(self) -> SolverOptions:
        return SolverOptions(tol=self.tol, max_iter=self.max_iter, depth_factor=self.depth_limit,
                             method=self.method)

    def digest(self) -> str:
        """Hash of the command, its options and the bytes of every input file.

        Output paths are left out so that a run is reproducible wherever it writes.
        """
        blob = asdict(self)
        del blob["outputs"]
        blob["input_bytes"] = {k: Path(p).read_text() for k, p in self.inputs.items() if p}
        return io.config_hash(blob)


def _write(path, text: str) -> None:
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def _measure(path):
    return io.measure_from_json(io.load_json(path))


def _pseudocone(path):
    return io.pseudocone_from_json(io.load_json(path))


def _as_discrete(mu):
    return mu.to_discrete() if isinstance(mu, AngularMeasure) else mu


def _atom_residual(mu: DiscreteMeasure, K) -> float:
    s = surface_measure(K)
    worst = 0.0
    for i, j in enumerate(mu.match(s, tol=1e-9)):
        if j is None:
            return math.inf
        worst = max(worst, abs(s.weights[j] - mu.weights[i]) / mu.weights[i])
    return worst if len(s) == len(mu) else math.inf


# ---------------------------------------------------------------------------
# commands


def cmd_solve2d(cfg: RunConfig) -> int:
    mu = _measure(cfg.inputs["measure"])
    if isinstance(mu, DiscreteMeasure):
        if mu.cone.dim != 2:
            raise io.InputError("solve2d needs a planar measure", "$.cone")
        mu = AngularMeasure.from_discrete(mu)
    K = solve2d(mu)
    rep = {"config_hash": cfg.digest(), "atomwise_residual": _atom_residual(mu.to_discrete(), K),
           "cuts": len(K.normals)}
    if len(mu):
        rep["necessity"] = necessity_check(K)
    _write(cfg.outputs.get("out"), io.dumps(io.pseudocone_to_json(K, io.to_jsonable(rep))))
    return EXIT_OK


def cmd_solve(cfg: RunConfig) -> int:
    mu = _as_discrete(_measure(cfg.inputs["measure"]))
    K, f = solve(mu, cfg.solver_options(), q=cfg.options.get("q"))
    rep = {"config_hash": cfg.digest(), "solver": f.report}
    if len(mu):
        rep["atomwise_residual"] = max(abs(n["achieved"] - n["target"]) / n["target"] for n in f.report["nodes"])
    _write(cfg.outputs.get("out"), io.dumps(io.pseudocone_to_json(K, io.to_jsonable(rep))))
    return EXIT_OK


def cmd_dominated(cfg: RunConfig) -> int:
    mu = _as_discrete(_measure(cfg.inputs["measure"]))
    L = _pseudocone(cfg.inputs["bound"])
    K, rep = solve_dominated(mu, L, cfg.solver_options(), schedule=cfg.options.get("schedule", "full"))
    rep["config_hash"] = cfg.digest()
    _write(cfg.outputs.get("out"), io.dumps(io.pseudocone_to_json(K, io.to_jsonable(rep))))
    return EXIT_OK


def cmd_blaschke(cfg: RunConfig) -> int:
    K = _pseudocone(cfg.inputs["first"])
    L = _pseudocone(cfg.inputs["second"])
    Q, rep = blaschke_sum(K, L, cfg.solver_options())
    rep["config_hash"] = cfg.digest()
    _write(cfg.outputs.get("out"), io.dumps(io.pseudocone_to_json(Q, io.to_jsonable(rep))))
    return EXIT_OK


def cmd_measure(cfg: RunConfig) -> int:
    K = _pseudocone(cfg.inputs["pseudocone"])
    mu = surface_measure(K)
    if cfg.options.get("csv"):
        _write(cfg.outputs.get("out"), mu.to_csv())
    else:
        doc = io.measure_to_json(mu)
        doc["report"] = {"config_hash": cfg.digest(), "asymptotic": is_asymptotic(K).asymptotic,
                         "total": mu.total}
        _write(cfg.outputs.get("out"), io.dumps(io.to_jsonable(doc)))
    return EXIT_OK


def cmd_check(cfg: RunConfig) -> int:
    kind = cfg.options["functional"]
    m = cfg.options.get("m")
    h = cfg.digest()
    if cfg.inputs.get("family"):
        fam = io.family_from_json(io.load_json(cfg.inputs["family"]))
        if kind in ("j", "gamma"):
            if m is None:
                raise io.InputError("--m is required", "arguments")
            rep = functionals.family_table(fam, kind, m)
            _write(cfg.outputs.get("out"), f"# config_hash {h}\n" + functionals.table_csv(rep))
            return EXIT_OK
        if kind == "condition":
            if not isinstance(fam, TailFamily):
                raise io.InputError("the condition check needs a tail family", "$.kind")
            rep = condition_value(fam)
        elif kind == "convert":
            if m is None:
                raise io.InputError("--m is required", "arguments")
            rep = functionals.convert(fam, m, cfg.options.get("epsilon", 0.5))
        elif kind == "approximate":
            if not isinstance(fam, TailFamily):
                raise io.InputError("approximation needs a tail family", "$.kind")
            _, rep = approximate2d(fam, int(cfg.options.get("depth", 8)))
        else:
            raise io.InputError(f"functional {kind!r} does not apply to families", "--functional")
    else:
        mu = _as_discrete(_measure(cfg.inputs["measure"]))
        if kind == "j":
            rep = {"value": functionals.j_functional(mu, m)}
        elif kind == "gamma":
            rep = {"value": functionals.gamma_functional(mu, m)}
        elif kind == "condition":
            rep = condition_value(AngularMeasure.from_discrete(mu))
        elif kind == "convert":
            rep = functionals.convert(mu, m, cfg.options.get("epsilon", 0.5))
        elif kind == "schneider":
            p = functionals.LayerProfile.from_measure(mu)
            rep = functionals.schneider_bound((p, mu.cone.dim))
        else:
            raise io.InputError(f"functional {kind!r} needs a family", "--functional")
    rep = io.to_jsonable(rep)
    rep["config_hash"] = h
    _write(cfg.outputs.get("out"), io.dumps(rep))
    return EXIT_OK


def cmd_zoo(cfg: RunConfig) -> int:
    if cfg.inputs.get("scenario"):
        sc = io.scenario_from_json(io.load_json(cfg.inputs["scenario"]))
    else:
        sc = dict(cfg.options)
    kind = sc["kind"]
    out: dict = {"kind": kind, "config_hash": cfg.digest(), "label": "closed forms; q-gon sets are approximations"}
    if kind == "a_set":
        out["mass"] = zoo3d.a_set_mass(sc["alpha"], sc["t"])
        out["polygonal_mass"] = zoo3d.polygonal_mass(sc["alpha"], sc["t"], sc["q"])
    elif kind == "facet":
        out["area"] = zoo3d.facet_ellipse_area(sc["alpha"])
        out["decay"] = zoo3d.facet_decay_fit()
    elif kind == "layered":
        K, rep = zoo3d.layered_set(sc["depth"], sc["m"], sc.get("alphas"), sc.get("radii"), sc["q"])
        out.update(rep)
        out["schneider"] = functionals.schneider_bound((rep["_profile"], 3))
        if cfg.outputs.get("geometry"):
            _write(cfg.outputs["geometry"], io.dumps(io.pseudocone_to_json(K)))
    elif kind == "divergent":
        mu, rep = zoo3d.divergent_measure(sc["depth"], sc["m"], sc.get("eps0"), sc["q"])
        out.update(rep)
        if cfg.outputs.get("measure"):
            _write(cfg.outputs["measure"], io.dumps(io.to_jsonable(io.measure_to_json(mu))))
    else:
        raise io.InputError(f"unknown scenario kind {kind!r}", "kind")
    _write(cfg.outputs.get("out"), io.dumps(io.to_jsonable(out)))
    return EXIT_OK


def cmd_verify(cfg: RunConfig) -> int:
    rows = run_suite(cfg.options["suite"], cfg.options.get("seed", 0), cfg.options.get("count"))
    buf = _io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(["case", "value", "tolerance", "result"])
    for r in rows:
        wr.writerow([r["case"], repr(r["value"]), repr(r["tolerance"]), "pass" if r["passed"] else "FAIL"])
    failed = sum(not r["passed"] for r in rows)
    wr.writerow(["summary", f"{len(rows) - failed}/{len(rows)} passed", "", "pass" if not failed else "FAIL"])
    _write(cfg.outputs.get("out"), f"# config_hash {cfg.digest()}\n" + buf.getvalue())
    return EXIT_OK if not failed else EXIT_PRECONDITION


def cmd_export(cfg: RunConfig) -> int:
    K = _pseudocone(cfg.inputs["pseudocone"])
    height = cfg.options.get("height")
    if height is None:
        height = 2.0 * max(1.0, float(np.max(K.vertices @ K.cone.axis)))
    _write(cfg.outputs.get("out"), io.export_obj(K, height))
    return EXIT_OK


COMMANDS = {"solve2d": cmd_solve2d, "solve": cmd_solve, "dominated": cmd_dominated,
            "blaschke": cmd_blaschke, "measure": cmd_measure, "check": cmd_check, "zoo": cmd_zoo,
            "verify": cmd_verify, "export": cmd_export}


# ---------------------------------------------------------------------------
# argument parsing


def _solver_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--tol", type=float, default=1e-9)
    p.add_argument("--max-iter", type=int, default=100_000)
    p.add_argument("--depth-limit", type=float, default=1e3, help="value bound as a multiple of the domain diameter")
    p.add_argument("--method", choices=["newton", "oliker-prussner"], default="newton")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="conemink", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve2d", help="exact planar Minkowski problem")
    p.add_argument("--measure", required=True)
    p.add_argument("--out")

    p = sub.add_parser("solve", help="Minkowski problem via the Monge-Ampere lifting")
    p.add_argument("--measure", required=True)
    p.add_argument("--out")
    p.add_argument("--q", type=int, help="ring count for circular cones")
    _solver_args(p)

    p = sub.add_parser("dominated", help="solve along truncations of a measure dominated by S_L")
    p.add_argument("--measure", required=True)
    p.add_argument("--bound", required=True, help="pseudo cone L with mu <= S_L")
    p.add_argument("--schedule", choices=["full", "final"], default="full")
    p.add_argument("--out")
    _solver_args(p)

    p = sub.add_parser("blaschke", help="Blaschke sum of two asymptotic sets")
    p.add_argument("--first", required=True)
    p.add_argument("--second", required=True)
    p.add_argument("--out")
    _solver_args(p)

    p = sub.add_parser("measure", help="surface area measure of a pseudo cone")
    p.add_argument("--pseudocone", required=True)
    p.add_argument("--csv", action="store_true")
    p.add_argument("--out")

    p = sub.add_parser("check", help="integrability functionals and conditions")
    p.add_argument("--functional", required=True,
                   choices=["j", "gamma", "condition", "convert", "schneider", "approximate"])
    p.add_argument("--m", type=float)
    p.add_argument("--epsilon", type=float, default=0.5)
    p.add_argument("--depth", type=int, default=8)
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--family")
    src.add_argument("--measure")
    p.add_argument("--out")

    p = sub.add_parser("zoo", help="explicit constructions on the circular cone")
    p.add_argument("--scenario")
    p.add_argument("--kind", choices=["a_set", "facet", "layered", "divergent"])
    p.add_argument("--depth", type=int, default=3)
    p.add_argument("--m", type=float)
    p.add_argument("--q", type=int, default=256)
    p.add_argument("--alpha", type=float, default=math.pi / 4)
    p.add_argument("--t", type=float, default=1.0)
    p.add_argument("--out")
    p.add_argument("--geometry", help="write the layered set as a pseudo cone document")
    p.add_argument("--measure-out", dest="measure_out", help="write the divergent measure")

    p = sub.add_parser("verify", help="seeded pass/fail suites against oracles")
    p.add_argument("--suite", required=True, choices=sorted(SUITES))
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--count", type=int)
    p.add_argument("--out")

    p = sub.add_parser("export", help="OBJ of a truncated pseudo cone")
    p.add_argument("--pseudocone", required=True)
    p.add_argument("--height", type=float)
    p.add_argument("--out")
    return ap


def _config(args) -> RunConfig:
    c = args.command
    ins = {k: getattr(args, k) for k in ("measure", "bound", "first", "second", "pseudocone", "family", "scenario")
           if getattr(args, k, None) is not None}
    outs = {"out": getattr(args, "out", None)}
    opts: dict = {}
    if c == "solve":
        opts["q"] = args.q
    if c == "dominated":
        opts["schedule"] = args.schedule
    if c == "measure":
        opts["csv"] = args.csv
    if c == "check":
        opts.update(functional=args.functional, m=args.m, epsilon=args.epsilon, depth=args.depth)
    if c == "zoo":
        if args.scenario is None and args.kind is None:
            raise io.InputError("give --scenario or --kind", "arguments")
        m = args.m if args.m is not None else (0.5 if args.kind == "layered" else 2.0)
        opts.update(kind=args.kind, depth=args.depth, m=m, q=args.q, alpha=args.alpha, t=args.t)
        outs.update(geometry=args.geometry, measure=args.measure_out)
    if c == "verify":
        opts.update(suite=args.suite, seed=args.seed, count=args.count)
    if c == "export":
        opts["height"] = args.height
    kw = {}
    if hasattr(args, "tol"):
        kw = dict(tol=args.tol, max_iter=args.max_iter, depth_limit=args.depth_limit, method=args.method)
    return RunConfig(c, ins, outs, options=opts, **kw)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = _config(args)
        return COMMANDS[cfg.command](cfg)
    except io.InputError as exc:
        print(f"error: malformed input at {exc}", file=sys.stderr)
        return EXIT_INPUT
    except PreconditionError as exc:
        hyp = f" [{exc.hypothesis}]" if exc.hypothesis else ""
        print(f"error: precondition failed{hyp}: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    except ConvergenceError as exc:
        print(f"error: no convergence: {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE
    except ValueError as exc:
        print(f"error: invalid input: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())

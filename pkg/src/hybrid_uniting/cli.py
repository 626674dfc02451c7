"""Command-line front end: simulate, design, verify, sweep.

Exit codes: 0 success, 1 a run or check failed, 2 bad configuration. Errors
are reported as a JSON object ``{"error": kind, "field": ..., "message": ...}``
on stderr (and in ``error.json`` under ``--out`` when given).
"""

from __future__ import annotations

import argparse
import ast
import csv
import io
import itertools
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor

from . import __version__
from .arcio import arc_to_csv, fmt
from .design import DesignInputs, design_step1_check, design_step2_check, run_design
from .errors import HybridError, InvalidConfig, InvalidParams, NumericalBlowup
from .scenario import (PRESETS, apply_overrides, config_from_dict, load_config, preset_config, run)

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2


def _error(kind, message, field=None, out=None) -> dict:
    doc = {"error": kind, "field": field, "message": message}
    text = json.dumps(doc)
    print(text, file=sys.stderr)
    if out:
        os.makedirs(out, exist_ok=True)
        with open(os.path.join(out, "error.json"), "w") as fh:
            fh.write(text + "\n")
    return doc


def _write_json(path, doc):
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2, allow_nan=False)
        fh.write("\n")


def _scenario(args):
    if args.config and args.preset:
        raise InvalidConfig("give either --preset or --config", field="preset")
    if args.config:
        cfg = load_config(args.config)
    elif args.preset:
        cfg = preset_config(args.preset)
    else:
        raise InvalidConfig("one of --preset or --config is required", field="preset")
    if args.seed is not None:
        cfg.seed = args.seed
    return apply_overrides(cfg, args.param)


def cmd_simulate(args) -> int:
    try:
        cfg = _scenario(args)
    except InvalidConfig as exc:
        _error("InvalidConfig", str(exc), exc.field, args.out)
        return EXIT_CONFIG
    try:
        res = run(cfg)
    except NumericalBlowup as exc:
        _error("NumericalBlowup", str(exc), None, args.out)
        return EXIT_FAIL
    except HybridError as exc:
        _error(type(exc).__name__, str(exc), None, args.out)
        return EXIT_FAIL
    out = args.out or "."
    os.makedirs(out, exist_ok=True)
    arc_to_csv(res.arc, os.path.join(out, "trajectory.csv"), res.loop.layout.columns())
    summary = dict(res.summary, scenario=cfg.to_dict())
    _write_json(os.path.join(out, "summary.json"), summary)
    print(json.dumps(res.summary))
    if res.summary["termination"] == "NoProgress":
        _error("NoProgress", "solver made no progress in ordinary time (Zeno or stuck at a guard)", None, args.out)
        return EXIT_FAIL
    return EXIT_OK


# design ---------------------------------------------------------------------

_SAFE_FUNCS = {"sqrt": math.sqrt, "exp": math.exp, "log": math.log, "max": max, "min": min, "abs": abs}
_SAFE_NODES = (ast.Expression, ast.BinOp, ast.UnaryOp, ast.Call, ast.Name, ast.Load, ast.Constant,
               ast.Add, ast.Sub, ast.Mult, ast.Div, ast.Pow, ast.USub, ast.UAdd)


def envelope(expr: str, field: str):
    """Compile an arithmetic expression in ``s`` (e.g. ``"0.5*s**2"``)."""
    try:
        tree = ast.parse(expr, mode="eval")
    except SyntaxError as exc:
        raise InvalidConfig(f"cannot parse {expr!r}", field=field) from exc
    for node in ast.walk(tree):
        if not isinstance(node, _SAFE_NODES):
            raise InvalidConfig(f"unsupported syntax in {expr!r}", field=field)
        if isinstance(node, ast.Name) and node.id != "s" and node.id not in _SAFE_FUNCS:
            raise InvalidConfig(f"unknown name {node.id!r} in {expr!r}", field=field)
    code = compile(tree, field, "eval")
    return lambda s: float(eval(code, {"__builtins__": {}}, dict(_SAFE_FUNCS, s=s)))


_REQUIRED = ("eps0b", "eps1b", "Delta", "Delta1", "Delta2", "eps0", "eps1", "alpha02", "alpha12")


def design_inputs_from_dict(d) -> DesignInputs:
    if not isinstance(d, dict):
        raise InvalidConfig("'inputs' must be an object", field="inputs")
    for key in _REQUIRED:
        if key not in d:
            raise InvalidConfig(f"missing design input {key!r}", field=f"inputs.{key}")
    if "alpha01_inv" not in d and "alpha01" not in d:
        raise InvalidConfig("missing envelope alpha01 (or alpha01_inv)", field="inputs.alpha01_inv")
    if "alpha11_inv" not in d and "alpha11" not in d:
        raise InvalidConfig("missing envelope alpha11 (or alpha11_inv)", field="inputs.alpha11_inv")
    kw = {}
    for key, value in d.items():
        if key.startswith("alpha"):
            kw[key] = envelope(str(value), f"inputs.{key}")
        elif key == "provenance":
            kw[key] = str(value)
        else:
            if not isinstance(value, (int, float)):
                raise InvalidConfig(f"{key} must be a number", field=f"inputs.{key}")
            kw[key] = float(value)
    try:
        return DesignInputs(**kw)
    except TypeError as exc:
        raise InvalidConfig(str(exc), field="inputs") from exc
    except InvalidParams as exc:
        raise InvalidConfig(str(exc), field="inputs") from exc


def _design_doc(args) -> dict:
    if args.config:
        try:
            with open(args.config) as fh:
                doc = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise InvalidConfig(f"cannot read design config: {exc}", field="<file>") from exc
        if not isinstance(doc, dict):
            raise InvalidConfig("design config must be a JSON object", field="<root>")
    elif args.preset in (None, "ex1"):
        doc = {"example": "ex1"}
    else:
        raise InvalidConfig(f"no design preset {args.preset!r} (only 'ex1')", field="preset")
    for item in args.param or ():
        key, _, raw = item.partition("=")
        try:
            doc[key.strip()] = json.loads(raw)
        except json.JSONDecodeError as exc:
            raise InvalidConfig(f"bad value in {item!r}", field=key.strip()) from exc
    return doc


def cmd_design(args) -> int:
    from .examples import ex1

    try:
        doc = _design_doc(args)
        eps0a = float(doc.get("eps0a", 4.0 / 27.0))
        eps1a = float(doc.get("eps1a", 5e-5))
        tau_star = float(doc.get("tau_star", 15.0))
        if doc.get("example") == "ex1":
            alpha_bar = float(doc.get("alpha_bar", 0.25))
            ex1.Example1Config(alpha_bar=alpha_bar)
            inputs = ex1.ex1_design_inputs(eps0a=eps0a)
        elif "inputs" in doc:
            inputs = design_inputs_from_dict(doc["inputs"])
        else:
            raise InvalidConfig("design config needs 'example': 'ex1' or an 'inputs' object", field="inputs")
    except InvalidConfig as exc:
        _error("InvalidConfig", str(exc), exc.field, args.out)
        return EXIT_CONFIG
    except (TypeError, ValueError) as exc:
        _error("InvalidConfig", str(exc), None, args.out)
        return EXIT_CONFIG
    step1 = step2 = None
    if doc.get("example") == "ex1" and doc.get("simulate_steps", False):
        loop0 = ex1.ex1_local_loop(alpha_bar)
        dist = lambda x: float(math.hypot(x[0], x[1]))  # noqa: E731
        step1 = design_step1_check(inputs.eps0b, ex1.V0, loop0, dist, [0.0, 0.0], seed=args.seed or 0)
        try:
            step2 = design_step2_check(eps0a, inputs.eps0b, inputs.eps1b, ex1.V0, ex1.make_V1(alpha_bar),
                                       ex1.gamma0, lambda x: x[0], 1.0, loop0, [0.0, alpha_bar],
                                       seed=args.seed or 0)
        except InvalidParams as exc:
            _error("InvalidConfig", str(exc), "eps0a", args.out)
            return EXIT_CONFIG
    try:
        report = run_design(inputs, eps0a, eps1a, tau_star, step1, step2)
    except InvalidParams as exc:
        _error("InvalidConfig", str(exc), None, args.out)
        return EXIT_CONFIG
    out = args.out or "."
    os.makedirs(out, exist_ok=True)
    _write_json(os.path.join(out, "design_report.json"), _finite(report.to_json()))
    print(json.dumps(_finite(report.to_json())))
    return EXIT_OK if report.passed else EXIT_FAIL


def _finite(doc):
    if isinstance(doc, dict):
        return {k: _finite(v) for k, v in doc.items()}
    if isinstance(doc, (list, tuple)):
        return [_finite(v) for v in doc]
    if isinstance(doc, float) and not math.isfinite(doc):
        return None
    return doc


# verify ---------------------------------------------------------------------

def cmd_verify(args) -> int:
    from .verify import SUITES, run_suite

    suite = args.suite or "all"
    if suite != "all" and suite not in SUITES:
        _error("InvalidConfig", f"unknown suite {suite!r}; choose from {['all', *SUITES]}", "suite", args.out)
        return EXIT_CONFIG
    if args.preset is not None and args.preset not in PRESETS:
        _error("InvalidConfig", f"unknown preset {args.preset!r}", "preset", args.out)
        return EXIT_CONFIG
    results = run_suite(suite, args.preset)
    for r in results:
        print(r.row())
    ok = all(r.passed for r in results)
    print(f"{sum(r.passed for r in results)}/{len(results)} checks passed")
    return EXIT_OK if ok else EXIT_FAIL


# sweep ----------------------------------------------------------------------

def grid_points(grid: dict):
    """Cartesian product of the grid, in key order then value order.

    A grid with no keys, or with any empty value list, has no points.
    """
    keys = list(grid)
    if not keys or any(len(grid[k]) == 0 for k in keys):
        return keys, []
    return keys, [dict(zip(keys, combo)) for combo in itertools.product(*(grid[k] for k in keys))]


def _override_strings(point: dict) -> list:
    return [f"{k}={json.dumps(v)}" for k, v in point.items()]


def sweep_row(base: dict, point: dict) -> dict:
    """Run one grid point; failures are recorded in the row instead of raised."""
    try:
        cfg = apply_overrides(config_from_dict(dict(base)), _override_strings(point))
        res = run(cfg)
        s = res.summary
        return {"termination": s["termination"], "final_distance_A0": s["final_distance_A0"],
                "switches": len(s["switch_times"]), "min_dwell": s["min_dwell"], "error": ""}
    except HybridError as exc:
        return {"termination": "", "final_distance_A0": None, "switches": None, "min_dwell": None,
                "error": f"{type(exc).__name__}: {exc}"}


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return fmt(v)
    if isinstance(v, (list, tuple)):
        return json.dumps([float(x) for x in v])
    return str(v)


def sweep_csv(keys, points, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["index", *keys, "termination", "final_distance_A0", "switches", "min_dwell", "error"])
    for i, (p, r) in enumerate(zip(points, rows)):
        w.writerow([i, *(_cell(p[k]) for k in keys), r["termination"], _cell(r["final_distance_A0"]),
                    _cell(r["switches"]), _cell(r["min_dwell"]), r["error"]])
    return buf.getvalue()


def _sweep_spec(args):
    if args.config:
        try:
            with open(args.config) as fh:
                doc = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise InvalidConfig(f"cannot read sweep config: {exc}", field="<file>") from exc
        if not isinstance(doc, dict) or "base" not in doc:
            raise InvalidConfig("sweep config needs a 'base' scenario and a 'grid'", field="base")
        base, grid = doc["base"], doc.get("grid", {})
    elif args.preset:
        base, grid = {"preset": args.preset}, {}
    else:
        raise InvalidConfig("one of --preset or --config is required", field="preset")
    base = dict(base)
    if args.seed is not None:
        base["seed"] = args.seed
    for item in args.grid or ():
        key, _, raw = item.partition("=")
        try:
            values = json.loads(raw)
        except json.JSONDecodeError as exc:
            raise InvalidConfig(f"grid values for {key!r} must be a JSON list", field=key) from exc
        if not isinstance(values, list):
            raise InvalidConfig(f"grid values for {key!r} must be a JSON list", field=key)
        grid[key.strip()] = values
    if not isinstance(grid, dict) or not all(isinstance(v, list) for v in grid.values()):
        raise InvalidConfig("grid must map keys to lists", field="grid")
    # fail early on a broken base or unknown grid keys
    cfg = apply_overrides(config_from_dict(dict(base)), args.param)
    return cfg.to_dict(), grid


def cmd_sweep(args) -> int:
    try:
        base, grid = _sweep_spec(args)
        keys, points = grid_points(grid)
        for k in keys:
            if grid[k]:
                apply_overrides(config_from_dict(dict(base)), _override_strings({k: grid[k][0]}))
    except InvalidConfig as exc:
        _error("InvalidConfig", str(exc), exc.field, args.out)
        return EXIT_CONFIG
    jobs = max(1, args.jobs or 1)
    if jobs == 1 or len(points) <= 1:
        rows = [sweep_row(base, p) for p in points]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(sweep_row, itertools.repeat(base), points))
    text = sweep_csv(keys, points, rows)
    out = args.out or "."
    os.makedirs(out, exist_ok=True)
    with open(os.path.join(out, "sweep.csv"), "w", newline="") as fh:
        fh.write(text)
    sys.stdout.write(text)
    return EXIT_OK


# entry point ----------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hybrid-uniting", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--preset", help=f"scenario preset: {', '.join(PRESETS)}")
        p.add_argument("--config", help="path to a JSON config")
        p.add_argument("--param", action="append", default=[], metavar="KEY=VALUE",
                       help="override a parameter (repeatable)")
        p.add_argument("--out", help="output directory (default: current directory)")
        p.add_argument("--seed", type=int, help="seed for noise and sampling")
        p.add_argument("--jobs", type=int, default=1, help="worker processes (sweep)")

    p = sub.add_parser("simulate", help="simulate a scenario, write trajectory.csv and summary.json")
    common(p)
    p.set_defaults(func=cmd_simulate)
    p = sub.add_parser("design", help="check the supervisor design conditions, write design_report.json")
    common(p)
    p.set_defaults(func=cmd_design)
    p = sub.add_parser("verify", help="run property suites")
    common(p)
    p.add_argument("--suite", default="all", help="suite name or 'all'")
    p.set_defaults(func=cmd_verify)
    p = sub.add_parser("sweep", help="run a grid of scenarios, write sweep.csv")
    common(p)
    p.add_argument("--grid", action="append", default=[], metavar="KEY=JSONLIST",
                   help="grid axis, e.g. disturbance.delta=[0,0.01] (repeatable)")
    p.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())

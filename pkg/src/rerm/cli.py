"""Command-line interface.

    rerm solve --problem P.json --data D.csv [--out OUT.json]
               [--dump-program PATH] [--eps 1e-8]
    rerm experiment --config C.json --out results/

Exit codes for solve: 0 optimal, 2 infeasible (including statically
empty uncertainty sets), 3 numerical failure, 1 bad input.
"""

import argparse
import json
import sys

import jsonschema
import numpy as np

from .builder import RermError, RermProblem, build, solve_rerm
from .data import CsvError, load_csv
from .experiment import ExperimentConfig, run_experiment
from .losses import LossKind, LossSpec
from .program import SolveStatus
from .sets import FixCoords, SetExpr, set_from_json
from .solver import SolverSettings

_SET_SCHEMA = {
    "type": "object",
    "required": ["dim", "constraints"],
    "properties": {
        "dim": {"type": "integer", "minimum": 1},
        "constraints": {"type": "array", "items": {"type": "object"}},
    },
}

_PROBLEM_SCHEMA = {
    "type": "object",
    "required": ["target", "loss", "sets"],
    "properties": {
        "target": {"type": "string"},
        "features": {"type": "array", "items": {"type": "string"}},
        "loss": {
            "type": "object",
            "required": ["loss"],
            "properties": {
                "loss": {
                    "enum": ["pnorm", "huber", "hinge", "logistic", "exponential"]
                },
                "p": {"enum": [1, 2]},
                "delta": {"type": "number", "exclusiveMinimum": 0},
            },
        },
        "theta": _SET_SCHEMA,
        "sets": {
            "type": "object",
            "required": ["mode"],
            "properties": {
                "mode": {"enum": ["singleton", "per_row", "template"]},
                "rows": {"type": "array", "items": _SET_SCHEMA},
                "set": _SET_SCHEMA,
            },
        },
    },
}


class InputError(ValueError):
    pass


def _parse_loss(doc):
    kind = LossKind(doc["loss"])
    return LossSpec(kind, p=doc.get("p", 2), delta=doc.get("delta", 1.0))


def _substitute(node, row, colmap):
    """Replaces "@feature:J" / "@col:NAME" placeholders with row values."""
    if isinstance(node, str) and node.startswith("@"):
        if node.startswith("@feature:"):
            return float(row[int(node[len("@feature:") :])])
        if node.startswith("@col:"):
            name = node[len("@col:") :]
            if name not in colmap:
                raise InputError(f"placeholder {node!r}: unknown column {name!r}")
            return float(row[colmap[name]])
        raise InputError(f"unknown placeholder {node!r}")
    if isinstance(node, list):
        return [_substitute(v, row, colmap) for v in node]
    if isinstance(node, dict):
        return {k: _substitute(v, row, colmap) for k, v in node.items()}
    return node


def _build_sets(spec, X, mask, colmap):
    mode = spec["mode"]
    n, d = X.shape
    sets = []
    if mode == "singleton":
        if mask.any():
            i, j = np.argwhere(mask)[0]
            raise InputError(
                f"singleton sets need complete data; missing cell at row {i}, "
                f"feature {j}"
            )
        for i in range(n):
            sets.append(SetExpr(d, (FixCoords(X[i]),)))
        return tuple(sets)
    if mode == "per_row":
        rows = spec.get("rows", [])
        if len(rows) != n:
            raise InputError(f"'rows' has {len(rows)} sets, data has {n} rows")
        for i, doc in enumerate(rows):
            try:
                sets.append(set_from_json(doc))
            except ValueError as e:
                raise InputError(f"datapoint {i}: invalid uncertainty set: {e}") from e
        return tuple(sets)
    template = spec.get("set")
    if template is None:
        raise InputError("template mode needs a 'set' entry")
    for i in range(n):
        doc = _substitute(template, X[i], colmap)
        try:
            sets.append(set_from_json(doc))
        except ValueError as e:
            raise InputError(f"datapoint {i}: invalid uncertainty set: {e}") from e
    return tuple(sets)


def _cmd_solve(args):
    with open(args.problem) as fh:
        doc = json.load(fh)
    try:
        jsonschema.validate(doc, _PROBLEM_SCHEMA)
    except jsonschema.ValidationError as e:
        print(f"problem file invalid at {e.json_path}: {e.message}", file=sys.stderr)
        return 1
    try:
        X, y, mask, features = load_csv(
            args.data, doc["target"], doc.get("features")
        )
        colmap = {name: j for j, name in enumerate(features)}
        sets = _build_sets(doc["sets"], X, mask, colmap)
        theta_set = set_from_json(doc["theta"]) if "theta" in doc else None
        problem = RermProblem(X, y, sets, _parse_loss(doc["loss"]), theta_set)
    except (CsvError, InputError, ValueError) as e:
        # statically-empty sets (e.g. contradictory boxes) land here
        print(f"error: {e}", file=sys.stderr)
        return 2 if isinstance(e, InputError) and "uncertainty set" in str(e) else 1

    if args.dump_program:
        prog = build(problem)
        with open(args.dump_program, "w") as fh:
            fh.write(prog.to_json())
            fh.write("\n")

    settings = SolverSettings(eps_abs=args.eps, eps_rel=args.eps)
    try:
        sol = solve_rerm(problem, settings, analytical=False)
    except RermError as e:
        print(f"error: {e}", file=sys.stderr)
        if e.status in (SolveStatus.PRIMAL_INFEASIBLE, SolveStatus.DUAL_INFEASIBLE):
            return 2
        return 3

    res = sol.diagnostics.residuals
    out = {
        "status": sol.diagnostics.status.value,
        "objective": sol.objective,
        "theta": sol.theta.tolist(),
        "z": sol.z.tolist(),
        "per_point_worst_case_losses": sol.per_point_losses.tolist(),
        "solver": {
            "iterations": sol.diagnostics.iterations,
            "residuals": {
                "primal": res.primal,
                "dual": res.dual,
                "gap": res.gap,
            },
        },
    }
    text = json.dumps(out, indent=2, sort_keys=True) + "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def _cmd_experiment(args):
    with open(args.config) as fh:
        doc = json.load(fh)
    try:
        cfg = ExperimentConfig(
            **{
                k: tuple(v) if isinstance(v, list) else v
                for k, v in doc.items()
            }
        )
    except (TypeError, ValueError) as e:
        print(f"config invalid: {e}", file=sys.stderr)
        return 1
    rows, summary = run_experiment(cfg, out_dir=args.out)
    print(json.dumps(summary, indent=2, sort_keys=True))
    return 0


def main(argv=None):
    parser = argparse.ArgumentParser(prog="rerm")
    sub = parser.add_subparsers(dest="command", required=True)

    p_solve = sub.add_parser("solve", help="solve a robust ERM problem")
    p_solve.add_argument("--problem", required=True, help="problem JSON file")
    p_solve.add_argument("--data", required=True, help="CSV data file")
    p_solve.add_argument("--out", help="write the solution JSON here")
    p_solve.add_argument(
        "--dump-program", help="dump the assembled conic program as JSON"
    )
    p_solve.add_argument("--eps", type=float, default=1e-8)
    p_solve.set_defaults(func=_cmd_solve)

    p_exp = sub.add_parser("experiment", help="run the synthetic geodata experiment")
    p_exp.add_argument("--config", required=True, help="experiment config JSON")
    p_exp.add_argument("--out", required=True, help="output directory")
    p_exp.set_defaults(func=_cmd_experiment)

    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())

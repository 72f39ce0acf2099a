"""Command-line front end.

Subcommands: solve, solve-box, pmf, cumulants, verify, reduce.  Jobs come
either from flags or from ``--job file.json``; both routes feed the same
schema-validated payload, and every report echoes a job object that can be
re-fed verbatim.  Reports go to stdout as JSON (reals carry 17 significant
digits so they round-trip bit-faithfully) or as text with ``--output text``;
progress notes go to stderr.  Exit codes: 0 ok, 1 input error, 2 infeasible.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

import numpy as np
import jsonschema

from . import moments, solver
from .distributions import as_param_vector, bc_pmf
from .errors import DomainError, Infeasible, PbExtremalError
from .moments import CumulantSpec, Payoff
from .oracle import OracleConfig, oracle_optimize
from .solver import BoxRequest, SolveRequest, solve_box, solve_extremal

COMMANDS = ("solve", "solve-box", "pmf", "cumulants", "verify", "reduce")

_NUM = {"type": "number"}
_POS_NUM = {"type": "number", "exclusiveMinimum": 0}
_NUM_LIST = {"type": "array", "items": _NUM}
_PAYOFF = {"anyOf": [{"type": "string"}, _NUM_LIST]}
_TOLS = {
    "residual_tol": _POS_NUM,
    "dedup_tol": _POS_NUM,
    "boundary_tol": _POS_NUM,
    "max_r": {"type": "integer", "minimum": 0},
}

PAYLOAD_SCHEMAS = {
    "solve": {
        "type": "object",
        "additionalProperties": False,
        "required": ["n", "g", "r", "c"],
        "properties": {
            "n": {"type": "integer", "minimum": 1},
            "g": _PAYOFF,
            "r": {"type": "integer", "minimum": 0},
            "c": _NUM_LIST,
            "basis": {"enum": ["cumulant", "moment"]},
            "direction": {"enum": ["max", "min"]},
            **_TOLS,
        },
    },
    "solve-box": {
        "type": "object",
        "additionalProperties": False,
        "required": ["n", "a", "b", "g", "c"],
        "properties": {
            "n": {"type": "integer", "minimum": 1},
            "a": _NUM,
            "b": _NUM,
            "g": _PAYOFF,
            "c": _NUM_LIST,
            "direction": {"enum": ["max", "min"]},
            **_TOLS,
        },
    },
    "pmf": {
        "type": "object",
        "additionalProperties": False,
        "required": ["p"],
        "properties": {"p": _NUM_LIST},
    },
    "cumulants": {
        "type": "object",
        "additionalProperties": False,
        "required": ["p", "r"],
        "properties": {"p": _NUM_LIST, "r": {"type": "integer", "minimum": 1}},
    },
    "verify": {
        "type": "object",
        "additionalProperties": False,
        "required": ["n", "g", "r", "c"],
        "properties": {
            "n": {"type": "integer", "minimum": 1},
            "g": _PAYOFF,
            "r": {"type": "integer", "minimum": 0},
            "c": _NUM_LIST,
            "basis": {"enum": ["cumulant", "moment"]},
            "direction": {"enum": ["max", "min"]},
            "seed": {"type": "integer"},
            "n_starts": {"type": "integer", "minimum": 1},
            "agree_tol": _POS_NUM,
            **_TOLS,
        },
    },
    "reduce": {
        "type": "object",
        "additionalProperties": False,
        "required": ["n", "a", "b", "c"],
        "properties": {
            "n": {"type": "integer", "minimum": 1},
            "a": _NUM,
            "b": _NUM,
            "c": _NUM_LIST,
            "g": _PAYOFF,
        },
    },
}

JOB_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["command", "payload"],
    "properties": {
        "command": {"enum": list(COMMANDS)},
        "payload": {"type": "object"},
        "output": {"enum": ["json", "text"]},
    },
}


class UsageError(PbExtremalError):
    """Malformed command-line input or job file."""


def parse_payoff(spec, n: int) -> Payoff:
    """Payoff table over {0,..,n} from a list, comma string, @file, or builtin.

    Builtins: ``tail:m`` (indicator of x >= m), ``point:m`` (indicator of
    x == m), ``identity`` (g(x) = x).
    """
    if isinstance(spec, (list, tuple, np.ndarray)):
        values = [float(v) for v in spec]
    else:
        text = str(spec).strip()
        if text.startswith("@"):
            try:
                text = Path(text[1:]).read_text().strip()
            except OSError as exc:
                raise UsageError(f"cannot read payoff file: {exc}") from exc
        if text == "identity":
            values = [float(x) for x in range(n + 1)]
        elif text.startswith("tail:"):
            m = _parse_int(text[5:], "tail threshold")
            values = [1.0 if x >= m else 0.0 for x in range(n + 1)]
        elif text.startswith("point:"):
            m = _parse_int(text[6:], "point location")
            values = [1.0 if x == m else 0.0 for x in range(n + 1)]
        else:
            try:
                values = [float(v) for v in text.split(",") if v.strip() != ""]
            except ValueError as exc:
                raise UsageError(f"payoff values must be numeric: {exc}") from exc
    if len(values) != n + 1:
        raise UsageError(f"payoff needs {n + 1} values for n = {n}, got {len(values)}")
    return Payoff(values)


def _parse_int(text, what):
    try:
        return int(text)
    except ValueError as exc:
        raise UsageError(f"{what} must be an integer, got {text!r}") from exc


def _parse_floats(text):
    if text is None or str(text).strip() == "":
        return []
    try:
        return [float(v) for v in str(text).split(",") if v.strip() != ""]
    except ValueError as exc:
        raise UsageError(f"expected comma-separated numbers: {exc}") from exc


# ---------------------------------------------------------------------------
# JSON rendering with fixed-width reals


def render_json(obj) -> str:
    """Serialise a report; floats carry 17 significant digits."""
    out = []
    _render(obj, out)
    return "".join(out)


def _render(obj, out):
    if obj is None:
        out.append("null")
    elif isinstance(obj, bool):
        out.append("true" if obj else "false")
    elif isinstance(obj, (int, np.integer)):
        out.append(str(int(obj)))
    elif isinstance(obj, (float, np.floating)):
        v = float(obj)
        if not np.isfinite(v):
            raise ValueError(f"non-finite value in report: {v}")
        out.append(format(v, ".17g"))
    elif isinstance(obj, str):
        out.append(json.dumps(obj))
    elif isinstance(obj, dict):
        out.append("{")
        for i, (k, v) in enumerate(obj.items()):
            if i:
                out.append(", ")
            out.append(json.dumps(str(k)))
            out.append(": ")
            _render(v, out)
        out.append("}")
    elif isinstance(obj, (list, tuple, np.ndarray)):
        out.append("[")
        seq = obj.tolist() if isinstance(obj, np.ndarray) else obj
        for i, v in enumerate(seq):
            if i:
                out.append(", ")
            _render(v, out)
        out.append("]")
    else:
        raise TypeError(f"cannot serialise {type(obj)!r}")


def _render_text(obj, indent=0, out=None):
    lines = out if out is not None else []
    pad = "  " * indent
    if isinstance(obj, dict):
        for k, v in obj.items():
            if isinstance(v, (dict, list, tuple)) and v:
                lines.append(f"{pad}{k}:")
                _render_text(v, indent + 1, lines)
            else:
                lines.append(f"{pad}{k}: {_scalar_text(v)}")
    elif isinstance(obj, (list, tuple)):
        for v in obj:
            if isinstance(v, (dict, list, tuple)):
                lines.append(f"{pad}-")
                _render_text(v, indent + 1, lines)
            else:
                lines.append(f"{pad}- {_scalar_text(v)}")
    else:
        lines.append(f"{pad}{_scalar_text(obj)}")
    return lines


def _scalar_text(v):
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".12g")
    if isinstance(v, (list, tuple)) and not v:
        return "[]"
    if isinstance(v, dict) and not v:
        return "{}"
    return str(v)


# ---------------------------------------------------------------------------
# dispatch


def _candidate_dict(cand):
    return {
        "n0": cand.n0,
        "zeros": cand.zeros,
        "blocks": [{"n": m, "q": q} for m, q in cand.blocks],
    }


def _box_candidate_dict(cand):
    return {
        "at_a": cand.at_a,
        "at_b": cand.at_b,
        "blocks": [{"n": m, "x": x} for m, x in cand.blocks],
    }


def _normalized_payload(command, payload, g_values=None):
    """Payload with defaults made explicit so the echo re-runs identically."""
    norm = dict(payload)
    if g_values is not None:
        norm["g"] = [float(v) for v in g_values]
    defaults = {
        "solve": {"basis": "cumulant", "direction": "max"},
        "solve-box": {"direction": "max"},
        "verify": {"basis": "cumulant", "direction": "max", "seed": 0,
                   "n_starts": 2000, "agree_tol": 1e-5},
    }.get(command, {})
    for key, val in defaults.items():
        norm.setdefault(key, val)
    if command in ("solve", "solve-box", "verify"):
        norm.setdefault("residual_tol", 1e-10)
        norm.setdefault("dedup_tol", 1e-8)
        norm.setdefault("boundary_tol", 1e-12)
        norm.setdefault("max_r", moments.DEFAULT_MAX_ORDER)
    return norm


def _cmd_solve(payload):
    n = payload["n"]
    g = parse_payoff(payload["g"], n)
    c = [float(v) for v in payload["c"]]
    if len(c) != payload["r"]:
        raise UsageError(f"r = {payload['r']} but {len(c)} constraint values given")
    req = SolveRequest(
        n=n,
        g=g,
        spec=CumulantSpec(r=payload["r"], c=tuple(c), basis=payload.get("basis", "cumulant")),
        direction=payload.get("direction", "max"),
        residual_tol=payload.get("residual_tol", 1e-10),
        dedup_tol=payload.get("dedup_tol", 1e-8),
        boundary_tol=payload.get("boundary_tol", 1e-12),
        max_r=payload.get("max_r", moments.DEFAULT_MAX_ORDER),
    )
    t0 = time.perf_counter()
    result = solve_extremal(req)
    elapsed_ms = (time.perf_counter() - t0) * 1e3
    report = {
        "command": "solve",
        "status": "ok",
        "job": {
            "command": "solve",
            "payload": _normalized_payload("solve", payload, g.table),
            "output": "json",
        },
        "value": result.value,
        "candidate": _candidate_dict(result.candidate),
        "residuals": list(result.residuals),
        "all_optima": [_candidate_dict(c) for c in result.all_optima],
        "diagnostics": {
            "structures_examined": result.structures_examined,
            "roots_found": result.roots_found,
            "wall_time_ms": elapsed_ms,
        },
    }
    return report, 0


def _cmd_solve_box(payload):
    n = payload["n"]
    g = parse_payoff(payload["g"], n)
    req = BoxRequest(
        n=n,
        a=float(payload["a"]),
        b=float(payload["b"]),
        g=g,
        s_targets=tuple(float(v) for v in payload["c"]),
        direction=payload.get("direction", "max"),
        residual_tol=payload.get("residual_tol", 1e-10),
        dedup_tol=payload.get("dedup_tol", 1e-8),
        boundary_tol=payload.get("boundary_tol", 1e-12),
        max_r=payload.get("max_r", moments.DEFAULT_MAX_ORDER),
    )
    t0 = time.perf_counter()
    result = solve_box(req)
    elapsed_ms = (time.perf_counter() - t0) * 1e3
    unit = result.unit_result
    report = {
        "command": "solve-box",
        "status": "ok",
        "job": {
            "command": "solve-box",
            "payload": _normalized_payload("solve-box", payload, g.table),
            "output": "json",
        },
        "value": result.value,
        "candidate": _box_candidate_dict(result.candidate),
        "residuals": list(result.residuals),
        "unit_candidate": _candidate_dict(unit.candidate) if unit else None,
        "diagnostics": {
            "structures_examined": unit.structures_examined if unit else 0,
            "roots_found": unit.roots_found if unit else 0,
            "wall_time_ms": elapsed_ms,
        },
    }
    return report, 0


def _cmd_pmf(payload):
    p = as_param_vector([float(v) for v in payload["p"]])
    pmf = bc_pmf(p)
    report = {
        "command": "pmf",
        "status": "ok",
        "job": {"command": "pmf", "payload": {"p": [float(v) for v in p]}, "output": "json"},
        "pmf": list(pmf.weights),
        "n": pmf.n,
        "mean": pmf.mean(),
        "variance": pmf.variance(),
    }
    return report, 0


def _cmd_cumulants(payload):
    p = as_param_vector([float(v) for v in payload["p"]])
    r = payload["r"]
    s = moments.power_sums(p, r)
    kappa = moments.power_sums_to_cumulants(s)
    mu = moments.moments_from_cumulants(kappa)
    report = {
        "command": "cumulants",
        "status": "ok",
        "job": {"command": "cumulants",
                "payload": {"p": [float(v) for v in p], "r": r},
                "output": "json"},
        "cumulants": list(kappa),
        "moments": list(mu),
        "power_sums": list(s),
    }
    return report, 0


def _cmd_verify(payload):
    n = payload["n"]
    g = parse_payoff(payload["g"], n)
    c = [float(v) for v in payload["c"]]
    if len(c) != payload["r"]:
        raise UsageError(f"r = {payload['r']} but {len(c)} constraint values given")
    direction = payload.get("direction", "max")
    spec = CumulantSpec(r=payload["r"], c=tuple(c), basis=payload.get("basis", "cumulant"))
    req = SolveRequest(
        n=n, g=g, spec=spec, direction=direction,
        residual_tol=payload.get("residual_tol", 1e-10),
        dedup_tol=payload.get("dedup_tol", 1e-8),
        boundary_tol=payload.get("boundary_tol", 1e-12),
        max_r=payload.get("max_r", moments.DEFAULT_MAX_ORDER),
    )
    cfg = OracleConfig(
        n_starts=payload.get("n_starts", 2000),
        seed=payload.get("seed", 0),
    )
    agree_tol = payload.get("agree_tol", 1e-5)
    t0 = time.perf_counter()
    result = solve_extremal(req)
    oracle_res = oracle_optimize(n, g, spec.power_sum_targets(), direction, cfg)
    elapsed_ms = (time.perf_counter() - t0) * 1e3
    gap = result.value - oracle_res.value
    report = {
        "command": "verify",
        "status": "ok",
        "job": {
            "command": "verify",
            "payload": _normalized_payload("verify", payload, g.table),
            "output": "json",
        },
        "solver_value": result.value,
        "oracle_value": oracle_res.value,
        "gap": gap,
        "agree": bool(abs(gap) <= agree_tol),
        "candidate": _candidate_dict(result.candidate),
        "oracle_interior_profile": [
            {"value": v, "count": c} for v, c in oracle_res.interior_profile
        ],
        "diagnostics": {
            "structures_examined": result.structures_examined,
            "roots_found": result.roots_found,
            "n_starts": cfg.n_starts,
            "seed": cfg.seed,
            "wall_time_ms": elapsed_ms,
        },
    }
    return report, 0


def _cmd_reduce(payload):
    n = payload["n"]
    a = float(payload["a"])
    b = float(payload["b"])
    if a >= b:
        raise UsageError("reduce needs a < b (a degenerate box has no reduction)")
    c = [float(v) for v in payload["c"]]
    s_unit = solver._unit_power_sum_targets(a, b, np.asarray(c), n)
    kappa = moments.power_sums_to_cumulants(s_unit)
    g_echo = None
    if payload.get("g") is not None:
        g_echo = [float(v) for v in parse_payoff(payload["g"], n).table]
    report = {
        "command": "reduce",
        "status": "ok",
        "job": {"command": "reduce",
                "payload": {**payload, **({"g": g_echo} if g_echo is not None else {})},
                "output": "json"},
        "unit_power_sums": list(s_unit),
        "unit_cumulants": list(kappa),
        "g": g_echo,
        "note": "payoff table is unchanged by the coordinate map x = a + (b-a) p",
    }
    return report, 0


_DISPATCH = {
    "solve": _cmd_solve,
    "solve-box": _cmd_solve_box,
    "pmf": _cmd_pmf,
    "cumulants": _cmd_cumulants,
    "verify": _cmd_verify,
    "reduce": _cmd_reduce,
}


# ---------------------------------------------------------------------------
# argument parsing


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="pbextremal",
        description="Extreme expectations of Bernoulli convolutions with "
                    "prescribed cumulants or moments.",
    )
    sub = parser.add_subparsers(dest="command")

    def add_common(p, with_tols=True):
        p.add_argument("--job", help="JSON job file; excludes other payload flags")
        p.add_argument("--output", choices=["json", "text"], default="json")
        if with_tols:
            p.add_argument("--residual-tol", type=float, dest="residual_tol")
            p.add_argument("--dedup-tol", type=float, dest="dedup_tol")
            p.add_argument("--boundary-tol", type=float, dest="boundary_tol")
            p.add_argument("--max-r", type=int, dest="max_r")

    p = sub.add_parser("solve", help="extremal expectation under cumulant/moment constraints")
    p.add_argument("--n", type=int)
    p.add_argument("--g", help="payoff: comma list, @file, tail:m, point:m, identity")
    p.add_argument("--r", type=int)
    p.add_argument("--c", help="comma-separated constraint values (empty for r = 0)")
    p.add_argument("--basis", choices=["cumulant", "moment"])
    p.add_argument("--dir", choices=["max", "min"], dest="direction")
    add_common(p)

    p = sub.add_parser("solve-box", help="extremal symmetric multiaffine value on a box")
    p.add_argument("--n", type=int)
    p.add_argument("--a", type=float)
    p.add_argument("--b", type=float)
    p.add_argument("--g", help="vertex payoff table: g[m] = f at (m coords at b, rest at a)")
    p.add_argument("--c", help="comma-separated power-sum targets of the coordinates")
    p.add_argument("--dir", choices=["max", "min"], dest="direction")
    add_common(p)

    p = sub.add_parser("pmf", help="pmf of a Bernoulli convolution")
    p.add_argument("--p", help="comma-separated success probabilities")
    add_common(p, with_tols=False)

    p = sub.add_parser("cumulants", help="cumulants of a Bernoulli convolution")
    p.add_argument("--p", help="comma-separated success probabilities")
    p.add_argument("--r", type=int)
    add_common(p, with_tols=False)

    p = sub.add_parser("verify", help="compare the solver against the brute-force oracle")
    p.add_argument("--n", type=int)
    p.add_argument("--g")
    p.add_argument("--r", type=int)
    p.add_argument("--c")
    p.add_argument("--basis", choices=["cumulant", "moment"])
    p.add_argument("--dir", choices=["max", "min"], dest="direction")
    p.add_argument("--seed", type=int)
    p.add_argument("--n-starts", type=int, dest="n_starts")
    p.add_argument("--agree-tol", type=float, dest="agree_tol")
    add_common(p)

    p = sub.add_parser("reduce", help="map box power-sum targets to the unit box")
    p.add_argument("--n", type=int)
    p.add_argument("--a", type=float)
    p.add_argument("--b", type=float)
    p.add_argument("--c", help="comma-separated power-sum targets on [a,b]")
    p.add_argument("--g", help="optional payoff to echo")
    add_common(p, with_tols=False)

    return parser


def _payload_from_flags(command, args):
    def put(d, key, value):
        if value is not None:
            d[key] = value

    payload = {}
    if command in ("solve", "verify"):
        put(payload, "n", args.n)
        put(payload, "g", args.g)
        put(payload, "r", args.r)
        if args.c is not None or args.r == 0:
            payload["c"] = _parse_floats(args.c)
        put(payload, "basis", args.basis)
        put(payload, "direction", args.direction)
    elif command == "solve-box":
        put(payload, "n", args.n)
        put(payload, "a", args.a)
        put(payload, "b", args.b)
        put(payload, "g", args.g)
        if args.c is not None:
            payload["c"] = _parse_floats(args.c)
        put(payload, "direction", args.direction)
    elif command == "pmf":
        if args.p is not None:
            payload["p"] = _parse_floats(args.p)
    elif command == "cumulants":
        if args.p is not None:
            payload["p"] = _parse_floats(args.p)
        put(payload, "r", args.r)
    elif command == "reduce":
        put(payload, "n", args.n)
        put(payload, "a", args.a)
        put(payload, "b", args.b)
        if args.c is not None:
            payload["c"] = _parse_floats(args.c)
        put(payload, "g", args.g)
    if command == "verify":
        put(payload, "seed", args.seed)
        put(payload, "n_starts", args.n_starts)
        put(payload, "agree_tol", args.agree_tol)
    if command in ("solve", "solve-box", "verify"):
        for key in ("residual_tol", "dedup_tol", "boundary_tol", "max_r"):
            put(payload, key, getattr(args, key))
    return payload


def _load_job(path):
    try:
        raw = Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read job file: {exc}") from exc
    try:
        job = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise UsageError(f"job file is not valid JSON: {exc}") from exc
    _validate(job, JOB_SCHEMA, "job")
    return job


def _validate(obj, schema, what):
    try:
        jsonschema.validate(obj, schema)
    except jsonschema.ValidationError as exc:
        raise UsageError(f"invalid {what}: {exc.message}") from exc


def run(argv=None) -> int:
    """Parse argv, execute, print the report; returns the exit code."""
    parser = _build_parser()
    args = parser.parse_args(argv)
    if args.command is None:
        parser.print_usage(sys.stderr)
        return 1
    output = args.output
    try:
        if args.job is not None:
            job = _load_job(args.job)
            if job["command"] != args.command:
                raise UsageError(
                    f"job file is for {job['command']!r}, invoked as {args.command!r}"
                )
            payload = job["payload"]
            output = job.get("output", args.output)
        else:
            payload = _payload_from_flags(args.command, args)
        _validate(payload, PAYLOAD_SCHEMAS[args.command], f"{args.command} payload")
        report, code = _DISPATCH[args.command](payload)
    except (UsageError, DomainError, jsonschema.ValidationError) as exc:
        _emit({"status": "error",
               "error": {"type": "input", "message": str(exc)}}, output)
        return 1
    except Infeasible as exc:
        _emit({
            "status": "infeasible",
            "error": {
                "type": "infeasible",
                "reason": exc.reason,
                "provably_empty": exc.provably_empty,
                "diagnostics": exc.diagnostics,
            },
        }, output)
        return 2
    _emit(report, output)
    if "diagnostics" in report:
        d = report["diagnostics"]
        bits = [f"{k}={_scalar_text(v)}" for k, v in d.items()]
        print(f"{args.command}: " + " ".join(bits), file=sys.stderr)
    return code


def _emit(report, output):
    if output == "text":
        print("\n".join(_render_text(report)))
    else:
        print(render_json(report))


def main(argv=None):
    sys.exit(run(argv))


if __name__ == "__main__":
    main()

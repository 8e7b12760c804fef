"""Command-line interface.

    degrobin classify --N 3 --theta 0.5 --q 1.4
    degrobin oracle --config problem.json --out profile.tsv --format tsv
    degrobin solve  --config problem.json --mesh 4096 --trunc 1000
    degrobin sweep  --config sweep.json --out sweep.csv
    degrobin verify --config verify.json --seed 7

Problem documents are JSON objects; see README for the keys.  Every
output file starts with a header echoing the resolved configuration
(``#`` comment lines for csv/tsv, a ``config`` member for json).
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import tempfile
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, fields, replace
from importlib import resources

import numpy as np

from . import __version__
from .coefficients import CoefficientFamily, check_pointwise_inequality, gamma_condition_infimum
from .errors import DomainError, NonConvergenceError
from .estimates import estimate_harness_energy, estimate_harness_linfty, estimate_harness_w1s
from .fd_solver import PowerSource, ProblemSpec, TabulatedSource, picard_solve, radial_flux
from .radial_oracle import RadialExampleSpec, has_bounded_solution, solve_boundary_value, u_profile, v_profile
from .regimes import classify

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NONCONVERGENCE = 3
EXIT_NONEXISTENCE = 4
EXIT_IO = 5

COMMANDS = ("classify", "oracle", "solve", "sweep", "verify")
FORMATS = ("csv", "json", "tsv")

DICHOTOMY_MSG = (
    "no bounded radial solution: theta = 1 makes F(v) = 1 - exp(-v) bounded by 1, "
    "and the boundary load A R^(1-gamma) / (beta (N-gamma)) = {load:g} is not below it"
)


class ConfigError(DomainError):
    pass


def _schema() -> dict:
    return json.loads(resources.files("degrobin").joinpath("schema.json").read_text())


# ---------------------------------------------------------------- config


def _problem_spec(doc: dict) -> ProblemSpec:
    doc = dict(doc)
    src = doc.pop("source", None)
    if src is None:
        src = {"type": "power", "A": doc.pop("A", 1.0), "gamma": doc.pop("gamma", 0.0)}
    else:
        doc.pop("A", None)
        doc.pop("gamma", None)
    kind = src.get("type", "power")
    if kind == "power":
        source = PowerSource(float(src.get("A", 1.0)), float(src.get("gamma", 0.0)))
    elif kind == "tabulated":
        source = TabulatedSource(tuple(src["r"]), tuple(src["f"]))
    else:
        raise ConfigError(f"unknown source type {kind!r}")
    known = {f.name for f in fields(ProblemSpec)} - {"source"}
    unknown = set(doc) - known
    if unknown:
        raise ConfigError(f"unknown problem keys: {sorted(unknown)}")
    return ProblemSpec(source=source, **doc)


def _oracle_spec(ps: ProblemSpec) -> RadialExampleSpec:
    if not isinstance(ps.source, PowerSource):
        raise ConfigError("the oracle needs a power-law source")
    return RadialExampleSpec(N=ps.N, R=ps.R, beta=ps.beta, theta=ps.theta, A=ps.source.A, gamma=ps.source.gamma)


def _spec_to_json(ps: ProblemSpec) -> dict:
    d = asdict(ps)
    src = ps.source
    if isinstance(src, PowerSource):
        d["source"] = {"type": "power", "A": src.A, "gamma": src.gamma}
    else:
        d["source"] = {"type": "tabulated", "r": list(src.r), "f": list(src.f)}
    return d


def _apply_overrides(problem: dict, args) -> dict:
    problem = dict(problem)
    if args.mesh is not None:
        problem["M"] = args.mesh
    if args.trunc is not None:
        problem["trunc"] = args.trunc
    if args.tol is not None:
        problem["tol"] = args.tol
    return problem


def _nonexistent(ps: ProblemSpec):
    """Load of the theta = 1 radial example when no bounded solution exists, else None."""
    if ps.unit_coefficient or not isinstance(ps.source, PowerSource) or not ps.source.gamma < 2:
        return None
    ex = _oracle_spec(ps)
    if has_bounded_solution(ex):
        return None
    return solve_boundary_value(ex).load


# ---------------------------------------------------------------- output


def _fmt(x):
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


def _render(command: str, config: dict, columns, rows, fmt: str, meta=None) -> str:
    meta = meta or {}
    cfg = json.dumps(config, sort_keys=True)
    if fmt == "json":
        doc = {"config": config, "command": command, "meta": meta, "columns": list(columns)}
        doc["data"] = [dict(zip(columns, row)) for row in rows]
        return json.dumps(doc, indent=2, default=_json_default) + "\n"
    sep = "," if fmt == "csv" else "\t"
    lines = [f"# degrobin {__version__} {command}", f"# config: {cfg}"]
    lines += [f"# {k}: {_fmt(v)}" for k, v in meta.items()]
    head = sep.join(columns)
    lines.append(head if fmt == "csv" else "# " + head)
    lines += [sep.join(_fmt(x) for x in row) for row in rows]
    return "\n".join(lines) + "\n"


def _json_default(o):
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(type(o))


def _write(text: str, path) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
        return
    d = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".degrobin-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


# ---------------------------------------------------------------- commands


def cmd_classify(cfg, args):
    N = int(cfg.get("N", 3))
    theta = cfg.get("theta")
    q = cfg.get("q")
    if theta is None or q is None:
        raise ConfigError("classify needs theta and q")
    rep = classify(N, theta, q)
    resolved = {"command": "classify", "N": N, "theta": theta, "q": q}
    d = rep.as_dict()
    d["exact"] = rep.as_dict(exact_strings=True)
    if args.format == "json":
        text = json.dumps({"config": resolved, "command": "classify", "report": d}, indent=2, default=_json_default)
        return text + "\n", EXIT_OK
    rows = [(k, v) for k, v in rep.as_dict().items()]
    return _render("classify", resolved, ("name", "value"), rows, args.format), EXIT_OK


def cmd_oracle(cfg, args):
    ps = _problem_spec(_apply_overrides(cfg.get("problem", {}), args))
    ex = _oracle_spec(ps)
    form = solve_boundary_value(ex)
    resolved = {"command": "oracle", "problem": asdict(ex), "samples": int(cfg.get("samples", 101))}
    if not form.exists:
        sys.stderr.write(DICHOTOMY_MSG.format(load=form.load) + "\n")
        return None, EXIT_NONEXISTENCE
    r = np.linspace(0.0, ex.R, resolved["samples"])
    rows = list(zip(r, u_profile(form, ex, r), v_profile(form, ex, r)))
    meta = {"vR": form.vR, "boundary_load": form.load}
    return _render("oracle", resolved, ("r", "u", "v"), rows, args.format, meta), EXIT_OK


def cmd_solve(cfg, args):
    ps = _problem_spec(_apply_overrides(cfg.get("problem", {}), args))
    resolved = {"command": "solve", "problem": _spec_to_json(ps)}
    rep = picard_solve(ps)
    g = rep.solution
    rows = list(zip(g.nodes, g.values, rep.v_equiv.values, radial_flux(ps, g)))
    meta = {
        "iterations": rep.picard_iterations,
        "converged": rep.converged,
        "final_update_norm": rep.final_update_norm,
        "truncation_active": rep.truncation_active,
        "weak_residual": rep.weak_residual,
    }
    text = _render("solve", resolved, ("r", "u", "v", "flux"), rows, args.format, meta)
    load = _nonexistent(ps)
    if load is not None:
        sys.stderr.write(DICHOTOMY_MSG.format(load=load) + "\n")
        return text, EXIT_NONEXISTENCE
    return text, EXIT_OK


def _sweep_member(ps: ProblemSpec):
    rep = picard_solve(ps)
    return (rep.max_u, rep.solution.boundary_value, rep.picard_iterations, rep.converged, rep.truncation_active, rep.weak_residual)


def cmd_sweep(cfg, args):
    base = _apply_overrides(cfg.get("problem", {}), args)
    sweep = cfg.get("sweep")
    if not sweep or "parameter" not in sweep or "values" not in sweep:
        raise ConfigError("sweep needs {'parameter': name, 'values': [...]}")
    name = sweep["parameter"]
    values = list(sweep["values"])
    specs = []
    for val in values:
        doc = dict(base)
        if name in ("A", "gamma"):
            src = dict(doc.get("source", {"type": "power", "A": doc.pop("A", 1.0), "gamma": doc.pop("gamma", 0.0)}))
            src[name] = val
            doc["source"] = src
        elif name in {f.name for f in fields(ProblemSpec)} - {"source"}:
            doc[name] = val
        else:
            raise ConfigError(f"cannot sweep unknown parameter {name!r}")
        specs.append(_problem_spec(doc))
    resolved = {"command": "sweep", "problem": _spec_to_json(_problem_spec(base)), "sweep": {"parameter": name, "values": values}}
    jobs = max(1, int(args.jobs))
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_sweep_member, specs))
    else:
        results = [_sweep_member(ps) for ps in specs]
    rows = [(val, *res) for val, res in zip(values, results)]
    cols = ("value", "max_u", "u_R", "iterations", "converged", "truncation_active", "weak_residual")
    text = _render("sweep", resolved, cols, rows, args.format)
    loads = [ld for ld in map(_nonexistent, specs) if ld is not None]
    if loads:
        sys.stderr.write(DICHOTOMY_MSG.format(load=loads[0]) + "\n")
        return text, EXIT_NONEXISTENCE
    return text, EXIT_OK


VERIFY_DEFAULTS = {
    "linfty": {"N": 3, "theta": 0.5, "gamma": 1.0, "beta": 1.0, "R": 1.0, "A": [0.0, 1.0, 10.0, 100.0]},
    "energy": {"N": 3, "theta": 0.5, "gamma": 1.2, "beta": 1.0, "R": 1.0, "q": 1.4, "A": [1.0, 10.0, 100.0, 1e3, 1e4], "M": 4096},
    "w1s": {
        "N": 3,
        "theta": 0.5,
        "gamma": 2.3,
        "beta": 1.0,
        "R": 1.0,
        "q": 1.3,
        "A": [1.0, 10.0, 100.0],
        "meshes": [256, 1024],
        "trunc": 1e3,
        "truncate_source": True,
    },
    "fuzz": {"samples": 10000},
}


def cmd_verify(cfg, args):
    conf = {k: {**v, **cfg.get("verify", {}).get(k, {})} for k, v in VERIFY_DEFAULTS.items()}
    seed = 0 if args.seed is None else int(args.seed)
    resolved = {"command": "verify", "verify": conf, "seed": seed}
    rows = []

    c = conf["linfty"]
    specs = [RadialExampleSpec(N=c["N"], R=c["R"], beta=c["beta"], theta=c["theta"], A=a, gamma=c["gamma"]) for a in c["A"]]
    for r in estimate_harness_linfty(specs):
        for key in ("q", "f_Lq", "u_max", "B_u_max"):
            rows.append(("linfty", r["N"], r["theta"], r["gamma"], r["A"], "", key, r[key]))

    c = conf["energy"]
    specs = [RadialExampleSpec(N=c["N"], R=c["R"], beta=c["beta"], theta=c["theta"], A=a, gamma=c["gamma"]) for a in c["A"]]
    for r in estimate_harness_energy(specs, c["q"], M=int(c["M"])):
        for key in ("f_Lq", "u_Lexp", "ratio", "H1", "grad_weighted", "trace_Lp"):
            rows.append(("energy", r["N"], r["theta"], r["gamma"], r["A"], c["M"], key, r[key] if r[key] is not None else math.nan))

    c = conf["w1s"]
    specs = [
        ProblemSpec(N=c["N"], R=c["R"], beta=c["beta"], theta=c["theta"], source=PowerSource(a, c["gamma"]), trunc=c["trunc"], truncate_source=c["truncate_source"])
        for a in c["A"]
    ]
    out = estimate_harness_w1s(specs, c["q"], meshes=c["meshes"])
    for r in out["rows"]:
        for key in ("f_Lq", "W1s", "u_max"):
            rows.append(("w1s", r["N"], r["theta"], r["gamma"], r["A"], r["M"], key, r[key]))
    rows.append(("w1s", c["N"], c["theta"], c["gamma"], "", "", "loglog_slope_W1s_vs_A", out["slope"]))

    rng = np.random.default_rng(seed)
    n = int(conf["fuzz"]["samples"])
    p = rng.uniform(1 + 1e-6, 10.0, n)
    th = rng.uniform(0.0, 1.0, n)
    th = np.where(th == 0, 1.0, th)
    t = rng.uniform(0.0, 1e6, n)
    chk = check_pointwise_inequality(p, th, t)
    rows.append(("fuzz", "", "", "", "", "", "pointwise_inequality_violations", int(np.sum(~chk.holds))))
    for theta in (0.3, 0.5, 0.9, 1.0):
        inf = gamma_condition_infimum(CoefficientFamily(theta), 1e8 if theta == 1 else 1e30, 10_000)
        rows.append(("fuzz", "", theta, "", "", "", "gamma_condition_infimum", inf))

    cols = ("harness", "N", "theta", "gamma", "A", "M", "name", "value")
    return _render("verify", resolved, cols, rows, args.format), EXIT_OK


HANDLERS = {
    "classify": cmd_classify,
    "oracle": cmd_oracle,
    "solve": cmd_solve,
    "sweep": cmd_sweep,
    "verify": cmd_verify,
}


def _epilog() -> str:
    sch = _schema()
    lines = ["exit codes:"]
    lines += [f"  {k}  {v}" for k, v in sch["exit_codes"].items()]
    lines.append("output columns:")
    for cmd, cols in sch["commands"].items():
        lines.append(f"  {cmd}:")
        lines += [f"    {k}: {v}" for k, v in cols.items()]
    return "\n".join(lines)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="degrobin",
        description="Degenerate Robin problem toolkit: regimes, radial oracle, truncation solver, estimate checks.",
        epilog=_epilog(),
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--config", help="JSON problem document")
    parser.add_argument("--out", help="output path (default: stdout)")
    parser.add_argument("--format", choices=FORMATS, default="csv")
    parser.add_argument("--mesh", type=int, help="number of mesh cells M")
    parser.add_argument("--trunc", type=float, help="truncation level n")
    parser.add_argument("--tol", type=float, help="Picard relative update tolerance")
    parser.add_argument("--seed", type=int, help="seed for the fuzz checks of verify")
    parser.add_argument("--jobs", type=int, default=1, help="parallel sweep members")
    parser.add_argument("--N", type=int, help="dimension (classify)")
    parser.add_argument("--theta", help="coefficient exponent (classify)")
    parser.add_argument("--q", help="summability exponent of f (classify)")
    return parser


def _load_config(args) -> dict:
    cfg = {}
    if args.config:
        with open(args.config) as fh:
            cfg = json.load(fh)
        if not isinstance(cfg, dict):
            raise ConfigError("config must be a JSON object")
    if args.command == "classify":
        for key in ("N", "theta", "q"):
            val = getattr(args, key)
            if val is not None:
                cfg[key] = val
    return cfg


def run(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _load_config(args)
    except OSError as exc:
        sys.stderr.write(f"cannot read config: {exc}\n")
        return EXIT_IO
    except (ValueError, ConfigError) as exc:
        sys.stderr.write(f"invalid config: {exc}\n")
        return EXIT_CONFIG
    try:
        text, status = HANDLERS[args.command](cfg, args)
    except NonConvergenceError as exc:
        sys.stderr.write(f"{exc}\n")
        return EXIT_NONCONVERGENCE
    except (DomainError, ValueError, TypeError, KeyError) as exc:
        sys.stderr.write(f"invalid config: {exc}\n")
        return EXIT_CONFIG
    if text is not None:
        try:
            _write(text, args.out)
        except OSError as exc:
            sys.stderr.write(f"cannot write output: {exc}\n")
            return EXIT_IO
    return status


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()

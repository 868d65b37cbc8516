"""Scenario-driven command line front end.

Commands:
    pep solve <scenario.json>      single solve -> result record + instance
    pep sweep <scenario.json>      step-size or spectrum sweep -> CSV + summary
    pep region <scenario.json>     feasible-region scan -> CSV
    pep verify <record.json>       re-verify a result record
    pep export-sdp <scenario.json> compiled SDP in sparse triplet text

Scenario files are JSON with top-level keys ``method``, ``family``,
``representation``, ``sweep``, ``region``, ``output``, ``tolerances``.
All floating output is printed with 12 significant digits and runs are
deterministic, so repeated invocations produce byte-identical files.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import ipm, recover, sdp
from .families import ClassSpec
from .gram import BuildError, PEPProblem
from .methods import (
    DGDSpec,
    MethodSpec,
    W_FAMILIES,
    build_custom_method,
    build_dgd_fixed_matrix,
    build_dgd_spectral,
    build_gradient_method,
    classical_bound,
)

SCHEMA_COMMENT = "# pep-forge schema v1"


def fmt(x) -> str:
    """12 significant digits; stable across runs."""
    if isinstance(x, bool):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if x is None:
        return ""
    v = float(x)
    if math.isnan(v):
        return "nan"
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return f"{v:.12g}"


def _round_floats(obj):
    if isinstance(obj, float):
        return float(fmt(obj))
    if isinstance(obj, dict):
        return {k: _round_floats(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round_floats(v) for v in obj]
    if isinstance(obj, (np.floating,)):
        return float(fmt(float(obj)))
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.ndarray):
        return _round_floats(obj.tolist())
    return obj


def write_json(payload: dict, path: Path) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as fh:
        json.dump(_round_floats(payload), fh, indent=2, sort_keys=True)
        fh.write("\n")


class ScenarioError(ValueError):
    pass


def load_scenario(path: str) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except FileNotFoundError:
        raise ScenarioError(f"scenario file not found: {path}")
    except json.JSONDecodeError as exc:
        raise ScenarioError(
            f"{path}: invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}"
        )


def _need(d: dict, key: str, where: str):
    if key not in d:
        raise ScenarioError(f"missing field {where}.{key}")
    return d[key]


def family_from_scenario(scn: dict) -> ClassSpec:
    fam = scn.get("family", {"name": "smooth-strongly-convex", "mu": 0.0, "L": 1.0})
    try:
        return ClassSpec.from_dict(fam)
    except BuildError as exc:
        raise ScenarioError(f"family: {exc}")


def method_spec(scn: dict, h_override: float | None = None) -> MethodSpec:
    md = _need(scn, "method", "scenario")
    fam = family_from_scenario(scn)
    steps = md.get("steps")
    if steps is None:
        steps = [md.get("step", 1.0)]
    if h_override is not None:
        steps = [h_override]
    return MethodSpec(
        N=int(_need(md, "N", "method")),
        steps=tuple(float(s) for s in steps),
        family=fam,
        criterion=md.get("criterion", "last-iterate-gap"),
        R=float(md.get("R", 1.0)),
        steps_are_h=bool(md.get("steps_are_h", True)),
    )


def dgd_spec(scn: dict, lam_override: float | None = None) -> DGDSpec:
    md = _need(scn, "method", "scenario")
    fam = family_from_scenario(scn)
    lam = float(md.get("lam", 0.5)) if lam_override is None else lam_override
    return DGDSpec(
        N=int(_need(md, "N", "method")),
        agents=int(md.get("agents", 3)),
        alpha=float(_need(md, "alpha", "method")),
        lam=lam,
        family=fam,
        grad_bound=md.get("grad_bound", 1.0),
        R=float(md.get("R", 1.0)),
    )


def build_from_scenario(scn: dict, **overrides) -> PEPProblem:
    md = _need(scn, "method", "scenario")
    kind = _need(md, "kind", "method")
    rep = scn.get("representation", "tight")
    if kind == "gradient":
        return build_gradient_method(method_spec(scn, overrides.get("h")), rep)
    if kind == "dgd-spectral":
        return build_dgd_spectral(dgd_spec(scn, overrides.get("lam")))
    if kind == "dgd-fixed":
        spec = dgd_spec(scn, overrides.get("lam"))
        W = overrides.get("W")
        if W is None:
            W = md.get("W")
            W = np.asarray(W, dtype=float) if W is not None else None
        if W is None:
            gen = W_FAMILIES.get(md.get("W_family", "extreme-negative"))
            if gen is None:
                raise ScenarioError(f"unknown W_family {md.get('W_family')!r}")
            W = gen(spec.agents, spec.lam)
        return build_dgd_fixed_matrix(spec, W)
    if kind == "custom":
        return build_custom_method(_need(md, "scheme", "method"))
    raise ScenarioError(f"unknown method kind {kind!r}")


def _tolerances(scn: dict, args=None) -> dict:
    tol = dict(scn.get("tolerances", {}))
    out = {
        "gap": float(tol.get("gap", 1e-8)),
        "feas": float(tol.get("feas", 1e-8)),
        "max_iter": int(tol.get("max_iter", 200)),
        "verify": float(tol.get("verify", 1e-6)),
        "network": float(tol.get("network", 1e-5)),
    }
    if args is not None:
        if getattr(args, "tol_gap", None) is not None:
            out["gap"] = args.tol_gap
        if getattr(args, "tol_feas", None) is not None:
            out["feas"] = args.tol_feas
    return out


def solve_problem(problem: PEPProblem, tols: dict):
    compiled = sdp.compile(problem)
    sol = ipm.solve(
        compiled,
        gap_tol=tols["gap"],
        feas_tol=tols["feas"],
        max_iter=tols["max_iter"],
    )
    return compiled, sol


def certify(problem: PEPProblem, sol, tols: dict):
    """Recover, verify, and (for spectral consensus problems) attempt
    network-matrix recovery.  Returns (report, instance, network)."""
    if sol.status != "optimal":
        return None, None, None
    try:
        inst = recover.recover_instance(sol, problem)
    except recover.NumericalFailure:
        return None, None, None
    network = None
    handle = problem.meta.get("consensus_handle")
    if problem.meta.get("needs_network_recovery") and handle is not None:
        network = recover.recover_network_matrix(
            inst, handle, problem.meta.get("lam"), tol=tols["network"]
        )
    report = recover.verify_instance(
        inst,
        problem,
        tol=tols["verify"],
        sdp_value=sol.objective_value,
        network=network,
    )
    return report, inst, network


def _out_paths(scn: dict, args, stem: str) -> Path:
    out = getattr(args, "out", None)
    if out:
        return Path(out)
    od = scn.get("output", {})
    directory = od.get("dir", "out")
    prefix = od.get("prefix", "pep")
    return Path(directory) / f"{prefix}-{stem}"


# ---------------------------------------------------------------------------
# solve


def cmd_solve(args) -> int:
    scn = load_scenario(args.scenario)
    tols = _tolerances(scn, args)
    problem = build_from_scenario(scn)
    compiled, sol = solve_problem(problem, tols)
    report, inst, network = certify(problem, sol, tols)

    record_path = _out_paths(scn, args, "result.json")
    instance_path = record_path.with_name(record_path.stem + "-instance.txt")
    record = {
        "scenario": scn,
        "value": sol.objective_value,
        "dual_value": sol.dual_objective,
        "status": sol.status,
        "gap": sol.duality_gap,
        "complementarity": sol.complementarity,
        "kkt_residual": sol.kkt_residual,
        "iterations": sol.iterations,
        "certification": report.certification if report else "not-verified",
        "max_verify_residual": report.max_residual if report else None,
        "instance_path": str(instance_path) if inst else None,
    }
    if network is not None:
        record["network_recovery"] = {
            "success": network.success,
            "residual": network.residual,
            "eigenvalues": network.eigenvalues,
            "underdetermined": network.underdetermined,
            "W": network.W,
        }
    write_json(record, record_path)
    if inst is not None:
        recover.write_instance(inst, problem, str(instance_path), report)
    print(
        f"value {fmt(sol.objective_value)}  status {sol.status}  "
        f"gap {fmt(sol.duality_gap)}  certification {record['certification']}"
    )
    print(f"record written to {record_path}")
    return 0 if sol.status == "optimal" else 1


# ---------------------------------------------------------------------------
# sweep


def _grid(sweep: dict, axis: str) -> list[float]:
    lo = float(sweep.get("lo", 0.002 if axis == "h" else 0.1))
    hi = float(sweep.get("hi", 1.998 if axis == "h" else 0.9))
    step = float(sweep.get("step", 0.002 if axis == "h" else 0.1))
    if axis == "h" and not (0 < lo <= hi < 2):
        raise ScenarioError("h grid must lie strictly inside (0, 2)")
    if axis == "lam" and not (0 <= lo <= hi < 1):
        raise ScenarioError("lambda grid must lie inside [0, 1)")
    n = int(round((hi - lo) / step)) + 1
    return [lo + i * step for i in range(n) if lo + i * step <= hi + 1e-12]


def _solve_point_h(scn, tols, h, want_verify):
    fam = family_from_scenario(scn)
    md = scn["method"]
    N = int(md["N"])
    L = fam.L if fam.L < math.inf else 1.0
    R = float(md.get("R", 1.0))
    bound = classical_bound(N, h, L, R)
    row = {"h": h, "classical_bound": bound}
    for rep in ("relaxed", "tight"):
        problem = build_gradient_method(method_spec(scn, h), rep)
        _, sol = solve_problem(problem, tols)
        row[f"{rep}_value"] = sol.objective_value
        row[f"{rep}_status"] = sol.status
        if rep == "tight" and want_verify:
            report, _, _ = certify(problem, sol, tols)
            row["tight_certification"] = (
                report.certification if report else "not-verified"
            )
        elif rep == "tight":
            row["tight_certification"] = "not-verified"
    return row


def _solve_point_lam(scn, tols, lam, want_verify):
    md = scn["method"]
    row = {"lam": lam}
    spec = dgd_spec(scn, lam)
    problem = build_dgd_spectral(spec)
    _, sol = solve_problem(problem, tols)
    row["spectral_value"] = sol.objective_value
    row["spectral_status"] = sol.status
    if want_verify:
        report, _, network = certify(problem, sol, tols)
        row["spectral_certification"] = (
            report.certification if report else "not-verified"
        )
        row["network_residual"] = network.residual if network else math.inf
    else:
        row["spectral_certification"] = "not-verified"
        row["network_residual"] = math.inf
    gen = W_FAMILIES.get(scn["method"].get("W_family", "extreme-negative"))
    if gen is None:
        raise ScenarioError(f"unknown W_family {scn['method'].get('W_family')!r}")
    W = gen(spec.agents, lam)
    fixed_prob = build_dgd_fixed_matrix(spec, W)
    _, fsol = solve_problem(fixed_prob, tols)
    row["fixed_value"] = fsol.objective_value
    row["fixed_status"] = fsol.status
    return row


H_COLUMNS = (
    "h",
    "classical_bound",
    "relaxed_value",
    "tight_value",
    "relaxed_status",
    "tight_status",
    "tight_certification",
)
LAM_COLUMNS = (
    "lam",
    "spectral_value",
    "fixed_value",
    "spectral_status",
    "fixed_status",
    "spectral_certification",
    "network_residual",
)


def run_sweep(scn: dict, tols: dict, jobs: int = 1) -> tuple[list[dict], dict]:
    sweep = scn.get("sweep") or {}
    axis = sweep.get("axis")
    if axis not in ("h", "lam"):
        raise ScenarioError("sweep.axis must be 'h' or 'lam'")
    want_verify = bool(sweep.get("verify", True))
    grid = _grid(sweep, axis)
    worker = _solve_point_h if axis == "h" else _solve_point_lam

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(lambda g: worker(scn, tols, g, want_verify), grid))
    else:
        rows = [worker(scn, tols, g, want_verify) for g in grid]

    value_cols = (
        ("classical_bound", "relaxed_value", "tight_value")
        if axis == "h"
        else ("spectral_value", "fixed_value")
    )
    summary = {"axis": axis, "points": len(rows), "argmin": {}}
    for col in value_cols:
        best = None
        status_col = col.replace("_value", "_status")
        for row in rows:
            if status_col in row and row[status_col] != "optimal":
                continue
            v = row[col]
            if best is None or v < best[1]:
                best = (row[axis], v)
        if best is not None:
            summary["argmin"][col] = {"at": best[0], "value": best[1]}
    if axis == "lam":
        fam = scn["method"].get("W_family", "extreme-negative")
        summary["fixed_matrix_family"] = fam
    return rows, summary


def write_csv(rows: list[dict], columns, path: Path) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [SCHEMA_COMMENT, ",".join(columns)]
    for row in rows:
        lines.append(",".join(fmt(row.get(c)) if not isinstance(row.get(c), str) else row[c] for c in columns))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def cmd_sweep(args) -> int:
    scn = load_scenario(args.scenario)
    tols = _tolerances(scn, args)
    rows, summary = run_sweep(scn, tols, jobs=args.jobs)
    axis = summary["axis"]
    columns = H_COLUMNS if axis == "h" else LAM_COLUMNS
    csv_path = _out_paths(scn, args, "sweep.csv")
    write_csv(rows, columns, csv_path)
    write_json(summary, csv_path.with_suffix(".summary.json"))
    print(f"{len(rows)} grid points written to {csv_path}")
    for col, info in summary["argmin"].items():
        print(f"argmin[{col}] at {fmt(info['at'])}: {fmt(info['value'])}")
    bad = [r for r in rows if any(str(r.get(c, "")).startswith(("max-iter", "numerical")) for c in columns)]
    if bad:
        print(f"warning: {len(bad)} grid points did not reach optimality")
    return 0


# ---------------------------------------------------------------------------
# region scan


def region_masks(g2, f2, anchor: dict, L: float, tol: float = 1e-9):
    """Vectorized two-point feasibility checks under the anchor data.

    Returns (relaxed, tight) boolean arrays: discretized convexity +
    Lipschitz versus the exact smooth-convex interpolation inequalities.
    """
    x1 = anchor.get("x1", 0.0)
    x2 = anchor.get("x2", 1.0)
    g1 = anchor.get("g1", 1.0)
    f1 = anchor.get("f1", 0.0)
    dx = x2 - x1
    dg = g2 - g1
    cvx21 = f2 - (f1 + g1 * dx)                 # f2 >= f1 + g1 (x2 - x1)
    cvx12 = f1 - (f2 + g2 * (-dx))              # f1 >= f2 - g2 (x2 - x1)
    lips = dg * dg - L * L * dx * dx
    relaxed = (cvx21 >= -tol) & (cvx12 >= -tol) & (lips <= tol)
    t21 = f2 - (f1 + g1 * dx + dg * dg / (2.0 * L))
    t12 = f1 - (f2 - g2 * dx + dg * dg / (2.0 * L))
    tight = (t21 >= -tol) & (t12 >= -tol)
    return relaxed, tight


def run_region(scn: dict):
    rg = scn.get("region") or {}
    lo = float(rg.get("lo", -0.5))
    hi = float(rg.get("hi", 2.5))
    step = float(rg.get("step", 0.01))
    L = float(rg.get("L", 1.0))
    anchor = rg.get("anchor", {})
    n = int(round((hi - lo) / step)) + 1
    axis = lo + step * np.arange(n)
    G2, F2 = np.meshgrid(axis, axis, indexing="ij")
    relaxed, tight = region_masks(G2, F2, anchor, L)
    return axis, relaxed, tight


def cmd_region(args) -> int:
    scn = load_scenario(args.scenario)
    axis, relaxed, tight = run_region(scn)
    path = _out_paths(scn, args, "region.csv")
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [SCHEMA_COMMENT, "g2,f2,relaxed_feasible,tight_feasible"]
    n = axis.shape[0]
    for i in range(n):
        for j in range(n):
            lines.append(
                f"{fmt(axis[i])},{fmt(axis[j])},{int(relaxed[i, j])},{int(tight[i, j])}"
            )
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")
    print(
        f"region grid {n}x{n} written to {path}; "
        f"relaxed cells {int(relaxed.sum())}, tight cells {int(tight.sum())}"
    )
    return 0


# ---------------------------------------------------------------------------
# verify


def cmd_verify(args) -> int:
    try:
        with open(args.record) as fh:
            record = json.load(fh)
    except FileNotFoundError:
        print(f"record not found: {args.record}", file=sys.stderr)
        return 2
    scn = record.get("scenario")
    inst_path = record.get("instance_path")
    if not scn or not inst_path:
        print("record carries no scenario or instance export", file=sys.stderr)
        return 2
    if not Path(inst_path).exists():
        print(f"instance file not found: {inst_path}", file=sys.stderr)
        return 2
    tols = _tolerances(scn, args)
    problem = build_from_scenario(scn)
    inst = recover.read_instance(inst_path, problem)
    network = None
    handle = problem.meta.get("consensus_handle")
    if problem.meta.get("needs_network_recovery") and handle is not None:
        network = recover.recover_network_matrix(
            inst, handle, problem.meta.get("lam"), tol=tols["network"]
        )
    report = recover.verify_instance(
        inst, problem, tol=tols["verify"], sdp_value=record.get("value"), network=network
    )
    print(f"certification {report.certification}")
    print(f"max residual {fmt(report.max_residual)}")
    if report.objective_gap is not None:
        print(f"objective gap vs record {fmt(report.objective_gap)}")
    if network is not None:
        print(
            f"network recovery: success={network.success} residual={fmt(network.residual)}"
        )
        if network.success:
            print("spectral bound certified exact at this point")
    if report.notes:
        print(f"notes: {report.notes}")
    return 0


def cmd_export_sdp(args) -> int:
    scn = load_scenario(args.scenario)
    problem = build_from_scenario(scn)
    compiled = sdp.compile(problem)
    path = _out_paths(scn, args, "sdp.txt")
    path.parent.mkdir(parents=True, exist_ok=True)
    sdp.export_sdp_text(compiled, str(path))
    print(f"SDP with {compiled.num_rows} rows written to {path}")
    return 0


# ---------------------------------------------------------------------------


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="pep",
        description="Tight worst-case bounds for first-order methods via PEPs",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--out", help="output path (overrides scenario output section)")
        p.add_argument("--tol-gap", type=float, default=None, help="duality gap tolerance")
        p.add_argument("--tol-feas", type=float, default=None, help="feasibility tolerance")
        p.add_argument("--jobs", type=int, default=1, help="worker threads for sweeps")

    p_solve = sub.add_parser("solve", help="solve a single scenario")
    p_solve.add_argument("scenario")
    common(p_solve)
    p_solve.set_defaults(func=cmd_solve)

    p_sweep = sub.add_parser("sweep", help="grid sweep over h or lambda")
    p_sweep.add_argument("scenario")
    common(p_sweep)
    p_sweep.set_defaults(func=cmd_sweep)

    p_region = sub.add_parser("region", help="two-point feasibility region scan")
    p_region.add_argument("scenario")
    common(p_region)
    p_region.set_defaults(func=cmd_region)

    p_verify = sub.add_parser("verify", help="re-verify a result record")
    p_verify.add_argument("record")
    common(p_verify)
    p_verify.set_defaults(func=cmd_verify)

    p_export = sub.add_parser("export-sdp", help="export the compiled SDP")
    p_export.add_argument("scenario")
    common(p_export)
    p_export.set_defaults(func=cmd_export_sdp)

    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ScenarioError, BuildError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

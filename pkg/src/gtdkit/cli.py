"""Command-line front end.

Commands: analyze | euler | metric | repchange | scan.

Exit codes are stable across commands: 0 success, 1 consistency check
failed, 2 input error, 3 no homogeneity found, 4 singular
representation or degenerate conformal prefactor.
"""

from __future__ import annotations

import argparse
import json
import sys as _sys
from pathlib import Path
from typing import Dict, List, Optional, Tuple

import numpy as np

from .errors import (
    DegenerateConformalFactor,
    GtdError,
    NoHomogeneityError,
    SingularRepresentation,
)
from .geometry import (
    MetricSpec,
    base_metric,
    conformal_factor_c4,
    conformal_factor_twovar_c7,
    induced_metric_beta1,
    induced_metric_c1,
    induced_metric_c2,
    reconstruction_report,
    rel_max_diff,
)
from .homogeneity import (
    WeightAssignment,
    detect_weights,
    euler_residual,
    is_strictly_homogeneous,
    sample_points,
)
from .systems import ThermoSystem, kerr_newman, load_system, reissner_nordstrom_d

SCHEMA_VERSION = 1
EULER_PASS_THRESHOLD = 1e-10
CONSISTENCY_THRESHOLD = 1e-9

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_INPUT = 2
EXIT_NO_HOMOGENEITY = 3
EXIT_SINGULAR = 4


def _fmt9(x: float) -> str:
    return f"{x:.9g}"


def _fmt_full(x: float) -> str:
    return repr(float(x))


# ---------------------------------------------------------------------------
# argument parsing helpers


def _parse_kv(text: str, flag: str) -> Dict[str, float]:
    out: Dict[str, float] = {}
    for chunk in text.split(","):
        chunk = chunk.strip()
        if not chunk:
            continue
        if "=" not in chunk:
            raise GtdError(f"{flag} expects name=value pairs, got {chunk!r}")
        key, _, val = chunk.partition("=")
        try:
            out[key.strip()] = float(val)
        except ValueError:
            raise GtdError(f"{flag}: {val!r} is not a number") from None
    if not out:
        raise GtdError(f"{flag} expects at least one name=value pair")
    return out


def _parse_floats(text: str, flag: str) -> List[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise GtdError(f"{flag} expects a comma-separated list of numbers") from None


def _load_from_args(args) -> ThermoSystem:
    params = {}
    for chunk in args.param or []:
        params.update(_parse_kv(chunk, "--param"))
    if args.file:
        try:
            contents = Path(args.file).read_bytes()
        except OSError as e:
            raise GtdError(f"cannot read {args.file}: {e}") from e
        system = load_system(contents)
        if params:
            from .systems import system_to_json

            doc = json.loads(system_to_json(system))
            unknown = set(params) - set(doc.get("parameters", {}))
            if unknown:
                raise GtdError(f"--param names not in system file: {sorted(unknown)}")
            doc["parameters"].update(params)
            system = load_system(json.dumps(doc))
        return system
    name = (args.system or "").lower()
    if name in ("kerr-newman", "kn"):
        if params:
            raise GtdError("kerr-newman takes no parameters")
        return kerr_newman()
    if name in ("rn", "reissner-nordstrom"):
        d = params.pop("d", 4.0)
        if params:
            raise GtdError(f"unknown parameters for rn: {sorted(params)}")
        if d != int(d):
            raise GtdError(f"rn requires an integer dimension d, got {d}")
        return reissner_nordstrom_d(int(d))
    raise GtdError(
        f"unknown system {args.system!r}; use --system kerr-newman|rn or --file PATH"
    )


def _resolve_weights(system: ThermoSystem, args) -> Tuple[WeightAssignment, str]:
    if getattr(args, "powers", None):
        powers = _parse_kv(args.powers, "--powers")
        if set(powers) != set(system.variables):
            raise GtdError(
                f"--powers must cover exactly {system.variables}, got {tuple(powers)}"
            )
        beta = args.beta if args.beta is not None else 1.0
        return WeightAssignment(beta, powers), "supplied"
    if system.declared_weights is not None:
        w = system.declared_weights
        source = "declared"
    else:
        count = args.samples if args.samples is not None else 64
        report = detect_weights(system, count, args.seed)
        if report.canonical is None:
            raise NoHomogeneityError(
                f"no quasi-homogeneity found for '{system.name}' (status {report.status})"
            )
        w = report.canonical
        source = "detected"
    if getattr(args, "beta", None) is not None:
        # re-gauge the resolved assignment to the requested degree
        w = w.normalized().rescaled(1.0 / args.beta)
    return w, source


def _points_from_args(system: ThermoSystem, args, default_samples: int):
    if args.point:
        return [
            _parse_kv(chunk, "--point") for chunk in args.point
        ], "supplied"
    count = args.samples if args.samples is not None else default_samples
    pts, _ = sample_points(system, count, args.seed)
    return [dict(zip(system.variables, row)) for row in pts], "sampled"


def _metric_spec(system: ThermoSystem, args) -> MetricSpec:
    n = len(system.variables)
    chi = args.chi or "delta"
    if args.lam is not None:
        lam = _parse_floats(args.lam, "--lambda")
        if len(lam) != n:
            raise GtdError(f"--lambda needs {n} values for {system.variables}")
    else:
        lam = [1.0] * n
        if chi == "eta":
            lam[0] = -1.0
    if args.xi is not None:
        xi = _parse_floats(args.xi, "--xi")
        if len(xi) != n:
            raise GtdError(f"--xi needs {n} values for {system.variables}")
    else:
        xi = [1.0] * n
    chis = (1,) * n if chi == "delta" else (-1,) + (1,) * (n - 1)
    return MetricSpec(system.variables, tuple(lam), chis, tuple(xi))


def _emit(args, text: str) -> None:
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        _sys.stdout.write(text)


def _matrix_lines(labels, matrix: np.ndarray, indent: str = "  ") -> List[str]:
    width = max(len(_fmt9(v)) for v in matrix.flat)
    lines = []
    for i, row in enumerate(matrix):
        cells = "  ".join(_fmt9(v).rjust(width) for v in row)
        lines.append(f"{indent}{labels[i]:>4} | {cells}")
    return lines


def _matrix_list(matrix: np.ndarray) -> list:
    return [[float(v) for v in row] for row in matrix]


# ---------------------------------------------------------------------------
# analyze


def _cmd_analyze(args) -> int:
    system = _load_from_args(args)
    report = detect_weights(system, args.samples, args.seed)

    canonical = report.canonical
    strictly = None
    if canonical is not None:
        strictly = is_strictly_homogeneous(report)

    def _finite_or_null(v):
        return v if v == v else None  # NaN is not valid strict JSON

    doc = {
        "schema_version": SCHEMA_VERSION,
        "command": "analyze",
        "system": system.name,
        "seed": args.seed,
        "samples": args.samples,
        "status": report.status,
        "null_space_dim": report.null_space_dim,
        "verification_passed": report.verification_passed,
        "beta": 1.0 if canonical else None,
        "powers": dict(canonical.powers) if canonical else None,
        "weights": dict(canonical.weights) if canonical else None,
        "strictly_homogeneous": strictly,
        "null_space_basis": _matrix_list(report.basis) if report.basis.size else [],
        "basis_coordinates": list(system.variables) + ["beta"],
        "max_euler_residual": _finite_or_null(report.max_euler_residual),
        "max_scaling_residual": _finite_or_null(report.max_scaling_residual),
    }

    if args.format == "json":
        _emit(args, json.dumps(doc, indent=2) + "\n")
    elif args.format == "csv":
        lines = ["variable,power,weight"]
        if canonical:
            for v in system.variables:
                lines.append(
                    f"{v},{_fmt_full(canonical.powers[v])},{_fmt_full(canonical.weights[v])}"
                )
        _emit(args, "\n".join(lines) + "\n")
    else:
        lines = [
            f"system: {system.name}",
            f"status: {report.status}",
            f"null-space dimension: {report.null_space_dim}",
        ]
        if canonical:
            lines.append("degree-1 powers:")
            for v in system.variables:
                lines.append(f"  {v}: {_fmt9(canonical.powers[v])}")
            lines.append("weights q = 1/p:")
            for v in system.variables:
                lines.append(f"  {v}: {_fmt9(canonical.weights[v])}")
            lines.append(f"plain homogeneity (all powers equal): {strictly}")
        if report.null_space_dim > 0:
            lines.append(f"max Euler residual: {_fmt9(report.max_euler_residual)}")
            lines.append(f"max finite-scaling residual: {_fmt9(report.max_scaling_residual)}")
        _emit(args, "\n".join(lines) + "\n")

    return EXIT_OK if report.status in ("unique", "degenerate") else EXIT_NO_HOMOGENEITY


# ---------------------------------------------------------------------------
# euler


def _cmd_euler(args) -> int:
    system = _load_from_args(args)
    w, source = _resolve_weights(system, args)
    points, pt_source = _points_from_args(system, args, default_samples=20)

    rows = []
    worst = 0.0
    for pt in points:
        resid = euler_residual(system, w, pt)
        worst = max(worst, resid)
        rows.append((pt, resid))
    passed = bool(worst <= EULER_PASS_THRESHOLD)

    if args.format == "json":
        doc = {
            "schema_version": SCHEMA_VERSION,
            "command": "euler",
            "system": system.name,
            "weights_source": source,
            "beta": w.beta,
            "powers": dict(w.powers),
            "points_source": pt_source,
            "points": [
                {"point": {k: float(v) for k, v in pt.items()}, "residual": resid}
                for pt, resid in rows
            ],
            "max_residual": worst,
            "threshold": EULER_PASS_THRESHOLD,
            "pass": passed,
        }
        _emit(args, json.dumps(doc, indent=2) + "\n")
    elif args.format == "csv":
        header = ",".join(system.variables) + ",residual"
        lines = [header]
        for pt, resid in rows:
            cells = [_fmt_full(pt[v]) for v in system.variables] + [_fmt_full(resid)]
            lines.append(",".join(cells))
        _emit(args, "\n".join(lines) + "\n")
    else:
        lines = [
            f"system: {system.name}",
            f"weights ({source}): beta={_fmt9(w.beta)}, "
            + ", ".join(f"p_{v}={_fmt9(w.powers[v])}" for v in system.variables),
            f"Euler identity residuals at {len(rows)} {pt_source} point(s):",
        ]
        for pt, resid in rows:
            coords = ", ".join(f"{v}={_fmt9(pt[v])}" for v in system.variables)
            lines.append(f"  ({coords}) -> {_fmt9(resid)}")
        lines.append(f"max residual: {_fmt9(worst)}  (threshold {EULER_PASS_THRESHOLD:g})")
        lines.append("PASS" if passed else "FAIL")
        _emit(args, "\n".join(lines) + "\n")

    return EXIT_OK if passed else EXIT_FAILED


# ---------------------------------------------------------------------------
# metric


def _cmd_metric(args) -> int:
    system = _load_from_args(args)
    spec = _metric_spec(system, args)
    if not args.point:
        raise GtdError("metric requires at least one --point")
    points = [_parse_kv(chunk, "--point") for chunk in args.point]

    entries = []
    for pt in points:
        g = base_metric(system, spec, pt)
        entries.append((pt, g))

    if args.format == "csv":
        header = (
            list(system.variables)
            + ["row"]
            + [f"g_{v}" for v in system.variables]
            + ["symmetric", "c3_satisfied"]
        )
        lines = [",".join(header)]
        c3 = str(spec.satisfies_c3())
        for pt, g in entries:
            coords = [_fmt_full(pt[v]) for v in system.variables]
            for label, row in zip(system.variables, g.matrix):
                cells = coords + [label] + [_fmt_full(v) for v in row]
                cells += [str(g.symmetric), c3]
                lines.append(",".join(cells))
        _emit(args, "\n".join(lines) + "\n")
    elif args.format == "json":
        doc = {
            "schema_version": SCHEMA_VERSION,
            "command": "metric",
            "system": system.name,
            "lambda": list(spec.lam),
            "chi": list(spec.chi),
            "xi": list(spec.xi),
            "c3_satisfied": spec.satisfies_c3(),
            "points": [
                {
                    "point": {k: float(v) for k, v in pt.items()},
                    "g_phi": _matrix_list(g.matrix),
                    "symmetric": g.symmetric,
                    "det": g.det(),
                }
                for pt, g in entries
            ],
        }
        _emit(args, json.dumps(doc, indent=2) + "\n")
    else:
        lines = [
            f"system: {system.name}",
            f"Lambda: ({', '.join(_fmt9(v) for v in spec.lam)})  "
            f"chi: ({', '.join(str(v) for v in spec.chi)})  "
            f"xi: ({', '.join(_fmt9(v) for v in spec.xi)})",
            f"admissibility (c3): {spec.satisfies_c3()}",
        ]
        for pt, g in entries:
            coords = ", ".join(f"{v}={_fmt9(pt[v])}" for v in system.variables)
            lines.append(f"point ({coords}):")
            lines.extend(_matrix_lines(system.variables, g.matrix))
            lines.append(f"  symmetric: {g.symmetric}   det: {_fmt9(g.det())}")
        _emit(args, "\n".join(lines) + "\n")
    return EXIT_OK


# ---------------------------------------------------------------------------
# repchange


def _repchange_point(system, spec, w, rep, pt) -> dict:
    g1 = induced_metric_c1(system, spec, w, rep, pt)
    g2 = induced_metric_c2(system, spec, w, rep, pt)
    base = base_metric(system, spec, pt)
    c4 = conformal_factor_c4(system, spec, w, rep, pt)
    c1_c2 = rel_max_diff(g1.matrix, g2.matrix)

    entry = {
        "point": {k: float(v) for k, v in pt.items()},
        "g_induced_c1": _matrix_list(g1.matrix),
        "g_induced_c2": _matrix_list(g2.matrix),
        "g_phi": _matrix_list(base.matrix),
        "factor": c4.factor,
        "factor_residual": c4.residual,
        "c1_c2_max_diff": c1_c2,
        "c3_satisfied": c4.c3_satisfied,
    }

    residuals = [c1_c2, c4.residual]
    unit_xi = all(abs(x - 1.0) <= 1e-12 for x in spec.xi)
    if unit_xi and spec.satisfies_c3():
        b1 = induced_metric_beta1(system, spec, w.normalized(), rep, pt)
        entry["factor_beta1_bracket"] = b1.factor_bracket
        entry["factor_beta1_potential"] = b1.factor_potential
        entry["beta1_agreement"] = b1.agreement
        entry["beta1_vs_factor"] = abs(b1.factor_bracket - c4.factor) / max(
            abs(c4.factor), 1e-300
        )
        residuals += [b1.agreement, entry["beta1_vs_factor"]]
        if len(system.variables) == 2:
            pbar = w.normalized().powers[rep]
            f7 = conformal_factor_twovar_c7(system, pbar, rep, pt)
            entry["factor_twovar"] = f7
            entry["twovar_vs_factor"] = abs(f7 - c4.factor) / max(abs(c4.factor), 1e-300)
            residuals.append(entry["twovar_vs_factor"])

    recon = reconstruction_report(system, spec, w, rep, pt)
    entry["reconstruction"] = {
        "offprop_vs_induced": recon.offprop_vs_induced,
        "scalar_vs_base": recon.scalar_vs_base,
        "factor_c4": recon.factor_c4,
        "scalar_deviation": recon.scalar_deviation,
        "jacobian_condition": recon.jacobian_condition,
        "rep_coordinates": list(recon.rep_labels),
        "rep_powers": dict(recon.rep_weights.powers),
    }
    residuals.append(recon.offprop_vs_induced)

    # consistency gate applies only when the spec is admissible; for an
    # inadmissible spec the disagreement is the finding, not a failure
    entry["consistency_pass"] = (not spec.satisfies_c3()) or all(
        r <= CONSISTENCY_THRESHOLD for r in residuals
    )
    return entry


def _cmd_repchange(args) -> int:
    system = _load_from_args(args)
    spec = _metric_spec(system, args)
    rep = args.rep or system.variables[0]
    w, source = _resolve_weights(system, args)
    if not args.point:
        raise GtdError("repchange requires at least one --point")
    points = [_parse_kv(chunk, "--point") for chunk in args.point]

    entries = [_repchange_point(system, spec, w, rep, pt) for pt in points]
    all_pass = all(e["consistency_pass"] for e in entries)

    if args.format == "csv":
        header = list(system.variables) + list(SCAN_NUMERIC_COLUMNS) + ["status"]
        lines = [",".join(header)]
        for e in entries:
            det_base = float(np.linalg.det(np.array(e["g_phi"])))
            det_ind = float(np.linalg.det(np.array(e["g_induced_c1"])))
            cells = [_fmt_full(e["point"][v]) for v in system.variables]
            cells += [
                _fmt_full(x)
                for x in (
                    e["factor"],
                    det_base,
                    det_ind,
                    e["c1_c2_max_diff"],
                    e["factor_residual"],
                )
            ]
            cells.append("ok")
            lines.append(",".join(cells))
        _emit(args, "\n".join(lines) + "\n")
    elif args.format == "json":
        doc = {
            "schema_version": SCHEMA_VERSION,
            "command": "repchange",
            "system": system.name,
            "rep": rep,
            "intensive": system.intensive_name(rep),
            "weights_source": source,
            "beta": w.beta,
            "powers": dict(w.powers),
            "lambda": list(spec.lam),
            "chi": list(spec.chi),
            "xi": list(spec.xi),
            "c3_satisfied": spec.satisfies_c3(),
            "points": entries,
            "consistency_pass": all_pass,
        }
        _emit(args, json.dumps(doc, indent=2) + "\n")
    else:
        lines = [
            f"system: {system.name}",
            f"representation: {rep} (intensive {system.intensive_name(rep)})",
            f"weights ({source}): beta={_fmt9(w.beta)}, "
            + ", ".join(f"p_{v}={_fmt9(w.powers[v])}" for v in system.variables),
            f"admissibility (c3): {spec.satisfies_c3()}",
        ]
        for e in entries:
            coords = ", ".join(f"{v}={_fmt9(e['point'][v])}" for v in system.variables)
            lines.append(f"point ({coords}):")
            lines.append("  induced metric (first arrangement):")
            lines.extend(_matrix_lines(system.variables, np.array(e["g_induced_c1"]), "    "))
            lines.append("  induced metric (second arrangement):")
            lines.extend(_matrix_lines(system.variables, np.array(e["g_induced_c2"]), "    "))
            lines.append(f"  conformal factor: {_fmt9(e['factor'])}")
            lines.append(f"  factor residual (induced vs factor*base): {_fmt9(e['factor_residual'])}")
            lines.append(f"  c1 vs c2 max difference: {_fmt9(e['c1_c2_max_diff'])}")
            if "factor_beta1_bracket" in e:
                lines.append(
                    f"  degree-1 factor: bracket {_fmt9(e['factor_beta1_bracket'])}, "
                    f"potential-form {_fmt9(e['factor_beta1_potential'])} "
                    f"(agreement {_fmt9(e['beta1_agreement'])})"
                )
            if "factor_twovar" in e:
                lines.append(f"  two-variable factor: {_fmt9(e['factor_twovar'])}")
            rec = e["reconstruction"]
            lines.append(
                f"  reconstruction: off-proportionality {_fmt9(rec['offprop_vs_induced'])}, "
                f"scalar {_fmt9(rec['scalar_vs_base'])} vs factor {_fmt9(rec['factor_c4'])} "
                f"(deviation {_fmt9(rec['scalar_deviation'])})"
            )
            lines.append(f"  consistency: {'PASS' if e['consistency_pass'] else 'FAIL'}")
        _emit(args, "\n".join(lines) + "\n")

    return EXIT_OK if all_pass else EXIT_FAILED


# ---------------------------------------------------------------------------
# scan

SCAN_NUMERIC_COLUMNS = (
    "factor",
    "det_g_phi",
    "det_induced",
    "c1_c2_residual",
    "c4_residual",
)


def _parse_grid(chunk: str) -> Tuple[str, float, float, int]:
    if "=" not in chunk:
        raise GtdError(f"--grid expects var=lo:hi:count, got {chunk!r}")
    var, _, rest = chunk.partition("=")
    parts = rest.split(":")
    if len(parts) != 3:
        raise GtdError(f"--grid expects var=lo:hi:count, got {chunk!r}")
    try:
        lo, hi, count = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError:
        raise GtdError(f"--grid expects numeric lo:hi:count, got {chunk!r}") from None
    if count < 1:
        raise GtdError("--grid count must be >= 1")
    return var.strip(), lo, hi, count


def _scan_cell(system, spec, w, rep, pt) -> Tuple[list, str]:
    nan = float("nan")
    try:
        g1 = induced_metric_c1(system, spec, w, rep, pt)
        g2 = induced_metric_c2(system, spec, w, rep, pt)
        base = base_metric(system, spec, pt)
        c4 = conformal_factor_c4(system, spec, w, rep, pt)
    except SingularRepresentation as e:
        return [nan] * 5, f"singular:{e.intensive}"
    except DegenerateConformalFactor:
        return [nan] * 5, "degenerate-prefactor"
    except GtdError:
        return [nan] * 5, "domain-error"
    values = [
        c4.factor,
        base.det(),
        g1.det(),
        rel_max_diff(g1.matrix, g2.matrix),
        c4.residual,
    ]
    return values, "ok"


def _cmd_scan(args) -> int:
    system = _load_from_args(args)
    spec = _metric_spec(system, args)
    rep = args.rep or system.variables[0]
    w, _ = _resolve_weights(system, args)

    grids = [_parse_grid(chunk) for chunk in args.grid or []]
    if len(grids) != 2:
        raise GtdError("scan requires exactly two --grid var=lo:hi:count flags")
    for var, *_ in grids:
        if var not in system.variables:
            raise GtdError(f"--grid variable '{var}' is not one of {system.variables}")
    (v_slow, lo_s, hi_s, n_slow), (v_fast, lo_f, hi_f, n_fast) = grids
    if v_slow == v_fast:
        raise GtdError("scan grid variables must differ")

    fixed = {}
    for chunk in args.point or []:
        fixed.update(_parse_kv(chunk, "--point"))
    remaining = [v for v in system.variables if v not in (v_slow, v_fast)]
    missing = [v for v in remaining if v not in fixed]
    if missing:
        raise GtdError(f"scan needs --point values for the fixed variables {missing}")

    slow_vals = np.linspace(lo_s, hi_s, n_slow)
    fast_vals = np.linspace(lo_f, hi_f, n_fast)

    header = list(system.variables) + list(SCAN_NUMERIC_COLUMNS) + ["status"]
    rows = []
    for sv in slow_vals:
        for fv in fast_vals:
            pt = dict(fixed)
            pt[v_slow] = float(sv)
            pt[v_fast] = float(fv)
            values, status = _scan_cell(system, spec, w, rep, pt)
            cells = [_fmt_full(pt[v]) for v in system.variables]
            cells += [_fmt_full(v) for v in values]
            cells.append(status)
            rows.append(cells)

    if args.format == "json":
        doc = {
            "schema_version": SCHEMA_VERSION,
            "command": "scan",
            "system": system.name,
            "rep": rep,
            "header": header,
            "rows": [
                [cell if i == len(header) - 1 else _json_cell(cell) for i, cell in enumerate(row)]
                for row in rows
            ],
        }
        _emit(args, json.dumps(doc, indent=2) + "\n")
    else:
        lines = [",".join(header)]
        lines.extend(",".join(row) for row in rows)
        _emit(args, "\n".join(lines) + "\n")
    return EXIT_OK


def _json_cell(cell: str):
    v = float(cell)
    return None if v != v else v  # NaN -> null for strict JSON


# ---------------------------------------------------------------------------
# parser assembly


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gtdkit",
        description=(
            "Detect quasi-homogeneity weights of thermodynamic potentials, audit "
            "the generalized Euler identity, and build/cross-check the conformal "
            "metric family under changes of representation."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    # parent parsers are built fresh per subcommand: argparse shares
    # parent actions by reference, so per-subcommand defaults would
    # otherwise leak across commands
    def src():
        p = argparse.ArgumentParser(add_help=False)
        g = p.add_mutually_exclusive_group()
        g.add_argument("--system", help="built-in system: kerr-newman | rn")
        g.add_argument("--file", help="path to a system JSON file")
        p.add_argument(
            "--param",
            action="append",
            metavar="K=V",
            help="system parameter override (e.g. d=5 for rn); repeatable",
        )
        return p

    def out(default_format="text"):
        p = argparse.ArgumentParser(add_help=False)
        p.add_argument("--format", choices=("text", "json", "csv"), default=default_format)
        p.add_argument("--out", metavar="PATH", help="write output to PATH instead of stdout")
        return p

    def sampling(default_samples=None):
        p = argparse.ArgumentParser(add_help=False)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--samples", type=int, default=default_samples)
        return p

    def weights():
        p = argparse.ArgumentParser(add_help=False)
        p.add_argument("--beta", type=float, default=None, help="degree gauge for the weights")
        p.add_argument(
            "--powers", metavar="K=V,...", help="explicit powers p_a, e.g. S=0.5,J=0.5,Q=1"
        )
        return p

    def spec_flags():
        p = argparse.ArgumentParser(add_help=False)
        p.add_argument("--chi", choices=("delta", "eta"), default="delta")
        p.add_argument(
            "--lambda",
            dest="lam",
            metavar="V1,...,VN",
            help="Lambda diagonal, system variable order",
        )
        p.add_argument("--xi", metavar="V1,...,VN", help="xi diagonal, system variable order")
        return p

    def points():
        p = argparse.ArgumentParser(add_help=False)
        p.add_argument(
            "--point",
            action="append",
            metavar="K=V,...",
            help="evaluation point, e.g. S=1,Q=0.5; repeatable",
        )
        return p

    p = sub.add_parser(
        "analyze",
        parents=[src(), out(), sampling(default_samples=64)],
        help="detect quasi-homogeneity weights",
    )
    p.set_defaults(func=_cmd_analyze)

    p = sub.add_parser(
        "euler",
        parents=[src(), out(), sampling(), weights(), points()],
        help="audit the generalized Euler identity",
    )
    p.set_defaults(func=_cmd_euler)

    p = sub.add_parser(
        "metric",
        parents=[src(), out(), spec_flags(), points()],
        help="base metric at given points",
    )
    p.set_defaults(func=_cmd_metric)

    p = sub.add_parser(
        "repchange",
        parents=[src(), out(), sampling(), weights(), spec_flags(), points()],
        help="induced metric and conformal factors under a representation change",
    )
    p.add_argument("--rep", help="representation variable (default: first)")
    p.set_defaults(func=_cmd_repchange)

    p = sub.add_parser(
        "scan",
        parents=[src(), out(default_format="csv"), sampling(), weights(), spec_flags(), points()],
        help="grid scan of conformal factor, determinants and residuals",
    )
    p.add_argument("--rep", help="representation variable (default: first)")
    p.add_argument(
        "--grid",
        action="append",
        metavar="VAR=LO:HI:N",
        help="grid axis (exactly two); first flag is the slow/outer axis",
    )
    p.set_defaults(func=_cmd_scan)

    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code) if e.code else 0
    try:
        return args.func(args)
    except SingularRepresentation as e:
        print(f"error: {e}", file=_sys.stderr)
        return EXIT_SINGULAR
    except DegenerateConformalFactor as e:
        print(f"error: {e}", file=_sys.stderr)
        return EXIT_SINGULAR
    except NoHomogeneityError as e:
        print(f"error: {e}", file=_sys.stderr)
        return EXIT_NO_HOMOGENEITY
    except GtdError as e:
        print(f"error: {e}", file=_sys.stderr)
        return EXIT_INPUT
    except (OSError, ValueError, json.JSONDecodeError) as e:
        print(f"error: {e}", file=_sys.stderr)
        return EXIT_INPUT


def entry() -> None:
    _sys.exit(main())


if __name__ == "__main__":
    entry()

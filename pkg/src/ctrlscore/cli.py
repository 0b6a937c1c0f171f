"""Command-line front end: scoring runs, baselines, certificates, benchmarks,
and oracle self-verification.

Exit codes: 0 success (score runs reached epsilon-stationarity), 1 error,
2 iteration cap hit, 3 uniqueness certificate unknown (check command).
"""

import argparse
import json
import math
import sys
import time
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from .centrality import CentralityReport, build_basis, rank_report
from .errors import CtrlscoreError
from .gramian import gramian_basis_finite, gramian_basis_infinite, solve_lyapunov
from .netsys import (
    NetworkSystem,
    _parse_edge_lines,
    build_laplacian_dynamics,
    generate_random_network,
    horizon_from_json,
    load_edge_list,
    load_matrix_json,
    make_system,
    uniqueness_certificate,
)
from .objective import ObjectiveKind
from .optimizer import OptimizerConfig, solve
from .oracle import (
    finite_difference_gradient,
    grid_search_min,
    gramian_quadrature,
    projection_qp_oracle,
)
from .simplex import project

_OBJECTIVES = {"vcs": ["vcs"], "aecs": ["aecs"], "both": ["vcs", "aecs"]}


def _read_text(path):
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise CtrlscoreError(f"cannot read input file {path}: {exc}") from None


def _load_system(args) -> NetworkSystem:
    text = _read_text(args.input)
    if getattr(args, "laplacian", False):
        edges = [(s, d, w) for _, s, d, w in _parse_edge_lines(text)]
        n = max(max(s, d) for s, d, _ in edges)
        return build_laplacian_dynamics(edges, n)
    if text.lstrip().startswith("{"):
        return load_matrix_json(text)
    return load_edge_list(text, directed=not getattr(args, "undirected", False))


def _optimizer_config(args) -> OptimizerConfig:
    return OptimizerConfig(
        epsilon=args.eps,
        sigma=args.sigma,
        rho=args.rho,
        alpha0=args.alpha0,
        max_iters=args.max_iters,
    )


def _write_report(report: CentralityReport, args):
    out = args.output or f"report.{args.format}"
    if args.format == "json":
        doc = report.to_json_dict()
        doc["seed"] = args.seed
        doc["timestamp"] = datetime.now(timezone.utc).isoformat()
        Path(out).write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
    else:
        Path(out).write_text(report.to_csv())
    return out


def _print_top(report: CentralityReport, limit: int = 10):
    for measure, ranking in report.rankings.items():
        values = report.measures[measure]
        print(f"{measure} ranking (top {min(limit, report.n)}):")
        for rank, node in enumerate(ranking[:limit], start=1):
            label = report.node_labels[node - 1]
            print(f"  {rank:2d}. node {node} ({label})  {values[node - 1]:.6g}")


def _score_exit_code(report: CentralityReport) -> int:
    if report.diagnostics.get("errors"):
        return 1
    for diag in report.diagnostics.get("per_measure", {}).values():
        if diag.get("stop_reason") == "max_iters":
            return 2
    return 0


def cmd_score(args) -> int:
    system = _load_system(args)
    horizon = horizon_from_json(args.horizon)
    report = rank_report(
        system,
        _OBJECTIVES[args.objective],
        horizon,
        cfg=_optimizer_config(args),
        dual=args.dual,
    )
    out = _write_report(report, args)
    if args.trace and report.traces:
        trace_path = Path(args.trace)
        for measure, trace in report.traces.items():
            path = (
                trace_path
                if len(report.traces) == 1
                else trace_path.with_suffix(f".{measure}{trace_path.suffix}")
            )
            trace.write_jsonl(path)
    _print_top(report)
    print(f"report written to {out}")
    for measure, message in report.diagnostics.get("errors", {}).items():
        print(f"error [{measure}]: {message}", file=sys.stderr)
    return _score_exit_code(report)


def cmd_baselines(args) -> int:
    system = _load_system(args)
    horizon = horizon_from_json(args.horizon)
    measures = [m.strip() for m in args.measures.split(",") if m.strip()]
    for m in measures:
        if m not in ("vce", "ace", "cc"):
            raise CtrlscoreError(
                f"baseline measure {m!r} not available; choose from vce,ace"
            )
    report = rank_report(system, measures, horizon, rank_tol=args.rank_tol)
    out = _write_report(report, args)
    _print_top(report)
    print(f"report written to {out}")
    return 1 if report.diagnostics.get("errors") else 0


def cmd_check(args) -> int:
    system = _load_system(args)
    horizon = horizon_from_json(args.horizon)
    certificate = uniqueness_certificate(system, horizon)
    print(json.dumps(certificate.to_dict(), indent=2, sort_keys=True))
    return 0 if certificate.certified else 3


def cmd_bench(args) -> int:
    sizes = []
    for token in args.sizes.split(","):
        token = token.strip()
        if token:
            n = int(token)
            if n < 1:
                raise CtrlscoreError(f"benchmark size must be positive, got {n}")
            sizes.append(n)
    if not sizes:
        raise CtrlscoreError("no benchmark sizes given")
    kind = (
        ObjectiveKind.VOLUMETRIC if args.objective == "vcs" else ObjectiveKind.AVERAGE_ENERGY
    )
    rows = []
    for n in sizes:
        system = generate_random_network(n, args.density, args.seed, -float(n))
        t0 = time.perf_counter()
        basis = (
            gramian_basis_infinite(system, mode=args.mode)
            if math.isinf(horizon_from_json(args.horizon))
            else gramian_basis_finite(system, horizon_from_json(args.horizon), mode=args.mode)
        )
        t1 = time.perf_counter()
        _, trace = solve(kind, basis, OptimizerConfig(epsilon=args.eps))
        t2 = time.perf_counter()
        iters = max(trace.iterations, 1)
        rows.append(
            {
                "n": n,
                "basis_seconds": t1 - t0,
                "solve_seconds": t2 - t1,
                "iterations": trace.iterations,
                "per_iteration_seconds": (t2 - t1) / iters,
                "stop_reason": trace.stop_reason.value,
                "mode": basis.mode,
            }
        )
    header = list(rows[0].keys())
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(str(row[k]) for k in header))
    table = "\n".join(lines) + "\n"
    print(table, end="")
    if args.output:
        Path(args.output).write_text(table)
    return 0


# ---------------------------------------------------------------------------
# oracle self-verification


def _interior_point(n: int, rng) -> np.ndarray:
    raw = 0.2 + rng.uniform(0.0, 1.0, n)
    return raw / raw.sum()


def _check_gradient(seed: int):
    worst = 0.0
    rng = np.random.default_rng(seed)
    for k in range(3):
        system = generate_random_network(6, 0.5, seed + k, -6.0)
        basis = gramian_basis_infinite(system, mode="explicit")
        p = _interior_point(6, rng)
        for kind in ObjectiveKind:
            from .objective import gradient

            analytic = gradient(kind, basis, p)
            approx = finite_difference_gradient(kind, basis, p, h=1e-5)
            worst = max(
                worst,
                float(np.linalg.norm(analytic - approx) / np.linalg.norm(analytic)),
            )
    return worst, 1e-6


def _check_quadrature_infinite(seed: int):
    system = generate_random_network(4, 0.6, seed, -4.0)
    eig = np.linalg.eigvals(system.A)
    T = 10.0 / abs(eig.real.max())
    Q = np.zeros((4, 4))
    Q[0, 0] = 1.0
    W_exact = solve_lyapunov(system.A, Q)
    W_quad = gramian_quadrature(system.A, 0, T, steps=2000)
    err = float(np.linalg.norm(W_quad - W_exact) / np.linalg.norm(W_exact))
    return err, 1e-5


def _check_quadrature_finite(seed: int):
    system = generate_random_network(4, 0.6, seed + 1, -4.0)
    basis = gramian_basis_finite(system, 1.5, mode="explicit")
    worst = 0.0
    for i in range(4):
        W_quad = gramian_quadrature(system.A, i, 1.5, steps=2000)
        worst = max(
            worst,
            float(
                np.linalg.norm(W_quad - basis.matrices[i])
                / np.linalg.norm(basis.matrices[i])
            ),
        )
    return worst, 1e-6


def _check_quadrature_rotation(seed: int):
    A = np.array([[0.0, 1.0], [-1.0, 0.0]])
    worst = 0.0
    for i in range(2):
        W = gramian_quadrature(A, i, math.pi, steps=2000)
        worst = max(worst, float(np.abs(W - (math.pi / 2.0) * np.eye(2)).max()))
    return worst, 1e-8


def _check_projection(seed: int):
    rng = np.random.default_rng(seed)
    worst = 0.0
    for n in range(2, 7):
        for _ in range(80):
            q = rng.normal(0.0, 2.0, n)
            worst = max(
                worst, float(np.abs(project(q).p - projection_qp_oracle(q)).max())
            )
    return worst, 1e-8


def _check_gridsearch(seed: int):
    system = make_system([[-1.0, 0.0], [1.0, -1.0]])
    basis = gramian_basis_infinite(system, mode="explicit")
    point, _ = solve(
        ObjectiveKind.VOLUMETRIC, basis, OptimizerConfig(epsilon=1e-6)
    )
    grid_p, _ = grid_search_min(ObjectiveKind.VOLUMETRIC, basis, resolution=2000)
    return float(np.abs(point.p - grid_p).max()), 1e-3


_ORACLE_CHECKS = {
    "gradient": [("gradient_fd", _check_gradient)],
    "quadrature": [
        ("quadrature_infinite", _check_quadrature_infinite),
        ("quadrature_finite", _check_quadrature_finite),
        ("quadrature_rotation", _check_quadrature_rotation),
    ],
    "projection": [("projection_qp", _check_projection)],
    "gridsearch": [("grid_search", _check_gridsearch)],
}


def cmd_oracle_verify(args) -> int:
    groups = [g.strip() for g in args.checks.split(",") if g.strip()]
    for g in groups:
        if g not in _ORACLE_CHECKS:
            raise CtrlscoreError(
                f"unknown check {g!r}; available: {', '.join(_ORACLE_CHECKS)}"
            )
    all_ok = True
    print(f"{'check':<22} {'error':>12} {'tolerance':>12}  result")
    for group in groups:
        for name, fn in _ORACLE_CHECKS[group]:
            err, tol = fn(args.seed)
            if args.tol is not None:
                tol = args.tol
            ok = err <= tol
            all_ok &= ok
            print(f"{name:<22} {err:>12.3e} {tol:>12.3e}  {'PASS' if ok else 'FAIL'}")
    return 0 if all_ok else 1


# ---------------------------------------------------------------------------
# argument parsing


def _add_input_flags(sub):
    sub.add_argument("--input", required=True, help="edge list or matrix JSON file")
    sub.add_argument(
        "--laplacian",
        action="store_true",
        help="treat the input as an undirected weighted graph and use A = -L",
    )
    sub.add_argument(
        "--undirected",
        action="store_true",
        help="mirror every edge of an edge-list input",
    )
    sub.add_argument("--horizon", default="inf", help="'inf' or a positive time T")


def _add_report_flags(sub):
    sub.add_argument("--format", choices=("json", "csv"), default="json")
    sub.add_argument("--output", default=None, help="report path (default report.<fmt>)")
    sub.add_argument("--seed", type=int, default=0)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ctrlscore",
        description="Controllability scores (VCS/AECS) and baseline centralities "
        "for linear network systems.",
        epilog="The CTRLSCORE_THREADS environment variable caps the number of "
        "threads used while building an explicit Gramian basis (default 1).",
    )
    subs = parser.add_subparsers(dest="command", required=True)

    score = subs.add_parser("score", help="compute VCS and/or AECS")
    _add_input_flags(score)
    score.add_argument("--objective", choices=tuple(_OBJECTIVES), default="vcs")
    score.add_argument("--eps", type=float, default=1e-4)
    score.add_argument("--sigma", type=float, default=1e-4)
    score.add_argument("--rho", type=float, default=0.5)
    score.add_argument("--alpha0", type=float, default=1.0)
    score.add_argument("--max-iters", type=int, default=100_000)
    score.add_argument(
        "--dual", action="store_true", help="score the transposed system (observability)"
    )
    score.add_argument("--trace", default=None, help="write iterate trace as JSON lines")
    _add_report_flags(score)
    score.set_defaults(func=cmd_score)

    base = subs.add_parser("baselines", help="compute VCE/ACE baselines")
    _add_input_flags(base)
    base.add_argument("--measures", default="vce,ace", help="comma list from vce,ace")
    base.add_argument("--rank-tol", type=float, default=1e-10)
    _add_report_flags(base)
    base.set_defaults(func=cmd_baselines)

    check = subs.add_parser("check", help="print the uniqueness certificate")
    _add_input_flags(check)
    check.set_defaults(func=cmd_check)

    bench = subs.add_parser("bench", help="timing sweep over system sizes")
    bench.add_argument("--sizes", default="200,400", help="comma list of sizes")
    bench.add_argument("--seed", type=int, default=0)
    bench.add_argument("--density", type=float, default=1.0)
    bench.add_argument("--eps", type=float, default=1e-4)
    bench.add_argument("--horizon", default="inf")
    bench.add_argument("--objective", choices=("vcs", "aecs"), default="vcs")
    bench.add_argument("--mode", choices=("auto", "explicit", "adjoint"), default="auto")
    bench.add_argument("--output", default=None, help="also write the CSV here")
    bench.set_defaults(func=cmd_bench)

    verify = subs.add_parser("oracle-verify", help="run the oracle cross-check suite")
    verify.add_argument("--seed", type=int, default=1234)
    verify.add_argument("--tol", type=float, default=None, help="override all tolerances")
    verify.add_argument(
        "--checks",
        default=",".join(_ORACLE_CHECKS),
        help=f"comma list from {','.join(_ORACLE_CHECKS)}",
    )
    verify.set_defaults(func=cmd_oracle_verify)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (CtrlscoreError, ValueError, OverflowError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())

"""Command line interface: ``s2net <verb> ...``.

Exit codes: 0 success, 1 validation failure, 2 solver failure, 3 I/O error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import exact, formats
from .complex import ComplexError, coboundary_matrix, validate_complex
from .geometry import GeometryError
from .network import (InvalidDevice, SolverError, relative_difference, solve_coboundary_based,
                      solve_cycle_based, tellegen_check)
from .tag import build_dual_graph, build_tag, component_labels, complex_components

EXIT_OK, EXIT_INVALID, EXIT_SOLVER, EXIT_IO = 0, 1, 2, 3
CROSS_CHECK_TOL = 1e-9

log = logging.getLogger("s2net")


def _emit(args, payload: dict, text: str):
    if args.json:
        print(json.dumps(payload, indent=2, sort_keys=True, default=str))
    else:
        print(text)


def _load(path):
    return formats.parse(path)


def _dual(cx, fuse: bool, seed: int = 0):
    tag = build_tag(cx)
    labels = component_labels(tag)
    parts = int(complex_components(cx).max()) + 1 if cx.n_triangles else 0
    dual = build_dual_graph(cx, labels, fuse_external=fuse and parts > 1, seed=seed)
    return tag, labels, dual, parts


def cmd_validate(args) -> int:
    cx, _ = _load(args.file)
    report = validate_complex(cx, tolerance=args.tol)
    payload = {"file": str(args.file), "triangles": cx.n_triangles, "edges": cx.n_edges,
               "vertices": cx.n_vertices, **report.as_dict()}
    lines = [f"{args.file}: {cx.n_vertices} vertices, {cx.n_edges} edges, {cx.n_triangles} triangles"]
    lines += [f"  {v.kind}: {v.message}" for v in report.violations]
    lines.append("valid" if report.ok else f"invalid ({len(report.violations)} violations)")
    _emit(args, payload, "\n".join(lines))
    return EXIT_OK if report.ok else EXIT_INVALID


def cmd_dual(args) -> int:
    cx, _ = _load(args.file)
    tag, labels, dual, parts = _dual(cx, args.fuse_external)
    inc = dual.incidence_matrix().to_dense()
    if args.dot:
        Path(args.dot).write_text(formats.dual_to_dot(dual))
    if args.tag_dot:
        Path(args.tag_dot).write_text(formats.tag_to_dot(tag, list(cx.triangle_labels)))
    n_tag = int(labels.max()) + 1 if len(labels) else 0
    payload = {"nodes": dual.n_nodes, "edges": dual.n_edges, "tag_components": n_tag,
               "complex_components": parts, "self_loops": [cx.triangle_labels[t] for t in dual.self_loops],
               "external_node": dual.external, "incidence": inc.tolist(),
               "columns": list(cx.triangle_labels)}
    lines = [f"{dual.n_nodes} nodes, {dual.n_edges} edges"]
    lines.append(f"tag components: {n_tag}; complex components: {parts}")
    lines.append("incidence (rows V1..Vk, columns " + " ".join(cx.triangle_labels) + "):")
    lines += ["  V%-3d %s" % (i + 1, " ".join(f"{x:+d}" if x else " 0" for x in row)) for i, row in enumerate(inc)]
    _emit(args, payload, "\n".join(lines))
    return EXIT_OK


def cmd_solve(args) -> int:
    cx, device = _load(args.file)
    _, _, dual, _ = _dual(cx, True)
    A2 = coboundary_matrix(cx, 2)
    inc = dual.incidence_matrix()
    sols = {}
    if args.method in ("cycle", "both"):
        sols["cycle"] = solve_cycle_based(dual, device, args.tol)
    if args.method in ("coboundary", "both"):
        sols["coboundary"] = solve_coboundary_based(cx, device, args.tol)
    main = sols.get("cycle") or sols["coboundary"]
    diag = tellegen_check(main, A2, inc)
    diag["method"] = args.method
    code = EXIT_OK
    if args.method == "both":
        dphi = relative_difference(sols["cycle"].flux, sols["coboundary"].flux)
        dm = relative_difference(sols["cycle"].mmf_adjusted, sols["coboundary"].mmf_adjusted)
        diag["cross_check_flux"] = dphi
        diag["cross_check_mmf"] = dm
        diag["cross_check"] = "pass" if max(dphi, dm) <= CROSS_CHECK_TOL else "fail"
        if diag["cross_check"] == "fail":
            code = EXIT_SOLVER
    if diag["flagged"]:
        code = EXIT_SOLVER
    text = formats.solution_csv(cx, main, diag)
    if args.csv:
        Path(args.csv).write_text(text)
    payload = {"triangles": list(cx.triangle_labels), "flux": main.flux.tolist(),
               "mmf_adjusted": main.mmf_adjusted.tolist(), "mmf_raw": main.mmf_raw.tolist(),
               "diagnostics": diag}
    _emit(args, payload, text.rstrip("\n"))
    return code


def cmd_verify(args) -> int:
    cx, _ = _load(args.file)
    _, _, dual, parts = _dual(cx, True)
    A1, A2 = coboundary_matrix(cx, 1), coboundary_matrix(cx, 2)
    inc = dual.incidence_matrix()
    checks = {}
    checks["chain_complex"] = int(np.count_nonzero((A1.to_scipy() @ A2.to_scipy()).toarray())) == 0
    checks["orthogonality"] = exact.integer_orthogonality_violations(inc, A2) == 0
    cert = exact.verify_matroid_duality(A2, inc, seed=args.seed)
    checks["rank_sum"] = cert.rank_a2 + cert.rank_incidence == cx.n_triangles
    checks["matroid_duality"] = cert.valid
    basis = exact.cycle_space_basis(A2)
    checks["row_space_equals_cycle_space"] = exact.same_row_space(basis, exact.RationalMatrix(inc.to_dense())) \
        if basis.shape[0] or inc.nnz else True
    payload = {"duality": cert.as_dict(), "cycle_space_dimension": basis.shape[0]}
    if basis.shape[0]:
        rep, _ = exact.standard_representative(basis)
        mode = "exhaustive" if rep.ncols <= 12 else "sampled"
        tu = exact.total_unimodularity_check(rep, mode, seed=args.seed)
        checks["total_unimodularity"] = tu.is_tu
        payload["tu"] = tu.as_dict()
        if cx.n_triangles <= 20:
            vecs = exact.minimal_support_vectors(basis)
            checks["regularity"] = all(exact.is_signed_unit_multiple(v) for v in vecs)
            payload["minimal_supports"] = len(vecs)
    payload["checks"] = checks
    ok = all(checks.values())
    lines = [f"{name}: {'pass' if v else 'FAIL'}" for name, v in checks.items()]
    lines.append(f"rank(A2)={cert.rank_a2} rank(incidence)={cert.rank_incidence} |S|={cx.n_triangles} "
                 f"({cert.mode}, {cert.checked} subsets)")
    _emit(args, payload, "\n".join(lines))
    return EXIT_OK if ok else EXIT_INVALID


def cmd_dual_analyze(args) -> int:
    from .dual import equivalent_inverse_reluctance

    cx, device = _load(args.file)
    _, _, dual, _ = _dual(cx, True)
    try:
        t = cx.triangle_index(args.triangle)
    except ComplexError:
        if args.triangle.isdigit() and int(args.triangle) < cx.n_triangles:
            t = int(args.triangle)
        else:
            raise
    res = equivalent_inverse_reluctance(dual, device, t)
    payload = {"triangle": cx.triangle_labels[t], **res.as_dict()}
    text = "\n".join([f"triangle {cx.triangle_labels[t]}",
                      f"  direct solve      g = {res.direct:.15g}",
                      f"  tree / 2-tree     g = {float(res.tree):.15g}  ({res.tree}, {res.tree_mode})",
                      f"  matrix-tree       g = {float(res.matrix_tree):.15g}  ({res.matrix_tree})",
                      f"  relative spread     {res.spread:.3e}"] + ([f"  note: {res.note}"] if res.note else []))
    _emit(args, payload, text)
    return EXIT_OK if res.spread <= 1e-12 else EXIT_SOLVER


def cmd_bench(args) -> int:
    from .bench import bench_csv, loglog_slope, time_family

    sizes = [int(s) for s in args.sizes.split(",") if s.strip()]
    rows = time_family(args.family, sizes, args.repeats)
    slope = loglog_slope(rows) if len(rows) >= 2 else float("nan")
    text = bench_csv(rows)
    if args.csv:
        Path(args.csv).write_text(text)
    if args.plot:
        from .plotting import plot_bench

        plot_bench(rows, args.plot, slope)
    payload = {"family": args.family, "rows": [r.as_dict() for r in rows], "loglog_slope": slope}
    _emit(args, payload, text + f"# loglog_slope={slope:.4f}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="machine-readable output")
    common.add_argument("-v", "--verbose", action="store_true")
    p = argparse.ArgumentParser(prog="s2net", description=__doc__,
                                formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = p.add_subparsers(dest="verb", required=True)

    s = sub.add_parser("validate", parents=[common], help="check a complex")
    s.add_argument("file")
    s.add_argument("--tol", type=float, default=1e-9)
    s.set_defaults(func=cmd_validate)

    s = sub.add_parser("dual", parents=[common], help="build the tag and region graphs")
    s.add_argument("file")
    s.add_argument("--dot", help="write the region graph as DOT")
    s.add_argument("--tag-dot", help="write the tag graph as DOT")
    s.add_argument("--fuse-external", action="store_true", help="merge unbounded regions of separate pieces")
    s.set_defaults(func=cmd_dual)

    s = sub.add_parser("solve", parents=[common], help="solve the magnetic network")
    s.add_argument("file")
    s.add_argument("--method", choices=("cycle", "coboundary", "both"), default="cycle")
    s.add_argument("--tol", type=float, default=1e-12)
    s.add_argument("--csv", help="write per-triangle results")
    s.set_defaults(func=cmd_solve)

    s = sub.add_parser("verify", parents=[common], help="exact rank, duality and regularity checks")
    s.add_argument("file")
    s.add_argument("--seed", type=int, default=0)
    s.set_defaults(func=cmd_verify)

    s = sub.add_parser("dual-analyze", parents=[common], help="equivalent inverse reluctance of a triangle")
    s.add_argument("file")
    s.add_argument("--triangle", required=True, help="triangle id")
    s.set_defaults(func=cmd_dual_analyze)

    s = sub.add_parser("bench", parents=[common], help="time construction on a generated family")
    s.add_argument("--family", choices=("stacked-cubes", "tet-chain"), default="stacked-cubes")
    s.add_argument("--sizes", default="1,10,100")
    s.add_argument("--repeats", type=int, default=5)
    s.add_argument("--csv", help="write the timing table")
    s.add_argument("--plot", help="write a log-log figure (PNG)")
    s.set_defaults(func=cmd_bench)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (FileNotFoundError, PermissionError, IsADirectoryError, UnicodeDecodeError) as exc:
        code, msg = EXIT_IO, f"cannot read input: {exc}"
    except formats.ParseError as exc:
        code, msg = EXIT_INVALID, f"parse error: {exc}"
    except (ComplexError, GeometryError, InvalidDevice) as exc:
        code, msg = EXIT_INVALID, str(exc)
    except (SolverError, ArithmeticError) as exc:
        code, msg = EXIT_SOLVER, f"solver failure: {exc}"
    if args.json:
        print(json.dumps({"error": msg, "exit_code": code}))
    print(f"s2net: {msg}", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())

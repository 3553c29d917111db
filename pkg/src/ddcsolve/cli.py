"""
Command line front end.

Subcommands:

- ``solve``: solve one model by VFI, Newton, or the hybrid, with an
  optional per-iteration trace CSV and solution JSON.
- ``bench``: time Newton steps for both formulations over a size
  sweep and write the comparison CSV.
- ``mpec-stats``: report constraint counts and Jacobian sparsity of
  the W and EV equality-constraint systems.
- ``diagnose-bus``: solve a replacement model and check the
  regenerative identity EV_2(x) = EV_1(0) used by the reduced solver.

Exit codes: 0 on success (solver converged where applicable), 2 when
a solver failed to converge, 1 on invalid input.

Whenever a subcommand writes a CSV or diagnostics report it also
renders a matplotlib figure next to it (same name, .png); pass
--no-figure to skip that.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path
from typing import Optional

from .bench import bench_newton
from .core import ModelSpec, load_model, validate_model
from .models import (
    BUS_VARIANTS,
    BusModelConfig,
    StorableGoodsConfig,
    build_bus_model,
    build_storable_goods_model,
    bus_ev2_diagnostics,
)
from .mpec import compare_systems
from .solvers import FixedCount, SolveOptions, poly_solve, vfi

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_NOT_CONVERGED = 2


class _Parser(argparse.ArgumentParser):
    # argparse exits with status 2 on bad arguments; our contract
    # reserves 2 for non-convergence, so remap usage errors to 1
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_INVALID)


def _build_spec(model: str, n_states: Optional[int], variant: str) -> ModelSpec:
    if model.startswith("json:"):
        return load_model(model[len("json:"):])
    if model == "bus":
        cfg = BusModelConfig(variant=variant)
        if n_states is not None:
            cfg = replace(cfg, n_states=n_states)
        return build_bus_model(cfg)
    if model == "storable":
        cfg = StorableGoodsConfig()
        if n_states is not None:
            if n_states % cfg.price_levels != 0:
                raise ValueError(
                    f"storable state count must be a multiple of "
                    f"{cfg.price_levels}, got {n_states}"
                )
            cfg = replace(cfg, inventory_levels=n_states // cfg.price_levels)
        return build_storable_goods_model(cfg)
    raise ValueError(f"unknown model {model!r}; use bus, storable, or json:PATH")


def _figure_path(out_path) -> Path:
    return Path(out_path).with_suffix(".png")


def _cmd_solve(args) -> int:
    spec = _build_spec(args.model, args.n_states, args.variant)
    report = validate_model(spec)
    if not report.ok:
        for violation in report.violations:
            print(f"invalid model: {violation}", file=sys.stderr)
        return EXIT_INVALID
    opts = SolveOptions(
        tol_fixed_point=args.tol,
        tol_residual=10 * args.tol,
        max_iters=args.max_iters,
        record_trace=args.trace is not None,
    )
    if args.method == "vfi":
        result = vfi(spec, args.formulation, opts=opts)
    elif args.method == "newton":
        result = poly_solve(
            spec, args.formulation, replace(opts, switch_rule=FixedCount(0))
        )
    else:
        result = poly_solve(spec, args.formulation, opts)

    if args.trace is not None:
        result.trace.write_csv(args.trace)
        print(f"trace written to {args.trace}")
        if not args.no_figure:
            from .plots import render_trace_figure

            fig = render_trace_figure(
                result.trace,
                _figure_path(args.trace),
                title=f"{args.model} |X|={spec.n_states}, {result.formulation} path",
            )
            print(f"figure written to {fig}")
    if args.out is not None:
        doc = {
            "model": args.model,
            "formulation": result.formulation,
            "method": args.method,
            "converged": result.converged,
            "n_iterations": result.n_iterations,
            "final_sup_diff": result.final_sup_diff,
            "final_residual": result.final_residual,
            "solution": result.solution.tolist(),
            "ccp": result.ccp.tolist(),
        }
        Path(args.out).write_text(json.dumps(doc))
        print(f"solution written to {args.out}")
    status = "converged" if result.converged else "did NOT converge"
    print(
        f"{result.formulation} {args.method} {status} after "
        f"{result.n_iterations} iterations "
        f"(sup_diff={result.final_sup_diff:.3e}, "
        f"residual={result.final_residual:.3e})"
    )
    return EXIT_OK if result.converged else EXIT_NOT_CONVERGED


def _cmd_bench(args) -> int:
    sizes = [int(s) for s in args.sizes.split(",") if s.strip()]
    report = bench_newton(args.model, sizes, reps=args.reps)
    report.write_csv(args.out)
    print(f"benchmark written to {args.out}")
    if not args.no_figure:
        from .plots import render_bench_figure

        fig = render_bench_figure(report, _figure_path(args.out))
        print(f"figure written to {fig}")
    for row in report.rows:
        print(
            f"{row.model} |X|={row.n_states}: ratio_total={row.ratio_total:.2f} "
            f"ratio_step={row.ratio_step:.2f}"
        )
    return EXIT_OK


def _cmd_mpec_stats(args) -> int:
    spec = _build_spec(args.model, args.n_states, args.variant)
    comparison = compare_systems(spec)
    doc = comparison.to_json_dict()
    if args.out is not None:
        Path(args.out).write_text(json.dumps(doc))
        print(f"report written to {args.out}")
    print(json.dumps(doc, indent=2))
    return EXIT_OK


def _cmd_diagnose_bus(args) -> int:
    cfg = BusModelConfig(variant=args.variant, n_states=args.n_states)
    spec = build_bus_model(cfg)
    # tolerances sized to the family's value scale under its default
    # near-unit discounting (see the solve subcommand help)
    result = poly_solve(
        spec, "EV", SolveOptions(tol_fixed_point=1e-9, tol_residual=1e-8)
    )
    if not result.converged:
        print("bus model solve did not converge", file=sys.stderr)
        return EXIT_NOT_CONVERGED
    diag = bus_ev2_diagnostics(spec, result.solution)
    doc = {
        "variant": args.variant,
        "n_states": args.n_states,
        **diag.to_json_dict(),
    }
    if args.out is not None:
        Path(args.out).write_text(json.dumps(doc))
        print(f"diagnostics written to {args.out}")
        if not args.no_figure:
            from .plots import render_bus_figure

            fig = render_bus_figure(
                result.solution,
                _figure_path(args.out),
                title=f"replacement model, {args.variant}, |X|={args.n_states}",
            )
            print(f"figure written to {fig}")
    print(json.dumps(doc, indent=2))
    return EXIT_OK


def _add_model_arguments(parser, with_variant=True):
    parser.add_argument(
        "--model",
        required=True,
        help="bus, storable, or json:PATH to a model spec document",
    )
    parser.add_argument(
        "--n-states",
        type=int,
        default=None,
        help="state-space size for the built-in families",
    )
    if with_variant:
        parser.add_argument(
            "--variant",
            choices=BUS_VARIANTS,
            default="corrected",
            help="replacement-transition variant of the bus family",
        )


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="ddcsolve",
        description="Solve and benchmark discrete dynamic discrete choice models.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_solve = sub.add_parser(
        "solve",
        help="solve one model",
        description=(
            "Solve a model with VFI, pure Newton, or the hybrid "
            "(VFI warm-up, then Newton).  --tol sets the sup-norm "
            "tolerance on the iterate change; the residual tolerance is "
            "10x that.  The default 1e-9 suits the built-in families, "
            "whose value scales under near-unit discounting leave "
            "absolute residuals no smaller than about 1e-12 in double "
            "precision; tighten it for lower-scale models.  A Newton "
            "iteration is counted as everything the step needs except "
            "model construction: operator evaluation, choice "
            "probabilities, derivative assembly, and the linear solve."
        ),
    )
    _add_model_arguments(p_solve)
    p_solve.add_argument("--formulation", choices=["w", "ev"], default="w")
    p_solve.add_argument("--method", choices=["vfi", "newton", "hybrid"],
                         default="hybrid")
    p_solve.add_argument("--tol", type=float, default=1e-9)
    p_solve.add_argument("--max-iters", type=int, default=1000)
    p_solve.add_argument("--trace", default=None, metavar="PATH.csv",
                         help="write the per-iteration trace CSV here")
    p_solve.add_argument("--out", default=None, metavar="PATH.json",
                         help="write the solution document here")
    p_solve.add_argument("--no-figure", action="store_true",
                         help="skip rendering figures next to reports")
    p_solve.set_defaults(func=_cmd_solve)

    p_bench = sub.add_parser(
        "bench",
        help="time Newton steps for both formulations",
        description=(
            "Benchmark EV- vs W-formulation Newton steps over a sweep of "
            "state-space sizes.  'total' timings cover a full Newton "
            "iteration (operator, choice probabilities, derivative, "
            "solve); 'step' timings cover only the linear solve and "
            "update, with the system matrix and residual precomputed.  "
            "Reported times are minima over repeated runs on one BLAS "
            "thread."
        ),
    )
    p_bench.add_argument("--model", choices=["bus", "storable"], required=True)
    p_bench.add_argument("--sizes", required=True,
                         help="comma-separated state-space sizes")
    p_bench.add_argument("--reps", type=int, default=5)
    p_bench.add_argument("--out", required=True, metavar="PATH.csv")
    p_bench.add_argument("--no-figure", action="store_true")
    p_bench.set_defaults(func=_cmd_bench)

    p_mpec = sub.add_parser(
        "mpec-stats",
        help="constraint-system sizes for MPEC-style estimation",
    )
    _add_model_arguments(p_mpec)
    p_mpec.add_argument("--out", default=None, metavar="PATH.json")
    p_mpec.set_defaults(func=_cmd_mpec_stats)

    p_diag = sub.add_parser(
        "diagnose-bus",
        help="check the replacement-model reduction identity",
    )
    p_diag.add_argument("--variant", choices=BUS_VARIANTS, required=True)
    p_diag.add_argument("--n-states", type=int, required=True)
    p_diag.add_argument("--out", default=None, metavar="PATH.json")
    p_diag.add_argument("--no-figure", action="store_true")
    p_diag.set_defaults(func=_cmd_diagnose_bus)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (ValueError, FileNotFoundError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())

"""Command-line front end: ``pseudomech <command> ...``.

Exit codes: 0 when every check passes, 1 when a check fails or errors,
2 on usage errors.
"""
from __future__ import annotations

import argparse
import configparser
import json
import sys

from pseudomech import dynamics
from pseudomech.gbracket import BracketContext, gpb
from pseudomech.nambu import NambuSpec, exact_quotient, graded_jacobian, nambu_defect, select_order
from pseudomech.models import DomainError
from pseudomech.parser import ParseError, parse
from pseudomech.suites import MODELS, SUITES, UsageError, build_model, resolve_config, run_suite


def read_config(path):
    """``key = value`` lines; ``#`` starts a comment."""
    cp = configparser.ConfigParser(inline_comment_prefixes=("#",))
    with open(path) as fh:
        cp.read_string("[config]\n" + fh.read())
    return dict(cp["config"])


def _config(args):
    cfg = read_config(args.config) if args.config else {}
    if getattr(args, "tol", None) is not None:
        cfg["tol"] = args.tol
    if getattr(args, "n", None) is not None:
        cfg["n"] = args.n
    return resolve_config(cfg)


def _model(args, cfg):
    name = args.model
    if name.startswith("nn") and name[2:].isdigit():
        cfg["n"] = int(name[2:])
        name = "nn"
    built = build_model(name, cfg)
    return built.lift if hasattr(built, "lift") else built


def _table_and_basis(model, basis):
    if basis is None:
        return model.vartable
    if basis not in model.bases:
        raise UsageError(f"basis {basis!r} not available; choose from {', '.join(model.bases)}")
    return model.bases[basis][0]


def cmd_bracket(args):
    cfg = _config(args)
    model = _model(args, cfg)
    table = _table_and_basis(model, args.basis)
    f, g = parse(args.f, table), parse(args.g, table)
    print(gpb(f, g, BracketContext(table)))
    return 0


def cmd_integrals(args):
    cfg = _config(args)
    model = _model(args, cfg)
    defects = model.conservation_defects()
    worst = 0.0
    for name, I in model.named_integrals.items():
        worst = max(worst, defects[name])
        print(f"{name}: {I}    [{{I, H}} max |coeff| {defects[name]:.3g}]")
    return 0 if worst < cfg["tol"] else 1


def cmd_verify(args):
    cfg = _config(args)
    model = args.model
    if model.startswith("nn") and model[2:].isdigit():
        cfg["n"] = int(model[2:])
        model = "nn"
    report = run_suite(model, args.suite, cfg)
    for c in report.checks:
        print(f"{c.status.upper():5} {c.name:48} {c.max_abs_defect:.3e}  {c.details}")
    print(f"{sum(c.status == 'pass' for c in report.checks)}/{len(report.checks)} checks passed"
          f" (determinant order: {report.determinant_order})")
    if args.json:
        text = json.dumps(report.as_dict(), indent=2)
        if args.json == "-":
            print(text)
        else:
            with open(args.json, "w") as fh:
                fh.write(text + "\n")
    return 0 if report.ok else 1


def cmd_evolve(args):
    cfg = _config(args)
    model = _model(args, cfg)
    f = parse(args.observable, model.vartable)
    L = dynamics.linearize(model.hamiltonian, model.ctx)
    print(dynamics.flow_map(f, L, args.t))
    return 0


def cmd_nambu(args):
    cfg = _config(args)
    if args.model != "1d":
        raise UsageError("the Nambu bracket is defined for model 1d only")
    model = _model(args, cfg)
    ctx, H = model.ctx, model.hamiltonian
    Z = [model.named_integrals[f"Z{mu}"] for mu in range(4)]
    spec = select_order(NambuSpec((Z[0], Z[3], Z[1]), Z[2]), H, ctx, cfg["tol"])
    F = parse(args.f, model.vartable)
    J = graded_jacobian(F, spec, ctx)
    rate = exact_quotient(spec.normalization * J, spec.divisor, side="right")
    defect = nambu_defect(F, H, spec, ctx).max_abs()
    print(f"determinant order: {spec.order}, normalization {spec.normalization.real:+g}")
    print(f"jacobian:          {J}")
    print(f"Nambu rate:        {rate if rate is not None else 'no exact quotient'}")
    print(f"{{F, H}}:            {gpb(F, H, ctx)}")
    print(f"defect:            {defect:.3e}")
    return 0 if defect < cfg["tol"] else 1


def build_parser():
    ap = argparse.ArgumentParser(prog="pseudomech", description="Graded brackets and supersymmetric oscillators.")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, model_required=True):
        p.add_argument("--model", required=model_required, default="1d",
                       help=f"one of {', '.join(MODELS)} (nn accepts --n, or write nn3)")
        p.add_argument("--config", help="key=value file with tolerances and model parameters")
        p.add_argument("--n", type=int, help="dimension for the nn model")
        p.add_argument("--tol", type=float)

    p = sub.add_parser("bracket", help="generalized Poisson bracket of two expressions")
    p.add_argument("f")
    p.add_argument("g")
    p.add_argument("--basis", help="variable basis of the model, e.g. qp or XP")
    common(p)
    p.set_defaults(func=cmd_bracket)

    p = sub.add_parser("integrals", help="list the model's named integrals")
    common(p)
    p.set_defaults(func=cmd_integrals)

    p = sub.add_parser("verify", help="run a verification suite")
    common(p)
    p.add_argument("--suite", required=True, choices=SUITES + ("all",))
    p.add_argument("--json", help="write the report to this path ('-' for stdout)")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("evolve", help="transport an observable along the exact flow")
    common(p)
    p.add_argument("--t", type=float, required=True)
    p.add_argument("--observable", required=True)
    p.set_defaults(func=cmd_evolve)

    p = sub.add_parser("nambu", help="Nambu 4-bracket dynamics of an expression")
    common(p, model_required=False)
    p.add_argument("--f", required=True)
    p.set_defaults(func=cmd_nambu)
    return ap


def main(argv=None):
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, ParseError, FileNotFoundError) as e:
        print(f"pseudomech: error: {e}", file=sys.stderr)
        return 2
    except DomainError as e:
        print(f"pseudomech: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

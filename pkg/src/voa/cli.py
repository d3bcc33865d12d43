"""Command line interface.

Exposes the exact mode computation, basis and character listings, fixed
point and closure calculations, and batch verification suites.  All
payloads are JSON with sorted keys, so identical invocations produce
byte-identical output.

Exit codes: 0 success, 1 verification failure, 2 usage error, 3 scalar
context error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from fractions import Fraction
from math import isqrt

from .scalars import ConductorError, Context, ContextMismatchError
from .state_space import (
    BasisMonomial,
    Vector,
    charged_vacuum,
    conformal_vector,
    enumerate_basis,
    partition_count,
    split_virasoro_vector,
    vacuum,
    vector_from_json,
    vector_to_json,
    weight4_primary,
)
from .structure_analysis import (
    CertificateRefused,
    CheckReport,
    certify_virasoro_vector,
    close_subalgebra,
    fixed_point_subspace,
    omega_residuals,
    sl2_zero_mode_check,
    solve_omega_constraint,
    verify_decomposition,
    verify_w_tensor_split,
    virasoro_character,
)
from .vertex_engine import (
    heis_apply,
    mode_request,
    translation_covariance_defect,
    vertex_mode,
    virasoro_apply,
)

EXIT_OK = 0
EXIT_VERIFY = 1
EXIT_USAGE = 2
EXIT_CONTEXT = 3

MAX_CUTOFF = 16

SUITES = (
    "axioms",
    "virasoro",
    "lemma-weight4",
    "mode-prop",
    "omega",
    "decomposition",
    "fixed-points",
    "tensor-split",
    "sl2",
)


class UsageError(ValueError):
    pass


def _positive(text: str) -> int:
    value = int(text)
    if value <= 0:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return value


def _check_cutoff(value: int) -> int:
    # exact arithmetic cost grows with the partition counts at each weight
    if not 0 <= value <= MAX_CUTOFF:
        raise UsageError(f"weight bound must lie in [0, {MAX_CUTOFF}]")
    return value


def resolve_conductor(args) -> int:
    if getattr(args, "conductor", None) is not None:
        return args.conductor
    env = os.environ.get("VOA_CONDUCTOR")
    if env is None:
        return 4
    try:
        return int(env)
    except ValueError as exc:
        raise UsageError(f"VOA_CONDUCTOR must be an integer, got {env!r}") from exc


def resolve_vector(ctx: Context, ref: str) -> Vector:
    """Vector reference: a builtin name, inline JSON, or @path to a JSON file."""
    builtins = {
        "nu": conformal_vector,
        "vac": vacuum,
        "u4": weight4_primary,
        "omega0": lambda c: split_virasoro_vector(c, 0, 1),
        "omega_pi": lambda c: split_virasoro_vector(c, 1, 2),
        "e_plus": lambda c: charged_vacuum(c, 1),
        "e_minus": lambda c: charged_vacuum(c, -1),
    }
    if ref in builtins:
        return builtins[ref](ctx)
    if ref.startswith("@"):
        with open(ref[1:], encoding="utf-8") as handle:
            data = json.load(handle)
    else:
        try:
            data = json.loads(ref)
        except json.JSONDecodeError as exc:
            raise UsageError(
                f"vector reference {ref!r} is not a builtin, inline JSON, or @file"
            ) from exc
    return vector_from_json(data, ctx)


def _fraction(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise UsageError(f"not a fraction: {text!r}") from exc


def _fraction_json(value: Fraction) -> list:
    value = Fraction(value)
    return [value.numerator, value.denominator]


def emit(payload: dict, args) -> None:
    if args.format == "json":
        text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    else:
        text = render_text(payload)
    if args.output:
        with open(args.output, "w", encoding="utf-8") as handle:
            handle.write(text)
    else:
        sys.stdout.write(text)


def render_text(payload: dict, indent: str = "") -> str:
    lines = []
    for key in sorted(payload):
        value = payload[key]
        if key in ("rows", "per_weight", "reports", "monomials", "terms"):
            lines.append(f"{indent}{key}:")
            for row in value:
                if isinstance(row, dict):
                    inner = ", ".join(f"{k}={row[k]}" for k in sorted(row))
                    lines.append(f"{indent}  - {inner}")
                else:
                    lines.append(f"{indent}  - {row}")
        elif isinstance(value, dict):
            lines.append(f"{indent}{key}:")
            lines.append(render_text(value, indent + "  ").rstrip("\n"))
        else:
            lines.append(f"{indent}{key}: {value}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# verification suites


def axiom_report(ctx: Context, cutoff: int, mode_range: int = 4) -> CheckReport:
    """Creation, translation covariance, and the three commutator families,
    checked as exact operator identities on every basis vector up to the
    cutoff with modes in [-mode_range, mode_range]."""
    zero = Vector.zero(ctx)
    vac = vacuum(ctx)
    pool = [
        Vector(ctx, {m: 1})
        for w in range(cutoff + 1)
        for m in enumerate_basis(ctx, w)
    ]
    rows = []

    def record(relation: str, checked: int, ok: bool) -> None:
        rows.append({"relation": relation, "checked": checked, "ok": ok})

    checked, ok = 0, True
    for a in pool:
        for n in range(mode_range + 1):
            ok = ok and vertex_mode(a, n, vac).is_zero()
            checked += 1
        ok = ok and vertex_mode(a, -1, vac) == a
        checked += 1
    record("a_(n) vacuum = 0 for n >= 0 and a_(-1) vacuum = a", checked, ok)

    small = [a for a in pool if a.weight() <= min(3, cutoff)]
    checked, ok = 0, True
    for a in small:
        for b in pool:
            for n in range(-mode_range, mode_range + 1):
                ok = ok and translation_covariance_defect(a, n, b).is_zero()
                checked += 1
    record("(L_{-1} a)_(n) = -n a_(n-1)", checked, ok)

    checked, ok = 0, True
    for v in pool:
        for m in range(-mode_range, mode_range + 1):
            for n in range(-mode_range, mode_range + 1):
                lhs = heis_apply(m, heis_apply(n, v)) - heis_apply(n, heis_apply(m, v))
                rhs = v.scale(m) if m + n == 0 else zero
                ok = ok and lhs == rhs
                checked += 1
    record("[J_m, J_n] = m delta_{m,-n}", checked, ok)

    checked, ok = 0, True
    for v in pool:
        for m in range(-mode_range, mode_range + 1):
            for n in range(-mode_range, m + 1):
                lhs = virasoro_apply(m, virasoro_apply(n, v)) - virasoro_apply(
                    n, virasoro_apply(m, v)
                )
                rhs = virasoro_apply(m + n, v).scale(m - n)
                if m + n == 0:
                    rhs = rhs + v.scale(Fraction(m**3 - m, 12))
                ok = ok and lhs == rhs
                checked += 1
    record("[L_m, L_n] = (m-n) L_{m+n} + (m^3-m)/12 delta_{m,-n}", checked, ok)

    checked, ok = 0, True
    for v in pool:
        for m in range(-mode_range, mode_range + 1):
            for n in range(-mode_range, mode_range + 1):
                lhs = virasoro_apply(m, heis_apply(n, v)) - heis_apply(
                    n, virasoro_apply(m, v)
                )
                ok = ok and lhs == heis_apply(m + n, v).scale(-n)
                checked += 1
    record("[L_m, J_n] = -n J_{m+n}", checked, ok)

    verdict = all(r["ok"] for r in rows)
    params = {"N": ctx.N, "cutoff": cutoff, "mode_range": mode_range}
    return CheckReport("axioms", params, rows, verdict)


def lemma_weight4_report(ctx: Context) -> CheckReport:
    """The quartic weight-4 vector is primary, and the two weight-4
    Virasoro descendants of the vacuum line have their closed forms."""
    u = weight4_primary(ctx)
    rows = []
    for m in range(1, 7):
        rows.append(
            {"relation": f"L_{m} u = 0", "ok": virasoro_apply(m, u).is_zero()}
        )
    lm2 = Vector(
        ctx,
        {
            BasisMonomial((-1, -1, -1, -1), 0): Fraction(1, 4),
            BasisMonomial((-3, -1), 0): 1,
        },
    )
    rows.append(
        {
            "relation": "L_{-2} nu = (1/4) J^4 vacuum + J_{-3} J_{-1} vacuum",
            "ok": virasoro_apply(-2, conformal_vector(ctx)) == lm2,
        }
    )
    lm4 = Vector(
        ctx,
        {
            BasisMonomial((-2, -2), 0): Fraction(1, 2),
            BasisMonomial((-3, -1), 0): 1,
        },
    )
    rows.append(
        {
            "relation": "L_{-4} vacuum = (1/2) J_{-2}^2 vacuum + J_{-3} J_{-1} vacuum",
            "ok": virasoro_apply(-4, vacuum(ctx)) == lm4,
        }
    )
    verdict = all(r["ok"] for r in rows)
    return CheckReport("lemma-weight4", {"N": ctx.N}, rows, verdict)


def mode_prop_report(conductor: int = 4) -> CheckReport:
    """Charged vacuum products at the two singular mode depths.

    With g^2 = 2N: the depth g^2-2 product of opposite charged vacua is
    (+/-) g J_{-1} vacuum, and the depth g^2-5 self-product of the pair
    e_+ + b e_- is b times the quartic vector v_g."""
    rows = []
    for n_lat in (2, 3):
        ctx = Context(n_lat, conductor)
        gsq = 2 * n_lat
        ep, em = charged_vacuum(ctx, 1), charged_vacuum(ctx, -1)
        gj = Vector.monomial(ctx, (-1,), 0, ctx.sqrt_2n())
        rows.append(
            {
                "relation": f"N={n_lat}: (e_+)_(g^2-2) e_- = g J_{{-1}} vacuum",
                "ok": vertex_mode(ep, gsq - 2, em) == gj,
            }
        )
        rows.append(
            {
                "relation": f"N={n_lat}: (e_-)_(g^2-2) e_+ = -g J_{{-1}} vacuum",
                "ok": vertex_mode(em, gsq - 2, ep) == -gj,
            }
        )
        vg = Vector(
            ctx,
            {
                BasisMonomial((-1, -1, -1, -1), 0): Fraction(gsq * gsq, 12),
                BasisMonomial((-3, -1), 0): Fraction(2 * gsq, 3),
                BasisMonomial((-2, -2), 0): Fraction(gsq, 4),
            },
        )
        for b_name, b in (("1", ctx.one()), ("i", ctx.i())):
            e = ep + em.scale(b)
            rows.append(
                {
                    "relation": f"N={n_lat}, b={b_name}: (e_b)_(g^2-5) e_b = b v_g",
                    "ok": vertex_mode(e, gsq - 5, e) == vg.scale(b),
                }
            )
    verdict = all(r["ok"] for r in rows)
    return CheckReport("mode-prop", {"conductor": conductor}, rows, verdict)


def omega_report(ctx: Context) -> CheckReport:
    """Conformal-vector constraint system plus, when the conductor allows
    eighth roots, the full circle of solutions b = zeta_8^k / 4."""
    base = solve_omega_constraint(ctx)
    rows = list(base.rows)
    verdict = base.verdict
    if ctx.conductor % 8 == 0:
        for k in range(8):
            b = ctx.embed_root_of_unity(k, 8) * Fraction(1, 4)
            ok = all(r.is_zero() for r in omega_residuals(ctx, Fraction(1, 2), b))
            rows.append({"relation": f"a = 1/2, b = zeta_8^{k}/4 solves", "ok": ok})
            verdict = verdict and ok
    return CheckReport("omega-constraint", dict(base.params), rows, verdict)


def fixed_points_report(ctx: Context, cutoff: int, k: int = 2) -> CheckReport:
    """Cyclic fixed points match the rescaled lattice; torus fixed points
    count partitions."""
    target = Context(ctx.N * k * k, ctx.conductor)
    zdims = fixed_point_subspace(ctx, f"Z{k}", cutoff).dims()
    ldims = [len(enumerate_basis(target, w)) for w in range(cutoff + 1)]
    tdims = fixed_point_subspace(ctx, "T", cutoff).dims()
    pdims = [partition_count(w) for w in range(cutoff + 1)]
    rows = [
        {
            "relation": f"Z{k} fixed dims match N={target.N} graded dims",
            "dims": zdims,
            "ok": zdims == ldims,
        },
        {
            "relation": "torus fixed dims are the partition numbers",
            "dims": tdims,
            "ok": tdims == pdims,
        },
    ]
    verdict = all(r["ok"] for r in rows)
    params = {"N": ctx.N, "k": k, "cutoff": cutoff}
    return CheckReport("fixed-points", params, rows, verdict)


def decomposition_reports(ctx: Context, cutoff: int) -> list:
    # the charged families need N non-square; the others hold for any N
    if isqrt(ctx.N) ** 2 == ctx.N:
        which = ("M1", "M1+")
    else:
        which = ("V", "M1", "V+", "M1+")
    return [verify_decomposition(ctx, name, cutoff) for name in which]


def virasoro_report(omega: Vector, central_charge, cutoff: int) -> CheckReport:
    params = {
        "N": omega.ctx.N,
        "central_charge": _fraction_json(Fraction(central_charge)),
        "cutoff": cutoff,
    }
    try:
        cert = certify_virasoro_vector(omega, central_charge, cutoff=cutoff)
    except CertificateRefused as refusal:
        rows = [{"relation": refusal.relation, "ok": False}]
        return CheckReport("virasoro-certificate", params, rows, False)
    rows = [
        {
            "relation": "all bracket relations hold",
            "basis_dimension": cert.basis_dimension,
            "relations_checked": cert.relations_checked,
            "ok": True,
        }
    ]
    return CheckReport("virasoro-certificate", params, rows, True)


def run_suite(name: str, args) -> CheckReport | list:
    conductor = resolve_conductor(args)
    cutoff = _check_cutoff(args.cutoff)
    n_lat = args.N

    if name == "axioms":
        return axiom_report(Context(n_lat or 2, conductor), cutoff)
    if name == "virasoro":
        ctx = Context(n_lat or 2, conductor)
        omega = resolve_vector(ctx, args.omega)
        return virasoro_report(omega, _fraction(args.c), cutoff)
    if name == "lemma-weight4":
        return lemma_weight4_report(Context(n_lat or 2, conductor))
    if name == "mode-prop":
        return mode_prop_report(conductor)
    if name == "omega":
        return omega_report(Context(n_lat or 2, conductor))
    if name == "decomposition":
        return decomposition_reports(Context(n_lat or 3, conductor), cutoff)
    if name == "fixed-points":
        return fixed_points_report(Context(n_lat or 1, conductor), cutoff, args.k)
    if name == "tensor-split":
        return verify_w_tensor_split(Context(n_lat or 2, conductor), cutoff)
    if name == "sl2":
        return sl2_zero_mode_check(Context(n_lat or 1, conductor))
    raise UsageError(f"unknown suite {name!r}")


# ---------------------------------------------------------------------------
# commands


def cmd_mode(args) -> int:
    ctx = Context(args.N, resolve_conductor(args))
    a = resolve_vector(ctx, args.a)
    b = resolve_vector(ctx, args.b)
    request = {
        "N": args.N,
        "n": args.n,
        "a": vector_to_json(a),
        "b": vector_to_json(b),
    }
    answer = mode_request(request, ctx)
    payload = {
        "check": "mode",
        "params": {"N": args.N, "conductor": ctx.conductor, "n": args.n},
        "result": answer["result"],
        "weight_check": answer["weight_check"],
    }
    emit(payload, args)
    return EXIT_OK if answer["weight_check"] else EXIT_VERIFY


def cmd_verify(args) -> int:
    if args.suite == "all":
        names = SUITES
    else:
        names = (args.suite,)
    reports = []
    for name in names:
        result = run_suite(name, args)
        if isinstance(result, list):
            reports.extend(result)
        else:
            reports.append(result)
    verdict = all(r.verdict for r in reports)
    if len(reports) == 1:
        payload = reports[0].to_json()
    else:
        payload = {
            "check": args.suite,
            "reports": [r.to_json() for r in reports],
            "verdict": verdict,
        }
    emit(payload, args)
    return EXIT_OK if verdict else EXIT_VERIFY


def cmd_basis(args) -> int:
    ctx = Context(args.N, resolve_conductor(args))
    weight = _check_cutoff(args.weight)
    monos = enumerate_basis(ctx, weight)
    payload = {
        "check": "basis",
        "params": {"N": args.N, "weight": weight},
        "monomials": [
            {"partition": list(m.partition), "charge": m.charge} for m in monos
        ],
        "count": len(monos),
    }
    emit(payload, args)
    return EXIT_OK


def cmd_character(args) -> int:
    crg = _fraction(args.c)
    h = _fraction(args.h)
    if h.denominator == 1:
        h = int(h)
    dims = virasoro_character(crg, h, _check_cutoff(args.max))
    payload = {
        "check": "character",
        "params": {
            "c": _fraction_json(crg),
            "h": _fraction_json(Fraction(h)),
            "max": args.max,
        },
        "dims": dims,
    }
    emit(payload, args)
    return EXIT_OK


def cmd_fixed(args) -> int:
    ctx = Context(args.N, resolve_conductor(args))
    cutoff = _check_cutoff(args.cutoff)
    t = None
    if args.t is not None:
        frac = _fraction(args.t)
        t = (frac.numerator, frac.denominator)
    sub = fixed_point_subspace(ctx, args.group, cutoff, t)
    payload = {
        "check": "fixed",
        "params": {
            "N": args.N,
            "group": args.group,
            "cutoff": cutoff,
            "t": None if t is None else list(t),
        },
        "dims": sub.dims(),
        "total": sub.total_dim(),
    }
    emit(payload, args)
    return EXIT_OK


def cmd_close(args) -> int:
    ctx = Context(args.N, resolve_conductor(args))
    cutoff = _check_cutoff(args.cutoff)
    refs = args.gen if args.gen else ["nu"]
    generators = [resolve_vector(ctx, ref) for ref in refs]
    sub = close_subalgebra(ctx, generators, cutoff)
    payload = {
        "check": "close",
        "params": {"N": args.N, "cutoff": cutoff, "generators": list(refs)},
        "dims": sub.dims(),
        "total": sub.total_dim(),
    }
    emit(payload, args)
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="voa",
        description="Exact computations in rank-one even lattice vertex algebras.",
    )
    parser.add_argument(
        "--conductor",
        type=int,
        default=None,
        help="cyclotomic conductor, a multiple of 4 (default: VOA_CONDUCTOR or 4)",
    )
    parser.add_argument("--format", choices=("json", "text"), default="json")
    parser.add_argument(
        "--output", metavar="PATH", default=None, help="write the payload to PATH"
    )
    # the same flags are accepted after the subcommand; SUPPRESS keeps a
    # value given before the subcommand from being reset to a default
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--conductor", type=int, default=argparse.SUPPRESS)
    common.add_argument(
        "--format", choices=("json", "text"), default=argparse.SUPPRESS
    )
    common.add_argument("--output", metavar="PATH", default=argparse.SUPPRESS)
    sub = parser.add_subparsers(dest="command", required=True, metavar="command")

    p = sub.add_parser("mode", help="compute a_(n) b exactly", parents=[common])
    p.add_argument("--N", type=_positive, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--a", required=True, help="builtin name, inline JSON, or @file")
    p.add_argument("--b", required=True, help="builtin name, inline JSON, or @file")
    p.set_defaults(func=cmd_mode)

    p = sub.add_parser("verify", help="run a verification suite", parents=[common])
    p.add_argument("suite", choices=SUITES + ("all",))
    p.add_argument("--N", type=_positive, default=None)
    p.add_argument("--cutoff", type=int, default=6)
    p.add_argument("--k", type=_positive, default=2, help="cyclic order (fixed-points)")
    p.add_argument("--omega", default="nu", help="candidate vector (virasoro)")
    p.add_argument("--c", default="1", help="claimed central charge (virasoro)")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("basis", help="list basis monomials at one weight", parents=[common])
    p.add_argument("--N", type=_positive, required=True)
    p.add_argument("--weight", type=int, required=True)
    p.set_defaults(func=cmd_basis)

    p = sub.add_parser("character", help="graded dimensions of L(c, h)", parents=[common])
    p.add_argument("--c", required=True)
    p.add_argument("--h", required=True)
    p.add_argument("--max", type=int, required=True)
    p.set_defaults(func=cmd_character)

    p = sub.add_parser("fixed", help="fixed points of an automorphism subgroup", parents=[common])
    p.add_argument("--group", required=True, help="T, Dinf, Zk, or Dk")
    p.add_argument("--N", type=_positive, required=True)
    p.add_argument("--cutoff", type=int, default=6)
    p.add_argument("--t", default=None, help="conjugating angle p/q (dihedral only)")
    p.set_defaults(func=cmd_fixed)

    p = sub.add_parser("close", help="close a generating set under all modes", parents=[common])
    p.add_argument("--N", type=_positive, required=True)
    p.add_argument("--cutoff", type=int, default=6)
    p.add_argument(
        "--gen",
        action="append",
        default=None,
        help="generator reference; repeatable (default: nu)",
    )
    p.set_defaults(func=cmd_close)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        return args.func(args)
    except (ConductorError, ContextMismatchError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONTEXT
    except (ValueError, KeyError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    raise SystemExit(main())

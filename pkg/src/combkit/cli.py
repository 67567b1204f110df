"""Command-line front end.

Exit codes: 0 on success or a passing check, 1 when a consistency or
classicality check fails, 2 on usage, IO or schema errors.  All numeric
output is printed at 17 significant digits and is deterministic for a fixed
seed.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import config, io
from .channels import named_basis, projective_instrument
from .combs import Comb, contract, outcome_distribution, restrict
from .consistency import (
    check_classicality,
    check_comb_consistency,
    check_distribution_consistency,
    verify_extension,
)
from .errors import CombKitError, SchemaError
from .scenarios import SCENARIOS, build_scenario
from .times import as_times


def _parse_subset(raw: str) -> tuple[str, ...]:
    labels = [part.strip() for part in raw.split(",") if part.strip()]
    if not labels:
        raise SchemaError("empty --subset", "$")
    return as_times(labels)


def _emit(text: str, out_path: str | None) -> None:
    if out_path:
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write(text if text.endswith("\n") else text + "\n")
    else:
        print(text)


def _emit_json(obj, out_path: str | None) -> None:
    _emit(json.dumps(obj, indent=1), out_path)


def _load_comb_arg(path: str, subset: tuple[str, ...] | None) -> Comb:
    doc = io.load_json_file(path)
    if isinstance(doc, dict) and "members" in doc:
        family = io.comb_family_from_json(doc)
        if subset is None:
            raise SchemaError(
                "file holds a comb family; use --subset to select a member", "$.members"
            )
        if subset not in family.members:
            raise SchemaError(f"family has no member {subset}", "$.members")
        return family.members[subset]
    comb = io.comb_from_json(doc)
    if subset is not None:
        return restrict(comb, subset)
    return comb


def _resolve_basis_arg(raw: str):
    if raw in ("z", "x"):
        return raw
    return io.basis_map_from_json(io.load_json_file(raw))


def _instruments_for(comb: Comb, basis_arg):
    instruments = []
    for t in comb.times:
        din, dout = comb.slot_dims(t)
        if din != dout:
            raise SchemaError(
                f"slot {t!r} has dims {din}->{dout}; projective instruments "
                f"need square slots"
            )
        spec = basis_arg[t] if isinstance(basis_arg, dict) else basis_arg
        basis = named_basis(spec, din) if isinstance(spec, str) else spec
        instruments.append(projective_instrument(basis))
    return instruments


def _distribution_text(dist) -> str:
    width = max(len(" ".join(o)) for o, _ in dist.items())
    width = max(width, len("outcomes"))
    lines = [f"{'outcomes':<{width}}  probability"]
    for outcomes, p in dist.items():
        lines.append(f"{' '.join(outcomes):<{width}}  {p:.17g}")
    return "\n".join(lines)


def _require_positive_tol(args) -> float:
    if args.tol <= 0:
        raise SchemaError(f"--tol must be positive, got {args.tol!r}", "$")
    return args.tol


def _report_out(report, args) -> int:
    if args.format == "json":
        _emit_json(io.report_to_json(report), args.out)
    else:
        _emit(report.to_table(), args.out)
    return 0 if report.passed else 1


# ---------------------------------------------------------------------------
# handlers


def _cmd_scenario(args) -> int:
    result = build_scenario(
        args.name,
        seed=args.seed,
        steps=args.steps,
        system_dim=args.system_dim,
        env_dim=args.env_dim,
        basis=args.basis,
    )
    for spec in args.save or []:
        if "=" not in spec:
            raise SchemaError(f"--save expects KEY=PATH, got {spec!r}", "$")
        key, path = spec.split("=", 1)
        family = result.family(key)
        if key in result.dist_families:
            io.save_json_file(io.distribution_family_to_json(family), path)
        else:
            io.save_json_file(io.comb_family_to_json(family), path)
    if args.format == "json":
        _emit_json(result.as_dict(), args.out)
    else:
        _emit(result.to_table(), args.out)
    return 0 if result.ok else 1


def _cmd_contract(args) -> int:
    subset = _parse_subset(args.subset) if args.subset else None
    comb = _load_comb_arg(args.comb, subset)
    basis_arg = _resolve_basis_arg(args.basis)
    dist = outcome_distribution(comb, _instruments_for(comb, basis_arg))
    if args.format == "json":
        _emit_json(io.distribution_to_json(dist), args.out)
    else:
        _emit(_distribution_text(dist), args.out)
    return 0


def _cmd_restrict(args) -> int:
    comb = io.comb_from_json(io.load_json_file(args.comb))
    restricted = restrict(comb, _parse_subset(args.subset))
    _emit_json(io.comb_to_json(restricted), args.out)
    return 0


def _cmd_check_get(args) -> int:
    tol = _require_positive_tol(args)
    family = io.comb_family_from_json(io.load_json_file(args.family))
    return _report_out(check_comb_consistency(family, tol=tol), args)


def _cmd_check_ket(args) -> int:
    tol = _require_positive_tol(args)
    family = io.distribution_family_from_json(io.load_json_file(args.family))
    return _report_out(check_distribution_consistency(family, tol=tol), args)


def _cmd_classical(args) -> int:
    tol = _require_positive_tol(args)
    family = io.comb_family_from_json(io.load_json_file(args.family))
    basis_arg = _resolve_basis_arg(args.basis)
    return _report_out(check_classicality(family, basis_arg, tol=tol), args)


def _cmd_embed(args) -> int:
    from .consistency import embed_classical

    doc = io.load_json_file(args.dist)
    if isinstance(doc, dict) and "members" in doc:
        family = io.distribution_family_from_json(doc)
        if not args.subset:
            raise SchemaError(
                "file holds a distribution family; use --subset to select a member",
                "$.members",
            )
        subset = _parse_subset(args.subset)
        if subset not in family.members:
            raise SchemaError(f"family has no member {subset}", "$.members")
        dist = family.members[subset]
    else:
        dist = io.distribution_from_json(doc)
        if args.subset:
            from .distributions import marginalize

            dist = marginalize(dist, _parse_subset(args.subset))
    _emit_json(io.comb_to_json(embed_classical(dist)), args.out)
    return 0


def _cmd_verify_extension(args) -> int:
    tol = _require_positive_tol(args)
    candidate = io.comb_from_json(io.load_json_file(args.comb))
    family = io.comb_family_from_json(io.load_json_file(args.family))
    return _report_out(verify_extension(candidate, family, tol=tol), args)


# ---------------------------------------------------------------------------
# parser


def _add_common(p, family=False, comb=False, dist=False, basis=False, tol=True):
    if family:
        p.add_argument("--family", required=True, help="family JSON file")
    if comb:
        p.add_argument("--comb", required=True, help="comb JSON file")
    if dist:
        p.add_argument("--dist", required=True, help="distribution JSON file")
    if basis:
        p.add_argument(
            "--basis",
            default="z",
            help="per-time reference basis: 'z', 'x', or a JSON file mapping "
            "times to bases (default: z)",
        )
    if tol:
        p.add_argument(
            "--tol", type=float, default=config.FAMILY_TOL,
            help=f"check tolerance (default {config.FAMILY_TOL:g})",
        )
    p.add_argument("--format", choices=("table", "json"), default="table")
    p.add_argument("--out", help="write output to this file instead of stdout")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="combkit",
        description="Multi-time process combs: build scenarios, contract "
        "instrument sequences, and check consistency and classicality.",
    )
    sub = parser.add_subparsers(dest="verb", required=True)

    p = sub.add_parser("scenario", help="build a named scenario and print its expectations")
    p.add_argument("name", choices=sorted(SCENARIOS))
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--steps", type=int, default=None)
    p.add_argument("--system-dim", type=int, default=None, dest="system_dim")
    p.add_argument("--env-dim", type=int, default=None, dest="env_dim")
    p.add_argument("--basis", default=None, help="reference basis for scenarios that take one")
    p.add_argument(
        "--save", action="append", metavar="KEY=PATH",
        help="export a scenario family as JSON (repeatable)",
    )
    p.add_argument("--format", choices=("table", "json"), default="table")
    p.add_argument("--out", help="write output to this file instead of stdout")
    p.set_defaults(handler=_cmd_scenario)

    p = sub.add_parser(
        "contract",
        help="probability table of projective measurements on a comb",
    )
    _add_common(p, comb=True, basis=True, tol=False)
    p.add_argument(
        "--subset",
        help="times to keep: selects a member from a family file, or restricts a comb",
    )
    p.set_defaults(handler=_cmd_contract)

    p = sub.add_parser("restrict", help="restrict a comb to a subset of its times")
    p.add_argument("--comb", required=True)
    p.add_argument("--subset", required=True, help="comma-separated time labels")
    p.add_argument("--out", help="write the restricted comb JSON here")
    p.set_defaults(handler=_cmd_restrict)

    p = sub.add_parser(
        "check-get", help="restriction-consistency check for a comb family"
    )
    _add_common(p, family=True)
    p.set_defaults(handler=_cmd_check_get)

    p = sub.add_parser(
        "check-ket", help="marginal-consistency check for a distribution family"
    )
    _add_common(p, family=True)
    p.set_defaults(handler=_cmd_check_ket)

    p = sub.add_parser(
        "classical", help="fixed-basis classicality check for a comb family"
    )
    _add_common(p, family=True, basis=True)
    p.set_defaults(handler=_cmd_classical)

    p = sub.add_parser("embed", help="embed a classical distribution as a diagonal comb")
    p.add_argument("--dist", required=True)
    p.add_argument("--subset", help="member selection (family file) or marginalization")
    p.add_argument("--out", help="write the comb JSON here")
    p.set_defaults(handler=_cmd_embed)

    p = sub.add_parser(
        "verify-extension",
        help="check that restricting a candidate comb reproduces every family member",
    )
    _add_common(p, family=True, comb=True)
    p.set_defaults(handler=_cmd_verify_extension)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.handler(args)
    except SchemaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (CombKitError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

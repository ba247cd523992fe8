"""Command line front end: ``arrowreal <subcommand> ...``.

Exit codes: 0 success, 1 a verification failed, 2 bad usage or input.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from pathlib import Path
from typing import Sequence

from .cdga.sullivan import (
    AlgebraMorphism,
    EnumerationStats,
    basis_at_degree,
    check_d_squared,
    check_degree_shift,
    check_ellipticity_witnesses,
    enumerate_morphisms_constrained,
    expected_basis,
    induced_algebra_morphism,
    linear_part_key,
    sullivan_presentation,
    vertex_name,
    zero_morphism,
)
from .errors import (
    ArmsNotDistinct,
    ArrowRealError,
    DegreeOverflow,
    FewerThanTwoVertices,
    NotAGroup,
    NotStronglyConnected,
)
from .goursat import generating_data, goursat_decompose
from .graphs import enumerate_graph_homomorphisms, lift_morphism, parse_digraph, replace, tree_family
from .groups import DEFAULT_BUDGET, parse_group
from .pipeline import (
    SWEEP_GROUPS,
    SWEEP_MAX_ORDER,
    PipelineReport,
    instance_input,
    load_instance,
    parse_pairs,
    run_sweep,
    section5_instance,
    subgroup_from_pairs,
    verify_instance,
)
from .relsys import RelSystem, build_arrow, build_aux_system, build_source_system, build_target_system


class UsageError(Exception):
    pass


# precondition failures on user input are usage errors, not failed verifications
INPUT_ERRORS = (NotAGroup, NotStronglyConnected, FewerThanTwoVertices, ArmsNotDistinct, DegreeOverflow)


def _dump(obj) -> str:
    return json.dumps(obj, indent=2) + "\n"


def _write(out: Path | None, name: str, text: str) -> None:
    if out is None:
        return
    out.mkdir(parents=True, exist_ok=True)
    (out / name).write_text(text)


def _instance(args):
    if not (args.g1 and args.g2 and args.h is not None):
        raise UsageError("--g1, --g2 and --h are required")
    g1, g2 = parse_group(args.g1), parse_group(args.g2)
    return g1, g2, subgroup_from_pairs(g1, g2, parse_pairs(args.h))


def _emit_report(args, rep: PipelineReport) -> int:
    text = _dump(rep.to_json())
    _write(args.out, "report.json", text)
    sys.stdout.write(text)
    for c in rep.failed():
        print(f"FAILED {c.name}: {c.detail}", file=sys.stderr)
    return 0 if rep.passed else 1


def cmd_goursat(args) -> int:
    g1, g2, h = _instance(args)
    gd = generating_data(goursat_decompose(g1, g2, h))
    data = {"decomposition": gd.decomposition.to_json(), "generating_data": gd.to_json()}
    text = _dump(data)
    _write(args.out, "goursat.json", text)
    sys.stdout.write(text)
    return 0


def _relsys_objects(args):
    g1, g2, h = _instance(args)
    gd = generating_data(goursat_decompose(g1, g2, h))
    src, aux, tgt = build_source_system(gd), build_aux_system(gd), build_target_system(gd)
    return g1, g2, h, gd, aux, build_arrow(gd, src, tgt)


def cmd_build_relsys(args) -> int:
    g1, g2, h, gd, aux, phi = _relsys_objects(args)
    _write(args.out, "input.json", _dump(instance_input(g1, g2, h)))
    _write(args.out, "G1.json", _dump(phi.source.to_json()))
    _write(args.out, "G2.json", _dump(phi.target.to_json()))
    _write(args.out, "aux.json", _dump(aux.to_json()))
    _write(args.out, "phi.json", _dump(phi.to_json()))
    _write(args.out, "G1.dot", phi.source.to_dot("G1"))
    _write(args.out, "G2.dot", phi.target.to_dot("G2"))
    _write(args.out, "aux.dot", aux.to_dot("aux"))
    if args.format == "dot":
        sys.stdout.write(phi.source.to_dot("G1") + phi.target.to_dot("G2"))
    else:
        sys.stdout.write(_dump({"G1": phi.source.to_json(), "G2": phi.target.to_json(), "aux": aux.to_json(), "phi": phi.to_json()}))
    return 0


def cmd_replace(args) -> int:
    g1, g2, h, gd, aux, phi = _relsys_objects(args)
    family = tree_family(gd.labels)
    r1, r2 = replace(phi.source, family), replace(phi.target, family)
    lifted = lift_morphism(phi, r1, r2)
    _write(args.out, "input.json", _dump(instance_input(g1, g2, h)))
    _write(args.out, "graph1.json", _dump(r1.to_json()))
    _write(args.out, "graph2.json", _dump(r2.to_json()))
    _write(args.out, "lifted.json", _dump(lifted.to_json()))
    _write(args.out, "graph1.dot", r1.graph.to_dot("G1"))
    _write(args.out, "graph2.dot", r2.graph.to_dot("G2"))
    if args.format == "dot":
        sys.stdout.write(r1.graph.to_dot("G1") + r2.graph.to_dot("G2"))
    else:
        sys.stdout.write(_dump({
            "trees": {l: list(t.arms) for l, t in family.items()},
            "graph1": {"vertices": len(r1.graph.vertices), "edges": len(r1.graph.edges)},
            "graph2": {"vertices": len(r2.graph.vertices), "edges": len(r2.graph.edges)},
        }))
    return 0


def cmd_verify(args) -> int:
    loaded = None
    if args.artifacts is not None:
        root = Path(args.artifacts)
        try:
            g1, g2, h = load_instance(json.loads((root / "input.json").read_text()))
        except FileNotFoundError:
            raise UsageError(f"{root} has no input.json") from None
        loaded = {}
        for key, name in (("source", "G1.json"), ("target", "G2.json")):
            p = root / name
            if p.exists():
                loaded[key] = RelSystem.from_json(json.loads(p.read_text()))
        if (root / "phi.json").exists():
            loaded["phi"] = json.loads((root / "phi.json").read_text())
    else:
        g1, g2, h = _instance(args)
    rep = verify_instance(g1, g2, h, graph_level=not args.relational_only, budget=args.budget, timings=args.timings, loaded=loaded)
    return _emit_report(args, rep)


def cmd_example(args) -> int:
    g1, g2, h = section5_instance()
    rep = verify_instance(g1, g2, h, graph_level=True, budget=args.budget, timings=args.timings)
    return _emit_report(args, rep)


def cmd_sweep(args) -> int:
    groups = args.groups.split(";") if args.groups else list(SWEEP_GROUPS)
    data = run_sweep(groups, args.max_order, jobs=args.jobs, budget=args.budget)
    text = _dump(data)
    _write(args.out, "sweep.json", text)
    if args.format == "json":
        sys.stdout.write(text)
    print(f"{data['instances']} instances, {data['failures']} failures", file=sys.stderr)
    return 0 if data["failures"] == 0 else 1


def _coeffs(text: str) -> tuple[Fraction, ...]:
    try:
        return tuple(Fraction(t.strip()) for t in text.split(",") if t.strip())
    except ValueError:
        raise UsageError(f"bad coefficient set {text!r}") from None


def cmd_cdga(args) -> int:
    if args.action in ("emit", "check"):
        if not args.graph:
            raise UsageError("--graph is required")
        pres = sullivan_presentation(parse_digraph(args.graph), args.n)
        if args.action == "emit":
            text = _dump(pres.to_json())
            _write(args.out, "presentation.json", text)
            sys.stdout.write(pres.pretty() + "\n" if args.pretty else text)
            return 0
        d2 = check_d_squared(pres)
        shift = check_degree_shift(pres)
        vdeg = pres.degree(vertex_name(pres.graph.vertices[0]))
        zdeg = pres.degree("z")
        b_x = set(basis_at_degree(pres, vdeg)) == expected_basis(pres, "xv")
        b_z = set(basis_at_degree(pres, zdeg)) == expected_basis(pres, "z")
        wit = check_ellipticity_witnesses(pres)
        report = {
            "n": pres.n,
            "graph": parse_digraph(args.graph).to_json(),
            "d_squared_residues": {k: str(v) for k, v in d2.items()},
            "degree_shift_violations": shift,
            "basis_xv_matches": b_x,
            "basis_z_matches": b_z,
            "witnesses": wit.to_json(),
        }
        ok = not d2 and not shift and b_x and b_z and wit.ok
        report["passed"] = ok
        text = _dump(report)
        _write(args.out, "cdga_check.json", text)
        sys.stdout.write(text)
        return 0 if ok else 1
    # homs
    if not (args.source and args.target):
        raise UsageError("--source and --target are required")
    a, b = parse_digraph(args.source), parse_digraph(args.target)
    m1, m2 = sullivan_presentation(a, args.n), sullivan_presentation(b, args.n)
    stats = EnumerationStats()
    found = enumerate_morphisms_constrained(m1, m2, _coeffs(args.coeff_set), budget=args.budget, stats=stats)
    sigmas = enumerate_graph_homomorphisms(a, b, budget=args.budget)
    expected = [zero_morphism(m1, m2)] + [induced_algebra_morphism(s, m1, m2) for s in sigmas]
    match = sorted(map(AlgebraMorphism.key, found)) == sorted(map(AlgebraMorphism.key, expected))
    distinct = len({linear_part_key(f) for f in found}) == len(found)
    report = {
        "n": args.n,
        "coeff_set": [str(c) for c in stats.coeff_set],
        "source": a.to_json(),
        "target": b.to_json(),
        "morphisms": len(found),
        "nonzero_morphisms": sum(1 for f in found if not f.is_zero()),
        "graph_homomorphisms": [{str(k): v for k, v in s.items()} for s in sigmas],
        "matches_oracle": match,
        "linear_parts_distinct": distinct,
        "candidates_per_generator": stats.candidates,
        "search_nodes": stats.nodes,
        "images": [f.to_json() for f in found],
        "passed": match and distinct,
    }
    text = _dump(report)
    _write(args.out, "cdga_homs.json", text)
    sys.stdout.write(text)
    return 0 if match and distinct else 1


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="arrowreal", description="Build and verify arrow realisations of finite groups.")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, instance=True):
        if instance:
            p.add_argument("--g1", help="group preset (cyclic:n, klein4, dihedral:n, sym:3) or JSON path")
            p.add_argument("--g2", help="group preset or JSON path")
            p.add_argument("--h", help='generators of H as pairs, e.g. "(2,2),(4,0)"')
        p.add_argument("--out", type=Path, help="directory for emitted artifacts")
        p.add_argument("--format", choices=("json", "dot"), default="json")
        p.add_argument("--budget", type=int, default=DEFAULT_BUDGET, help="search node limit")
        p.add_argument("--jobs", type=int, default=1, help="worker processes (sweep)")

    p = sub.add_parser("goursat", help="Goursat decomposition and generating data")
    common(p)
    p.set_defaults(func=cmd_goursat)

    p = sub.add_parser("build-relsys", help="emit G1, G2 and phi as relational systems")
    common(p)
    p.set_defaults(func=cmd_build_relsys)

    p = sub.add_parser("replace", help="emit the simple graphs and the lifted morphism")
    common(p)
    p.set_defaults(func=cmd_replace)

    p = sub.add_parser("verify", help="verify all isomorphism claims")
    common(p)
    p.add_argument("--from", dest="artifacts", help="re-verify artifacts emitted by build-relsys")
    p.add_argument("--relational-only", action="store_true", help="skip the graph level")
    p.add_argument("--timings", action="store_true", help="include per-stage timings (report no longer byte-stable)")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("example-sec5", help="Z8, Z4, H = <(2,2)> end to end")
    common(p, instance=False)
    p.add_argument("--timings", action="store_true")
    p.set_defaults(func=cmd_example)

    p = sub.add_parser("sweep", help="verify every small instance")
    common(p, instance=False)
    p.add_argument("--groups", help='";"-separated group specs (default: Z2;Z3;Z4;V4;S3)')
    p.add_argument("--max-order", type=int, default=SWEEP_MAX_ORDER)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("cdga", help="Sullivan algebras of digraphs")
    p.add_argument("action", choices=("emit", "check", "homs"))
    common(p, instance=False)
    p.add_argument("--graph", help="digraph (cycle:k, cycle-chord:k, bipath:k, complete:k or JSON path)")
    p.add_argument("--source", help="source digraph for homs")
    p.add_argument("--target", help="target digraph for homs")
    p.add_argument("--n", type=int, default=1)
    p.add_argument("--coeff-set", default="-1,0,1")
    p.add_argument("--pretty", action="store_true", help="emit: print generators and differentials as text")
    p.set_defaults(func=cmd_cdga)
    return ap


def main(argv: Sequence[str] | None = None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    except INPUT_ERRORS as exc:
        print(f"input error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    except (ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return 2
    except ArrowRealError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

"""``dendrodyn`` command line.

Exit codes: 0 success, 1 usage or parse error, 2 validation error,
3 search budget exhausted (answer unknown).
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import hyperspace, periodic, sigma
from .covering import classify
from .decomposition import NotTransitive, terminal_decomposition, verify_decomposition
from .markov import MapError
from .perturbation import (
    AttachSpec,
    ConstructionError,
    StageState,
    attach,
    dendrite_stage,
    star_mixing,
    totalize,
)
from .textio import FormatError, dumps_map, load_map, parse_rational
from .tree import Subtree, TreeError

EXIT_OK, EXIT_USAGE, EXIT_INVALID, EXIT_UNKNOWN = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _rational(text):
    try:
        value = parse_rational(text)
    except FormatError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None
    if value <= 0:
        raise argparse.ArgumentTypeError(f"{text} must be positive")
    return value


def _positive_int(text):
    try:
        n = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if n < 1:
        raise argparse.ArgumentTypeError(f"{text} must be >= 1")
    return n


def _emit(text: str, out) -> None:
    out.write(text)


def _write_map(f, path, out) -> None:
    if path:
        Path(path).write_text(dumps_map(f))
        out.write(f"wrote {path}\n")


def _point(f, ref: str):
    t = f.tree
    if ref in t.adjacency:
        return t.vertex(ref)
    if ":" not in ref:
        raise FormatError(f"unknown point {ref!r}")
    eid, off = ref.rsplit(":", 1)
    return t.point(eid, parse_rational(off))


def _edges(f, spec: str) -> Subtree:
    t = f.tree
    ids = [e for e in spec.split(",") if e]
    for e in ids:
        if e not in t.edges:
            raise FormatError(f"unknown edge {e!r}")
    return Subtree(t, [(e, 0, t.edges[e].length) for e in ids])


# -- subcommands -------------------------------------------------------------


def cmd_analyze(args, out) -> int:
    f = load_map(args.map)
    _emit(classify(f).report(), out)
    return EXIT_OK


def cmd_periodic(args, out) -> int:
    f = load_map(args.map)
    items = periodic.enumerate_periodic(f, args.max_period)
    _emit(periodic.listing(f, items), out)
    if periodic.periodic_arcs(items):
        _emit("notice: some periodic points fill whole intervals\n", out)
    if args.resolution is not None:
        cert = periodic.density_certificate(f, args.resolution, args.max_period)
        _emit(cert.report(f), out)
        if cert.status == "inconclusive":
            return EXIT_UNKNOWN
    return EXIT_OK


def cmd_decompose(args, out) -> int:
    f = load_map(args.map)
    D = terminal_decomposition(f)
    _emit(D.dump(), out)
    rep = verify_decomposition(f, D)
    _emit(rep.text(), out)
    return EXIT_OK if rep.ok else EXIT_INVALID


def cmd_totalize(args, out) -> int:
    f = load_map(args.map)
    res = totalize(f, args.eps)
    _emit(res.text(), out)
    _write_map(res.map, args.output, out)
    return EXIT_OK


def cmd_attach(args, out) -> int:
    f = load_map(args.map)
    if len(args.cycle) != len(args.point):
        raise FormatError("give one --point per --cycle")
    spec = AttachSpec(
        _edges(f, args.base),
        tuple(_edges(f, c) for c in args.cycle),
        tuple(_point(f, p) for p in args.point),
        allow_interior=args.allow_interior,
    )
    res = attach(f, spec, args.eps)
    _emit(res.text(), out)
    _write_map(res.map, args.output, out)
    return EXIT_OK


def cmd_star_mix(args, out) -> int:
    res = star_mixing(args.n, args.eps)
    _emit(res.text(), out)
    _write_map(res.map, args.output, out)
    return EXIT_OK


def cmd_stage(args, out) -> int:
    f = load_map(args.map)
    state = StageState.initial(f, args.eps)
    for ref in args.at:
        state = dendrite_stage(state, _point(state.map, ref), args.degree)
    _emit(state.text(), out)
    _write_map(state.map, args.output, out)
    return EXIT_OK


def cmd_sigma(args, out) -> int:
    words = [sigma.parse_word(w) for w in args.words]
    status = EXIT_OK
    for w in words:
        if args.collapse:
            c = sigma.verify_collapse(w)
            _emit(c.line() + "\n", out)
            status = status if c else EXIT_INVALID
        elif args.endpoint is not None:
            ok = sigma.periodic_endpoint_check(w, args.endpoint)
            _emit(f"{sigma.format_word(w)}: n={args.endpoint}, {'verified' if ok else 'FAILED'}\n", out)
            status = status if ok else EXIT_INVALID
        elif args.region is not None:
            rc = sigma.region_exactness(w, args.region)
            _emit(f"{sigma.format_word(w)}: depth={args.region}, {rc.checked} words, {len(rc.misses)} missed\n", out)
            status = status if rc else EXIT_INVALID
        else:
            steps = sigma.first_empty_time(w) if w else 0
            _emit(" -> ".join(sigma.format_word(v) for v in sigma.sigma_orbit(w, steps)) + "\n", out)
    return status


def cmd_hyper(args, out) -> int:
    f = load_map(args.map)
    rep = hyperspace.almost_meshed_reduction(f, args.max_period)
    _emit(rep.text(f), out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="dendrodyn", description="Exact dynamics of Markov maps on finite metric trees.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    a = sub.add_parser("analyze", help="covering graph, period, horizon and verdict")
    a.add_argument("map")
    a.set_defaults(run=cmd_analyze)

    a = sub.add_parser("periodic", help="list periodic orbits, optionally certify density")
    a.add_argument("map")
    a.add_argument("--max-period", type=_positive_int, default=3)
    a.add_argument("--resolution", type=_rational)
    a.set_defaults(run=cmd_periodic)

    a = sub.add_parser("decompose", help="terminal periodic decomposition and its checks")
    a.add_argument("map")
    a.set_defaults(run=cmd_decompose)

    a = sub.add_parser("totalize", help="perturb a transitive map into a mixing one")
    a.add_argument("map")
    a.add_argument("--eps", type=_rational, required=True)
    a.add_argument("-o", "--output")
    a.set_defaults(run=cmd_totalize)

    a = sub.add_parser("attach", help="glue a cycle of pieces onto an invariant base")
    a.add_argument("map")
    a.add_argument("--base", required=True, help="comma-separated edge ids")
    a.add_argument("--cycle", action="append", required=True, help="edge ids of one piece; repeat per piece")
    a.add_argument("--point", action="append", required=True, help="seam point of each piece")
    a.add_argument("--eps", type=_rational, required=True)
    a.add_argument("--allow-interior", action="store_true")
    a.add_argument("-o", "--output")
    a.set_defaults(run=cmd_attach)

    a = sub.add_parser("star-mix", help="mixing map on the n-star close to the identity")
    a.add_argument("--n", type=_positive_int, required=True)
    a.add_argument("--eps", type=_rational, required=True)
    a.add_argument("-o", "--output")
    a.set_defaults(run=cmd_star_mix)

    a = sub.add_parser("stage", help="pin periodic branch points, one stage per --at")
    a.add_argument("map")
    a.add_argument("--eps", type=_rational, required=True)
    a.add_argument("--at", action="append", default=[], help="requested branch point, edge:p/q or vertex")
    a.add_argument("--degree", type=_positive_int, default=3)
    a.add_argument("-o", "--output")
    a.set_defaults(run=cmd_stage)

    a = sub.add_parser("sigma", help="the word map on (n,j)-words")
    a.add_argument("words", nargs="+", help="words like '(2,1)(1,3)'; '-' is the empty word")
    mode = a.add_mutually_exclusive_group()
    mode.add_argument("--collapse", action="store_true")
    mode.add_argument("--endpoint", type=_positive_int, metavar="N")
    mode.add_argument("--region", type=_positive_int, metavar="DEPTH")
    a.set_defaults(run=cmd_sigma)

    a = sub.add_parser("hyper", help="periodic points on free arcs from invariant pairs")
    a.add_argument("map")
    a.add_argument("--max-period", type=_positive_int, default=6)
    a.set_defaults(run=cmd_hyper)
    return p


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    args = build_parser().parse_args(argv)
    try:
        return args.run(args, out)
    except (FormatError, sigma.WordError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (periodic.SearchInconclusive,) as exc:
        print(f"inconclusive: {exc}", file=sys.stderr)
        return EXIT_UNKNOWN
    except (MapError, TreeError, NotTransitive, ConstructionError, ValueError) as exc:
        print(f"invalid: {exc}", file=sys.stderr)
        return EXIT_INVALID


def main_exit() -> None:
    sys.exit(main())


if __name__ == "__main__":
    main_exit()

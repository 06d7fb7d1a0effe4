"""Command-line front end.

Usage:
    workbench graph diff Gamma1
    workbench graph aut "graph I=1 P=3; E: p1->1, p2->1, p3->1;"
    workbench graph enumerate --internal 2 --peripheral 2 --edges 4
    workbench weights data/manifests/su2_fundamental.json --m 4
    workbench verify graph-d2 --seed 3
    workbench export-dot data/manifests/named_graphs.json

Exit codes: 0 success, 1 a verified identity failed, 2 invalid input,
3 resource limit exceeded, 4 truncation order too low.
"""

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import TextIO

from pydantic import ValidationError

from app.config import get_settings
from app.core.correspondence import theta_cochain
from app.core.exceptions import (
    INPUT_ERRORS,
    InsufficientOrderError,
    ManifestError,
    ResourceLimitError,
)
from app.core.graphs import (
    Graph,
    GraphChain,
    aut_order,
    canonicalize,
    catalog_name,
    enumerate_graphs,
    format_chain,
    format_coefficient,
    format_graph,
    graph_differential,
    lookup_graph,
    pair,
    parse_chain,
    to_dot,
)
from app.core.identities import rw_jets
from app.core.jets import JetChart
from app.core.suites import SUITES, run_suite
from app.core.weights import (
    RWData,
    WeightResult,
    equivariant_rw_class,
    lie_weights,
    pair_with_diagram,
    rw_weights,
    weight_table,
)
from app.schemas.manifest import (
    GraphsManifest,
    JetsManifest,
    LieManifest,
    Manifest,
    RWManifest,
    format_validation_error,
    load_manifest,
)

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_INPUT = 2
EXIT_RESOURCE = 3
EXIT_ORDER = 4


class Output:
    """Writes one line per record as plain text or as a JSON object."""

    def __init__(self, fmt: str = "text", stream: TextIO | None = None) -> None:
        self.fmt = fmt
        self.stream = stream or sys.stdout

    @property
    def json(self) -> bool:
        return self.fmt == "json-lines"

    def emit(self, text: str, **record) -> None:
        if self.json:
            line = json.dumps(record, sort_keys=True, ensure_ascii=False)
        else:
            line = text
        print(line, file=self.stream)


# =============================================================================
# Input helpers
# =============================================================================


def _is_manifest(token: str | None) -> bool:
    return bool(token) and token.endswith(".json") and Path(token).is_file()


def _load(token: str, kinds: tuple[type, ...]) -> Manifest:
    manifest = load_manifest(token)
    if not isinstance(manifest, kinds):
        allowed = " or ".join(k.__name__ for k in kinds)
        raise ManifestError(f"{token}: expected a {allowed}")
    return manifest


def _graph_label(graph: Graph) -> str:
    cls = canonicalize(graph)
    named = catalog_name(cls.canonical) if not cls.is_zero else None
    return named[0] if named else format_graph(graph)


def _graphs_input(token: str) -> list[tuple[str, Graph]]:
    """Graphs of a manifest, or the single graph written on the command line."""
    if _is_manifest(token):
        manifest = _load(token, (GraphsManifest,))
        return [
            (text, graph)
            for text, graph in zip(manifest.graphs, manifest.parsed_graphs())
        ]
    return [(token, lookup_graph(token))]


def _valence(text: str) -> int | tuple[int, int]:
    lo, sep, hi = text.partition(":")
    try:
        return (int(lo), int(hi)) if sep else int(lo)
    except ValueError as e:
        raise argparse.ArgumentTypeError(
            f"valence must be N or MIN:MAX, got {text!r}"
        ) from e


# =============================================================================
# graph
# =============================================================================


def _graph_diff(args: argparse.Namespace, out: Output) -> None:
    if not _is_manifest(args.input):
        boundary = graph_differential(parse_chain(args.input or ""))
        out.emit(format_chain(boundary), differential=format_chain(boundary, " + "))
        return
    manifest = _load(args.input, (GraphsManifest,))
    for text, graph in zip(manifest.graphs, manifest.parsed_graphs()):
        boundary = format_chain(graph_differential(graph), " + ")
        out.emit(f"d {text} = {boundary}", graph=text, differential=boundary)
    chain = manifest.parsed_chain()
    if chain is not None:
        boundary = format_chain(graph_differential(chain), " + ")
        out.emit(f"d chain = {boundary}", graph="chain", differential=boundary)


def _graph_aut(args: argparse.Namespace, out: Output) -> None:
    graphs = _graphs_input(args.input)
    for text, graph in graphs:
        order = aut_order(graph)
        line = str(order) if len(graphs) == 1 else f"{text}: {order}"
        out.emit(line, graph=text, aut_order=order)


def _graph_enumerate(args: argparse.Namespace, out: Output) -> None:
    shape = dict(
        n_internal=args.internal,
        n_peripheral=args.peripheral,
        internal_valence=args.internal_valence,
        peripheral_valence=args.peripheral_valence,
        n_edges=args.edges,
    )
    if _is_manifest(args.input):
        manifest = _load(args.input, (GraphsManifest,))
        if manifest.enumeration is None:
            raise ManifestError(f"{args.input}: no enumeration block")
        shape = manifest.enumeration.model_dump()
    graphs = enumerate_graphs(**shape)
    logger.info("%d graph classes", len(graphs))
    for graph in graphs:
        out.emit(
            format_graph(graph),
            graph=format_graph(graph),
            edges=graph.n_edges,
            aut_order=aut_order(graph),
        )


def _graph_pair(args: argparse.Namespace, out: Output) -> None:
    if _is_manifest(args.input):
        manifest = _load(args.input, (GraphsManifest,))
        cochain, chain = manifest.parsed_cochain(), manifest.parsed_chain()
        if cochain is None or chain is None:
            raise ManifestError(f"{args.input}: pairing needs chain and cochain")
    else:
        if args.cochain is None:
            raise ManifestError("pairing a chain needs --cochain")
        cochain, chain = parse_chain(args.cochain), parse_chain(args.input or "")
    value = format_coefficient(pair(cochain, chain))
    out.emit(value, value=value)


GRAPH_ACTIONS = {
    "diff": _graph_diff,
    "aut": _graph_aut,
    "enumerate": _graph_enumerate,
    "pair": _graph_pair,
}


def cmd_graph(args: argparse.Namespace, out: Output) -> int:
    """Graph differential, automorphisms, enumeration and pairing."""
    if args.action != "enumerate" and args.input is None:
        raise ManifestError(f"graph {args.action} needs a graph, chain or manifest")
    GRAPH_ACTIONS[args.action](args, out)
    return EXIT_OK


# =============================================================================
# weights
# =============================================================================


def _rw_data(manifest: RWManifest | JetsManifest, order: int | None) -> RWData:
    if isinstance(manifest, RWManifest):
        return manifest.to_data()
    cd = manifest.to_connection()
    chart = JetChart.for_connection(
        cd, order=order or manifest.order, base_order=manifest.base_order
    )
    return RWData.from_jets(rw_jets(cd, chart, manifest.to_moments(cd)))


def _weights(manifest: Manifest, m: int, order: int | None) -> tuple[GraphChain, bool]:
    if isinstance(manifest, LieManifest):
        return lie_weights(manifest.to_data(), m), True
    return rw_weights(_rw_data(manifest, order), m), False


def _emit_table(rows: list[WeightResult], out: Output) -> None:
    width = max((len(row.label) for row in rows), default=0)
    for row in rows:
        value = row.value_text()
        out.emit(
            f"{row.label:<{width}}  {value}",
            label=row.label,
            value=value,
            exact=row.exact,
        )


def _emit_equivariant(
    manifest: Manifest, args: argparse.Namespace, out: Output
) -> int:
    if isinstance(manifest, LieManifest):
        raise ManifestError("equivariant classes need an rw or jets manifest")
    data = _rw_data(manifest, args.order)
    cochains = [parse_chain(text) for text in args.diagram] or [theta_cochain()]
    rows = [
        WeightResult(
            " + ".join(_graph_label(g) for g in cochain) or "0",
            equivariant_rw_class(data, cochain),
            exact=False,
        )
        for cochain in cochains
    ]
    _emit_table(rows, out)
    return EXIT_OK


def cmd_weights(args: argparse.Namespace, out: Output) -> int:
    """Weight table of a Lie, RW or jets manifest, optionally paired with diagrams."""
    manifest = _load(args.manifest, (LieManifest, RWManifest, JetsManifest))
    if args.equivariant:
        return _emit_equivariant(manifest, args, out)
    m = args.m or manifest.m
    weights, exact = _weights(manifest, m, args.order)
    if not args.diagram:
        _emit_table(weight_table(weights, exact=exact), out)
        return EXIT_OK
    _emit_table(
        [
            pair_with_diagram(weights, parse_chain(text), exact=exact)
            for text in args.diagram
        ],
        out,
    )
    return EXIT_OK


# =============================================================================
# verify
# =============================================================================


def cmd_verify(args: argparse.Namespace, out: Output) -> int:
    """Run a verification suite; the exit code is 0 iff every item passes."""
    connection = None
    order = args.order
    if args.manifest is not None:
        manifest = _load(args.manifest, (JetsManifest,))
        connection = manifest.to_connection()
        order = order or manifest.order
    report = run_suite(
        args.suite,
        seed=args.seed,
        order=order,
        instances=args.instances,
        connection=connection,
    )
    for check in report.checks:
        text = f"{'PASS' if check.passed else 'FAIL'}  {check.name}"
        if not check.passed:
            text += f"\n      residual: {check.residual}"
        out.emit(
            text,
            suite=report.suite,
            name=check.name,
            passed=check.passed,
            residual=check.residual,
        )
    out.emit(
        report.summary(),
        suite=report.suite,
        seed=report.seed,
        order=report.order,
        passed=report.passed,
    )
    return EXIT_OK if report.passed else EXIT_FAILED


# =============================================================================
# export-dot
# =============================================================================


def cmd_export_dot(args: argparse.Namespace, out: Output) -> int:
    """Write DOT for a graph or for every graph of a manifest.

    A manifest ``foo.json`` gets ``foo.dot`` next to it; a single graph goes
    to ``--output`` or stdout.
    """
    graphs = _graphs_input(args.input)
    dot = "".join(to_dot(graph, name=_graph_label(graph)) for _, graph in graphs)
    target = Path(args.output) if args.output else None
    if target is None and _is_manifest(args.input):
        target = Path(args.input).with_suffix(".dot")
    if target is None:
        out.stream.write(dot)
        return EXIT_OK
    target.write_text(dot, encoding="utf-8")
    out.emit(f"wrote {target}", path=str(target), graphs=len(graphs))
    return EXIT_OK


# =============================================================================
# Entry point
# =============================================================================


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--order", type=int, help="jet truncation order N")
    common.add_argument("--seed", type=int, help="seed of the random instances")
    common.add_argument(
        "--format",
        choices=["text", "json-lines"],
        default="text",
        help="output format (default: text)",
    )
    parser = argparse.ArgumentParser(
        prog="workbench",
        description="Graph complexes, weight systems and jet identities",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    graph = sub.add_parser(
        "graph", parents=[common], help="graph complex operations"
    )
    graph.add_argument("action", choices=list(GRAPH_ACTIONS))
    graph.add_argument(
        "input",
        nargs="?",
        help="graphs manifest, graph text, catalog name or chain lines",
    )
    graph.add_argument("--cochain", help="cochain to pair with the input chain")
    graph.add_argument("--internal", type=int, default=0)
    graph.add_argument("--peripheral", type=int, default=0)
    graph.add_argument("--edges", type=int)
    graph.add_argument("--internal-valence", type=_valence, default=3)
    graph.add_argument("--peripheral-valence", type=_valence, default=1)
    graph.set_defaults(handler=cmd_graph)

    weights = sub.add_parser(
        "weights", parents=[common], help="weight table of a manifest"
    )
    weights.add_argument("manifest", help="lie, rw or jets manifest")
    weights.add_argument("--m", type=int, help="number of vertices")
    weights.add_argument(
        "--diagram",
        action="append",
        default=[],
        help="diagram cochain to pair with the weights (repeatable)",
    )
    weights.add_argument(
        "--equivariant",
        action="store_true",
        help="evaluate trivalent cocycles on Theta + M instead",
    )
    weights.set_defaults(handler=cmd_weights)

    verify = sub.add_parser(
        "verify", parents=[common], help="run a verification suite"
    )
    verify.add_argument("suite", choices=list(SUITES))
    verify.add_argument("manifest", nargs="?", help="jets manifest")
    verify.add_argument("--instances", type=int, help="random instances per item")
    verify.set_defaults(handler=cmd_verify)

    export = sub.add_parser(
        "export-dot", parents=[common], help="write graphs as DOT"
    )
    export.add_argument("input", help="graphs manifest, graph text or catalog name")
    export.add_argument("--output", help="DOT file to write")
    export.set_defaults(handler=cmd_export_dot)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=get_settings().log_level,
        format="%(levelname)s %(name)s: %(message)s",
    )
    out = Output(args.format)
    try:
        return args.handler(args, out)
    except ValidationError as e:
        print(f"error: {format_validation_error(e)}", file=sys.stderr)
        return EXIT_INPUT
    except INPUT_ERRORS as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT
    except ResourceLimitError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_RESOURCE
    except InsufficientOrderError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_ORDER


if __name__ == "__main__":
    sys.exit(main())

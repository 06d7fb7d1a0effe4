"""Graph complex API endpoints."""

from fastapi import APIRouter

from app.api.deps import http_error
from app.core.exceptions import WorkbenchError
from app.core.graphs import (
    NAMED_GRAPHS,
    aut_order,
    canonicalize,
    chain_entries,
    format_chain,
    format_coefficient,
    format_graph,
    graph_differential,
    lookup_graph,
    pair,
    parse_chain,
)
from app.schemas.graphs import (
    AutResponse,
    CatalogEntry,
    ChainRequest,
    ChainResponse,
    ChainTerm,
    GraphRequest,
    PairRequest,
    PairResponse,
)

router = APIRouter()


@router.post("/differential", response_model=ChainResponse)
async def differential(chain_in: ChainRequest):
    """Graph differential of a chain, one ``coeff * graph`` per line."""
    try:
        boundary = graph_differential(parse_chain(chain_in.chain))
    except WorkbenchError as e:
        raise http_error(e) from e
    return ChainResponse(
        terms=[
            ChainTerm(label=label, coefficient=format_coefficient(coeff))
            for label, coeff in chain_entries(boundary)
        ],
        text=format_chain(boundary),
    )


@router.post("/aut", response_model=AutResponse)
async def automorphisms(graph_in: GraphRequest):
    """Order of the automorphism group and the canonical representative."""
    try:
        graph = lookup_graph(graph_in.graph)
    except WorkbenchError as e:
        raise http_error(e) from e
    cls = canonicalize(graph)
    return AutResponse(
        graph=format_graph(graph),
        canonical=format_graph(cls.canonical),
        aut_order=aut_order(graph),
        is_zero=cls.is_zero,
    )


@router.post("/pair", response_model=PairResponse)
async def pair_chains(pair_in: PairRequest):
    """Pair a cochain with a chain on canonical classes."""
    try:
        value = pair(parse_chain(pair_in.cochain), parse_chain(pair_in.chain))
    except WorkbenchError as e:
        raise http_error(e) from e
    return PairResponse(value=format_coefficient(value))


@router.get("/catalog", response_model=list[CatalogEntry])
async def catalog():
    """Named graphs with their automorphism counts."""
    return [
        CatalogEntry(name=name, graph=format_graph(graph), aut_order=aut_order(graph))
        for name, graph in NAMED_GRAPHS.items()
    ]

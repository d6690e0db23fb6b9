"""Upper bounds: the level-by-level clique search program and the refutations
derived from it for colourable and homomorphic graphs."""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Callable, Mapping, Sequence

from .cnf import CnfFormula, encode_clique, map_var
from .graph import Graph, bits, has_k_clique, popcount
from .robp import BranchingProgram, ProgramBuilder, ResolutionProof, restrict_proof, robp_to_refutation


class ConstructionError(ValueError):
    pass


@dataclass(frozen=True)
class CliqueIndex:
    """Distinct common neighbourhoods of cliques, each with its induced subgraph."""
    entries: dict[frozenset[int], Graph]

    def __len__(self):
        return len(self.entries)

    def keys(self):
        return self.entries.keys()


def clique_index(g: Graph) -> CliqueIndex:
    """I(G), keyed by vertex set.

    Extending a clique R by v in N(R) replaces N(R) with N(R) & N(v), so a
    search over the sets themselves reaches every key once.
    """
    start = g.vertex_mask
    seen = {start}
    queue = deque([start])
    while queue:
        w = queue.popleft()
        for v in bits(w):
            nxt = w & g.adj[v]
            if nxt not in seen:
                seen.add(nxt)
                queue.append(nxt)
    entries = {}
    for w in sorted(seen, key=lambda m: (popcount(m), m)):
        key = frozenset(bits(w))
        entries[key] = g.induced(key)[0]
    return CliqueIndex(entries)


def alg1_bound(index_size: int, k: int, n: int) -> int:
    return index_size * k * k * n * n


# ---------------------------------------------------------------------------
# the level program


def level_program(builder: ProgramBuilder, adj: Sequence[int], w0: int, k: int,
                  var_fn: Callable[[int, int], int | None],
                  edge_sink: Callable[[int, int, int, int], int],
                  clique_sink: Callable[[int], int]) -> int:
    """Root of the search program for "no k-clique inside ``w0``".

    Level ``kk`` (counting down from ``k``) with candidate set ``W`` queries
    ``x_{v,kk}`` for v in W in ascending order; on the first 1 it checks
    ``x_{w,i}`` for w in W outside N(v) and i < kk, then continues with
    ``W & N(v)`` at level ``kk - 1``. If every query is 0 the clique axiom of
    position ``kk`` is falsified. Sub-programs are shared per (W, kk).

    ``var_fn`` returns ``None`` for variables known to be 0, which are skipped.
    The caller guarantees that variables of vertices outside ``w0`` at
    positions ``<= k`` are 0 on every path into the returned root.
    """
    memo: dict[tuple[int, int], int] = {}

    def level(w: int, kk: int) -> int:
        key = (w, kk)
        if key in memo:
            return memo[key]
        if kk == 0:
            raise ConstructionError("candidate set contains a clique of the target size")
        members = list(bits(w))
        cont = clique_sink(kk)
        for v in reversed(members):
            x = var_fn(v, kk)
            if x is None:
                continue
            cont = builder.node(x, cont, chain(w, kk, v))
        memo[key] = cont
        return cont

    def chain(w: int, kk: int, v: int) -> int:
        target = level(w & adj[v], kk - 1)
        for u in reversed(list(bits(w & ~adj[v]))):
            for i in range(kk - 1, 0, -1):
                x = var_fn(u, i)
                if x is None:
                    continue
                target = builder.node(x, target, edge_sink(v, kk, u, i))
        return target

    return level(w0, k)


def build_search_program(g: Graph, k: int, check: bool = True) -> BranchingProgram:
    """Read-once program for the weak encoding of ``g`` (no functionality axioms).

    Sink labels index ``encode_clique(g, k, include_functionality=False)``.
    """
    if k < 1:
        raise ValueError("k must be positive")
    if check and has_k_clique(g, k, limit=max(g.n, 1)):
        raise ConstructionError(f"graph contains a {k}-clique")
    f = encode_clique(g, k, include_functionality=False)
    return _build_for(g, k, f)


def _build_for(g: Graph, k: int, f: CnfFormula) -> BranchingProgram:
    b = ProgramBuilder()
    x = lambda v, i: map_var(v, i, k)
    root = level_program(
        b, g.adj, g.vertex_mask, k, x,
        lambda v, i, u, j: b.sink(f.index_of((-x(v, i), -x(u, j)))),
        lambda i: b.sink(f.clique_axiom(i)),
    )
    return b.build(root)


# ---------------------------------------------------------------------------
# blow-ups, colourings, homomorphisms


def blow_up(h: Graph, cloud_sizes: Sequence[int]) -> tuple[Graph, list[int]]:
    """Replace vertex u of ``h`` by an independent cloud of ``cloud_sizes[u]`` vertices."""
    if len(cloud_sizes) != h.n or any(c < 0 for c in cloud_sizes):
        raise ValueError("need one non-negative cloud size per vertex")
    owner = [u for u in range(h.n) for _ in range(cloud_sizes[u])]
    return pullback(h, owner), owner


def pullback(h: Graph, hom: Sequence[int]) -> Graph:
    """Graph on len(hom) vertices with u ~ v iff hom[u] ~ hom[v] in ``h``."""
    n = len(hom)
    fibre = [0] * h.n
    for v, img in enumerate(hom):
        fibre[img] |= 1 << v
    adj = []
    for v in range(n):
        m = 0
        for t in bits(h.adj[hom[v]]):
            m |= fibre[t]
        adj.append(m)
    return Graph(n, tuple(adj))


def is_homomorphism(g: Graph, h_graph: Graph, hom: Sequence[int]) -> bool:
    if len(hom) != g.n or any(not 0 <= t < h_graph.n for t in hom):
        return False
    return all(h_graph.has_edge(hom[u], hom[v]) for u, v in g.edges())


def colour_classes(colouring: Sequence[int]) -> list[list[int]]:
    labels = sorted(set(colouring))
    pos = {c: i for i, c in enumerate(labels)}
    classes: list[list[int]] = [[] for _ in labels]
    for v, c in enumerate(colouring):
        classes[pos[c]].append(v)
    return classes


def greedy_colouring(g: Graph) -> list[int]:
    colour = [-1] * g.n
    for v in range(g.n):
        used = {colour[u] for u in bits(g.adj[v]) if colour[u] >= 0}
        c = 0
        while c in used:
            c += 1
        colour[v] = c
    return colour


def refute_colourable(g: Graph, colouring: Sequence[int], k: int) -> ResolutionProof:
    """Regular refutation of the weak encoding of a (k-1)-colourable graph."""
    if len(colouring) != g.n:
        raise ValueError("colouring must assign every vertex")
    for u, v in g.edges():
        if colouring[u] == colouring[v]:
            raise ConstructionError(f"colouring is improper on edge {u}-{v}")
    classes = colour_classes(colouring)
    if len(classes) > k - 1:
        raise ConstructionError(f"colouring uses {len(classes)} colours, more than k-1 = {k - 1}")
    sup = Graph.complete_multipartite(classes, g.n)
    return _refute_via(sup, g, k)


def refute_homomorphic(g: Graph, h_graph: Graph, hom: Sequence[int], k: int) -> ResolutionProof:
    """Regular refutation of the weak encoding of ``g`` through a map into a
    k-clique-free graph ``h_graph``."""
    if not is_homomorphism(g, h_graph, hom):
        raise ConstructionError("map is not a homomorphism")
    if has_k_clique(h_graph, k, limit=max(h_graph.n, 1)):
        raise ConstructionError(f"target graph contains a {k}-clique")
    # the blow-up of h_graph along the fibres, laid out on g's own vertex ids
    return _refute_via(pullback(h_graph, hom), g, k)


def _refute_via(sup: Graph, g: Graph, k: int) -> ResolutionProof:
    f_sup = encode_clique(sup, k, include_functionality=False)
    p = _build_for(sup, k, f_sup)
    pi = robp_to_refutation(p, f_sup)
    return transfer_refutation(pi, sup, g, k)


def transfer_refutation(pi: ResolutionProof, g_super: Graph, g_sub: Graph, k: int,
                        embedding: Sequence[int] | None = None) -> ResolutionProof:
    """Refutation for a subgraph from one for a supergraph, never longer.

    ``embedding[u]`` is the vertex of ``g_super`` playing sub-vertex ``u``
    (identity by default). Variables of super-vertices outside the image are
    set to 0 and the rest are renamed to the subgraph's variables.
    """
    emb = list(range(g_sub.n)) if embedding is None else list(embedding)
    if len(emb) != g_sub.n or len(set(emb)) != len(emb) or any(not 0 <= v < g_super.n for v in emb):
        raise ConstructionError("embedding must be injective into the supergraph")
    for u, v in g_sub.edges():
        if not g_super.has_edge(emb[u], emb[v]):
            raise ConstructionError(f"edge {u}-{v} of the subgraph is missing from the supergraph")
    image = set(emb)
    rho = {map_var(v, i, k): 0 for v in range(g_super.n) if v not in image for i in range(1, k + 1)}
    rename = {map_var(emb[u], i, k): map_var(u, i, k) for u in range(g_sub.n) for i in range(1, k + 1)}
    return restrict_proof(pi, rho, rename)

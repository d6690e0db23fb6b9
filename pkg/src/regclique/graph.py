"""Undirected simple graphs over dense vertex ids, stored as adjacency bitsets.

Vertex sets are passed around as Python ``int`` bitmasks internally (bit ``v``
set means vertex ``v`` is in the set). Public functions accept any iterable of
vertices and return ``frozenset`` where a set is the natural answer.
"""
from __future__ import annotations

import io
import math
import os
from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

import numpy as np

DEFAULT_ORACLE_LIMIT = int(os.environ.get("REGCLIQUE_ORACLE_LIMIT", "40"))


class OracleLimitError(ValueError):
    """An exponential routine was asked to handle an instance above its limit."""


# ---------------------------------------------------------------------------
# bitmask helpers


def mask_of(vertices: Iterable[int]) -> int:
    m = 0
    for v in vertices:
        m |= 1 << v
    return m


def bits(mask: int) -> Iterator[int]:
    """Yield the set bits of ``mask`` in increasing order."""
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def popcount(mask: int) -> int:
    return bin(mask).count("1")


def lowest(mask: int) -> int:
    return (mask & -mask).bit_length() - 1


def as_mask(vertices) -> int:
    if isinstance(vertices, int):
        return vertices
    return mask_of(vertices)


# ---------------------------------------------------------------------------
# Graph


@dataclass(frozen=True)
class Graph:
    n: int
    adj: tuple[int, ...]

    def __post_init__(self):
        if len(self.adj) != self.n:
            raise ValueError("adjacency length does not match n")
        full = (1 << self.n) - 1
        for v, a in enumerate(self.adj):
            if a >> v & 1:
                raise ValueError(f"loop at vertex {v}")
            if a & ~full:
                raise ValueError(f"vertex {v} adjacent to id outside [0, n)")
            for u in bits(a):
                if not self.adj[u] >> v & 1:
                    raise ValueError(f"asymmetric adjacency between {u} and {v}")

    # constructors ---------------------------------------------------------

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int]]) -> "Graph":
        adj = [0] * n
        for u, v in edges:
            if u == v:
                raise ValueError(f"loop at vertex {u}")
            adj[u] |= 1 << v
            adj[v] |= 1 << u
        return cls(n, tuple(adj))

    @classmethod
    def empty(cls, n: int) -> "Graph":
        return cls(n, (0,) * n)

    @classmethod
    def complete(cls, n: int) -> "Graph":
        full = (1 << n) - 1
        return cls(n, tuple(full & ~(1 << v) for v in range(n)))

    @classmethod
    def cycle(cls, n: int) -> "Graph":
        return cls.from_edges(n, [(i, (i + 1) % n) for i in range(n)])

    @classmethod
    def path(cls, n: int) -> "Graph":
        return cls.from_edges(n, [(i, i + 1) for i in range(n - 1)])

    @classmethod
    def complete_multipartite(cls, classes: Sequence[Iterable[int]], n: int | None = None) -> "Graph":
        """All edges between distinct classes, none inside a class."""
        masks = [mask_of(c) for c in classes]
        if n is None:
            n = max((m.bit_length() for m in masks), default=0)
        full = (1 << n) - 1
        adj = [0] * n
        for m in masks:
            for v in bits(m):
                adj[v] = full & ~m
        return cls(n, tuple(adj))

    # queries --------------------------------------------------------------

    @property
    def vertex_mask(self) -> int:
        return (1 << self.n) - 1

    def has_edge(self, u: int, v: int) -> bool:
        return bool(self.adj[u] >> v & 1)

    def neighbours(self, v: int) -> frozenset[int]:
        return frozenset(bits(self.adj[v]))

    def degree(self, v: int) -> int:
        return popcount(self.adj[v])

    def edges(self) -> list[tuple[int, int]]:
        return [(u, v) for u in range(self.n) for v in bits(self.adj[u] >> (u + 1) << (u + 1))]

    @property
    def num_edges(self) -> int:
        return sum(popcount(a) for a in self.adj) // 2

    def is_clique(self, vertices: Iterable[int]) -> bool:
        vs = list(vertices)
        m = mask_of(vs)
        return all((self.adj[v] | 1 << v) & m == m for v in vs)

    def induced(self, vertices: Iterable[int]) -> tuple["Graph", list[int]]:
        """Induced subgraph relabelled to ``0..m-1``; also returns new->old ids."""
        old = sorted(set(vertices))
        index = {v: i for i, v in enumerate(old)}
        adj = []
        for v in old:
            adj.append(mask_of(index[u] for u in bits(self.adj[v]) if u in index))
        return Graph(len(old), tuple(adj)), old

    def restrict_edges(self, keep: int) -> "Graph":
        """Same vertex set, only the edges inside the vertex mask ``keep``."""
        return Graph(self.n, tuple(a & keep if keep >> v & 1 else 0 for v, a in enumerate(self.adj)))


# ---------------------------------------------------------------------------
# partitions


@dataclass(frozen=True)
class Partition:
    blocks: tuple[frozenset[int], ...]

    @property
    def k(self) -> int:
        return len(self.blocks)

    @property
    def n(self) -> int:
        return sum(len(b) for b in self.blocks)

    def block_of(self) -> list[int]:
        owner = [-1] * self.n
        for i, b in enumerate(self.blocks):
            for v in b:
                owner[v] = i
        return owner

    def block_masks(self) -> list[int]:
        return [mask_of(b) for b in self.blocks]

    def is_balanced(self) -> bool:
        sizes = [len(b) for b in self.blocks]
        return max(sizes) - min(sizes) <= 1 if sizes else True

    def check(self, n: int) -> None:
        seen: set[int] = set()
        for b in self.blocks:
            if seen & b:
                raise ValueError("blocks are not disjoint")
            seen |= b
        if seen != set(range(n)):
            raise ValueError("blocks do not cover the vertex set")


def balanced_partition(n: int, k: int) -> Partition:
    """Contiguous ranges; the first ``n % k`` blocks get one extra vertex."""
    if k < 1 or k > n:
        raise ValueError(f"need 1 <= k <= n, got k={k}, n={n}")
    size, extra = divmod(n, k)
    blocks, start = [], 0
    for i in range(k):
        end = start + size + (1 if i < extra else 0)
        blocks.append(frozenset(range(start, end)))
        start = end
    return Partition(tuple(blocks))


# ---------------------------------------------------------------------------
# Erdős–Rényi sampling


@dataclass(frozen=True)
class ErParams:
    n: int
    k: int
    xi: float
    seed: int = 0

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be positive")
        if self.k < 2:
            raise ValueError("k must be at least 2 for the edge-probability formula")
        if self.xi <= 0:
            raise ValueError("xi must be positive")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")

    @property
    def delta(self) -> float:
        return 2 * self.xi / (self.k - 1)

    @property
    def p(self) -> float:
        return float(self.n) ** (-self.delta)


def pair_index(u: int, v: int) -> int:
    """Position of the unordered pair {u, v} in the colexicographic pair order."""
    if u > v:
        u, v = v, u
    return v * (v - 1) // 2 + u


def pair_uniforms(count: int, seed: int) -> np.ndarray:
    """First ``count`` doubles of the Philox4x64 stream keyed by ``seed``.

    Entry ``pair_index(u, v)`` decides edge {u, v}; the stream does not depend
    on ``n``, so a graph on fewer vertices is the induced subgraph of a larger
    one sampled with the same seed and p.
    """
    gen = np.random.Generator(np.random.Philox(key=seed))
    return gen.random(count)


def sample_er(params: ErParams | None = None, *, n: int | None = None, p: float | None = None,
              seed: int = 0) -> Graph:
    """Sample G(n, p). Either pass ``ErParams`` or explicit ``n``/``p``/``seed``."""
    if params is not None:
        n, p, seed = params.n, params.p, params.seed
    if n is None or p is None:
        raise TypeError("sample_er needs ErParams or both n and p")
    if not 0.0 <= p <= 1.0 or math.isnan(p):
        raise ValueError(f"edge probability {p} outside [0, 1]")
    if n < 1:
        raise ValueError("n must be positive")
    draws = pair_uniforms(n * (n - 1) // 2, seed)
    adj = [0] * n
    idx = 0
    for v in range(1, n):
        row = draws[idx: idx + v] < p
        idx += v
        for u in np.flatnonzero(row):
            u = int(u)
            adj[u] |= 1 << v
            adj[v] |= 1 << u
    return Graph(n, tuple(adj))


# ---------------------------------------------------------------------------
# neighbourhoods and cliques


def common_neighbourhood(g: Graph, r_set, w) -> frozenset[int]:
    """Common neighbours of ``r_set`` inside ``w``; the empty family gives ``w``."""
    return frozenset(bits(common_neighbourhood_mask(g, as_mask(r_set), as_mask(w))))


def common_neighbourhood_mask(g: Graph, r_mask: int, w_mask: int) -> int:
    m = w_mask
    for v in bits(r_mask):
        m &= g.adj[v]
        if not m:
            break
    return m


def _check_limit(g: Graph, limit: int | None) -> None:
    limit = DEFAULT_ORACLE_LIMIT if limit is None else limit
    if g.n > limit:
        raise OracleLimitError(f"graph has {g.n} vertices, oracle limit is {limit}")


def max_clique_brute(g: Graph, limit: int | None = None) -> frozenset[int]:
    """A maximum clique by pivoted Bron-Kerbosch enumeration of maximal cliques."""
    _check_limit(g, limit)
    best = 0
    best_size = 0
    adj = g.adj

    def bk(r: int, r_size: int, p: int, x: int) -> None:
        nonlocal best, best_size
        if not p:
            if not x and r_size > best_size:
                best, best_size = r, r_size
            return
        if r_size + popcount(p) <= best_size:
            return
        pivot = max(bits(p | x), key=lambda u: popcount(p & adj[u]))
        for v in bits(p & ~adj[pivot]):
            bk(r | 1 << v, r_size + 1, p & adj[v], x & adj[v])
            p &= ~(1 << v)
            x |= 1 << v

    bk(0, 0, g.vertex_mask, 0)
    return frozenset(bits(best))


def clique_number(g: Graph, limit: int | None = None) -> int:
    return len(max_clique_brute(g, limit))


def has_k_clique(g: Graph, k: int, limit: int | None = None) -> bool:
    """Depth-bounded search for a clique of size ``k``."""
    _check_limit(g, limit)
    adj = g.adj

    def grow(cand: int, need: int) -> bool:
        if need == 0:
            return True
        if popcount(cand) < need:
            return False
        for v in bits(cand):
            cand &= ~(1 << v)
            if grow(cand & adj[v], need - 1):
                return True
            if popcount(cand) < need:
                return False
        return False

    return grow(g.vertex_mask, k)


def has_transversal_clique(g: Graph, part: Partition) -> bool:
    """True iff some clique picks exactly one vertex from every block."""
    masks = sorted(part.block_masks(), key=popcount)
    adj = g.adj

    def pick(i: int, allowed: int) -> bool:
        if i == len(masks):
            return True
        for v in bits(masks[i] & allowed):
            if pick(i + 1, allowed & adj[v]):
                return True
        return False

    return pick(0, g.vertex_mask)


# ---------------------------------------------------------------------------
# DIMACS graph format ("p edge n m" / "e u v", 1-based)


def write_dimacs_graph(g: Graph, comments: Sequence[str] = ()) -> str:
    out = io.StringIO()
    for c in comments:
        out.write(f"c {c}\n")
    edges = g.edges()
    out.write(f"p edge {g.n} {len(edges)}\n")
    for u, v in edges:
        out.write(f"e {u + 1} {v + 1}\n")
    return out.getvalue()


def read_dimacs_graph(text: str) -> Graph:
    n = None
    edges = []
    for lineno, line in enumerate(text.splitlines(), 1):
        parts = line.split()
        if not parts or parts[0] == "c":
            continue
        if parts[0] == "p":
            if len(parts) < 4 or parts[1] not in ("edge", "col"):
                raise ValueError(f"line {lineno}: bad problem line {line!r}")
            n = int(parts[2])
        elif parts[0] == "e":
            if n is None:
                raise ValueError(f"line {lineno}: edge before problem line")
            u, v = int(parts[1]) - 1, int(parts[2]) - 1
            if not (0 <= u < n and 0 <= v < n):
                raise ValueError(f"line {lineno}: vertex out of range")
            if u != v:
                edges.append((u, v))
        else:
            raise ValueError(f"line {lineno}: unknown record {parts[0]!r}")
    if n is None:
        raise ValueError("missing 'p edge' line")
    return Graph.from_edges(n, edges)

"""Russian doll search (Cliquer) and colour-based branch and bound, with
decision versions and extraction of read-once programs for the block encoding.

Both solvers work on bitmasks over positions in a fixed vertex order and
report cliques in the caller's vertex ids.
"""
from __future__ import annotations

import sys
from contextlib import contextmanager
from dataclasses import dataclass, field

from .cnf import encode_clique_block
from .construct import level_program
from .graph import Graph, Partition, bits, has_transversal_clique, lowest, popcount
from .robp import BranchingProgram, ProgramBuilder


class ExtractionError(ValueError):
    pass


@dataclass
class SearchStats:
    expand_calls: int = 0
    branches: int = 0
    cuts_size: int = 0
    cuts_bounds: int = 0
    cuts_colour: int = 0
    incumbent_history: list[int] = field(default_factory=list)

    @property
    def tree_nodes(self) -> int:
        return self.expand_calls + self.branches


@dataclass
class SolverTrace:
    """Events: ("enter",), ("leave",), ("take", v), ("exclude", v), ("cut", reason)."""
    events: list[tuple] = field(default_factory=list)
    bounds: dict[int, int] = field(default_factory=dict)

    def balanced(self) -> bool:
        depth = 0
        for ev in self.events:
            depth += {"enter": 1, "leave": -1}.get(ev[0], 0)
            if depth < 0:
                return False
        return depth == 0


class _Stop(Exception):
    pass


@contextmanager
def _deep_recursion(limit: int = 20000):
    old = sys.getrecursionlimit()
    sys.setrecursionlimit(max(old, limit))
    try:
        yield
    finally:
        sys.setrecursionlimit(old)


# ---------------------------------------------------------------------------
# orders and colourings


def degeneracy_order(g: Graph) -> list[int]:
    """Smallest-last order reversed: the last vertex removed comes first."""
    remaining = g.vertex_mask
    removed = []
    while remaining:
        v = min(bits(remaining), key=lambda u: (popcount(g.adj[u] & remaining), u))
        removed.append(v)
        remaining &= ~(1 << v)
    return removed[::-1]


permute = degeneracy_order


def _greedy_classes(adj, seq) -> list[int]:
    classes: list[int] = []
    for v in seq:
        for c, m in enumerate(classes):
            if not m & adj[v]:
                classes[c] = m | 1 << v
                break
        else:
            classes.append(1 << v)
    return classes


def _colour_order(adj, h: int, rank: list[int]) -> tuple[list[int], list[int], list[int]]:
    seq = sorted(bits(h), key=rank.__getitem__)
    classes = _greedy_classes(adj, seq)
    order, bounds = [], [0]
    for c, m in enumerate(classes):
        for v in sorted(bits(m), key=rank.__getitem__):
            order.append(v)
            bounds.append(c + 1)
    return order, bounds, classes


def colour_order(h: Graph) -> tuple[list[int], list[int]]:
    """Greedy sequential colouring in degeneracy order; ``order`` lists colour
    classes in ascending order and ``bounds[i]`` (1-based, ``bounds[0] == 0``)
    counts the classes among the first i vertices."""
    seq = degeneracy_order(h)
    rank = [0] * h.n
    for i, v in enumerate(seq):
        rank[v] = i
    order, bounds, _ = _colour_order(h.adj, h.vertex_mask, rank)
    return order, bounds


def compatibility_graph(g: Graph, part: Partition) -> Graph:
    """``g`` without edges inside blocks: its cliques are the block-respecting ones."""
    part.check(g.n)
    block = part.block_of()
    masks = part.block_masks()
    return Graph(g.n, tuple(g.adj[v] & ~masks[block[v]] for v in range(g.n)))


# ---------------------------------------------------------------------------
# Cliquer


class _Cliquer:
    def __init__(self, g: Graph, prunes: bool, stop_at: int | None, record: bool):
        self.order = permute(g)
        n = g.n
        pos = {v: i for i, v in enumerate(self.order)}
        # positions: bit i stands for self.order[i]
        self.adj = [sum(1 << pos[u] for u in bits(g.adj[v])) for v in self.order]
        self.n = n
        self.prunes, self.stop_at, self.record = prunes, stop_at, record
        self.incumbent: list[int] = []
        self.bounds = [0] * (n + 1)
        self.found = False
        self.stats = SearchStats()
        self.trace = SolverTrace()

    def ev(self, *e):
        if self.record:
            self.trace.events.append(e)

    def run(self):
        try:
            for i in range(self.n - 1, -1, -1):
                self.found = False
                above = ~((1 << (i + 1)) - 1)
                self.expand(self.adj[i] & above, [i])
                self.bounds[i] = len(self.incumbent)
                self.trace.bounds[i] = self.bounds[i]
        except _Stop:
            pass
        return frozenset(self.order[i] for i in self.incumbent)

    def expand(self, h: int, solution: list[int]):
        self.stats.expand_calls += 1
        self.ev("enter")
        while h:
            if self.prunes and len(solution) + popcount(h) <= len(self.incumbent):
                self.stats.cuts_size += 1
                self.ev("cut", "size")
                self.ev("leave")
                return
            i = lowest(h)
            if self.prunes and len(solution) + self.bounds[i] <= len(self.incumbent):
                self.stats.cuts_bounds += 1
                self.ev("cut", "bounds")
                self.ev("leave")
                return
            self.stats.branches += 1
            self.ev("take", self.order[i])
            self.expand(h & self.adj[i], solution + [i])
            if self.found:
                self.ev("leave")
                return
            self.ev("exclude", self.order[i])
            h &= ~(1 << i)
        if len(solution) > len(self.incumbent):
            self.incumbent = solution
            self.stats.incumbent_history.append(len(solution))
            self.found = True
            if self.stop_at is not None and len(solution) >= self.stop_at:
                raise _Stop
        self.ev("leave")


def cliquer(g: Graph, prunes: bool = True, record: bool = False, stop_at: int | None = None):
    """Maximum clique by Russian doll search: (clique, stats, trace).

    ``trace.bounds[i]`` is the clique number of the suffix starting at
    position i of the search order (``permute(g)``).
    """
    with _deep_recursion():
        s = _Cliquer(g, prunes, stop_at, record)
        clique = s.run()
    return clique, s.stats, s.trace


def suffix_clique_numbers(g: Graph) -> tuple[list[int], list[int]]:
    """(order, bounds) from a full Cliquer run; bounds[i] = omega(G[order[i:]])."""
    with _deep_recursion():
        s = _Cliquer(g, True, None, False)
        s.run()
    return s.order, s.bounds


# ---------------------------------------------------------------------------
# colour-based branch and bound


class _BranchAndBound:
    def __init__(self, g: Graph, prunes: bool, floor: int, stop_at: int | None, record: bool):
        self.g = g
        seq = degeneracy_order(g)
        self.rank = [0] * g.n
        for i, v in enumerate(seq):
            self.rank[v] = i
        self.prunes, self.floor, self.stop_at, self.record = prunes, floor, stop_at, record
        self.incumbent: list[int] = []
        self.stats = SearchStats()
        self.trace = SolverTrace()

    def ev(self, *e):
        if self.record:
            self.trace.events.append(e)

    def best(self) -> int:
        return max(len(self.incumbent), self.floor)

    def run(self):
        try:
            self.expand(self.g.vertex_mask, [])
        except _Stop:
            pass
        return frozenset(self.incumbent)

    def expand(self, h: int, solution: list[int]):
        self.stats.expand_calls += 1
        self.ev("enter")
        order, bounds, _ = _colour_order(self.g.adj, h, self.rank)
        while h:
            i = popcount(h)
            if self.prunes and len(solution) + bounds[i] <= self.best():
                self.stats.cuts_colour += 1
                self.ev("cut", "colour")
                self.ev("leave")
                return
            v = order[i - 1]
            self.stats.branches += 1
            self.ev("take", v)
            self.expand(h & self.g.adj[v], solution + [v])
            self.ev("exclude", v)
            h &= ~(1 << v)
        if len(solution) > self.best():
            self.incumbent = solution
            self.stats.incumbent_history.append(len(solution))
            if self.stop_at is not None and len(solution) >= self.stop_at:
                raise _Stop
        self.ev("leave")


def max_clique_bb(g: Graph, prunes: bool = True, record: bool = False):
    """Maximum clique by colour-bounded branch and bound: (clique, stats, trace)."""
    with _deep_recursion():
        s = _BranchAndBound(g, prunes, 0, None, record)
        clique = s.run()
    return clique, s.stats, s.trace


def clique_decision(g: Graph, k: int, part: Partition | None = None, algo: str = "cliquer",
                    stats: SearchStats | None = None) -> bool:
    """Whether ``g`` has a k-clique, or with ``part`` a transversal clique
    (then ``k`` must equal the number of blocks).

    Block mode searches the compatibility graph, where every clique takes at
    most one vertex per block.
    """
    if part is not None:
        if k != part.k:
            raise ValueError("in block mode k must equal the number of blocks")
        g = compatibility_graph(g, part)
    if k <= 0:
        return True
    with _deep_recursion():
        if algo == "cliquer":
            s = _Cliquer(g, True, k, False)
        elif algo == "bb":
            s = _BranchAndBound(g, True, k - 1, k, False)
        else:
            raise ValueError(f"unknown algorithm {algo!r}")
        clique = s.run()
    if stats is not None:
        for name in ("expand_calls", "branches", "cuts_size", "cuts_bounds", "cuts_colour"):
            setattr(stats, name, getattr(stats, name) + getattr(s.stats, name))
        stats.incumbent_history.extend(s.stats.incumbent_history)
    return len(clique) >= k


# ---------------------------------------------------------------------------
# extraction


def _check_extractable(g: Graph, part: Partition):
    part.check(g.n)
    if has_transversal_clique(g, part):
        raise ExtractionError("graph has a transversal clique")


def extract_robp_cliquer(g: Graph, part: Partition) -> BranchingProgram:
    """Read-once program for the block encoding woven from block-respecting
    Russian doll search trees.

    Sub-program P(i, L) decides that no clique of the compatibility graph
    inside positions >= i covers the blocks in L, on inputs where every vertex
    of those blocks before position i is 0. Its root branches on position i.
    A bounds cut in the search tree at position j with open blocks L' first
    queries the unqueried vertices of L' between i and j (each of which
    conflicts with a chosen vertex) and then continues in P(j, L').
    """
    _check_extractable(g, part)
    f = encode_clique_block(g, part)
    gb = compatibility_graph(g, part)
    order, bounds = suffix_clique_numbers(gb)
    n = g.n
    pos = {v: i for i, v in enumerate(order)}
    adj = [sum(1 << pos[u] for u in bits(gb.adj[v])) for v in order]
    block_of = part.block_of()
    blk = [block_of[v] for v in order]
    bmask = [0] * part.k
    for i, b in enumerate(blk):
        bmask[b] |= 1 << i
    last = [m.bit_length() - 1 for m in bmask]
    b = ProgramBuilder()
    var = lambda i: order[i] + 1

    def blocks_mask(lset: int) -> int:
        return sum(bmask[c] for c in bits(lset))

    def conflict(u: int, chosen: list[int]) -> int:
        for r in chosen:
            if not adj[u] >> r & 1:
                return b.sink(f.index_of((-var(u), -var(r))))
        raise ExtractionError(f"vertex {order[u]} has no conflict with the chosen clique")

    def weave(vertices: int, chosen: list[int], target: int) -> int:
        for u in sorted(bits(vertices), reverse=True):
            target = b.node(var(u), target, conflict(u, chosen))
        return target

    memo: dict[tuple[int, int], int] = {}

    def prog(i: int, lset: int) -> int:
        key = (i, lset)
        if key in memo:
            return memo[key]
        if not lset:
            raise ExtractionError("search covered every block")
        if i == n:
            out = b.sink(f.clique_axiom(lowest(lset) + 1))
        elif not lset >> blk[i] & 1:
            out = prog(i + 1, lset)
        else:
            zero = b.sink(f.clique_axiom(blk[i] + 1)) if last[blk[i]] == i else prog(i + 1, lset)
            rest = lset & ~(1 << blk[i])
            above = ~((1 << (i + 1)) - 1)
            one = expand(i, [i], adj[i] & above & blocks_mask(rest), rest, 1 << i)
            out = b.node(var(i), zero, one)
        memo[key] = out
        return out

    def expand(i: int, chosen: list[int], h: int, lset: int, queried: int) -> int:
        if not lset:
            raise ExtractionError("search covered every block")
        for c in bits(lset):
            if not h & bmask[c]:
                # block c ran out of candidates
                pending = bmask[c] & ~((1 << i) - 1) & ~queried
                return weave(pending, chosen, b.sink(f.clique_axiom(c + 1)))
        j = lowest(h)
        if bounds[j] <= popcount(lset) - 1:
            window = ((1 << j) - 1) & ~((1 << i) - 1)
            pending = window & blocks_mask(lset) & ~queried
            return weave(pending, chosen, prog(j, lset))
        rest = lset & ~(1 << blk[j])
        one = expand(i, chosen + [j], h & adj[j] & blocks_mask(rest), rest, queried | 1 << j)
        zero = expand(i, chosen, h & ~(1 << j), lset, queried | 1 << j)
        return b.node(var(j), zero, one)

    with _deep_recursion():
        root = prog(0, (1 << part.k) - 1)
    return b.build(root)


@dataclass(frozen=True)
class Splice:
    q: int
    h_size: int
    nodes: int

    @property
    def bound(self) -> int:
        return 2 ** self.q * self.q ** 2 * self.h_size ** 2


def extract_robp_maxclique(g: Graph, part: Partition, splices: list[Splice] | None = None) -> BranchingProgram:
    """Read-once program for the block encoding simulating the decision
    version of colour-bounded branch and bound.

    At a colour cut with open blocks L' and remaining candidates H', the
    vertices of L' outside H' that were not yet queried are queried (each
    conflicts with a chosen vertex), then the level program for "no |L'|-clique"
    on the complete multipartite graph over H''s colour classes is spliced
    in, with position j standing for the j-th open block. Node counts of the
    splices are appended to ``splices`` when given.
    """
    _check_extractable(g, part)
    f = encode_clique_block(g, part)
    gb = compatibility_graph(g, part)
    k = part.k
    seq = degeneracy_order(gb)
    rank = [0] * g.n
    for i, v in enumerate(seq):
        rank[v] = i
    block_of = part.block_of()
    bmask = part.block_masks()
    b = ProgramBuilder()

    def blocks_mask(lset: int) -> int:
        return sum(bmask[c] for c in bits(lset))

    def conflict(u: int, chosen: list[int]) -> int:
        for r in chosen:
            if not gb.adj[u] >> r & 1:
                return b.sink(f.index_of((-(u + 1), -(r + 1))))
        raise ExtractionError(f"vertex {u} has no conflict with the chosen clique")

    def leaf(h: int, classes: list[int], chosen: list[int], lset: int, queried: int) -> int:
        open_blocks = sorted(bits(lset))
        q = len(open_blocks)
        sup = [0] * g.n
        for m in classes:
            m &= h
            for v in bits(m):
                sup[v] = h & ~m
        before = len(b)
        root = level_program(
            b, sup, h, q,
            lambda v, j: v + 1 if block_of[v] == open_blocks[j - 1] else None,
            lambda v, kk, u, j: b.sink(f.index_of((-(v + 1), -(u + 1)))),
            lambda j: b.sink(f.clique_axiom(open_blocks[j - 1] + 1)),
        )
        if splices is not None:
            made = sum(1 for a in range(before, len(b)) if b.var[a])
            splices.append(Splice(q, popcount(h), made))
        pending = blocks_mask(lset) & ~h & ~queried
        for u in sorted(bits(pending), reverse=True):
            root = b.node(u + 1, root, conflict(u, chosen))
        return root

    def expand(h: int, chosen: list[int], lset: int, queried: int) -> int:
        order, bounds, classes = _colour_order(gb.adj, h, rank)

        def step(i: int, h: int, queried: int) -> int:
            if i == 0 or len(chosen) + bounds[i] <= k - 1:
                return leaf(h, classes, chosen, lset, queried)
            v = order[i - 1]
            if len(chosen) + 1 >= k:
                raise ExtractionError("search found a transversal clique")
            rest = lset & ~(1 << block_of[v])
            one = expand(h & gb.adj[v], chosen + [v], rest, queried | 1 << v)
            zero = step(i - 1, h & ~(1 << v), queried | 1 << v)
            return b.node(v + 1, zero, one)

        return step(popcount(h), h, queried)

    with _deep_recursion():
        root = expand(gb.vertex_mask, [], (1 << k) - 1, 0)
    return b.build(root)

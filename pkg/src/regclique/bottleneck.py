"""The random path distribution over programs for the block encoding, and the
useful pair / frugal traversal predicates."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .cnf import CLIQUE, CnfFormula
from .denseness import DensenessParams, is_r_q_dense
from .graph import Graph, Partition, bits
from .robp import (BranchingProgram, PathState, ProgramError, check_read_once, compute_betas,
                   compute_queried_before)


@dataclass(frozen=True)
class PathSampleConfig:
    s: float
    eps: float
    seed: int = 0

    def __post_init__(self):
        if self.s <= 1:
            raise ValueError("s must exceed 1")
        if not 0 < self.eps < 1:
            raise ValueError("epsilon must lie in (0, 1)")

    @property
    def bias(self) -> float:
        return self.s ** -(1 + self.eps)


@dataclass
class NodeSideSets:
    """Vertex bitmasks per reachable node: set to 0 / set to 1 in beta, forgotten."""
    part: Partition
    zero: dict[int, int]
    one: dict[int, int]
    forgotten: dict[int, int]
    block_masks: list[int] = field(default_factory=list)

    def v0(self, a: int, i: int) -> frozenset[int]:
        return frozenset(bits(self.zero[a] & self.block_masks[i]))

    def v1(self, a: int, i: int) -> frozenset[int]:
        return frozenset(bits(self.one[a] & self.block_masks[i]))

    def block_forgotten(self, a: int, i: int) -> bool:
        return bool(self.forgotten[a] & self.block_masks[i])


def side_sets(p: BranchingProgram, part: Partition) -> NodeSideSets:
    """Variables are the block encoding's ``x_v = v + 1``, so vertex masks are
    variable masks shifted right by one."""
    if not check_read_once(p):
        raise ProgramError("side sets need a read-once program")
    cached = p.__dict__.get("_sides")
    if cached is not None and cached.part == part:
        return cached
    betas = compute_betas(p)
    qb = compute_queried_before(p)
    zero, one, forgotten = {}, {}, {}
    for a, (pos, neg) in betas.items():
        zero[a] = neg >> 1
        one[a] = pos >> 1
        forgotten[a] = (qb[a] & ~(pos | neg)) >> 1
    sides = NodeSideSets(part, zero, one, forgotten, part.block_masks())
    object.__setattr__(p, "_sides", sides)
    return sides


def conflict_masks(f: CnfFormula, n: int) -> list[int]:
    """For each vertex u, the vertices w with a clause (-x_u, -x_w) in ``f``."""
    out = [0] * n
    for c in f.clauses:
        if len(c) == 2 and all(l < 0 for l in c):
            u, w = (-l - 1 for l in c)
            out[u] |= 1 << w
            out[w] |= 1 << u
    return out


class PathSampler:
    def __init__(self, p: BranchingProgram, f: CnfFormula, part: Partition, cfg: PathSampleConfig,
                 bias: float | None = None):
        self.p, self.f, self.part = p, f, part
        self.sides = side_sets(p, part)
        self.block_of = part.block_of()
        self.conflicts = conflict_masks(f, part.n)
        self.bias = cfg.bias if bias is None else bias
        self.rng = np.random.default_rng(cfg.seed)

    def forced(self, a: int) -> bool:
        u = self.p.var[a] - 1
        if self.sides.forgotten[a] & self.sides.block_masks[self.block_of[u]]:
            return True
        return bool(self.conflicts[u] & self.sides.one[a])

    def sample(self) -> PathState:
        p = self.p
        a = p.root
        path = PathState([a], [], [])
        while p.var[a]:
            if self.forced(a):
                g, forced = 0, True
            else:
                g, forced = int(self.rng.random() < self.bias), False
            path.answers.append(g)
            path.forced.append(forced)
            a = p.hi[a] if g else p.lo[a]
            path.nodes.append(a)
        return path


def sample_path(p: BranchingProgram, f_block: CnfFormula, part: Partition, cfg: PathSampleConfig,
                bias: float | None = None) -> PathState:
    return PathSampler(p, f_block, part, cfg, bias).sample()


def sample_paths(p, f_block, part, cfg, count: int, bias: float | None = None) -> list[PathState]:
    sampler = PathSampler(p, f_block, part, cfg, bias)
    return [sampler.sample() for _ in range(count)]


def ends_in_clique_axiom(p: BranchingProgram, f: CnfFormula, path: PathState) -> bool:
    return f.kinds[p.label[path.sink]] == CLIQUE


def is_useful_pair(p: BranchingProgram, a: int, b: int, part: Partition, r: float, q: float,
                   g: Graph, sides: NodeSideSets | None = None) -> tuple[bool, int | None]:
    """Least block i with nothing set to 1 at b, not forgotten at b, and whose
    new zeros between a and b form an (r, q)-neighbour-dense set."""
    sides = side_sets(p, part) if sides is None else sides
    for i, bm in enumerate(sides.block_masks):
        if sides.one[b] & bm or sides.forgotten[b] & bm:
            continue
        diff = sides.zero[b] & ~sides.zero[a] & bm
        if is_r_q_dense(g, bits(diff), r, q)[0]:
            return True, i
    return False, None


def frugal_traversal(path: PathState, a: int, b: int, k: int, t: float) -> bool:
    try:
        ia, ib = path.nodes.index(a), path.nodes.index(b)
    except ValueError:
        raise ValueError("both nodes must lie on the path") from None
    if ia > ib:
        raise ValueError("a must precede b on the path")
    return sum(path.answers[ia:ib]) <= math.ceil(k / t)


@dataclass
class LemmaReport:
    samples: int
    found: int
    ones_max: int
    useful_pairs_checked: int

    @property
    def fraction(self) -> float:
        return self.found / self.samples if self.samples else 1.0


def check_lemma_legitimate(p: BranchingProgram, f_block: CnfFormula, part: Partition,
                           params: DensenessParams, samples: int, g: Graph, seed: int = 0,
                           s: float | None = None, eps: float | None = None) -> LemmaReport:
    """Fraction of sampled paths that frugally traverse some useful pair."""
    sides = side_sets(p, part)
    cfg = PathSampleConfig(params.s if s is None else s, params.eps if eps is None else eps, seed)
    sampler = PathSampler(p, f_block, part, cfg)
    cap = math.ceil(params.k / params.t)
    useful: dict[tuple[int, int], bool] = {}
    found = ones_max = 0
    for _ in range(samples):
        path = sampler.sample()
        ones_max = max(ones_max, path.ones())
        if has_frugal_useful_pair(p, path, part, params, g, sides, cap, useful):
            found += 1
    return LemmaReport(samples, found, ones_max, len(useful))


def has_frugal_useful_pair(p, path, part, params, g, sides, cap, useful) -> bool:
    nodes = path.nodes
    prefix = [0]
    for ans in path.answers:
        prefix.append(prefix[-1] + ans)
    for ia in range(len(nodes)):
        for ib in range(ia, len(nodes)):
            if prefix[ib] - prefix[ia] > cap:
                break
            key = (nodes[ia], nodes[ib])
            hit = useful.get(key)
            if hit is None:
                hit = useful[key] = is_useful_pair(p, key[0], key[1], part, params.r, params.q, g, sides)[0]
            if hit:
                return True
    return False

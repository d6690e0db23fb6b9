"""Neighbour-denseness, mostly-denseness and clique-denseness checkers.

All checkers enumerate vertex sets R in size-lexicographic order (smaller sets
first, then lexicographic by vertex id). Enumeration sizes are bounded by an
explicit budget; ``REGCLIQUE_BUDGET`` overrides the default.
"""
from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterable, Iterator, Sequence

import numpy as np

from .graph import Graph, Partition, bits, mask_of, popcount

DEFAULT_BUDGET = int(os.environ.get("REGCLIQUE_BUDGET", "2000000"))


class BudgetExceeded(RuntimeError):
    pass


@dataclass(frozen=True)
class DensenessParams:
    k: int
    t: float
    r: float
    s: float
    eps: float
    q: float
    q_prime: float
    xi: float | None = None
    delta: float | None = None

    @property
    def r_prime(self) -> float:
        return self.t * self.r

    @classmethod
    def custom(cls, k, t, r, q, s, eps, q_prime=None, xi=None) -> "DensenessParams":
        """User-chosen t, r, q; q' defaults to its formula in r, s and eps."""
        if q_prime is None:
            q_prime = mostly_dense_threshold(r, s, eps)
        delta = None if xi is None else 2 * xi / (k - 1)
        return cls(k, t, r, s, eps, q, q_prime, xi, delta)

    def issues(self) -> list[str]:
        """Invariants of the asymptotic regime that these values violate."""
        out = []
        if not 1 <= self.t <= self.k:
            out.append(f"t = {self.t:g} outside [1, k]")
        if self.r < 4 * self.k / self.t ** 2:
            out.append(f"r = {self.r:g} below 4k/t^2 = {4 * self.k / self.t ** 2:g}")
        for name in ("r", "s", "q", "q_prime"):
            v = getattr(self, name)
            if not math.isfinite(v) or v <= 0:
                out.append(f"{name} = {v:g} is not finite and positive")
        return out


def mostly_dense_threshold(r: float, s: float, eps: float) -> float:
    return eps * r * s ** (1 + eps) * math.log(s)


def derive_parameters(n: int, k: int, xi: float, epsilon: float) -> DensenessParams:
    if not 0 < epsilon < 0.25:
        raise ValueError("epsilon must lie in (0, 1/4)")
    if xi <= 0:
        raise ValueError("xi must be positive")
    if k < 2:
        raise ValueError("k must be at least 2")
    if n < 2:
        raise ValueError("n must be at least 2")
    t = 32 * xi / epsilon
    s = math.sqrt(n)
    r = 4 * k / t ** 2
    delta = 2 * xi / (k - 1)
    q = n ** (1 - t * delta * r) / (4 * k * t)
    return DensenessParams(k, t, r, s, epsilon, q, mostly_dense_threshold(r, s, epsilon), xi, delta)


# ---------------------------------------------------------------------------
# enumeration


def radius(r: float) -> int:
    return max(0, math.floor(r))


def count_subsets(n: int, max_size: int) -> int:
    return sum(math.comb(n, j) for j in range(min(max_size, n) + 1))


def subsets(universe: Sequence[int], max_size: int, budget: int | None = None) -> Iterator[tuple[int, ...]]:
    """Subsets of size <= max_size in size-lexicographic order."""
    budget = DEFAULT_BUDGET if budget is None else budget
    total = count_subsets(len(universe), max_size)
    if total > budget:
        raise BudgetExceeded(f"{total} subsets exceed the budget of {budget}")
    items = sorted(universe)
    for j in range(min(max_size, len(items)) + 1):
        yield from combinations(items, j)


def _nhat(g: Graph, r_set: Iterable[int], w_mask: int) -> int:
    m = w_mask
    for v in r_set:
        m &= g.adj[v]
    return m


def is_neighbour_dense_for(g: Graph, w, r_set, q: float) -> bool:
    return popcount(_nhat(g, r_set, mask_of(w))) >= q


def is_r_q_dense(g: Graph, w, r: float, q: float, budget: int | None = None) -> tuple[bool, frozenset[int] | None]:
    """(True, None) or (False, first violating R)."""
    wm = mask_of(w)
    for rs in subsets(range(g.n), radius(r), budget):
        if popcount(_nhat(g, rs, wm)) < q:
            return False, frozenset(rs)
    return True, None


def sparse_sets(g: Graph, w, r_prime: float, q_prime: float, strict: bool = True,
                budget: int | None = None) -> list[frozenset[int]]:
    """All R with |R| <= r' and |N(R, W)| < q' (or <= q' when not strict)."""
    wm = mask_of(w)
    out = []
    for rs in subsets(range(g.n), radius(r_prime), budget):
        c = popcount(_nhat(g, rs, wm))
        if c < q_prime or (not strict and c <= q_prime):
            out.append(frozenset(rs))
    return out


def check_mostly_dense(g: Graph, w, s_set, r_prime: float, r: float, q_prime: float,
                       budget: int | None = None) -> tuple[bool, frozenset[int] | None]:
    s = frozenset(s_set)
    for rs in sparse_sets(g, w, r_prime, q_prime, budget=budget):
        if len(rs & s) < r:
            return False, rs
    return True, None


def greedy_witness(g: Graph, w, r_prime: float, r: float, q_prime: float,
                   budget: int | None = None) -> frozenset[int]:
    """Union of a maximal r-disjoint tuple of sparse sets, built in one pass.

    The union passes ``check_mostly_dense`` whenever any set does, i.e. when
    every sparse R has at least r elements.
    """
    union: set[int] = set()
    for rs in sparse_sets(g, w, r_prime, q_prime, strict=False, budget=budget):
        if len(rs & union) <= r and not rs <= union:
            union |= rs
    return frozenset(union)


def find_witness(g: Graph, w, r_prime: float, r: float, q_prime: float, s: float,
                 budget: int | None = None) -> frozenset[int] | None:
    """Some S with |S| <= s passing ``check_mostly_dense``, or None."""
    limit = math.floor(s)
    need = math.ceil(r) if r > 0 else 0
    greedy = greedy_witness(g, w, r_prime, r, q_prime, budget)
    if len(greedy) <= limit and check_mostly_dense(g, w, greedy, r_prime, r, q_prime, budget)[0]:
        return greedy
    if need == 0:
        return frozenset()
    sparse = sparse_sets(g, w, r_prime, q_prime, budget=budget)
    if any(len(rs) < need for rs in sparse):
        return None

    def search(chosen: frozenset[int]) -> frozenset[int] | None:
        for rs in sparse:
            if len(rs & chosen) < need:
                if len(chosen) + need - len(rs & chosen) > limit:
                    return None
                for v in sorted(rs - chosen):
                    found = search(chosen | {v})
                    if found is not None:
                        return found
                return None
        return chosen

    return search(frozenset())


# ---------------------------------------------------------------------------
# clique-denseness


@dataclass
class DensenessReport:
    property1: bool
    property2: bool
    block_failures: list[tuple[int, frozenset[int]]] = field(default_factory=list)
    w_failures: list[frozenset[int]] = field(default_factory=list)
    witnesses: dict[frozenset[int], frozenset[int]] = field(default_factory=dict)
    dense_w: int = 0
    checked_w: int = 0

    @property
    def ok(self) -> bool:
        return self.property1 and self.property2

    def summary(self) -> str:
        lines = [
            f"property1 {'holds' if self.property1 else 'fails'}",
            f"property2 {'holds' if self.property2 else 'fails'}",
            f"candidates {self.checked_w} dense {self.dense_w} without_witness {len(self.w_failures)}",
        ]
        for i, rs in self.block_failures:
            lines.append(f"block {i + 1} violated by R = {sorted(rs)}")
        for w in self.w_failures[:10]:
            lines.append(f"no witness for W = {sorted(w)}")
        return "\n".join(lines)


def all_vertex_sets(n: int, budget: int | None = None) -> Iterator[frozenset[int]]:
    budget = DEFAULT_BUDGET if budget is None else budget
    if 2 ** n > budget:
        raise BudgetExceeded(f"2^{n} candidate sets exceed the budget of {budget}")
    for m in range(1, 1 << n):
        yield frozenset(bits(m))


def sample_vertex_sets(n: int, count: int, seed: int) -> list[frozenset[int]]:
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        picks = rng.random(n) < 0.5
        out.append(frozenset(int(v) for v in np.flatnonzero(picks)))
    return out


def is_clique_dense(g: Graph, part: Partition, params: DensenessParams,
                    w_candidates: Iterable[Iterable[int]] | None = None,
                    exhaustive: bool = False, budget: int | None = None) -> DensenessReport:
    """Check both properties; property 2 only over the supplied candidates
    (or every vertex set when ``exhaustive``)."""
    part.check(g.n)
    t, r, q = params.t, params.r, params.q
    report = DensenessReport(True, True)
    for i, block in enumerate(part.blocks):
        ok, rs = is_r_q_dense(g, block, t * r, t * q, budget)
        if not ok:
            report.property1 = False
            report.block_failures.append((i, rs))
    if exhaustive:
        cands: Iterable[Iterable[int]] = all_vertex_sets(g.n, budget)
    else:
        cands = w_candidates or ()
    for w in cands:
        w = frozenset(w)
        report.checked_w += 1
        if not is_r_q_dense(g, w, r, q, budget)[0]:
            continue
        report.dense_w += 1
        s_set = find_witness(g, w, t * r, r, params.q_prime, params.s, budget)
        if s_set is None:
            report.property2 = False
            report.w_failures.append(w)
        else:
            report.witnesses[w] = s_set
    return report

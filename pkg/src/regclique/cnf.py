"""k-clique CNF encodings, restrictions and DIMACS I/O.

Literals are non-zero ints in DIMACS convention; a clause is a ``frozenset`` of
literals. Variable numbering:

* map / weak encodings: ``x_{v,i}`` (vertex ``v`` in ``0..n-1``, index ``i`` in
  ``1..k``) is variable ``v*k + i``;
* block encoding: ``x_v`` is variable ``v + 1``.
"""
from __future__ import annotations

import io
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .graph import Graph, Partition, bits

Clause = frozenset

EDGE = "edge"
CLIQUE = "clique"
FUNCTIONALITY = "functionality"
_KIND_CHAR = {EDGE: "e", CLIQUE: "c", FUNCTIONALITY: "f"}
_CHAR_KIND = {c: k for k, c in _KIND_CHAR.items()}


def make_clause(literals: Iterable[int]) -> frozenset[int]:
    c = frozenset(literals)
    if 0 in c:
        raise ValueError("literal 0 is not a variable")
    for lit in c:
        if -lit in c:
            raise ValueError(f"tautological clause containing {lit} and {-lit}")
    return c


def clause_str(c: Iterable[int]) -> str:
    return " ".join(str(l) for l in sorted(c, key=lambda l: (abs(l), l))) + (" 0" if c else "0")


def map_var(v: int, i: int, k: int) -> int:
    return v * k + i


def map_var_inverse(x: int, k: int) -> tuple[int, int]:
    v, i = divmod(x - 1, k)
    return v, i + 1


@dataclass(frozen=True, eq=False)
class CnfFormula:
    clauses: tuple[frozenset[int], ...]
    num_vars: int
    kinds: tuple[str | None, ...] = ()
    clique_index: tuple[int | None, ...] = ()
    var_names: Mapping[int, str] = field(default_factory=dict)
    encoding: str | None = None
    k: int | None = None

    def __post_init__(self):
        if not self.kinds:
            object.__setattr__(self, "kinds", (None,) * len(self.clauses))
        if not self.clique_index:
            object.__setattr__(self, "clique_index", (None,) * len(self.clauses))
        if not (len(self.kinds) == len(self.clique_index) == len(self.clauses)):
            raise ValueError("per-clause metadata length mismatch")
        for c in self.clauses:
            for lit in c:
                if lit == 0 or abs(lit) > self.num_vars:
                    raise ValueError(f"literal {lit} outside 1..{self.num_vars}")
                if -lit in c:
                    raise ValueError("tautological clause")
        if self.var_names and not all(abs(l) in self.var_names for c in self.clauses for l in c):
            raise ValueError("var_names does not cover every variable in use")

    @classmethod
    def from_clauses(cls, clauses: Iterable[Iterable[int]], num_vars: int | None = None) -> "CnfFormula":
        cs = tuple(dict.fromkeys(make_clause(c) for c in clauses))
        if num_vars is None:
            num_vars = max((abs(l) for c in cs for l in c), default=0)
        return cls(cs, num_vars)

    def __eq__(self, other):
        if not isinstance(other, CnfFormula):
            return NotImplemented
        return (self.num_vars == other.num_vars and set(self.clauses) == set(other.clauses)
                and dict(self.var_names) == dict(other.var_names))

    def __hash__(self):
        return hash((self.num_vars, frozenset(self.clauses)))

    def __len__(self):
        return len(self.clauses)

    def __contains__(self, clause) -> bool:
        return frozenset(clause) in self.clause_positions

    @property
    def clause_positions(self) -> dict[frozenset[int], int]:
        pos = self.__dict__.get("_positions")
        if pos is None:
            pos = {}
            for i, c in enumerate(self.clauses):
                pos.setdefault(c, i)
            object.__setattr__(self, "_positions", pos)
        return pos

    def index_of(self, clause) -> int:
        return self.clause_positions[frozenset(clause)]

    def clique_axiom(self, i: int) -> int:
        """Position of the clique axiom with index (or block number) ``i``."""
        for pos, idx in enumerate(self.clique_index):
            if idx == i:
                return pos
        # with no vertices every clique axiom is the empty clause, kept once
        if self.k is not None and 1 <= i <= self.k and frozenset() in self:
            return self.index_of(())
        raise KeyError(f"no clique axiom with index {i}")

    def variables(self) -> set[int]:
        return {abs(l) for c in self.clauses for l in c}


class _Collector:
    def __init__(self):
        self.clauses: dict[frozenset[int], tuple[str, int | None]] = {}

    def add(self, lits, kind, index=None):
        c = make_clause(lits)
        self.clauses.setdefault(c, (kind, index))

    def build(self, num_vars, names, encoding, k) -> CnfFormula:
        cs = tuple(self.clauses)
        return CnfFormula(cs, num_vars, tuple(self.clauses[c][0] for c in cs),
                          tuple(self.clauses[c][1] for c in cs), names, encoding, k)


def encode_clique(g: Graph, k: int, include_functionality: bool = True) -> CnfFormula:
    """Clique(G, k); with ``include_functionality=False`` this is the weak encoding.

    Edge axioms range over all ``u, v`` with ``{u, v}`` not an edge, including
    ``u == v``.
    """
    if k < 1:
        raise ValueError("k must be positive")
    n = g.n
    col = _Collector()
    x = lambda v, i: map_var(v, i, k)
    for u in range(n):
        for v in range(u, n):
            if u != v and g.has_edge(u, v):
                continue
            for i in range(1, k + 1):
                for j in range(1, k + 1):
                    if i != j:
                        col.add((-x(u, i), -x(v, j)), EDGE)
    for i in range(1, k + 1):
        col.add([x(v, i) for v in range(n)], CLIQUE, i)
    if include_functionality:
        for i in range(1, k + 1):
            for u in range(n):
                for v in range(u + 1, n):
                    col.add((-x(u, i), -x(v, i)), FUNCTIONALITY)
    names = {x(v, i): f"x_{{{v},{i}}}" for v in range(n) for i in range(1, k + 1)}
    return col.build(n * k, names, "map" if include_functionality else "weak", k)


def encode_clique_block(g: Graph, part: Partition) -> CnfFormula:
    """Clique_block(G, k) for the k-partition ``part``.

    A non-adjacent pair inside one block gives a single clause, tagged as an
    edge axiom (first family wins).
    """
    part.check(g.n)
    col = _Collector()
    for u in range(g.n):
        for v in range(u + 1, g.n):
            if not g.has_edge(u, v):
                col.add((-(u + 1), -(v + 1)), EDGE)
    for i, block in enumerate(part.blocks, 1):
        col.add([v + 1 for v in sorted(block)], CLIQUE, i)
    for block in part.blocks:
        b = sorted(block)
        for a, u in enumerate(b):
            for v in b[a + 1:]:
                col.add((-(u + 1), -(v + 1)), FUNCTIONALITY)
    names = {v + 1: f"x_{v}" for v in range(g.n)}
    return col.build(g.n, names, "block", part.k)


# ---------------------------------------------------------------------------
# restrictions


def restrict_clause(c: frozenset[int], rho: Mapping[int, int]) -> frozenset[int] | None:
    """``None`` for the trivial 1-clause, otherwise ``c`` minus falsified literals."""
    out = []
    for lit in c:
        val = rho.get(abs(lit))
        if val is None:
            out.append(lit)
        elif (lit > 0) == bool(val):
            return None
    return frozenset(out)


def restrict(f: CnfFormula, rho: Mapping[int, int]) -> CnfFormula:
    seen: dict[frozenset[int], int] = {}
    kinds, idx = [], []
    for c, kind, ci in zip(f.clauses, f.kinds, f.clique_index):
        r = restrict_clause(c, rho)
        if r is None or r in seen:
            continue
        seen[r] = len(seen)
        kinds.append(kind)
        idx.append(ci)
    return CnfFormula(tuple(seen), f.num_vars, tuple(kinds), tuple(idx), dict(f.var_names), f.encoding, f.k)


def satisfies(assignment: Mapping[int, int], c: Iterable[int]) -> bool:
    return any(assignment.get(abs(l)) == (1 if l > 0 else 0) for l in c)


def falsifies(assignment: Mapping[int, int], c: Iterable[int]) -> bool:
    """Every literal of ``c`` is assigned and false."""
    return all(assignment.get(abs(l)) == (0 if l > 0 else 1) for l in c)


# ---------------------------------------------------------------------------
# satisfiability oracle (plain DPLL with unit propagation)


def is_satisfiable(f: CnfFormula | Sequence[Iterable[int]]) -> dict[int, int] | None:
    """A satisfying assignment, or ``None``. Intended for desk-scale formulas."""
    clauses = [tuple(c) for c in (f.clauses if isinstance(f, CnfFormula) else f)]

    def solve(clauses, assign):
        while True:
            unit = None
            reduced = []
            for c in clauses:
                lits = []
                sat = False
                for l in c:
                    val = assign.get(abs(l))
                    if val is None:
                        lits.append(l)
                    elif (l > 0) == bool(val):
                        sat = True
                        break
                if sat:
                    continue
                if not lits:
                    return None
                if len(lits) == 1 and unit is None:
                    unit = lits[0]
                reduced.append(lits)
            clauses = reduced
            if unit is None:
                break
            assign = {**assign, abs(unit): int(unit > 0)}
        if not clauses:
            return assign
        lit = min(clauses, key=len)[0]
        for val in (int(lit > 0), int(lit < 0)):
            res = solve(clauses, {**assign, abs(lit): val})
            if res is not None:
                return res
        return None

    return solve(clauses, {})


# ---------------------------------------------------------------------------
# DIMACS CNF


def write_dimacs(f: CnfFormula) -> bytes:
    """Standard DIMACS CNF; variable names and axiom tags go into comment lines."""
    out = io.StringIO()
    if f.encoding is not None:
        out.write(f"c encoding {f.encoding} k {f.k}\n")
    if f.encoding in ("map", "weak"):
        out.write("c numbering x_{v,i} = v*k + i (v 0-based, i 1-based)\n")
    elif f.encoding == "block":
        out.write("c numbering x_v = v + 1 (v 0-based)\n")
    for x in sorted(f.var_names or ()):
        out.write(f"c var {x} {f.var_names[x]}\n")
    if any(k is not None for k in f.kinds):
        out.write("c kinds " + "".join(_KIND_CHAR.get(k, "-") for k in f.kinds) + "\n")
        for pos, ci in enumerate(f.clique_index):
            if ci is not None:
                out.write(f"c clique {pos + 1} {ci}\n")
    out.write(f"p cnf {f.num_vars} {len(f.clauses)}\n")
    for c in f.clauses:
        out.write(clause_str(c) + "\n")
    return out.getvalue().encode()


def read_dimacs(data: bytes | str) -> CnfFormula:
    text = data.decode() if isinstance(data, bytes) else data
    num_vars = num_clauses = None
    names: dict[int, str] = {}
    kinds_str = None
    clique_idx: dict[int, int] = {}
    encoding = k = None
    clauses: list[frozenset[int]] = []
    pending: list[int] = []
    for lineno, line in enumerate(text.splitlines(), 1):
        parts = line.split()
        if not parts:
            continue
        if parts[0] == "c":
            if len(parts) >= 4 and parts[1] == "var":
                names[int(parts[2])] = parts[3]
            elif len(parts) >= 3 and parts[1] == "kinds":
                kinds_str = parts[2]
            elif len(parts) >= 4 and parts[1] == "clique":
                clique_idx[int(parts[2]) - 1] = int(parts[3])
            elif len(parts) >= 5 and parts[1] == "encoding":
                encoding = parts[2]
                k = None if parts[4] == "None" else int(parts[4])
            continue
        if parts[0] == "p":
            if len(parts) != 4 or parts[1] != "cnf":
                raise ValueError(f"line {lineno}: bad problem line")
            num_vars, num_clauses = int(parts[2]), int(parts[3])
            continue
        if num_vars is None:
            raise ValueError(f"line {lineno}: clause before problem line")
        for tok in parts:
            lit = int(tok)
            if lit == 0:
                clauses.append(make_clause(pending))
                pending = []
            else:
                pending.append(lit)
    if pending:
        raise ValueError("last clause is not 0-terminated")
    if num_vars is None:
        raise ValueError("missing 'p cnf' line")
    if len(clauses) != num_clauses:
        raise ValueError(f"header says {num_clauses} clauses, found {len(clauses)}")
    kinds = tuple(_CHAR_KIND.get(ch) for ch in kinds_str) if kinds_str else ()
    idx = tuple(clique_idx.get(i) for i in range(len(clauses))) if kinds_str else ()
    return CnfFormula(tuple(clauses), num_vars, kinds, idx, names, encoding, k)

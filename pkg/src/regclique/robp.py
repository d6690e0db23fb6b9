"""Read-once branching programs for the falsified clause search problem and
regular resolution refutations.

A program is an arena of nodes. Internal node ``a`` queries variable
``var[a] > 0`` and has successors ``lo[a]`` (answer 0) and ``hi[a]``
(answer 1). A sink has ``var[a] == 0`` and ``label[a]`` is the position of
its clause in the target formula.

Partial assignments inside this module are pairs of bitmasks over variable ids:
``(pos, neg)`` where bit ``x`` of ``pos`` means ``x -> 1``.
"""
from __future__ import annotations

import io
from dataclasses import dataclass, field
from typing import Iterable, Mapping, NamedTuple, Sequence

from .cnf import CnfFormula, clause_str, make_clause, restrict_clause


class Verdict(NamedTuple):
    ok: bool
    reason: str = ""
    where: int | None = None

    def __bool__(self):
        return self.ok


class ProgramError(ValueError):
    pass


# ---------------------------------------------------------------------------
# programs


@dataclass(frozen=True)
class BranchingProgram:
    var: tuple[int, ...]
    lo: tuple[int, ...]
    hi: tuple[int, ...]
    label: tuple[int, ...]
    root: int

    def __len__(self):
        return len(self.var)

    @property
    def size(self) -> int:
        return len(self.var)

    def is_sink(self, a: int) -> bool:
        return self.var[a] == 0

    def sinks(self) -> list[int]:
        return [a for a, x in enumerate(self.var) if x == 0]

    def successors(self, a: int) -> tuple[int, int]:
        return self.lo[a], self.hi[a]

    def variables(self) -> set[int]:
        return {x for x in self.var if x}

    def topological_order(self) -> list[int]:
        """Nodes reachable from the root, parents before children."""
        order = topo_cache(self)
        return order


def topo_cache(p: BranchingProgram) -> list[int]:
    cached = p.__dict__.get("_topo")
    if cached is not None:
        return cached
    indeg: dict[int, int] = {}
    stack = [p.root]
    seen = {p.root}
    while stack:
        a = stack.pop()
        if p.var[a]:
            for b in (p.lo[a], p.hi[a]):
                indeg[b] = indeg.get(b, 0) + 1
                if b not in seen:
                    seen.add(b)
                    stack.append(b)
    order = []
    ready = [p.root]
    while ready:
        a = ready.pop()
        order.append(a)
        if p.var[a]:
            for b in (p.lo[a], p.hi[a]):
                indeg[b] -= 1
                if indeg[b] == 0:
                    ready.append(b)
    if len(order) != len(seen):
        raise ProgramError("branching program contains a cycle")
    object.__setattr__(p, "_topo", order)
    return order


class ProgramBuilder:
    """Bottom-up construction with hash-consing.

    Identical (var, lo, hi) triples share one node and redundant tests
    (``lo == hi``) are skipped; both preserve every root-to-sink path's
    sequence of queries and answers, so read-once-ness and correctness carry
    over.
    """

    def __init__(self, reduce: bool = True):
        self.var: list[int] = []
        self.lo: list[int] = []
        self.hi: list[int] = []
        self.label: list[int] = []
        self._unique: dict[tuple[int, int, int], int] = {}
        self._sinks: dict[int, int] = {}
        self.reduce = reduce

    def __len__(self):
        return len(self.var)

    def sink(self, clause_pos: int) -> int:
        a = self._sinks.get(clause_pos)
        if a is None:
            a = self._new(0, -1, -1, clause_pos)
            self._sinks[clause_pos] = a
        return a

    def node(self, var: int, lo: int, hi: int) -> int:
        if var <= 0:
            raise ValueError("query variable must be positive")
        if self.reduce:
            if lo == hi:
                return lo
            key = (var, lo, hi)
            a = self._unique.get(key)
            if a is None:
                a = self._new(var, lo, hi, -1)
                self._unique[key] = a
            return a
        return self._new(var, lo, hi, -1)

    def _new(self, var, lo, hi, label) -> int:
        self.var.append(var)
        self.lo.append(lo)
        self.hi.append(hi)
        self.label.append(label)
        return len(self.var) - 1

    def build(self, root: int) -> BranchingProgram:
        """Keep only nodes reachable from ``root``, renumbered in DFS order."""
        remap: dict[int, int] = {}
        stack = [root]
        order = []
        while stack:
            a = stack.pop()
            if a in remap:
                continue
            remap[a] = len(order)
            order.append(a)
            if self.var[a]:
                stack.append(self.hi[a])
                stack.append(self.lo[a])
        var = tuple(self.var[a] for a in order)
        lo = tuple(remap[self.lo[a]] if self.var[a] else -1 for a in order)
        hi = tuple(remap[self.hi[a]] if self.var[a] else -1 for a in order)
        label = tuple(self.label[a] for a in order)
        return BranchingProgram(var, lo, hi, label, 0)


def single_query_program(x: int, clause0: int, clause1: int) -> BranchingProgram:
    b = ProgramBuilder(reduce=False)
    return b.build(b.node(x, b.sink(clause0), b.sink(clause1)))


# ---------------------------------------------------------------------------
# paths and beta


@dataclass
class PathState:
    nodes: list[int]
    answers: list[int]
    forced: list[bool] = field(default_factory=list)

    @property
    def sink(self) -> int:
        return self.nodes[-1]

    def assignment(self, p: BranchingProgram) -> dict[int, int]:
        return {p.var[a]: g for a, g in zip(self.nodes, self.answers)}

    def ones(self) -> int:
        return sum(self.answers)


def path_of(p: BranchingProgram, sigma: Mapping[int, int]) -> PathState:
    a = p.root
    nodes, answers = [a], []
    while p.var[a]:
        x = p.var[a]
        if x not in sigma:
            raise KeyError(f"assignment does not set variable {x}")
        g = 1 if sigma[x] else 0
        answers.append(g)
        a = p.hi[a] if g else p.lo[a]
        nodes.append(a)
    return PathState(nodes, answers)


def compute_betas(p: BranchingProgram) -> dict[int, tuple[int, int]]:
    """``beta(a)`` for every reachable node as ``(pos, neg)`` bitmasks.

    Intersection over incoming edges of parent beta plus the edge's answer; for
    read-once programs this equals the assignments made identically on every
    root-to-node path.
    """
    cached = p.__dict__.get("_betas")
    if cached is not None:
        return cached
    betas: dict[int, tuple[int, int]] = {p.root: (0, 0)}
    for a in topo_cache(p):
        x = p.var[a]
        if not x:
            continue
        pos, neg = betas[a]
        bit = 1 << x
        for b, contrib in ((p.lo[a], (pos, neg | bit)), (p.hi[a], (pos | bit, neg))):
            cur = betas.get(b)
            betas[b] = contrib if cur is None else (cur[0] & contrib[0], cur[1] & contrib[1])
    object.__setattr__(p, "_betas", betas)
    return betas


def compute_queried_before(p: BranchingProgram) -> dict[int, int]:
    """Bitmask of variables queried on some root-to-``a`` path, ``a`` excluded."""
    cached = p.__dict__.get("_qbefore")
    if cached is not None:
        return cached
    q: dict[int, int] = {p.root: 0}
    for a in topo_cache(p):
        x = p.var[a]
        if not x:
            continue
        m = q[a] | 1 << x
        for b in (p.lo[a], p.hi[a]):
            q[b] = q.get(b, 0) | m
    object.__setattr__(p, "_qbefore", q)
    return q


def mask_to_assignment(pos: int, neg: int) -> dict[int, int]:
    out = {}
    for m, val in ((pos, 1), (neg, 0)):
        while m:
            low = m & -m
            out[low.bit_length() - 1] = val
            m ^= low
    return out


def beta(p: BranchingProgram, node: int) -> dict[int, int]:
    """Maximal partial assignment shared by all root-to-``node`` paths.

    Only defined for read-once programs.
    """
    if not check_read_once(p):
        raise ProgramError("beta is only defined here for read-once programs")
    betas = compute_betas(p)
    if node not in betas:
        raise ProgramError(f"node {node} is not reachable from the root")
    return mask_to_assignment(*betas[node])


def check_read_once(p: BranchingProgram) -> Verdict:
    try:
        q = compute_queried_before(p)
    except ProgramError as e:
        return Verdict(False, str(e))
    for a in topo_cache(p):
        x = p.var[a]
        if x and q[a] >> x & 1:
            return Verdict(False, f"variable {x} queried twice on a path through node {a}", a)
    return Verdict(True)


def _falsified_by(clause: Iterable[int], pos: int, neg: int) -> bool:
    for lit in clause:
        if lit > 0:
            if not neg >> lit & 1:
                return False
        elif not pos >> -lit & 1:
            return False
    return True


def verify_search_program(p: BranchingProgram, f: CnfFormula) -> Verdict:
    """Every reachable sink's clause belongs to ``f`` and is falsified by its beta.

    For read-once programs this is equivalent to: for every total assignment the
    sink reached is labelled with a clause the assignment falsifies.
    """
    ro = check_read_once(p)
    if not ro:
        return ro
    betas = compute_betas(p)
    for a in topo_cache(p):
        if p.var[a]:
            continue
        lab = p.label[a]
        if not 0 <= lab < len(f.clauses):
            return Verdict(False, f"sink {a} has label {lab} outside the formula", a)
        if not _falsified_by(f.clauses[lab], *betas[a]):
            return Verdict(False, f"sink {a}: clause {clause_str(f.clauses[lab])} not falsified by beta", a)
    return Verdict(True)


# ---------------------------------------------------------------------------
# resolution proofs


class Step(NamedTuple):
    clause: frozenset[int]
    antecedents: tuple[int, int] | None = None
    var: int | None = None

    @property
    def is_axiom(self) -> bool:
        return self.antecedents is None


@dataclass
class ResolutionProof:
    steps: list[Step]

    def __len__(self):
        return len(self.steps)

    @property
    def length(self) -> int:
        return len(self.steps)

    @property
    def final(self) -> frozenset[int] | None:
        return self.steps[-1].clause if self.steps else None

    def axiom(self, clause) -> int:
        self.steps.append(Step(frozenset(clause)))
        return len(self.steps) - 1

    def resolve(self, j: int, k: int, var: int) -> int:
        """Append the resolvent of step ``j`` (with ``var``) and ``k`` (with ``-var``)."""
        cj, ck = self.steps[j].clause, self.steps[k].clause
        if var not in cj or -var not in ck:
            raise ValueError(f"steps {j}, {k} cannot be resolved on {var}")
        self.steps.append(Step((cj - {var}) | (ck - {-var}), (j, k), var))
        return len(self.steps) - 1


def verify_refutation(pi: ResolutionProof, f: CnfFormula, require_regular: bool = False) -> Verdict:
    clauses = f.clause_positions
    resolved: list[int] = []
    for i, st in enumerate(pi.steps):
        if st.antecedents is None:
            if st.clause not in clauses:
                return Verdict(False, f"step {i + 1}: {clause_str(st.clause)} is not an axiom", i)
            resolved.append(0)
            continue
        j, k = st.antecedents
        x = st.var
        if not (0 <= j < i and 0 <= k < i):
            return Verdict(False, f"step {i + 1}: antecedents must precede the step", i)
        if x is None or x <= 0:
            return Verdict(False, f"step {i + 1}: resolved variable must be positive", i)
        cj, ck = pi.steps[j].clause, pi.steps[k].clause
        if x not in cj or -x not in ck:
            return Verdict(False, f"step {i + 1}: {x} must occur positively in step {j + 1} "
                                  f"and negatively in step {k + 1}", i)
        if st.clause != (cj - {x}) | (ck - {-x}):
            return Verdict(False, f"step {i + 1}: clause is not the resolvent over {x}", i)
        above = resolved[j] | resolved[k]
        if require_regular and above >> x & 1:
            return Verdict(False, f"step {i + 1}: variable {x} resolved twice on one path", i)
        resolved.append(above | 1 << x)
    if not pi.steps or pi.steps[-1].clause:
        return Verdict(False, "last clause is not empty", len(pi.steps) - 1 if pi.steps else None)
    return Verdict(True)


def robp_to_refutation(p: BranchingProgram, f: CnfFormula) -> ResolutionProof:
    """Regular refutation of ``f`` with at most ``len(p)`` steps.

    Walks the program bottom-up; each node gets a clause falsified by its beta,
    resolving the two children's clauses over the queried variable when both
    mention it and otherwise forwarding the child clause that does not.
    """
    verdict = verify_search_program(p, f)
    if not verdict:
        raise ProgramError(verdict.reason)
    order = topo_cache(p)
    # derivation per node: ("ax", clause) | ("res", ref0, ref1, var); refs are node ids
    clause_of: dict[int, frozenset[int]] = {}
    ref: dict[int, int] = {}
    kind: dict[int, tuple] = {}
    for a in reversed(order):
        x = p.var[a]
        if not x:
            clause_of[a] = f.clauses[p.label[a]]
            ref[a] = a
            kind[a] = ("ax",)
            continue
        c0, c1 = clause_of[p.lo[a]], clause_of[p.hi[a]]
        if x not in c0:
            clause_of[a], ref[a] = c0, ref[p.lo[a]]
        elif -x not in c1:
            clause_of[a], ref[a] = c1, ref[p.hi[a]]
        else:
            clause_of[a] = (c0 - {x}) | (c1 - {-x})
            ref[a] = a
            kind[a] = ("res", ref[p.lo[a]], ref[p.hi[a]], x)
    proof = ResolutionProof([])
    step_of: dict[int, int] = {}
    axiom_step: dict[frozenset[int], int] = {}
    stack = [(ref[p.root], False)]
    while stack:
        r, expanded = stack.pop()
        if r in step_of:
            continue
        kd = kind[r]
        if kd[0] == "ax":
            c = clause_of[r]
            if c not in axiom_step:
                axiom_step[c] = proof.axiom(c)
            step_of[r] = axiom_step[c]
        elif expanded:
            step_of[r] = proof.resolve(step_of[kd[1]], step_of[kd[2]], kd[3])
        else:
            stack.append((r, True))
            stack.append((kd[2], False))
            stack.append((kd[1], False))
    return proof


def restrict_proof(pi: ResolutionProof, rho: Mapping[int, int],
                   rename: Mapping[int, int] | None = None) -> ResolutionProof:
    """Refutation of ``restrict(F, rho)`` from a refutation of ``F``.

    Each step maps to the trivial clause or to a clause contained in the
    restricted step clause; steps that become weakenings are dropped, so the
    result is no longer than ``pi`` and stays regular when ``pi`` is.
    ``rename`` optionally maps surviving variable ids to new ids.
    """
    new = ResolutionProof([])
    image: list[int | None] = []  # new step index, or None for the 1-clause
    for st in pi.steps:
        if st.antecedents is None:
            r = restrict_clause(st.clause, rho)
            image.append(None if r is None else new.axiom(r))
            continue
        j, k = st.antecedents
        x = st.var
        ej, ek = image[j], image[k]
        if x in rho:
            # the antecedent holding the satisfied literal of x disappears
            keep = ek if rho[x] else ej
            image.append(keep)
            continue
        cj = None if ej is None else new.steps[ej].clause
        ck = None if ek is None else new.steps[ek].clause
        if cj is not None and x not in cj:
            image.append(ej)
        elif ck is not None and -x not in ck:
            image.append(ek)
        elif cj is None or ck is None:
            image.append(None)
        else:
            image.append(new.resolve(ej, ek, x))
    last = image[-1] if image else None
    if last is None:
        raise ProgramError("restriction satisfied the final clause; input was not a refutation")
    return _compact(new, last, rename)


def _compact(pi: ResolutionProof, last: int, rename: Mapping[int, int] | None) -> ResolutionProof:
    """Steps needed for ``last``, in order, with axioms deduplicated."""
    needed = set()
    stack = [last]
    while stack:
        i = stack.pop()
        if i in needed:
            continue
        needed.add(i)
        if pi.steps[i].antecedents:
            stack.extend(pi.steps[i].antecedents)
    ren = (lambda c: frozenset((rename[abs(l)] if l > 0 else -rename[abs(l)]) for l in c)) if rename else (lambda c: c)
    out = ResolutionProof([])
    index: dict[int, int] = {}
    axioms: dict[frozenset[int], int] = {}
    for i in sorted(needed):
        st = pi.steps[i]
        if st.antecedents is None:
            c = ren(st.clause)
            if c not in axioms:
                axioms[c] = out.axiom(c)
            index[i] = axioms[c]
        else:
            j, k = st.antecedents
            x = rename[st.var] if rename else st.var
            index[i] = out.resolve(index[j], index[k], x)
    if index[last] != len(out.steps) - 1:
        # final clause was an axiom seen earlier; repeat it last
        out.axiom(out.steps[index[last]].clause)
    return out


# ---------------------------------------------------------------------------
# file formats
#
# proof:  one step per line, 1-based step numbers
#   A <lit> ... 0                axiom
#   R <j> <k> <var> <lit> ... 0  resolvent of step j (holds var) and k (holds -var)
# robp:   one node per line, first record is the root
#   N <id> <var> <id0> <id1>     query node
#   S <id> <clause-index>        sink, clause-index 1-based into the DIMACS clause list
# lines starting with 'c' are comments in both formats


def write_proof(pi: ResolutionProof) -> str:
    out = io.StringIO()
    for st in pi.steps:
        if st.antecedents is None:
            out.write(f"A {clause_str(st.clause)}\n")
        else:
            j, k = st.antecedents
            out.write(f"R {j + 1} {k + 1} {st.var} {clause_str(st.clause)}\n")
    return out.getvalue()


def _parse_clause(tokens: Sequence[str], lineno: int) -> frozenset[int]:
    lits = [int(t) for t in tokens]
    if not lits or lits[-1] != 0 or 0 in lits[:-1]:
        raise ValueError(f"line {lineno}: clause must be 0-terminated")
    return make_clause(lits[:-1])


def read_proof(text: str) -> ResolutionProof:
    steps = []
    for lineno, line in enumerate(text.splitlines(), 1):
        parts = line.split()
        if not parts or parts[0] == "c":
            continue
        try:
            if parts[0] == "A":
                steps.append(Step(_parse_clause(parts[1:], lineno)))
            elif parts[0] == "R":
                j, k, x = int(parts[1]) - 1, int(parts[2]) - 1, int(parts[3])
                steps.append(Step(_parse_clause(parts[4:], lineno), (j, k), x))
            else:
                raise ValueError(f"line {lineno}: unknown record {parts[0]!r}")
        except (IndexError, ValueError) as e:
            raise ValueError(f"line {lineno}: {e}") from None
    return ResolutionProof(steps)


def write_program(p: BranchingProgram) -> str:
    out = io.StringIO()
    for a in topo_cache(p):
        if p.var[a]:
            out.write(f"N {a} {p.var[a]} {p.lo[a]} {p.hi[a]}\n")
        else:
            out.write(f"S {a} {p.label[a] + 1}\n")
    return out.getvalue()


def read_program(text: str) -> BranchingProgram:
    recs: dict[int, tuple[int, int, int, int]] = {}
    root = None
    for lineno, line in enumerate(text.splitlines(), 1):
        parts = line.split()
        if not parts or parts[0] == "c":
            continue
        if parts[0] == "N" and len(parts) == 5:
            a, x, lo, hi = map(int, parts[1:])
            if x <= 0:
                raise ValueError(f"line {lineno}: query variable must be positive")
            recs[a] = (x, lo, hi, -1)
        elif parts[0] == "S" and len(parts) == 3:
            a = int(parts[1])
            recs[a] = (0, -1, -1, int(parts[2]) - 1)
        else:
            raise ValueError(f"line {lineno}: bad record {line!r}")
        if root is None:
            root = a
    if root is None:
        raise ValueError("empty program")
    ids = sorted(recs)
    index = {a: i for i, a in enumerate(ids)}
    try:
        var = tuple(recs[a][0] for a in ids)
        lo = tuple(index[recs[a][1]] if recs[a][0] else -1 for a in ids)
        hi = tuple(index[recs[a][2]] if recs[a][0] else -1 for a in ids)
    except KeyError as e:
        raise ValueError(f"edge to undefined node {e.args[0]}") from None
    label = tuple(recs[a][3] for a in ids)
    return BranchingProgram(var, lo, hi, label, index[root])


def build_decision_tree_program(f: CnfFormula, order: Sequence[int] | None = None,
                                merge: bool = False) -> BranchingProgram:
    """Query variables in ``order`` (ascending by default) and stop at the first
    falsified clause of ``f``; ``f`` must be unsatisfiable.

    A plain decision tree unless ``merge`` is set, in which case identical
    subtrees are shared.
    """
    order = sorted(f.variables()) if order is None else list(order)
    b = ProgramBuilder(reduce=merge)
    clauses = f.clauses

    def first_falsified(pos: int, neg: int) -> int | None:
        for i, c in enumerate(clauses):
            if _falsified_by(c, pos, neg):
                return i
        return None

    def grow(depth: int, pos: int, neg: int) -> int:
        hit = first_falsified(pos, neg)
        if hit is not None:
            return b.sink(hit)
        if depth == len(order):
            raise ProgramError("formula is satisfiable")
        x = order[depth]
        bit = 1 << x
        return b.node(x, grow(depth + 1, pos, neg | bit), grow(depth + 1, pos | bit, neg))

    return b.build(grow(0, 0, 0))

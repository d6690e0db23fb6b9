import random

import pytest
from hypothesis import given, strategies as st

from regclique.cnf import CnfFormula, encode_clique, falsifies, restrict
from regclique.construct import build_search_program
from regclique.graph import Graph, clique_number, sample_er
from regclique.robp import (BranchingProgram, ProgramBuilder, ProgramError, ResolutionProof, Step, beta,
                            build_decision_tree_program, check_read_once, path_of, read_program, read_proof,
                            restrict_proof, robp_to_refutation, single_query_program, verify_refutation,
                            verify_search_program, write_program, write_proof)

from oracles import beta_by_paths, read_once_by_paths, resolvent_paths_regular, root_paths, solves_by_assignments

X = CnfFormula.from_clauses([[1], [-1]])


def test_path_of_trivial():
    b = ProgramBuilder()
    p = b.build(b.sink(0))
    path = path_of(p, {1: 0})
    assert path.nodes == [p.root] and path.answers == []
    q = single_query_program(1, 1, 0)
    assert q.label[path_of(q, {1: 1}).sink] == 0
    assert q.label[path_of(q, {1: 0}).sink] == 1


def test_path_reaches_falsified_clause_on_alg1_output():
    g = Graph.cycle(5)
    p = build_search_program(g, 3)
    f = encode_clique(g, 3, include_functionality=False)
    rnd = random.Random(0)
    for _ in range(1000):
        sigma = {x: rnd.randint(0, 1) for x in range(1, f.num_vars + 1)}
        path = path_of(p, sigma)
        assert falsifies(sigma, f.clauses[p.label[path.sink]])
        for a, g_ in zip(path.nodes, path.answers):
            assert sigma[p.var[a]] == g_


def _diamond():
    b = ProgramBuilder(reduce=False)
    a = b.node(3, b.sink(0), b.sink(1))
    y = b.node(2, a, a)
    return b.build(b.node(1, b.sink(2), y)), a


def test_beta_examples():
    p, _ = _diamond()
    assert beta(p, p.root) == {}
    x1 = p.hi[p.root]
    assert beta(p, x1) == {1: 1}
    merged = p.lo[x1]
    assert merged == p.hi[x1]
    assert beta(p, merged) == {1: 1} == beta_by_paths(p, merged)


def test_beta_unreachable_and_not_read_once():
    b = ProgramBuilder(reduce=False)
    p = b.build(b.node(1, b.node(1, b.sink(0), b.sink(1)), b.sink(1)))
    assert not check_read_once(p)
    with pytest.raises(ProgramError):
        beta(p, p.root)


def test_read_once_examples():
    f = CnfFormula.from_clauses([[1, 2], [-1], [-2]])
    assert check_read_once(build_decision_tree_program(f))
    b = ProgramBuilder(reduce=False)
    p = b.build(b.node(1, b.node(1, b.sink(0), b.sink(1)), b.sink(1)))
    v = check_read_once(p)
    assert not v and v.where is not None


def test_verify_decision_tree_and_relabel():
    f = CnfFormula.from_clauses([[1, 2], [-1, 2], [-2, 3], [-3]])
    p = build_decision_tree_program(f)
    assert verify_search_program(p, f)
    sinks = [a for a in range(len(p)) if not p.var[a]]
    bad_sink = sinks[0]
    wrong = next(i for i in range(len(f.clauses)) if i != p.label[bad_sink])
    label = list(p.label)
    label[bad_sink] = wrong
    q = BranchingProgram(p.var, p.lo, p.hi, tuple(label), p.root)
    v = verify_search_program(q, f)
    assert not v and v.where == bad_sink


# random programs ----------------------------------------------------------


@st.composite
def formulas_and_programs(draw):
    nv = draw(st.integers(1, 6))
    lit = st.integers(1, nv).flatmap(lambda x: st.sampled_from([x, -x]))
    clauses = draw(st.lists(st.frozensets(lit, min_size=1, max_size=3).filter(
        lambda c: not any(-l in c for l in c)), min_size=1, max_size=6))
    f = CnfFormula.from_clauses(clauses, nv)
    b = ProgramBuilder(reduce=draw(st.booleans()))
    pool = [b.sink(i) for i in range(len(f.clauses))]
    for _ in range(draw(st.integers(0, 12))):
        x = draw(st.integers(1, nv))
        lo = draw(st.sampled_from(pool))
        hi = draw(st.sampled_from(pool))
        pool.append(b.node(x, lo, hi))
    return f, b.build(pool[-1])


@given(formulas_and_programs())
def test_read_once_matches_path_enumeration(fp):
    _, p = fp
    assert bool(check_read_once(p)) == read_once_by_paths(p)


@given(formulas_and_programs())
def test_verifier_matches_per_assignment_definition(fp):
    f, p = fp
    if check_read_once(p):
        assert bool(verify_search_program(p, f)) == solves_by_assignments(p, f)
    else:
        assert not verify_search_program(p, f)


@given(formulas_and_programs())
def test_beta_matches_path_intersection(fp):
    _, p = fp
    if not check_read_once(p):
        return
    for a in {n for nodes, _ in root_paths(p) for n in nodes}:
        assert beta(p, a) == beta_by_paths(p, a)


@given(formulas_and_programs())
def test_beta_monotone_along_edges(fp):
    _, p = fp
    if not check_read_once(p):
        return
    for a in {n for nodes, _ in root_paths(p) for n in nodes}:
        if p.var[a]:
            for g_, child in ((0, p.lo[a]), (1, p.hi[a])):
                extended = dict(beta(p, a))
                extended[p.var[a]] = g_
                assert beta(p, child).items() <= extended.items()


@given(formulas_and_programs())
def test_conversion_of_random_valid_programs(fp):
    f, p = fp
    if not verify_search_program(p, f):
        return
    pi = robp_to_refutation(p, f)
    assert verify_refutation(pi, f, require_regular=True)
    assert resolvent_paths_regular(pi)
    assert len(pi) <= len(p)


# conversion and verification ---------------------------------------------


def test_single_query_conversion():
    p = single_query_program(1, 0, 1)
    pi = robp_to_refutation(p, X)
    assert [st.clause for st in pi.steps] == [frozenset({1}), frozenset({-1}), frozenset()]
    assert len(pi) == 3 and verify_refutation(pi, X, True)


def test_verify_refutation_examples():
    pi = ResolutionProof([Step(frozenset({1})), Step(frozenset({-1})), Step(frozenset(), (0, 1), 1)])
    assert verify_refutation(pi, X)
    bad = ResolutionProof([Step(frozenset({1})), Step(frozenset({-1})), Step(frozenset(), (0, 1), 2)])
    v = verify_refutation(bad, X)
    assert not v and v.where == 2
    swapped = ResolutionProof([Step(frozenset({1})), Step(frozenset({-1})), Step(frozenset(), (1, 0), 1)])
    assert not verify_refutation(swapped, X)
    not_axiom = ResolutionProof([Step(frozenset({2}))])
    assert not verify_refutation(not_axiom, X)
    unfinished = ResolutionProof([Step(frozenset({1}))])
    assert not verify_refutation(unfinished, X)


def _irregular():
    f = CnfFormula.from_clauses([[1, 2], [-1, 2], [-1, -2], [1, -2]])
    pi = ResolutionProof([])
    s1 = pi.axiom({1, 2})
    s2 = pi.axiom({-1, 2})
    s3 = pi.resolve(s1, s2, 1)          # (y)
    s4 = pi.axiom({-1, -2})
    s5 = pi.resolve(s3, s4, 2)          # (-x)
    s6 = pi.resolve(s1, s5, 1)          # (y) again, x resolved twice on a path
    s7 = pi.axiom({1, -2})
    s8 = pi.resolve(s7, s5, 1)          # (-y)
    pi.resolve(s6, s8, 2)
    return f, pi


def test_regularity_check():
    f, pi = _irregular()
    assert verify_refutation(pi, f)
    v = verify_refutation(pi, f, require_regular=True)
    assert not v
    assert not resolvent_paths_regular(pi)


@pytest.mark.parametrize("seed", range(15))
def test_alg1_conversion_and_restriction(seed):
    g = sample_er(n=7, p=0.45, seed=seed)
    k = max(3, clique_number(g) + 1)
    f = encode_clique(g, k, include_functionality=False)
    p = build_search_program(g, k)
    pi = robp_to_refutation(p, f)
    assert verify_refutation(pi, f, True) and len(pi) <= len(p)
    rnd = random.Random(seed)
    for _ in range(5):
        rho = {x: rnd.randint(0, 1) for x in rnd.sample(range(1, f.num_vars + 1), rnd.randint(0, 6))}
        pr = restrict_proof(pi, rho)
        fr = restrict(f, rho)
        assert verify_refutation(pr, fr, True), rho
        assert len(pr) <= len(pi)


def test_restrict_proof_keeps_regularity_on_irregular_input():
    f, pi = _irregular()
    for rho in ({1: 0}, {2: 1}, {}):
        pr = restrict_proof(pi, rho)
        assert verify_refutation(pr, restrict(f, rho)) and len(pr) <= len(pi)


def test_proof_file_round_trip():
    f, pi = _irregular()
    text = write_proof(pi)
    assert text.splitlines()[2] == "R 1 2 1 2 0"
    back = read_proof("c comment\n" + text)
    assert back.steps == pi.steps


def test_program_file_round_trip():
    g = Graph.path(4)
    p = build_search_program(g, 3)
    text = write_program(p)
    first = text.splitlines()[0].split()
    assert first[0] == "N" and int(first[1]) == p.root
    q = read_program(text)
    f = encode_clique(g, 3, include_functionality=False)
    assert len(q) == len(p) and verify_search_program(q, f)
    assert read_program("S 7 2\n").label == (1,)


@pytest.mark.parametrize("bad", ["X 1 2\n", "A 1 2\n", "R 1 0\n", "A 1 x 0\n"])
def test_proof_reader_rejects_malformed(bad):
    with pytest.raises(ValueError):
        read_proof(bad)


@pytest.mark.parametrize("bad", ["", "N 0 1 5 6\n", "N 0 0 1 2\nS 1 1\nS 2 1\n", "Q 1\n"])
def test_program_reader_rejects_malformed(bad):
    with pytest.raises(ValueError):
        read_program(bad)


def test_cycle_detected():
    p = BranchingProgram((1, 2, 0), (1, 0, -1), (2, 2, -1), (-1, -1, 0), 0)
    assert not check_read_once(p)

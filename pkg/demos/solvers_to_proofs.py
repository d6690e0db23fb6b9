"""Turn clique-solver runs into read-once programs and regular refutations.

Run with: python3 demos/solvers_to_proofs.py
"""
from regclique.cnf import encode_clique_block
from regclique.graph import ErParams, balanced_partition, has_transversal_clique, sample_er
from regclique.robp import robp_to_refutation, verify_refutation, verify_search_program
from regclique.solvers import (SearchStats, Splice, clique_decision, cliquer, extract_robp_cliquer,
                               extract_robp_maxclique, max_clique_bb)

params = ErParams(n=24, k=4, xi=0.6, seed=3)
g = sample_er(params)
part = balanced_partition(params.n, params.k)
print(f"G(n, p) with n={params.n}, p={params.p:.3f}: {g.num_edges} edges")

clique, stats, _ = cliquer(g)
print(f"Russian doll search: maximum clique {sorted(clique)} after {stats.tree_nodes} tree nodes")
clique, stats, _ = max_clique_bb(g)
print(f"colour branch and bound: maximum clique {sorted(clique)} after {stats.tree_nodes} tree nodes")

if has_transversal_clique(g, part):
    raise SystemExit("this sample has a block-respecting clique; try another seed")

f = encode_clique_block(g, part)
print(f"\nno clique with one vertex per block, so the block formula ({len(f.clauses)} clauses) is unsatisfiable")
for name, algo, extract in (("cliquer", "cliquer", extract_robp_cliquer), ("bb", "bb", extract_robp_maxclique)):
    stats = SearchStats()
    clique_decision(g, params.k, part, algo, stats)
    splices: list[Splice] = []
    p = extract(g, part, splices) if algo == "bb" else extract(g, part)
    pi = robp_to_refutation(p, f)
    print(f"{name}: decision search {stats.tree_nodes} nodes -> program {len(p)} nodes "
          f"(verified {bool(verify_search_program(p, f))}) -> refutation {len(pi)} steps "
          f"(regular {bool(verify_refutation(pi, f, True))})")
    if splices:
        worst = max(s.nodes / s.bound for s in splices)
        print(f"  {len(splices)} colour-cut splices, largest at {worst:.3f} of its size bound")

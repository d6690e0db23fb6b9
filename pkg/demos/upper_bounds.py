"""Walk through the upper-bound constructions on small graphs.

Run with: python3 demos/upper_bounds.py
"""
from regclique.cnf import encode_clique
from regclique.construct import (alg1_bound, build_search_program, clique_index, greedy_colouring,
                                 refute_colourable, refute_homomorphic)
from regclique.graph import Graph, clique_number, sample_er
from regclique.robp import robp_to_refutation, verify_refutation, verify_search_program


def show(title, g, k):
    f = encode_clique(g, k, include_functionality=False)
    p = build_search_program(g, k)
    idx = clique_index(g)
    pi = robp_to_refutation(p, f)
    print(f"{title}: n={g.n} k={k}")
    print(f"  distinct clique neighbourhoods |I(G)| = {len(idx)}")
    print(f"  search program has {len(p)} nodes, bound {alg1_bound(len(idx), k, g.n)}, "
          f"verified {bool(verify_search_program(p, f))}")
    print(f"  regular refutation of length {len(pi)}, verified {bool(verify_refutation(pi, f, True))}")


show("5-cycle", Graph.cycle(5), 3)
g = sample_er(n=14, p=0.4, seed=7)
show("random graph", g, clique_number(g) + 1)

print()
print("A 3-colourable graph has a short refutation through the complete 3-partite graph around it.")
pet = Graph.from_edges(10, [(i, (i + 1) % 5) for i in range(5)] + [(i, i + 5) for i in range(5)]
                       + [(5 + i, 5 + (i + 2) % 5) for i in range(5)])
colouring = greedy_colouring(pet)
pi = refute_colourable(pet, colouring, 4)
f = encode_clique(pet, 4, include_functionality=False)
print(f"  Petersen graph, colouring {colouring}")
print(f"  length {len(pi)} against 2^k k^2 n^2 = {2 ** 4 * 16 * 100}, verified {bool(verify_refutation(pi, f, True))}")

print()
print("Mapping a graph homomorphically onto the 5-cycle gives a triangle refutation of similar size.")
hom = [0, 1, 2, 3, 4, 0, 1, 2, 3, 4]
g = Graph.from_edges(10, [(u, v) for u in range(10) for v in range(u + 1, 10) if (hom[u] - hom[v]) % 5 in (1, 4)])
pi = refute_homomorphic(g, Graph.cycle(5), hom, 3)
f = encode_clique(g, 3, include_functionality=False)
print(f"  blown-up 5-cycle on 10 vertices: length {len(pi)}, verified {bool(verify_refutation(pi, f, True))}")

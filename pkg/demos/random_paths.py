"""Sample the random path distribution and look for frugally traversed useful pairs.

Run with: python3 demos/random_paths.py
"""
from collections import Counter

from regclique.bottleneck import PathSampleConfig, check_lemma_legitimate, sample_paths
from regclique.cnf import encode_clique_block
from regclique.denseness import DensenessParams, is_clique_dense
from regclique.graph import balanced_partition, has_transversal_clique, sample_er
from regclique.solvers import extract_robp_cliquer

g = sample_er(n=10, p=0.7, seed=1283)
part = balanced_partition(10, 4)
assert not has_transversal_clique(g, part)
f = encode_clique_block(g, part)
p = extract_robp_cliquer(g, part)
print(f"dense graph on 10 vertices with {g.num_edges} edges, 4 blocks, no transversal clique")
print(f"program extracted from Russian doll search: {len(p)} nodes")

paths = sample_paths(p, f, part, PathSampleConfig(s=3.0, eps=0.2, seed=1), 2000)
ones = Counter(path.ones() for path in paths)
forced = sum(sum(path.forced) for path in paths)
forced_ones = sum(a for path in paths for a, fc in zip(path.answers, path.forced) if fc)
print(f"2000 paths: ones per path {dict(sorted(ones.items()))}, {forced} forced answers, {forced_ones} of them 1")

params = DensenessParams.custom(k=4, t=2, r=0.5, q=0.5, s=3.0, eps=0.2)
print(f"block denseness at t=2, r=0.5, q=0.5: {is_clique_dense(g, part, params).property1}")
for issue in params.issues():
    print(f"  outside the asymptotic regime: {issue}")
rep = check_lemma_legitimate(p, f, part, params, 1000, g, seed=2)
print(f"fraction of 1000 paths through a frugal useful pair: {rep.fraction:.3f}")

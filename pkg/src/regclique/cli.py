"""Command line interface.

Exit status: 0 on success, 1 when a proof, program or formula fails
verification, 2 on usage errors (bad flags, unreadable input files).
"""
from __future__ import annotations

import argparse
import csv
import math
import sys
from pathlib import Path

from . import __version__
from .cnf import CLIQUE, encode_clique, encode_clique_block, read_dimacs, write_dimacs
from .construct import (ConstructionError, build_search_program, greedy_colouring, refute_colourable,
                        refute_homomorphic)
from .denseness import (BudgetExceeded, DensenessParams, derive_parameters, is_clique_dense)
from .graph import ErParams, Graph, Partition, balanced_partition, read_dimacs_graph, sample_er, write_dimacs_graph
from .robp import (ProgramError, read_program, read_proof, robp_to_refutation, verify_refutation,
                   verify_search_program, write_program, write_proof)

EXIT_OK, EXIT_VERIFY, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _read(path: str) -> str:
    try:
        return Path(path).read_text()
    except OSError as e:
        raise UsageError(f"cannot read {path}: {e.strerror}") from None


def _write(path: str | None, text: str | bytes) -> None:
    if path is None or path == "-":
        sys.stdout.write(text.decode() if isinstance(text, bytes) else text)
        return
    mode = "wb" if isinstance(text, bytes) else "w"
    with open(path, mode) as fh:
        fh.write(text)


def _load_graph(path: str) -> Graph:
    try:
        return read_dimacs_graph(_read(path))
    except ValueError as e:
        raise UsageError(f"{path}: {e}") from None


def _partition(g: Graph, k: int) -> Partition:
    try:
        return balanced_partition(g.n, k)
    except ValueError as e:
        raise UsageError(str(e)) from None


def partition_from_formula(f) -> Partition:
    """Blocks of a block-encoding formula, read off its clique axioms."""
    blocks = [(ci, c) for c, kind, ci in zip(f.clauses, f.kinds, f.clique_index) if kind == CLIQUE]
    if not blocks:
        raise UsageError("formula carries no clique-axiom tags")
    blocks.sort(key=lambda t: t[0])
    return Partition(tuple(frozenset(x - 1 for x in c) for _, c in blocks))


# ---------------------------------------------------------------------------
# commands


def cmd_gen_graph(a) -> int:
    if a.p is not None:
        g = sample_er(n=a.n, p=a.p, seed=a.seed)
        note = [f"G(n, p) n {a.n} p {a.p!r} seed {a.seed}"]
    else:
        params = ErParams(a.n, a.k, a.xi, a.seed)
        g = sample_er(params)
        note = [f"G(n, p) n {a.n} k {a.k} xi {a.xi!r} seed {a.seed} p {params.p!r}"]
    _write(a.out, write_dimacs_graph(g, note))
    return EXIT_OK


def cmd_gen_cnf(a) -> int:
    g = _load_graph(a.graph)
    if a.encoding == "block":
        f = encode_clique_block(g, _partition(g, a.k))
    else:
        f = encode_clique(g, a.k, include_functionality=a.encoding == "map")
    _write(a.out, write_dimacs(f))
    return EXIT_OK


def _parse_ints(text: str) -> list[int]:
    try:
        return [int(t) for t in text.split() if not t.startswith("c")]
    except ValueError as e:
        raise UsageError(f"expected whitespace-separated integers: {e}") from None


def cmd_build_proof(a) -> int:
    g = _load_graph(a.graph)
    try:
        if a.method == "alg1":
            p = build_search_program(g, a.k)
            f = encode_clique(g, a.k, include_functionality=False)
            if a.robp_out:
                _write(a.robp_out, write_program(p))
            pi = robp_to_refutation(p, f)
        elif a.method == "colour":
            colouring = _parse_ints(_read(a.colouring)) if a.colouring else greedy_colouring(g)
            pi = refute_colourable(g, colouring, a.k)
        else:
            if not (a.target and a.map):
                raise UsageError("--method hom needs --target and --map")
            pi = refute_homomorphic(g, _load_graph(a.target), _parse_ints(_read(a.map)), a.k)
    except ConstructionError as e:
        raise UsageError(str(e)) from None
    if a.cnf_out:
        _write(a.cnf_out, write_dimacs(encode_clique(g, a.k, include_functionality=False)))
    _write(a.proof_out, write_proof(pi))
    print(f"c proof length {len(pi)}", file=sys.stderr)
    return EXIT_OK


def cmd_verify(a) -> int:
    try:
        f = read_dimacs(_read(a.cnf))
    except ValueError as e:
        raise UsageError(f"{a.cnf}: {e}") from None
    if bool(a.proof) == bool(a.robp):
        raise UsageError("give exactly one of --proof and --robp")
    try:
        if a.proof:
            verdict = verify_refutation(read_proof(_read(a.proof)), f, require_regular=a.regular)
        else:
            verdict = verify_search_program(read_program(_read(a.robp)), f)
    except (ValueError, ProgramError) as e:
        print(f"INVALID: {e}")
        return EXIT_VERIFY
    if verdict:
        print("VALID")
        return EXIT_OK
    print(f"INVALID: {verdict.reason}")
    return EXIT_VERIFY


def cmd_solve(a) -> int:
    from .solvers import (clique_decision, cliquer, extract_robp_cliquer, extract_robp_maxclique,
                          max_clique_bb, SearchStats)
    g = _load_graph(a.graph)
    if a.k is None:
        if a.blocks or a.extract:
            raise UsageError("--blocks and --extract need --k")
        clique, stats, _ = (cliquer if a.algo == "cliquer" else max_clique_bb)(g)
        print(f"clique {len(clique)} : {' '.join(str(v) for v in sorted(clique))}")
        print(f"treenodes {stats.tree_nodes}")
        return EXIT_OK
    part = _partition(g, a.k) if a.blocks else None
    stats = SearchStats()
    found = clique_decision(g, a.k, part, a.algo, stats)
    kind = "transversal " if a.blocks else ""
    print(f"{kind}{a.k}-clique {'found' if found else 'absent'}")
    print(f"treenodes {stats.tree_nodes}")
    if a.extract:
        if not a.blocks:
            raise UsageError("--extract works on the block encoding; add --blocks")
        if found:
            print("nothing to extract: the formula is satisfiable", file=sys.stderr)
            return EXIT_VERIFY
        ext = extract_robp_cliquer if a.algo == "cliquer" else extract_robp_maxclique
        p = ext(g, part)
        f = encode_clique_block(g, part)
        ok = bool(verify_search_program(p, f))
        _write(a.extract, write_program(p))
        if a.cnf_out:
            _write(a.cnf_out, write_dimacs(f))
        print(f"robp_nodes {len(p)} verified {'yes' if ok else 'no'}")
        return EXIT_OK if ok else EXIT_VERIFY
    return EXIT_OK


def _report_params(a, n: int) -> DensenessParams:
    if a.t is not None or a.r is not None or a.q is not None:
        if None in (a.t, a.r, a.q):
            raise UsageError("--t, --r and --q override together")
        s = a.s if a.s is not None else math.sqrt(n)
        return DensenessParams.custom(a.k, a.t, a.r, a.q, s, a.epsilon, q_prime=a.q_prime, xi=a.xi)
    try:
        return derive_parameters(n, a.k, a.xi, a.epsilon)
    except ValueError as e:
        raise UsageError(str(e)) from None


def cmd_check_dense(a) -> int:
    g = _load_graph(a.graph)
    part = _partition(g, a.k)
    params = _report_params(a, g.n)
    cands = None
    if a.w_file:
        cands = [_parse_ints(line) for line in _read(a.w_file).splitlines() if line.strip()]
    try:
        rep = is_clique_dense(g, part, params, cands, exhaustive=a.exhaustive, budget=a.budget)
    except BudgetExceeded as e:
        raise UsageError(str(e)) from None
    print(f"params k {params.k} t {params.t:g} r {params.r:g} q {params.q:g} s {params.s:g} "
          f"q_prime {params.q_prime:g}")
    for issue in params.issues():
        print(f"note {issue}")
    print(rep.summary())
    row = dict(n=g.n, k=params.k, t=params.t, r=params.r, q=params.q, s=params.s, q_prime=params.q_prime,
               property1=int(rep.property1), property2=int(rep.property2), candidates=rep.checked_w,
               dense=rep.dense_w, without_witness=len(rep.w_failures))
    out = open(a.csv, "w", newline="") if a.csv else sys.stdout
    try:
        w = csv.DictWriter(out, fieldnames=list(row), lineterminator="\n")
        w.writeheader()
        w.writerow(row)
    finally:
        if a.csv:
            out.close()
    return EXIT_OK


def cmd_sample_paths(a) -> int:
    from .bottleneck import PathSampleConfig, PathSampler, ends_in_clique_axiom, has_frugal_useful_pair, side_sets
    try:
        f = read_dimacs(_read(a.cnf))
        p = read_program(_read(a.robp))
    except ValueError as e:
        raise UsageError(str(e)) from None
    part = partition_from_formula(f)
    verdict = verify_search_program(p, f)
    if not verdict:
        print(f"INVALID: {verdict.reason}", file=sys.stderr)
        return EXIT_VERIFY
    try:
        cfg = PathSampleConfig(a.s, a.epsilon, a.seed)
    except ValueError as e:
        raise UsageError(str(e)) from None
    sampler = PathSampler(p, f, part, cfg)
    g = _load_graph(a.graph) if a.graph else None
    if g is not None:
        params = DensenessParams.custom(part.k, a.t, a.r, a.q, a.s, a.epsilon)
        sides, cap, cache = side_sets(p, part), math.ceil(part.k / a.t), {}
    out = open(a.out, "w", newline="") if a.out else sys.stdout
    try:
        w = csv.writer(out, lineterminator="\n")
        w.writerow(["sample", "ones", "sink_axiom", "clique_sink", "useful_pair"])
        for i in range(a.samples):
            path = sampler.sample()
            useful = ""
            if g is not None:
                useful = int(has_frugal_useful_pair(p, path, part, params, g, sides, cap, cache))
            w.writerow([i, path.ones(), p.label[path.sink] + 1, int(ends_in_clique_axiom(p, f, path)), useful])
    finally:
        if a.out:
            out.close()
    return EXIT_OK


def cmd_experiment(a) -> int:
    from .experiment import ExperimentConfig, medians, run_experiment, write_csv
    try:
        cfg = ExperimentConfig.load(a.config)
    except (OSError, ValueError) as e:
        raise UsageError(f"{a.config}: {e}") from None
    rows = run_experiment(cfg, jobs=a.jobs)
    with open(a.out, "w", newline="") as fh:
        write_csv(rows, fh)
    for (algo, k, n), med in medians(rows).items():
        print(f"median robp_nodes algo {algo} k {k} n {n} : {med:g}")
    return EXIT_VERIFY if any(r["verified"] == "no" for r in rows) else EXIT_OK


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="regclique", description="Clique formulas, regular resolution and clique solvers.")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    s = sub.add_parser("gen-graph", help="sample an Erdos-Renyi graph as DIMACS")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--k", type=int, default=3)
    s.add_argument("--xi", type=float, default=1.5)
    s.add_argument("--p", type=float, help="edge probability (overrides k and xi)")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out")
    s.set_defaults(func=cmd_gen_graph)

    s = sub.add_parser("gen-cnf", help="write a clique formula as DIMACS CNF")
    s.add_argument("--graph", required=True)
    s.add_argument("--k", type=int, required=True)
    s.add_argument("--encoding", choices=["map", "weak", "block"], default="map")
    s.add_argument("--out")
    s.set_defaults(func=cmd_gen_cnf)

    s = sub.add_parser("build-proof", help="build a regular refutation of the weak encoding")
    s.add_argument("--graph", required=True)
    s.add_argument("--k", type=int, required=True)
    s.add_argument("--method", choices=["alg1", "colour", "hom"], default="alg1")
    s.add_argument("--colouring", help="file with one colour per vertex (method colour)")
    s.add_argument("--target", help="DIMACS graph H (method hom)")
    s.add_argument("--map", help="file with the image of each vertex in H (method hom)")
    s.add_argument("--robp-out", help="write the program (method alg1)")
    s.add_argument("--proof-out")
    s.add_argument("--cnf-out", help="also write the weak encoding")
    s.set_defaults(func=cmd_build_proof)

    s = sub.add_parser("verify", help="check a refutation or a search program against a CNF")
    s.add_argument("--cnf", required=True)
    s.add_argument("--proof")
    s.add_argument("--robp")
    s.add_argument("--regular", action="store_true", help="also require regularity")
    s.set_defaults(func=cmd_verify)

    s = sub.add_parser("solve", help="maximum clique or block-respecting decision")
    s.add_argument("--graph", required=True)
    s.add_argument("--algo", choices=["cliquer", "bb"], default="cliquer")
    s.add_argument("--k", type=int)
    s.add_argument("--blocks", action="store_true", help="transversal clique over the balanced k-partition")
    s.add_argument("--extract", metavar="ROBP_OUT", help="write the program extracted from the search")
    s.add_argument("--cnf-out", help="also write the block encoding")
    s.set_defaults(func=cmd_solve)

    s = sub.add_parser("check-dense", help="clique-denseness report")
    s.add_argument("--graph", required=True)
    s.add_argument("--k", type=int, required=True)
    s.add_argument("--xi", type=float, default=1.5)
    s.add_argument("--epsilon", type=float, default=0.2)
    s.add_argument("--t", type=float)
    s.add_argument("--r", type=float)
    s.add_argument("--q", type=float)
    s.add_argument("--s", type=float)
    s.add_argument("--q-prime", type=float)
    g = s.add_mutually_exclusive_group()
    g.add_argument("--exhaustive", action="store_true")
    g.add_argument("--w-file", help="one candidate set W per line")
    s.add_argument("--budget", type=int)
    s.add_argument("--csv", help="write the CSV row here instead of stdout")
    s.set_defaults(func=cmd_check_dense)

    s = sub.add_parser("sample-paths", help="sample random paths through a block-encoding program")
    s.add_argument("--robp", required=True)
    s.add_argument("--cnf", required=True)
    s.add_argument("--s", type=float, required=True)
    s.add_argument("--epsilon", type=float, required=True)
    s.add_argument("--samples", type=int, default=1000)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--graph", help="graph for the useful pair column")
    s.add_argument("--t", type=float, default=1.0)
    s.add_argument("--r", type=float, default=1.0)
    s.add_argument("--q", type=float, default=1.0)
    s.add_argument("--out")
    s.set_defaults(func=cmd_sample_paths)

    s = sub.add_parser("experiment", help="batch run from a JSON config")
    s.add_argument("--config", required=True)
    s.add_argument("--out", required=True)
    s.add_argument("--jobs", type=int, default=1)
    s.set_defaults(func=cmd_experiment)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    a = ap.parse_args(argv)
    try:
        return a.func(a)
    except UsageError as e:
        print(f"{ap.prog} {a.command}: error: {e}", file=sys.stderr)
        return EXIT_USAGE


def dispatch(argv) -> int:
    try:
        return main(argv)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())

"""Batch runs: sample, reject, solve, extract, verify, record."""
from __future__ import annotations

import csv
import io
import json
import statistics
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable

from .cnf import encode_clique_block
from .graph import ErParams, balanced_partition, has_transversal_clique, sample_er
from .robp import robp_to_refutation, verify_refutation, verify_search_program
from .solvers import SearchStats, clique_decision, extract_robp_cliquer, extract_robp_maxclique

COLUMNS = ["n", "k", "xi", "seed", "algo", "treenodes", "robp_nodes", "proof_len", "verified"]
EXTRACTORS = {"cliquer": extract_robp_cliquer, "bb": extract_robp_maxclique}


@dataclass
class ExperimentConfig:
    n: list[int] = field(default_factory=list)
    k: list[int] = field(default_factory=list)
    xi: float = 1.5
    seeds: list[int] = field(default_factory=list)
    algos: list[str] = field(default_factory=lambda: ["cliquer", "bb"])
    extract: bool = True

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        seeds = d.get("seeds", [])
        if isinstance(seeds, int):
            seeds = list(range(seeds))
        cfg = cls(list(d.get("n", [])), list(d.get("k", [])), float(d.get("xi", 1.5)), list(seeds),
                  list(d.get("algos", ["cliquer", "bb"])), bool(d.get("extract", True)))
        for a in cfg.algos:
            if a not in EXTRACTORS:
                raise ValueError(f"unknown algorithm {a!r}")
        return cfg

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))

    def instances(self) -> list[tuple[int, int, float, int, str]]:
        return [(n, k, self.xi, s, a) for k in self.k for n in self.n for s in self.seeds for a in self.algos]


def run_instance(n: int, k: int, xi: float, seed: int, algo: str, extract: bool = True) -> dict:
    row = dict(n=n, k=k, xi=xi, seed=seed, algo=algo, treenodes="", robp_nodes="", proof_len="", verified="")
    try:
        g = sample_er(ErParams(n, k, xi, seed))
        part = balanced_partition(n, k)
        if has_transversal_clique(g, part):
            row["verified"] = "rejected"
            return row
        stats = SearchStats()
        if clique_decision(g, k, part, algo, stats):
            raise RuntimeError("solver reported a clique the oracle did not find")
        row["treenodes"] = stats.tree_nodes
        if extract:
            f = encode_clique_block(g, part)
            p = EXTRACTORS[algo](g, part)
            row["robp_nodes"] = len(p)
            ok = bool(verify_search_program(p, f))
            if ok:
                pi = robp_to_refutation(p, f)
                row["proof_len"] = len(pi)
                ok = bool(verify_refutation(pi, f, require_regular=True))
            row["verified"] = "yes" if ok else "no"
    except Exception as e:  # recorded, the run goes on
        row["verified"] = f"error: {type(e).__name__}: {e}"
    return row


def _run(args):
    return run_instance(*args)


def run_experiment(config: ExperimentConfig, jobs: int = 1) -> list[dict]:
    work = [inst + (config.extract,) for inst in config.instances()]
    if jobs > 1 and len(work) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(_run, work, chunksize=4))
    return [_run(w) for w in work]


def write_csv(rows: Iterable[dict], out=None) -> str:
    buf = io.StringIO() if out is None else out
    w = csv.DictWriter(buf, fieldnames=COLUMNS, lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({c: r.get(c, "") for c in COLUMNS})
    return buf.getvalue() if out is None else ""


def read_csv(text: str) -> list[dict]:
    return list(csv.DictReader(io.StringIO(text)))


def medians(rows: Iterable[dict], column: str = "robp_nodes") -> dict[tuple[str, int, int], float]:
    """Median of ``column`` per (algo, k, n) over verified instances."""
    groups: dict[tuple[str, int, int], list[float]] = {}
    for r in rows:
        if r.get("verified") != "yes" or r.get(column) in ("", None):
            continue
        groups.setdefault((r["algo"], int(r["k"]), int(r["n"])), []).append(float(r[column]))
    return {key: statistics.median(v) for key, v in sorted(groups.items())}

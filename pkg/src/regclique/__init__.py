"""Clique formulas, read-once branching programs and regular resolution."""

__version__ = "0.1.0"

from .graph import Graph, Partition, balanced_partition, ErParams, sample_er
from .cnf import CnfFormula, encode_clique, encode_clique_block
from .robp import BranchingProgram, ResolutionProof, robp_to_refutation, verify_refutation, verify_search_program
from .construct import build_search_program, clique_index, refute_colourable, refute_homomorphic
from .solvers import cliquer, max_clique_bb, clique_decision, extract_robp_cliquer, extract_robp_maxclique

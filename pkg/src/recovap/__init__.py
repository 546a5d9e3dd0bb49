"""Solvers, reductions and oracles for the recoverable assignment problem (RecovAP).

Two perfect matchings M1, M2 of a bipartite graph minimise
``c1(M1) + c2(M2)`` subject to ``|M1 & M2| >= k``.
"""

from .assignment import ApProblem, solve_ap, solve_ap_with_forced
from .core import (INF, AlternatingCycle, ExactMatchingInstance, Instance, InstanceError, IntervalUncertainty,
                   SolutionPair, ValidationReport, cycle_decomposition, matching, validate_solution,
                   worst_case_instance)
from .gadgets import (GadgetInstance, GridTilingInstance, decode_certificate, encode_certificate,
                      grid_tiling_to_recovap, grid_tiling_to_recovap_dual, solve_grid_tiling)
from .monge import (CostMatrixPair, NestedSolutionShape, PreconditionError, generate_anti_monge, generate_monge,
                    is_anti_monge, is_monge, solve_monge_antimonge)
from .oracle import brute_force_2s, brute_force_exact_matching, brute_force_recovap, enumerate_perfect_matchings
from .second_stage import (mvv_exact_matching, preprocess_degree_one, reduce_exact_to_matching_red,
                           reduce_exactred_to_2s, solve_2s)
from .treewidth import best_decomposition, make_nice, min_fill_decomposition, tw_dp_solve
from .xp import xp_solve_k, xp_solve_kprime

__version__ = "0.1.0"

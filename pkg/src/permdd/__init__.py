"""Permanents of 0-1 matrices with a symbolic Ryser formula over ADDs."""

from .add import Add, AddManager, VariableOrder
from .cnf import CnfFormula, count_models, encode_permanent, parse_dimacs, to_dimacs, write_dimacs
from .errors import (GenerationError, InternalAssertion, LimitExceeded, NodeBudgetExceeded,
                     ParseError, PermddError, ResourceError, Timeout)
from .matrix import (GenParams, Matrix01, generate, has_perfect_matching, parse_dense,
                     parse_matrix_market, primal_graph, read_matrix, serialize_dense)
from .permanent import (PermanentResult, PermConfig, build_parity_add, build_row_sum_add,
                        cluster_rank, mcs_order, perm, perm_brute_force,
                        perm_early_abstraction, perm_identical_rows, perm_monolithic,
                        perm_ryser_gray)

__version__ = "0.1.0"

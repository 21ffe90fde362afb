"""Systems of equations and inclusions over sets of integers."""

from .ast import (Add, Const, Equation, Expr, Inclusion, Intersect, Negate, Oracle, Sub, System, SystemError_,
                  TruncSub, Union, Var, rename, substitute, union_all)
from .dsl import DSLError, ORACLES, format_expr, format_system, load_system, parse_expr, parse_system, register_oracle
from .evaluate import RegimeError, combine, const_window, evaluate_exact, evaluate_windowed, window_of_upset
from .solve import (SATISFIED, UNKNOWN, VIOLATED, ConstraintVerdict, SolveError, SolveReport, brute_force_solutions,
                    check_solution, kleene_solve)
from .transform import assemble_pos_neg, inclusion_to_equation, negate_system

__all__ = [
    "Add", "Const", "Equation", "Expr", "Inclusion", "Intersect", "Negate", "Oracle", "Sub", "System",
    "SystemError_", "TruncSub", "Union", "Var", "rename", "substitute", "union_all",
    "DSLError", "ORACLES", "format_expr", "format_system", "load_system", "parse_expr", "parse_system",
    "register_oracle", "RegimeError", "combine", "const_window", "evaluate_exact", "evaluate_windowed",
    "window_of_upset", "SATISFIED", "UNKNOWN", "VIOLATED", "ConstraintVerdict", "SolveError", "SolveReport",
    "brute_force_solutions", "check_solution", "kleene_solve", "assemble_pos_neg", "inclusion_to_equation",
    "negate_system",
]

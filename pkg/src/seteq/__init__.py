"""Systems of equations over sets of integers, evaluated exactly or on windows."""

from .numset import EMPTY, NAT, ZZ, HorizonError, UPSet, Window, WindowSet, format_upset, parse_upset
from .digits import DigitPattern, bin36_encode, bin36_value, compile_pattern, rep7, val7
from .eqsys import System, brute_force_solutions, check_solution, kleene_solve, load_system, parse_system

__all__ = [
    "EMPTY", "NAT", "ZZ", "HorizonError", "UPSet", "Window", "WindowSet", "format_upset", "parse_upset",
    "DigitPattern", "bin36_encode", "bin36_value", "compile_pattern", "rep7", "val7",
    "System", "brute_force_solutions", "check_solution", "kleene_solve", "load_system", "parse_system",
]

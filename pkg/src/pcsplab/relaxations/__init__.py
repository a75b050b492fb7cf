from .algorithms import RelaxationResult, aip, blp, blp_aip, round_one_in_three
from .integer import HermiteForm, IntegerCertificate, aip_solve, hermite_form, verify_certificate
from .program import AIP, BLP, LinearSystem, ProgramVariables, build_program, integral_point, parse_system
from .simplex import Simplex, lp_feasible, maximize, variable_support, variable_support_by_columns

__all__ = [
    "AIP", "BLP", "HermiteForm", "IntegerCertificate", "LinearSystem", "ProgramVariables",
    "RelaxationResult", "Simplex", "aip", "aip_solve", "blp", "blp_aip", "build_program",
    "hermite_form", "integral_point", "lp_feasible", "maximize", "parse_system",
    "round_one_in_three", "variable_support", "variable_support_by_columns", "verify_certificate",
]

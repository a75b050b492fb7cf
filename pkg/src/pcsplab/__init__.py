"""Finite-domain promise constraint satisfaction toolkit."""
from .config import Budget, default_budget
from .errors import (BudgetExceeded, CapExceeded, NodeLimitExceeded, ParseError, PCSPError,
                     SignatureMismatch)
from .homs import (PCSPVerdict, are_isomorphic, count_homomorphisms, decide_pcsp_oracle,
                   enumerate_homomorphisms, find_homomorphism, find_isomorphism, homomorphism_exists,
                   solve_via_finite_sandwich)
from .structures import (Signature, Structure, builtin, complete_graph, decode, directed_cycle,
                         directed_path, encode, is_homomorphism, load_structure, nae, one_in_three,
                         parse_structure, power, serialize_structure, three_sat, undirected,
                         undirected_cycle, validate_structure, x_power)

__version__ = "0.1.0"

"""Instance-level BLP, AIP and BLP+AIP, plus the 1-in-3 rounding."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from ..errors import InvalidPoint, WrongTemplate
from ..structures import Structure, is_homomorphism, nae, one_in_three
from .integer import IntegerCertificate, aip_solve
from .program import AIP, BLP, build_program
from .simplex import Simplex, variable_support


@dataclass(frozen=True)
class RelaxationResult:
    accepted: bool
    point: tuple | None = None
    certificate: IntegerCertificate | None = None
    support: frozenset[int] | None = None
    stage: str = ""

    @property
    def verdict(self) -> str:
        return "accept" if self.accepted else "reject"


def blp(a: Structure, i: Structure) -> RelaxationResult:
    system, _ = build_program(a, i, BLP)
    lp = Simplex(system)
    if not lp.feasible:
        return RelaxationResult(False, stage="BLP")
    return RelaxationResult(True, lp.point(), stage="BLP")


def aip(a: Structure, i: Structure) -> RelaxationResult:
    system, _ = build_program(a, i, AIP)
    res = aip_solve(system)
    if isinstance(res, IntegerCertificate):
        return RelaxationResult(False, certificate=res, stage="AIP")
    return RelaxationResult(True, res, stage="AIP")


def blp_aip(a: Structure, i: Structure) -> RelaxationResult:
    """BLP, then AIP with every column outside the BLP support forced to zero.

    An accepted point is expanded back to all columns (zero off the support);
    a certificate refers to the restricted system, whose rows are unchanged.
    """
    system, _ = build_program(a, i, BLP)
    lp = Simplex(system)
    if not lp.feasible:
        return RelaxationResult(False, stage="BLP")
    support = variable_support(system, lp)
    keep = sorted(support)
    res = aip_solve(system.with_kind(AIP).restrict(keep))
    if isinstance(res, IntegerCertificate):
        return RelaxationResult(False, certificate=res, support=support, stage="AIP")
    x = [0] * system.ncols
    for j, v in zip(keep, res):
        x[j] = v
    return RelaxationResult(True, tuple(x), support=support, stage="AIP")


def round_one_in_three(i: Structure, point: Sequence[int | Fraction]) -> tuple[int, ...]:
    """Turn an AIP point over the 1-in-3 template into a not-all-equal 2-colouring.

    ``s(v) = mu_v(1)`` satisfies ``s(u) + s(v) + s(w) = 1`` on every constraint;
    positive values go to 1 and the rest to 0, which never makes a triple
    constant.
    """
    t = one_in_three()
    if not t.similar_to(i):
        raise WrongTemplate("instance is not over the 1-in-3 signature")
    system, variables = build_program(t, i, AIP)
    if not system.satisfied_by(point):
        raise InvalidPoint("point does not solve the AIP system of this instance")
    h = tuple(1 if point[variables.vertex[(v, 1)]] > 0 else 0 for v in range(i.domain_size))
    if not is_homomorphism(h, i, nae(2)):
        raise AssertionError("rounding produced an invalid NAE assignment")
    return h

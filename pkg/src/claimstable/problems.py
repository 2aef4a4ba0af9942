"""Theta-minimal proportional generalized claims problems.

Coalitions are handled as sorted tuples of agent ids at the API boundary and
as bitmasks internally (agent ``i`` is bit ``i - 1``). Every coalition of size
at least ``theta`` is funded with ``alpha`` times its members' total claim;
smaller coalitions get nothing.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable

from .config import check_size
from .errors import ClaimsError
from .rules import Rule, as_rational, get_rule

__all__ = [
    "Coalition",
    "to_mask",
    "from_mask",
    "coalition",
    "ThetaProblem",
    "Preference",
    "coalitional_endowment",
    "coalition_payoff",
    "prefers",
    "preference_order",
]

Coalition = tuple[int, ...]


def to_mask(members: Iterable[int]) -> int:
    mask = 0
    for i in members:
        if i < 1:
            raise ClaimsError(f"agent ids start at 1, got {i}")
        mask |= 1 << (i - 1)
    return mask


def from_mask(mask: int) -> Coalition:
    out = []
    i = 1
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return tuple(out)


def coalition(members) -> Coalition:
    """Canonical form of a coalition given as ids, a mask, or any iterable."""
    if isinstance(members, int):
        return from_mask(members)
    c = tuple(sorted(set(members)))
    if not c:
        raise ClaimsError("coalitions are nonempty")
    return c


def _mask_of(S) -> int:
    return S if isinstance(S, int) else to_mask(S)


@dataclass(frozen=True)
class ThetaProblem:
    """Claims, grand-coalition endowment and minimal funded coalition size.

    ``alpha = endowment / sum(claims)`` is computed once, exactly. ``alpha == 1``
    is accepted but reported by :attr:`degenerate`.
    """

    claims: tuple[Fraction, ...]
    endowment: Fraction
    theta: int = 1
    _memo: dict = field(default_factory=dict, init=False, repr=False, compare=False)
    alpha: Fraction = field(init=False, compare=False)

    def __post_init__(self):
        claims = tuple(as_rational(c) for c in self.claims)
        E = as_rational(self.endowment)
        object.__setattr__(self, "claims", claims)
        object.__setattr__(self, "endowment", E)
        if not claims:
            raise ClaimsError("empty claims vector")
        if any(c <= 0 for c in claims):
            raise ClaimsError("claims must be strictly positive")
        total = sum(claims, Fraction(0))
        if not 0 < E <= total:
            raise ClaimsError(f"need 0 < endowment <= {total}, got {E}")
        if int(self.theta) != self.theta or self.theta < 1:
            raise ClaimsError("theta must be a positive integer")
        if len(claims) < self.theta:
            raise ClaimsError(f"need at least theta={self.theta} agents, got {len(claims)}")
        object.__setattr__(self, "alpha", E / total)

    @classmethod
    def from_alpha(cls, claims, alpha, theta: int = 1) -> "ThetaProblem":
        claims = tuple(as_rational(c) for c in claims)
        return cls(claims, as_rational(alpha) * sum(claims, Fraction(0)), theta)

    @property
    def n(self) -> int:
        return len(self.claims)

    @property
    def agents(self) -> tuple[int, ...]:
        return tuple(range(1, self.n + 1))

    @property
    def degenerate(self) -> bool:
        return self.alpha == 1

    def claim(self, i: int) -> Fraction:
        return self.claims[i - 1]

    def endowment_of(self, mask: int) -> Fraction:
        size = bin(mask).count("1")
        if size < self.theta:
            return Fraction(0)
        return self.alpha * sum((self.claims[i - 1] for i in from_mask(mask)), Fraction(0))

    def payoffs(self, rule: Rule, mask: int) -> dict[int, Fraction]:
        """Payoff of each member of the coalition ``mask`` under ``rule`` (memoized)."""
        key = (rule, mask)
        hit = self._memo.get(key)
        if hit is None:
            members = from_mask(mask)
            if not members or members[-1] > self.n:
                raise ClaimsError(f"coalition {members} is not a nonempty subset of 1..{self.n}")
            x = rule(tuple(self.claims[i - 1] for i in members), self.endowment_of(mask))
            hit = dict(zip(members, x))
            self._memo[key] = hit
        return hit

    # preferences are monotonic in payoff
    utilities = payoffs


def coalitional_endowment(p: ThetaProblem, S) -> Fraction:
    return p.endowment_of(_mask_of(S))


def coalition_payoff(p: ThetaProblem, rule, S) -> tuple[Fraction, ...]:
    """Payoffs of the members of ``S`` (ascending id order) under ``rule``."""
    pay = p.payoffs(get_rule(rule), _mask_of(S))
    return tuple(pay[i] for i in sorted(pay))


class Preference(enum.Enum):
    S_BETTER = "S-better"
    EQUAL = "equal"
    T_BETTER = "T-better"


def prefers(p, rule, i: int, S, T) -> Preference:
    """How agent ``i`` ranks coalition ``S`` against ``T``."""
    rule = get_rule(rule) if isinstance(rule, str) else rule
    ms, mt = _mask_of(S), _mask_of(T)
    bit = 1 << (i - 1)
    if not (ms & bit and mt & bit):
        raise ClaimsError(f"agent {i} must belong to both coalitions")
    a, b = p.utilities(rule, ms)[i], p.utilities(rule, mt)[i]
    if a > b:
        return Preference.S_BETTER
    if a < b:
        return Preference.T_BETTER
    return Preference.EQUAL


def preference_order(p, rule, i: int, max_n: int | None = None) -> list[list[Coalition]]:
    """All coalitions containing ``i``, best first, ties grouped.

    Inside a tie group coalitions appear in ascending bitmask order.
    """
    check_size(p.n, "preference_order", max_n)
    rule = get_rule(rule) if isinstance(rule, str) else rule
    if not 1 <= i <= p.n:
        raise ClaimsError(f"agent {i} is not in 1..{p.n}")
    bit = 1 << (i - 1)
    groups: dict[Fraction, list[Coalition]] = {}
    for mask in range(1, 1 << p.n):
        if mask & bit:
            groups.setdefault(p.utilities(rule, mask)[i], []).append(from_mask(mask))
    return [groups[u] for u in sorted(groups, reverse=True)]

"""Division rules for claims problems.

The proportional, constrained equal awards (CEA) and constrained equal losses
(CEL) rules are solved in closed form by walking the sorted claims, so every
payoff is an exact :class:`~fractions.Fraction`. User-defined parametric rules
go through :func:`parametric_solve`, a bisection on the shared parameter.

The axiom checkers are finite-sample falsifiers: a ``Verdict`` either says the
property held on the inputs given or carries a concrete witness.
"""
from __future__ import annotations

import numbers
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Sequence

from .errors import ClaimsError, ContractViolation

__all__ = [
    "as_rational",
    "ClaimsProblem",
    "LambdaResult",
    "Rule",
    "ParametricRule",
    "Verdict",
    "proportional",
    "cea",
    "cel",
    "parametric_solve",
    "check_resource_monotonicity",
    "check_consistency",
    "PROPORTIONAL",
    "CEA",
    "CEL",
    "get_rule",
    "register_rule",
]

DEFAULT_TOL = Fraction(1, 10**12)
MAX_BISECTIONS = 200


def as_rational(x) -> Fraction:
    """Convert ints, ``"p/q"`` or decimal strings, and floats to an exact Fraction.

    Floats go through their shortest decimal ``repr`` so ``9.4`` becomes
    ``47/5`` rather than the nearest binary fraction.
    """
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise TypeError("booleans are not numbers here")
    if isinstance(x, numbers.Integral):
        return Fraction(int(x))
    if isinstance(x, float):
        return Fraction(repr(x))
    if isinstance(x, str):
        return Fraction(x.strip())
    if isinstance(x, numbers.Rational):
        return Fraction(x.numerator, x.denominator)
    return Fraction(str(x))


@dataclass(frozen=True)
class ClaimsProblem:
    """Claims vector and endowment for one group of agents."""

    claims: tuple[Fraction, ...]
    endowment: Fraction
    agents: tuple[int, ...] = ()

    def __post_init__(self):
        claims = tuple(as_rational(c) for c in self.claims)
        endowment = as_rational(self.endowment)
        agents = tuple(self.agents) or tuple(range(1, len(claims) + 1))
        object.__setattr__(self, "claims", claims)
        object.__setattr__(self, "endowment", endowment)
        object.__setattr__(self, "agents", agents)
        if not claims:
            raise ClaimsError("a claims problem needs at least one agent")
        if len(agents) != len(claims):
            raise ClaimsError("agents and claims have different lengths")
        if len(set(agents)) != len(agents) or min(agents) < 1:
            raise ClaimsError("agent ids must be distinct positive integers")
        if any(c <= 0 for c in claims):
            raise ClaimsError("claims must be strictly positive")
        if endowment < 0:
            raise ClaimsError("endowment must be non-negative")
        if endowment > sum(claims):
            raise ClaimsError(f"endowment {endowment} exceeds total claims {sum(claims)}")

    @property
    def n(self) -> int:
        return len(self.claims)

    @property
    def total_claims(self) -> Fraction:
        return sum(self.claims, Fraction(0))


@dataclass(frozen=True)
class LambdaResult:
    """Rule parameter together with the allocation it induces."""

    lam: Fraction
    payoffs: tuple[Fraction, ...]

    def __iter__(self):
        return iter(self.payoffs)


def proportional(p: ClaimsProblem) -> LambdaResult:
    lam = p.endowment / p.total_claims
    return LambdaResult(lam, tuple(lam * c for c in p.claims))


def _awards_level(claims: Sequence[Fraction], endowment: Fraction) -> Fraction:
    # Solve sum(min(c, lam)) == endowment on the segment between sorted breakpoints.
    remaining = endowment
    ordered = sorted(claims)
    n = len(ordered)
    for k, c in enumerate(ordered):
        left = n - k
        if c * left >= remaining:
            return remaining / left
        remaining -= c
    return ordered[-1]


def _losses_level(claims: Sequence[Fraction], endowment: Fraction) -> Fraction:
    # Solve sum(max(0, c - lam)) == endowment, largest claims first.
    ordered = sorted(claims, reverse=True)
    n = len(ordered)
    prefix = Fraction(0)
    for k, c in enumerate(ordered, start=1):
        prefix += c
        lam = (prefix - endowment) / k
        if k == n or lam >= ordered[k]:
            return max(lam, Fraction(0))
    raise AssertionError("unreachable")


def cea(p: ClaimsProblem) -> LambdaResult:
    """Constrained equal awards: everyone gets ``min(c_i, lam)``."""
    lam = _awards_level(p.claims, p.endowment)
    return LambdaResult(lam, tuple(min(c, lam) for c in p.claims))


def cel(p: ClaimsProblem) -> LambdaResult:
    """Constrained equal losses: everyone gets ``max(0, c_i - lam)``."""
    lam = _losses_level(p.claims, p.endowment)
    return LambdaResult(lam, tuple(max(Fraction(0), c - lam) for c in p.claims))


@dataclass(frozen=True, eq=False)
class Rule:
    """A named division procedure.

    Calling a rule with ``(claims, endowment)`` returns the payoff tuple.
    ``solver`` receives a validated :class:`ClaimsProblem`; rules outside the
    excess-demand regime (uniform, equal surplus) set ``validate=False`` and get
    the raw claims and endowment instead.
    """

    name: str
    solver: Callable = field(compare=False)
    validate: bool = True

    def solve(self, claims, endowment) -> LambdaResult:
        if self.validate:
            return self.solver(ClaimsProblem(tuple(claims), endowment))
        return self.solver(tuple(as_rational(c) for c in claims), as_rational(endowment))

    def __call__(self, claims, endowment) -> tuple[Fraction, ...]:
        return self.solve(claims, endowment).payoffs

    def __repr__(self):
        return f"Rule({self.name!r})"


PROPORTIONAL = Rule("proportional", proportional)
CEA = Rule("cea", cea)
CEL = Rule("cel", cel)

_REGISTRY: dict[str, Rule] = {}


def register_rule(rule: Rule) -> Rule:
    _REGISTRY[rule.name] = rule
    return rule


for _r in (PROPORTIONAL, CEA, CEL):
    register_rule(_r)


def get_rule(name) -> Rule:
    if isinstance(name, Rule):
        return name
    try:
        return _REGISTRY[name.lower()]
    except KeyError:
        raise ClaimsError(f"unknown rule {name!r}; known: {sorted(_REGISTRY)}") from None


# -- parametric rules -------------------------------------------------------


@dataclass(frozen=True)
class ParametricRule:
    """Rule given by per-agent schedules ``f(c_i, lam)`` on ``[lower, upper]``.

    ``schedule`` must be weakly increasing in ``lam`` with ``f(c, lower) == 0`` and
    ``f(c, upper) == c``. Bounds may depend on the claims vector (pass a callable),
    which is how rules with an unbounded parameter range are given a finite bracket.
    ``closed_form`` marks the shipped representations of P/CEA/CEL so that
    :func:`parametric_solve` answers them exactly.
    """

    name: str
    schedule: Callable[[Fraction, Fraction], Fraction] = field(compare=False)
    lower: object = Fraction(0)
    upper: object = Fraction(1)
    closed_form: Callable | None = field(default=None, compare=False)

    def bracket(self, claims: tuple[Fraction, ...]) -> tuple[Fraction, Fraction]:
        lo = self.lower(claims) if callable(self.lower) else as_rational(self.lower)
        hi = self.upper(claims) if callable(self.upper) else as_rational(self.upper)
        return lo, hi

    def as_rule(self, tol=DEFAULT_TOL) -> Rule:
        return Rule(self.name, lambda p: parametric_solve(self, p, tol))


PROPORTIONAL_SCHEDULE = ParametricRule(
    "proportional", lambda c, lam: lam * c, Fraction(0), Fraction(1), closed_form=proportional
)
CEA_SCHEDULE = ParametricRule(
    "cea", lambda c, lam: min(c, lam), Fraction(0), lambda claims: max(claims), closed_form=cea
)
CEL_SCHEDULE = ParametricRule(
    "cel",
    # increasing form: lam is minus the common loss, on [-max(claims), 0]
    lambda c, lam: max(Fraction(0), c + lam),
    lambda claims: -max(claims),
    Fraction(0),
    closed_form=cel,
)


def parametric_solve(rule: ParametricRule, p: ClaimsProblem, tol=DEFAULT_TOL) -> LambdaResult:
    """Find ``lam`` with ``sum(f(c_j, lam)) == E`` to within ``tol`` by bisection.

    Shipped schedules (those carrying ``closed_form``) are answered exactly.
    """
    if rule.closed_form is not None:
        return rule.closed_form(p)
    tol = as_rational(tol)
    if tol <= 0:
        raise ClaimsError("tolerance must be positive")
    f = rule.schedule
    claims = p.claims
    lo, hi = rule.bracket(claims)
    if not lo < hi:
        raise ContractViolation(f"{rule.name}: empty parameter bracket [{lo}, {hi}]")

    def values(lam):
        return [as_rational(f(c, lam)) for c in claims]

    at_lo, at_hi = values(lo), values(hi)
    for c, a, b in zip(claims, at_lo, at_hi):
        if a != 0 or b != c:
            raise ContractViolation(
                f"{rule.name}: boundary values f(c, lower)=0, f(c, upper)=c fail for claim {c}"
            )
    E = p.endowment
    if E == 0:
        return LambdaResult(lo, tuple(at_lo))
    if E == p.total_claims:
        return LambdaResult(hi, tuple(at_hi))

    mid_vals = at_lo
    mid = lo
    for _ in range(MAX_BISECTIONS):
        mid = (lo + hi) / 2
        mid_vals = values(mid)
        if any(not (a <= m <= b) for a, m, b in zip(at_lo, mid_vals, at_hi)):
            raise ContractViolation(f"{rule.name}: schedule is not monotone in lam near {mid}")
        total = sum(mid_vals, Fraction(0))
        if abs(total - E) <= tol:
            break
        if total < E:
            lo, at_lo = mid, mid_vals
        else:
            hi, at_hi = mid, mid_vals
    payoffs = tuple(min(max(v, Fraction(0)), c) for v, c in zip(mid_vals, claims))
    return LambdaResult(mid, payoffs)


# -- axiom checkers ---------------------------------------------------------


@dataclass(frozen=True)
class Verdict:
    holds: bool
    witness: object = None
    detail: str = ""

    def __bool__(self):
        return self.holds


def _allocation_problem(claims, payoffs, endowment, tol) -> tuple[int, str] | None:
    """Index and reason of the first feasibility failure, or None."""
    for k, (c, x) in enumerate(zip(claims, payoffs)):
        if x < -tol or x > c + tol:
            return k, f"payoff {x} outside [0, {c}]"
    if abs(sum(payoffs, Fraction(0)) - endowment) > tol:
        return -1, f"payoffs sum to {sum(payoffs)} not {endowment}"
    return None


def check_resource_monotonicity(rule, claims, endowment, larger_endowment, strict=False) -> Verdict:
    """Compare ``rule(c, E)`` with ``rule(c, E')`` for ``E < E'``.

    The witness is a 1-based agent index. With ``strict`` every agent must gain.
    """
    rule = get_rule(rule) if isinstance(rule, str) else rule
    claims = tuple(as_rational(c) for c in claims)
    E, E2 = as_rational(endowment), as_rational(larger_endowment)
    if not E < E2 <= sum(claims):
        raise ClaimsError("need E < E' <= sum of claims")
    before, after = rule(claims, E), rule(claims, E2)
    for k, (x, y) in enumerate(zip(before, after), start=1):
        if y < x:
            return Verdict(False, k, f"agent {k}: {x} -> {y}")
        if strict and y == x:
            return Verdict(False, k, f"agent {k}: {x} -> {y} (no strict gain)")
    return Verdict(True)


def check_consistency(rule, claims, endowment, subset: Iterable[int], tol=0) -> Verdict:
    """Check ``x_S == rule(c_S, sum(x_S))`` for a nonempty proper subset ``S``.

    ``subset`` holds 1-based agent indices. An allocation that is itself
    infeasible (a payoff above its claim, say) is reported as a violation at the
    offending agent, since the reduced problem is then not a claims problem.
    """
    rule = get_rule(rule) if isinstance(rule, str) else rule
    claims = tuple(as_rational(c) for c in claims)
    E = as_rational(endowment)
    tol = as_rational(tol)
    S = sorted(set(subset))
    n = len(claims)
    if not S or len(S) >= n or S[0] < 1 or S[-1] > n:
        raise ClaimsError("subset must be a nonempty proper subset of 1..n")
    x = rule(claims, E)
    bad = _allocation_problem(claims, x, E, tol)
    if bad is not None:
        k, why = bad
        return Verdict(False, k + 1 if k >= 0 else None, why)
    reduced_claims = tuple(claims[i - 1] for i in S)
    restricted = tuple(x[i - 1] for i in S)
    if sum(restricted) > sum(reduced_claims):
        return Verdict(False, S, "restricted payoffs exceed restricted claims")
    again = rule(reduced_claims, sum(restricted, Fraction(0)))
    for i, a, b in zip(S, restricted, again):
        if abs(a - b) > tol:
            return Verdict(False, i, f"agent {i}: {a} in full problem, {b} in reduced problem")
    return Verdict(True)

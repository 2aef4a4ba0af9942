"""Single-peaked problems: excess demand and excess supply.

Peaks play the role of claims but the endowment may exceed their sum. The
uniform rule equalizes payoffs with peaks as upper bounds under excess demand
and as lower bounds under excess supply; the equal surplus rule hands each
agent its peak plus an equal share of the surplus.

Agents compare payoffs by distance to their peak (``preference="distance"``)
or, for the excess-supply claims model, simply prefer more
(``preference="monotonic"``).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping

from .algorithms import AlgorithmTrace
from .config import check_size
from .errors import ClaimsError, RegimeError
from .problems import Coalition, Preference, from_mask, to_mask
from .rules import LambdaResult, Rule, _awards_level, _losses_level, as_rational, register_rule
from .stability import Partition, enumerate_stable_partitions

__all__ = [
    "uniform_rule",
    "equal_surplus_rule",
    "mixed_rule_payoff",
    "UNIFORM",
    "CEL_ES",
    "sp_prefers",
    "SinglePeakedProblem",
    "sp_stability_scan",
    "uniform_algorithm",
    "equal_surplus_algorithm",
    "monotonic_supply_algorithm",
]

VARIANTS = ("uniform", "cel-es")


def _supply_level(peaks, endowment: Fraction) -> Fraction:
    # Solve sum(max(p, lam)) == endowment, lowest peaks absorbed first.
    ordered = sorted(peaks)
    n = len(ordered)
    rest = sum(ordered, Fraction(0))
    for k in range(1, n + 1):
        rest -= ordered[k - 1]
        lam = (endowment - rest) / k
        if k == n or lam <= ordered[k]:
            return lam
    raise AssertionError("unreachable")


def _peaks(peaks) -> tuple[Fraction, ...]:
    out = tuple(as_rational(x) for x in peaks)
    if not out:
        raise ClaimsError("empty peaks vector")
    if any(x < 0 for x in out):
        raise ClaimsError("peaks must be nonnegative")
    return out


def _uniform(peaks, endowment) -> LambdaResult:
    peaks, E = _peaks(peaks), as_rational(endowment)
    if E < 0:
        raise ClaimsError("endowment must be nonnegative")
    total = sum(peaks, Fraction(0))
    if E == total:
        return LambdaResult(max(peaks), peaks)
    if E < total:
        lam = _awards_level(peaks, E)
        return LambdaResult(lam, tuple(min(x, lam) for x in peaks))
    lam = _supply_level(peaks, E)
    return LambdaResult(lam, tuple(max(x, lam) for x in peaks))


def _equal_surplus(peaks, endowment) -> LambdaResult:
    peaks, E = _peaks(peaks), as_rational(endowment)
    total = sum(peaks, Fraction(0))
    if total > E:
        raise RegimeError(f"equal surplus needs excess supply: peaks sum to {total} > {E}")
    share = (E - total) / len(peaks)
    return LambdaResult(share, tuple(x + share for x in peaks))


def _cel_es(peaks, endowment) -> LambdaResult:
    peaks, E = _peaks(peaks), as_rational(endowment)
    if E < 0:
        raise ClaimsError("endowment must be nonnegative")
    if E >= sum(peaks, Fraction(0)):
        return _equal_surplus(peaks, E)
    lam = _losses_level(peaks, E)
    return LambdaResult(lam, tuple(max(Fraction(0), x - lam) for x in peaks))


def uniform_rule(peaks, endowment) -> tuple[Fraction, ...]:
    """``min(p_i, lam)`` under excess demand, ``max(p_i, lam)`` under excess supply."""
    return _uniform(peaks, endowment).payoffs


def equal_surplus_rule(peaks, endowment) -> tuple[Fraction, ...]:
    return _equal_surplus(peaks, endowment).payoffs


UNIFORM = register_rule(Rule("uniform", _uniform, validate=False))
CEL_ES = register_rule(Rule("cel-es", _cel_es, validate=False))


def _variant_rule(variant) -> Rule:
    if isinstance(variant, Rule):
        return variant
    key = {"equal-surplus": "cel-es", "es": "cel-es"}.get(variant, variant)
    if key == "uniform":
        return UNIFORM
    if key == "cel-es":
        return CEL_ES
    raise ClaimsError(f"unknown single-peaked variant {variant!r}; use one of {VARIANTS}")


def mixed_rule_payoff(variant: str, peaks, endowment) -> tuple[Fraction, ...]:
    """Payoffs in either regime: ``uniform`` throughout, or CEL then equal surplus."""
    return _variant_rule(variant)(peaks, endowment)


def sp_prefers(x, y, peak) -> Preference:
    """Compare payoffs ``x`` and ``y`` for an agent with symmetric preferences around ``peak``.

    ``S_BETTER`` means ``x`` is strictly closer to the peak.
    """
    dx = abs(as_rational(x) - as_rational(peak))
    dy = abs(as_rational(y) - as_rational(peak))
    if dx < dy:
        return Preference.S_BETTER
    if dx > dy:
        return Preference.T_BETTER
    return Preference.EQUAL


@dataclass(frozen=True)
class SinglePeakedProblem:
    """Peaks plus an endowment for every coalition.

    Build with :meth:`explicit` for an arbitrary endowment table (n <= 16) or
    :meth:`proportional` for ``E_S = alpha * sum(peaks_S)`` on coalitions of at
    least ``theta`` members. ``alpha`` may exceed 1.
    """

    peaks: tuple[Fraction, ...]
    endowments: Mapping[int, Fraction] | None = None
    alpha: Fraction | None = None
    theta: int = 1
    preference: str = "distance"
    _memo: dict = field(default_factory=dict, init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "peaks", _peaks(self.peaks))
        if self.preference not in ("distance", "monotonic"):
            raise ClaimsError(f"preference must be 'distance' or 'monotonic', got {self.preference!r}")
        if int(self.theta) != self.theta or self.theta < 1:
            raise ClaimsError("theta must be a positive integer")
        if (self.endowments is None) == (self.alpha is None):
            raise ClaimsError("give either an explicit endowment table or alpha")
        if self.endowments is not None:
            check_size(self.n, "explicit_table")
            table = {int(m): as_rational(v) for m, v in self.endowments.items()}
            full = (1 << self.n) - 1
            missing = [from_mask(m) for m in range(1, full + 1) if m not in table]
            if missing:
                raise ClaimsError(f"endowment table misses coalitions, e.g. {missing[0]}")
            if any(m < 1 or m > full for m in table):
                raise ClaimsError("endowment table has a coalition outside the agent set")
            if any(v < 0 for v in table.values()):
                raise ClaimsError("endowments must be nonnegative")
            object.__setattr__(self, "endowments", table)
        else:
            a = as_rational(self.alpha)
            if a <= 0:
                raise ClaimsError("alpha must be positive")
            if self.n < self.theta:
                raise ClaimsError(f"need at least theta={self.theta} agents, got {self.n}")
            object.__setattr__(self, "alpha", a)

    @classmethod
    def explicit(cls, peaks, table, preference: str = "distance") -> "SinglePeakedProblem":
        """``table`` maps coalitions (member iterables or masks) to endowments."""
        masks = {(k if isinstance(k, int) else to_mask(k)): v for k, v in dict(table).items()}
        return cls(tuple(peaks), endowments=masks, preference=preference)

    @classmethod
    def proportional(cls, peaks, alpha=None, endowment=None, theta: int = 1,
                     preference: str = "distance") -> "SinglePeakedProblem":
        if (alpha is None) == (endowment is None):
            raise ClaimsError("give exactly one of alpha and endowment")
        peaks = _peaks(peaks)
        if alpha is None:
            total = sum(peaks, Fraction(0))
            if total == 0:
                raise ClaimsError("alpha is undefined when all peaks are zero")
            alpha = as_rational(endowment) / total
        return cls(peaks, alpha=alpha, theta=theta, preference=preference)

    @property
    def n(self) -> int:
        return len(self.peaks)

    @property
    def agents(self) -> tuple[int, ...]:
        return tuple(range(1, self.n + 1))

    @property
    def claims(self) -> tuple[Fraction, ...]:
        return self.peaks

    def claim(self, i: int) -> Fraction:
        return self.peaks[i - 1]

    def endowment_of(self, mask: int) -> Fraction:
        if self.endowments is not None:
            return self.endowments[mask]
        if bin(mask).count("1") < self.theta:
            return Fraction(0)
        return self.alpha * sum((self.peaks[i - 1] for i in from_mask(mask)), Fraction(0))

    def payoffs(self, rule, mask: int) -> dict[int, Fraction]:
        rule = _variant_rule(rule) if isinstance(rule, str) else rule
        key = ("pay", rule, mask)
        hit = self._memo.get(key)
        if hit is None:
            members = from_mask(mask)
            if not members or members[-1] > self.n:
                raise ClaimsError(f"coalition {members} is not a nonempty subset of 1..{self.n}")
            x = rule(tuple(self.peaks[i - 1] for i in members), self.endowment_of(mask))
            hit = dict(zip(members, x))
            self._memo[key] = hit
        return hit

    def utilities(self, rule, mask: int) -> dict[int, Fraction]:
        """Larger is better: the payoff itself, or minus the distance to the peak."""
        pay = self.payoffs(rule, mask)
        if self.preference == "monotonic":
            return pay
        key = ("util", rule, mask)
        hit = self._memo.get(key)
        if hit is None:
            hit = {i: -abs(x - self.peaks[i - 1]) for i, x in pay.items()}
            self._memo[key] = hit
        return hit


def sp_stability_scan(problem: SinglePeakedProblem, variant="uniform", max_n: int | None = None) -> list[Partition]:
    """Every stable partition of the coalition formation problem the variant induces."""
    check_size(problem.n, "sp_scan", max_n)
    return enumerate_stable_partitions(problem, _variant_rule(variant), max_n=max_n)


def _supply_blocks(problem: SinglePeakedProblem, name: str, order) -> tuple[Partition, AlgorithmTrace]:
    if problem.alpha is None:
        raise RegimeError("the supply algorithms need a proportional problem, not an explicit table")
    if problem.alpha <= 1:
        raise RegimeError(
            f"alpha = {problem.alpha} is not excess supply; use the claims algorithms for alpha <= 1"
        )
    theta = problem.theta
    trace = AlgorithmTrace(name)
    blocks = []
    residual = list(order)
    k = 1
    while len(residual) > theta:
        S = tuple(sorted(residual[:theta]))
        trace.add(str(k), "block", tuple(residual), S)
        blocks.append(S)
        residual = residual[theta:]
        k += 1
    rest = tuple(sorted(residual))
    trace.add(str(k), "remainder", rest, rest)
    blocks.append(rest)
    return tuple(blocks), trace


def uniform_algorithm(problem: SinglePeakedProblem) -> tuple[Partition, AlgorithmTrace]:
    """Group the ``theta`` lowest peaks, then the next ``theta``, and so on."""
    order = sorted(problem.agents, key=lambda i: (problem.claim(i), i))
    return _supply_blocks(problem, "uniform", order)


def equal_surplus_algorithm(problem: SinglePeakedProblem) -> tuple[Partition, AlgorithmTrace]:
    # same schedule as the uniform algorithm; only the rule used to check it differs
    order = sorted(problem.agents, key=lambda i: (problem.claim(i), i))
    return _supply_blocks(problem, "equal-surplus", order)


def monotonic_supply_algorithm(claims, endowment=None, theta: int = 1, *, alpha=None) -> tuple[Partition, AlgorithmTrace]:
    """Excess supply with monotonic preferences: group the highest claims first.

    Ties in claims are broken by smaller id first.
    """
    problem = monotonic_supply_problem(claims, endowment, theta, alpha=alpha)
    order = sorted(problem.agents, key=lambda i: (-problem.claim(i), i))
    return _supply_blocks(problem, "monotonic-supply", order)


def monotonic_supply_problem(claims, endowment=None, theta: int = 1, *, alpha=None) -> SinglePeakedProblem:
    claims = _peaks(claims)
    if any(c == 0 for c in claims):
        raise ClaimsError("claims must be strictly positive")
    return SinglePeakedProblem.proportional(claims, alpha=alpha, endowment=endowment,
                                            theta=theta, preference="monotonic")


__all__.append("monotonic_supply_problem")

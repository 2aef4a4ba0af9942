"""Constructive stable-partition algorithms.

Agents are always relabeled by ascending ``(claim, id)``; "lowest" and
"highest" below refer to that order. A case condition that holds with
equality takes Case (i). Every algorithm returns the partition in formation
order together with an :class:`AlgorithmTrace` that records each decision.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from fractions import Fraction

from .config import check_size
from .errors import ClaimsError, ContractViolation
from .problems import Coalition, ThetaProblem, from_mask, to_mask
from .rules import _awards_level, get_rule
from .stability import Partition, is_top_coalition, top_coalitions

__all__ = [
    "TraceStep",
    "AlgorithmTrace",
    "Thresholds",
    "sorted_agents",
    "thresholds",
    "cea_algorithm",
    "theta_cea_set",
    "theta_cea_algorithm",
    "theta_cel_algorithm",
    "top_coalition_constructor",
    "classify_assortativity",
    "regime_flags",
    "POSITIVE",
    "NEGATIVE",
    "MIXED",
]

POSITIVE = "positive"
NEGATIVE = "negative"
MIXED = "mixed"


@dataclass
class TraceStep:
    index: str
    kind: str  # "block", "grow", "top", "reduce" or "remainder"
    working: tuple[int, ...]
    coalition: tuple[int, ...]
    case: str | None = None
    values: dict[str, Fraction] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "step": self.index,
            "kind": self.kind,
            "working": list(self.working),
            "coalition": list(self.coalition),
            "case": self.case,
            "values": {k: str(v) for k, v in self.values.items()},
        }


@dataclass
class AlgorithmTrace:
    algorithm: str
    steps: list[TraceStep] = field(default_factory=list)

    def add(self, *args, **kwargs) -> TraceStep:
        step = TraceStep(*args, **kwargs)
        self.steps.append(step)
        return step

    def cases(self) -> list[str]:
        return [s.case for s in self.steps if s.kind == "block" and s.case]

    def values(self, name: str) -> list[Fraction]:
        return [s.values[name] for s in self.steps if name in s.values]

    def block_step(self, block) -> TraceStep | None:
        target = tuple(sorted(block))
        for s in self.steps:
            if s.kind in ("block", "remainder") and tuple(sorted(s.coalition)) == target:
                return s
        return None

    def to_list(self) -> list[dict]:
        return [s.to_dict() for s in self.steps]


def sorted_agents(p: ThetaProblem, agents=None) -> list[int]:
    """Agents ordered by ascending claim, ties by ascending id."""
    pool = p.agents if agents is None else agents
    return sorted(pool, key=lambda i: (p.claim(i), i))


@dataclass(frozen=True)
class Thresholds:
    beta: Fraction
    delta: Fraction
    gamma: Fraction


def thresholds(p: ThetaProblem, working=None) -> Thresholds:
    """Pair-formation thresholds on the relabeled working set.

    With ``c_1`` the lowest and ``c_{n-1} <= c_n`` the two highest claims:
    ``beta = 2c_1/(c_1+c_n)``, ``delta = 2c_1/(2c_1-c_{n-1}+c_n)``,
    ``gamma = 2c_{n-1}/(c_{n-1}+c_n)``, and always ``beta <= delta <= gamma``.
    """
    order = sorted_agents(p, working)
    if len(order) < 2:
        raise ClaimsError("thresholds need at least two agents")
    c1, cm, cn = p.claim(order[0]), p.claim(order[-2]), p.claim(order[-1])
    out = Thresholds(2 * c1 / (c1 + cn), 2 * c1 / (2 * c1 - cm + cn), 2 * cm / (cm + cn))
    assert out.beta <= out.delta <= out.gamma, out
    return out


def _grand(p: ThetaProblem, name: str) -> tuple[Partition, AlgorithmTrace]:
    trace = AlgorithmTrace(name)
    trace.add("1", "remainder", p.agents, p.agents)
    return (p.agents,), trace


def cea_algorithm(p: ThetaProblem) -> tuple[Partition, AlgorithmTrace]:
    """Pair off agents for theta = 2 under CEA.

    Each step looks at the residual set: if ``alpha <= delta`` the two highest
    claimants pair up (Case i), otherwise the lowest pairs with the highest
    (Case ii). At most two agents are left over as the last block.
    """
    if p.theta != 2:
        raise ClaimsError(f"the CEA pairing algorithm needs theta = 2, got {p.theta}")
    if p.n <= 2:
        return _grand(p, "cea")
    trace = AlgorithmTrace("cea")
    working = sorted_agents(p)
    blocks = []
    k = 1
    while len(working) > 2:
        th = thresholds(p, working)
        if p.alpha <= th.delta:
            case, pair = "i", (working[-2], working[-1])
        else:
            case, pair = "ii", (working[0], working[-1])
        trace.add(str(k), "block", tuple(working), tuple(sorted(pair)), case,
                  {"alpha": p.alpha, "beta": th.beta, "delta": th.delta, "gamma": th.gamma})
        blocks.append(tuple(sorted(pair)))
        working = [a for a in working if a not in pair]
        k += 1
    rest = tuple(sorted(working))
    trace.add(str(k), "remainder", rest, rest)
    blocks.append(rest)
    return tuple(blocks), trace


def _cea_level(p: ThetaProblem, members) -> Fraction:
    # CEA parameter for the coalition at its proportional endowment alpha * c^S
    claims = [p.claim(i) for i in members]
    return _awards_level(claims, p.alpha * sum(claims, Fraction(0)))


def theta_cea_set(p: ThetaProblem, ground=None, trace: AlgorithmTrace | None = None,
                  prefix: str = "1") -> tuple[Coalition, AlgorithmTrace]:
    """Grow one theta-size coalition inside ``ground``.

    Start from the top pair or the lowest-highest pair, then add one agent per
    step: the highest remaining agent ``j`` when the CEA level of ``S + j`` is at
    most ``(1 - alpha) c_i + alpha c_j`` (``i`` the lowest remaining agent), and
    ``i`` otherwise.
    """
    order = sorted_agents(p, ground)
    theta = p.theta
    if len(order) <= theta:
        raise ClaimsError(f"the set algorithm needs more than theta={theta} agents, got {len(order)}")
    if theta < 2:
        raise ClaimsError("the set algorithm needs theta >= 2")
    if trace is None:
        trace = AlgorithmTrace("theta-cea-set")
    a = p.alpha

    low, second, high = order[0], order[-2], order[-1]
    lam = _cea_level(p, (second, high))
    bound = (1 - a) * p.claim(low) + a * p.claim(second)
    th = thresholds(p, order)
    if lam <= bound:
        case, S = "i", [second, high]
    else:
        case, S = "ii", [low, high]
    values = {"lambda": lam, "bound": bound, "alpha": a,
              "beta": th.beta, "delta": th.delta, "gamma": th.gamma}
    kind = "block" if theta == 2 else "grow"
    trace.add(f"{prefix}.1", kind, tuple(order), tuple(sorted(S)), case, values)

    for k in range(2, theta):
        rest = [x for x in order if x not in S]
        i, j = rest[0], rest[-1]
        lam = _cea_level(p, S + [j])
        bound = (1 - a) * p.claim(i) + a * p.claim(j)
        if lam <= bound:
            case, S = "i", S + [j]
        else:
            case, S = "ii", S + [i]
        kind = "block" if k == theta - 1 else "grow"
        trace.add(f"{prefix}.{k}", kind, tuple(order), tuple(sorted(S)), case,
                  {"lambda": lam, "bound": bound, "alpha": a, "lowest": Fraction(i), "highest": Fraction(j)})
    return tuple(sorted(S)), trace


def theta_cea_algorithm(p: ThetaProblem) -> tuple[Partition, AlgorithmTrace]:
    """Repeat the theta-CEA set algorithm on the shrinking residual set."""
    if p.n <= p.theta:
        return _grand(p, "theta-cea")
    if p.theta == 1:
        # every agent is funded alone at alpha * c_i; singletons are stable
        trace = AlgorithmTrace("theta-cea")
        for i in p.agents:
            trace.add(str(i), "block", p.agents, (i,))
        return tuple((i,) for i in p.agents), trace
    trace = AlgorithmTrace("theta-cea")
    residual = sorted_agents(p)
    blocks = []
    k = 1
    while len(residual) > p.theta:
        S, _ = theta_cea_set(p, residual, trace, prefix=str(k))
        blocks.append(S)
        residual = [x for x in residual if x not in S]
        k += 1
    rest = tuple(sorted(residual))
    trace.add(str(k), "remainder", rest, rest)
    blocks.append(rest)
    return tuple(blocks), trace


def theta_cel_algorithm(p: ThetaProblem) -> tuple[Partition, AlgorithmTrace]:
    """Group the theta lowest claimants, then the next theta, and so on."""
    if p.n <= p.theta:
        return _grand(p, "theta-cel")
    trace = AlgorithmTrace("theta-cel")
    residual = sorted_agents(p)
    blocks = []
    k = 1
    while len(residual) > p.theta:
        S = tuple(sorted(residual[: p.theta]))
        trace.add(str(k), "block", tuple(residual), S)
        blocks.append(S)
        residual = residual[p.theta:]
        k += 1
    rest = tuple(sorted(residual))
    trace.add(str(k), "remainder", rest, rest)
    blocks.append(rest)
    return tuple(blocks), trace


def top_coalition_constructor(p: ThetaProblem, rule, max_n: int | None = None) -> tuple[Partition, AlgorithmTrace]:
    """Peel off theta-size top coalitions of the residual set.

    At each step the first top coalition with at least ``theta`` members (in
    ascending bitmask order) is shrunk to size ``theta`` by dropping
    over-proportional members, largest surplus ``payoff - alpha * c_i`` first,
    ties to the smaller id. When everyone is paid proportionally the largest id
    is dropped. Valid for resource monotonic and consistent rules; a rule that
    breaks this raises :class:`ContractViolation`.
    """
    check_size(p.n, "top_coalition", max_n)
    rule = get_rule(rule) if isinstance(rule, str) else rule
    if p.n <= p.theta:
        return _grand(p, "top-coalition")
    trace = AlgorithmTrace("top-coalition")
    residual = to_mask(p.agents)
    blocks = []
    k = 1
    while bin(residual).count("1") > p.theta:
        working = from_mask(residual)
        tops = top_coalitions(p, rule, residual, min_size=p.theta, max_n=max_n)
        if not tops:
            raise ContractViolation(
                f"no top coalition with at least {p.theta} members in {working}; "
                f"{rule.name} is not resource monotonic and consistent here"
            )
        S = list(tops[0])
        trace.add(f"{k}.0", "top", working, tuple(S))
        while len(S) > p.theta:
            pay = p.payoffs(rule, to_mask(S))
            surplus = {i: pay[i] - p.alpha * p.claim(i) for i in S}
            over = [i for i in S if surplus[i] > 0]
            if over:
                drop = min(over, key=lambda i: (-surplus[i], i))
            else:
                drop = max(S)
            S.remove(drop)
            trace.add(f"{k}.{len(trace.steps)}", "reduce", working, tuple(S), None,
                      {"dropped": Fraction(drop), "surplus": surplus[drop]})
        if not is_top_coalition(p, rule, to_mask(S), residual, max_n=max_n):
            raise ContractViolation(f"reduced coalition {tuple(S)} is not a top coalition of {working}")
        S = tuple(sorted(S))
        trace.add(str(k), "block", working, S)
        blocks.append(S)
        residual &= ~to_mask(S)
        k += 1
    rest = from_mask(residual)
    trace.add(str(k), "remainder", rest, rest)
    blocks.append(rest)
    return tuple(blocks), trace


def classify_assortativity(p: ThetaProblem, partition, trace: AlgorithmTrace | None = None) -> list[str]:
    """Label each block positive, negative or mixed.

    A block is positively assortative when its members are consecutive in the
    ``(claim, id)`` order of all agents. A pair that was formed from the lowest
    and highest agents of its residual set is negatively assortative; that needs
    the trace, and without one such pairs fall back to "mixed" with a warning.
    """
    position = {a: k for k, a in enumerate(sorted_agents(p))}
    labels = []
    downgraded = False
    for block in partition:
        pos = sorted(position[i] for i in block)
        if pos[-1] - pos[0] == len(pos) - 1:
            labels.append(POSITIVE)
            continue
        if len(block) == 2:
            if trace is None:
                downgraded = True
            else:
                step = trace.block_step(block)
                if step is not None and step.kind == "block":
                    ends = sorted_agents(p, step.working)
                    if set(block) == {ends[0], ends[-1]}:
                        labels.append(NEGATIVE)
                        continue
        labels.append(MIXED)
    if downgraded:
        warnings.warn("no trace given: negatively assortative pairs are reported as mixed", stacklevel=2)
    return labels


def regime_flags(p: ThetaProblem, partition, trace: AlgorithmTrace) -> dict[str, bool]:
    """Whether every block formed by a case decision is positive (resp. negative)."""
    labels = classify_assortativity(p, partition, trace)
    formed = [lab for block, lab in zip(partition, labels)
              if (s := trace.block_step(block)) is not None and s.kind == "block"]
    return {
        "all_positive": bool(formed) and all(lab == POSITIVE for lab in formed),
        "all_negative": bool(formed) and all(lab == NEGATIVE for lab in formed),
    }

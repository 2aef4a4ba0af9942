"""
When the greedy theta-CEA choice is not stable
==============================================

For blocks of three the equal-awards algorithm compares one candidate pair
against a bound and grows it greedily. The instance below was found by a
random search: the output is blocked by a coalition that the greedy step
never looked at. The top-coalition constructor does find a stable partition.
"""
from fractions import Fraction

from claimstable import ThetaProblem
from claimstable.algorithms import theta_cea_algorithm, top_coalition_constructor
from claimstable.problems import coalition_payoff
from claimstable.stability import enumerate_stable_partitions, find_blocking

p = ThetaProblem.from_alpha((22, 48, 18, 3, 20), Fraction(1, 5), 3)

part, trace = theta_cea_algorithm(p)
for step in trace.steps:
    print(step.kind, step.coalition, step.case, {k: str(v) for k, v in step.values.items()})
print("theta-cea output:", part)

blocker = find_blocking(p, "cea", part)
print("blocked by", blocker)


def show(S):
    return ", ".join(f"{i}: {x}" for i, x in zip(S, coalition_payoff(p, "cea", S)))


print("  payoffs there:", show(blocker))
print("  current payoffs:", " | ".join(show(b) for b in part))

good, _ = top_coalition_constructor(p, "cea")
print("top-coalition output:", good, "blocked by", find_blocking(p, "cea", good))
print("all stable partitions:", enumerate_stable_partitions(p, "cea"))

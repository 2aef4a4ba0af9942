"""
Three agents, two rules
=======================

Claims 2, 6 and 22 with half of every pair's claim on the table. Singletons
get nothing, so everybody wants a partner, but the rule decides who ends up
with whom.
"""
from claimstable import ThetaProblem, enumerate_stable_partitions
from claimstable.problems import coalition_payoff, coalitional_endowment, preference_order

p = ThetaProblem((2, 6, 22), 15, theta=2)

for rule in ("cea", "cel"):
    print(f"-- {rule} --")
    for S in ((1, 2), (1, 3), (2, 3), (1, 2, 3)):
        print(f"  {S}: endowment {coalitional_endowment(p, S)}, "
              f"payoffs {tuple(str(x) for x in coalition_payoff(p, rule, S))}")

# Under equal awards the big claimant does best next to the small one,
# because the small claim is paid in full and the rest flows upward.
print("agent 3 ranks under cea:", preference_order(p, "cea", 3))

for rule in ("cea", "cel"):
    stable = enumerate_stable_partitions(p, rule)
    print(f"{rule}: {len(stable)} stable partitions")
    for s in stable:
        print("   ", s)

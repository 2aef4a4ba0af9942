"""
Single-peaked agents
====================

Here the claim is a peak: an agent wants exactly that much and is unhappy
with more or less. Two small examples have no stable partition at all. In
the supply regime the pairing algorithms resist every deviation by theta or
more agents, but an agent standing alone (endowment zero) may still be
closer to a small peak than to an oversized share.
"""
from claimstable import SinglePeakedProblem
from claimstable.singlepeaked import (
    monotonic_supply_algorithm,
    sp_stability_scan,
    uniform_algorithm,
)
from claimstable.stability import find_blocking

uniform_table = {(1,): 0, (2,): 0, (3,): 0, (1, 2): 7, (1, 3): 6, (2, 3): 11, (1, 2, 3): 21}
p = SinglePeakedProblem.explicit((2, 4, 5), uniform_table)
print("uniform example, stable partitions:", sp_stability_scan(p, "uniform"))

es_table = {(1,): 7, (2,): 0, (3,): 0, (1, 2): 15, (1, 3): 10, (2, 3): 13, (1, 2, 3): 54}
q = SinglePeakedProblem.explicit((2, 7, 18), es_table)
print("surplus example, stable partitions:", sp_stability_scan(q, "cel-es"))

supply = SinglePeakedProblem.proportional((1, 1, 1), alpha=3, theta=2)
part, _ = uniform_algorithm(supply)
print("uniform algorithm on peaks (1, 1, 1), alpha 3:", part)
print("  any blocker:", find_blocking(supply, "uniform", part))
print("  blocker with at least 2 members:", find_blocking(supply, "uniform", part, min_size=2))

# When more is always better the picture is simpler.
part, trace = monotonic_supply_algorithm((1, 2, 3, 4, 5), alpha=2, theta=2)
print("monotonic supply:", part)

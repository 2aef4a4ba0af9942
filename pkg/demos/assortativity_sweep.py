"""
Who pairs with whom as alpha grows
==================================

Five agents, pairs only. With a small endowment fraction the equal-awards
algorithm pairs neighbours in the claim ranking; once alpha is large it
pairs the smallest claimant with the largest.
"""
from fractions import Fraction

from claimstable import ThetaProblem
from claimstable.algorithms import cea_algorithm, classify_assortativity, regime_flags, thresholds

claims = (2, 6, 22, 30, 34)

th = thresholds(ThetaProblem.from_alpha(claims, Fraction(1, 2), 2))
print(f"first-step thresholds: beta={th.beta} delta={th.delta} gamma={th.gamma}")

for k in range(1, 11):
    alpha = Fraction(k, 10)
    p = ThetaProblem.from_alpha(claims, alpha, 2)
    part, trace = cea_algorithm(p)
    labels = classify_assortativity(p, part, trace)
    flags = regime_flags(p, part, trace)
    tag = "all positive" if flags["all_positive"] else "all negative" if flags["all_negative"] else "mixed"
    print(f"alpha={str(alpha):5} cases={'/'.join(trace.cases()):6} {part}  {labels}  {tag}")

# alpha = 3/5 sits exactly on the second threshold; ties go to the
# top-pair case, so that row still contains the neighbour pair {3, 4}.

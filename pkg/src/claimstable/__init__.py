"""Stable coalition structures for rationing problems with exact arithmetic."""
from .algorithms import (
    AlgorithmTrace,
    cea_algorithm,
    classify_assortativity,
    theta_cea_algorithm,
    theta_cea_set,
    theta_cel_algorithm,
    thresholds,
    top_coalition_constructor,
)
from .errors import ClaimsError, ContractViolation, PreconditionError, RegimeError, SizeGuardError
from .problems import (
    ThetaProblem,
    coalition_payoff,
    coalitional_endowment,
    preference_order,
    prefers,
)
from .rules import (
    CEA,
    CEA_SCHEDULE,
    CEL,
    CEL_SCHEDULE,
    PROPORTIONAL,
    PROPORTIONAL_SCHEDULE,
    ClaimsProblem,
    ParametricRule,
    Rule,
    cea,
    cel,
    check_consistency,
    check_resource_monotonicity,
    get_rule,
    parametric_solve,
    proportional,
)
from .singlepeaked import (
    CEL_ES,
    UNIFORM,
    SinglePeakedProblem,
    equal_surplus_algorithm,
    equal_surplus_rule,
    mixed_rule_payoff,
    monotonic_supply_algorithm,
    sp_prefers,
    sp_stability_scan,
    uniform_algorithm,
    uniform_rule,
)
from .stability import (
    check_weak_pairwise_alignment,
    enumerate_stable_partitions,
    find_blocking,
    find_cycle,
    is_top_coalition,
    stability_report,
    verify_strict_rm_structure,
)

__version__ = "0.1.0"

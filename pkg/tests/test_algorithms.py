from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracle
from claimstable import ClaimsProblem, algorithms
from claimstable.algorithms import (
    MIXED,
    NEGATIVE,
    POSITIVE,
    cea_algorithm,
    classify_assortativity,
    regime_flags,
    theta_cea_algorithm,
    theta_cea_set,
    theta_cel_algorithm,
    thresholds,
    top_coalition_constructor,
)
from claimstable.errors import ClaimsError, ContractViolation
from claimstable.problems import ThetaProblem
from claimstable.rules import CEA, LambdaResult, Rule, cea
from claimstable.stability import canonical_partition, find_blocking

F = Fraction
C5 = (2, 6, 22, 30, 34)
C7 = (2, 6, 22, 30, 34, 38, 46)

claims_st = st.lists(st.integers(1, 50), min_size=3, max_size=8)
alpha_st = st.integers(1, 99).map(lambda k: F(k, 100))


def test_cea_algorithm_examples():
    part, trace = cea_algorithm(ThetaProblem(C5, 47, 2))
    assert part == ((4, 5), (1, 3), (2,))
    assert trace.values("delta") == [F(1, 2), F(1, 5)]
    assert trace.cases() == ["i", "ii"]
    part, trace = cea_algorithm(ThetaProblem(C5, F(47, 5), 2))
    assert part == ((4, 5), (2, 3), (1,))
    assert trace.cases() == ["i", "i"]


def test_theta_cea_example():
    part, trace = theta_cea_algorithm(ThetaProblem(C7, 89, 3))
    assert part == ((1, 6, 7), (2, 4, 5), (3,))
    assert trace.values("lambda") == [21, F(41, 2), 16, F(43, 3)]
    assert trace.values("bound") == [20, 22, 18, 14]
    assert [s.case for s in trace.steps if s.case] == ["ii", "i", "i", "ii"]


def test_theta_cel_example():
    part, _ = theta_cel_algorithm(ThetaProblem(C5, 47, 2))
    assert part == ((1, 2), (3, 4), (5,))
    part, _ = theta_cel_algorithm(ThetaProblem(C7, 89, 3))
    assert part == ((1, 2, 3), (4, 5, 6), (7,))


def test_grand_coalition_when_n_equals_theta():
    p = ThetaProblem((3, 1, 2), 3, 3)
    for algo in (theta_cea_algorithm, theta_cel_algorithm):
        assert algo(p)[0] == ((1, 2, 3),)
    assert cea_algorithm(ThetaProblem((1, 2), 1, 2))[0] == ((1, 2),)


def test_cea_algorithm_needs_theta_two():
    with pytest.raises(ClaimsError):
        cea_algorithm(ThetaProblem(C5, 47, 3))


def test_set_algorithm_needs_room():
    with pytest.raises(ClaimsError):
        theta_cea_set(ThetaProblem((1, 2, 3), 3, 3))


def test_ties_relabel_by_id():
    part, _ = theta_cel_algorithm(ThetaProblem((5, 5, 5, 5, 5), 10, 2))
    assert part == ((1, 2), (3, 4), (5,))


def test_sub_theta_candidates_use_proportional_endowment():
    # the first candidate pair is smaller than theta but is still priced at alpha * c^S
    _, trace = theta_cea_algorithm(ThetaProblem(C7, 89, 3))
    assert trace.steps[0].values["lambda"] == cea(ClaimsProblem((38, 46), 42)).lam


@settings(max_examples=300)
@given(claims_st)
def test_threshold_chain(claims):
    p = ThetaProblem.from_alpha(claims, F(1, 2), 2)
    th = thresholds(p)
    assert th.beta <= th.delta <= th.gamma


@settings(max_examples=80, deadline=None)
@given(claims_st, alpha_st)
def test_cea_algorithm_agrees_with_theta_two_set_algorithm(claims, alpha):
    p = ThetaProblem.from_alpha(claims, alpha, 2)
    assert cea_algorithm(p)[0] == theta_cea_algorithm(p)[0]


@settings(max_examples=60, deadline=None)
@given(st.lists(st.integers(1, 50), min_size=3, max_size=7), alpha_st)
def test_cea_algorithm_is_stable(claims, alpha):
    p = ThetaProblem.from_alpha(claims, alpha, 2)
    part, _ = cea_algorithm(p)
    assert oracle.Instance(claims, alpha, 2, "cea").is_stable(part)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.integers(1, 50), min_size=3, max_size=7), alpha_st, st.integers(2, 4))
def test_theta_cel_is_stable(claims, alpha, theta):
    theta = min(theta, len(claims))
    p = ThetaProblem.from_alpha(claims, alpha, theta)
    part, _ = theta_cel_algorithm(p)
    assert oracle.Instance(claims, alpha, theta, "cel").is_stable(part)


def test_theta_cea_counterexample_for_theta_three():
    # the greedy pair {3, 48} is locally best for agent 2 but {18, 22, 48} blocks the result
    claims, alpha = (22, 48, 18, 3, 20), F(1, 5)
    p = ThetaProblem.from_alpha(claims, alpha, 3)
    part, trace = theta_cea_algorithm(p)
    assert canonical_partition(part) == ((1, 2, 4), (3, 5))
    assert trace.cases() == ["i"] and trace.steps[0].case == "ii"
    assert find_blocking(p, "cea", part) == (1, 2, 3)
    assert (1, 2, 3) in oracle.Instance(claims, alpha, 3, "cea").blockers(part)
    # the constructor still finds a stable partition here
    good, _ = top_coalition_constructor(p, "cea")
    assert find_blocking(p, "cea", good) is None


def test_top_coalition_constructor_examples():
    p = ThetaProblem(C5, 47, 2)
    for rule in ("cea", "cel", "proportional"):
        part, trace = top_coalition_constructor(p, rule)
        assert sorted(len(b) for b in part) == [1, 2, 2]
        assert find_blocking(p, rule, part) is None
        assert trace.steps[-1].kind == "remainder"


def test_top_coalition_reduction(monkeypatch):
    # shipped rules always offer a theta-size top coalition first, so force a big one
    monkeypatch.setattr(algorithms, "top_coalitions", lambda p, rule, ground, **kw: [(1, 2, 3)])
    p = ThetaProblem((2, 6, 22), 15, 2)
    # CEA pays (2, 6, 7) against shares (1, 3, 11): agent 2 has the largest surplus
    part, trace = top_coalition_constructor(p, "cea")
    assert part == ((1, 3), (2,))
    assert [s.kind for s in trace.steps] == ["top", "reduce", "block", "remainder"]
    assert trace.steps[1].values["dropped"] == 2
    # proportional pays everyone their share, so the largest id goes
    part, _ = top_coalition_constructor(p, "proportional")
    assert part == ((1, 2), (3,))


def _picky(p):
    if p.n != 2:
        return cea(p)
    a, b = p.claims
    low, high = (0, 1) if a <= b else (1, 0)
    winner = high if max(a, b) >= 3 * min(a, b) else low
    x = [Fraction(0), Fraction(0)]
    x[winner] = min(p.claims[winner], p.endowment)
    x[1 - winner] = p.endowment - x[winner]
    return LambdaResult(None, tuple(x))


def test_constructor_rejects_rules_without_top_coalitions():
    p = ThetaProblem((1, 2, 3), 3, 2)
    with pytest.raises(ContractViolation):
        top_coalition_constructor(p, Rule("picky", _picky))


def test_assortativity_labels():
    p = ThetaProblem(C5, 47, 2)
    part, trace = cea_algorithm(p)
    assert classify_assortativity(p, part, trace) == [POSITIVE, NEGATIVE, POSITIVE]
    with pytest.warns(UserWarning):
        assert classify_assortativity(p, part) == [POSITIVE, MIXED, POSITIVE]
    with pytest.warns(UserWarning):
        assert classify_assortativity(p, ((1, 2, 4), (3, 5))) == [MIXED, MIXED]


def test_regime_flags():
    low = ThetaProblem.from_alpha(C5, F(1, 10), 2)
    part, trace = cea_algorithm(low)
    assert regime_flags(low, part, trace) == {"all_positive": True, "all_negative": False}
    high = ThetaProblem.from_alpha(C5, F(7, 10), 2)
    part, trace = cea_algorithm(high)
    assert regime_flags(high, part, trace) == {"all_positive": False, "all_negative": True}


def test_knife_edge_takes_case_one():
    # at alpha = delta_2 = 3/5 the second pair is the top pair, not the extremes
    p = ThetaProblem.from_alpha(C5, F(3, 5), 2)
    part, trace = cea_algorithm(p)
    assert trace.steps[1].values["delta"] == F(3, 5)
    assert part == ((1, 5), (3, 4), (2,))


def test_trace_serializes():
    _, trace = theta_cea_algorithm(ThetaProblem(C7, 89, 3))
    rows = trace.to_list()
    assert rows[0]["values"]["lambda"] == "21"
    assert rows[-1]["kind"] == "remainder"


def test_cea_rule_object_in_constructor():
    part, _ = top_coalition_constructor(ThetaProblem(C7, 89, 3), CEA)
    assert sorted(len(b) for b in part) == [1, 3, 3]

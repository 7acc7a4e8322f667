"""Rigidity functionals, sufficient conditions, and verdict logic."""

import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qglab.fixtures import fixture_graph
from qglab.graphs import build_graph, scale_graph
from qglab.rigidity import (CASE_GENERAL, CASE_LINE_SIGMA_MIXED,
                            CASE_LINE_SIGMA_NONNEG, CASE_LOOP, INCONCLUSIVE,
                            RIGIDITY_IMPLIED, SPECTRUM_MUST_DIFFER,
                            check_conditions, davies_consistency,
                            functionals, verdict_to_json)
from qglab.testing import random_instance

STAR_LAMBDA0 = -0.373875127781922522


def circle(sigma_u=0.0, sigma_v=0.0, q=0.0):
    return build_graph({
        "vertices": [{"id": "u", "sigma": sigma_u},
                     {"id": "v", "sigma": sigma_v}],
        "edges": [{"id": "top", "from": "u", "to": "v", "length": 1.0,
                   "potential": {"kind": "constant", "value": q}},
                  {"id": "bot", "from": "u", "to": "v", "length": 1.0,
                   "potential": {"kind": "constant", "value": q}}],
    })


def interval(sigma_a=0.0, sigma_b=0.0):
    return build_graph({
        "vertices": [{"id": "a", "sigma": sigma_a},
                     {"id": "b", "sigma": sigma_b}],
        "edges": [{"id": "seg", "from": "a", "to": "b", "length": 1.0}],
    })


# ------------------------------------------------------ functionals

def test_star_functionals():
    phi1, phi2 = functionals(fixture_graph("star3"))
    assert phi1 == pytest.approx(-2.0 / 3.0, abs=1e-12)
    assert phi2 == pytest.approx(-1.0, abs=1e-12)


def test_counterexample_functionals_vanishing_phi1_positive_phi2():
    # int of 2/(1+x)^2 over [0, 1/2] is 2/3; sigma sums cancel phi1 but
    # leave phi2 = 1/3 strictly positive
    phi1, phi2 = functionals(fixture_graph("counterexample"))
    assert phi1 == pytest.approx(0.0, abs=1e-12)
    assert phi2 == pytest.approx(1.0 / 3.0, abs=1e-12)


@pytest.mark.parametrize("tau", [-2.0, -1.0, 0.5, 3.0])
def test_functionals_are_linear_in_coupling_scale(tau):
    for name in ("star3", "counterexample"):
        g = fixture_graph(name)
        phi1, phi2 = functionals(g)
        s1, s2 = functionals(scale_graph(g, tau))
        assert s1 == pytest.approx(tau * phi1, abs=1e-11)
        assert s2 == pytest.approx(tau * phi2, abs=1e-11)


# ------------------------------------------------------ sufficient conditions

@given(st.floats(-3.0, 0.0), st.floats(-3.0, 0.0))
@settings(max_examples=60)
def test_balanced_loop_with_nonpositive_sigma_forces_phi2_down(su, sv):
    # choose the constant potential that cancels phi1 exactly; on a loop
    # (all degrees 2) the remaining functional phi2 must then be <= 0
    q = -(su + sv) / 2.0
    v = check_conditions(circle(su, sv, q))
    assert abs(v.phi1) <= v.tol
    assert v.cond_i and v.cond_iii
    assert v.phi2 <= v.tol
    assert v.conclusion == RIGIDITY_IMPLIED
    assert v.line_loop_case == CASE_LOOP


def test_loop_weighted_sum_vanishes_for_any_sigma():
    # with every degree equal to 2 the weights 1 - 2/deg are all zero
    v = check_conditions(circle(5.0, -3.0))
    assert v.cond_i
    assert v.line_loop_case == CASE_LOOP


def test_line_cases_split_on_sigma_sign():
    assert (check_conditions(interval(0.5, 0.0)).line_loop_case
            == CASE_LINE_SIGMA_NONNEG)
    assert (check_conditions(interval(1.0, -1.0)).line_loop_case
            == CASE_LINE_SIGMA_MIXED)
    assert (check_conditions(fixture_graph("star3")).line_loop_case
            == CASE_GENERAL)


def test_balanced_line_with_mixed_sigma_still_concludes():
    # sigma sums to zero with degree-1 ends: phi1 = 0, weighted sum
    # -(1 + -1) = 0 satisfies cond_i, so rigidity is still implied
    v = check_conditions(interval(1.0, -1.0))
    assert abs(v.phi1) <= v.tol
    assert v.cond_i
    assert v.conclusion == RIGIDITY_IMPLIED


@pytest.mark.parametrize("seed", range(20))
def test_random_instances_yield_consistent_verdicts(seed):
    v = check_conditions(random_instance(seed))
    assert v.conclusion in (RIGIDITY_IMPLIED, SPECTRUM_MUST_DIFFER,
                            INCONCLUSIVE)
    if v.conclusion == SPECTRUM_MUST_DIFFER:
        assert abs(v.phi1) > v.tol
    if v.conclusion == RIGIDITY_IMPLIED:
        assert abs(v.phi1) <= v.tol
        assert (v.cond_i or v.cond_ii or v.cond_iii or v.theorem_hypothesis)
    if v.conclusion == INCONCLUSIVE:
        assert abs(v.phi1) <= v.tol and v.phi2 > v.tol


# ------------------------------------------------------ fixture verdicts

def test_star_concludes_spectrum_must_differ():
    v = check_conditions(fixture_graph("star3"))
    assert v.conclusion == SPECTRUM_MUST_DIFFER


def test_free_interval_concludes_rigidity():
    v = check_conditions(fixture_graph("interval"))
    assert v.cond_ii
    assert v.conclusion == RIGIDITY_IMPLIED


def test_counterexample_is_inconclusive():
    v = check_conditions(fixture_graph("counterexample"))
    assert not (v.cond_i or v.cond_ii or v.cond_iii)
    assert not v.theorem_hypothesis
    assert v.conclusion == INCONCLUSIVE


# ------------------------------------------------------ ground-state check

def test_davies_vacuous_when_ground_state_negative():
    assert davies_consistency(fixture_graph("star3"), STAR_LAMBDA0)


def test_davies_vacuous_when_phi2_positive():
    assert davies_consistency(fixture_graph("counterexample"), 0.0)


def test_davies_holds_for_free_graph():
    assert davies_consistency(fixture_graph("interval"), 0.0)


def test_davies_flags_nontrivial_instance_with_claimed_zero_ground_state():
    # the star has phi2 = -1 <= 0; pretending its ground state sits at 0
    # activates the hypothesis, and the nonzero sigma must then fail it
    assert not davies_consistency(fixture_graph("star3"), 0.0)


# ------------------------------------------------------ plumbing

def test_tolerance_band_must_be_positive():
    with pytest.raises(ValueError):
        check_conditions(fixture_graph("interval"), tol=0.0)


def test_verdict_json_is_sorted_and_complete():
    text = verdict_to_json(check_conditions(fixture_graph("star3")))
    doc = json.loads(text)
    assert list(doc) == sorted(doc)
    assert doc["conclusion"] == SPECTRUM_MUST_DIFFER
    assert doc["line_loop_case"] == CASE_GENERAL
    assert text.endswith("\n")

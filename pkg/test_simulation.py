import logging
from fractions import Fraction

import pytest

from conftest import load_corpus_system, load_corpus_witness
from errors import AlphabetMismatch, BudgetExceeded, DomainMismatch, MonadMismatch
from kleisli import KleisliArrow, Monad, identity
from simulation import (
    Violation,
    check_bwd,
    check_fwd,
    check_restrictions,
    check_witness,
    find_bwd_bruteforce,
    find_fwd_rel,
)

P = Monad.POWERSET


@pytest.fixture
def nondet(corpus):
    return corpus("fig1_X"), corpus("fig1_Y")


@pytest.fixture
def partial(corpus):
    return corpus("a22_X"), corpus("a22_Y")


@pytest.fixture
def branching(corpus):
    return corpus("a23_X"), corpus("a23_Y")


def test_forward_candidate_fails_at_y0(nondet):
    X, Y = nondet
    f = KleisliArrow(P, Y.states, X.states, {"y0": {"x0"}, "y1": {"y"}})
    report = check_fwd(X, Y, f)
    assert not report.verdict
    assert report.violations == (Violation("step", "y0", ["(a,z)", "(b,y)"], ["(a,x0)", "(b,y)"]),)


def test_empty_forward_arrow_breaks_init(nondet):
    X, Y = nondet
    report = check_fwd(X, Y, KleisliArrow(P, Y.states, X.states, {}))
    assert report.violations[0].condition == "init"


def test_partial_witness_holds_but_is_not_total(partial):
    X, Y = partial
    witness = load_corpus_witness("a22_b.wit", X, Y)
    assert check_witness(X, Y, witness).verdict
    flags = check_restrictions(X, witness.arrow)
    assert not flags.total and flags.image_finite


def test_partial_witness_modified_is_refuted(partial):
    X, Y = partial
    b = KleisliArrow(P, X.states, Y.states, {"x0": {"y0"}, "x1": {"y1"}, "x2": {"y1"}})
    report = check_bwd(X, Y, b)
    assert not report.verdict
    assert "x2" in {v.element for v in report.violations}
    assert all(v.condition == "step" for v in report.violations)


def test_branching_witness_is_tif(branching):
    X, Y = branching
    witness = load_corpus_witness("a23_b.wit", X, Y)
    assert check_bwd(X, Y, witness.arrow).verdict
    flags = check_restrictions(X, witness.arrow)
    assert flags.total and flags.image_finite


def test_identity_is_a_simulation_both_ways(corpus):
    for stem in ("fig1_X", "fig1_Z", "exc_X"):
        X = corpus(stem)
        ident = identity(X.states, X.monad)
        assert check_fwd(X, X, ident).verdict
        assert check_bwd(X, X, ident).verdict
        assert check_restrictions(X, ident).total


def test_partial_subdist_witness_is_not_total(corpus):
    Z = corpus("fig1_Z")
    b = KleisliArrow(Monad.SUBDIST, Z.states, Z.states, {x: {x: Fraction(1, 2)} for x in Z.states})
    assert not check_restrictions(Z, b).total


def test_check_rejects_incompatible_inputs(nondet, corpus):
    X, Y = nondet
    with pytest.raises(DomainMismatch):
        check_fwd(X, Y, KleisliArrow(P, X.states, Y.states, {}))
    with pytest.raises(MonadMismatch):
        check_bwd(X, corpus("fig1_Z"), identity(X.states, P))
    with pytest.raises(AlphabetMismatch):
        check_bwd(X, corpus("a22_X"), KleisliArrow(P, X.states, ("x0", "x1", "x2"), {}))


# --- Search ---

def test_largest_forward_relation_contains_identity(nondet):
    X, _ = nondet
    relation = find_fwd_rel(X, X)
    assert relation is not None
    assert all(x in relation.image(x) for x in X.states)
    assert check_fwd(X, X, relation).verdict


def test_no_forward_simulation(nondet, branching):
    assert find_fwd_rel(*nondet) is None
    assert find_fwd_rel(*branching) is None


def test_forward_search_is_powerset_only(corpus):
    Z = corpus("fig1_Z")
    with pytest.raises(MonadMismatch):
        find_fwd_rel(Z, Z)


def test_branching_has_a_tif_backward_simulation(branching):
    X, Y = branching
    b = find_bwd_bruteforce(X, Y, require={"total", "image_finite"})
    assert b is not None
    assert check_bwd(X, Y, b).verdict
    assert check_restrictions(X, b).total


def test_partial_has_no_total_backward_simulation(partial, caplog):
    with caplog.at_level(logging.WARNING, logger="SimulationSearch"):
        assert find_bwd_bruteforce(*partial, require={"total"}) is None
    assert "No backward simulation" in caplog.text


def test_backward_search_finds_identity_first(nondet):
    X, _ = nondet
    assert find_bwd_bruteforce(X, X, require={"total"}) == identity(X.states, P)
    found = find_bwd_bruteforce(X, X)
    assert found is not None and check_bwd(X, X, found).verdict


def test_backward_search_budget(branching):
    with pytest.raises(BudgetExceeded) as excinfo:
        find_bwd_bruteforce(*branching, budget=1000)
    assert excinfo.value.needed == 1 << 12

"""
Randomized soundness suites: whenever a simulation is found, the trace
oracles must agree that the languages (or measures) are included.
"""
from fractions import Fraction
from itertools import product

from hypothesis import assume, given, settings
from hypothesis import strategies as st

from fpe import apply_fpe, fwd_adequacy_witness
from kleisli import KleisliArrow, Monad, compose, identity, leq
from random_systems import WORD_ALPHABET, dominating_systems, powerset_systems, subdist_systems
from semantics import (
    CylinderMeasure,
    TreeProbability,
    Verdict,
    extensions,
    prefix_lang,
    prob_inclusion_upto,
    skeleton,
    stabilization_bound,
    survival,
    tree_inclusion_upto,
    word_inclusion_exact,
)
from signature import EMPTY, prefix_trees_upto, truncate, validate_alphabet
from simulation import check_bwd, check_fwd, check_restrictions, find_bwd_bruteforce, find_fwd_rel

pairs = st.tuples(powerset_systems(prefix="x"), powerset_systems(prefix="y"))


@settings(max_examples=200)
@given(pairs)
def test_forward_simulation_implies_inclusion(pair):
    X, Y = pair
    relation = find_fwd_rel(X, Y)
    if relation is not None:
        assert check_fwd(X, Y, relation).verdict
        assert word_inclusion_exact(X, Y).verdict is Verdict.INCLUDED


# Brute force enumerates 2^(|X|·|Y|) relations; 4×4 pairs exceed this budget and are skipped.
BACKWARD_BUDGET = 1 << 12


@settings(max_examples=200)
@given(pairs)
def test_tif_backward_simulation_implies_inclusion(pair):
    X, Y = pair
    assume(len(X.states) * len(Y.states) <= 12)
    b = find_bwd_bruteforce(X, Y, require={"total", "image_finite"}, budget=BACKWARD_BUDGET)
    if b is not None:
        assert check_bwd(X, Y, b).verdict
        assert check_restrictions(X, b).total
        assert word_inclusion_exact(X, Y).verdict is Verdict.INCLUDED


@settings(max_examples=200)
@given(pairs)
def test_fpe_adequacy_and_soundness(pair):
    X, Y = pair
    fpe = apply_fpe(X)

    relation = find_fwd_rel(X, Y)
    if relation is not None:
        assert find_fwd_rel(fpe, Y) is not None
        assert check_fwd(fpe, Y, fwd_adequacy_witness(X, relation)).verdict

    if find_fwd_rel(fpe, Y) is not None:
        assert word_inclusion_exact(X, Y).included


@settings(max_examples=200)
@given(powerset_systems())
def test_fpe_preserves_prefix_languages(X):
    fpe = apply_fpe(X)
    for k in range(6):
        assert prefix_lang(fpe, None, k) == prefix_lang(X, None, k)


# Two states per side keep the stabilization depth at 9.
tiny_pairs = st.tuples(powerset_systems(prefix="x", max_states=2), powerset_systems(prefix="y", max_states=2))


@settings(max_examples=200)
@given(tiny_pairs)
def test_word_inclusion_agrees_with_bounded_tree_inclusion(pair):
    X, Y = pair
    exact = word_inclusion_exact(X, Y)
    bounded = tree_inclusion_upto(X, Y, stabilization_bound(X, Y))
    if exact.included:
        assert bounded.verdict is Verdict.INCLUDED_UP_TO_DEPTH
    else:
        assert bounded.verdict is Verdict.NOT_INCLUDED
        assert bounded.witness == exact.witness
        assert bounded.depths_checked == exact.witness.depth


def _kolmogorov(system, depth: int):
    nu = CylinderMeasure(system)
    for k in range(depth):
        for tree in prefix_trees_upto(system.alphabet, k):
            total = sum((nu(s) for s in extensions(tree, system.alphabet)), Fraction(0))
            assert total == nu(tree)


@settings(max_examples=100)
@given(subdist_systems(stochastic=True))
def test_cylinders_are_consistent_on_words(system):
    _kolmogorov(system, 4)


TREES = validate_alphabet({"✓": 0, "g": 2})


@settings(max_examples=100)
@given(subdist_systems(alphabet=TREES, stochastic=True, max_states=2))
def test_cylinders_are_consistent_on_trees(system):
    _kolmogorov(system, 3)


@st.composite
def dominated_pairs(draw):
    X = draw(subdist_systems(alphabet=WORD_ALPHABET))
    return X, draw(dominating_systems(X))


@settings(max_examples=100)
@given(dominated_pairs())
def test_added_mass_preserves_probabilistic_inclusion(pair):
    X, Y = pair
    b = identity(X.states, Monad.SUBDIST)
    assert check_bwd(X, Y, b).verdict
    assert check_restrictions(X, b).total
    report = prob_inclusion_upto(X, Y, 4, 1e-9)
    assert report.verdict is not Verdict.NOT_INCLUDED


@settings(max_examples=100)
@given(subdist_systems())
def test_empty_cylinder_is_total_survival(system):
    nu = CylinderMeasure(system)
    assert nu(EMPTY) <= 1 + 1e-9
    for x in system.states:
        assert 0 <= nu.survival[x] <= 1


@settings(max_examples=100)
@given(dominated_pairs())
def test_survival_drops_when_mass_goes_to_bottom(pair):
    X, Y = pair
    lower, upper = survival(skeleton(X)), survival(skeleton(Y))
    for x in X.states:
        assert lower[x] <= upper[x] + 1e-6


@settings(max_examples=100)
@given(subdist_systems(alphabet=TREES, max_states=2))
def test_tree_probability_shrinks_with_depth(system):
    xi = TreeProbability(system)
    for k in range(1, 4):
        for tree in prefix_trees_upto(system.alphabet, k):
            shorter = truncate(tree, k - 1)
            for x in system.states:
                assert xi(tree, x) <= xi(shorter, x)


def _step_respecting(X, Y, f) -> bool:
    return all(v.condition != "step" for v in check_fwd(X, Y, f).violations)


@settings(max_examples=50)
@given(st.tuples(powerset_systems(prefix="x", max_states=3), powerset_systems(prefix="y", max_states=3)))
def test_largest_forward_relation_is_the_union_of_all(pair):
    X, Y = pair
    cells = list(product(Y.states, X.states))
    union = {y: set() for y in Y.states}
    for mask in range(1 << len(cells)):
        rows = {y: set() for y in Y.states}
        for i, (y, x) in enumerate(cells):
            if mask >> i & 1:
                rows[y].add(x)
        if _step_respecting(X, Y, KleisliArrow(Monad.POWERSET, Y.states, X.states, rows)):
            for y in Y.states:
                union[y] |= rows[y]

    largest = KleisliArrow(Monad.POWERSET, Y.states, X.states, union)
    found = find_fwd_rel(X, Y)
    if found is None:
        assert not leq(X.init, compose(largest, Y.init))
    else:
        assert found == largest


@settings(max_examples=100)
@given(subdist_systems())
def test_cylinders_are_consistent_within_tolerance(system):
    eps = 1e-9
    nu = CylinderMeasure(system, eps)
    for k in range(3):
        for tree in prefix_trees_upto(system.alphabet, k):
            total = sum((nu(s) for s in extensions(tree, system.alphabet)), Fraction(0))
            assert abs(float(total) - float(nu(tree))) <= 10 * eps


@settings(max_examples=200)
@given(powerset_systems())
def test_prefix_languages_are_closed_under_truncation(X):
    for k in range(5):
        shorter = {truncate(t, k) for t in prefix_lang(X, None, k + 1)}
        assert shorter <= prefix_lang(X, None, k)


@settings(max_examples=100)
@given(subdist_systems())
def test_fpe_preserves_cylinder_probabilities(system):
    nu, nu_fpe = CylinderMeasure(system), CylinderMeasure(apply_fpe(system))
    for k in range(4):
        for tree in prefix_trees_upto(system.alphabet, k):
            before, after = nu(tree), nu_fpe(tree)
            if isinstance(before, Fraction) and isinstance(after, Fraction):
                assert before == after
            else:
                assert abs(float(before) - float(after)) <= 1e-6

from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from errors import DomainMismatch, MonadMismatch, NotDecreasing
from kleisli import (
    KleisliArrow,
    Monad,
    arrow_diagnostics,
    compose,
    identity,
    is_total,
    leq,
    lift_F,
    meet_decreasing,
    rename,
    row_mass,
    unit,
)
from random_systems import TREE_ALPHABET, arrows, enlarged
from signature import FTerm, enumerate_fterms, validate_alphabet

P, D, L = Monad.POWERSET, Monad.SUBDIST, Monad.LIFT
G2 = validate_alphabet({"g": 2})


def test_compose_examples():
    f = KleisliArrow(P, ["x"], ["y1", "y2"], {"x": {"y1", "y2"}})
    g = KleisliArrow(P, ["y1", "y2"], ["z"], {"y1": {"z"}, "y2": set()})
    assert compose(g, f).image("x") == frozenset({"z"})

    f = KleisliArrow(D, ["x"], ["y1", "y2"], {"x": {"y1": Fraction(1, 2), "y2": Fraction(1, 2)}})
    g = KleisliArrow(D, ["y1", "y2"], ["z"], {"y1": {"z": Fraction(1, 2)}, "y2": {}})
    assert compose(g, f).image("x") == {"z": Fraction(1, 4)}

    f = KleisliArrow(L, ["x"], ["y"], {"x": None})
    g = KleisliArrow(L, ["y"], ["z"], {"y": "z"})
    assert compose(g, f).image("x") is None


def test_compose_errors():
    f = identity(["x"], P)
    with pytest.raises(MonadMismatch):
        compose(identity(["x"], D), f)
    with pytest.raises(DomainMismatch):
        compose(identity(["y"], P), f)


def test_unit():
    assert identity(["x"], P).image("x") == frozenset({"x"})
    assert identity(["x"], D).image("x") == {"x": Fraction(1)}
    assert unit({"x": "y"}, ["x"], ["y"], L).image("x") == "y"


def test_leq_examples():
    f = KleisliArrow(P, ["x"], ["y", "z"], {"x": {"y"}})
    g = KleisliArrow(P, ["x"], ["y", "z"], {"x": {"y", "z"}})
    assert leq(f, g)
    zero = KleisliArrow(D, ["x"], ["y"], {"x": {}})
    assert leq(zero, KleisliArrow(D, ["x"], ["y"], {"x": {"y": Fraction(1, 3)}}))
    result = leq(KleisliArrow(L, ["x"], ["y", "z"], {"x": "y"}), KleisliArrow(L, ["x"], ["y", "z"], {"x": "z"}))
    assert not result
    assert result.witness == "x"


def test_lift_F_examples():
    f = KleisliArrow(P, ["x"], ["y1", "y2"], {"x": {"y1", "y2"}})
    image = lift_F(f, G2).image(FTerm("g", ("x", "x")))
    assert len(image) == 4

    f = KleisliArrow(D, ["x"], ["y"], {"x": {"y": Fraction(1, 2)}})
    assert lift_F(f, G2).image(FTerm("g", ("x", "x"))) == {FTerm("g", ("y", "y")): Fraction(1, 4)}

    words = validate_alphabet({"✓": 0, "a": 1})
    for monad in Monad:
        lifted = lift_F(KleisliArrow(monad, ["x"], ["y"], {"x": None if monad is L else {}}), words)
        assert lifted.image(FTerm("✓")) == unit(lambda t: t, [FTerm("✓")], [FTerm("✓")], monad).image(FTerm("✓"))


def test_meet_decreasing():
    v = {"x": Fraction(1, 2)}
    assert meet_decreasing([v, v, v]) == v
    halves = [{"x": Fraction(1, 2 ** i)} for i in range(5)]
    assert meet_decreasing(halves) == halves[-1]
    rows = [{"x": Fraction(1), "y": Fraction(1, 2)}, {"x": Fraction(1, 2), "y": Fraction(1, 2)},
            {"x": Fraction(1, 3), "y": Fraction(1, 4)}]
    assert meet_decreasing(rows) == {"x": Fraction(1, 3), "y": Fraction(1, 4)}
    with pytest.raises(NotDecreasing):
        meet_decreasing([{"x": Fraction(1, 2)}, {"x": Fraction(3, 4)}])


def test_diagnostics_and_totality():
    f = KleisliArrow(D, ["x", "y"], ["x"], {"x": {"x": Fraction(9, 8)}})
    codes = [code for _, code, _ in arrow_diagnostics(f)]
    assert codes == ["RowSumExceedsOne", "MissingRow"]
    assert row_mass(f, "x") == Fraction(9, 8)
    assert is_total(identity(["x"], D), "x")
    assert not is_total(KleisliArrow(P, ["x"], ["x"], {"x": set()}), "x")


def test_rename():
    f = KleisliArrow(P, ["x"], ["y"], {"x": {"y"}})
    renamed = rename(f, str.upper, lambda y: y + "!")
    assert renamed.image("X") == frozenset({"y!"})


# --- Laws on random small arrows ---

SETS = (("a0", "a1"), ("b0", "b1", "b2"), ("c0", "c1"), ("d0", "d1"))
monads = st.sampled_from(list(Monad))


@st.composite
def chains(draw):
    monad = draw(monads)
    a, b, c, d = SETS
    return (draw(arrows(monad, a, b)), draw(arrows(monad, b, c)), draw(arrows(monad, c, d)))


@settings(max_examples=500)
@given(chains())
def test_composition_is_associative(triple):
    f, g, h = triple
    assert compose(h, compose(g, f)) == compose(compose(h, g), f)


@settings(max_examples=500)
@given(monads.flatmap(lambda m: arrows(m, SETS[0], SETS[1])))
def test_identity_is_neutral(f):
    assert compose(f, identity(f.dom, f.monad)) == f
    assert compose(identity(f.cod, f.monad), f) == f


@settings(max_examples=500)
@given(monads.flatmap(lambda m: st.tuples(arrows(m, ("x0", "x1"), ("y0", "y1")), arrows(m, ("y0", "y1"), ("z0",)))))
def test_lift_F_is_a_functor(pair):
    f, g = pair
    assert lift_F(compose(g, f), TREE_ALPHABET) == compose(lift_F(g, TREE_ALPHABET), lift_F(f, TREE_ALPHABET))
    ident = identity(f.dom, f.monad)
    terms = enumerate_fterms(TREE_ALPHABET, f.dom)
    assert lift_F(ident, TREE_ALPHABET) == identity(terms, f.monad)


@st.composite
def monotone_pairs(draw):
    monad = draw(monads)
    f = draw(arrows(monad, ("x0", "x1"), ("y0", "y1")))
    g = draw(arrows(monad, ("y0", "y1"), ("z0", "z1")))
    return f, draw(enlarged(f)), g, draw(enlarged(g))


@settings(max_examples=500)
@given(monotone_pairs())
def test_composition_and_lifting_are_monotone(quad):
    f, f2, g, g2 = quad
    assert leq(f, f2) and leq(g, g2)
    assert leq(compose(g, f), compose(g2, f2))
    assert leq(lift_F(f, TREE_ALPHABET), lift_F(f2, TREE_ALPHABET))


@settings(max_examples=500)
@given(st.tuples(arrows(D, SETS[0], SETS[1]), arrows(D, SETS[1], SETS[2])))
def test_subdistributions_stay_subdistributions(pair):
    f, g = pair
    h = compose(g, f)
    assert all(row_mass(h, x) <= 1 for x in h.dom)
    lifted = lift_F(f, TREE_ALPHABET)
    assert all(row_mass(lifted, t) <= 1 for t in lifted.dom)


@settings(max_examples=500)
@given(st.tuples(arrows(L, SETS[0], SETS[1]), arrows(L, SETS[1], SETS[2])))
def test_lift_composition_is_strict(pair):
    f, g = pair
    h = compose(g, f)
    for x in f.dom:
        aborted = f.image(x) is None or g.image(f.image(x)) is None
        assert (h.image(x) is None) == aborted

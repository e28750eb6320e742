"""
Hypothesis strategies for small random arrows and systems.

Weights are multiples of 1/4 so every exact computation stays cheap.
"""
from fractions import Fraction
from typing import Sequence

from hypothesis import strategies as st

from kleisli import POINT, KleisliArrow, Monad
from signature import RankedAlphabet, enumerate_fterms, validate_alphabet
from systems import System, make_system

WORD_ALPHABET = validate_alphabet({"✓": 0, "a": 1, "b": 1})
TREE_ALPHABET = validate_alphabet({"✓": 0, "a": 1, "g": 2})

DENOMINATOR = 4


@st.composite
def subdist_rows(draw, support: Sequence, stochastic: bool = False, max_size: int = 3):
    """A subdistribution over `support`; with stochastic=True its mass is exactly 1."""
    support = list(support)
    if not support:
        return {}
    chosen = draw(st.lists(st.sampled_from(support), unique=True,
                           min_size=1 if stochastic else 0, max_size=min(max_size, len(support))))
    remaining = DENOMINATOR
    row = {}
    for i, element in enumerate(chosen):
        if stochastic and i == len(chosen) - 1:
            n = remaining
        else:
            n = draw(st.integers(0, remaining))
        remaining -= n
        if n:
            row[element] = Fraction(n, DENOMINATOR)
    return row


@st.composite
def arrows(draw, monad: Monad, dom: Sequence, cod: Sequence):
    rows = {}
    for x in dom:
        if monad is Monad.POWERSET:
            rows[x] = draw(st.frozensets(st.sampled_from(list(cod)), max_size=3)) if cod else frozenset()
        elif monad is Monad.SUBDIST:
            rows[x] = draw(subdist_rows(cod))
        else:
            rows[x] = draw(st.none() | st.sampled_from(list(cod))) if cod else None
    return KleisliArrow(monad, tuple(dom), tuple(cod), rows)


@st.composite
def enlarged(draw, f: KleisliArrow):
    """Some f′ with f ⊑ f′."""
    rows = {}
    for x in f.dom:
        row = f.image(x)
        if f.monad is Monad.POWERSET:
            extra = draw(st.frozensets(st.sampled_from(list(f.cod)), max_size=2)) if f.cod else frozenset()
            rows[x] = row | extra
        elif f.monad is Monad.SUBDIST:
            room = int((1 - sum(row.values(), Fraction(0))) * DENOMINATOR)
            bumped = dict(row)
            if room and f.cod:
                target = draw(st.sampled_from(list(f.cod)))
                bumped[target] = bumped.get(target, Fraction(0)) + Fraction(draw(st.integers(0, room)), DENOMINATOR)
            rows[x] = bumped
        else:
            rows[x] = draw(st.sampled_from(list(f.cod))) if row is None and f.cod else row
    return KleisliArrow(f.monad, f.dom, f.cod, rows)


def state_names(prefix: str, n: int):
    return tuple(f"{prefix}{i}" for i in range(n))


@st.composite
def powerset_systems(draw, alphabet: RankedAlphabet = WORD_ALPHABET, prefix: str = "x",
                     min_states: int = 1, max_states: int = 4):
    states = state_names(prefix, draw(st.integers(min_states, max_states)))
    terms = enumerate_fterms(alphabet, states)
    init = draw(st.frozensets(st.sampled_from(states), min_size=1, max_size=2))
    trans = {x: draw(st.frozensets(st.sampled_from(terms), max_size=3)) for x in states}
    return make_system(Monad.POWERSET, alphabet, states, init, trans)


@st.composite
def subdist_systems(draw, alphabet: RankedAlphabet = WORD_ALPHABET, prefix: str = "x",
                    min_states: int = 1, max_states: int = 3, stochastic: bool = False):
    states = state_names(prefix, draw(st.integers(min_states, max_states)))
    terms = enumerate_fterms(alphabet, states)
    init = draw(subdist_rows(states, stochastic=True))
    trans = {x: draw(subdist_rows(terms, stochastic=stochastic)) for x in states}
    return make_system(Monad.SUBDIST, alphabet, states, init, trans)


@st.composite
def dominating_systems(draw, X: System):
    """Y with the same states and init as X whose rows only gain mass."""
    rows = {}
    for x in X.states:
        row = dict(X.trans.image(x))
        room = int((1 - sum(row.values(), Fraction(0))) * DENOMINATOR)
        if room:
            term = draw(st.sampled_from(list(X.trans.cod)))
            row[term] = row.get(term, Fraction(0)) + Fraction(draw(st.integers(0, room)), DENOMINATOR)
        rows[x] = row
    return make_system(X.monad, X.alphabet, X.states, X.init.image(POINT), rows)


@st.composite
def lift_systems(draw, alphabet: RankedAlphabet = TREE_ALPHABET, prefix: str = "x", max_states: int = 3):
    states = state_names(prefix, draw(st.integers(1, max_states)))
    terms = enumerate_fterms(alphabet, states)
    init = draw(st.none() | st.sampled_from(states))
    trans = {x: draw(st.none() | st.sampled_from(terms)) for x in states}
    return make_system(Monad.LIFT, alphabet, states, init, trans)

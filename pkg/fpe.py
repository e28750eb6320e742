"""
Forward partial execution: X = (X, s, c) becomes (F X, c⊙s, F̄c).

The new states are the F-terms over the old ones, named by their printed
form, e.g. "(a,z)" or "✓".
"""
import logging
from typing import Dict

from errors import DomainMismatch
from kleisli import KleisliArrow, compose, is_total, lift_F, rename
from signature import FTerm, enumerate_fterms, render_fterm
from systems import System

logger = logging.getLogger("ForwardPartialExecution")


def state_names(system: System) -> Dict[FTerm, str]:
    """F-term -> fresh state id of the transformed system."""
    terms = enumerate_fterms(system.alphabet, system.states)
    names = {term: render_fterm(term) for term in terms}
    if len(set(names.values())) != len(names):
        raise DomainMismatch("state ids make two F-terms print the same way")
    return names


def _outer(names: Dict[FTerm, str]):
    # FTerm over F-terms -> FTerm over the fresh ids.
    return lambda term: FTerm(term.symbol, tuple(names[arg] for arg in term.args))


def apply_fpe(system: System) -> System:
    names = state_names(system)
    init = rename(compose(system.trans, system.init), lambda point: point, names.__getitem__)
    trans = rename(lift_F(system.trans, system.alphabet), names.__getitem__, _outer(names))
    states = tuple(names.values())
    logger.info(f"FPE: {len(system.states)} states -> {len(states)} states")
    return System(system.monad, system.alphabet, states, init, trans)


def bwd_adequacy_preconditions(Y: System) -> bool:
    """Every transition row of Y is total (nonempty / mass 1 / defined)."""
    return all(is_total(Y.trans, y) for y in Y.states)


def fwd_adequacy_witness(X: System, f: KleisliArrow) -> KleisliArrow:
    """c⊙f : Y ⇸ F X, re-keyed onto the states of apply_fpe(X)."""
    names = state_names(X)
    return rename(compose(X.trans, f), lambda y: y, names.__getitem__)


def bwd_adequacy_witness(X: System, Y: System, b: KleisliArrow) -> KleisliArrow:
    """F̄b⊙c : X ⇸ F Y, re-keyed onto the states of apply_fpe(Y)."""
    names = state_names(Y)
    return rename(compose(lift_F(b, X.alphabet), X.trans), lambda x: x, names.__getitem__)

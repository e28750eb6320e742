"""
Forward and backward Kleisli simulations between two systems of the same
monad and alphabet.

    forward  f: Y ⇸ X   s ⊑ f⊙t        c⊙f ⊑ F̄f⊙d
    backward b: X ⇸ Y   b⊙s ⊑ t        F̄b⊙c ⊑ d⊙b

Checking works for every monad. Searching is powerset-only: the largest
forward simulation by refinement, backward simulations by enumeration.
"""
import logging
from dataclasses import dataclass
from itertools import combinations, product
from typing import Any, Dict, FrozenSet, Iterable, List, Optional, Tuple

from errors import AlphabetMismatch, BudgetExceeded, DomainMismatch, MonadMismatch
from kleisli import (
    POINT,
    KleisliArrow,
    Monad,
    compose,
    leq,
    leq_violations,
    lift_F,
    render_element,
    render_row,
)
from signature import FTerm
from systems import Direction, RestrictionFlags, SimWitness, System, restriction_flags_of

logger = logging.getLogger("SimulationSearch")

DEFAULT_BUDGET = 1 << 16


@dataclass(frozen=True)
class Violation:
    condition: str  # "init" or "step"
    element: str
    lhs: Any
    rhs: Any

    def as_dict(self) -> Dict[str, Any]:
        return {"condition": self.condition, "element": self.element, "lhs": self.lhs, "rhs": self.rhs}


@dataclass(frozen=True)
class CheckReport:
    violations: Tuple[Violation, ...] = ()

    @property
    def verdict(self) -> bool:
        return not self.violations


def _check_compatible(X: System, Y: System, arrow: Optional[KleisliArrow] = None) -> None:
    monads = {X.monad, Y.monad} | ({arrow.monad} if arrow is not None else set())
    if len(monads) != 1:
        raise MonadMismatch(f"systems and witness use different monads: {sorted(m.value for m in monads)}")
    if X.alphabet != Y.alphabet:
        raise AlphabetMismatch("systems are over different alphabets")


def _check_dims(arrow: KleisliArrow, dom: Iterable, cod: Iterable) -> None:
    if set(arrow.dom) != set(dom) or set(arrow.cod) != set(cod):
        raise DomainMismatch("witness does not map between the state sets it should")


def _violations(condition: str, lhs: KleisliArrow, rhs: KleisliArrow) -> List[Violation]:
    order = lhs.cod
    return [
        Violation(condition, render_element(x), render_row(lhs.monad, l, order), render_row(lhs.monad, r, order))
        for x, l, r in leq_violations(lhs, rhs)
    ]


def check_fwd(X: System, Y: System, f: KleisliArrow) -> CheckReport:
    """Is f: Y ⇸ X a forward simulation from X to Y?"""
    _check_compatible(X, Y, f)
    _check_dims(f, Y.states, X.states)

    violations = _violations("init", X.init, compose(f, Y.init))
    violations += _violations("step", compose(X.trans, f), compose(lift_F(f, X.alphabet), Y.trans))
    return CheckReport(tuple(violations))


def check_bwd(X: System, Y: System, b: KleisliArrow) -> CheckReport:
    """Is b: X ⇸ Y a backward simulation from X to Y?"""
    _check_compatible(X, Y, b)
    _check_dims(b, X.states, Y.states)

    violations = _violations("init", compose(b, X.init), Y.init)
    violations += _violations("step", compose(lift_F(b, X.alphabet), X.trans), compose(Y.trans, b))
    return CheckReport(tuple(violations))


def check_witness(X: System, Y: System, witness: SimWitness) -> CheckReport:
    if witness.direction is Direction.FORWARD:
        return check_fwd(X, Y, witness.arrow)
    return check_bwd(X, Y, witness.arrow)


def check_restrictions(X: System, b: KleisliArrow) -> RestrictionFlags:
    if b.monad is not X.monad:
        raise MonadMismatch("witness monad differs from the system monad")
    return restriction_flags_of(b)


# --- Search (powerset only) ---

def _require_powerset(*systems: System) -> None:
    for system in systems:
        if system.monad is not Monad.POWERSET:
            raise MonadMismatch(f"simulation search needs powerset systems, got {system.monad.value}")


def find_fwd_rel(X: System, Y: System) -> Optional[KleisliArrow]:
    """
    The largest step-respecting relation R ⊆ Y × X, read as an arrow Y ⇸ X,
    when it also covers the initial states; None otherwise.
    """
    _require_powerset(X, Y)
    _check_compatible(X, Y)

    related: Dict[Any, set] = {y: set(X.states) for y in Y.states}

    def matched(x, y) -> bool:
        for term in X.trans.image(x):
            if not any(
                move.symbol == term.symbol
                and all(xi in related[yi] for xi, yi in zip(term.args, move.args))
                for move in Y.trans.image(y)
            ):
                return False
        return True

    rounds = 0
    changed = True
    while changed:
        changed = False
        rounds += 1
        for y in Y.states:
            for x in X.states:
                if x in related[y] and not matched(x, y):
                    related[y].discard(x)
                    changed = True
    logger.info(f"Forward refinement stabilized after {rounds} rounds")

    relation = KleisliArrow(Monad.POWERSET, Y.states, X.states, {y: frozenset(related[y]) for y in Y.states})
    if not leq(X.init, compose(relation, Y.init)):
        logger.info("Largest step-respecting relation misses an initial state")
        return None
    return relation


class _BackwardSearch:
    """
    Enumerates relations b ⊆ X × Y as bitmasks over Y, checking each one
    against the backward conditions without building Kleisli arrows.
    """

    def __init__(self, X: System, Y: System):
        self.X, self.Y = X, Y
        self.x_index = {x: i for i, x in enumerate(X.states)}
        self.y_bit = {y: 1 << j for j, y in enumerate(Y.states)}
        self.t_mask = self._mask(Y.init.image(POINT))
        self.s_states = [self.x_index[x] for x in X.init.image(POINT)]
        self.moves = [list(X.trans.image(x)) for x in X.states]
        self._d_union: Dict[int, FrozenSet[FTerm]] = {}

    def _mask(self, states) -> int:
        mask = 0
        for y in states:
            mask |= self.y_bit[y]
        return mask

    def _members(self, mask: int) -> List[str]:
        return [y for y in self.Y.states if mask & self.y_bit[y]]

    def d_union(self, mask: int) -> FrozenSet[FTerm]:
        # ∪ d(y) over the Y-states in mask, cached per mask.
        if mask not in self._d_union:
            terms = frozenset().union(*(self.Y.trans.image(y) for y in self._members(mask)))
            self._d_union[mask] = terms
        return self._d_union[mask]

    def passes(self, b: List[int]) -> bool:
        reached = 0
        for i in self.s_states:
            reached |= b[i]
        if reached & ~self.t_mask:
            return False

        for i, moves in enumerate(self.moves):
            allowed = self.d_union(b[i])
            for term in moves:
                choices = [self._members(b[self.x_index[arg]]) for arg in term.args]
                for ys in product(*choices):
                    if FTerm(term.symbol, ys) not in allowed:
                        return False
        return True

    def to_arrow(self, b: List[int]) -> KleisliArrow:
        rows = {x: frozenset(self._members(b[i])) for i, x in enumerate(self.X.states)}
        return KleisliArrow(Monad.POWERSET, self.X.states, self.Y.states, rows)


def find_bwd_bruteforce(
    X: System,
    Y: System,
    require: Iterable[str] = (),
    budget: int = DEFAULT_BUDGET,
) -> Optional[KleisliArrow]:
    """
    First backward simulation X ⇸ Y meeting the required restrictions
    ("total", "image_finite"), enumerating relations by size and then
    lexicographically over the (x, y) grid.
    """
    _require_powerset(X, Y)
    _check_compatible(X, Y)
    require = frozenset(require)

    grid = [(i, 1 << j) for i in range(len(X.states)) for j in range(len(Y.states))]
    needed = 1 << len(grid)
    if needed > budget:
        raise BudgetExceeded(needed, budget)

    search = _BackwardSearch(X, Y)
    examined = 0
    for size in range(len(grid) + 1):
        for positions in combinations(range(len(grid)), size):
            b = [0] * len(X.states)
            for p in positions:
                i, bit = grid[p]
                b[i] |= bit
            examined += 1
            if "total" in require and not all(b):
                continue
            if search.passes(b):
                logger.info(f"Backward simulation found after {examined} candidates")
                return search.to_arrow(b)

    logger.warning(f"No backward simulation among {examined} candidates (require={sorted(require)})")
    return None

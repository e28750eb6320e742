"""
Infinite-trace oracles, computed directly from the generated trees and
independent of any simulation argument.

  powerset  the set of infinite trees a system generates, observed through
            its depth-k prefixes (live states only); exact inclusion for words
  subdist   the measure on infinite trees, evaluated on cylinders, with the
            leaf factor given by the ⊥-avoidance probability of the skeleton
  lift      the single output tree, or ⊥ when an abort is reachable
"""
import logging
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from itertools import product
from typing import Any, Callable, Dict, FrozenSet, Iterator, List, Optional, Sequence, Tuple, Union

import numpy as np

from errors import AlphabetMismatch, MonadMismatch, NotDecreasing, NotWordMode
from kleisli import POINT, Monad, meet_decreasing
from signature import (
    EMPTY,
    FTerm,
    Node,
    PrefixTree,
    chain,
    truncate,
    tree_key,
)
from systems import System

logger = logging.getLogger("TraceSemantics")

DEFAULT_EPS = 1e-9
DEFAULT_MAX_ITER = 1_000_000

Value = Union[Fraction, float]


class _Bottom:
    """The absorbing ⊥ type of a skeleton; also the lift-monad abort."""
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "⊥"

    __str__ = __repr__


BOTTOM = _Bottom()


class Mode(str, Enum):
    EXACT = "exact"
    FLOAT = "float"


@dataclass(frozen=True)
class Valuation:
    values: Dict[Any, Value]
    mode: Mode = Mode.EXACT
    iterations: int = 0
    # False when value iteration stopped at max_iter before the tolerance held.
    tolerance_reached: bool = True

    def __getitem__(self, x) -> Value:
        return self.values[x]


@dataclass(frozen=True)
class BranchingProcess:
    types: Tuple[Any, ...]
    # type -> {population tuple: weight}; every row sums to exactly 1.
    rows: Dict[Any, Dict[Tuple, Fraction]]


class Verdict(str, Enum):
    INCLUDED = "Included"
    NOT_INCLUDED = "NotIncluded"
    INCLUDED_UP_TO_DEPTH = "IncludedUpToDepth"


@dataclass(frozen=True)
class InclusionReport:
    verdict: Verdict
    depths_checked: int
    witness: Optional[PrefixTree] = None
    lhs: Any = None
    rhs: Any = None

    @property
    def included(self) -> bool:
        return self.verdict is not Verdict.NOT_INCLUDED


def _require(system: System, monad: Monad) -> None:
    if system.monad is not monad:
        raise MonadMismatch(f"expected a {monad.value} system, got {system.monad.value}")


def _same_alphabet(X: System, Y: System) -> None:
    if X.alphabet != Y.alphabet:
        raise AlphabetMismatch("systems are over different alphabets")


def _starts(system: System, start) -> List[Any]:
    if start is None:
        row = system.init.image(POINT)
        return [x for x in system.states if x in row]
    return [start]


# --- Powerset: tree languages ---

def live_states(system: System) -> FrozenSet[str]:
    """States with a nonempty language: greatest fixed point from all-live."""
    _require(system, Monad.POWERSET)
    live = set(system.states)
    changed = True
    while changed:
        changed = False
        for x in system.states:
            if x in live and not any(all(arg in live for arg in term.args) for term in system.trans.image(x)):
                live.discard(x)
                changed = True
    return frozenset(live)


class _Unfolding:
    """Depth-k prefix sets per live state, memoized across depths."""

    def __init__(self, system: System):
        self.system = system
        self.live = live_states(system)
        self._memo: Dict[Tuple[str, int], FrozenSet[Node]] = {}

    def nodes(self, x, k: int) -> FrozenSet[Node]:
        key = (x, k)
        if key not in self._memo:
            result = set()
            for term in self.system.trans.image(x):
                if not all(arg in self.live for arg in term.args):
                    continue
                if not term.args or k == 1:
                    result.add(Node(term.symbol))
                    continue
                for children in product(*(self.nodes(arg, k - 1) for arg in term.args)):
                    result.add(Node(term.symbol, tuple(children)))
            self._memo[key] = frozenset(result)
        return self._memo[key]

    def language(self, start, k: int) -> FrozenSet[PrefixTree]:
        origins = [x for x in _starts(self.system, start) if x in self.live]
        if k == 0:
            return frozenset([EMPTY]) if origins else frozenset()
        trees = set()
        for x in origins:
            trees.update(PrefixTree(k, node) for node in self.nodes(x, k))
        return frozenset(trees)


def prefix_lang(system: System, start, k: int) -> FrozenSet[PrefixTree]:
    """Depth-k prefixes of the trees generated from `start` (None = init)."""
    return _Unfolding(system).language(start, k)


def tree_inclusion_upto(X: System, Y: System, depth: int) -> InclusionReport:
    _require(X, Monad.POWERSET)
    _require(Y, Monad.POWERSET)
    _same_alphabet(X, Y)

    ux, uy = _Unfolding(X), _Unfolding(Y)
    for k in range(depth + 1):
        missing = ux.language(None, k) - uy.language(None, k)
        if missing:
            witness = min(missing, key=lambda t: tree_key(t, X.alphabet))
            logger.info(f"Tree inclusion refuted at depth {k}")
            return InclusionReport(Verdict.NOT_INCLUDED, k, witness, True, False)
    return InclusionReport(Verdict.INCLUDED_UP_TO_DEPTH, depth)


def stabilization_bound(X: System, Y: System) -> int:
    """Depth after which bounded word inclusion agrees with the exact check."""
    return len(X.states) * (1 << len(Y.states)) + 1


def word_inclusion_exact(X: System, Y: System) -> InclusionReport:
    """
    Exact inclusion of word languages (finite ✓-words and infinite words).
    Breadth-first over pairs (live X state, live Y macrostate); the first
    X-step Y cannot follow gives the shortest, then least, witness word.
    """
    _require(X, Monad.POWERSET)
    _require(Y, Monad.POWERSET)
    _same_alphabet(X, Y)
    if not X.alphabet.word_mode:
        raise NotWordMode("exact inclusion needs every arity to be at most 1")

    alphabet = X.alphabet
    live_x, live_y = live_states(X), live_states(Y)
    x_starts = [x for x in _starts(X, None) if x in live_x]
    m0 = frozenset(y for y in _starts(Y, None) if y in live_y)

    if not x_starts:
        return InclusionReport(Verdict.INCLUDED, 0)
    if not m0:
        return InclusionReport(Verdict.NOT_INCLUDED, 0, EMPTY, True, False)

    def step(macro: FrozenSet[str], symbol: str) -> FrozenSet[str]:
        return frozenset(
            term.args[0]
            for y in macro
            for term in Y.trans.image(y)
            if term.symbol == symbol and term.args[0] in live_y
        )

    visited = set()
    frontier: List[Tuple[str, FrozenSet[str], Tuple[str, ...]]] = []
    for x in x_starts:
        if (x, m0) not in visited:
            visited.add((x, m0))
            frontier.append((x, m0, ()))

    depth = 0
    while frontier:
        depth += 1
        next_frontier = []
        for x, macro, word in frontier:
            moves = X.trans.image(x)
            for symbol, arity in alphabet.entries:
                if arity == 0:
                    term = FTerm(symbol)
                    if term in moves and not any(term in Y.trans.image(y) for y in macro):
                        return _word_refuted(word + (symbol,), alphabet)
                    continue
                successors = [
                    s for s in X.states
                    if s in live_x and FTerm(symbol, (s,)) in moves
                ]
                if not successors:
                    continue
                target = step(macro, symbol)
                if not target:
                    return _word_refuted(word + (symbol,), alphabet)
                for s in successors:
                    if (s, target) not in visited:
                        visited.add((s, target))
                        next_frontier.append((s, target, word + (symbol,)))
        frontier = next_frontier

    logger.info(f"Word inclusion holds; explored {len(visited)} product states")
    return InclusionReport(Verdict.INCLUDED, depth)


def _word_refuted(word: Tuple[str, ...], alphabet) -> InclusionReport:
    logger.info(f"Word inclusion refuted by {''.join(word)}")
    return InclusionReport(Verdict.NOT_INCLUDED, len(word), chain(word, alphabet), True, False)


# --- Subdistribution: skeleton and survival ---

def skeleton(system: System) -> BranchingProcess:
    _require(system, Monad.SUBDIST)
    rows: Dict[Any, Dict[Tuple, Fraction]] = {}
    for x in system.states:
        row: Dict[Tuple, Fraction] = {}
        for term, p in system.trans.image(x).items():
            row[term.args] = row.get(term.args, Fraction(0)) + p
        row[(BOTTOM,)] = 1 - sum(row.values(), Fraction(0))
        rows[x] = row
    rows[BOTTOM] = {(BOTTOM,): Fraction(1)}
    return BranchingProcess(tuple(system.states) + (BOTTOM,), rows)


def _never_aborts(bp: BranchingProcess, states: Sequence) -> set:
    # States whose reachable sub-process puts no mass on ⊥.
    edges = {
        x: {y for population, w in bp.rows[x].items() if w > 0 for y in population if y is not BOTTOM}
        for x in states
    }
    tainted = {x for x in states if bp.rows[x].get((BOTTOM,), 0) > 0}
    changed = True
    while changed:
        changed = False
        for x in states:
            if x not in tainted and edges[x] & tainted:
                tainted.add(x)
                changed = True
    return set(states) - tainted


def _can_survive(bp: BranchingProcess, states: Sequence) -> set:
    # Boolean greatest fixed point: some positive ⊥-free row with all members alive.
    alive = set(states)
    changed = True
    while changed:
        changed = False
        for x in states:
            if x in alive and not any(
                w > 0 and BOTTOM not in population and all(y in alive for y in population)
                for population, w in bp.rows[x].items()
            ):
                alive.discard(x)
                changed = True
    return alive


def survival(bp: BranchingProcess, eps: float = DEFAULT_EPS, max_iter: int = DEFAULT_MAX_ITER) -> Valuation:
    """
    Probability that the process started from each type never produces ⊥:
    the greatest fixed point of v_x = Σ_{α ⊥-free} τ(x,α)·∏ v_{α_i}.
    """
    states = [t for t in bp.types if t is not BOTTOM]
    ones = _never_aborts(bp, states)
    alive = _can_survive(bp, states)

    values: Dict[Any, Value] = {}
    for x in states:
        if x in ones:
            values[x] = Fraction(1)
        elif x not in alive:
            values[x] = Fraction(0)

    pending = [x for x in states if x not in values]
    if not pending:
        return Valuation(values, Mode.EXACT)

    index = {x: i for i, x in enumerate(pending)}
    pad = len(pending)  # slot holding the constant 1.0

    owners, weights, populations = [], [], []
    for x in pending:
        for population, w in bp.rows[x].items():
            if w == 0 or BOTTOM in population:
                continue
            if any(values.get(y) == 0 for y in population):
                continue
            owners.append(index[x])
            weights.append(float(w))
            populations.append([index.get(y, pad) for y in population])

    width = max((len(p) for p in populations), default=0)
    owner = np.array(owners, dtype=np.int64)
    weight = np.array(weights, dtype=np.float64)
    members = np.full((len(populations), width), pad, dtype=np.int64)
    for row, population in enumerate(populations):
        members[row, :len(population)] = population

    v = np.ones(len(pending), dtype=np.float64)
    previous_delta = None
    iterations = 0
    converged = False
    while iterations < max_iter:
        iterations += 1
        padded = np.append(v, 1.0)
        contributions = weight * np.prod(padded[members], axis=1)
        new = np.bincount(owner, weights=contributions, minlength=len(pending))
        if np.any(new > v + 1e-12):
            worst = int(np.argmax(new - v))
            raise NotDecreasing(iterations, pending[worst])
        new = np.minimum(new, v)
        delta = float(np.max(v - new)) if len(pending) else 0.0
        v = new
        if delta == 0.0:
            converged = True
            break
        if previous_delta:
            rate = delta / previous_delta
            if rate < 1 and delta * rate / (1 - rate) < eps:
                converged = True
                break
        previous_delta = delta

    if not converged:
        logger.warning(f"ToleranceNotReached: survival iteration stopped after {max_iter} steps")
    for x in pending:
        values[x] = float(v[index[x]])
    ordered = {x: values[x] for x in states}
    return Valuation(ordered, Mode.FLOAT, iterations, converged)


# --- Subdistribution: cylinder measures ---

def _is_frontier(node: Node, alphabet) -> bool:
    return not node.children and alphabet.arity(node.symbol) > 0


class CylinderMeasure:
    """
    ν_x on cylinders of depth-k prefix trees, with survival values as the
    weight of every cut-off subtree. Values are memoized per (state, node).
    """

    def __init__(self, system: System, eps: float = DEFAULT_EPS, max_iter: int = DEFAULT_MAX_ITER):
        _require(system, Monad.SUBDIST)
        self.system = system
        self.survival = survival(skeleton(system), eps, max_iter)
        self._memo: Dict[Tuple[Any, Node], Value] = {}

    def node_value(self, x, node: Node) -> Value:
        key = (x, node)
        if key in self._memo:
            return self._memo[key]
        alphabet = self.system.alphabet
        total: Value = Fraction(0)
        frontier = _is_frontier(node, alphabet)
        for term, p in self.system.trans.image(x).items():
            if term.symbol != node.symbol:
                continue
            if frontier:
                factors = [self.survival[arg] for arg in term.args]
            else:
                factors = [self.node_value(arg, child) for arg, child in zip(term.args, node.children)]
            weight: Value = p
            for factor in factors:
                weight = weight * factor
            total = total + weight
        self._memo[key] = total
        return total

    def state_value(self, x, tree: PrefixTree) -> Value:
        if tree.is_empty:
            return self.survival[x]
        return self.node_value(x, tree.root)

    def __call__(self, tree: PrefixTree, start=None) -> Value:
        if start is not None:
            return self.state_value(start, tree)
        total: Value = Fraction(0)
        for x, p in self.system.init.image(POINT).items():
            total = total + p * self.state_value(x, tree)
        return total


def cylinder_prob(system: System, start, tree: PrefixTree, eps: float = DEFAULT_EPS) -> Value:
    return CylinderMeasure(system, eps)(tree, start)


def _extend_node(node: Node, alphabet, roots: List[Node]) -> List[Node]:
    if not node.children:
        arity = alphabet.arity(node.symbol)
        if arity == 0:
            return [node]
        return [Node(node.symbol, combo) for combo in product(roots, repeat=arity)]
    options = [_extend_node(child, alphabet, roots) for child in node.children]
    return [Node(node.symbol, combo) for combo in product(*options)]


def extensions(tree: PrefixTree, alphabet) -> List[PrefixTree]:
    """Every depth-(k+1) tree whose depth-k prefix is `tree`, in canonical order."""
    roots = [Node(symbol) for symbol in alphabet.symbols]
    if tree.is_empty:
        return [PrefixTree(1, root) for root in roots]
    extended = [PrefixTree(tree.depth + 1, node) for node in _extend_node(tree.root, alphabet, roots)]
    return sorted(extended, key=lambda t: tree_key(t, alphabet))


def positive_levels(alphabet, value: Callable[[PrefixTree], Value], depth: int
                    ) -> Iterator[Tuple[int, List[Tuple[PrefixTree, Value]]]]:
    """
    Depth by depth, the prefix trees with positive value. Only extensions of
    positive trees are visited: the value of a tree bounds its extensions.
    """
    level = [(EMPTY, value(EMPTY))]
    level = [(t, v) for t, v in level if v > 0]
    for k in range(depth + 1):
        if k > 0:
            candidates = [ext for t, _ in level for ext in extensions(t, alphabet)]
            candidates.sort(key=lambda t: tree_key(t, alphabet))
            level = [(t, v) for t in candidates for v in [value(t)] if v > 0]
        yield k, level


def _dominated(lhs: Value, rhs: Value, eps: float) -> bool:
    if isinstance(lhs, Fraction) and isinstance(rhs, Fraction):
        return lhs <= rhs
    return float(lhs) <= float(rhs) + eps


def prob_inclusion_upto(X: System, Y: System, depth: int, eps: float = DEFAULT_EPS,
                        max_iter: int = DEFAULT_MAX_ITER) -> InclusionReport:
    """ν^X(cyl t) ≤ ν^Y(cyl t) (+ε when a value is inexact) for every t of depth ≤ K."""
    _require(X, Monad.SUBDIST)
    _require(Y, Monad.SUBDIST)
    _same_alphabet(X, Y)

    nu_x, nu_y = CylinderMeasure(X, eps, max_iter), CylinderMeasure(Y, eps, max_iter)
    # Trees outside X's support are trivially dominated.
    for k, level in positive_levels(X.alphabet, nu_x, depth):
        for tree, lhs in level:
            rhs = nu_y(tree)
            if not _dominated(lhs, rhs, eps):
                logger.info(f"Probabilistic inclusion refuted at depth {k}")
                return InclusionReport(Verdict.NOT_INCLUDED, k, tree, lhs, rhs)
    return InclusionReport(Verdict.INCLUDED_UP_TO_DEPTH, depth)


def cylinder_table(system: System, start, depth: int, eps: float = DEFAULT_EPS,
                   max_iter: int = DEFAULT_MAX_ITER) -> List[Tuple[PrefixTree, Value]]:
    """All depth-k cylinders with positive mass, in canonical order."""
    nu = CylinderMeasure(system, eps, max_iter)
    table: List[Tuple[PrefixTree, Value]] = []
    for _, level in positive_levels(system.alphabet, lambda t: nu(t, start), depth):
        table = level
    return table


# --- Subdistribution: per-tree probabilities ---

class TreeProbability:
    """ξ_x(t): like ν, but every cut-off subtree counts 1. Exact."""

    def __init__(self, system: System):
        _require(system, Monad.SUBDIST)
        self.system = system
        self._memo: Dict[Tuple[Any, Node], Fraction] = {}

    def node_value(self, x, node: Node) -> Fraction:
        key = (x, node)
        if key not in self._memo:
            total = Fraction(0)
            for term, p in self.system.trans.image(x).items():
                if term.symbol != node.symbol:
                    continue
                if node.children:
                    for arg, child in zip(term.args, node.children):
                        p = p * self.node_value(arg, child)
                total += p
            self._memo[key] = total
        return self._memo[key]

    def __call__(self, tree: PrefixTree, start=None) -> Fraction:
        if start is not None:
            return Fraction(1) if tree.is_empty else self.node_value(start, tree.root)
        total = Fraction(0)
        for x, p in self.system.init.image(POINT).items():
            total += p * self(tree, x)
        return total


def subdist_tree_prob(system: System, start, tree: PrefixTree) -> Fraction:
    return TreeProbability(system)(tree, start)


def subdist_tree_limit(system: System, prefixes: Sequence[PrefixTree]) -> Dict[Any, Fraction]:
    """
    Per-state lower bound of ξ along prefix_0(t), ..., prefix_K(t): the meet
    of the decreasing sequence of valuations, an upper approximation of the
    probability of t itself.
    """
    xi = TreeProbability(system)
    valuations = [{x: xi(tree, x) for x in system.states} for tree in prefixes]
    return meet_decreasing(valuations)


def tree_prob_table(system: System, start, depth: int) -> List[Tuple[PrefixTree, Fraction]]:
    xi = TreeProbability(system)
    table: List[Tuple[PrefixTree, Fraction]] = []
    for _, level in positive_levels(system.alphabet, lambda t: xi(t, start), depth):
        table = level
    return table


# --- Lift: output trees ---

def lift_output(system: System, start, depth: int) -> Union[_Bottom, PrefixTree]:
    """The depth-k prefix of the unique output tree, or ⊥ if an abort is reachable."""
    _require(system, Monad.LIFT)
    if start is None:
        start = system.init.image(POINT)
        if start is None:
            return BOTTOM

    seen, stack = {start}, [start]
    while stack:
        x = stack.pop()
        term = system.trans.image(x)
        if term is None:
            return BOTTOM
        for arg in term.args:
            if arg not in seen:
                seen.add(arg)
                stack.append(arg)

    def unfold(x, k: int) -> Node:
        term = system.trans.image(x)
        if not term.args or k == 1:
            return Node(term.symbol)
        return Node(term.symbol, tuple(unfold(arg, k - 1) for arg in term.args))

    if depth == 0:
        return EMPTY
    return PrefixTree(depth, unfold(start, depth))


def lift_inclusion_upto(X: System, Y: System, depth: int) -> InclusionReport:
    """X's output is below Y's when it is ⊥ or the same tree; compared up to depth K."""
    _require(X, Monad.LIFT)
    _require(Y, Monad.LIFT)
    _same_alphabet(X, Y)

    out_x = lift_output(X, None, depth)
    if out_x is BOTTOM:
        return InclusionReport(Verdict.INCLUDED_UP_TO_DEPTH, depth)
    out_y = lift_output(Y, None, depth)
    for k in range(depth + 1):
        lhs = truncate(out_x, k)
        rhs = BOTTOM if out_y is BOTTOM else truncate(out_y, k)
        if lhs != rhs:
            return InclusionReport(Verdict.NOT_INCLUDED, k, lhs, lhs, rhs)
    return InclusionReport(Verdict.INCLUDED_UP_TO_DEPTH, depth)

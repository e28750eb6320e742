"""
Kleisli arrows for the powerset, subdistribution and lift monads.

An arrow X ⇸ Y in Kl(T) is a function X -> TY. We only ever store arrows
between finite sets (state sets, F-term sets, or the one-point set 1), so
every arrow is a finite table:

    POWERSET  x -> frozenset of y
    SUBDIST   x -> {y: Fraction}   (zero weights are never stored)
    LIFT      x -> y, or None for ⊥
"""
import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from itertools import product
from typing import Any, Callable, Dict, Iterator, List, Mapping, Optional, Sequence, Tuple, Union

from errors import DomainMismatch, MonadMismatch, NotDecreasing
from signature import FTerm, RankedAlphabet, enumerate_fterms, render_fterm
from utils import format_rational


class Monad(str, Enum):
    POWERSET = "powerset"
    SUBDIST = "subdist"
    LIFT = "lift"


# The single element of the one-point set 1 (domain of initial arrows).
POINT = "∗"


def _normalize_row(monad: Monad, row):
    if monad is Monad.POWERSET:
        return frozenset(row)
    if monad is Monad.SUBDIST:
        return {y: Fraction(p) for y, p in row.items() if p != 0}
    return row


@dataclass(frozen=True)
class KleisliArrow:
    monad: Monad
    dom: Tuple
    cod: Tuple
    rows: Dict[Any, Any]

    def __post_init__(self):
        object.__setattr__(self, "dom", tuple(self.dom))
        object.__setattr__(self, "cod", tuple(self.cod))
        object.__setattr__(
            self, "rows", {x: _normalize_row(self.monad, row) for x, row in self.rows.items()}
        )

    def image(self, x):
        if self.monad is Monad.POWERSET:
            return self.rows.get(x, frozenset())
        if self.monad is Monad.SUBDIST:
            return self.rows.get(x, {})
        return self.rows.get(x)


@dataclass(frozen=True)
class Comparison:
    """Outcome of f ⊑ g; on failure carries the first offending element and both rows."""
    holds: bool
    witness: Any = None
    lhs: Any = None
    rhs: Any = None

    def __bool__(self):
        return self.holds


def _same_monad(*arrows: KleisliArrow) -> Monad:
    monads = {arrow.monad for arrow in arrows}
    if len(monads) != 1:
        raise MonadMismatch(f"arrows over different monads: {sorted(m.value for m in monads)}")
    return arrows[0].monad


def compose(g: KleisliArrow, f: KleisliArrow) -> KleisliArrow:
    """g ⊙ f for f: X ⇸ Y and g: Y ⇸ Z."""
    monad = _same_monad(f, g)
    if set(f.cod) != set(g.dom):
        raise DomainMismatch("codomain of the first arrow differs from the domain of the second")

    rows = {}
    for x in f.dom:
        if monad is Monad.POWERSET:
            rows[x] = frozenset().union(*(g.image(y) for y in f.image(x)))
        elif monad is Monad.SUBDIST:
            acc: Dict[Any, Fraction] = {}
            for y, p in f.image(x).items():
                for z, q in g.image(y).items():
                    acc[z] = acc.get(z, Fraction(0)) + p * q
            rows[x] = acc
        else:
            y = f.image(x)
            rows[x] = None if y is None else g.image(y)
    return KleisliArrow(monad, f.dom, g.cod, rows)


def unit(h: Union[Mapping, Callable], dom: Sequence, cod: Sequence, monad: Monad) -> KleisliArrow:
    """J h = η ∘ h: singleton, Dirac, or the (defined) value of h."""
    fn = h.__getitem__ if isinstance(h, Mapping) else h
    rows = {}
    for x in dom:
        y = fn(x)
        if monad is Monad.POWERSET:
            rows[x] = frozenset([y])
        elif monad is Monad.SUBDIST:
            rows[x] = {y: Fraction(1)}
        else:
            rows[x] = y
    return KleisliArrow(monad, tuple(dom), tuple(cod), rows)


def identity(elements: Sequence, monad: Monad) -> KleisliArrow:
    return unit(lambda x: x, elements, elements, monad)


def leq_violations(f: KleisliArrow, g: KleisliArrow) -> Iterator[Tuple[Any, Any, Any]]:
    """Every x (in dom order) where f(x) ⊑ g(x) fails, with both rows."""
    monad = _same_monad(f, g)
    if set(f.dom) != set(g.dom) or set(f.cod) != set(g.cod):
        raise DomainMismatch("compared arrows have different domains or codomains")

    for x in f.dom:
        lhs, rhs = f.image(x), g.image(x)
        if monad is Monad.POWERSET:
            ok = lhs <= rhs
        elif monad is Monad.SUBDIST:
            ok = all(p <= rhs.get(y, 0) for y, p in lhs.items())
        else:
            ok = lhs is None or lhs == rhs
        if not ok:
            yield x, lhs, rhs


def leq(f: KleisliArrow, g: KleisliArrow) -> Comparison:
    for x, lhs, rhs in leq_violations(f, g):
        return Comparison(False, x, lhs, rhs)
    return Comparison(True)


def lift_F(f: KleisliArrow, alphabet: RankedAlphabet) -> KleisliArrow:
    """
    F̄f : F X ⇸ F Y through the distributive law λ: F T ⇒ T F.
    Each argument position is pushed through f independently; the symbol stays.
    """
    dom_terms = enumerate_fterms(alphabet, f.dom)
    cod_terms = enumerate_fterms(alphabet, f.cod)

    rows = {}
    for term in dom_terms:
        images = [f.image(x) for x in term.args]
        if f.monad is Monad.POWERSET:
            rows[term] = frozenset(FTerm(term.symbol, ys) for ys in product(*images))
        elif f.monad is Monad.SUBDIST:
            row = {}
            for combo in product(*(image.items() for image in images)):
                ys = tuple(y for y, _ in combo)
                row[FTerm(term.symbol, ys)] = math.prod((p for _, p in combo), start=Fraction(1))
            rows[term] = row
        else:
            rows[term] = None if any(y is None for y in images) else FTerm(term.symbol, tuple(images))
    return KleisliArrow(f.monad, tuple(dom_terms), tuple(cod_terms), rows)


def meet_decreasing(seq: Sequence[Mapping[Any, Any]]) -> Dict[Any, Any]:
    """
    Greatest lower bound of a pointwise decreasing sequence of valuations.
    On a finite prefix that is the pointwise minimum, i.e. the last element.
    """
    if not seq:
        return {}
    for i in range(1, len(seq)):
        for key, value in seq[i].items():
            if value > seq[i - 1].get(key, value):
                raise NotDecreasing(i, key)
    return {key: min(v[key] for v in seq if key in v) for key in seq[-1]}


def row_mass(f: KleisliArrow, x) -> Fraction:
    return sum(f.image(x).values(), Fraction(0))


def rename(f: KleisliArrow, dom_map: Callable, cod_map: Callable) -> KleisliArrow:
    """Re-key the elements of an arrow (both maps must be injective)."""
    rows = {}
    for x in f.dom:
        row = f.image(x)
        if f.monad is Monad.POWERSET:
            rows[dom_map(x)] = frozenset(cod_map(y) for y in row)
        elif f.monad is Monad.SUBDIST:
            rows[dom_map(x)] = {cod_map(y): p for y, p in row.items()}
        else:
            rows[dom_map(x)] = None if row is None else cod_map(row)
    return KleisliArrow(f.monad, tuple(dom_map(x) for x in f.dom), tuple(cod_map(y) for y in f.cod), rows)


def is_total(f: KleisliArrow, x) -> bool:
    """Nonempty image / full mass / defined, depending on the monad."""
    row = f.image(x)
    if f.monad is Monad.POWERSET:
        return bool(row)
    if f.monad is Monad.SUBDIST:
        return row_mass(f, x) == 1
    return row is not None


def targets(f: KleisliArrow, x) -> List[Any]:
    row = f.image(x)
    if f.monad is Monad.LIFT:
        return [] if row is None else [row]
    return list(row)


def arrow_diagnostics(f: KleisliArrow) -> List[Tuple[Any, str, str]]:
    """
    (element, code, detail) for every broken arrow invariant, rows in dom order.
    Codes: DanglingRow, MissingRow, DanglingTarget, NegativeWeight, RowSumExceedsOne.
    """
    issues = []
    dom, cod = set(f.dom), set(f.cod)
    for x in f.rows:
        if x not in dom:
            issues.append((x, "DanglingRow", "row for an element outside the domain"))
    for x in f.dom:
        if x not in f.rows:
            issues.append((x, "MissingRow", "no row"))
            continue
        for y in targets(f, x):
            if y not in cod:
                issues.append((x, "DanglingTarget", f"{render_element(y)} is not in the codomain"))
        if f.monad is Monad.SUBDIST:
            row = f.rows[x]
            for y, p in row.items():
                if p < 0:
                    issues.append((x, "NegativeWeight", f"weight of {render_element(y)} is negative"))
            total = sum(row.values(), Fraction(0))
            if total > 1:
                issues.append((x, "RowSumExceedsOne", f"row sums to {format_rational(total)}"))
    return issues


def render_element(element) -> str:
    return render_fterm(element) if isinstance(element, FTerm) else str(element)


def render_row(monad: Monad, row, order: Optional[Sequence] = None) -> Any:
    """JSON-friendly rendering of one arrow row, in `order` when given."""
    position = {e: i for i, e in enumerate(order)} if order is not None else {}

    def key(element):
        return (position.get(element, len(position)), render_element(element))

    if monad is Monad.POWERSET:
        return [render_element(y) for y in sorted(row, key=key)]
    if monad is Monad.SUBDIST:
        return {render_element(y): format_rational(row[y]) for y in sorted(row, key=key)}
    return None if row is None else render_element(row)

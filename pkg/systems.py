"""
(T,F)-systems: a finite state set with an initial arrow 1 ⇸ X and a
transition arrow X ⇸ F X, plus the JSON documents that carry them.

Document shapes per monad (terms are arrays: ["✓"], ["a", "z"]):

    powerset  init ["x0"]            trans {"x0": [["a","z"], ["b","y"]]}
    subdist   init {"x": "1/1"}      trans {"x": [{"term": ["a","z"], "p": "2/3"}]}
    lift      init "x" or null       trans {"x": ["a","y"] or null}
"""
import json
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Any, Dict, List, Literal, Optional, Tuple, Union

from pydantic import BaseModel, ConfigDict, StrictInt, TypeAdapter, ValidationError

from errors import (
    ArityMismatch,
    DocumentSyntaxError,
    MissingTransition,
    MonadFieldInvalid,
    RowSumExceedsOne,
    TraceCheckError,
    UnknownState,
    UnknownSymbol,
    WitnessInvalid,
)
from kleisli import (
    POINT,
    KleisliArrow,
    Monad,
    arrow_diagnostics,
    is_total,
    render_row,
    row_mass,
    targets,
)
from signature import FTerm, RankedAlphabet, enumerate_fterms, validate_alphabet
from utils import format_rational, parse_rational


@dataclass(frozen=True)
class System:
    monad: Monad
    alphabet: RankedAlphabet
    # Declaration order is the canonical state order.
    states: Tuple[str, ...]
    init: KleisliArrow   # {∗} ⇸ states
    trans: KleisliArrow  # states ⇸ enumerate_fterms(alphabet, states)


@dataclass(frozen=True)
class Diagnostic:
    """One violated invariant: the error code, the offending state (or ∗) and a message."""
    code: str
    state: Any
    detail: str = ""
    error: Optional[TraceCheckError] = field(default=None, compare=False, repr=False)

    @classmethod
    def of(cls, state, error: TraceCheckError) -> "Diagnostic":
        return cls(type(error).__name__, state, str(error), error)


def make_system(monad: Monad, alphabet: RankedAlphabet, states, init_row, trans_rows) -> System:
    """Assemble a System from raw rows; no validation happens here."""
    states = tuple(states)
    init = KleisliArrow(monad, (POINT,), states, {POINT: init_row})
    trans = KleisliArrow(monad, states, tuple(enumerate_fterms(alphabet, states)), dict(trans_rows))
    return System(monad, alphabet, states, init, trans)


# --- Validation ---

def validate_system(system: System) -> List[Diagnostic]:
    """Every broken invariant as data; empty iff the system is well formed."""
    diagnostics: List[Diagnostic] = []
    known = set(system.states)

    if system.init.monad is not system.monad or system.trans.monad is not system.monad:
        diagnostics.append(Diagnostic.of(POINT, MonadFieldInvalid("arrow monad differs from the system monad")))

    for y in targets(system.init, POINT):
        if y not in known:
            diagnostics.append(Diagnostic.of(POINT, UnknownState(y, "init")))
    for _, code, detail in arrow_diagnostics(system.init):
        if code == "RowSumExceedsOne":
            total = format_rational(row_mass(system.init, POINT))
            diagnostics.append(Diagnostic.of(POINT, RowSumExceedsOne(POINT, total)))

    for x, code, detail in arrow_diagnostics(system.trans):
        if code == "DanglingRow":
            diagnostics.append(Diagnostic.of(x, UnknownState(x, "trans")))
        elif code == "MissingRow":
            diagnostics.append(Diagnostic.of(x, MissingTransition(x)))
        elif code == "RowSumExceedsOne":
            total = format_rational(row_mass(system.trans, x))
            diagnostics.append(Diagnostic.of(x, RowSumExceedsOne(x, total)))
        elif code == "NegativeWeight":
            diagnostics.append(Diagnostic.of(x, DocumentSyntaxError(detail, x)))

    # Term-level checks replace the generic DanglingTarget code.
    for x in system.states:
        for term in targets(system.trans, x):
            diagnostics.extend(_term_diagnostics(system, x, term, known))
    return diagnostics


def _term_diagnostics(system: System, state, term, known) -> List[Diagnostic]:
    if not isinstance(term, FTerm):
        return [Diagnostic.of(state, DocumentSyntaxError(f"{term!r} is not a term", state))]
    if term.symbol not in system.alphabet:
        return [Diagnostic.of(state, UnknownSymbol(term.symbol, state))]
    expected = system.alphabet.arity(term.symbol)
    if len(term.args) != expected:
        return [Diagnostic.of(state, ArityMismatch(term.symbol, expected, len(term.args), state))]
    return [Diagnostic.of(state, UnknownState(arg, f"row of {state}")) for arg in term.args if arg not in known]


# --- Documents ---

class AlphabetEntry(BaseModel):
    model_config = ConfigDict(extra="forbid")

    symbol: str
    arity: StrictInt


class SystemDocument(BaseModel):
    model_config = ConfigDict(extra="forbid")

    monad: Literal["powerset", "subdist", "lift"]
    alphabet: List[AlphabetEntry]
    states: List[str]
    init: Any = None
    trans: Dict[str, Any]


class WeightedTerm(BaseModel):
    model_config = ConfigDict(extra="forbid")

    term: List[str]
    p: str


class WitnessDocument(BaseModel):
    model_config = ConfigDict(extra="forbid")

    dir: Literal["fwd", "bwd"]
    monad: Literal["powerset", "subdist", "lift"]
    map: Dict[str, Any]


# Monad-shaped fragments, validated once the monad tag is known.
_INIT_SHAPE = {
    Monad.POWERSET: TypeAdapter(List[str]),
    Monad.SUBDIST: TypeAdapter(Dict[str, str]),
    Monad.LIFT: TypeAdapter(Optional[str]),
}
_TRANS_SHAPE = {
    Monad.POWERSET: TypeAdapter(Dict[str, List[List[str]]]),
    Monad.SUBDIST: TypeAdapter(Dict[str, List[WeightedTerm]]),
    Monad.LIFT: TypeAdapter(Dict[str, Optional[List[str]]]),
}
_MAP_SHAPE = {
    Monad.POWERSET: TypeAdapter(Dict[str, List[str]]),
    Monad.SUBDIST: TypeAdapter(Dict[str, Dict[str, str]]),
    Monad.LIFT: TypeAdapter(Dict[str, Optional[str]]),
}


def _location(error: ValidationError, prefix: str = "") -> str:
    loc = error.errors()[0]["loc"] if error.errors() else ()
    parts = [prefix] if prefix else []
    parts.extend(str(part) for part in loc)
    return ".".join(parts)


def _load_json(text: Union[bytes, str]) -> Any:
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise DocumentSyntaxError(e.msg, e.pos) from None
    except UnicodeDecodeError as e:
        raise DocumentSyntaxError("document is not UTF-8", e.start) from None


def _shaped(adapter: TypeAdapter, value, where: str):
    try:
        return adapter.validate_python(value)
    except ValidationError as e:
        raise DocumentSyntaxError("malformed document", _location(e, where)) from None


def _weight(text: str, where: str) -> Fraction:
    value = parse_rational(text)
    if value is None:
        raise DocumentSyntaxError(f"invalid weight {text!r}", where)
    return value


def _term(raw: List[str], where: str) -> FTerm:
    if not raw:
        raise DocumentSyntaxError("empty term", where)
    return FTerm(raw[0], tuple(raw[1:]))


def decode_system(text: Union[bytes, str]) -> System:
    """Decode a system document into a System without checking its invariants."""
    raw = _load_json(text)
    if isinstance(raw, dict) and "monad" in raw and raw["monad"] not in {m.value for m in Monad}:
        raise MonadFieldInvalid(f"unknown monad {raw['monad']!r}")
    try:
        doc = SystemDocument.model_validate(raw)
    except ValidationError as e:
        raise DocumentSyntaxError("malformed document", _location(e)) from None

    monad = Monad(doc.monad)
    alphabet = validate_alphabet((entry.symbol, entry.arity) for entry in doc.alphabet)
    if len(set(doc.states)) != len(doc.states):
        raise DocumentSyntaxError("duplicate state id", "states")

    init_raw = _shaped(_INIT_SHAPE[monad], doc.init, "init")
    trans_raw = _shaped(_TRANS_SHAPE[monad], doc.trans, "trans")

    if monad is Monad.POWERSET:
        init_row = frozenset(init_raw)
        trans_rows = {
            x: frozenset(_term(term, f"trans.{x}") for term in row) for x, row in trans_raw.items()
        }
    elif monad is Monad.SUBDIST:
        init_row = {x: _weight(p, f"init.{x}") for x, p in init_raw.items()}
        trans_rows = {}
        for x, row in trans_raw.items():
            acc: Dict[FTerm, Fraction] = {}
            for i, entry in enumerate(row):
                term = _term(entry.term, f"trans.{x}.{i}")
                acc[term] = acc.get(term, Fraction(0)) + _weight(entry.p, f"trans.{x}.{i}.p")
            trans_rows[x] = acc
    else:
        init_row = init_raw
        trans_rows = {x: None if term is None else _term(term, f"trans.{x}") for x, term in trans_raw.items()}

    return make_system(monad, alphabet, doc.states, init_row, trans_rows)


def parse_system(text: Union[bytes, str]) -> System:
    """Decode and validate a system document; the first diagnostic is raised."""
    system = decode_system(text)
    diagnostics = validate_system(system)
    if diagnostics:
        raise diagnostics[0].error
    return system


def _term_document(term: FTerm) -> List[str]:
    return [term.symbol, *term.args]


def system_document(system: System) -> Dict[str, Any]:
    order = {term: i for i, term in enumerate(system.trans.cod)}
    position = {x: i for i, x in enumerate(system.states)}
    init_row = system.init.image(POINT)

    if system.monad is Monad.POWERSET:
        init = sorted(init_row, key=position.__getitem__)
        trans = {x: [_term_document(t) for t in sorted(system.trans.image(x), key=order.__getitem__)]
                 for x in system.states}
    elif system.monad is Monad.SUBDIST:
        init = {x: format_rational(init_row[x]) for x in sorted(init_row, key=position.__getitem__)}
        trans = {}
        for x in system.states:
            row = system.trans.image(x)
            trans[x] = [{"term": _term_document(t), "p": format_rational(row[t])}
                        for t in sorted(row, key=order.__getitem__)]
    else:
        init = init_row
        trans = {x: None if system.trans.image(x) is None else _term_document(system.trans.image(x))
                 for x in system.states}

    return {
        "monad": system.monad.value,
        "alphabet": [{"symbol": sym, "arity": arity} for sym, arity in system.alphabet.entries],
        "states": list(system.states),
        "init": init,
        "trans": trans,
    }


def _dumps(value: Any) -> str:
    return json.dumps(value, ensure_ascii=False)


def _expanded(value: Any, indent: str) -> str:
    # One list item or one object member per line; everything nested stays inline.
    if not value:
        return _dumps(value)
    inner = indent + "    "
    if isinstance(value, dict):
        lines = [f"{inner}{_dumps(k)}: {_dumps(v)}" for k, v in value.items()]
        return "{\n" + ",\n".join(lines) + f"\n{indent}}}"
    lines = [f"{inner}{_dumps(v)}" for v in value]
    return "[\n" + ",\n".join(lines) + f"\n{indent}]"


def layout_document(doc: Dict[str, Any], expand: Tuple[str, ...]) -> bytes:
    """The canonical byte layout shared by the corpus and every serializer."""
    members = [f"    {_dumps(key)}: {_expanded(value, '    ') if key in expand else _dumps(value)}"
               for key, value in doc.items()]
    return ("{\n" + ",\n".join(members) + "\n}\n").encode("utf-8")


def serialize_system(system: System) -> bytes:
    return layout_document(system_document(system), ("alphabet", "trans"))


# --- Witnesses ---

class Direction(str, Enum):
    FORWARD = "fwd"
    BACKWARD = "bwd"


@dataclass(frozen=True)
class RestrictionFlags:
    total: bool
    image_finite: bool = True

    def satisfies(self, require) -> bool:
        return all(getattr(self, flag) for flag in require)


def restriction_flags_of(arrow: KleisliArrow) -> RestrictionFlags:
    # Finite tables are image-finite by construction.
    return RestrictionFlags(total=all(is_total(arrow, x) for x in arrow.dom), image_finite=True)


@dataclass(frozen=True)
class SimWitness:
    """Forward: arrow Y ⇸ X. Backward: arrow X ⇸ Y."""
    direction: Direction
    arrow: KleisliArrow

    @property
    def restriction_flags(self) -> RestrictionFlags:
        return restriction_flags_of(self.arrow)


def parse_witness(text: Union[bytes, str], X: System, Y: System) -> SimWitness:
    raw = _load_json(text)
    try:
        doc = WitnessDocument.model_validate(raw)
    except ValidationError as e:
        raise DocumentSyntaxError("malformed witness", _location(e)) from None

    monad = Monad(doc.monad)
    if monad is not X.monad or monad is not Y.monad:
        raise WitnessInvalid(f"witness monad {monad.value} does not match the systems")
    direction = Direction(doc.dir)
    source, target = (Y, X) if direction is Direction.FORWARD else (X, Y)
    rows_raw = _shaped(_MAP_SHAPE[monad], doc.map, "map")

    known_source, known_target = set(source.states), set(target.states)
    rows = {}
    for s, row in rows_raw.items():
        if s not in known_source:
            raise UnknownState(s, "witness map")
        if monad is Monad.POWERSET:
            image = row
        elif monad is Monad.SUBDIST:
            image = list(row)
        else:
            image = [] if row is None else [row]
        for t in image:
            if t not in known_target:
                raise UnknownState(t, f"witness row of {s}")
        if monad is Monad.SUBDIST:
            row = {t: _weight(p, f"map.{s}.{t}") for t, p in row.items()}
            total = sum(row.values(), Fraction(0))
            if total > 1:
                raise RowSumExceedsOne(s, format_rational(total))
        rows[s] = row

    # Rows left out of the map are empty / zero / ⊥.
    arrow = KleisliArrow(monad, source.states, target.states, rows)
    return SimWitness(direction, arrow)


def witness_document(witness: SimWitness) -> Dict[str, Any]:
    arrow = witness.arrow
    return {
        "dir": witness.direction.value,
        "monad": arrow.monad.value,
        "map": {s: render_row(arrow.monad, arrow.image(s), arrow.cod) for s in arrow.dom},
    }


def serialize_witness(witness: SimWitness) -> bytes:
    return layout_document(witness_document(witness), ("map",))


def check_document(text: Union[bytes, str]) -> List[Diagnostic]:
    """All diagnostics of a document; a decoding failure is reported as the only one."""
    try:
        system = decode_system(text)
    except TraceCheckError as e:
        return [Diagnostic.of(getattr(e, "state", None), e)]
    return validate_system(system)

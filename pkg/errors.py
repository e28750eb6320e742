from typing import Optional


class TraceCheckError(Exception):
    """
    Root of every error the checker raises on purpose.
    The CLI turns any of these into exit code 2.
    """


# --- Alphabets and trees ---

class EmptyAlphabet(TraceCheckError):
    pass


class DuplicateSymbol(TraceCheckError):
    def __init__(self, symbol: str):
        super().__init__(f"symbol {symbol!r} declared twice")
        self.symbol = symbol


class InvalidArity(TraceCheckError):
    def __init__(self, symbol: str, arity):
        super().__init__(f"symbol {symbol!r} has invalid arity {arity!r}")
        self.symbol = symbol


class DepthMismatch(TraceCheckError):
    pass


# --- Kleisli arrows ---

class MonadMismatch(TraceCheckError):
    pass


class DomainMismatch(TraceCheckError):
    pass


class NotDecreasing(TraceCheckError):
    def __init__(self, index: int, element):
        super().__init__(f"sequence increases at position {index} (element {element!r})")
        self.index = index
        self.element = element


# --- Documents ---

class DocumentSyntaxError(TraceCheckError):
    def __init__(self, message: str, position: Optional[object] = None):
        where = f" at {position}" if position is not None else ""
        super().__init__(f"{message}{where}")
        self.position = position


class UnknownState(TraceCheckError):
    def __init__(self, state, where: str = ""):
        super().__init__(f"unknown state {state!r}" + (f" in {where}" if where else ""))
        self.state = state


class UnknownSymbol(TraceCheckError):
    def __init__(self, symbol, state=None):
        super().__init__(f"unknown symbol {symbol!r}" + (f" in row of {state!r}" if state is not None else ""))
        self.symbol = symbol
        self.state = state


class ArityMismatch(TraceCheckError):
    def __init__(self, symbol, expected: int, got: int, state=None):
        super().__init__(f"symbol {symbol!r} expects {expected} arguments, got {got}")
        self.symbol = symbol
        self.state = state


class RowSumExceedsOne(TraceCheckError):
    def __init__(self, state, total=None):
        super().__init__(f"row of {state!r} sums to {total} > 1")
        self.state = state
        self.total = total


class MonadFieldInvalid(TraceCheckError):
    pass


class MissingTransition(TraceCheckError):
    def __init__(self, state):
        super().__init__(f"state {state!r} has no transition row")
        self.state = state


class WitnessInvalid(TraceCheckError):
    pass


# --- Search and semantics ---

class BudgetExceeded(TraceCheckError):
    def __init__(self, needed: int, budget: int):
        super().__init__(f"search space of {needed} relations exceeds budget {budget}")
        self.needed = needed
        self.budget = budget


class NotWordMode(TraceCheckError):
    pass


class AlphabetMismatch(TraceCheckError):
    pass

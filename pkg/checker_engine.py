import logging
from fractions import Fraction
from typing import Any, Dict, FrozenSet, List, Optional, Union

from pydantic import BaseModel

from config_manager import CheckerSettings
from document_store import DocumentStore
from errors import MonadMismatch, NotWordMode, UnknownState, WitnessInvalid
from fpe import apply_fpe
from kleisli import Monad
from semantics import (
    BOTTOM,
    InclusionReport,
    cylinder_table,
    lift_inclusion_upto,
    lift_output,
    prefix_lang,
    prob_inclusion_upto,
    tree_inclusion_upto,
    tree_prob_table,
    word_inclusion_exact,
)
from signature import PrefixTree, render_tree, tree_key
from simulation import check_witness, find_bwd_bruteforce, find_fwd_rel
from systems import Direction, SimWitness, System, check_document, serialize_system, witness_document
from utils import format_value, parse_eps

logger = logging.getLogger("CheckerEngine")

# Verdicts that make the CLI exit with 1.
NEGATIVE_VERDICTS = {"invalid", "refuted", "none", "NotIncluded"}


class Report(BaseModel):
    command: str
    verdict: str
    witness: Optional[Any] = None
    violations: Optional[List[Dict[str, Any]]] = None
    depths_checked: Optional[int] = None
    values: Optional[Any] = None

    @property
    def exit_code(self) -> int:
        return 1 if self.verdict in NEGATIVE_VERDICTS else 0


def _render(value, alphabet=None) -> Any:
    if value is BOTTOM:
        return "⊥"
    if isinstance(value, PrefixTree):
        return render_tree(value, alphabet)
    if isinstance(value, (Fraction, float)):
        return format_value(value)
    return value


class CheckerEngine:
    """
    The brain of the CLI. Each public coroutine is one command: it asks the
    DocumentStore for the documents, runs the library call and turns the
    result into a Report. Defaults come from CheckerSettings, explicit
    arguments win.
    """

    def __init__(self, settings: Optional[CheckerSettings] = None, store: Optional[DocumentStore] = None):
        self.settings = settings or CheckerSettings()
        self.store = store or DocumentStore()

    def _depth(self, depth: Optional[int]) -> int:
        return self.settings.default_depth if depth is None else depth

    def _eps(self, eps: Optional[float]) -> float:
        return parse_eps(self.settings.eps) if eps is None else eps

    # --- validate ---

    async def validate(self, path: str) -> Report:
        diagnostics = check_document(await self.store.read_bytes(path))
        if diagnostics:
            logger.info(f"{path}: {len(diagnostics)} diagnostics")
        return Report(
            command="validate",
            verdict="invalid" if diagnostics else "valid",
            violations=[
                {"code": d.code, "state": None if d.state is None else str(d.state), "detail": d.detail}
                for d in diagnostics
            ] or None,
        )

    # --- simulations ---

    async def check_sim(self, direction: Direction, witness_path: str, x_path: str, y_path: str) -> Report:
        X, Y = await self.store.load_systems(x_path, y_path)
        witness = await self.store.load_witness(witness_path, X, Y)
        if witness.direction is not direction:
            raise WitnessInvalid(f"witness is a {witness.direction.value} witness, --dir is {direction.value}")

        result = check_witness(X, Y, witness)
        flags = witness.restriction_flags
        logger.info(f"check-sim {direction.value}: {len(result.violations)} violations, total={flags.total}")
        return Report(
            command="check-sim",
            verdict="holds" if result.verdict else "refuted",
            violations=[v.as_dict() for v in result.violations] or None,
            values={"total": flags.total, "image_finite": flags.image_finite},
        )

    async def find_sim(self, direction: Direction, x_path: str, y_path: str,
                       require: FrozenSet[str] = frozenset(), budget: Optional[int] = None) -> Report:
        X, Y = await self.store.load_systems(x_path, y_path)
        if direction is Direction.FORWARD:
            arrow = find_fwd_rel(X, Y)
            if arrow is not None and not SimWitness(direction, arrow).restriction_flags.satisfies(require):
                # The largest relation is not total, so no smaller one is either.
                arrow = None
        else:
            budget = self.settings.bruteforce_budget if budget is None else budget
            arrow = find_bwd_bruteforce(X, Y, require, budget)

        if arrow is None:
            return Report(command="find-sim", verdict="none")
        witness = SimWitness(direction, arrow)
        flags = witness.restriction_flags
        return Report(
            command="find-sim",
            verdict="found",
            witness=witness_document(witness),
            values={"total": flags.total, "image_finite": flags.image_finite},
        )

    # --- transform ---

    async def fpe(self, path: str, output: Optional[str] = None) -> Union[Report, bytes]:
        """Without an output path the transformed document itself is the result."""
        system = await self.store.load_system(path)
        fpe_system = apply_fpe(system)
        transformed = serialize_system(fpe_system)
        if output is None:
            return transformed
        await self.store.write_bytes(output, transformed)
        return Report(command="fpe", verdict="ok", values={"output": output, "states": len(fpe_system.states)})

    # --- semantics ---

    async def trace(self, path: str, depth: Optional[int] = None, start: Optional[str] = None,
                    per_tree: bool = False, eps: Optional[float] = None) -> Report:
        system = await self.store.load_system(path)
        depth = self._depth(depth)
        if start is not None and start not in system.states:
            raise UnknownState(start, "--from")
        if per_tree and system.monad is not Monad.SUBDIST:
            raise MonadMismatch(f"--per-tree needs a subdist system, got {system.monad.value}")

        alphabet = system.alphabet
        if system.monad is Monad.POWERSET:
            trees = sorted(prefix_lang(system, start, depth), key=lambda t: tree_key(t, alphabet))
            values: Any = [render_tree(t, alphabet) for t in trees]
        elif system.monad is Monad.SUBDIST:
            if per_tree:
                table = tree_prob_table(system, start, depth)
            else:
                table = cylinder_table(system, start, depth, self._eps(eps), self.settings.max_iter)
            values = {render_tree(t, alphabet): format_value(v) for t, v in table}
        else:
            values = _render(lift_output(system, start, depth), alphabet)
        return Report(command="trace", verdict="ok", depths_checked=depth, values=values)

    async def inclusion(self, x_path: str, y_path: str, exact_word: bool = False,
                        depth: Optional[int] = None, eps: Optional[float] = None) -> Report:
        X, Y = await self.store.load_systems(x_path, y_path)
        if X.monad is not Y.monad:
            raise MonadMismatch("inclusion between systems of different monads")
        depth = self._depth(depth)

        if exact_word:
            if X.monad is not Monad.POWERSET:
                raise NotWordMode("--exact-word applies to powerset systems only")
            result = word_inclusion_exact(X, Y)
        elif X.monad is Monad.POWERSET:
            result = tree_inclusion_upto(X, Y, depth)
        elif X.monad is Monad.SUBDIST:
            result = prob_inclusion_upto(X, Y, depth, self._eps(eps), self.settings.max_iter)
        else:
            result = lift_inclusion_upto(X, Y, depth)
        return self._inclusion_report(result, X)

    @staticmethod
    def _inclusion_report(result: InclusionReport, X: System) -> Report:
        witness = None
        if result.witness is not None:
            witness = {
                "tree": render_tree(result.witness, X.alphabet),
                "lhs": _render(result.lhs, X.alphabet),
                "rhs": _render(result.rhs, X.alphabet),
            }
        return Report(
            command="inclusion",
            verdict=result.verdict.value,
            witness=witness,
            depths_checked=result.depths_checked,
        )

"""Domain types shared by every module.

All values are immutable after construction and safe to share across
concurrent tasks. Every type serializes to a JSON-friendly dict and parses
back field-for-field (see ``to_dict`` / ``from_dict``).
"""
from __future__ import annotations

import enum
import re
from dataclasses import dataclass, field, replace
from typing import Any, Optional

_WS = re.compile(r"\s+")


def normalize_text(text: str) -> str:
    """Collapse whitespace runs and trim; the canonical text-equality form."""
    return _WS.sub(" ", text).strip()


class Kind(enum.Enum):
    DEFINITION = "Definition"
    FIXPOINT = "Fixpoint"
    INDUCTIVE = "Inductive"
    NOTATION = "Notation"
    LEMMA = "Lemma"
    THEOREM = "Theorem"


#: Kinds that introduce data/functions/relations rather than proved facts.
DEFINITIONAL_KINDS = frozenset({Kind.DEFINITION, Kind.FIXPOINT, Kind.INDUCTIVE})
#: Kinds that state provable facts.
STATEMENT_KINDS = frozenset({Kind.LEMMA, Kind.THEOREM})


@dataclass(frozen=True)
class Origin:
    """Source location of an ingested item: file path plus ordinal position."""

    path: str
    index: int

    def to_dict(self) -> dict[str, Any]:
        return {"path": self.path, "index": self.index}

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> Origin:
        return cls(path=data["path"], index=data["index"])


@dataclass(frozen=True)
class ContextItem:
    """One named corpus entry; the unit of the global and working contexts."""

    name: str
    kind: Kind
    statement: str
    proof: Optional[str] = None
    origin: Optional[Origin] = None

    def __post_init__(self) -> None:
        if not self.name:
            raise ValueError("ContextItem requires a non-empty name")
        if self.proof is not None and self.kind not in STATEMENT_KINDS:
            raise ValueError(f"{self.kind.value} item {self.name!r} cannot carry a proof")
        if not self.statement.rstrip().endswith("."):
            raise ValueError(f"statement of {self.name!r} does not end with the sentence terminator")

    @property
    def normalized_statement(self) -> str:
        return normalize_text(self.statement)

    def to_dict(self) -> dict[str, Any]:
        return {
            "name": self.name,
            "kind": self.kind.value,
            "statement": self.statement,
            "proof": self.proof,
            "origin": self.origin.to_dict() if self.origin else None,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> ContextItem:
        return cls(
            name=data["name"],
            kind=Kind(data["kind"]),
            statement=data["statement"],
            proof=data.get("proof"),
            origin=Origin.from_dict(data["origin"]) if data.get("origin") else None,
        )


@dataclass(frozen=True)
class Goal:
    """One proof obligation: named hypotheses plus the conclusion to prove."""

    hypotheses: tuple[tuple[str, str], ...]
    conclusion: str

    def __post_init__(self) -> None:
        names = [name for name, _ in self.hypotheses]
        if len(names) != len(set(names)):
            raise ValueError(f"duplicate hypothesis names in goal: {names}")

    def to_dict(self) -> dict[str, Any]:
        return {
            "hypotheses": [[n, t] for n, t in self.hypotheses],
            "conclusion": self.conclusion,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> Goal:
        return cls(
            hypotheses=tuple((n, t) for n, t in data["hypotheses"]),
            conclusion=data["conclusion"],
        )


_GOAL_DIVIDER = "=" * 40


@dataclass(frozen=True)
class ProofState:
    """The prover's pending goals; an empty goal list is a completed proof."""

    goals: tuple[Goal, ...] = ()

    @property
    def completed(self) -> bool:
        return not self.goals

    def render(self) -> str:
        """Textual form used in prompts: hypotheses, divider line, conclusion."""
        if not self.goals:
            return "No more goals."
        blocks = []
        for i, goal in enumerate(self.goals):
            lines = [f"{name}: {type_text}" for name, type_text in goal.hypotheses]
            lines.append(_GOAL_DIVIDER)
            lines.append(goal.conclusion)
            header = [] if i == 0 else [f"goal {i + 1}:"]
            blocks.append("\n".join(header + lines))
        return "\n\n".join(blocks)

    def to_dict(self) -> dict[str, Any]:
        return {"goals": [g.to_dict() for g in self.goals]}

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> ProofState:
        return cls(goals=tuple(Goal.from_dict(g) for g in data["goals"]))


@dataclass(frozen=True)
class FailureReport:
    """The captured prover state after a failed attempt."""

    erroneous_tactic: str
    error_message: str
    partial_proof: str
    stuck_state: ProofState

    def to_dict(self) -> dict[str, Any]:
        return {
            "erroneous_tactic": self.erroneous_tactic,
            "error_message": self.error_message,
            "partial_proof": self.partial_proof,
            "stuck_state": self.stuck_state.to_dict(),
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> FailureReport:
        return cls(
            erroneous_tactic=data["erroneous_tactic"],
            error_message=data["error_message"],
            partial_proof=data["partial_proof"],
            stuck_state=ProofState.from_dict(data["stuck_state"]),
        )


@dataclass(frozen=True)
class SimilarProof:
    """A retrieved (statement, proof) pair used as a structural example."""

    statement: str
    proof: str

    def to_dict(self) -> dict[str, Any]:
        return {"statement": self.statement, "proof": self.proof}

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> SimilarProof:
        return cls(statement=data["statement"], proof=data["proof"])


def _merge_items(
    existing: tuple[ContextItem, ...],
    new: tuple[ContextItem, ...],
    seen_names: set[str],
    seen_statements: set[str],
) -> tuple[ContextItem, ...]:
    merged = list(existing)
    for item in new:
        if item.name in seen_names or item.normalized_statement in seen_statements:
            continue
        seen_names.add(item.name)
        seen_statements.add(item.normalized_statement)
        merged.append(item)
    return tuple(merged)


@dataclass(frozen=True)
class WorkingContext:
    """The evolving retrieval context of a refinement run.

    Updates are union-only: the ``extend_*`` methods return a new context
    that is a superset of the old one. Duplicates are dropped by name and
    by normalized statement, keeping the earliest provenance.

    ``similar_score`` records the retrieval score of ``similar_proof`` at
    initialization time (0.0 when absent); feature extraction reads it.
    """

    lemma_statements: tuple[ContextItem, ...] = ()
    similar_proof: Optional[SimilarProof] = None
    definitions: tuple[ContextItem, ...] = ()
    discovered: tuple[ContextItem, ...] = ()
    similar_score: float = 0.0

    def names(self) -> frozenset[str]:
        return frozenset(
            item.name
            for group in (self.lemma_statements, self.definitions, self.discovered)
            for item in group
        )

    def lemma_items(self) -> tuple[ContextItem, ...]:
        """All lemma-shaped members: retrieved statements plus discoveries."""
        return self.lemma_statements + self.discovered

    def _seen(self) -> tuple[set[str], set[str]]:
        names: set[str] = set()
        statements: set[str] = set()
        for group in (self.lemma_statements, self.definitions, self.discovered):
            for item in group:
                names.add(item.name)
                statements.add(item.normalized_statement)
        return names, statements

    def extend_discovered(self, items: tuple[ContextItem, ...]) -> WorkingContext:
        names, statements = self._seen()
        return replace(self, discovered=_merge_items(self.discovered, items, names, statements))

    def extend_retrieved(self, items: tuple[ContextItem, ...]) -> WorkingContext:
        """Add enrichment results; definitional items and lemmas go to their own pools."""
        names, statements = self._seen()
        definitional = tuple(i for i in items if i.kind in DEFINITIONAL_KINDS)
        stated = tuple(i for i in items if i.kind in STATEMENT_KINDS)
        ctx = replace(self, definitions=_merge_items(self.definitions, definitional, names, statements))
        return replace(ctx, lemma_statements=_merge_items(ctx.lemma_statements, stated, names, statements))

    def issubset(self, other: WorkingContext) -> bool:
        return self.names() <= other.names()

    def to_dict(self) -> dict[str, Any]:
        return {
            "lemma_statements": [i.to_dict() for i in self.lemma_statements],
            "similar_proof": self.similar_proof.to_dict() if self.similar_proof else None,
            "definitions": [i.to_dict() for i in self.definitions],
            "discovered": [i.to_dict() for i in self.discovered],
            "similar_score": self.similar_score,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> WorkingContext:
        return cls(
            lemma_statements=tuple(ContextItem.from_dict(i) for i in data["lemma_statements"]),
            similar_proof=SimilarProof.from_dict(data["similar_proof"]) if data.get("similar_proof") else None,
            definitions=tuple(ContextItem.from_dict(i) for i in data["definitions"]),
            discovered=tuple(ContextItem.from_dict(i) for i in data["discovered"]),
            similar_score=data.get("similar_score", 0.0),
        )


class Strategy(enum.Enum):
    LEMMA_DISCOVERY = "Lemma Discovery"
    CONTEXT_ENRICHMENT = "Context Enrichment"
    REGENERATION = "Regeneration"


@dataclass(frozen=True)
class Decision:
    """A strategy choice plus its payload.

    Payload fields not owned by the active strategy must be empty, and a
    context-enrichment decision must carry at least one keyword.
    """

    strategy: Strategy
    refine_candidates: tuple[str, ...] = ()
    keywords: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if self.strategy is not Strategy.LEMMA_DISCOVERY and self.refine_candidates:
            raise ValueError("refine_candidates only belong to lemma-discovery decisions")
        if self.strategy is not Strategy.CONTEXT_ENRICHMENT and self.keywords:
            raise ValueError("keywords only belong to context-enrichment decisions")
        if self.strategy is Strategy.CONTEXT_ENRICHMENT and not self.keywords:
            raise ValueError("context-enrichment decisions require keywords")

    def to_dict(self) -> dict[str, Any]:
        return {
            "strategy": self.strategy.value,
            "refine_candidates": list(self.refine_candidates),
            "keywords": list(self.keywords),
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> Decision:
        return cls(
            strategy=Strategy(data["strategy"]),
            refine_candidates=tuple(data.get("refine_candidates", ())),
            keywords=tuple(data.get("keywords", ())),
        )


class Mode(enum.Enum):
    ADAPT = "adapt"
    SELF_REFINE = "self-refine"
    SELF_REFINE_RAG = "self-refine-rag"


class DecisionMakerKind(enum.Enum):
    LLM = "llm"
    RULE = "rule"
    RANDOM = "random"
    CLASSIFIER = "classifier"


@dataclass(frozen=True)
class PromptBudgets:
    """Per-slot character caps applied when rendering prompts."""

    theorem: int = 4000
    definitions: int = 4000
    lemmas: int = 8000
    similar_proof: int = 4000
    state: int = 4000
    default: int = 4000

    def cap_for(self, budget_key: str) -> int:
        return getattr(self, budget_key, self.default)

    def to_dict(self) -> dict[str, Any]:
        return {
            "theorem": self.theorem,
            "definitions": self.definitions,
            "lemmas": self.lemmas,
            "similar_proof": self.similar_proof,
            "state": self.state,
            "default": self.default,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> PromptBudgets:
        return cls(**data)


@dataclass(frozen=True)
class EngineConfig:
    iteration_limit: int = 3
    top_k: int = 10
    decision_maker: DecisionMakerKind = DecisionMakerKind.LLM
    mode: Mode = Mode.ADAPT
    disable_lemma_discovery: bool = False
    disable_enrichment: bool = False
    llm_temperature: float = 0.0
    rng_seed: int = 0
    max_new_lemmas: int = 5
    budgets: PromptBudgets = field(default_factory=PromptBudgets)

    def __post_init__(self) -> None:
        if self.iteration_limit < 1:
            raise ValueError("iteration_limit must be >= 1")
        if self.top_k < 0:
            raise ValueError("top_k must be >= 0")
        if self.max_new_lemmas < 0:
            raise ValueError("max_new_lemmas must be >= 0")

    @property
    def lemma_discovery_enabled(self) -> bool:
        return self.mode is Mode.ADAPT and not self.disable_lemma_discovery

    @property
    def enrichment_enabled(self) -> bool:
        return self.mode is Mode.ADAPT and not self.disable_enrichment

    def enabled_strategies(self) -> tuple[Strategy, ...]:
        enabled = []
        if self.lemma_discovery_enabled:
            enabled.append(Strategy.LEMMA_DISCOVERY)
        if self.enrichment_enabled:
            enabled.append(Strategy.CONTEXT_ENRICHMENT)
        enabled.append(Strategy.REGENERATION)
        return tuple(enabled)

    def to_dict(self) -> dict[str, Any]:
        return {
            "iteration_limit": self.iteration_limit,
            "top_k": self.top_k,
            "decision_maker": self.decision_maker.value,
            "mode": self.mode.value,
            "disable_lemma_discovery": self.disable_lemma_discovery,
            "disable_enrichment": self.disable_enrichment,
            "llm_temperature": self.llm_temperature,
            "rng_seed": self.rng_seed,
            "max_new_lemmas": self.max_new_lemmas,
            "budgets": self.budgets.to_dict(),
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> EngineConfig:
        known = {
            "iteration_limit", "top_k", "decision_maker", "mode",
            "disable_lemma_discovery", "disable_enrichment",
            "llm_temperature", "rng_seed", "max_new_lemmas", "budgets",
        }
        kwargs: dict[str, Any] = {k: v for k, v in data.items() if k in known}
        if "decision_maker" in kwargs:
            kwargs["decision_maker"] = DecisionMakerKind(kwargs["decision_maker"])
        if "mode" in kwargs:
            kwargs["mode"] = Mode(kwargs["mode"])
        if "budgets" in kwargs:
            kwargs["budgets"] = PromptBudgets.from_dict(kwargs["budgets"])
        return cls(**kwargs)


class Outcome(enum.Enum):
    PROVED = "Proved"
    EXHAUSTED = "Exhausted"
    ERROR = "Error"


class StepResult(enum.Enum):
    PASS = "Pass"
    FAIL = "Fail"


@dataclass(frozen=True)
class LlmCall:
    """Token accounting for one gateway call, as recorded in traces."""

    template_id: str
    input_tokens: int
    output_tokens: int

    def __post_init__(self) -> None:
        if self.input_tokens < 0 or self.output_tokens < 0:
            raise ValueError("token counts must be >= 0")

    def to_dict(self) -> dict[str, Any]:
        return {
            "template_id": self.template_id,
            "input_tokens": self.input_tokens,
            "output_tokens": self.output_tokens,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> LlmCall:
        return cls(
            template_id=data["template_id"],
            input_tokens=data["input_tokens"],
            output_tokens=data["output_tokens"],
        )


@dataclass(frozen=True)
class IterationRecord:
    decision: Decision
    llm_calls: tuple[LlmCall, ...]
    prover_calls: int
    result: StepResult
    fallback: bool = False
    context_names: tuple[str, ...] = ()

    def to_dict(self) -> dict[str, Any]:
        return {
            "decision": self.decision.to_dict(),
            "llm_calls": [c.to_dict() for c in self.llm_calls],
            "prover_calls": self.prover_calls,
            "result": self.result.value,
            "fallback": self.fallback,
            "context_names": list(self.context_names),
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> IterationRecord:
        return cls(
            decision=Decision.from_dict(data["decision"]),
            llm_calls=tuple(LlmCall.from_dict(c) for c in data["llm_calls"]),
            prover_calls=data["prover_calls"],
            result=StepResult(data["result"]),
            fallback=data.get("fallback", False),
            context_names=tuple(data.get("context_names", ())),
        )


@dataclass(frozen=True)
class Totals:
    iterations_used: int
    input_tokens: int
    output_tokens: int

    def to_dict(self) -> dict[str, Any]:
        return {
            "iterations_used": self.iterations_used,
            "input_tokens": self.input_tokens,
            "output_tokens": self.output_tokens,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> Totals:
        return cls(
            iterations_used=data["iterations_used"],
            input_tokens=data["input_tokens"],
            output_tokens=data["output_tokens"],
        )


@dataclass(frozen=True)
class RefinementTrace:
    """Per-theorem record of one refinement run.

    Totals are recomputed from the call records at construction time; a
    trace whose totals disagree with its own records is invalid. The
    initial attempt is accounted separately from refinement iterations.
    """

    theorem: str
    outcome: Outcome
    final_proof: Optional[str]
    initial_llm_calls: tuple[LlmCall, ...]
    initial_prover_calls: int
    initial_result: StepResult
    iterations: tuple[IterationRecord, ...]
    totals: Totals

    def __post_init__(self) -> None:
        calls = list(self.initial_llm_calls)
        for record in self.iterations:
            calls.extend(record.llm_calls)
        expected = Totals(
            iterations_used=len(self.iterations),
            input_tokens=sum(c.input_tokens for c in calls),
            output_tokens=sum(c.output_tokens for c in calls),
        )
        if self.totals != expected:
            raise ValueError(f"trace totals {self.totals} do not match records {expected}")
        if (self.outcome is Outcome.PROVED) != (self.final_proof is not None):
            raise ValueError("outcome Proved iff final_proof present")

    @classmethod
    def build(
        cls,
        theorem: str,
        outcome: Outcome,
        final_proof: Optional[str],
        initial_llm_calls: tuple[LlmCall, ...],
        initial_prover_calls: int,
        initial_result: StepResult,
        iterations: tuple[IterationRecord, ...],
    ) -> RefinementTrace:
        calls = list(initial_llm_calls)
        for record in iterations:
            calls.extend(record.llm_calls)
        totals = Totals(
            iterations_used=len(iterations),
            input_tokens=sum(c.input_tokens for c in calls),
            output_tokens=sum(c.output_tokens for c in calls),
        )
        return cls(
            theorem=theorem,
            outcome=outcome,
            final_proof=final_proof,
            initial_llm_calls=initial_llm_calls,
            initial_prover_calls=initial_prover_calls,
            initial_result=initial_result,
            iterations=iterations,
            totals=totals,
        )

    def to_dict(self) -> dict[str, Any]:
        return {
            "theorem": self.theorem,
            "outcome": self.outcome.value,
            "final_proof": self.final_proof,
            "initial_llm_calls": [c.to_dict() for c in self.initial_llm_calls],
            "initial_prover_calls": self.initial_prover_calls,
            "initial_result": self.initial_result.value,
            "iterations": [r.to_dict() for r in self.iterations],
            "totals": self.totals.to_dict(),
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> RefinementTrace:
        return cls(
            theorem=data["theorem"],
            outcome=Outcome(data["outcome"]),
            final_proof=data.get("final_proof"),
            initial_llm_calls=tuple(LlmCall.from_dict(c) for c in data["initial_llm_calls"]),
            initial_prover_calls=data["initial_prover_calls"],
            initial_result=StepResult(data["initial_result"]),
            iterations=tuple(IterationRecord.from_dict(r) for r in data["iterations"]),
            totals=Totals.from_dict(data["totals"]),
        )

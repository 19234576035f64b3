"""Classify the reply to a clarifying question: intent j, intent k, or neither.

The reply is compared by cosine against both answer options and against a
small lexicon of rejection phrases; the closest wins. Similarity to the
lexicon is the maximum over its phrases. Exact ties resolve conservatively:
neither beats either intent, and intent j beats intent k.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

from clarifier.encoder import cosine
from clarifier.surface import ClarifyingQuestion

DEFAULT_NONE_PHRASES = ("none", "none of them", "neither", "no", "something else")


@dataclass(frozen=True)
class NoneLexicon:
    """Rejection expressions; stored lowercase, never empty."""

    phrases: tuple[str, ...] = DEFAULT_NONE_PHRASES

    def __post_init__(self):
        if not self.phrases:
            raise ValueError("the none-lexicon must contain at least one phrase")
        object.__setattr__(self, "phrases", tuple(p.lower() for p in self.phrases))


class Outcome(Enum):
    INTENT_J = "intent_j"
    INTENT_K = "intent_k"
    NEITHER = "neither"


@dataclass(frozen=True)
class Resolution:
    outcome: Outcome
    similarity_j: float
    similarity_k: float
    similarity_none: float
    margin: float = field(default=0.0)

    def best_similarity(self) -> float:
        return max(self.similarity_j, self.similarity_k, self.similarity_none)


def resolve(
    reply: str,
    question: ClarifyingQuestion,
    encoder,
    none_lexicon: NoneLexicon = NoneLexicon(),
    min_similarity: float | None = None,
) -> Resolution:
    """Argmax cosine match of the reply against the two options and the lexicon.

    ``min_similarity`` is an optional confidence floor, disabled by default:
    when set, a best similarity below it resolves to neither.
    """
    if not reply.strip():
        raise ValueError("cannot resolve an empty reply")
    reply_vec = encoder.encode(reply)
    sim_j = cosine(reply_vec, encoder.encode(question.option_j))
    sim_k = cosine(reply_vec, encoder.encode(question.option_k))
    sim_none = max(cosine(reply_vec, encoder.encode(p)) for p in none_lexicon.phrases)

    ranked = sorted(
        ((sim_none, 0, Outcome.NEITHER), (sim_j, 1, Outcome.INTENT_J), (sim_k, 2, Outcome.INTENT_K)),
        key=lambda item: (-item[0], item[1]),
    )
    outcome = ranked[0][2]
    if min_similarity is not None and ranked[0][0] < min_similarity:
        outcome = Outcome.NEITHER
    margin = ranked[0][0] - ranked[1][0]
    return Resolution(outcome, sim_j, sim_k, sim_none, margin)

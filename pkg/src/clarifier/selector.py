"""Discriminative question selection over cross-intent QA-pair products.

Each candidate cell pairs one (question, answer) from intent J with one from
intent K and is scored

    w_q * sim(q_j, q_k) - w_a * sim(a_j, a_k) + w_aff * (sim(q, q_j) + sim(q, q_k))

with cosine similarities from the sentence encoder. High question similarity
and high answer dissimilarity mark a pair whose single question separates
the two intents; the query-affinity term re-ranks toward the user's actual
phrasing. The selection is the exhaustive argmax, ties broken toward the
first cell in (j-index, k-index) order.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator

import numpy as np

from clarifier.encoder import cosine
from clarifier.qgen import QAPair, QAPairSet


@dataclass(frozen=True)
class ScoreWeights:
    """Coefficients of the three score terms; (1, 1, 0.5) is the default."""

    question_similarity_weight: float = 1.0
    answer_dissimilarity_weight: float = 1.0
    query_affinity_weight: float = 0.5


@dataclass(frozen=True)
class DiscriminativeSelection:
    """The chosen cross-intent pair with its score and gate outcome."""

    pair_j: QAPair
    pair_k: QAPair
    score: float
    gate_passed: bool

    def __post_init__(self):
        if self.pair_j.intent == self.pair_k.intent:
            raise ValueError("selected pairs must come from different intents")


def score_pair(
    query: str,
    qa_j: QAPair,
    qa_k: QAPair,
    encoder,
    weights: ScoreWeights = ScoreWeights(),
) -> float:
    """Score one candidate cell; bounded by [-2, 2] under default weights."""
    sim_q = cosine(encoder.encode(qa_j.question), encoder.encode(qa_k.question))
    sim_a = cosine(encoder.encode(qa_j.answer), encoder.encode(qa_k.answer))
    query_vec = encoder.encode(query)
    affinity = cosine(query_vec, encoder.encode(qa_j.question)) + cosine(
        query_vec, encoder.encode(qa_k.question)
    )
    return (
        weights.question_similarity_weight * sim_q
        - weights.answer_dissimilarity_weight * sim_a
        + weights.query_affinity_weight * affinity
    )


def _trim_to_cap(
    query: str, set_j: QAPairSet, set_k: QAPairSet, encoder, cap: int
) -> tuple[list[QAPair], list[QAPair]]:
    """Bound the cross product: keep each set's most query-similar members.

    Each side is cut to floor(sqrt(cap)) pairs, stable under score ties.
    """
    pairs_j, pairs_k = list(set_j.pairs), list(set_k.pairs)
    if len(pairs_j) * len(pairs_k) <= cap:
        return pairs_j, pairs_k
    keep = max(1, int(cap**0.5))
    query_vec = encoder.encode(query)

    def most_similar(pairs: list[QAPair]) -> list[QAPair]:
        scored = [
            (-cosine(query_vec, encoder.encode(p.question)), i) for i, p in enumerate(pairs)
        ]
        kept = sorted(range(len(pairs)), key=lambda i: scored[i])[:keep]
        return [pairs[i] for i in sorted(kept)]

    return most_similar(pairs_j), most_similar(pairs_k)


def _normalized_rows(texts: list[str], encoder) -> np.ndarray:
    rows = np.stack([encoder.encode(t).values for t in texts])
    norms = np.linalg.norm(rows, axis=1, keepdims=True)
    norms[norms == 0.0] = 1.0  # zero vectors keep cosine 0 by staying zero
    return rows / norms


def select_top(
    query: str,
    set_j: QAPairSet,
    set_k: QAPairSet,
    encoder,
    weights: ScoreWeights = ScoreWeights(),
    gate: float = 0.7,
    n: int = 3,
    cross_product_cap: int = 10_000,
) -> list[DiscriminativeSelection]:
    """The ``n`` best selections by score, descending; [] if either set is empty.

    The full cross product is scored with matrix cosines; ties resolve toward
    the first cell in (j-index, k-index) order.
    """
    if not set_j.pairs or not set_k.pairs:
        return []
    pairs_j, pairs_k = _trim_to_cap(query, set_j, set_k, encoder, cross_product_cap)

    questions_j = _normalized_rows([p.question for p in pairs_j], encoder)
    questions_k = _normalized_rows([p.question for p in pairs_k], encoder)
    answers_j = _normalized_rows([p.answer for p in pairs_j], encoder)
    answers_k = _normalized_rows([p.answer for p in pairs_k], encoder)
    query_vec = _normalized_rows([query], encoder)[0]

    sim_questions = questions_j @ questions_k.T
    sim_answers = answers_j @ answers_k.T
    affinity_j = questions_j @ query_vec
    affinity_k = questions_k @ query_vec
    scores = (
        weights.question_similarity_weight * sim_questions
        - weights.answer_dissimilarity_weight * sim_answers
        + weights.query_affinity_weight * (affinity_j[:, None] + affinity_k[None, :])
    )
    flat = scores.ravel()
    order = np.argsort(-flat, kind="stable")[: max(n, 0)]
    width = len(pairs_k)
    return [
        DiscriminativeSelection(
            pairs_j[int(i) // width],
            pairs_k[int(i) % width],
            float(flat[i]),
            float(flat[i]) >= gate,
        )
        for i in order
    ]


def select_best(
    query: str,
    set_j: QAPairSet,
    set_k: QAPairSet,
    encoder,
    weights: ScoreWeights = ScoreWeights(),
    gate: float = 0.7,
    cross_product_cap: int = 10_000,
) -> DiscriminativeSelection | None:
    """Exhaustive argmax over all |Q_J| x |Q_K| cells; None if either set is empty."""
    top = select_top(query, set_j, set_k, encoder, weights, gate, 1, cross_product_cap)
    return top[0] if top else None


def score_matrix(
    query: str,
    set_j: QAPairSet,
    set_k: QAPairSet,
    encoder,
    weights: ScoreWeights = ScoreWeights(),
) -> Iterator[dict]:
    """Every cell with its similarity terms, for debug CSV dumps."""
    query_vec = encoder.encode(query)
    for qa_j in set_j.pairs:
        for qa_k in set_k.pairs:
            sim_q = cosine(encoder.encode(qa_j.question), encoder.encode(qa_k.question))
            sim_a = cosine(encoder.encode(qa_j.answer), encoder.encode(qa_k.answer))
            aff_j = cosine(query_vec, encoder.encode(qa_j.question))
            aff_k = cosine(query_vec, encoder.encode(qa_k.question))
            yield {
                "question_j": qa_j.question,
                "answer_j": qa_j.answer,
                "question_k": qa_k.question,
                "answer_k": qa_k.answer,
                "sim_questions": sim_q,
                "sim_answers": sim_a,
                "sim_query_j": aff_j,
                "sim_query_k": aff_k,
                "score": (
                    weights.question_similarity_weight * sim_q
                    - weights.answer_dissimilarity_weight * sim_a
                    + weights.query_affinity_weight * (aff_j + aff_k)
                ),
            }

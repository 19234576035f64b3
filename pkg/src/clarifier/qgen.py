"""Question-answer pair generation from declarative training utterances.

An external question generator can be plugged in as any callable mapping an
utterance to (question, answer) tuples, and pre-generated pairs can be
ingested from a JSON-lines file. The default provider is rule-based and
works off shallow patterns:

  (a) "I want/need/would like to VP"  ->  ("What do you want to <head>?",
      object phrase) plus ("What do you want to do?", VP verbatim)
  (b) subject-verb-object declaratives -> ("What do you <verb>?" /
      "What does <subj> <verb>?", object)
  (c) a noun phrase after a preposition inside the verb phrase ->
      ("What do you <verb> <prep>?", noun phrase)

Verb and object detection relies on closed-class function-word lists and
token position, not a parser.
"""

from __future__ import annotations

import json
import logging
import re
from dataclasses import dataclass
from typing import Callable, Iterable

from clarifier.corpus import Corpus
from clarifier.exceptions import RecordError, UnknownIntentError

logger = logging.getLogger(__name__)

QAProvider = Callable[[str], "list[tuple[str, str]]"]

_WORD = re.compile(r"[A-Za-z0-9]+")

AUXILIARIES = {
    "am", "is", "are", "was", "were", "be", "been", "being",
    "do", "does", "did", "have", "has", "had",
    "will", "would", "can", "could", "shall", "should", "may", "might", "must",
}
SUBJECT_PRONOUNS = {"i", "we", "you", "they", "he", "she", "it"}
DETERMINERS = {
    "a", "an", "the", "my", "your", "our", "their", "his", "her", "its",
    "this", "that", "these", "those", "some", "any",
}
PREPOSITIONS = {"to", "for", "with", "from", "on", "in", "at", "about", "into", "onto", "of"}
WANT_VERBS = {"want", "need", "wanna"}
NON_VERBS = (
    SUBJECT_PRONOUNS
    | DETERMINERS
    | PREPOSITIONS
    | AUXILIARIES
    | {"hello", "hi", "hey", "thanks", "thank", "please", "ok", "okay", "yes", "no",
       "goodbye", "bye", "what", "which", "who", "how", "when", "where", "why"}
)


def words(text: str) -> list[str]:
    return [w.lower() for w in _WORD.findall(text)]


@dataclass(frozen=True)
class QAPair:
    """One generated (question, answer) pair, stamped with its origin."""

    question: str
    answer: str
    source_text: str
    intent: str

    def __post_init__(self):
        if not self.question.endswith("?"):
            raise ValueError(f"question must end with '?': {self.question!r}")
        if not self.answer.strip():
            raise ValueError("answer must be non-empty")


@dataclass(frozen=True)
class QAPairSet:
    """All pairs generated for one intent."""

    intent: str
    pairs: tuple[QAPair, ...]

    def __post_init__(self):
        for pair in self.pairs:
            if pair.intent != self.intent:
                raise ValueError(
                    f"pair intent {pair.intent!r} does not match set intent {self.intent!r}"
                )

    def __len__(self) -> int:
        return len(self.pairs)


def build_utterance_sets(corpus: Corpus, j: str, k: str) -> tuple[list[str], list[str]]:
    """Training utterances of the two candidate intents, in corpus order."""
    if j == k:
        raise ValueError("the two intents must differ")
    for intent in (j, k):
        if intent not in corpus.intents:
            raise UnknownIntentError(intent)
    texts_j = [u.text for u in corpus.utterances if u.intent == j]
    texts_k = [u.text for u in corpus.utterances if u.intent == k]
    return texts_j, texts_k


def _want_prefix(tokens: list[str]) -> int | None:
    """Index of the VP start for 'I want/need to', 'we would like to' forms."""
    if not tokens or tokens[0] not in {"i", "we"}:
        return None
    i = 1
    if i < len(tokens) and tokens[i] in {"would", "d"}:
        i += 1
        if i < len(tokens) and tokens[i] == "like":
            i += 1
        else:
            return None
    elif i < len(tokens) and tokens[i] in WANT_VERBS:
        i += 1
    else:
        return None
    if i < len(tokens) and tokens[i] == "to":
        return i + 1
    return None


def _phrase(tokens: list[str]) -> str:
    return " ".join(tokens)


def rule_based_pairs(text: str) -> list[tuple[str, str]]:
    """Default provider; deterministic, may return an empty list."""
    tokens = words(text)
    while tokens and tokens[0] in {"please", "hey", "hello", "hi"}:
        tokens = tokens[1:]
    if not tokens:
        return []
    pairs: list[tuple[str, str]] = []

    vp_start = _want_prefix(tokens)
    if vp_start is not None and vp_start < len(tokens):
        vp = tokens[vp_start:]
        head, rest = vp[0], vp[1:]
        if head not in NON_VERBS:
            if rest:
                pairs.append((f"What do you want to {head}?", _phrase(rest)))
            pairs.append(("What do you want to do?", _phrase(vp)))
            prep_pair = _preposition_pair(head, rest, "What do you want to")
            if prep_pair:
                pairs.append(prep_pair)
        return pairs

    i = 0
    subject = None
    while i < len(tokens) and tokens[i] in AUXILIARIES:
        i += 1
    if i < len(tokens) and tokens[i] in SUBJECT_PRONOUNS:
        subject = tokens[i]
        i += 1
    while i < len(tokens) and tokens[i] in AUXILIARIES:
        i += 1
    if i >= len(tokens):
        return []
    verb, rest = tokens[i], tokens[i + 1 :]

    if subject is None:
        # Imperative: first token must look like a verb and take a complement.
        if verb in NON_VERBS or not rest:
            return []
        pairs.append((f"What do you want to {verb}?", _phrase(rest)))
        prep_pair = _preposition_pair(verb, rest, "What do you want to")
        if prep_pair:
            pairs.append(prep_pair)
        return pairs

    if verb in NON_VERBS or not rest:
        return []
    if subject in {"i", "we", "you"}:
        pairs.append((f"What do you {verb}?", _phrase(rest)))
        frame = "What do you"
    else:
        pairs.append((f"What does {subject} {verb}?", _phrase(rest)))
        frame = f"What does {subject}"
    prep_pair = _preposition_pair(verb, rest, frame)
    if prep_pair:
        pairs.append(prep_pair)
    return pairs


def _preposition_pair(verb: str, rest: list[str], frame: str) -> tuple[str, str] | None:
    for p, token in enumerate(rest):
        if token in PREPOSITIONS and rest[p + 1 :]:
            lead = _phrase([verb] + rest[: p + 1])
            return (f"{frame} {lead}?", _phrase(rest[p + 1 :]))
    return None


def generate_pairs(
    utterances: Iterable[str],
    intent: str,
    provider: QAProvider = rule_based_pairs,
    cap: int = 4,
) -> QAPairSet:
    """Run the provider over every utterance and collect the stamped pairs.

    A provider failure or an invalid pair skips that utterance's output with
    a warning; it never aborts the set. At most ``cap`` pairs are kept per
    utterance.
    """
    collected: list[QAPair] = []
    for text in utterances:
        try:
            raw = provider(text)
        except Exception:
            logger.warning("QA provider failed on %r; skipping", text)
            continue
        if not raw:
            logger.warning("no QA pairs generated for %r", text)
            continue
        for question, answer in raw[:cap]:
            try:
                collected.append(QAPair(question, answer, text, intent))
            except ValueError:
                logger.warning("provider emitted an invalid pair for %r; skipping", text)
    return QAPairSet(intent, tuple(collected))


def load_pairs(path) -> list[QAPairSet]:
    """Load externally generated pairs, grouped by intent in file order."""
    grouped: dict[str, list[QAPair]] = {}
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise RecordError(str(path), line_no, f"invalid JSON: {exc.msg}") from exc
            try:
                pair = QAPair(
                    str(record["question"]),
                    str(record["answer"]),
                    str(record.get("source_text", "")),
                    str(record["intent"]),
                )
            except KeyError as exc:
                raise RecordError(str(path), line_no, f"missing field {exc}") from exc
            except ValueError as exc:
                raise RecordError(str(path), line_no, str(exc)) from exc
            grouped.setdefault(pair.intent, []).append(pair)
    return [QAPairSet(intent, tuple(pairs)) for intent, pairs in grouped.items()]


def save_pairs(sets: list[QAPairSet], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for pair_set in sets:
            for pair in pair_set.pairs:
                fh.write(
                    json.dumps(
                        {
                            "question": pair.question,
                            "answer": pair.answer,
                            "source_text": pair.source_text,
                            "intent": pair.intent,
                        }
                    )
                    + "\n"
                )

"""Labeled utterance corpora, ambiguous test examples and auxiliary lexicons.

File formats:
  * corpus / ambiguous set: UTF-8, one JSON object per line with keys
    ``"text"`` and ``"intent"``; a record carrying the optional key
    ``"intent_b"`` is an ambiguous test example, not a training utterance.
  * hypernym lexicon: UTF-8 TSV with three columns (word_a, word_b,
    hypernym); ``#``-prefixed lines are comments.
"""

from __future__ import annotations

import json
import random
import re
from dataclasses import dataclass, field

from clarifier.exceptions import CorpusError, RecordError, UnknownIntentError

_WS_RUN = re.compile(r"\s+")


def normalize_text(text: str) -> str:
    """Trim and collapse internal whitespace runs. Casing is preserved."""
    return _WS_RUN.sub(" ", text.strip())


@dataclass(frozen=True)
class LabeledUtterance:
    """A single training sentence with its annotated intent."""

    text: str
    intent: str

    def __post_init__(self):
        if not self.text.strip():
            raise ValueError("utterance text must be non-empty")
        if not self.intent:
            raise ValueError("utterance intent must be non-empty")


@dataclass(frozen=True)
class Corpus:
    """An ordered collection of labeled utterances over at least two intents.

    ``intents`` lists the intent inventory in first-appearance order and is
    derived from the utterances when not given explicitly.
    """

    utterances: tuple[LabeledUtterance, ...]
    intents: tuple[str, ...] = field(default=())

    def __post_init__(self):
        if not self.intents:
            seen: dict[str, None] = {}
            for u in self.utterances:
                seen.setdefault(u.intent, None)
            object.__setattr__(self, "intents", tuple(seen))
        if len(set(self.intents)) != len(self.intents):
            raise CorpusError("intent inventory contains duplicates")
        inventory = set(self.intents)
        for u in self.utterances:
            if u.intent not in inventory:
                raise CorpusError(f"utterance intent {u.intent!r} not in inventory")
        if len(self.intents) < 2:
            raise CorpusError("a corpus needs at least two intents")

    def __len__(self) -> int:
        return len(self.utterances)

    def by_intent(self, intent: str) -> list[LabeledUtterance]:
        if intent not in self.intents:
            raise UnknownIntentError(intent)
        return [u for u in self.utterances if u.intent == intent]


@dataclass(frozen=True)
class AmbiguousExample:
    """A test utterance annotated with the two intents it blends.

    The pair is order-insensitive: evaluation treats {intent_a, intent_b}
    as an unordered set.
    """

    text: str
    intent_a: str
    intent_b: str

    def __post_init__(self):
        if self.intent_a == self.intent_b:
            raise ValueError("an ambiguous example needs two distinct intents")

    @property
    def pair(self) -> frozenset[str]:
        return frozenset((self.intent_a, self.intent_b))


class HypernymLexicon:
    """Symmetric (word, word) -> hypernym lookup backed by a flat TSV file."""

    def __init__(self, entries: dict[frozenset[str], str] | None = None):
        self._entries = dict(entries or {})

    @classmethod
    def from_pairs(cls, triples: list[tuple[str, str, str]]) -> "HypernymLexicon":
        entries = {}
        for a, b, hyper in triples:
            entries[frozenset((a.lower(), b.lower()))] = hyper.lower()
        return cls(entries)

    def lookup(self, a: str, b: str) -> str | None:
        return self._entries.get(frozenset((a.lower(), b.lower())))

    def pairs(self) -> list[tuple[str, str, str]]:
        out = []
        for key, hyper in self._entries.items():
            words = sorted(key)
            if len(words) == 1:
                words = words * 2
            out.append((words[0], words[1], hyper))
        return sorted(out)

    def __len__(self) -> int:
        return len(self._entries)


def _parse_record(path: str, line_no: int, line: str) -> dict:
    try:
        record = json.loads(line)
    except json.JSONDecodeError as exc:
        raise RecordError(str(path), line_no, f"invalid JSON: {exc.msg}") from exc
    if not isinstance(record, dict):
        raise RecordError(str(path), line_no, "record is not a JSON object")
    text = normalize_text(str(record.get("text", "")))
    if not text:
        raise RecordError(str(path), line_no, "empty text field")
    if not record.get("intent"):
        raise RecordError(str(path), line_no, "missing intent field")
    record["text"] = text
    return record


def _read_records(path) -> list[tuple[int, dict]]:
    records = []
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            records.append((line_no, _parse_record(str(path), line_no, line)))
    return records


def load_corpus(path) -> Corpus:
    """Load training utterances from a JSON-lines file.

    Records marked with ``intent_b`` are ambiguous test examples, not
    training data; they are skipped here and read by :func:`load_ambiguous`.
    Duplicate (text, intent) records are preserved and intent order follows
    first appearance in the file.
    """
    utterances = []
    for _, record in _read_records(path):
        if "intent_b" in record:
            continue
        utterances.append(LabeledUtterance(record["text"], str(record["intent"])))
    if not utterances:
        raise CorpusError(f"{path}: no training records")
    return Corpus(tuple(utterances))


def save_corpus(corpus: Corpus, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for u in corpus.utterances:
            fh.write(json.dumps({"text": u.text, "intent": u.intent}) + "\n")


def load_ambiguous(path, corpus: Corpus | None = None) -> list[AmbiguousExample]:
    """Load ambiguous test examples (records carrying ``intent_b``).

    When ``corpus`` is given, both intents of every example must exist in
    its inventory.
    """
    examples = []
    for line_no, record in _read_records(path):
        if "intent_b" not in record:
            continue
        example = AmbiguousExample(
            record["text"], str(record["intent"]), str(record["intent_b"])
        )
        if corpus is not None:
            for intent in (example.intent_a, example.intent_b):
                if intent not in corpus.intents:
                    raise RecordError(str(path), line_no, f"unknown intent {intent!r}")
        examples.append(example)
    return examples


def save_ambiguous(examples: list[AmbiguousExample], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for ex in examples:
            fh.write(
                json.dumps(
                    {"text": ex.text, "intent": ex.intent_a, "intent_b": ex.intent_b}
                )
                + "\n"
            )


def load_hypernyms(path) -> HypernymLexicon:
    triples = []
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            stripped = line.strip()
            if not stripped or stripped.startswith("#"):
                continue
            columns = stripped.split("\t")
            if len(columns) != 3:
                raise RecordError(str(path), line_no, "expected three tab-separated columns")
            triples.append((columns[0], columns[1], columns[2]))
    return HypernymLexicon.from_pairs(triples)


def save_hypernyms(lexicon: HypernymLexicon, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("# word_a\tword_b\thypernym\n")
        for a, b, hyper in lexicon.pairs():
            fh.write(f"{a}\t{b}\t{hyper}\n")


def split(corpus: Corpus, holdout_fraction: float, seed: int) -> tuple[Corpus, Corpus]:
    """Stratified train/holdout split, deterministic for a fixed seed.

    Stratification is per intent and, within an intent, per duplicate text
    group: each group of identical records contributes proportionally to the
    holdout, so repeated utterances keep a near-constant train share instead
    of being stranded wholesale. Every intent contributes at least one
    utterance to each side, so each intent needs at least two utterances.
    The union of both parts equals the input as a multiset.
    """
    if not 0.0 < holdout_fraction < 1.0:
        raise ValueError("holdout_fraction must lie in (0, 1)")
    rng = random.Random(seed)
    train_idx: list[int] = []
    hold_idx: list[int] = []
    for intent in corpus.intents:
        indices = [i for i, u in enumerate(corpus.utterances) if u.intent == intent]
        if len(indices) < 2:
            raise CorpusError(
                f"intent {intent!r} has {len(indices)} utterance(s); need >= 2 to stratify"
            )
        n_hold = round(holdout_fraction * len(indices))
        n_hold = min(max(n_hold, 1), len(indices) - 1)

        groups: dict[str, list[int]] = {}
        for i in indices:
            groups.setdefault(corpus.utterances[i].text, []).append(i)
        quotas = {text: len(g) * holdout_fraction for text, g in groups.items()}
        take = {text: int(quotas[text]) for text in groups}
        short = n_hold - sum(take.values())
        remainders = sorted(
            groups, key=lambda text: (-(quotas[text] - take[text]), rng.random())
        )
        for text in remainders:
            if short <= 0:
                break
            if take[text] < len(groups[text]):
                take[text] += 1
                short -= 1
        for text in sorted(groups, key=lambda t: rng.random()):
            if short <= 0:
                break
            extra = min(len(groups[text]) - take[text], short)
            take[text] += extra
            short -= extra
        for text, group in groups.items():
            chosen = group[:]
            rng.shuffle(chosen)
            hold_idx.extend(chosen[: take[text]])
            train_idx.extend(chosen[take[text] :])
    train = tuple(corpus.utterances[i] for i in sorted(train_idx))
    hold = tuple(corpus.utterances[i] for i in sorted(hold_idx))
    return Corpus(train, corpus.intents), Corpus(hold, corpus.intents)

"""Turning a selected QA pair into one user-facing clarifying question.

The QG path runs a ladder of mutually exclusive combination rules over the
two selected questions (person normalization, then structural matching on a
heuristic shallow parse); exactly one rule is recorded per emitted question.
The template path fills a generalized template with each intent's
highest-TF-IDF discriminative phrase and exists so that every detected
ambiguity receives some question.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from enum import Enum
from typing import Callable

from clarifier.corpus import Corpus, HypernymLexicon
from clarifier.exceptions import CorpusError, UnknownIntentError
from clarifier.qgen import (
    AUXILIARIES,
    DETERMINERS,
    NON_VERBS,
    PREPOSITIONS,
    SUBJECT_PRONOUNS,
    WANT_VERBS,
    words,
)
from clarifier.selector import DiscriminativeSelection

WH_WORDS = {"what", "which", "who", "whom", "whose", "when", "where", "why", "how"}
CONTROL_VERBS = WANT_VERBS | {"like", "going"}
BE_FORMS = {"am", "is", "are", "was", "were", "be", "been", "being"}

DEFAULT_TEMPLATES = (
    "Are you talking about {A} or {B}?",
    "Do you mean {A} or {B}?",
)

ParaphraseHook = Callable[[str], str]

PARAPHRASE_HOOKS: dict[str, ParaphraseHook] = {
    "identity": lambda text: text,
}


class Provenance(Enum):
    QG_PATH = "qg"
    TEMPLATE_PATH = "template"


@dataclass(frozen=True)
class ClarifyingQuestion:
    """The surfaced question plus the two answer options and their intents."""

    text: str
    option_j: str
    option_k: str
    intent_j: str
    intent_k: str
    provenance: Provenance
    applied_rule: str | None = None

    def __post_init__(self):
        if not self.text.strip():
            raise ValueError("question text must be non-empty")
        if not self.text.endswith("?"):
            raise ValueError("question must end with '?'")
        if self.option_j == self.option_k:
            raise ValueError("the two answer options must differ")
        if (self.provenance is Provenance.QG_PATH) != (self.applied_rule is not None):
            raise ValueError("applied_rule is recorded exactly for QG-path questions")


@dataclass(frozen=True)
class DiscriminativePhrase:
    """A high-TF-IDF n-gram characteristic of one intent."""

    intent: str
    phrase: str
    weight: float

    def __post_init__(self):
        if self.weight <= 0:
            raise ValueError("phrase weight must be positive")


@dataclass(frozen=True)
class ParsedClause:
    main_verb: str
    direct_object: str  # head noun, '' when the verb has no object
    object_modifiers: tuple[str, ...]
    subject_person: str  # 'first' | 'second' | 'third'


def shallow_parse(text: str) -> ParsedClause | None:
    """Heuristic main-verb / direct-object extraction; None when no verb is found.

    Handles wh-questions, auxiliary and control-verb chains ("do you want
    to ..."), copulas (main verb ``be``) and bare imperatives. The object is
    the last head of the noun phrase following the verb, cut at the first
    preposition; tokens between the determiner and the head are modifiers.
    """
    tokens = words(text)
    if not tokens:
        return None
    i = 0
    if tokens[i] in WH_WORDS:
        i += 1
    saw_copula = saw_do = False
    subject_person = "third"
    while i < len(tokens):
        token = tokens[i]
        if token in BE_FORMS:
            saw_copula = True
        elif token == "do" or token == "does" or token == "did":
            saw_do = True
        elif token not in AUXILIARIES:
            break
        i += 1
    if i < len(tokens) and tokens[i] in SUBJECT_PRONOUNS:
        subject_person = {"i": "first", "we": "first", "you": "second"}.get(
            tokens[i], "third"
        )
        i += 1
    # Skip control chains like "want to", "would like to", "need to".
    while i < len(tokens):
        token = tokens[i]
        if token in CONTROL_VERBS or token == "to":
            i += 1
        elif token in AUXILIARIES and i + 1 < len(tokens):
            if token in BE_FORMS:
                saw_copula = True
            i += 1
        else:
            break
    verb = None
    if i < len(tokens) and tokens[i] not in NON_VERBS and tokens[i] not in WH_WORDS:
        verb = tokens[i]
        i += 1
    elif i < len(tokens) and tokens[i] in {"do", "did", "does"}:
        verb = "do"
        i += 1
    elif saw_copula:
        verb = "be"
    elif saw_do and i >= len(tokens):
        verb = "do"
    if verb is None:
        return None
    # Single bare token is not enough evidence of a verb ("hello").
    if verb == tokens[0] and len(tokens) == 1:
        return None

    noun_phrase: list[str] = []
    for token in tokens[i:]:
        if token in PREPOSITIONS:
            break
        noun_phrase.append(token)
    content = [t for t in noun_phrase if t not in DETERMINERS]
    if content:
        head, modifiers = content[-1], tuple(content[:-1])
    else:
        head, modifiers = "", ()
    return ParsedClause(verb, head, modifiers, subject_person)


_TOKEN_SHAPE = re.compile(r"([A-Za-z']+)(.*)", re.DOTALL)
_SECOND_PERSON = {"you": "me", "your": "my", "yours": "mine"}


def _flip_person(text: str) -> tuple[str, bool]:
    """Rewrite user-perspective fragments for agent-facing delivery.

    Applies only when a first-person subject is present: "I VERB" becomes
    "you want to VERB" (just "you VERB" for want/need themselves) and the
    text's own second-person pronouns flip to first person. Tokens inserted
    by the rewrite are never re-flipped.
    """
    raw = text.split(" ")
    bare = [m.group(1).lower() if (m := _TOKEN_SHAPE.match(t)) else "" for t in raw]
    if "i" not in bare:
        return text, False

    out: list[str] = []
    i = 0
    while i < len(raw):
        if bare[i] == "i":
            if i + 1 < len(raw) and bare[i + 1] and bare[i + 1] not in WANT_VERBS | {"like"}:
                out.extend(["you", "want", "to", raw[i + 1]])
                i += 2
            else:
                out.append("you")
                i += 1
            continue
        if bare[i] in _SECOND_PERSON:
            shape = _TOKEN_SHAPE.match(raw[i])
            out.append(_SECOND_PERSON[bare[i]] + (shape.group(2) if shape else ""))
            i += 1
            continue
        out.append(raw[i])
        i += 1
    return " ".join(out), True


def _normalize_person(text: str) -> tuple[str, bool]:
    new_text, changed = _flip_person(text)
    if changed and new_text:
        new_text = new_text[0].upper() + new_text[1:]
    return new_text, changed


def _ensure_question(text: str) -> str:
    text = text.strip()
    return text if text.endswith("?") else text + "?"


def combine(
    selection: DiscriminativeSelection,
    query: str,
    hypernyms: HypernymLexicon,
    paraphrase: ParaphraseHook = PARAPHRASE_HOOKS["identity"],
) -> ClarifyingQuestion | None:
    """Apply the first matching combination rule; None signals template fallback.

    R1  both questions need a person flip and coincide afterwards: use the
        rewritten text directly.
    R2  same main verb, same direct object, differing modifiers: a type
        question via the modifiers' hypernym, else a disjunctive question
        offering both modifiers.
    R3  same main verb with no object: reuse the verb and offer both answers.
    R4  different verbs with a hypernym in the lexicon: substitute it.
    R5  otherwise: a generic do-question with both answers.

    None is returned only when both questions fail the shallow parse (or the
    two selected answers coincide, which cannot yield distinct options).
    """
    if not selection.gate_passed:
        raise ValueError("combine requires a selection that passed the gate")
    answer_j, answer_k = selection.pair_j.answer, selection.pair_k.answer
    if answer_j.strip() == answer_k.strip():
        return None

    question_j, changed_j = _normalize_person(selection.pair_j.question)
    question_k, changed_k = _normalize_person(selection.pair_k.question)

    rule = None
    text = None
    if (changed_j or changed_k) and words(question_j) == words(question_k):
        rule, text = "R1", _ensure_question(question_j)
    else:
        parse_j = shallow_parse(question_j)
        parse_k = shallow_parse(question_k)
        if parse_j is None and parse_k is None:
            return None
        if parse_j is not None and parse_k is not None:
            if parse_j.main_verb == parse_k.main_verb:
                verb = parse_j.main_verb
                mods_j = [m for m in parse_j.object_modifiers if m not in parse_k.object_modifiers]
                mods_k = [m for m in parse_k.object_modifiers if m not in parse_j.object_modifiers]
                if (
                    parse_j.direct_object
                    and parse_j.direct_object == parse_k.direct_object
                    and mods_j
                    and mods_k
                ):
                    hyper = hypernyms.lookup(mods_j[0], mods_k[0])
                    if hyper:
                        rule = "R2"
                        text = f"What {hyper} of {parse_j.direct_object} do you want to {verb}?"
                    else:
                        rule = "R2"
                        text = (
                            f"Do you want to {verb} a {mods_j[0]} or a {mods_k[0]} "
                            f"{parse_j.direct_object}?"
                        )
                elif not parse_j.direct_object and not parse_k.direct_object:
                    rule, text = "R3", f"Do you want to {verb}: {answer_j} or {answer_k}?"
            else:
                hyper = hypernyms.lookup(parse_j.main_verb, parse_k.main_verb)
                if hyper:
                    rule = "R4"
                    text = f"What would you like to {hyper}: {answer_j} or {answer_k}?"
        if rule is None:
            rule, text = "R5", f"What would you like to do: {answer_j} or {answer_k}?"

    return ClarifyingQuestion(
        text=_ensure_question(paraphrase(text)),
        option_j=answer_j,
        option_k=answer_k,
        intent_j=selection.pair_j.intent,
        intent_k=selection.pair_k.intent,
        provenance=Provenance.QG_PATH,
        applied_rule=rule,
    )


def _intent_documents(corpus: Corpus) -> dict[str, list[str]]:
    docs: dict[str, list[str]] = {intent: [] for intent in corpus.intents}
    for u in corpus.utterances:
        docs[u.intent].extend(words(u.text))
    return docs


def discriminative_phrases(
    corpus: Corpus, intent: str, top_n: int = 5
) -> list[DiscriminativePhrase]:
    """Top TF-IDF n-grams (n <= 3) of an intent, one document per intent.

    Ranking ties prefer the shorter n-gram (crisper answer options), then
    first occurrence in the intent's concatenated utterances, then
    lexicographic order.
    """
    if intent not in corpus.intents:
        raise UnknownIntentError(intent)
    if len(corpus.intents) < 2:
        raise CorpusError("phrase IDF needs at least two intents")
    if top_n <= 0:
        return []
    docs = _intent_documents(corpus)
    n_docs = len(docs)

    def doc_ngrams(tokens: list[str]) -> dict[str, tuple[int, int]]:
        stats: dict[str, tuple[int, int]] = {}  # gram -> (count, first position)
        for n in range(1, 4):
            for pos in range(len(tokens) - n + 1):
                gram = " ".join(tokens[pos : pos + n])
                count, first = stats.get(gram, (0, pos))
                stats[gram] = (count + 1, first)
        return stats

    document_frequency: dict[str, int] = {}
    per_intent = {name: doc_ngrams(tokens) for name, tokens in docs.items()}
    for stats in per_intent.values():
        for gram in stats:
            document_frequency[gram] = document_frequency.get(gram, 0) + 1

    ranked = []
    for gram, (count, first) in per_intent[intent].items():
        idf = math.log((1 + n_docs) / (1 + document_frequency[gram])) + 1.0
        ranked.append((-count * idf, len(gram.split()), first, gram))
    ranked.sort()
    return [
        DiscriminativePhrase(intent, gram, -neg_weight)
        for neg_weight, _, _, gram in ranked[:top_n]
    ]


def template_question(
    phrases_j: list[DiscriminativePhrase],
    phrases_k: list[DiscriminativePhrase],
    templates: tuple[str, ...] = DEFAULT_TEMPLATES,
    rotation: int = 0,
) -> ClarifyingQuestion:
    """Fill the rotation-th template with one discriminative phrase per intent.

    When the top phrases collide after normalization, the next-ranked phrase
    substitutes on one side before the other side advances; fully exhausted
    lists are an error.
    """
    if not phrases_j or not phrases_k:
        raise ValueError("both intents need at least one discriminative phrase")
    if phrases_j[0].intent == phrases_k[0].intent:
        raise ValueError("the two phrase lists must come from different intents")
    if not templates:
        raise ValueError("the template list must be non-empty")
    chosen = None
    for dp_j in phrases_j:
        for dp_k in phrases_k:
            if words(dp_j.phrase) != words(dp_k.phrase):
                chosen = (dp_j, dp_k)
                break
        if chosen:
            break
    if chosen is None:
        raise ValueError("all discriminative phrases of the two intents collide")
    dp_j, dp_k = chosen
    template = templates[rotation % len(templates)]
    return ClarifyingQuestion(
        text=template.format(A=dp_j.phrase, B=dp_k.phrase),
        option_j=dp_j.phrase,
        option_k=dp_k.phrase,
        intent_j=dp_j.intent,
        intent_k=dp_k.intent,
        provenance=Provenance.TEMPLATE_PATH,
    )

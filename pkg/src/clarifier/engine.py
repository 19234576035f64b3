"""Pipeline orchestration: build, session handling, evaluation, persistence.

A built engine bundles the calibrated classifier, per-intent QA-pair sets,
per-intent discriminative phrase tables, the word-vector table and the
hypernym lexicon into one immutable, loadable artifact. Sessions run the
two-turn flow: classify the query, ask at most one clarifying question when
the verdict is ambiguous, resolve the reply.
"""

from __future__ import annotations

import json
import uuid
import zlib
from dataclasses import asdict, dataclass, replace
from enum import Enum

import numpy as np

from clarifier import classifier, qgen, selector
from clarifier.classifier import (
    IntentDistribution,
    IntentModel,
    Thresholds,
    TrainingParams,
    VerdictKind,
    detect_ambiguity,
    predict,
)
from clarifier.corpus import AmbiguousExample, Corpus, HypernymLexicon, split
from clarifier.encoder import AveragingEncoder, WordVectorTable
from clarifier.exceptions import ArtifactError, SessionClosedError
from clarifier.qgen import QAPair, QAPairSet
from clarifier.resolver import DEFAULT_NONE_PHRASES, NoneLexicon, Outcome, resolve
from clarifier.selector import ScoreWeights, select_top
from clarifier.surface import (
    DEFAULT_TEMPLATES,
    PARAPHRASE_HOOKS,
    ClarifyingQuestion,
    DiscriminativePhrase,
    Provenance,
    combine,
    discriminative_phrases,
    template_question,
)

ARTIFACT_FORMAT_VERSION = 1


@dataclass(frozen=True)
class EngineConfig:
    """Every tunable the pipeline exposes, JSON-mirrored in the config file."""

    thresholds: Thresholds = Thresholds()
    score_weights: ScoreWeights = ScoreWeights()
    gate: float = 0.7
    top_n_phrases: int = 5
    none_phrases: tuple[str, ...] = DEFAULT_NONE_PHRASES
    templates: tuple[str, ...] = DEFAULT_TEMPLATES
    pairs_per_utterance: int = 4
    cross_product_cap: int = 10_000
    paraphrase_hook: str = "identity"
    candidate_count: int = 3
    holdout_fraction: float = 0.2
    training: TrainingParams = TrainingParams()

    def to_dict(self) -> dict:
        data = asdict(self)
        data["none_phrases"] = list(self.none_phrases)
        data["templates"] = list(self.templates)
        return data

    @classmethod
    def from_dict(cls, data: dict) -> "EngineConfig":
        kwargs = dict(data)
        if "thresholds" in kwargs:
            kwargs["thresholds"] = Thresholds(**kwargs["thresholds"])
        if "score_weights" in kwargs:
            kwargs["score_weights"] = ScoreWeights(**kwargs["score_weights"])
        if "training" in kwargs:
            kwargs["training"] = TrainingParams(**kwargs["training"])
        for key in ("none_phrases", "templates"):
            if key in kwargs:
                kwargs[key] = tuple(kwargs[key])
        return cls(**kwargs)


def load_config(path) -> EngineConfig:
    with open(path, encoding="utf-8") as fh:
        return EngineConfig.from_dict(json.load(fh))


def save_config(config: EngineConfig, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(config.to_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")


class SessionState(Enum):
    AWAITING_QUERY = "awaiting_query"
    AWAITING_CLARIFICATION = "awaiting_clarification"
    CLOSED = "closed"


@dataclass(frozen=True)
class PendingClarification:
    """Everything the resolver needs once the user answers."""

    question: ClarifyingQuestion
    query: str
    prob_j: float
    prob_k: float


@dataclass(frozen=True)
class Session:
    id: str
    state: SessionState = SessionState.AWAITING_QUERY
    transcript: tuple[tuple[str, str], ...] = ()
    pending: PendingClarification | None = None
    final_intent: str | None = None


class ReplyKind(Enum):
    FINAL = "final"
    CLARIFY = "clarify"
    REJECTED = "rejected"


@dataclass(frozen=True)
class EngineReply:
    kind: ReplyKind
    intent: str | None = None
    confidence: float | None = None
    question: ClarifyingQuestion | None = None
    reason: str | None = None

    def __post_init__(self):
        if self.confidence is not None and not 0.0 <= self.confidence <= 1.0:
            raise ValueError("confidence must lie in [0, 1]")


@dataclass(frozen=True)
class InspectReport:
    """Debug view of one query's path through the pipeline."""

    distribution: IntentDistribution
    verdict: classifier.AmbiguityVerdict
    question: ClarifyingQuestion | None
    matrix: list[dict]


def _reply_text(reply: EngineReply) -> str:
    if reply.kind is ReplyKind.CLARIFY:
        return reply.question.text
    if reply.kind is ReplyKind.FINAL:
        return f"Got it, routing this to '{reply.intent}'."
    return "Okay, none of those then. Could you start over with more detail?"


class Engine:
    """An immutable built artifact; sessions and evaluations run against it."""

    def __init__(
        self,
        model: IntentModel,
        qa_sets: dict[str, QAPairSet],
        phrases: dict[str, list[DiscriminativePhrase]],
        vectors: WordVectorTable,
        hypernyms: HypernymLexicon,
        config: EngineConfig,
    ):
        self.model = model
        self.qa_sets = qa_sets
        self.phrases = phrases
        self.vectors = vectors
        self.hypernyms = hypernyms
        self.config = config
        self.encoder = AveragingEncoder(vectors)
        self.none_lexicon = NoneLexicon(config.none_phrases)
        self._paraphrase = PARAPHRASE_HOOKS[config.paraphrase_hook]

    # -- session flow ------------------------------------------------------

    def new_session(self) -> Session:
        return Session(id=uuid.uuid4().hex)

    def classify(self, text: str) -> IntentDistribution:
        return predict(self.model, text)

    def clarifying_question(
        self, query: str, j: str, k: str, rotation: int | None = None
    ) -> ClarifyingQuestion:
        """One question for the (j, k) ambiguity: QG path if the best selection
        passes the gate and combines, template fallback otherwise."""
        set_j = self.qa_sets.get(j) or QAPairSet(j, ())
        set_k = self.qa_sets.get(k) or QAPairSet(k, ())
        candidates = select_top(
            query,
            set_j,
            set_k,
            self.encoder,
            self.config.score_weights,
            self.config.gate,
            n=self.config.candidate_count,
            cross_product_cap=self.config.cross_product_cap,
        )
        for candidate in candidates:
            if not candidate.gate_passed:
                break
            question = combine(candidate, query, self.hypernyms, self._paraphrase)
            if question is not None:
                return question
        if rotation is None:
            # Deterministic per query so service replies depend only on
            # (artifact, session history), yet templates still vary.
            rotation = zlib.crc32(query.encode("utf-8")) % max(len(self.config.templates), 1)
        return template_question(
            self.phrases[j], self.phrases[k], self.config.templates, rotation
        )

    def handle_message(self, session: Session, text: str) -> tuple[Session, EngineReply]:
        """Advance the session state machine by one user message."""
        if session.state is SessionState.CLOSED:
            raise SessionClosedError(session.id)
        if not text.strip():
            raise ValueError("message text must be non-empty")

        if session.state is SessionState.AWAITING_QUERY:
            dist = self.classify(text)
            verdict = detect_ambiguity(dist, self.config.thresholds)
            if verdict.kind is VerdictKind.UNAMBIGUOUS:
                intent = dist.intents[verdict.top]
                reply = EngineReply(
                    ReplyKind.FINAL,
                    intent=intent,
                    confidence=float(dist.probabilities[verdict.top]),
                )
                session = replace(
                    session,
                    state=SessionState.CLOSED,
                    final_intent=intent,
                    transcript=session.transcript
                    + (("user", text), ("system", _reply_text(reply))),
                )
                return session, reply
            # Self-ambiguity routes through the same top-2 clarification path.
            j, k = dist.intents[verdict.top], dist.intents[verdict.second]
            question = self.clarifying_question(text, j, k)
            reply = EngineReply(ReplyKind.CLARIFY, question=question)
            session = replace(
                session,
                state=SessionState.AWAITING_CLARIFICATION,
                pending=PendingClarification(
                    question,
                    text,
                    float(dist.probabilities[verdict.top]),
                    float(dist.probabilities[verdict.second]),
                ),
                transcript=session.transcript
                + (("user", text), ("system", _reply_text(reply))),
            )
            return session, reply

        pending = session.pending
        resolution = resolve(text, pending.question, self.encoder, self.none_lexicon)
        if resolution.outcome is Outcome.NEITHER:
            reply = EngineReply(ReplyKind.REJECTED, reason="neither option matched")
            session = replace(
                session,
                state=SessionState.CLOSED,
                pending=None,
                transcript=session.transcript
                + (("user", text), ("system", _reply_text(reply))),
            )
            return session, reply
        total = pending.prob_j + pending.prob_k
        if resolution.outcome is Outcome.INTENT_J:
            intent, confidence = pending.question.intent_j, pending.prob_j / total
        else:
            intent, confidence = pending.question.intent_k, pending.prob_k / total
        reply = EngineReply(ReplyKind.FINAL, intent=intent, confidence=confidence)
        session = replace(
            session,
            state=SessionState.CLOSED,
            pending=None,
            final_intent=intent,
            transcript=session.transcript
            + (("user", text), ("system", _reply_text(reply))),
        )
        return session, reply

    # -- evaluation --------------------------------------------------------

    def evaluate_topk(self, test: Corpus) -> dict:
        """Micro-averaged top-1 and top-2 accuracy/F1 over a labeled corpus."""
        if not test.utterances:
            raise ValueError("evaluation needs a non-empty test corpus")
        hits1 = hits2 = 0
        for u in test.utterances:
            dist = self.classify(u.text)
            order = sorted(
                range(len(dist.probabilities)),
                key=lambda i: (-dist.probabilities[i], i),
            )
            gold = dist.intents.index(u.intent)
            hits1 += gold == order[0]
            hits2 += gold in order[:2]
        n = len(test.utterances)
        top1, top2 = hits1 / n, hits2 / n
        # Single-label micro precision and recall both equal accuracy.
        return {
            "count": n,
            "accuracy_top1": top1,
            "accuracy_top2": top2,
            "f1_top1": top1,
            "f1_top2": top2,
        }

    def evaluate_ambiguity(
        self,
        examples: list[AmbiguousExample],
        t2_values: tuple[float, ...] = (0.1, 0.2, 0.3, 0.4),
        histogram_bins: int = 20,
    ) -> dict:
        """Unordered top-2 pair matching across a sweep of t2 thresholds.

        An example counts as detected when the verdict is pair-ambiguous and
        as matched when additionally the top-2 intents equal the annotated
        pair as an unordered set. Top-2 margins are returned as histogram
        data (bin edges plus counts).
        """
        margins = []
        top_pairs = []
        for example in examples:
            dist = self.classify(example.text)
            order = sorted(
                range(len(dist.probabilities)),
                key=lambda i: (-dist.probabilities[i], i),
            )
            margins.append(
                float(dist.probabilities[order[0]] - dist.probabilities[order[1]])
            )
            top_pairs.append(
                (
                    frozenset((dist.intents[order[0]], dist.intents[order[1]])),
                    float(dist.probabilities[order[0]]),
                )
            )
        rows = []
        t1 = self.config.thresholds.t1
        for t2 in t2_values:
            detected = matched = 0
            for example, margin, (pair, top_p) in zip(examples, margins, top_pairs):
                if top_p >= t1 and margin < t2:
                    detected += 1
                    if pair == example.pair:
                        matched += 1
            rows.append(
                {
                    "t2": t2,
                    "total": len(examples),
                    "detected": detected,
                    "matched": matched,
                    "match_rate": matched / len(examples) if examples else 0.0,
                }
            )
        counts, edges = np.histogram(margins, bins=histogram_bins, range=(0.0, 1.0))
        return {
            "sweep": rows,
            "margin_histogram": {
                "edges": [float(e) for e in edges],
                "counts": [int(c) for c in counts],
            },
        }

    def evaluate_coverage(
        self, examples: list[AmbiguousExample], gates: tuple[float, ...] | None = None
    ) -> list[dict]:
        """QG-path versus template fractions over the detected-ambiguous examples.

        One row per gate value (default: the configured gate). Every detected
        example yields exactly one question, so the fractions sum to 1.
        """
        gates = gates or (self.config.gate,)
        detected: list[tuple[str, str, str]] = []
        for example in examples:
            dist = self.classify(example.text)
            verdict = detect_ambiguity(dist, self.config.thresholds)
            if verdict.kind is VerdictKind.UNAMBIGUOUS:
                continue
            detected.append(
                (example.text, dist.intents[verdict.top], dist.intents[verdict.second])
            )
        rows = []
        for gate in gates:
            engine = self.with_gate(gate)
            qg = 0
            for rotation, (text, j, k) in enumerate(detected):
                question = engine.clarifying_question(text, j, k, rotation=rotation)
                qg += question.provenance is Provenance.QG_PATH
            total = len(detected)
            rows.append(
                {
                    "gate": gate,
                    "detected": total,
                    "qg_fraction": qg / total if total else 0.0,
                    "template_fraction": (total - qg) / total if total else 0.0,
                }
            )
        return rows

    def with_gate(self, gate: float) -> "Engine":
        if gate == self.config.gate:
            return self
        clone = Engine.__new__(Engine)
        clone.__dict__.update(self.__dict__)
        clone.config = replace(self.config, gate=gate)
        return clone

    def inspect(self, query: str) -> InspectReport:
        """Everything the pipeline computes for one query, for debugging."""
        dist = self.classify(query)
        verdict = detect_ambiguity(dist, self.config.thresholds)
        question = None
        matrix: list[dict] = []
        if verdict.kind is not VerdictKind.UNAMBIGUOUS:
            j, k = dist.intents[verdict.top], dist.intents[verdict.second]
            question = self.clarifying_question(query, j, k)
            set_j = self.qa_sets.get(j) or QAPairSet(j, ())
            set_k = self.qa_sets.get(k) or QAPairSet(k, ())
            matrix = list(
                selector.score_matrix(
                    query, set_j, set_k, self.encoder, self.config.score_weights
                )
            )
        return InspectReport(dist, verdict, question, matrix)

    # -- persistence -------------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "format_version": ARTIFACT_FORMAT_VERSION,
            "config": self.config.to_dict(),
            "model": classifier.model_to_dict(self.model),
            "qa_sets": {
                intent: [
                    {
                        "question": p.question,
                        "answer": p.answer,
                        "source_text": p.source_text,
                    }
                    for p in pair_set.pairs
                ]
                for intent, pair_set in self.qa_sets.items()
            },
            "phrases": {
                intent: [{"phrase": p.phrase, "weight": p.weight} for p in items]
                for intent, items in self.phrases.items()
            },
            "vectors": {
                "dim": self.vectors.dim,
                "tokens": {t: [float(x) for x in self.vectors[t]] for t in self.vectors.tokens()},
            },
            "hypernyms": [list(t) for t in self.hypernyms.pairs()],
        }

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_dict(), fh, sort_keys=True, separators=(",", ":"))

    @classmethod
    def from_dict(cls, data: dict) -> "Engine":
        version = data.get("format_version")
        if version != ARTIFACT_FORMAT_VERSION:
            raise ArtifactError(f"unsupported artifact format version: {version!r}")
        model = classifier.model_from_dict(data["model"])
        qa_sets = {
            intent: QAPairSet(
                intent,
                tuple(
                    QAPair(p["question"], p["answer"], p["source_text"], intent)
                    for p in pairs
                ),
            )
            for intent, pairs in data["qa_sets"].items()
        }
        phrases = {
            intent: [
                DiscriminativePhrase(intent, p["phrase"], p["weight"]) for p in items
            ]
            for intent, items in data["phrases"].items()
        }
        vectors = WordVectorTable(
            {t: np.array(v) for t, v in data["vectors"]["tokens"].items()}
        )
        hypernyms = HypernymLexicon.from_pairs([tuple(t) for t in data["hypernyms"]])
        return cls(model, qa_sets, phrases, vectors, hypernyms,
                   EngineConfig.from_dict(data["config"]))


def build_engine(
    corpus: Corpus,
    config: EngineConfig,
    vectors: WordVectorTable,
    hypernyms: HypernymLexicon,
    external_pairs: list[QAPairSet] | None = None,
) -> Engine:
    """Train, calibrate and precompute everything into one artifact.

    The classifier is trained on an internal stratified split and calibrated
    on the held-out part. QA pairs and phrase tables are precomputed per
    intent from the full corpus; intents covered by ``external_pairs``
    use the loaded pairs instead of generated ones.
    """
    train_part, holdout = split(corpus, config.holdout_fraction, config.training.seed)
    model = classifier.train(train_part, config.training)
    model = classifier.calibrate(model, holdout)

    loaded = {s.intent: s for s in external_pairs or []}
    qa_sets = {}
    for intent in corpus.intents:
        if intent in loaded:
            qa_sets[intent] = loaded[intent]
        else:
            utterances = [u.text for u in corpus.utterances if u.intent == intent]
            qa_sets[intent] = qgen.generate_pairs(
                utterances, intent, cap=config.pairs_per_utterance
            )
    phrases = {
        intent: discriminative_phrases(corpus, intent, config.top_n_phrases)
        for intent in corpus.intents
    }
    return Engine(model, qa_sets, phrases, vectors, hypernyms, config)


def load_engine(path) -> Engine:
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ArtifactError(f"cannot load artifact {path}: {exc}") from exc
    return Engine.from_dict(data)

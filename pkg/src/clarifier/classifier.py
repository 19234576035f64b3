"""Linear intent classifier with softmax calibration and ambiguity verdicts.

The model is multinomial logistic regression over TF-IDF weighted word
unigrams and bigrams, trained by mini-batch gradient descent with L2
regularization. Probabilities are ``softmax(scores / temperature)``; the
temperature is fit on held-out data by golden-section search and never
changes the argmax.

A query is self-ambiguous when its top probability falls below ``t1`` and
pair-ambiguous between the top two intents j, k when ``p_j - p_k < t2``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from clarifier.corpus import Corpus
from clarifier.encoder import tokenize
from clarifier.exceptions import CorpusError


def ngrams(tokens: list[str], max_n: int = 2) -> list[str]:
    """Word n-grams up to ``max_n``, space-joined, in positional order."""
    out = []
    for n in range(1, max_n + 1):
        for i in range(len(tokens) - n + 1):
            out.append(" ".join(tokens[i : i + n]))
    return out


@dataclass(frozen=True)
class TextVectorizer:
    """Fixed vocabulary plus per-feature IDF weights.

    ``idf[i] = ln((1 + N) / (1 + df_i)) + 1`` over the N training utterances;
    the final feature vector is L2-normalized.
    """

    vocabulary: dict[str, int]
    idf: np.ndarray

    @classmethod
    def fit(cls, texts: list[str]) -> "TextVectorizer":
        vocabulary: dict[str, int] = {}
        df: dict[int, int] = {}
        for text in texts:
            seen = set()
            for gram in ngrams(tokenize(text)):
                index = vocabulary.setdefault(gram, len(vocabulary))
                if index not in seen:
                    seen.add(index)
                    df[index] = df.get(index, 0) + 1
        n_docs = len(texts)
        idf = np.array(
            [math.log((1 + n_docs) / (1 + df[i])) + 1.0 for i in range(len(vocabulary))]
        )
        return cls(vocabulary, idf)


def featurize(text: str, vectorizer: TextVectorizer) -> dict[int, float]:
    """Sparse TF-IDF vector of the in-vocabulary unigrams and bigrams of ``text``."""
    if not text.strip():
        raise ValueError("cannot featurize empty text")
    counts: dict[int, float] = {}
    for gram in ngrams(tokenize(text)):
        index = vectorizer.vocabulary.get(gram)
        if index is not None:
            counts[index] = counts.get(index, 0.0) + 1.0
    weighted = {i: c * float(vectorizer.idf[i]) for i, c in counts.items()}
    norm = math.sqrt(sum(w * w for w in weighted.values()))
    if norm > 0:
        weighted = {i: w / norm for i, w in weighted.items()}
    return weighted


def _to_dense(features: dict[int, float], width: int) -> np.ndarray:
    row = np.zeros(width)
    for i, w in features.items():
        row[i] = w
    return row


@dataclass(frozen=True)
class Thresholds:
    """Ambiguity thresholds: ``t1`` the confidence floor, ``t2`` the top-2 margin."""

    t1: float = 0.2
    t2: float = 0.3

    def __post_init__(self):
        for name, value in (("t1", self.t1), ("t2", self.t2)):
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {value}")


class VerdictKind(Enum):
    UNAMBIGUOUS = "unambiguous"
    SELF_AMBIGUOUS = "self_ambiguous"
    PAIR_AMBIGUOUS = "pair_ambiguous"


@dataclass(frozen=True)
class AmbiguityVerdict:
    """Outcome of the threshold rules, with the top-2 intent indices."""

    kind: VerdictKind
    top: int
    second: int


@dataclass(frozen=True)
class IntentDistribution:
    """Calibrated probabilities aligned with the model's intent order."""

    probabilities: np.ndarray
    intents: tuple[str, ...]

    def __post_init__(self):
        total = float(np.sum(self.probabilities))
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"probabilities sum to {total}, expected 1")

    def top_index(self) -> int:
        return int(np.lexsort((np.arange(len(self.probabilities)), -self.probabilities))[0])


@dataclass(frozen=True)
class TrainingParams:
    learning_rate: float = 0.5
    epochs: int = 300
    batch_size: int = 64
    l2: float = 1e-4
    seed: int = 0


@dataclass
class IntentModel:
    """Trained weights, biases and temperature over a fixed vocabulary."""

    weights: np.ndarray  # (m, features)
    bias: np.ndarray  # (m,)
    temperature: float
    vectorizer: TextVectorizer
    intents: tuple[str, ...]

    def __post_init__(self):
        if self.weights.shape[0] != len(self.intents):
            raise ValueError("one weight row per intent required")
        if self.temperature <= 0:
            raise ValueError("temperature must be positive")

    def logits(self, text: str) -> np.ndarray:
        features = featurize(text, self.vectorizer)
        row = _to_dense(features, self.weights.shape[1])
        return self.weights @ row + self.bias


def _softmax(z: np.ndarray) -> np.ndarray:
    shifted = z - np.max(z, axis=-1, keepdims=True)
    exp = np.exp(shifted)
    return exp / np.sum(exp, axis=-1, keepdims=True)


def train(corpus: Corpus, params: TrainingParams | None = None) -> IntentModel:
    """Fit the logistic model; deterministic for a fixed seed.

    Temperature is initialized to 1.0 and left for :func:`calibrate`.
    """
    params = params or TrainingParams()
    if not corpus.utterances:
        raise CorpusError("cannot train on an empty corpus")
    vectorizer = TextVectorizer.fit([u.text for u in corpus.utterances])
    n_features = len(vectorizer.vocabulary)
    intents = corpus.intents
    intent_index = {intent: i for i, intent in enumerate(intents)}

    rows = np.stack(
        [_to_dense(featurize(u.text, vectorizer), n_features) for u in corpus.utterances]
    )
    labels = np.array([intent_index[u.intent] for u in corpus.utterances])
    n, m = len(labels), len(intents)
    onehot = np.zeros((n, m))
    onehot[np.arange(n), labels] = 1.0

    weights = np.zeros((m, n_features))
    bias = np.zeros(m)
    rng = np.random.default_rng(params.seed)
    for _ in range(params.epochs):
        order = rng.permutation(n)
        for start in range(0, n, params.batch_size):
            batch = order[start : start + params.batch_size]
            x, y = rows[batch], onehot[batch]
            probs = _softmax(x @ weights.T + bias)
            grad = (probs - y).T @ x / len(batch) + params.l2 * weights
            grad_bias = np.mean(probs - y, axis=0)
            weights -= params.learning_rate * grad
            bias -= params.learning_rate * grad_bias
    return IntentModel(weights, bias, 1.0, vectorizer, intents)


def predict(model: IntentModel, text: str) -> IntentDistribution:
    probs = _softmax(model.logits(text) / model.temperature)
    return IntentDistribution(probs, model.intents)


def _holdout_nll(logits: np.ndarray, labels: np.ndarray, temperature: float) -> float:
    log_probs = np.log(_softmax(logits / temperature) + 1e-300)
    return float(-np.mean(log_probs[np.arange(len(labels)), labels]))


def calibrate(
    model: IntentModel,
    held_out: Corpus,
    lower: float = 0.05,
    upper: float = 20.0,
    tolerance: float = 1e-4,
) -> IntentModel:
    """Fit a single softmax temperature by golden-section search on held-out NLL.

    A shared positive temperature is a monotone transform of the scores, so
    the argmax of every prediction is unchanged.
    """
    if not held_out.utterances:
        raise CorpusError("calibration needs a non-empty held-out corpus")
    intent_index = {intent: i for i, intent in enumerate(model.intents)}
    logits = np.stack([model.logits(u.text) for u in held_out.utterances])
    labels = np.array([intent_index[u.intent] for u in held_out.utterances])

    ratio = (math.sqrt(5) - 1) / 2
    a, b = lower, upper
    c, d = b - ratio * (b - a), a + ratio * (b - a)
    f_c, f_d = _holdout_nll(logits, labels, c), _holdout_nll(logits, labels, d)
    while b - a > tolerance:
        if f_c < f_d:
            b, d, f_d = d, c, f_c
            c = b - ratio * (b - a)
            f_c = _holdout_nll(logits, labels, c)
        else:
            a, c, f_c = c, d, f_d
            d = a + ratio * (b - a)
            f_d = _holdout_nll(logits, labels, d)
    best = (a + b) / 2
    return IntentModel(model.weights, model.bias, best, model.vectorizer, model.intents)


def detect_ambiguity(dist: IntentDistribution, thresholds: Thresholds) -> AmbiguityVerdict:
    """Apply the threshold rules to a distribution.

    ``j`` is the argmax and ``k`` the runner-up, ties broken toward the lower
    intent index. Self-ambiguity (p_j < t1) is checked before the pair rule
    (p_j - p_k < t2).
    """
    p = dist.probabilities
    if len(p) < 2:
        raise ValueError("ambiguity detection needs at least two intents")
    order = sorted(range(len(p)), key=lambda i: (-p[i], i))
    j, k = order[0], order[1]
    if p[j] < thresholds.t1:
        return AmbiguityVerdict(VerdictKind.SELF_AMBIGUOUS, j, k)
    if p[j] - p[k] < thresholds.t2:
        return AmbiguityVerdict(VerdictKind.PAIR_AMBIGUOUS, j, k)
    return AmbiguityVerdict(VerdictKind.UNAMBIGUOUS, j, k)


def model_to_dict(model: IntentModel) -> dict:
    return {
        "weights": [[float(w) for w in row] for row in model.weights],
        "bias": [float(b) for b in model.bias],
        "temperature": float(model.temperature),
        "vocabulary": model.vectorizer.vocabulary,
        "idf": [float(x) for x in model.vectorizer.idf],
        "intents": list(model.intents),
    }


def model_from_dict(data: dict) -> IntentModel:
    vectorizer = TextVectorizer(
        {str(k): int(v) for k, v in data["vocabulary"].items()}, np.array(data["idf"])
    )
    return IntentModel(
        np.array(data["weights"]),
        np.array(data["bias"]),
        float(data["temperature"]),
        vectorizer,
        tuple(data["intents"]),
    )


def save_model(model: IntentModel, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump({"format_version": 1, "model": model_to_dict(model)}, fh, sort_keys=True)


def load_model(path) -> IntentModel:
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    return model_from_dict(data["model"])

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from clarifier.classifier import (
    IntentDistribution,
    IntentModel,
    TextVectorizer,
    Thresholds,
    TrainingParams,
    VerdictKind,
    calibrate,
    detect_ambiguity,
    featurize,
    load_model,
    ngrams,
    predict,
    save_model,
    train,
)
from clarifier.corpus import Corpus, LabeledUtterance
from clarifier.exceptions import CorpusError


def corpus_of(pairs):
    return Corpus(tuple(LabeledUtterance(t, i) for t, i in pairs))


def separable_corpus(n_intents=20, per_intent=30):
    """Intent-specific keyword vocabulary: linearly separable by construction."""
    pairs = []
    for i in range(n_intents):
        for j in range(per_intent):
            pairs.append(
                (f"keyword{i} filler{j % 5} common token keyword{i}", f"intent_{i}")
            )
    return corpus_of(pairs)


def test_ngrams_order():
    assert ngrams(["a", "b", "c"]) == ["a", "b", "c", "a b", "b c"]


def test_featurize_unknown_text_is_empty():
    vec = TextVectorizer.fit(["reset password"])
    assert featurize("totally different words", vec) == {}


def test_featurize_counts_unigrams_and_bigram():
    vec = TextVectorizer.fit(["reset password"])
    features = featurize("reset password", vec)
    assert len(features) == 3  # reset, password, "reset password"


def test_featurize_empty_text_errors():
    vec = TextVectorizer.fit(["reset password"])
    with pytest.raises(ValueError):
        featurize("  ", vec)


def test_tfidf_matches_hand_computation():
    # Three documents; idf = ln((1+N)/(1+df)) + 1, final vector L2-normalized.
    docs = ["reset password", "reset pin", "unlock account"]
    vec = TextVectorizer.fit(docs)
    features = featurize("reset password", vec)

    idf_reset = math.log((1 + 3) / (1 + 2)) + 1.0  # df=2
    idf_password = math.log((1 + 3) / (1 + 1)) + 1.0  # df=1
    idf_bigram = math.log((1 + 3) / (1 + 1)) + 1.0  # "reset password", df=1
    raw = [idf_reset, idf_password, idf_bigram]
    norm = math.sqrt(sum(w * w for w in raw))

    lookup = {g: i for g, i in vec.vocabulary.items()}
    assert features[lookup["reset"]] == pytest.approx(idf_reset / norm, abs=1e-12)
    assert features[lookup["password"]] == pytest.approx(idf_password / norm, abs=1e-12)
    assert features[lookup["reset password"]] == pytest.approx(idf_bigram / norm, abs=1e-12)


def test_train_disjoint_vocabulary_reaches_full_accuracy():
    corpus = corpus_of(
        [("alpha beta gamma", "a")] * 5
        + [("delta epsilon zeta", "b")] * 5
    )
    model = train(corpus, TrainingParams(epochs=100))
    hits = sum(
        predict(model, u.text).intents[predict(model, u.text).top_index()] == u.intent
        for u in corpus.utterances
    )
    assert hits == len(corpus)


def test_train_deterministic_for_seed():
    corpus = separable_corpus(4, 10)
    m1 = train(corpus, TrainingParams(epochs=50, seed=7))
    m2 = train(corpus, TrainingParams(epochs=50, seed=7))
    assert np.array_equal(m1.weights, m2.weights)
    assert np.array_equal(m1.bias, m2.bias)


def test_train_synthetic_twenty_intents_accuracy():
    corpus = separable_corpus(20, 30)
    model = train(corpus, TrainingParams(epochs=100))
    hits = 0
    for u in corpus.utterances:
        dist = predict(model, u.text)
        hits += dist.intents[dist.top_index()] == u.intent
    assert hits / len(corpus) >= 0.95


def test_train_requires_utterances():
    with pytest.raises((CorpusError, Exception)):
        train(Corpus((), ("a", "b")))


def test_train_initializes_temperature_to_one():
    model = train(separable_corpus(3, 5), TrainingParams(epochs=10))
    assert model.temperature == 1.0


def test_predict_sums_to_one():
    model = train(separable_corpus(5, 8), TrainingParams(epochs=30))
    for text in ("keyword0 common", "nothing known here", "keyword3 token"):
        dist = predict(model, text)
        assert np.sum(dist.probabilities) == pytest.approx(1.0, abs=1e-9)


def test_predict_uniform_on_zero_scores():
    vec = TextVectorizer.fit(["some words"])
    model = IntentModel(
        np.zeros((4, len(vec.vocabulary))), np.zeros(4), 1.0, vec, ("a", "b", "c", "d")
    )
    dist = predict(model, "unrelated text entirely")
    assert np.allclose(dist.probabilities, 0.25)


def test_predict_training_utterance_argmax_matches_label():
    corpus = corpus_of([("alpha beta", "a")] * 4 + [("gamma delta", "b")] * 4)
    model = train(corpus, TrainingParams(epochs=100))
    dist = predict(model, "alpha beta")
    assert dist.intents[dist.top_index()] == "a"


def test_calibrate_sharpens_confident_model():
    corpus = separable_corpus(4, 12)
    model = train(corpus, TrainingParams(epochs=150))
    calibrated = calibrate(model, corpus)
    assert calibrated.temperature <= 1.0


def test_calibrate_golden_section_matches_grid_oracle():
    # Independent oracle: dense grid search over the same NLL objective.
    corpus = separable_corpus(4, 12)
    model = train(corpus, TrainingParams(epochs=60))
    shrunk = IntentModel(
        model.weights * 0.2, model.bias * 0.2, 1.0, model.vectorizer, model.intents
    )
    calibrated = calibrate(shrunk, corpus)

    intent_index = {intent: i for i, intent in enumerate(model.intents)}
    logits = np.stack([shrunk.logits(u.text) for u in corpus.utterances])
    labels = np.array([intent_index[u.intent] for u in corpus.utterances])

    def nll(temperature):
        z = logits / temperature
        z = z - z.max(axis=1, keepdims=True)
        log_probs = z - np.log(np.exp(z).sum(axis=1, keepdims=True))
        return -log_probs[np.arange(len(labels)), labels].mean()

    grid = np.linspace(0.05, 20.0, 4000)
    best = grid[np.argmin([nll(t) for t in grid])]
    assert calibrated.temperature == pytest.approx(best, abs=2e-2)
    # The search stops once the bracket is below 1e-4 wide; allow that slack.
    assert nll(calibrated.temperature) <= nll(best) + 1e-5


def test_calibrate_preserves_argmax_on_100_inputs():
    rng = np.random.default_rng(3)
    corpus = separable_corpus(10, 10)
    model = train(corpus, TrainingParams(epochs=60))
    calibrated = calibrate(model, corpus)
    checked = 0
    while checked < 100:
        i, j = rng.integers(0, 10, size=2)
        text = f"keyword{i} common keyword{j} filler{rng.integers(0, 5)}"
        before = predict(model, text)
        after = predict(calibrated, text)
        assert before.top_index() == after.top_index()
        checked += 1


def test_calibrate_increases_margin_of_underconfident_model():
    corpus = separable_corpus(6, 12)
    model = train(corpus, TrainingParams(epochs=150))
    shrunk = IntentModel(
        model.weights * 0.2, model.bias * 0.2, 1.0, model.vectorizer, model.intents
    )
    calibrated = calibrate(shrunk, corpus)
    assert calibrated.temperature < 1.0

    def mean_margin(m):
        margins = []
        for u in corpus.utterances:
            p = np.sort(predict(m, u.text).probabilities)[::-1]
            margins.append(p[0] - p[1])
        return float(np.mean(margins))

    assert mean_margin(calibrated) > mean_margin(shrunk)


def dist_of(probabilities):
    p = np.asarray(probabilities, dtype=float)
    return IntentDistribution(p, tuple(f"i{k}" for k in range(len(p))))


def test_detect_pair_ambiguous_spec_example():
    verdict = detect_ambiguity(dist_of([0.50, 0.45, 0.05]), Thresholds(0.2, 0.3))
    assert verdict.kind is VerdictKind.PAIR_AMBIGUOUS
    assert (verdict.top, verdict.second) == (0, 1)


def test_detect_unambiguous_spec_example():
    verdict = detect_ambiguity(dist_of([0.90, 0.06, 0.04]), Thresholds(0.2, 0.3))
    assert verdict.kind is VerdictKind.UNAMBIGUOUS
    assert verdict.top == 0


def test_detect_self_ambiguous_spec_example():
    p = [0.15, 0.14] + [0.71 / 8] * 8
    verdict = detect_ambiguity(dist_of(p), Thresholds(t1=0.2, t2=0.3))
    assert verdict.kind is VerdictKind.SELF_AMBIGUOUS
    assert verdict.top == 0


def test_detect_tie_breaks_toward_lower_index():
    verdict = detect_ambiguity(dist_of([0.4, 0.4, 0.2]), Thresholds(0.2, 0.3))
    assert (verdict.top, verdict.second) == (0, 1)


def test_detect_requires_two_intents():
    with pytest.raises(ValueError):
        detect_ambiguity(IntentDistribution(np.array([1.0]), ("only",)), Thresholds())


@given(
    st.lists(st.floats(min_value=0.01, max_value=1.0), min_size=2, max_size=8),
    st.floats(min_value=0.0, max_value=1.0),
    st.floats(min_value=0.0, max_value=1.0),
)
@settings(max_examples=60)
def test_detect_t2_upset_property(raw, t2_low, t2_high):
    # If pair-ambiguous at t2 then pair-ambiguous at any larger t2.
    t2_low, t2_high = sorted((t2_low, t2_high))
    p = np.array(raw) / sum(raw)
    dist = IntentDistribution(p, tuple(f"i{k}" for k in range(len(p))))
    low = detect_ambiguity(dist, Thresholds(t1=0.0, t2=t2_low))
    high = detect_ambiguity(dist, Thresholds(t1=0.0, t2=t2_high))
    if low.kind is VerdictKind.PAIR_AMBIGUOUS:
        assert high.kind is VerdictKind.PAIR_AMBIGUOUS
    assert low.top == high.top == int(np.lexsort((np.arange(len(p)), -p))[0])


def test_thresholds_validate_range():
    with pytest.raises(ValueError):
        Thresholds(t1=1.5)


def test_model_persistence_roundtrip(tmp_path):
    corpus = separable_corpus(4, 8)
    model = calibrate(train(corpus, TrainingParams(epochs=40)), corpus)
    path = tmp_path / "model.json"
    save_model(model, path)
    loaded = load_model(path)
    for u in corpus.utterances[:10]:
        assert np.array_equal(
            predict(model, u.text).probabilities, predict(loaded, u.text).probabilities
        )

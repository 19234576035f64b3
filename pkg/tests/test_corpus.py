import collections
import json
import random

import pytest

from clarifier.corpus import (
    AmbiguousExample,
    Corpus,
    HypernymLexicon,
    LabeledUtterance,
    load_ambiguous,
    load_corpus,
    load_hypernyms,
    normalize_text,
    save_ambiguous,
    save_corpus,
    save_hypernyms,
    split,
)
from clarifier.exceptions import CorpusError, RecordError


def write_lines(path, records):
    path.write_text("\n".join(json.dumps(r) for r in records) + "\n", encoding="utf-8")


def test_load_two_record_corpus(tmp_path):
    path = tmp_path / "c.jsonl"
    write_lines(
        path,
        [
            {"text": "open a savings account", "intent": "open_savings"},
            {"text": "open a checking account", "intent": "open_checking"},
        ],
    )
    corpus = load_corpus(path)
    assert len(corpus) == 2
    assert corpus.intents == ("open_savings", "open_checking")


def test_load_rejects_empty_text_with_line_number(tmp_path):
    path = tmp_path / "c.jsonl"
    write_lines(
        path,
        [
            {"text": "fine", "intent": "a"},
            {"text": "   ", "intent": "a"},
        ],
    )
    with pytest.raises(RecordError) as err:
        load_corpus(path)
    assert err.value.line_no == 2


def test_load_six_record_toy_banking_file(tmp_path):
    records = [
        {"text": "open a savings account", "intent": "open_savings"},
        {"text": "start a savings account", "intent": "open_savings"},
        {"text": "new savings account please", "intent": "open_savings"},
        {"text": "open a checking account", "intent": "open_checking"},
        {"text": "start a checking account", "intent": "open_checking"},
        {"text": "new checking account please", "intent": "open_checking"},
    ]
    path = tmp_path / "c.jsonl"
    write_lines(path, records)
    corpus = load_corpus(path)
    assert len(corpus) == 6
    assert corpus.intents == ("open_savings", "open_checking")
    for utterance, record in zip(corpus.utterances, records):
        assert utterance.text == record["text"]
        assert utterance.intent == record["intent"]


def test_load_empty_file_errors(tmp_path):
    path = tmp_path / "c.jsonl"
    path.write_text("", encoding="utf-8")
    with pytest.raises(CorpusError):
        load_corpus(path)


def test_single_intent_corpus_rejected(tmp_path):
    path = tmp_path / "c.jsonl"
    write_lines(path, [{"text": "a", "intent": "x"}, {"text": "b", "intent": "x"}])
    with pytest.raises(CorpusError):
        load_corpus(path)


def test_malformed_json_reports_line(tmp_path):
    path = tmp_path / "c.jsonl"
    path.write_text('{"text": "ok", "intent": "a"}\nnot json\n', encoding="utf-8")
    with pytest.raises(RecordError) as err:
        load_corpus(path)
    assert err.value.line_no == 2


def test_mixed_file_splits_by_record_type(tmp_path):
    path = tmp_path / "c.jsonl"
    write_lines(
        path,
        [
            {"text": "a", "intent": "x"},
            {"text": "c", "intent": "y"},
            {"text": "b", "intent": "x", "intent_b": "y"},
        ],
    )
    corpus = load_corpus(path)
    assert len(corpus) == 2
    assert len(load_ambiguous(path, corpus)) == 1


def test_corpus_of_only_ambiguous_records_is_empty_error(tmp_path):
    path = tmp_path / "c.jsonl"
    write_lines(path, [{"text": "b", "intent": "x", "intent_b": "y"}])
    with pytest.raises(CorpusError):
        load_corpus(path)


def test_ambiguous_loader_filters_and_validates(tmp_path):
    path = tmp_path / "amb.jsonl"
    write_lines(
        path,
        [
            {"text": "plain", "intent": "x"},
            {"text": "blended", "intent": "x", "intent_b": "y"},
        ],
    )
    examples = load_ambiguous(path)
    assert len(examples) == 1
    assert examples[0].pair == frozenset({"x", "y"})

    corpus = Corpus(
        (LabeledUtterance("t1", "x"), LabeledUtterance("t2", "z")), ("x", "z")
    )
    with pytest.raises(RecordError):
        load_ambiguous(path, corpus)


def test_ambiguous_example_needs_distinct_intents():
    with pytest.raises(ValueError):
        AmbiguousExample("text", "same", "same")


def test_corpus_roundtrip_identity(tmp_path):
    rng = random.Random(5)
    utterances = tuple(
        LabeledUtterance(f"utterance number {i} {rng.random():.3f}", f"intent_{i % 4}")
        for i in range(40)
    )
    corpus = Corpus(utterances)
    path = tmp_path / "c.jsonl"
    save_corpus(corpus, path)
    loaded = load_corpus(path)
    assert loaded == corpus


def test_ambiguous_roundtrip(tmp_path):
    examples = [AmbiguousExample(f"text {i}", "a", "b") for i in range(7)]
    path = tmp_path / "amb.jsonl"
    save_ambiguous(examples, path)
    assert load_ambiguous(path) == examples


def test_duplicate_records_preserved(tmp_path):
    records = [{"text": "same text", "intent": "a"}] * 3 + [{"text": "y", "intent": "b"}]
    path = tmp_path / "c.jsonl"
    write_lines(path, records)
    assert len(load_corpus(path)) == 4


def test_normalize_text_trims_and_collapses_but_keeps_case():
    assert normalize_text("  Open   a  Savings\taccount ") == "Open a Savings account"


def test_corpus_rejects_unknown_intent_in_explicit_inventory():
    with pytest.raises(CorpusError):
        Corpus((LabeledUtterance("t", "ghost"),), ("a", "b"))


def test_hypernym_symmetry():
    lex = HypernymLexicon.from_pairs(
        [("savings", "checking", "type"), ("Upgrade", "DOWNGRADE", "Change")]
    )
    for a, b, hyper in lex.pairs():
        assert lex.lookup(a, b) == hyper
        assert lex.lookup(b, a) == hyper
    assert lex.lookup("upgrade", "downgrade") == "change"
    assert lex.lookup("upgrade", "unknown") is None


def test_hypernym_tsv_roundtrip_and_comments(tmp_path):
    path = tmp_path / "h.tsv"
    path.write_text(
        "# comment line\nsavings\tchecking\ttype\n\nupgrade\tdowngrade\tchange\n",
        encoding="utf-8",
    )
    lex = load_hypernyms(path)
    assert len(lex) == 2
    out = tmp_path / "h2.tsv"
    save_hypernyms(lex, out)
    assert load_hypernyms(out).pairs() == lex.pairs()


def test_hypernym_tsv_bad_columns(tmp_path):
    path = tmp_path / "h.tsv"
    path.write_text("only\ttwo\n", encoding="utf-8")
    with pytest.raises(RecordError):
        load_hypernyms(path)


def _random_corpus(rng, n_intents=5, per_intent=20):
    utterances = []
    for i in range(n_intents):
        for j in range(per_intent):
            utterances.append(
                LabeledUtterance(f"utterance {i} {j} {rng.randint(0, 9)}", f"intent_{i}")
            )
    rng.shuffle(utterances)
    return Corpus(tuple(utterances))


def test_split_fraction_counts():
    corpus = _random_corpus(random.Random(0), n_intents=3, per_intent=10)
    train, hold = split(corpus, 0.2, seed=1)
    for intent in corpus.intents:
        assert len([u for u in train.utterances if u.intent == intent]) == 8
        assert len([u for u in hold.utterances if u.intent == intent]) == 2


def test_split_deterministic():
    corpus = _random_corpus(random.Random(1))
    assert split(corpus, 0.3, seed=9) == split(corpus, 0.3, seed=9)


def test_split_multiset_preservation():
    corpus = _random_corpus(random.Random(2), n_intents=5, per_intent=20)
    train, hold = split(corpus, 0.25, seed=3)
    combined = collections.Counter(train.utterances) + collections.Counter(hold.utterances)
    assert combined == collections.Counter(corpus.utterances)


def test_split_rejects_singleton_intent():
    corpus = Corpus(
        (
            LabeledUtterance("a", "x"),
            LabeledUtterance("b", "y"),
            LabeledUtterance("c", "y"),
        )
    )
    with pytest.raises(CorpusError):
        split(corpus, 0.5, seed=0)


def test_split_spreads_duplicate_groups():
    # 4 copies of one text per intent: at 0.2 holdout, at most one copy leaves.
    utterances = []
    for intent in ("a", "b"):
        utterances += [LabeledUtterance("shared text", intent)] * 4
        utterances += [LabeledUtterance(f"unique {intent} {i}", intent) for i in range(16)]
    corpus = Corpus(tuple(utterances))
    for seed in range(10):
        train, _ = split(corpus, 0.2, seed)
        for intent in ("a", "b"):
            kept = sum(
                1 for u in train.utterances if u.intent == intent and u.text == "shared text"
            )
            assert kept >= 3

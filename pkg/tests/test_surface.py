import pytest

from clarifier.corpus import Corpus, HypernymLexicon, LabeledUtterance
from clarifier.exceptions import UnknownIntentError
from clarifier.qgen import QAPair, words
from clarifier.selector import DiscriminativeSelection
from clarifier.surface import (
    DEFAULT_TEMPLATES,
    PARAPHRASE_HOOKS,
    ClarifyingQuestion,
    Provenance,
    combine,
    discriminative_phrases,
    shallow_parse,
    template_question,
)


def selection(q_j, a_j, q_k, a_k, score=1.0, gate_passed=True):
    return DiscriminativeSelection(
        QAPair(q_j, a_j, "src j", "intent_j"),
        QAPair(q_k, a_k, "src k", "intent_k"),
        score,
        gate_passed,
    )


EMPTY_LEXICON = HypernymLexicon()


# -- shallow parse -----------------------------------------------------------

def test_parse_want_pattern():
    clause = shallow_parse("I want to open a savings account")
    assert clause.main_verb == "open"
    assert clause.direct_object == "account"
    assert clause.object_modifiers == ("savings",)
    assert clause.subject_person == "first"


def test_parse_no_verb():
    assert shallow_parse("hello") is None


def test_parse_imperative():
    clause = shallow_parse("add a printer")
    assert clause.main_verb == "add"
    assert clause.direct_object == "printer"
    assert clause.object_modifiers == ()


def test_parse_wh_question_objectless():
    clause = shallow_parse("What do you want to add?")
    assert clause.main_verb == "add"
    assert clause.direct_object == ""
    assert clause.subject_person == "second"


def test_parse_copula_object_and_modifiers():
    first = shallow_parse("What is the type of account?")
    second = shallow_parse("What is the account type?")
    assert first.main_verb == "be"
    assert second.main_verb == "be"
    assert first.direct_object == "type"
    assert second.direct_object == "type"
    assert first.object_modifiers == ()
    assert second.object_modifiers == ("account",)


def test_parse_np_cut_at_preposition():
    clause = shallow_parse("What do you want to connect to?")
    assert clause.main_verb == "connect"
    assert clause.direct_object == ""


# -- combine rule ladder -----------------------------------------------------

def test_combine_r3_same_verb_objectless():
    sel = selection(
        "What do you want to add?", "a printer",
        "What do you want to add?", "a scanner",
    )
    question = combine(sel, "add a device", EMPTY_LEXICON)
    assert question.applied_rule == "R3"
    assert question.text == "Do you want to add: a printer or a scanner?"
    assert (question.option_j, question.option_k) == ("a printer", "a scanner")
    assert question.provenance is Provenance.QG_PATH


def test_combine_r2_disjunctive_without_hypernym():
    sel = selection(
        "Do you want to open a savings account?", "savings",
        "Do you want to open a checking account?", "checking",
    )
    question = combine(sel, "open an account", EMPTY_LEXICON)
    assert question.applied_rule == "R2"
    assert question.text == "Do you want to open a savings or a checking account?"


def test_combine_r2_type_question_with_hypernym():
    lexicon = HypernymLexicon.from_pairs([("savings", "checking", "type")])
    sel = selection(
        "Do you want to open a savings account?", "savings",
        "Do you want to open a checking account?", "checking",
    )
    question = combine(sel, "open an account", lexicon)
    assert question.applied_rule == "R2"
    assert question.text == "What type of account do you want to open?"
    assert (question.option_j, question.option_k) == ("savings", "checking")


def test_combine_r4_verb_hypernym():
    lexicon = HypernymLexicon.from_pairs([("upgrade", "downgrade", "change")])
    sel = selection(
        "What do you want to upgrade?", "my storage plan",
        "What do you want to downgrade?", "my data plan",
    )
    question = combine(sel, "change my plan", lexicon)
    assert question.applied_rule == "R4"
    assert question.text == "What would you like to change: my storage plan or my data plan?"


def test_combine_r5_generic_do():
    sel = selection(
        "What do you want to archive?", "archive emails",
        "What do you want to start?", "start excel inside a VM",
    )
    question = combine(sel, "help me", EMPTY_LEXICON)
    assert question.applied_rule == "R5"
    assert question.text == (
        "What would you like to do: archive emails or start excel inside a VM?"
    )


def test_combine_r1_person_flip_on_identical_rewrites():
    sel = selection(
        "What do I want to open?", "a savings account",
        "What do I want to open?", "a checking account",
    )
    question = combine(sel, "open an account", EMPTY_LEXICON)
    assert question.applied_rule == "R1"
    assert question.text == "What do you want to open?"


def test_combine_r1_rewrites_i_verb_and_second_person():
    sel = selection(
        "Why do I reset your password?", "the email password",
        "Why do I reset your password?", "the login pin",
    )
    question = combine(sel, "reset something", EMPTY_LEXICON)
    assert question.applied_rule == "R1"
    assert question.text == "Why do you want to reset my password?"


def test_combine_returns_none_when_both_parses_fail():
    sel = selection("hello?", "a", "hi?", "b")
    assert combine(sel, "query", EMPTY_LEXICON) is None


def test_combine_returns_none_for_identical_answers():
    sel = selection(
        "What do you want to add?", "a printer",
        "What do you want to remove?", "a printer",
    )
    assert combine(sel, "query", EMPTY_LEXICON) is None


def test_combine_requires_gate():
    sel = selection("What do you want to add?", "a", "What do you want to add?", "b",
                    gate_passed=False)
    with pytest.raises(ValueError):
        combine(sel, "query", EMPTY_LEXICON)


def test_combine_single_parse_falls_to_r5():
    sel = selection(
        "hello?", "option one",
        "What do you want to add?", "option two",
    )
    question = combine(sel, "query", EMPTY_LEXICON)
    assert question.applied_rule == "R5"


def test_combine_output_invariants():
    cases = [
        selection("What do you want to add?", "a printer",
                  "What do you want to add?", "a scanner"),
        selection("Do you want to open a savings account?", "savings",
                  "Do you want to open a checking account?", "checking"),
        selection("What do I want to open?", "left", "What do I want to open?", "right"),
        selection("What do you archive?", "emails", "What do you start?", "excel"),
    ]
    for sel in cases:
        question = combine(sel, "a query", EMPTY_LEXICON)
        assert question.text.endswith("?")
        tokens = words(question.text)
        assert "i" not in tokens  # no first-person subject left in the output
        assert question.option_j != question.option_k
        assert question.intent_j == "intent_j"
        assert question.intent_k == "intent_k"
        assert question.applied_rule in {"R1", "R2", "R3", "R4", "R5"}


def test_paraphrase_hook_applied():
    sel = selection(
        "What do you want to add?", "a printer",
        "What do you want to add?", "a scanner",
    )
    shouting = combine(sel, "q", EMPTY_LEXICON, paraphrase=str.upper)
    assert shouting.text == "DO YOU WANT TO ADD: A PRINTER OR A SCANNER?"
    assert PARAPHRASE_HOOKS["identity"]("x") == "x"


# -- discriminative phrases --------------------------------------------------

def phrase_corpus():
    return Corpus(
        tuple(
            [LabeledUtterance("open the savings account", "j")] * 3
            + [LabeledUtterance("open the checking account", "k")] * 3
        )
    )


def test_top_phrase_is_distinguishing_keyword():
    phrases = discriminative_phrases(phrase_corpus(), "j", top_n=1)
    assert phrases[0].phrase == "savings"
    assert phrases[0].weight > 0


def test_top_n_zero_returns_empty():
    assert discriminative_phrases(phrase_corpus(), "j", top_n=0) == []


def test_unknown_intent_errors():
    with pytest.raises(UnknownIntentError):
        discriminative_phrases(phrase_corpus(), "ghost", top_n=3)


def test_disjoint_vocabulary_intents_have_disjoint_phrases():
    corpus = Corpus(
        tuple(
            [LabeledUtterance("alpha beta gamma", "j")] * 2
            + [LabeledUtterance("delta epsilon zeta", "k")] * 2
        )
    )
    top_j = {p.phrase for p in discriminative_phrases(corpus, "j", top_n=5)}
    top_k = {p.phrase for p in discriminative_phrases(corpus, "k", top_n=5)}
    assert top_j.isdisjoint(top_k)


def test_phrases_ranked_by_tfidf_hand_check():
    # "savings" appears once per j-utterance (df=1 of 2 docs);
    # shared tokens appear in both docs (df=2, idf=1 exactly).
    import math

    phrases = discriminative_phrases(phrase_corpus(), "j", top_n=10)
    by_phrase = {p.phrase: p.weight for p in phrases}
    idf_unique = math.log((1 + 2) / (1 + 1)) + 1.0
    assert by_phrase["savings"] == pytest.approx(3 * idf_unique, abs=1e-12)


# -- template questions ------------------------------------------------------

def phrases(intent, *texts):
    from clarifier.surface import DiscriminativePhrase

    return [DiscriminativePhrase(intent, t, weight=10.0 - i) for i, t in enumerate(texts)]


def test_template_question_paper_template():
    question = template_question(
        phrases("j", "reset password"), phrases("k", "unlock account")
    )
    assert question.text == "Are you talking about reset password or unlock account?"
    assert question.provenance is Provenance.TEMPLATE_PATH
    assert question.applied_rule is None
    assert "reset password" in question.text and "unlock account" in question.text


def test_template_collision_uses_next_ranked_phrase():
    question = template_question(
        phrases("j", "shared top", "from j"), phrases("k", "shared top", "from k")
    )
    assert question.option_j == "shared top"
    assert question.option_k == "from k"


def test_template_collision_exhaustion_errors():
    with pytest.raises(ValueError):
        template_question(phrases("j", "same"), phrases("k", "same"))


def test_template_rotation_round_robin():
    a = template_question(phrases("j", "x"), phrases("k", "y"), rotation=0)
    b = template_question(phrases("j", "x"), phrases("k", "y"), rotation=1)
    c = template_question(phrases("j", "x"), phrases("k", "y"), rotation=2)
    assert a.text == DEFAULT_TEMPLATES[0].format(A="x", B="y")
    assert b.text == DEFAULT_TEMPLATES[1].format(A="x", B="y")
    assert c.text == a.text


def test_template_single_template_deterministic():
    templates = ("Do you mean {A} or {B}?",)
    outputs = {
        template_question(phrases("j", "x"), phrases("k", "y"), templates, r).text
        for r in range(5)
    }
    assert outputs == {"Do you mean x or y?"}


def test_clarifying_question_invariants():
    with pytest.raises(ValueError):
        ClarifyingQuestion("no mark", "a", "b", "j", "k", Provenance.TEMPLATE_PATH)
    with pytest.raises(ValueError):
        ClarifyingQuestion("Same options?", "a", "a", "j", "k", Provenance.TEMPLATE_PATH)
    with pytest.raises(ValueError):
        # QG provenance requires a rule; template forbids it
        ClarifyingQuestion("Ok?", "a", "b", "j", "k", Provenance.QG_PATH)
    with pytest.raises(ValueError):
        ClarifyingQuestion("Ok?", "a", "b", "j", "k", Provenance.TEMPLATE_PATH, "R1")
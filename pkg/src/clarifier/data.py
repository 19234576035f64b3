"""Bundled synthetic datasets, generated deterministically.

The corpus models an IT-service-desk flavored domain as ten families of two
sister intents each. Sister intents share a verb-phrase core and differ by
a distinguishing tail; every intent also carries keyword-less utterances
shared verbatim with its sister, so a stratified test split contains
genuinely ambiguous items whose gold label lands at rank 2. The blended
ambiguous set pairs each family's sisters via abstract phrasings and
explicit both-intent constructions.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from clarifier.corpus import (
    AmbiguousExample,
    Corpus,
    HypernymLexicon,
    LabeledUtterance,
    save_ambiguous,
    save_corpus,
    save_hypernyms,
    split,
)
from clarifier.encoder import WordVectorTable, save_vectors, tokenize
from clarifier.resolver import DEFAULT_NONE_PHRASES

SPLIT_FRACTION = 0.2
SPLIT_SEED = 101

FRAMES = (
    "i want to {vp}",
    "i need to {vp}",
    "i would like to {vp}",
    "please {vp}",
    "can you {vp}",
    "{vp}",
    "we need to {vp}",
)

# Keyword utterances use six frames over four verb phrases (24 per intent).
# The keyword-less texts are shared verbatim between the two sisters and
# repeated (2 phrases x 2 frames x 4 copies = 16 per intent): the model can
# only fit their post-split label ratio, and group-stratified splitting
# keeps that ratio near 1:1, which pins sister probabilities around 50/50
# on abstract phrasings.
KEYWORD_FRAMES = FRAMES[:6]
ABSTRACT_FRAMES = FRAMES[:2]
ABSTRACT_COPIES = 4


@dataclass(frozen=True)
class Family:
    intent_a: str
    intent_b: str
    vps_a: tuple[str, ...]
    vps_b: tuple[str, ...]
    shared_vps: tuple[str, str]
    both_vp: str


FAMILIES = (
    Family(
        "open_savings_account",
        "open_checking_account",
        (
            "open an account for savings",
            "open a new account for savings",
            "open an account for savings online",
            "open an account for savings at the branch",
        ),
        (
            "open an account for checking",
            "open a new account for checking",
            "open an account for checking online",
            "open an account for checking at the branch",
        ),
        ("open an account", "open a new account"),
        "open an account for savings and checking",
    ),
    Family(
        "book_flight_ticket",
        "book_train_ticket",
        (
            "book a ticket for the flight",
            "book a new ticket for the flight",
            "book a ticket for the morning flight",
            "book a ticket for the flight online",
        ),
        (
            "book a ticket for the train",
            "book a new ticket for the train",
            "book a ticket for the morning train",
            "book a ticket for the train online",
        ),
        ("book a ticket", "book a new ticket"),
        "book a ticket for the flight or the train",
    ),
    Family(
        "add_printer",
        "add_scanner",
        (
            "add a device for printing",
            "add a new device for printing",
            "add a device for printing upstairs",
            "add a device for printing at my desk",
        ),
        (
            "add a device for scanning",
            "add a new device for scanning",
            "add a device for scanning upstairs",
            "add a device for scanning at my desk",
        ),
        ("add a device", "add a new device"),
        "add a device for printing and scanning",
    ),
    Family(
        "archive_emails",
        "start_excel_vm",
        (
            "archive my old emails",
            "archive all my emails",
            "archive the emails",
            "archive my inbox emails",
        ),
        (
            "start excel inside a vm",
            "start excel in the vm",
            "start my excel vm",
            "start excel on the vm",
        ),
        ("archive emails and start excel", "archive my emails and start my excel vm"),
        "archive emails and also start excel inside a vm",
    ),
    Family(
        "upgrade_storage_plan",
        "downgrade_data_plan",
        (
            "upgrade my plan for more storage",
            "upgrade my plan to more storage",
            "upgrade my current plan for more storage",
            "upgrade my plan for extra storage",
        ),
        (
            "downgrade my plan for less data",
            "downgrade my plan to less data",
            "downgrade my current plan for less data",
            "downgrade my plan for reduced data",
        ),
        ("change my plan", "update my plan"),
        "upgrade my plan for more storage and downgrade my plan for less data",
    ),
    Family(
        "reset_email_password",
        "reset_login_pin",
        (
            "reset my password for email",
            "reset the password for email",
            "reset my old password for email",
            "reset my password for email access",
        ),
        (
            "reset my pin for login",
            "reset the pin for login",
            "reset my old pin for login",
            "reset my pin for login access",
        ),
        ("reset my credentials", "reset my details"),
        "reset my password for email and my pin for login",
    ),
    Family(
        "connect_office_vpn",
        "disconnect_office_vpn",
        (
            "connect to the office vpn",
            "connect to the vpn",
            "connect my laptop to the office vpn",
            "connect to the office vpn server",
        ),
        (
            "disconnect from the office vpn",
            "disconnect from the vpn",
            "disconnect my laptop from the office vpn",
            "disconnect from the office vpn server",
        ),
        ("use the office vpn", "toggle the vpn"),
        "connect or disconnect the office vpn",
    ),
    Family(
        "install_video_app",
        "remove_chat_app",
        (
            "install the video app",
            "install a video app",
            "install the new video app",
            "install the video app on my machine",
        ),
        (
            "remove the chat app",
            "remove a chat app",
            "remove the new chat app",
            "remove the chat app on my machine",
        ),
        ("sort out the app", "manage the app"),
        "install the video app and remove the chat app",
    ),
    Family(
        "schedule_team_meeting",
        "cancel_team_meeting",
        (
            "schedule the team meeting",
            "schedule a team meeting",
            "schedule the weekly team meeting",
            "schedule the team meeting for monday",
        ),
        (
            "cancel the team meeting",
            "cancel a team meeting",
            "cancel the weekly team meeting",
            "cancel the team meeting for monday",
        ),
        ("handle the team meeting", "deal with the team meeting"),
        "schedule or cancel the team meeting",
    ),
    Family(
        "order_laptop",
        "order_monitor",
        (
            "order a new laptop",
            "order a replacement laptop",
            "order a new laptop for my desk",
            "order a new laptop online",
        ),
        (
            "order a new monitor",
            "order a replacement monitor",
            "order a new monitor for my desk",
            "order a new monitor online",
        ),
        ("order new equipment", "order some new hardware"),
        "order a new laptop and a new monitor",
    ),
)

HYPERNYM_TRIPLES = [
    ("savings", "checking", "type"),
    ("upgrade", "downgrade", "change"),
    ("schedule", "cancel", "manage"),
    ("laptop", "monitor", "device"),
    ("printing", "scanning", "task"),
]

# Tokens that appear in generated questions, templates and rejection phrases
# but not necessarily in the corpus itself.
_EXTRA_TOKENS = (
    "what do does you i we want to a an the or and type of are talking about mean "
    "none them neither no something else"
).split()


def synthetic_corpus() -> Corpus:
    """20 intents x 40 utterances: 24 keyworded plus 16 abstract per intent."""
    utterances = []
    for family in FAMILIES:
        abstract = [
            frame.format(vp=vp) for vp in family.shared_vps for frame in ABSTRACT_FRAMES
        ]
        for intent, vps in ((family.intent_a, family.vps_a), (family.intent_b, family.vps_b)):
            texts = [frame.format(vp=vp) for vp in vps for frame in KEYWORD_FRAMES]
            texts += abstract * ABSTRACT_COPIES
            for text in texts:
                utterances.append(LabeledUtterance(text, intent))
    return Corpus(tuple(utterances))


def blended_ambiguous() -> list[AmbiguousExample]:
    """>= 200 two-intent examples: abstract phrasings and explicit-both texts."""
    examples = []
    for family in FAMILIES:
        vps = list(family.shared_vps) + [family.both_vp]
        for vp in vps:
            for frame in FRAMES:
                examples.append(
                    AmbiguousExample(frame.format(vp=vp), family.intent_a, family.intent_b)
                )
    return examples


def _all_tokens() -> list[str]:
    tokens = set(_EXTRA_TOKENS)
    for phrase in DEFAULT_NONE_PHRASES:
        tokens.update(tokenize(phrase))
    corpus = synthetic_corpus()
    for u in corpus.utterances:
        tokens.update(tokenize(u.text))
    for example in blended_ambiguous():
        tokens.update(tokenize(example.text))
    for _, _, hyper in HYPERNYM_TRIPLES:
        tokens.add(hyper)
    return sorted(tokens)


def synthetic_vectors(dim: int = 16, seed: int = 13) -> WordVectorTable:
    """One deterministic random unit vector per token of the bundled data."""
    rng = np.random.default_rng(seed)
    vectors = {}
    for token in _all_tokens():
        v = rng.standard_normal(dim)
        vectors[token] = v / np.linalg.norm(v)
    return WordVectorTable(vectors)


def synthetic_hypernyms() -> HypernymLexicon:
    return HypernymLexicon.from_pairs(HYPERNYM_TRIPLES)


# -- small banking fixture ---------------------------------------------------

_BANK_FAMILY = FAMILIES[0]


def banking_corpus() -> Corpus:
    """Two balanced banking intents: 8 keyworded plus 2 abstract texts x 3 copies.

    At the default 0.2 calibration split this yields a holdout of one copy of
    each abstract text plus one keyworded row per intent, so the fitted
    temperature neither collapses (pure-confident holdout) nor explodes
    (pure-contradiction holdout).
    """
    utterances = []
    frames = (FRAMES[0], FRAMES[1])  # want / need
    abstract = [FRAMES[0].format(vp=vp) for vp in _BANK_FAMILY.shared_vps]
    for intent, vps in (
        (_BANK_FAMILY.intent_a, _BANK_FAMILY.vps_a),
        (_BANK_FAMILY.intent_b, _BANK_FAMILY.vps_b),
    ):
        texts = [frame.format(vp=vp) for vp in vps for frame in frames]
        texts += abstract * 3
        for text in texts:
            utterances.append(LabeledUtterance(text, intent))
    return Corpus(tuple(utterances))


def banking_vectors() -> WordVectorTable:
    """One-hot basis vectors over the banking vocabulary, for exact geometry."""
    tokens = set(_EXTRA_TOKENS)
    for phrase in DEFAULT_NONE_PHRASES:
        tokens.update(tokenize(phrase))
    for u in banking_corpus().utterances:
        tokens.update(tokenize(u.text))
    ordered = sorted(tokens)
    dim = len(ordered)
    vectors = {}
    for i, token in enumerate(ordered):
        v = np.zeros(dim)
        v[i] = 1.0
        vectors[token] = v
    return WordVectorTable(vectors)


def banking_hypernyms() -> HypernymLexicon:
    return HypernymLexicon.from_pairs([("savings", "checking", "type")])


def bundled_split() -> tuple[Corpus, Corpus]:
    """The canonical train/test split of the bundled corpus."""
    return split(synthetic_corpus(), SPLIT_FRACTION, SPLIT_SEED)


def write_dataset(directory) -> dict[str, Path]:
    """Materialize the bundled data as files for the CLI; returns the paths."""
    from clarifier.engine import EngineConfig, save_config

    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    train, test = bundled_split()
    paths = {
        "train": directory / "train.jsonl",
        "test": directory / "test.jsonl",
        "ambiguous": directory / "ambiguous.jsonl",
        "vectors": directory / "vectors.txt",
        "hypernyms": directory / "hypernyms.tsv",
        "config": directory / "config.json",
    }
    save_corpus(train, paths["train"])
    save_corpus(test, paths["test"])
    save_ambiguous(blended_ambiguous(), paths["ambiguous"])
    save_vectors(synthetic_vectors(), paths["vectors"])
    save_hypernyms(synthetic_hypernyms(), paths["hypernyms"])
    save_config(EngineConfig(), paths["config"])
    return paths

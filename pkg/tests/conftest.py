import logging

import pytest

from clarifier import data
from clarifier.engine import EngineConfig, build_engine

logging.getLogger("clarifier").setLevel(logging.ERROR)


@pytest.fixture(scope="session")
def bundled_corpus():
    return data.synthetic_corpus()


@pytest.fixture(scope="session")
def bundled_split():
    return data.bundled_split()


@pytest.fixture(scope="session")
def blended_set():
    return data.blended_ambiguous()


@pytest.fixture(scope="session")
def bundled_engine(bundled_split):
    train, _ = bundled_split
    return build_engine(
        train, EngineConfig(), data.synthetic_vectors(), data.synthetic_hypernyms()
    )


@pytest.fixture(scope="session")
def banking_engine():
    return build_engine(
        data.banking_corpus(),
        EngineConfig(),
        data.banking_vectors(),
        data.banking_hypernyms(),
    )

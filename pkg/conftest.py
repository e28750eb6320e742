import os

import pytest
from hypothesis import HealthCheck, settings

from systems import System, parse_system, parse_witness

settings.register_profile(
    "tracecheck",
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.data_too_large],
)
settings.load_profile("tracecheck")

CORPUS = os.path.join(os.path.dirname(os.path.abspath(__file__)), "corpus")


def corpus_path(name: str) -> str:
    return os.path.join(CORPUS, name)


def load_corpus_system(name: str) -> System:
    with open(corpus_path(name), "rb") as f:
        return parse_system(f.read())


def load_corpus_witness(name: str, X: System, Y: System):
    with open(corpus_path(name), "rb") as f:
        return parse_witness(f.read(), X, Y)


@pytest.fixture
def corpus():
    """Loader for bundled systems: corpus("fig1_X")."""
    return lambda stem: load_corpus_system(f"{stem}.sys")

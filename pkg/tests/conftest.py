import pytest

from trajauth.synth import generate_corpus


@pytest.fixture(scope="session")
def small_corpus():
    """3 users x 2 sessions x 3 trials; cheap enough for window and model plumbing."""
    return generate_corpus(3, 11, trials=3)


@pytest.fixture(scope="session")
def corpus4():
    return generate_corpus(4, 0)

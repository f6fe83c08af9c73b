import pytest
from hypothesis import HealthCheck, settings

from traindial.pipeline import SystemStack, load_default_stack

settings.register_profile(
    "suite", derandomize=True, deadline=None,
    suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("suite")


@pytest.fixture(scope="session")
def stack() -> SystemStack:
    return load_default_stack()


@pytest.fixture(scope="session")
def lexicon(stack):
    return stack.lexicon


@pytest.fixture(scope="session")
def grammar(stack):
    return stack.grammar


@pytest.fixture(scope="session")
def family(stack):
    return stack.family


@pytest.fixture(scope="session")
def timetable(stack):
    return stack.timetable


@pytest.fixture(scope="session")
def index(stack):
    return stack.index

import pytest

from relwb import corpus
from relwb.typecheck import TypedModel, analyze


def analyzed(source: str) -> TypedModel:
    """Analyze a source text that the test expects to be clean."""
    tm, diags = analyze(source)
    assert tm is not None, f"model failed analysis: {diags}"
    return tm


@pytest.fixture(scope="session")
def queue_tm() -> TypedModel:
    return corpus.typed_model("queue")


@pytest.fixture(scope="session")
def lts_tm() -> TypedModel:
    return corpus.typed_model("lts")


@pytest.fixture(scope="session")
def cv_tm() -> TypedModel:
    return corpus.typed_model("cv")


@pytest.fixture(scope="session")
def selfref_tm() -> TypedModel:
    return corpus.typed_model("selfref")

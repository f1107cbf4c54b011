import pytest

from qproc.wbp import UniformTreeSource


@pytest.fixture
def tree():
    return UniformTreeSource(20240601)

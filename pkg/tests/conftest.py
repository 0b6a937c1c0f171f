import pytest

from helpers import cascade_system, path_graph_system, rotation_system


@pytest.fixture
def cascade():
    return cascade_system()


@pytest.fixture
def rotation():
    return rotation_system()


@pytest.fixture
def path5():
    return path_graph_system(5)

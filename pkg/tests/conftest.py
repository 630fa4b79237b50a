import os
import random

import pytest

DATA = os.path.join(os.path.dirname(__file__), "data")


@pytest.fixture
def rng():
    return random.Random(12345)


@pytest.fixture
def data_path():
    return lambda name: os.path.join(DATA, name)

import os
import sys

import pytest

sys.path.insert(0, os.path.join(os.path.dirname(__file__), ".."))

from components.options import PutModel, build_put_game
from utils.game_model import Rate, two_point
from utils.growth_solver import GrowthSolver


@pytest.fixture
def solver():
    return GrowthSolver()


@pytest.fixture
def coin_game():
    """a=19, b=1 with probability 1/2 each"""
    return two_point(19, 1)


@pytest.fixture
def base_rate():
    return Rate(0.05)


@pytest.fixture(scope="session")
def put_model():
    return PutModel(S=90, K=120, T=2, sigma=0.1, r=0.04)


@pytest.fixture(scope="session")
def put_game(put_model):
    return build_put_game(put_model)

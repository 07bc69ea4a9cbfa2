import numpy as np
import pytest

from oppsched import build_model, rate_region


@pytest.fixture(scope="session")
def two_state_model():
    # Reference model: two equally likely states, rate options {0,1} and {0,2}.
    return build_model(
        ["s1", "s2"], [0.5, 0.5], [[[0.0], [1.0]], [[0.0], [2.0]]]
    )


@pytest.fixture(scope="session")
def two_state_region(two_state_model):
    return rate_region(two_state_model)


@pytest.fixture(scope="session")
def simplex_model():
    # One state whose options span the unit simplex corners.
    return build_model(
        ["s"], [1.0], [[[1.0, 0.0], [0.0, 1.0], [0.0, 0.0]]]
    )


@pytest.fixture(scope="session")
def simplex_region(simplex_model):
    return rate_region(simplex_model)


def random_small_model(rng: np.random.Generator, max_states=4, max_options=4, max_dim=3):
    n = int(rng.integers(1, max_states + 1))
    m = int(rng.integers(1, max_dim + 1))
    probs = rng.random(n) + 0.05
    probs = probs / probs.sum()
    options = [
        rng.uniform(-1.0, 1.0, size=(int(rng.integers(1, max_options + 1)), m))
        for _ in range(n)
    ]
    return build_model([f"s{i}" for i in range(n)], probs, options)

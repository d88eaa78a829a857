import itertools

import numpy as np
import pytest

from secmux.channels import Dist, Dmc, WiretapPair


def binary_entropy(p: float) -> float:
    if p in (0.0, 1.0):
        return 0.0
    return float(-p * np.log2(p) - (1 - p) * np.log2(1 - p))


def random_dist(rng, k: int) -> Dist:
    p = rng.random(k) + 0.05
    return Dist(p / p.sum())


def random_channel(rng, k_in: int, k_out: int) -> Dmc:
    m = rng.random((k_in, k_out)) + 0.05
    return Dmc(m / m.sum(axis=1, keepdims=True))


def all_words(alphabet: int, n: int):
    return itertools.product(range(alphabet), repeat=n)


@pytest.fixture
def rng():
    return np.random.default_rng(20260809)


@pytest.fixture
def bsc_pair():
    return WiretapPair(Dmc.bsc(0.05), Dmc.bsc(0.2))

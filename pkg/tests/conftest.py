import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def within_sigmas(successes, trials, p, sigmas=4.0):
    """Binomial check |rate - p| <= sigmas * sqrt(p(1-p)/trials); exact when p is 0 or 1."""
    rate = successes / trials
    sd = (p * (1 - p) / trials) ** 0.5
    if sd == 0:
        return rate == p
    return abs(rate - p) <= sigmas * sd

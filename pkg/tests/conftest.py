import numpy as np
import pytest

from gibbsline import bundled_pair


@pytest.fixture
def log_quadratic():
    return bundled_pair("log_quadratic")


@pytest.fixture
def tie_two_loops():
    return bundled_pair("tie_two_loops")


@pytest.fixture
def renewal_weighted():
    return bundled_pair("renewal_weighted")


@pytest.fixture
def rng():
    return np.random.default_rng(20260808)


def random_stochastic(incidence: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Random stochastic matrix supported exactly on the incidence."""
    n = incidence.shape[0]
    P = np.zeros((n, n))
    for i in range(n):
        js = np.flatnonzero(incidence[i])
        P[i, js] = rng.dirichlet(np.ones(js.size))
    return P


def stationary_of(P: np.ndarray) -> np.ndarray:
    """Exact stationary distribution of an irreducible stochastic matrix."""
    n = P.shape[0]
    A = np.vstack([(P.T - np.eye(n))[:-1], np.ones(n)])
    b = np.zeros(n)
    b[-1] = 1.0
    pi = np.linalg.solve(A, b)
    pi = np.clip(pi, 0.0, None)
    return pi / pi.sum()

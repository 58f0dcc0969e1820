import functools

import numpy as np
import pytest

from dimerscat.bhcore import BHParams, diagonalize, q_matrix, separatrix


@functools.lru_cache(maxsize=None)
def target(n, u=5.0, bias=None):
    """Cached (params, eigensystem, Q) for a double well."""
    p = BHParams.from_control(n, u, bias=bias)
    es = diagonalize(p)
    return p, es, q_matrix(es)


@functools.lru_cache(maxsize=None)
def target_sep(n, u=5.0, bias=None):
    p, es, q = target(n, u, bias)
    return p, es, q, separatrix(p, es)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)

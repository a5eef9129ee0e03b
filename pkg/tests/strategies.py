"""Hypothesis strategies shared by the property tests."""

import numpy as np
from hypothesis import strategies as st

from fastdrive.operators import random_density_matrix, random_hermitian

seeds = st.integers(min_value=0, max_value=2**32 - 1)
dims = st.integers(min_value=1, max_value=4)
betas = st.floats(min_value=0.05, max_value=5.0)


def hermitian_from(seed, dim, scale=1.0):
    return random_hermitian(dim, np.random.default_rng(seed), scale)


def density_from(seed, dim):
    return random_density_matrix(dim, np.random.default_rng(seed))

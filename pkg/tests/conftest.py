import numpy as np
import pytest
from hypothesis import strategies as st

from polbell.gaussian import N_MODES


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_unitary(rng, n=2, special=False):
    z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    q = q * (np.diag(r) / np.abs(np.diag(r)))
    if special:
        q = q / np.linalg.det(q) ** (1 / n)
    return q


angles = st.floats(0.0, 2 * np.pi, allow_nan=False)
gains = st.floats(0.0, 2.0, allow_nan=False)
mode_pairs = st.tuples(st.integers(0, N_MODES - 1), st.integers(0, N_MODES - 1)).filter(lambda p: p[0] != p[1])
efficiencies = st.lists(st.floats(0.0, 1.0, allow_nan=False), min_size=4, max_size=4)

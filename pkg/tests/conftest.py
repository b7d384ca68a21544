import numpy as np
from hypothesis import settings
from hypothesis import strategies as st

from quasinormal.core import OperatorTuple

settings.register_profile("default", max_examples=40, deadline=None)
settings.load_profile("default")

J = np.array([[0, 1], [0, 0]], dtype=complex)
D12 = np.diag([1.0, 2.0]).astype(complex)
D34 = np.diag([3.0, 4.0]).astype(complex)


def diag_pair():
    return OperatorTuple([D12, D34])


def jordan():
    return OperatorTuple([J])


@st.composite
def tuples(draw, max_dim=5, max_d=3, dim=None, d=None):
    """Random complex tuples with entries bounded by 2 in modulus."""
    n = dim if dim is not None else draw(st.integers(1, max_dim))
    k = d if d is not None else draw(st.integers(1, max_d))
    seed = draw(st.integers(0, 2**32 - 1))
    rng = np.random.default_rng(seed)
    return OperatorTuple(rng.uniform(-1, 1, (k, n, n)) + 1j * rng.uniform(-1, 1, (k, n, n)))


seeds = st.integers(0, 2**32 - 1)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)

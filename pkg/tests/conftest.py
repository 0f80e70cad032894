import itertools
import sys
from fractions import Fraction

import numpy as np
import pytest
import sympy
from hypothesis import HealthCheck, settings

from spseq.linalg import Field, use_field

settings.register_profile(
    "spseq",
    max_examples=40,
    deadline=None,
    derandomize=True,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.data_too_large],
)
settings.load_profile("spseq")


@pytest.fixture(autouse=True)
def _default_field():
    with use_field(Field(7)) as f:
        yield f


@pytest.fixture(params=["Fp:7", "Fp:2", "Q"], ids=["F7", "F2", "Q"])
def any_field(request):
    with use_field(request.param) as f:
        yield f


# -- independent oracles ----------------------------------------------------------
# These never touch spseq's elimination code.


def brute_kernel_dim(m, p: int) -> int:
    """log_p of the number of solutions of m x = 0, by enumeration."""
    m = np.asarray(m, dtype=np.int64) % p
    cols = m.shape[1]
    count = 0
    for x in itertools.product(range(p), repeat=cols):
        if not np.any((m @ np.array(x, dtype=np.int64)) % p):
            count += 1
    k = 0
    while p**k < count:
        k += 1
    assert p**k == count
    return k


def sympy_rank_q(m) -> int:
    return sympy.Matrix([[Fraction(x) for x in row] for row in np.asarray(m).tolist()]).rank() if np.size(m) else 0


def oracle_rank(m, field: Field) -> int:
    m = np.asarray(m)
    if m.size == 0:
        return 0
    if field.p is None:
        return sympy_rank_q(m)
    return m.shape[1] - brute_kernel_dim(m, field.p)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in mod.RESULTS:
        terminalreporter.write_line(line)

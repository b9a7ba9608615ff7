import numpy as np
import pytest

from iblstab import shear_flow


@pytest.fixture(scope="session")
def exp_profile():
    return shear_flow.exponential()


@pytest.fixture(scope="session")
def two_exp():
    return shear_flow.two_exponential()


@pytest.fixture(scope="session")
def inv3():
    return shear_flow.inverse_family(3.0)


@pytest.fixture(scope="session")
def inv35():
    return shear_flow.inverse_family(3.5)


@pytest.fixture
def rng():
    return np.random.default_rng(20261015)


# acceptance bookkeeping: one line per criterion in the terminal summary
_ACCEPTANCE = {}


@pytest.fixture
def report():
    def record(num, part, ok, detail):
        _ACCEPTANCE.setdefault(num, []).append((part, bool(ok), detail))
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(_ACCEPTANCE):
        parts = _ACCEPTANCE[num]
        verdict = "PASS" if all(ok for _, ok, _ in parts) else "FAIL"
        details = "; ".join(f"{p}: {'ok' if ok else 'FAILED'} ({d})" for p, ok, d in parts)
        terminalreporter.write_line(f"criterion {num:2d}: {verdict}  {details}")

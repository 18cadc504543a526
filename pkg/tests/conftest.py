import numpy as np
import pytest
from hypothesis import settings

from polaron_fcs.bath import BathParams, kappa
from polaron_fcs.generator import build_context
from polaron_fcs.system import DriveProtocol, Frame

settings.register_profile("default", deadline=None, max_examples=40)
settings.load_profile("default")

BENCH_BATH = BathParams(alpha=0.4, omega_c=10.0, beta=1.0)
BENCH_PROTOCOL = DriveProtocol(nu=0.1, t_i=-100.0, t_f=100.0)


@pytest.fixture(scope="session")
def bench_bath():
    return BENCH_BATH


@pytest.fixture(scope="session")
def bench_protocol():
    return BENCH_PROTOCOL


@pytest.fixture(scope="session")
def bench_kappa():
    return kappa(BENCH_BATH)


@pytest.fixture(scope="session")
def pme_ctx():
    return build_context(BENCH_PROTOCOL, BENCH_BATH, Frame.POLARON)


@pytest.fixture(scope="session")
def wcme_ctx():
    return build_context(BENCH_PROTOCOL, BENCH_BATH, Frame.WEAK)


@pytest.fixture(scope="session", params=["polaron", "weak"])
def any_ctx(request, pme_ctx, wcme_ctx):
    return pme_ctx if request.param == "polaron" else wcme_ctx


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# ---------------------------------------------------------------- acceptance report
# test_acceptance.py records one (passed, detail) entry per criterion; the summary
# below prints them after the run, listing criteria whose test never recorded a result.

ACCEPTANCE = {}
ACCEPTANCE_CRITERIA = [str(i) for i in range(1, 13)]


def _criterion_order(key):
    head = "".join(ch for ch in key if ch.isdigit())
    return int(head), key


def pytest_terminal_summary(terminalreporter):
    ran_acceptance = any("test_acceptance" in str(r.nodeid)
                         for reports in terminalreporter.stats.values() for r in reports
                         if hasattr(r, "nodeid"))
    if not ran_acceptance:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for key in sorted(set(ACCEPTANCE) | set(ACCEPTANCE_CRITERIA), key=_criterion_order):
        if key in ACCEPTANCE:
            ok, detail = ACCEPTANCE[key]
            terminalreporter.write_line(f"criterion {key:<4} {'PASS' if ok else 'FAIL'}  {detail}")
        else:
            terminalreporter.write_line(f"criterion {key:<4} NOT RUN")

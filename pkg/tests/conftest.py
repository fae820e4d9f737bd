import os

import numpy as np
import pytest


@pytest.fixture(scope="session", autouse=True)
def isolated_cache(tmp_path_factory):
    """Point the reference cache at a fresh per-session directory."""
    path = tmp_path_factory.mktemp("refcache")
    old = os.environ.get("HERMITE_NLS_CACHE")
    os.environ["HERMITE_NLS_CACHE"] = str(path)
    yield path
    if old is None:
        os.environ.pop("HERMITE_NLS_CACHE", None)
    else:
        os.environ["HERMITE_NLS_CACHE"] = old


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_coeffs(rng, M, decay=None):
    """Complex coefficients; with ``decay`` they shrink like exp(-decay * m)."""
    a = rng.standard_normal(M) + 1j * rng.standard_normal(M)
    if decay is not None:
        a *= np.exp(-decay * np.arange(M))
    return a


# -- acceptance reporting ----------------------------------------------------

_CRITERIA: dict = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, clause): acceptance criterion clause")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None or report.when != "call" and not (report.when == "setup" and report.failed):
        return
    number, clause = marker.args
    detail = "; ".join(str(v) for k, v in item.user_properties if k == "detail")
    _CRITERIA.setdefault(number, []).append((clause, report.passed, detail))


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        clauses = _CRITERIA[number]
        ok = all(passed for _, passed, _ in clauses)
        parts = ", ".join(f"{c}={'ok' if p else 'FAILED'}" + (f" [{d}]" if d else "") for c, p, d in clauses)
        tr.write_line(f"criterion {number}: {'PASS' if ok else 'FAIL'}  {parts}")

import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from peakcast.models import ann  # noqa: E402

CRITERIA = {
    1: "selection scores match the normal-equation oracle (rel 1e-8)",
    2: "MLR residual orthogonality and normal-equation coefficients (1e-8)",
    3: "QR pinball loss matches LP oracle (rel 1e-6); odd-N median exact",
    4: "SVR KKT violation < 1e-3; N=5 dual matches enumeration (1e-6)",
    5: "ANN Jacobian vs finite differences (rel 1e-4); LM objective non-increasing",
    6: "bootstrap 95% CI coverage within 90-98% over 500 trials",
    7: "metric identities on 1000 series",
    8: "horizon MAPE non-decreasing (5% slack); zero noise gives training MAPE",
    9: "generator bias -2 recovered within 3 standard errors",
    10: "identical config and seed give byte-identical outputs",
}

_outcomes: dict[int, list[bool]] = {}
LM_RUNS: list[dict] = []


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n): acceptance criterion number")


@pytest.fixture(autouse=True, scope="session")
def _watch_levenberg_marquardt():
    """Record every LM run in the session and fail the run that increases its objective."""
    original = ann.levenberg_marquardt

    def watched(*args, **kwargs):
        theta, diag = original(*args, **kwargs)
        h = np.asarray(diag["objective_history"])
        ok = bool(np.all(np.diff(h) <= 0))
        LM_RUNS.append({"epochs": diag["epochs"], "monotone": ok})
        assert ok, f"LM objective increased: {h}"
        return theta, diag

    ann.levenberg_marquardt = watched
    yield
    ann.levenberg_marquardt = original


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    n = marker.args[0]
    if rep.when == "call" or (rep.when == "setup" and not rep.passed):
        _outcomes.setdefault(n, []).append(rep.passed)


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for n, text in CRITERIA.items():
        results = _outcomes.get(n)
        if not results:
            status = "NOT RUN"
        else:
            status = "PASS" if all(results) else "FAIL"
        if n == 5 and status == "PASS" and not all(r["monotone"] for r in LM_RUNS):
            status = "FAIL"
        extra = f" [{len(LM_RUNS)} LM runs watched]" if n == 5 else ""
        tr.write_line(f"{status:7} {n:2}. {text}{extra}")

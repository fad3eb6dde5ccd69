import os

import pytest

from lrlab.curves import WeierstrassCurve

CURVES = {
    "11a1": (0, -1, 1, -10, -20),
    "35a1": (0, 1, 1, 9, 1),
    "37a1": (0, 0, 1, -1, 0),
    "2351a1": (1, 0, 1, -5, -5),
    "25861i1": (1, 1, 1, -17, 30),
}


@pytest.fixture(autouse=True)
def _isolated_cache(tmp_path, monkeypatch):
    # never touch the network or the user's cache from tests
    monkeypatch.setenv("LRLAB_CACHE_DIR", str(tmp_path / "cache"))
    monkeypatch.setenv("LRLAB_OFFLINE", "1")
    monkeypatch.delenv("LRLAB_LMFDB_URL", raising=False)


@pytest.fixture(scope="session")
def curves():
    return {k: WeierstrassCurve.from_ainvs(v, label=k) for k, v in CURVES.items()}


@pytest.fixture(scope="session")
def e11(curves):
    return curves["11a1"]


def backends():
    return ["numpy", "numba"] if os.environ.get("LRLAB_NO_NUMBA", "0") in ("", "0") else ["numpy"]


def pytest_terminal_summary(terminalreporter):
    mod = __import__("sys").modules.get("test_acceptance") or __import__("sys").modules.get("tests.test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)

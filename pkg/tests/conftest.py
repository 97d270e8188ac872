import pytest

from mapeval import _accel

BACKENDS = ["numpy"] + (["numba"] if _accel.HAVE_NUMBA else [])


@pytest.fixture(params=BACKENDS)
def backend(request, monkeypatch):
    """Run a kernel test once per available backend."""
    monkeypatch.setattr(_accel, "USE_NUMBA", request.param == "numba")
    return request.param


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    # keep the call-phase report on the item so fixtures can see the outcome
    outcome = yield
    rep = outcome.get_result()
    if rep.when == "call":
        item.rep_call = rep

import pytest


@pytest.fixture(autouse=True)
def single_worker(monkeypatch):
    # Results are worker-count independent by design (verified by the
    # determinism tests, which override this); one worker avoids pool-spawn
    # overhead everywhere else.
    monkeypatch.setenv("INEQ2D_THREADS", "1")

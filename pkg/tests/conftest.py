import pytest

from pgcl.constructions import (
    build_abelian,
    build_cyclic_derived,
    build_extraspecial,
    build_free_class2,
    build_heisenberg,
    build_huppert_example,
    build_scalar_semidirect,
)


@pytest.fixture(scope="session")
def heis5():
    return build_heisenberg(5)


@pytest.fixture(scope="session")
def ext25():
    return build_extraspecial(5, 25)


@pytest.fixture(scope="session")
def huppert5():
    return build_huppert_example(5)


@pytest.fixture(scope="session")
def huppert7():
    return build_huppert_example(7)


@pytest.fixture(scope="session")
def f3():
    return build_free_class2(5, 3)


@pytest.fixture(scope="session")
def f4():
    return build_free_class2(5, 4)


@pytest.fixture(scope="session")
def hall_group():
    """(C_125)^2 x| C_25 acting by u -> u^6: G' = C_25 x C_25 is powerful."""
    return build_scalar_semidirect(5, 3, 2)


@pytest.fixture(scope="session")
def small_semidirect():
    return build_scalar_semidirect(5, 2, 1)


@pytest.fixture(scope="session")
def cyclic_derived():
    return build_cyclic_derived(5)


@pytest.fixture(scope="session")
def abelian5():
    return build_abelian(5, 3)


# -- acceptance reporting ---------------------------------------------------------------

import time

_ACCEPTANCE_KEY = pytest.StashKey[list]()


class CriterionRecorder:
    """Collects named checks for one acceptance criterion plus its runtime budget."""

    def __init__(self):
        self.number = None
        self.title = ""
        self.limit = None
        self.checks: list[tuple[str, bool, str]] = []
        self.t0 = time.perf_counter()
        self.finished = False

    def start(self, number: str, title: str, limit_s: float) -> None:
        self.number, self.title, self.limit = number, title, limit_s
        self.t0 = time.perf_counter()

    def check(self, name: str, ok: bool, detail: str = "") -> bool:
        self.checks.append((name, bool(ok), detail))
        return bool(ok)

    @property
    def elapsed(self) -> float:
        return time.perf_counter() - self.t0

    def finish(self) -> None:
        self.seconds = self.elapsed
        self.check("runtime", self.seconds <= self.limit, f"{self.seconds:.1f}s <= {self.limit:g}s")
        self.finished = True
        bad = [f"{n}: {d}" for n, ok, d in self.checks if not ok]
        assert not bad, "; ".join(bad)

    def line(self) -> str:
        ok = self.finished and all(ok for _, ok, _ in self.checks)
        bad = [f"{n} ({d})" if d else n for n, o, d in self.checks if not o]
        if not self.finished and not bad:
            bad = ["raised before completion"]
        secs = getattr(self, "seconds", self.elapsed)
        status = "PASS" if ok else "FAIL"
        tail = "" if ok else "  failed: " + "; ".join(bad)
        return f"criterion {self.number:<4} {status}  {self.title} [{secs:.1f}s, limit {self.limit:g}s]{tail}"


@pytest.fixture
def criterion(request):
    rec = CriterionRecorder()
    yield rec
    if rec.number is not None:
        request.config.stash.setdefault(_ACCEPTANCE_KEY, []).append(rec.line())


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_ACCEPTANCE_KEY, [])
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    for line in lines:
        terminalreporter.write_line(line)

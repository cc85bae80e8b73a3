import pytest

from conicfibres.forms import BinaryQuadraticForm as Q

# one pair per profile case, plus a second different-fields pair
CORPUS = [
    (Q(1, 0, -1), Q(1, 0, -1)),   # both split over Q
    (Q(1, 0, -1), Q(1, 0, 1)),    # only f splits over Q
    (Q(2, 0, 3), Q(1, 1, 0)),     # only g splits over Q
    (Q(1, 0, 1), Q(2, 2, 1)),     # same imaginary quadratic field
    (Q(1, 0, 1), Q(1, 0, -2)),    # different fields
    (Q(2, 0, 3), Q(1, 1, 1)),     # different fields, f never a square
]

_CRITERIA = {}


@pytest.fixture
def record_criterion():
    def record(n: int, ok: bool, detail: str = "") -> bool:
        _CRITERIA[n] = (ok, detail)
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_CRITERIA):
        ok, detail = _CRITERIA[n]
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}")

import numpy as np
import pytest

from chunkreg.summaries import SummaryStatistics


def dense_stats(x, y, intercept=True):
    """Whole-matrix oracle: build the design and multiply it out in one go."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    design = np.hstack([np.ones((x.shape[0], 1)), x]) if intercept else x
    return design.T @ design, design.T @ y, float(y @ y), design


def stats_from(x, y, intercept=False):
    xtx, xty, yty, _ = dense_stats(x, y, intercept)
    xtx = (xtx + xtx.T) / 2
    return SummaryStatistics(xtx.shape[0], intercept, len(y), xtx, xty, yty)


def write_csv(path, rows, delimiter=",", fmt="%.17g"):
    with open(path, "w") as fh:
        for r in rows:
            fh.write(delimiter.join(fmt % v if not isinstance(v, str) else v for v in r) + "\n")
    return path


def random_spd(rng, p, cond=10.0):
    q, _ = np.linalg.qr(rng.standard_normal((p, p)))
    eig = np.exp(rng.uniform(0, np.log(cond), p))
    a = q @ np.diag(eig) @ q.T
    return (a + a.T) / 2


def rel_close(a, b, rtol):
    np.testing.assert_allclose(a, b, rtol=rtol, atol=0)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def two_row():
    """X = [[1,2],[1,3]] (intercept + one predictor), Y = (1, 2)."""
    return np.array([[2.0], [3.0]]), np.array([1.0, 2.0])


ACCEPTANCE_LINES: list[str] = []


def report(criterion: int, ok: bool, detail: str) -> None:
    """Record and print one acceptance verdict line."""
    line = f"ACCEPTANCE {criterion}: {'PASS' if ok else 'FAIL'}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)

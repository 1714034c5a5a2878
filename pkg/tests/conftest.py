import cmath
import random

import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

settings.register_profile("default", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@st.composite
def partitions(draw, max_size: int = 8, max_length: int = 6):
    parts = draw(st.lists(st.integers(1, max_size), max_size=max_length))
    parts = sorted(parts, reverse=True)
    out, total = [], 0
    for p in parts:
        if total + p > max_size:
            break
        out.append(p)
        total += p
    return tuple(sorted(out, reverse=True))


def disk_point(rng: random.Random, lo: float = 0.2, hi: float = 0.9) -> complex:
    return cmath.rect(rng.uniform(lo, hi), rng.uniform(0, 2 * cmath.pi))


def disk_points(rng: random.Random, n: int, lo: float = 0.2, hi: float = 0.9) -> tuple[complex, ...]:
    return tuple(disk_point(rng, lo, hi) for _ in range(n))


@pytest.fixture
def rng():
    return random.Random(12345)


# ------------------------------------------------------- acceptance report

SESSION = {"start": None}
ACCEPTANCE: dict[int, tuple[bool, str]] = {}


def pytest_sessionstart(session):
    import time

    SESSION["start"] = time.perf_counter()


def pytest_collection_modifyitems(session, config, items):
    # acceptance criteria run last so the wall-clock criterion sees the whole session
    items.sort(key=lambda item: item.fspath.basename == "test_acceptance.py")


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[k]
        terminalreporter.write_line(f"criterion {k}: {'PASS' if ok else 'FAIL'} -- {detail}")

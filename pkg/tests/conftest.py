from __future__ import annotations

import functools

import pytest
from hypothesis import HealthCheck, settings

from bvhycom.models import (
    complex_torus,
    eta_twist,
    iwasawa_full,
    iwasawa_sigma_invariant,
    kodaira_thurston,
)

settings.register_profile("default", max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

# criterion number -> (title, [(sub-item, ok)]) filled by tests/test_acceptance.py
ACCEPTANCE: dict[int, tuple[str, list[tuple[str, bool]]]] = {}


@functools.lru_cache(maxsize=None)
def model(name: str):
    builders = {
        "kt": kodaira_thurston,
        "iwasawa": iwasawa_full,
        "iwasawa-orbifold": iwasawa_sigma_invariant,
        "torus:1": lambda: complex_torus(1),
        "torus:2": lambda: complex_torus(2),
        "eta:torus:2": lambda: eta_twist(complex_torus(2)),
        "eta:iwasawa-orbifold": lambda: eta_twist(iwasawa_sigma_invariant()),
        "eta:kt": lambda: eta_twist(kodaira_thurston()),
    }
    return builders[name]()


@pytest.fixture(scope="session")
def kt():
    return model("kt")


@pytest.fixture(scope="session")
def iwo():
    return model("iwasawa-orbifold")


@pytest.fixture(scope="session")
def iwfull():
    return model("iwasawa")


@pytest.fixture(scope="session")
def torus2():
    return model("torus:2")


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        title, items = ACCEPTANCE[n]
        ok = bool(items) and all(v for _, v in items)
        tr.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {title}")
        for name, v in items:
            if not v:
                tr.write_line(f"              FAIL  {name}")

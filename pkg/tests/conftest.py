"""Shared fixtures: the two reference surfaces, their assemblies and found budgets."""
from __future__ import annotations

import time

import numpy as np
import pytest

from trisymp import pipeline, spine
from trisymp.config import RunConfig

TORUS_CFG = RunConfig(mesh="torus:8", periods=(1.0, 0.0))
GENUS2_CFG = RunConfig(mesh="octagon:6", periods=pipeline.GENUS2_PERIODS)

_CRITERIA: dict[int, str] = {}


def record(criterion: int, ok: bool, detail: str = "") -> None:
    """Store and print the one-line verdict of an acceptance criterion."""
    line = f"criterion {criterion}: {'PASS' if ok else 'FAIL'}" + (f"  {detail}" if detail else "")
    _CRITERIA[criterion] = line
    print(line)


def pytest_terminal_summary(terminalreporter):
    if _CRITERIA:
        terminalreporter.section("acceptance criteria")
        for k in sorted(_CRITERIA):
            terminalreporter.write_line(_CRITERIA[k])


class Timed:
    def __init__(self, value, seconds: float):
        self.value = value
        self.seconds = seconds


@pytest.fixture(scope="session")
def torus():
    ls = pipeline.load_surface(TORUS_CFG)
    return ls, pipeline.triple_from_config(TORUS_CFG, ls)


@pytest.fixture(scope="session")
def genus2():
    ls = pipeline.load_surface(GENUS2_CFG)
    return ls, pipeline.triple_from_config(GENUS2_CFG, ls)


@pytest.fixture(scope="session")
def torus_asm(torus):
    return spine.build_assembly(torus[1])


@pytest.fixture(scope="session")
def genus2_asm(genus2):
    return spine.build_assembly(genus2[1])


@pytest.fixture(scope="session")
def torus_search(torus) -> Timed:
    t0 = time.perf_counter()
    asm = spine.build_assembly(torus[1])
    res = spine.constant_search(asm)
    return Timed(res, time.perf_counter() - t0)


@pytest.fixture(scope="session")
def genus2_search(genus2) -> Timed:
    t0 = time.perf_counter()
    asm = spine.build_assembly(genus2[1])
    res = spine.constant_search(asm)
    return Timed(res, time.perf_counter() - t0)


@pytest.fixture(scope="session")
def genus2_budget(genus2_asm):
    """A known feasible genus-2 budget for unit tests that should not pay for a search."""
    return spine.ConstantBudget(1e-4, 6.25e-9, 4e7, genus2_asm.default_radii)


@pytest.fixture(scope="session")
def torus_budget(torus_asm):
    return spine.ConstantBudget(float(10**-2.5), 1e-7, 1e7, torus_asm.default_radii)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)

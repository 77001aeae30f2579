import numpy as np
import pytest

from pwhelm.pml import CoefficientFields, GridSpec, MediumModel, PmlConfig, coefficient_fields


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def uniform_fields(n=9, h=1.0, gamma=1.0, k=0.0):
    """Constant medium, no PML: A = B = C = 1 and a constant k (may be 0)."""
    grid = GridSpec(n, n, h, gamma)
    ones = np.ones(grid.shape, dtype=complex)
    return CoefficientFields(
        A={j: ones for j in (-3, -1, 1, 3)},
        B={j: ones for j in (-3, -1, 1, 3)},
        C=ones, k=np.full(grid.shape, float(k)), grid=grid)


def pml_fields(n=40, h=10.0, gamma=1.0, v=2000.0, f=15.0, L=100.0):
    grid = GridSpec(n, n, h, gamma)
    return coefficient_fields(grid, MediumModel.constant(grid, v, f), PmlConfig(L, 1.79, f))


# criterion -> list of (part, ok, detail), filled by test_acceptance
ACCEPTANCE: dict[int, list] = {}


def check(criterion: int, part: str, ok: bool, detail: str = ""):
    """Record an acceptance sub-check and fail the calling test if it does not hold."""
    ACCEPTANCE.setdefault(criterion, []).append((part, bool(ok), detail))
    assert ok, f"criterion {criterion} ({part}): {detail}"


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for c in sorted(ACCEPTANCE):
        parts = ACCEPTANCE[c]
        status = "PASS" if all(ok for _, ok, _ in parts) else "FAIL"
        tr.write_line(f"CRITERION {c:2d} {status}")
        for part, ok, detail in parts:
            tr.write_line(f"    [{'ok' if ok else 'FAIL'}] {part}: {detail}")

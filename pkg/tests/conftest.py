"""Shared random generators for chains and forms."""

from __future__ import annotations

import numpy as np
import pytest

from cubicochain.grid import Chain, GridDomain, boundary


def random_chain(domain: GridDomain, m: int, rng, cells: int = 6, coeff_range: int = 3) -> Chain:
    """Sparse integer m-chain with up to ``cells`` distinct cells."""
    total = domain.num_cells(m)
    idx = rng.choice(total, size=min(cells, total), replace=False)
    coeff = rng.integers(-coeff_range, coeff_range + 1, size=idx.size).astype(np.float64)
    coeff[coeff == 0] = 1.0
    return Chain(domain, m, idx, coeff)


def random_cycle(domain: GridDomain, m: int, rng, cells: int = 4, coeff_range: int = 2) -> Chain:
    """Boundary of a random integer (m+1)-chain, retried until nonzero."""
    while True:
        T = boundary(random_chain(domain, m + 1, rng, cells, coeff_range))
        if not T.is_zero():
            return T


def random_box(n: int, rng, side=(3, 6), h=None) -> GridDomain:
    shape = rng.integers(side[0], side[1] + 1, size=n)
    lo = rng.integers(-3, 4, size=n)
    h = float(rng.choice([0.5, 0.25, 1.0])) if h is None else h
    return GridDomain.box(shape.tolist(), h, lo.tolist())


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    """Print the acceptance lines (one per criterion) after the test report."""
    from . import test_acceptance as acc

    if not acc.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(acc.RESULTS):
        terminalreporter.write_line(acc.format_line(k))
    passed = sum(ok for ok, *_ in acc.RESULTS.values())
    terminalreporter.write_line(f"{passed}/{len(acc.RESULTS)} criteria pass")

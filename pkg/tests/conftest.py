"""Shared fixtures: small reference databases and dataset discovery."""

import os
import sys

import numpy as np
import pytest

from qarm import TransactionDB


def pytest_terminal_summary(terminalreporter):
    # surface one line per acceptance criterion in the run summary
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None) if mod else None
    if lines:
        terminalreporter.section("acceptance criteria")
        for n in sorted(lines):
            terminalreporter.write_line(lines[n])


@pytest.fixture
def dtoy() -> TransactionDB:
    # rows 111, 110, 100, 000 over items {0,1,2}
    return TransactionDB.from_rows([[0, 1, 2], [0, 1], [0], []], n_items=3)


@pytest.fixture
def toy4() -> TransactionDB:
    # item 0 in rows {0,1}, item 1 everywhere, item 2 nowhere
    return TransactionDB.from_rows([[0, 1], [0, 1], [1], [1]], n_items=3)


def random_db(rng: np.random.Generator, n: int, m: int,
              density: float = 0.4) -> TransactionDB:
    rows = rng.random((n, m)) < density
    return TransactionDB.from_rows(
        [list(np.nonzero(r)[0]) for r in rows], n_items=m
    )


def find_dataset(name: str) -> str | None:
    """Locate retail.dat / kosarak.dat without any network access."""
    env = os.environ.get(f"QARM_{name.upper()}")
    here = os.path.dirname(__file__)
    candidates = [
        env,
        os.path.join(here, "data", f"{name}.dat"),
        os.path.join(os.getcwd(), f"{name}.dat"),
        os.path.join(os.getcwd(), "data", f"{name}.dat"),
    ]
    for path in candidates:
        if path and os.path.isfile(path):
            return path
    return None

import numpy as np
import pytest

from gucsynth.symplectic import RngSpec, random_symplectic


def generic(n, seed):
    return random_symplectic(n, RngSpec(seed))


def beam_splitter():
    c = 1 / np.sqrt(2)
    return np.array(
        [[c, 0, c, 0], [0, c, 0, c], [-c, 0, c, 0], [0, -c, 0, c]], dtype=float
    )


def swap():
    return np.array(
        [[0, 0, 1, 0], [0, 0, 0, 1], [1, 0, 0, 0], [0, 1, 0, 0]], dtype=float
    )


@pytest.fixture
def write_json(tmp_path):
    def _write(name, text):
        path = tmp_path / name
        path.write_text(text)
        return str(path)

    return _write


ACCEPTANCE_LINES = {}


def record_criterion(number, name, ok, detail):
    ACCEPTANCE_LINES[number] = f"criterion {number:2d} [{'PASS' if ok else 'FAIL'}] {name}: {detail}"


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for number in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[number])

import numpy as np
import pytest

from pherocom.grid import parse_map

ACCEPTANCE_LINES: list[str] = []


def open_text(height: int, width: int, room: str = "A") -> str:
    rows = ["#" * width]
    rows += ["#" + room * (width - 2) + "#" for _ in range(height - 2)]
    rows.append("#" * width)
    return "\n".join(rows) + "\n"


def open_env(height: int = 9, width: int = 9, room: str = "A"):
    return parse_map(open_text(height, width, room))


def random_env(rng: np.random.Generator, height: int, width: int, wall_p: float = 0.2):
    grid = np.where(rng.random((height, width)) < wall_p, "#", "A")
    grid[0, :] = grid[-1, :] = "#"
    grid[:, 0] = grid[:, -1] = "#"
    if not (grid == "A").any():
        grid[1, 1] = "A"
    return parse_map("\n".join("".join(row) for row in grid))


@pytest.fixture
def env9():
    return open_env(9, 9)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)

"""Environment grids: map parsing, room bookkeeping and cell geometry.

Cells are unit squares addressed as ``(row, col)``; cell centres sit on
integer coordinates, so cell edges fall on half-integers. Distances are
Euclidean between cell centres.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

Cell = tuple[int, int]

WALL = "#"
CORRIDOR = "."


class MapError(ValueError):
    """Raised for malformed map text."""


@dataclass(frozen=True, eq=False)
class Environment:
    """Immutable grid of walls and free cells, with room membership.

    ``free`` is a boolean ``(height, width)`` array. ``room_index`` holds the
    position of the cell's room in ``room_ids`` or -1 for walls and
    corridor cells.
    """

    free: np.ndarray
    room_index: np.ndarray
    room_ids: tuple[str, ...]
    rooms: dict[str, tuple[Cell, ...]] = field(repr=False)
    name: str = ""

    def __post_init__(self) -> None:
        self.free.setflags(write=False)
        self.room_index.setflags(write=False)

    @property
    def height(self) -> int:
        return self.free.shape[0]

    @property
    def width(self) -> int:
        return self.free.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.free.shape

    @property
    def n_rooms(self) -> int:
        return len(self.room_ids)

    def is_free(self, cell: Cell) -> bool:
        r, c = cell
        return 0 <= r < self.height and 0 <= c < self.width and bool(self.free[r, c])

    def room_of(self, cell: Cell) -> str | None:
        idx = self.room_index[cell]
        return None if idx < 0 else self.room_ids[idx]

    def free_cells(self) -> list[Cell]:
        rows, cols = np.nonzero(self.free)
        return list(zip(rows.tolist(), cols.tolist()))

    def to_text(self) -> str:
        lines = []
        for r in range(self.height):
            row = []
            for c in range(self.width):
                if not self.free[r, c]:
                    row.append(WALL)
                else:
                    room = self.room_of((r, c))
                    row.append(CORRIDOR if room is None else room)
            lines.append("".join(row))
        return "\n".join(lines) + "\n"


def parse_map(text: str, name: str = "") -> Environment:
    """Parse map text: ``#`` wall, ``.`` corridor, alphanumerics are rooms."""
    lines = text.replace("\r\n", "\n").replace("\r", "\n").split("\n")
    while lines and lines[-1] == "":
        lines.pop()
    if not lines:
        raise MapError("empty map")
    width = len(lines[0])
    if width == 0 or any(len(line) != width for line in lines):
        raise MapError("map is not rectangular")
    height = len(lines)

    free = np.zeros((height, width), dtype=bool)
    room_index = np.full((height, width), -1, dtype=np.int32)
    members: dict[str, list[Cell]] = {}
    for r, line in enumerate(lines):
        for c, ch in enumerate(line):
            if ch == WALL:
                continue
            if ch == CORRIDOR:
                free[r, c] = True
            elif ch.isascii() and ch.isalnum():
                free[r, c] = True
                members.setdefault(ch, []).append((r, c))
            else:
                raise MapError(f"unknown character {ch!r} at row {r}, col {c}")

    if free[0, :].any() or free[-1, :].any() or free[:, 0].any() or free[:, -1].any():
        raise MapError("map border must be all walls")
    if not members:
        raise MapError("map has no rooms")

    room_ids = tuple(sorted(members))
    for i, rid in enumerate(room_ids):
        for cell in members[rid]:
            room_index[cell] = i
    rooms = {rid: tuple(members[rid]) for rid in room_ids}
    return Environment(free, room_index, room_ids, rooms, name)


def load_map(path: str | Path) -> Environment:
    path = Path(path)
    return parse_map(path.read_text(encoding="utf-8"), name=path.stem)


def _square_distance_bounds_sq(dr: int, dc: int) -> tuple[float, float]:
    """Squared min/max distance from the origin to the closed unit square at (dr, dc)."""
    near_r = max(abs(dr) - 0.5, 0.0)
    near_c = max(abs(dc) - 0.5, 0.0)
    far_r = abs(dr) + 0.5
    far_c = abs(dc) + 0.5
    return near_r * near_r + near_c * near_c, far_r * far_r + far_c * far_c


def cells_on_circumference(env: Environment, center: Cell, radius: float) -> list[Cell]:
    """Free cells whose closed square meets the circle of ``radius`` around ``center``.

    Returned in row-major order.
    """
    r0, c0 = center
    r2 = radius * radius
    reach = int(math.ceil(radius + 0.5))
    out = []
    for r in range(max(r0 - reach, 0), min(r0 + reach, env.height - 1) + 1):
        for c in range(max(c0 - reach, 0), min(c0 + reach, env.width - 1) + 1):
            if not env.free[r, c]:
                continue
            lo, hi = _square_distance_bounds_sq(r - r0, c - c0)
            if lo <= r2 <= hi:
                out.append((r, c))
    return out


def disc_offsets(radius: float) -> list[tuple[int, int, float]]:
    """Offsets ``(dr, dc, d)`` with centre distance ``d <= radius``, row-major."""
    if radius < 0:
        return []
    r2 = radius * radius
    reach = int(math.floor(radius))
    out = []
    for dr in range(-reach, reach + 1):
        for dc in range(-reach, reach + 1):
            d2 = dr * dr + dc * dc
            if d2 <= r2:
                out.append((dr, dc, math.sqrt(d2)))
    return out


def cells_within(env: Environment, center: Cell, radius: float) -> list[tuple[Cell, float]]:
    """Free cells within ``radius`` of ``center`` (centre to centre), with distances."""
    r0, c0 = center
    out = []
    for dr, dc, d in disc_offsets(radius):
        r, c = r0 + dr, c0 + dc
        if 0 <= r < env.height and 0 <= c < env.width and env.free[r, c]:
            out.append(((r, c), d))
    return out


def _segment_touches_cell(a: Cell, b: Cell, cell: Cell) -> bool:
    # Doubled coordinates keep every quantity an exact integer.
    ax, ay = 2 * a[0], 2 * a[1]
    bx, by = 2 * b[0], 2 * b[1]
    lo_x, hi_x = 2 * cell[0] - 1, 2 * cell[0] + 1
    lo_y, hi_y = 2 * cell[1] - 1, 2 * cell[1] + 1
    if max(ax, bx) < lo_x or min(ax, bx) > hi_x:
        return False
    if max(ay, by) < lo_y or min(ay, by) > hi_y:
        return False
    dx, dy = bx - ax, by - ay
    signs = set()
    for x in (lo_x, hi_x):
        for y in (lo_y, hi_y):
            cross = dx * (y - ay) - dy * (x - ax)
            signs.add((cross > 0) - (cross < 0))
    return not (signs == {1} or signs == {-1})


def supercover(a: Cell, b: Cell) -> list[Cell]:
    """All cells touched by the segment between the centres of ``a`` and ``b``.

    Ordered by progress along the segment from ``a``; ties are row-major.
    """
    if a == b:
        return [a]
    dr, dc = b[0] - a[0], b[1] - a[1]
    cells = []
    for r in range(min(a[0], b[0]), max(a[0], b[0]) + 1):
        for c in range(min(a[1], b[1]), max(a[1], b[1]) + 1):
            if _segment_touches_cell(a, b, (r, c)):
                progress = (r - a[0]) * dr + (c - a[1]) * dc
                cells.append((progress, r, c))
    cells.sort()
    return [(r, c) for _, r, c in cells]


def line_clear(env: Environment, a: Cell, b: Cell) -> bool:
    """True iff every cell of the supercover line between ``a`` and ``b`` is free."""
    return all(env.is_free(cell) for cell in supercover(a, b))


def travel_path(a: Cell, b: Cell) -> list[Cell]:
    """Cells traversed moving from ``a`` to ``b``: origin excluded, target included."""
    if a == b:
        return []
    return [cell for cell in supercover(a, b) if cell != a]

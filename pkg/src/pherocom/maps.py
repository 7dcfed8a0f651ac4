"""Bundled surveillance environments.

E1-E3 are 20x30 with 7, 6 and 10 rooms; the primed variants double every
cell in both axes (40x60); E4 is 80x120 with 40 rooms. Layouts are bands
of rooms opening through doors onto corridors running between the bands.
"""

from __future__ import annotations

from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from .grid import Environment, load_map, parse_map

LABELS = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789"


def _split(total: int, parts: int) -> list[int]:
    base, extra = divmod(total, parts)
    return [base + (1 if i < extra else 0) for i in range(parts)]


@dataclass(frozen=True)
class Layout:
    height: int
    width: int
    bands: tuple[tuple[int, ...], ...]
    corridor: int = 2
    door: int = 2
    side_doors: tuple[tuple[int, int], ...] = ()

    def render(self) -> str:
        grid = [["#"] * self.width for _ in range(self.height)]
        n_bands = len(self.bands)
        usable = self.height - 2 - (n_bands - 1) * (self.corridor + 2)
        heights = _split(usable, n_bands)
        label = iter(LABELS)
        row = 1
        spans = []
        for b, widths in enumerate(self.bands):
            top, bottom = row, row + heights[b] - 1
            col = 1
            band_rooms = []
            for w in widths:
                ch = next(label)
                for r in range(top, bottom + 1):
                    for c in range(col, col + w):
                        grid[r][c] = ch
                band_rooms.append((ch, col, col + w - 1))
                col += w + 1
            if col - 1 != self.width - 1:
                raise ValueError(f"band {b} widths do not fill the grid")
            spans.append((top, bottom, band_rooms))
            row = bottom + 1
            if b < n_bands - 1:
                for r in range(row + 1, row + 1 + self.corridor):
                    for c in range(1, self.width - 1):
                        grid[r][c] = "."
                row += self.corridor + 2

        for b, (top, bottom, band_rooms) in enumerate(spans):
            for i, (_, lo, hi) in enumerate(band_rooms):
                width = hi - lo + 1
                door = min(self.door, width)
                # Stagger doors so corridors are not a straight run of openings.
                start = lo + (width - door) * ((i % 3) + 1) // 4
                if b > 0:
                    for c in range(start, start + door):
                        grid[top - 1][c] = "."
                if b < n_bands - 1:
                    for c in range(start, start + door):
                        grid[bottom + 1][c] = "."
        for b, i in self.side_doors:
            top, bottom, band_rooms = spans[b]
            wall_col = band_rooms[i][2] + 1
            grid[(top + bottom) // 2][wall_col] = "."
        return "\n".join("".join(r) for r in grid) + "\n"


def upscale(text: str, factor: int = 2) -> str:
    rows = text.rstrip("\n").split("\n")
    out = []
    for row in rows:
        wide = "".join(ch * factor for ch in row)
        out.extend([wide] * factor)
    return "\n".join(out) + "\n"


LAYOUTS = {
    "e1": Layout(20, 30, ((7, 6, 6, 6), (9, 9, 8)), side_doors=((1, 0),)),
    "e2": Layout(20, 30, ((8, 10, 8), (12, 7, 7)), side_doors=((0, 1),)),
    "e3": Layout(20, 30, ((9, 9, 8), (6, 6, 7, 6), (9, 9, 8)), corridor=1, door=1),
    "e4": Layout(80, 120, tuple(tuple(_split(109, 10)) for _ in range(4)), door=2),
}

ROOM_COUNTS = {"e1": 7, "e2": 6, "e3": 10, "e1p": 7, "e2p": 6, "e3p": 10, "e4": 40}
SHAPES = {"e1": (20, 30), "e2": (20, 30), "e3": (20, 30),
          "e1p": (40, 60), "e2p": (40, 60), "e3p": (40, 60), "e4": (80, 120)}

# Per-environment setups: robots, steps, beta, r_t, g_d.
SETUPS = {
    "e1": (3, 10_000, 0.005, 6, 1),
    "e2": (3, 10_000, 0.005, 6, 1),
    "e3": (3, 10_000, 0.005, 6, 1),
    "e1p": (3, 40_000, 0.001, 9, 1),
    "e2p": (3, 40_000, 0.001, 9, 1),
    "e3p": (3, 40_000, 0.001, 9, 1),
    "e4": (12, 120_000, 0.001, 13, 2),
}


def map_text(name: str) -> str:
    if name.endswith("p"):
        return upscale(LAYOUTS[name[:-1]].render())
    return LAYOUTS[name].render()


def config_text(name: str) -> str:
    robots, steps, beta, r_t, g_d = SETUPS[name]
    return (f"# {name.upper()} surveillance setup\n"
            f"environment = {name}.map\n"
            f"robots = {robots}\nsteps = {steps}\nbeta = {beta}\n"
            "psi_max = 100.0\nalpha = 0.5\ndelta = 0.1\neta = 2.0\n"
            "mu = 0.3\nnu = 0.3\nr_v = 2\nr_d = 2\n"
            f"r_t = {r_t}\nstrategy = heterogeneous\ng_d = {g_d}\n"
            "mode = decentralized\nseed = 0\n"
            "header_bytes = 12\nper_cell_bytes = 8\ndeposit_falloff = distance\n")


def write_assets(out_dir: str | Path) -> list[Path]:
    """Write every bundled ``.map`` and ``.cfg`` into ``out_dir``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for name in SHAPES:
        for suffix, text in ((".map", map_text(name)), (".cfg", config_text(name))):
            path = out / f"{name}{suffix}"
            tmp = path.with_suffix(suffix + ".tmp")
            tmp.write_text(text, encoding="utf-8")
            tmp.replace(path)
            written.append(path)
    return written


def bundled(name: str) -> Environment:
    asset = resources.files("pherocom") / "assets" / f"{name}.map"
    if asset.is_file():
        return parse_map(asset.read_text(encoding="utf-8"), name=name)
    return parse_map(map_text(name), name=name)


def resolve_environment(ref: str) -> Environment:
    """Load a map file path, or a bundled environment by name (``e1``, ``e3p``...)."""
    path = Path(ref)
    if path.is_file():
        return load_map(path)
    key = path.stem.lower() if path.suffix == ".map" else ref.lower()
    if key in SHAPES and path.parent == Path("."):
        return bundled(key)
    raise FileNotFoundError(f"no map file or bundled environment named {ref!r}")

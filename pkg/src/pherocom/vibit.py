"""Connectionless range-gated broadcast of local pheromone data.

A message carries the sender id, the sender's local timestep and the
concentrations of the non-empty cells inside its transmission disc.
Receivers keep, per sender, the last timestep they aggregated and ignore
anything that is not strictly newer; accepted payloads are max-merged
cell by cell.
"""

from __future__ import annotations

from dataclasses import dataclass, field, fields
from typing import TYPE_CHECKING, Iterable

from .grid import Cell, Environment, cells_within
from .pheromone import merge_cell

if TYPE_CHECKING:
    from .robot import Robot


@dataclass(frozen=True)
class Message:
    sender_id: int
    sender_timestep: int
    payload: tuple[tuple[Cell, float], ...] = ()


@dataclass(frozen=True)
class CostModel:
    """Byte accounting: a fixed header plus a fixed size per transmitted cell."""

    header_bytes: int = 12
    per_cell_bytes: int = 8


@dataclass
class CommCounters:
    transmissions: int = 0
    bytes_disseminated: int = 0
    bytes_aggregated: int = 0
    aggregations_accepted: int = 0
    aggregations_rejected: int = 0

    def __iadd__(self, other: "CommCounters") -> "CommCounters":
        for f in fields(self):
            setattr(self, f.name, getattr(self, f.name) + getattr(other, f.name))
        return self

    def as_dict(self) -> dict[str, int]:
        return {f.name: getattr(self, f.name) for f in fields(self)}


@dataclass
class PeerHistory:
    """Last aggregated timestep per sender."""

    last: dict[int, int] = field(default_factory=dict)

    def is_fresh(self, sender_id: int, timestep: int) -> bool:
        seen = self.last.get(sender_id)
        return seen is None or timestep > seen

    def record(self, sender_id: int, timestep: int) -> None:
        self.last[sender_id] = timestep


def message_size(message: Message, cost: CostModel = CostModel()) -> int:
    return cost.header_bytes + cost.per_cell_bytes * len(message.payload)


def payload_size(n_cells: int, cost: CostModel = CostModel()) -> int:
    return cost.header_bytes + cost.per_cell_bytes * n_cells


def build_message(robot: "Robot", env: Environment) -> Message:
    """Snapshot of the robot's non-zero cells within its transmission radius."""
    values = robot.map.values
    payload = tuple((cell, float(values[cell]))
                    for cell, _ in cells_within(env, robot.pos, robot.radii.r_t)
                    if values[cell] > 0)
    return Message(robot.id, robot.timestep, payload)


def in_range(a: Cell, b: Cell, r_t: float) -> bool:
    dr, dc = a[0] - b[0], a[1] - b[1]
    return dr * dr + dc * dc <= r_t * r_t


def deliver(message: Message, sender_pos: Cell, robots: Iterable["Robot"], r_t: float,
            counters: CommCounters, cost: CostModel = CostModel()) -> list[int]:
    """Drop ``message`` into the inbox of every other robot within ``r_t``.

    The sender gets no acknowledgement; the transmission is counted whether
    or not anyone hears it.
    """
    recipients = []
    for robot in robots:
        if robot.id == message.sender_id:
            continue
        if in_range(sender_pos, robot.pos, r_t):
            robot.inbox.append(message)
            recipients.append(robot.id)
    counters.transmissions += 1
    counters.bytes_disseminated += message_size(message, cost)
    return recipients


def aggregate(robot: "Robot", message: Message, cost: CostModel = CostModel()) -> bool:
    """Merge ``message`` into the robot's map if it is new; returns acceptance."""
    counters = robot.counters
    if message.sender_id == robot.id or not robot.history.is_fresh(
            message.sender_id, message.sender_timestep):
        counters.aggregations_rejected += 1
        return False
    values = robot.map.values
    height, width = values.shape
    free = robot.map.free
    for (r, c), psi in message.payload:
        if not (0 <= r < height and 0 <= c < width) or not free[r, c] \
                or not 0 <= psi <= robot.map.psi_max:
            counters.aggregations_rejected += 1
            return False
    for cell, psi in message.payload:
        values[cell] = merge_cell(values[cell], psi)
    robot.history.record(message.sender_id, message.sender_timestep)
    counters.aggregations_accepted += 1
    counters.bytes_aggregated += message_size(message, cost)
    return True


@dataclass
class LogEntry:
    step: int
    sender_id: int
    sender_timestep: int
    recipients: tuple[int, ...]
    payload_cells: int
    bytes: int


class BroadcastMedium:
    """Serialized channel: deliveries complete before the next robot runs.

    Only robots still in their main cycle listen; robots in the final state
    no longer drain an inbox.
    """

    def __init__(self, robots: list["Robot"], cost: CostModel = CostModel(),
                 log: bool = False):
        self.robots = robots
        self.cost = cost
        self.log: list[LogEntry] | None = [] if log else None
        self.step = 0

    def broadcast(self, message: Message, sender_pos: Cell, r_t: float,
                  counters: CommCounters, steps: int) -> list[int]:
        listeners = [r for r in self.robots if r.timestep < steps]
        recipients = deliver(message, sender_pos, listeners, r_t, counters, self.cost)
        if self.log is not None:
            self.log.append(LogEntry(self.step, message.sender_id, message.sender_timestep,
                                     tuple(recipients), len(message.payload),
                                     message_size(message, self.cost)))
        return recipients

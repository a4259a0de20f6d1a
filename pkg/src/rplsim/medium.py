"""Shared wireless medium: unit-disk connectivity and frame airtime.

The medium is ideal: no collisions, no loss, no capture effect.  Every
in-range alive receiver gets a broadcast; unicast reaches exactly the
addressed neighbor.  This isolates attack-induced energy cost from channel
noise and is recorded as a modelling limitation in the README.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

MTU = 127          # 802.15.4 maximum frame size in bytes
BROADCAST = -1     # destination id for broadcast frames


class UnknownNode(Exception):
    pass


class FrameTooLarge(Exception):
    pass


class DeadTransmitter(Exception):
    """A node whose battery is empty attempted to transmit."""


class FrameKind(Enum):
    DIS = "DIS"
    DIO = "DIO"
    DAO = "DAO"
    DATA = "DATA"


@dataclass
class Position:
    x: float
    y: float

    def distance(self, other: "Position") -> float:
        return math.sqrt((self.x - other.x) ** 2 + (self.y - other.y) ** 2)


@dataclass
class RadioParams:
    bitrate: int = 250_000      # bits per second
    range_m: float = 50.0
    phy_overhead: int = 6       # preamble + SFD + length, bytes

    def __post_init__(self):
        if self.bitrate <= 0:
            raise ValueError("bitrate must be positive")
        if self.range_m <= 0:
            raise ValueError("range must be positive")


@dataclass
class Frame:
    kind: FrameKind
    src: int
    dst: int                                  # node id or BROADCAST
    size: int                                 # bytes on air
    rank: int = 0                             # control frames
    version: int = 0
    dodag_id: int = 0
    payload_len: int = 0                      # DATA frames
    app_origin: Optional[int] = None          # originator of a DATA packet
    app_dst: Optional[int] = None             # final destination of a DATA packet
    packet_id: Optional[int] = None           # ledger key for DATA packets
    hop_route: Optional[list[int]] = None     # explicit route (stretch attack)
    route_index: int = 0
    hops: int = 0

    def __post_init__(self):
        if not 0 < self.size <= MTU:
            raise FrameTooLarge(f"frame size {self.size} outside (0, {MTU}]")


def airtime(size: int, params: RadioParams) -> int:
    """On-air duration of a frame in ticks, rounded up."""
    if not 0 < size <= MTU:
        raise FrameTooLarge(f"frame size {size} outside (0, {MTU}]")
    bits = (size + params.phy_overhead) * 8
    return -(-bits * 1_000_000 // params.bitrate)


class Medium:
    """Static unit-disk topology over node positions."""

    def __init__(self, positions: dict[int, Position], params: RadioParams):
        self.params = params
        self.positions = positions
        self._neighbors: dict[int, list[int]] = {}
        for n in positions:
            self._neighbors[n] = sorted(
                m for m in positions
                if m != n and positions[n].distance(positions[m]) <= params.range_m)

    def neighbors(self, node: int) -> list[int]:
        """In-range peers of ``node``, ascending id."""
        if node not in self._neighbors:
            raise UnknownNode(f"node {node} not in topology")
        return self._neighbors[node]

    def in_range(self, a: int, b: int) -> bool:
        return b in self._neighbors.get(a, ())

    def airtime(self, size: int) -> int:
        return airtime(size, self.params)

"""Malicious-node behaviors layered over the honest RPL state machine.

Exactly one attack is active per run.  Flooding and versioning are driven by
a periodic attack tick; selective forwarding, rank and stretch hook the
attacker's receive/advertise paths.  An attack with no start time behaves
exactly like no attack at all.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Optional

from .kernel import EventKind, seconds
from .medium import BROADCAST, Frame, FrameKind
from .rpl import MIN_HOP_RANK_INCREASE, ROOT_RANK


class AttackKind(Enum):
    NONE = "none"
    HELLO_FLOOD = "hello_flood"
    PACKET_FLOOD = "packet_flood"
    SELECTIVE_FORWARDING = "selective_forwarding"
    RANK = "rank"
    VERSIONING = "versioning"
    STRETCH = "stretch"


@dataclass
class AttackConfig:
    kind: AttackKind = AttackKind.NONE
    attacker: int = 0
    start_at: Optional[int] = 0               # ticks; None = never starts
    dis_interval: int = seconds(2.0)          # hello flood
    data_interval: int = seconds(0.45)        # packet flood
    target: int = 0                           # packet flood; 0 = the server
    drop_ratio: float = 1.0                   # selective forwarding
    inflate_interval: int = seconds(4.5)      # versioning
    capture: bool = True                      # stretch: lure traffic first

    def __post_init__(self):
        if not 0.0 <= self.drop_ratio <= 1.0:
            raise ValueError("drop_ratio must be within [0, 1]")

    @property
    def enabled(self) -> bool:
        return self.kind is not AttackKind.NONE and self.start_at is not None

    @property
    def effective_kind(self) -> AttackKind:
        """An attack that never starts is, observably, no attack."""
        return self.kind if self.enabled else AttackKind.NONE


def longest_simple_path(adjacency: dict[int, list[int]], src: int,
                        dst: int) -> Optional[list[int]]:
    """Longest loop-free path from src to dst, exhaustive search.

    Node counts here are tiny (<= 11), so exponential search is fine.
    Ties break toward the lexicographically smallest path for determinism.
    """
    if src not in adjacency or dst not in adjacency:
        return None
    best: Optional[list[int]] = None
    path = [src]
    on_path = {src}

    def extend(node: int) -> None:
        nonlocal best
        if node == dst:
            if best is None or len(path) > len(best) or (
                    len(path) == len(best) and path < best):
                best = list(path)
            return
        for nxt in adjacency[node]:
            if nxt in on_path:
                continue
            path.append(nxt)
            on_path.add(nxt)
            extend(nxt)
            path.pop()
            on_path.remove(nxt)

    extend(src)
    return best


class AttackController:
    """Drives the configured attack for one run."""

    def __init__(self, net, config: AttackConfig):
        self.net = net
        self.config = config
        self._last_inflated = 0
        self._route_cache: Optional[list[int]] = None
        self._route_cache_epoch = -1

    # ------------------------------------------------------------------
    # lifecycle

    def active(self) -> bool:
        cfg = self.config
        return cfg.enabled and self.net.kernel.now >= cfg.start_at

    def schedule_start(self) -> None:
        cfg = self.config
        if not cfg.enabled:
            return
        self.net.schedule_at(cfg.start_at, cfg.attacker, EventKind.ATTACK_TICK)

    def on_tick(self) -> None:
        kind = self.config.kind
        if kind is AttackKind.HELLO_FLOOD:
            self._hello_flood_tick()
        elif kind is AttackKind.PACKET_FLOOD:
            self._packet_flood_tick()
        elif kind is AttackKind.VERSIONING:
            self._version_inflate_tick()
        elif kind in (AttackKind.RANK, AttackKind.STRETCH):
            # one-shot: push the lure rank out promptly, then rely on the
            # regular DIO advertisement override
            node = self.net.nodes[self.config.attacker]
            if node.rpl.joined:
                node.rpl.reset_trickle()

    # ------------------------------------------------------------------
    # periodic attacks

    def _hello_flood_tick(self) -> None:
        attacker = self.net.nodes[self.config.attacker]
        attacker.rpl.send_dis()
        self.net.schedule_node_event(self.config.attacker, self.config.dis_interval,
                                     EventKind.ATTACK_TICK)

    def _packet_flood_tick(self) -> None:
        attacker = self.net.nodes[self.config.attacker]
        target = self.config.target or self.net.server_id
        if attacker.rpl.joined and attacker.rpl.preferred_parent is not None:
            self.net.originate_data(self.config.attacker, target)
        self.net.schedule_node_event(self.config.attacker, self.config.data_interval,
                                     EventKind.ATTACK_TICK)

    def _version_inflate_tick(self) -> None:
        attacker = self.net.nodes[self.config.attacker]
        rpl = attacker.rpl
        if rpl.version >= 1:
            version = max(rpl.version, self._last_inflated) + 1
            self._last_inflated = version
            rpl.version = version
            self.net.transmit(Frame(
                kind=FrameKind.DIO, src=self.config.attacker, dst=BROADCAST,
                size=self.net.config.frame_sizes.dio,
                rank=rpl.rank, version=version, dodag_id=rpl.dodag_id))
        self.net.schedule_node_event(self.config.attacker, self.config.inflate_interval,
                                     EventKind.ATTACK_TICK)

    # ------------------------------------------------------------------
    # hooks on the attacker's honest code paths

    def advertised_rank(self, true_rank: int) -> int:
        """Lure rank: one level below the root, as low as a non-root can go."""
        kind = self.config.kind
        lure = kind is AttackKind.RANK or (
            kind is AttackKind.STRETCH and self.config.capture)
        if lure and self.active() and self.net.nodes[self.config.attacker].rpl.version >= 1:
            return ROOT_RANK + MIN_HOP_RANK_INCREASE
        return true_rank

    def should_drop(self, frame: Frame) -> bool:
        """Greyhole filter: data through the attacker dies with probability
        drop_ratio; control frames always pass."""
        if self.config.kind is not AttackKind.SELECTIVE_FORWARDING or not self.active():
            return False
        if frame.kind is not FrameKind.DATA:
            return False
        if frame.app_dst == self.config.attacker:
            return False
        r = self.config.drop_ratio
        if r <= 0.0:
            return False
        if r >= 1.0:
            return True
        return self.net.kernel.rng(self.config.attacker).random() < r

    def stretch_route(self, frame: Frame) -> None:
        """Rewrite a data frame with the longest loop-free route to its
        destination; falls back to normal forwarding when nothing longer
        exists."""
        if self.config.kind is not AttackKind.STRETCH or not self.active():
            return
        if frame.kind is not FrameKind.DATA or frame.hop_route is not None:
            return
        if frame.app_dst is None or frame.app_dst == self.config.attacker:
            return
        path = self._longest_route(frame.app_dst)
        if path is None or len(path) <= 2:
            return
        frame.hop_route = path[1:]        # path[0] is the attacker itself
        frame.route_index = 0

    def _longest_route(self, dst: int) -> Optional[list[int]]:
        epoch = self.net.alive_epoch
        if self._route_cache_epoch != epoch or (
                self._route_cache is None or self._route_cache[-1] != dst):
            adjacency = self.net.alive_adjacency()
            self._route_cache = longest_simple_path(
                adjacency, self.config.attacker, dst)
            self._route_cache_epoch = epoch
        return self._route_cache

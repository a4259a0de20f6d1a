"""Per-node RPL state machine.

Each node keeps a rank, a DODAG version, a parent set and a trickle timer.
DIO beacons advertise (rank, version); hearing a higher version triggers a
global repair, hearing a DIS solicits a prompt unicast DIO response and an
unconditional trickle reset.  The objective function is a fixed per-hop
increment: the ideal medium has no loss, so a live ETX metric would be
constant anyway.
"""

from __future__ import annotations

from typing import Optional

from .kernel import EventKind
from .medium import BROADCAST, Frame, FrameKind

MIN_HOP_RANK_INCREASE = 256
INFINITE_RANK = 0xFFFF
ROOT_RANK = MIN_HOP_RANK_INCREASE
DEFAULT_DODAG_ID = 1


class InfiniteParent(Exception):
    pass


class NoRoute(Exception):
    pass


def compute_rank(parent_rank: int) -> int:
    """Rank obtained by attaching below a parent advertising ``parent_rank``."""
    if parent_rank >= INFINITE_RANK:
        raise InfiniteParent("cannot attach below an infinite-rank parent")
    return parent_rank + MIN_HOP_RANK_INCREASE


class TrickleState:
    """RFC 6206 timer driving DIO emission.

    The interval doubles while the network looks consistent, capped at
    i_min * 2**doublings, and snaps back to i_min on any inconsistency.
    Transmission happens at a random point t in [interval/2, interval) and
    is suppressed when ``counter`` consistent messages were already heard.
    """

    def __init__(self, i_min: int, doublings: int, k: int):
        self.i_min = i_min
        self.doublings = doublings
        self.k = k
        self.interval = i_min
        self.t = 0
        self.counter = 0

    @property
    def i_max(self) -> int:
        return self.i_min << self.doublings


class RplNode:
    """Protocol engine for one node; transmission runs through ``net``."""

    def __init__(self, node_id: int, net, is_root: bool = False):
        self.id = node_id
        self.net = net
        self.is_root = is_root
        self.joined = is_root
        self.rank = ROOT_RANK if is_root else INFINITE_RANK
        self.version = 1 if is_root else 0
        self.dodag_id = DEFAULT_DODAG_ID if is_root else 0
        self.parent_set: dict[int, int] = {}       # neighbor -> advertised rank
        self.preferred_parent: Optional[int] = None
        self.routing_table: dict[int, int] = {}    # destination -> next hop
        cfg = net.config.trickle
        self.trickle = TrickleState(cfg.i_min, cfg.doublings, cfg.k)
        self._trickle_handles: list = []
        self.parent_changes = 0

    # ------------------------------------------------------------------
    # trickle

    def start_trickle(self) -> None:
        self.trickle.interval = self.trickle.i_min
        self._begin_interval()

    def _begin_interval(self) -> None:
        st = self.trickle
        st.counter = 0
        st.t = self.net.kernel.rng(self.id).randrange(st.interval // 2, st.interval)
        self._trickle_handles = [
            self.net.schedule_node_event(self.id, st.t, EventKind.TRICKLE_FIRE, "t"),
            self.net.schedule_node_event(self.id, st.interval,
                                         EventKind.TRICKLE_FIRE, "end"),
        ]

    def reset_trickle(self) -> None:
        for h in self._trickle_handles:
            self.net.kernel.cancel(h)
        self.trickle.interval = self.trickle.i_min
        self._begin_interval()

    def trickle_fire(self, phase: str) -> None:
        if not self.joined:
            return
        st = self.trickle
        if phase == "t":
            if st.counter < st.k:
                self.send_dio(BROADCAST)
        elif phase == "end":
            st.interval = min(st.interval * 2, st.i_max)
            self._begin_interval()

    # ------------------------------------------------------------------
    # control messages

    def send_dio(self, dst: int) -> None:
        rank, version = self.net.dio_content(self.id, self.rank, self.version)
        self.net.transmit(Frame(
            kind=FrameKind.DIO, src=self.id, dst=dst,
            size=self.net.config.frame_sizes.dio,
            rank=rank, version=version, dodag_id=self.dodag_id))

    def send_dao(self, parent: int) -> None:
        self.net.transmit(Frame(
            kind=FrameKind.DAO, src=self.id, dst=parent,
            size=self.net.config.frame_sizes.dao,
            rank=self.rank, version=self.version, dodag_id=self.dodag_id))

    def send_dis(self) -> None:
        self.net.transmit(Frame(
            kind=FrameKind.DIS, src=self.id, dst=BROADCAST,
            size=self.net.config.frame_sizes.dis))

    def on_dis(self, frame: Frame) -> None:
        """Solicitation: reset trickle and answer the asker directly."""
        if not self.joined:
            return
        self.reset_trickle()
        self.send_dio(frame.src)

    def on_dio(self, frame: Frame) -> None:
        if frame.version > self.version:
            self._global_repair(frame)
            return
        if frame.version < self.version:
            # help the stale sender catch up: our own DIO will carry the
            # newer version
            if self.joined:
                self.reset_trickle()
            return
        if self.is_root:
            self.trickle.counter += 1
            return
        changed = self._update_parent(frame.src, frame.rank)
        if not changed:
            self.trickle.counter += 1

    def on_dao(self, frame: Frame) -> None:
        # the advertised destination is the DAO sender itself
        self.routing_table[frame.src] = frame.src

    def _global_repair(self, frame: Frame) -> None:
        """A higher DODAG version obsoletes all routing state.

        Rebuilding is deliberately eager: the new version is re-broadcast at
        once so it sweeps the network, and a non-root node re-solicits its
        neighborhood to rebuild the parent set it just threw away.  This is
        what makes repeated version inflation so expensive network-wide.
        """
        rejoining = self.version > 0
        self.version = frame.version
        self.parent_set.clear()
        self.routing_table.clear()
        self.preferred_parent = None
        if not self.is_root:
            self.rank = INFINITE_RANK
        was_joined = self.joined
        self.joined = True
        self.dodag_id = frame.dodag_id or self.dodag_id
        if rejoining:
            self.net.on_global_repair(self.id)
        if not self.is_root and frame.rank < INFINITE_RANK:
            self._update_parent(frame.src, frame.rank)
        if was_joined:
            self.reset_trickle()
        else:
            self.start_trickle()
        self.send_dio(BROADCAST)
        if not self.is_root:
            self.send_dis()

    def _update_parent(self, sender: int, advertised: int) -> bool:
        """Fold one DIO into the parent set; returns True if rank or parent
        changed."""
        if advertised >= INFINITE_RANK:
            self.parent_set.pop(sender, None)
        else:
            self.parent_set[sender] = advertised
        old = (self.preferred_parent, self.rank)
        self._select_parent()
        if (self.preferred_parent, self.rank) != old:
            if self.preferred_parent is not None and self.preferred_parent != old[0]:
                self.parent_changes += 1
                self.send_dao(self.preferred_parent)
            return True
        return False

    def _select_parent(self) -> None:
        """Pick the parent giving minimal rank; ties break on lowest id."""
        if not self.parent_set:
            self.preferred_parent = None
            self.rank = INFINITE_RANK
            return
        best = min(self.parent_set.items(), key=lambda kv: (kv[1], kv[0]))
        self.preferred_parent = best[0]
        self.rank = compute_rank(best[1])

    # ------------------------------------------------------------------
    # data plane

    def forward_data(self, frame: Frame) -> None:
        if frame.app_dst == self.id:
            self.net.app_delivered(self.id, frame)
            return
        if frame.hop_route is not None and frame.route_index < len(frame.hop_route):
            next_hop = frame.hop_route[frame.route_index]
            frame.route_index += 1
        elif frame.app_dst in self.routing_table:
            next_hop = self.routing_table[frame.app_dst]
        elif self.preferred_parent is not None:
            next_hop = self.preferred_parent
        else:
            raise NoRoute(f"node {self.id} has no route toward {frame.app_dst}")
        frame.src = self.id
        frame.dst = next_hop
        frame.hops += 1
        self.net.transmit(frame)

    def handle_frame(self, frame: Frame) -> None:
        if frame.kind is FrameKind.DIS:
            self.on_dis(frame)
        elif frame.kind is FrameKind.DIO:
            self.on_dio(frame)
        elif frame.kind is FrameKind.DAO:
            self.on_dao(frame)
        elif frame.kind is FrameKind.DATA:
            self.forward_data(frame)

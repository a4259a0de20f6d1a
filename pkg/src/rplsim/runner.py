"""One simulation run: nodes, medium semantics, energy accrual, sampling.

The network owns the event loop.  Frames cost the transmitter TX airtime at
send time and every actual receiver RX airtime at delivery; CPU time is
charged per handled frame and per timer event, and low-power time is the
complement of CPU time.  Battery nodes integrate their drawn charge on a
fixed step and die permanently when the battery cuts off.
"""

from __future__ import annotations

from typing import Optional

from .attacks import AttackController, AttackKind
from .energy import EnergyTimers, KineticBattery, LinearBattery, average_power
from .kernel import Event, EventKind, Kernel
from .medium import BROADCAST, DeadTransmitter, Frame, FrameKind, Medium
from .metrics import NodeSample, PacketCounters, RunMetrics
from .rpl import NoRoute, RplNode
from .scenario import Role, ScenarioConfig

DIS_PROBE_INTERVAL = 5_000_000      # unjoined nodes re-solicit every ~5 s


class SimNode:
    """Runtime state for one mote."""

    def __init__(self, spec, net):
        self.id = spec.id
        self.spec = spec
        self.role = spec.role
        self.timers = EnergyTimers()
        self.alive = True
        self.rpl = RplNode(spec.id, net, is_root=spec.role is Role.SERVER)
        battery_spec = net.config.node_battery(spec)
        if battery_spec is None:
            self.battery = None
        elif battery_spec.model == "linear":
            self.battery = LinearBattery(battery_spec.capacity_mah)
        else:
            self.battery = KineticBattery(
                battery_spec.capacity_mah, battery_spec.kibam_c,
                battery_spec.kibam_k_per_s)
        self._charged_mah = 0.0
        self.pkts_sent = 0
        self.pkts_app_rx = 0
        self.pkts_dropped = 0


class Network:
    def __init__(self, config: ScenarioConfig, seed: Optional[int] = None,
                 duration: Optional[int] = None, trace: bool = False):
        self.config = config
        self.seed = config.seed if seed is None else seed
        self.duration = config.duration if duration is None else duration
        self.kernel = Kernel(seed=self.seed, dispatch=self._dispatch, trace=trace)
        self.medium = Medium({n.id: n.position for n in config.nodes}, config.radio)
        self.nodes: dict[int, SimNode] = {}
        for spec in config.nodes:
            self.nodes[spec.id] = SimNode(spec, self)
        self.server_id = config.server_id
        self.attack = AttackController(self, config.attack)
        self.alive_epoch = 0
        self.samples: list[NodeSample] = []
        self.counters = PacketCounters()
        self.delivered_by_origin: dict[int, int] = {}
        self._packet_states: dict[int, str] = {}
        self._next_packet_id = 1

    # ------------------------------------------------------------------
    # wiring helpers used by protocol and attack code

    def schedule_node_event(self, node_id: int, delay: int, kind: EventKind,
                            payload=None):
        return self.kernel.schedule_in(delay, node_id, kind, payload)

    def schedule_at(self, at: int, node_id: int, kind: EventKind, payload=None):
        return self.kernel.schedule(Event(at, node_id, kind, payload))

    def dio_content(self, node_id: int, rank: int, version: int) -> tuple[int, int]:
        """Advertised (rank, version) for a DIO; the attacker may lie."""
        if node_id == self.config.attack.attacker:
            return self.attack.advertised_rank(rank), version
        return rank, version

    def on_global_repair(self, node_id: int) -> None:
        node = self.nodes[node_id]
        node.timers.accrue_cpu(self.config.costs.per_repair, self.kernel.now)

    def alive_adjacency(self) -> dict[int, list[int]]:
        return {n: [m for m in self.medium.neighbors(n) if self.nodes[m].alive]
                for n in self.nodes if self.nodes[n].alive}

    # ------------------------------------------------------------------
    # transmission and delivery

    def transmit(self, frame: Frame) -> None:
        sender = self.nodes[frame.src]
        if not sender.alive:
            raise DeadTransmitter(f"node {frame.src} battery is empty")
        duration = self.medium.airtime(frame.size)
        sender.timers.accrue_tx(duration)
        deliver_at = self.kernel.now + duration
        if frame.dst == BROADCAST:
            for m in self.medium.neighbors(frame.src):
                if self.nodes[m].alive:
                    self.schedule_at(deliver_at, m, EventKind.FRAME_DELIVERED, frame)
        else:
            receiver = self.nodes.get(frame.dst)
            if receiver is None or not receiver.alive or \
                    not self.medium.in_range(frame.src, frame.dst):
                self._drop_medium(frame, sender)
            else:
                self.schedule_at(deliver_at, frame.dst,
                                 EventKind.FRAME_DELIVERED, frame)

    def _drop_medium(self, frame: Frame, charged_to: SimNode) -> None:
        self.counters.dropped_medium += 1
        charged_to.pkts_dropped += 1
        if frame.packet_id is not None:
            self._finalize_packet(frame.packet_id, "medium")

    def _deliver(self, node: SimNode, frame: Frame) -> None:
        if not node.alive:
            # receiver died while the frame was in the air
            if frame.dst != BROADCAST:
                self._drop_medium(frame, node)
            return
        node.timers.accrue_rx(self.medium.airtime(frame.size))
        node.timers.accrue_cpu(self.config.costs.per_frame, self.kernel.now)
        if frame.kind is FrameKind.DATA and node.id == self.config.attack.attacker:
            if self.attack.should_drop(frame):
                self.counters.dropped_attacker += 1
                node.pkts_dropped += 1
                if frame.packet_id is not None:
                    self._finalize_packet(frame.packet_id, "attacker")
                return
            self.attack.stretch_route(frame)
        try:
            node.rpl.handle_frame(frame)
        except NoRoute:
            self._drop_noroute(node, frame)

    def _drop_noroute(self, node: SimNode, frame: Frame) -> None:
        self.counters.dropped_noroute += 1
        node.pkts_dropped += 1
        if frame.packet_id is not None:
            self._finalize_packet(frame.packet_id, "noroute")

    # ------------------------------------------------------------------
    # application traffic

    def originate_data(self, origin: int, dst: int) -> None:
        node = self.nodes[origin]
        if not node.alive:
            return
        pid = self._next_packet_id
        self._next_packet_id += 1
        self._packet_states[pid] = "in_flight"
        self.counters.sent += 1
        node.pkts_sent += 1
        frame = Frame(
            kind=FrameKind.DATA, src=origin, dst=origin,
            size=self.config.traffic.payload, payload_len=self.config.traffic.payload,
            app_origin=origin, app_dst=dst, packet_id=pid)
        try:
            node.rpl.forward_data(frame)
        except NoRoute:
            self._drop_noroute(node, frame)

    def app_delivered(self, node_id: int, frame: Frame) -> None:
        node = self.nodes[node_id]
        node.pkts_app_rx += 1
        self.counters.delivered_app += 1
        if frame.app_origin is not None:
            self.delivered_by_origin[frame.app_origin] = \
                self.delivered_by_origin.get(frame.app_origin, 0) + 1
        if frame.packet_id is not None:
            self._finalize_packet(frame.packet_id, "delivered")

    def _finalize_packet(self, pid: int, state: str) -> None:
        self._packet_states[pid] = state

    # ------------------------------------------------------------------
    # event dispatch

    def _dispatch(self, ev: Event) -> None:
        kind = ev.kind
        if kind is EventKind.METRICS_SAMPLE:
            self._sample()
            nxt = self.kernel.now + self.config.sample_interval
            if nxt <= self.duration:
                self.schedule_at(nxt, 0, EventKind.METRICS_SAMPLE)
            return
        node = self.nodes[ev.target]
        if kind is EventKind.FRAME_DELIVERED:
            self._deliver(node, ev.payload)
        elif kind is EventKind.TRICKLE_FIRE:
            if node.alive:
                node.timers.accrue_cpu(self.config.costs.per_timer, self.kernel.now)
                node.rpl.trickle_fire(ev.payload)
        elif kind is EventKind.APP_SEND:
            self._app_send(node, ev.payload)
        elif kind is EventKind.ATTACK_TICK:
            if node.alive:
                node.timers.accrue_cpu(self.config.costs.per_timer, self.kernel.now)
                self.attack.on_tick()
        elif kind is EventKind.BATTERY_STEP:
            self._battery_step(node)

    def _app_send(self, node: SimNode, payload) -> None:
        if not node.alive:
            return
        node.timers.accrue_cpu(self.config.costs.per_timer, self.kernel.now)
        if payload == "probe":
            if not node.rpl.joined:
                node.rpl.send_dis()
                jitter = self.kernel.rng(node.id).randrange(0, 1_000_000)
                self.schedule_node_event(node.id, DIS_PROBE_INTERVAL + jitter,
                                         EventKind.APP_SEND, "probe")
            return
        if node.role is Role.HONEST:
            self.originate_data(node.id, self.server_id)
        self.schedule_node_event(node.id, self.config.traffic.interval,
                                 EventKind.APP_SEND, "data")

    def _battery_step(self, node: SimNode) -> None:
        if node.battery is None:
            return
        now = self.kernel.now
        node.timers.settle(now)
        total = node.timers.charge_mah(self.config.profile)
        delta = total - node._charged_mah
        node._charged_mah = total
        dt_s = self.config.battery_step / 1e6
        node.battery.step(delta * 3600.0 / dt_s, dt_s)
        if node.alive and node.battery.is_empty():
            node.alive = False
            self.alive_epoch += 1
        if node.alive:
            nxt = now + self.config.battery_step
            if nxt <= self.duration:
                self.schedule_at(nxt, node.id, EventKind.BATTERY_STEP)

    def _sample(self) -> None:
        now = self.kernel.now
        profile = self.config.profile
        for node_id in sorted(self.nodes):
            node = self.nodes[node_id]
            snap = node.timers.snapshot(now)
            soc = node.battery.state_of_charge() if node.battery is not None else None
            self.samples.append(NodeSample(
                t=now, node=node_id, role=node.role.value,
                t_cpu=snap.t_cpu, t_lpm=snap.t_lpm, t_tx=snap.t_tx, t_rx=snap.t_rx,
                energy_mj=snap.energy_mj(profile),
                power_mw=average_power(snap, profile, now),
                soc=soc, sent=node.pkts_sent, app_rx=node.pkts_app_rx,
                dropped=node.pkts_dropped))

    # ------------------------------------------------------------------

    def run(self) -> RunMetrics:
        for spec in self.config.nodes:
            node = self.nodes[spec.id]
            if spec.role is Role.SERVER:
                node.rpl.start_trickle()
            else:
                jitter = self.kernel.rng(spec.id).randrange(500_000, 1_500_000)
                self.schedule_at(jitter, spec.id, EventKind.APP_SEND, "probe")
            if spec.role is Role.HONEST:
                offset = self.config.traffic.start + self.kernel.rng(
                    spec.id).randrange(0, self.config.traffic.interval)
                self.schedule_at(offset, spec.id, EventKind.APP_SEND, "data")
            if node.battery is not None:
                self.schedule_at(self.config.battery_step, spec.id,
                                 EventKind.BATTERY_STEP)
        if self.config.sample_interval <= self.duration:
            self.schedule_at(self.config.sample_interval, 0,
                             EventKind.METRICS_SAMPLE)
        self.attack.schedule_start()

        self.kernel.run_until(self.duration)

        in_flight = sum(1 for s in self._packet_states.values() if s == "in_flight")
        self.counters.in_flight = in_flight
        consumed = {}
        empty = []
        for node_id in sorted(self.nodes):
            node = self.nodes[node_id]
            if node.battery is not None:
                consumed[node_id] = 1.0 - node.battery.state_of_charge()
                if node.battery.is_empty():
                    empty.append(node_id)
        return RunMetrics(
            scenario=self.config.name,
            attack=self.config.attack.effective_kind.value,
            seed=self.seed,
            duration=self.duration,
            sample_interval=self.config.sample_interval,
            roles={i: self.nodes[i].role.value for i in sorted(self.nodes)},
            samples=self.samples,
            counters=self.counters,
            delivered_by_origin=dict(sorted(self.delivered_by_origin.items())),
            battery_consumed=consumed,
            empty_nodes=empty)


def run_scenario(config: ScenarioConfig, seed: Optional[int] = None,
                 duration: Optional[int] = None, trace: bool = False) -> RunMetrics:
    net = Network(config, seed=seed, duration=duration, trace=trace)
    return net.run()

"""Declarative scenario definition and the .scn file format.

A scenario file is plain ``key = value`` lines under ``[section]`` headers:
human-editable, diff-friendly and trivially parseable.  Sections:

    [scenario]  name, description, duration_s, seed, arena_m, sample_interval_s
    [radio]     bitrate_bps, range_m, phy_overhead_bytes
    [frames]    dis_bytes, dio_bytes, dao_bytes, data_bytes
    [profile]   i_lpm_ma, i_cpu_ma, i_tx_ma, i_rx_ma, voltage_v,
                cpu_per_frame_ms, cpu_per_timer_ms
    [trickle]   i_min_s, doublings, k
    [traffic]   interval_s, payload_bytes, start_s
    [battery]   model, capacity_mah, kibam_c, kibam_k_per_s, step_s
    [attack]    kind, attacker, start_s, dis_interval_s, data_interval_s,
                target, drop_ratio, inflate_interval_s, capture
    [node N]    role, x, y, battery (optional override)

Unknown sections or keys are rejected.  All sections except [scenario] and
the node list may be omitted and fall back to defaults.
"""

from __future__ import annotations

import configparser
import io
import math
import random
from dataclasses import dataclass, field, replace
from enum import Enum
from importlib import resources
from typing import Optional

from .attacks import AttackConfig, AttackKind
from .energy import CurrentProfile
from .kernel import seconds
from .medium import Position, RadioParams


class ParseError(Exception):
    pass


class ValidationError(Exception):
    pass


class GenerationFailed(Exception):
    pass


class Role(Enum):
    SERVER = "server"
    HONEST = "honest"
    MALICIOUS = "malicious"


@dataclass
class FrameSizes:
    dis: int = 39
    dio: int = 97
    dao: int = 85
    data: int = 110


@dataclass
class TrickleConfig:
    i_min: int = seconds(4.096)
    doublings: int = 8
    k: int = 10


@dataclass
class TrafficConfig:
    interval: int = seconds(900)
    payload: int = 110
    start: int = seconds(120)


@dataclass
class CostModel:
    """CPU time charged per handled event, in ticks.

    A global repair tears down and rebuilds the whole routing state, which
    is far more work than handling one frame, hence its own cost.
    """
    per_frame: int = 2_000
    per_timer: int = 1_000
    per_repair: int = 10_000


@dataclass
class BatterySpec:
    model: str = "linear"            # infinite | linear | kinetic
    capacity_mah: float = 2000.0
    kibam_c: float = 0.625
    kibam_k_per_s: float = 4.5e-5

    def __post_init__(self):
        if self.model not in ("infinite", "linear", "kinetic"):
            raise ValidationError(f"battery.model: unknown model {self.model!r}")


@dataclass
class NodeSpec:
    id: int
    role: Role
    position: Position
    battery: Optional[BatterySpec] = None    # None -> scenario default per role


@dataclass
class ScenarioConfig:
    name: str = "unnamed"
    description: str = ""
    duration: int = seconds(1800)
    seed: int = 1
    arena: tuple[float, float] = (100.0, 100.0)
    sample_interval: int = seconds(10)
    nodes: list[NodeSpec] = field(default_factory=list)
    radio: RadioParams = field(default_factory=RadioParams)
    frame_sizes: FrameSizes = field(default_factory=FrameSizes)
    profile: CurrentProfile = field(default_factory=CurrentProfile)
    costs: CostModel = field(default_factory=CostModel)
    trickle: TrickleConfig = field(default_factory=TrickleConfig)
    traffic: TrafficConfig = field(default_factory=TrafficConfig)
    battery_default: BatterySpec = field(default_factory=BatterySpec)
    battery_step: int = seconds(1)
    attack: AttackConfig = field(default_factory=AttackConfig)

    @property
    def server_id(self) -> int:
        return next(n.id for n in self.nodes if n.role is Role.SERVER)

    def node_battery(self, node: NodeSpec) -> Optional[BatterySpec]:
        """Effective battery for a node; None means infinite power."""
        spec = node.battery
        if spec is None:
            if node.role in (Role.SERVER, Role.MALICIOUS):
                return None
            spec = self.battery_default
        return None if spec.model == "infinite" else spec


# ----------------------------------------------------------------------
# validation

def validate(config: ScenarioConfig) -> ScenarioConfig:
    if config.duration <= 0:
        raise ValidationError("scenario.duration_s: must be positive")
    if config.sample_interval <= 0:
        raise ValidationError("scenario.sample_interval_s: must be positive")
    if not config.nodes:
        raise ValidationError("nodes: at least one node required")
    ids = [n.id for n in config.nodes]
    if len(set(ids)) != len(ids):
        raise ValidationError("nodes: duplicate node ids")
    servers = [n for n in config.nodes if n.role is Role.SERVER]
    if len(servers) != 1:
        raise ValidationError(
            f"nodes: exactly one server required, found {len(servers)}")
    malicious = [n for n in config.nodes if n.role is Role.MALICIOUS]
    if len(malicious) > 1:
        raise ValidationError("nodes: at most one malicious node allowed")
    w, h = config.arena
    for n in config.nodes:
        if not (math.isfinite(n.position.x) and math.isfinite(n.position.y)):
            raise ValidationError(f"node {n.id}: position must be finite")
        if not (0 <= n.position.x <= w and 0 <= n.position.y <= h):
            raise ValidationError(f"node {n.id}: position outside arena")
    atk = config.attack
    if atk.kind is not AttackKind.NONE:
        if atk.attacker not in ids:
            raise ValidationError(f"attack.attacker: node {atk.attacker} does not exist")
        if not malicious or malicious[0].id != atk.attacker:
            raise ValidationError(
                "attack.attacker: must name the node with role = malicious")
        if atk.target and atk.target not in ids:
            raise ValidationError(f"attack.target: node {atk.target} does not exist")
    if not 0.0 <= atk.drop_ratio <= 1.0:
        raise ValidationError("attack.drop_ratio: must be within [0, 1]")
    return config


# ----------------------------------------------------------------------
# parsing

_SECTION_KEYS = {
    "scenario": {"name", "description", "duration_s", "seed", "arena_m",
                 "sample_interval_s"},
    "radio": {"bitrate_bps", "range_m", "phy_overhead_bytes"},
    "frames": {"dis_bytes", "dio_bytes", "dao_bytes", "data_bytes"},
    "profile": {"i_lpm_ma", "i_cpu_ma", "i_tx_ma", "i_rx_ma", "voltage_v",
                "cpu_per_frame_ms", "cpu_per_timer_ms", "cpu_per_repair_ms"},
    "trickle": {"i_min_s", "doublings", "k"},
    "traffic": {"interval_s", "payload_bytes", "start_s"},
    "battery": {"model", "capacity_mah", "kibam_c", "kibam_k_per_s", "step_s"},
    "attack": {"kind", "attacker", "start_s", "dis_interval_s",
               "data_interval_s", "target", "drop_ratio",
               "inflate_interval_s", "capture"},
}
_NODE_KEYS = {"role", "x", "y", "battery"}


def _check_keys(section: str, present, allowed) -> None:
    unknown = set(present) - allowed
    if unknown:
        raise ParseError(f"[{section}]: unknown key(s) {sorted(unknown)}")


def _get(section, key, conv, default):
    if key not in section:
        return default
    raw = section[key]
    try:
        return conv(raw)
    except (ValueError, TypeError) as exc:
        raise ParseError(f"{section.name}.{key}: bad value {raw!r}: {exc}") from None


def _ticks(raw: str) -> int:
    return seconds(float(raw))


def _bool(raw: str) -> bool:
    low = raw.strip().lower()
    if low in ("true", "yes", "1", "on"):
        return True
    if low in ("false", "no", "0", "off"):
        return False
    raise ValueError(f"not a boolean: {raw!r}")


def _battery_spec(raw: str, base: BatterySpec) -> BatterySpec:
    parts = raw.split()
    model = parts[0]
    if model == "infinite":
        if len(parts) != 1:
            raise ValueError("infinite takes no capacity")
        return BatterySpec(model="infinite")
    if model not in ("linear", "kinetic"):
        raise ValueError(f"unknown battery model {model!r}")
    capacity = float(parts[1]) if len(parts) > 1 else base.capacity_mah
    return replace(base, model=model, capacity_mah=capacity)


def load_scenario(text: str) -> ScenarioConfig:
    """Parse and validate a scenario document."""
    parser = configparser.ConfigParser(
        delimiters=("=",), inline_comment_prefixes=("#",),
        interpolation=None, strict=True)
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ParseError(str(exc)) from None

    config = ScenarioConfig()
    node_sections = []
    for name in parser.sections():
        if name.startswith("node "):
            node_sections.append(name)
            _check_keys(name, parser[name].keys(), _NODE_KEYS)
        elif name in _SECTION_KEYS:
            _check_keys(name, parser[name].keys(), _SECTION_KEYS[name])
        else:
            raise ParseError(f"unknown section [{name}]")

    if "scenario" in parser:
        s = parser["scenario"]
        config.name = s.get("name", config.name)
        config.description = s.get("description", config.description)
        config.duration = _get(s, "duration_s", _ticks, config.duration)
        config.seed = _get(s, "seed", int, config.seed)
        config.sample_interval = _get(s, "sample_interval_s", _ticks,
                                      config.sample_interval)
        if "arena_m" in s:
            parts = s["arena_m"].split()
            if len(parts) != 2:
                raise ParseError("scenario.arena_m: expected two values")
            config.arena = (float(parts[0]), float(parts[1]))

    if "radio" in parser:
        s = parser["radio"]
        config.radio = RadioParams(
            bitrate=_get(s, "bitrate_bps", int, config.radio.bitrate),
            range_m=_get(s, "range_m", float, config.radio.range_m),
            phy_overhead=_get(s, "phy_overhead_bytes", int,
                              config.radio.phy_overhead))

    if "frames" in parser:
        s = parser["frames"]
        config.frame_sizes = FrameSizes(
            dis=_get(s, "dis_bytes", int, config.frame_sizes.dis),
            dio=_get(s, "dio_bytes", int, config.frame_sizes.dio),
            dao=_get(s, "dao_bytes", int, config.frame_sizes.dao),
            data=_get(s, "data_bytes", int, config.frame_sizes.data))

    if "profile" in parser:
        s = parser["profile"]
        try:
            config.profile = CurrentProfile(
                i_lpm=_get(s, "i_lpm_ma", float, config.profile.i_lpm),
                i_cpu=_get(s, "i_cpu_ma", float, config.profile.i_cpu),
                i_tx=_get(s, "i_tx_ma", float, config.profile.i_tx),
                i_rx=_get(s, "i_rx_ma", float, config.profile.i_rx),
                voltage=_get(s, "voltage_v", float, config.profile.voltage))
        except ValueError as exc:
            raise ValidationError(f"profile: {exc}") from None
        config.costs = CostModel(
            per_frame=_get(s, "cpu_per_frame_ms", _ticks_ms, config.costs.per_frame),
            per_timer=_get(s, "cpu_per_timer_ms", _ticks_ms, config.costs.per_timer),
            per_repair=_get(s, "cpu_per_repair_ms", _ticks_ms,
                            config.costs.per_repair))

    if "trickle" in parser:
        s = parser["trickle"]
        config.trickle = TrickleConfig(
            i_min=_get(s, "i_min_s", _ticks, config.trickle.i_min),
            doublings=_get(s, "doublings", int, config.trickle.doublings),
            k=_get(s, "k", int, config.trickle.k))

    if "traffic" in parser:
        s = parser["traffic"]
        config.traffic = TrafficConfig(
            interval=_get(s, "interval_s", _ticks, config.traffic.interval),
            payload=_get(s, "payload_bytes", int, config.traffic.payload),
            start=_get(s, "start_s", _ticks, config.traffic.start))

    if "battery" in parser:
        s = parser["battery"]
        model = s.get("model", config.battery_default.model)
        try:
            config.battery_default = BatterySpec(
                model=model,
                capacity_mah=_get(s, "capacity_mah", float,
                                  config.battery_default.capacity_mah),
                kibam_c=_get(s, "kibam_c", float, config.battery_default.kibam_c),
                kibam_k_per_s=_get(s, "kibam_k_per_s", float,
                                   config.battery_default.kibam_k_per_s))
        except ValidationError:
            raise
        config.battery_step = _get(s, "step_s", _ticks, config.battery_step)

    if "attack" in parser:
        s = parser["attack"]
        kind_raw = s.get("kind", "none")
        try:
            kind = AttackKind(kind_raw)
        except ValueError:
            raise ParseError(f"attack.kind: unknown attack {kind_raw!r}") from None
        start_raw = s.get("start_s", "0")
        start_at = None if start_raw.strip() in ("inf", "never") else seconds(
            float(start_raw))
        try:
            config.attack = AttackConfig(
                kind=kind,
                attacker=_get(s, "attacker", int, 0),
                start_at=start_at,
                dis_interval=_get(s, "dis_interval_s", _ticks,
                                  AttackConfig.dis_interval),
                data_interval=_get(s, "data_interval_s", _ticks,
                                   AttackConfig.data_interval),
                target=_get(s, "target", int, 0),
                drop_ratio=_get(s, "drop_ratio", float, 1.0),
                inflate_interval=_get(s, "inflate_interval_s", _ticks,
                                      AttackConfig.inflate_interval),
                capture=_get(s, "capture", _bool, True))
        except ValueError as exc:
            raise ValidationError(f"attack: {exc}") from None

    for name in node_sections:
        s = parser[name]
        try:
            node_id = int(name.split(None, 1)[1])
        except (IndexError, ValueError):
            raise ParseError(f"[{name}]: section must be 'node <id>'") from None
        role_raw = s.get("role", "honest")
        try:
            role = Role(role_raw)
        except ValueError:
            raise ParseError(f"node {node_id}: unknown role {role_raw!r}") from None
        battery = None
        if "battery" in s:
            try:
                battery = _battery_spec(s["battery"], config.battery_default)
            except (ValueError, IndexError) as exc:
                raise ParseError(f"node {node_id}.battery: {exc}") from None
        config.nodes.append(NodeSpec(
            id=node_id, role=role,
            position=Position(_get(s, "x", float, 0.0), _get(s, "y", float, 0.0)),
            battery=battery))
    config.nodes.sort(key=lambda n: n.id)

    return validate(config)


def _ticks_ms(raw: str) -> int:
    return round(float(raw) * 1000)


# ----------------------------------------------------------------------
# serialization

def _fmt(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def serialize(config: ScenarioConfig) -> str:
    """Render a config back to scenario-file text; load(serialize(c)) == c."""
    out = io.StringIO()

    def section(name: str, pairs) -> None:
        out.write(f"[{name}]\n")
        for key, value in pairs:
            out.write(f"{key} = {_fmt(value)}\n")
        out.write("\n")

    section("scenario", [
        ("name", config.name),
        ("description", config.description),
        ("duration_s", config.duration / 1e6),
        ("seed", config.seed),
        ("arena_m", f"{_fmt(config.arena[0])} {_fmt(config.arena[1])}"),
        ("sample_interval_s", config.sample_interval / 1e6)])
    section("radio", [
        ("bitrate_bps", config.radio.bitrate),
        ("range_m", config.radio.range_m),
        ("phy_overhead_bytes", config.radio.phy_overhead)])
    fs = config.frame_sizes
    section("frames", [("dis_bytes", fs.dis), ("dio_bytes", fs.dio),
                       ("dao_bytes", fs.dao), ("data_bytes", fs.data)])
    p = config.profile
    section("profile", [
        ("i_lpm_ma", p.i_lpm), ("i_cpu_ma", p.i_cpu), ("i_tx_ma", p.i_tx),
        ("i_rx_ma", p.i_rx), ("voltage_v", p.voltage),
        ("cpu_per_frame_ms", config.costs.per_frame / 1000),
        ("cpu_per_timer_ms", config.costs.per_timer / 1000),
        ("cpu_per_repair_ms", config.costs.per_repair / 1000)])
    t = config.trickle
    section("trickle", [("i_min_s", t.i_min / 1e6), ("doublings", t.doublings),
                        ("k", t.k)])
    tr = config.traffic
    section("traffic", [("interval_s", tr.interval / 1e6),
                        ("payload_bytes", tr.payload),
                        ("start_s", tr.start / 1e6)])
    b = config.battery_default
    section("battery", [
        ("model", b.model), ("capacity_mah", b.capacity_mah),
        ("kibam_c", b.kibam_c), ("kibam_k_per_s", b.kibam_k_per_s),
        ("step_s", config.battery_step / 1e6)])
    a = config.attack
    section("attack", [
        ("kind", a.kind.value), ("attacker", a.attacker),
        ("start_s", "inf" if a.start_at is None else _fmt(a.start_at / 1e6)),
        ("dis_interval_s", a.dis_interval / 1e6),
        ("data_interval_s", a.data_interval / 1e6),
        ("target", a.target), ("drop_ratio", a.drop_ratio),
        ("inflate_interval_s", a.inflate_interval / 1e6),
        ("capture", str(a.capture).lower())])
    for n in config.nodes:
        pairs = [("role", n.role.value), ("x", n.position.x), ("y", n.position.y)]
        if n.battery is not None:
            if n.battery.model == "infinite":
                pairs.append(("battery", "infinite"))
            else:
                pairs.append(("battery",
                              f"{n.battery.model} {_fmt(n.battery.capacity_mah)}"))
        section(f"node {n.id}", pairs)
    return out.getvalue()


# ----------------------------------------------------------------------
# topology generation

def _connected(positions: dict[int, Position], range_m: float) -> bool:
    ids = list(positions)
    seen = {ids[0]}
    frontier = [ids[0]]
    while frontier:
        cur = frontier.pop()
        for other in ids:
            if other not in seen and \
                    positions[cur].distance(positions[other]) <= range_m:
                seen.add(other)
                frontier.append(other)
    return len(seen) == len(ids)


def generate_topology(n: int, seed: int, arena: tuple[float, float],
                      range_m: float, max_retries: int = 200) -> list[NodeSpec]:
    """Uniform random connected placement: node 1 is the server, node n the
    malicious node, the rest honest.  Deterministic in all arguments."""
    if n < 2:
        raise GenerationFailed("need at least two nodes")
    rng = random.Random(seed)
    w, h = arena
    for _ in range(max_retries):
        positions = {i: Position(round(rng.uniform(0, w), 2),
                                 round(rng.uniform(0, h), 2))
                     for i in range(1, n + 1)}
        if _connected(positions, range_m):
            specs = []
            for i in range(1, n + 1):
                role = Role.SERVER if i == 1 else (
                    Role.MALICIOUS if i == n else Role.HONEST)
                specs.append(NodeSpec(id=i, role=role, position=positions[i]))
            return specs
    raise GenerationFailed(
        f"no connected placement of {n} nodes within {max_retries} tries")


# ----------------------------------------------------------------------
# shipped presets

def preset_names() -> list[str]:
    root = resources.files("rplsim").joinpath("scenarios")
    return sorted(p.name[:-4] for p in root.iterdir() if p.name.endswith(".scn"))


def load_preset(name: str) -> ScenarioConfig:
    path = resources.files("rplsim").joinpath("scenarios", f"{name}.scn")
    if not path.is_file():
        raise ValidationError(f"unknown preset {name!r}")
    return load_scenario(path.read_text())


def load_scenario_path(path: str) -> ScenarioConfig:
    """Load from a filesystem path, or fall back to a preset name."""
    import os
    if os.path.exists(path):
        with open(path, encoding="utf-8") as fh:
            return load_scenario(fh.read())
    if "/" not in path and "\\" not in path and not path.endswith(".scn"):
        return load_preset(path)
    raise ValidationError(f"scenario file not found: {path}")

"""Deterministic simulated web-server host with a fault catalogue.

The host keeps a table of raw property values per (class, row). Each call to
``sample`` advances one polling interval: every property flips benignly with
its own volatility, then any active fault forces its footprint on top.
Everything random comes from one generator seeded by ``HostConfig.seed``.
"""
from __future__ import annotations

import json
import hashlib
from dataclasses import dataclass, field
from enum import Enum
from importlib import resources
from pathlib import Path
from typing import Mapping, Optional

import numpy as np

from adf.errors import ConfigError, ProtocolError
from adf.snapshot import ClassDictionary, FeatureId, Snapshot, Table

SERVICE = "Win32_Service"
PROCESS = "Win32_Process"
DISK = "Win32_LogicalDisk"
ADAPTER = "Win32_NetworkAdapter"
ADAPTER_CONFIG = "Win32_NetworkAdapterConfiguration"
NET_PERF = "Win32_PerfFormattedData_Tcpip_NetworkInterface"

WEB_SERVICE = "W3SVC"
DNS_SERVICE = "Dnscache"
WEB_PROCESS = "w3wp.exe"
PRIMARY_NIC = "0"
VOLUMES = ("C:", "D:", "E:")
WEBROOT_VOLUME = "E:"
UPSTREAM_PROBE = "upstream_reachable"

EPOCH_START = 1_400_000_000.0


class FaultKind(Enum):
    # adverse configuration changes
    DISABLE_NIC = "disable-nic"
    STOP_WEB_SERVICE = "stop-web-service"
    REMOVE_WEBROOT_VOLUME = "remove-webroot-volume"
    EXHAUST_FREE_SPACE = "exhaust-free-space"
    UPSTREAM_NETWORK_DOWN = "upstream-network-down"
    SABOTAGE_DNS_RESOLVER = "sabotage-dns-resolver"
    # direct fault injections
    CRASH_WEB_SERVICE = "crash-web-service"
    CRASH_IP_STACK = "crash-ip-stack"
    CRASH_DNS_SERVICE = "crash-dns-service"

    @property
    def is_dfi(self) -> bool:
        return self.name.startswith("CRASH_")

    @property
    def locally_grounded(self) -> bool:
        return self is not FaultKind.UPSTREAM_NETWORK_DOWN

    @classmethod
    def parse(cls, name: str) -> "FaultKind":
        key = name.strip().lower().replace("_", "-")
        for kind in cls:
            if kind.value == key:
                return kind
        raise ValueError(f"unknown fault {name!r}; valid: {', '.join(k.value for k in cls)}")


@dataclass(frozen=True)
class PropertySpec:
    name: str
    volatility: float
    initial: object = None  # scalar, {row_key: value}, or None for a seeded integer


@dataclass(frozen=True)
class ClassSpec:
    name: str
    key: str
    rows: tuple[str, ...]
    properties: tuple[PropertySpec, ...]


@dataclass(frozen=True)
class HostConfig:
    name: str
    seed: int
    classes: tuple[ClassSpec, ...]
    background_volatility: float = 0.01

    def __post_init__(self):
        for cls in self.classes:
            for p in cls.properties:
                if not 0.0 <= p.volatility <= 1.0:
                    raise ConfigError(f"{cls.name}.{p.name}: volatility {p.volatility} not in [0, 1]")
        if self.feature_count == 0:
            raise ConfigError("host config defines no features")

    @property
    def feature_count(self) -> int:
        return sum(len(c.rows) * len(c.properties) for c in self.classes)

    @property
    def dictionary(self) -> ClassDictionary:
        return ClassDictionary({c.name: c.key for c in self.classes})

    def with_seed(self, seed: int) -> "HostConfig":
        return HostConfig(self.name, seed, self.classes, self.background_volatility)


def config_from_dict(data: Mapping) -> HostConfig:
    try:
        background = float(data.get("background_volatility", 0.01))
        classes = []
        for c in data["classes"]:
            if "rows" in c:
                rows = tuple(str(r) for r in c["rows"])
            else:
                rows = tuple(f"{c['name']}-{i:04d}" for i in range(int(c["row_count"])))
            props = []
            for pname, spec in c["properties"].items():
                if not isinstance(spec, Mapping):
                    spec = {"volatility": spec}
                props.append(
                    PropertySpec(pname, float(spec.get("volatility", background)), spec.get("initial"))
                )
            classes.append(ClassSpec(c["name"], c["key"], rows, tuple(props)))
        return HostConfig(str(data.get("name", "custom")), int(data.get("seed", 0)), tuple(classes), background)
    except ConfigError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"malformed host config: {exc!r}") from exc


def load_config(path) -> HostConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read host config {path}: {exc}") from exc
    try:
        return config_from_dict(json.loads(text))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"host config {path} is not valid JSON: {exc}") from exc


PRESETS = ("desk", "paper-scale")


def load_preset(name: str) -> HostConfig:
    if name not in PRESETS:
        raise ConfigError(f"unknown preset {name!r}; choose from {', '.join(PRESETS)}")
    text = resources.files("adf.presets").joinpath(f"{name}.json").read_text()
    return config_from_dict(json.loads(text))


@dataclass(frozen=True)
class InjectionRecord:
    kind: FaultKind
    injected_at: int
    ground_truth: frozenset[FeatureId]


@dataclass(frozen=True)
class FaultFootprint:
    overrides: Mapping[FeatureId, object] = field(default_factory=dict)
    removed_rows: frozenset[tuple[str, str]] = frozenset()
    perturbed: tuple[FeatureId, ...] = ()
    probes: Mapping[str, bool] = field(default_factory=dict)
    ground_truth: frozenset[FeatureId] = frozenset()


def _f(cls, row, prop):
    return FeatureId(cls, row, prop)


def footprint(kind: FaultKind, config: HostConfig) -> FaultFootprint:
    """Observable effect and ground truth of one fault on the given host layout."""
    if kind is FaultKind.DISABLE_NIC:
        o = {
            _f(ADAPTER, PRIMARY_NIC, "NetEnabled"): False,
            _f(ADAPTER, PRIMARY_NIC, "NetConnectionStatus"): 0,
            _f(ADAPTER, PRIMARY_NIC, "Speed"): 0,
        }
        return FaultFootprint(o, ground_truth=frozenset(o))
    if kind is FaultKind.STOP_WEB_SERVICE:
        o = {_f(SERVICE, WEB_SERVICE, "State"): "Stopped"}
        return FaultFootprint(o, ground_truth=frozenset(o))
    if kind is FaultKind.REMOVE_WEBROOT_VOLUME:
        disk = next(c for c in config.classes if c.name == DISK)
        truth = frozenset(_f(DISK, WEBROOT_VOLUME, p.name) for p in disk.properties)
        return FaultFootprint(removed_rows=frozenset({(DISK, WEBROOT_VOLUME)}), ground_truth=truth)
    if kind is FaultKind.EXHAUST_FREE_SPACE:
        o = {_f(DISK, v, "FreeSpace"): 0 for v in VOLUMES}
        return FaultFootprint(o, ground_truth=frozenset(o))
    if kind is FaultKind.UPSTREAM_NETWORK_DOWN:
        speed = _f(ADAPTER, PRIMARY_NIC, "Speed")
        return FaultFootprint({speed: 0}, probes={UPSTREAM_PROBE: False}, ground_truth=frozenset({speed}))
    if kind is FaultKind.SABOTAGE_DNS_RESOLVER:
        o = {_f(ADAPTER_CONFIG, PRIMARY_NIC, "DNSServerSearchOrder"): "0.0.0.0"}
        return FaultFootprint(o, ground_truth=frozenset(o))
    if kind in (FaultKind.CRASH_WEB_SERVICE, FaultKind.CRASH_DNS_SERVICE):
        svc = WEB_SERVICE if kind is FaultKind.CRASH_WEB_SERVICE else DNS_SERVICE
        o = {
            _f(SERVICE, svc, "State"): "Stopped",
            _f(SERVICE, svc, "Status"): "Error",
            _f(SERVICE, svc, "ExitCode"): 1067,
        }
        perturbed = ()
        if kind is FaultKind.CRASH_WEB_SERVICE:
            perturbed = (_f(PROCESS, WEB_PROCESS, "HandleCount"), _f(PROCESS, WEB_PROCESS, "ThreadCount"))
        return FaultFootprint(o, perturbed=perturbed, ground_truth=frozenset(o))
    if kind is FaultKind.CRASH_IP_STACK:
        o = {
            _f(ADAPTER_CONFIG, PRIMARY_NIC, "IPEnabled"): False,
            _f(ADAPTER_CONFIG, PRIMARY_NIC, "IPAddress"): "",
        }
        perturbed = (_f(NET_PERF, "Ethernet", "BytesTotalPersec"),)
        return FaultFootprint(o, perturbed=perturbed, ground_truth=frozenset(o))
    raise ValueError(kind)


REQUIRED_FEATURES = (
    _f(SERVICE, WEB_SERVICE, "State"),
    _f(SERVICE, WEB_SERVICE, "Status"),
    _f(SERVICE, WEB_SERVICE, "ExitCode"),
    _f(SERVICE, DNS_SERVICE, "State"),
    _f(SERVICE, DNS_SERVICE, "Status"),
    _f(SERVICE, DNS_SERVICE, "ExitCode"),
    _f(PROCESS, WEB_PROCESS, "HandleCount"),
    _f(PROCESS, WEB_PROCESS, "ThreadCount"),
    _f(ADAPTER, PRIMARY_NIC, "NetEnabled"),
    _f(ADAPTER, PRIMARY_NIC, "NetConnectionStatus"),
    _f(ADAPTER, PRIMARY_NIC, "Speed"),
    _f(ADAPTER_CONFIG, PRIMARY_NIC, "IPEnabled"),
    _f(ADAPTER_CONFIG, PRIMARY_NIC, "IPAddress"),
    _f(ADAPTER_CONFIG, PRIMARY_NIC, "DNSServerSearchOrder"),
    _f(NET_PERF, "Ethernet", "BytesTotalPersec"),
) + tuple(_f(DISK, v, "FreeSpace") for v in VOLUMES)


@dataclass(frozen=True)
class Observation:
    """What fitness tests may look at: the current snapshot plus external probes."""

    snapshot: Snapshot
    dictionary: ClassDictionary
    probes: Mapping[str, bool]

    def row(self, class_name: str, row_key: str) -> Optional[Mapping[str, str]]:
        table = self.snapshot.tables.get(class_name)
        if table is None:
            return None
        key = self.dictionary[class_name]
        for r in table.rows:
            if r.get(key) == row_key:
                return r
        return None

    def value(self, class_name: str, row_key: str, prop: str) -> Optional[str]:
        r = self.row(class_name, row_key)
        return None if r is None else r.get(prop)


def _row_seed(seed: int, *parts) -> int:
    h = hashlib.blake2b(repr((seed,) + parts).encode(), digest_size=8)
    return int.from_bytes(h.digest(), "little")


class SimHost:
    """Single-threaded host state machine: ``sample`` / ``inject`` / ``clear_faults``."""

    def __init__(self, config: HostConfig, seed: Optional[int] = None, interval: float = 60.0):
        self.config = config if seed is None else config.with_seed(seed)
        self.interval = interval
        self.dictionary = self.config.dictionary
        self._rng = np.random.default_rng(self.config.seed)
        self._values: dict[tuple[str, str], dict[str, object]] = {}
        self._features: list[FeatureId] = []
        vols = []
        for cls in self.config.classes:
            for row in cls.rows:
                rec = {}
                for p in cls.properties:
                    rec[p.name] = self._initial(cls, row, p)
                    self._features.append(FeatureId(cls.name, row, p.name))
                    vols.append(p.volatility)
                self._values[(cls.name, row)] = rec
        self._volatility = np.array(vols)
        known = set(self._features)
        missing = [str(f) for f in REQUIRED_FEATURES if f not in known]
        if missing:
            raise ConfigError(f"host config lacks required features: {', '.join(missing)}")
        self.sequence_number = 0
        self.active: Optional[InjectionRecord] = None
        self._footprint: Optional[FaultFootprint] = None
        self._last: Optional[Snapshot] = None

    def _initial(self, cls: ClassSpec, row: str, p: PropertySpec):
        init = p.initial
        if isinstance(init, Mapping):
            init = init.get(row)
        if init is None:
            return int(_row_seed(self.config.seed, cls.name, row, p.name) % 1_000_000) + 1
        return init

    @property
    def features(self) -> list[FeatureId]:
        return list(self._features)

    def _churn(self, value, rng):
        if isinstance(value, bool):
            return not value
        if isinstance(value, int):
            step = int(rng.integers(1, 4096))
            return value - step if value > step and rng.random() < 0.5 else value + step
        if isinstance(value, float):
            return value + float(rng.normal())
        base, _, n = str(value).partition("#")
        return f"{base}#{int(n or 0) + 1}"

    def _build(self) -> Snapshot:
        fp = self._footprint
        overrides = fp.overrides if fp else {}
        removed = fp.removed_rows if fp else frozenset()
        perturbed = set(fp.perturbed) if fp else set()
        tables = {}
        for cls in self.config.classes:
            records = []
            for row in cls.rows:
                if (cls.name, row) in removed:
                    continue
                rec = {cls.key: row}
                for pname, value in self._values[(cls.name, row)].items():
                    fid = FeatureId(cls.name, row, pname)
                    if fid in overrides:
                        value = overrides[fid]
                    elif fid in perturbed:
                        # deterministic offset, distinct every interval
                        value = value + 7919 * self.sequence_number
                    rec[pname] = value
                records.append(rec)
            tables[cls.name] = Table.from_values(cls.name, records)
        return Snapshot(self.sequence_number, EPOCH_START + self.interval * self.sequence_number, tables)

    def sample(self) -> Snapshot:
        """Advance one interval and return the new snapshot."""
        self.sequence_number += 1
        flips = np.flatnonzero(self._rng.random(len(self._features)) < self._volatility)
        for i in flips:
            f = self._features[i]
            rec = self._values[(f.class_name, f.row_key)]
            rec[f.property] = self._churn(rec[f.property], self._rng)
        self._last = self._build()
        return self._last

    def observe(self) -> Observation:
        """Current observable state; does not advance time."""
        snap = self._last if self._last is not None else self._build()
        probes = {UPSTREAM_PROBE: True}
        if self._footprint is not None:
            probes.update(self._footprint.probes)
        return Observation(snap, self.dictionary, probes)

    def inject(self, kind: FaultKind) -> InjectionRecord:
        if self.active is not None:
            raise ProtocolError(f"fault {self.active.kind.value} already active; clear it first")
        fp = footprint(kind, self.config)
        self._footprint = fp
        self.active = InjectionRecord(kind, self.sequence_number, fp.ground_truth)
        self._last = None
        return self.active

    def clear_faults(self) -> None:
        if self.active is None:
            return
        self.active = None
        self._footprint = None
        self._last = None

"""JSON run configuration.

Schema (every key optional, defaults shown)::

    {
      "universe": {"n": 4, "labels": null},
      "marker": "011",
      "max_core_length": 19,
      "excess": 4,
      "excess_list": [0, 2, 4, 6, 8],
      "beta_grid": {"min": 0.001, "max": 50.0, "num": 13},
      "coupling": 20.0,
      "pairs": null,            # null = all ordered pairs
      "targets": null,          # null = all singletons and unordered pairs
      "protocol": {"steps": 64, "sweeps": 200, "trajectories": 1000, "seed": 2025},
      "output_dir": "results"
    }
"""
from __future__ import annotations

import itertools
import json
import math
import re
from dataclasses import asdict, dataclass, field

from .automaton import Marker
from .exceptions import ConfigError, DomainError
from .machine import MAX_CORE_LENGTH, MAX_OBJECTS


@dataclass
class ProtocolConfig:
    steps: int = 64
    sweeps: int = 200
    trajectories: int = 1000
    seed: int = 2025


@dataclass
class BetaGrid:
    min: float = 1e-3
    max: float = 50.0
    num: int = 13


@dataclass
class Config:
    n: int = 4
    labels: list[str] | None = None
    marker: str = "011"
    max_core_length: int = 19
    excess: int = 4
    excess_list: list[int] = field(default_factory=lambda: [0, 2, 4, 6, 8])
    beta_grid: BetaGrid = field(default_factory=BetaGrid)
    coupling: float = 20.0
    pairs: list[list[int]] | None = None
    targets: list[list[int]] | None = None
    protocol: ProtocolConfig = field(default_factory=ProtocolConfig)
    output_dir: str = "results"

    def resolved_pairs(self) -> list[tuple[int, int]]:
        if self.pairs is None:
            return list(itertools.permutations(range(self.n), 2))
        return [tuple(p) for p in self.pairs]

    def resolved_targets(self) -> list[tuple[int, ...]]:
        if self.targets is None:
            singles = [(i,) for i in range(self.n)]
            return singles + list(itertools.combinations(range(self.n), 2))
        return [tuple(t) for t in self.targets]

    def to_dict(self) -> dict:
        d = asdict(self)
        return {
            "universe": {"n": d.pop("n"), "labels": d.pop("labels")},
            **d,
        }

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"

    @classmethod
    def from_dict(cls, raw: dict, text: str | None = None) -> "Config":
        return _parse(raw, text)

    def validate(self, text: str | None = None) -> "Config":
        _validate(self, text)
        return self


def _line_of(text: str | None, *keys: str) -> int | None:
    """Line of the last key in ``keys`` located after its parents."""
    if not text:
        return None
    pos = 0
    for key in keys:
        m = re.compile(r'"%s"\s*:' % re.escape(key)).search(text, pos)
        if m is None:
            return None
        pos = m.start()
    return text.count("\n", 0, pos) + 1


_TOP = {
    "universe", "marker", "max_core_length", "excess", "excess_list",
    "beta_grid", "coupling", "pairs", "targets", "protocol", "output_dir",
}


def _sub(raw, key, cls, text):
    value = raw.get(key, {})
    if not isinstance(value, dict):
        raise ConfigError(f"'{key}' must be an object", _line_of(text, key))
    allowed = set(cls.__dataclass_fields__)
    for k in value:
        if k not in allowed:
            raise ConfigError(f"unknown key '{key}.{k}'", _line_of(text, key, k))
    return cls(**value)


def _parse(raw: dict, text: str | None) -> Config:
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object", 1 if text else None)
    for k in raw:
        if k not in _TOP:
            raise ConfigError(f"unknown key '{k}'", _line_of(text, k))
    universe = raw.get("universe", {})
    if not isinstance(universe, dict) or set(universe) - {"n", "labels"}:
        raise ConfigError("'universe' must be an object with keys n, labels", _line_of(text, "universe"))
    cfg = Config(
        n=universe.get("n", 4),
        labels=universe.get("labels"),
        marker=raw.get("marker", "011"),
        max_core_length=raw.get("max_core_length", 19),
        excess=raw.get("excess", 4),
        excess_list=raw.get("excess_list", [0, 2, 4, 6, 8]),
        beta_grid=_sub(raw, "beta_grid", BetaGrid, text),
        coupling=raw.get("coupling", 20.0),
        pairs=raw.get("pairs"),
        targets=raw.get("targets"),
        protocol=_sub(raw, "protocol", ProtocolConfig, text),
        output_dir=raw.get("output_dir", "results"),
    )
    _validate(cfg, text)
    return cfg


def _is_int(v) -> bool:
    return isinstance(v, int) and not isinstance(v, bool)


def _is_num(v) -> bool:
    return isinstance(v, (int, float)) and not isinstance(v, bool) and math.isfinite(v)


def _validate(cfg: Config, text: str | None) -> None:
    def fail(msg, *keys):
        raise ConfigError(msg, _line_of(text, *keys))

    if not _is_int(cfg.n) or not 2 <= cfg.n <= MAX_OBJECTS:
        fail(f"universe.n must be an integer in [2, {MAX_OBJECTS}], got {cfg.n!r}", "universe", "n")
    if cfg.labels is not None and (not isinstance(cfg.labels, list) or len(cfg.labels) != cfg.n):
        fail("universe.labels must list one name per object", "universe", "labels")
    if not isinstance(cfg.marker, str):
        fail("marker must be a bit string", "marker")
    try:
        Marker(cfg.marker)
    except DomainError as exc:
        fail(str(exc), "marker")
    if not _is_int(cfg.max_core_length) or not 1 <= cfg.max_core_length <= MAX_CORE_LENGTH:
        fail(f"max_core_length must be an integer in [1, {MAX_CORE_LENGTH}]", "max_core_length")
    if not _is_int(cfg.excess) or cfg.excess < 0:
        fail("excess must be a nonnegative integer", "excess")
    if not isinstance(cfg.excess_list, list) or not cfg.excess_list or not all(_is_int(e) and e >= 0 for e in cfg.excess_list):
        fail("excess_list must be a nonempty list of nonnegative integers", "excess_list")
    g = cfg.beta_grid
    if not (_is_num(g.min) and _is_num(g.max) and 0 < g.min < g.max):
        fail("beta_grid needs 0 < min < max", "beta_grid")
    if not _is_int(g.num) or g.num < 2:
        fail("beta_grid.num must be an integer >= 2", "beta_grid", "num")
    if not _is_num(cfg.coupling) or cfg.coupling <= 0:
        fail("coupling must be a positive finite number", "coupling")
    for key, groups, size in (("pairs", cfg.pairs, 2), ("targets", cfg.targets, None)):
        if groups is None:
            continue
        if not isinstance(groups, list):
            fail(f"{key} must be a list", key)
        for item in groups:
            if not isinstance(item, list) or not item or (size and len(item) != size):
                fail(f"bad entry {item!r} in {key}", key)
            if not all(_is_int(i) and 0 <= i < cfg.n for i in item):
                fail(f"object id out of range in {key} entry {item!r}", key)
            if key == "pairs" and item[0] == item[1]:
                fail(f"pair {item!r} repeats an object", key)
    p = cfg.protocol
    for name in ("steps", "sweeps", "trajectories", "seed"):
        v = getattr(p, name)
        low = 0 if name in ("sweeps", "seed") else 1
        if name == "trajectories":
            low = 2
        if not _is_int(v) or v < low:
            fail(f"protocol.{name} must be an integer >= {low}", "protocol", name)
    if not isinstance(cfg.output_dir, str) or not cfg.output_dir:
        fail("output_dir must be a nonempty string", "output_dir")


def load_config(path: str | None) -> Config:
    if path is None:
        return Config().validate()
    with open(path) as fh:
        text = fh.read()
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(exc.msg, exc.lineno) from None
    try:
        return _parse(raw, text)
    except TypeError as exc:
        raise ConfigError(str(exc)) from None

"""Scenario configuration: defaults, flat key-value file parsing and validation."""

from __future__ import annotations

import configparser
import dataclasses
import hashlib
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Any

US_PER_S = 1_000_000


class ConfigError(ValueError):
    """Raised for malformed config files or violated config invariants."""

    def __init__(self, problems: list[str]):
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))


def to_us(seconds: float) -> int:
    """Convert seconds to integer microseconds (the simulator's time base)."""
    return int(round(seconds * US_PER_S))


@dataclass(frozen=True)
class ScenarioConfig:
    # deployment
    n_sites: int = 7
    cells_per_site: int = 3
    isd: float = 200.0
    carrier_freq: float = 28.0
    bs_height: float = 10.0
    ue_height: float = 1.5
    region_factor: float = 1.2

    # run
    n_ue: int = 420
    sim_time: float = 30.0
    tick: float = 0.01
    ue_speed: float = 60.0  # km/h
    seed: int = 0

    # transmit side
    tx_power: float = 33.0  # dBm per cell
    n_beams: int = 12
    k_sched: int = 4
    outer_beam_gain: float = 18.0
    inner_beam_gain: float = 14.0
    outer_beam_width: float = 15.0
    inner_beam_width: float = 30.0
    outer_beam_tilt: float = 8.0
    inner_beam_tilt: float = 16.0
    outer_beam_vwidth: float = 10.0
    inner_beam_vwidth: float = 20.0
    front_to_back: float = 30.0

    # UE panels
    panel_gain: float = 5.0
    panel_width: float = 90.0
    hand_blockage: bool = False
    blockage_loss: float = 25.0
    blocked_panels: frozenset = field(default_factory=lambda: frozenset({1, 3}))

    # channel
    noise_figure: float = 9.0
    bandwidth: float = 100e6
    shadow_decorr_dist: float = 13.0
    shadow_sigma_los: float = 4.0
    shadow_sigma_nlos: float = 7.82
    shadow_grid_res: float = 5.0
    fast_fade_sigma: float = 4.0
    coherence_dist: float = 5.0

    # radio link monitoring
    gamma_out: float = -8.0
    gamma_in: float = -6.0
    n_bfd: int = 3
    t_bfr_max: float = 0.100

    # handover and timers
    t_ho: float = 0.055
    t_hof: float = 0.200
    t_res: float = 0.180
    t_rach: float = 0.010
    max_rach_attempts: int = 4
    ssb_period: float = 0.020
    l1_window: int = 5
    l3_k: int = 4
    o_prep: float = 0.0
    o_exec: float = 3.0
    ttt_prep: float = 0.100
    ttt_exec: float = 0.080

    def __post_init__(self):
        # normalise numeric types so that e.g. ue_speed=60 and 60.0 hash alike
        for f in fields(self):
            v = getattr(self, f.name)
            if f.type == "float" and isinstance(v, int) and not isinstance(v, bool):
                object.__setattr__(self, f.name, float(v))
            elif f.type == "frozenset" and not isinstance(v, frozenset):
                object.__setattr__(self, f.name, frozenset(v))

    @property
    def n_cells(self) -> int:
        return self.n_sites * self.cells_per_site

    @property
    def l3_alpha(self) -> float:
        return 1.0 / 2 ** (self.l3_k / 4)

    @property
    def speed_mps(self) -> float:
        return self.ue_speed / 3.6

    @property
    def region_radius(self) -> float:
        return self.region_factor * self.isd

    @property
    def n_ticks(self) -> int:
        return to_us(self.sim_time) // to_us(self.tick)

    @property
    def contiguity_tol(self) -> float:
        return self.tick / 2

    def problems(self) -> list[str]:
        """Return every violated invariant, one message per offending key."""
        out = []
        durations = ("sim_time", "tick", "t_ho", "t_hof", "t_res", "t_rach",
                     "ssb_period", "ttt_prep", "ttt_exec", "t_bfr_max")
        for name in durations:
            if not getattr(self, name) > 0:
                out.append(f"{name} must be > 0")
        tick_us, ssb_us = to_us(self.tick), to_us(self.ssb_period)
        if tick_us > 0 and ssb_us > 0 and ssb_us % tick_us:
            out.append("tick must divide ssb_period")
        if tick_us > 0 and to_us(self.sim_time) % tick_us:
            out.append("tick must divide sim_time")
        if self.t_hof < self.t_ho:
            out.append("t_hof must be >= t_ho")
        if not 0 < self.k_sched <= self.n_beams:
            out.append("k_sched must satisfy 0 < k_sched <= n_beams")
        if self.n_beams < 3 or self.n_beams % 3:
            out.append("n_beams must be a positive multiple of 3")
        if not self.gamma_in > self.gamma_out:
            out.append("gamma_in must be > gamma_out")
        if self.n_sites != 7:
            out.append("n_sites must be 7 (central site plus one ring)")
        if self.cells_per_site != 3:
            out.append("cells_per_site must be 3")
        for name in ("n_ue", "l1_window", "max_rach_attempts", "n_bfd"):
            if getattr(self, name) < 1:
                out.append(f"{name} must be >= 1")
        for name in ("isd", "carrier_freq", "bandwidth", "shadow_decorr_dist",
                     "shadow_grid_res", "coherence_dist", "region_factor"):
            if not getattr(self, name) > 0:
                out.append(f"{name} must be > 0")
        if self.ue_speed < 0:
            out.append("ue_speed must be >= 0")
        if self.l3_k < 0:
            out.append("l3_k must be >= 0")
        if self.blockage_loss < 0:
            out.append("blockage_loss must be >= 0")
        if not self.blocked_panels <= {1, 2, 3}:
            out.append("blocked_panels must be a subset of {P1, P2, P3}")
        if not 0 <= self.seed < 2**64:
            out.append("seed must be a 64-bit unsigned integer")
        return out

    def validate(self) -> "ScenarioConfig":
        problems = self.problems()
        if problems:
            raise ConfigError(problems)
        return self

    def replace(self, **changes: Any) -> "ScenarioConfig":
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict[str, Any]:
        d = dataclasses.asdict(self)
        d["blocked_panels"] = sorted(self.blocked_panels)
        return d

    def canonical_text(self) -> str:
        """Stable ``key = value`` rendering; also a valid config file."""
        lines = []
        for f in fields(self):
            lines.append(f"{f.name} = {_format_value(getattr(self, f.name))}")
        return "\n".join(lines) + "\n"

    def config_hash(self) -> str:
        return hashlib.sha256(self.canonical_text().encode()).hexdigest()[:16]

    @classmethod
    def from_dict(cls, raw: dict[str, Any]) -> "ScenarioConfig":
        """Build from already-typed values (e.g. a parsed JSON report)."""
        raw = dict(raw)
        if "blocked_panels" in raw:
            raw["blocked_panels"] = frozenset(int(p) for p in raw["blocked_panels"])
        return cls(**raw).validate()


def _format_value(v: Any) -> str:
    if isinstance(v, bool):
        return "on" if v else "off"
    if isinstance(v, frozenset):
        return ",".join(f"P{p}" for p in sorted(v))
    return repr(v)


_TRUE = {"1", "true", "yes", "on"}
_FALSE = {"0", "false", "no", "off"}


def _parse_bool(text: str) -> bool:
    t = text.strip().lower()
    if t in _TRUE:
        return True
    if t in _FALSE:
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _parse_panels(text: str) -> frozenset:
    body = text.strip().strip("{}[]()")
    out = set()
    for tok in body.replace(";", ",").split(","):
        tok = tok.strip().upper()
        if not tok:
            continue
        out.add(int(tok[1:] if tok.startswith("P") else tok))
    return frozenset(out)


def _coerce(name: str, kind: type, text: str) -> Any:
    if kind is bool:
        return _parse_bool(text)
    if kind is frozenset:
        return _parse_panels(text)
    if kind is int:
        return int(text.strip(), 0)
    return float(text)


_FIELD_TYPES = {
    f.name: {"int": int, "float": float, "bool": bool, "frozenset": frozenset}[str(f.type)]
    for f in fields(ScenarioConfig)
}


def parse_config(text: str) -> ScenarioConfig:
    """Parse flat ``key = value`` text. A single optional section header is allowed."""
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    parser.optionxform = str
    stripped = text.lstrip()
    if not stripped.startswith("["):
        text = "[scenario]\n" + text
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError([f"parse error: {exc}"]) from exc
    if len(parser.sections()) != 1:
        raise ConfigError(["parse error: expected a single flat section"])
    items = parser[parser.sections()[0]]

    values: dict[str, Any] = {}
    problems: list[str] = []
    for key, raw in items.items():
        if key not in _FIELD_TYPES:
            problems.append(f"{key}: unknown key")
            continue
        try:
            values[key] = _coerce(key, _FIELD_TYPES[key], raw)
        except ValueError as exc:
            problems.append(f"{key}: {exc}")
    if problems:
        raise ConfigError(problems)
    cfg = ScenarioConfig(**values)
    return cfg.validate()


def load_config(path: str | Path) -> ScenarioConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError([f"cannot read {path}: {exc}"]) from exc
    return parse_config(text)

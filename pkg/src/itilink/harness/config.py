"""Scenario configuration: schema, TOML loading, validation, overrides.

Scenario files are TOML with a ``schema_version`` field.  A file holds either
one scenario (top-level tables) or several (an array of ``[[scenarios]]``
tables, optionally preceded by shared defaults that each scenario inherits).
All sections are frozen dataclasses with tuple fields so a full scenario is
hashable and processes can cache derived runtime state per scenario.
"""

from __future__ import annotations

import dataclasses
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

SCHEMA_VERSION = 1


class ConfigError(ValueError):
    """A scenario file or override violates the schema or a precondition."""


@dataclass(frozen=True)
class OfdmSection:
    n_fft: int = 256
    n_cp: int = 18
    n_used: int = 150
    sample_rate_hz: float = 3.84e6
    frame_period: int = 7


@dataclass(frozen=True)
class TowerSection:
    count: int = 4
    power_db: tuple[float, ...] = (0.0, -3.0, -3.0, -3.0)
    extra_delay_ns: tuple[float, ...] = (0.0, 450.0, 650.0, 1650.0)
    pdp: tuple[str, ...] = ("uniform4",) * 4
    pdp_delay_scale: float = 1.0


@dataclass(frozen=True)
class CfoSection:
    max_offset_hz: float = 0.0
    derotation: str = "mean"          # none | mean | max
    desired_locked: bool = True       # serving-tower offset pinned to zero
    detector_eps_error: float = 0.0   # additive offset-knowledge error


@dataclass(frozen=True)
class PilotSection:
    scheme: str = "joint"             # joint | orthogonal | reduced_joint
    family: str = "random_qpsk"       # zc | random_qpsk | cyclic_shift
    boost: float = 1.0
    full_band: bool = False           # plan over all N bins (estimation-form)
    seed: int = 7


@dataclass(frozen=True)
class EstimatorSection:
    kind: str = "jmls"                # jmls | omls
    alpha_mode: str = "auto"          # auto | fixed
    alpha: float = 0.0
    l_mode: str = "delay"             # delay | ncp | fixed
    l_taps: int = 8


@dataclass(frozen=True)
class DetectorSection:
    kind: str = "ocjllr"              # ocjllr | conventional
    desired_order: int = 4
    interferer_order: int = 4
    noise_est: str = "guard"          # guard | oracle


@dataclass(frozen=True)
class FecSection:
    block_length: int = 796
    rate: str = "1/3"                 # 1/3 | 2/3 | 3/4
    iterations: int = 8
    interleaver_seed: int = 5923
    parity_fill: bool = False
    fill_rate: str = "2/3"            # effective rate after pilot-symbol fill
    channel_interleaver: bool = True  # spread coded bits across subcarriers


@dataclass(frozen=True)
class SweepSection:
    eb_n0_db: tuple[float, ...] = (0.0, 4.0, 8.0, 12.0, 16.0, 20.0)


@dataclass(frozen=True)
class TrialSection:
    mse_trials: int = 2000
    max_blocks: int = 20000
    target_error_blocks: int = 100
    batch_size: int = 64


@dataclass(frozen=True)
class ScenarioConfig:
    scenario_id: str
    master_seed: int = 20260809
    kind: str = "mse"                 # mse | bler
    sim_path: str = "estimation_form" # estimation_form | time_domain (mse only)
    metrics: tuple[str, ...] = ("mse_cir_total",)
    schema_version: int = SCHEMA_VERSION
    ofdm: OfdmSection = field(default_factory=OfdmSection)
    towers: TowerSection = field(default_factory=TowerSection)
    cfo: CfoSection = field(default_factory=CfoSection)
    pilots: PilotSection = field(default_factory=PilotSection)
    estimator: EstimatorSection = field(default_factory=EstimatorSection)
    detector: DetectorSection = field(default_factory=DetectorSection)
    fec: FecSection = field(default_factory=FecSection)
    sweep: SweepSection = field(default_factory=SweepSection)
    trials: TrialSection = field(default_factory=TrialSection)


_SECTIONS = {
    "ofdm": OfdmSection, "towers": TowerSection, "cfo": CfoSection,
    "pilots": PilotSection, "estimator": EstimatorSection,
    "detector": DetectorSection, "fec": FecSection, "sweep": SweepSection,
    "trials": TrialSection,
}


def _freeze(value):
    return tuple(value) if isinstance(value, list) else value


def _build_section(cls, data: dict, where: str):
    known = {f.name for f in dataclasses.fields(cls)}
    unknown = set(data) - known
    if unknown:
        raise ConfigError(f"unknown key(s) {sorted(unknown)} in [{where}]")
    return cls(**{k: _freeze(v) for k, v in data.items()})


def scenario_from_dict(data: dict) -> ScenarioConfig:
    data = dict(data)
    version = data.pop("schema_version", SCHEMA_VERSION)
    if version != SCHEMA_VERSION:
        raise ConfigError(f"unsupported schema_version {version}")
    if "scenario_id" not in data:
        raise ConfigError("scenario_id is required")
    kwargs = {"schema_version": version}
    for name, cls in _SECTIONS.items():
        section = data.pop(name, {})
        if not isinstance(section, dict):
            raise ConfigError(f"[{name}] must be a table")
        kwargs[name] = _build_section(cls, section, name)
    top_known = {"scenario_id", "master_seed", "kind", "sim_path", "metrics"}
    unknown = set(data) - top_known
    if unknown:
        raise ConfigError(f"unknown top-level key(s) {sorted(unknown)}")
    kwargs.update({k: _freeze(v) for k, v in data.items()})
    scn = ScenarioConfig(**kwargs)
    validate_scenario(scn)
    return scn


def _merge(base: dict, extra: dict) -> dict:
    out = dict(base)
    for k, v in extra.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k] = _merge(out[k], v)
        else:
            out[k] = v
    return out


def load_scenarios(path, overrides: dict | None = None) -> list[ScenarioConfig]:
    """Parse a scenario file into one or more validated configs."""
    raw = tomllib.loads(Path(path).read_text())
    if "scenarios" in raw:
        entries = raw.pop("scenarios")
        if not isinstance(entries, list):
            raise ConfigError("[[scenarios]] must be an array of tables")
        dicts = [_merge(raw, e) for e in entries]
    else:
        dicts = [raw]
    if overrides:
        dicts = [_merge(d, overrides) for d in dicts]
    return [scenario_from_dict(d) for d in dicts]


def parse_override(text: str) -> dict:
    """Turn "section.key=value" into a nested dict, coercing scalar types."""
    if "=" not in text:
        raise ConfigError(f"override {text!r} must look like key=value")
    key, _, value = text.partition("=")
    parts = key.strip().split(".")
    out: dict = {}
    node = out
    for p in parts[:-1]:
        node[p] = {}
        node = node[p]
    node[parts[-1]] = _coerce(value.strip())
    return out


def _coerce(text: str):
    low = text.lower()
    if low in ("true", "false"):
        return low == "true"
    if text.startswith("[") and text.endswith("]"):
        inner = text[1:-1].strip()
        return [_coerce(t.strip()) for t in inner.split(",")] if inner else []
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        return text


def validate_scenario(scn: ScenarioConfig) -> None:
    """Schema-level checks; module preconditions are exercised by the runtime
    builder, which `validate` runs as its second stage."""
    def need(cond, msg):
        if not cond:
            raise ConfigError(f"{scn.scenario_id}: {msg}")

    need(scn.kind in ("mse", "bler"), f"unknown kind {scn.kind!r}")
    need(scn.sim_path in ("estimation_form", "time_domain"),
         f"unknown sim_path {scn.sim_path!r}")
    need(all(m in ("mse_cir_total", "mse_cfr_per_bin") for m in scn.metrics),
         f"unknown metric in {scn.metrics}")
    o = scn.ofdm
    need(o.n_fft > 0 and (o.n_fft & (o.n_fft - 1)) == 0, "n_fft must be a power of two")
    need(0 < o.n_used < o.n_fft and o.n_used % 2 == 0,
         "n_used must be even and leave room for DC/guards")
    need(0 <= o.n_cp < o.n_fft, "n_cp out of range")
    need(o.frame_period >= 2, "frame_period must be >= 2")
    t = scn.towers
    need(t.count >= 1, "at least one tower")
    need(len(t.power_db) == t.count, "power_db needs one entry per tower")
    need(len(t.extra_delay_ns) == t.count, "extra_delay_ns needs one entry per tower")
    need(len(t.pdp) == t.count, "pdp needs one entry per tower")
    need(t.power_db[0] == 0.0 and t.extra_delay_ns[0] == 0.0,
         "tower 0 is the power and delay reference")
    need(scn.cfo.derotation in ("none", "mean", "max"),
         f"unknown derotation {scn.cfo.derotation!r}")
    need(scn.cfo.max_offset_hz >= 0, "max_offset_hz must be >= 0")
    p = scn.pilots
    need(p.scheme in ("joint", "orthogonal", "reduced_joint"),
         f"unknown pilot scheme {p.scheme!r}")
    need(p.family in ("zc", "random_qpsk", "cyclic_shift"),
         f"unknown pilot family {p.family!r}")
    need(p.boost > 0, "boost must be positive")
    e = scn.estimator
    need(e.kind in ("jmls", "omls"), f"unknown estimator {e.kind!r}")
    need(e.alpha_mode in ("auto", "fixed"), f"unknown alpha_mode {e.alpha_mode!r}")
    need(e.alpha >= 0, "alpha must be >= 0")
    need(e.l_mode in ("delay", "ncp", "fixed"), f"unknown l_mode {e.l_mode!r}")
    need(e.l_taps > 0, "l_taps must be positive")
    d = scn.detector
    need(d.kind in ("ocjllr", "conventional"), f"unknown detector {d.kind!r}")
    need(d.desired_order in (4, 16) and d.interferer_order in (4, 16),
         "modulation orders must be 4 or 16")
    need(d.noise_est in ("guard", "oracle"), f"unknown noise_est {d.noise_est!r}")
    f = scn.fec
    need(f.block_length > 0, "block_length must be positive")
    try:
        Fraction(f.rate)
        Fraction(f.fill_rate)
    except (ValueError, ZeroDivisionError):
        raise ConfigError(f"{scn.scenario_id}: unparsable code rate") from None
    need(f.iterations >= 1, "iterations must be >= 1")
    if f.parity_fill:
        need(scn.pilots.scheme == "reduced_joint",
             "parity_fill requires the reduced_joint pilot scheme")
    need(len(scn.sweep.eb_n0_db) >= 1, "empty Eb/N0 sweep")
    tr = scn.trials
    need(tr.mse_trials >= 1 and tr.max_blocks >= 1 and tr.batch_size >= 1,
         "trial counts must be positive")
    need(tr.target_error_blocks >= 0, "target_error_blocks must be >= 0")
    if scn.kind == "mse" and scn.sim_path == "estimation_form":
        need(scn.cfo.max_offset_hz == 0.0,
             "estimation_form path has no CFO mechanics; use time_domain")


def resolved_dict(scn: ScenarioConfig) -> dict:
    """Plain-JSON form of a scenario, for embedding next to results."""
    def unfreeze(x):
        if isinstance(x, tuple):
            return [unfreeze(v) for v in x]
        if isinstance(x, dict):
            return {k: unfreeze(v) for k, v in x.items()}
        return x

    return unfreeze(dataclasses.asdict(scn))

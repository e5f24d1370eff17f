"""JSON run configuration for the command line tools.

Precedence: command-line flags, then the config file, then built-in
defaults (which reproduce the measured operating point).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources

import jsonschema

from .cluster import CombSpec
from .errors import PairlabError
from .simulate import ArmParams, DetectorParams, SourceParams, reference_arms


class ConfigError(PairlabError):
    """Invalid or inconsistent configuration."""


def load_schema(name):
    text = resources.files("pairlab").joinpath("schemas", name).read_text()
    return json.loads(text)


@dataclass
class RunConfig:
    source: SourceParams = field(default_factory=SourceParams)
    signal_arm: ArmParams = field(default_factory=lambda: reference_arms()[0])
    idler_arm: ArmParams = field(default_factory=lambda: reference_arms()[1])
    comb: CombSpec = field(default_factory=CombSpec)
    seed: int = 1
    duration_s: float = 10.0
    resolution_ps: int = 1
    chunk_duration_s: float = 1.0
    window_ns: float = 8.0
    offset_ns: float | None = None
    eta_det: float = 0.60
    bin_ps: int = 162


_DETECTOR_KEYS = {"efficiency": "efficiency", "jitter_sigma_ns": "jitter_sigma",
                  "dead_time_ns": "dead_time", "dark_rate_hz": "dark_rate"}
_SOURCE_KEYS = {"pair_rate_per_s_mw": "pair_rate_R", "pump_mw": "pump_power",
                "tau_lead_ns": "tau_lead", "tau_trail_ns": "tau_trail",
                "thermal_tau0_ns": "thermal_tau0"}
_COMB_KEYS = {"fsr_s_ghz": "fsr_s", "fsr_i_ghz": "fsr_i", "linewidth_s_mhz": "linewidth_s",
              "linewidth_i_mhz": "linewidth_i", "offset_s_mhz": "offset_s",
              "offset_i_mhz": "offset_i", "offset_i2_mhz": "offset_i2", "pulling": "pulling"}


def _rename(d, keys):
    return {keys[k]: v for k, v in d.items() if k in keys}


def _arm(raw, default):
    det = raw.get("detector", {})
    detector = DetectorParams(**{**default.detector.__dict__, **_rename(det, _DETECTOR_KEYS)})
    return ArmParams(raw.get("transmission", default.transmission), detector,
                     raw.get("splitter", default.splitter))


def config_from_dict(raw):
    try:
        jsonschema.validate(raw, load_schema("config.schema.json"))
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ConfigError(f"config {where}: {exc.message}") from None
    try:
        cfg = RunConfig()
        src = raw.get("source", {})
        kw = {**cfg.source.__dict__, **_rename(src, _SOURCE_KEYS)}
        if "generation_rate_per_s" in src:
            if "pair_rate_per_s_mw" in src:
                raise ConfigError("give either generation_rate_per_s or pair_rate_per_s_mw")
            kw["pair_rate_R"] = src["generation_rate_per_s"] / kw["pump_power"]
        cfg.source = SourceParams(**kw)
        cfg.signal_arm = _arm(raw.get("signal_arm", {}), cfg.signal_arm)
        cfg.idler_arm = _arm(raw.get("idler_arm", {}), cfg.idler_arm)
        cfg.comb = CombSpec(**{**cfg.comb.__dict__, **_rename(raw.get("comb", {}), _COMB_KEYS)})
        for key in ("seed", "duration_s", "resolution_ps", "chunk_duration_s"):
            if key in raw:
                setattr(cfg, key, raw[key])
        for key, value in raw.get("analysis", {}).items():
            setattr(cfg, key, value)
    except ConfigError:
        raise
    except PairlabError as exc:
        raise ConfigError(str(exc)) from None
    return cfg


def load_config(path):
    if path is None:
        return RunConfig()
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from None
    return config_from_dict(raw)

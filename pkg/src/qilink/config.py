"""Scenario configuration: YAML/JSON files, command-line overrides, defaults.

A configuration file is a mapping with these optional sections (JSON is
accepted too, being a subset of YAML)::

    scenario: fig2-ber-curves
    n_s: 7.81e-4
    ideal_receiver: false
    eve_literal_variance: false
    classical_variances: false
    link:        {kappa_A: 0.74, G_A_minus_1: 2.48e-5, ...}
    alice_noise: {f_apd: 3.0, sigma_d_sq: 6.0e-3, pump_fluct_fraction: 0.2}
    eve_noise:   {f_apd: 3.0, sigma_d_sq: 6.0e-3, pump_fluct_fraction: 0.0}
    sweep:       {variable: n_s, lo: 1.0e-5, hi: 1.0e-2, points: 181, spacing: log}
    montecarlo:  {m_modes: 10000, n_bits: 100000, seed: 0,
                  sampling_modes: [exact-geometric, gaussian-clt],
                  targets: [0.1, 0.01, 0.001], waveform_bits: 100}
    output:      {path: out.csv, format: csv}

Anything omitted falls back to the measured link values. Unknown keys are
rejected.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Optional

import numpy as np
import yaml

from .chain import LinkParams
from .detection import ReceiverNoiseParams
from .errors import ConfigError, DomainError, QilinkError
from .montecarlo import SAMPLING_MODES

PRESETS = (
    "fig2-ber-curves",
    "fig3-info-top",
    "fig3-info-bottom",
    "threshold-report",
    "secure-point",
    "montecarlo-check",
)

SECURE_POINT_N_S = 7.81e-4
SECURE_POINT_G_A_EXCESS = 2.48e-5


@dataclass(frozen=True)
class SweepSpec:
    variable: str = "n_s"
    lo: float = 1e-5
    hi: float = 1e-2
    points: int = 181
    spacing: str = "log"

    def grid(self) -> np.ndarray:
        if self.spacing == "log":
            return np.logspace(np.log10(self.lo), np.log10(self.hi), self.points)
        return np.linspace(self.lo, self.hi, self.points)


@dataclass(frozen=True)
class MonteCarloSpec:
    m_modes: int = 10_000
    n_bits: int = 100_000
    seed: int = 0
    sampling_modes: tuple[str, ...] = SAMPLING_MODES
    targets: tuple[float, ...] = (1e-1, 1e-2, 1e-3)
    waveform_bits: int = 100


@dataclass(frozen=True)
class OutputSpec:
    path: Optional[str] = None
    format: str = "csv"


@dataclass(frozen=True)
class ScenarioConfig:
    link: LinkParams = field(default_factory=LinkParams)
    alice_noise: ReceiverNoiseParams = field(default_factory=ReceiverNoiseParams.alice_default)
    eve_noise: ReceiverNoiseParams = field(default_factory=ReceiverNoiseParams.eve_default)
    sweep: SweepSpec = field(default_factory=SweepSpec)
    montecarlo: MonteCarloSpec = field(default_factory=MonteCarloSpec)
    output: OutputSpec = field(default_factory=OutputSpec)
    scenario: Optional[str] = None
    n_s: float = SECURE_POINT_N_S
    ideal_receiver: bool = False
    eve_literal_variance: bool = False
    classical_variances: bool = False
    # Dotted keys the user set explicitly; preset defaults never override these.
    explicit: frozenset = frozenset()

    def receivers(self) -> tuple[LinkParams, ReceiverNoiseParams, ReceiverNoiseParams]:
        """Link and noise models after applying ``ideal_receiver``."""
        if self.ideal_receiver:
            ideal = ReceiverNoiseParams.ideal()
            return self.link.ideal_receiver(), ideal, ideal
        return self.link, self.alice_noise, self.eve_noise

    def to_dict(self) -> dict:
        out = dataclasses.asdict(self)
        out.pop("explicit")
        out["link"]["G_A_minus_1"] = self.link.g_a_excess
        return _plain(out)


def _plain(obj):
    if isinstance(obj, dict):
        return {k: _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    return obj


_SECTIONS = {
    "link": LinkParams,
    "alice_noise": ReceiverNoiseParams,
    "eve_noise": ReceiverNoiseParams,
    "sweep": SweepSpec,
    "montecarlo": MonteCarloSpec,
    "output": OutputSpec,
}
_SCALARS = {
    "scenario": str,
    "n_s": float,
    "ideal_receiver": bool,
    "eve_literal_variance": bool,
    "classical_variances": bool,
}
_LINK_ALIASES = {"G_A_minus_1"}


def _field_types(cls) -> dict[str, Any]:
    return {f.name: f.type for f in dataclasses.fields(cls)}


def _coerce(key: str, value: Any, type_name: str) -> Any:
    """Convert a parsed value to the declared field type, naming ``key`` on failure."""
    t = str(type_name)
    try:
        if value is None:
            if "Optional" in t:
                return None
            raise TypeError("null is not allowed")
        if t == "bool" or t is bool:
            if isinstance(value, bool):
                return value
            if isinstance(value, str) and value.lower() in ("true", "false"):
                return value.lower() == "true"
            raise TypeError(f"expected a boolean, got {value!r}")
        if "tuple[str" in t:
            if isinstance(value, str):
                value = [value]
            return tuple(str(v) for v in value)
        if "tuple[float" in t:
            if not isinstance(value, (list, tuple)):
                value = [value]
            return tuple(float(v) for v in value)
        if "int" in t and "float" not in t:
            if isinstance(value, bool):
                raise TypeError("expected an integer")
            f = float(value)
            if f != int(f):
                raise TypeError(f"expected an integer, got {value!r}")
            return int(f)
        if "float" in t:
            if isinstance(value, bool):
                raise TypeError("expected a number")
            return float(value)
        if "str" in t:
            return str(value)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid value for {key}: {exc}") from exc
    return value


def _flatten(raw: dict) -> dict[str, Any]:
    flat = {}
    for key, value in raw.items():
        if key in _SECTIONS:
            if value is None:
                continue
            if not isinstance(value, dict):
                raise ConfigError(f"section {key} must be a mapping")
            for sub, v in value.items():
                flat[f"{key}.{sub}"] = v
        elif key in _SCALARS:
            flat[key] = value
        else:
            raise ConfigError(f"unknown configuration key: {key}")
    return flat


def _resolve_key(key: str) -> str:
    """Map a bare or dotted key onto its canonical dotted form."""
    if key in _SCALARS:
        return key
    if "." in key:
        section, sub = key.split(".", 1)
        if section not in _SECTIONS:
            raise ConfigError(f"unknown configuration key: {key}")
        known = set(_field_types(_SECTIONS[section]))
        if section == "link":
            known |= _LINK_ALIASES
        if sub not in known:
            raise ConfigError(f"unknown configuration key: {key}")
        return key
    matches = [
        s for s, cls in _SECTIONS.items()
        if key in _field_types(cls) or (s == "link" and key in _LINK_ALIASES)
    ]
    if len(matches) == 1:
        return f"{matches[0]}.{key}"
    if not matches:
        raise ConfigError(f"unknown configuration key: {key}")
    raise ConfigError(f"ambiguous key {key}: qualify it as one of " + ", ".join(f"{m}.{key}" for m in matches))


def parse_overrides(items: list[str]) -> dict[str, Any]:
    """Parse ``key=value`` strings from the command line."""
    out = {}
    for item in items or ():
        if "=" not in item:
            raise ConfigError(f"override must look like key=value, got {item!r}")
        key, text = item.split("=", 1)
        try:
            value = yaml.safe_load(text)
        except yaml.YAMLError as exc:
            raise ConfigError(f"cannot parse value for {key}: {exc}") from exc
        out[_resolve_key(key.strip())] = value
    return out


def build_config(flat: dict[str, Any]) -> ScenarioConfig:
    """Build a validated configuration from canonical dotted keys."""
    flat = {_resolve_key(k): v for k, v in flat.items()}
    explicit = frozenset(flat)
    sections: dict[str, dict] = {s: {} for s in _SECTIONS}
    scalars: dict[str, Any] = {}
    for key, value in flat.items():
        if "." in key:
            section, sub = key.split(".", 1)
            sections[section][sub] = value
        else:
            scalars[key] = _coerce(key, value, _SCALARS[key].__name__)

    link_raw = sections["link"]
    if "G_A_minus_1" in link_raw:
        if "G_A" in link_raw:
            raise ConfigError("set only one of link.G_A and link.G_A_minus_1")
        link_raw["G_A"] = 1.0 + _coerce("link.G_A_minus_1", link_raw.pop("G_A_minus_1"), "float")
    # Overriding M alone detaches it from the bandwidth-time product.
    if "M" in link_raw and "W" not in link_raw and "T" not in link_raw:
        link_raw["W"] = None
        link_raw["T"] = None
    elif ("W" in link_raw or "T" in link_raw) and "M" not in link_raw:
        w = _coerce("link.W", link_raw.get("W", LinkParams.W), "Optional[float]")
        t = _coerce("link.T", link_raw.get("T", LinkParams.T), "Optional[float]")
        if w is not None and t is not None:
            link_raw["M"] = round(w * t)

    built = {}
    for section, cls in _SECTIONS.items():
        types = _field_types(cls)
        kwargs = {k: _coerce(f"{section}.{k}", v, types[k]) for k, v in sections[section].items()}
        default = ScenarioConfig.__dataclass_fields__[section].default_factory()
        try:
            built[section] = replace(default, **kwargs)
        except DomainError as exc:
            raise ConfigError(f"invalid {section}: {exc}") from exc

    cfg = ScenarioConfig(**built, **scalars, explicit=explicit)
    _validate(cfg)
    return cfg


def _validate(cfg: ScenarioConfig) -> None:
    if cfg.scenario is not None and cfg.scenario not in PRESETS:
        raise ConfigError(f"invalid scenario: {cfg.scenario!r}; choose from {', '.join(PRESETS)}")
    if not cfg.n_s >= 0:
        raise ConfigError(f"invalid n_s: must be >= 0, got {cfg.n_s}")
    sw = cfg.sweep
    if sw.spacing not in ("log", "linear"):
        raise ConfigError(f"invalid sweep.spacing: {sw.spacing!r}")
    if sw.points < 1:
        raise ConfigError(f"invalid sweep.points: {sw.points}")
    if sw.spacing == "log" and not (sw.lo > 0 and sw.hi > 0):
        raise ConfigError("invalid sweep.lo/sweep.hi: log spacing needs positive bounds")
    if sw.variable != "n_s" and sw.variable not in LinkParams.field_names():
        raise ConfigError(f"invalid sweep.variable: {sw.variable!r}")
    mc = cfg.montecarlo
    for mode in mc.sampling_modes:
        if mode not in SAMPLING_MODES:
            raise ConfigError(f"invalid montecarlo.sampling_modes entry: {mode!r}")
    for t in mc.targets:
        if not 0.0 < t < 0.5:
            raise ConfigError(f"invalid montecarlo.targets entry: {t}")
    if mc.m_modes < 1 or mc.n_bits < 100 or mc.waveform_bits < 1:
        raise ConfigError("invalid montecarlo settings: need m_modes >= 1, n_bits >= 100, waveform_bits >= 1")
    if not 0 <= mc.seed < 2**64:
        raise ConfigError(f"invalid montecarlo.seed: {mc.seed}")
    if cfg.output.format not in ("csv", "json"):
        raise ConfigError(f"invalid output.format: {cfg.output.format!r}")


def read_config_file(path: str | Path) -> dict[str, Any]:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        raw = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"cannot parse config {path}: {exc}") from exc
    if raw is None:
        return {}
    if not isinstance(raw, dict):
        raise ConfigError(f"config {path} must hold a mapping at top level")
    return _flatten(raw)


def load_config(path: str | Path | None = None, overrides: dict[str, Any] | None = None) -> ScenarioConfig:
    """Load a configuration file, apply dotted-key overrides, and validate."""
    flat = read_config_file(path) if path is not None else {}
    flat = {_resolve_key(k): v for k, v in flat.items()}
    flat.update(overrides or {})
    try:
        return build_config(flat)
    except ConfigError:
        raise
    except QilinkError as exc:
        raise ConfigError(str(exc)) from exc


def with_defaults(cfg: ScenarioConfig, defaults: dict[str, Any]) -> ScenarioConfig:
    """Apply preset defaults for keys the user did not set explicitly."""
    flat = {k: v for k, v in _current_values(cfg).items() if k in cfg.explicit}
    gain_keys = {"link.G_A", "link.G_A_minus_1"}
    for key, value in defaults.items():
        key = _resolve_key(key)
        if key in cfg.explicit or (key in gain_keys and gain_keys & cfg.explicit):
            continue
        flat[key] = value
    rebuilt = build_config(flat)
    return replace(rebuilt, explicit=cfg.explicit)


def _current_values(cfg: ScenarioConfig) -> dict[str, Any]:
    out: dict[str, Any] = {}
    for section in _SECTIONS:
        for k, v in dataclasses.asdict(getattr(cfg, section)).items():
            out[f"{section}.{k}"] = v
    out["link.G_A_minus_1"] = cfg.link.g_a_excess
    for key in _SCALARS:
        out[key] = getattr(cfg, key)
    return out

"""Experiment configuration and the flat ``section.key = value`` file format.

A config file is plain text, one assignment per line, ``#`` starts a comment::

    deployment.n_per_side = 5
    power.alpha = -0.5
    experiment.policies = gamma:-0.5, beta:-0.5

Every key must name an existing field; values are coerced to the field's type.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Any


class ConfigError(ValueError):
    """Raised for unknown keys, unparsable values or violated relations."""


@dataclass
class DeploymentConfig:
    area_side: float = 2500.0
    focus_side: float = 1000.0
    n_aps: int = 625
    n_ues: int = 125
    n_aps_focus: int = 100
    n_ues_focus: int = 20
    n_per_side: int = 5

    def validate(self) -> None:
        if self.area_side <= 0 or self.focus_side <= 0:
            raise ConfigError("deployment: area_side and focus_side must be positive")
        if self.focus_side > self.area_side:
            raise ConfigError("deployment: focus_side <= area_side violated")
        for name in ("n_aps", "n_ues"):
            if getattr(self, name) < 1:
                raise ConfigError(f"deployment.{name} must be >= 1")
        if self.n_per_side < 1:
            raise ConfigError("deployment.n_per_side must be >= 1")
        ratio = (self.focus_side / self.area_side) ** 2
        for total, focus in (("n_aps", "n_aps_focus"), ("n_ues", "n_ues_focus")):
            n_total, n_focus = getattr(self, total), getattr(self, focus)
            if not 0 <= n_focus <= n_total:
                raise ConfigError(f"deployment: 0 <= {focus} <= {total} violated")
            if abs(n_focus - n_total * ratio) > 1.0:
                raise ConfigError(
                    f"deployment: density mismatch, {focus}/focus_area must equal "
                    f"{total}/area ({n_focus} vs expected {n_total * ratio:.2f})"
                )
            if ratio == 1.0 and n_focus != n_total:
                raise ConfigError(f"deployment: {focus} must equal {total} when focus == area")


@dataclass
class ChannelConfig:
    carrier_mhz: float = 1900.0
    ap_height: float = 15.0
    ue_height: float = 1.65
    d0: float = 10.0
    d1: float = 50.0
    shadow_std_db: float = 8.0
    bandwidth_hz: float = 20e6
    noise_figure_db: float = 9.0
    ap_power_mw: float = 200.0
    ue_power_mw: float = 100.0
    tau: int = 10

    def validate(self) -> None:
        if not 0 <= self.d0 < self.d1:
            raise ConfigError("channel: 0 <= d0 < d1 violated")
        if self.shadow_std_db < 0:
            raise ConfigError("channel.shadow_std_db must be >= 0")
        if self.tau < 1:
            raise ConfigError("channel.tau must be >= 1")
        for name in ("carrier_mhz", "ap_height", "ue_height", "bandwidth_hz",
                     "ap_power_mw", "ue_power_mw"):
            if getattr(self, name) <= 0:
                raise ConfigError(f"channel.{name} must be positive")

    @property
    def hata_loss_db(self) -> float:
        """Hata-COST231 fixed loss term for the configured frequency and heights."""
        lf = math.log10(self.carrier_mhz)
        return (46.3 + 33.9 * lf - 13.82 * math.log10(self.ap_height)
                - (1.1 * lf - 0.7) * self.ue_height + (1.56 * lf - 0.8))

    @property
    def noise_power_mw(self) -> float:
        noise_dbm = -174.0 + 10.0 * math.log10(self.bandwidth_hz) + self.noise_figure_db
        return 10.0 ** (noise_dbm / 10.0)

    @property
    def rho_d(self) -> float:
        return self.ap_power_mw / self.noise_power_mw

    @property
    def rho_p(self) -> float:
        return self.ue_power_mw / self.noise_power_mw


@dataclass
class AssociationConfig:
    strategy: str = "distance"
    n_select: int = 5
    delta: float = 0.95
    comp_metric: str = "beta_sum"

    def validate(self) -> None:
        if self.strategy not in ("distance", "llsf"):
            raise ConfigError("association.strategy must be 'distance' or 'llsf'")
        if self.n_select < 1:
            raise ConfigError("association.n_select must be >= 1")
        if not 0.0 < self.delta <= 1.0:
            raise ConfigError("association.delta must lie in (0, 1]")
        if self.comp_metric not in ("beta_sum", "max_beta"):
            raise ConfigError("association.comp_metric must be 'beta_sum' or 'max_beta'")


@dataclass
class PowerConfig:
    basis: str = "gamma"
    alpha: float = -0.5

    def validate(self) -> None:
        if self.basis not in ("gamma", "beta"):
            raise ConfigError("power.basis must be 'gamma' or 'beta'")
        if not math.isfinite(self.alpha):
            raise ConfigError("power.alpha must be finite")


@dataclass
class EvaluationConfig:
    coherence_symbols: int = 200
    # negative selects 1 - tau / coherence_symbols
    prelog: float = -1.0

    def validate(self) -> None:
        if self.coherence_symbols < 1:
            raise ConfigError("evaluation.coherence_symbols must be >= 1")
        if self.prelog > 1.0:
            raise ConfigError("evaluation.prelog must be <= 1 (negative = automatic)")


@dataclass
class ExperimentConfig:
    n_snapshots: int = 500
    master_seed: int = 1
    modes: list = field(default_factory=lambda: ["proposed", "canonical", "comp_jt"])
    policies: list = field(default_factory=lambda: ["gamma:-0.5"])
    alpha_grid: list = field(default_factory=lambda: [-1.0, -0.75, -0.5, -0.25, 0.0, 0.25, 0.5])
    percentiles: list = field(default_factory=lambda: [5.0, 50.0, 95.0])

    def validate(self) -> None:
        if self.n_snapshots < 1:
            raise ConfigError("experiment.n_snapshots must be >= 1")
        if not 0 <= self.master_seed < 2**64:
            raise ConfigError("experiment.master_seed must be an unsigned 64-bit integer")
        for mode in self.modes:
            if mode not in ("proposed", "canonical", "comp_jt"):
                raise ConfigError(f"experiment.modes: unknown mode {mode!r}")
        if not self.modes:
            raise ConfigError("experiment.modes must not be empty")
        if not self.policies:
            raise ConfigError("experiment.policies must not be empty")
        for spec in self.policies:
            parse_policy(spec, key="experiment.policies")
        if not self.alpha_grid:
            raise ConfigError("experiment.alpha_grid must not be empty")
        for p in self.percentiles:
            if not 0.0 <= p <= 100.0:
                raise ConfigError("experiment.percentiles must lie in [0, 100]")


@dataclass
class OracleConfig:
    n_realizations: int = 1_000_000
    seed: int = 7

    def validate(self) -> None:
        if self.n_realizations < 10_000:
            raise ConfigError("oracle.n_realizations must be >= 10000")


@dataclass
class OutputConfig:
    dir: str = "results"

    def validate(self) -> None:
        if not self.dir:
            raise ConfigError("output.dir must not be empty")


@dataclass
class Config:
    deployment: DeploymentConfig = field(default_factory=DeploymentConfig)
    channel: ChannelConfig = field(default_factory=ChannelConfig)
    association: AssociationConfig = field(default_factory=AssociationConfig)
    power: PowerConfig = field(default_factory=PowerConfig)
    evaluation: EvaluationConfig = field(default_factory=EvaluationConfig)
    experiment: ExperimentConfig = field(default_factory=ExperimentConfig)
    oracle: OracleConfig = field(default_factory=OracleConfig)
    output: OutputConfig = field(default_factory=OutputConfig)

    def validate(self) -> "Config":
        for f in fields(self):
            getattr(self, f.name).validate()
        return self

    @property
    def prelog(self) -> float:
        if self.evaluation.prelog >= 0:
            return self.evaluation.prelog
        return max(0.0, 1.0 - self.channel.tau / self.evaluation.coherence_symbols)

    def to_dict(self) -> dict[str, dict[str, Any]]:
        return dataclasses.asdict(self)

    def flat_items(self) -> list[tuple[str, str]]:
        """All ``(dotted_key, text_value)`` pairs in declaration order."""
        out = []
        for section in fields(self):
            sub = getattr(self, section.name)
            for f in fields(sub):
                out.append((f"{section.name}.{f.name}", _format(getattr(sub, f.name))))
        return out

    def dumps(self) -> str:
        return "".join(f"{k} = {v}\n" for k, v in self.flat_items())

    def set(self, key: str, text: str) -> None:
        """Assign ``text`` to the dotted ``key``, coercing to the field type."""
        section_name, _, name = key.partition(".")
        sub = getattr(self, section_name, None) if section_name in _sections() else None
        if sub is None or name not in {f.name for f in fields(sub)}:
            raise ConfigError(f"unknown config key {key!r}")
        current = getattr(sub, name)
        try:
            value = _coerce(text, current)
        except ValueError as exc:
            raise ConfigError(f"cannot parse value {text!r} for {key}: {exc}") from None
        setattr(sub, name, value)

    def replace(self, **overrides: Any) -> "Config":
        """Deep copy with ``section__field=value`` overrides applied."""
        new = dataclasses.replace(
            self, **{f.name: dataclasses.replace(getattr(self, f.name)) for f in fields(self)})
        for key, value in overrides.items():
            section, _, name = key.partition("__")
            sub = getattr(new, section)
            if name not in {f.name for f in fields(sub)}:
                raise ConfigError(f"unknown config key {section}.{name}")
            setattr(sub, name, list(value) if isinstance(value, (list, tuple)) else value)
        return new


def _sections() -> set[str]:
    return {f.name for f in fields(Config)}


def _format(value: Any) -> str:
    if isinstance(value, list):
        return ", ".join(_format(v) for v in value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _coerce(text: str, current: Any) -> Any:
    text = text.strip()
    if isinstance(current, bool):
        if text.lower() in ("true", "1", "yes"):
            return True
        if text.lower() in ("false", "0", "no"):
            return False
        raise ValueError("expected a boolean")
    if isinstance(current, int):
        return int(text)
    if isinstance(current, float):
        value = float(text)
        if math.isnan(value):
            raise ValueError("NaN not allowed")
        return value
    if isinstance(current, list):
        items = [t.strip() for t in text.split(",") if t.strip()]
        if current and isinstance(current[0], float):
            return [float(t) for t in items]
        return items
    return text


def parse_policy(spec: str, key: str = "policy") -> tuple[str, float]:
    """Parse ``basis:alpha`` (e.g. ``gamma:-0.5``)."""
    basis, sep, alpha = spec.partition(":")
    basis = basis.strip()
    try:
        value = float(alpha)
    except ValueError:
        value = math.nan
    if not sep or basis not in ("gamma", "beta") or not math.isfinite(value):
        raise ConfigError(f"{key}: invalid policy {spec!r}, expected '<gamma|beta>:<alpha>'")
    return basis, value


def parse_config_text(text: str, base: Config | None = None, source: str = "<text>") -> Config:
    config = base if base is not None else Config()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value', got {raw!r}")
        config.set(key.strip(), value)
    return config


def load_config(path: str | Path | None = None, overrides: list[str] | tuple = ()) -> Config:
    """Load defaults, then ``path`` (if any), then ``KEY=VALUE`` overrides; validate."""
    config = Config()
    if path is not None:
        path = Path(path)
        try:
            text = path.read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigError(f"cannot read config file {path}: {exc.strerror}") from None
        parse_config_text(text, config, source=str(path))
    for item in overrides:
        key, sep, value = item.partition("=")
        if not sep:
            raise ConfigError(f"override {item!r} is not KEY=VALUE")
        config.set(key.strip(), value)
    return config.validate()

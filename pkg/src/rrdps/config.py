"""Run configuration: a flat JSON document plus command-line overrides.

Precedence, lowest to highest: built-in defaults (the experimental parameter
set), the ``--config`` file, explicit command-line flags.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Any, Optional

from .interferometer import SchemeSpec
from .keyrate import ProtocolParams
from .mc.tables import DARK_MODELS
from .model import OBJECTIVE_ASYMPTOTIC, OBJECTIVE_FINITE, LinkParams

DEFAULT_LENGTHS = [20.0, 50.0, 70.0, 80.0, 85.0, 90.0]


class ConfigError(ValueError):
    """A configuration value failed validation. The message names the field."""


@dataclass
class RunConfig:
    # protocol
    L: int = 65
    mu: Optional[float] = None  # None: optimise
    v_th: Optional[int] = None  # None: optimise
    vth_cap: Optional[int] = None
    f: float = 1.1
    s: int = 80
    N_em: int = 200_000_000
    tag_mode: str = "exceeds"
    # link
    alpha: float = 0.2
    length_km: float = 0.0
    alpha_IL: float = 5.60
    eta_D: float = 0.203
    d: float = 2.1e-6
    e_s: float = 0.022
    # sweep / optimisation
    lengths: list = field(default_factory=lambda: list(DEFAULT_LENGTHS))
    objective: str = OBJECTIVE_ASYMPTOTIC
    # monte carlo
    packets: int = 1_000_000
    seed: int = 1
    workers: int = 1
    dark_model: str = "gate"
    backend: Optional[str] = None
    # interferometer scheme
    scheme: str = "faraday-michelson"
    switch_loss_pass_dB: float = 0.6
    unit_loss_dB: float = 0.8
    splitter_loss_dB: Optional[float] = None
    base_loss_dB: Optional[float] = None
    tolerance_dB: float = 0.0
    il_table: Optional[str] = None

    @classmethod
    def keys(cls) -> list[str]:
        return [f.name for f in fields(cls)]

    def protocol(self) -> ProtocolParams:
        return ProtocolParams(L=self.L, mu=0.04 if self.mu is None else self.mu, v_th=self.v_th,
                              f=self.f, s=self.s, N_em=self.N_em, vth_cap=self.vth_cap,
                              tag_mode=self.tag_mode)

    def link(self, length_km: Optional[float] = None) -> LinkParams:
        return LinkParams(alpha=self.alpha, length_km=self.length_km if length_km is None else length_km,
                          alpha_IL=self.alpha_IL, eta_D=self.eta_D, d=self.d, e_s=self.e_s)

    def scheme_spec(self) -> SchemeSpec:
        return SchemeSpec(kind=self.scheme, L=self.L, switch_loss_pass_dB=self.switch_loss_pass_dB,
                          unit_loss_dB=self.unit_loss_dB, splitter_loss_dB=self.splitter_loss_dB,
                          base_loss_dB=self.base_loss_dB, tolerance_dB=self.tolerance_dB)

    def validate(self) -> "RunConfig":
        """Raise :class:`ConfigError` naming the first bad field."""
        for builder in (self.protocol, self.link):
            try:
                builder()
            except ValueError as exc:
                raise ConfigError(str(exc)) from None
        if self.mu is not None and not (self.mu > 0):
            raise ConfigError(f"mu: must be > 0 when given, got {self.mu!r}")
        if any(x < 0 for x in self.lengths):
            raise ConfigError("lengths: all lengths must be >= 0")
        if sorted(self.lengths) != list(self.lengths):
            raise ConfigError("lengths: must be sorted ascending")
        if self.objective not in (OBJECTIVE_ASYMPTOTIC, OBJECTIVE_FINITE):
            raise ConfigError(f"objective: must be 'asymptotic' or 'finite', got {self.objective!r}")
        if int(self.packets) != self.packets or self.packets < 1:
            raise ConfigError(f"packets: must be an integer >= 1, got {self.packets!r}")
        if self.workers < 1:
            raise ConfigError(f"workers: must be >= 1, got {self.workers!r}")
        if self.dark_model not in DARK_MODELS:
            raise ConfigError(f"dark_model: must be one of {DARK_MODELS}, got {self.dark_model!r}")
        if self.backend not in (None, "python", "cython"):
            raise ConfigError(f"backend: must be 'python' or 'cython', got {self.backend!r}")
        try:
            self.scheme_spec()
        except ValueError as exc:
            raise ConfigError(f"scheme: {exc}") from None
        return self

    def to_dict(self) -> dict:
        return {k: getattr(self, k) for k in self.keys()}

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


_INT_KEYS = {"L", "v_th", "vth_cap", "s", "N_em", "packets", "seed", "workers"}
_FLOAT_KEYS = {"mu", "f", "alpha", "length_km", "alpha_IL", "eta_D", "d", "e_s",
               "switch_loss_pass_dB", "unit_loss_dB", "splitter_loss_dB", "base_loss_dB", "tolerance_dB"}


def _coerce(key: str, value: Any):
    if value is None:
        return None
    try:
        if key in _INT_KEYS:
            if isinstance(value, float) and not value.is_integer():
                raise ValueError
            return int(float(value)) if isinstance(value, str) else int(value)
        if key in _FLOAT_KEYS:
            return float(value)
        if key == "lengths":
            if isinstance(value, str):
                return [float(x) for x in value.split(",") if x.strip()]
            return [float(x) for x in value]
    except (TypeError, ValueError):
        raise ConfigError(f"{key}: cannot interpret {value!r}") from None
    return value


def from_dict(data: dict, base: Optional[RunConfig] = None) -> RunConfig:
    """Build a config from a flat mapping, on top of ``base`` (or the defaults).

    A document of the form ``{"config": {...}, ...}`` (as written by
    ``rrdps rate --json``) is accepted too.
    """
    if "config" in data and isinstance(data["config"], dict):
        data = data["config"]
    cfg = RunConfig(**(base.to_dict() if base else {}))
    known = set(RunConfig.keys())
    for key, value in data.items():
        if key not in known:
            raise ConfigError(f"{key}: unknown configuration key")
        setattr(cfg, key, _coerce(key, value))
    return cfg


def load_config(path, overrides: Optional[dict] = None) -> RunConfig:
    """Read a JSON config file (or start from defaults when ``path`` is None)."""
    cfg = RunConfig()
    if path is not None:
        try:
            data = json.loads(Path(path).read_text())
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config: {path} is not valid JSON ({exc})") from None
        if not isinstance(data, dict):
            raise ConfigError("config: top level must be a JSON object")
        cfg = from_dict(data, cfg)
    if overrides:
        cfg = from_dict({k: v for k, v in overrides.items() if v is not None}, cfg)
    return cfg.validate()

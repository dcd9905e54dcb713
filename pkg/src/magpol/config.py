"""Run configuration: a YAML document validated strictly against typed sections.

Unknown keys are errors. Every physical quantity carries its unit in the key
name (``freq_hz``, ``b_min_tesla``, ``slope_hz_per_tesla`` ...).
"""

from __future__ import annotations

from pathlib import Path
from typing import Literal, Optional

import numpy as np
import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from .coupled_modes import CoupledSystem
from .model_core import MagnonBranch, PhotonMode


class ConfigError(ValueError):
    """Invalid configuration; ``issues`` holds one ``(location, message)`` per problem."""

    def __init__(self, issues: list[tuple[str, str]]):
        self.issues = issues
        super().__init__("; ".join(f"{loc}: {msg}" for loc, msg in issues))


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class PhotonSpec(_Strict):
    label: str
    freq_hz: float = Field(gt=0)
    gamma_half_hz: float = Field(gt=0)
    port_in_hz: Optional[float] = Field(default=None, ge=0)
    port_out_hz: Optional[float] = Field(default=None, ge=0)


class MagnonSpec(_Strict):
    slope_hz_per_tesla: float = Field(gt=0)
    offset_hz: float = 0.0
    gamma_half_hz: float = Field(gt=0)
    msat_tesla: Optional[float] = None


class SystemSection(_Strict):
    photons: list[PhotonSpec] = Field(min_length=1)
    magnons: list[MagnonSpec] = Field(min_length=1)
    # rows per photon, columns per magnon; empty means uncoupled
    couplings_hz: list[list[float]] = Field(default_factory=list)
    # magnetic filling factor per photon label, used for chi_eff
    filling_factors: dict[str, float] = Field(default_factory=dict)

    @model_validator(mode="after")
    def _shapes(self):
        if self.couplings_hz:
            if len(self.couplings_hz) != len(self.photons):
                raise ValueError(f"couplings_hz needs {len(self.photons)} rows (one per photon)")
            for row in self.couplings_hz:
                if len(row) != len(self.magnons):
                    raise ValueError(f"each couplings_hz row needs {len(self.magnons)} entries")
                if any(v < 0 for v in row):
                    raise ValueError("couplings must be >= 0")
        labels = [p.label for p in self.photons]
        if len(set(labels)) != len(labels):
            raise ValueError("photon labels must be unique")
        for k, v in self.filling_factors.items():
            if k not in labels:
                raise ValueError(f"filling factor given for unknown photon {k!r}")
            if not 0 < v <= 1:
                raise ValueError(f"filling factor of {k!r} must be in (0, 1]")
        return self

    def build(self) -> CoupledSystem:
        photons = [PhotonMode(p.label, p.freq_hz, p.gamma_half_hz) for p in self.photons]
        magnons = [MagnonBranch(m.slope_hz_per_tesla, m.offset_hz, m.gamma_half_hz, m.msat_tesla)
                   for m in self.magnons]
        g = np.array(self.couplings_hz, dtype=float) if self.couplings_hz else np.zeros((len(photons), len(magnons)))

        def ports(attr):
            vals = [getattr(p, attr) for p in self.photons]
            if all(v is None for v in vals):
                return None
            return [p.gamma_half_hz / 2 if v is None else v for p, v in zip(self.photons, vals)]

        return CoupledSystem(photons, magnons, g, ports("port_in_hz"), ports("port_out_hz"))


class SweepSection(_Strict):
    b_min_tesla: float = Field(ge=0)
    b_max_tesla: float
    b_steps: int = Field(ge=2)
    f_min_hz: float = Field(gt=0)
    f_max_hz: float
    f_steps: int = Field(ge=2)
    noise_amplitude: float = Field(default=0.0, ge=0)
    seed: int = Field(default=0, ge=0, lt=2**64)

    @model_validator(mode="after")
    def _order(self):
        if not self.b_max_tesla > self.b_min_tesla:
            raise ValueError("b_max_tesla must exceed b_min_tesla")
        if not self.f_max_hz > self.f_min_hz:
            raise ValueError("f_max_hz must exceed f_min_hz")
        return self

    def axes(self) -> tuple[np.ndarray, np.ndarray]:
        return (np.linspace(self.b_min_tesla, self.b_max_tesla, self.b_steps),
                np.linspace(self.f_min_hz, self.f_max_hz, self.f_steps))


class ModeSelector(_Strict):
    family: Literal["TE", "TM"] = "TE"
    ell: int = Field(default=1, ge=1)
    q: int = Field(default=1, ge=1)


class SphereSection(_Strict):
    eps_r: float = Field(default=15.96, gt=1)
    radius_m: float = Field(default=2.5e-3, gt=0)
    f_min_hz: float = Field(default=5e9, gt=0)
    f_max_hz: float = Field(default=30e9, gt=0)
    ell_max: int = Field(default=3, ge=1)
    families: list[Literal["TE", "TM"]] = Field(default_factory=lambda: ["TE", "TM"])
    q_min: float = Field(default=2.0, gt=0)
    mode: ModeSelector = Field(default_factory=ModeSelector)
    eps_min: float = Field(default=14.0, gt=1)
    eps_max: float = Field(default=18.0, gt=1)
    radius_tol_m: float = Field(default=0.0, ge=0)
    f_meas_hz: Optional[float] = Field(default=None, gt=0)

    @model_validator(mode="after")
    def _order(self):
        if not self.f_max_hz > self.f_min_hz:
            raise ValueError("f_max_hz must exceed f_min_hz")
        if not self.eps_max > self.eps_min:
            raise ValueError("eps_max must exceed eps_min")
        return self


class FanoSection(_Strict):
    min_prominence_db: float = Field(default=6.0, gt=0)
    window_widths: float = Field(default=6.0, gt=0)
    power: bool = True


class FitSection(_Strict):
    side: Literal["right", "left", "both"] = "right"
    min_prominence_db: float = Field(default=10.0, gt=0)
    slope_seed_hz_per_tesla: float = Field(default=28e9, gt=0)
    offset_seed_hz: float = 0.0
    fix_slope_hz_per_tesla: Optional[float] = Field(default=None, gt=0)
    fix_offset_hz: Optional[float] = None
    refine: bool = False
    min_magnon_points: int = Field(default=3, ge=1)
    # magnon half-linewidth for cooperativity when no system section is given
    gamma_mag_half_hz: Optional[float] = Field(default=None, gt=0)
    fano: FanoSection = Field(default_factory=FanoSection)

    def fixed(self) -> dict:
        out = {}
        if self.fix_slope_hz_per_tesla is not None:
            out["slope"] = self.fix_slope_hz_per_tesla
        if self.fix_offset_hz is not None:
            out["offset"] = self.fix_offset_hz
        return out


class IOSection(_Strict):
    map_path: Optional[str] = None
    trace_path: Optional[str] = None
    report_path: Optional[str] = None
    out_path: Optional[str] = None


class RunConfig(_Strict):
    system: Optional[SystemSection] = None
    sweep: Optional[SweepSection] = None
    sphere: SphereSection = Field(default_factory=SphereSection)
    fit: FitSection = Field(default_factory=FitSection)
    io: IOSection = Field(default_factory=IOSection)
    threads: int = Field(default=1, ge=1)


def _node_line(root, loc) -> Optional[int]:
    """1-based line of the YAML node at ``loc`` (or its deepest existing parent)."""
    node, line = root, None
    if node is not None:
        line = node.start_mark.line + 1
    for key in loc:
        if isinstance(node, yaml.MappingNode):
            nxt = None
            for k, v in node.value:
                if k.value == str(key):
                    nxt = (k, v)
                    break
            if nxt is None:
                return line
            line = nxt[0].start_mark.line + 1
            node = nxt[1]
        elif isinstance(node, yaml.SequenceNode) and isinstance(key, int) and key < len(node.value):
            node = node.value[key]
            line = node.start_mark.line + 1
        else:
            return line
    return line


def parse_config(text: str, source: str = "<config>") -> RunConfig:
    """Validate YAML text; raises :class:`ConfigError` with ``file:line: key: message`` entries."""
    try:
        root = yaml.compose(text)
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        where = f"{source}:{mark.line + 1}" if mark is not None else source
        raise ConfigError([(where, f"YAML syntax: {getattr(exc, 'problem', exc)}")]) from None
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ConfigError([(source, "top level must be a mapping")])
    try:
        return RunConfig.model_validate(data)
    except ValidationError as exc:
        issues = []
        for err in exc.errors():
            loc = tuple(err["loc"])
            key = ".".join(str(p) for p in loc) or "<root>"
            line = _node_line(root, loc)
            where = f"{source}:{line}" if line else source
            msg = err["msg"]
            if err["type"] == "extra_forbidden":
                msg = "unknown key"
            issues.append((f"{where}: {key}", msg))
        raise ConfigError(issues) from None


def load_config(path) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError([(str(path), f"cannot read: {exc.strerror}")]) from None
    return parse_config(text, str(path))

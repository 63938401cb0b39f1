"""Flat ``key = value`` run configuration."""
from __future__ import annotations

import configparser
import hashlib
import json
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path


class ConfigError(ValueError):
    pass


def _floats(text: str, n: int | None = None) -> tuple[float, ...]:
    vals = tuple(float(v) for v in text.replace(",", " ").split())
    if n is not None and len(vals) != n:
        raise ValueError(f"expected {n} numbers, got {len(vals)}")
    return vals


def _bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


@dataclass(frozen=True)
class RunConfig:
    mesh: str = "torus:8"
    edge_lengths: str | None = None
    periods: tuple[float, ...] | None = None
    form: str | None = None
    epsilon: float | None = None
    delta: float | None = None
    C: float | None = None
    epsilon_range: tuple[float, float] = (1e-4, 1e-2)
    invC_range: tuple[float, float] = (1e-9, 1e-3)
    deltaC_range: tuple[float, float] = (1e-4, 1.0)
    sweep: tuple[int, int, int] = (5, 4, 3)
    radii: tuple[float, float, float] | None = None
    depth_factor: float = 10.0
    grid_s: int = 9
    grid_t: int = 9
    polar_levels: int = 6
    polar_angles: int = 4
    kappa: float | None = None
    seed: int = 0
    flip_convention: bool = False
    family: str = "isoperiodic"
    family_size: int = 5
    jiggle: float = 0.15
    samples_csv: bool = True
    output_dir: str = "trisymp_out"
    base_dir: str = field(default=".", compare=False)

    def __post_init__(self):
        for name in ("epsilon_range", "invC_range", "deltaC_range"):
            lo, hi = getattr(self, name)
            if not 0 < lo <= hi:
                raise ConfigError(f"{name}: need 0 < lo <= hi, got {lo}, {hi}")
        if self.radii is not None and not 0 < self.radii[0] < self.radii[1] < self.radii[2]:
            raise ConfigError(f"radii must satisfy 0 < R0 < R1 < R2, got {self.radii}")
        for name in ("epsilon", "delta", "C"):
            v = getattr(self, name)
            if v is not None and v <= 0:
                raise ConfigError(f"{name} must be positive")
        if min(self.sweep) < 1 or self.grid_s < 2 or self.grid_t < 2:
            raise ConfigError("sweep counts must be >= 1 and grid sizes >= 2")
        if self.family not in ("isoperiodic", "scaling"):
            raise ConfigError(f"family must be 'isoperiodic' or 'scaling', got {self.family!r}")
        if self.periods is not None and self.form is not None:
            raise ConfigError("give either periods or form, not both")

    def resolve(self, path: str | None) -> Path | None:
        if path is None:
            return None
        p = Path(path)
        return p if p.is_absolute() else Path(self.base_dir) / p

    @property
    def pinned(self) -> dict:
        return {k: getattr(self, k) for k in ("epsilon", "delta", "C") if getattr(self, k) is not None}

    def to_dict(self) -> dict:
        d = asdict(self)
        d.pop("base_dir")
        return d

    def digest(self) -> str:
        """Hash of everything except the output location, for namespacing outputs."""
        d = self.to_dict()
        d.pop("output_dir")
        return hashlib.sha256(json.dumps(d, sort_keys=True).encode()).hexdigest()[:12]


_PARSERS = {
    "periods": lambda v: _floats(v),
    "epsilon_range": lambda v: _floats(v, 2),
    "invC_range": lambda v: _floats(v, 2),
    "deltaC_range": lambda v: _floats(v, 2),
    "radii": lambda v: _floats(v, 3),
    "sweep": lambda v: tuple(int(x) for x in _floats(v, 3)),
    "flip_convention": _bool,
    "samples_csv": _bool,
}


def _parse_value(name: str, text: str):
    if name in _PARSERS:
        return _PARSERS[name](text)
    kind = {f.name: f.type for f in fields(RunConfig)}[name]
    if "float" in kind:
        return float(text)
    if "int" in kind:
        return int(text)
    return text.strip()


def config_from_mapping(values: dict, base_dir: str = ".") -> RunConfig:
    known = {f.name for f in fields(RunConfig)} - {"base_dir"}
    kw = {}
    for key, text in values.items():
        if key not in known:
            raise ConfigError(f"unknown key {key!r}")
        try:
            kw[key] = _parse_value(key, str(text))
        except ValueError as exc:
            raise ConfigError(f"{key}: {exc}") from None
    return RunConfig(base_dir=base_dir, **kw)


def load_config(path: str | Path | None, overrides: list[str] | None = None) -> RunConfig:
    """Read a flat key-value file (``#`` comments, no sections); ``overrides`` are ``key=value`` strings."""
    values: dict = {}
    base = "."
    if path is not None:
        path = Path(path)
        try:
            text = path.read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
        cp = configparser.ConfigParser(inline_comment_prefixes=("#",), interpolation=None)
        cp.optionxform = str
        try:
            cp.read_string("[run]\n" + text, source=str(path))
        except configparser.Error as exc:
            raise ConfigError(f"{path}: {exc}") from None
        if cp.sections() != ["run"]:
            raise ConfigError(f"{path}: section headers are not supported in a flat config")
        values.update(cp["run"])
        base = str(path.parent)
    for item in overrides or []:
        if "=" not in item:
            raise ConfigError(f"override {item!r} is not key=value")
        k, v = item.split("=", 1)
        values[k.strip()] = v.strip()
    return config_from_mapping(values, base)

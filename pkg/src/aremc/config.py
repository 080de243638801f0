"""Run configuration: a flat ``key = value`` text format.

Keys mirror the channel parameter names (``d_hex``, ``a_rx``, ``l_rx``,
``d``, ``v``, ``D``, ``n_mol``, ``dt``, ``t_sim``) plus run controls.
Lines starting with ``#`` are comments.  Lists are comma separated and
``a_rx = auto`` ties the receiver radius to ``d_hex / 2``.
"""

from __future__ import annotations

import dataclasses
import typing
from dataclasses import dataclass, fields

from .channel import ChannelParams


class ConfigError(ValueError):
    """Invalid configuration; ``line`` is 1-based when known."""

    def __init__(self, message: str, line: int | None = None, source: str = "config"):
        self.line = line
        prefix = f"{source}:{line}: " if line is not None else f"{source}: "
        super().__init__(prefix + message)


@dataclass(frozen=True)
class RunConfig:
    # channel (SI units)
    d_hex: float = 0.2
    a_rx: float | None = None  # None -> d_hex / 2
    l_rx: float = 0.2
    d: float = 0.5
    v: float = 0.2
    D: float = 0.01
    n_mol: int = 100
    dt: float = 1e-3
    t_sim: float = 15.0
    # sweeps
    d_hex_min: float = 0.05
    d_hex_max: float = 5.0
    grid_points: int = 100
    n_mol_list: tuple[int, ...] = (10, 100, 1000)
    n_rings: int = 3
    k_max: int = 20
    theta_max: int = 200
    series_atol: float = 1e-6
    # Monte Carlo
    mc_rings: int = 20
    mc_realizations: int = 100_000
    mc_grid_points: int = 10
    mc_markers: bool = False
    # particle simulation
    pbs_realizations: int = 3000
    pbs_particles: int = 100
    pbs_record_every: int = 100
    source_xp: int = 0
    source_yp: int = 0
    # run
    seed: int = 0
    out: str | None = None
    format: str = "csv"
    threads: int = 1
    tolerance_scale: float = 1.0
    inject_fault: str | None = None

    def __post_init__(self):
        errs = []
        for name in ("d_hex", "l_rx", "d", "D", "dt", "t_sim", "d_hex_min", "d_hex_max",
                     "tolerance_scale"):
            if not getattr(self, name) > 0:
                errs.append(f"{name} must be positive")
        if self.a_rx is not None and not self.a_rx > 0:
            errs.append("a_rx must be positive or 'auto'")
        if self.d_hex_min >= self.d_hex_max:
            errs.append("d_hex_min must be below d_hex_max")
        if self.t_sim < self.dt:
            errs.append("t_sim must be >= dt")
        if self.series_atol < 0:
            errs.append("series_atol must be non-negative")
        for name in ("n_mol", "grid_points", "mc_realizations", "mc_grid_points",
                     "pbs_particles", "pbs_record_every", "theta_max", "threads"):
            if getattr(self, name) < 1:
                errs.append(f"{name} must be >= 1")
        for name in ("n_rings", "k_max", "mc_rings", "pbs_realizations", "seed"):
            if getattr(self, name) < 0:
                errs.append(f"{name} must be >= 0")
        if not self.n_mol_list or min(self.n_mol_list) < 1:
            errs.append("n_mol_list needs positive entries")
        if self.format not in ("csv", "json"):
            errs.append("format must be csv or json")
        if self.inject_fault not in (None, "erf-denominator"):
            errs.append("inject_fault must be erf-denominator")
        if errs:
            raise ConfigError("; ".join(errs))

    def channel(self, d_hex: float | None = None, n_mol: int | None = None) -> ChannelParams:
        """Channel parameters at ``d_hex`` (receiver radius follows ``a_rx``)."""
        dh = self.d_hex if d_hex is None else d_hex
        return ChannelParams(D=self.D, v=self.v, d=self.d, l_rx=self.l_rx,
                             a_rx=dh / 2.0 if self.a_rx is None else self.a_rx,
                             n_mol=self.n_mol if n_mol is None else n_mol)

    @property
    def scale_receiver(self) -> bool:
        return self.a_rx is None

    def to_dict(self) -> dict:
        return {f.name: (list(v) if isinstance(v := getattr(self, f.name), tuple) else v)
                for f in fields(self)}


_HINTS = typing.get_type_hints(RunConfig)
_NONE_WORDS = {"a_rx": "auto"}


def _convert(name: str, text: str):
    hint = _HINTS[name]
    text = text.strip()
    args = typing.get_args(hint)
    optional = type(None) in args
    if optional and text.lower() in ("none", _NONE_WORDS.get(name, "none")):
        return None
    base = next((a for a in args if a is not type(None)), hint) if optional else hint
    if typing.get_origin(base) is tuple:
        return tuple(int(x) for x in text.split(",") if x.strip())
    if base is bool:
        low = text.lower()
        if low in ("1", "true", "yes", "on"):
            return True
        if low in ("0", "false", "no", "off"):
            return False
        raise ValueError(f"not a boolean: {text!r}")
    if base is int:
        try:
            return int(text)
        except ValueError:
            x = float(text)  # accept 1e5
            if not x.is_integer():
                raise ValueError(f"not an integer: {text!r}") from None
            return int(x)
    return base(text)


def _format(name: str, value) -> str:
    if value is None:
        return _NONE_WORDS.get(name, "none")
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, tuple):
        return ",".join(str(v) for v in value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


def parse_config(text: str, source: str = "config", base: RunConfig | None = None) -> RunConfig:
    """Parse ``key = value`` lines on top of ``base`` (defaults if omitted)."""
    values = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"expected 'key = value', got {raw.strip()!r}", lineno, source)
        key, val = (s.strip() for s in line.split("=", 1))
        if key not in _HINTS:
            raise ConfigError(f"unknown key {key!r}", lineno, source)
        if key in values:
            raise ConfigError(f"duplicate key {key!r}", lineno, source)
        try:
            values[key] = (_convert(key, val), lineno)
        except ValueError as exc:
            raise ConfigError(f"bad value for {key}: {exc}", lineno, source) from None
    return apply_overrides(base or RunConfig(), {k: v for k, (v, _) in values.items()},
                           source=source, lines={k: n for k, (_, n) in values.items()})


def apply_overrides(cfg: RunConfig, overrides: dict, source: str = "config",
                    lines: dict | None = None) -> RunConfig:
    try:
        return dataclasses.replace(cfg, **overrides)
    except ConfigError as exc:
        # blame the first line whose key alone breaks validation
        line = None
        for key in sorted(overrides, key=lambda k: (lines or {}).get(k, 0)):
            try:
                dataclasses.replace(cfg, **{key: overrides[key]})
            except ConfigError:
                line = (lines or {}).get(key)
                break
        raise ConfigError(str(exc).split(": ", 1)[-1], line, source) from None


def load_config(path: str, base: RunConfig | None = None) -> RunConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc.strerror}", source=path) from None
    return parse_config(text, source=path, base=base)


def dump_config(cfg: RunConfig) -> str:
    return "".join(f"{f.name} = {_format(f.name, getattr(cfg, f.name))}\n" for f in fields(cfg))


def convert_value(name: str, text: str):
    """Typed value of ``text`` for key ``name`` (used for CLI overrides)."""
    if name not in _HINTS:
        raise ConfigError(f"unknown key {name!r}", source="command line")
    try:
        return _convert(name, text)
    except ValueError as exc:
        raise ConfigError(f"bad value for {name}: {exc}", source="command line") from None


__all__ = ["ConfigError", "RunConfig", "parse_config", "load_config", "dump_config",
           "apply_overrides", "convert_value"]

# -*- coding: utf-8 -*-
"""
Run configuration for the kernex command line

A RunConfig is a flat TOML table. Values that TOML cannot carry natively are
stored as strings: rationals as "p/q", complex numbers as "a+bi".
"""
import logging
import re
try:
    import tomllib
except ImportError:  # Python < 3.11
    import tomli as tomllib
from dataclasses import dataclass, fields, replace
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, Mapping, Optional, Tuple, Union

import sympy
import tomli_w

from kernex.expsum import BACKENDS
from kernex.settings import settings

__all__ = (
    "ConfigError",
    "RunConfig",
    "COMMANDS",
    "parse_complex",
    "format_complex",
    "parse_alpha",
    "parse_ints",
    "parse_complex_list",
)

logger = logging.getLogger(__file__)

COMMANDS = (
    "verify-gauss",
    "verify-twist",
    "verify-quadric",
    "verify-localzeta",
    "verify-poisson",
    "compute-is",
    "geometric-side",
    "verify-dirichlet",
    "verify-structure",
)

# fields a command cannot run without
REQUIRED = {
    "compute-is": ("b", "alpha"),
}


class ConfigError(ValueError):
    pass


def parse_complex(text: Union[str, complex, float, int]) -> complex:
    """'a+bi', 'i', '-1' and plain numbers"""
    if isinstance(text, (complex, float, int)):
        return complex(text)
    cleaned = str(text).strip().replace(" ", "").replace("i", "j")
    try:
        return complex(cleaned)
    except ValueError as exc:
        raise ConfigError(f"not a complex number: {text!r}") from exc


def format_complex(z: complex) -> str:
    re_part, im_part = repr(z.real), repr(z.imag)
    sign = "" if im_part.startswith("-") else "+"
    return f"{re_part}{sign}{im_part}i"


def _fraction(text: Any) -> Fraction:
    try:
        return Fraction(str(text).strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise ConfigError(f"not a rational number: {text!r}") from exc


def parse_alpha(text: Union[str, Tuple, list]) -> Tuple[Fraction, ...]:
    """six rationals (x11, x12, x21, x22, t1, t2), comma separated"""
    parts = re.split(r"\s*,\s*", text.strip()) if isinstance(text, str) else list(text)
    values = tuple(_fraction(p) for p in parts if str(p) != "")
    if len(values) != 6:
        raise ConfigError(f"alpha needs 6 entries, got {len(values)}")
    return values


def parse_ints(text: Union[str, Tuple, list, int]) -> Tuple[int, ...]:
    if isinstance(text, int):
        return (text,)
    parts = re.split(r"\s*,\s*", text.strip()) if isinstance(text, str) else list(text)
    try:
        return tuple(int(p) for p in parts if str(p) != "")
    except ValueError as exc:
        raise ConfigError(f"expected a list of integers, got {text!r}") from exc


def parse_complex_list(text: Union[str, Tuple, list]) -> Tuple[complex, ...]:
    parts = re.split(r"\s*,\s*", text.strip()) if isinstance(text, str) else list(text)
    return tuple(parse_complex(p) for p in parts if str(p) != "")


@dataclass(frozen=True)
class RunConfig:
    """
    :param command: sub-command name
    :param p: primes to run over, empty for the command default
    :param level: residue ring level n
    :param t_val: t valuations m
    :param chi: values chi(p) of unramified characters
    :param conductor: level of the ramified characters probed
    :param shells: truncation M of the local zeta brute force
    :param grid: base node count per T axis of the archimedean quadrature
    :param samples: random cases per check family, None for the command default
    """

    command: str
    p: Tuple[int, ...] = ()
    level: Optional[int] = None
    t_val: Tuple[int, ...] = ()
    b: Optional[Fraction] = None
    alpha: Optional[Tuple[Fraction, ...]] = None
    s: Optional[complex] = None
    chi: Tuple[complex, ...] = ()
    conductor: int = 1
    shells: int = 4
    height: int = 4
    cmax: int = 4
    grid: int = 9
    samples: Optional[int] = None
    backend: str = "exact"
    seed: int = 0
    out: Optional[str] = None
    workers: Optional[int] = None

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise ConfigError(f"unknown command {self.command!r}")
        if self.backend not in BACKENDS:
            raise ConfigError(f"backend must be one of {', '.join(BACKENDS)}, got {self.backend!r}")
        for p in self.p:
            if not sympy.isprime(p):
                raise ConfigError(f"{p} is not prime")
        for name in ("level", "samples", "workers"):
            value = getattr(self, name)
            if value is not None and value < 1:
                raise ConfigError(f"{name} must be >= 1, got {value}")
        for name in ("shells", "height", "cmax", "grid"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be >= 1, got {getattr(self, name)}")
        if self.conductor < 0:
            raise ConfigError(f"conductor must be >= 0, got {self.conductor}")
        if any(m < 0 for m in self.t_val):
            raise ConfigError(f"t valuations must be >= 0, got {self.t_val}")
        if self.b is not None and self.b == 0:
            raise ConfigError("b must be nonzero")
        for name in REQUIRED.get(self.command, ()):
            if getattr(self, name) is None:
                raise ConfigError(f"{self.command}: missing required field '{name}'")

    def as_mapping(self) -> Dict[str, Any]:
        """the TOML table; None and empty values are left out"""
        out: Dict[str, Any] = {}
        for f in fields(self):
            value = getattr(self, f.name)
            if value is None or value == ():
                continue
            if f.name == "b":
                value = str(value)
            elif f.name == "alpha":
                value = [str(x) for x in value]
            elif f.name == "s":
                value = format_complex(value)
            elif f.name == "chi":
                value = [format_complex(z) for z in value]
            elif isinstance(value, tuple):
                value = list(value)
            out[f.name] = value
        return out

    @classmethod
    def from_mapping(cls, data: Mapping[str, Any]) -> "RunConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown field(s): {', '.join(sorted(unknown))}")
        if "command" not in data:
            raise ConfigError("missing required field 'command'")
        return cls(**_coerce(data))

    def dumps(self) -> str:
        return tomli_w.dumps(self.as_mapping())

    @classmethod
    def loads(cls, text: str) -> "RunConfig":
        try:
            data = tomllib.loads(text)
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"invalid TOML: {exc}") from exc
        return cls.from_mapping(data)

    def dump(self, path: Union[str, Path]):
        Path(path).write_text(self.dumps(), encoding="utf-8")

    @classmethod
    def load(cls, path: Union[str, Path]) -> "RunConfig":
        path = Path(path)
        if not path.is_file():
            raise ConfigError(f"config file {path} does not exist")
        return cls.loads(path.read_text(encoding="utf-8"))

    @classmethod
    def from_sources(
        cls,
        command: str,
        path: Optional[Union[str, Path]] = None,
        overrides: Optional[Mapping[str, Any]] = None,
    ) -> "RunConfig":
        """
        Merge built-in defaults, KERNEX_* settings, a config file and command line
        overrides, later sources winning
        """
        data: Dict[str, Any] = {"command": command}
        if settings.is_set("KERNEX_WORKERS"):
            data["workers"] = settings.int("KERNEX_WORKERS")
        if path:
            path = Path(path)
            if not path.is_file():
                raise ConfigError(f"config file {path} does not exist")
            try:
                loaded = tomllib.loads(path.read_text(encoding="utf-8"))
            except tomllib.TOMLDecodeError as exc:
                raise ConfigError(f"{path}: invalid TOML: {exc}") from exc
            if loaded.get("command", command) != command:
                raise ConfigError(f"{path} is for {loaded['command']!r}, not {command!r}")
            data.update(loaded)
        data.update({k: v for k, v in (overrides or {}).items() if v is not None})
        logger.debug(f"run configuration: {data}")
        return cls.from_mapping(data)

    def with_defaults(self, **defaults) -> "RunConfig":
        """fill empty fields with command specific defaults"""
        updates = {k: v for k, v in defaults.items() if getattr(self, k) in (None, ())}
        return replace(self, **updates)


def _coerce(data: Mapping[str, Any]) -> Dict[str, Any]:
    out = dict(data)
    for name in ("p", "t_val"):
        if name in out:
            out[name] = parse_ints(out[name])
    if "chi" in out:
        out["chi"] = parse_complex_list(out["chi"])
    if "b" in out:
        out["b"] = _fraction(out["b"])
    if "alpha" in out:
        out["alpha"] = parse_alpha(out["alpha"])
    if "s" in out:
        out["s"] = parse_complex(out["s"])
    for name in ("level", "conductor", "shells", "height", "cmax", "grid", "samples", "seed", "workers"):
        if name in out and not isinstance(out[name], int):
            try:
                out[name] = int(out[name])
            except (TypeError, ValueError) as exc:
                raise ConfigError(f"{name}: expected an integer, got {out[name]!r}") from exc
    for name in ("command", "backend", "out"):
        if name in out and not isinstance(out[name], str):
            raise ConfigError(f"{name}: expected a string, got {out[name]!r}")
    return out

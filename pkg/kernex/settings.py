# -*- coding: utf-8 -*-
"""
Typed access to KERNEX_* settings
"""
import os
import re
from typing import Any, Iterator, MutableMapping, Type

from .dot_env import load_env, unquote

__all__ = ("Settings", "settings", "DEFAULTS")

DEFAULTS = {
    "KERNEX_EXACT_BUDGET": str(2**24),
    "KERNEX_FLOAT_BUDGET": str(2**28),
    "KERNEX_BLOCK_SIZE": "65536",
    "KERNEX_WORKERS": "1",
    "KERNEX_IS_NORMALIZATION": "1.0",
    "KERNEX_EULER_BOUND": "10000",
    "KERNEX_MAX_AXIS_POINTS": "512",
    "KERNEX_POINTS_PER_PERIOD": "8",
}


class Settings:
    """
    Wrapper around a str->str mapping (os.environ by default) with typed getters
    and a fallback onto DEFAULTS
    """

    _BOOLEAN_TRUE_STRINGS = ("T", "t", "1", "on", "ok", "Y", "y", "en")
    _EXCEPTION_CLS = KeyError

    def __init__(
        self,
        environ: MutableMapping[str, str] | None = None,
        exception: Type[Exception] | None = None,
        readenv: bool = False,
        **kwargs,
    ):
        """
        @param environ: base mapping, os.environ if omitted
        @param exception: class raised for missing keys (default KeyError)
        @param readenv: merge .env files through load_env(**kwargs)
        """
        self._environ = os.environ if environ is None else environ
        self.exception = exception or self._EXCEPTION_CLS
        if readenv:
            kwargs.setdefault("environ", self._environ)
            self._environ = load_env(**kwargs)

    @property
    def environ(self) -> MutableMapping[str, str]:
        return self._environ

    def get(self, var: str, default=None):
        value = self._environ.get(var)
        if value is None:
            value = DEFAULTS.get(var)
        return default if value is None else value

    def set(self, var: str, value: Any):
        self._environ[var] = str(value)

    def unset(self, var: str):
        if var in self._environ:
            del self._environ[var]

    def is_set(self, var: str) -> bool:
        return var in self._environ

    def int(self, var: str, default: int | None = None) -> int:
        val = self.get(var, default)
        if isinstance(val, int):
            return val
        try:
            return int(str(val).replace("_", ""), 0)
        except ValueError as exc:
            raise self.exception(f"{var}: expected an integer, got {val!r}") from exc

    def float(self, var: str, default: float | None = None) -> float:
        val = self.get(var, default)
        if isinstance(val, float):
            return val
        try:
            return float(val)
        except (TypeError, ValueError) as exc:
            raise self.exception(f"{var}: expected a number, got {val!r}") from exc

    def complex(self, var: str, default: complex | None = None) -> complex:
        val = self.get(var, default)
        if isinstance(val, complex):
            return val
        try:
            return complex(str(val).replace(" ", "").replace("i", "j"))
        except ValueError as exc:
            raise self.exception(f"{var}: expected a complex number, got {val!r}") from exc

    def bool(self, var: str, default: bool | None = None) -> bool:
        val = self.get(var, default)
        if isinstance(val, (bool, int)):
            return bool(val)
        if val in (None, "", "0"):
            return False
        return any(str(val).startswith(t) for t in self._BOOLEAN_TRUE_STRINGS)

    def list(self, var: str, default=None) -> list:
        val = self.get(var, default)
        if val is None:
            return []
        if isinstance(val, (list, tuple)):
            return list(val)
        return [unquote(part) for part in re.split(r"\s*,\s*", str(val)) if part]

    def __contains__(self, var: str) -> bool:
        return self.get(var) is not None

    def __getitem__(self, var: str) -> str:
        if var not in self:
            raise self.exception(f"Key '{var}' not found")
        return self.get(var)

    def __setitem__(self, var: str, value: Any):
        self.set(var, value)

    def __delitem__(self, var: str):
        self.unset(var)

    def items(self) -> Iterator[tuple[str, str]]:
        yield from self._environ.items()


settings = Settings()

"""Run configuration: one INI-style file per experiment case.

Sections group the pipeline stages ([model], [partition], [reduction],
[integrator], ...). Any value can be overridden on the command line with
``--set section.key=value``, so a config file is a complete, reproducible
record of an experiment while still being easy to perturb.
"""
from __future__ import annotations

import configparser
import os

from .errors import ConfigError

_MISSING = object()


class RunConfig:
    """Typed access to a parsed config file; errors name `section.key`."""

    def __init__(self, parser: configparser.ConfigParser, path: str = "<memory>"):
        self._parser = parser
        self.path = path

    @classmethod
    def from_file(cls, path, overrides=()) -> "RunConfig":
        if not os.path.exists(path):
            raise ConfigError(f"config file not found: {path}")
        parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
        try:
            parser.read(path)
        except configparser.Error as exc:
            raise ConfigError(f"cannot parse {path}: {exc}") from exc
        cfg = cls(parser, path=str(path))
        for item in overrides:
            cfg._apply_override(item)
        return cfg

    @classmethod
    def from_text(cls, text: str, overrides=()) -> "RunConfig":
        parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
        parser.read_string(text)
        cfg = cls(parser)
        for item in overrides:
            cfg._apply_override(item)
        return cfg

    def _apply_override(self, item: str) -> None:
        if "=" not in item or "." not in item.split("=", 1)[0]:
            raise ConfigError(f"override must look like section.key=value, got {item!r}")
        key, value = item.split("=", 1)
        section, option = key.strip().split(".", 1)
        if not self._parser.has_section(section):
            self._parser.add_section(section)
        self._parser.set(section, option.strip(), value.strip())

    def _raw(self, section: str, key: str, default):
        if not self._parser.has_option(section, key):
            if default is _MISSING:
                raise ConfigError(f"missing required config value {section}.{key}")
            return None
        return self._parser.get(section, key)

    def get_str(self, section: str, key: str, default=_MISSING) -> str:
        raw = self._raw(section, key, default)
        return default if raw is None else raw  # type: ignore[return-value]

    def get_float(self, section: str, key: str, default=_MISSING) -> float:
        raw = self._raw(section, key, default)
        if raw is None:
            return default  # type: ignore[return-value]
        try:
            return float(raw)
        except ValueError:
            raise ConfigError(f"{section}.{key} must be a number, got {raw!r}") from None

    def get_int(self, section: str, key: str, default=_MISSING) -> int:
        raw = self._raw(section, key, default)
        if raw is None:
            return default  # type: ignore[return-value]
        try:
            return int(raw)
        except ValueError:
            raise ConfigError(f"{section}.{key} must be an integer, got {raw!r}") from None

    def get_bool(self, section: str, key: str, default=_MISSING) -> bool:
        raw = self._raw(section, key, default)
        if raw is None:
            return default  # type: ignore[return-value]
        lowered = raw.strip().lower()
        if lowered in ("1", "true", "yes", "on"):
            return True
        if lowered in ("0", "false", "no", "off"):
            return False
        raise ConfigError(f"{section}.{key} must be a boolean, got {raw!r}")

    def get_list(self, section: str, key: str, default=_MISSING) -> list:
        raw = self._raw(section, key, default)
        if raw is None:
            return list(default)  # type: ignore[arg-type]
        return [item.strip() for item in raw.split(",") if item.strip()]

    def get_floats(self, section: str, key: str, default=_MISSING) -> list:
        items = self.get_list(section, key, default)
        try:
            return [float(v) for v in items]
        except ValueError:
            raise ConfigError(f"{section}.{key} must be a list of numbers") from None

    def has(self, section: str, key: str) -> bool:
        return self._parser.has_option(section, key)

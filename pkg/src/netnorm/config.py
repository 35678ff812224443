"""Flat ``key = value`` configuration with dotted keys.

Blank lines and ``#`` comments are ignored.  Values stay strings until a
consumer asks for a typed view; command-line ``key=value`` overrides are
applied on top of the file.
"""
from __future__ import annotations

from pathlib import Path
from typing import Iterable, Mapping

from .artifacts import parse_bool


class ConfigError(ValueError):
    pass


def parse_config_text(text: str, source: str = "<config>") -> dict[str, str]:
    out: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value', got {line!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if not key:
            raise ConfigError(f"{source}:{lineno}: empty key")
        out[key] = value
    return out


def load_config(path: str | Path | None) -> dict[str, str]:
    if path is None:
        return {}
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"{path}: unreadable ({exc.strerror})") from None
    return parse_config_text(text, str(path))


def apply_overrides(settings: Mapping[str, str], overrides: Iterable[str]) -> dict[str, str]:
    out = dict(settings)
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"override must be key=value, got {item!r}")
        key, value = (s.strip() for s in item.split("=", 1))
        if not key:
            raise ConfigError(f"override has an empty key: {item!r}")
        out[key] = value
    return out


def section(settings: Mapping[str, str], prefix: str) -> dict[str, str]:
    """Entries under ``prefix.`` with the prefix removed."""
    p = prefix + "."
    return {k[len(p):]: v for k, v in settings.items() if k.startswith(p)}


def nest(flat: Mapping[str, str]) -> dict:
    """Turn dotted keys into nested dictionaries."""
    root: dict = {}
    for key, value in flat.items():
        node = root
        parts = key.split(".")
        for part in parts[:-1]:
            child = node.setdefault(part, {})
            if not isinstance(child, dict):
                raise ConfigError(f"key {key!r} conflicts with scalar {part!r}")
            node = child
        if isinstance(node.get(parts[-1]), dict):
            raise ConfigError(f"key {key!r} conflicts with a section of the same name")
        node[parts[-1]] = value
    return root


class Settings:
    """Typed accessors over a flat string mapping."""

    def __init__(self, flat: Mapping[str, str]):
        self.flat = dict(flat)

    def _get(self, key: str) -> str | None:
        return self.flat.get(key)

    def has(self, key: str) -> bool:
        return key in self.flat

    def str(self, key: str, default: str | None = None) -> str | None:
        v = self._get(key)
        return default if v is None else v

    def int(self, key: str, default: int | None = None) -> int | None:
        v = self._get(key)
        if v is None:
            return default
        try:
            return int(v)
        except ValueError:
            raise ConfigError(f"{key}: expected an integer, got {v!r}") from None

    def float(self, key: str, default: float | None = None) -> float | None:
        v = self._get(key)
        if v is None:
            return default
        try:
            return float(v)
        except ValueError:
            raise ConfigError(f"{key}: expected a number, got {v!r}") from None

    def bool(self, key: str, default: bool | None = None) -> bool | None:
        v = self._get(key)
        if v is None:
            return default
        try:
            return parse_bool(v)
        except ValueError as exc:
            raise ConfigError(f"{key}: {exc}") from None

    def list(self, key: str, default: list[str] | None = None) -> list[str] | None:
        v = self._get(key)
        if v is None:
            return default
        return [s.strip() for s in v.split(",") if s.strip()]

    def int_list(self, key: str, default: list[int] | None = None) -> list[int] | None:
        items = self.list(key)
        if items is None:
            return default
        out = []
        for s in items:
            if ".." in s:  # inclusive range with optional step: 20..100:10
                span, _, step = s.partition(":")
                lo, hi = span.split("..")
                try:
                    out.extend(range(int(lo), int(hi) + 1, int(step or 1)))
                except ValueError:
                    raise ConfigError(f"{key}: bad range {s!r}") from None
            else:
                try:
                    out.append(int(s))
                except ValueError:
                    raise ConfigError(f"{key}: expected integers, got {s!r}") from None
        return out

    def float_list(self, key: str, default: list[float] | None = None) -> list[float] | None:
        items = self.list(key)
        if items is None:
            return default
        try:
            return [float(s) for s in items]
        except ValueError:
            raise ConfigError(f"{key}: expected numbers, got {self._get(key)!r}") from None

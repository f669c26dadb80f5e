"""Flat ``key = value`` run configuration files."""

from __future__ import annotations

from dataclasses import fields

from .society import SimulationConfig


class ConfigError(ValueError):
    pass


def _convert(raw, kind):
    if kind == "bool":
        low = raw.lower()
        if low in ("true", "yes", "1"):
            return True
        if low in ("false", "no", "0"):
            return False
        raise ValueError(f"expected true or false, got {raw!r}")
    if kind == "int":
        return int(raw)
    if kind == "float":
        return float(raw)
    return raw


def parse_config(text, source="<config>"):
    """Build a SimulationConfig from config text.

    Blank lines and ``#`` comments are ignored. Unknown, duplicate or
    malformed keys raise ConfigError with ``source:line`` in the message.
    """
    kinds = {f.name: str(f.type) for f in fields(SimulationConfig)}
    values, seen = {}, {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value', got {line!r}")
        key, raw = (part.strip() for part in line.split("=", 1))
        if key not in kinds:
            raise ConfigError(f"{source}:{lineno}: unknown key {key!r}")
        if key in seen:
            raise ConfigError(f"{source}:{lineno}: duplicate key {key!r} (first set on line {seen[key]})")
        try:
            values[key] = _convert(raw, kinds[key])
        except ValueError as exc:
            raise ConfigError(f"{source}:{lineno}: bad value for {key!r}: {exc}") from None
        seen[key] = lineno
    if "seed" not in values:
        raise ConfigError(f"{source}: missing required key 'seed'")
    try:
        return SimulationConfig(**values)
    except ValueError as exc:
        key = next((k for k in seen if k in str(exc)), None)
        where = f"{source}:{seen[key]}" if key else source
        raise ConfigError(f"{where}: {exc}") from None


def load_config(path):
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read config: {exc.strerror}") from None
    return parse_config(text, str(path))


def format_config(config):
    """Config text that parses back to ``config``."""
    lines = []
    for key, value in config.to_dict().items():
        if isinstance(value, bool):
            value = "true" if value else "false"
        lines.append(f"{key} = {value}")
    return "\n".join(lines) + "\n"

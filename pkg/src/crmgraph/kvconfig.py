"""Minimal ``key = value`` text format used for label mappings and run configs."""

from pathlib import Path

from .errors import ConfigError


def parse_kv(text, source="<string>"):
    """Parse ``key = value`` lines into an ordered dict.

    Blank lines and lines starting with ``#`` are skipped. Keys must be
    unique; values keep any interior ``:`` or ``=`` characters.
    """
    out = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value', got {raw!r}")
        key, value = line.split("=", 1)
        key, value = key.strip(), value.strip()
        if not key:
            raise ConfigError(f"{source}:{lineno}: empty key")
        if key in out:
            raise ConfigError(f"{source}:{lineno}: duplicate key {key!r}")
        out[key] = value
    return out


def load_kv(path):
    path = Path(path)
    return parse_kv(path.read_text(encoding="utf-8"), source=str(path))


def dump_kv(pairs):
    return "".join(f"{k} = {v}\n" for k, v in pairs.items())

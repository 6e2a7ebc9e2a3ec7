"""Flat key-value experiment configs with lossless round-tripping.

The file format is sections of `key = value` lines:

    [experiment]
    kind = verify-diffeo
    replicates = 50
    seed = 20260810

All values are stored as their original strings (numbers stay decimal
strings), so parse -> write -> parse is the identity and the canonical
text is a stable hashing target.  Lists are space-separated; matrix-like
values separate rows with ';'.
"""

import hashlib

_REQUIRED = object()


class ConfigError(ValueError):
    """Invalid or missing configuration; the CLI maps this to exit code 2."""


class ExperimentConfig:
    def __init__(self, sections=None):
        self.sections = {}
        if sections:
            for name, kv in sections.items():
                self.sections[name] = dict(kv)

    # -- parsing / emission ----------------------------------------------

    @classmethod
    def from_text(cls, text):
        cfg = cls()
        current = None
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if line.startswith("[") and line.endswith("]"):
                current = line[1:-1].strip()
                if not current:
                    raise ConfigError(f"line {lineno}: empty section name")
                cfg.sections.setdefault(current, {})
                continue
            if "=" not in line:
                raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
            if current is None:
                raise ConfigError(f"line {lineno}: key outside of any [section]")
            key, _, value = line.partition("=")
            cfg.sections[current][key.strip()] = value.strip()
        return cfg

    @classmethod
    def from_file(cls, path):
        try:
            with open(path) as fh:
                return cls.from_text(fh.read())
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc

    def to_text(self):
        chunks = []
        for name, kv in self.sections.items():
            chunks.append(f"[{name}]")
            for key, value in kv.items():
                chunks.append(f"{key} = {value}")
            chunks.append("")
        return "\n".join(chunks)

    def config_hash(self):
        return hashlib.sha256(self.to_text().encode()).hexdigest()[:16]

    # -- typed access -------------------------------------------------------

    def has(self, section, key):
        return section in self.sections and key in self.sections[section]

    def _raw(self, section, key, default):
        if self.has(section, key):
            return self.sections[section][key]
        if default is _REQUIRED:
            raise ConfigError(f"missing required config value [{section}] {key}")
        return None

    def get_str(self, section, key, default=_REQUIRED):
        raw = self._raw(section, key, default)
        return default if raw is None else raw

    def get_int(self, section, key, default=_REQUIRED):
        raw = self._raw(section, key, default)
        if raw is None:
            return default
        try:
            return int(raw)
        except ValueError as exc:
            raise ConfigError(f"[{section}] {key} = {raw!r} is not an integer") from exc

    def get_float(self, section, key, default=_REQUIRED):
        raw = self._raw(section, key, default)
        if raw is None:
            return default
        try:
            return float(raw)
        except ValueError as exc:
            raise ConfigError(f"[{section}] {key} = {raw!r} is not a number") from exc

    def get_bool(self, section, key, default=_REQUIRED):
        raw = self._raw(section, key, default)
        if raw is None:
            return default
        low = raw.lower()
        if low in ("true", "yes", "1", "on"):
            return True
        if low in ("false", "no", "0", "off"):
            return False
        raise ConfigError(f"[{section}] {key} = {raw!r} is not a boolean")

    def get_floats(self, section, key, default=_REQUIRED):
        raw = self._raw(section, key, default)
        if raw is None:
            return default
        try:
            return [float(x) for x in raw.split()]
        except ValueError as exc:
            raise ConfigError(f"[{section}] {key} = {raw!r} is not a number list") from exc

    def get_matrix(self, section, key, default=_REQUIRED):
        """Rows separated by ';', entries by spaces."""
        raw = self._raw(section, key, default)
        if raw is None:
            return default
        try:
            return [[float(x) for x in row.split()] for row in raw.split(";")]
        except ValueError as exc:
            raise ConfigError(f"[{section}] {key} = {raw!r} is not a matrix") from exc

    def set(self, section, key, value):
        self.sections.setdefault(section, {})[key] = str(value)

    def copy(self):
        return ExperimentConfig(self.sections)

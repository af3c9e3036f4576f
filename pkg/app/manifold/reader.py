import re
from dataclasses import dataclass, field

from app.error import ManifoldConfigError

SECTIONS = ("manifold", "params", "domain", "metric", "structure", "soliton")

_SECTION = re.compile(r"^\[\s*([A-Za-z_]+)\s*\]$")
_ENTRY = re.compile(r"^([A-Za-z_][A-Za-z0-9_]*)\s*=\s*(.*)$")


@dataclass
class ConfigEntry:
    key: str
    value: str
    line: int


@dataclass
class ConfigSection:
    name: str
    line: int
    entries: dict[str, ConfigEntry] = field(default_factory=dict)

    def get(self, key: str) -> ConfigEntry | None:
        return self.entries.get(key)

    def require(self, key: str) -> ConfigEntry:
        entry = self.entries.get(key)
        if entry is None:
            raise ManifoldConfigError(f"line {self.line}: section [{self.name}] is missing '{key}'")
        return entry


def read_sections(text: str) -> dict[str, ConfigSection]:
    """Split config text into sections of ``key = value`` entries, keeping line numbers.

    ``#`` starts a comment; blank lines are ignored.
    """
    sections: dict[str, ConfigSection] = {}
    current: ConfigSection | None = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        header = _SECTION.match(line)
        if header:
            name = header.group(1).lower()
            if name not in SECTIONS:
                raise ManifoldConfigError(f"line {lineno}: unknown section [{name}]")
            if name in sections:
                raise ManifoldConfigError(f"line {lineno}: section [{name}] given twice")
            current = ConfigSection(name, lineno)
            sections[name] = current
            continue
        entry = _ENTRY.match(line)
        if entry is None:
            raise ManifoldConfigError(f"line {lineno}: expected 'key = value', got {line!r}")
        if current is None:
            raise ManifoldConfigError(f"line {lineno}: entry outside of any section")
        key, value = entry.group(1), entry.group(2).strip()
        if not value:
            raise ManifoldConfigError(f"line {lineno}: '{key}' has no value")
        if key in current.entries:
            raise ManifoldConfigError(
                f"line {lineno}: '{key}' already set on line {current.entries[key].line}"
            )
        current.entries[key] = ConfigEntry(key, value, lineno)
    return sections

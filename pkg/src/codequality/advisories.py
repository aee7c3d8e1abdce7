"""Local advisory database for the dependency analyzer.

The database is a versioned JSONL file shipped with the package (and
overridable via configuration): one record per line with fields ``name``,
``range``, ``advisory_id``, and optional ``cwe_id``. No network access ever
happens at analysis time.

Version ordering: versions are compared as tuples of dot-separated
components; numeric components compare as integers, non-numeric components
compare lexicographically after any numeric prefix ("1.0rc1" < "1.0"
is NOT modeled — pre-releases compare as plain strings). Ranges are
comma-separated constraints using ==, !=, <, <=, >, >=.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

_NAME_FOLD = re.compile(r"[-_.]+")


def normalize_package_name(name: str) -> str:
    """Lowercase with runs of ``-_.`` folded to a single hyphen."""
    return _NAME_FOLD.sub("-", name.strip().lower())


class AdvisoryFormatError(ValueError):
    """Raised when an advisory database file cannot be parsed."""


@dataclass(frozen=True)
class Advisory:
    package_name: str
    vulnerable_range: str
    advisory_id: str
    cwe_id: str | None = None


class AdvisoryDb:
    """Immutable set of advisories, indexed by normalized package name."""

    def __init__(self, records: list[Advisory] | None = None) -> None:
        self._by_name: dict[str, list[Advisory]] = {}
        for rec in records or []:
            self._by_name.setdefault(rec.package_name, []).append(rec)

    def __len__(self) -> int:
        return sum(len(v) for v in self._by_name.values())

    def advisories_for(self, name: str) -> list[Advisory]:
        return list(self._by_name.get(normalize_package_name(name), []))

    def matches(self, name: str, version: str) -> list[Advisory]:
        """Advisories whose vulnerable range contains ``version``."""
        return [
            adv
            for adv in self.advisories_for(name)
            if version_in_range(version, adv.vulnerable_range)
        ]

    @classmethod
    def from_jsonl(cls, text: str, source: str = "<advisories>") -> "AdvisoryDb":
        records = []
        for lineno, line in enumerate(text.splitlines(), start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise AdvisoryFormatError(f"{source}:{lineno}: invalid JSON: {exc}") from None
            if not isinstance(obj, dict) or "name" not in obj or "range" not in obj:
                raise AdvisoryFormatError(
                    f"{source}:{lineno}: record needs 'name' and 'range' fields"
                )
            try:
                _parse_range(str(obj["range"]))
            except ValueError as exc:
                raise AdvisoryFormatError(f"{source}:{lineno}: {exc}") from None
            records.append(
                Advisory(
                    package_name=normalize_package_name(str(obj["name"])),
                    vulnerable_range=str(obj["range"]),
                    advisory_id=str(obj.get("advisory_id", f"{source}:{lineno}")),
                    cwe_id=obj.get("cwe_id"),
                )
            )
        return cls(records)

    @classmethod
    def from_path(cls, path: str | Path) -> "AdvisoryDb":
        p = Path(path)
        return cls.from_jsonl(p.read_text(encoding="utf-8"), source=str(p))


def load_bundled_db() -> AdvisoryDb:
    """The advisory snapshot shipped inside the package."""
    text = resources.files("codequality").joinpath("data/advisories.jsonl").read_text("utf-8")
    return AdvisoryDb.from_jsonl(text, source="bundled")


# ---------------------------------------------------------------------------
# Version comparison
# ---------------------------------------------------------------------------

def _version_key(version: str) -> tuple:
    parts: list[tuple[int, object]] = []
    for comp in version.strip().split("."):
        if comp.isdigit():
            parts.append((0, int(comp)))
        else:
            m = re.match(r"(\d+)(.*)", comp)
            if m:
                parts.append((0, int(m.group(1))))
                parts.append((1, m.group(2)))
            else:
                parts.append((1, comp))
    return tuple(parts)


def compare_versions(a: str, b: str) -> int:
    """-1, 0, or 1; shorter versions are padded with zero components."""
    ka, kb = list(_version_key(a)), list(_version_key(b))
    width = max(len(ka), len(kb))
    ka += [(0, 0)] * (width - len(ka))
    kb += [(0, 0)] * (width - len(kb))
    for xa, xb in zip(ka, kb):
        if xa == xb:
            continue
        # numeric components sort before string suffixes of equal position
        return -1 if xa < xb else 1
    return 0


_CONSTRAINT = re.compile(r"^(==|!=|<=|>=|<|>)\s*([A-Za-z0-9_.+!*-]+)$")

_OPS = {
    "==": lambda c: c == 0,
    "!=": lambda c: c != 0,
    "<": lambda c: c < 0,
    "<=": lambda c: c <= 0,
    ">": lambda c: c > 0,
    ">=": lambda c: c >= 0,
}


def _parse_range(spec: str) -> list[tuple[str, str]]:
    constraints = []
    for raw in spec.split(","):
        raw = raw.strip()
        if not raw:
            continue
        m = _CONSTRAINT.match(raw)
        if not m:
            raise ValueError(f"bad version constraint: {raw!r}")
        constraints.append((m.group(1), m.group(2)))
    if not constraints:
        raise ValueError("empty version range")
    return constraints


def version_in_range(version: str, spec: str) -> bool:
    """Whether a version satisfies every constraint in a range spec."""
    return all(
        _OPS[op](compare_versions(version, bound))
        for op, bound in _parse_range(spec)
    )


# ---------------------------------------------------------------------------
# Requirements parsing
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Requirement:
    name: str
    pinned_version: str | None  # set only for name==version lines
    line_number: int
    raw: str


@dataclass(frozen=True)
class RequirementSyntaxError:
    line_number: int
    raw: str


_REQ_LINE = re.compile(
    r"^\s*(?P<name>[A-Za-z0-9][A-Za-z0-9._-]*)\s*"
    r"(?:\[[A-Za-z0-9,._ -]*\])?\s*"
    r"(?P<spec>(?:==|!=|<=|>=|<|>|~=)\s*[A-Za-z0-9_.*+!-]+"
    r"(?:\s*,\s*(?:==|!=|<=|>=|<|>|~=)\s*[A-Za-z0-9_.*+!-]+)*)?\s*$"
)


def parse_requirements(text: str) -> list[Requirement | RequirementSyntaxError]:
    """Parse requirements-format text, one entry per meaningful line.

    Blank lines and comments are skipped. Anything after an inline ``#`` is
    ignored. Lines that do not look like a requirement become
    :class:`RequirementSyntaxError` entries rather than failures.
    """
    out: list[Requirement | RequirementSyntaxError] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        m = _REQ_LINE.match(line)
        if not m:
            out.append(RequirementSyntaxError(line_number=lineno, raw=raw.strip()))
            continue
        pinned = None
        spec = m.group("spec")
        if spec:
            clauses = [c.strip() for c in spec.split(",")]
            if len(clauses) == 1 and clauses[0].startswith("=="):
                candidate = clauses[0][2:].strip()
                if "*" not in candidate:
                    pinned = candidate
        out.append(
            Requirement(
                name=normalize_package_name(m.group("name")),
                pinned_version=pinned,
                line_number=lineno,
                raw=raw.strip(),
            )
        )
    return out

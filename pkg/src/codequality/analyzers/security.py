"""Security analyzers: injection, unsafe data handling, crypto, dependencies.

Detection is call-pattern based on the syntax tree with import-alias
resolution; there is no taint tracking. The dependency check runs against a
local advisory database only.
"""

from __future__ import annotations

import ast
import math
from dataclasses import dataclass, field

from ..advisories import AdvisoryDb, Requirement, RequirementSyntaxError, parse_requirements
from ..pysource import SourceUnit, Span, node_span
from ..rules import Finding, Severity, make_finding
from .common import ImportBindings, call_uses_interpolation


DEFAULT_SECRET_NAME_PATTERNS = (
    "password", "passwd", "secret", "token", "api_key", "apikey", "private_key",
)

#: Literal values that are clearly placeholders, never real credentials.
_PLACEHOLDER_VALUES = frozenset(
    {"", "changeme", "change-me", "placeholder", "example", "dummy", "todo", "xxx"}
)


@dataclass(frozen=True)
class SecretHeuristics:
    """Tunables for hard-coded secret detection."""

    name_patterns: tuple[str, ...] = DEFAULT_SECRET_NAME_PATTERNS
    min_entropy_bits_per_char: float = 3.5
    min_literal_length: int = 16

    def __post_init__(self) -> None:
        if self.min_literal_length < 8:
            raise ValueError("min_literal_length must be at least 8")

    def name_matches(self, name: str) -> bool:
        lowered = name.lower()
        return any(p in lowered for p in self.name_patterns)


def shannon_entropy_bits_per_char(text: str) -> float:
    """Empirical Shannon entropy of the character distribution, in bits."""
    if not text:
        return 0.0
    freq: dict[str, int] = {}
    for ch in text:
        freq[ch] = freq.get(ch, 0) + 1
    n = len(text)
    return -sum((c / n) * math.log2(c / n) for c in freq.values())


# ---------------------------------------------------------------------------
# Injection
# ---------------------------------------------------------------------------

_SHELL_CALLS = {"os.system", "os.popen"}
_SUBPROCESS_CALLS = {
    "subprocess.run", "subprocess.call", "subprocess.check_call",
    "subprocess.check_output", "subprocess.Popen",
}
_IMPLICIT_SHELL_CALLS = {"subprocess.getoutput", "subprocess.getstatusoutput"}


def detect_injection(unit: SourceUnit) -> list[Finding]:
    bindings = ImportBindings(unit.syntax_root)
    findings: list[Finding] = []
    for node in ast.walk(unit.syntax_root):
        if not isinstance(node, ast.Call):
            continue
        name = bindings.resolved_call_name(node)
        if name is None:
            continue
        span = node_span(unit.file_label, node)
        if name in _SHELL_CALLS:
            findings.append(
                make_finding(
                    "SEC-SHELL-INJECTION", span,
                    f"call to {name} executes a shell command",
                    severity=_command_severity(node, Severity.HIGH),
                )
            )
        elif name in _IMPLICIT_SHELL_CALLS:
            findings.append(
                make_finding(
                    "SEC-SUBPROCESS-SHELL", span,
                    f"{name} always runs through a shell",
                    severity=_command_severity(node, Severity.HIGH),
                )
            )
        elif name in _SUBPROCESS_CALLS and _has_shell_true(node):
            findings.append(
                make_finding(
                    "SEC-SUBPROCESS-SHELL", span,
                    f"{name} invoked with shell=True",
                    severity=_command_severity(node, Severity.HIGH),
                )
            )
        elif name in ("eval", "exec") and node.args:
            first = node.args[0]
            if not isinstance(first, ast.Constant):
                findings.append(
                    make_finding(
                        "SEC-EVAL-EXEC", span,
                        f"{name}() on a non-literal expression",
                    )
                )
    return findings


def _has_shell_true(node: ast.Call) -> bool:
    return any(
        kw.arg == "shell"
        and isinstance(kw.value, ast.Constant)
        and kw.value.value is True
        for kw in node.keywords
    )


def _command_severity(node: ast.Call, base: Severity) -> Severity:
    if node.args and call_uses_interpolation(node.args[0]):
        return Severity.CRITICAL
    return base


# ---------------------------------------------------------------------------
# Deserialization / XML
# ---------------------------------------------------------------------------

_PICKLE_CALLS = {"pickle.load", "pickle.loads"}
_YAML_UNSAFE_CALLS = {"yaml.unsafe_load", "yaml.full_load"}
_XML_CALLS = {
    "xml.etree.ElementTree.parse", "xml.etree.ElementTree.fromstring",
    "xml.etree.ElementTree.iterparse", "xml.etree.ElementTree.XML",
    "xml.dom.minidom.parse", "xml.dom.minidom.parseString",
    "xml.dom.pulldom.parse", "xml.dom.pulldom.parseString",
    "xml.sax.parse", "xml.sax.parseString",
}


def detect_unsafe_deserialization(unit: SourceUnit) -> list[Finding]:
    bindings = ImportBindings(unit.syntax_root)
    findings: list[Finding] = []
    for node in ast.walk(unit.syntax_root):
        if not isinstance(node, ast.Call):
            continue
        name = bindings.resolved_call_name(node)
        if name is None:
            continue
        span = node_span(unit.file_label, node)
        if name in _PICKLE_CALLS:
            findings.append(
                make_finding(
                    "SEC-PICKLE-LOAD", span,
                    f"{name} deserializes untrusted data",
                )
            )
        elif name in _YAML_UNSAFE_CALLS or (name == "yaml.load" and not _has_safe_loader(node)):
            findings.append(
                make_finding(
                    "SEC-YAML-LOAD", span,
                    f"{name} without a safe loader",
                )
            )
        elif name in _XML_CALLS:
            findings.append(
                make_finding(
                    "SEC-XML-PARSE", span,
                    f"{name} uses the standard XML parser",
                )
            )
    return findings


def _has_safe_loader(node: ast.Call) -> bool:
    loader: ast.expr | None = None
    for kw in node.keywords:
        if kw.arg == "Loader":
            loader = kw.value
    if loader is None and len(node.args) >= 2:
        loader = node.args[1]
    if loader is None:
        return False
    tail = loader.attr if isinstance(loader, ast.Attribute) else (
        loader.id if isinstance(loader, ast.Name) else ""
    )
    return "Safe" in tail


# ---------------------------------------------------------------------------
# Cryptography and secrets
# ---------------------------------------------------------------------------

_WEAK_HASH_CALLS = {"hashlib.md5", "hashlib.sha1"}
_WEAK_HASH_NAMES = {"md5", "sha1"}
_RANDOM_CALL_PREFIX = "random."


def detect_weak_crypto(
    unit: SourceUnit, heuristics: SecretHeuristics | None = None
) -> list[Finding]:
    h = heuristics or SecretHeuristics()
    bindings = ImportBindings(unit.syntax_root)
    findings: list[Finding] = []
    for node in ast.walk(unit.syntax_root):
        if isinstance(node, ast.Call):
            name = bindings.resolved_call_name(node)
            if name is None:
                continue
            if name in _WEAK_HASH_CALLS or (
                name == "hashlib.new" and _new_hash_is_weak(node)
            ):
                findings.append(
                    make_finding(
                        "SEC-WEAK-HASH", node_span(unit.file_label, node),
                        f"{name} is not collision-resistant",
                    )
                )
        if isinstance(node, (ast.Assign, ast.AnnAssign)):
            targets = node.targets if isinstance(node, ast.Assign) else [node.target]
            value = node.value
            if value is None or not _is_random_call(value, bindings):
                continue
            for target in targets:
                tname = _target_name(target)
                if tname and h.name_matches(tname):
                    findings.append(
                        make_finding(
                            "SEC-WEAK-RANDOM", node_span(unit.file_label, node),
                            f"'{tname}' derives from the non-cryptographic "
                            "random module; use the secrets module",
                        )
                    )
                    break
        if isinstance(node, ast.Call):
            for kw in node.keywords:
                if kw.arg and h.name_matches(kw.arg) and _is_random_call(kw.value, bindings):
                    findings.append(
                        make_finding(
                            "SEC-WEAK-RANDOM", node_span(unit.file_label, kw.value),
                            f"argument '{kw.arg}' derives from the "
                            "non-cryptographic random module",
                        )
                    )
    return findings


def _new_hash_is_weak(node: ast.Call) -> bool:
    candidates = list(node.args[:1]) + [kw.value for kw in node.keywords if kw.arg == "name"]
    return any(
        isinstance(a, ast.Constant)
        and isinstance(a.value, str)
        and a.value.lower().replace("-", "") in _WEAK_HASH_NAMES
        for a in candidates
    )


def _is_random_call(expr: ast.expr, bindings: ImportBindings) -> bool:
    if not isinstance(expr, ast.Call):
        return False
    name = bindings.resolved_call_name(expr)
    return bool(name and name.startswith(_RANDOM_CALL_PREFIX))


def _target_name(target: ast.expr) -> str | None:
    if isinstance(target, ast.Name):
        return target.id
    if isinstance(target, ast.Attribute):
        return target.attr
    return None


def detect_hardcoded_secrets(
    unit: SourceUnit, h: SecretHeuristics | None = None
) -> list[Finding]:
    """Hard-coded credentials by name pattern and by entropy.

    The entropy path only considers token-shaped literals: long enough,
    no whitespace, not in docstring position, not path/URL-shaped, and
    mixing letters with digits (random keys virtually always do, prose and
    identifiers rarely).
    """
    h = h or SecretHeuristics()
    findings: list[Finding] = []
    docstrings = _docstring_nodes(unit.syntax_root)
    flagged: set[int] = set()

    for node in ast.walk(unit.syntax_root):
        if isinstance(node, (ast.Assign, ast.AnnAssign)):
            targets = node.targets if isinstance(node, ast.Assign) else [node.target]
            value = node.value
            if (
                value is not None
                and isinstance(value, ast.Constant)
                and isinstance(value.value, str)
                and not _is_placeholder(value.value)
            ):
                for target in targets:
                    tname = _target_name(target)
                    if tname and h.name_matches(tname):
                        flagged.add(id(value))
                        findings.append(
                            make_finding(
                                "SEC-HARDCODED-SECRET",
                                node_span(unit.file_label, node),
                                f"string literal assigned to secret-named "
                                f"'{tname}'",
                            )
                        )
                        break

    for node in ast.walk(unit.syntax_root):
        if not isinstance(node, ast.Constant) or not isinstance(node.value, str):
            continue
        if id(node) in flagged or id(node) in docstrings:
            continue
        value = node.value
        if len(value) < h.min_literal_length or _is_placeholder(value):
            continue
        if not _token_shaped(value):
            continue
        entropy = shannon_entropy_bits_per_char(value)
        if entropy >= h.min_entropy_bits_per_char:
            findings.append(
                make_finding(
                    "SEC-HARDCODED-SECRET", node_span(unit.file_label, node),
                    f"high-entropy literal ({entropy:.2f} bits/char) looks "
                    "like a credential",
                )
            )
    return findings


def _is_placeholder(value: str) -> bool:
    lowered = value.strip().lower()
    if lowered in _PLACEHOLDER_VALUES:
        return True
    return value.startswith("<") and value.endswith(">")


def _token_shaped(value: str) -> bool:
    if any(ch.isspace() for ch in value):
        return False
    if value.startswith(("/", "./", "~/")) or "://" in value:
        return False
    has_alpha = any(ch.isalpha() for ch in value)
    has_digit = any(ch.isdigit() for ch in value)
    return has_alpha and has_digit


def _docstring_nodes(root: ast.Module) -> set[int]:
    ids: set[int] = set()
    for node in ast.walk(root):
        if isinstance(node, (ast.Module, ast.FunctionDef, ast.AsyncFunctionDef, ast.ClassDef)):
            body = node.body
            if (
                body
                and isinstance(body[0], ast.Expr)
                and isinstance(body[0].value, ast.Constant)
                and isinstance(body[0].value.value, str)
            ):
                ids.add(id(body[0].value))
    return ids


# ---------------------------------------------------------------------------
# Dependencies
# ---------------------------------------------------------------------------

def check_dependencies(
    manifest_text: str, db: AdvisoryDb, file_label: str = "requirements.txt"
) -> list[Finding]:
    """Check a requirements-format manifest against the advisory database.

    Only pinned (``name==version``) requirements can be matched against
    vulnerable ranges; unparseable lines produce an info finding and are
    otherwise skipped.
    """
    findings: list[Finding] = []
    for entry in parse_requirements(manifest_text):
        if isinstance(entry, RequirementSyntaxError):
            findings.append(
                make_finding(
                    "SEC-REQ-SYNTAX",
                    Span(file_label, entry.line_number, 0, entry.line_number, len(entry.raw)),
                    f"could not parse requirement: {entry.raw!r}",
                )
            )
            continue
        if entry.pinned_version is None:
            continue
        for adv in db.matches(entry.name, entry.pinned_version):
            findings.append(
                make_finding(
                    "SEC-VULN-DEPENDENCY",
                    Span(file_label, entry.line_number, 0, entry.line_number, len(entry.raw)),
                    f"{entry.name}=={entry.pinned_version} matches advisory "
                    f"{adv.advisory_id} (range {adv.vulnerable_range})",
                )
            )
    return findings


def analyze(unit: SourceUnit, heuristics: SecretHeuristics | None = None) -> list[Finding]:
    """Run every source-level security rule over a unit."""
    h = heuristics or SecretHeuristics()
    return (
        detect_injection(unit)
        + detect_unsafe_deserialization(unit)
        + detect_weak_crypto(unit, h)
        + detect_hardcoded_secrets(unit, h)
    )

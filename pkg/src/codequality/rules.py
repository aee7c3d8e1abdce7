"""Finding data model, severity weights, and the rule registry.

The registry is the single source of truth for rule metadata: category,
default severity, documented escalation, and CWE mapping. It ships as a
reviewable data table so that scores are reproducible across versions.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

from .pysource import Span


class Severity(str, enum.Enum):
    """Issue severity, totally ordered from info to critical."""

    INFO = "info"
    LOW = "low"
    MEDIUM = "medium"
    HIGH = "high"
    CRITICAL = "critical"

    @property
    def rank(self) -> int:
        return _SEVERITY_ORDER.index(self)

    def __lt__(self, other: object) -> bool:  # type: ignore[override]
        if not isinstance(other, Severity):
            return NotImplemented
        return self.rank < other.rank

    def __le__(self, other: object) -> bool:  # type: ignore[override]
        if not isinstance(other, Severity):
            return NotImplemented
        return self.rank <= other.rank

    def __gt__(self, other: object) -> bool:  # type: ignore[override]
        if not isinstance(other, Severity):
            return NotImplemented
        return self.rank > other.rank

    def __ge__(self, other: object) -> bool:  # type: ignore[override]
        if not isinstance(other, Severity):
            return NotImplemented
        return self.rank >= other.rank


_SEVERITY_ORDER = [Severity.INFO, Severity.LOW, Severity.MEDIUM, Severity.HIGH, Severity.CRITICAL]


class Category(str, enum.Enum):
    MAINTAINABILITY = "maintainability"
    SECURITY = "security"
    PERFORMANCE = "performance"
    RELIABILITY = "reliability"


# Default weights are chosen so a single critical issue outweighs many minor
# ones; all five values are exactly representable in binary floating point.
DEFAULT_WEIGHTS: dict[Severity, float] = {
    Severity.INFO: 0.5,
    Severity.LOW: 1.0,
    Severity.MEDIUM: 2.5,
    Severity.HIGH: 5.0,
    Severity.CRITICAL: 10.0,
}


@dataclass(frozen=True)
class SeverityWeights:
    """Per-severity multipliers used in the weighted finding sum."""

    info: float = DEFAULT_WEIGHTS[Severity.INFO]
    low: float = DEFAULT_WEIGHTS[Severity.LOW]
    medium: float = DEFAULT_WEIGHTS[Severity.MEDIUM]
    high: float = DEFAULT_WEIGHTS[Severity.HIGH]
    critical: float = DEFAULT_WEIGHTS[Severity.CRITICAL]

    def __post_init__(self) -> None:
        values = [self.info, self.low, self.medium, self.high, self.critical]
        if any(v < 0 for v in values):
            raise ValueError("severity weights must be non-negative")
        if any(a > b for a, b in zip(values, values[1:])):
            raise ValueError("severity weights must be non-decreasing in severity order")

    def weight(self, severity: Severity) -> float:
        return getattr(self, severity.value)

    def as_dict(self) -> dict[str, float]:
        return {s.value: self.weight(s) for s in _SEVERITY_ORDER}


class UnknownRule(KeyError):
    """An analyzer emitted a rule_id that is not in the registry."""


@dataclass(frozen=True)
class RuleDescriptor:
    rule_id: str
    category: Category
    default_severity: Severity
    cwe_id: str | None
    title: str
    description: str
    #: Severity the rule may escalate to, with the condition documented in
    #: ``description``. Findings must carry either the default or this value.
    escalates_to: Severity | None = None


@dataclass(frozen=True)
class Finding:
    """One detected issue, located at a span and classified by rule."""

    rule_id: str
    category: Category
    severity: Severity
    message: str
    span: Span
    cwe_id: str | None = None

    @property
    def file_label(self) -> str:
        return self.span.file_label

    def as_dict(self) -> dict:
        return {
            "rule_id": self.rule_id,
            "category": self.category.value,
            "severity": self.severity.value,
            "cwe_id": self.cwe_id,
            "message": self.message,
            "file": self.span.file_label,
            "span": {
                "start_line": self.span.start_line,
                "start_col": self.span.start_col,
                "end_line": self.span.end_line,
                "end_col": self.span.end_col,
            },
        }


def _rule(
    rule_id: str,
    category: Category,
    severity: Severity,
    cwe: str | None,
    title: str,
    description: str,
    escalates_to: Severity | None = None,
) -> RuleDescriptor:
    return RuleDescriptor(rule_id, category, severity, cwe, title, description, escalates_to)


_M = Category.MAINTAINABILITY
_S = Category.SECURITY
_P = Category.PERFORMANCE
_R = Category.RELIABILITY

_RULES: tuple[RuleDescriptor, ...] = (
    # -- maintainability ----------------------------------------------------
    _rule(
        "MAINT-CYCLOMATIC", _M, Severity.MEDIUM, None,
        "Excessive cyclomatic complexity",
        "Function cyclomatic complexity exceeds the configured medium threshold. "
        "Escalates to high severity above the high threshold; a function over both "
        "thresholds yields a single high finding.",
        escalates_to=Severity.HIGH,
    ),
    _rule(
        "MAINT-CLASS-COMPLEX", _M, Severity.HIGH, None,
        "Class with overly complex method",
        "The most complex method of the class exceeds the high cyclomatic threshold.",
    ),
    _rule(
        "MAINT-UNUSED-FUNCTION", _M, Severity.LOW, "CWE-561",
        "Unused function",
        "Module-level function is never referenced within the file. Names with a "
        "leading underscore and names listed in __all__ are exempt.",
    ),
    _rule(
        "MAINT-UNUSED-CLASS", _M, Severity.LOW, "CWE-561",
        "Unused class",
        "Module-level class is never referenced within the file.",
    ),
    _rule(
        "MAINT-UNUSED-IMPORT", _M, Severity.LOW, "CWE-561",
        "Unused import",
        "Imported name is never referenced within the file.",
    ),
    _rule(
        "MAINT-UNUSED-VARIABLE", _M, Severity.LOW, "CWE-563",
        "Unused variable",
        "Module-level variable is assigned but never read within the file.",
    ),
    _rule(
        "MAINT-TOO-MANY-PARAMS", _M, Severity.MEDIUM, None,
        "Too many function parameters",
        "Function declares more parameters than the configured maximum "
        "(self/cls excluded).",
    ),
    _rule(
        "MAINT-TOO-MANY-ATTRS", _M, Severity.MEDIUM, None,
        "Too many instance attributes",
        "Class assigns more distinct attributes on self than the configured maximum.",
    ),
    _rule(
        "MAINT-LARGE-FILE", _M, Severity.MEDIUM, None,
        "File too large",
        "File exceeds the configured maximum line count.",
    ),
    _rule(
        "MAINT-TOO-MANY-BRANCHES", _M, Severity.MEDIUM, None,
        "Too many branches",
        "Function contains more branch points (if/elif arms, else blocks, loops, "
        "exception handlers) than the configured maximum.",
    ),
    _rule(
        "MAINT-TOO-MANY-RETURNS", _M, Severity.MEDIUM, None,
        "Too many return statements",
        "Function contains more return statements than the configured maximum.",
    ),
    _rule(
        "MAINT-MISSING-DOCSTRING", _M, Severity.INFO, None,
        "Missing docstring",
        "Public module, class, or function lacks a docstring. Underscore-prefixed "
        "names, dunder methods, and functions nested inside functions are exempt.",
    ),
    _rule(
        "MAINT-NAMING", _M, Severity.LOW, None,
        "Non-conventional name",
        "Function or variable name is not lower_snake_case (module-level constants "
        "may be UPPER_SNAKE_CASE), or class name is not CapWords. Single-letter "
        "loop variables are exempt.",
    ),
    # -- security -----------------------------------------------------------
    _rule(
        "SEC-SHELL-INJECTION", _S, Severity.HIGH, "CWE-78",
        "Shell command execution",
        "Call to os.system or os.popen. Escalates to critical when the command "
        "argument is built with runtime string interpolation.",
        escalates_to=Severity.CRITICAL,
    ),
    _rule(
        "SEC-SUBPROCESS-SHELL", _S, Severity.HIGH, "CWE-78",
        "Subprocess invoked through a shell",
        "subprocess call with shell=True, or an implicit-shell helper such as "
        "subprocess.getoutput. Escalates to critical when the command argument is "
        "built with runtime string interpolation.",
        escalates_to=Severity.CRITICAL,
    ),
    _rule(
        "SEC-EVAL-EXEC", _S, Severity.HIGH, "CWE-95",
        "Dynamic code evaluation",
        "eval or exec applied to a non-literal expression.",
    ),
    _rule(
        "SEC-PICKLE-LOAD", _S, Severity.HIGH, "CWE-502",
        "Unsafe pickle deserialization",
        "pickle.load/pickle.loads can execute arbitrary code on untrusted input.",
    ),
    _rule(
        "SEC-YAML-LOAD", _S, Severity.HIGH, "CWE-502",
        "Unsafe YAML load",
        "yaml.load without a Safe loader (or yaml.full_load/unsafe_load) can "
        "construct arbitrary objects.",
    ),
    _rule(
        "SEC-XML-PARSE", _S, Severity.MEDIUM, "CWE-611",
        "XML parsed with the standard parser",
        "Standard-library XML tree/SAX/DOM parsing is vulnerable to external "
        "entity and expansion attacks on untrusted input.",
    ),
    _rule(
        "SEC-WEAK-HASH", _S, Severity.MEDIUM, "CWE-327",
        "Weak hash algorithm",
        "MD5 or SHA1 constructed directly or via hashlib.new.",
    ),
    _rule(
        "SEC-WEAK-RANDOM", _S, Severity.MEDIUM, "CWE-330",
        "Non-cryptographic randomness in a security context",
        "random-module value assigned to, or passed as, a name that matches the "
        "configured secret name patterns.",
    ),
    _rule(
        "SEC-HARDCODED-SECRET", _S, Severity.CRITICAL, "CWE-798",
        "Hard-coded secret",
        "String literal assigned to a secret-named variable, or a long "
        "high-entropy token literal. Placeholders, docstrings, whitespace-bearing "
        "strings, and path/URL-shaped strings are exempt from the entropy check.",
    ),
    _rule(
        "SEC-VULN-DEPENDENCY", _S, Severity.HIGH, "CWE-1395",
        "Known vulnerable dependency",
        "Pinned requirement version falls inside a vulnerable range in the "
        "advisory database.",
    ),
    _rule(
        "SEC-REQ-SYNTAX", _S, Severity.INFO, None,
        "Unparseable requirement line",
        "Requirements line could not be parsed; it was skipped by the dependency "
        "check.",
    ),
    # -- performance ----------------------------------------------------------
    _rule(
        "PERF-STR-CONCAT-LOOP", _P, Severity.MEDIUM, "CWE-1046",
        "String concatenation in a loop",
        "Loop body rebinds a string accumulator via + or += (quadratic growth). "
        "One finding per variable per loop; string-typedness is established by "
        "literal or str() initialization in the same scope.",
    ),
    _rule(
        "PERF-IO-IN-LOOP", _P, Severity.MEDIUM, "CWE-1050",
        "File or network I/O inside a loop",
        "File-open or network-connect style call inside a loop body. Detection is "
        "by call-name pattern (open/io.open/os.open/codecs.open, requests.*, "
        "urllib.request.urlopen, socket connect/create_connection, "
        "http.client connections).",
    ),
    _rule(
        "PERF-LOOP-INVARIANT", _P, Severity.LOW, None,
        "Loop-invariant call in loop condition",
        "while-condition calls a plain function whose argument names are never "
        "assigned in the loop body, so the call is recomputed every iteration.",
    ),
    _rule(
        "PERF-LIST-CONCAT-LOOP", _P, Severity.LOW, None,
        "List growth by concatenation in a loop",
        "Loop body rebinds a list via + or += instead of append/extend "
        "(append/extend are not flagged).",
    ),
    _rule(
        "PERF-MANY-ATTRS", _P, Severity.LOW, None,
        "Excessive class attributes",
        "Class defines more distinct attributes (class-level plus self-assigned) "
        "than the configured maximum.",
    ),
    _rule(
        "PERF-DEEP-NESTING", _P, Severity.LOW, None,
        "Deeply nested container literal",
        "Container literal nests deeper than the configured maximum.",
    ),
    _rule(
        "PERF-LARGE-DICT", _P, Severity.LOW, None,
        "Large dictionary literal",
        "Dictionary literal has more entries than the configured maximum.",
    ),
    # -- reliability ----------------------------------------------------------
    _rule(
        "REL-BARE-EXCEPT", _R, Severity.MEDIUM, "CWE-390",
        "Bare or empty except clause",
        "except with no exception type, or a handler whose body is only pass. A "
        "handler that is both bare and empty yields a single finding.",
    ),
    _rule(
        "REL-BROAD-EXCEPT", _R, Severity.LOW, "CWE-396",
        "Overly broad exception catch",
        "except Exception/BaseException where the handler neither re-raises nor "
        "logs.",
    ),
    _rule(
        "REL-UNCLOSED-RESOURCE", _R, Severity.MEDIUM, "CWE-772",
        "File opened without close",
        "open() result bound to a name that is neither closed nor managed by a "
        "with statement in the same scope.",
    ),
    _rule(
        "REL-LOCK-ORDER", _R, Severity.HIGH, "CWE-833",
        "Inconsistent lock acquisition order",
        "Two locks are acquired in opposite orders in two functions of the same "
        "file. Lock identity is the dotted name being acquired.",
    ),
    _rule(
        "REL-LOCK-RELEASE", _R, Severity.HIGH, "CWE-667",
        "Lock acquired without guaranteed release",
        "acquire() without a release() on the same straight-line path (same "
        "block after the acquire, or an enclosing finally) and no context-manager "
        "usage.",
    ),
    _rule(
        "REL-WHILE-TRUE-NO-EXIT", _R, Severity.HIGH, "CWE-835",
        "while True without exit",
        "while True body contains no break, return, or raise.",
    ),
    _rule(
        "REL-LOOP-COUNTER-STUCK", _R, Severity.MEDIUM, "CWE-835",
        "Loop condition never updated",
        "No name appearing in the while condition is assigned anywhere in the "
        "loop body, and the body has no break/return/raise.",
    ),
    _rule(
        "REL-MISSING-ANNOTATION", _R, Severity.INFO, None,
        "Missing type annotations",
        "Public function with unannotated parameters or no return annotation.",
    ),
    _rule(
        "REL-TYPE-MISMATCH", _R, Severity.LOW, None,
        "Annotation/literal type mismatch",
        "Name annotated with one builtin scalar type is assigned a literal of a "
        "different builtin scalar type in the same scope (int literals satisfy "
        "float annotations; bools satisfy int).",
    ),
    _rule(
        "REL-ARITY-MISMATCH", _R, Severity.LOW, "CWE-628",
        "Call with wrong number of arguments",
        "Call to a locally defined function with an argument count outside the "
        "function's accepted range, or an unknown keyword.",
    ),
    _rule(
        "REL-EXTERNAL-TYPE", _R, Severity.LOW, None,
        "External type-checker finding",
        "Imported from an external type-checker report via the ingestion hook.",
    ),
    _rule(
        "PARSE-ERROR", _R, Severity.CRITICAL, None,
        "Source failed to parse",
        "The file is not valid Python under the supported grammar; no further "
        "analysis was possible.",
    ),
)

REGISTRY: dict[str, RuleDescriptor] = {r.rule_id: r for r in _RULES}

if len(REGISTRY) != len(_RULES):
    raise RuntimeError("duplicate rule_id in registry")


def registry_lookup(rule_id: str) -> RuleDescriptor:
    """Look up a rule descriptor; raises :class:`UnknownRule` for bad ids."""
    try:
        return REGISTRY[rule_id]
    except KeyError:
        raise UnknownRule(rule_id) from None


def rules_catalog(category: Category | None = None) -> list[dict]:
    """Machine-readable registry dump, ordered by rule_id."""
    rows = []
    for rule in sorted(REGISTRY.values(), key=lambda r: r.rule_id):
        if category is not None and rule.category is not category:
            continue
        rows.append(
            {
                "rule_id": rule.rule_id,
                "category": rule.category.value,
                "default_severity": rule.default_severity.value,
                "escalates_to": rule.escalates_to.value if rule.escalates_to else None,
                "cwe_id": rule.cwe_id,
                "title": rule.title,
                "description": rule.description,
            }
        )
    return rows


def make_finding(
    rule_id: str,
    span: Span,
    message: str,
    severity: Severity | None = None,
) -> Finding:
    """Build a finding from the registry, optionally escalating severity.

    Raises :class:`UnknownRule` for unregistered ids and ValueError when a
    severity other than the default or documented escalation is requested.
    """
    rule = registry_lookup(rule_id)
    effective = severity or rule.default_severity
    if effective not in (rule.default_severity, rule.escalates_to):
        raise ValueError(
            f"{rule_id} may not be reported at severity {effective.value!r}"
        )
    return Finding(
        rule_id=rule_id,
        category=rule.category,
        severity=effective,
        message=message,
        span=span,
        cwe_id=rule.cwe_id,
    )


def _sort_key(f: Finding) -> tuple:
    return (
        f.span.file_label,
        f.span.start_line,
        f.span.start_col,
        f.rule_id,
        f.span.end_line,
        f.span.end_col,
        f.severity.rank,
        f.message,
    )


def merge_findings(parts: list[list[Finding]]) -> list[Finding]:
    """Merge analyzer outputs into one deterministic, deduplicated list.

    The result is independent of the order of ``parts``, which is what makes
    concurrent analyzer execution observationally sequential. Exact
    duplicates (same rule_id and span) collapse to one finding.
    """
    merged = sorted((f for part in parts for f in part), key=_sort_key)
    out: list[Finding] = []
    seen: set[tuple] = set()
    for f in merged:
        key = (
            f.rule_id,
            f.span.file_label,
            f.span.start_line,
            f.span.start_col,
            f.span.end_line,
            f.span.end_col,
        )
        if key in seen:
            continue
        seen.add(key)
        out.append(f)
    return out

"""Finding aggregation into the severity-weighted sum and quality score.

The score for one file is ``1 / (1 + W)`` where ``W`` is the sum of
severity weights over its findings: 1.0 for clean code, decaying toward 0
as weighted findings accumulate. A multi-file report aggregates by the
arithmetic mean of per-file scores, so the reward does not scale with file
count.
"""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from .advisories import AdvisoryDb
from .analyzers import maintainability, performance, reliability, security
from .config import AnalyzerConfig
from .pysource import ParseFailure, SourceUnit, Span, parse_source
from .rules import Finding, Severity, SeverityWeights, make_finding, merge_findings

SOURCE_EXTENSION = ".py"
_REQUIREMENTS_PREFIX = "requirements"


def weighted_sum(findings: list[Finding], weights: SeverityWeights) -> float:
    """Exact sum of severity weights over findings."""
    return sum(weights.weight(f.severity) for f in findings)


def quality_score(w: float) -> float:
    """Map a weighted finding sum onto (0, 1]: exactly ``1 / (1 + w)``."""
    if w < 0:
        raise ValueError("weighted sum must be non-negative")
    return 1.0 / (1.0 + w)


@dataclass(frozen=True)
class FileReport:
    """Findings and score for one analyzed file."""

    file_label: str
    findings: tuple[Finding, ...]
    counts: dict[Severity, int]
    weighted_sum: float
    score: float
    parse_error: bool = False

    def as_dict(self) -> dict:
        return {
            "file": self.file_label,
            "findings": [f.as_dict() for f in self.findings],
            "counts": {s.value: self.counts[s] for s in Severity},
            "weighted_sum": self.weighted_sum,
            "score": self.score,
            "parse_error": self.parse_error,
        }


@dataclass(frozen=True)
class QualityReport:
    """Per-file reports plus the aggregate score for a whole run."""

    per_file: tuple[FileReport, ...]
    aggregate_score: float
    config_fingerprint: str
    warnings: tuple[str, ...] = ()
    io_errors: tuple[tuple[str, str], ...] = ()

    @property
    def total_findings(self) -> int:
        return sum(len(f.findings) for f in self.per_file)

    def as_dict(self) -> dict:
        return {
            "aggregate_score": self.aggregate_score,
            "config_fingerprint": self.config_fingerprint,
            "files": [f.as_dict() for f in self.per_file],
            "warnings": list(self.warnings),
            "io_errors": [{"path": p, "error": e} for p, e in self.io_errors],
        }

    def to_json(self, indent: int | None = 2) -> str:
        return json.dumps(self.as_dict(), sort_keys=True, indent=indent) + "\n"


def _count_by_severity(findings: list[Finding]) -> dict[Severity, int]:
    counts = {s: 0 for s in Severity}
    for f in findings:
        counts[f.severity] += 1
    return counts


def _entry_from_findings(
    file_label: str,
    findings: list[Finding],
    config: AnalyzerConfig,
    parse_error: bool = False,
) -> FileReport:
    w = weighted_sum(findings, config.severity_weights)
    return FileReport(
        file_label=file_label,
        findings=tuple(findings),
        counts=_count_by_severity(findings),
        weighted_sum=w,
        score=quality_score(w),
        parse_error=parse_error,
    )


def analyze_source(
    unit_or_failure: SourceUnit | ParseFailure, config: AnalyzerConfig | None = None
) -> FileReport:
    """Run all enabled analyzers over a parsed unit and score the result.

    A :class:`ParseFailure` becomes a single critical PARSE-ERROR finding;
    the file scores ``1 / (1 + w_critical)`` rather than zero so that nearly
    valid code still dominates garbage. PARSE-ERROR is always emitted, it is
    not subject to rule selection.
    """
    config = config or AnalyzerConfig()
    if isinstance(unit_or_failure, ParseFailure) or unit_or_failure is None:
        failure = unit_or_failure
        line = max(1, failure.line)
        finding = make_finding(
            "PARSE-ERROR",
            Span(failure.file_label, line, 0, line, 0),
            f"syntax error: {failure.message}",
        )
        return _entry_from_findings(
            failure.file_label, [finding], config, parse_error=True
        )

    unit = unit_or_failure
    parts = [
        maintainability.analyze(unit, config.maintainability),
        security.analyze(unit, config.secrets),
        performance.analyze(unit, config.performance),
        reliability.analyze(unit),
    ]
    merged = [f for f in merge_findings(parts) if f.rule_id in config.enabled_rules]
    return _entry_from_findings(unit.file_label, merged, config)


def analyze_snippet(
    file_label: str, source_text: str, config: AnalyzerConfig | None = None
) -> FileReport:
    """Parse and analyze one snippet (the reward-path entry point)."""
    return analyze_source(parse_source(file_label, source_text), config)


def _is_requirements_file(path: Path) -> bool:
    return path.name.lower().startswith(_REQUIREMENTS_PREFIX) and path.suffix == ".txt"


def _collect_files(
    paths: list[str | Path], include_requirements: bool
) -> tuple[list[tuple[str, Path]], list[tuple[str, str]]]:
    files: list[tuple[str, Path]] = []
    errors: list[tuple[str, str]] = []
    for raw in paths:
        p = Path(raw)
        if p.is_dir():
            try:
                candidates = sorted(p.rglob("*"))
            except OSError as exc:
                errors.append((str(raw), str(exc)))
                continue
            for child in candidates:
                if not child.is_file():
                    continue
                if child.suffix == SOURCE_EXTENSION or (
                    include_requirements and _is_requirements_file(child)
                ):
                    files.append((child.as_posix(), child))
        elif p.is_file():
            files.append((p.as_posix(), p))
        else:
            errors.append((str(raw), "path does not exist or is not readable"))
    files.sort(key=lambda pair: pair[0])
    return files, errors


def analyze_path(
    paths: list[str | Path],
    config: AnalyzerConfig | None = None,
    jobs: int = 1,
    extra_findings: list[Finding] | None = None,
) -> QualityReport:
    """Analyze files and directories into a :class:`QualityReport`.

    Directories are traversed recursively for ``.py`` files (plus
    ``requirements*.txt`` manifests when an advisory database is
    configured). Unreadable paths are reported and skipped; file ordering
    is lexicographic by label, so reports are byte-stable. ``jobs`` > 1
    fans file analysis out over a thread pool; results are deterministic
    either way.
    """
    config = config or AnalyzerConfig()
    advisory_db = _load_advisory_db(config)
    files, errors = _collect_files(paths, include_requirements=advisory_db is not None)

    warnings: list[str] = []
    if advisory_db is None:
        kept: list[tuple[str, Path]] = []
        for label, path in files:
            if _is_requirements_file(path):
                warnings.append(f"{label!r} skipped: no advisory database configured")
            else:
                kept.append((label, path))
        files = kept
    extra_by_label: dict[str, list[Finding]] = {}
    for f in extra_findings or []:
        extra_by_label.setdefault(f.span.file_label, []).append(f)

    def analyze_one(label: str, path: Path) -> FileReport | tuple[str, str]:
        try:
            text = path.read_text(encoding="utf-8", errors="replace")
        except OSError as exc:
            return (label, str(exc))
        if _is_requirements_file(path) and advisory_db is not None:
            findings = security.check_dependencies(text, advisory_db, file_label=label)
            findings = [f for f in findings if f.rule_id in config.enabled_rules]
            return _entry_from_findings(label, findings, config)
        entry = analyze_source(parse_source(label, text), config)
        extras = extra_by_label.pop(label, None)
        if extras:
            merged = merge_findings([list(entry.findings), extras])
            entry = _entry_from_findings(label, merged, config, entry.parse_error)
        return entry

    results: list[FileReport] = []
    if jobs > 1 and len(files) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            outcomes = list(pool.map(lambda lp: analyze_one(*lp), files))
    else:
        outcomes = [analyze_one(label, path) for label, path in files]
    for outcome in outcomes:
        if isinstance(outcome, FileReport):
            results.append(outcome)
        else:
            errors.append(outcome)

    for label in sorted(extra_by_label):
        warnings.append(f"external findings for unanalyzed file {label!r} were dropped")
    if not results:
        warnings.append("no source files found; aggregate defaults to 1.0")
        aggregate = 1.0
    else:
        aggregate = sum(r.score for r in results) / len(results)
    results.sort(key=lambda r: r.file_label)
    return QualityReport(
        per_file=tuple(results),
        aggregate_score=aggregate,
        config_fingerprint=config.fingerprint,
        warnings=tuple(warnings),
        io_errors=tuple(errors),
    )


def _load_advisory_db(config: AnalyzerConfig) -> AdvisoryDb | None:
    if config.advisory_db_path is None:
        return None
    return AdvisoryDb.from_path(config.advisory_db_path)

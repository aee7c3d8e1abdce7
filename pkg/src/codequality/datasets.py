"""Problem and completion dataset files: one JSON document per line.

A problem record carries an id, an estimated difficulty, the natural
language statement, an initial (sub-optimal) solution, the ideal solution,
and held-out unit tests. Completions reference problems by id.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path


class DatasetError(ValueError):
    """Malformed dataset file."""


@dataclass(frozen=True)
class ProblemRecord:
    problem_id: str
    difficulty: str
    statement: str
    initial_code: str
    ideal_solution: str
    test_code: str


@dataclass(frozen=True)
class CompletionRecord:
    rollout_id: str
    problem_id: str
    completion_text: str


_PROBLEM_FIELDS = (
    "problem_id", "difficulty", "statement", "initial_code", "ideal_solution", "test_code",
)


def _iter_jsonl(text: str, source: str):
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line:
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise DatasetError(f"{source}:{lineno}: invalid JSON: {exc}") from None
        if not isinstance(obj, dict):
            raise DatasetError(f"{source}:{lineno}: expected an object")
        yield lineno, obj


def load_problems(path: str | Path) -> dict[str, ProblemRecord]:
    """Load a problems file keyed by problem_id; ids must be unique."""
    source = str(path)
    problems: dict[str, ProblemRecord] = {}
    for lineno, obj in _iter_jsonl(Path(path).read_text(encoding="utf-8"), source):
        missing = [f for f in _PROBLEM_FIELDS if f not in obj]
        if missing:
            raise DatasetError(f"{source}:{lineno}: missing fields {missing}")
        record = ProblemRecord(**{f: str(obj[f]) for f in _PROBLEM_FIELDS})
        if record.problem_id in problems:
            raise DatasetError(
                f"{source}:{lineno}: duplicate problem_id {record.problem_id!r}"
            )
        problems[record.problem_id] = record
    return problems


def load_completions(path: str | Path) -> list[CompletionRecord]:
    source = str(path)
    completions = []
    for lineno, obj in _iter_jsonl(Path(path).read_text(encoding="utf-8"), source):
        for required in ("problem_id", "completion_text"):
            if required not in obj:
                raise DatasetError(f"{source}:{lineno}: missing field {required!r}")
        completions.append(
            CompletionRecord(
                rollout_id=str(obj.get("rollout_id", f"rollout-{lineno}")),
                problem_id=str(obj["problem_id"]),
                completion_text=str(obj["completion_text"]),
            )
        )
    return completions

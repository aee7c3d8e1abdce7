"""Reliability analyzers: exception handling, locking, loops, type safety.

Lock identity is syntactic (the dotted name being acquired); path analysis
for lock release is a deliberately simple block-level approximation. Full
gradual typing belongs to an external checker, whose report can be ingested
through :func:`parse_external_type_report`.
"""

from __future__ import annotations

import ast
from pathlib import Path

from ..pysource import SourceUnit, Span, node_span
from ..rules import Finding, make_finding
from .common import dotted_name, iter_scopes, walk_within_scope


# ---------------------------------------------------------------------------
# Exception handling
# ---------------------------------------------------------------------------

_BROAD_TYPES = {"Exception", "BaseException"}


def detect_exception_issues(unit: SourceUnit) -> list[Finding]:
    findings: list[Finding] = []
    for node in ast.walk(unit.syntax_root):
        if isinstance(node, ast.ExceptHandler):
            findings.extend(_handler_findings(unit, node))
    findings.extend(_unclosed_file_findings(unit))
    return findings


def _handler_findings(unit: SourceUnit, handler: ast.ExceptHandler) -> list[Finding]:
    if any(isinstance(n, ast.Raise) for n in ast.walk(handler)):
        return []  # re-raising handlers are never flagged
    bare = handler.type is None
    empty = len(handler.body) == 1 and isinstance(handler.body[0], ast.Pass)
    span = node_span(unit.file_label, handler)
    if bare or empty:
        # a bare-and-empty handler is one defect, not two
        what = "bare" if bare else "silently empty"
        if bare and empty:
            what = "bare and silently empty"
        return [make_finding("REL-BARE-EXCEPT", span, f"except clause is {what}")]
    type_names = _handler_type_names(handler)
    if type_names & _BROAD_TYPES and not _reraises_or_logs(handler):
        caught = ", ".join(sorted(type_names & _BROAD_TYPES))
        return [
            make_finding(
                "REL-BROAD-EXCEPT", span,
                f"catches {caught} without re-raising or logging",
            )
        ]
    return []


def _handler_type_names(handler: ast.ExceptHandler) -> set[str]:
    if handler.type is None:
        return set()
    nodes = handler.type.elts if isinstance(handler.type, ast.Tuple) else [handler.type]
    names = set()
    for n in nodes:
        name = dotted_name(n)
        if name:
            names.add(name.rsplit(".", 1)[-1])
    return names


def _reraises_or_logs(handler: ast.ExceptHandler) -> bool:
    for node in ast.walk(handler):
        if isinstance(node, ast.Raise):
            return True
        if isinstance(node, ast.Call):
            name = dotted_name(node.func) or ""
            segments = name.lower().split(".")
            if any(s.startswith(("log", "warn", "print_exc", "exception")) for s in segments):
                return True
    return False


_FILE_OPEN_CALLS = {
    "open", "io.open", "codecs.open", "os.fdopen",
    "gzip.open", "bz2.open", "lzma.open",
}


def _unclosed_file_findings(unit: SourceUnit) -> list[Finding]:
    from .common import ImportBindings

    bindings = ImportBindings(unit.syntax_root)
    findings: list[Finding] = []
    for scope in iter_scopes(unit.syntax_root):
        opened: dict[str, ast.Assign | ast.AnnAssign] = {}
        closed: set[str] = set()
        managed: set[str] = set()
        for node in walk_within_scope(scope):
            if isinstance(node, (ast.Assign, ast.AnnAssign)):
                value = node.value
                targets = node.targets if isinstance(node, ast.Assign) else [node.target]
                if (
                    value is not None
                    and isinstance(value, ast.Call)
                    and (bindings.resolved_call_name(value) or "") in _FILE_OPEN_CALLS
                    and len(targets) == 1
                    and isinstance(targets[0], ast.Name)
                ):
                    opened.setdefault(targets[0].id, node)
            elif isinstance(node, ast.Call) and isinstance(node.func, ast.Attribute):
                if node.func.attr == "close" and isinstance(node.func.value, ast.Name):
                    closed.add(node.func.value.id)
            elif isinstance(node, ast.With) or isinstance(node, ast.AsyncWith):
                for item in node.items:
                    ctx = item.context_expr
                    if isinstance(ctx, ast.Name):
                        managed.add(ctx.id)
                    elif isinstance(ctx, ast.Call):
                        for arg in ctx.args:
                            if isinstance(arg, ast.Name):
                                managed.add(arg.id)
        for name, assign in opened.items():
            if name not in closed and name not in managed:
                findings.append(
                    make_finding(
                        "REL-UNCLOSED-RESOURCE", node_span(unit.file_label, assign),
                        f"'{name}' is opened but never closed in this scope",
                    )
                )
    return findings


# ---------------------------------------------------------------------------
# Concurrency
# ---------------------------------------------------------------------------

_LOCKISH_HINTS = ("lock", "mutex", "semaphore", "sem_")


def detect_concurrency_issues(unit: SourceUnit) -> list[Finding]:
    findings: list[Finding] = []
    per_function: list[tuple[str, list[tuple[str, ast.AST]]]] = []

    for fn in unit.function_index:
        events = _acquisition_events(fn.body)
        if events:
            per_function.append((fn.qualified_name, events))
        findings.extend(_missing_release_findings(unit, fn.qualified_name, fn.body))

    # pairwise ordering conflicts across functions
    order_pairs: dict[tuple[str, str], tuple[str, ast.AST]] = {}
    reported: set[frozenset[str]] = set()
    for fn_name, events in per_function:
        seen: list[str] = []
        for lock, node in events:
            for held in seen:
                if held == lock:
                    continue
                pair = (held, lock)
                flipped = (lock, held)
                other = order_pairs.get(flipped)
                if other is not None and other[0] != fn_name:
                    key = frozenset(pair)
                    if key not in reported:
                        reported.add(key)
                        first, second = sorted(key)
                        findings.append(
                            make_finding(
                                "REL-LOCK-ORDER", node_span(unit.file_label, node),
                                f"locks '{first}' and '{second}' are acquired in "
                                f"opposite orders in '{other[0]}' and '{fn_name}'",
                            )
                        )
                if pair not in order_pairs:
                    order_pairs[pair] = (fn_name, node)
            if lock not in seen:
                seen.append(lock)
    return findings


def _acquisition_events(fn_node: ast.AST) -> list[tuple[str, ast.AST]]:
    """Ordered lock acquisitions: x.acquire() calls and with-blocks whose
    context expression names look lock-like."""
    events: list[tuple[str, ast.AST]] = []
    for node in walk_within_scope(fn_node):
        if isinstance(node, ast.Call) and isinstance(node.func, ast.Attribute):
            if node.func.attr == "acquire":
                name = dotted_name(node.func.value)
                if name:
                    events.append((name, node))
        elif isinstance(node, (ast.With, ast.AsyncWith)):
            for item in node.items:
                name = dotted_name(item.context_expr)
                if name and any(h in name.lower() for h in _LOCKISH_HINTS):
                    events.append((name, item.context_expr))
    # ast.walk order is not source order; sort by position
    events.sort(key=lambda e: (e[1].lineno, e[1].col_offset))
    return events


def _missing_release_findings(
    unit: SourceUnit, fn_name: str, fn_node: ast.AST
) -> list[Finding]:
    findings = []
    for lock, node in _acquire_calls(fn_node):
        if not _released_on_path(fn_node, node, lock):
            findings.append(
                make_finding(
                    "REL-LOCK-RELEASE", node_span(unit.file_label, node),
                    f"'{lock}' acquired in '{fn_name}' without a guaranteed "
                    "release; use a with block",
                )
            )
    return findings


def _acquire_calls(fn_node: ast.AST) -> list[tuple[str, ast.Call]]:
    calls = []
    for node in walk_within_scope(fn_node):
        if (
            isinstance(node, ast.Call)
            and isinstance(node.func, ast.Attribute)
            and node.func.attr == "acquire"
        ):
            name = dotted_name(node.func.value)
            if name:
                calls.append((name, node))
    return calls


def _released_on_path(fn_node: ast.AST, acquire: ast.Call, lock: str) -> bool:
    """Approximate all-paths release: a release in the same statement suite
    after the acquire, or in the finally block of an enclosing try."""

    def releases(stmts: list[ast.stmt]) -> bool:
        for stmt in stmts:
            for node in ast.walk(stmt):
                if (
                    isinstance(node, ast.Call)
                    and isinstance(node.func, ast.Attribute)
                    and node.func.attr == "release"
                    and dotted_name(node.func.value) == lock
                ):
                    return True
        return False

    def contains(stmt: ast.stmt) -> bool:
        return any(n is acquire for n in ast.walk(stmt))

    def check_suite(stmts: list[ast.stmt]) -> bool:
        for i, stmt in enumerate(stmts):
            if contains(stmt):
                if releases(stmts[i + 1:]):
                    return True
                if isinstance(stmt, ast.Try):
                    # dig into the try parts that contain the acquire
                    for suite in (stmt.body, stmt.orelse, *[h.body for h in stmt.handlers]):
                        if any(contains(s) for s in suite) and check_suite(suite):
                            return True
                    return releases(stmt.finalbody)
                for suite in _child_suites(stmt):
                    if any(contains(s) for s in suite):
                        return check_suite(suite)
                return False
        return False

    return check_suite(list(fn_node.body))


def _child_suites(stmt: ast.stmt) -> list[list[ast.stmt]]:
    suites = []
    for attr in ("body", "orelse", "finalbody"):
        value = getattr(stmt, attr, None)
        if isinstance(value, list) and value and isinstance(value[0], ast.stmt):
            suites.append(value)
    for handler in getattr(stmt, "handlers", []) or []:
        suites.append(handler.body)
    return suites


# ---------------------------------------------------------------------------
# Infinite loops
# ---------------------------------------------------------------------------

def detect_infinite_loops(unit: SourceUnit) -> list[Finding]:
    findings: list[Finding] = []
    for node in ast.walk(unit.syntax_root):
        if not isinstance(node, ast.While):
            continue
        if any(_has_loop_exit(stmt, in_nested_loop=False) for stmt in node.body):
            continue
        span = node_span(unit.file_label, node)
        if isinstance(node.test, ast.Constant) and node.test.value is True:
            findings.append(
                make_finding(
                    "REL-WHILE-TRUE-NO-EXIT", span,
                    "while True body has no break, return, or raise",
                )
            )
        else:
            cond_names = {
                n.id for n in ast.walk(node.test) if isinstance(n, ast.Name)
            }
            if not cond_names:
                continue
            assigned = _assigned_in_body(node.body)
            if not (cond_names & assigned):
                names = ", ".join(sorted(cond_names))
                findings.append(
                    make_finding(
                        "REL-LOOP-COUNTER-STUCK", span,
                        f"no name from the loop condition ({names}) is assigned "
                        "in the loop body",
                    )
                )
    return findings


def _has_loop_exit(stmt: ast.stmt, in_nested_loop: bool) -> bool:
    """Whether a statement can exit the enclosing loop.

    ``return`` and ``raise`` exit from anywhere except nested function
    bodies; ``break`` only exits when not inside a nested loop.
    """
    if isinstance(stmt, (ast.FunctionDef, ast.AsyncFunctionDef, ast.ClassDef)):
        return False
    if isinstance(stmt, (ast.Return, ast.Raise)):
        return True
    if isinstance(stmt, ast.Break):
        return not in_nested_loop
    nested = in_nested_loop or isinstance(stmt, (ast.For, ast.AsyncFor, ast.While))
    for child in ast.iter_child_nodes(stmt):
        if isinstance(child, ast.stmt) and _has_loop_exit(child, nested):
            return True
        if isinstance(child, ast.ExceptHandler):
            if any(_has_loop_exit(s, nested) for s in child.body):
                return True
    return False


def _assigned_in_body(stmts: list[ast.stmt]) -> set[str]:
    assigned: set[str] = set()
    for stmt in stmts:
        for node in ast.walk(stmt):
            if isinstance(node, ast.Name) and isinstance(node.ctx, ast.Store):
                assigned.add(node.id)
    return assigned


# ---------------------------------------------------------------------------
# Type safety
# ---------------------------------------------------------------------------

_SCALAR_TYPES = {"int", "float", "str", "bool", "bytes"}


def detect_type_safety_issues(unit: SourceUnit) -> list[Finding]:
    findings: list[Finding] = []

    for fn in unit.function_index:
        if fn.name.startswith("_") or fn.nested_in_function:
            continue
        missing: list[str] = []
        args = fn.body.args
        params = list(args.posonlyargs) + list(args.args) + list(args.kwonlyargs)
        if fn.is_method and params and params[0].arg in ("self", "cls"):
            params = params[1:]
        unannotated = [p.arg for p in params if p.annotation is None]
        if unannotated:
            missing.append(f"parameters {', '.join(unannotated)}")
        if not fn.has_return_annotation:
            missing.append("return type")
        if missing:
            findings.append(
                make_finding(
                    "REL-MISSING-ANNOTATION", fn.span,
                    f"'{fn.qualified_name}' lacks annotations: {'; '.join(missing)}",
                )
            )

    for scope in iter_scopes(unit.syntax_root):
        findings.extend(_literal_mismatch_findings(unit, scope))

    findings.extend(_arity_findings(unit))
    return findings


def _literal_type(value: ast.expr) -> str | None:
    if isinstance(value, ast.Constant):
        if isinstance(value.value, bool):
            return "bool"
        for tname, t in (("int", int), ("float", float), ("str", str), ("bytes", bytes)):
            if isinstance(value.value, t):
                return tname
    return None


def _compatible(annotation: str, literal: str) -> bool:
    if annotation == literal:
        return True
    if annotation == "float" and literal == "int":
        return True  # numeric tower
    if annotation == "int" and literal == "bool":
        return True  # bool is an int subtype
    return False


def _literal_mismatch_findings(unit: SourceUnit, scope: ast.AST) -> list[Finding]:
    findings = []
    annotations: dict[str, str] = {}
    for node in walk_within_scope(scope):
        if isinstance(node, ast.AnnAssign) and isinstance(node.target, ast.Name):
            ann = node.annotation
            if isinstance(ann, ast.Name) and ann.id in _SCALAR_TYPES:
                annotations[node.target.id] = ann.id
                if node.value is not None:
                    lit = _literal_type(node.value)
                    if lit and not _compatible(ann.id, lit):
                        findings.append(
                            make_finding(
                                "REL-TYPE-MISMATCH", node_span(unit.file_label, node),
                                f"'{node.target.id}' annotated {ann.id} but "
                                f"assigned a {lit} literal",
                            )
                        )
        elif isinstance(node, ast.Assign):
            lit = _literal_type(node.value)
            if lit is None:
                continue
            for target in node.targets:
                if isinstance(target, ast.Name) and target.id in annotations:
                    ann = annotations[target.id]
                    if not _compatible(ann, lit):
                        findings.append(
                            make_finding(
                                "REL-TYPE-MISMATCH", node_span(unit.file_label, node),
                                f"'{target.id}' annotated {ann} but assigned "
                                f"a {lit} literal",
                            )
                        )
    return findings


def _arity_findings(unit: SourceUnit) -> list[Finding]:
    signatures: dict[str, tuple[int, int | None, set[str], bool]] = {}
    for node in unit.syntax_root.body:
        if not isinstance(node, (ast.FunctionDef, ast.AsyncFunctionDef)):
            continue
        if node.decorator_list:
            continue  # decorators may change the signature
        args = node.args
        positional = list(args.posonlyargs) + list(args.args)
        required = len(positional) - len(args.defaults)
        required += sum(1 for d in args.kw_defaults if d is None)
        max_positional = None if args.vararg else len(positional)
        names = {a.arg for a in positional + list(args.kwonlyargs)}
        signatures[node.name] = (required, max_positional, names, args.kwarg is not None)

    findings = []
    for node in ast.walk(unit.syntax_root):
        if not isinstance(node, ast.Call) or not isinstance(node.func, ast.Name):
            continue
        sig = signatures.get(node.func.id)
        if sig is None:
            continue
        if any(isinstance(a, ast.Starred) for a in node.args):
            continue
        if any(kw.arg is None for kw in node.keywords):
            continue  # **kwargs at the call site
        required, max_positional, names, has_kwargs = sig
        n_pos = len(node.args)
        kw_names = {kw.arg for kw in node.keywords if kw.arg}
        problem: str | None = None
        if max_positional is not None and n_pos > max_positional:
            problem = f"takes at most {max_positional} positional arguments, got {n_pos}"
        elif not has_kwargs and not kw_names <= names:
            unknown = sorted(kw_names - names)
            problem = f"got unexpected keyword arguments: {', '.join(unknown)}"
        elif n_pos + len(kw_names) < required:
            problem = (
                f"requires at least {required} arguments, got {n_pos + len(kw_names)}"
            )
        if problem:
            findings.append(
                make_finding(
                    "REL-ARITY-MISMATCH", node_span(unit.file_label, node),
                    f"call to '{node.func.id}' {problem}",
                )
            )
    return findings


# ---------------------------------------------------------------------------
# External type-checker report ingestion
# ---------------------------------------------------------------------------

def parse_external_type_report(text: str, default_label: str = "<external>") -> list[Finding]:
    """Parse a line-oriented external type report into findings.

    Line grammar: ``file:line:column:code:message`` (message may contain
    further colons). Severity is fixed at the rule default (low). Blank
    lines and ``#`` comments are skipped; malformed lines are ignored.
    """
    findings = []
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split(":", 4)
        if len(parts) != 5:
            continue
        file_label, line_s, col_s, code, message = parts
        try:
            lineno = max(1, int(line_s))
            col = max(0, int(col_s))
        except ValueError:
            continue
        findings.append(
            make_finding(
                "REL-EXTERNAL-TYPE",
                Span(file_label or default_label, lineno, col, lineno, col),
                f"[{code.strip()}] {message.strip()}",
            )
        )
    return findings


def load_external_type_report(path: str | Path) -> list[Finding]:
    return parse_external_type_report(Path(path).read_text(encoding="utf-8"))


def analyze(unit: SourceUnit) -> list[Finding]:
    """Run every reliability rule over a unit."""
    return (
        detect_exception_issues(unit)
        + detect_concurrency_issues(unit)
        + detect_infinite_loops(unit)
        + detect_type_safety_issues(unit)
    )

"""Performance analyzers: string building, loop resource use, data shapes.

"String-typed" and "list-typed" are established by local evidence only
(literal or constructor initialization in the same scope); there is no type
inference, which keeps false positives low without a checker dependency.
"""

from __future__ import annotations

import ast
from dataclasses import dataclass

from ..pysource import SourceUnit, node_span
from ..rules import Finding, make_finding
from .common import ImportBindings, iter_scopes, walk_within_scope


@dataclass(frozen=True)
class PerformanceThresholds:
    max_class_attributes: int = 15
    max_nesting_containers: int = 3
    max_dict_literal_entries: int = 50

    def __post_init__(self) -> None:
        if min(
            self.max_class_attributes,
            self.max_nesting_containers,
            self.max_dict_literal_entries,
        ) <= 0:
            raise ValueError("performance thresholds must be positive")


_LOOP_NODES = (ast.For, ast.AsyncFor, ast.While)


def _evidence_names(scope: ast.AST, kind: str) -> set[str]:
    """Names initialized from a string (kind='str') or list (kind='list')."""
    names: set[str] = set()
    for node in walk_within_scope(scope):
        if not isinstance(node, (ast.Assign, ast.AnnAssign)):
            continue
        value = node.value
        if value is None:
            continue
        if kind == "str":
            ok = (
                (isinstance(value, ast.Constant) and isinstance(value.value, str))
                or isinstance(value, ast.JoinedStr)
                or (
                    isinstance(value, ast.Call)
                    and isinstance(value.func, ast.Name)
                    and value.func.id == "str"
                )
            )
        else:
            ok = isinstance(value, (ast.List, ast.ListComp)) or (
                isinstance(value, ast.Call)
                and isinstance(value.func, ast.Name)
                and value.func.id == "list"
            )
        if not ok:
            continue
        targets = node.targets if isinstance(node, ast.Assign) else [node.target]
        for target in targets:
            if isinstance(target, ast.Name):
                names.add(target.id)
    return names


def _concat_rebind_target(stmt: ast.stmt) -> str | None:
    """Accumulator name when a statement is ``x += e`` or ``x = x + e``."""
    if isinstance(stmt, ast.AugAssign) and isinstance(stmt.op, ast.Add):
        if isinstance(stmt.target, ast.Name):
            return stmt.target.id
    if isinstance(stmt, ast.Assign) and len(stmt.targets) == 1:
        target = stmt.targets[0]
        value = stmt.value
        if (
            isinstance(target, ast.Name)
            and isinstance(value, ast.BinOp)
            and isinstance(value.op, ast.Add)
            and isinstance(value.left, ast.Name)
            and value.left.id == target.id
        ):
            return target.id
    return None


def _walk_loops(scope: ast.AST):
    """Yield (loop_node, statement) pairs attributing each statement to its
    innermost enclosing loop within the scope."""

    def recurse(node: ast.AST, current: ast.AST | None):
        for child in ast.iter_child_nodes(node):
            if isinstance(child, (ast.FunctionDef, ast.AsyncFunctionDef, ast.ClassDef, ast.Lambda)):
                continue
            if isinstance(child, _LOOP_NODES):
                yield from recurse(child, child)
            else:
                if current is not None and isinstance(child, ast.stmt):
                    yield current, child
                yield from recurse(child, current)

    yield from recurse(scope, None)


def detect_string_concat_in_loops(unit: SourceUnit) -> list[Finding]:
    findings: list[Finding] = []
    for scope in iter_scopes(unit.syntax_root):
        str_names = _evidence_names(scope, "str")
        if not str_names:
            continue
        reported: set[tuple[int, str]] = set()
        for loop, stmt in _walk_loops(scope):
            name = _concat_rebind_target(stmt)
            if name is None or name not in str_names:
                continue
            key = (id(loop), name)
            if key in reported:
                continue
            reported.add(key)
            findings.append(
                make_finding(
                    "PERF-STR-CONCAT-LOOP", node_span(unit.file_label, stmt),
                    f"string '{name}' grown by concatenation inside a loop; "
                    "collect parts and join once",
                )
            )
    return findings


_IO_CALL_NAMES = {
    "open", "io.open", "os.open", "codecs.open",
    "urllib.request.urlopen", "socket.create_connection", "socket.socket",
    "http.client.HTTPConnection", "http.client.HTTPSConnection",
}
_IO_CALL_PREFIXES = ("requests.",)
_IO_CALL_SUFFIX = ".connect"


def _is_io_call(name: str) -> bool:
    return (
        name in _IO_CALL_NAMES
        or name.startswith(_IO_CALL_PREFIXES)
        or name.endswith(_IO_CALL_SUFFIX)
    )


def detect_loop_resource_issues(unit: SourceUnit) -> list[Finding]:
    bindings = ImportBindings(unit.syntax_root)
    findings: list[Finding] = []
    seen_calls: set[int] = set()
    for scope in iter_scopes(unit.syntax_root):
        list_names = _evidence_names(scope, "list")
        reported_growth: set[tuple[int, str]] = set()
        for loop, stmt in _walk_loops(scope):
            for node in ast.walk(stmt):
                if isinstance(node, ast.Call) and id(node) not in seen_calls:
                    seen_calls.add(id(node))
                    name = bindings.resolved_call_name(node)
                    if name and _is_io_call(name):
                        findings.append(
                            make_finding(
                                "PERF-IO-IN-LOOP", node_span(unit.file_label, node),
                                f"call to {name} inside a loop",
                            )
                        )
            name = _concat_rebind_target(stmt)
            if name is not None and name in list_names:
                key = (id(loop), name)
                if key not in reported_growth:
                    reported_growth.add(key)
                    findings.append(
                        make_finding(
                            "PERF-LIST-CONCAT-LOOP", node_span(unit.file_label, stmt),
                            f"list '{name}' grown by concatenation inside a loop; "
                            "use append or extend",
                        )
                    )
        findings.extend(_invariant_condition_findings(unit, scope))
    return findings


def _invariant_condition_findings(unit: SourceUnit, scope: ast.AST) -> list[Finding]:
    findings: list[Finding] = []
    for node in walk_within_scope(scope):
        if not isinstance(node, ast.While):
            continue
        body_assigned = _names_assigned_in(node.body + node.orelse)
        for call in ast.walk(node.test):
            if not isinstance(call, ast.Call) or not isinstance(call.func, ast.Name):
                continue
            if not call.args and not call.keywords:
                continue
            leaf_names = {
                n.id
                for arg in list(call.args) + [kw.value for kw in call.keywords]
                for n in ast.walk(arg)
                if isinstance(n, ast.Name)
            }
            if not leaf_names:
                continue
            if leaf_names & body_assigned or call.func.id in body_assigned:
                continue
            findings.append(
                make_finding(
                    "PERF-LOOP-INVARIANT", node_span(unit.file_label, call),
                    f"'{call.func.id}(...)' in the loop condition is recomputed "
                    "every iteration but its inputs never change in the body",
                )
            )
            break  # one finding per loop
    return findings


def _names_assigned_in(stmts: list[ast.stmt]) -> set[str]:
    assigned: set[str] = set()
    for stmt in stmts:
        for node in ast.walk(stmt):
            if isinstance(node, ast.Name) and isinstance(node.ctx, ast.Store):
                assigned.add(node.id)
            elif isinstance(node, ast.AugAssign) and isinstance(node.target, ast.Name):
                assigned.add(node.target.id)
    return assigned


_CONTAINER_NODES = (ast.List, ast.Tuple, ast.Set, ast.Dict)


def _container_depth(node: ast.expr) -> int:
    if not isinstance(node, _CONTAINER_NODES):
        return 0
    children: list[ast.expr] = []
    if isinstance(node, ast.Dict):
        children = [k for k in node.keys if k is not None] + list(node.values)
    else:
        children = list(node.elts)
    return 1 + max((_container_depth(c) for c in children), default=0)


def detect_data_structure_issues(
    unit: SourceUnit, th: PerformanceThresholds
) -> list[Finding]:
    findings: list[Finding] = []

    for cls in unit.class_index:
        attrs = _class_attribute_names(cls.body)
        if len(attrs) > th.max_class_attributes:
            findings.append(
                make_finding(
                    "PERF-MANY-ATTRS", cls.span,
                    f"class '{cls.qualified_name}' defines {len(attrs)} attributes "
                    f"(> {th.max_class_attributes})",
                )
            )

    parents: dict[int, ast.AST] = {}
    for node in ast.walk(unit.syntax_root):
        for child in ast.iter_child_nodes(node):
            parents[id(child)] = node
    for node in ast.walk(unit.syntax_root):
        if isinstance(node, ast.Dict) and len(node.keys) > th.max_dict_literal_entries:
            findings.append(
                make_finding(
                    "PERF-LARGE-DICT", node_span(unit.file_label, node),
                    f"dictionary literal with {len(node.keys)} entries "
                    f"(> {th.max_dict_literal_entries})",
                )
            )
        if isinstance(node, _CONTAINER_NODES) and not isinstance(
            parents.get(id(node)), _CONTAINER_NODES
        ):
            depth = _container_depth(node)
            if depth > th.max_nesting_containers:
                findings.append(
                    make_finding(
                        "PERF-DEEP-NESTING", node_span(unit.file_label, node),
                        f"container literal nested {depth} deep "
                        f"(> {th.max_nesting_containers})",
                    )
                )
    return findings


def _class_attribute_names(class_node: ast.AST) -> set[str]:
    from .maintainability import instance_attribute_names

    attrs = instance_attribute_names(class_node)
    for item in ast.iter_child_nodes(class_node):
        if isinstance(item, ast.Assign):
            for target in item.targets:
                if isinstance(target, ast.Name):
                    attrs.add(target.id)
        elif isinstance(item, ast.AnnAssign) and isinstance(item.target, ast.Name):
            attrs.add(item.target.id)
    return attrs


def analyze(unit: SourceUnit, th: PerformanceThresholds) -> list[Finding]:
    """Run every performance rule over a unit."""
    return (
        detect_string_concat_in_loops(unit)
        + detect_loop_resource_issues(unit)
        + detect_data_structure_issues(unit, th)
    )

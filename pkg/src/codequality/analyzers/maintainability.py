"""Maintainability analyzers: complexity, dead code, structure, style.

All detection is intra-file. Rollouts in RL pipelines are single snippets,
so no cross-file call graph is built or consulted.
"""

from __future__ import annotations

import ast
import re
from dataclasses import dataclass

from ..pysource import FunctionInfo, SourceUnit, Span, node_span
from ..rules import Finding, Severity, make_finding
from .common import export_list, walk_within_scope


@dataclass(frozen=True)
class MaintainabilityThresholds:
    cyclomatic_medium: int = 10
    cyclomatic_high: int = 20
    max_parameters: int = 5
    max_instance_attributes: int = 10
    max_file_loc: int = 1000
    max_branches: int = 12
    max_returns: int = 6
    max_nesting_depth: int = 4

    def __post_init__(self) -> None:
        values = (
            self.cyclomatic_medium, self.cyclomatic_high, self.max_parameters,
            self.max_instance_attributes, self.max_file_loc, self.max_branches,
            self.max_returns, self.max_nesting_depth,
        )
        if any(v <= 0 for v in values):
            raise ValueError("maintainability thresholds must be positive")
        if self.cyclomatic_medium >= self.cyclomatic_high:
            raise ValueError("cyclomatic_medium must be below cyclomatic_high")


def cyclomatic_complexity(fn: FunctionInfo) -> int:
    """McCabe complexity: 1 plus the number of decision points.

    Decision points: if/elif, loop headers, each extra operand of a boolean
    operator, conditional expressions, except clauses, and comprehension
    conditions. Nested function and class definitions are not descended
    into; they are measured on their own.
    """
    count = 1
    for node in walk_within_scope(fn.body):
        if isinstance(node, (ast.If, ast.IfExp, ast.For, ast.While, ast.AsyncFor)):
            count += 1
        elif isinstance(node, ast.BoolOp):
            count += len(node.values) - 1
        elif isinstance(node, ast.ExceptHandler):
            count += 1
        elif isinstance(node, ast.comprehension):
            count += len(node.ifs)
    return count


def detect_complexity_issues(
    unit: SourceUnit, th: MaintainabilityThresholds
) -> list[Finding]:
    findings: list[Finding] = []
    complexity: dict[str, int] = {}
    for fn in unit.function_index:
        cc = cyclomatic_complexity(fn)
        complexity[fn.qualified_name] = cc
        if cc > th.cyclomatic_high:
            findings.append(
                make_finding(
                    "MAINT-CYCLOMATIC", fn.span,
                    f"'{fn.qualified_name}' has cyclomatic complexity {cc} "
                    f"(> {th.cyclomatic_high})",
                    severity=Severity.HIGH,
                )
            )
        elif cc > th.cyclomatic_medium:
            findings.append(
                make_finding(
                    "MAINT-CYCLOMATIC", fn.span,
                    f"'{fn.qualified_name}' has cyclomatic complexity {cc} "
                    f"(> {th.cyclomatic_medium})",
                )
            )
    for cls in unit.class_index:
        if not cls.methods:
            continue
        worst = max(cls.methods, key=lambda m: complexity[m.qualified_name])
        cc = complexity[worst.qualified_name]
        if cc > th.cyclomatic_high:
            findings.append(
                make_finding(
                    "MAINT-CLASS-COMPLEX", cls.span,
                    f"class '{cls.qualified_name}' has method "
                    f"'{worst.name}' with complexity {cc} (> {th.cyclomatic_high})",
                )
            )
    return findings


def detect_dead_code(unit: SourceUnit) -> list[Finding]:
    """Unused module-level functions, classes, imports, and variables.

    A name counts as used when it is read anywhere in the file (including
    augmented assignment, which reads before writing). Underscore-prefixed
    names and names listed in ``__all__`` are exempt.
    """
    root = unit.syntax_root
    exported = export_list(root)

    used: set[str] = set()
    for node in ast.walk(root):
        if isinstance(node, ast.Name) and isinstance(node.ctx, ast.Load):
            used.add(node.id)
        elif isinstance(node, ast.AugAssign) and isinstance(node.target, ast.Name):
            used.add(node.target.id)

    def exempt(name: str) -> bool:
        return name.startswith("_") or name in exported

    findings: list[Finding] = []
    seen_vars: set[str] = set()
    for node in walk_within_scope(root):
        if isinstance(node, (ast.FunctionDef, ast.AsyncFunctionDef)):
            if not exempt(node.name) and node.name not in used:
                findings.append(
                    make_finding(
                        "MAINT-UNUSED-FUNCTION", node_span(unit.file_label, node),
                        f"function '{node.name}' is never used",
                    )
                )
        elif isinstance(node, ast.ClassDef):
            if not exempt(node.name) and node.name not in used:
                findings.append(
                    make_finding(
                        "MAINT-UNUSED-CLASS", node_span(unit.file_label, node),
                        f"class '{node.name}' is never used",
                    )
                )
        elif isinstance(node, (ast.Import, ast.ImportFrom)):
            for alias in node.names:
                if alias.name == "*":
                    continue
                local = alias.asname or alias.name.split(".", 1)[0]
                if not exempt(local) and local not in used:
                    findings.append(
                        make_finding(
                            "MAINT-UNUSED-IMPORT", node_span(unit.file_label, node),
                            f"import '{local}' is never used",
                        )
                    )
        elif isinstance(node, (ast.Assign, ast.AnnAssign)):
            targets = node.targets if isinstance(node, ast.Assign) else [node.target]
            for target in targets:
                for name_node in ast.walk(target):
                    if not isinstance(name_node, ast.Name) or not isinstance(
                        name_node.ctx, ast.Store
                    ):
                        continue
                    name = name_node.id
                    if exempt(name) or name in used or name in seen_vars:
                        continue
                    seen_vars.add(name)
                    findings.append(
                        make_finding(
                            "MAINT-UNUSED-VARIABLE", node_span(unit.file_label, name_node),
                            f"variable '{name}' is assigned but never used",
                        )
                    )
    return findings


def detect_structure_issues(
    unit: SourceUnit, th: MaintainabilityThresholds
) -> list[Finding]:
    findings: list[Finding] = []

    if unit.line_count > th.max_file_loc:
        findings.append(
            make_finding(
                "MAINT-LARGE-FILE", Span(unit.file_label, 1, 0, 1, 0),
                f"file has {unit.line_count} lines (> {th.max_file_loc})",
            )
        )

    for fn in unit.function_index:
        params = _own_parameter_count(fn)
        if params > th.max_parameters:
            findings.append(
                make_finding(
                    "MAINT-TOO-MANY-PARAMS", fn.span,
                    f"'{fn.qualified_name}' takes {params} parameters "
                    f"(> {th.max_parameters})",
                )
            )
        branches = _branch_count(fn.body)
        if branches > th.max_branches:
            findings.append(
                make_finding(
                    "MAINT-TOO-MANY-BRANCHES", fn.span,
                    f"'{fn.qualified_name}' has {branches} branches "
                    f"(> {th.max_branches})",
                )
            )
        returns = sum(
            1 for n in walk_within_scope(fn.body) if isinstance(n, ast.Return)
        )
        if returns > th.max_returns:
            findings.append(
                make_finding(
                    "MAINT-TOO-MANY-RETURNS", fn.span,
                    f"'{fn.qualified_name}' has {returns} return statements "
                    f"(> {th.max_returns})",
                )
            )

    for cls in unit.class_index:
        attrs = instance_attribute_names(cls.body)
        if len(attrs) > th.max_instance_attributes:
            findings.append(
                make_finding(
                    "MAINT-TOO-MANY-ATTRS", cls.span,
                    f"class '{cls.qualified_name}' assigns {len(attrs)} instance "
                    f"attributes (> {th.max_instance_attributes})",
                )
            )
    return findings


_SNAKE_CASE = re.compile(r"^[a-z_][a-z0-9_]*$")
_UPPER_CASE = re.compile(r"^[A-Z_][A-Z0-9_]*$")
_CAP_WORDS = re.compile(r"^[A-Z][a-zA-Z0-9]*$")


def detect_style_issues(unit: SourceUnit) -> list[Finding]:
    findings: list[Finding] = []
    root = unit.syntax_root

    if root.body and ast.get_docstring(root) is None:
        findings.append(
            make_finding(
                "MAINT-MISSING-DOCSTRING", Span(unit.file_label, 1, 0, 1, 0),
                "module has no docstring",
            )
        )

    for fn in unit.function_index:
        if _is_public(fn.name) and not fn.nested_in_function and not fn.has_docstring:
            findings.append(
                make_finding(
                    "MAINT-MISSING-DOCSTRING", fn.span,
                    f"function '{fn.qualified_name}' has no docstring",
                )
            )
        if not _is_dunder(fn.name) and not _SNAKE_CASE.match(fn.name):
            findings.append(
                make_finding(
                    "MAINT-NAMING", fn.span,
                    f"function name '{fn.name}' is not lower_snake_case",
                )
            )

    for cls in unit.class_index:
        if _is_public(cls.name) and not cls.has_docstring:
            findings.append(
                make_finding(
                    "MAINT-MISSING-DOCSTRING", cls.span,
                    f"class '{cls.qualified_name}' has no docstring",
                )
            )
        if not cls.name.startswith("_") and not _CAP_WORDS.match(cls.name):
            findings.append(
                make_finding(
                    "MAINT-NAMING", cls.span,
                    f"class name '{cls.name}' is not CapWords",
                )
            )

    findings.extend(_variable_naming_issues(unit))
    return findings


def analyze(unit: SourceUnit, th: MaintainabilityThresholds) -> list[Finding]:
    """Run every maintainability rule over a unit."""
    return (
        detect_complexity_issues(unit, th)
        + detect_dead_code(unit)
        + detect_structure_issues(unit, th)
        + detect_style_issues(unit)
    )


def _is_public(name: str) -> bool:
    return not name.startswith("_")


def _is_dunder(name: str) -> bool:
    return name.startswith("__") and name.endswith("__")


def _own_parameter_count(fn: FunctionInfo) -> int:
    args = fn.body.args
    positional = list(args.posonlyargs) + list(args.args)
    count = fn.parameter_count
    if fn.is_method and positional and positional[0].arg in ("self", "cls"):
        count -= 1
    return count


def _branch_count(fn_node: ast.AST) -> int:
    """Branch points: if/elif arms, real else blocks, loops, except handlers."""
    count = 0
    for node in walk_within_scope(fn_node):
        if isinstance(node, ast.If):
            count += 1
            if node.orelse and not (
                len(node.orelse) == 1 and isinstance(node.orelse[0], ast.If)
            ):
                count += 1
        elif isinstance(node, (ast.For, ast.While, ast.AsyncFor)):
            count += 1
        elif isinstance(node, ast.ExceptHandler):
            count += 1
    return count


def instance_attribute_names(class_node: ast.AST) -> set[str]:
    """Distinct attribute names assigned on self across a class's methods."""
    attrs: set[str] = set()
    for item in ast.iter_child_nodes(class_node):
        if not isinstance(item, (ast.FunctionDef, ast.AsyncFunctionDef)):
            continue
        positional = list(item.args.posonlyargs) + list(item.args.args)
        if not positional:
            continue
        receiver = positional[0].arg
        for node in walk_within_scope(item):
            if (
                isinstance(node, ast.Attribute)
                and isinstance(node.ctx, ast.Store)
                and isinstance(node.value, ast.Name)
                and node.value.id == receiver
            ):
                attrs.add(node.attr)
    return attrs


def _variable_naming_issues(unit: SourceUnit) -> list[Finding]:
    findings: list[Finding] = []
    root = unit.syntax_root
    flagged: set[str] = set()

    def check(name_node: ast.Name, module_level: bool, is_loop_target: bool) -> None:
        name = name_node.id
        if name in flagged or _is_dunder(name):
            return
        if is_loop_target and len(name) == 1:
            return
        ok = bool(_SNAKE_CASE.match(name))
        if module_level:
            ok = ok or bool(_UPPER_CASE.match(name))
        if not ok:
            flagged.add(name)
            findings.append(
                make_finding(
                    "MAINT-NAMING", node_span(unit.file_label, name_node),
                    f"variable name '{name}' is not lower_snake_case",
                )
            )

    def scan(scope: ast.AST, module_level: bool) -> None:
        for node in walk_within_scope(scope):
            if isinstance(node, (ast.Assign, ast.AnnAssign, ast.AugAssign)):
                targets = node.targets if isinstance(node, ast.Assign) else [node.target]
                for target in targets:
                    for name_node in ast.walk(target):
                        if isinstance(name_node, ast.Name) and isinstance(
                            name_node.ctx, ast.Store
                        ):
                            check(name_node, module_level, is_loop_target=False)
            elif isinstance(node, (ast.For, ast.AsyncFor)):
                for name_node in ast.walk(node.target):
                    if isinstance(name_node, ast.Name) and isinstance(
                        name_node.ctx, ast.Store
                    ):
                        check(name_node, module_level, is_loop_target=True)

    scan(root, module_level=True)
    for fn in unit.function_index:
        scan(fn.body, module_level=False)
        positional = (
            list(fn.body.args.posonlyargs)
            + list(fn.body.args.args)
            + list(fn.body.args.kwonlyargs)
        )
        for arg in positional:
            if arg.arg in flagged or len(arg.arg) == 1:
                continue
            if not _SNAKE_CASE.match(arg.arg):
                flagged.add(arg.arg)
                findings.append(
                    make_finding(
                        "MAINT-NAMING", fn.span,
                        f"parameter name '{arg.arg}' is not lower_snake_case",
                    )
                )
    return findings

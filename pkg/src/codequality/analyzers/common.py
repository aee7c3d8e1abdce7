"""Shared AST helpers for the analyzer families.

Detection throughout is name-and-call-pattern based: imports are resolved
through their bindings within the file (``import os as o`` makes
``o.system`` resolve to ``os.system``), but there is no data-flow or
cross-file analysis.
"""

from __future__ import annotations

import ast
from typing import Iterator


class ImportBindings:
    """Maps local names to the dotted path they were imported as."""

    def __init__(self, root: ast.Module) -> None:
        self._bound: dict[str, str] = {}
        self._shadowed: set[str] = set()
        for node in ast.walk(root):
            if isinstance(node, ast.Import):
                for alias in node.names:
                    if alias.asname:
                        self._bound[alias.asname] = alias.name
                    else:
                        top = alias.name.split(".", 1)[0]
                        self._bound[top] = top
            elif isinstance(node, ast.ImportFrom):
                if node.module is None or node.level:
                    continue  # relative imports stay unresolved
                for alias in node.names:
                    if alias.name == "*":
                        continue
                    local = alias.asname or alias.name
                    self._bound[local] = f"{node.module}.{alias.name}"
            elif isinstance(node, (ast.FunctionDef, ast.AsyncFunctionDef, ast.ClassDef)):
                self._shadowed.add(node.name)

    def resolve(self, name: str) -> str | None:
        """Dotted path a local name is bound to, or None."""
        return self._bound.get(name)

    def is_local_definition(self, name: str) -> bool:
        return name in self._shadowed

    def resolved_call_name(self, node: ast.Call) -> str | None:
        """Fully resolved dotted name of a call target.

        ``o.system(...)`` with ``import os as o`` resolves to ``os.system``;
        ``system(...)`` with ``from os import system`` also resolves to
        ``os.system``. Plain names that are neither imported nor locally
        defined resolve to themselves (builtins).
        """
        func = node.func
        if isinstance(func, ast.Name):
            bound = self.resolve(func.id)
            if bound is not None:
                return bound
            if self.is_local_definition(func.id):
                return None
            return func.id
        if isinstance(func, ast.Attribute):
            parts: list[str] = []
            cur: ast.expr = func
            while isinstance(cur, ast.Attribute):
                parts.append(cur.attr)
                cur = cur.value
            if not isinstance(cur, ast.Name):
                return None
            base = self.resolve(cur.id) or cur.id
            return ".".join([base, *reversed(parts)])
        return None


def dotted_name(node: ast.expr) -> str | None:
    """Dotted source name of a Name/Attribute chain, unresolved."""
    parts: list[str] = []
    cur = node
    while isinstance(cur, ast.Attribute):
        parts.append(cur.attr)
        cur = cur.value
    if not isinstance(cur, ast.Name):
        return None
    parts.append(cur.id)
    return ".".join(reversed(parts))


_SCOPE_NODES = (ast.FunctionDef, ast.AsyncFunctionDef, ast.ClassDef)


def walk_within_scope(node: ast.AST) -> Iterator[ast.AST]:
    """Walk a subtree without descending into nested function/class scopes."""
    stack = list(ast.iter_child_nodes(node))
    while stack:
        child = stack.pop()
        yield child
        if not isinstance(child, _SCOPE_NODES + (ast.Lambda,)):
            stack.extend(ast.iter_child_nodes(child))


def iter_scopes(root: ast.Module) -> Iterator[ast.AST]:
    """The module plus every function definition, outermost first."""
    yield root
    for node in ast.walk(root):
        if isinstance(node, (ast.FunctionDef, ast.AsyncFunctionDef)):
            yield node


def assigned_names(node: ast.AST) -> set[str]:
    """All plain names assigned anywhere in a subtree (targets of =, +=,
    for, with-as, walrus, and function parameters are not included)."""
    names: set[str] = set()
    for child in ast.walk(node):
        if isinstance(child, ast.Name) and isinstance(child.ctx, (ast.Store,)):
            names.add(child.id)
        elif isinstance(child, ast.NamedExpr) and isinstance(child.target, ast.Name):
            names.add(child.target.id)
    return names


def loaded_names(node: ast.AST) -> set[str]:
    """All plain names read anywhere in a subtree."""
    return {
        child.id
        for child in ast.walk(node)
        if isinstance(child, ast.Name) and isinstance(child.ctx, ast.Load)
    }


def is_string_literal(node: ast.expr) -> bool:
    return isinstance(node, ast.Constant) and isinstance(node.value, str)


def call_uses_interpolation(arg: ast.expr) -> bool:
    """True when an expression builds a string at runtime.

    Covers f-strings with substitutions, %-formatting, .format() calls, and
    concatenation involving a non-constant operand.
    """
    if isinstance(arg, ast.JoinedStr):
        return any(isinstance(v, ast.FormattedValue) for v in arg.values)
    if isinstance(arg, ast.BinOp) and isinstance(arg.op, (ast.Add, ast.Mod)):
        return not (isinstance(arg.left, ast.Constant) and isinstance(arg.right, ast.Constant))
    if isinstance(arg, ast.Call) and isinstance(arg.func, ast.Attribute):
        if arg.func.attr == "format":
            return True
    return False


def export_list(root: ast.Module) -> set[str]:
    """String entries of a module-level ``__all__`` assignment."""
    exported: set[str] = set()
    for node in root.body:
        targets: list[ast.expr] = []
        value: ast.expr | None = None
        if isinstance(node, ast.Assign):
            targets, value = node.targets, node.value
        elif isinstance(node, ast.AnnAssign) and node.value is not None:
            targets, value = [node.target], node.value
        elif isinstance(node, ast.AugAssign):
            targets, value = [node.target], node.value
        for target in targets:
            if isinstance(target, ast.Name) and target.id == "__all__":
                if isinstance(value, (ast.List, ast.Tuple, ast.Set)):
                    for elt in value.elts:
                        if isinstance(elt, ast.Constant) and isinstance(elt.value, str):
                            exported.add(elt.value)
    return exported

"""Parsing of Python source into an analyzable unit, plus markdown fence extraction.

Everything downstream (analyzers, scoring, reward) consumes the
:class:`SourceUnit` produced here. Units are immutable once indexed and can
be shared freely across concurrently running analyzers.
"""

from __future__ import annotations

import ast
from dataclasses import dataclass, field, replace


@dataclass(frozen=True)
class Span:
    """A half-open region of source text: 1-based lines, 0-based columns."""

    file_label: str
    start_line: int
    start_col: int
    end_line: int
    end_col: int

    def __post_init__(self) -> None:
        if self.end_line < self.start_line or (
            self.end_line == self.start_line and self.end_col < self.start_col
        ):
            raise ValueError(f"span ends before it starts: {self}")


def node_span(file_label: str, node: ast.AST) -> Span:
    """Span covering an AST node. Tabs count as a single column."""
    end_line = getattr(node, "end_lineno", None) or node.lineno
    end_col = getattr(node, "end_col_offset", None)
    if end_col is None:
        end_col = node.col_offset
    return Span(file_label, node.lineno, node.col_offset, end_line, end_col)


@dataclass(frozen=True)
class FunctionInfo:
    """One function or method definition found in a unit."""

    qualified_name: str
    parameter_count: int
    has_docstring: bool
    has_return_annotation: bool
    annotated_parameter_count: int
    span: Span
    body: ast.AST  # the FunctionDef / AsyncFunctionDef node
    is_method: bool = False
    nested_in_function: bool = False

    @property
    def name(self) -> str:
        return self.qualified_name.rsplit(".", 1)[-1]


@dataclass(frozen=True)
class ClassInfo:
    """One class definition found in a unit."""

    qualified_name: str
    has_docstring: bool
    span: Span
    body: ast.AST  # the ClassDef node
    methods: tuple[FunctionInfo, ...] = ()

    @property
    def name(self) -> str:
        return self.qualified_name.rsplit(".", 1)[-1]


@dataclass(frozen=True)
class SourceUnit:
    """A parsed Python file or snippet with structural indices."""

    file_label: str
    source_text: str
    syntax_root: ast.Module
    line_count: int
    function_index: tuple[FunctionInfo, ...] = ()
    class_index: tuple[ClassInfo, ...] = ()


@dataclass(frozen=True)
class ParseFailure:
    """Returned (not raised) when source text does not parse."""

    file_label: str
    message: str
    line: int


def parse_source(file_label: str, source_text: str) -> SourceUnit | ParseFailure:
    """Parse ``source_text`` into an indexed :class:`SourceUnit`.

    Syntax errors are values, not exceptions: callers (notably the scorer)
    decide how an unparseable file affects the result.
    """
    try:
        root = ast.parse(source_text)
    except SyntaxError as exc:
        return ParseFailure(file_label, exc.msg or "invalid syntax", exc.lineno or 1)
    except (ValueError, RecursionError) as exc:  # e.g. NUL bytes, deep nesting
        return ParseFailure(file_label, str(exc), 1)
    unit = SourceUnit(
        file_label=file_label,
        source_text=source_text,
        syntax_root=root,
        line_count=len(source_text.splitlines()),
    )
    return index_structure(unit)


def index_structure(unit: SourceUnit) -> SourceUnit:
    """Return a unit whose function and class indices are (re)built."""
    functions: list[FunctionInfo] = []
    classes: list[ClassInfo] = []

    def visit(node: ast.AST, prefix: str, in_class: bool, in_function: bool) -> None:
        for child in ast.iter_child_nodes(node):
            if isinstance(child, (ast.FunctionDef, ast.AsyncFunctionDef)):
                info = _function_info(unit.file_label, child, prefix, in_class, in_function)
                functions.append(info)
                visit(child, info.qualified_name, in_class=False, in_function=True)
            elif isinstance(child, ast.ClassDef):
                qname = f"{prefix}.{child.name}" if prefix else child.name
                mark = len(functions)
                visit(child, qname, in_class=True, in_function=in_function)
                methods = tuple(
                    f for f in functions[mark:] if f.qualified_name.rsplit(".", 1)[0] == qname
                )
                classes.append(
                    ClassInfo(
                        qualified_name=qname,
                        has_docstring=ast.get_docstring(child) is not None,
                        span=node_span(unit.file_label, child),
                        body=child,
                        methods=methods,
                    )
                )
            else:
                visit(child, prefix, in_class, in_function)

    visit(unit.syntax_root, "", in_class=False, in_function=False)
    return replace(unit, function_index=tuple(functions), class_index=tuple(classes))


def _function_info(
    file_label: str,
    node: ast.FunctionDef | ast.AsyncFunctionDef,
    prefix: str,
    in_class: bool,
    in_function: bool,
) -> FunctionInfo:
    args = node.args
    params = list(args.posonlyargs) + list(args.args) + list(args.kwonlyargs)
    return FunctionInfo(
        qualified_name=f"{prefix}.{node.name}" if prefix else node.name,
        parameter_count=len(params),
        has_docstring=ast.get_docstring(node) is not None,
        has_return_annotation=node.returns is not None,
        annotated_parameter_count=sum(1 for a in params if a.annotation is not None),
        span=node_span(file_label, node),
        body=node,
        is_method=in_class,
        nested_in_function=in_function,
    )


# ---------------------------------------------------------------------------
# Markdown code-block extraction
# ---------------------------------------------------------------------------

#: Language tags treated as candidate Python solutions by the reward stack.
CANDIDATE_LANGUAGE_TAGS = frozenset({"python", "py", ""})

_FENCE = "```"


@dataclass(frozen=True)
class CodeBlock:
    """A fenced code block found in a model completion."""

    language_tag: str
    body: str
    complete: bool
    span_in_completion: Span

    @property
    def is_candidate(self) -> bool:
        """Whether the block counts as a candidate Python solution."""
        return self.language_tag.lower() in CANDIDATE_LANGUAGE_TAGS


def extract_code_blocks(completion_text: str, file_label: str = "<completion>") -> list[CodeBlock]:
    """Extract fenced blocks in order of appearance.

    A block opens at a line starting with three backticks (remainder of the
    line is the language tag) and closes at the next line that is exactly
    three backticks. A block still open at end-of-text is returned with
    ``complete=False``. Fences never nest.
    """
    blocks: list[CodeBlock] = []
    lines = completion_text.splitlines()
    open_line: int | None = None
    tag = ""
    body_lines: list[str] = []
    for lineno, line in enumerate(lines, start=1):
        if open_line is None:
            if line.startswith(_FENCE):
                open_line = lineno
                tag = line[len(_FENCE):].strip()
                body_lines = []
        elif line.rstrip() == _FENCE:
            blocks.append(
                CodeBlock(
                    language_tag=tag,
                    body="\n".join(body_lines) + ("\n" if body_lines else ""),
                    complete=True,
                    span_in_completion=Span(file_label, open_line, 0, lineno, len(line.rstrip())),
                )
            )
            open_line = None
        else:
            body_lines.append(line)
    if open_line is not None:
        last = max(len(lines), open_line)
        blocks.append(
            CodeBlock(
                language_tag=tag,
                body="\n".join(body_lines) + ("\n" if body_lines else ""),
                complete=False,
                span_in_completion=Span(file_label, open_line, 0, last, len(lines[-1]) if lines else 0),
            )
        )
    return blocks

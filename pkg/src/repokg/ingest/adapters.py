"""Per-language parser adapters.

An adapter turns one file's content into entities (classes, functions,
methods) and symbolic relations (calls, inheritance, imports) that a later
resolution pass links across the repository. Adapters must be deterministic
and stateless; a crash on one file marks only that file as parse-failed.

Shipped adapters: a real Python adapter built on the stdlib ``ast`` module and
a line-based fallback that yields file-level information only.
"""

from __future__ import annotations

import ast
from dataclasses import dataclass, field

from ..model import NodeKind


class AdapterParseError(Exception):
    """Raised by adapters when a file cannot be parsed."""


@dataclass
class ParsedEntity:
    kind: NodeKind
    name: str
    qualified_name: str
    signature: str | None
    docstring: str | None
    raw_content: str
    line_span: tuple[int, int]
    parent: str | None = None  # qualified name of the enclosing class


@dataclass
class ImportSpec:
    module: str
    level: int = 0
    names: list[tuple[str, str]] = field(default_factory=list)  # (name, local alias)
    alias: str | None = None  # binding for plain "import a.b [as c]"


@dataclass
class ParsedFile:
    path: str
    language: str
    module_docstring: str | None = None
    entities: list[ParsedEntity] = field(default_factory=list)
    imports: list[ImportSpec] = field(default_factory=list)
    calls: list[tuple[str, tuple[str, ...]]] = field(default_factory=list)  # (src qualname, target parts)
    inherits: list[tuple[str, tuple[str, ...]]] = field(default_factory=list)

    def record(self) -> dict:
        """JSON-able form kept on the graph for incremental re-resolution."""
        return {
            "language": self.language,
            "imports": [
                {"module": i.module, "level": i.level, "names": i.names, "alias": i.alias}
                for i in self.imports
            ],
            "calls": [[src, list(parts)] for src, parts in self.calls],
            "inherits": [[src, list(parts)] for src, parts in self.inherits],
        }


class ParserAdapter:
    """Interface: ``language`` name plus a deterministic ``parse``."""

    language: str = ""

    def parse(self, content: str, path: str) -> ParsedFile:
        raise NotImplementedError


def _attr_parts(node: ast.AST) -> tuple[str, ...] | None:
    parts: list[str] = []
    cur = node
    while isinstance(cur, ast.Attribute):
        parts.append(cur.attr)
        cur = cur.value
    if isinstance(cur, ast.Name):
        parts.append(cur.id)
        return tuple(reversed(parts))
    return None


def _signature(node: ast.FunctionDef | ast.AsyncFunctionDef) -> str:
    args = ast.unparse(node.args)
    ret = f" -> {ast.unparse(node.returns)}" if node.returns else ""
    return f"({args}){ret}"


class PythonAdapter(ParserAdapter):
    language = "python"

    def parse(self, content: str, path: str) -> ParsedFile:
        try:
            tree = ast.parse(content)
        except (SyntaxError, ValueError) as exc:
            raise AdapterParseError(f"{path}: {exc}") from None
        lines = content.splitlines()
        parsed = ParsedFile(path=path, language=self.language, module_docstring=ast.get_docstring(tree))
        self._collect_imports(tree, parsed)
        for stmt in tree.body:
            if isinstance(stmt, (ast.FunctionDef, ast.AsyncFunctionDef)):
                self._add_function(stmt, parsed, lines, parent=None)
            elif isinstance(stmt, ast.ClassDef):
                self._add_class(stmt, parsed, lines, prefix="")
        return parsed

    def _collect_imports(self, tree: ast.Module, parsed: ParsedFile) -> None:
        for node in ast.walk(tree):
            if isinstance(node, ast.Import):
                for alias in node.names:
                    parsed.imports.append(
                        ImportSpec(module=alias.name, alias=alias.asname or alias.name.split(".")[0])
                    )
            elif isinstance(node, ast.ImportFrom):
                parsed.imports.append(
                    ImportSpec(
                        module=node.module or "",
                        level=node.level,
                        names=[(a.name, a.asname or a.name) for a in node.names],
                    )
                )

    def _segment(self, lines: list[str], node: ast.AST) -> tuple[str, tuple[int, int]]:
        start = node.lineno
        end = node.end_lineno or node.lineno
        if getattr(node, "decorator_list", None):
            start = min(d.lineno for d in node.decorator_list)
        return "\n".join(lines[start - 1 : end]), (start, end)

    def _add_function(self, node, parsed: ParsedFile, lines, parent: str | None) -> None:
        qual = f"{parent}.{node.name}" if parent else node.name
        raw, span = self._segment(lines, node)
        parsed.entities.append(
            ParsedEntity(
                kind=NodeKind.MEMBER_FUNCTION if parent else NodeKind.FUNCTION,
                name=node.name,
                qualified_name=qual,
                signature=_signature(node),
                docstring=ast.get_docstring(node),
                raw_content=raw,
                line_span=span,
                parent=parent,
            )
        )
        for call in ast.walk(node):
            if not isinstance(call, ast.Call):
                continue
            if isinstance(call.func, ast.Name):
                parsed.calls.append((qual, (call.func.id,)))
            elif isinstance(call.func, ast.Attribute):
                parts = _attr_parts(call.func)
                if parts:
                    parsed.calls.append((qual, parts))

    def _add_class(self, node: ast.ClassDef, parsed: ParsedFile, lines, prefix: str) -> None:
        qual = f"{prefix}.{node.name}" if prefix else node.name
        raw, span = self._segment(lines, node)
        parsed.entities.append(
            ParsedEntity(
                kind=NodeKind.CLASS,
                name=node.name,
                qualified_name=qual,
                signature=None,
                docstring=ast.get_docstring(node),
                raw_content=raw,
                line_span=span,
                parent=None,
            )
        )
        for base in node.bases:
            if isinstance(base, ast.Name):
                parsed.inherits.append((qual, (base.id,)))
            elif isinstance(base, ast.Attribute):
                parts = _attr_parts(base)
                if parts:
                    parsed.inherits.append((qual, parts))
        for stmt in node.body:
            if isinstance(stmt, (ast.FunctionDef, ast.AsyncFunctionDef)):
                self._add_function(stmt, parsed, lines, parent=qual)
            elif isinstance(stmt, ast.ClassDef):
                self._add_class(stmt, parsed, lines, prefix=qual)


class FallbackAdapter(ParserAdapter):
    """Keeps unsupported languages at file granularity: no entities, no relations."""

    language = "generic"

    def parse(self, content: str, path: str) -> ParsedFile:
        return ParsedFile(path=path, language=self.language)


DEFAULT_ADAPTERS: dict[str, ParserAdapter] = {"python": PythonAdapter()}


def adapter_for(language: str | None, adapters: dict[str, ParserAdapter] | None = None):
    table = DEFAULT_ADAPTERS if adapters is None else adapters
    if language is None:
        return None
    return table.get(language)

"""Syntactic extraction of functions, classes and metrics from Python source.

Per-function metrics are span-scoped: branch points, calls, assignments and
string constants are counted over the function's whole source span, nested
definitions included. Complexity is 1 + branch points, where branch points
are if/elif/for/while/except/and/or/ternary/match-case occurrences plus
comprehension for/if clauses, so the count agrees with a token-level scan
of the same span.
"""

from __future__ import annotations

import ast
from collections import deque

from .types import ClassInfo, FunctionInfo, ParsedFile

_FUNCTION_NODES = (ast.FunctionDef, ast.AsyncFunctionDef)
_SCOPE_NODES = _FUNCTION_NODES + (ast.ClassDef,)


def parse_file(path: str, source_text: str) -> ParsedFile:
    """Parse one Python file; syntax errors yield an empty, flagged record."""
    line_count = len(source_text.splitlines())
    try:
        tree = ast.parse(source_text)
    except (SyntaxError, ValueError):
        return ParsedFile(path=path, line_count=line_count, parse_failed=True)

    parsed = ParsedFile(
        path=path,
        module_docstring=ast.get_docstring(tree, clean=False),
        line_count=line_count,
    )
    _collect_imports(tree, parsed)
    for stmt in tree.body:
        _walk_scope(stmt, scope=[], path=path, source=source_text,
                    parsed=parsed, container=None)
    parsed.string_constants = _module_strings(tree)
    return parsed


def _docstring_node(node) -> ast.Constant | None:
    body = getattr(node, "body", [])
    if body and isinstance(body[0], ast.Expr) and \
            isinstance(body[0].value, ast.Constant) and \
            isinstance(body[0].value.value, str):
        return body[0].value
    return None


def _collect_imports(tree: ast.Module, parsed: ParsedFile) -> None:
    seen = set()
    for node in ast.walk(tree):
        targets = []
        if isinstance(node, ast.Import):
            targets = [alias.name for alias in node.names]
        elif isinstance(node, ast.ImportFrom):
            prefix = "." * node.level + (node.module or "")
            targets = [f"{prefix}.{alias.name}" if prefix else alias.name
                       for alias in node.names]
        for t in targets:
            if t not in seen:
                seen.add(t)
                parsed.imports.append(t)


def _walk_scope(stmt, scope, path, source, parsed, container) -> None:
    """Recurse over statements, attaching functions/classes to their owner."""
    if isinstance(stmt, _FUNCTION_NODES):
        info = _extract_function(stmt, scope, path, source)
        if container is not None:
            container.methods.append(info)
        else:
            parsed.functions.append(info)
        for inner in stmt.body:
            _walk_scope(inner, scope + [stmt.name], path, source, parsed,
                        container=None)
    elif isinstance(stmt, ast.ClassDef):
        info = ClassInfo(
            name=stmt.name,
            qualified_name="::".join([path] + scope + [stmt.name]),
            bases=[ast.unparse(b) for b in stmt.bases],
            docstring=ast.get_docstring(stmt, clean=False),
            decorators=[ast.unparse(d) for d in stmt.decorator_list],
        )
        parsed.classes.append(info)
        for inner in stmt.body:
            _walk_scope(inner, scope + [stmt.name], path, source, parsed,
                        container=info)
    else:
        # compound statements (if/try/with/...) can hide definitions
        for child in ast.iter_child_nodes(stmt):
            if isinstance(child, (ast.stmt, ast.ExceptHandler, ast.match_case)):
                _walk_scope(child, scope, path, source, parsed, container)


def _module_strings(tree: ast.Module) -> list[str]:
    """Module-scope string constants, excluding docstrings and def/class bodies."""
    excluded: set[int] = set()
    for node in ast.walk(tree):
        if isinstance(node, _SCOPE_NODES):
            for sub in ast.walk(node):
                excluded.add(id(sub))
    doc = _docstring_node(tree)
    if doc is not None:
        excluded.add(id(doc))
    for node in ast.walk(tree):
        if isinstance(node, ast.JoinedStr):
            excluded.update(id(v) for v in node.values)
    out = []
    for node in _dfs(tree):
        if isinstance(node, ast.Constant) and isinstance(node.value, str) \
                and id(node) not in excluded:
            out.append(node.value)
    return out


def _dfs(root):
    stack = deque([root])
    while stack:
        node = stack.popleft()
        yield node
        stack.extendleft(reversed(list(ast.iter_child_nodes(node))))


def _span_nodes(func_node):
    """DFS over the function span, excluding its own decorator list."""
    first: list[ast.AST] = []
    for fieldname, value in ast.iter_fields(func_node):
        if fieldname == "decorator_list":
            continue
        if isinstance(value, ast.AST):
            first.append(value)
        elif isinstance(value, list):
            first.extend(v for v in value if isinstance(v, ast.AST))
    stack = deque(first)
    while stack:
        node = stack.popleft()
        yield node
        stack.extendleft(reversed(list(ast.iter_child_nodes(node))))


def _extract_function(node, scope, path, source) -> FunctionInfo:
    params: list[tuple[str, str | None]] = []
    a = node.args
    for arg in list(a.posonlyargs) + list(a.args):
        params.append((arg.arg, ast.unparse(arg.annotation) if arg.annotation else None))
    if a.vararg:
        params.append((a.vararg.arg,
                       ast.unparse(a.vararg.annotation) if a.vararg.annotation else None))
    for arg in a.kwonlyargs:
        params.append((arg.arg, ast.unparse(arg.annotation) if arg.annotation else None))
    if a.kwarg:
        params.append((a.kwarg.arg,
                       ast.unparse(a.kwarg.annotation) if a.kwarg.annotation else None))

    info = FunctionInfo(
        name=node.name,
        qualified_name="::".join([path] + scope + [node.name]),
        is_async=isinstance(node, ast.AsyncFunctionDef),
        params=params,
        return_annotation=ast.unparse(node.returns) if node.returns else None,
        docstring=ast.get_docstring(node, clean=False),
        decorators=[ast.unparse(d) for d in node.decorator_list],
        start_line=node.lineno,
        end_line=node.end_lineno or node.lineno,
    )
    segment = ast.get_source_segment(source, node, padded=False)
    info.code_length = len(segment) if segment else 0

    doc_ids = {id(d) for d in _all_doc_nodes(node)}
    fstring_parts: set[int] = set()
    for child in _span_nodes(node):
        if isinstance(child, ast.JoinedStr):
            fstring_parts.update(id(v) for v in child.values)

    branch_points = 0
    strings: list[str] = []
    for child in _span_nodes(node):
        if isinstance(child, ast.If):
            branch_points += 1
            info.control_flow.append("if")
        elif isinstance(child, (ast.For, ast.AsyncFor)):
            branch_points += 1
            info.control_flow.append("for")
        elif isinstance(child, ast.While):
            branch_points += 1
            info.control_flow.append("while")
        elif isinstance(child, (ast.With, ast.AsyncWith)):
            info.control_flow.append("with")
        elif isinstance(child, ast.Match):
            info.control_flow.append("match")
        elif isinstance(child, ast.match_case):
            branch_points += 1
        elif isinstance(child, ast.ExceptHandler):
            branch_points += 1
        elif isinstance(child, ast.BoolOp):
            branch_points += len(child.values) - 1
        elif isinstance(child, ast.IfExp):
            branch_points += 1
        elif isinstance(child, ast.comprehension):
            branch_points += 1 + len(child.ifs)
        elif isinstance(child, (ast.ListComp, ast.SetComp, ast.DictComp,
                                ast.GeneratorExp)):
            info.comprehensions += 1
        elif isinstance(child, ast.Lambda):
            info.lambdas += 1
        elif isinstance(child, ast.Try):
            info.try_except_blocks += 1
        elif isinstance(child, (ast.Assign, ast.AugAssign, ast.NamedExpr)):
            info.assignments += 1
        elif isinstance(child, ast.AnnAssign):
            if child.value is not None:
                info.assignments += 1
        elif isinstance(child, ast.Call):
            name = _callee_name(child.func)
            if name:
                info.calls.append(name)
        elif isinstance(child, ast.Constant) and isinstance(child.value, str):
            if id(child) not in doc_ids and id(child) not in fstring_parts:
                strings.append(child.value)
    info.string_constants = strings
    info.complexity = 1 + branch_points
    return info


def _all_doc_nodes(root):
    for node in ast.walk(root):
        if isinstance(node, _SCOPE_NODES + (ast.Module,)):
            doc = _docstring_node(node)
            if doc is not None:
                yield doc


def _callee_name(func) -> str | None:
    if isinstance(func, ast.Name):
        return func.id
    if isinstance(func, ast.Attribute):
        return func.attr
    return None

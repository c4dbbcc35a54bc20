"""Render AST nodes back to Solidity text.

The output is normalized (canonical spacing, explicit parentheses around
compound sub-expressions) and re-parses to a structurally equal tree.
"""

from __future__ import annotations

from . import ast as A

_COMPOUND = (A.BinaryOp, A.Conditional, A.Assignment, A.UnaryOp)
INDENT = "    "


class PrintError(ValueError):
    pass


def _sub(expr) -> str:
    text = expr_text(expr)
    return f"({text})" if isinstance(expr, _COMPOUND) else text


def _args(args, names=None) -> str:
    if names is not None:
        inner = ", ".join(f"{n}: {expr_text(v)}" for n, v in zip(names, args))
        return "({" + inner + "})"
    return "(" + ", ".join(expr_text(a) for a in args) + ")"


def expr_text(expr) -> str:
    if isinstance(expr, A.Identifier):
        return expr.name
    if isinstance(expr, A.Literal):
        return f"{expr.text} {expr.unit}" if expr.unit else expr.text
    if isinstance(expr, A.TypeExpr):
        return expr.type_name.text
    if isinstance(expr, A.MemberAccess):
        return f"{_sub(expr.expr)}.{expr.member}"
    if isinstance(expr, A.IndexAccess):
        inner = "" if expr.index is None else expr_text(expr.index)
        return f"{_sub(expr.expr)}[{inner}]"
    if isinstance(expr, A.IndexRange):
        start = "" if expr.start is None else expr_text(expr.start)
        end = "" if expr.end is None else expr_text(expr.end)
        return f"{_sub(expr.expr)}[{start}:{end}]"
    if isinstance(expr, A.CallOptions):
        opts = ", ".join(f"{n}: {expr_text(v)}" for n, v in zip(expr.names, expr.values))
        return f"{_sub(expr.expr)}{{{opts}}}"
    if isinstance(expr, A.Call):
        return _sub(expr.func) + _args(expr.args, expr.arg_names)
    if isinstance(expr, A.UnaryOp):
        if expr.prefix:
            sep = " " if expr.op == "delete" else ""
            return f"{expr.op}{sep}{_sub(expr.operand)}"
        return f"{_sub(expr.operand)}{expr.op}"
    if isinstance(expr, A.BinaryOp):
        return f"{_sub(expr.left)} {expr.op} {_sub(expr.right)}"
    if isinstance(expr, A.Assignment):
        return f"{_sub(expr.target)} {expr.op} {expr_text(expr.value)}"
    if isinstance(expr, A.Conditional):
        return f"{_sub(expr.cond)} ? {_sub(expr.if_true)} : {_sub(expr.if_false)}"
    if isinstance(expr, A.TupleExpr):
        if not expr.components:
            return "()"
        parts = ["" if c is None else expr_text(c) for c in expr.components]
        if len(parts) == 1:
            return f"({parts[0]},)"
        return "(" + ", ".join(parts) + ")"
    if isinstance(expr, A.InlineArray):
        return "[" + ", ".join(expr_text(i) for i in expr.items) + "]"
    if isinstance(expr, A.NewExpr):
        return f"new {expr.type_name.text}"
    raise PrintError(f"cannot print expression {type(expr).__name__}")


def _param(p: A.Param) -> str:
    parts = [p.type_name.text]
    if p.data_location != "none":
        parts.append(p.data_location)
    if p.indexed:
        parts.append("indexed")
    if p.name:
        parts.append(p.name)
    return " ".join(parts)


def _params(params) -> str:
    return "(" + ", ".join(_param(p) for p in params) + ")"


def _local(var) -> str:
    if var is None:
        return ""
    parts = [var.type_name.text]
    if var.data_location != "none":
        parts.append(var.data_location)
    parts.append(var.name)
    return " ".join(parts)


class _Printer:
    def __init__(self) -> None:
        self.lines: list[str] = []
        self.depth = 0

    def emit(self, text: str) -> None:
        self.lines.append(INDENT * self.depth + text)

    # statements render as a header line followed by nested blocks
    def stmt_inline(self, stmt) -> str:
        """Text for statements that fit on one line (no nested blocks)."""
        if isinstance(stmt, A.ExprStmt):
            return expr_text(stmt.expr) + ";"
        if isinstance(stmt, A.VarDeclStmt):
            if stmt.is_tuple:
                head = "(" + ", ".join(_local(d) for d in stmt.decls) + ")"
            else:
                head = _local(stmt.decls[0])
            if stmt.init is not None:
                head += " = " + expr_text(stmt.init)
            return head + ";"
        if isinstance(stmt, A.ReturnStmt):
            return "return;" if stmt.value is None else f"return {expr_text(stmt.value)};"
        if isinstance(stmt, A.EmitStmt):
            return f"emit {expr_text(stmt.call)};"
        if isinstance(stmt, A.RevertStmt):
            return f"revert {expr_text(stmt.call)};"
        if isinstance(stmt, A.BreakStmt):
            return "break;"
        if isinstance(stmt, A.ContinueStmt):
            return "continue;"
        if isinstance(stmt, A.PlaceholderStmt):
            return "_;"
        return ""

    def block(self, block: A.Block, prefix: str = "", suffix: str = "") -> None:
        self.emit(prefix + "{")
        self.depth += 1
        for s in block.statements:
            self.stmt(s)
        self.depth -= 1
        self.emit("}" + suffix)

    def body(self, prefix: str, stmt) -> None:
        """Emit ``prefix`` followed by a nested statement."""
        if isinstance(stmt, A.Block):
            self.block(stmt, prefix + " ")
            return
        self.emit(prefix)
        self.depth += 1
        self.stmt(stmt)
        self.depth -= 1

    def stmt(self, stmt) -> None:
        inline = self.stmt_inline(stmt)
        if inline:
            self.emit(inline)
        elif isinstance(stmt, A.Block):
            self.block(stmt)
        elif isinstance(stmt, A.UncheckedBlock):
            self.block(stmt.block, "unchecked ")
        elif isinstance(stmt, A.IfStmt):
            self.body(f"if ({expr_text(stmt.cond)})", stmt.then)
            if stmt.orelse is not None:
                self.body("else", stmt.orelse)
        elif isinstance(stmt, A.ForStmt):
            init = self.stmt_inline(stmt.init) if stmt.init is not None else ";"
            cond = "" if stmt.cond is None else " " + expr_text(stmt.cond)
            update = "" if stmt.update is None else " " + expr_text(stmt.update)
            self.body(f"for ({init}{cond};{update})", stmt.body)
        elif isinstance(stmt, A.WhileStmt):
            self.body(f"while ({expr_text(stmt.cond)})", stmt.body)
        elif isinstance(stmt, A.DoWhileStmt):
            self.body("do", stmt.body)
            self.emit(f"while ({expr_text(stmt.cond)});")
        elif isinstance(stmt, A.TryStmt):
            head = f"try {expr_text(stmt.expr)} "
            if stmt.returns:
                head += f"returns {_params(stmt.returns)} "
            self.block(stmt.body, head)
            for clause in stmt.catches:
                head = "catch "
                if clause.kind:
                    head += clause.kind
                if clause.has_params:
                    head += _params(clause.params)
                self.block(clause.body, head.rstrip() + " ")
        elif isinstance(stmt, A.AssemblyStmt):
            flags = f" {stmt.flags}" if stmt.flags else ""
            self.emit(f"assembly{flags} {{")
            if stmt.text:
                self.lines.append(stmt.text)
            self.emit("}")
        elif isinstance(stmt, A.DegradedStmt):
            raise PrintError("cannot print a degraded statement")
        else:
            raise PrintError(f"cannot print statement {type(stmt).__name__}")

    # declarations
    def function(self, fn: A.FunctionDef) -> None:
        if fn.kind == "function":
            head = f"function {fn.name}{_params(fn.params)}"
        elif fn.kind == "modifier":
            head = f"modifier {fn.name}{_params(fn.params)}"
        else:
            head = f"{fn.kind}{_params(fn.params)}"
        attrs = []
        if fn.visibility != "default":
            attrs.append(fn.visibility)
        if fn.state_mutability:
            attrs.append(fn.state_mutability)
        if fn.is_virtual:
            attrs.append("virtual")
        if fn.overrides is not None:
            attrs.append("override" + (f"({', '.join(fn.overrides)})" if fn.overrides else ""))
        for m in fn.modifiers:
            attrs.append(m.name + ("" if m.args is None else _args(m.args)))
        if fn.returns:
            attrs.append("returns " + _params(fn.returns))
        if attrs:
            head += " " + " ".join(attrs)
        if fn.body is None:
            self.emit(head + ";")
        else:
            self.block(fn.body, head + " ")

    def state_var(self, var: A.StateVarDecl) -> None:
        parts = [var.type_name.text]
        if var.visibility != "default":
            parts.append(var.visibility)
        if var.mutability != "none":
            parts.append(var.mutability)
        if var.overrides is not None:
            parts.append("override" + (f"({', '.join(var.overrides)})" if var.overrides else ""))
        if var.transient:
            parts.append("transient")
        parts.append(var.name)
        text = " ".join(parts)
        if var.initializer is not None:
            text += " = " + expr_text(var.initializer)
        self.emit(text + ";")

    def definition(self, node) -> None:
        if isinstance(node, A.FunctionDef):
            self.function(node)
        elif isinstance(node, A.StateVarDecl):
            self.state_var(node)
        elif isinstance(node, A.StructDef):
            self.emit(f"struct {node.name} {{")
            self.depth += 1
            for f in node.fields:
                self.emit(f"{f.type_name.text} {f.name};")
            self.depth -= 1
            self.emit("}")
        elif isinstance(node, A.EnumDef):
            self.emit(f"enum {node.name} {{ {', '.join(node.members)} }}")
        elif isinstance(node, A.EventDef):
            self.emit(f"event {node.name}{_params(node.params)}{' anonymous' if node.anonymous else ''};")
        elif isinstance(node, A.ErrorDef):
            self.emit(f"error {node.name}{_params(node.params)};")
        elif isinstance(node, A.UsingFor):
            self.emit(f"using {node.library} for {node.target}{' global' if node.is_global else ''};")
        elif isinstance(node, A.UserValueType):
            self.emit(f"type {node.name} is {node.underlying.text};")
        else:
            raise PrintError(f"cannot print definition {type(node).__name__}")

    def contract(self, c: A.ContractDef) -> None:
        keyword = "abstract contract" if c.kind == "abstract-contract" else c.kind
        head = f"{keyword} {c.name}"
        if c.bases:
            bases = []
            for b in c.bases:
                bases.append(b + (_args(c.base_args[b]) if b in c.base_args else ""))
            head += " is " + ", ".join(bases)
        self.emit(head + " {")
        self.depth += 1
        for group in (c.using_for, c.user_types, c.structs, c.enums, c.events, c.errors, c.state_vars, c.functions):
            for member in group:
                self.definition(member)
        self.depth -= 1
        self.emit("}")


def pretty_print(unit: A.SourceUnit) -> str:
    """Render a diagnostic-free unit as Solidity source."""
    if unit.diagnostics:
        raise PrintError(
            f"refusing to print {unit.path or 'source unit'}: it has {len(unit.diagnostics)} parse diagnostic(s)"
        )
    p = _Printer()
    for pragma in unit.pragmas:
        p.emit(f"pragma {pragma};")
    for path in unit.imports:
        p.emit(f'import "{path}";')
    for node in unit.definitions:
        p.definition(node)
    for contract in unit.contracts:
        p.contract(contract)
    return "\n".join(p.lines) + "\n"

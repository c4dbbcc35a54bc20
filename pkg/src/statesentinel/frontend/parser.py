"""Recursive-descent parser for a pragmatic Solidity subset.

Failures inside a function body degrade the offending statement to a
:class:`DegradedStmt`; failures at member or top level skip to the next
``;`` or the matching ``}``. Every failure records a diagnostic and parsing
always returns a :class:`SourceUnit`.
"""

from __future__ import annotations

from typing import Optional

from . import ast as A
from .lexer import COMMENT, EOF, ERROR, IDENTIFIER, KEYWORD, NUMBER, STRING, Token, UNITS, is_elementary_type, tokenize

ASSIGN_OPS = frozenset({"=", "+=", "-=", "*=", "/=", "%=", "|=", "&=", "^=", "<<=", ">>=", ">>>="})
BINARY_PREC = {
    "||": 1, "&&": 2, "==": 3, "!=": 3, "<": 4, ">": 4, "<=": 4, ">=": 4,
    "|": 5, "^": 6, "&": 7, "<<": 8, ">>": 8, ">>>": 8, "+": 9, "-": 9,
    "*": 10, "/": 10, "%": 10, "**": 11,
}
PREFIX_OPS = frozenset({"!", "~", "-", "+", "++", "--", "delete"})
DATA_LOCATIONS = frozenset({"memory", "storage", "calldata"})
VISIBILITIES = frozenset({"public", "private", "internal", "external"})
_OPEN = {"(": ")", "[": "]", "{": "}"}


class ParseError(Exception):
    def __init__(self, message: str, token: Token):
        super().__init__(message)
        self.message = message
        self.token = token


def _reconstruct(tokens: list[Token]) -> str:
    parts: list[str] = []
    prev: Optional[Token] = None
    for tok in tokens:
        if prev is not None and tok.offset > prev.end:
            parts.append("\n" if tok.line > prev.line + prev.text.count("\n") else " ")
        parts.append(tok.text)
        prev = tok
    return "".join(parts)


class Parser:
    def __init__(self, tokens: list[Token], path: str = ""):
        self.path = path
        self.comments = [A.Comment(t.line, t.text) for t in tokens if t.kind == COMMENT]
        self.lex_errors = [t for t in tokens if t.kind == ERROR]
        self.toks = [t for t in tokens if t.kind != COMMENT]
        if not self.toks or self.toks[-1].kind != EOF:
            last = self.toks[-1] if self.toks else None
            self.toks.append(Token(EOF, "", last.line if last else 1, last.column if last else 1, last.end if last else 0))
        self.pos = 0
        self.diagnostics: list[A.Diagnostic] = []
        self._contract_name = ""

    # -- token helpers ------------------------------------------------------

    def peek(self, ahead: int = 0) -> Token:
        i = self.pos + ahead
        return self.toks[i] if i < len(self.toks) else self.toks[-1]

    def at(self, text: str) -> bool:
        tok = self.toks[self.pos]
        return tok.text == text and tok.kind not in (STRING, ERROR)

    def advance(self) -> Token:
        tok = self.toks[self.pos]
        if tok.kind != EOF:
            self.pos += 1
        return tok

    def accept(self, text: str) -> bool:
        if self.at(text):
            self.pos += 1
            return True
        return False

    def fail(self, expected: str) -> ParseError:
        tok = self.peek()
        if tok.kind == ERROR:
            return ParseError(tok.message, tok)
        found = "end of input" if tok.kind == EOF else repr(tok.text)
        return ParseError(f"expected {expected}, found {found}", tok)

    def expect(self, text: str) -> Token:
        if not self.at(text):
            raise self.fail(repr(text))
        return self.advance()

    def ident(self) -> Token:
        tok = self.peek()
        if tok.kind != IDENTIFIER:
            raise self.fail("identifier")
        return self.advance()

    def loc(self, tok: Optional[Token] = None) -> A.Loc:
        tok = tok or self.peek()
        return A.Loc(tok.line, tok.column)

    def diag(self, err: ParseError) -> None:
        self.diagnostics.append(A.Diagnostic(err.message, err.token.line, err.token.column))

    def skip_construct(self) -> None:
        """Skip to just past the next depth-0 ``;`` or balanced ``}``."""
        depth = 0
        while True:
            tok = self.peek()
            if tok.kind == EOF:
                return
            if tok.kind in (STRING, ERROR):
                self.advance()
                continue
            t = tok.text
            if t in _OPEN:
                depth += 1
            elif t in (")", "]", "}"):
                if depth == 0:
                    if t == "}":
                        return
                    self.advance()
                    continue
                depth -= 1
                if depth == 0 and t == "}":
                    self.advance()
                    return
            elif t == ";" and depth == 0:
                self.advance()
                return
            self.advance()

    # -- source unit --------------------------------------------------------

    def parse_source_unit(self) -> A.SourceUnit:
        unit = A.SourceUnit(path=self.path)
        names: set[str] = set()
        while self.peek().kind != EOF:
            start = self.pos
            try:
                self._top_level(unit, names)
            except (ParseError, RecursionError) as exc:
                err = exc if isinstance(exc, ParseError) else ParseError("nesting too deep", self.peek())
                self.diag(err)
                self.pos = start
                self.skip_construct()
                if self.pos == start:
                    self.advance()
        seen = {(d.line, d.column) for d in self.diagnostics}
        for tok in self.lex_errors:
            if (tok.line, tok.column) not in seen:
                self.diagnostics.append(A.Diagnostic(tok.message, tok.line, tok.column))
        unit.diagnostics = sorted(self.diagnostics, key=lambda d: (d.line, d.column, d.message))
        unit.comments = self.comments
        return unit

    def _top_level(self, unit: A.SourceUnit, names: set[str]) -> None:
        tok = self.peek()
        t = tok.text
        if t == "pragma" and tok.kind == KEYWORD:
            self.advance()
            body = []
            while not self.at(";"):
                if self.peek().kind == EOF:
                    raise self.fail("';'")
                body.append(self.advance())
            self.advance()
            unit.pragmas.append(_reconstruct(body))
        elif t == "import" and tok.kind == KEYWORD:
            self.advance()
            path = None
            while not self.at(";"):
                cur = self.peek()
                if cur.kind == EOF:
                    raise self.fail("';'")
                if cur.kind == STRING and path is None:
                    path = cur.text[1:-1]
                self.advance()
            self.advance()
            if path is None:
                raise ParseError("import without a path", tok)
            unit.imports.append(path)
        elif t in ("contract", "interface", "library", "abstract") and tok.kind == KEYWORD:
            contract = self.parse_contract()
            if contract.name in names:
                self.diagnostics.append(A.Diagnostic(f"duplicate contract name {contract.name!r}", contract.loc.line, contract.loc.column))
            else:
                names.add(contract.name)
                unit.contracts.append(contract)
        elif t == ";":
            self.advance()
        else:
            unit.definitions.append(self.parse_member(None))

    # -- contracts ----------------------------------------------------------

    def parse_contract(self) -> A.ContractDef:
        start = self.peek()
        kind = "contract"
        if self.accept("abstract"):
            kind = "abstract-contract"
            self.expect("contract")
        else:
            word = self.advance().text
            kind = word
        name = self.ident().text
        contract = A.ContractDef(name=name, kind=kind, loc=self.loc(start), path=self.path)
        if self.accept("is"):
            while True:
                base = self.parse_path()
                contract.bases.append(base)
                if self.at("("):
                    contract.base_args[base] = self.parse_call_args()[0]
                if not self.accept(","):
                    break
        self.expect("{")
        prev_name, self._contract_name = self._contract_name, name
        try:
            while not self.at("}"):
                if self.peek().kind == EOF:
                    self.diag(self.fail("'}'"))
                    return contract
                mstart = self.pos
                try:
                    member = self.parse_member(contract)
                except (ParseError, RecursionError) as exc:
                    err = exc if isinstance(exc, ParseError) else ParseError("nesting too deep", self.peek())
                    self.diag(err)
                    self.pos = mstart
                    self.skip_construct()
                    if self.pos == mstart:
                        self.advance()
                    continue
                self._add_member(contract, member)
            self.advance()
        finally:
            self._contract_name = prev_name
        return contract

    def _add_member(self, contract: A.ContractDef, member) -> None:
        if isinstance(member, A.StateVarDecl):
            if contract.kind == "interface":
                self.diagnostics.append(A.Diagnostic("interfaces cannot declare state variables", member.loc.line, member.loc.column))
            else:
                contract.state_vars.append(member)
        elif isinstance(member, A.FunctionDef):
            contract.functions.append(member)
        elif isinstance(member, A.StructDef):
            contract.structs.append(member)
        elif isinstance(member, A.EnumDef):
            contract.enums.append(member)
        elif isinstance(member, A.EventDef):
            contract.events.append(member)
        elif isinstance(member, A.ErrorDef):
            contract.errors.append(member)
        elif isinstance(member, A.UsingFor):
            contract.using_for.append(member)
        elif isinstance(member, A.UserValueType):
            contract.user_types.append(member)

    def parse_path(self) -> str:
        parts = [self.ident().text]
        while self.at(".") and self.peek(1).kind == IDENTIFIER:
            self.advance()
            parts.append(self.advance().text)
        return ".".join(parts)

    def parse_member(self, contract: Optional[A.ContractDef]):
        tok = self.peek()
        t = tok.text
        if tok.kind == KEYWORD:
            if t == "function":
                return self.parse_function("function")
            if t in ("constructor", "modifier"):
                return self.parse_function(t)
            if t == "event":
                return self.parse_event()
            if t == "struct":
                return self.parse_struct()
            if t == "enum":
                return self.parse_enum()
            if t == "using":
                return self.parse_using()
            if t == "type" and self.peek(1).kind == IDENTIFIER and self.peek(2).text == "is":
                self.advance()
                name = self.advance().text
                self.advance()
                underlying = self.parse_type()
                self.expect(";")
                return A.UserValueType(name, underlying, loc=self.loc(tok))
        elif tok.kind == IDENTIFIER:
            if t in ("receive", "fallback") and self.peek(1).text == "(":
                return self.parse_function(t)
            if t == "error" and self.peek(1).kind == IDENTIFIER and self.peek(2).text == "(":
                self.advance()
                name = self.advance().text
                params = self.parse_params()
                self.expect(";")
                return A.ErrorDef(name, params, loc=self.loc(tok))
        return self.parse_state_var()

    def parse_state_var(self) -> A.StateVarDecl:
        start = self.peek()
        type_name = self.parse_type()
        decl = A.StateVarDecl(type_name=type_name, name="", loc=self.loc(start))
        while True:
            tok = self.peek()
            t = tok.text
            if tok.kind == KEYWORD and t in VISIBILITIES:
                decl.visibility = self.advance().text
            elif tok.kind == KEYWORD and t in ("constant", "immutable"):
                decl.mutability = self.advance().text
            elif tok.kind == KEYWORD and t == "override":
                decl.overrides = self.parse_override()
            elif tok.kind == IDENTIFIER and t == "transient" and self.peek(1).kind == IDENTIFIER:
                self.advance()
                decl.transient = True
            else:
                break
        name_tok = self.ident()
        decl.name = name_tok.text
        decl.loc = self.loc(name_tok)
        if self.accept("="):
            decl.initializer = self.parse_expression()
        self.expect(";")
        if decl.mutability == "constant" and decl.initializer is None:
            raise ParseError("constant variable requires an initializer", name_tok)
        return decl

    def parse_override(self) -> list[str]:
        self.expect("override")
        names: list[str] = []
        if self.accept("("):
            while not self.at(")"):
                names.append(self.parse_path())
                if not self.accept(","):
                    break
            self.expect(")")
        return names

    def parse_function(self, kind: str) -> A.FunctionDef:
        start = self.advance()
        name = ""
        if kind == "function":
            if self.peek().kind == IDENTIFIER:
                name = self.advance().text
            if not name:
                kind = "fallback"
            elif name == self._contract_name and self._contract_name:
                kind, name = "constructor", ""
        elif kind == "modifier":
            name = self.ident().text
        fn = A.FunctionDef(name=name, kind=kind, params=[], loc=self.loc(start))
        if kind != "modifier" or self.at("("):
            fn.params = self.parse_params()
        while True:
            tok = self.peek()
            t = tok.text
            if tok.kind == KEYWORD and t in VISIBILITIES:
                fn.visibility = self.advance().text
            elif tok.kind == KEYWORD and t in ("pure", "view", "payable", "constant"):
                fn.state_mutability = self.advance().text
            elif tok.kind == KEYWORD and t == "virtual":
                self.advance()
                fn.is_virtual = True
            elif tok.kind == KEYWORD and t == "override":
                fn.overrides = self.parse_override()
            elif tok.kind == IDENTIFIER:
                mstart = tok
                mname = self.parse_path()
                args = self.parse_call_args()[0] if self.at("(") else None
                fn.modifiers.append(A.ModifierInvocation(mname, args, loc=self.loc(mstart)))
            else:
                break
        if self.accept("returns"):
            fn.returns = self.parse_params()
        if self.accept(";"):
            return fn
        fn.body = self.parse_block()
        return fn

    def parse_params(self) -> list[A.Param]:
        self.expect("(")
        params: list[A.Param] = []
        while not self.at(")"):
            start = self.peek()
            type_name = self.parse_type()
            param = A.Param(type_name=type_name, loc=self.loc(start))
            while True:
                tok = self.peek()
                if tok.kind == KEYWORD and tok.text in DATA_LOCATIONS:
                    param.data_location = self.advance().text
                elif tok.kind == KEYWORD and tok.text == "indexed":
                    self.advance()
                    param.indexed = True
                else:
                    break
            if self.peek().kind == IDENTIFIER:
                param.name = self.advance().text
            params.append(param)
            if not self.accept(","):
                break
        self.expect(")")
        return params

    def parse_event(self) -> A.EventDef:
        start = self.advance()
        name = self.ident().text
        params = self.parse_params()
        anonymous = self.accept("anonymous")
        self.expect(";")
        return A.EventDef(name, params, anonymous, loc=self.loc(start))

    def parse_struct(self) -> A.StructDef:
        start = self.advance()
        name = self.ident().text
        self.expect("{")
        fields: list[A.Param] = []
        while not self.at("}"):
            ftok = self.peek()
            type_name = self.parse_type()
            fname = self.ident().text
            self.expect(";")
            fields.append(A.Param(type_name=type_name, name=fname, loc=self.loc(ftok)))
        self.advance()
        return A.StructDef(name, fields, loc=self.loc(start))

    def parse_enum(self) -> A.EnumDef:
        start = self.advance()
        name = self.ident().text
        self.expect("{")
        members: list[str] = []
        while not self.at("}"):
            members.append(self.ident().text)
            if not self.accept(","):
                break
        self.expect("}")
        return A.EnumDef(name, members, loc=self.loc(start))

    def parse_using(self) -> A.UsingFor:
        start = self.advance()
        if self.at("{"):
            body = []
            while not self.at("}"):
                if self.peek().kind == EOF:
                    raise self.fail("'}'")
                body.append(self.advance().text)
            self.advance()
            library = "{" + " ".join(body).replace(" ,", ",") + "}"
        else:
            library = self.parse_path()
        self.expect("for")
        if self.accept("*"):
            target = "*"
        else:
            target = self.parse_type().text
        is_global = False
        if self.peek().kind == IDENTIFIER and self.peek().text == "global":
            self.advance()
            is_global = True
        self.expect(";")
        return A.UsingFor(library, target, is_global, loc=self.loc(start))

    # -- types --------------------------------------------------------------

    def parse_type(self) -> A.TypeName:
        tok = self.peek()
        start = self.loc(tok)
        if tok.kind == KEYWORD and tok.text == "mapping":
            self.advance()
            self.expect("(")
            key = self.parse_type()
            key_name = self.advance().text if self.peek().kind == IDENTIFIER else ""
            self.expect("=>")
            value = self.parse_type()
            value_name = self.advance().text if self.peek().kind == IDENTIFIER else ""
            self.expect(")")
            result: A.TypeName = A.MappingType(key, value, key_name, value_name, loc=start)
        elif tok.kind == KEYWORD and tok.text == "function":
            result = self.parse_function_type()
        elif tok.kind == KEYWORD and is_elementary_type(tok.text):
            self.advance()
            payable = False
            if tok.text == "address" and self.at("payable"):
                self.advance()
                payable = True
            result = A.ElementaryType(tok.text, payable, loc=start)
        elif tok.kind == IDENTIFIER:
            result = A.UserType(self.parse_path(), loc=start)
        else:
            raise self.fail("type name")
        while self.at("["):
            self.advance()
            length = None if self.at("]") else self.parse_expression()
            self.expect("]")
            result = A.ArrayType(result, length, loc=start)
        return result

    def parse_function_type(self) -> A.FunctionType:
        start = self.advance()
        params = self.parse_params()
        parts = ["function(" + ", ".join(p.type_name.text for p in params) + ")"]
        while self.peek().kind == KEYWORD and self.peek().text in VISIBILITIES | {"pure", "view", "payable"}:
            parts.append(self.advance().text)
        if self.accept("returns"):
            rets = self.parse_params()
            parts.append("returns (" + ", ".join(p.type_name.text for p in rets) + ")")
        return A.FunctionType(" ".join(parts), loc=self.loc(start))

    # -- statements ---------------------------------------------------------

    def parse_block(self) -> A.Block:
        start = self.expect("{")
        stmts: list = []
        while not self.at("}"):
            if self.peek().kind == EOF:
                raise self.fail("'}'")
            stmts.append(self.parse_statement())
        self.advance()
        return A.Block(stmts, loc=self.loc(start))

    def parse_statement(self):
        start = self.pos
        try:
            return self._statement()
        except (ParseError, RecursionError) as exc:
            err = exc if isinstance(exc, ParseError) else ParseError("nesting too deep", self.toks[start])
            if err.token.kind == EOF and self.peek().kind == EOF:
                raise err
            self.diag(err)
            self.pos = start
            self.skip_construct()
            if self.pos == start:
                self.advance()
            tok = self.toks[start]
            return A.DegradedStmt(_reconstruct(self.toks[start:self.pos]), loc=self.loc(tok))

    def _statement(self):
        tok = self.peek()
        t = tok.text
        loc = self.loc(tok)
        if tok.kind == KEYWORD:
            if t == "if":
                self.advance()
                self.expect("(")
                cond = self.parse_expression()
                self.expect(")")
                then = self.parse_statement()
                orelse = self.parse_statement() if self.accept("else") else None
                return A.IfStmt(cond, then, orelse, loc=loc)
            if t == "for":
                self.advance()
                self.expect("(")
                init = None
                if not self.accept(";"):
                    init = self.parse_simple_statement()
                cond = None if self.at(";") else self.parse_expression()
                self.expect(";")
                update = None if self.at(")") else self.parse_expression()
                self.expect(")")
                body = self.parse_statement()
                return A.ForStmt(init, cond, update, body, loc=loc)
            if t == "while":
                self.advance()
                self.expect("(")
                cond = self.parse_expression()
                self.expect(")")
                return A.WhileStmt(cond, self.parse_statement(), loc=loc)
            if t == "do":
                self.advance()
                body = self.parse_statement()
                self.expect("while")
                self.expect("(")
                cond = self.parse_expression()
                self.expect(")")
                self.expect(";")
                return A.DoWhileStmt(body, cond, loc=loc)
            if t == "return":
                self.advance()
                value = None if self.at(";") else self.parse_expression()
                self.expect(";")
                return A.ReturnStmt(value, loc=loc)
            if t == "emit":
                self.advance()
                call = self.parse_expression()
                if not isinstance(call, A.Call):
                    raise ParseError("emit requires an event call", tok)
                self.expect(";")
                return A.EmitStmt(call, loc=loc)
            if t == "break":
                self.advance()
                self.expect(";")
                return A.BreakStmt(loc=loc)
            if t == "continue":
                self.advance()
                self.expect(";")
                return A.ContinueStmt(loc=loc)
            if t == "unchecked":
                self.advance()
                return A.UncheckedBlock(self.parse_block(), loc=loc)
            if t == "try":
                return self.parse_try()
            if t == "assembly":
                return self.parse_assembly()
        elif t == "{" and tok.kind != STRING:
            return self.parse_block()
        elif tok.kind == IDENTIFIER:
            if t == "revert" and self.peek(1).kind == IDENTIFIER:
                self.advance()
                call = self.parse_expression()
                if not isinstance(call, A.Call):
                    raise ParseError("revert requires an error call", tok)
                self.expect(";")
                return A.RevertStmt(call, loc=loc)
            if t == "_" and self.peek(1).text == ";":
                self.advance()
                self.advance()
                return A.PlaceholderStmt(loc=loc)
        stmt = self.parse_simple_statement()
        return stmt

    def parse_simple_statement(self):
        """Declaration or expression statement, consuming the trailing ``;``."""
        start = self.peek()
        decl = self.try_declaration()
        if decl is not None:
            self.expect(";")
            return decl
        expr = self.parse_expression()
        self.expect(";")
        return A.ExprStmt(expr, loc=self.loc(start))

    def try_declaration(self) -> Optional[A.VarDeclStmt]:
        start = self.pos
        start_tok = self.peek()
        if self.at("("):
            result = self._try_tuple_declaration()
            if result is None:
                self.pos = start
            return result
        try:
            var = self._local_var()
        except ParseError:
            self.pos = start
            return None
        if var is None or not (self.at("=") or self.at(";")):
            self.pos = start
            return None
        init = self.parse_expression() if self.accept("=") else None
        return A.VarDeclStmt([var], init, False, loc=self.loc(start_tok))

    def _local_var(self) -> Optional[A.LocalVar]:
        tok = self.peek()
        if tok.kind not in (IDENTIFIER, KEYWORD):
            return None
        if tok.kind == KEYWORD and not (is_elementary_type(tok.text) or tok.text in ("mapping", "function")):
            return None
        type_name = self.parse_type()
        location = "none"
        if self.peek().kind == KEYWORD and self.peek().text in DATA_LOCATIONS:
            location = self.advance().text
        name_tok = self.peek()
        if name_tok.kind != IDENTIFIER:
            return None
        self.advance()
        return A.LocalVar(type_name, name_tok.text, location, loc=self.loc(name_tok))

    def _try_tuple_declaration(self) -> Optional[A.VarDeclStmt]:
        start_tok = self.advance()
        decls: list[Optional[A.LocalVar]] = []
        try:
            while True:
                if self.at(",") or self.at(")"):
                    decls.append(None)
                else:
                    var = self._local_var()
                    if var is None:
                        return None
                    decls.append(var)
                if self.accept(","):
                    continue
                break
            if not self.accept(")") or not self.at("="):
                return None
        except ParseError:
            return None
        if not any(decls):
            return None
        self.advance()
        init = self.parse_expression()
        return A.VarDeclStmt(decls, init, True, loc=self.loc(start_tok))

    def parse_try(self) -> A.TryStmt:
        start = self.advance()
        expr = self.parse_expression()
        returns: list[A.Param] = []
        if self.accept("returns"):
            returns = self.parse_params()
        body = self.parse_block()
        catches: list[A.CatchClause] = []
        while self.at("catch"):
            ctok = self.advance()
            kind = ""
            if self.peek().kind == IDENTIFIER:
                kind = self.advance().text
            has_params = self.at("(")
            params = self.parse_params() if has_params else []
            catches.append(A.CatchClause(kind, params, self.parse_block(), has_params, loc=self.loc(ctok)))
        if not catches:
            raise self.fail("'catch'")
        return A.TryStmt(expr, returns, body, catches, loc=self.loc(start))

    def parse_assembly(self) -> A.AssemblyStmt:
        start = self.advance()
        flags: list[Token] = []
        while not self.at("{"):
            if self.peek().kind == EOF:
                raise self.fail("'{'")
            flags.append(self.advance())
        self.advance()
        depth = 1
        body_start = self.pos
        while True:
            tok = self.peek()
            if tok.kind == EOF:
                raise self.fail("'}'")
            if tok.kind not in (STRING, ERROR):
                if tok.text == "{":
                    depth += 1
                elif tok.text == "}":
                    depth -= 1
                    if depth == 0:
                        break
            self.advance()
        text = _reconstruct(self.toks[body_start:self.pos])
        self.advance()
        return A.AssemblyStmt(text, _reconstruct(flags), loc=self.loc(start))

    # -- expressions --------------------------------------------------------

    def parse_expression(self):
        left = self.parse_conditional()
        tok = self.peek()
        if tok.text in ASSIGN_OPS and tok.kind not in (STRING, ERROR):
            self.advance()
            value = self.parse_expression()
            return A.Assignment(tok.text, left, value, loc=left.loc)
        return left

    def parse_conditional(self):
        cond = self.parse_binary(1)
        if self.at("?"):
            self.advance()
            if_true = self.parse_expression()
            self.expect(":")
            if_false = self.parse_expression()
            return A.Conditional(cond, if_true, if_false, loc=cond.loc)
        return cond

    def parse_binary(self, min_prec: int):
        left = self.parse_unary()
        while True:
            tok = self.peek()
            prec = BINARY_PREC.get(tok.text)
            if prec is None or prec < min_prec or tok.kind in (STRING, ERROR):
                return left
            self.advance()
            right = self.parse_binary(prec if tok.text == "**" else prec + 1)
            left = A.BinaryOp(tok.text, left, right, loc=left.loc)

    def parse_unary(self):
        tok = self.peek()
        if tok.text in PREFIX_OPS and tok.kind not in (STRING, ERROR):
            self.advance()
            operand = self.parse_unary()
            return A.UnaryOp(tok.text, operand, True, loc=self.loc(tok))
        return self.parse_postfix()

    def parse_postfix(self):
        expr = self.parse_primary()
        while True:
            tok = self.peek()
            t = tok.text
            if tok.kind in (STRING, ERROR, NUMBER):
                return expr
            if t == ".":
                self.advance()
                member = self.peek()
                if member.kind not in (IDENTIFIER, KEYWORD):
                    raise self.fail("member name")
                self.advance()
                expr = A.MemberAccess(expr, member.text, loc=expr.loc)
            elif t == "[":
                self.advance()
                start = None if self.at(":") or self.at("]") else self.parse_expression()
                if self.accept(":"):
                    end = None if self.at("]") else self.parse_expression()
                    self.expect("]")
                    expr = A.IndexRange(expr, start, end, loc=expr.loc)
                else:
                    self.expect("]")
                    expr = A.IndexAccess(expr, start, loc=expr.loc)
            elif t == "(":
                args, names = self.parse_call_args()
                expr = A.Call(expr, args, names, loc=expr.loc)
            elif t == "{" and self.peek(1).kind == IDENTIFIER and self.peek(2).text == ":":
                self.advance()
                names: list[str] = []
                values: list = []
                while not self.at("}"):
                    names.append(self.ident().text)
                    self.expect(":")
                    values.append(self.parse_expression())
                    if not self.accept(","):
                        break
                self.expect("}")
                expr = A.CallOptions(expr, names, values, loc=expr.loc)
            elif t in ("++", "--"):
                self.advance()
                expr = A.UnaryOp(t, expr, False, loc=expr.loc)
            else:
                return expr

    def parse_call_args(self) -> tuple[list, Optional[list[str]]]:
        self.expect("(")
        if self.at("{") and (self.peek(1).text == "}" or (self.peek(1).kind == IDENTIFIER and self.peek(2).text == ":")):
            self.advance()
            names: list[str] = []
            args: list = []
            while not self.at("}"):
                names.append(self.ident().text)
                self.expect(":")
                args.append(self.parse_expression())
                if not self.accept(","):
                    break
            self.expect("}")
            self.expect(")")
            return args, names
        args = []
        while not self.at(")"):
            args.append(self.parse_expression())
            if not self.accept(","):
                break
        self.expect(")")
        return args, None

    def parse_primary(self):
        tok = self.peek()
        kind = tok.kind
        t = tok.text
        loc = self.loc(tok)
        if kind == NUMBER:
            self.advance()
            unit = ""
            nxt = self.peek()
            if nxt.kind == KEYWORD and nxt.text in UNITS:
                unit = self.advance().text
            return A.Literal("number", t, unit, loc=loc)
        if kind == STRING:
            parts = [self.advance().text]
            while self.peek().kind == STRING:
                parts.append(self.advance().text)
            lit_kind = "hex" if t.startswith("hex") else "string"
            return A.Literal(lit_kind, " ".join(parts), loc=loc)
        if kind == IDENTIFIER:
            self.advance()
            return A.Identifier(t, loc=loc)
        if kind == KEYWORD:
            if t in ("true", "false"):
                self.advance()
                return A.Literal("bool", t, loc=loc)
            if t in ("payable", "type"):
                self.advance()
                return A.Identifier(t, loc=loc)
            if t == "new":
                self.advance()
                return A.NewExpr(self.parse_type(), loc=loc)
            if is_elementary_type(t):
                self.advance()
                payable = False
                if t == "address" and self.at("payable"):
                    self.advance()
                    payable = True
                return A.TypeExpr(A.ElementaryType(t, payable, loc=loc), loc=loc)
            if t == "mapping":
                return A.TypeExpr(self.parse_type(), loc=loc)
        if t == "(" and kind != ERROR:
            self.advance()
            components: list = []
            had_comma = False
            while True:
                if self.at(",") or self.at(")"):
                    components.append(None)
                else:
                    components.append(self.parse_expression())
                if self.accept(","):
                    had_comma = True
                    continue
                break
            self.expect(")")
            if not had_comma:
                if components[0] is None:
                    return A.TupleExpr([], loc=loc)
                return components[0]
            return A.TupleExpr(components, loc=loc)
        if t == "[" and kind != ERROR:
            self.advance()
            items: list = []
            while not self.at("]"):
                items.append(self.parse_expression())
                if not self.accept(","):
                    break
            self.expect("]")
            return A.InlineArray(items, loc=loc)
        raise self.fail("expression")


def parse_source_unit(tokens: list[Token], path: str = "") -> A.SourceUnit:
    return Parser(tokens, path).parse_source_unit()


def parse(source: str, path: str = "") -> A.SourceUnit:
    """Tokenize and parse one file."""
    return parse_source_unit(tokenize(source), path)

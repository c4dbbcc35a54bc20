"""AST node types for the supported Solidity subset.

Equality on nodes is structural: source locations, paths, comments and
diagnostics are excluded from comparison.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Union


@dataclass(frozen=True)
class Loc:
    line: int = 0
    column: int = 0


NO_LOC = Loc()


@dataclass
class Node:
    loc: Loc = field(default=NO_LOC, compare=False, repr=False, kw_only=True)


# -- type names -------------------------------------------------------------


@dataclass
class ElementaryType(Node):
    name: str
    payable: bool = False

    @property
    def text(self) -> str:
        return "address payable" if self.payable else self.name


@dataclass
class UserType(Node):
    path: str

    @property
    def text(self) -> str:
        return self.path


@dataclass
class MappingType(Node):
    key: "TypeName"
    value: "TypeName"
    key_name: str = ""
    value_name: str = ""

    @property
    def text(self) -> str:
        key = self.key.text + (f" {self.key_name}" if self.key_name else "")
        value = self.value.text + (f" {self.value_name}" if self.value_name else "")
        return f"mapping({key} => {value})"


@dataclass
class ArrayType(Node):
    base: "TypeName"
    length: Optional["Expr"] = None

    @property
    def text(self) -> str:
        from .printer import expr_text

        inner = expr_text(self.length) if self.length is not None else ""
        return f"{self.base.text}[{inner}]"


@dataclass
class FunctionType(Node):
    """Function-typed values (kept as normalized header text)."""

    signature: str

    @property
    def text(self) -> str:
        return self.signature


TypeName = Union[ElementaryType, UserType, MappingType, ArrayType, FunctionType]


# -- expressions ------------------------------------------------------------


@dataclass
class Identifier(Node):
    name: str


@dataclass
class Literal(Node):
    kind: str  # number | string | bool | hex
    text: str
    unit: str = ""


@dataclass
class TypeExpr(Node):
    """A type name used in expression position, e.g. ``uint256(x)``."""

    type_name: TypeName


@dataclass
class MemberAccess(Node):
    expr: "Expr"
    member: str


@dataclass
class IndexAccess(Node):
    expr: "Expr"
    index: Optional["Expr"]


@dataclass
class IndexRange(Node):
    expr: "Expr"
    start: Optional["Expr"]
    end: Optional["Expr"]


@dataclass
class CallOptions(Node):
    expr: "Expr"
    names: list[str]
    values: list["Expr"]


@dataclass
class Call(Node):
    func: "Expr"
    args: list["Expr"]
    arg_names: Optional[list[str]] = None


@dataclass
class UnaryOp(Node):
    op: str
    operand: "Expr"
    prefix: bool = True


@dataclass
class BinaryOp(Node):
    op: str
    left: "Expr"
    right: "Expr"


@dataclass
class Assignment(Node):
    op: str
    target: "Expr"
    value: "Expr"


@dataclass
class Conditional(Node):
    cond: "Expr"
    if_true: "Expr"
    if_false: "Expr"


@dataclass
class TupleExpr(Node):
    components: list[Optional["Expr"]]


@dataclass
class InlineArray(Node):
    items: list["Expr"]


@dataclass
class NewExpr(Node):
    type_name: TypeName


Expr = Union[
    Identifier, Literal, TypeExpr, MemberAccess, IndexAccess, IndexRange, CallOptions, Call,
    UnaryOp, BinaryOp, Assignment, Conditional, TupleExpr, InlineArray, NewExpr,
]


# -- statements -------------------------------------------------------------


@dataclass
class LocalVar(Node):
    type_name: TypeName
    name: str
    data_location: str = "none"


@dataclass
class Block(Node):
    statements: list["Stmt"]


@dataclass
class UncheckedBlock(Node):
    block: Block


@dataclass
class ExprStmt(Node):
    expr: Expr


@dataclass
class VarDeclStmt(Node):
    decls: list[Optional[LocalVar]]
    init: Optional[Expr] = None
    is_tuple: bool = False


@dataclass
class IfStmt(Node):
    cond: Expr
    then: "Stmt"
    orelse: Optional["Stmt"] = None


@dataclass
class ForStmt(Node):
    init: Optional["Stmt"]
    cond: Optional[Expr]
    update: Optional[Expr]
    body: "Stmt"


@dataclass
class WhileStmt(Node):
    cond: Expr
    body: "Stmt"


@dataclass
class DoWhileStmt(Node):
    body: "Stmt"
    cond: Expr


@dataclass
class ReturnStmt(Node):
    value: Optional[Expr] = None


@dataclass
class EmitStmt(Node):
    call: Expr


@dataclass
class RevertStmt(Node):
    call: Expr


@dataclass
class BreakStmt(Node):
    pass


@dataclass
class ContinueStmt(Node):
    pass


@dataclass
class PlaceholderStmt(Node):
    pass


@dataclass
class CatchClause(Node):
    kind: str  # "" | "Error" | "Panic" | other identifier
    params: list["Param"]
    body: Block
    has_params: bool = False


@dataclass
class TryStmt(Node):
    expr: Expr
    returns: list["Param"]
    body: Block
    catches: list[CatchClause]


@dataclass
class AssemblyStmt(Node):
    """Inline assembly kept as opaque text."""

    text: str
    flags: str = ""

    @property
    def has_sstore(self) -> bool:
        import re

        return re.search(r"\bsstore\b", self.text) is not None


@dataclass
class DegradedStmt(Node):
    """A statement the parser could not understand; raw text is retained."""

    text: str
    degraded: bool = True


Stmt = Union[
    Block, UncheckedBlock, ExprStmt, VarDeclStmt, IfStmt, ForStmt, WhileStmt, DoWhileStmt,
    ReturnStmt, EmitStmt, RevertStmt, BreakStmt, ContinueStmt, PlaceholderStmt, TryStmt,
    AssemblyStmt, DegradedStmt,
]


# -- declarations -----------------------------------------------------------


@dataclass
class Param(Node):
    type_name: TypeName
    name: str = ""
    data_location: str = "none"
    indexed: bool = False


@dataclass
class ModifierInvocation(Node):
    name: str
    args: Optional[list[Expr]] = None


@dataclass
class StateVarDecl(Node):
    type_name: TypeName
    name: str
    visibility: str = "default"
    mutability: str = "none"
    initializer: Optional[Expr] = None
    overrides: Optional[list[str]] = None
    transient: bool = False

    @property
    def declared_type(self) -> str:
        return self.type_name.text

    @property
    def has_initializer(self) -> bool:
        return self.initializer is not None


@dataclass
class FunctionDef(Node):
    name: str
    kind: str  # function | constructor | modifier | receive | fallback
    params: list[Param]
    returns: list[Param] = field(default_factory=list)
    visibility: str = "default"
    state_mutability: str = ""
    modifiers: list[ModifierInvocation] = field(default_factory=list)
    is_virtual: bool = False
    overrides: Optional[list[str]] = None
    body: Optional[Block] = None

    @property
    def signature(self) -> str:
        types = ",".join(p.type_name.text for p in self.params)
        if self.kind == "function":
            return f"{self.name}({types})"
        if self.kind == "modifier":
            return f"modifier {self.name}({types})"
        return f"{self.kind}({types})"


@dataclass
class EventDef(Node):
    name: str
    params: list[Param]
    anonymous: bool = False


@dataclass
class ErrorDef(Node):
    name: str
    params: list[Param]


@dataclass
class StructDef(Node):
    name: str
    fields: list[Param]


@dataclass
class EnumDef(Node):
    name: str
    members: list[str]


@dataclass
class UsingFor(Node):
    library: str  # library path, or "{a, b}" function list text
    target: str  # type text or "*"
    is_global: bool = False


@dataclass
class UserValueType(Node):
    name: str
    underlying: TypeName


@dataclass
class ContractDef(Node):
    name: str
    kind: str  # contract | abstract-contract | interface | library
    bases: list[str] = field(default_factory=list)
    base_args: dict[str, list[Expr]] = field(default_factory=dict)
    state_vars: list[StateVarDecl] = field(default_factory=list)
    functions: list[FunctionDef] = field(default_factory=list)
    structs: list[StructDef] = field(default_factory=list)
    enums: list[EnumDef] = field(default_factory=list)
    events: list[EventDef] = field(default_factory=list)
    errors: list[ErrorDef] = field(default_factory=list)
    using_for: list[UsingFor] = field(default_factory=list)
    user_types: list[UserValueType] = field(default_factory=list)
    path: str = field(default="", compare=False, repr=False)


TopLevel = Union[FunctionDef, StructDef, EnumDef, EventDef, ErrorDef, UsingFor, UserValueType, StateVarDecl]


@dataclass(frozen=True)
class Diagnostic:
    message: str
    line: int
    column: int

    def __str__(self) -> str:
        return f"{self.line}:{self.column}: {self.message}"


@dataclass
class Comment:
    line: int
    text: str


@dataclass
class SourceUnit:
    path: str = field(compare=False)
    pragmas: list[str] = field(default_factory=list)
    imports: list[str] = field(default_factory=list)
    contracts: list[ContractDef] = field(default_factory=list)
    definitions: list[TopLevel] = field(default_factory=list)
    diagnostics: list[Diagnostic] = field(default_factory=list, compare=False)
    comments: list[Comment] = field(default_factory=list, compare=False, repr=False)

    @property
    def ok(self) -> bool:
        return not self.diagnostics

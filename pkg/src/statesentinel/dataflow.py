"""Read, write and external-call events per function.

Extraction runs in three passes over each function body:

1. a lexical walk that resolves identifiers through a scope stack and
   records direct accesses, accesses through storage locals, internal call
   sites and external calls;
2. :func:`propagate_storage_aliases`, which closes the storage-alias graph
   of the function and turns accesses through aliases into conservative
   events on the aliased state variables;
3. :func:`interprocedural_storage_escape`, which charges writes performed
   on a callee's storage parameter to the state variable the caller passed
   (one call level; the callee's own calls are not followed).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Optional, Union

from .frontend import ast as A
from .model import ProjectModel, StateVarId

READ = "read"
WRITE = "write"
EXTERNAL_CALL = "external-call"
EXACT = "exact"
CONSERVATIVE = "conservative"

CONSTRUCTOR = "constructor"

BUILTIN_FUNCTIONS = frozenset({
    "require", "assert", "revert", "keccak256", "sha256", "sha3", "ripemd160", "ecrecover",
    "addmod", "mulmod", "selfdestruct", "suicide", "gasleft", "blockhash", "blobhash", "type",
})
BUILTIN_OBJECTS = frozenset({"msg", "tx", "block", "abi", "now"})
GUARD_BUILTINS = frozenset({"require", "assert"})
LOW_LEVEL = frozenset({"call", "delegatecall", "staticcall", "send", "transfer", "callcode"})
ARRAY_MUTATORS = frozenset({"push", "pop"})
_BUILTIN_MEMBER_TYPES = {
    ("msg", "sender"): A.ElementaryType("address"),
    ("msg", "value"): A.ElementaryType("uint256"),
    ("msg", "data"): A.ElementaryType("bytes"),
    ("msg", "sig"): A.ElementaryType("bytes4"),
    ("tx", "origin"): A.ElementaryType("address"),
    ("tx", "gasprice"): A.ElementaryType("uint256"),
    ("block", "coinbase"): A.ElementaryType("address", True),
    ("block", "timestamp"): A.ElementaryType("uint256"),
    ("block", "number"): A.ElementaryType("uint256"),
}
_TYPE_ALIASES = {"uint": "uint256", "int": "int256", "byte": "bytes1", "ufixed": "ufixed128x18", "fixed": "fixed128x18"}


@dataclass(frozen=True, order=True)
class FunctionId:
    contract: str
    signature: str

    def __str__(self) -> str:
        return f"{self.contract}.{self.signature}"


@dataclass(frozen=True)
class AccessEvent:
    kind: str  # read | write | external-call
    subject: Optional[StateVarId]
    function: FunctionId
    seq: int
    file: str
    line: int
    column: int
    confidence: str = EXACT
    in_guard: bool = False
    # callee text for external calls; origin for conservative writes
    detail: str = ""

    def sort_key(self):
        return (self.function, self.seq, self.line, self.column, self.kind, self.subject or StateVarId("", ""), self.detail)


@dataclass(frozen=True)
class ParamRoot:
    index: int


@dataclass(frozen=True)
class LocalRoot:
    uid: int


class _Blanket:
    """Unknown storage: stands for every state variable of the contract."""

    def __repr__(self) -> str:
        return "BLANKET"


BLANKET = _Blanket()
Root = Union[StateVarId, ParamRoot, LocalRoot, _Blanket]


@dataclass
class CallSite:
    caller: FunctionId
    callees: tuple[FunctionId, ...]
    seq: int
    in_guard: bool
    line: int
    column: int
    # roots of each argument (receiver first for using-for calls)
    arg_roots: list[frozenset] = field(default_factory=list)
    via_modifier: bool = False


@dataclass
class _LocalAccess:
    kind: str
    uid: int
    seq: int
    line: int
    column: int
    in_guard: bool


@dataclass
class FunctionFacts:
    id: FunctionId
    contract: str
    func: A.FunctionDef
    file: str
    events: list[AccessEvent] = field(default_factory=list)
    calls: list[CallSite] = field(default_factory=list)
    written_params: set[int] = field(default_factory=set)
    return_roots: frozenset = frozenset()
    # pass-1 bookkeeping, consumed by propagate_storage_aliases
    local_accesses: list[_LocalAccess] = field(default_factory=list, repr=False)
    alias_edges: dict[int, set] = field(default_factory=dict, repr=False)
    raw_return_roots: set = field(default_factory=set, repr=False)
    aliases_resolved: bool = field(default=False, repr=False)

    @property
    def kind(self) -> str:
        return self.func.kind

    def write_set(self) -> set[StateVarId]:
        return {e.subject for e in self.events if e.kind == WRITE and e.subject is not None}


@dataclass
class DataflowResult:
    events: list[AccessEvent]
    functions: dict[FunctionId, FunctionFacts]

    def write_sets(self) -> dict[FunctionId, set[StateVarId]]:
        return {fid: f.write_set() for fid, f in self.functions.items()}


@dataclass
class _Local:
    uid: int
    type_name: object
    location: str
    param_index: Optional[int] = None

    @property
    def is_storage_ref(self) -> bool:
        return self.location == "storage"


@dataclass(frozen=True)
class _Ref:
    """A contract or library name used as an expression."""

    key: str
    is_library: bool


class ProjectIndex:
    """Name lookups shared by all function analyses."""

    def __init__(self, model: ProjectModel):
        self.model = model
        self.structs: dict[str, list[tuple[str, A.StructDef]]] = {}
        self.enums: set[str] = set()
        self.user_types: set[str] = set()
        self.global_using: list[A.UsingFor] = []
        self.free_functions: dict[str, list[A.FunctionDef]] = {}
        for unit in model.units:
            for node in unit.definitions:
                if isinstance(node, A.StructDef):
                    self.structs.setdefault(node.name, []).append(("", node))
                elif isinstance(node, A.EnumDef):
                    self.enums.add(node.name)
                elif isinstance(node, A.UserValueType):
                    self.user_types.add(node.name)
                elif isinstance(node, A.UsingFor):
                    self.global_using.append(node)
                elif isinstance(node, A.FunctionDef):
                    self.free_functions.setdefault(node.name, []).append(node)
        for key in sorted(model.contracts):
            contract = model.contracts[key]
            for s in contract.structs:
                self.structs.setdefault(s.name, []).append((key, s))
            self.enums.update(e.name for e in contract.enums)
            self.user_types.update(t.name for t in contract.user_types)

    def struct(self, path: str, owner: str) -> Optional[A.StructDef]:
        name = path.rsplit(".", 1)[-1]
        entries = self.structs.get(name)
        if not entries:
            return None
        family = set(self.model.linearizations.get(owner, [owner]))
        for key, s in entries:
            if key in family:
                return s
        return entries[0][1]

    def is_value_user_type(self, path: str) -> bool:
        name = path.rsplit(".", 1)[-1]
        return name in self.enums or name in self.user_types

    def using_for(self, owner: str) -> list[A.UsingFor]:
        found: list[A.UsingFor] = []
        for member in self.model.linearizations.get(owner, [owner]):
            found.extend(self.model.contracts[member].using_for)
        return found + self.global_using


def _norm_type(text: str) -> str:
    return _TYPE_ALIASES.get(text, text)


def _type_text_matches(target: str, type_text: str) -> bool:
    if target == "*":
        return True
    target, type_text = _norm_type(target), _norm_type(type_text)
    if target == type_text:
        return True
    return target.rsplit(".", 1)[-1] == type_text.rsplit(".", 1)[-1]


def _expr_root(expr) -> Optional[A.Expr]:
    while isinstance(expr, (A.MemberAccess, A.IndexAccess, A.IndexRange)):
        expr = expr.expr
    return expr


class _FunctionAnalyzer:
    """First pass over one function body."""

    def __init__(self, ctx: "_ProjectAnalysis", owner: str, fn: A.FunctionDef, facts: FunctionFacts):
        self.ctx = ctx
        self.model = ctx.model
        self.index = ctx.index
        self.owner = owner
        self.fn = fn
        self.facts = facts
        self.table = self.model.var_tables.get(owner, {})
        self.scopes: list[dict[str, _Local]] = []
        self.seq = 0
        self.cur_seq = 0
        self._uids = itertools.count()

    # -- scopes -------------------------------------------------------------

    def declare(self, name: str, type_name, location: str, param_index: Optional[int] = None) -> _Local:
        local = _Local(next(self._uids), type_name, location, param_index)
        if name:
            self.scopes[-1][name] = local
        if param_index is not None and location == "storage":
            self.facts.alias_edges[local.uid] = {ParamRoot(param_index)}
        return local

    def lookup(self, name: str) -> Union[_Local, StateVarId, None]:
        for scope in reversed(self.scopes):
            if name in scope:
                return scope[name]
        return self.table.get(name)

    # -- events -------------------------------------------------------------

    def event(self, kind: str, subject: Optional[StateVarId], node, *, guard: bool = False,
              confidence: str = EXACT, detail: str = "") -> None:
        loc = node.loc if node is not None else A.NO_LOC
        self.facts.events.append(AccessEvent(
            kind, subject, self.facts.id, self.cur_seq, self.facts.file, loc.line, loc.column,
            confidence, guard if kind == READ else False, detail,
        ))

    def blanket_writes(self, node, detail: str) -> None:
        for sid in self.model.state_vars_of_family(self.owner):
            self.event(WRITE, sid, node, confidence=CONSERVATIVE, detail=detail)

    def access_root(self, kind: str, root, node, guard: bool) -> None:
        """Record ``kind`` access on whatever the root identifier names."""
        if not isinstance(root, A.Identifier):
            return
        target = self.lookup(root.name)
        if isinstance(target, StateVarId):
            self.event(kind, target, node, guard=guard)
        elif isinstance(target, _Local) and target.uid in self.facts.alias_edges:
            loc = node.loc
            self.facts.local_accesses.append(_LocalAccess(kind, target.uid, self.cur_seq, loc.line, loc.column, guard))

    # -- roots (for aliases, escapes and returns) ----------------------------

    def roots_of(self, expr) -> set:
        if expr is None:
            return set()
        if isinstance(expr, A.Conditional):
            return self.roots_of(expr.if_true) | self.roots_of(expr.if_false)
        if isinstance(expr, A.TupleExpr) and len(expr.components) == 1:
            return self.roots_of(expr.components[0])
        if isinstance(expr, A.Call):
            return self.call_return_roots(expr)
        root = _expr_root(expr)
        if isinstance(root, A.Identifier):
            target = self.lookup(root.name)
            if isinstance(target, StateVarId):
                return {target}
            if isinstance(target, _Local) and target.uid in self.facts.alias_edges:
                return {LocalRoot(target.uid)}
            return set()
        if isinstance(root, A.Call) and root is not expr:
            return self.call_return_roots(root)
        return set()

    def call_return_roots(self, call: A.Call) -> set:
        """Storage a call's result may refer to (internal storage getters)."""
        targets = self.ctx.resolve_internal(self.owner, call, self)
        if not targets:
            return set()
        roots: set = set()
        receiver_args = self.arg_exprs(call, targets[0][2])
        for key, fn, _ in targets:
            if not any(r.data_location == "storage" for r in fn.returns):
                continue
            facts = self.ctx.facts_for(key, fn)
            if facts is None:
                roots.add(BLANKET)
                continue
            for r in facts.return_roots:
                if isinstance(r, ParamRoot):
                    if r.index < len(receiver_args):
                        roots |= self.roots_of(receiver_args[r.index])
                elif isinstance(r, StateVarId):
                    roots.add(r)
                else:
                    roots.add(BLANKET)
        return roots

    def arg_exprs(self, call: A.Call, receiver) -> list:
        args = list(call.args)
        if receiver is not None:
            args.insert(0, receiver)
        return args

    # -- statements ---------------------------------------------------------

    def run(self) -> None:
        self.scopes.append({})
        for i, p in enumerate(self.fn.params):
            self.declare(p.name, p.type_name, p.data_location, i)
        for p in self.fn.returns:
            local = self.declare(p.name, p.type_name, p.data_location)
            if p.data_location == "storage":
                self.facts.alias_edges.setdefault(local.uid, set())
                self.facts.raw_return_roots.add(LocalRoot(local.uid))
        for m in self.fn.modifiers:
            self.modifier_invocation(m)
        if self.fn.body is not None:
            self.block(self.fn.body)
        self.scopes.pop()

    def modifier_invocation(self, m: A.ModifierInvocation) -> None:
        for arg in m.args or []:
            self.visit(arg)
        name = m.name.rsplit(".", 1)[-1]
        hits = [(k, f) for k, f in self.model.lookup_function(self.owner, name) if f.kind == "modifier"]
        if hits:
            callees = tuple(FunctionId(k, f.signature) for k, f in hits)
            roots = [frozenset(self.roots_of(a)) for a in m.args or []]
            self.facts.calls.append(CallSite(self.facts.id, callees, 0, False, m.loc.line, m.loc.column, roots, True))

    def block(self, block: A.Block) -> None:
        self.scopes.append({})
        for stmt in block.statements:
            self.stmt(stmt)
        self.scopes.pop()

    def next_seq(self) -> None:
        self.seq += 1
        self.cur_seq = self.seq

    def stmt(self, stmt) -> None:
        self.next_seq()
        if isinstance(stmt, A.Block):
            self.block(stmt)
        elif isinstance(stmt, A.UncheckedBlock):
            self.block(stmt.block)
        elif isinstance(stmt, A.ExprStmt):
            self.visit(stmt.expr)
        elif isinstance(stmt, A.VarDeclStmt):
            self.var_decl(stmt)
        elif isinstance(stmt, A.IfStmt):
            self.visit(stmt.cond, guard=True)
            self.scoped(stmt.then)
            if stmt.orelse is not None:
                self.scoped(stmt.orelse)
        elif isinstance(stmt, A.ForStmt):
            self.scopes.append({})
            if stmt.init is not None:
                self.stmt(stmt.init)
            if stmt.cond is not None:
                self.visit(stmt.cond, guard=True)
            if stmt.update is not None:
                self.visit(stmt.update)
            self.scoped(stmt.body)
            self.scopes.pop()
        elif isinstance(stmt, A.WhileStmt):
            self.visit(stmt.cond, guard=True)
            self.scoped(stmt.body)
        elif isinstance(stmt, A.DoWhileStmt):
            self.scoped(stmt.body)
            # the condition follows the body lexically
            self.next_seq()
            self.visit(stmt.cond, guard=True)
        elif isinstance(stmt, A.ReturnStmt):
            if stmt.value is not None:
                self.visit(stmt.value)
                if any(r.data_location == "storage" for r in self.fn.returns):
                    self.facts.raw_return_roots |= self.roots_of(stmt.value)
        elif isinstance(stmt, (A.EmitStmt, A.RevertStmt)):
            call = stmt.call
            for arg in call.args:
                self.visit(arg)
        elif isinstance(stmt, A.TryStmt):
            self.visit(stmt.expr)
            self.scopes.append({})
            for p in stmt.returns:
                self.declare(p.name, p.type_name, p.data_location)
            self.block(stmt.body)
            self.scopes.pop()
            for clause in stmt.catches:
                self.next_seq()
                self.scopes.append({})
                for p in clause.params:
                    self.declare(p.name, p.type_name, p.data_location)
                self.block(clause.body)
                self.scopes.pop()
        elif isinstance(stmt, A.AssemblyStmt):
            if stmt.has_sstore:
                self.blanket_writes(stmt, "assembly")
        elif isinstance(stmt, A.DegradedStmt):
            self.blanket_writes(stmt, "degraded")

    def scoped(self, stmt) -> None:
        # a non-block branch body still gets its own scope
        self.scopes.append({})
        self.stmt(stmt)
        self.scopes.pop()

    def var_decl(self, stmt: A.VarDeclStmt) -> None:
        if stmt.init is not None:
            self.visit(stmt.init)
        init_parts: list = [stmt.init]
        if stmt.is_tuple and isinstance(stmt.init, A.TupleExpr) and len(stmt.init.components) == len(stmt.decls):
            init_parts = list(stmt.init.components)
        elif stmt.is_tuple:
            init_parts = [None] * len(stmt.decls)
        for decl, init in zip(stmt.decls, init_parts):
            if decl is None:
                continue
            local = self.declare(decl.name, decl.type_name, decl.data_location)
            if decl.data_location == "storage":
                roots = self.roots_of(init) if init is not None else set()
                if stmt.is_tuple and init is None and stmt.init is not None:
                    roots = {BLANKET}
                self.facts.alias_edges[local.uid] = set(roots)

    # -- expressions --------------------------------------------------------

    def visit(self, expr, guard: bool = False) -> None:
        if expr is None:
            return
        if isinstance(expr, A.Identifier):
            self.access_root(READ, expr, expr, guard)
        elif isinstance(expr, (A.Literal, A.TypeExpr)):
            return
        elif isinstance(expr, A.MemberAccess):
            self.visit(expr.expr, guard)
        elif isinstance(expr, A.IndexAccess):
            self.visit(expr.expr, guard)
            self.visit(expr.index, guard)
        elif isinstance(expr, A.IndexRange):
            self.visit(expr.expr, guard)
            self.visit(expr.start, guard)
            self.visit(expr.end, guard)
        elif isinstance(expr, A.CallOptions):
            self.visit(expr.expr, guard)
            for v in expr.values:
                self.visit(v, guard)
        elif isinstance(expr, A.Call):
            self.call(expr, guard)
        elif isinstance(expr, A.UnaryOp):
            if expr.op in ("++", "--"):
                self.write_target(expr.operand, read_too=True, guard=guard)
            elif expr.op == "delete":
                self.write_target(expr.operand, read_too=False, guard=guard)
            else:
                self.visit(expr.operand, guard)
        elif isinstance(expr, A.BinaryOp):
            self.visit(expr.left, guard)
            self.visit(expr.right, guard)
        elif isinstance(expr, A.Assignment):
            self.visit(expr.value, guard)
            if expr.op == "=":
                self.assign_targets(expr.target, expr.value, guard)
            else:
                self.write_target(expr.target, read_too=True, guard=guard)
        elif isinstance(expr, A.Conditional):
            self.visit(expr.cond, True)
            self.visit(expr.if_true, guard)
            self.visit(expr.if_false, guard)
        elif isinstance(expr, A.TupleExpr):
            for c in expr.components:
                self.visit(c, guard)
        elif isinstance(expr, A.InlineArray):
            for item in expr.items:
                self.visit(item, guard)
        elif isinstance(expr, A.NewExpr):
            return

    def assign_targets(self, target, value, guard: bool) -> None:
        """Plain ``=``: writes, except that assigning a storage pointer rebinds it."""
        pairs = [(target, value)]
        if isinstance(target, A.TupleExpr):
            same_shape = isinstance(value, A.TupleExpr) and len(value.components) == len(target.components)
            comps = value.components if same_shape else [None] * len(target.components)
            pairs = list(zip(target.components, comps))
        for t, v in pairs:
            if t is None:
                continue
            if isinstance(t, A.Identifier):
                local = self.lookup(t.name)
                if isinstance(local, _Local) and local.is_storage_ref:
                    roots = self.roots_of(v) if v is not None else {BLANKET}
                    self.facts.alias_edges.setdefault(local.uid, set()).update(roots)
                    continue
            self.write_target(t, read_too=False, guard=guard)

    def write_target(self, target, read_too: bool, guard: bool) -> None:
        if target is None:
            return
        if isinstance(target, A.TupleExpr):
            for c in target.components:
                self.write_target(c, read_too, guard)
            return
        # index expressions along the chain are plain reads
        cur = target
        while isinstance(cur, (A.MemberAccess, A.IndexAccess, A.IndexRange)):
            if isinstance(cur, A.IndexAccess):
                self.visit(cur.index, guard)
            elif isinstance(cur, A.IndexRange):
                self.visit(cur.start, guard)
                self.visit(cur.end, guard)
            cur = cur.expr
        if isinstance(cur, A.Identifier):
            if read_too:
                self.access_root(READ, cur, cur, guard)
            self.access_root(WRITE, cur, cur, guard)
        elif isinstance(cur, A.Call):
            self.visit(cur, guard)
            for root in self.call_return_roots(cur):
                self._write_root(root, cur)
        else:
            self.visit(cur, guard)

    def _write_root(self, root, node) -> None:
        if isinstance(root, StateVarId):
            self.event(WRITE, root, node, confidence=CONSERVATIVE, detail="alias")
        elif isinstance(root, _Blanket):
            self.blanket_writes(node, "alias")
        elif isinstance(root, LocalRoot):
            loc = node.loc
            self.facts.local_accesses.append(_LocalAccess(WRITE, root.uid, self.cur_seq, loc.line, loc.column, False))
        elif isinstance(root, ParamRoot):
            self.facts.written_params.add(root.index)

    # -- calls --------------------------------------------------------------

    def call(self, call: A.Call, guard: bool) -> None:
        func = call.func
        if isinstance(func, A.CallOptions):
            for v in func.values:
                self.visit(v, guard)
            func = func.expr
        arg_guard = guard
        if isinstance(func, A.Identifier) and func.name in GUARD_BUILTINS and self.lookup(func.name) is None:
            arg_guard = True
        kind, text, confidence, receiver = self.ctx.classify(self.owner, call, self)
        if isinstance(func, A.MemberAccess) and kind != "array-mutation":
            self.visit(func.expr, guard)
        for arg in call.args:
            self.visit(arg, arg_guard)
        if kind == "external":
            self.event(EXTERNAL_CALL, None, call, confidence=confidence, detail=text)
        elif kind == "array-mutation":
            self.write_target(func.expr, read_too=True, guard=guard)
        elif kind == "internal":
            targets = self.ctx.resolve_internal(self.owner, call, self)
            if targets:
                callees = tuple(FunctionId(k, f.signature) for k, f, _ in targets)
                args = self.arg_exprs(call, targets[0][2])
                roots = [frozenset(self.roots_of(a)) for a in args]
                loc = call.loc
                self.facts.calls.append(CallSite(self.facts.id, callees, self.cur_seq, guard, loc.line, loc.column, roots))
            elif receiver is not None and self.ctx.is_reference_type(self.ctx.type_of(receiver, self.owner, self)):
                # using-for call into a library that is not part of the project
                for root in self.roots_of(receiver):
                    self._write_root(root, call)


class _ProjectAnalysis:
    def __init__(self, model: ProjectModel):
        self.model = model
        self.index = ProjectIndex(model)
        self.facts: dict[FunctionId, FunctionFacts] = {}
        self.in_progress: set[FunctionId] = set()

    def facts_for(self, key: str, fn: A.FunctionDef) -> Optional[FunctionFacts]:
        fid = FunctionId(key, fn.signature)
        if fid in self.facts:
            return self.facts[fid]
        if fid in self.in_progress:
            return None
        self.in_progress.add(fid)
        facts = FunctionFacts(fid, key, fn, self.model.contract_file.get(key, ""))
        _FunctionAnalyzer(self, key, fn, facts).run()
        propagate_storage_aliases(facts, self.model)
        self.in_progress.discard(fid)
        self.facts[fid] = facts
        return facts

    # -- typing -------------------------------------------------------------

    def is_reference_type(self, t) -> bool:
        if isinstance(t, (A.ArrayType, A.MappingType)):
            return True
        return isinstance(t, A.UserType) and self.resolve_user_type(t.path, "") == "struct"

    def resolve_user_type(self, path: str, owner: str):
        """Classify a user type path: 'struct', 'value', _Ref or None."""
        if self.index.struct(path, owner) is not None:
            return "struct"
        if self.index.is_value_user_type(path):
            return "value"
        key = self.model.find_contract(path, self.model.contract_file.get(owner, ""))
        if key is not None:
            return _Ref(key, self.model.contracts[key].kind == "library")
        return None

    def type_of(self, expr, owner: str, an: _FunctionAnalyzer):
        if isinstance(expr, A.Identifier):
            if expr.name == "this":
                return A.UserType(self.model.contracts[owner].name)
            target = an.lookup(expr.name)
            if isinstance(target, _Local):
                return target.type_name
            if isinstance(target, StateVarId):
                return self.model.state_var_index[StateVarId(target.contract, target.name)].type_name
            if expr.name in BUILTIN_OBJECTS:
                return None
            ref = self.resolve_user_type(expr.name, owner)
            return ref if isinstance(ref, _Ref) else None
        if isinstance(expr, A.MemberAccess):
            if isinstance(expr.expr, A.Identifier) and (expr.expr.name, expr.member) in _BUILTIN_MEMBER_TYPES:
                if an.lookup(expr.expr.name) is None:
                    return _BUILTIN_MEMBER_TYPES[(expr.expr.name, expr.member)]
            base = self.type_of(expr.expr, owner, an)
            if isinstance(base, A.UserType):
                struct = self.index.struct(base.path, owner)
                if struct is not None:
                    for f in struct.fields:
                        if f.name == expr.member:
                            return f.type_name
            if isinstance(base, (A.ArrayType, A.ElementaryType)) and expr.member == "length":
                return A.ElementaryType("uint256")
            if isinstance(base, A.ElementaryType) and base.name == "address" and expr.member == "balance":
                return A.ElementaryType("uint256")
            return None
        if isinstance(expr, A.IndexAccess):
            base = self.type_of(expr.expr, owner, an)
            if isinstance(base, A.MappingType):
                return base.value
            if isinstance(base, A.ArrayType):
                return base.base
            if isinstance(base, A.ElementaryType) and base.name == "bytes":
                return A.ElementaryType("bytes1")
            return None
        if isinstance(expr, A.Call):
            return self.call_type(expr, owner, an)
        if isinstance(expr, A.TupleExpr) and len(expr.components) == 1:
            return self.type_of(expr.components[0], owner, an)
        if isinstance(expr, A.Conditional):
            return self.type_of(expr.if_true, owner, an)
        return None

    def call_type(self, call: A.Call, owner: str, an: _FunctionAnalyzer):
        func = call.func.expr if isinstance(call.func, A.CallOptions) else call.func
        if isinstance(func, A.TypeExpr):
            return func.type_name
        if isinstance(func, A.NewExpr):
            return func.type_name
        if isinstance(func, A.Identifier):
            if func.name == "payable" and an.lookup("payable") is None:
                return A.ElementaryType("address", True)
            if an.lookup(func.name) is None:
                kind = self.resolve_user_type(func.name, owner)
                if kind is not None:
                    return A.UserType(func.name)
        targets = self.resolve_internal(owner, call, an)
        if targets:
            fn = targets[0][1]
            return fn.returns[0].type_name if fn.returns else None
        if isinstance(func, A.MemberAccess):
            recv = self.type_of(func.expr, owner, an)
            key = None
            if isinstance(recv, A.UserType):
                ref = self.resolve_user_type(recv.path, owner)
                key = ref.key if isinstance(ref, _Ref) else None
            elif isinstance(recv, _Ref):
                key = recv.key
            if key is not None:
                for _, fn in self.model.functions_in_family(key):
                    if fn.name == func.member and fn.returns:
                        return fn.returns[0].type_name
        return None

    # -- call classification -------------------------------------------------

    def classify(self, owner: str, call: A.Call, an: _FunctionAnalyzer):
        """Return (kind, text, confidence, using_for_receiver).

        kind is one of ``external``, ``internal``, ``builtin`` or
        ``array-mutation``.
        """
        func = call.func.expr if isinstance(call.func, A.CallOptions) else call.func
        if isinstance(func, A.NewExpr):
            t = func.type_name
            if isinstance(t, A.UserType) and self.resolve_user_type(t.path, owner) not in ("struct", "value"):
                return "external", f"new {t.path}", EXACT, None
            return "builtin", "", EXACT, None
        if isinstance(func, A.TypeExpr):
            return "builtin", "", EXACT, None
        if isinstance(func, A.Identifier):
            local = an.lookup(func.name)
            if isinstance(local, _Local):
                t = local.type_name
                if isinstance(t, A.FunctionType) and " external" in t.signature:
                    return "external", func.name, CONSERVATIVE, None
                return "builtin", "", EXACT, None
            if isinstance(local, StateVarId):
                t = self.model.state_var_index[StateVarId(local.contract, local.name)].type_name
                if isinstance(t, A.FunctionType) and " external" in t.signature:
                    return "external", func.name, CONSERVATIVE, None
                return "builtin", "", EXACT, None
            return "internal", func.name, EXACT, None
        if isinstance(func, A.MemberAccess):
            recv = func.expr
            member = func.member
            text = _call_text(func)
            if isinstance(recv, A.Identifier) and an.lookup(recv.name) is None:
                name = recv.name
                if name == "super":
                    return "internal", text, EXACT, None
                if name == "this":
                    return "external", text, EXACT, None
                if name in BUILTIN_OBJECTS:
                    return "builtin", "", EXACT, None
                if self.resolve_user_type(name, owner) in ("struct", "value"):
                    # T.wrap / T.unwrap and similar type-level members
                    return "builtin", "", EXACT, None
            if isinstance(recv, A.TypeExpr):
                # bytes.concat, string.concat and the like
                return "builtin", "", EXACT, None
            rtype = self.type_of(recv, owner, an)
            if isinstance(rtype, _Ref):
                return "internal", text, EXACT, None
            if isinstance(rtype, A.ElementaryType) and rtype.name == "address":
                return "external", text, EXACT, None
            if isinstance(rtype, A.UserType):
                kind = self.resolve_user_type(rtype.path, owner)
                if isinstance(kind, _Ref):
                    if kind.is_library:
                        return "internal", text, EXACT, None
                    return "external", text, EXACT, None
                if kind is None:
                    # unknown type name: almost always an imported interface
                    return "external", text, CONSERVATIVE, None
                return "internal", text, EXACT, recv
            if isinstance(rtype, A.FunctionType):
                # f.value(...), f.gas(...) on external function pointers
                return "external", text, CONSERVATIVE, None
            if isinstance(rtype, (A.ArrayType, A.ElementaryType)) and member in ARRAY_MUTATORS:
                if isinstance(rtype, A.ArrayType) or rtype.name == "bytes":
                    return "array-mutation", text, EXACT, None
            if rtype is not None:
                return "internal", text, EXACT, recv
            if member in ARRAY_MUTATORS:
                root = _expr_root(recv)
                if isinstance(root, A.Identifier) and isinstance(an.lookup(root.name), StateVarId):
                    return "array-mutation", text, CONSERVATIVE, None
            return "external", text, CONSERVATIVE, None
        # calls on call results and other computed callees
        return "external", _call_text(func), CONSERVATIVE, None

    def resolve_internal(self, owner: str, call: A.Call, an: _FunctionAnalyzer) -> list[tuple[str, A.FunctionDef, object]]:
        """Project functions an internal call may reach: (contract, def, receiver)."""
        func = call.func.expr if isinstance(call.func, A.CallOptions) else call.func
        nargs = len(call.args)
        if isinstance(func, A.Identifier):
            if an.lookup(func.name) is not None:
                return []
            hits = self.model.lookup_function(owner, func.name)
            return [(k, f, None) for k, f in _by_arity(hits, nargs) if f.kind == "function"]
        if not isinstance(func, A.MemberAccess):
            return []
        recv = func.expr
        if isinstance(recv, A.Identifier) and an.lookup(recv.name) is None:
            if recv.name == "super":
                hits = self.model.lookup_function(owner, func.member, start_after=owner)
                return [(k, f, None) for k, f in _by_arity(hits, nargs) if f.kind == "function"]
            if recv.name in ("this",) or recv.name in BUILTIN_OBJECTS:
                return []
        rtype = self.type_of(recv, owner, an)
        if isinstance(rtype, _Ref):
            if not rtype.is_library and rtype.key not in self.model.linearizations.get(owner, []):
                return []
            hits = self.model.lookup_function(rtype.key, func.member)
            return [(k, f, None) for k, f in _by_arity(hits, nargs) if f.kind == "function"]
        if rtype is None:
            return []
        if isinstance(rtype, A.UserType) and isinstance(self.resolve_user_type(rtype.path, owner), _Ref):
            return []
        if isinstance(rtype, A.ElementaryType) and rtype.name == "address":
            return []
        type_text = rtype.text if hasattr(rtype, "text") else ""
        found: list[tuple[str, A.FunctionDef, object]] = []
        for using in self.index.using_for(owner):
            if not _type_text_matches(using.target, type_text):
                continue
            for lib_key, name in self._using_functions(using, owner):
                if name != func.member:
                    continue
                for fn in self.model.contracts[lib_key].functions:
                    if fn.name == name and fn.kind == "function" and len(fn.params) == nargs + 1:
                        found.append((lib_key, fn, recv))
        return found

    def _using_functions(self, using: A.UsingFor, owner: str) -> Iterable[tuple[str, str]]:
        src = self.model.contract_file.get(owner, "")
        if using.library.startswith("{"):
            for item in using.library.strip("{}").split(","):
                path = item.strip().split(" ")[0]
                if "." in path:
                    lib, name = path.rsplit(".", 1)
                    key = self.model.find_contract(lib, src)
                    if key is not None:
                        yield key, name
            return
        key = self.model.find_contract(using.library, src)
        if key is None or self.model.contracts[key].kind != "library":
            return
        for fn in self.model.contracts[key].functions:
            yield key, fn.name


def _by_arity(hits: list[tuple[str, A.FunctionDef]], nargs: int) -> list[tuple[str, A.FunctionDef]]:
    exact = [(k, f) for k, f in hits if len(f.params) == nargs]
    return exact or hits


def _call_text(func) -> str:
    from .frontend.printer import expr_text

    try:
        return expr_text(func)
    except Exception:
        return type(func).__name__


def _closure(edges: dict[int, set]) -> dict[int, set]:
    """Resolve LocalRoot references transitively; cycles are fine."""
    resolved: dict[int, set] = {}
    for uid in edges:
        seen = {uid}
        todo = [uid]
        out: set = set()
        while todo:
            cur = todo.pop()
            for r in edges.get(cur, ()):
                if isinstance(r, LocalRoot):
                    if r.uid not in seen:
                        seen.add(r.uid)
                        todo.append(r.uid)
                else:
                    out.add(r)
        resolved[uid] = out
    return resolved


def _resolve_roots(roots: Iterable, closed: dict[int, set]) -> set:
    out: set = set()
    for r in roots:
        if isinstance(r, LocalRoot):
            out |= closed.get(r.uid, set())
        else:
            out.add(r)
    return out


def propagate_storage_aliases(facts: FunctionFacts, model: ProjectModel) -> list[AccessEvent]:
    """Turn accesses through storage locals into conservative state accesses.

    Returns the events added to ``facts``. Also resolves the storage roots of
    call-site arguments and of returned storage references.
    """
    if facts.aliases_resolved:
        return []
    facts.aliases_resolved = True
    closed = _closure(facts.alias_edges)
    added: list[AccessEvent] = []
    family = model.state_vars_of_family(facts.contract)
    for acc in facts.local_accesses:
        for root in sorted(closed.get(acc.uid, set()), key=repr):
            if isinstance(root, ParamRoot):
                if acc.kind == WRITE:
                    facts.written_params.add(root.index)
                continue
            subjects = family if isinstance(root, _Blanket) else [root]
            for sid in subjects:
                added.append(AccessEvent(
                    acc.kind, sid, facts.id, acc.seq, facts.file, acc.line, acc.column,
                    CONSERVATIVE, acc.in_guard if acc.kind == READ else False, "alias",
                ))
    facts.events.extend(added)
    for site in facts.calls:
        site.arg_roots = [frozenset(_resolve_roots(r, closed)) for r in site.arg_roots]
    facts.return_roots = frozenset(_resolve_roots(facts.raw_return_roots, closed))
    return added


def interprocedural_storage_escape(model: ProjectModel, functions: dict[FunctionId, FunctionFacts]) -> list[AccessEvent]:
    """Charge callee writes to storage parameters to the caller's arguments.

    Only the callee's own body counts: a parameter that is merely forwarded
    to another helper is not considered written.
    """
    added: list[AccessEvent] = []
    for fid in sorted(functions):
        facts = functions[fid]
        new: list[AccessEvent] = []
        for site in facts.calls:
            for callee_id in site.callees:
                callee = functions.get(callee_id)
                if callee is None:
                    continue
                for index in sorted(callee.written_params):
                    if index >= len(site.arg_roots):
                        continue
                    for root in sorted(site.arg_roots[index], key=repr):
                        if isinstance(root, StateVarId):
                            subjects = [root]
                        elif isinstance(root, _Blanket):
                            subjects = model.state_vars_of_family(facts.contract)
                        else:
                            continue
                        for sid in subjects:
                            new.append(AccessEvent(
                                WRITE, sid, fid, site.seq, facts.file, site.line, site.column,
                                CONSERVATIVE, False, f"escape:{callee_id.signature}",
                            ))
        facts.events.extend(new)
        added.extend(new)
    return added


def _initializer_reads(model: ProjectModel, analysis: _ProjectAnalysis) -> list[FunctionFacts]:
    """State-variable initializers may read other state variables."""
    out: list[FunctionFacts] = []
    for key in sorted(model.contracts):
        contract = model.contracts[key]
        inits = [v for v in contract.state_vars if v.initializer is not None]
        if not inits:
            continue
        pseudo = A.FunctionDef(name="", kind="initializer", params=[], loc=contract.loc)
        facts = FunctionFacts(FunctionId(key, "<initializers>"), key, pseudo, model.contract_file.get(key, ""))
        an = _FunctionAnalyzer(analysis, key, pseudo, facts)
        an.scopes.append({})
        for var in inits:
            an.next_seq()
            an.visit(var.initializer)
        propagate_storage_aliases(facts, model)
        out.append(facts)
    return out


def analyze_project(model: ProjectModel) -> DataflowResult:
    analysis = _ProjectAnalysis(model)
    for key in sorted(model.contracts):
        for fn in model.contracts[key].functions:
            if fn.body is not None or fn.modifiers:
                analysis.facts_for(key, fn)
    for facts in _initializer_reads(model, analysis):
        analysis.facts[facts.id] = facts
    functions = dict(sorted(analysis.facts.items()))
    interprocedural_storage_escape(model, functions)
    events = sorted((e for f in functions.values() for e in f.events), key=AccessEvent.sort_key)
    return DataflowResult(events, functions)


def collect_access_events(model: ProjectModel) -> list[AccessEvent]:
    return analyze_project(model).events

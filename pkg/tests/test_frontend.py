from __future__ import annotations

import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from helpers import corpus_sources
from statesentinel.frontend import PrintError, parse, pretty_print, tokenize
from statesentinel.frontend import ast as A
from statesentinel.frontend.parser import parse_source_unit


def kinds(src):
    return [(t.kind, t.text) for t in tokenize(src)]


# -- lexer ------------------------------------------------------------------


def test_tokenize_simple_declaration():
    assert kinds("uint x;") == [("keyword", "uint"), ("identifier", "x"), ("punctuation", ";"), ("eof", "")]


def test_tokenize_empty_input_is_only_eof():
    assert kinds("") == [("eof", "")]


def test_unterminated_string_reports_column_12():
    toks = tokenize('string s = "ab')
    err = [t for t in toks if t.kind == "error"]
    assert len(err) == 1
    assert err[0].message == "unterminated string"
    assert (err[0].line, err[0].column) == (1, 12)


def test_unterminated_comment_resumes_on_next_line():
    toks = tokenize("uint a; /* open\nuint b;")
    assert [t.kind for t in toks if t.kind == "error"] == ["error"]
    assert ("identifier", "b") in [(t.kind, t.text) for t in toks]


def test_comments_are_tokens_but_parser_skips_them():
    src = "contract C { // note\n uint x; /* block */ }"
    assert any(t.kind == "comment" for t in tokenize(src))
    unit = parse(src)
    assert unit.ok and unit.contracts[0].state_vars[0].name == "x"


def test_sized_types_and_units_are_keywords():
    assert kinds("uint8 bytes32 ether")[:3] == [("keyword", "uint8"), ("keyword", "bytes32"), ("keyword", "ether")]
    assert kinds("uint7")[0] == ("identifier", "uint7")


def _check_cover(src: str) -> None:
    toks = tokenize(src)
    assert toks[-1].kind == "eof"
    pos = 0
    for t in toks[:-1]:
        assert src[pos:t.offset].strip(" \t\r\n\f\v﻿") == ""
        assert src[t.offset:t.end] == t.text
        pos = t.end
    assert src[pos:].strip(" \t\r\n\f\v﻿") == ""


def _check_positions(src: str) -> None:
    toks = tokenize(src)
    lines = src.split("\n")
    prev = (0, 0)
    for t in toks:
        assert (t.line, t.column) >= prev
        prev = (t.line, t.column)
        if t.kind != "eof":
            assert 1 <= t.line <= len(lines)
            assert 1 <= t.column <= len(lines[t.line - 1])


solidityish = st.lists(
    st.sampled_from(list("contract{}();=+-*/<>!&|^%\"'\\ \n\t/*abcxyz019_.,[]?:") + ["uint", "//", "/*", "*/"]),
    max_size=120,
).map("".join)


@settings(max_examples=300, suppress_health_check=[HealthCheck.too_slow])
@given(st.one_of(st.text(max_size=200), solidityish))
def test_tokens_plus_whitespace_reproduce_input(src):
    _check_cover(src)


@settings(max_examples=300)
@given(st.one_of(st.text(max_size=200), solidityish))
def test_token_locations_monotone_and_inside_source(src):
    _check_positions(src)


@pytest.mark.parametrize("path", corpus_sources(), ids=lambda p: p.parent.name + "/" + p.name)
def test_lexer_invariants_on_corpus(path):
    src = path.read_text()
    _check_cover(src)
    _check_positions(src)


# -- parser -----------------------------------------------------------------


def test_minimal_contract():
    unit = parse("contract C { uint x; }")
    assert unit.ok
    (c,) = unit.contracts
    (v,) = c.state_vars
    assert (v.name, v.mutability, v.has_initializer, v.visibility) == ("x", "none", False, "default")


def test_token_style_snippet():
    src = """
    contract Delegate {
        mapping(address => uint256) public creditsOf;
        function _processPayment(address beneficiary, uint256 value, bool dontMint) internal {
            if (dontMint) return;
            uint256 credits = creditsOf[beneficiary];
            creditsOf[beneficiary] = _mint(value + credits);
        }
        function _mint(uint256 amount) internal pure returns (uint256) { return amount % 7; }
    }
    """
    unit = parse(src)
    assert unit.ok
    (c,) = unit.contracts
    assert [v.name for v in c.state_vars] == ["creditsOf"]
    assert isinstance(c.state_vars[0].type_name, A.MappingType)
    assert len(c.functions) >= 2


def test_missing_contract_name_yields_no_contract_and_one_diagnostic():
    unit = parse("contract { uint x; }")
    assert unit.contracts == []
    assert len(unit.diagnostics) == 1


def test_base_order_preserved():
    unit = parse("contract D is B, C {}")
    assert unit.contracts[0].bases == ["B", "C"]


def test_state_var_attributes():
    unit = parse("""
    contract C {
        uint256 public constant A = 1;
        address private immutable b;
        mapping(uint => mapping(address => bool)) internal m;
        uint[] arr;
        constructor() { b = msg.sender; }
    }""")
    a, b, m, arr = unit.contracts[0].state_vars
    assert (a.visibility, a.mutability, a.has_initializer) == ("public", "constant", True)
    assert (b.visibility, b.mutability, b.has_initializer) == ("private", "immutable", False)
    assert m.declared_type == "mapping(uint => mapping(address => bool))"
    assert arr.declared_type == "uint[]"


def test_function_kinds_and_constructor_name():
    unit = parse("""
    contract C {
        constructor() {}
        receive() external payable {}
        fallback() external {}
        modifier only() { _; }
        function f(uint a, bytes storage s) internal returns (uint) { return a; }
    }""")
    fns = unit.contracts[0].functions
    assert [f.kind for f in fns] == ["constructor", "receive", "fallback", "modifier", "function"]
    assert fns[0].name == ""
    assert [(p.name, p.data_location) for p in fns[4].params] == [("a", "none"), ("s", "storage")]


def test_interface_has_no_state_vars_and_bodiless_functions():
    unit = parse("interface I { function f() external returns (uint); }")
    c = unit.contracts[0]
    assert c.kind == "interface" and c.state_vars == [] and c.functions[0].body is None


def test_contract_kinds():
    unit = parse("abstract contract A {} library L {} interface I {} contract C {}")
    assert [c.kind for c in unit.contracts] == ["abstract-contract", "library", "interface", "contract"]


def test_statement_failure_degrades_only_that_statement():
    unit = parse("contract C { uint x; function f() public { x = = 1; x = 2; } }")
    assert len(unit.diagnostics) == 1
    body = unit.contracts[0].functions[0].body.statements
    assert isinstance(body[0], A.DegradedStmt) and body[0].degraded
    assert isinstance(body[1], A.ExprStmt)


def test_assembly_is_opaque_and_sstore_detected():
    unit = parse("contract C { function f() public { assembly { sstore(0, 1) } assembly { let a := sload(0) } } }")
    s1, s2 = unit.contracts[0].functions[0].body.statements
    assert isinstance(s1, A.AssemblyStmt) and s1.has_sstore
    assert isinstance(s2, A.AssemblyStmt) and not s2.has_sstore


def test_pragmas_and_imports():
    unit = parse('pragma solidity ^0.8.0;\nimport "./A.sol";\nimport {B} from "../B.sol";\ncontract C {}')
    assert unit.pragmas == ["solidity ^0.8.0"]
    assert unit.imports == ["./A.sol", "../B.sol"]


def test_duplicate_contract_names_in_a_unit_are_diagnosed():
    unit = parse("contract C {} contract C {}")
    assert len({c.name for c in unit.contracts}) == len(unit.contracts)
    assert unit.diagnostics


def test_parse_source_unit_accepts_tokens():
    unit = parse_source_unit(tokenize("contract C { uint x; }"), "C.sol")
    assert unit.path == "C.sol" and unit.contracts[0].name == "C"


@settings(max_examples=300, suppress_health_check=[HealthCheck.too_slow])
@given(st.binary(max_size=300))
def test_parse_is_total_on_arbitrary_bytes(data):
    unit = parse(data.decode("utf-8", errors="replace"))
    assert isinstance(unit, A.SourceUnit)
    assert unit.ok == (not unit.diagnostics)


_FRAGMENTS = [
    "contract C", "is", "A", ",", "{", "}", "(", ")", "uint x", ";", "function f()", "public", "returns (uint)",
    "x = 1", "if (x)", "else", "for (uint i; i < 2; i++)", "assembly {", "mapping(uint => uint)", "return",
    "modifier m", "_", "emit E(1)", "try c.f() returns (uint v) {", "catch {", "unchecked {", "new C(", "\"s",
    "/*", "event E(uint indexed a)", "struct S { uint a; }", "enum E { A }", "using L for uint;", "delete x",
    "x[1]", ".y", "?", ":", "+=", "++", "import", "pragma solidity ^0.8.0", "constructor", "type(uint).max",
]


@settings(max_examples=400, suppress_health_check=[HealthCheck.too_slow])
@given(st.lists(st.sampled_from(_FRAGMENTS), max_size=40))
def test_parse_is_total_on_token_soup(frags):
    unit = parse(" ".join(frags))
    assert unit.ok == (not unit.diagnostics)
    for c in unit.contracts:
        if c.kind == "interface":
            assert c.state_vars == []


# -- pretty printer ---------------------------------------------------------


def test_round_trip_minimal():
    unit = parse("contract C{uint x;}")
    assert parse(pretty_print(unit)) == unit


def test_round_trip_preserves_base_order():
    unit = parse("contract B {} contract C {} contract D is B, C {}")
    again = parse(pretty_print(unit))
    assert again == unit and again.contracts[2].bases == ["B", "C"]


def test_printer_refuses_units_with_diagnostics():
    with pytest.raises(PrintError):
        pretty_print(parse("contract { }"))


# Broken.sol is the deliberately degraded fixture; the printer refuses it
@pytest.mark.parametrize("path", [p for p in corpus_sources() if p.name != "Broken.sol"],
                         ids=lambda p: p.parent.name + "/" + p.name)
def test_round_trip_on_corpus(path):
    unit = parse(path.read_text(), path.name)
    printed = pretty_print(unit)
    again = parse(printed, path.name)
    assert again.ok, again.diagnostics
    assert again == unit
    assert pretty_print(again) == printed


def test_corpus_has_exactly_one_degraded_source():
    bad = [p for p in corpus_sources() if not parse(p.read_text()).ok]
    assert [p.name for p in bad] == ["Broken.sol"]


ROUND_TRIP_SAMPLE = """
pragma solidity >=0.8.0 <0.9.0;
import "./Base.sol";
import {X as Y} from "./X.sol";

type Price is uint128;
error Oops(uint256 code);
function free(uint a) pure returns (uint) { return a + 1; }

library L {
    function inc(uint256 a) internal pure returns (uint256) { return a + 1; }
}

contract C is Base(1), Other {
    using L for uint256;
    struct S { uint a; address[] b; }
    enum Mode { Off, On }
    event Moved(address indexed from, uint amount);
    uint256 public constant K = 10 ** 18;
    address public immutable owner;
    mapping(address => mapping(uint => S)) internal nested;
    uint[3] fixedArr;
    bytes32 private tag = keccak256("t");
    modifier only() { require(msg.sender == owner, "no"); _; }
    constructor(address o) Base(2) payable { owner = o; }
    receive() external payable {}
    function f(uint a, uint[] memory xs) public virtual override(Base, Other) only returns (uint r, bool) {
        S storage s = nested[msg.sender][a];
        s.a += a * (2 + 3) ** 2;
        unchecked { r = a - 1; }
        for (uint i = 0; i < xs.length; ++i) { if (xs[i] == 0) continue; else break; }
        while (r > 0) r--;
        do { r++; } while (r < 3);
        (r, ) = (1, 2);
        uint[] memory ys = new uint[](3);
        delete ys[0];
        r = a > 1 ? (a < 5 ? 1 : 2) : -3 + int(a) > 0 ? 4 : 5;
        try this.g{value: 1, gas: 100}(a) returns (uint v) { r = v; } catch Error(string memory e) { r = 0; } catch { r = 1; }
        emit Moved(msg.sender, type(uint256).max);
        assembly { let z := add(1, 2) }
        payable(msg.sender).transfer(1 ether);
        return (r.inc(), !true);
    }
    function g(uint a) external payable returns (uint) { revert Oops({code: a}); }
}
"""


def test_round_trip_large_sample():
    unit = parse(ROUND_TRIP_SAMPLE)
    assert unit.ok, unit.diagnostics
    assert parse(pretty_print(unit)) == unit


_atoms = st.sampled_from(["a", "b", "1", "x[1]", "s.f", "g(a)", "true", "0x10", "(a, b)"])


def _expr(children):
    bin_ops = st.sampled_from(["+", "-", "*", "/", "%", "**", "<<", "&", "|", "^", "<", "==", "&&", "||"])
    return st.one_of(
        st.tuples(children, bin_ops, children).map(lambda t: f"{t[0]} {t[1]} {t[2]}"),
        st.tuples(children, bin_ops, children).map(lambda t: f"({t[0]} {t[1]} {t[2]})"),
        st.tuples(st.sampled_from(["!", "-", "~"]), children).map(lambda t: f"{t[0]}{t[1]}"),
        st.tuples(children, children, children).map(lambda t: f"{t[0]} ? {t[1]} : {t[2]}"),
        children.map(lambda c: f"f({c}, 2)"),
        children.map(lambda c: f"m[{c}]"),
    )


expressions = st.recursive(_atoms, _expr, max_leaves=12)


@settings(max_examples=300, suppress_health_check=[HealthCheck.too_slow])
@given(expressions, st.sampled_from(["=", "+=", "|="]))
def test_round_trip_generated_expressions(expr, op):
    src = f"contract C {{ function h() public {{ y {op} {expr}; }} }}"
    unit = parse(src)
    assert unit.ok, (src, unit.diagnostics)
    assert parse(pretty_print(unit)) == unit

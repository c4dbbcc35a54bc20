from __future__ import annotations

import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import case_sources
from statesentinel.dataflow import CONSERVATIVE, EXACT, analyze_project
from statesentinel.frontend import parse
from statesentinel.model import build_project_model
from statesentinel.rules import (
    REMEDY_CONSTANT,
    REMEDY_IMMUTABLE,
    REMEDY_MISSED,
    ConfigError,
    Finding,
    RuleConfig,
    run_rules,
    suppressed_rules,
)


def findings(*sources: tuple[str, str], rules=("R1", "R2", "R3", "R4"), **cfg) -> list[Finding]:
    model = build_project_model([parse(text, path) for path, text in sources])
    return run_rules(model, analyze_project(model), RuleConfig(enabled=frozenset(rules), **cfg))


def one(rule: str, *sources, **cfg) -> list[Finding]:
    return findings(*sources, rules=(rule,), **cfg)


# -- R1 ---------------------------------------------------------------------------


def test_r1_initialized_never_written_is_constant_candidate():
    src = "contract T { uint256 maxSupply = 1000; function f() public view returns (uint) { return maxSupply; } }"
    (f,) = one("R1", ("T.sol", src))
    assert f.subject == "T.maxSupply" and f.remediation == REMEDY_CONSTANT
    assert f.severity == "warning" and f.confidence == EXACT and f.line == 1


def test_r1_constant_declaration_is_clean():
    src = "contract T { uint256 constant maxSupply = 1000; function f() public pure returns (uint) { return maxSupply; } }"
    assert one("R1", ("T.sol", src)) == []


def test_r1_three_remediations():
    src = """
    contract T {
        uint a = 1;
        uint b;
        uint c;
        uint d;
        constructor() { b = 2; }
        function f() public { d = 3; }
    }
    """
    got = {f.subject: f.remediation for f in one("R1", ("T.sol", src))}
    assert got == {"T.a": REMEDY_CONSTANT, "T.b": REMEDY_IMMUTABLE, "T.c": REMEDY_MISSED}


def test_r1_derived_write_in_other_file_suppresses_base_finding():
    base = ("src/A.sol", "contract A { uint fee; function get() public view returns (uint) { return fee; } }")
    derived = ("src/B.sol", 'import "./A.sol"; contract B is A { function setFee(uint x) public { fee = x; } }')
    assert one("R1", base, derived) == []
    # the base alone is flagged
    assert [f.subject for f in one("R1", base)] == ["A.fee"]


def test_r1_interfaces_and_libraries_are_not_candidates():
    src = "library L { } interface I { function f() external; } contract C { uint x; function g() public { x = 1; } }"
    assert one("R1", ("C.sol", src)) == []


def test_r1_degraded_project_lowers_confidence():
    good = ("Good.sol", "contract Good { uint level; function f() public view returns (uint) { return level; } }")
    bad = ("Bad.sol", "contract Bad { uint y; function f() public { y = = 1; } }")
    (f,) = one("R1", good, bad)
    assert f.subject == "Good.level" and f.confidence == CONSERVATIVE


def test_r1_conservative_write_still_suppresses():
    src = "contract C { uint x; function f() public { assembly { sstore(0, 1) } } }"
    assert one("R1", ("C.sol", src)) == []


# -- R2 ---------------------------------------------------------------------------

R2_TEMPLATE = """
interface IToken {{ function transfer(address to, uint v) external returns (bool); }}
contract Vault {{
    IToken token;
    mapping(address => bool) claimed;
    function claim() public {{
        require(!claimed[msg.sender]);
        {first}
        {second}
    }}
}}
"""
CALL = "token.transfer(msg.sender, 1);"
WRITE_CLAIMED = "claimed[msg.sender] = true;"


def test_r2_write_after_call_is_flagged():
    (f,) = one("R2", ("V.sol", R2_TEMPLATE.format(first=CALL, second=WRITE_CLAIMED)))
    assert f.subject == "Vault.claim(): claimed" and f.severity == "warning"
    assert "token.transfer" in f.message and f.line == 9


def test_r2_order_toggles_finding():
    assert one("R2", ("V.sol", R2_TEMPLATE.format(first=WRITE_CLAIMED, second=CALL))) == []


def test_r2_call_without_later_write_is_clean():
    assert one("R2", ("V.sol", R2_TEMPLATE.format(first=CALL, second=""))) == []


def test_r2_requires_guard_read():
    src = R2_TEMPLATE.format(first=CALL, second=WRITE_CLAIMED).replace("require(!claimed[msg.sender]);", "")
    assert one("R2", ("V.sol", src)) == []


def test_r2_express_receive_pair():
    (f,) = one("R2", *case_sources("axelar_express_receive"))
    assert f.subject.startswith("InterchainTokenService.expressReceiveTokenWithData(")
    assert one("R2", *case_sources("axelar_express_receive_swapped")) == []


# -- R3 ---------------------------------------------------------------------------


def test_r3_handle_fees_last_fee():
    got = {f.subject: f for f in one("R3", *case_sources("handle_fees"))}
    f = got["Basket.lastFee"]
    assert f.severity == "info" and "later writes exist at" in f.message
    # the rule is literal: mappings without an initializer are reported too
    assert "Basket.balanceOf" in got


def test_r3_constructor_assignment_suppresses():
    src = "contract C { uint last; constructor() { last = block.timestamp; } function f() public { last = 1 + last; } }"
    assert one("R3", ("C.sol", src)) == []


def test_r3_constructor_helper_counts_as_constructor_write():
    src = "contract C { uint last; constructor() { _init(); } function _init() internal { last = 1; } function f() public view returns (uint) { return last; } }"
    assert one("R3", ("C.sol", src)) == []


def test_r3_never_read_var_only_gets_r1():
    src = "contract C { uint unused; }"
    got = findings(("C.sol", src))
    assert [f.rule_id for f in got] == ["R1"]


# -- R4 ---------------------------------------------------------------------------


def r4_contract(bodies: list[str]) -> tuple[str, str]:
    fns = " ".join(f"function f{i}() public {{ {b} }}" for i, b in enumerate(bodies))
    return ("A.sol", f"contract Acct {{ uint balance; uint lastUpdated; {fns} }}")


BOTH = "balance += 1; lastUpdated = block.timestamp;"


def test_r4_three_both_one_balance_only():
    got = one("R4", r4_contract([BOTH, BOTH, BOTH, "balance -= 1;"]))
    assert [(f.subject, f.severity) for f in got] == [("Acct.f3(): lastUpdated", "info")]


def test_r4_all_both_is_clean():
    assert one("R4", r4_contract([BOTH, BOTH, BOTH])) == []


def test_r4_below_support_is_clean():
    assert one("R4", r4_contract([BOTH, "balance -= 1;"])) == []


def test_r4_support_one_enables_it():
    # confidence 1/2 still has to pass the threshold
    assert one("R4", r4_contract([BOTH, "balance -= 1;"]), r4_support=1, r4_confidence=0.5) != []


def test_r4_confidence_threshold_is_inclusive():
    bodies = [BOTH] * 3 + ["balance -= 1;"]
    assert len(one("R4", r4_contract(bodies), r4_confidence=0.75)) == 1
    assert one("R4", r4_contract(bodies), r4_confidence=0.76) == []


def test_r4_constructors_excluded():
    src = "contract Acct { uint balance; uint lastUpdated; constructor() { balance = 1; lastUpdated = 1; } function f() public { balance = 2; } }"
    assert one("R4", ("A.sol", src), r4_support=1, r4_confidence=0.1) == []


def test_r4_unrevoked_approval():
    got = one("R4", *case_sources("approval_revocation"))
    assert any(f.subject == "Position._transfer(address,address,uint256): getApproved" for f in got)


BODIES = ("balance += 1;", "lastUpdated = 1;", BOTH, "", "balance = 0; lastUpdated = 0;")


@settings(max_examples=120, deadline=None)
@given(st.lists(st.sampled_from(BODIES), min_size=1, max_size=7),
       st.floats(0.05, 1.0), st.floats(0.05, 1.0))
def test_r4_raising_confidence_never_adds_findings(bodies, c1, c2):
    lo, hi = sorted((c1, c2))
    src = r4_contract(bodies)
    at_lo = {f.sort_key() for f in one("R4", src, r4_confidence=lo)}
    at_hi = {f.sort_key() for f in one("R4", src, r4_confidence=hi)}
    assert at_hi <= at_lo


@settings(max_examples=80, deadline=None)
@given(st.lists(st.sampled_from(BODIES), min_size=1, max_size=6), st.integers(1, 3), st.sampled_from((0.5, 0.7, 1.0)))
def test_r4_matches_counting_oracle(bodies, support, conf):
    writes = [{v for v in ("balance", "lastUpdated") if v in b} for b in bodies]
    expected = set()
    for u, v in itertools.permutations(("balance", "lastUpdated")):
        both = [i for i, w in enumerate(writes) if {u, v} <= w]
        u_only = [i for i, w in enumerate(writes) if u in w and v not in w]
        if len(both) >= support and u_only and len(both) / (len(both) + len(u_only)) >= conf:
            expected |= {f"Acct.f{i}(): {v}" for i in u_only}
    got = {f.subject for f in one("R4", r4_contract(bodies), r4_support=support, r4_confidence=conf)}
    assert got == expected


# -- suppression and config ----------------------------------------------------------


def test_suppression_comment_on_declaration_line():
    src = "contract C {\n    uint x = 1; // state-sentinel: allow R1\n    uint y = 2;\n}\n"
    got = one("R1", ("C.sol", src))
    assert [(f.subject, f.suppressed) for f in got] == [("C.x", True), ("C.y", False)]


def test_suppression_is_rule_specific():
    src = "contract C {\n    uint x = 1; // state-sentinel: allow R3\n}\n"
    assert [f.suppressed for f in one("R1", ("C.sol", src))] == [False]


def test_custom_suppression_token():
    src = "contract C {\n    uint x = 1; // lint-ok R1\n}\n"
    assert [f.suppressed for f in one("R1", ("C.sol", src), suppression_token="lint-ok")] == [True]


def test_suppressed_rules_parsing():
    assert suppressed_rules("state-sentinel: allow R1, R4") == {"R1", "R4"}
    assert suppressed_rules("nothing here") == set()


@pytest.mark.parametrize("kwargs", [
    {"enabled": frozenset({"R9"})},
    {"r4_support": 0},
    {"r4_support": True},
    {"r4_confidence": 0.0},
    {"r4_confidence": 1.5},
])
def test_rule_config_validation(kwargs):
    with pytest.raises(ConfigError):
        RuleConfig(**kwargs)


def test_disabled_rules_produce_nothing():
    src = "contract C { uint x = 1; uint y; function f() public view returns (uint) { return y; } }"
    assert {f.rule_id for f in findings(("C.sol", src))} == {"R1", "R3"}
    assert {f.rule_id for f in findings(("C.sol", src), rules=("R3",))} == {"R3"}


def test_findings_sorted_by_location_then_rule():
    src = "contract C {\n  uint y;\n  uint x = 1;\n  function f() public view returns (uint) { return y; }\n}\n"
    got = findings(("C.sol", src))
    keys = [(f.file, f.line, f.column, f.rule_id) for f in got]
    assert keys == sorted(keys) and [k[3] for k in keys[:2]] == ["R1", "R3"]

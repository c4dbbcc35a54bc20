"""Tokenizer for Solidity source text."""

from __future__ import annotations

import re
from dataclasses import dataclass

KEYWORD = "keyword"
IDENTIFIER = "identifier"
NUMBER = "number"
STRING = "string"
PUNCT = "punctuation"
COMMENT = "comment"
ERROR = "error"
EOF = "eof"

_BASE_KEYWORDS = frozenset(
    """
    pragma import contract interface library abstract is function constructor
    modifier event struct enum using mapping public private internal external
    pure view payable constant immutable override virtual memory storage
    calldata returns return if else while do for break continue emit new
    delete true false unchecked try catch assembly indexed anonymous type
    address bool string bytes byte int uint fixed ufixed var
    wei gwei ether seconds minutes hours days weeks years
    """.split()
)

UNITS = frozenset("wei gwei ether seconds minutes hours days weeks years".split())

_SIZED_TYPE = re.compile(r"(?:u?int(?:8|16|24|32|40|48|56|64|72|80|88|96|104|112|120|128|136|144|152|160|168|176|184|192|200|208|216|224|232|240|248|256)|bytes(?:[1-9]|[12][0-9]|3[0-2])|u?fixed\d+x\d+)\Z")

_PUNCTUATORS = sorted(
    """
    >>>= >>= <<= >>> ** == != <= >= && || ++ -- += -= *= /= %= |= &= ^= => -> << >> :=
    ( ) { } [ ] ; , . ? : = + - * / % ! ~ < > & | ^ @
    """.split(),
    key=len,
    reverse=True,
)

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r\n\f\v\ufeff]+)
  | (?P<line_comment>//[^\n]*)
  | (?P<block_comment>/\*.*?\*/)
  | (?P<open_comment>/\*)
  | (?P<prefixed_string>(?:hex|unicode)(?:"(?:[^"\\\n]|\\.)*"|'(?:[^'\\\n]|\\.)*'))
  | (?P<number>0[xX][0-9a-fA-F_]+|(?:\d[\d_]*(?:\.\d[\d_]*)?|\.\d[\d_]*)(?:[eE]-?\d[\d_]*)?)
  | (?P<word>[A-Za-z_$][A-Za-z0-9_$]*)
  | (?P<string>"(?:[^"\\\n]|\\.)*"|'(?:[^'\\\n]|\\.)*')
  | (?P<open_string>["'])
  | (?P<punct>"""
    + "|".join(re.escape(p) for p in _PUNCTUATORS)
    + r""")
    """,
    re.VERBOSE | re.DOTALL,
)


def is_keyword(word: str) -> bool:
    return word in _BASE_KEYWORDS or _SIZED_TYPE.match(word) is not None


def is_elementary_type(word: str) -> bool:
    return word in {
        "address", "bool", "string", "bytes", "byte", "int", "uint", "fixed", "ufixed", "var"
    } or _SIZED_TYPE.match(word) is not None


@dataclass(frozen=True, slots=True)
class Token:
    kind: str
    text: str
    line: int
    column: int
    offset: int
    message: str = ""

    @property
    def end(self) -> int:
        return self.offset + len(self.text)

    def __repr__(self) -> str:
        return f"Token({self.kind}, {self.text!r}, {self.line}:{self.column})"


def tokenize(source: str) -> list[Token]:
    """Split ``source`` into tokens, ending with an ``eof`` marker.

    Whitespace is skipped; comments are kept as tokens. Lexical errors do not
    raise: an ``error`` token spanning the rest of the offending line is
    produced and scanning resumes on the next line.
    """
    tokens: list[Token] = []
    pos = 0
    line = 1
    line_start = 0
    n = len(source)
    match = _TOKEN_RE.match
    while pos < n:
        m = match(source, pos)
        if m is None:
            kind, text, msg = ERROR, source[pos], f"unexpected character {source[pos]!r}"
        else:
            group = m.lastgroup
            text = m.group()
            msg = ""
            if group == "ws":
                kind = ""
            elif group in ("line_comment", "block_comment"):
                kind = COMMENT
            elif group == "word":
                kind = KEYWORD if is_keyword(text) else IDENTIFIER
            elif group == "number":
                kind = NUMBER
            elif group in ("string", "prefixed_string"):
                kind = STRING
            elif group == "punct":
                kind = PUNCT
            else:
                kind = ERROR
                eol = source.find("\n", pos)
                text = source[pos:] if eol < 0 else source[pos:eol]
                msg = "unterminated string" if group == "open_string" else "unterminated comment"
        if kind:
            tokens.append(Token(kind, text, line, pos - line_start + 1, pos, msg))
        newlines = text.count("\n")
        if newlines:
            line += newlines
            line_start = pos + text.rindex("\n") + 1
        pos += len(text)
    tokens.append(Token(EOF, "", line, pos - line_start + 1, pos))
    return tokens

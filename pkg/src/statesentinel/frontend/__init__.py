"""Solidity lexing, parsing and pretty-printing."""

from .lexer import Token, tokenize
from .parser import ParseError, parse, parse_source_unit
from .printer import PrintError, expr_text, pretty_print

__all__ = [
    "ParseError", "PrintError", "Token", "expr_text", "parse", "parse_source_unit",
    "pretty_print", "tokenize",
]

"""SXQL lexer.

Keywords are case-insensitive; identifiers are case-sensitive.  C++-style // comments
run to end of line.  `{?}` is a single token (the existential link quantifier).
"""

from __future__ import annotations

from dataclasses import dataclass

from ..errors import SyntaxError_

KEYWORDS = {"select", "from", "where", "and", "or", "between", "exist", "prox"}

TWO_CHAR = {"&&", "||", "<=", ">=", "==", "!="}
ONE_CHAR = set("<>=!+-*/&|(),.[]")


@dataclass(frozen=True)
class Token:
    kind: str           # KW, IDENT, INT, FLOAT, STRING, OP, QUANT, EOF
    text: str
    line: int
    col: int

    @property
    def upper(self) -> str:
        return self.text.upper()


def tokenize(source: str) -> list[Token]:
    tokens: list[Token] = []
    i = 0
    line = 1
    col = 1
    n = len(source)

    def err(msg: str):
        raise SyntaxError_(msg, line, col)

    while i < n:
        ch = source[i]
        if ch == "\n":
            i += 1
            line += 1
            col = 1
            continue
        if ch in " \t\r":
            i += 1
            col += 1
            continue
        if source.startswith("//", i):
            while i < n and source[i] != "\n":
                i += 1
            continue
        start_col = col
        if source.startswith("{?}", i):
            tokens.append(Token("QUANT", "{?}", line, start_col))
            i += 3
            col += 3
            continue
        if ch.isalpha() or ch == "_":
            j = i
            while j < n and (source[j].isalnum() or source[j] == "_"):
                j += 1
            text = source[i:j]
            kind = "KW" if text.lower() in KEYWORDS else "IDENT"
            tokens.append(Token(kind, text, line, start_col))
            col += j - i
            i = j
            continue
        if ch.isdigit() or (ch == "." and i + 1 < n and source[i + 1].isdigit()):
            j = i
            is_float = False
            if source.startswith("0x", i) or source.startswith("0X", i):
                j = i + 2
                while j < n and source[j] in "0123456789abcdefABCDEF":
                    j += 1
                if j == i + 2:
                    err("malformed hex literal")
                tokens.append(Token("INT", source[i:j], line, start_col))
            else:
                while j < n and source[j].isdigit():
                    j += 1
                if j < n and source[j] == ".":
                    is_float = True
                    j += 1
                    while j < n and source[j].isdigit():
                        j += 1
                if j < n and source[j] in "eE":
                    k = j + 1
                    if k < n and source[k] in "+-":
                        k += 1
                    if k < n and source[k].isdigit():
                        is_float = True
                        j = k
                        while j < n and source[j].isdigit():
                            j += 1
                tokens.append(Token("FLOAT" if is_float else "INT", source[i:j], line, start_col))
            col += j - i
            i = j
            continue
        if ch == "'":
            j = i + 1
            while j < n and source[j] != "'":
                if source[j] == "\n":
                    err("unterminated string literal")
                j += 1
            if j >= n:
                err("unterminated string literal")
            tokens.append(Token("STRING", source[i + 1:j], line, start_col))
            col += j + 1 - i
            i = j + 1
            continue
        two = source[i:i + 2]
        if two in TWO_CHAR:
            tokens.append(Token("OP", two, line, start_col))
            i += 2
            col += 2
            continue
        if ch in ONE_CHAR:
            tokens.append(Token("OP", ch, line, start_col))
            i += 1
            col += 1
            continue
        err(f"unexpected character {ch!r}")
    tokens.append(Token("EOF", "", line, col))
    return tokens

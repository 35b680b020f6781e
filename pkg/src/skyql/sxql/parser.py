"""Recursive-descent SXQL parser.

Operator tiers, loosest first:  ||  &&  !  comparisons/BETWEEN  |  &  + -  * /  unary -
Bitwise & and | bind tighter than comparisons (so `flags & BIT == 0` tests the mask)
but looser than arithmetic.  BETWEEN lowers to a >=/<= conjunction at parse time.
`=` and `==` are synonyms, as are AND/&& and OR/||.
"""

from __future__ import annotations

from ..errors import SyntaxError_
from .ast import (
    FUNCTIONS,
    Binary,
    ClassSource,
    Exist,
    FuncCall,
    Literal,
    MacroCall,
    MemberPath,
    PathSeg,
    Prox,
    QueryTree,
    SelectItem,
    Unary,
)
from .lexer import Token, tokenize


class _Parser:
    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.pos = 0

    # -- token plumbing --------------------------------------------------------

    def peek(self) -> Token:
        return self.tokens[self.pos]

    def advance(self) -> Token:
        tok = self.tokens[self.pos]
        if tok.kind != "EOF":
            self.pos += 1
        return tok

    def at_kw(self, word: str) -> bool:
        tok = self.peek()
        return tok.kind == "KW" and tok.text.lower() == word

    def take_kw(self, word: str) -> bool:
        if self.at_kw(word):
            self.advance()
            return True
        return False

    def at_op(self, *ops: str) -> bool:
        tok = self.peek()
        return tok.kind == "OP" and tok.text in ops

    def take_op(self, *ops: str) -> str | None:
        if self.at_op(*ops):
            return self.advance().text
        return None

    def expect_op(self, op: str):
        tok = self.peek()
        if tok.kind == "OP" and tok.text == op:
            self.advance()
            return
        self.fail(f"found {tok.text!r}" if tok.text else "unexpected end of input", (op,))

    def expect_kw(self, word: str):
        tok = self.peek()
        if not self.take_kw(word):
            got = tok.text if tok.text else "end of input"
            self.fail(f"found {got!r}", (word.upper(),))

    def fail(self, message: str, expected: tuple[str, ...] = ()):
        tok = self.peek()
        raise SyntaxError_(message, tok.line, tok.col, expected)

    # -- grammar ---------------------------------------------------------------

    def statement(self) -> QueryTree:
        self.expect_kw("select")
        select = [SelectItem(self.expr())]
        while self.take_op(","):
            select.append(SelectItem(self.expr()))
        self.expect_kw("from")
        source = self.source()
        predicate = None
        if self.take_kw("where"):
            predicate = self.expr()
        return QueryTree(select, source, predicate)

    def source(self):
        if self.take_op("("):
            inner = self.statement()
            self.expect_op(")")
            return inner
        tok = self.peek()
        if tok.kind != "IDENT":
            self.fail("expected a class name or sub-select", ("identifier", "("))
        self.advance()
        return ClassSource(tok.text)

    def expr(self):
        return self.or_expr()

    def or_expr(self):
        left = self.and_expr()
        while self.at_op("||") or self.at_kw("or"):
            self.advance()
            left = Binary("||", left, self.and_expr())
        return left

    def and_expr(self):
        left = self.not_expr()
        while self.at_op("&&") or self.at_kw("and"):
            self.advance()
            left = Binary("&&", left, self.not_expr())
        return left

    def not_expr(self):
        if self.take_op("!"):
            return Unary("!", self.not_expr())
        return self.comparison()

    def comparison(self):
        left = self.bitor()
        if self.take_kw("between"):
            lo = self.bitor()
            self.expect_kw("and")
            hi = self.bitor()
            return Binary("&&", Binary(">=", left, lo), Binary("<=", left, hi))
        op = self.take_op("<", "<=", ">", ">=", "==", "!=", "=")
        if op is None:
            return left
        if op == "=":
            op = "=="
        return Binary(op, left, self.bitor())

    def bitor(self):
        left = self.bitand()
        while (op := self.take_op("|")) is not None:
            left = Binary(op, left, self.bitand())
        return left

    def bitand(self):
        left = self.additive()
        while (op := self.take_op("&")) is not None:
            left = Binary(op, left, self.additive())
        return left

    def additive(self):
        left = self.multiplicative()
        while (op := self.take_op("+", "-")) is not None:
            left = Binary(op, left, self.multiplicative())
        return left

    def multiplicative(self):
        left = self.unary()
        while (op := self.take_op("*", "/")) is not None:
            left = Binary(op, left, self.unary())
        return left

    def unary(self):
        if self.take_op("-"):
            return Unary("-", self.unary())
        return self.primary()

    def primary(self):
        tok = self.peek()
        if tok.kind == "INT":
            self.advance()
            if tok.text.lower().startswith("0x"):
                return Literal(int(tok.text, 16), hex=True)
            return Literal(int(tok.text))
        if tok.kind == "FLOAT":
            self.advance()
            return Literal(float(tok.text))
        if tok.kind == "STRING":
            self.advance()
            return Literal(tok.text)
        if self.take_op("("):
            inner = self.expr()
            self.expect_op(")")
            return inner
        if tok.kind == "KW" and tok.text.lower() == "exist":
            self.advance()
            self.expect_op("(")
            link = self.path()
            self.expect_op(")")
            return Exist(link)
        if tok.kind == "KW" and tok.text.lower() == "prox":
            self.advance()
            self.expect_op("(")
            frame_tok = self.peek()
            if frame_tok.kind != "IDENT":
                self.fail("expected a coordinate frame name", ("identifier",))
            self.advance()
            args = []
            for _ in range(3):
                self.expect_op(",")
                args.append(self.signed_number())
            self.expect_op(")")
            return Prox(frame_tok.text, args[0], args[1], args[2])
        if tok.kind == "IDENT":
            if self.tokens[self.pos + 1].kind == "OP" and self.tokens[self.pos + 1].text == "(":
                name = self.advance().text
                self.advance()  # '('
                if self.take_op(")"):
                    if name.lower() in FUNCTIONS:
                        self.fail(f"function {name} takes arguments", ("expression",))
                    return MacroCall(name)
                args = [self.expr()]
                while self.take_op(","):
                    args.append(self.expr())
                self.expect_op(")")
                if name.lower() not in FUNCTIONS:
                    self.fail(f"unknown function {name!r}",
                              tuple(sorted(FUNCTIONS)))
                return FuncCall(name.lower(), args)
            return self.path()
        got = tok.text if tok.text else "end of input"
        self.fail(f"found {got!r}", ("expression",))

    def signed_number(self) -> float:
        neg = self.take_op("-") is not None
        tok = self.peek()
        if tok.kind not in ("INT", "FLOAT"):
            self.fail("expected a number", ("number",))
        self.advance()
        val = float(int(tok.text, 16)) if tok.text.lower().startswith("0x") else float(tok.text)
        return -val if neg else val

    def path(self) -> MemberPath:
        segs = [self.path_seg()]
        while self.at_op("."):
            self.advance()
            segs.append(self.path_seg())
        return MemberPath(segs)

    def path_seg(self) -> PathSeg:
        tok = self.peek()
        if tok.kind != "IDENT":
            got = tok.text if tok.text else "end of input"
            self.fail(f"found {got!r}", ("identifier",))
        self.advance()
        index = None
        if self.take_op("["):
            itok = self.peek()
            if itok.kind != "INT":
                self.fail("array index must be an integer literal", ("integer",))
            self.advance()
            index = int(itok.text, 16) if itok.text.lower().startswith("0x") else int(itok.text)
            self.expect_op("]")
        quantified = False
        if self.peek().kind == "QUANT":
            self.advance()
            quantified = True
        return PathSeg(tok.text, index, quantified)


def parse(source: str) -> QueryTree:
    """Parse SXQL text into a QueryTree; raises SyntaxError_ with line/column."""
    parser = _Parser(tokenize(source))
    tree = parser.statement()
    tok = parser.peek()
    if tok.kind != "EOF":
        parser.fail(f"unexpected trailing input {tok.text!r}", ("end of input",))
    return tree

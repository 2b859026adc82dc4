"""Lexer and recursive-descent parser for the mini-language (.gm files)."""

from __future__ import annotations

from dataclasses import dataclass

from .check import check_program
from .nodes import (
    Alloc,
    Assign,
    Binary,
    CallExpr,
    CallStmt,
    FieldLoad,
    FieldStore,
    Function,
    FIELDS,
    If,
    IntLit,
    IsNull,
    NullLit,
    Print,
    Program,
    Return,
    Var,
    While,
)


class ParseError(ValueError):
    def __init__(self, msg: str, line: int, col: int):
        super().__init__(f"{line}:{col}: {msg}")
        self.line = line
        self.col = col


KEYWORDS = {
    "fn", "if", "else", "while", "print", "return",
    "node", "null", "is_null", "and", "or",
}

_SYMBOLS = ("==", "!=", "<=", "(", ")", "{", "}", ";", ",", ".",
            "=", "<", "+", "-", "*", "/", "%")


@dataclass
class Token:
    kind: str  # "int" | "ident" | "kw" | "sym" | "eof"
    text: str
    line: int
    col: int


def tokenize(text: str) -> list:
    tokens = []
    i, line, col = 0, 1, 1
    n = len(text)
    while i < n:
        ch = text[i]
        if ch == "\n":
            i += 1
            line += 1
            col = 1
            continue
        if ch in " \t\r":
            i += 1
            col += 1
            continue
        if ch == "#":
            while i < n and text[i] != "\n":
                i += 1
            continue
        start_col = col
        if ch.isdigit():
            j = i
            while j < n and text[j].isdigit():
                j += 1
            tokens.append(Token("int", text[i:j], line, start_col))
            col += j - i
            i = j
            continue
        if ch.isalpha() or ch == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            word = text[i:j]
            kind = "kw" if word in KEYWORDS else "ident"
            tokens.append(Token(kind, word, line, start_col))
            col += j - i
            i = j
            continue
        for sym in _SYMBOLS:
            if text.startswith(sym, i):
                tokens.append(Token("sym", sym, line, start_col))
                i += len(sym)
                col += len(sym)
                break
        else:
            raise ParseError(f"unexpected character {ch!r}", line, col)
    tokens.append(Token("eof", "", line, col))
    return tokens


class _Parser:
    def __init__(self, tokens: list):
        self.tokens = tokens
        self.pos = 0

    def peek(self) -> Token:
        return self.tokens[self.pos]

    def next(self) -> Token:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def fail(self, msg: str) -> None:
        tok = self.peek()
        raise ParseError(msg, tok.line, tok.col)

    def expect(self, kind: str, text: str = None) -> Token:
        tok = self.peek()
        if tok.kind != kind or (text is not None and tok.text != text):
            want = text if text is not None else kind
            self.fail(f"expected {want!r}, got {tok.text!r}")
        return self.next()

    def at(self, kind: str, text: str = None) -> bool:
        tok = self.peek()
        return tok.kind == kind and (text is None or tok.text == text)

    # --- grammar ---------------------------------------------------------

    def program(self) -> Program:
        functions = []
        while not self.at("eof"):
            functions.append(self.function())
        return Program(tuple(functions))

    def function(self) -> Function:
        self.expect("kw", "fn")
        name = self.expect("ident").text
        self.expect("sym", "(")
        params = []
        if not self.at("sym", ")"):
            params.append(self.expect("ident").text)
            while self.at("sym", ","):
                self.next()
                params.append(self.expect("ident").text)
        self.expect("sym", ")")
        body = self.block()
        return Function(name, tuple(params), body)

    def block(self) -> tuple:
        self.expect("sym", "{")
        stmts = []
        while not self.at("sym", "}"):
            stmts.append(self.stmt())
        self.expect("sym", "}")
        return tuple(stmts)

    def stmt(self):
        if self.at("kw", "if"):
            self.next()
            self.expect("sym", "(")
            cond = self.expr()
            self.expect("sym", ")")
            then_body = self.block()
            else_body = ()
            if self.at("kw", "else"):
                self.next()
                else_body = self.block()
            return If(cond, then_body, else_body)
        if self.at("kw", "while"):
            self.next()
            self.expect("sym", "(")
            cond = self.expr()
            self.expect("sym", ")")
            return While(cond, self.block())
        if self.at("kw", "print"):
            self.next()
            self.expect("sym", "(")
            e = self.expr()
            self.expect("sym", ")")
            self.expect("sym", ";")
            return Print(e)
        if self.at("kw", "return"):
            self.next()
            e = self.expr()
            self.expect("sym", ";")
            return Return(e)
        name = self.expect("ident").text
        if self.at("sym", "("):
            self.next()
            args = self.call_args()
            self.expect("sym", ";")
            return CallStmt(name, args)
        if self.at("sym", "."):
            self.next()
            fld = self.field_name()
            self.expect("sym", "=")
            e = self.expr()
            self.expect("sym", ";")
            return FieldStore(name, fld, e)
        self.expect("sym", "=")
        if self.at("kw", "node"):
            self.next()
            self.expect("sym", "(")
            self.expect("sym", ")")
            self.expect("sym", ";")
            return Alloc(name)
        e = self.expr()
        self.expect("sym", ";")
        return Assign(name, e)

    def field_name(self) -> str:
        tok = self.expect("ident")
        if tok.text not in FIELDS:
            raise ParseError(f"unknown field {tok.text!r}", tok.line, tok.col)
        return tok.text

    def call_args(self) -> tuple:
        args = []
        if not self.at("sym", ")"):
            args.append(self.expr())
            while self.at("sym", ","):
                self.next()
                args.append(self.expr())
        self.expect("sym", ")")
        return tuple(args)

    def expr(self):
        return self.or_expr()

    def or_expr(self):
        e = self.and_expr()
        while self.at("kw", "or"):
            self.next()
            e = Binary("or", e, self.and_expr())
        return e

    def and_expr(self):
        e = self.cmp_expr()
        while self.at("kw", "and"):
            self.next()
            e = Binary("and", e, self.cmp_expr())
        return e

    def cmp_expr(self):
        e = self.add_expr()
        for op in ("==", "!=", "<=", "<"):
            if self.at("sym", op):
                self.next()
                return Binary(op, e, self.add_expr())
        return e

    def add_expr(self):
        e = self.mul_expr()
        while self.at("sym", "+") or self.at("sym", "-"):
            op = self.next().text
            e = Binary(op, e, self.mul_expr())
        return e

    def mul_expr(self):
        e = self.primary()
        while self.at("sym", "*") or self.at("sym", "/") or self.at("sym", "%"):
            op = self.next().text
            e = Binary(op, e, self.primary())
        return e

    def primary(self):
        tok = self.peek()
        if tok.kind == "int":
            self.next()
            return IntLit(int(tok.text))
        if self.at("sym", "-"):
            self.next()
            if self.peek().kind == "int":
                return IntLit(-int(self.next().text))
            return Binary("-", IntLit(0), self.primary())
        if self.at("kw", "null"):
            self.next()
            return NullLit()
        if self.at("kw", "is_null"):
            self.next()
            self.expect("sym", "(")
            name = self.expect("ident").text
            self.expect("sym", ")")
            return IsNull(name)
        if self.at("sym", "("):
            self.next()
            e = self.expr()
            self.expect("sym", ")")
            return e
        if tok.kind == "ident":
            self.next()
            if self.at("sym", "("):
                self.next()
                return CallExpr(tok.text, self.call_args())
            if self.at("sym", "."):
                self.next()
                return FieldLoad(tok.text, self.field_name())
            return Var(tok.text)
        self.fail(f"unexpected token {tok.text!r}")


def parse(text: str, check: bool = True) -> Program:
    """Parse source text; runs the static checks unless check=False."""
    p = _Parser(tokenize(text)).program()
    if check:
        check_program(p)
    return p

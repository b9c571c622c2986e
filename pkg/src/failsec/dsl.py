"""Parser and pretty-printer for ``.fsl`` architecture descriptions.

Grammar::

    file      := { kinddef } productdef
    kinddef   := "component" IDENT "{" "inputs:" ports ";" "outputs:" ports ";" { assign } "}"
    ports     := IDENT { "," IDENT }
    assign    := IDENT ":=" expr ";"
    expr      := "null"
               | "if" expr "==" expr "then" expr "else" expr
               | IDENT "(" expr { "," expr } ")"
               | IDENT
    productdef:= "product" IDENT "{" "inputs:" ports ";" "outputs:" ports ";"
                 { "use" IDENT ":" IDENT ";" } { connect } "}"
    connect   := "connect" endpoint "->" endpoint { "," endpoint } ";"
    endpoint  := IDENT | IDENT "." IDENT

``//`` starts a comment running to the end of the line.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .model import (
    RESERVED_WORDS,
    Architecture,
    ComponentKind,
    Ctor,
    Endpoint,
    Expr,
    IfEq,
    Instance,
    Net,
    NullLit,
    PortRef,
    SourceSpan,
)

__all__ = ["ParseError", "parse", "pretty_print", "format_expr"]


class ParseError(Exception):
    def __init__(self, message: str, span: SourceSpan, expected: list[str] = ()):
        self.message = message
        self.span = span
        self.expected = list(expected)
        super().__init__(str(self))

    def __str__(self):
        text = f"{self.span.line}:{self.span.column}: {self.message}"
        if self.expected:
            text += f" (expected {', '.join(self.expected)})"
        return text


@dataclass(frozen=True)
class _Tok:
    kind: str  # "ident", "eof", or the punctuation itself
    text: str
    span: SourceSpan = field(compare=False)


_PUNCT = (":=", "==", "->", "{", "}", ";", ",", ":", "(", ")", ".")


def _tokenize(text: str) -> list[_Tok]:
    toks: list[_Tok] = []
    i = 0
    byte = 0
    line, col = 1, 1
    n = len(text)
    while i < n:
        ch = text[i]
        if ch == "\n":
            i += 1
            byte += 1
            line += 1
            col = 1
            continue
        if ch.isspace():
            i += 1
            byte += len(ch.encode("utf-8"))
            col += 1
            continue
        if text.startswith("//", i):
            end = text.find("\n", i)
            if end < 0:
                end = n
            chunk = text[i:end]
            byte += len(chunk.encode("utf-8"))
            col += len(chunk)
            i = end
            continue
        if ch.isascii() and (ch.isalpha() or ch == "_"):
            j = i + 1
            while j < n and text[j].isascii() and (text[j].isalnum() or text[j] == "_"):
                j += 1
            span = SourceSpan(byte, byte + j - i, line, col)
            toks.append(_Tok("ident", text[i:j], span))
            byte += j - i
            col += j - i
            i = j
            continue
        for p in _PUNCT:
            if text.startswith(p, i):
                toks.append(_Tok(p, p, SourceSpan(byte, byte + len(p), line, col)))
                i += len(p)
                byte += len(p)
                col += len(p)
                break
        else:
            width = len(ch.encode("utf-8"))
            raise ParseError(
                f"unexpected character {ch!r}",
                SourceSpan(byte, byte + width, line, col),
            )
    toks.append(_Tok("eof", "", SourceSpan(byte, byte, line, col)))
    return toks


def _describe(kind: str) -> str:
    if kind == "ident":
        return "identifier"
    if kind == "eof":
        return "end of input"
    return f"`{kind}`"


class _Parser:
    def __init__(self, text: str):
        self.toks = _tokenize(text)
        self.pos = 0

    @property
    def cur(self) -> _Tok:
        return self.toks[self.pos]

    def error(self, expected: list[str]):
        tok = self.cur
        found = "end of input" if tok.kind == "eof" else repr(tok.text)
        raise ParseError(f"unexpected {found}", tok.span, expected)

    def at_word(self, word: str) -> bool:
        return self.cur.kind == "ident" and self.cur.text == word

    def word(self, word: str) -> _Tok:
        if not self.at_word(word):
            self.error([f"`{word}`"])
        return self.advance()

    def expect(self, kind: str) -> _Tok:
        if self.cur.kind != kind:
            self.error([_describe(kind)])
        return self.advance()

    def advance(self) -> _Tok:
        tok = self.cur
        self.pos += 1
        return tok

    def ident(self) -> _Tok:
        tok = self.cur
        if tok.kind != "ident" or tok.text in RESERVED_WORDS:
            self.error(["identifier"])
        return self.advance()

    def span_from(self, start: SourceSpan) -> SourceSpan:
        last = self.toks[self.pos - 1].span
        return SourceSpan(start.start, last.end, start.line, start.column)

    # -- file structure ----------------------------------------------------

    def file(self) -> Architecture:
        kinds = []
        while self.at_word("component"):
            kinds.append(self.kinddef())
        if not self.at_word("product"):
            self.error(["`component`", "`product`"])
        arch = self.productdef(tuple(kinds))
        if self.cur.kind != "eof":
            self.error(["end of input"])
        return arch

    def ports(self) -> tuple[str, ...]:
        names = [self.ident().text]
        while self.cur.kind == ",":
            self.advance()
            names.append(self.ident().text)
        return tuple(names)

    def port_section(self, label: str) -> tuple[str, ...]:
        self.word(label)
        self.expect(":")
        names = self.ports()
        self.expect(";")
        return names

    def kinddef(self) -> ComponentKind:
        start = self.word("component").span
        name = self.ident().text
        self.expect("{")
        inputs = self.port_section("inputs")
        outputs = self.port_section("outputs")
        behavior = []
        while self.cur.kind != "}":
            if self.cur.kind != "ident" or self.cur.text in RESERVED_WORDS:
                self.error(["identifier", "`}`"])
            port = self.advance().text
            self.expect(":=")
            behavior.append((port, self.expr()))
            self.expect(";")
        self.advance()
        return ComponentKind(name, inputs, outputs, tuple(behavior), span=self.span_from(start))

    def productdef(self, kinds) -> Architecture:
        start = self.word("product").span
        name = self.ident().text
        self.expect("{")
        inputs = self.port_section("inputs")
        outputs = self.port_section("outputs")
        instances = []
        while self.at_word("use"):
            s = self.advance().span
            iname = self.ident().text
            self.expect(":")
            kname = self.ident().text
            self.expect(";")
            instances.append(Instance(iname, kname, span=self.span_from(s)))
        nets = []
        while self.at_word("connect"):
            s = self.advance().span
            driver = self.endpoint()
            self.expect("->")
            readers = [self.endpoint()]
            while self.cur.kind == ",":
                self.advance()
                readers.append(self.endpoint())
            self.expect(";")
            nets.append(Net(driver, tuple(readers), span=self.span_from(s)))
        if self.cur.kind != "}":
            expected = ["`connect`", "`}`"] if nets else ["`use`", "`connect`", "`}`"]
            self.error(expected)
        self.advance()
        return Architecture(
            name, inputs, outputs, kinds, tuple(instances), tuple(nets),
            span=self.span_from(start),
        )

    def endpoint(self) -> Endpoint:
        first = self.ident()
        if self.cur.kind == ".":
            self.advance()
            port = self.ident()
            return Endpoint(first.text, port.text, span=self.span_from(first.span))
        return Endpoint(None, first.text, span=first.span)

    # -- expressions -------------------------------------------------------

    def expr(self) -> Expr:
        tok = self.cur
        if tok.kind != "ident":
            self.error(["expression"])
        if tok.text == "null":
            self.advance()
            return NullLit(span=tok.span)
        if tok.text == "if":
            self.advance()
            left = self.expr()
            self.expect("==")
            right = self.expr()
            self.word("then")
            then = self.expr()
            self.word("else")
            orelse = self.expr()
            return IfEq(left, right, then, orelse, span=self.span_from(tok.span))
        if tok.text in RESERVED_WORDS:
            self.error(["expression"])
        self.advance()
        if self.cur.kind == "(":
            self.advance()
            args = [self.expr()]
            while self.cur.kind == ",":
                self.advance()
                args.append(self.expr())
            self.expect(")")
            return Ctor(tok.text, tuple(args), span=self.span_from(tok.span))
        return PortRef(tok.text, span=tok.span)


def parse(text: str) -> Architecture:
    """Parse ``.fsl`` source into an (unvalidated) :class:`Architecture`.

    Raises :class:`ParseError` at the first syntax error. Semantic problems
    such as unknown ports are left to :func:`failsec.model.validate`.
    """
    return _Parser(text).file()


def format_expr(e: Expr) -> str:
    if isinstance(e, PortRef):
        return e.port
    if isinstance(e, NullLit):
        return "null"
    if isinstance(e, Ctor):
        return f"{e.constructor}({', '.join(format_expr(a) for a in e.args)})"
    return (
        f"if {format_expr(e.left)} == {format_expr(e.right)} "
        f"then {format_expr(e.then)} else {format_expr(e.orelse)}"
    )


def pretty_print(arch: Architecture) -> str:
    lines: list[str] = []
    for kind in arch.kinds:
        lines.append(f"component {kind.name} {{")
        lines.append(f"  inputs: {', '.join(kind.inputs)};")
        lines.append(f"  outputs: {', '.join(kind.outputs)};")
        for port, expr in kind.behavior:
            lines.append(f"  {port} := {format_expr(expr)};")
        lines.append("}")
        lines.append("")
    lines.append(f"product {arch.name} {{")
    lines.append(f"  inputs: {', '.join(arch.inputs)};")
    lines.append(f"  outputs: {', '.join(arch.outputs)};")
    for inst in arch.instances:
        lines.append(f"  use {inst.name}: {inst.kind};")
    for net in arch.nets:
        if not net.readers:
            raise ValueError(f"net {net.name} has no readers and cannot be written as a connect")
        lines.append(f"  connect {net.driver} -> {', '.join(str(r) for r in net.readers)};")
    lines.append("}")
    return "\n".join(lines) + "\n"

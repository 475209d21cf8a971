"""Tokenizer.

Spans are byte offsets into the UTF-8 encoding of the source, end-exclusive.
Comments (`//` to end of line, non-nesting `/* */`) are skipped but their
spans are kept so the service can tell when the cursor sits inside one.
Temporal keywords and the prime mark are lexed as dedicated tokens so the
parser can reject them with a pointed message.
"""
from __future__ import annotations

from dataclasses import dataclass

from .diagnostics import Diagnostic, Span, SYNTAX_ERROR, error

# Token kinds.
NAME = "NAME"
INT = "INT"
KEYWORD = "KEYWORD"
SYMBOL = "SYMBOL"
TEMPORAL = "TEMPORAL"
PRIME = "PRIME"
EOF = "EOF"

KEYWORDS = frozenset(
    {
        "abstract", "sig", "extends", "in", "fact", "pred", "run", "for",
        "one", "lone", "some", "no", "all", "set", "not", "and", "or",
    }
)

# Static fragment only: these lex to TEMPORAL tokens and are parse errors.
TEMPORAL_KEYWORDS = frozenset(
    {"var", "always", "eventually", "after", "until", "once", "historically"}
)

# Longest match first.
SYMBOLS = ("<=>", "=>", "&&", "||", "->", "!=", "{", "}", "(", ")", ":", ",",
           "|", ".", "^", "*", "~", "+", "-", "&", "=", "!")


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    span: Span

    def is_kw(self, *words: str) -> bool:
        return self.kind == KEYWORD and self.text in words

    def is_sym(self, *syms: str) -> bool:
        return self.kind == SYMBOL and self.text in syms


@dataclass
class LexResult:
    tokens: list[Token]
    comments: list[Span]
    diagnostics: list[Diagnostic]


def _is_name_start(ch: str) -> bool:
    return ch.isalpha() or ch == "_"


def _is_name_char(ch: str) -> bool:
    return ch.isalnum() or ch == "_"


def tokenize(source: str) -> LexResult:
    tokens: list[Token] = []
    comments: list[Span] = []
    diags: list[Diagnostic] = []
    i = 0  # character index
    b = 0  # byte offset of character i
    n = len(source)

    def blen(s: str) -> int:
        return len(s.encode("utf-8"))

    while i < n:
        ch = source[i]
        if ch in " \t\r\n":
            i += 1
            b += blen(ch)
            continue
        if source.startswith("//", i):
            start = b
            while i < n and source[i] != "\n":
                b += blen(source[i])
                i += 1
            comments.append((start, b))
            continue
        if source.startswith("/*", i):
            start = b
            i += 2
            b += 2
            while i < n and not source.startswith("*/", i):
                b += blen(source[i])
                i += 1
            if i < n:
                i += 2
                b += 2
            else:
                diags.append(error(SYNTAX_ERROR, (start, b), "unterminated block comment"))
            comments.append((start, b))
            continue
        if ch == "'":
            tokens.append(Token(PRIME, "'", (b, b + 1)))
            i += 1
            b += 1
            continue
        if _is_name_start(ch):
            start_i, start_b = i, b
            while i < n and _is_name_char(source[i]):
                b += blen(source[i])
                i += 1
            word = source[start_i:i]
            if word in TEMPORAL_KEYWORDS:
                kind = TEMPORAL
            elif word in KEYWORDS:
                kind = KEYWORD
            else:
                kind = NAME
            tokens.append(Token(kind, word, (start_b, b)))
            continue
        if ch.isdigit():
            start_b = b
            start_i = i
            while i < n and source[i].isdigit():
                b += 1
                i += 1
            tokens.append(Token(INT, source[start_i:i], (start_b, b)))
            continue
        for sym in SYMBOLS:
            if source.startswith(sym, i):
                tokens.append(Token(SYMBOL, sym, (b, b + len(sym))))
                i += len(sym)
                b += len(sym)
                break
        else:
            diags.append(error(SYNTAX_ERROR, (b, b + blen(ch)), f"unexpected character {ch!r}"))
            i += 1
            b += blen(ch)

    tokens.append(Token(EOF, "", (b, b)))
    return LexResult(tokens, comments, diags)

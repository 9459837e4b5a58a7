"""Parser for the discrete subset of the BIF network interchange format.

Supported grammar (whitespace-insensitive, ``//`` and ``/* */`` comments)::

    network <name> { property ... ; }
    variable <v> { type discrete [ k ] { s1, ..., sk }; property ... ; }
    probability ( <v> | <p1>, ..., <pm> ) {
        table x1, ..., xn;                 # roots, or child-major full table
        (<state-of-p1>, ..., <state-of-pm>) x1, ..., xk;
        default x1, ..., xk;
        property ... ;
    }

``property`` statements are ignored, except that ``property target = <v>;``
inside the network block names the target variable. A ``table`` under a
conditional block lists the child's first state across all parent
configurations, then the second state, and so on (child-major), with parent
configurations in row-major order (last parent fastest).
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..errors import ParseError, UnknownVariableError, ValidationError
from .model import DiscreteCpd, ScmModel, Task

BIF_ROW_TOL = 1e-6

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+|//[^\n]*|/\*.*?\*/)
  | (?P<string>"[^"]*")
  | (?P<punct>[{}()\[\],;|])
  | (?P<word>[^\s{}()\[\],;|"]+)
    """,
    re.S | re.X,
)


@dataclass(frozen=True)
class _Tok:
    kind: str
    text: str
    offset: int


def _tokenize(text: str) -> list[_Tok]:
    toks = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise _error(text, pos, f"unexpected character {text[pos]!r}")
        if m.lastgroup != "ws":
            toks.append(_Tok(m.lastgroup, m.group(), pos))
        pos = m.end()
    return toks


def _error(text: str, offset: int, msg: str) -> ParseError:
    line = text.count("\n", 0, offset) + 1
    col = offset - (text.rfind("\n", 0, offset) + 1) + 1
    return ParseError(msg, line, col, offset)


class _Parser:
    def __init__(self, text: str) -> None:
        self.text = text
        self.toks = _tokenize(text)
        self.i = 0

    def peek(self) -> Optional[_Tok]:
        return self.toks[self.i] if self.i < len(self.toks) else None

    def fail(self, msg: str, tok: Optional[_Tok] = None) -> ParseError:
        tok = tok or self.peek()
        offset = tok.offset if tok else len(self.text)
        return _error(self.text, offset, msg)

    def next(self, what: str = "token") -> _Tok:
        tok = self.peek()
        if tok is None:
            raise self.fail(f"unexpected end of input, expected {what}")
        self.i += 1
        return tok

    def expect(self, text: str) -> _Tok:
        tok = self.peek()
        if tok is None or tok.text != text:
            found = "end of input" if tok is None else repr(tok.text)
            raise self.fail(f"expected {text!r}, found {found}")
        self.i += 1
        return tok

    def word(self, what: str) -> _Tok:
        tok = self.next(what)
        if tok.kind != "word":
            raise self.fail(f"expected {what}, found {tok.text!r}", tok)
        return tok

    def accept(self, text: str) -> bool:
        tok = self.peek()
        if tok is not None and tok.text == text:
            self.i += 1
            return True
        return False

    def number(self) -> float:
        tok = self.word("a number")
        try:
            return float(tok.text)
        except ValueError:
            raise self.fail(f"expected a number, found {tok.text!r}", tok) from None

    def numbers_until_semicolon(self) -> list[float]:
        vals = [self.number()]
        while self.accept(","):
            vals.append(self.number())
        self.expect(";")
        return vals

    def skip_property(self) -> list[_Tok]:
        body = []
        while True:
            tok = self.next("';'")
            if tok.text == ";":
                return body
            body.append(tok)


def parse_bif(text: str, target: Optional[str] = None, task: Optional[Task | str] = None, name: Optional[str] = None) -> ScmModel:
    """Parse a discrete BIF document into a validated :class:`ScmModel`.

    ``target`` overrides a ``property target = v;`` declaration; ``task``
    defaults to classification when a target is known.
    """
    p = _Parser(text)
    if p.peek() is None or p.peek().text != "network":
        raise p.fail("expected 'network' block")
    p.expect("network")
    net_name = p.word("network name").text
    declared_target = None
    p.expect("{")
    while not p.accept("}"):
        tok = p.word("'property' or '}'")
        if tok.text != "property":
            raise p.fail(f"unexpected {tok.text!r} in network block", tok)
        body = [t.text.strip('"') for t in p.skip_property()]
        joined = " ".join(body).replace("=", " = ").split()
        if len(joined) == 3 and joined[0] == "target" and joined[1] == "=":
            declared_target = joined[2]

    states: dict[str, tuple[str, ...]] = {}
    var_tok: dict[str, _Tok] = {}
    probs: dict[str, tuple[tuple[str, ...], np.ndarray]] = {}
    while p.peek() is not None:
        tok = p.word("'variable' or 'probability'")
        if tok.text == "variable":
            vname = p.word("variable name")
            if vname.text in states:
                raise p.fail(f"variable {vname.text!r} declared twice", vname)
            states[vname.text] = _variable_body(p)
            var_tok[vname.text] = vname
        elif tok.text == "probability":
            child, parents, table = _probability_block(p, states)
            if child in probs:
                raise ValidationError("probability block given twice", child)
            probs[child] = (parents, table)
        else:
            raise p.fail(f"expected 'variable' or 'probability', found {tok.text!r}", tok)

    for v in states:
        if v not in probs:
            raise ValidationError("variable has no probability block", v)
    cpds = []
    for v in states:
        parents, table = probs[v]
        cpds.append(DiscreteCpd(v, states[v], parents, table))
    target = target if target is not None else declared_target
    if target is not None and target not in states:
        raise UnknownVariableError(target, "BIF document")
    if task is None and target is not None:
        task = Task.CLASSIFICATION
    return ScmModel.from_cpds(cpds, target=target, task=task, name=name or net_name)


def _variable_body(p: _Parser) -> tuple[str, ...]:
    p.expect("{")
    found: Optional[tuple[str, ...]] = None
    while not p.accept("}"):
        tok = p.word("'type' or 'property'")
        if tok.text == "property":
            p.skip_property()
            continue
        if tok.text != "type":
            raise p.fail(f"unexpected {tok.text!r} in variable block", tok)
        kind = p.word("variable type")
        if kind.text != "discrete":
            raise p.fail(f"only discrete variables are supported, got {kind.text!r}", kind)
        p.expect("[")
        k_tok = p.word("state count")
        try:
            k = int(k_tok.text)
        except ValueError:
            raise p.fail("state count must be an integer", k_tok) from None
        p.expect("]")
        p.expect("{")
        names = [p.word("state name").text]
        while p.accept(","):
            names.append(p.word("state name").text)
        p.expect("}")
        p.expect(";")
        if len(names) != k:
            raise p.fail(f"declared {k} states but listed {len(names)}", k_tok)
        found = tuple(names)
    if found is None:
        raise p.fail("variable block without a type declaration")
    return found


def _probability_block(p: _Parser, states: dict[str, tuple[str, ...]]):
    p.expect("(")
    child_tok = p.word("variable name")
    names = [child_tok]
    parents_toks = []
    if p.accept("|"):
        parents_toks.append(p.word("parent name"))
        while p.accept(","):
            parents_toks.append(p.word("parent name"))
    p.expect(")")
    for t in names + parents_toks:
        if t.text not in states:
            raise UnknownVariableError(t.text, f"probability block (line {p.text.count(chr(10), 0, t.offset) + 1})")
    child = child_tok.text
    parents = tuple(t.text for t in parents_toks)
    k = len(states[child])
    cards = [len(states[q]) for q in parents]
    n_rows = int(np.prod(cards)) if cards else 1
    table = np.full((n_rows, k), np.nan)
    default = None

    p.expect("{")
    while not p.accept("}"):
        tok = p.next("table entry")
        if tok.text == "property":
            p.skip_property()
        elif tok.text == "table":
            vals = p.numbers_until_semicolon()
            if len(vals) != n_rows * k:
                raise p.fail(f"table for {child!r} has {len(vals)} entries, expected {n_rows * k}", tok)
            table = np.array(vals).reshape(k, n_rows).T if parents else np.array(vals).reshape(1, k)
        elif tok.text == "default":
            default = p.numbers_until_semicolon()
            if len(default) != k:
                raise p.fail(f"default row for {child!r} has {len(default)} entries, expected {k}", tok)
        elif tok.text == "(":
            config = [p.word("parent state")]
            while p.accept(","):
                config.append(p.word("parent state"))
            p.expect(")")
            if len(config) != len(parents):
                raise p.fail(f"configuration has {len(config)} states for {len(parents)} parents", tok)
            row = 0
            for q, c, t in zip(parents, cards, config):
                if t.text not in states[q]:
                    raise p.fail(f"{t.text!r} is not a state of {q!r}", t)
                row = row * c + states[q].index(t.text)
            vals = p.numbers_until_semicolon()
            if len(vals) != k:
                raise p.fail(f"row has {len(vals)} entries, expected {k}", tok)
            table[row] = vals
        else:
            raise p.fail(f"unexpected {tok.text!r} in probability block", tok)

    for r in range(n_rows):
        if np.isnan(table[r]).any():
            if default is None:
                raise ValidationError(f"row {r} is not specified", child)
            table[r] = default
        s = table[r].sum()
        if abs(s - 1.0) > BIF_ROW_TOL or (table[r] < 0).any():
            raise ValidationError(f"row {r} sums to {s:.9g}, not 1", child)
        table[r] = table[r] / s
    return child, parents, table

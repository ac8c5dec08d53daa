"""Plain-text parser/printer for programs, plus the JSON emitter.

Grammar (one statement per `.`, `#` starts a line comment):

    fact      p(c1,...,cn).        p.
    rule      a1, ..., an -> exists V1,...,Vk. head.
    query     ? a1, ..., am | b1, ..., bk.

Lowercase identifiers are constants/predicates, uppercase are variables.
Canonical predicates are written `base_[l1,...,lm]` with the bracketed
shape part of the predicate identity.  Bare numerals are reserved for
shape labels and are rejected as terms.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field

from .core import (Atom, Constant, Database, Instance, Null, Ontology, Query,
                   Rule, Variable)

JSON_SCHEMA = "shychase/1"


class ParseError(ValueError):
    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"{line}:{col}: {message}")
        self.line = line
        self.col = col


@dataclass(frozen=True)
class Program:
    database: Database
    ontology: Ontology
    queries: tuple = ()


_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<comment>\#[^\n]*)
  | (?P<arrow>->)
  | (?P<int>\d+)
  | (?P<ident>[a-z]\w*)
  | (?P<var>[A-Z]\w*)
  | (?P<punct>[()\[\],.|?])
    """,
    re.VERBOSE,
)


@dataclass
class _Token:
    kind: str
    text: str
    line: int
    col: int


def _tokenize(text: str):
    tokens = []
    line, col, pos = 1, 1, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, col)
        kind = m.lastgroup
        tok = m.group()
        if kind not in ("ws", "comment"):
            tokens.append(_Token(kind, tok, line, col))
        nl = tok.count("\n")
        if nl:
            line += nl
            col = len(tok) - tok.rfind("\n")
        else:
            col += len(tok)
        pos = m.end()
    tokens.append(_Token("eof", "", line, col))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.toks = _tokenize(text)
        self.i = 0
        self.arities: dict = {}

    def peek(self) -> _Token:
        return self.toks[self.i]

    def next(self) -> _Token:
        t = self.toks[self.i]
        self.i += 1
        return t

    def error(self, message, tok=None):
        tok = tok or self.peek()
        raise ParseError(message, tok.line, tok.col)

    def expect(self, text):
        t = self.next()
        if t.text != text:
            self.error(f"expected {text!r}, found {t.text or 'end of input'!r}", t)
        return t

    def check_arity(self, atom: Atom, tok: _Token):
        name = atom.predicate_name
        seen = self.arities.setdefault(name, atom.arity)
        if seen != atom.arity:
            self.error(
                f"predicate {name!r} used with arity {atom.arity}, previously {seen}", tok
            )

    def parse_term(self):
        t = self.next()
        if t.kind == "ident":
            return Constant(t.text)
        if t.kind == "var":
            return Variable(t.text)
        if t.kind == "int":
            self.error("numeric terms are reserved for shape labels", t)
        self.error(f"expected a term, found {t.text or 'end of input'!r}", t)

    def parse_shape(self):
        self.expect("[")
        labels = []
        while True:
            t = self.next()
            if t.kind == "int":
                labels.append(int(t.text))
            elif t.kind == "ident":
                labels.append(t.text)
            else:
                self.error("shape labels are positive integers or constants", t)
            if self.peek().text == ",":
                self.next()
            else:
                break
        self.expect("]")
        return tuple(labels)

    def parse_atom(self) -> Atom:
        tok = self.next()
        if tok.kind != "ident":
            self.error(f"expected a predicate, found {tok.text or 'end of input'!r}", tok)
        name, shape = tok.text, None
        if self.peek().text == "[":
            if not name.endswith("_"):
                self.error("canonical predicates are written base_[...]", tok)
            name = name[:-1]
            shape = self.parse_shape()
        args = ()
        if self.peek().text == "(":
            self.next()
            if self.peek().text == ")":
                self.next()
            else:
                terms = [self.parse_term()]
                while self.peek().text == ",":
                    self.next()
                    terms.append(self.parse_term())
                self.expect(")")
                args = tuple(terms)
        if shape is not None:
            mu = len({l for l in shape if isinstance(l, int)})
            if mu != len(args):
                self.error(f"shape [{','.join(map(str, shape))}] expects {mu} argument(s)", tok)
        atom = Atom(name, args, shape)
        self.check_arity(atom, tok)
        return atom

    def parse_atom_list(self):
        atoms = [self.parse_atom()]
        while self.peek().text == ",":
            self.next()
            atoms.append(self.parse_atom())
        return atoms

    def parse_query(self) -> Query:
        self.expect("?")
        disjuncts = [tuple(self.parse_atom_list())]
        while self.peek().text == "|":
            self.next()
            disjuncts.append(tuple(self.parse_atom_list()))
        self.expect(".")
        return Query(tuple(disjuncts))

    def parse_statement(self, facts, rules, queries):
        if self.peek().text == "?":
            queries.append(self.parse_query())
            return
        start = self.peek()
        atoms = self.parse_atom_list()
        t = self.next()
        if t.text == ".":
            if len(atoms) != 1:
                self.error("a fact is a single atom", start)
            atom = atoms[0]
            if any(isinstance(a, Variable) for a in atom.args):
                self.error("facts must be variable-free", start)
            facts.append(atom)
            return
        if t.text != "->":
            self.error(f"expected '->' or '.', found {t.text or 'end of input'!r}", t)
        evs = []
        if self.peek().text == "exists":
            self.next()
            while True:
                vt = self.next()
                if vt.kind != "var":
                    self.error("expected a variable after 'exists'", vt)
                evs.append(Variable(vt.text))
                if self.peek().text == ",":
                    self.next()
                else:
                    break
            self.expect(".")
        head_tok = self.peek()
        head = self.parse_atom()
        self.expect(".")
        body_vars = {v for a in atoms for v in a.variables()}
        for v in head.variables():
            if v not in body_vars and v not in evs:
                self.error(f"head variable {v.name} is neither universal nor listed in 'exists'",
                           head_tok)
        for v in evs:
            if v in body_vars:
                self.error(f"'exists' variable {v.name} also occurs in the body", head_tok)
        rules.append((tuple(atoms), head))

    def parse_program(self) -> Program:
        facts, rules, queries = [], [], []
        while self.peek().kind != "eof":
            self.parse_statement(facts, rules, queries)
        onto = Ontology(tuple(
            _freshen(Rule(f"r{i + 1}", body, head), i + 1)
            for i, (body, head) in enumerate(rules)
        ))
        return Program(Database(frozenset(facts)), onto, tuple(queries))


def _freshen(rule: Rule, index: int) -> Rule:
    """Rename variables X -> X#index so distinct rules share no variable."""
    sub = {v: Variable(f"{v.name}#{index}") for a in rule.atoms() for v in a.variables()}

    def rn(atom):
        return Atom(atom.pred, tuple(sub.get(t, t) for t in atom.args), atom.shape)

    return Rule(rule.id, tuple(rn(a) for a in rule.body), rn(rule.head))


def parse_program(text: str) -> Program:
    return _Parser(text).parse_program()


def parse_query(text: str) -> Query:
    """Parse a single `? ...` statement (convenience for tests and CLI)."""
    p = _Parser(text)
    q = p.parse_query()
    if p.peek().kind != "eof":
        p.error("trailing input after query")
    return q


# ---------------------------------------------------------------------------
# printing


def print_term(t) -> str:
    if isinstance(t, Constant):
        return t.name
    if isinstance(t, Null):
        return f"_:n{t.id}"
    if isinstance(t, Variable):
        return t.name.split("#", 1)[0]
    return str(t)


def print_atom(atom: Atom) -> str:
    if not atom.args:
        return atom.predicate_name
    return f"{atom.predicate_name}({','.join(print_term(t) for t in atom.args)})"


def print_rule(rule: Rule) -> str:
    body = ", ".join(print_atom(a) for a in rule.body)
    evs = sorted(v.name for v in rule.ev)
    ex = ""
    if evs:
        ex = "exists " + ",".join(v.split("#", 1)[0] for v in evs) + ". "
    return f"{body} -> {ex}{print_atom(rule.head)}."


def print_query(q: Query) -> str:
    return "? " + " | ".join(", ".join(print_atom(a) for a in d) for d in q.disjuncts) + "."


def print_program(p: Program) -> str:
    lines = [print_atom(a) + "." for a in sorted(p.database, key=Atom.sort_key)]
    lines += [print_rule(r) for r in p.ontology]
    lines += [print_query(q) for q in p.queries]
    return "\n".join(lines) + ("\n" if lines else "")


# ---------------------------------------------------------------------------
# JSON


def _term_json(t):
    if isinstance(t, Constant):
        return {"const": t.name}
    if isinstance(t, Null):
        return {"null": t.id}
    if isinstance(t, Variable):
        return {"var": t.name}
    return {"null": print_term(t)}


def _atom_json(a: Atom):
    out = {"pred": a.pred, "args": [_term_json(t) for t in a.args]}
    if a.shape is not None:
        out["shape"] = list(a.shape)
    return out


def _rule_json(r: Rule):
    return {"id": r.id, "body": [_atom_json(a) for a in r.body], "head": _atom_json(r.head)}


def to_jsonable(obj):
    if isinstance(obj, Program):
        return {
            "schema": JSON_SCHEMA,
            "kind": "program",
            "database": [_atom_json(a) for a in sorted(obj.database, key=Atom.sort_key)],
            "rules": [_rule_json(r) for r in obj.ontology],
            "queries": [
                [[_atom_json(a) for a in d] for d in q.disjuncts] for q in obj.queries
            ],
        }
    if isinstance(obj, Instance):
        return {
            "schema": JSON_SCHEMA,
            "kind": "instance",
            "atoms": [_atom_json(a) for a in obj.sorted_atoms()],
        }
    if isinstance(obj, Database):
        return {
            "schema": JSON_SCHEMA,
            "kind": "database",
            "atoms": [_atom_json(a) for a in sorted(obj, key=Atom.sort_key)],
        }
    if isinstance(obj, dict):
        return {"schema": JSON_SCHEMA, "kind": "report", **obj}
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def emit_json(obj) -> str:
    return json.dumps(to_jsonable(obj), indent=2, sort_keys=True) + "\n"

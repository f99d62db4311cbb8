"""Terms, program model, parser and pretty-printer for probabilistic abductive programs.

Concrete syntax (``%`` starts a line comment)::

    abducible enter/2.
    0.7 :: enter(P,H) -> has_keys(P,H).
    up(X), down(X) -> false.
    hasnopower(N2) :- edge(_,N1,N2), hasnopower(N1).
    has_keys(husband,house1).

Uppercase-initial identifiers (and ``_``) are variables, lowercase
identifiers and integers are constants.  ``=`` and ``\\=`` are the only
infix operators.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Union

__all__ = [
    "Var", "Struct", "Term", "Clause", "IntegrityConstraint", "Program", "Goal",
    "ParseError", "parse_program", "parse_goal", "rename_apart", "fresh_var",
    "format_term", "format_ic", "format_clause", "format_program", "term_vars",
    "TRUE", "FALSE", "BUILTINS",
]

_ids = itertools.count(1)


def next_id() -> int:
    return next(_ids)


def reserve_ids(start: int) -> None:
    """Restart the variable counter at ``start`` (used by worker processes)."""
    global _ids
    _ids = itertools.count(start)


class Var:
    """A logic variable; ``universal`` distinguishes IC/KB variables from existential ones."""

    __slots__ = ("id", "name", "universal")

    def __init__(self, id: int, name: str, universal: bool = False):
        self.id = id
        self.name = name
        self.universal = universal

    def __eq__(self, other):
        return isinstance(other, Var) and other.id == self.id

    def __hash__(self):
        return self.id

    def __lt__(self, other):
        return self.id < other.id

    def __repr__(self):
        return f"{self.name}#{self.id}{'!' if self.universal else ''}"

    ground = False


class Struct:
    """Compound term or atom; a constant is a Struct with no arguments."""

    __slots__ = ("functor", "args", "ground", "key", "_hash")

    def __init__(self, functor: Union[str, int], args: tuple = ()):
        self.functor = functor
        self.args = args
        self.ground = all(a.ground for a in args)
        self.key = (functor, len(args))
        self._hash = hash((functor, args))

    @property
    def arity(self) -> int:
        return len(self.args)

    def __eq__(self, other):
        if self is other:
            return True
        return (isinstance(other, Struct) and self._hash == other._hash
                and self.functor == other.functor and self.args == other.args)

    def __hash__(self):
        return self._hash

    def __repr__(self):
        return format_term(self)


Term = Union[Var, Struct]

TRUE = Struct("true")
FALSE = Struct("false")
BUILTINS = {("true", 0), ("false", 0), ("=", 2), ("\\=", 2)}


def fresh_var(name: str = "_", universal: bool = False) -> Var:
    return Var(next_id(), name, universal)


def term_vars(t: Term, acc: dict | None = None) -> dict:
    """Variables of ``t`` in order of first appearance (as dict keys)."""
    if acc is None:
        acc = {}
    if isinstance(t, Var):
        acc.setdefault(t, None)
    elif not t.ground:
        for a in t.args:
            term_vars(a, acc)
    return acc


@dataclass(frozen=True)
class Clause:
    head: Struct
    body: tuple[Struct, ...] = ()


@dataclass(frozen=True)
class IntegrityConstraint:
    """``body -> head`` where head is a disjunction of conjunctions.

    ``orig_vars`` are the body variables of the pristine constraint and
    ``tracked`` their current values in this instance; together they form the
    decoration substitution accumulated since loading.
    """

    id: int
    prob: float | None
    body: tuple[Struct, ...]
    head: tuple[tuple[Struct, ...], ...]
    orig_vars: tuple[Var, ...] = ()
    tracked: tuple[Term, ...] = ()

    @property
    def probabilistic(self) -> bool:
        return self.prob is not None

    @property
    def original(self) -> int:
        return self.id

    @property
    def theta(self) -> dict[Var, Term]:
        return {v: t for v, t in zip(self.orig_vars, self.tracked) if t != v}


@dataclass(frozen=True)
class Program:
    kb: tuple[Clause, ...] = ()
    ics: tuple[IntegrityConstraint, ...] = ()
    abducibles: frozenset = frozenset()
    clauses_by_pred: dict = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        index: dict[tuple, list] = {}
        for c in self.kb:
            index.setdefault(c.head.key, []).append(c)
        object.__setattr__(self, "clauses_by_pred", {k: tuple(v) for k, v in index.items()})

    def clauses_for(self, atom: Struct) -> tuple[Clause, ...]:
        return self.clauses_by_pred.get(atom.key, ())

    def is_abducible(self, atom: Struct) -> bool:
        return atom.key in self.abducibles

    def kind(self, atom: Struct) -> str:
        if atom.key in BUILTINS:
            return "builtin"
        return "abducible" if atom.key in self.abducibles else "defined"

    @property
    def pics(self) -> tuple[IntegrityConstraint, ...]:
        return tuple(ic for ic in self.ics if ic.probabilistic)

    @property
    def crisp_ics(self) -> tuple[IntegrityConstraint, ...]:
        return tuple(ic for ic in self.ics if not ic.probabilistic)

    def pic(self, ic_id: int) -> IntegrityConstraint:
        for ic in self.ics:
            if ic.probabilistic and ic.id == ic_id:
                return ic
        raise KeyError(f"no probabilistic constraint with id {ic_id}")

    @property
    def probabilities(self) -> dict[int, float]:
        return {ic.id: ic.prob for ic in self.pics}

    def constants(self) -> set[Struct]:
        out: set[Struct] = set()
        for c in self.kb:
            for a in (c.head, *c.body):
                _collect_constants(a, out)
        for ic in self.ics:
            for a in itertools.chain(ic.body, *ic.head):
                _collect_constants(a, out)
        return out


def _collect_constants(atom: Struct, out: set) -> None:
    for a in atom.args:
        if isinstance(a, Struct):
            if a.args:
                _collect_constants(a, out)
            else:
                out.add(a)


@dataclass(frozen=True)
class Goal:
    literals: tuple[Struct, ...]
    free_vars: tuple[Var, ...]


# ---------------------------------------------------------------------------
# renaming

def rename_term(t: Term, mapping: dict, universal: bool | None = None) -> Term:
    if isinstance(t, Var):
        v = mapping.get(t)
        if v is None:
            v = mapping[t] = Var(next_id(), t.name, t.universal if universal is None else universal)
        return v
    if t.ground:
        return t
    return Struct(t.functor, tuple(rename_term(a, mapping, universal) for a in t.args))


def rename_apart(x, universal: bool | None = None, only_universal: bool = False):
    """Fresh copy of a clause or constraint; ``universal`` retags the new variables.

    With ``only_universal`` existential variables are shared, not renamed
    (copying a partially solved constraint inside a derivation).
    """
    mapping: dict = {}
    if only_universal:
        mapping = _Shared(universal)

    def r(t):
        return rename_term(t, mapping, universal)

    if isinstance(x, Clause):
        return Clause(r(x.head), tuple(r(b) for b in x.body))
    if isinstance(x, IntegrityConstraint):
        return IntegrityConstraint(
            x.id, x.prob, tuple(r(b) for b in x.body),
            tuple(tuple(r(a) for a in conj) for conj in x.head),
            x.orig_vars, tuple(r(t) for t in x.tracked))
    raise TypeError(f"cannot rename {type(x).__name__}")


class _Shared(dict):
    """Renaming map that leaves existential variables in place."""

    def __init__(self, universal):
        super().__init__()
        self._universal = universal

    def get(self, v, default=None):
        if not v.universal:
            return v
        return super().get(v, default)


# ---------------------------------------------------------------------------
# pretty printing

def format_term(t: Term, names: dict | None = None) -> str:
    if isinstance(t, Var):
        if names is not None:
            return names.get(t, t.name)
        return t.name if t.name != "_" else f"_G{t.id}"
    if t.functor in ("=", "\\=") and len(t.args) == 2:
        return f"{format_term(t.args[0], names)} {t.functor} {format_term(t.args[1], names)}"
    if not t.args:
        return str(t.functor)
    return f"{t.functor}({','.join(format_term(a, names) for a in t.args)})"


def _display_names(terms: Iterable[Term]) -> dict:
    """Unique display names for the variables in ``terms``."""
    seen: dict = {}
    for t in terms:
        term_vars(t, seen)
    names, used = {}, set()
    for v in seen:
        base = v.name if v.name != "_" else "_G"
        name, n = base, 1
        while name in used:
            name, n = f"{base}{n}", n + 1
        used.add(name)
        names[v] = name
    return names


def format_conj(atoms: Iterable[Struct], names=None) -> str:
    return ", ".join(format_term(a, names) for a in atoms)


def format_ic(ic: IntegrityConstraint) -> str:
    names = _display_names(itertools.chain(ic.body, *ic.head))
    body = format_conj(ic.body, names) if ic.body else "true"
    head = " ; ".join(format_conj(c, names) if c else "true" for c in ic.head) if ic.head else "false"
    prefix = f"{ic.prob!r} :: " if ic.probabilistic else ""
    return f"{prefix}{body} -> {head}."


def format_clause(c: Clause) -> str:
    names = _display_names((c.head, *c.body))
    if not c.body:
        return f"{format_term(c.head, names)}."
    return f"{format_term(c.head, names)} :- {format_conj(c.body, names)}."


def format_program(p: Program) -> str:
    lines = [f"abducible {name}/{arity}." for name, arity in sorted(p.abducibles, key=str)]
    lines += [format_ic(ic) for ic in p.ics]
    lines += [format_clause(c) for c in p.kb]
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# parsing

class ParseError(ValueError):
    def __init__(self, message: str, line: int = 0, col: int = 0):
        super().__init__(f"{message} (line {line}, column {col})" if line else message)
        self.line = line
        self.col = col


_TOKEN = re.compile(r"""
    (?P<ws>[ \t\r\n]+|%[^\n]*)
  | (?P<float>\d+\.\d+(?:[eE][-+]?\d+)?)
  | (?P<int>\d+)
  | (?P<var>[A-Z_][A-Za-z0-9_]*)
  | (?P<ident>[a-z][A-Za-z0-9_]*)
  | (?P<punct>:-|->|::|\\=|\\\+|[(),;./=])
""", re.VERBOSE)


@dataclass
class _Tok:
    kind: str
    text: str
    line: int
    col: int


def _tokenize(text: str) -> list[_Tok]:
    toks, pos, line, line_start = [], 0, 1, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise ParseError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        if kind != "ws":
            toks.append(_Tok(kind, m.group(), line, pos - line_start + 1))
        for i, ch in enumerate(m.group()):
            if ch == "\n":
                line, line_start = line + 1, pos + i + 1
        pos = m.end()
    toks.append(_Tok("eof", "", line, pos - line_start + 1))
    return toks


class _Parser:
    def __init__(self, text: str, universal: bool):
        self.toks = _tokenize(text)
        self.i = 0
        self.universal = universal
        self.scope: dict[str, Var] = {}

    @property
    def tok(self) -> _Tok:
        return self.toks[self.i]

    def error(self, msg: str, tok: _Tok | None = None):
        tok = tok or self.tok
        raise ParseError(msg, tok.line, tok.col)

    def take(self, text: str | None = None, kind: str | None = None) -> _Tok:
        tok = self.tok
        if (text is not None and tok.text != text) or (kind is not None and tok.kind != kind):
            want = text if text is not None else kind
            self.error(f"expected {want!r}, found {tok.text or 'end of input'!r}")
        self.i += 1
        return tok

    def at(self, text: str) -> bool:
        return self.tok.text == text and self.tok.kind in ("punct", "ident")

    def term(self) -> Term:
        tok = self.tok
        if tok.kind == "var":
            self.i += 1
            if tok.text == "_":
                return Var(next_id(), "_", self.universal)
            v = self.scope.get(tok.text)
            if v is None:
                v = self.scope[tok.text] = Var(next_id(), tok.text, self.universal)
            return v
        if tok.kind == "int":
            self.i += 1
            return Struct(int(tok.text))
        if tok.kind == "ident":
            self.i += 1
            if self.at("("):
                self.take("(")
                args = [self.term()]
                while self.at(","):
                    self.take(",")
                    args.append(self.term())
                self.take(")")
                return Struct(tok.text, tuple(args))
            return Struct(tok.text)
        self.error(f"expected a term, found {tok.text or 'end of input'!r}")

    def atom(self) -> Struct:
        tok = self.tok
        if tok.text in ("\\+", "not") and (tok.text == "\\+" or self.toks[self.i + 1].text == "("):
            self.error("negative literals are not supported")
        t = self.term()
        if self.at("=") or self.at("\\="):
            op = self.take().text
            return Struct(op, (t, self.term()))
        if isinstance(t, Var) or isinstance(t.functor, int):
            self.error("expected an atom", tok)
        return t

    def atoms(self) -> list[Struct]:
        out = [self.atom()]
        while self.at(","):
            self.take(",")
            out.append(self.atom())
        return out


def _strip_true(conj: Iterable[Struct]) -> tuple[Struct, ...]:
    return tuple(a for a in conj if a != TRUE)


def normalize_head(disjuncts: Iterable[Iterable[Struct]]) -> tuple[tuple[Struct, ...], ...]:
    """Apply true/false simplifications: ``()`` is ``false``, ``((),)`` is ``true``."""
    out = []
    for conj in disjuncts:
        conj = _strip_true(conj)
        if FALSE in conj:
            continue
        if not conj:
            return ((),)
        out.append(conj)
    return tuple(out)


def parse_program(text: str) -> Program:
    p = _Parser(text, universal=True)
    kb: list[Clause] = []
    ics: list[IntegrityConstraint] = []
    abducibles: set[tuple[str, int]] = set()
    n_pic = n_crisp = 0
    while p.tok.kind != "eof":
        p.scope = {}
        start = p.tok
        if start.text == "abducible" and p.toks[p.i + 1].kind == "ident":
            p.take()
            name = p.take(kind="ident").text
            p.take("/")
            arity = int(p.take(kind="int").text)
            p.take(".")
            abducibles.add((name, arity))
            continue
        prob = None
        if start.kind in ("float", "int") and p.toks[p.i + 1].text == "::":
            prob = float(start.text)
            if not 0.0 <= prob <= 1.0:
                p.error(f"probability {start.text} outside [0,1]", start)
            p.i += 2
        body = p.atoms()
        if p.at("->"):
            p.take("->")
            head = [p.atoms()]
            while p.at(";"):
                p.take(";")
                head.append(p.atoms())
            p.take(".")
            body_t = _strip_true(body)
            orig = tuple(term_vars(Struct("body", body_t))) if prob is not None else ()
            if prob is not None:
                n_pic += 1
                ic_id = n_pic
            else:
                n_crisp += 1
                ic_id = n_crisp
            ics.append(IntegrityConstraint(ic_id, prob, body_t, normalize_head(head), orig, orig))
            continue
        if prob is not None:
            p.error("only integrity constraints may carry a probability", start)
        if len(body) != 1:
            p.error("a clause head must be a single atom", start)
        head_atom = body[0]
        if head_atom.key in BUILTINS:
            p.error(f"cannot define reserved predicate {head_atom.functor}/{head_atom.arity}", start)
        clause_body: tuple[Struct, ...] = ()
        if p.at(":-"):
            p.take(":-")
            clause_body = _strip_true(p.atoms())
        p.take(".")
        kb.append(Clause(head_atom, clause_body))
    for c in kb:
        if c.head.key in abducibles:
            raise ParseError(f"abducible predicate {c.head.functor}/{c.head.arity} used as a clause head")
    return Program(tuple(kb), tuple(ics), frozenset(abducibles))


def parse_goal(text: str) -> Goal:
    p = _Parser(text, universal=False)
    if p.tok.kind == "eof":
        raise ParseError("empty goal")
    lits = p.atoms()
    if p.at("."):
        p.take(".")
    if p.tok.kind != "eof":
        p.error(f"unexpected {p.tok.text!r} after goal")
    seen: dict = {}
    for a in lits:
        term_vars(a, seen)
    return Goal(tuple(lits), tuple(v for v in seen if v.name != "_"))


def iter_atoms(ic: IntegrityConstraint) -> Iterator[Struct]:
    yield from ic.body
    for conj in ic.head:
        yield from conj

"""Query data model: regex AST, textual grammar, parser, printer, fragments.

The textual grammar (UTF-8, ``#`` starts a comment running to end of line):

    query    := crpq ( "|" crpq )*
    crpq     := atom ( "," atom )*
    atom     := VAR "-[" regex "]->" VAR  |  VAR "=" VAR
    regex    := term ( "+" term )*
    term     := factor+
    factor   := base ( "^" NAT | "^<=" NAT | "*" )?
    base     := WORD | QSYM | "(" regex ")" | "eps"
    VAR      := "?" [A-Za-z0-9_]+
    QSYM     := "'" [A-Za-z0-9_]+ "'"

A bare WORD denotes the concatenation of its characters, each being a
single-character alphabet symbol: ``ab`` is the two-letter word a.b and
``(ab)^3`` repeats it three times.  Postfix operators bind to the whole
preceding token, so ``ab^3`` equals ``(ab)^3``; write ``a b^3`` when the
power should apply to b alone.  Multi-character symbols are quoted:
``'x1'`` is one symbol.  ``eps`` is reserved for the empty word.  ``*``,
``^`` and ``^<=`` apply only to literal words.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum

from crpqbound.errors import ParseError, UnsupportedFragment

# ------------------------------------------------------------------ regex AST


@dataclass(frozen=True)
class Epsilon:
    """The empty word."""


@dataclass(frozen=True)
class Letter:
    symbol: str

    def __post_init__(self):
        if not self.symbol:
            raise ValueError("empty symbol name")


@dataclass(frozen=True)
class Concat:
    parts: tuple

    def __post_init__(self):
        if len(self.parts) < 2:
            raise ValueError("Concat needs at least 2 parts")


@dataclass(frozen=True)
class Union:
    parts: tuple

    def __post_init__(self):
        if len(self.parts) < 2:
            raise ValueError("Union needs at least 2 parts")


@dataclass(frozen=True)
class Power:
    """w^n: the word w repeated exactly n times, n kept in binary."""

    word: tuple
    exponent: int

    def __post_init__(self):
        if not self.word:
            raise ValueError("Power word must be non-empty")
        if self.exponent < 0:
            raise ValueError("negative exponent")


@dataclass(frozen=True)
class PowerLE:
    """w^{<=n}: the word w repeated between 0 and n times."""

    word: tuple
    exponent: int

    def __post_init__(self):
        if not self.word:
            raise ValueError("PowerLE word must be non-empty")
        if self.exponent < 0:
            raise ValueError("negative exponent")


@dataclass(frozen=True)
class Star:
    """w*: any number of repetitions of a fixed non-empty word."""

    word: tuple

    def __post_init__(self):
        if not self.word:
            raise ValueError("Star word must be non-empty")


RegexExpr = Epsilon | Letter | Concat | Union | Power | PowerLE | Star


def concat(parts) -> RegexExpr:
    """Smart constructor: flattens nested Concats and drops Epsilons."""
    flat = []
    for p in parts:
        if isinstance(p, Concat):
            flat.extend(p.parts)
        elif isinstance(p, Epsilon):
            continue
        else:
            flat.append(p)
    if not flat:
        return Epsilon()
    if len(flat) == 1:
        return flat[0]
    return Concat(tuple(flat))


def union(parts) -> RegexExpr:
    """Smart constructor: flattens nested Unions."""
    flat = []
    for p in parts:
        if isinstance(p, Union):
            flat.extend(p.parts)
        else:
            flat.append(p)
    if not flat:
        raise ValueError("empty union")
    if len(flat) == 1:
        return flat[0]
    return Union(tuple(flat))


def word_expr(word) -> RegexExpr:
    """The expression denoting exactly the given word."""
    word = tuple(word)
    if not word:
        return Epsilon()
    if len(word) == 1:
        return Letter(word[0])
    return Concat(tuple(Letter(c) for c in word))


def as_word(e: RegexExpr):
    """Return the literal word an expression spells, or None.

    Epsilon counts as the empty word ().  Anything with operators other
    than plain concatenation of letters returns None.
    """
    if isinstance(e, Epsilon):
        return ()
    if isinstance(e, Letter):
        return (e.symbol,)
    if isinstance(e, Concat):
        out = []
        for p in e.parts:
            if not isinstance(p, Letter):
                return None
            out.append(p.symbol)
        return tuple(out)
    return None


# ------------------------------------------------------------------ fragments


class FragmentClass(Enum):
    A_SINGLETON = "aSingleton"
    W_SINGLETON = "wSingleton"
    SF = "sf"
    SSF = "ssf"
    A_STAR = "aStar"
    W_STAR = "wStar"
    UNSUPPORTED = "unsupported"


# Containment order within each chain; used by monotonicity tests.
FRAGMENT_RANK = {
    FragmentClass.A_SINGLETON: 0,
    FragmentClass.W_SINGLETON: 1,
    FragmentClass.SF: 2,
    FragmentClass.SSF: 3,
    FragmentClass.A_STAR: 0,
    FragmentClass.W_STAR: 1,
}

_SSF_CLASSES = frozenset(
    {
        FragmentClass.A_SINGLETON,
        FragmentClass.W_SINGLETON,
        FragmentClass.SF,
        FragmentClass.SSF,
    }
)
_STAR_CLASSES = frozenset({FragmentClass.A_STAR, FragmentClass.W_STAR})


def classify(e: RegexExpr) -> FragmentClass:
    """Minimal fragment class containing the expression."""
    if isinstance(e, Letter):
        return FragmentClass.A_SINGLETON
    if isinstance(e, Epsilon):
        return FragmentClass.SF
    if isinstance(e, Star):
        return FragmentClass.A_STAR if len(e.word) == 1 else FragmentClass.W_STAR
    if isinstance(e, (Power, PowerLE)):
        return FragmentClass.SSF
    if isinstance(e, Concat) and as_word(e) is not None:
        return FragmentClass.W_SINGLETON
    if isinstance(e, (Concat, Union)):
        sub = [classify(p) for p in e.parts]
        if any(c not in _SSF_CLASSES for c in sub):
            return FragmentClass.UNSUPPORTED
        if any(c is FragmentClass.SSF for c in sub):
            return FragmentClass.SSF
        return FragmentClass.SF
    return FragmentClass.UNSUPPORTED


# ----------------------------------------------------------- atoms and queries


@dataclass(frozen=True)
class EdgeAtom:
    src: str
    label: RegexExpr
    dst: str


@dataclass(frozen=True)
class EqualityAtom:
    left: str
    right: str


Atom = EdgeAtom | EqualityAtom


@dataclass(frozen=True)
class CRPQ:
    """A conjunction of atoms; all variables are existential."""

    atoms: tuple

    def __post_init__(self):
        if not self.atoms:
            raise ValueError("CRPQ needs at least one atom")

    @property
    def edge_atoms(self):
        return tuple(a for a in self.atoms if isinstance(a, EdgeAtom))

    @property
    def equality_atoms(self):
        return tuple(a for a in self.atoms if isinstance(a, EqualityAtom))

    def variables(self):
        seen = set()
        for a in self.atoms:
            if isinstance(a, EdgeAtom):
                seen.add(a.src)
                seen.add(a.dst)
            else:
                seen.add(a.left)
                seen.add(a.right)
        return tuple(sorted(seen))


@dataclass(frozen=True)
class UCRPQ:
    """A union of CRPQs; disjuncts have independent variable namespaces."""

    disjuncts: tuple

    def __post_init__(self):
        if not self.disjuncts:
            raise ValueError("UCRPQ needs at least one disjunct")


def _letters_of(e: RegexExpr):
    if isinstance(e, Epsilon):
        return
    if isinstance(e, Letter):
        yield e.symbol
        return
    if isinstance(e, (Power, PowerLE, Star)):
        yield from e.word
        return
    for p in e.parts:
        yield from _letters_of(p)


def alphabet(q: UCRPQ | CRPQ) -> frozenset:
    """All symbols occurring in the query."""
    disjuncts = q.disjuncts if isinstance(q, UCRPQ) else (q,)
    out = set()
    for d in disjuncts:
        for a in d.edge_atoms:
            out.update(_letters_of(a.label))
    return frozenset(out)


def star_letters(q: UCRPQ | CRPQ) -> frozenset:
    """Letters a such that some atom is labeled a* (single-letter stars)."""
    disjuncts = q.disjuncts if isinstance(q, UCRPQ) else (q,)
    out = set()
    for d in disjuncts:
        for a in d.edge_atoms:
            if isinstance(a.label, Star) and len(a.label.word) == 1:
                out.add(a.label.word[0])
    return frozenset(out)


def atom_classes(q: UCRPQ | CRPQ) -> frozenset:
    disjuncts = q.disjuncts if isinstance(q, UCRPQ) else (q,)
    out = set()
    for d in disjuncts:
        for a in d.edge_atoms:
            out.add(classify(a.label))
    return frozenset(out)


def check_ssf_wstar(q: UCRPQ) -> None:
    """Raise UnsupportedFragment unless every label is SSF or a word star."""
    bad = atom_classes(q) - _SSF_CLASSES - _STAR_CLASSES
    if bad:
        raise UnsupportedFragment(
            "query labels fall outside the supported fragment: "
            + ", ".join(sorted(c.value for c in bad))
        )


def check_single_letter_stars(q: UCRPQ) -> None:
    """Raise UnsupportedFragment if some star spans a multi-letter word."""
    check_ssf_wstar(q)
    if FragmentClass.W_STAR in atom_classes(q):
        raise UnsupportedFragment(
            "letter-boundedness analysis needs single-letter stars"
        )


# ----------------------------------------------------------------------- size


def ceil_log2(n: int) -> int:
    """Symbols needed to write n in binary; 1 for n in {0, 1}."""
    return 1 if n <= 1 else (n - 1).bit_length()


def size_regex(e: RegexExpr) -> int:
    if isinstance(e, (Epsilon, Letter)):
        return 1
    if isinstance(e, (Concat, Union)):
        return sum(size_regex(p) for p in e.parts)
    if isinstance(e, (Power, PowerLE)):
        return len(e.word) + ceil_log2(e.exponent)
    if isinstance(e, Star):
        return len(e.word)
    raise TypeError(f"not a regex: {e!r}")


def size(q: UCRPQ | CRPQ) -> int:
    """Encoding size: sum of label sizes over all edge atoms."""
    disjuncts = q.disjuncts if isinstance(q, UCRPQ) else (q,)
    return sum(size_regex(a.label) for d in disjuncts for a in d.edge_atoms)


# ------------------------------------------------------------------- collapse


def collapse(q):
    """Merge variables identified by equality atoms.

    Each equivalence class is renamed to its lexicographically least
    member; equality atoms are dropped and duplicate edge atoms removed.
    Accepts a CRPQ or a UCRPQ (collapsed disjunct by disjunct).
    """
    if isinstance(q, UCRPQ):
        return UCRPQ(tuple(collapse(d) for d in q.disjuncts))
    parent = {}

    def find(v):
        parent.setdefault(v, v)
        root = v
        while parent[root] != root:
            root = parent[root]
        while parent[v] != root:
            parent[v], v = root, parent[v]
        return root

    def merge(u, v):
        ru, rv = find(u), find(v)
        if ru == rv:
            return
        lo, hi = sorted((ru, rv))
        parent[hi] = lo

    for a in q.equality_atoms:
        merge(a.left, a.right)

    out = []
    seen = set()
    for a in q.edge_atoms:
        na = EdgeAtom(find(a.src), a.label, find(a.dst))
        if na not in seen:
            seen.add(na)
            out.append(na)
    if not out:
        raise UnsupportedFragment("query collapses to no edge atoms")
    return CRPQ(tuple(out))


def reduce_free_vars(q: UCRPQ, free_vars) -> UCRPQ:
    """Make a query Boolean by marking each free variable with a self-loop.

    Every free variable v gets a fresh symbol a_v and an atom v -[a_v]-> v
    in every disjunct, which pins v to a unique vertex up to the loop.
    """
    free_vars = list(free_vars)
    sigma = alphabet(q)
    fresh = {}
    for v in free_vars:
        sym = f"a_{v}"
        if sym in sigma:
            raise ValueError(f"fresh symbol {sym!r} already occurs in the alphabet")
        fresh[v] = sym
    if not free_vars:
        return q
    new_disjuncts = []
    for d in q.disjuncts:
        loops = tuple(EdgeAtom(v, Letter(fresh[v]), v) for v in free_vars)
        new_disjuncts.append(CRPQ(loops + d.atoms))
    return UCRPQ(tuple(new_disjuncts))


# ---------------------------------------------------------------------- lexer


_TOKEN_RE = re.compile(
    r"""
      (?P<WS>[ \t\r]+)
    | (?P<NL>\n)
    | (?P<COMMENT>\#[^\n]*)
    | (?P<ARROWOPEN>-\[)
    | (?P<ARROWCLOSE>\]->)
    | (?P<POWLE>\^<=)
    | (?P<CARET>\^)
    | (?P<STAR>\*)
    | (?P<PLUS>\+)
    | (?P<PIPE>\|)
    | (?P<COMMA>,)
    | (?P<LPAREN>\()
    | (?P<RPAREN>\))
    | (?P<EQ>=)
    | (?P<VAR>\?[A-Za-z0-9_]+)
    | (?P<QSYM>'[A-Za-z0-9_]+')
    | (?P<WORD>[A-Za-z0-9_]+)
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class _Token:
    kind: str
    text: str
    line: int
    col: int


def _lex(text: str):
    toks = []
    pos, line, col = 0, 1, 1
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, col)
        kind = m.lastgroup
        lexeme = m.group()
        if kind == "NL":
            line += 1
            col = 1
        elif kind in ("WS", "COMMENT"):
            col += len(lexeme)
        else:
            toks.append(_Token(kind, lexeme, line, col))
            col += len(lexeme)
        pos = m.end()
    return toks


# --------------------------------------------------------------------- parser


class _Parser:
    def __init__(self, toks):
        self.toks = toks
        self.i = 0

    def peek(self, ahead=0):
        j = self.i + ahead
        return self.toks[j] if j < len(self.toks) else None

    def take(self):
        tok = self.peek()
        self.i += 1
        return tok

    def error(self, message):
        tok = self.peek()
        if tok is None:
            last = self.toks[-1] if self.toks else None
            line = last.line if last else 1
            col = (last.col + len(last.text)) if last else 1
            raise ParseError(message + " (at end of input)", line, col)
        raise ParseError(f"{message}, got {tok.text!r}", tok.line, tok.col)

    def expect(self, kind, what):
        tok = self.peek()
        if tok is None or tok.kind != kind:
            self.error(f"expected {what}")
        return self.take()

    # regex := term ("+" term)*
    def regex(self):
        terms = [self.term()]
        while self.peek() and self.peek().kind == "PLUS":
            self.take()
            terms.append(self.term())
        return union(terms)

    _FACTOR_START = frozenset({"WORD", "QSYM", "LPAREN"})

    # term := factor+
    def term(self):
        factors = [self.factor()]
        while self.peek() and self.peek().kind in self._FACTOR_START:
            factors.append(self.factor())
        return concat(factors)

    # factor := base ("^" NAT | "^<=" NAT | "*")?
    def factor(self):
        tok = self.peek()
        if tok is None or tok.kind not in self._FACTOR_START:
            self.error("expected an expression")
        if tok.kind == "WORD":
            self.take()
            if tok.text == "eps":
                word, base = None, Epsilon()
            else:
                word = tuple(tok.text)
                base = None
        elif tok.kind == "QSYM":
            self.take()
            word = (tok.text[1:-1],)
            base = None
        else:
            self.take()
            inner = self.regex()
            self.expect("RPAREN", "')'")
            word = as_word(inner)
            if word == ():
                word = None
            base = inner

        nxt = self.peek()
        if nxt and nxt.kind in ("CARET", "POWLE"):
            op = self.take()
            num = self.peek()
            if num is None or num.kind != "WORD" or not num.text.isdigit():
                self.error("expected a number after the power operator")
            self.take()
            if word is None:
                raise ParseError("power over non-word", op.line, op.col)
            n = int(num.text)
            return Power(word, n) if op.kind == "CARET" else PowerLE(word, n)
        if nxt and nxt.kind == "STAR":
            op = self.take()
            if word is None:
                raise ParseError("star over non-word", op.line, op.col)
            return Star(word)
        if base is not None:
            return base
        return word_expr(word)

    # atom := VAR "-[" regex "]->" VAR | VAR "=" VAR
    def atom(self):
        v1 = self.expect("VAR", "a variable like ?x")
        nxt = self.peek()
        if nxt and nxt.kind == "EQ":
            self.take()
            v2 = self.expect("VAR", "a variable after '='")
            return EqualityAtom(v1.text[1:], v2.text[1:])
        if nxt and nxt.kind == "ARROWOPEN":
            self.take()
            label = self.regex()
            self.expect("ARROWCLOSE", "']->'")
            v2 = self.expect("VAR", "a target variable")
            return EdgeAtom(v1.text[1:], label, v2.text[1:])
        self.error("expected '-[' or '=' after variable")

    # crpq := atom ("," atom)*
    def crpq(self):
        start = self.peek()
        atoms = [self.atom()]
        while self.peek() and self.peek().kind == "COMMA":
            self.take()
            atoms.append(self.atom())
        if not any(isinstance(a, EdgeAtom) for a in atoms):
            raise ParseError(
                "conjunct needs at least one edge atom", start.line, start.col
            )
        return CRPQ(tuple(atoms))

    # query := crpq ("|" crpq)*
    def query(self):
        disjuncts = [self.crpq()]
        while self.peek() and self.peek().kind == "PIPE":
            self.take()
            disjuncts.append(self.crpq())
        if self.peek() is not None:
            self.error("unexpected trailing input")
        return UCRPQ(tuple(disjuncts))


def parse_ucrpq(text: str) -> UCRPQ:
    toks = _lex(text)
    if not toks:
        raise ParseError("empty query", 1, 1)
    return _Parser(toks).query()


def parse_regex(text: str) -> RegexExpr:
    toks = _lex(text)
    if not toks:
        raise ParseError("empty expression", 1, 1)
    p = _Parser(toks)
    e = p.regex()
    if p.peek() is not None:
        p.error("unexpected trailing input")
    return e


# ------------------------------------------------------------------- renderer


def _render_symbol(s: str) -> str:
    return s if len(s) == 1 else f"'{s}'"


def render_word(word) -> str:
    if all(len(c) == 1 for c in word):
        return "".join(word)
    return " ".join(_render_symbol(c) for c in word)


def _render_word_base(word) -> str:
    if len(word) == 1:
        return _render_symbol(word[0])
    return f"({render_word(word)})"


def render_regex(e: RegexExpr) -> str:
    return _render(e, 0)


def _render(e: RegexExpr, prec: int) -> str:
    # prec 0: union context, 1: concat context
    if isinstance(e, Epsilon):
        return "eps"
    if isinstance(e, Letter):
        return _render_symbol(e.symbol)
    if isinstance(e, Star):
        return _render_word_base(e.word) + "*"
    if isinstance(e, Power):
        return f"{_render_word_base(e.word)}^{e.exponent}"
    if isinstance(e, PowerLE):
        return f"{_render_word_base(e.word)}^<={e.exponent}"
    if isinstance(e, Concat):
        chunks = []
        run = []
        for p in e.parts:
            if isinstance(p, Letter) and len(p.symbol) == 1:
                run.append(p.symbol)
                continue
            if run:
                chunks.append("".join(run))
                run = []
            chunks.append(_render(p, 1))
        if run:
            chunks.append("".join(run))
        return " ".join(chunks)
    if isinstance(e, Union):
        s = " + ".join(_render(p, 0) for p in e.parts)
        return f"({s})" if prec >= 1 else s
    raise TypeError(f"not a regex: {e!r}")


def render_atom(a: Atom) -> str:
    if isinstance(a, EqualityAtom):
        return f"?{a.left} = ?{a.right}"
    return f"?{a.src} -[{render_regex(a.label)}]-> ?{a.dst}"


def render_crpq(q: CRPQ) -> str:
    return ", ".join(render_atom(a) for a in q.atoms)


def render_ucrpq(q: UCRPQ) -> str:
    return " | ".join(render_crpq(d) for d in q.disjuncts)

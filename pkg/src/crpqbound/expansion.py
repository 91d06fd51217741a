"""Expansion machinery: bounded queries, expansion enumeration, materialization.

An expansion of a query picks one concrete word per atom.  Expansions are
kept succinct: each atom stores a word and a repetition count in binary
(:class:`SuccinctCQ`), and :func:`materialize` unrolls one into a plain
conjunctive query with explicit path variables when the fully written-out
form is needed.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from crpqbound.config import DEFAULT_CAPS, Caps
from crpqbound.errors import CapExceeded, UnsupportedFragment
from crpqbound.syntax import (
    CRPQ,
    UCRPQ,
    Concat,
    EdgeAtom,
    Epsilon,
    EqualityAtom,
    Letter,
    Power,
    PowerLE,
    RegexExpr,
    Star,
    Union,
    collapse,
    render_word,
)

# ---------------------------------------------------------------- data model


@dataclass(frozen=True)
class SuccinctAtom:
    """One atom of a succinct CQ: a w^n path from src to dst."""

    src: str
    word: tuple
    exponent: int
    dst: str

    def __post_init__(self):
        if self.exponent < 0:
            raise ValueError("negative exponent")
        if self.exponent > 0 and not self.word:
            raise ValueError("positive exponent needs a non-empty word")

    @property
    def length(self) -> int:
        return len(self.word) * self.exponent


@dataclass(frozen=True)
class SuccinctCQ:
    """A conjunction of w^n atoms plus possibly isolated variables."""

    variables: tuple
    atoms: tuple

    def __post_init__(self):
        if not self.variables:
            raise ValueError("SuccinctCQ needs at least one variable")
        have = set(self.variables)
        for a in self.atoms:
            if a.src not in have or a.dst not in have:
                raise ValueError(f"atom endpoint missing from variables: {a}")


@dataclass(frozen=True)
class CQAtom:
    src: str
    symbol: str
    dst: str


@dataclass(frozen=True)
class CQ:
    """A plain conjunctive query with single-letter edge labels."""

    variables: tuple
    atoms: tuple


@dataclass(frozen=True)
class ExponentDomain:
    """Finite exponent sets for the recursive (starred) atoms of a CRPQ.

    Keys are atom indices into the collapsed query's atom tuple.
    """

    per_atom: tuple

    def __post_init__(self):
        for _, values in self.per_atom:
            if not values:
                raise ValueError("exponent domains must be non-empty")

    @classmethod
    def uniform(cls, atom_indices, values) -> "ExponentDomain":
        vals = tuple(sorted(set(values)))
        return cls(tuple((i, vals) for i in sorted(atom_indices)))

    def values_for(self, atom_index: int):
        for i, values in self.per_atom:
            if i == atom_index:
                return values
        raise KeyError(f"no exponent domain for atom {atom_index}")


# ------------------------------------------------------------ bounded queries


def _map_labels(q: UCRPQ, f) -> UCRPQ:
    out = []
    for d in q.disjuncts:
        atoms = []
        for a in d.atoms:
            if isinstance(a, EdgeAtom):
                atoms.append(EdgeAtom(a.src, f(a.label), a.dst))
            else:
                atoms.append(a)
        out.append(CRPQ(tuple(atoms)))
    return UCRPQ(tuple(out))


def _replace_stars(e: RegexExpr, f) -> RegexExpr:
    if isinstance(e, Star):
        return f(e)
    if isinstance(e, (Concat, Union)):
        cls = type(e)
        return cls(tuple(_replace_stars(p, f) for p in e.parts))
    return e


def bound_query(q: UCRPQ, m: int) -> UCRPQ:
    """q(m): every w* becomes w^{<=m}."""
    return _map_labels(q, lambda e: _replace_stars(e, lambda s: PowerLE(s.word, m)))


def bound_letters(q: UCRPQ, letters, n: int) -> UCRPQ:
    """q[A -> n]: stars over letters in A become ^{<=n}, others stay."""
    letters = frozenset(letters)

    def swap(s: Star) -> RegexExpr:
        if len(s.word) == 1 and s.word[0] in letters:
            return PowerLE(s.word, n)
        return s

    return _map_labels(q, lambda e: _replace_stars(e, swap))


# ------------------------------------------------------------- atom expansion


def _fresh_prefix(taken, base="z"):
    prefix = base
    import re as _re

    while any(_re.fullmatch(_re.escape(prefix) + r"[0-9]+", v) for v in taken):
        prefix += base
    return prefix


def atom_expansion(atom: EdgeAtom, word):
    """Replace one atom by a path spelling the given word.

    Returns a list of CQAtoms, or an EqualityAtom when the word is empty.
    The word is assumed to belong to the label's language; this function
    only builds the path.
    """
    word = tuple(word)
    if not word:
        return EqualityAtom(atom.src, atom.dst)
    prefix = _fresh_prefix({atom.src, atom.dst})
    out = []
    cur = atom.src
    for k, sym in enumerate(word):
        nxt = atom.dst if k == len(word) - 1 else f"{prefix}{k + 1}"
        out.append(CQAtom(cur, sym, nxt))
        cur = nxt
    return out


# -------------------------------------------------------------- SSF languages


def ssf_words(e: RegexExpr, caps: Caps = DEFAULT_CAPS):
    """The finite language of a star-free expression, as a word list.

    Order is deterministic (syntactic, left to right) and duplicates are
    dropped keeping the first occurrence.
    """
    words = _ssf_words(e, caps)
    seen = set()
    out = []
    for w in words:
        if w not in seen:
            seen.add(w)
            out.append(w)
    return out


def _ssf_words(e: RegexExpr, caps: Caps):
    if isinstance(e, Epsilon):
        return [()]
    if isinstance(e, Letter):
        return [(e.symbol,)]
    if isinstance(e, Power):
        if len(e.word) * e.exponent > caps.max_word_len:
            raise CapExceeded(caps.max_word_len, "materialized power too long")
        return [e.word * e.exponent]
    if isinstance(e, PowerLE):
        if len(e.word) * e.exponent > caps.max_word_len:
            raise CapExceeded(caps.max_word_len, "materialized power too long")
        return [e.word * k for k in range(e.exponent + 1)]
    if isinstance(e, Union):
        out = []
        for p in e.parts:
            out.extend(_ssf_words(p, caps))
            if len(out) > caps.max_expansions:
                raise CapExceeded(caps.max_expansions, "union language too large")
        return out
    if isinstance(e, Concat):
        out = [()]
        for p in e.parts:
            tails = _ssf_words(p, caps)
            nxt = [w + t for w in out for t in tails]
            if len(nxt) > caps.max_expansions:
                raise CapExceeded(caps.max_expansions, "concat language too large")
            for w in nxt:
                if len(w) > caps.max_word_len:
                    raise CapExceeded(caps.max_word_len, "concat word too long")
            out = nxt
        return out
    if isinstance(e, Star):
        raise UnsupportedFragment("a starred expression has no finite language")
    raise TypeError(f"not a regex: {e!r}")


def max_word_len(e: RegexExpr) -> int:
    """Length of the longest word the expression can spell (symbolically)."""
    if isinstance(e, Epsilon):
        return 0
    if isinstance(e, Letter):
        return 1
    if isinstance(e, (Power, PowerLE)):
        return len(e.word) * e.exponent
    if isinstance(e, Concat):
        return sum(max_word_len(p) for p in e.parts)
    if isinstance(e, Union):
        return max(max_word_len(p) for p in e.parts)
    if isinstance(e, Star):
        raise UnsupportedFragment("starred expressions have unbounded words")
    raise TypeError(f"not a regex: {e!r}")


def nullable(e: RegexExpr) -> bool:
    """Whether the empty word belongs to the expression's language."""
    if isinstance(e, Epsilon):
        return True
    if isinstance(e, Letter):
        return False
    if isinstance(e, Star):
        return True
    if isinstance(e, Power):
        return e.exponent == 0
    if isinstance(e, PowerLE):
        return True
    if isinstance(e, Concat):
        return all(nullable(p) for p in e.parts)
    if isinstance(e, Union):
        return any(nullable(p) for p in e.parts)
    raise TypeError(f"not a regex: {e!r}")


# -------------------------------------------------------------- normalization


def normalize_succinct(scq: SuccinctCQ) -> SuccinctCQ:
    """Canonical form: collapse zero-length atoms, dedupe, sort.

    Atoms with exponent 0 identify their endpoints (the path is empty);
    the equivalence classes are renamed to their lexicographically least
    member, exactly like query-level collapse.
    """
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

    for a in scq.atoms:
        if a.length == 0:
            merge(a.src, a.dst)

    atoms = set()
    for a in scq.atoms:
        if a.length == 0:
            continue
        atoms.add(SuccinctAtom(find(a.src), a.word, a.exponent, find(a.dst)))
    variables = tuple(sorted({find(v) for v in scq.variables}))
    return SuccinctCQ(variables, tuple(sorted(atoms, key=_atom_key)))


def _atom_key(a: SuccinctAtom):
    return (a.src, a.word, a.exponent, a.dst)


def render_succinct_cq(scq: SuccinctCQ) -> str:
    """Canonical text form, re-using the query grammar."""
    if not scq.atoms:
        v = scq.variables[0]
        return f"?{v} -[eps]-> ?{v}"
    parts = []
    for a in scq.atoms:
        if len(a.word) == 1:
            base = a.word[0] if len(a.word[0]) == 1 else f"'{a.word[0]}'"
        else:
            base = f"({render_word(a.word)})"
        parts.append(f"?{a.src} -[{base}^{a.exponent}]-> ?{a.dst}")
    return ", ".join(parts)


def succinct_cq_from_crpq(d: CRPQ) -> SuccinctCQ:
    """Read a CRPQ whose labels are all of w^n shape as a succinct CQ."""
    from crpqbound.syntax import as_word

    atoms = []
    for a in d.atoms:
        if isinstance(a, EqualityAtom):
            atoms.append(SuccinctAtom(a.left, (), 0, a.right))
            continue
        label = a.label
        if isinstance(label, Power):
            atoms.append(SuccinctAtom(a.src, label.word, label.exponent, a.dst))
            continue
        w = as_word(label)
        if w is None:
            raise UnsupportedFragment(
                "succinct CQ atoms must be words or binary powers"
            )
        atoms.append(SuccinctAtom(a.src, w, 1 if w else 0, a.dst))
    variables = d.variables()
    return SuccinctCQ(tuple(variables), tuple(atoms))


# ---------------------------------------------------------------- enumeration


def _atom_choices(label: RegexExpr, dom_values, caps: Caps):
    """Choice list for one atom: pairs (word, exponent), in canonical order."""
    if isinstance(label, Star):
        return [(label.word, e) for e in dom_values]
    if isinstance(label, Power):
        return [(label.word, label.exponent)]
    if isinstance(label, PowerLE):
        return [(label.word, k) for k in range(label.exponent + 1)]
    if isinstance(label, Letter):
        return [((label.symbol,), 1)]
    if isinstance(label, Epsilon):
        return [((), 0)]
    return [(w, 1) if w else ((), 0) for w in ssf_words(label, caps)]


def star_free_choice_count(label: RegexExpr, caps: Caps = DEFAULT_CAPS) -> int:
    """Number of expansion choices of a non-star atom label.

    Cheap arithmetic where possible; used for budget estimates before any
    choice list is materialized.
    """
    if isinstance(label, Star):
        raise ValueError("star label has no fixed choice count")
    if isinstance(label, (Power, Letter, Epsilon)):
        return 1
    if isinstance(label, PowerLE):
        return label.exponent + 1
    return len(ssf_words(label, caps))


def _prepared_choices(q: CRPQ, dom: ExponentDomain, caps: Caps):
    q = collapse(q) if q.equality_atoms else q
    choice_lists = []
    for idx, atom in enumerate(q.atoms):
        label = atom.label
        if isinstance(label, Star):
            values = dom.values_for(idx)
        else:
            values = None
        choice_lists.append(_atom_choices(label, values, caps))
    return q, choice_lists


def count_expansions(q: CRPQ, dom: ExponentDomain, caps: Caps = DEFAULT_CAPS) -> int:
    """Number of raw choice combinations enumerate_expansions would visit."""
    _, choice_lists = _prepared_choices(q, dom, caps)
    n = 1
    for choices in choice_lists:
        n *= len(choices)
    return n


def enumerate_expansions(
    q: CRPQ,
    dom: ExponentDomain,
    cap: int | None = None,
    caps: Caps = DEFAULT_CAPS,
):
    """Yield the expansions of q, as normalized succinct CQs.

    Recursive atoms draw exponents from ``dom``; star-free atoms range
    over their finite languages.  Enumeration order is lexicographic over
    (atom index, choice index), and structurally equal expansions are
    emitted once.  Raises CapExceeded after visiting ``cap`` combinations.
    """
    limit = caps.max_expansions if cap is None else cap
    q, choice_lists = _prepared_choices(q, dom, caps)
    variables = q.variables()
    seen = set()
    visited = 0
    for combo in itertools.product(*choice_lists):
        visited += 1
        if visited > limit:
            raise CapExceeded(limit, "expansion enumeration over cap")
        atoms = tuple(
            SuccinctAtom(a.src, w, e, a.dst)
            for a, (w, e) in zip(q.atoms, combo)
        )
        scq = normalize_succinct(SuccinctCQ(tuple(variables), atoms))
        if scq not in seen:
            seen.add(scq)
            yield scq


# -------------------------------------------------------------- materializing


def materialize(scq: SuccinctCQ, cap: int | None = None, caps: Caps = DEFAULT_CAPS) -> CQ:
    """Unroll a succinct CQ into a plain CQ with explicit path variables.

    Midpoint variables are named z1, z2, ... in atom order (the prefix is
    lengthened if it would clash with an existing variable).
    """
    limit = caps.max_materialized_atoms if cap is None else cap
    scq = normalize_succinct(scq)
    total = sum(a.length for a in scq.atoms)
    if total > limit:
        raise CapExceeded(limit, f"materialization needs {total} atoms")
    prefix = _fresh_prefix(set(scq.variables))
    counter = 0
    atoms = []
    variables = list(scq.variables)
    for a in scq.atoms:
        cur = a.src
        path = a.word * a.exponent
        for k, sym in enumerate(path):
            if k == len(path) - 1:
                nxt = a.dst
            else:
                counter += 1
                nxt = f"{prefix}{counter}"
                variables.append(nxt)
            atoms.append(CQAtom(cur, sym, nxt))
            cur = nxt
    return CQ(tuple(variables), tuple(atoms))

"""The main decision procedure for boundedness of recursive path queries.

A query whose stars range over single words is bounded exactly when every
expansion, with star exponents drawn from a finite probe set, is already
subsumed by the star-capped query q(Z).  This module computes the numeric
thresholds (Z and the probe exponent), runs the expansion enumeration with
containment checks, and derives star-free rewritings, letter-restricted
verdicts, and the maximal set of individually bounded star letters.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

from crpqbound.config import DEFAULT_CAPS, Caps, Stats
from crpqbound.errors import CapExceeded
from crpqbound.expansion import (
    ExponentDomain,
    SuccinctCQ,
    bound_letters,
    bound_query,
    enumerate_expansions,
    max_word_len,
    nullable,
    star_free_choice_count,
)
from crpqbound.homomorphism import NotContained, expansion_contained
from crpqbound.syntax import (
    UCRPQ,
    Star,
    alphabet,
    check_single_letter_stars,
    check_ssf_wstar,
    collapse,
    star_letters,
)

# ------------------------------------------------------------------- bounds


@dataclass(frozen=True)
class BoundsProfile:
    """The numeric thresholds of one conjunct (or the aggregate).

    z_red multiplies the lengths of the distinct starred words, z_col and z
    scale that by atom, variable, and word-length counts, and z_plus is the
    probe exponent one past which unbounded behaviour must show up.
    """

    nratoms: int
    nrvars: int
    n_len: int
    rec_words: tuple
    z_red: int
    z_col: int
    z: int
    z_plus: int


def _disjunct_profile(d) -> BoundsProfile:
    atoms = d.edge_atoms
    nratoms = len(atoms)
    nrvars = len(d.variables())
    rec = set()
    n_len = 1
    for a in atoms:
        if isinstance(a.label, Star):
            rec.add(a.label.word)
        else:
            n_len = max(n_len, max_word_len(a.label))
    rec_words = tuple(sorted(rec))
    z_red = 1
    for w in rec_words:
        z_red *= len(w)
    z_col = nratoms * n_len * nrvars * z_red
    z = nratoms * nratoms * z_col
    return BoundsProfile(
        nratoms=nratoms,
        nrvars=nrvars,
        n_len=n_len,
        rec_words=rec_words,
        z_red=z_red,
        z_col=z_col,
        z=z,
        z_plus=nratoms * z + 1,
    )


def per_disjunct_bounds(q: UCRPQ) -> tuple:
    return tuple(_disjunct_profile(d) for d in collapse(q).disjuncts)


def compute_bounds(q: UCRPQ) -> BoundsProfile:
    """The profile of the disjunct with the largest z (first on ties)."""
    per = per_disjunct_bounds(q)
    return max(per, key=lambda p: p.z)


def _safe_probe(profile: BoundsProfile) -> int:
    max_w = max((len(w) for w in profile.rec_words), default=1)
    return profile.nratoms * profile.z * max_w + profile.nrvars + 1


# ------------------------------------------------------------------- report


@dataclass
class AnalysisReport:
    verdict: str  # "bounded" | "unbounded" | "inconclusive"
    bounds: BoundsProfile
    per_disjunct: tuple
    rewriting: UCRPQ | None
    witness: SuccinctCQ | None
    letters: frozenset | None
    stats: Stats
    mode: dict
    inconclusive_reason: str | None = None


@dataclass(frozen=True)
class LettersResult:
    letters: frozenset
    inconclusive: frozenset
    per_letter: tuple  # (letter, verdict) pairs, sorted by letter


# ------------------------------------------------------------ the decision


def _star_domain(d, z: int, probe: int, full: bool) -> ExponentDomain:
    indices = [
        i for i, a in enumerate(d.edge_atoms) if isinstance(a.label, Star)
    ]
    if not indices:
        return ExponentDomain(())
    values = tuple(range(probe + 1)) if full else tuple(range(z + 1)) + (probe,)
    return ExponentDomain(tuple((i, values) for i in indices))


def _is_trivial(lam: SuccinctCQ, z: int, a_letters) -> bool:
    """Expansions with all relevant exponents <= z embed identically in q(Z)."""
    for atom in lam.atoms:
        if a_letters is not None and not (
            len(atom.word) == 1 and atom.word[0] in a_letters
        ):
            continue
        if atom.exponent > z:
            return False
    return True


def _has_nullable_disjunct(rhs: UCRPQ) -> bool:
    return any(
        d.edge_atoms and all(nullable(a.label) for a in d.edge_atoms)
        for d in rhs.disjuncts
    )


def _disjunct_counts(d, z, probe, full, a_letters, caps):
    """Raw combination count and non-trivial check count for one disjunct.

    Pure arithmetic so that astronomically large Z never materializes a
    value tuple before the budget check.
    """
    base = 1
    capped_stars = free_stars = 0
    for a in d.edge_atoms:
        if isinstance(a.label, Star):
            if a_letters is None or (
                len(a.label.word) == 1 and a.label.word[0] in a_letters
            ):
                capped_stars += 1
            else:
                free_stars += 1
        else:
            base *= star_free_choice_count(a.label, caps)
    per = probe + 1 if full else z + 2
    raw = base * per ** (capped_stars + free_stars)
    trivial = base * (z + 1) ** capped_stars * per**free_stars
    return raw, raw - trivial


def _decide(qc, rhs, z, probe, a_letters, caps, full, stats, mode):
    """Shared enumeration core.  Returns (verdict, witness, reason)."""
    if _has_nullable_disjunct(rhs):
        # some right-side disjunct expands to isolated points, which map
        # into every canonical database, so every expansion is contained
        mode["shortcut"] = "nullable-disjunct"
        return "bounded", None, None

    def counts(use_full):
        raw = real = 0
        for d in qc.disjuncts:
            total, checks = _disjunct_counts(d, z, probe, use_full, a_letters, caps)
            raw += total
            real += checks
        return raw, real

    effective_full = full
    raw, real = counts(effective_full)
    if effective_full and max(raw, real) > caps.max_expansions:
        effective_full = False
        raw, real = counts(effective_full)
        stats.notes.append("full enumeration over budget; fell back to restricted")
    mode["full_enumeration_effective"] = effective_full
    mode["raw_combos"] = raw
    mode["real_checks"] = real
    if max(raw, real) > caps.max_expansions:
        reason = (
            f"needs {real} containment checks over {raw} combinations, "
            f"budget {caps.max_expansions}"
        )
        return "inconclusive", None, reason

    capped = False
    for d in qc.disjuncts:
        dom = _star_domain(d, z, probe, effective_full)
        try:
            lams = enumerate_expansions(d, dom, caps=caps)
        except CapExceeded:
            capped = True
            continue
        for lam in lams:
            if _is_trivial(lam, z, a_letters):
                continue
            stats.expansions_checked += 1
            try:
                result = expansion_contained(lam, rhs, caps)
            except CapExceeded:
                capped = True
                continue
            stats.nfa_calls += 1
            if isinstance(result, NotContained):
                return "unbounded", lam, None
    if capped:
        return "inconclusive", None, "a containment check exceeded caps"
    return "bounded", None, None


def is_bounded(
    q: UCRPQ,
    caps: Caps = DEFAULT_CAPS,
    full_enumeration: bool = False,
    zplus_mode: str = "paper",
) -> AnalysisReport:
    """Decide whether q is equivalent to its star-capped version q(Z).

    Enumerates expansions with star exponents in {0..Z} plus the probe
    exponent (all of {0..probe} under full_enumeration) and checks each
    against q(Z).  The first uncontained expansion, in enumeration order,
    is returned as the witness.  Caps yield Inconclusive, never a wrong
    verdict.
    """
    t0 = time.monotonic()
    if zplus_mode not in ("paper", "safe"):
        raise ValueError(f"unknown zplus_mode: {zplus_mode!r}")
    check_ssf_wstar(q)
    qc = collapse(q)
    per = tuple(_disjunct_profile(d) for d in qc.disjuncts)
    agg = max(per, key=lambda p: p.z)
    z = agg.z
    probe = agg.z_plus if zplus_mode == "paper" else _safe_probe(agg)
    rhs = bound_query(qc, z)
    stats = Stats()
    mode = {
        "zplus_mode": zplus_mode,
        "full_enumeration": full_enumeration,
        "probe": probe,
        "z": z,
        "letters": None,
        "shortcut": None,
    }
    verdict, witness, reason = _decide(
        qc, rhs, z, probe, None, caps, full_enumeration, stats, mode
    )
    stats.wall_ms = (time.monotonic() - t0) * 1000.0
    return AnalysisReport(
        verdict=verdict,
        bounds=agg,
        per_disjunct=per,
        rewriting=bound_query(q, z) if verdict == "bounded" else None,
        witness=witness,
        letters=None,
        stats=stats,
        mode=mode,
        inconclusive_reason=reason,
    )


def rewrite(
    q: UCRPQ,
    caps: Caps = DEFAULT_CAPS,
    full_enumeration: bool = False,
    zplus_mode: str = "paper",
) -> UCRPQ:
    """The star-free equivalent q(Z); an error unless q is bounded."""
    report = is_bounded(q, caps, full_enumeration, zplus_mode)
    if report.verdict != "bounded":
        raise ValueError(f"query is not provably bounded ({report.verdict})")
    return report.rewriting


def is_bounded_in(
    q: UCRPQ,
    letters,
    caps: Caps = DEFAULT_CAPS,
    full_enumeration: bool = False,
    zplus_mode: str = "paper",
) -> AnalysisReport:
    """Decide A-boundedness: is q equivalent to q with A-stars capped?

    Only stars over letters in A are capped on the right and probed on the
    left; other stars stay and absorb their own exponents.  Stars must be
    over single letters for the letter-restricted analysis.
    """
    t0 = time.monotonic()
    if zplus_mode not in ("paper", "safe"):
        raise ValueError(f"unknown zplus_mode: {zplus_mode!r}")
    check_ssf_wstar(q)
    check_single_letter_stars(q)
    a_letters = frozenset(letters)
    qc = collapse(q)
    per = tuple(_disjunct_profile(d) for d in qc.disjuncts)
    agg = max(per, key=lambda p: p.z)
    z = agg.z
    probe = agg.z_plus if zplus_mode == "paper" else _safe_probe(agg)
    stats = Stats()
    mode = {
        "zplus_mode": zplus_mode,
        "full_enumeration": full_enumeration,
        "probe": probe,
        "z": z,
        "letters": "".join(sorted(a_letters)),
        "shortcut": None,
    }
    if not a_letters:
        stats.wall_ms = (time.monotonic() - t0) * 1000.0
        return AnalysisReport(
            verdict="bounded",
            bounds=agg,
            per_disjunct=per,
            rewriting=q,
            witness=None,
            letters=a_letters,
            stats=stats,
            mode=mode,
            inconclusive_reason=None,
        )
    rhs = bound_letters(qc, a_letters, z)
    verdict, witness, reason = _decide(
        qc, rhs, z, probe, a_letters, caps, full_enumeration, stats, mode
    )
    stats.wall_ms = (time.monotonic() - t0) * 1000.0
    return AnalysisReport(
        verdict=verdict,
        bounds=agg,
        per_disjunct=per,
        rewriting=bound_letters(q, a_letters, z) if verdict == "bounded" else None,
        witness=witness,
        letters=a_letters,
        stats=stats,
        mode=mode,
        inconclusive_reason=reason,
    )


def maximal_bounded_letters(
    q: UCRPQ,
    caps: Caps = DEFAULT_CAPS,
    full_enumeration: bool = False,
    zplus_mode: str = "paper",
) -> LettersResult:
    """The union of star letters a with q bounded in {a}.

    Single-letter boundedness is confluent, so the union is itself a set
    the query is bounded in, and it is maximal among star letters.  A
    query with no stars is vacuously bounded in every alphabet letter.
    Letters whose check hits a cap are reported separately; the returned
    set then under-approximates.
    """
    check_ssf_wstar(q)
    check_single_letter_stars(q)
    stars = star_letters(q)
    if not stars:
        return LettersResult(frozenset(alphabet(q)), frozenset(), ())
    bounded = set()
    inconclusive = set()
    per_letter = []
    for a in sorted(stars):
        report = is_bounded_in(q, {a}, caps, full_enumeration, zplus_mode)
        per_letter.append((a, report.verdict))
        if report.verdict == "bounded":
            bounded.add(a)
        elif report.verdict == "inconclusive":
            inconclusive.add(a)
    return LettersResult(
        frozenset(bounded), frozenset(inconclusive), tuple(per_letter)
    )

"""The boundedness decision, bounds arithmetic, and letter analyses."""

import random
from dataclasses import replace

import pytest

from conftest import gen_random_crpq_astar
from crpqbound.config import DEFAULT_CAPS
from crpqbound.expansion import (
    ExponentDomain,
    bound_query,
    enumerate_expansions,
    materialize,
    render_succinct_cq,
)
from crpqbound.homomorphism import Contained, NotContained, expansion_contained
from crpqbound.boundedness import (
    compute_bounds,
    is_bounded,
    is_bounded_in,
    maximal_bounded_letters,
    per_disjunct_bounds,
    rewrite,
)
from crpqbound.oracle import eval_on_graph, graph_of_cq
from crpqbound.syntax import alphabet, parse_ucrpq, star_letters

TIGHT = replace(DEFAULT_CAPS, max_expansions=2000)


def test_bounds_profile_a_star_b():
    b = compute_bounds(parse_ucrpq("?x -[a*]-> ?y, ?x -[b]-> ?y"))
    assert (b.nratoms, b.nrvars, b.n_len) == (2, 2, 1)
    assert b.rec_words == (("a",),)
    assert (b.z_red, b.z_col, b.z, b.z_plus) == (1, 4, 16, 33)


def test_bounds_profile_star_free_empty_product():
    b = compute_bounds(parse_ucrpq("?x -[ab]-> ?y, ?y -[c]-> ?z"))
    assert b.rec_words == ()
    assert b.z_red == 1
    assert b.z == b.nratoms**3 * b.n_len * b.nrvars


def test_bounds_profile_figure_shape():
    b = compute_bounds(parse_ucrpq("?x -[(aba)*]-> ?y, ?x -[(aba)^3]-> ?z"))
    assert (b.nratoms, b.nrvars, b.n_len, b.z_red) == (2, 3, 9, 3)
    assert b.z == 648


def test_bounds_union_takes_max_disjunct():
    q = parse_ucrpq("?x -[a]-> ?y | ?x -[(aba)*]-> ?y, ?x -[(aba)^3]-> ?z")
    per = per_disjunct_bounds(q)
    assert len(per) == 2
    assert compute_bounds(q).z == max(p.z for p in per)


def test_claim_query_bounded_with_rewriting():
    report = is_bounded(parse_ucrpq("?x -[a]-> ?y, ?x -[a*]-> ?z, ?z -[b]-> ?w"))
    assert report.verdict == "bounded"
    assert report.bounds.z == 108
    assert report.rewriting is not None
    assert not star_letters(report.rewriting)


def test_a_star_b_unbounded_witness():
    report = is_bounded(parse_ucrpq("?x -[a*]-> ?y, ?x -[b]-> ?y"))
    assert report.verdict == "unbounded"
    assert report.bounds.z == 16
    assert report.bounds.z_plus == 33
    exps = sorted(a.exponent for a in report.witness.atoms)
    assert exps == [1, 33]


def test_star_free_query_bounded_identity_rewriting():
    q = parse_ucrpq("?x -[ab]-> ?y")
    report = is_bounded(q)
    assert report.verdict == "bounded"
    assert report.rewriting == q


def test_single_star_atom_bounded():
    report = is_bounded(parse_ucrpq("?x -[a*]-> ?y"))
    assert report.verdict == "bounded"
    assert report.mode["shortcut"] == "nullable-disjunct"


def test_rewrite_raises_on_unbounded():
    with pytest.raises(ValueError, match="not provably bounded"):
        rewrite(parse_ucrpq("?x -[a*]-> ?y, ?x -[b]-> ?y"))


def test_rewrite_returns_bound_query():
    q = parse_ucrpq("?x -[a]-> ?y, ?x -[a*]-> ?z, ?z -[b]-> ?w")
    assert rewrite(q) == bound_query(q, 108)


def test_witness_reconfirmed_by_materialized_oracle():
    q = parse_ucrpq("?x -[a*]-> ?y, ?x -[b]-> ?y")
    report = is_bounded(q)
    db = graph_of_cq(materialize(report.witness))
    assert eval_on_graph(q, db)
    assert not eval_on_graph(bound_query(q, report.bounds.z), db)


def test_bounded_side_soundness_probe_past_z():
    q = parse_ucrpq("?x -[a]-> ?y, ?x -[a*]-> ?z, ?z -[b]-> ?w")
    report = is_bounded(q)
    assert report.verdict == "bounded"
    z = report.bounds.z
    rhs = bound_query(q, z)
    d = q.disjuncts[0]
    star_idx = [i for i, a in enumerate(d.atoms) if a.label.__class__.__name__ == "Star"]
    for m in range(z + 1, z + 6):
        dom = ExponentDomain(tuple((i, (m,)) for i in star_idx))
        for lam in enumerate_expansions(d, dom):
            assert isinstance(expansion_contained(lam, rhs), Contained), m


def test_is_bounded_in_empty_set_trivial():
    q = parse_ucrpq("?x -[a*]-> ?y, ?x -[b]-> ?y")
    report = is_bounded_in(q, set())
    assert report.verdict == "bounded"
    assert report.rewriting == q


def test_is_bounded_in_parallel_stars_not_single_bounded():
    q = parse_ucrpq("?x -[a*]-> ?y, ?x -[b*]-> ?y")
    report = is_bounded_in(q, {"a"})
    assert report.verdict == "bounded"  # the all-zero expansion maps anywhere
    assert maximal_bounded_letters(q).letters == frozenset({"a", "b"})


def test_is_bounded_in_leaf_star():
    q = parse_ucrpq("?x -[a*]-> ?y, ?x -[b]-> ?y, ?x -[c*]-> ?w")
    assert is_bounded_in(q, {"c"}).verdict == "bounded"
    assert is_bounded_in(q, {"a"}).verdict == "unbounded"


def test_maximal_letters_examples():
    disjoint = parse_ucrpq("?x -[a*]-> ?y, ?z -[b*]-> ?w")
    assert maximal_bounded_letters(disjoint).letters == frozenset({"a", "b"})
    leafy = parse_ucrpq("?x -[a*]-> ?y, ?x -[b]-> ?y, ?x -[c*]-> ?w")
    assert maximal_bounded_letters(leafy).letters == frozenset({"c"})
    star_free = parse_ucrpq("?x -[ab]-> ?y")
    assert maximal_bounded_letters(star_free).letters == frozenset(alphabet(star_free))


def test_letter_monotonicity_on_samples():
    rng = random.Random(21)
    for _ in range(25):
        q = gen_random_crpq_astar(rng)
        full = is_bounded_in(q, {"a"}, TIGHT)
        if full.verdict == "bounded":
            sub = is_bounded_in(q, set(), TIGHT)
            assert sub.verdict == "bounded"


def test_full_alphabet_consistency_on_samples():
    rng = random.Random(22)
    checked = 0
    for _ in range(40):
        q = gen_random_crpq_astar(rng)
        stars = star_letters(q)
        a = is_bounded(q, TIGHT)
        b = is_bounded_in(q, stars, TIGHT)
        if "inconclusive" in (a.verdict, b.verdict):
            continue
        assert a.verdict == b.verdict, q
        checked += 1
    assert checked >= 30


def test_confluence_union_of_bounded_letters():
    rng = random.Random(23)
    for _ in range(25):
        q = gen_random_crpq_astar(rng)
        result = maximal_bounded_letters(q, TIGHT)
        if result.inconclusive:
            continue
        union_report = is_bounded_in(q, result.letters, TIGHT)
        assert union_report.verdict == "bounded", q


def test_trivial_direction_expansions_of_bound_are_expansions():
    q = parse_ucrpq("?x -[a*]-> ?y, ?x -[b]-> ?y")
    z = 3
    rhs = bound_query(q, z)
    d_orig = q.disjuncts[0]
    dom = ExponentDomain(
        tuple(
            (i, tuple(range(z + 1)))
            for i, a in enumerate(d_orig.atoms)
            if a.label.__class__.__name__ == "Star"
        )
    )
    of_q = {render_succinct_cq(lam) for lam in enumerate_expansions(d_orig, dom)}
    of_rhs = {
        render_succinct_cq(lam)
        for d in rhs.disjuncts
        for lam in enumerate_expansions(d, ExponentDomain(()))
    }
    assert of_rhs <= of_q


def test_zplus_safe_mode_agrees_on_examples():
    for text, want in [
        ("?x -[a]-> ?y, ?x -[a*]-> ?z, ?z -[b]-> ?w", "bounded"),
        ("?x -[a*]-> ?y, ?x -[b]-> ?y", "unbounded"),
        ("?x -[ab]-> ?y", "bounded"),
    ]:
        report = is_bounded(parse_ucrpq(text), zplus_mode="safe")
        assert report.verdict == want
        assert report.bounds.z_plus == is_bounded(parse_ucrpq(text)).bounds.z_plus


def test_safe_probe_is_larger_and_recorded_in_mode():
    q = parse_ucrpq("?x -[a*]-> ?y, ?x -[b]-> ?y")
    paper = is_bounded(q)
    safe = is_bounded(q, zplus_mode="safe")
    assert safe.mode["probe"] > paper.mode["probe"]
    assert safe.witness.atoms[0].exponent == safe.mode["probe"]


def test_full_enumeration_agrees_and_finds_earliest_witness():
    q = parse_ucrpq("?x -[a*]-> ?y, ?x -[b]-> ?y")
    restricted = is_bounded(q)
    full = is_bounded(q, full_enumeration=True)
    assert restricted.verdict == full.verdict == "unbounded"
    full_exp = max(a.exponent for a in full.witness.atoms)
    restricted_exp = max(a.exponent for a in restricted.witness.atoms)
    assert full_exp == restricted.bounds.z + 1
    assert restricted_exp == restricted.bounds.z_plus


def test_unknown_zplus_mode_rejected():
    q = parse_ucrpq("?x -[a]-> ?y")
    with pytest.raises(ValueError):
        is_bounded(q, zplus_mode="fast")
    with pytest.raises(ValueError):
        is_bounded_in(q, {"a"}, zplus_mode="fast")


def test_budget_overflow_is_inconclusive_with_reason():
    q = parse_ucrpq("?x -[a*]-> ?y, ?x -[b]-> ?y")
    report = is_bounded(q, replace(DEFAULT_CAPS, max_expansions=3))
    assert report.verdict == "inconclusive"
    assert "budget" in report.inconclusive_reason


def test_huge_bounds_precheck_is_instant_and_inconclusive():
    # ten anchored star atoms give a raw count far past any budget; the
    # arithmetic precheck must refuse without materializing domains
    atoms = ", ".join(f"?x -[a*]-> ?y{i}" for i in range(10))
    q = parse_ucrpq(atoms + ", ?x -[b]-> ?y0")
    report = is_bounded(q)
    assert report.verdict == "inconclusive"
    assert "budget" in report.inconclusive_reason


def test_verdicts_never_contradict_between_modes():
    rng = random.Random(29)
    for _ in range(20):
        q = gen_random_crpq_astar(rng)
        verdicts = {
            is_bounded(q, TIGHT).verdict,
            is_bounded(q, TIGHT, zplus_mode="safe").verdict,
        }
        concrete = verdicts - {"inconclusive"}
        assert len(concrete) <= 1, q

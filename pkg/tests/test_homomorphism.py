"""Homomorphism search and succinct containment."""

import random

import pytest

from conftest import gen_random_succinct_cq
from crpqbound.expansion import (
    ExponentDomain,
    SuccinctAtom,
    SuccinctCQ,
    bound_query,
    enumerate_expansions,
    materialize,
)
from crpqbound.homomorphism import (
    AtomBreaking,
    Contained,
    NotContained,
    cq_hom,
    expansion_contained,
    succinct_containment,
)
from crpqbound.syntax import parse_ucrpq


def _path_cq(symbols, prefix="p"):
    atoms = tuple(
        SuccinctAtom(f"{prefix}{i}", (s,), 1, f"{prefix}{i + 1}")
        for i, s in enumerate(symbols)
    )
    variables = tuple(f"{prefix}{i}" for i in range(len(symbols) + 1))
    return materialize(SuccinctCQ(variables, atoms))


def test_cq_hom_single_edge():
    src = _path_cq("a", prefix="s")
    dst = _path_cq("a", prefix="d")
    hom = cq_hom(src, dst)
    assert hom == {"s0": "d0", "s1": "d1"}


def test_cq_hom_cycle_into_loop():
    cycle = materialize(
        SuccinctCQ(
            ("x", "y"),
            (SuccinctAtom("x", ("a",), 1, "y"), SuccinctAtom("y", ("a",), 1, "x")),
        )
    )
    loop = materialize(SuccinctCQ(("u",), (SuccinctAtom("u", ("a",), 1, "u"),)))
    hom = cq_hom(cycle, loop)
    assert hom == {"x": "u", "y": "u"}


def test_cq_hom_longer_path_has_none():
    assert cq_hom(_path_cq("aaa", prefix="s"), _path_cq("aa", prefix="d")) is None


def test_cq_hom_respects_atoms():
    src = _path_cq("ab", prefix="s")
    dst = _path_cq("ab", prefix="d")
    hom = cq_hom(src, dst)
    for atom in src.atoms:
        assert any(
            d.src == hom[atom.src] and d.symbol == atom.symbol and d.dst == hom[atom.dst]
            for d in dst.atoms
        )


def test_succinct_containment_prefix_power():
    left = SuccinctCQ(("x", "y"), (SuccinctAtom("x", ("a", "b"), 4, "y"),))
    right = SuccinctCQ(("u", "v"), (SuccinctAtom("u", ("a", "b"), 2, "v"),))
    assert succinct_containment(left, right)


def test_succinct_containment_reflexive_example():
    left = SuccinctCQ(("x", "y"), (SuccinctAtom("x", ("a", "b"), 4, "y"),))
    assert succinct_containment(left, left)


def test_succinct_containment_no_long_path():
    left = SuccinctCQ(("x", "y"), (SuccinctAtom("x", ("a",), 2, "y"),))
    right = SuccinctCQ(("u", "v"), (SuccinctAtom("u", ("a",), 3, "v"),))
    assert not succinct_containment(left, right)


def test_succinct_containment_differential():
    rng = random.Random(77)
    agree = 0
    for _ in range(120):
        left = gen_random_succinct_cq(rng, max_atoms=3, max_exp=5)
        right = gen_random_succinct_cq(rng, max_atoms=2, max_exp=4)
        want = cq_hom(materialize(right), materialize(left)) is not None
        got = succinct_containment(left, right)
        assert got == want, (left, right)
        agree += 1
    assert agree == 120


def test_succinct_containment_reflexive_transitive_sampled():
    rng = random.Random(78)
    found_chain = 0
    for _ in range(80):
        a = gen_random_succinct_cq(rng, max_atoms=2, max_exp=4)
        b = gen_random_succinct_cq(rng, max_atoms=2, max_exp=4)
        c = gen_random_succinct_cq(rng, max_atoms=2, max_exp=4)
        assert succinct_containment(a, a)
        if succinct_containment(a, b) and succinct_containment(b, c):
            found_chain += 1
            assert succinct_containment(a, c)
    assert found_chain > 0


def test_hom_composition():
    q2 = _path_cq("aa", prefix="t")
    q1 = _path_cq("aa", prefix="m")
    loop = materialize(SuccinctCQ(("u",), (SuccinctAtom("u", ("a",), 1, "u"),)))
    h1 = cq_hom(q2, q1)
    h2 = cq_hom(q1, loop)
    assert h1 and h2
    composed = {v: h2[h1[v]] for v in h1}
    for atom in q2.atoms:
        assert any(
            d.src == composed[atom.src]
            and d.symbol == atom.symbol
            and d.dst == composed[atom.dst]
            for d in loop.atoms
        )


def test_expansion_contained_identity_case():
    q = parse_ucrpq("?x -[a*]-> ?y, ?x -[b]-> ?y")
    lam = SuccinctCQ(
        ("x", "y"),
        (SuccinctAtom("x", ("a",), 1, "y"), SuccinctAtom("x", ("b",), 1, "y")),
    )
    result = expansion_contained(lam, bound_query(q, 1))
    assert isinstance(result, Contained)


def test_expansion_contained_exponent_two_fails_at_one():
    q = parse_ucrpq("?x -[a*]-> ?y, ?x -[b]-> ?y")
    lam = SuccinctCQ(
        ("x", "y"),
        (SuccinctAtom("x", ("a",), 2, "y"), SuccinctAtom("x", ("b",), 1, "y")),
    )
    result = expansion_contained(lam, bound_query(q, 1))
    assert isinstance(result, NotContained)


def test_expansion_contained_tail_pattern():
    q = parse_ucrpq("?x -[a]-> ?y, ?x -[a*]-> ?z, ?z -[b]-> ?w")
    for n in (0, 2, 5):
        lam_atoms = [SuccinctAtom("x", ("a",), 1, "y")]
        if n:
            lam_atoms.append(SuccinctAtom("x", ("a",), n, "z"))
            lam_atoms.append(SuccinctAtom("z", ("b",), 1, "w"))
            variables = ("x", "y", "z", "w")
        else:
            # exponent 0 identifies x with z, leaving the b edge at x
            lam_atoms.append(SuccinctAtom("x", ("b",), 1, "w"))
            variables = ("x", "y", "w")
        lam = SuccinctCQ(variables, tuple(lam_atoms))
        result = expansion_contained(lam, bound_query(q, 1))
        assert isinstance(result, Contained), n


def test_expansion_contained_monotone_in_m():
    q = parse_ucrpq("?x -[a*]-> ?y, ?x -[b]-> ?y")
    lam = SuccinctCQ(
        ("x", "y"),
        (SuccinctAtom("x", ("a",), 3, "y"), SuccinctAtom("x", ("b",), 1, "y")),
    )
    hits = [
        isinstance(expansion_contained(lam, bound_query(q, m)), Contained)
        for m in range(0, 6)
    ]
    assert hits == sorted(hits)  # once contained, stays contained
    assert hits[3] and not hits[2]


def test_expansion_contained_witness_maps_into_canonical():
    q = parse_ucrpq("?x -[a*]-> ?y, ?x -[b]-> ?y")
    lam = SuccinctCQ(
        ("x", "y"),
        (SuccinctAtom("x", ("a",), 1, "y"), SuccinctAtom("x", ("b",), 1, "y")),
    )
    result = expansion_contained(lam, bound_query(q, 2))
    assert isinstance(result, Contained)
    hom = result.hom
    target = materialize(lam)
    witness_cq = materialize(result.expansion)
    for atom in witness_cq.atoms:
        assert hom[atom.src] in target.variables
        assert hom[atom.dst] in target.variables


def test_expansion_contained_against_starful_right_side():
    q = parse_ucrpq("?x -[a*]-> ?y, ?x -[b]-> ?y, ?x -[c*]-> ?w")
    lam_atoms = (
        SuccinctAtom("x", ("a",), 1, "y"),
        SuccinctAtom("x", ("b",), 1, "y"),
        SuccinctAtom("x", ("c",), 9, "w"),
    )
    lam = SuccinctCQ(("x", "y", "w"), lam_atoms)
    from crpqbound.expansion import bound_letters

    rhs = bound_letters(q, {"c"}, 2)
    assert isinstance(expansion_contained(lam, rhs), Contained)


def test_atom_breaking_segments_spell_the_power():
    atom = SuccinctAtom("x", ("a", "b"), 4, "y")
    breaking = AtomBreaking(atom, (3, 5))
    segs = breaking.segments()
    spelled = []
    for word, exp in segs:
        spelled.extend(word * exp)
    assert tuple(spelled) == ("a", "b") * 4
    assert breaking.cut_variables == ("brk1", "brk2")
    assert breaking.verify()


def test_atom_breaking_rejects_bad_offsets():
    atom = SuccinctAtom("x", ("a",), 3, "y")
    with pytest.raises(ValueError):
        AtomBreaking(atom, (0,))
    with pytest.raises(ValueError):
        AtomBreaking(atom, (2, 2))
    with pytest.raises(ValueError):
        AtomBreaking(atom, (3,))


def test_atom_breaking_verify_random():
    rng = random.Random(3)
    for _ in range(60):
        word = tuple(rng.choice("ab") for _ in range(rng.randint(1, 3)))
        exponent = rng.randint(1, 6)
        atom = SuccinctAtom("x", word, exponent, "y")
        total = atom.length
        interior = sorted(rng.sample(range(1, total), min(2, total - 1))) if total > 1 else []
        breaking = AtomBreaking(atom, tuple(interior))
        assert breaking.verify(), (word, exponent, interior)


def test_expansion_contained_yields_expansion_of_rhs():
    q = parse_ucrpq("?x -[a*]-> ?y, ?x -[b]-> ?y")
    rhs = bound_query(q, 2)
    lam = SuccinctCQ(
        ("x", "y"),
        (SuccinctAtom("x", ("a",), 2, "y"), SuccinctAtom("x", ("b",), 1, "y")),
    )
    result = expansion_contained(lam, rhs)
    assert isinstance(result, Contained)
    rendered = {
        tuple(sorted((a.src, "".join(a.word), a.exponent, a.dst) for a in e.atoms))
        for d in rhs.disjuncts
        for e in enumerate_expansions(d, ExponentDomain(()))
    }
    found = tuple(
        sorted((a.src, "".join(a.word), a.exponent, a.dst) for a in result.expansion.atoms)
    )
    assert found in rendered

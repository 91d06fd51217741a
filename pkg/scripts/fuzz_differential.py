#!/usr/bin/env python3
"""Fuzz the succinct algorithms against their brute-force counterparts.

Three rounds: NFA membership vs materialized membership, succinct CQ
containment vs materialized homomorphism search, and boundedness verdicts
cross-checked by oracle evaluation on witness databases or sampled
equivalence of rewritings.  Any disagreement prints a replay line and the
script exits nonzero.
"""

import argparse
import random
import sys
import time
from dataclasses import dataclass, replace
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "tests"))

from conftest import (  # noqa: E402
    gen_random_crpq_astar,
    gen_random_snfa,
    gen_random_succinct_cq,
    gen_random_word,
)
from crpqbound.boundedness import is_bounded  # noqa: E402
from crpqbound.config import DEFAULT_CAPS  # noqa: E402
from crpqbound.expansion import (  # noqa: E402
    ExponentDomain,
    bound_query,
    enumerate_expansions,
    materialize,
)
from crpqbound.homomorphism import cq_hom, succinct_containment  # noqa: E402
from crpqbound.oracle import (  # noqa: E402
    eval_on_graph,
    graph_of_cq,
    nfa_membership_brute,
)
from crpqbound.succinct_nfa import membership  # noqa: E402
from crpqbound.syntax import Star  # noqa: E402


@dataclass
class FuzzConfig:
    seed: int = 0
    nfa_trials: int = 2000
    containment_pairs: int = 1000
    boundedness_queries: int = 100


def fuzz_membership(cfg: FuzzConfig) -> int:
    rng = random.Random(cfg.seed)
    bad = 0
    for i in range(cfg.nfa_trials):
        nfa = gen_random_snfa(rng)
        v = gen_random_word(rng)
        m = rng.randint(0, 16)
        if membership(nfa, v, m) != nfa_membership_brute(nfa, v, m):
            bad += 1
            print(f"  membership mismatch at trial {i}: v={v} m={m} nfa={nfa}")
    return bad


def fuzz_containment(cfg: FuzzConfig) -> int:
    rng = random.Random(cfg.seed + 1)
    bad = 0
    for i in range(cfg.containment_pairs):
        left = gen_random_succinct_cq(rng)
        right = gen_random_succinct_cq(rng)
        want = cq_hom(materialize(right), materialize(left)) is not None
        if succinct_containment(left, right) != want:
            bad += 1
            print(f"  containment mismatch at pair {i}: {left} vs {right}")
    return bad


def fuzz_boundedness(cfg: FuzzConfig) -> int:
    """Confirm each conclusive verdict with the evaluation oracle.

    Unbounded verdicts replay the witness on its own canonical database.
    Bounded verdicts are probed just past the threshold: the canonical
    database of every expansion at exponents z+1 and z+2 must still
    satisfy the star-free rewriting.
    """
    rng = random.Random(cfg.seed + 2)
    caps = replace(DEFAULT_CAPS, max_expansions=20000)
    bad = inconclusive = 0
    for i in range(cfg.boundedness_queries):
        q = gen_random_crpq_astar(rng)
        report = is_bounded(q, caps)
        if report.verdict == "inconclusive":
            inconclusive += 1
        elif report.verdict == "unbounded":
            db = graph_of_cq(materialize(report.witness))
            if not eval_on_graph(q, db) or eval_on_graph(
                bound_query(q, report.bounds.z), db
            ):
                bad += 1
                print(f"  witness not confirmed at query {i}: {q}")
        else:
            z = report.bounds.z
            d = q.disjuncts[0]
            star_idx = [
                j
                for j, a in enumerate(d.edge_atoms)
                if isinstance(a.label, Star)
            ]
            for exponent in (z + 1, z + 2):
                dom = ExponentDomain.uniform(star_idx, (exponent,))
                for lam in enumerate_expansions(d, dom, caps=caps):
                    db = graph_of_cq(materialize(lam, caps=caps))
                    if db.vertices and not eval_on_graph(report.rewriting, db):
                        bad += 1
                        print(f"  rewriting refuted at query {i}: {q}")
    print(f"  ({inconclusive} queries inconclusive under the fuzz budget)")
    return bad


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--nfa-trials", type=int, default=2000)
    parser.add_argument("--containment-pairs", type=int, default=1000)
    parser.add_argument("--boundedness-queries", type=int, default=100)
    args = parser.parse_args()
    cfg = FuzzConfig(
        seed=args.seed,
        nfa_trials=args.nfa_trials,
        containment_pairs=args.containment_pairs,
        boundedness_queries=args.boundedness_queries,
    )

    total = 0
    for name, round_fn, count in (
        ("membership", fuzz_membership, cfg.nfa_trials),
        ("containment", fuzz_containment, cfg.containment_pairs),
        ("boundedness", fuzz_boundedness, cfg.boundedness_queries),
    ):
        t0 = time.monotonic()
        bad = round_fn(cfg)
        total += bad
        status = "ok" if bad == 0 else f"{bad} MISMATCHES"
        print(f"{name}: {count} instances, {status}, {time.monotonic() - t0:.1f}s")
    return 1 if total else 0


if __name__ == "__main__":
    sys.exit(main())

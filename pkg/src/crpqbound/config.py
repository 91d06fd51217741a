"""Resource caps and run statistics.

All potentially explosive computations take a :class:`Caps` instance and
raise :class:`~crpqbound.errors.CapExceeded` rather than silently
truncating.  A :class:`Stats` object threads through analysis calls so
callers can report how much work a verdict cost.
"""

from dataclasses import dataclass, field


@dataclass(frozen=True)
class Caps:
    """Hard limits for the succinct algorithms.

    max_expansions:
        Most expansions a single enumeration may visit.
    max_materialized_atoms:
        Most edge atoms a materialized expansion may contain.
    max_length_dp:
        Largest path-length target the reachability engines handle.
    max_positions:
        Most candidate positions the succinct containment check builds.
    max_word_len:
        Longest word allowed under a star or power when materializing.
    max_semilinear:
        Most residues tracked per strongly connected component in the
        exact length-set route.
    """

    max_expansions: int = 10**5
    max_materialized_atoms: int = 10**6
    max_length_dp: int = 10**6
    max_positions: int = 10**4
    max_word_len: int = 10**4
    max_semilinear: int = 10**5

    def with_uniform(self, cap: int) -> "Caps":
        """Return a copy with every limit set to ``cap``."""
        return Caps(
            max_expansions=cap,
            max_materialized_atoms=cap,
            max_length_dp=cap,
            max_positions=cap,
            max_word_len=cap,
            max_semilinear=cap,
        )


@dataclass
class Stats:
    """Mutable counters accumulated during an analysis run."""

    expansions_checked: int = 0
    nfa_calls: int = 0
    wall_ms: float = 0.0
    seed: int | None = None
    notes: list[str] = field(default_factory=list)


DEFAULT_CAPS = Caps()

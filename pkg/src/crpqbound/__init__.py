"""Static analysis toolkit for recursive graph queries.

The package decides whether a query built from concatenations, unions,
bounded powers, and single-word transitive closures is *bounded*, i.e.
equivalent to a recursion-free query, and when it is, emits an explicit
star-free rewriting.  Every nontrivial algorithm has a brute-force
counterpart in :mod:`crpqbound.oracle` so results can be cross-checked
on small instances.
"""

from crpqbound.errors import CapExceeded, ParseError, UnsupportedFragment
from crpqbound.config import Caps, Stats

__all__ = [
    "CapExceeded",
    "ParseError",
    "UnsupportedFragment",
    "Caps",
    "Stats",
]

__version__ = "0.1.0"

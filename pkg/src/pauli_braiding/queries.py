"""Query messages the verifier sends to players.

All query types are frozen dataclasses so they can key measurement caches.
"""
from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
from functools import lru_cache
from typing import Hashable, Optional

from . import bits as bt


@dataclass(frozen=True)
class WQuery:
    """A pair of strings in basis ``"X"`` or ``"Z"`` (``None`` for the bare linearity test).

    The pair is stored lexicographically sorted, as it is sent to the player.
    The player answers one sign per string, in pair order.
    """

    basis: Optional[str]
    pair: tuple

    @classmethod
    def of(cls, basis, s, t) -> "WQuery":
        return cls(basis, bt.sorted_pair(bt.to_bits(s), bt.to_bits(t)))

    def answer_for(self, s, answer) -> int:
        """The sign the answer tuple attaches to string ``s``."""
        return answer[self.pair.index(tuple(s))]


@dataclass(frozen=True)
class GQuery:
    """An anticommutation-game question ``q`` in the role of player ``role``, with a.b = 1.

    The strings are kept in the order (a, b): ``a`` labels the X-type word and
    ``b`` the Z-type word, so they are never re-sorted.
    """

    role: int
    q: Hashable
    a: tuple
    b: tuple


@dataclass(frozen=True)
class XZQuery:
    """Measure ``sigma_X(a)`` and ``sigma_Z(b)`` with disjoint supports; ordered strings."""

    a: tuple
    b: tuple


@dataclass(frozen=True)
class Marginal:
    """Placeholder for a player whose answer the verifier ignores.

    ``support`` lists ``(weight, query)`` pairs describing the fresh query the
    player actually receives. The value engine skips such players (their
    projectors sum to identity), while marginal-distribution enumeration
    expands them.
    """

    support: tuple

    def distribution(self) -> dict:
        return {q: w for w, q in self.support}


def merge_weights(items) -> tuple:
    """Collapse ``(weight, key)`` pairs with equal keys, preserving first-seen order."""
    acc = defaultdict(float)
    order = []
    for w, key in items:
        if key not in acc:
            order.append(key)
        acc[key] += w
    return tuple((acc[k], k) for k in order)


@lru_cache(maxsize=None)
def uniform_w_marginal(basis, n: int) -> Marginal:
    """A fresh W-query with both strings uniform in {0,1}^n."""
    strings = bt.all_strings(n)
    w = 1.0 / len(strings) ** 2
    return Marginal(merge_weights((w, WQuery.of(basis, s, t)) for s in strings for t in strings))

"""Binary strings as tuples of 0/1 ints.

Addition is bitwise XOR and ``dot`` is the inner product mod 2. Strings
enumerate in lexicographic order, which is also the order in which query
pairs are sent to players.
"""
from __future__ import annotations

import itertools
from typing import Sequence

Bits = tuple[int, ...]


def to_bits(s: str | Sequence[int]) -> Bits:
    if isinstance(s, str):
        if any(ch not in "01" for ch in s):
            raise ValueError(f"not a binary string: {s!r}")
        return tuple(int(ch) for ch in s)
    out = tuple(int(x) for x in s)
    if any(x not in (0, 1) for x in out):
        raise ValueError(f"not a binary string: {s!r}")
    return out


def to_str(a: Bits) -> str:
    return "".join(str(x) for x in a)


def xor(a: Bits, b: Bits) -> Bits:
    if len(a) != len(b):
        raise ValueError("length mismatch")
    return tuple(x ^ y for x, y in zip(a, b))


def dot(a: Bits, b: Bits) -> int:
    if len(a) != len(b):
        raise ValueError("length mismatch")
    return sum(x & y for x, y in zip(a, b)) & 1


def weight(a: Bits) -> int:
    return sum(a)


def zeros(n: int) -> Bits:
    return (0,) * n


def all_strings(n: int) -> list[Bits]:
    """All n-bit strings in lexicographic order."""
    return list(itertools.product((0, 1), repeat=n))


def sorted_pair(a: Bits, b: Bits) -> tuple[Bits, Bits]:
    return (a, b) if a <= b else (b, a)


def to_int(a: Bits) -> int:
    """Big-endian integer value (qubit 0 is the most significant bit)."""
    v = 0
    for x in a:
        v = (v << 1) | x
    return v


def from_int(v: int, n: int) -> Bits:
    return tuple((v >> (n - 1 - i)) & 1 for i in range(n))

"""CSS stabilizer codes, the Steane code, encoding and complementary queries.

Encoded registers use a share-major layout: for n logical qubits and an
r-qubit code, physical player j holds qubits ``j*n .. j*n + n - 1``, one share
of every logical qubit.
"""
from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from . import bits as bt
from .errors import PreconditionError, ResourceLimitError, ValidationError
from .pauli import DENSE_LIMIT, PauliWord, pauli_dense
from .queries import Marginal, WQuery, uniform_w_marginal


@dataclass(frozen=True)
class CssCode:
    r: int
    x_stabilizers: tuple
    z_stabilizers: tuple
    logical_x: tuple
    logical_z: tuple

    def __post_init__(self):
        object.__setattr__(self, "x_stabilizers", tuple(bt.to_bits(s) for s in self.x_stabilizers))
        object.__setattr__(self, "z_stabilizers", tuple(bt.to_bits(s) for s in self.z_stabilizers))
        object.__setattr__(self, "logical_x", bt.to_bits(self.logical_x))
        object.__setattr__(self, "logical_z", bt.to_bits(self.logical_z))

    def group(self, basis: str) -> list:
        """All products of the X- (or Z-) generators, as support strings, without repeats."""
        gens = self.x_stabilizers if basis == "X" else self.z_stabilizers
        seen = {bt.zeros(self.r)}
        for mask in itertools.product((0, 1), repeat=len(gens)):
            s = bt.zeros(self.r)
            for use, g in zip(mask, gens):
                if use:
                    s = bt.xor(s, g)
            seen.add(s)
        return sorted(seen)

    def generator_words(self) -> list:
        """The stabilizer generators as Pauli words, X-type first."""
        zero = bt.zeros(self.r)
        return ([PauliWord(s, zero) for s in self.x_stabilizers]
                + [PauliWord(zero, s) for s in self.z_stabilizers])

    @cached_property
    def logical_basis(self) -> np.ndarray:
        """Columns ``|0_L>`` and ``|1_L> = X_L |0_L>`` as a 2^r x 2 isometry."""
        if self.r > DENSE_LIMIT:
            raise ResourceLimitError(f"code length {self.r} exceeds dense limit")
        d = 2**self.r
        proj = np.eye(d)
        for w in self.generator_words():
            proj = proj @ (np.eye(d) + pauli_dense(w)) / 2
        proj = proj @ (np.eye(d) + pauli_dense(PauliWord.z(self.logical_z))) / 2
        zero_l = None
        for i in range(d):
            v = proj[:, i]
            if np.linalg.norm(v) > 1e-6:
                zero_l = v / np.linalg.norm(v)
                break
        if zero_l is None:
            raise ValidationError("code space intersected with logical-Z +1 space is empty")
        one_l = pauli_dense(PauliWord.x(self.logical_x)) @ zero_l
        return np.stack([zero_l, one_l], axis=1).astype(complex)


def steane_code() -> CssCode:
    """The 7-qubit Steane code with transversal logical operators."""
    rows = ("0001111", "0110011", "1010101")
    return CssCode(7, rows, rows, "1111111", "1111111")


@dataclass
class CodeReport:
    failures: list = field(default_factory=list)
    uncovered: tuple = ()

    @property
    def passed(self) -> bool:
        return not self.failures

    def __bool__(self):
        return self.passed


def verify_code(code: CssCode) -> CodeReport:
    """Check the CSS relations and X-completeness; every failing relation is reported."""
    report = CodeReport()
    strings = list(code.x_stabilizers) + list(code.z_stabilizers) + [code.logical_x, code.logical_z]
    if any(len(s) != code.r for s in strings):
        report.failures.append(f"some string does not have length r={code.r}")
        return report
    for i, x in enumerate(code.x_stabilizers):
        for j, z in enumerate(code.z_stabilizers):
            if bt.dot(x, z):
                report.failures.append(f"X-stabilizer {i} anticommutes with Z-stabilizer {j}")
    if bt.dot(code.logical_x, code.logical_z) != 1:
        report.failures.append("logical X and logical Z do not anticommute")
    for j, z in enumerate(code.z_stabilizers):
        if bt.dot(code.logical_x, z):
            report.failures.append(f"logical X anticommutes with Z-stabilizer {j}")
    for i, x in enumerate(code.x_stabilizers):
        if bt.dot(code.logical_z, x):
            report.failures.append(f"logical Z anticommutes with X-stabilizer {i}")
    z_group = set(code.group("Z"))
    uncovered = []
    for i in range(code.r):
        if not any(s[i] and s in z_group for s in code.group("X")):
            uncovered.append(i)
    if uncovered:
        report.failures.append(f"X-completeness fails at positions {uncovered}")
    report.uncovered = tuple(uncovered)
    return report


def load_code(path) -> CssCode:
    """Load a code from JSON: ``{"r", "x_stabilizers", "z_stabilizers", "logical_x", "logical_z"}``."""
    with open(path) as fh:
        obj = json.load(fh)
    try:
        code = CssCode(int(obj["r"]), obj["x_stabilizers"], obj["z_stabilizers"],
                       obj["logical_x"], obj["logical_z"])
    except KeyError as exc:
        raise ValidationError(f"code file is missing field {exc}") from None
    return code


def encode(code: CssCode, psi: np.ndarray, limit: int = DENSE_LIMIT) -> np.ndarray:
    """Encode each logical qubit of ``psi`` into the code, in share-major qubit order."""
    psi = np.asarray(psi, dtype=complex).reshape(-1)
    n = int(round(np.log2(psi.size)))
    if 2**n != psi.size:
        raise PreconditionError("state length is not a power of two")
    r = code.r
    if r * n > limit:
        raise ResourceLimitError(f"{r * n} physical qubits exceeds limit {limit}")
    enc = code.logical_basis
    t = psi.reshape((2,) * n)
    for k in range(n):
        # replace logical axis k by the 2^r physical axis of block k
        t = np.tensordot(enc, t, axes=([1], [k]))
        t = np.moveaxis(t, 0, k)
    t = t.reshape((2,) * (r * n))  # logical-major: axis k*r + j
    order = [k * r + j for j in range(r) for k in range(n)]  # share-major position j*n + k
    return np.transpose(t, order).reshape(-1)


def stabilizers_through(code: CssCode, special: int, basis: str) -> list:
    """Stabilizer supports of type ``basis`` that contain ``special``.

    For basis ``"G"`` the support must be both an X- and a Z-stabilizer, which
    is what lifting an anticommutation-game question needs.
    """
    if not 0 <= special < code.r:
        raise IndexError(f"special player {special} outside [0, {code.r})")
    if basis == "G":
        cands = sorted(set(code.group("X")) & set(code.group("Z")))
    elif basis in ("X", "Z"):
        cands = code.group(basis)
    else:
        raise PreconditionError(f"unknown stabilizer basis {basis!r}")
    return [s for s in cands if s[special]]


@dataclass(frozen=True)
class ComplementaryQuery:
    """Per-player queries for one composite query and the players whose answers combine."""

    per_player_query: tuple
    combine: tuple
    stabilizer: tuple


def complementary_for(code: CssCode, query, special: int, stabilizer, fresh: Marginal) -> ComplementaryQuery:
    """Send ``query`` to the stabilizer support and ``fresh`` to every other non-special player.

    The special player's own slot is left as ``None``; callers fill it.
    """
    stabilizer = tuple(stabilizer)
    if not stabilizer[special]:
        raise PreconditionError("stabilizer support does not contain the special player")
    per = []
    for j in range(code.r):
        if j == special:
            per.append(None)
        elif stabilizer[j]:
            per.append(query)
        else:
            per.append(fresh)
    combine = tuple(j for j in range(code.r) if stabilizer[j] and j != special)
    return ComplementaryQuery(tuple(per), combine, stabilizer)


def complementary_query(code: CssCode, query: WQuery, special: int, rng: np.random.Generator) -> ComplementaryQuery:
    """Complementary query for an X- or Z-query with a uniformly chosen stabilizer through ``special``."""
    if not isinstance(query, WQuery) or query.basis not in ("X", "Z"):
        raise PreconditionError("complementary_query handles X- and Z-queries only")
    cands = stabilizers_through(code, special, query.basis)
    stab = cands[int(rng.integers(len(cands)))]
    n = len(query.pair[0])
    return complementary_for(code, query, special, stab, uniform_w_marginal(query.basis, n))

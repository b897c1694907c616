"""Signed Pauli words over {I, X, Z} in the binary (a, b) representation.

A word ``PauliWord(a, b, sign)`` stands for ``sign * X(a) Z(b)``, the
ordered product with every X factor to the left of every Z factor. Qubit 0
is the leftmost tensor factor (most significant bit of a basis index).
Because only X and Z appear, all phases are real and the sign is +1 or -1.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from functools import reduce
from typing import Sequence

import numpy as np

from . import bits as bt
from .errors import DimensionError, PreconditionError, ResourceLimitError, ValidationError

#: Largest qubit count for which dense 2^n x 2^n matrices are built.
DENSE_LIMIT = 14

SIGMA_I = np.eye(2)
SIGMA_X = np.array([[0.0, 1.0], [1.0, 0.0]])
SIGMA_Z = np.array([[1.0, 0.0], [0.0, -1.0]])

_TEXT_RE = re.compile(r"^\s*([+-]?)X:([01]*);Z:([01]*)\s*$")


@dataclass(frozen=True)
class PauliWord:
    a: bt.Bits
    b: bt.Bits
    sign: int = 1

    def __post_init__(self):
        object.__setattr__(self, "a", bt.to_bits(self.a))
        object.__setattr__(self, "b", bt.to_bits(self.b))
        if len(self.a) != len(self.b):
            raise DimensionError(f"X-part has {len(self.a)} bits, Z-part has {len(self.b)}")
        if self.sign not in (1, -1):
            raise ValueError(f"sign must be +1 or -1, got {self.sign}")

    @property
    def n(self) -> int:
        return len(self.a)

    @classmethod
    def identity(cls, n: int) -> "PauliWord":
        return cls(bt.zeros(n), bt.zeros(n))

    @classmethod
    def x(cls, a) -> "PauliWord":
        a = bt.to_bits(a)
        return cls(a, bt.zeros(len(a)))

    @classmethod
    def z(cls, b) -> "PauliWord":
        b = bt.to_bits(b)
        return cls(bt.zeros(len(b)), b)

    @classmethod
    def parse(cls, text: str) -> "PauliWord":
        """Parse the text form ``[+|-]X:<bits>;Z:<bits>``."""
        m = _TEXT_RE.match(text)
        if m is None:
            raise ValidationError(f"malformed Pauli word: {text!r}")
        sign = -1 if m.group(1) == "-" else 1
        return cls(m.group(2), m.group(3), sign)

    def __str__(self) -> str:
        return f"{'+' if self.sign > 0 else '-'}X:{bt.to_str(self.a)};Z:{bt.to_str(self.b)}"

    def __neg__(self) -> "PauliWord":
        return PauliWord(self.a, self.b, -self.sign)

    def __mul__(self, other: "PauliWord") -> "PauliWord":
        return pauli_multiply(self, other)

    def square_sign(self) -> int:
        """The word squares to this sign times the identity."""
        return -1 if bt.dot(self.a, self.b) else 1

    def is_hermitian(self) -> bool:
        return bt.dot(self.a, self.b) == 0

    def commutes_with(self, other: "PauliWord") -> bool:
        return (bt.dot(self.a, other.b) + bt.dot(other.a, self.b)) % 2 == 0

    def transpose(self) -> "PauliWord":
        # (X(a)Z(b))^T = Z(b)X(a) = (-1)^{a.b} X(a)Z(b)
        return PauliWord(self.a, self.b, self.sign * self.square_sign())

    def dense(self, limit: int = DENSE_LIMIT) -> np.ndarray:
        return pauli_dense(self, limit)


def pauli_multiply(p: PauliWord, q: PauliWord) -> PauliWord:
    """Product ``p * q``; moving q's X-part past p's Z-part costs (-1)^{q.a . p.b}."""
    if p.n != q.n:
        raise DimensionError(f"cannot multiply {p.n}-qubit and {q.n}-qubit words")
    phase = -1 if bt.dot(q.a, p.b) else 1
    return PauliWord(bt.xor(p.a, q.a), bt.xor(p.b, q.b), p.sign * q.sign * phase)


def pauli_dense(p: PauliWord, limit: int = DENSE_LIMIT) -> np.ndarray:
    """Dense real matrix of ``sign * X(a) Z(b)``."""
    if p.n > limit:
        raise ResourceLimitError(f"{p.n} qubits exceeds dense limit {limit}")
    factors = []
    for ai, bi in zip(p.a, p.b):
        f = SIGMA_I
        if ai and bi:
            f = SIGMA_X @ SIGMA_Z
        elif ai:
            f = SIGMA_X
        elif bi:
            f = SIGMA_Z
        factors.append(f)
    mat = reduce(np.kron, factors, np.ones((1, 1)))
    return p.sign * mat


def pauli_apply(p: PauliWord, psi: np.ndarray, qubits: Sequence[int]) -> np.ndarray:
    """Apply ``p`` to the listed qubits of state vector ``psi`` without a dense matrix.

    ``qubits[i]`` is the qubit of ``psi`` that receives the i-th factor of ``p``.
    """
    psi = np.asarray(psi)
    k = int(round(np.log2(psi.size)))
    if 2**k != psi.size:
        raise DimensionError("state length is not a power of two")
    qubits = list(qubits)
    if len(qubits) != p.n:
        raise DimensionError(f"word acts on {p.n} qubits, {len(qubits)} given")
    if len(set(qubits)) != len(qubits):
        raise PreconditionError("duplicate qubit indices")
    if any(q < 0 or q >= k for q in qubits):
        raise IndexError(f"qubit index out of range for a {k}-qubit state")
    out = psi.astype(complex).reshape((2,) * k)
    # Z(b) acts first, then X(a)
    for q, bi in zip(qubits, p.b):
        if bi:
            idx = [slice(None)] * k
            idx[q] = 1
            out[tuple(idx)] *= -1
    for q, ai in zip(qubits, p.a):
        if ai:
            out = np.flip(out, axis=q)
    out = out.reshape(psi.shape)
    return p.sign * out


def embed(op: np.ndarray, qubits: Sequence[int], total: int) -> np.ndarray:
    """Dense operator acting as ``op`` on ``qubits`` (in that order) and identity elsewhere."""
    qubits = list(qubits)
    k = len(qubits)
    if op.shape != (2**k, 2**k):
        raise DimensionError("operator size does not match qubit list")
    if total > DENSE_LIMIT:
        raise ResourceLimitError(f"{total} qubits exceeds dense limit {DENSE_LIMIT}")
    rest = [q for q in range(total) if q not in qubits]
    full = np.kron(op, np.eye(2 ** len(rest)))
    order = qubits + rest
    # full acts on qubits in `order`; permute tensor legs back to 0..total-1
    perm = np.argsort(order)
    t = full.reshape((2,) * (2 * total))
    t = t.transpose(list(perm) + [total + p for p in perm])
    return t.reshape(2**total, 2**total)


def _cnot_map(control: int, target: int, n: int) -> np.ndarray:
    idx = np.arange(2**n)
    cbit = (idx >> (n - 1 - control)) & 1
    return idx ^ (cbit << (n - 1 - target))


def _swap_map(i: int, j: int, n: int) -> np.ndarray:
    idx = np.arange(2**n)
    bi = (idx >> (n - 1 - i)) & 1
    bj = (idx >> (n - 1 - j)) & 1
    diff = bi ^ bj
    return idx ^ (diff << (n - 1 - i)) ^ (diff << (n - 1 - j))


def conjugating_permutation(a, b) -> np.ndarray:
    """Basis permutation ``pi`` with ``W|x> = |pi[x]>`` realising :func:`conjugating_clifford`.

    The circuit uses only CNOT and SWAP gates, so ``W`` is a real permutation
    matrix and ``W (x) W`` leaves ``|EPR>^n`` invariant.
    """
    a, b = bt.to_bits(a), bt.to_bits(b)
    n = len(a)
    if len(b) != n:
        raise DimensionError("a and b must have equal length")
    if bt.dot(a, b) != 1:
        raise PreconditionError("conjugating_clifford requires a.b = 1 mod 2")
    # pivot: first qubit where both strings have a 1 (exists since a.b is odd)
    k = next(i for i in range(n) if a[i] and b[i])
    gates = []
    for j in range(n):
        if j != k and a[j]:
            gates.append(("cnot", k, j))  # X_k X_j -> X_k
    # after the first layer the Z-part has a 1 at k (parity a.b) and b elsewhere
    for j in range(n):
        if j != k and b[j]:
            gates.append(("cnot", j, k))  # Z_j Z_k -> Z_k
    if k != n - 1:
        gates.append(("swap", k, n - 1))

    perm = np.arange(2**n)
    for g in gates:
        step = _cnot_map(g[1], g[2], n) if g[0] == "cnot" else _swap_map(g[1], g[2], n)
        perm = step[perm]
    return perm


def conjugating_clifford(a, b) -> np.ndarray:
    """Unitary ``W`` with ``W X(a) W^T = I (x) X`` and ``W Z(b) W^T = I (x) Z`` on the last qubit."""
    perm = conjugating_permutation(a, b)
    n = int(round(np.log2(perm.size)))
    if n > DENSE_LIMIT:
        raise ResourceLimitError(f"{n} qubits exceeds dense limit {DENSE_LIMIT}")
    w = np.zeros((perm.size, perm.size))
    w[perm, np.arange(perm.size)] = 1.0
    return w


def conjugate_word(p: PauliWord, perm: np.ndarray) -> PauliWord:
    """The Pauli word ``W^T p W`` for the CNOT/SWAP permutation ``W`` given by ``perm``.

    Found by reading off the dense action; only used on small registers.
    """
    n = p.n
    mat = pauli_dense(p)
    size = 2**n
    w = np.zeros((size, size))
    w[perm, np.arange(size)] = 1.0
    out = w.T @ mat @ w
    return word_from_dense(out)


def word_from_dense(mat: np.ndarray, atol: float = 1e-9) -> PauliWord:
    """Recover the signed word of a dense matrix that equals +-X(a)Z(b)."""
    n = int(round(np.log2(mat.shape[0])))
    # X(a)Z(b)|0> = |a>, so the nonzero entry of column 0 locates a
    col = mat[:, 0]
    row = int(np.argmax(np.abs(col)))
    a = bt.from_int(row, n)
    # X(a)Z(b)|e_i> = (-1)^{b_i} |a + e_i>, so each unit column reveals one bit of b
    b = []
    for i in range(n):
        e_i = 1 << (n - 1 - i)
        entry = mat[row ^ e_i, e_i]
        b.append(0 if np.real(entry / col[row]) > 0 else 1)
    sign = 1 if np.real(col[row]) > 0 else -1
    word = PauliWord(a, b, sign)
    if not np.allclose(pauli_dense(word), mat, atol=atol):
        raise ValidationError("matrix is not a signed X/Z Pauli word")
    return word

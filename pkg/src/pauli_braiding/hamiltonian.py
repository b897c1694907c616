"""XZ-Hamiltonians, the r-player Hamiltonian self-test, value bounds and gap amplification.

An XZ-Hamiltonian on n qubits is ``H = (1/m) sum_l alpha_l sigma_X(a_l) sigma_Z(b_l)``
with ``a_l AND b_l = 0``. The self-test is played by one player per qubit of
a CSS code. With probability ``1-p`` it runs the Pauli braiding test between
a uniformly chosen special player and the composite player formed by the
rest; otherwise it runs the energy test or the energy consistency test.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import reduce

import numpy as np

from . import bits as bt
from .braiding import anticommuting_pairs, braiding_check, braiding_entries, honest_player_measurement
from .css import CssCode, complementary_for, encode, stabilizers_through
from .errors import NumericInvariantError, PreconditionError, ResourceLimitError, ValidationError
from .games import AnticommutationGame, NonlocalGame, QuestionEntry, Strategy, player_marginal
from .pauli import DENSE_LIMIT, PauliWord, pauli_dense
from .queries import GQuery, Marginal, WQuery, XZQuery, merge_weights, uniform_w_marginal

#: amplitude magnitude below which an entry does not fix the ground-state phase
PHASE_TOL = 1e-12
#: largest qubit count for which amplify builds H' densely
AMPLIFY_DENSE_LIMIT = 12
#: largest total physical qubit count of an encoded strategy
ENCODED_QUBIT_LIMIT = 18


@dataclass(frozen=True)
class HamiltonianTerm:
    alpha: float
    a: tuple
    b: tuple

    @property
    def word(self) -> PauliWord:
        return PauliWord(self.a, self.b)


@dataclass(frozen=True)
class XZHamiltonian:
    n: int
    terms: tuple

    def __post_init__(self):
        if not self.terms:
            raise ValidationError("a Hamiltonian needs at least one term")
        terms = []
        for i, t in enumerate(self.terms):
            alpha, a, b = (t.alpha, t.a, t.b) if isinstance(t, HamiltonianTerm) else t
            a, b = bt.to_bits(a), bt.to_bits(b)
            if len(a) != self.n or len(b) != self.n:
                raise ValidationError(f"term {i}: strings must have length n={self.n}", i)
            if any(x & y for x, y in zip(a, b)):
                raise ValidationError(f"term {i}: X and Z supports overlap", i)
            alpha = float(alpha)
            if not math.isfinite(alpha) or abs(alpha) > 1:
                raise ValidationError(f"term {i}: |alpha| = {abs(alpha)} exceeds 1", i)
            terms.append(HamiltonianTerm(alpha, a, b))
        object.__setattr__(self, "terms", tuple(terms))

    @property
    def m(self) -> int:
        return len(self.terms)

    @property
    def abs_weight(self) -> float:
        """``(1/m) sum_l |alpha_l|``."""
        return math.fsum(abs(t.alpha) for t in self.terms) / self.m

    def dense(self) -> np.ndarray:
        if self.n > DENSE_LIMIT:
            raise ResourceLimitError(f"n={self.n} exceeds dense limit {DENSE_LIMIT}")
        d = 2**self.n
        out = np.zeros((d, d))
        for t in self.terms:
            out += t.alpha * pauli_dense(t.word).real
        return out / self.m

    def expectation(self, psi: np.ndarray) -> float:
        psi = _check_state(psi, self.n)
        return float(np.real(np.vdot(psi, self.dense() @ psi)))


def _check_state(psi: np.ndarray, n: int) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex).reshape(-1)
    if psi.size != 2**n:
        raise PreconditionError(f"state of length {psi.size} does not act on {n} qubits")
    return psi


def parse_hamiltonian(text: str) -> XZHamiltonian:
    """Parse lines ``<alpha> X:<bits> Z:<bits>``; ``#`` starts a comment."""
    terms, lines, n = [], [], None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        idx = len(terms)
        parts = line.split()
        if len(parts) != 3 or not parts[1].startswith("X:") or not parts[2].startswith("Z:"):
            raise ValidationError(f"line {lineno}: expected '<alpha> X:<bits> Z:<bits>'", idx)
        try:
            alpha = float(parts[0])
            a, b = bt.to_bits(parts[1][2:]), bt.to_bits(parts[2][2:])
        except ValueError as exc:
            raise ValidationError(f"line {lineno}: {exc}", idx) from None
        if len(a) != len(b) or (n is not None and len(a) != n):
            raise ValidationError(f"line {lineno}: inconsistent qubit count", idx)
        n = len(a)
        terms.append((alpha, a, b))
        lines.append(lineno)
    if not terms:
        raise ValidationError("no terms found")
    try:
        return XZHamiltonian(n, tuple(terms))
    except ValidationError as exc:
        raise ValidationError(f"line {lines[exc.index]}: {exc}", exc.index) from None


def serialize_hamiltonian(h: XZHamiltonian) -> str:
    return "".join(f"{t.alpha!r} X:{bt.to_str(t.a)} Z:{bt.to_str(t.b)}\n" for t in h.terms)


def load_hamiltonian(path) -> XZHamiltonian:
    with open(path) as fh:
        return parse_hamiltonian(fh.read())


def min_eigenvalue(h: XZHamiltonian) -> float:
    return float(np.linalg.eigvalsh(h.dense())[0])


def ground_state(h: XZHamiltonian) -> np.ndarray:
    """First eigenvector of an ascending Hermitian eigensolve, phase-fixed.

    The first amplitude with magnitude above ``PHASE_TOL`` is made real and
    positive, so degenerate ground spaces still give a reproducible vector.
    """
    _, vecs = np.linalg.eigh(h.dense())
    v = vecs[:, 0].astype(complex)
    k = int(np.argmax(np.abs(v) > PHASE_TOL))
    return v * (abs(v[k]) / v[k])


# ---------------------------------------------------------------------------
# the game


def _product(answers) -> object:
    """Elementwise product of tuple answers, or the product of scalar answers."""
    if isinstance(answers[0], tuple):
        return tuple(math.prod(col) for col in zip(*answers))
    return math.prod(answers)


def _basis_of(query) -> str:
    return "G" if isinstance(query, GQuery) else query.basis


def _g_marginal(n: int, acg: AnticommutationGame) -> Marginal:
    pairs = anticommuting_pairs(n)
    bob = player_marginal(acg.game, 1)
    return Marginal(merge_weights((pq / len(pairs), GQuery(1, q, a, b))
                                  for q, pq in bob.items() for a, b in pairs))


def _lift(code: CssCode, special: int, alice_query, bob_query, fresh, stabilizer) -> tuple:
    comp = complementary_for(code, bob_query, special, stabilizer, fresh)
    queries = list(comp.per_player_query)
    queries[special] = alice_query
    return tuple(queries), comp.combine


def lifted_braiding_entries(n: int, acg: AnticommutationGame, code: CssCode, weight: float = 1.0) -> list:
    """The Pauli braiding test between a uniform special player and the composite player."""
    fresh = {"X": uniform_w_marginal("X", n), "Z": uniform_w_marginal("Z", n), "G": _g_marginal(n, acg)}
    out = []
    for e in braiding_entries(n, acg):
        basis = _basis_of(e.bob)
        for j in range(code.r):
            stabs = stabilizers_through(code, j, basis)
            if not stabs:
                raise ValidationError(f"no {basis}-stabilizer contains player {j}")
            for s in stabs:
                queries, combine = _lift(code, j, e.alice, e.bob, fresh[basis], s)
                out.append(QuestionEntry(weight * e.weight / code.r / len(stabs), queries,
                                         ("braid", j, combine, e.context), "braiding"))
    return out


def energy_entries(h: XZHamiltonian, r: int, weight: float = 1.0) -> list:
    """Every player receives the XZ-query of a uniformly chosen term."""
    return [QuestionEntry(weight / h.m, (XZQuery(t.a, t.b),) * r, ("energy", t.alpha), "energy")
            for t in h.terms]


def energy_consistency_entries(h: XZHamiltonian, code: CssCode, weight: float = 1.0) -> list:
    """The three-branch energy consistency test.

    The shift string is ``a_l`` for ``W = X`` and ``b_l`` for ``W = Z`` in all
    three branches.
    """
    n, r = h.n, code.r
    strings = bt.all_strings(n)
    out = []
    for t in h.terms:
        for w in ("X", "Z"):
            s = t.a if w == "X" else t.b
            fresh = uniform_w_marginal(w, n)
            for j in range(r):
                stabs = stabilizers_through(code, j, w)
                base = weight / h.m / 2 / r / len(stabs)
                for stab in stabs:
                    for c in strings:
                        cs = bt.xor(c, s)
                        comp = WQuery.of(w, c, cs)
                        q, combine = _lift(code, j, XZQuery(t.a, t.b), comp, fresh, stab)
                        out.append(QuestionEntry(base / 2 / len(strings), q,
                                                 ("econs", j, combine, 1, w, c, cs), "energy_consistency"))
                        for d in strings:
                            for branch, target in ((2, c), (3, cs)):
                                q, combine = _lift(code, j, WQuery.of(w, target, d), comp, fresh, stab)
                                out.append(QuestionEntry(base / 4 / len(strings) ** 2, q,
                                                         ("econs", j, combine, branch, w, c, cs),
                                                         "energy_consistency"))
    return out


def _energy_accept(alpha: float, answers) -> float:
    sign = math.prod(x * z for x, z in answers)
    if alpha == 0 or sign != (1 if alpha > 0 else -1):
        return 1.0
    return 1.0 - abs(alpha)


def hamiltonian_predicate(acg: AnticommutationGame | None):
    braid = braiding_check(acg) if acg is not None else None

    def predicate(queries, answers, context) -> float:
        kind = context[0]
        if kind == "energy":
            return _energy_accept(context[1], answers)
        j, combine = context[1], context[2]
        comp_query = queries[combine[0]]
        comp = _product([answers[k] for k in combine])
        if kind == "braid":
            return braid(context[3], queries[j], comp_query, answers[j], comp)
        if kind == "econs":
            branch, w, c, cs = context[3:]
            if branch == 1:
                slot = answers[j][0 if w == "X" else 1]
                return 1.0 if slot == comp[0] * comp[1] else 0.0
            target = c if branch == 2 else cs
            return 1.0 if queries[j].answer_for(target, answers[j]) == comp_query.answer_for(target, comp) else 0.0
        raise ValueError(f"unknown context {context!r}")

    return predicate


def hamiltonian_game(h: XZHamiltonian, p: float, acg: AnticommutationGame, code: CssCode) -> NonlocalGame:
    """The r-player Hamiltonian self-test with test probabilities ``1-p``, ``p/2``, ``p/2``."""
    if not 0.0 < p < 1.0:
        raise PreconditionError("p must lie in (0, 1)")
    entries = (lifted_braiding_entries(h.n, acg, code, 1.0 - p)
               + energy_entries(h, code.r, p / 2)
               + energy_consistency_entries(h, code, p / 2))
    return NonlocalGame(code.r, tuple(entries), hamiltonian_predicate(acg),
                        f"hamiltonian(n={h.n},m={h.m},{acg.name},p={p})")


def energy_game(h: XZHamiltonian, code: CssCode) -> NonlocalGame:
    """The energy test on its own, played by the r code players."""
    return NonlocalGame(code.r, tuple(energy_entries(h, code.r)), hamiltonian_predicate(None),
                        f"energy(n={h.n},m={h.m})")


def encoded_strategy(psi: np.ndarray, n: int, code: CssCode, acg: AnticommutationGame | None) -> Strategy:
    """Each player holds one share of ``psi (x) |0>^(m-1)`` and plays honestly."""
    k = n + (acg.m - 1 if acg is not None else 0)
    psi = _check_state(psi, n)
    if k * code.r > ENCODED_QUBIT_LIMIT:
        raise ResourceLimitError(f"encoded strategy needs {k * code.r} qubits, above {ENCODED_QUBIT_LIMIT}")
    logical = np.zeros(2**k, dtype=complex)
    logical[:: 2 ** (k - n)] = psi
    state = encode(code, logical, limit=ENCODED_QUBIT_LIMIT)
    handler = honest_player_measurement(n, acg)
    return Strategy(state, (2**k,) * code.r, (handler,) * code.r)


def honest_hamiltonian_strategy(h: XZHamiltonian, code: CssCode, acg: AnticommutationGame) -> Strategy:
    """Honest players sharing the encoded ground state of ``h``."""
    return encoded_strategy(ground_state(h), h.n, code, acg)


# ---------------------------------------------------------------------------
# closed forms


def energy_test_value(h: XZHamiltonian, psi: np.ndarray) -> float:
    """Acceptance probability of the energy test on honest players sharing encoded ``psi``.

    ``P = (1/m) sum_l [1 - (|alpha_l| + alpha_l <P_l>) / 2]``.
    """
    psi = _check_state(psi, h.n)
    vals = []
    for t in h.terms:
        e = float(np.real(np.vdot(psi, pauli_dense(t.word) @ psi)))
        vals.append(1.0 - (abs(t.alpha) + t.alpha * e) / 2)
    return math.fsum(vals) / h.m


def energy_closed_forms(h: XZHamiltonian, psi: np.ndarray) -> dict:
    """Two closed-form expressions for the energy test, reported next to the exact procedure value.

    Neither equals ``energy_test_value`` in general; they are kept for comparison.

    ``outer``: ``1 - (1/(2m)) sum_l (|alpha_l| + alpha_l <P_l>)/2``.
    ``expanded``: ``1 - (<H>/4 + (1/(2m)) sum_l |alpha_l|)``.
    """
    psi = _check_state(psi, h.n)
    energy = h.expectation(psi)
    terms = [abs(t.alpha) + t.alpha * float(np.real(np.vdot(psi, pauli_dense(t.word) @ psi)))
             for t in h.terms]
    return {"procedure": energy_test_value(h, psi),
            "outer": 1.0 - math.fsum(terms) / 2 / (2 * h.m),
            "expanded": 1.0 - (energy / 4 + h.abs_weight / 2)}


def honest_value_closed_form(h: XZHamiltonian, p: float, braiding_value: float = 1.0) -> float:
    """Honest value ``(1-p) braiding + (p/2) energy + p/2`` on the ground state."""
    return (1 - p) * braiding_value + p / 2 * energy_test_value(h, ground_state(h)) + p / 2


def theorem_main_bounds(h: XZHamiltonian, p: float) -> tuple[float, float]:
    """``1 - (p/8)(lambda_min + 2 (1/m) sum |alpha|)``; the upper form omits its slack term."""
    if not 0.0 < p < 1.0:
        raise PreconditionError("p must lie in (0, 1)")
    value = 1.0 - p / 8 * (min_eigenvalue(h) + 2 * h.abs_weight)
    return value, value


# ---------------------------------------------------------------------------
# amplification


@dataclass(frozen=True)
class AmplifiedHamiltonian:
    """``H' = I - (I - (H - I/a))^(x a)`` described by its base and copy count."""

    base: XZHamiltonian
    copies: int
    exact_copies: float

    @property
    def shift(self) -> float:
        return 1.0 / self.copies

    def eigenvalue_map(self, lam):
        return 1.0 - (1.0 - (np.asarray(lam, dtype=float) - self.shift)) ** self.copies

    @property
    def lambda_min(self) -> float:
        return float(self.eigenvalue_map(min_eigenvalue(self.base)))

    def predicted_spectrum(self) -> np.ndarray:
        """``1 - prod_k (1 - lambda_{i_k} + 1/a)`` over all a-tuples of base eigenvalues, sorted."""
        factors = 1.0 - (np.linalg.eigvalsh(self.base.dense()) - self.shift)
        prod = reduce(np.multiply.outer, [factors] * self.copies).reshape(-1)
        return np.sort(1.0 - prod)

    def dense(self) -> np.ndarray:
        qubits = self.base.n * self.copies
        if qubits > AMPLIFY_DENSE_LIMIT:
            raise ResourceLimitError(f"H' acts on {qubits} qubits, above {AMPLIFY_DENSE_LIMIT}")
        d = 2**self.base.n
        inner = (1.0 + self.shift) * np.eye(d) - self.base.dense()
        return np.eye(d**self.copies) - reduce(np.kron, [inner] * self.copies)


def amplify(h: XZHamiltonian, p_poly: float, q_poly: float) -> AmplifiedHamiltonian:
    """Tensor ``a = (1/q - 1/p)^(-1)`` shifted copies, with ``a`` rounded to an integer >= 1."""
    if not p_poly > q_poly > 0:
        raise PreconditionError("amplify needs p > q > 0")
    exact = 1.0 / (1.0 / q_poly - 1.0 / p_poly)
    return AmplifiedHamiltonian(h, max(1, int(round(exact))), exact)


def qma_parameters(p_const: float, q_const: float) -> tuple[float, float]:
    """``p' = 1/(2(1+p-2q))`` and ``eta0 = (p-q)/(2(1+p-2q))``."""
    if not 0.0 < q_const < p_const < 1.0:
        raise PreconditionError("qma_parameters needs 0 < q < p < 1")
    denom = 2.0 * (1.0 + p_const - 2.0 * q_const)
    p_prime, eta0 = 1.0 / denom, (p_const - q_const) / denom
    for lhs, rhs in ((1 - p_prime + p_prime * p_const, 0.5 + 2 * eta0),
                     (1 - p_prime + p_prime * q_const, 0.5 + eta0)):
        if abs(lhs - rhs) > 1e-12:
            raise NumericInvariantError(f"parameter identity fails: {lhs!r} != {rhs!r}")
    return p_prime, eta0

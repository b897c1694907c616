"""The two-player Pauli braiding test, its honest strategy, residuals and exact-Pauli extraction.

Each player's register holds n data qubits followed by the m-1 ancilla
qubits of the anticommutation game; the honest shared state is
``|EPR>^(n+m-1)`` with player A's register first.
"""
from __future__ import annotations

import hashlib
import math
from dataclasses import asdict, dataclass
from typing import NamedTuple, Sequence

import numpy as np

from . import bits as bt
from .errors import PreconditionError, ResourceLimitError
from .games import (AnticommutationGame, NonlocalGame, OrientedEntry, Strategy, game_value_exact,
                    player_marginal, symmetrize)
from .linearity import ObservableFamily, blr_round, linearity_check, linearity_entries
from .pauli import PauliWord, conjugating_clifford, pauli_dense
from .queries import GQuery, WQuery, XZQuery
from .states import (Measurement, epr_state, joint_measurement, joint_observable,
                     reduced_from_vector, state_distance)

#: largest n for exact residuals
RESIDUAL_LIMIT = 4
#: largest n for exact-Pauli extraction
EXTRACTION_LIMIT = 2
#: tolerance of the exact braiding check on extracted families
BRAIDING_TOL = 1e-8


def anticommuting_pairs(n: int) -> list:
    strings = bt.all_strings(n)
    return [(a, b) for a in strings for b in strings if bt.dot(a, b) == 1]


def braiding_entries(n: int, acg: AnticommutationGame) -> list:
    """Alice-oriented questions of the braiding test; the three subtests weigh 1/3 each."""
    if n < 1:
        raise PreconditionError("braiding test needs n >= 1")
    out = []
    for w in ("X", "Z"):
        for e in linearity_entries(n, w):
            out.append(OrientedEntry(e.weight / 6, e.alice, e.bob, ("lin", e.context), "linearity"))
    pairs = anticommuting_pairs(n)
    wp = 1.0 / len(pairs)
    for a, b in pairs:
        for e in acg.game.entries:
            q0, q1 = e.queries
            out.append(OrientedEntry(e.weight * wp / 3, GQuery(0, q0, a, b), GQuery(1, q1, a, b),
                                     ("ac", q0, q1), "anticommutation"))
    bob_marginal = player_marginal(acg.game, 1)
    strings = bt.all_strings(n)
    for a, b in pairs:
        for w in ("X", "Z"):
            base = wp / 3 / 2 / 2
            qa = WQuery.of(w, a, b)
            for q, pq in bob_marginal.items():
                out.append(OrientedEntry(base * pq, qa, GQuery(1, q, a, b), ("cons_g", w, a, b, q),
                                         "consistency"))
            for c in strings:
                out.append(OrientedEntry(base / len(strings), qa, WQuery.of(w, a, c), ("cons_w", a),
                                         "consistency"))
    return out


def braiding_check(acg: AnticommutationGame):
    """Acceptance rule for Alice-oriented braiding questions."""

    def check(ctx, qa, qb, ans_a, ans_b) -> float:
        kind = ctx[0]
        if kind == "lin":
            return linearity_check(ctx[1], qa, qb, ans_a, ans_b)
        if kind == "ac":
            return acg.predicate(ctx[1], ctx[2], ans_a, ans_b)
        if kind == "cons_g":
            _, w, a, b, q = ctx
            if w == "X" and q == acg.q_x:
                return 1.0 if qa.answer_for(a, ans_a) == acg.f_x(ans_b) else 0.0
            if w == "Z" and q == acg.q_z:
                return 1.0 if qa.answer_for(b, ans_a) == acg.f_z(ans_b) else 0.0
            return 1.0
        if kind == "cons_w":
            a = ctx[1]
            return 1.0 if qa.answer_for(a, ans_a) * qb.answer_for(a, ans_b) == 1 else 0.0
        raise ValueError(f"unknown braiding context {ctx!r}")

    return check


def braiding_game(n: int, acg: AnticommutationGame) -> NonlocalGame:
    """The symmetrized two-player Pauli braiding test over n-bit strings."""
    return symmetrize(braiding_entries(n, acg), braiding_check(acg), f"braiding(n={n},{acg.name})")


def optimal_braiding_value(acg: AnticommutationGame) -> float:
    """Honest value ``2/3 + omega_G / 3``."""
    return 2.0 / 3.0 + acg.omega_g / 3.0


def honest_player_measurement(n: int, acg: AnticommutationGame | None):
    """Query handler of an honest player holding n data qubits and m-1 ancilla qubits.

    With ``acg=None`` the register has no ancilla and G-queries are refused.
    """
    anc = 2 ** (acg.m - 1) if acg is not None else 1
    eye_anc = np.eye(anc)

    def measure(query) -> Measurement:
        if isinstance(query, WQuery):
            word = PauliWord.x if query.basis == "X" else PauliWord.z
            obs = [np.kron(pauli_dense(word(s)), eye_anc) for s in query.pair]
            return joint_measurement(obs)
        if isinstance(query, GQuery) and acg is not None:
            w = np.kron(conjugating_clifford(query.a, query.b), eye_anc)
            inner = acg.honest_measurements[query.role](query.q)
            return inner.kron_identity(d_before=2 ** (n - 1)).conjugate(w)
        if isinstance(query, XZQuery):
            obs = [np.kron(pauli_dense(PauliWord.x(query.a)), eye_anc),
                   np.kron(pauli_dense(PauliWord.z(query.b)), eye_anc)]
            return joint_measurement(obs)
        raise PreconditionError(f"honest player cannot answer {query!r}")

    return measure


def honest_braiding_strategy(n: int, acg: AnticommutationGame) -> Strategy:
    """Both players share ``|EPR>^n (x) |EPR>^(m-1)`` and follow the honest query handler."""
    k = n + acg.m - 1
    if 2 * k > 24:
        raise ResourceLimitError(f"honest braiding strategy needs {2 * k} qubits")
    d = 2**k
    handler = honest_player_measurement(n, acg)
    return Strategy(epr_state(k), (d, d), (handler, handler))


# ---------------------------------------------------------------------------
# perturbations

def _seed_for(seed: int, label) -> int:
    digest = hashlib.sha256(f"{seed}|{label!r}".encode()).digest()
    return int.from_bytes(digest[:8], "little")


def random_state(dim: int, rng: np.random.Generator) -> np.ndarray:
    v = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return v / np.linalg.norm(v)


def random_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    z = (rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))) / math.sqrt(2)
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_projective(outcomes: Sequence, dim: int, rng: np.random.Generator) -> Measurement:
    """Projective measurement on a random basis with each basis vector given a random label."""
    u = random_unitary(dim, rng)
    owner = rng.integers(len(outcomes), size=dim)
    elems = []
    for i in range(len(outcomes)):
        cols = u[:, owner == i]
        elems.append(cols @ cols.conj().T)
    return Measurement(outcomes, elems, validate=False)


def perturbed_strategy(strategy: Strategy, epsilon: float, seed: int) -> Strategy:
    """Flag-mixing perturbation of a two-player strategy.

    Each register gains a flag qubit (last). The state becomes
    ``sqrt(1-eps)|psi>|00> + sqrt(eps)|junk>|11>`` on (data, flags), and on
    flag 1 both players apply the same seeded random projective measurement
    per query. Acceptance and every residual are affine in ``epsilon``.
    """
    if not 0.0 <= epsilon <= 1.0:
        raise PreconditionError("epsilon must lie in [0, 1]")
    if strategy.players != 2:
        raise PreconditionError("perturbation is defined for two-player strategies")
    da, db = strategy.dims
    junk = random_state(da * db, np.random.default_rng(_seed_for(seed, "junk"))).reshape(da, db)
    t = np.zeros((da, 2, db, 2), dtype=complex)
    t[:, 0, :, 0] = math.sqrt(1 - epsilon) * strategy.state.reshape(da, db)
    t[:, 1, :, 1] = math.sqrt(epsilon) * junk
    flag0 = np.diag([1.0, 0.0])
    flag1 = np.diag([0.0, 1.0])

    def wrap(player):
        dim = strategy.dims[player]

        def measure(query):
            good = strategy.measure(player, query)
            bad = random_projective(good.outcomes, dim, np.random.default_rng(_seed_for(seed, query)))
            elems = [np.kron(g, flag0) + np.kron(b, flag1) for g, b in zip(good.elements, bad.elements)]
            return Measurement(good.outcomes, elems, validate=False)

        return measure

    return Strategy(t.reshape(-1), (2 * da, 2 * db), (wrap(0), wrap(1)))


# ---------------------------------------------------------------------------
# residuals

def marginal_observable(strategy: Strategy, player: int, basis: str, s, n: int) -> np.ndarray:
    """``W(s) = 2^-n sum_t sum_answers (answer for s) M_{(s,t)}`` for W-queries."""
    s = tuple(s)
    acc = np.zeros((strategy.dims[player],) * 2, dtype=complex)
    strings = bt.all_strings(n)
    for t in strings:
        q = WQuery.of(basis, s, t)
        meas = strategy.measure(player, q)
        for lab, e in zip(meas.outcomes, meas.elements):
            acc += q.answer_for(s, lab) * e
    return acc / len(strings)


@dataclass
class ResidualReport:
    consistency_x: float
    consistency_z: float
    linearity_x: float
    linearity_z: float
    anticommutation: float
    commutation: float

    def as_dict(self) -> dict:
        return asdict(self)

    def max(self) -> float:
        return max(self.as_dict().values())


def residual_report(strategy: Strategy, n: int) -> ResidualReport:
    """Exact averages of the consistency, linearity and (anti)commutation residuals."""
    if n > RESIDUAL_LIMIT:
        raise ResourceLimitError(f"exact residuals limited to n <= {RESIDUAL_LIMIT}")
    strings = bt.all_strings(n)
    da, db = strategy.dims
    psi = strategy.state.reshape(da, db)
    rho_a = reduced_from_vector(strategy.state, [0], strategy.dims)
    obs = {}
    for basis in ("X", "Z"):
        for player in (0, 1):
            for s in strings:
                obs[basis, player, s] = marginal_observable(strategy, player, basis, s, n)

    cons = {}
    for basis in ("X", "Z"):
        vals = []
        for s in strings:
            # (W^A (x) I - I (x) W^B)|psi> as a matrix on A x B is W^A psi - psi (W^B)^T
            diff = obs[basis, 0, s] @ psi - psi @ obs[basis, 1, s].T
            vals.append(float(np.vdot(diff, diff).real) / 2)
        cons[basis] = math.fsum(vals) / len(vals)

    lin = {}
    for basis in ("X", "Z"):
        vals = []
        for a in strings:
            for b in strings:
                lhs = obs[basis, 0, a] @ obs[basis, 0, b]
                vals.append(state_distance(rho_a, lhs, obs[basis, 0, bt.xor(a, b)]) ** 2)
        lin[basis] = math.fsum(vals) / len(vals)

    anti, comm = [], []
    for a in strings:
        for b in strings:
            xz = obs["X", 0, a] @ obs["Z", 0, b]
            zx = obs["Z", 0, b] @ obs["X", 0, a]
            if bt.dot(a, b):
                anti.append(state_distance(rho_a, xz, -zx) ** 2)
            else:
                comm.append(state_distance(rho_a, xz, zx) ** 2)
    return ResidualReport(cons["X"], cons["Z"], lin["X"], lin["Z"],
                          math.fsum(anti) / len(anti) if anti else 0.0,
                          math.fsum(comm) / len(comm))


# ---------------------------------------------------------------------------
# EPR witness

class EPRWitness(NamedTuple):
    witness: float
    fidelity_bound: float
    fidelity_exact: float


def epr_witness(rho: np.ndarray, n: int) -> EPRWitness:
    """Witness ``2^-n sum_{P in {X,Z}^n} Tr((sigma_P (x) sigma_P) rho)`` and the exact EPR fidelity.

    ``fidelity_bound`` repeats the witness value, the bound suggested by the
    single-pair operator inequality. It is a valid lower bound for n = 1 but
    can exceed the true fidelity for n >= 2 (see the package tests).
    """
    rho = np.asarray(rho)
    if rho.ndim == 1:
        rho = np.outer(rho, rho.conj())
    if rho.shape != (4**n, 4**n):
        raise ValueError(f"state must act on 2n = {2 * n} qubits")
    d = 2**n
    t = rho.reshape(d, d, d, d)
    terms = []
    for p in bt.all_strings(n):
        word = pauli_dense(PauliWord(p, tuple(1 - x for x in p)))  # 1 -> X, 0 -> Z
        # Tr((S (x) S) rho) with rho indexed [iA, iB, jA, jB]
        terms.append(np.einsum("ki,lj,ijkl->", word, word, t).real)
    witness = math.fsum(terms) / d
    e = epr_state(n)
    fidelity = float(np.vdot(e, rho @ e).real)
    return EPRWitness(witness, witness, fidelity)


def data_register_state(strategy: Strategy, n: int) -> np.ndarray:
    """Reduced state of both players' first n qubits, ordered (A data, B data)."""
    ka = int(round(math.log2(strategy.dims[0])))
    kb = int(round(math.log2(strategy.dims[1])))
    keep = list(range(n)) + [ka + i for i in range(n)]
    return reduced_from_vector(strategy.state, keep, [2] * (ka + kb))


# ---------------------------------------------------------------------------
# exact-Pauli extraction

class ExtractionDiagnostics(NamedTuple):
    braiding_error: float
    consistency_x: float
    consistency_z: float
    rounding_distance: float


class Extraction(NamedTuple):
    paulis: dict
    state_factors: tuple
    diagnostics: ExtractionDiagnostics
    d_family: ObservableFamily


def extract_exact_paulis(strategy: Strategy, n: int) -> Extraction:
    """Build operators ``P(a,b) = D(a,b) (x) sigma_X(a) sigma_Z(b)`` satisfying the braiding law exactly.

    Registers are ordered [A, A', ancilla, A'']: A' and A'' hold ``|EPR>^n``,
    the ancilla comes from rounding the joint observables
    ``C(a,b)`` of ``X(a) (x) sigma_X(a)`` and ``Z(b) (x) sigma_Z(b)``.
    ``paulis[(a, b)]`` is returned as the pair ``(D(a,b), sigma_X(a)sigma_Z(b))``
    of Kronecker factors; ``state_factors`` is ``(rho_A, n)`` from which the
    extended state ``rho_A (x) EPR_{A'A''} (x) |0><0|`` is assembled.
    """
    if n > EXTRACTION_LIMIT:
        raise ResourceLimitError(f"extraction limited to n <= {EXTRACTION_LIMIT}")
    strings = bt.all_strings(n)
    d = 2**n
    rho_a = reduced_from_vector(strategy.state, [0], strategy.dims)
    da = rho_a.shape[0]
    x_obs = {a: marginal_observable(strategy, 0, "X", a, n) for a in strings}
    z_obs = {b: marginal_observable(strategy, 0, "Z", b, n) for b in strings}
    members = {}
    for a in strings:
        xp = np.kron(x_obs[a], pauli_dense(PauliWord.x(a)))
        for b in strings:
            zp = np.kron(z_obs[b], pauli_dense(PauliWord.z(b)))
            members[a + b] = joint_observable(None, xp, zp)
    fam = ObservableFamily(2 * n, members)
    rho_aa = np.kron(rho_a, np.eye(d) / d)
    rounding = blr_round(fam, rho_aa)
    dfam = rounding.family
    paulis = {(a, b): (dfam[a + b], pauli_dense(PauliWord(a, b))) for a in strings for b in strings}

    # exact braiding law, checked Kronecker block by block
    worst = 0.0
    for (a, b), (d1, s1) in paulis.items():
        for (a2, b2), (d2, s2) in paulis.items():
            sign = -1 if bt.dot(a2, b) else 1
            d3, s3 = paulis[bt.xor(a, a2), bt.xor(b, b2)]
            m12 = d1 @ d2
            s12 = s1 @ s2
            combos = {(float(x), float(sign * y)) for x, y in zip(s12.reshape(-1), s3.reshape(-1))}
            for x, y in combos:
                worst = max(worst, float(np.abs(x * m12 - y * d3).max()))

    # consistency with the players' marginal observables on rho_A (x) EPR (x) |0>
    dsys = dfam.dim  # A x A' x ancilla
    anc = dsys // (da * d)
    evals, evecs = np.linalg.eigh(rho_a)
    epr_mat = np.eye(d) / math.sqrt(d)  # A' x A'' amplitudes
    anc0 = np.zeros(anc)
    anc0[0] = 1.0
    columns = []
    for lam, v in zip(evals, evecs.T):
        if lam <= 1e-14:
            continue
        # amplitude tensor [A, A', anc, A''] as matrix (A x A' x anc, A'')
        t = np.einsum("i,jl,k->ijkl", v, epr_mat, anc0).reshape(dsys, d)
        columns.append((lam, t))

    def sq_dist(dop, sop, marg):
        # half of || (D (x) S - M (x) I_{A' anc A''}) R ||^2, using (D (x) S) vec(V) = vec(D V S^T)
        tot = []
        for lam, t in columns:
            diff = dop @ t @ sop.T
            mt = (marg @ t.reshape(da, -1)).reshape(dsys, d)
            diff = diff - mt
            tot.append(lam * float(np.vdot(diff, diff).real))
        return math.fsum(tot) / 2

    zero = bt.zeros(n)
    cx = math.fsum(sq_dist(*paulis[a, zero], x_obs[a]) for a in strings) / len(strings)
    cz = math.fsum(sq_dist(*paulis[zero, b], z_obs[b]) for b in strings) / len(strings)
    diag = ExtractionDiagnostics(worst, cx, cz, rounding.avg_sq_distance)
    return Extraction(paulis, (rho_a, n), diag, dfam)


# ---------------------------------------------------------------------------
# sweeps

SWEEP_COLUMNS = ("epsilon", "game_value", "consistency_x", "consistency_z", "linearity_x",
                 "linearity_z", "anticomm", "comm", "epr_fidelity", "epr_witness")
EXTRACTION_COLUMNS = ("pauli_consistency_x", "pauli_consistency_z", "braiding_error")


def sweep(n: int, acg: AnticommutationGame, epsilons: Sequence[float], seed: int,
          extract: bool = False) -> list:
    """One row per epsilon: braiding value, residuals and EPR statistics of the perturbed honest strategy."""
    if not epsilons:
        raise PreconditionError("epsilon grid is empty")
    honest = honest_braiding_strategy(n, acg)
    game = braiding_game(n, acg)
    rows = []
    for eps in epsilons:
        strat = perturbed_strategy(honest, float(eps), seed)
        res = residual_report(strat, n)
        wit = epr_witness(data_register_state(strat, n), n)
        row = {"epsilon": float(eps), "game_value": game_value_exact(game, strat),
               "consistency_x": res.consistency_x, "consistency_z": res.consistency_z,
               "linearity_x": res.linearity_x, "linearity_z": res.linearity_z,
               "anticomm": res.anticommutation, "comm": res.commutation,
               "epr_fidelity": wit.fidelity_exact, "epr_witness": wit.witness}
        if extract:
            ext = extract_exact_paulis(strat, n)
            row["pauli_consistency_x"] = ext.diagnostics.consistency_x
            row["pauli_consistency_z"] = ext.diagnostics.consistency_z
            row["braiding_error"] = ext.diagnostics.braiding_error
        rows.append(row)
    return rows

"""Nonlocal games, strategies, exact and sampled values, and the two anticommutation games.

A game is an explicit weighted list of question tuples. Each entry carries a
verifier-private ``context`` and a ``tag`` naming the subtest it belongs to.
The predicate is called as ``predicate(queries, answers, context)`` and returns
an acceptance probability, which lets probabilistic verifiers be integrated
exactly. Players whose query is a :class:`~pauli_braiding.queries.Marginal`
are ignored by the predicate (their answer slot is ``None``).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Callable, Hashable, NamedTuple, Sequence

import numpy as np

from .errors import DimensionError, PreconditionError, ResourceLimitError, ValidationError
from .pauli import PauliWord, pauli_dense
from .queries import Marginal
from .states import Measurement, epr_state, joint_measurement

#: maximum number of question entries for exact enumeration
ENUMERATION_LIMIT = 2**20
#: maximum number of amplitudes in a shared state
STATE_LIMIT = 2**24
#: joint outcomes below this probability are not passed to the predicate
PROB_FLOOR = 1e-16


class QuestionEntry(NamedTuple):
    weight: float
    queries: tuple
    context: Any = None
    tag: str = ""


@dataclass(frozen=True)
class NonlocalGame:
    players: int
    entries: tuple
    predicate: Callable
    name: str = "game"

    def __post_init__(self):
        total = math.fsum(e.weight for e in self.entries)
        if any(e.weight < 0 for e in self.entries):
            raise ValidationError("question weights must be nonnegative")
        if abs(total - 1) > 1e-12:
            raise ValidationError(f"question weights sum to {total!r}, not 1")
        for e in self.entries:
            if len(e.queries) != self.players:
                raise DimensionError("question tuple length differs from player count")

    @property
    def tags(self) -> list:
        seen = []
        for e in self.entries:
            if e.tag not in seen:
                seen.append(e.tag)
        return seen


class Strategy:
    """Shared pure state over the players' registers plus per-player measurement maps.

    ``dims[i]`` is the dimension of player i's register; registers appear in
    player order in ``state``. ``measurements[i]`` maps a query to a projective
    :class:`Measurement` on that register. Results are cached per query.
    """

    def __init__(self, state: np.ndarray, dims: Sequence[int], measurements: Sequence[Callable]):
        state = np.asarray(state, dtype=complex).reshape(-1)
        dims = tuple(int(d) for d in dims)
        if int(np.prod(dims)) != state.size:
            raise DimensionError(f"register dims {dims} do not match state size {state.size}")
        if state.size > STATE_LIMIT:
            raise ResourceLimitError(f"shared state of size {state.size} exceeds {STATE_LIMIT}")
        if len(measurements) != len(dims):
            raise DimensionError("need one measurement map per player")
        if abs(np.linalg.norm(state) - 1) > 1e-10:
            raise ValidationError("shared state is not normalized")
        self.state = state
        self.dims = dims
        self.measurements = tuple(measurements)
        self._cache: list[dict] = [dict() for _ in dims]

    @property
    def players(self) -> int:
        return len(self.dims)

    def measure(self, player: int, query) -> Measurement:
        cache = self._cache[player]
        m = cache.get(query)
        if m is None:
            m = self.measurements[player](query)
            if m.dim != self.dims[player]:
                raise DimensionError(f"player {player} measurement has dim {m.dim}, register {self.dims[player]}")
            if m.kind != "projective":
                raise PreconditionError("strategy measurements must be projective")
            cache[query] = m
        return m

    def swapped(self) -> "Strategy":
        """The two-player strategy with players and registers exchanged."""
        if self.players != 2:
            raise PreconditionError("swapped() needs a two-player strategy")
        t = self.state.reshape(self.dims).T.reshape(-1)
        return Strategy(t, self.dims[::-1], self.measurements[::-1])


def joint_distribution(strategy: Strategy, queries: Sequence) -> tuple[list, np.ndarray]:
    """Exact joint outcome distribution of the players with a real (non-marginal) query.

    Returns the relevant player indices and an array indexed by their outcome
    positions. Marginal players are summed out, which is exact because their
    measurement elements sum to identity.
    """
    relevant = [i for i, q in enumerate(queries) if q is not None and not isinstance(q, Marginal)]
    t = strategy.state.reshape(strategy.dims)
    groups = []
    for i in relevant:
        v, g = strategy.measure(i, queries[i]).eigenbasis()
        t = np.moveaxis(np.tensordot(v.conj().T, t, axes=([1], [i])), 0, i)
        groups.append(g)
    p = np.abs(t) ** 2
    others = tuple(i for i in range(strategy.players) if i not in relevant)
    if others:
        p = p.sum(axis=others)
    for axis, g in enumerate(groups):
        p = np.moveaxis(np.tensordot(p, g, axes=([axis], [0])), -1, axis)
    return relevant, p


def _entry_value(game: NonlocalGame, strategy: Strategy, entry: QuestionEntry, memo: dict) -> float:
    key = tuple((i, q) for i, q in enumerate(entry.queries) if q is not None and not isinstance(q, Marginal))
    hit = memo.get(key)
    if hit is None:
        relevant, p = joint_distribution(strategy, entry.queries)
        outcomes = [strategy.measure(i, entry.queries[i]).outcomes for i in relevant]
        idx = np.argwhere(p > PROB_FLOOR)
        hit = (relevant, outcomes, idx, p[tuple(idx.T)] if idx.size else np.zeros(0))
        memo[key] = hit
    relevant, outcomes, idx, probs = hit
    terms = []
    answers = [None] * game.players
    for row, prob in zip(idx, probs):
        for slot, (i, k) in enumerate(zip(relevant, row)):
            answers[i] = outcomes[slot][k]
        acc = game.predicate(entry.queries, tuple(answers), entry.context)
        if acc:
            terms.append(prob * acc)
    return math.fsum(terms)


def entry_values(game: NonlocalGame, strategy: Strategy) -> list:
    """Conditional acceptance probability of every question entry."""
    if len(game.entries) > ENUMERATION_LIMIT:
        raise ResourceLimitError(f"{len(game.entries)} question entries exceeds {ENUMERATION_LIMIT}")
    if strategy.players != game.players:
        raise DimensionError("strategy and game have different player counts")
    memo: dict = {}
    return [_entry_value(game, strategy, e, memo) for e in game.entries]


def game_value_exact(game: NonlocalGame, strategy: Strategy) -> float:
    """Acceptance probability of ``strategy`` by exact enumeration of questions and outcomes."""
    vals = entry_values(game, strategy)
    return math.fsum(e.weight * v for e, v in zip(game.entries, vals))


def subtest_values(game: NonlocalGame, strategy: Strategy) -> dict:
    """Conditional acceptance probability of each subtest, keyed by tag."""
    vals = entry_values(game, strategy)
    out = {}
    for tag in game.tags:
        w = [e.weight for e in game.entries if e.tag == tag]
        wv = [e.weight * v for e, v in zip(game.entries, vals) if e.tag == tag]
        out[tag] = math.fsum(wv) / math.fsum(w)
    return out


def game_value_sampled(game: NonlocalGame, strategy: Strategy, samples: int, seed) -> tuple[float, float]:
    """Monte Carlo estimate over question tuples, returning ``(estimate, standard error)``.

    Question tuples are drawn by weight; for each one the exact conditional
    acceptance probability is used, so the estimate is unbiased.
    """
    if samples < 1:
        raise PreconditionError("samples must be >= 1")
    rng = np.random.default_rng(seed)
    weights = np.array([e.weight for e in game.entries])
    picks = rng.choice(len(weights), size=samples, p=weights / weights.sum())
    memo: dict = {}
    cache: dict = {}
    vals = np.empty(samples)
    for s, k in enumerate(picks):
        if k not in cache:
            cache[k] = _entry_value(game, strategy, game.entries[k], memo)
        vals[s] = cache[k]
    est = float(np.mean(vals))
    err = float(np.std(vals, ddof=1) / math.sqrt(samples)) if samples > 1 else float("nan")
    return est, err


def player_marginal(game: NonlocalGame, player: int) -> dict:
    """Distribution of the query that ``player`` receives, expanding marginal placeholders."""
    acc: dict = {}
    for e in game.entries:
        q = e.queries[player]
        if isinstance(q, Marginal):
            for w, sub in q.support:
                acc[sub] = acc.get(sub, 0.0) + e.weight * w
        else:
            acc[q] = acc.get(q, 0.0) + e.weight
    return acc


def game_summary(game: NonlocalGame, strategy: Strategy) -> dict:
    """JSON-ready summary: question count, value and per-subtest conditional values."""
    sub = subtest_values(game, strategy)
    value = math.fsum(
        math.fsum(e.weight for e in game.entries if e.tag == t) * v for t, v in sub.items())
    return {"game": game.name, "players": game.players, "questions": len(game.entries),
            "value": value, "subtests": sub}


# ---------------------------------------------------------------------------
# anticommutation games

@dataclass(frozen=True)
class AnticommutationGame:
    """A two-player game together with its special second-player questions.

    ``honest_measurements[role](q)`` gives the honest projective measurement
    on an ``m``-qubit register; the honest shared state is ``|EPR>^m``.
    ``second_player_words[q]`` is the signed Pauli word whose eigenvalue the
    honest second player reports on question q.
    """

    name: str
    game: NonlocalGame
    q_x: Hashable
    q_z: Hashable
    f_x: Callable
    f_z: Callable
    omega_g: float
    m: int
    honest_measurements: tuple
    second_player_words: dict = field(default_factory=dict)

    def questions(self, role: int) -> list:
        seen = []
        for e in self.game.entries:
            if e.queries[role] not in seen:
                seen.append(e.queries[role])
        return seen

    def honest_strategy(self) -> Strategy:
        d = 2**self.m
        return Strategy(epr_state(self.m), (d, d), self.honest_measurements)

    def predicate(self, q0, q1, a0, a1) -> float:
        return self.game.predicate((q0, q1), (a0, a1), None)


def _chsh_predicate(queries, answers, context):
    s, t = queries
    a, b = answers
    return 1.0 if a * b == (-1 if (s and t) else 1) else 0.0


def chsh_game() -> tuple[AnticommutationGame, Strategy]:
    """CHSH with the rotation placed on the first player.

    The second player measures ``sigma_Z`` on question 0 and ``sigma_X`` on
    question 1, the first player measures ``(Z + X)/sqrt(2)`` and
    ``(Z - X)/sqrt(2)``; this is an optimal strategy on one EPR pair.
    """
    entries = tuple(QuestionEntry(0.25, (s, t), None, "chsh") for s in (0, 1) for t in (0, 1))
    game = NonlocalGame(2, entries, _chsh_predicate, "chsh")
    x = pauli_dense(PauliWord.x((1,)))
    z = pauli_dense(PauliWord.z((1,)))
    first = {0: (z + x) / math.sqrt(2), 1: (z - x) / math.sqrt(2)}
    words = {0: PauliWord.z((1,)), 1: PauliWord.x((1,))}

    def meas_first(q):
        return _binary(first[q])

    def meas_second(q):
        return _binary(pauli_dense(words[q]))

    acg = AnticommutationGame("chsh", game, q_x=1, q_z=0, f_x=_identity, f_z=_identity,
                              omega_g=math.cos(math.pi / 8) ** 2, m=1,
                              honest_measurements=(meas_first, meas_second),
                              second_player_words=words)
    return acg, acg.honest_strategy()


def _identity(a):
    return a


def _binary(obs: np.ndarray) -> Measurement:
    eye = np.eye(obs.shape[0])
    return Measurement((1, -1), [(eye + obs) / 2, (eye - obs) / 2], validate=False)


#: honest observable grid; row-major cells (i, j)
MAGIC_SQUARE_GRID = (
    ("+X:10;Z:00", "+X:01;Z:00", "+X:11;Z:00"),
    ("+X:00;Z:01", "+X:00;Z:10", "+X:00;Z:11"),
    ("+X:10;Z:01", "+X:01;Z:10", "-X:11;Z:11"),
)
MAGIC_SQUARE_LINES = ("r0", "r1", "r2", "c0", "c1", "c2")


def line_cells(line: str) -> list:
    k = int(line[1])
    return [(k, j) for j in range(3)] if line[0] == "r" else [(i, k) for i in range(3)]


def _magic_predicate(queries, answers, context):
    line, cell = queries
    triple, b = answers
    parity = -1 if line == "c2" else 1
    if triple[0] * triple[1] * triple[2] != parity:
        return 0.0
    return 1.0 if triple[line_cells(line).index(cell)] == b else 0.0


def magic_square_game() -> tuple[AnticommutationGame, Strategy]:
    """Mermin-Peres magic square on two EPR pairs.

    The first player receives a row or column and answers three signs (rows
    multiply to +1, columns to +1 except the last, which multiplies to -1);
    the second player receives one cell of that line and answers one sign.
    """
    entries = tuple(QuestionEntry(1 / 18, (line, cell), None, "magic_square")
                    for line in MAGIC_SQUARE_LINES for cell in line_cells(line))
    game = NonlocalGame(2, entries, _magic_predicate, "magic_square")
    words = {(i, j): PauliWord.parse(MAGIC_SQUARE_GRID[i][j]) for i in range(3) for j in range(3)}

    def meas_first(line):
        return joint_measurement([pauli_dense(words[c]) for c in line_cells(line)])

    def meas_second(cell):
        return _binary(pauli_dense(words[cell]))

    acg = AnticommutationGame("magic_square", game, q_x=(0, 0), q_z=(1, 1), f_x=_identity,
                              f_z=_identity, omega_g=1.0, m=2,
                              honest_measurements=(meas_first, meas_second),
                              second_player_words=words)
    return acg, acg.honest_strategy()


def ac_game_by_name(name: str) -> tuple[AnticommutationGame, Strategy]:
    key = name.replace("-", "_")
    if key == "chsh":
        return chsh_game()
    if key == "magic_square":
        return magic_square_game()
    raise ValidationError(f"unknown anticommutation game {name!r}")


@dataclass
class ACReport:
    checks: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(ok for ok, _ in self.checks.values())

    def __bool__(self):
        return self.passed


def verify_ac_completeness(acg: AnticommutationGame, honest: Strategy, tol: float = 1e-9) -> ACReport:
    """Check the honest-strategy conditions of an anticommutation game.

    Reported checks: the value reaches ``omega_g``; the two marginal
    observable equations ``sum_a f(a) A^a = sigma_W (x) I`` (operator-norm
    residual); every second-player projector is an eigenprojector of its
    signed Pauli word.
    """
    report = ACReport()
    value = game_value_exact(acg.game, honest)
    report.checks["value"] = (value >= acg.omega_g - tol, acg.omega_g - value)
    rest = np.eye(2 ** (acg.m - 1))
    for label, q, f, single in (("marginal_x", acg.q_x, acg.f_x, "+X:1;Z:0"),
                                 ("marginal_z", acg.q_z, acg.f_z, "+X:0;Z:1")):
        meas = honest.measure(1, q)
        obs = sum(f(a) * e for a, e in zip(meas.outcomes, meas.elements))
        target = np.kron(pauli_dense(PauliWord.parse(single)), rest)
        resid = float(np.linalg.norm(obs - target, 2))
        report.checks[label] = (resid <= tol, resid)
    worst = 0.0
    for q in acg.questions(1):
        word = acg.second_player_words.get(q)
        meas = honest.measure(1, q)
        if word is None:
            worst = math.inf
            continue
        p = pauli_dense(word)
        eye = np.eye(p.shape[0])
        for a, e in zip(meas.outcomes, meas.elements):
            worst = max(worst, float(np.abs(e - (eye + a * p) / 2).max()))
    report.checks["eigenspaces"] = (worst <= tol, worst)
    return report


def deterministic_strategy(answer_fns: Sequence[Callable], outcome_fns: Sequence[Callable]) -> Strategy:
    """Classical strategy on one-dimensional registers.

    ``answer_fns[i](q)`` is player i's answer to query q and
    ``outcome_fns[i](q)`` lists that query's full answer alphabet.
    """
    def make(answer, alphabet):
        def measure(q):
            labels = list(alphabet(q))
            chosen = answer(q)
            elems = [np.array([[1.0 if lab == chosen else 0.0]]) for lab in labels]
            return Measurement(labels, elems)
        return measure

    k = len(answer_fns)
    return Strategy(np.ones(1), (1,) * k, [make(f, o) for f, o in zip(answer_fns, outcome_fns)])


class OrientedEntry(NamedTuple):
    """A two-player question with named roles: ``alice`` is the player sent the full query."""

    weight: float
    alice: Hashable
    bob: Hashable
    context: Any
    tag: str


def symmetrize(oriented: Sequence[OrientedEntry], check: Callable, name: str) -> NonlocalGame:
    """Two-player game that labels a uniformly random player as Alice.

    ``check(context, q_alice, q_bob, ans_alice, ans_bob)`` returns the
    acceptance probability. Entries with identical queries and context are
    merged.
    """
    merged: dict = {}
    for e in oriented:
        for alice in (0, 1):
            queries = (e.alice, e.bob) if alice == 0 else (e.bob, e.alice)
            key = (queries, (alice, e.context), e.tag)
            merged[key] = merged.get(key, 0.0) + e.weight / 2
    entries = tuple(QuestionEntry(w, q, c, t) for (q, c, t), w in merged.items())

    def predicate(queries, answers, context):
        alice, ctx = context
        bob = 1 - alice
        return check(ctx, queries[alice], queries[bob], answers[alice], answers[bob])

    return NonlocalGame(2, entries, predicate, name)

"""The two-player linearity test and exact-linearity rounding of observable families."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import bits as bt
from .errors import DimensionError, PreconditionError, ResourceLimitError
from .games import NonlocalGame, OrientedEntry, Strategy, symmetrize
from .queries import WQuery
from .states import (CONSTRUCT_TOL, Measurement, as_density, naimark_dilate,
                     reduced_from_vector, state_distance)

#: largest n for which the 4^n-term defect is enumerated exactly
EXACT_DEFECT_LIMIT = 6
#: largest n for BLR rounding (the dilation multiplies the dimension by 2^n)
ROUNDING_LIMIT = 4


@dataclass(frozen=True)
class ObservableFamily:
    """Observables ``A(a)`` indexed by every n-bit string ``a``."""

    n: int
    members: dict

    def __post_init__(self):
        keys = set(self.members)
        if keys != set(bt.all_strings(self.n)):
            raise DimensionError(f"family must have one member per {self.n}-bit string")
        dims = {m.shape for m in self.members.values()}
        if len(dims) != 1:
            raise DimensionError("family members differ in dimension")

    def __getitem__(self, a):
        return self.members[tuple(a)]

    @property
    def dim(self) -> int:
        return next(iter(self.members.values())).shape[0]

    def check_observables(self, tol: float = CONSTRUCT_TOL) -> bool:
        eye = np.eye(self.dim)
        return all(np.allclose(m, m.conj().T, atol=tol) and np.allclose(m @ m, eye, atol=tol)
                   for m in self.members.values())


def linearity_entries(n: int, basis=None, tag: str = "linearity") -> list:
    """Alice-oriented questions of the linearity test.

    Alice gets (a, b) uniform. Bob gets (c, c') where c is a, b or a+b with
    probability 1/3 each and c' is uniform; c' is never checked.
    """
    if n < 1:
        raise PreconditionError("linearity test needs n >= 1")
    strings = bt.all_strings(n)
    w = 1.0 / (len(strings) ** 3 * 3)
    out = []
    for a in strings:
        for b in strings:
            qa = WQuery.of(basis, a, b)
            for kind, c in (("cons", a), ("cons", b), ("lin", bt.xor(a, b))):
                ctx = ("cons", c) if kind == "cons" else ("lin", a, b, c)
                for c2 in strings:
                    out.append(OrientedEntry(w, qa, WQuery.of(basis, c, c2), ctx, tag))
    return out


def linearity_check(ctx, qa: WQuery, qb: WQuery, ans_a, ans_b) -> float:
    if ctx[0] == "cons":
        c = ctx[1]
        return 1.0 if qa.answer_for(c, ans_a) == qb.answer_for(c, ans_b) else 0.0
    _, a, b, c = ctx
    prod = qa.answer_for(a, ans_a) * qa.answer_for(b, ans_a)
    return 1.0 if prod == qb.answer_for(c, ans_b) else 0.0


def linearity_game(n: int, basis=None) -> NonlocalGame:
    """The symmetrized two-player linearity test on n-bit strings."""
    strings = bt.all_strings(n)
    if len(strings) ** 3 * 6 > 2**20:
        raise ResourceLimitError(f"linearity test with n={n} is too large to enumerate")
    return symmetrize(linearity_entries(n, basis), linearity_check, f"linearity(n={n})")


def _triple(fam: ObservableFamily, rho: np.ndarray, a, b) -> float:
    prod = fam[a] @ fam[b] @ fam[bt.xor(a, b)]
    return float(np.einsum("ij,ji->", prod, rho).real)


def linearity_defect(fam: ObservableFamily, rho: np.ndarray) -> float:
    """``1 - E_{a,b} Re Tr(rho A(a) A(b) A(a+b))`` by exact enumeration."""
    if fam.n > EXACT_DEFECT_LIMIT:
        raise ResourceLimitError(f"exact defect limited to n <= {EXACT_DEFECT_LIMIT}; use the sampled form")
    rho = as_density(rho)
    if rho.shape[0] != fam.dim:
        raise DimensionError("state and family dimensions differ")
    strings = bt.all_strings(fam.n)
    terms = [_triple(fam, rho, a, b) for a in strings for b in strings]
    return 1.0 - math.fsum(terms) / len(terms)


def linearity_defect_sampled(fam: ObservableFamily, rho: np.ndarray, samples: int, seed) -> tuple[float, float]:
    """Monte Carlo defect over uniformly sampled pairs ``(a, b)``; returns ``(estimate, stderr)``."""
    rho = as_density(rho)
    rng = np.random.default_rng(seed)
    draws = rng.integers(0, 2, size=(samples, 2, fam.n))
    vals = np.array([_triple(fam, rho, tuple(d[0]), tuple(d[1])) for d in draws])
    err = float(vals.std(ddof=1) / math.sqrt(samples)) if samples > 1 else float("nan")
    return 1.0 - float(vals.mean()), err


def fourier_operators(fam: ObservableFamily) -> dict:
    """``A_hat(u) = E_a (-1)^{a.u} A(a)`` for every u."""
    strings = bt.all_strings(fam.n)
    scale = 1.0 / len(strings)
    return {u: scale * sum((-1) ** bt.dot(a, u) * fam[a] for a in strings) for u in strings}


class BLRRounding(NamedTuple):
    family: ObservableFamily
    state: np.ndarray
    avg_sq_distance: float
    povm: Measurement


def blr_round(fam: ObservableFamily, rho: np.ndarray) -> BLRRounding:
    """Round an approximately linear family to an exactly linear one on a dilated space.

    The squared Fourier operators form a POVM; its projective dilation
    ``{C^u}`` defines ``A'(a) = sum_u (-1)^{u.a} C^u`` on
    ``rho' = rho (x) |0><0|``. The returned distance is
    ``E_a D_{rho'}(A'(a), A(a) (x) I)^2``.
    """
    if fam.n > ROUNDING_LIMIT:
        raise ResourceLimitError(f"rounding limited to n <= {ROUNDING_LIMIT}")
    rho = as_density(rho)
    if rho.shape[0] != fam.dim:
        raise DimensionError("state and family dimensions differ")
    hats = fourier_operators(fam)
    strings = bt.all_strings(fam.n)
    povm = Measurement(strings, [h @ h for h in (hats[u] for u in strings)], "povm", validate=False)
    dil = naimark_dilate(povm, rho)
    da = dil.state.shape[0] // fam.dim
    members = {}
    for a in strings:
        members[a] = sum((-1) ** bt.dot(u, a) * c for u, c in zip(strings, dil.measurement.elements))
    exact = ObservableFamily(fam.n, members)
    eye_a = np.eye(da)
    dists = [state_distance(dil.state, members[a], np.kron(fam[a], eye_a)) ** 2 for a in strings]
    return BLRRounding(exact, dil.state, math.fsum(dists) / len(dists), povm)


class MarginalizedFamily(NamedTuple):
    family: ObservableFamily
    state: np.ndarray
    triple_product: float


def marginalize_strategy(strategy: Strategy, n: int, basis=None, player: int = 0) -> MarginalizedFamily:
    """Observable family obtained from one player's pair measurements.

    For each a, ``M_a^s = E_b sum M_{(a,b)}`` over answers whose sign for a
    is s; this two-outcome POVM is dilated with a one-qubit ancilla and
    ``A(a) = P_a^{+1} - P_a^{-1}``. Also reports
    ``E_{a,b} Re Tr_{rho'}(A(a) A(b) A(a+b))``.
    """
    strings = bt.all_strings(n)
    rho = reduced_from_vector(strategy.state, [player], strategy.dims)
    members = {}
    state = None
    for a in strings:
        plus = np.zeros((strategy.dims[player],) * 2, dtype=complex)
        for b in strings:
            q = WQuery.of(basis, a, b)
            meas = strategy.measure(player, q)
            for lab, e in zip(meas.outcomes, meas.elements):
                if q.answer_for(a, lab) == 1:
                    plus += e
        plus /= len(strings)
        eye = np.eye(plus.shape[0])
        pov = Measurement((1, -1), [plus, eye - plus], "povm")
        dil = naimark_dilate(pov, rho)
        members[a] = dil.measurement[1] - dil.measurement[-1]
        state = dil.state
    fam = ObservableFamily(n, members)
    return MarginalizedFamily(fam, state, 1.0 - linearity_defect(fam, state))

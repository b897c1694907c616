import itertools

import numpy as np
import pytest

from conftest import random_density, random_observable
from oracles import near_linear_family, z_word
from pauli_braiding import bits as bt
from pauli_braiding.errors import DimensionError, ResourceLimitError
from pauli_braiding.games import deterministic_strategy, game_value_exact
from pauli_braiding.linearity import (ObservableFamily, blr_round, fourier_operators, linearity_defect,
                                      linearity_defect_sampled, linearity_entries, linearity_game,
                                      marginalize_strategy)


def classical_strategy(f):
    """Both players answer every pair query with f applied to each string."""
    answer = lambda q: tuple(f(s) for s in q.pair)
    alphabet = lambda q: list(itertools.product((1, -1), repeat=2))
    return deterministic_strategy([answer, answer], [alphabet, alphabet])


def linear_fraction(f, n):
    """Oracle: probability over uniform (a, b) that f(a) f(b) = f(a + b)."""
    strings = list(itertools.product((0, 1), repeat=n))
    hits = sum(f(a) * f(b) == f(tuple(x ^ y for x, y in zip(a, b))) for a in strings for b in strings)
    return hits / len(strings) ** 2


def z_family(n):
    return ObservableFamily(n, {a: z_word(a) for a in bt.all_strings(n)})


def random_family(n, dim, rng):
    return ObservableFamily(n, {a: random_observable(dim, rng) for a in bt.all_strings(n)})


class TestGame:
    @pytest.mark.parametrize("n", [1, 2])
    def test_entry_count(self, n):
        assert len(linearity_entries(n)) == 4**n * 3 * 2**n

    @pytest.mark.parametrize("n", [1, 2, 3])
    def test_linear_strategies_win(self, n):
        game = linearity_game(n)
        for u in bt.all_strings(n):
            f = lambda s, u=u: (-1) ** bt.dot(s, u)
            assert game_value_exact(game, classical_strategy(f)) == pytest.approx(1, abs=1e-12)

    def test_nonlinear_strategy_value(self):
        n = 2
        f = lambda s: -1 if s == (1, 1) else 1
        v = game_value_exact(linearity_game(n), classical_strategy(f))
        assert v == pytest.approx(2 / 3 + linear_fraction(f, n) / 3, abs=1e-12)
        assert v < 1

    def test_too_large(self):
        with pytest.raises(ResourceLimitError):
            linearity_game(6)


class TestDefect:
    @pytest.mark.parametrize("n", [1, 2, 3])
    def test_pauli_family_is_linear(self, n, rng):
        rho = random_density(2**n, rng)
        assert linearity_defect(z_family(n), rho) == pytest.approx(0, abs=1e-12)

    def test_scalar_family_matches_oracle(self):
        n = 3
        f = lambda s: -1 if sum(s) == 2 else 1
        fam = ObservableFamily(n, {a: np.array([[float(f(a))]]) for a in bt.all_strings(n)})
        expected = 1 - (2 * linear_fraction(f, n) - 1)
        assert linearity_defect(fam, np.ones((1, 1))) == pytest.approx(expected, abs=1e-12)

    def test_sampled_within_four_sigma(self, rng):
        fam = random_family(2, 3, rng)
        rho = random_density(3, rng)
        exact = linearity_defect(fam, rho)
        est, err = linearity_defect_sampled(fam, rho, 20_000, seed=5)
        assert abs(est - exact) <= 4 * err

    def test_dimension_mismatch(self, rng):
        with pytest.raises(DimensionError):
            linearity_defect(z_family(1), random_density(3, rng))

    def test_family_needs_every_string(self):
        with pytest.raises(DimensionError):
            ObservableFamily(2, {(0, 0): np.eye(2)})


class TestFourier:
    @pytest.mark.parametrize("n,dim", [(1, 2), (2, 3), (3, 2)])
    def test_parseval(self, n, dim, rng):
        hats = fourier_operators(random_family(n, dim, rng))
        total = sum(h @ h for h in hats.values())
        assert np.allclose(total, np.eye(dim), atol=1e-12)

    def test_linear_family_concentrates(self):
        hats = fourier_operators(z_family(2))
        # each squared coefficient is the projector onto the matching Z eigenspace
        projs = [np.real(np.diag(hats[u] @ hats[u])) for u in bt.all_strings(2)]
        assert np.allclose(sum(projs), np.ones(4))
        assert all(np.allclose(p, p**2) for p in projs)


class TestRounding:
    def test_exact_family_has_zero_distance(self, rng):
        res = blr_round(z_family(2), random_density(4, rng))
        assert res.avg_sq_distance == pytest.approx(0, abs=1e-10)

    @pytest.mark.parametrize("eps", [0.05, 0.2, 0.5])
    def test_distance_bounded_by_defect(self, eps, rng):
        fam = near_linear_family(2, eps, rng)
        rho = random_density(4, rng)
        delta = linearity_defect(fam, rho)
        res = blr_round(fam, rho)
        assert res.avg_sq_distance <= delta + 1e-8

    def test_random_family_bound(self, rng):
        fam = random_family(2, 2, rng)
        rho = random_density(2, rng)
        res = blr_round(fam, rho)
        assert res.avg_sq_distance <= linearity_defect(fam, rho) + 1e-8

    def test_rounded_family_is_exactly_linear(self, rng):
        fam = near_linear_family(2, 0.3, rng)
        res = blr_round(fam, random_density(4, rng))
        assert res.family.check_observables()
        strings = bt.all_strings(2)
        for a in strings:
            for b in strings:
                assert np.allclose(res.family[a] @ res.family[b], res.family[bt.xor(a, b)], atol=1e-9)

    def test_povm_is_complete(self, rng):
        res = blr_round(random_family(2, 3, rng), random_density(3, rng))
        assert np.allclose(sum(res.povm.elements), np.eye(3), atol=1e-12)

    def test_limit(self, rng):
        with pytest.raises(ResourceLimitError):
            blr_round(random_family(5, 1, rng), np.ones((1, 1)))


class TestMarginalize:
    def test_linear_classical_strategy(self):
        u = (1, 0)
        strat = classical_strategy(lambda s: (-1) ** bt.dot(s, u))
        res = marginalize_strategy(strat, 2)
        assert res.triple_product == pytest.approx(1, abs=1e-12)
        assert res.family.check_observables()

    def test_nonlinear_classical_strategy(self):
        n = 2
        f = lambda s: -1 if s == (1, 1) else 1
        res = marginalize_strategy(classical_strategy(f), n)
        assert res.triple_product == pytest.approx(2 * linear_fraction(f, n) - 1, abs=1e-12)

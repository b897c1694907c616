import csv
import io
import math

import numpy as np
import pytest

from conftest import random_density
from oracles import braiding_law_error
from pauli_braiding import bits as bt
from pauli_braiding.braiding import (EPRWitness, SWEEP_COLUMNS, anticommuting_pairs, braiding_entries,
                                     braiding_game, data_register_state, epr_witness, extract_exact_paulis,
                                     honest_braiding_strategy, optimal_braiding_value, perturbed_strategy,
                                     residual_report, sweep)
from pauli_braiding.errors import PreconditionError, ResourceLimitError
from pauli_braiding.games import (chsh_game, game_value_exact, magic_square_game, player_marginal,
                                  subtest_values)
from pauli_braiding.states import epr_state

GAMES = {"chsh": chsh_game, "magic_square": magic_square_game}
CHSH_BRAIDING = 2 / 3 + math.cos(math.pi / 8) ** 2 / 3


def acg_of(name):
    return GAMES[name]()[0]


class TestHonest:
    @pytest.mark.parametrize("name", sorted(GAMES))
    @pytest.mark.parametrize("n", [1, 2])
    def test_value_matches_formula(self, name, n):
        acg = acg_of(name)
        v = game_value_exact(braiding_game(n, acg), honest_braiding_strategy(n, acg))
        assert v == pytest.approx(2 / 3 + acg.omega_g / 3, abs=1e-9)
        assert optimal_braiding_value(acg) == pytest.approx(2 / 3 + acg.omega_g / 3, abs=1e-15)

    def test_golden_values(self):
        assert optimal_braiding_value(acg_of("chsh")) == pytest.approx(0.951184, abs=5e-7)
        assert optimal_braiding_value(acg_of("chsh")) == pytest.approx(CHSH_BRAIDING, abs=1e-15)
        assert optimal_braiding_value(acg_of("magic_square")) == 1.0

    @pytest.mark.parametrize("name", sorted(GAMES))
    @pytest.mark.parametrize("n", [1, 2])
    def test_residuals_vanish(self, name, n):
        report = residual_report(honest_braiding_strategy(n, acg_of(name)), n)
        assert report.max() <= 1e-9

    @pytest.mark.parametrize("name", sorted(GAMES))
    def test_subtests(self, name):
        acg = acg_of(name)
        sub = subtest_values(braiding_game(1, acg), honest_braiding_strategy(1, acg))
        assert sub["linearity"] == pytest.approx(1, abs=1e-12)
        assert sub["consistency"] == pytest.approx(1, abs=1e-12)
        assert sub["anticommutation"] == pytest.approx(acg.omega_g, abs=1e-12)

    def test_epr_data_register(self):
        acg = acg_of("magic_square")
        rho = data_register_state(honest_braiding_strategy(2, acg), 2)
        e = epr_state(2)
        assert np.allclose(rho, np.outer(e, e), atol=1e-12)


class TestStructure:
    @pytest.mark.parametrize("n", [1, 2, 3])
    def test_anticommuting_pairs(self, n):
        pairs = anticommuting_pairs(n)
        strings = bt.all_strings(n)
        assert set(pairs) == {(a, b) for a in strings for b in strings if bt.dot(a, b)}

    def test_weights_split_evenly(self):
        entries = braiding_entries(2, acg_of("chsh"))
        totals = {}
        for e in entries:
            totals[e.tag] = totals.get(e.tag, 0.0) + e.weight
        assert set(totals) == {"linearity", "anticommutation", "consistency"}
        for t in totals.values():
            assert t == pytest.approx(1 / 3, abs=1e-12)

    @pytest.mark.parametrize("name", sorted(GAMES))
    def test_players_see_same_marginal(self, name):
        game = braiding_game(1, acg_of(name))
        m0, m1 = player_marginal(game, 0), player_marginal(game, 1)
        assert set(m0) == set(m1)
        for q in m0:
            assert m0[q] == pytest.approx(m1[q], abs=1e-12)

    @pytest.mark.parametrize("name", sorted(GAMES))
    def test_value_invariant_under_player_swap(self, name):
        acg = acg_of(name)
        strat = perturbed_strategy(honest_braiding_strategy(1, acg), 0.3, seed=4)
        game = braiding_game(1, acg)
        assert game_value_exact(game, strat) == pytest.approx(game_value_exact(game, strat.swapped()), abs=1e-12)


class TestPerturbation:
    def test_zero_epsilon_is_honest(self):
        acg = acg_of("chsh")
        strat = perturbed_strategy(honest_braiding_strategy(1, acg), 0.0, seed=1)
        assert game_value_exact(braiding_game(1, acg), strat) == pytest.approx(CHSH_BRAIDING, abs=1e-12)

    def test_epsilon_range(self):
        with pytest.raises(PreconditionError):
            perturbed_strategy(honest_braiding_strategy(1, acg_of("chsh")), 1.5, seed=1)

    @pytest.mark.parametrize("name", sorted(GAMES))
    def test_sweep_is_monotone(self, name):
        eps = [0.0, 0.05, 0.1, 0.2, 0.4]
        rows = sweep(1, acg_of(name), eps, seed=9)
        values = [r["game_value"] for r in rows]
        assert all(x >= y - 1e-12 for x, y in zip(values, values[1:]))
        for key in ("consistency_x", "consistency_z", "linearity_x", "linearity_z", "anticomm", "comm"):
            col = [r[key] for r in rows]
            assert col[0] <= 1e-9
            assert all(x <= y + 1e-12 for x, y in zip(col, col[1:]))
        fid = [r["epr_fidelity"] for r in rows]
        assert all(x >= y - 1e-12 for x, y in zip(fid, fid[1:]))

    def test_sweep_is_affine_in_epsilon(self):
        rows = sweep(1, acg_of("chsh"), [0.0, 0.25, 0.5], seed=2)
        for key in SWEEP_COLUMNS:
            col = [r[key] for r in rows]
            assert col[1] == pytest.approx((col[0] + col[2]) / 2, abs=1e-10)

    def test_sweep_csv_reproducible(self):
        def render():
            buf = io.StringIO()
            w = csv.DictWriter(buf, fieldnames=SWEEP_COLUMNS)
            w.writeheader()
            for row in sweep(1, acg_of("magic_square"), [0.0, 0.1, 0.3], seed=17):
                w.writerow({k: repr(v) for k, v in row.items()})
            return buf.getvalue()

        assert render() == render()

    def test_seed_changes_junk(self):
        acg = acg_of("chsh")
        a = sweep(1, acg, [0.3], seed=1)[0]["game_value"]
        b = sweep(1, acg, [0.3], seed=2)[0]["game_value"]
        assert a != b

    def test_empty_grid(self):
        with pytest.raises(PreconditionError):
            sweep(1, acg_of("chsh"), [], seed=0)


class TestExtraction:
    @pytest.mark.parametrize("name", sorted(GAMES))
    def test_honest_n1(self, name):
        ext = extract_exact_paulis(honest_braiding_strategy(1, acg_of(name)), 1)
        assert braiding_law_error(ext.paulis) <= 1e-8
        assert ext.diagnostics.braiding_error <= 1e-8
        assert ext.diagnostics.consistency_x <= 1e-8
        assert ext.diagnostics.consistency_z <= 1e-8

    @pytest.mark.parametrize("eps", [0.05, 0.2])
    def test_perturbed_n1(self, eps):
        strat = perturbed_strategy(honest_braiding_strategy(1, acg_of("chsh")), eps, seed=3)
        ext = extract_exact_paulis(strat, 1)
        assert braiding_law_error(ext.paulis) <= 1e-8
        assert ext.d_family.check_observables()

    def test_oracle_detects_a_sign_flip(self):
        ext = extract_exact_paulis(honest_braiding_strategy(1, acg_of("chsh")), 1)
        bad = dict(ext.paulis)
        d, s = bad[(0,), (1,)]
        bad[(0,), (1,)] = (-d, s)
        assert braiding_law_error(bad) == pytest.approx(2, abs=1e-9)

    def test_limit(self):
        acg = acg_of("chsh")
        with pytest.raises(ResourceLimitError):
            extract_exact_paulis(honest_braiding_strategy(1, acg), 3)


class TestEPRWitness:
    def test_epr_pair(self):
        for n in (1, 2):
            w = epr_witness(epr_state(n), n)
            assert w.witness == pytest.approx(1, abs=1e-12)
            assert w.fidelity_exact == pytest.approx(1, abs=1e-12)

    def test_maximally_mixed(self):
        w = epr_witness(np.eye(4) / 4, 1)
        assert w.witness == pytest.approx(0, abs=1e-12)
        assert w.fidelity_exact == pytest.approx(0.25, abs=1e-12)

    def test_single_pair_bound_holds(self, rng):
        for _ in range(50):
            w = epr_witness(random_density(4, rng), 1)
            assert w.fidelity_exact >= w.witness - 1e-12

    def test_two_pair_counterexample(self):
        singlet = np.array([0, 1, -1, 0]) / math.sqrt(2)  # qubit order (A, B)
        # registers ordered (A1 A2, B1 B2): place a singlet on (A1, B1) and on (A2, B2)
        t = np.einsum("ac,bd->abcd", singlet.reshape(2, 2), singlet.reshape(2, 2)).reshape(-1)
        w = epr_witness(t, 2)
        assert w.witness == pytest.approx(1, abs=1e-12)
        assert w.fidelity_exact == pytest.approx(0, abs=1e-12)

    def test_shape_check(self):
        with pytest.raises(ValueError):
            epr_witness(np.eye(4) / 4, 2)

    def test_result_type(self):
        assert isinstance(epr_witness(epr_state(1), 1), EPRWitness)

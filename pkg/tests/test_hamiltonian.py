import math

import numpy as np
import pytest

from conftest import random_state
from oracles import SX, SZ, X1, Z1, energy_oracle, single_qubit_hamiltonians
from pauli_braiding.css import steane_code
from pauli_braiding.errors import PreconditionError, ResourceLimitError, ValidationError
from pauli_braiding.games import (chsh_game, game_value_exact, magic_square_game, player_marginal,
                                  subtest_values)
from pauli_braiding.hamiltonian import (AmplifiedHamiltonian, XZHamiltonian, amplify, encoded_strategy,
                                        energy_consistency_entries, energy_game, energy_closed_forms,
                                        energy_test_value, ground_state, hamiltonian_game,
                                        honest_hamiltonian_strategy, honest_value_closed_form,
                                        load_hamiltonian, min_eigenvalue, parse_hamiltonian,
                                        qma_parameters, serialize_hamiltonian, theorem_main_bounds)

@pytest.fixture(scope="module")
def steane():
    return steane_code()


class TestParsing:
    def test_round_trip(self):
        text = "1.0 X:10 Z:01\n-0.25 X:00 Z:11\n"
        h = parse_hamiltonian(text)
        assert h.n == 2 and h.m == 2
        assert serialize_hamiltonian(h) == text
        assert parse_hamiltonian(serialize_hamiltonian(h)) == h

    def test_comments_and_blank_lines(self):
        h = parse_hamiltonian("# field\n\n0.5 X:1 Z:0  # transverse\n")
        assert h.m == 1 and h.terms[0].alpha == 0.5

    @pytest.mark.parametrize("text,index", [
        ("1.0 X:1 Z:0\n0.5 X:1 Z:1\n", 1),
        ("1.0 X:1 Z:0\n2.0 X:0 Z:1\n", 1),
        ("1.0 X:1 Z:0\n0.5 X:10 Z:00\n", 1),
        ("0.5 X:1\n", 0),
        ("abc X:1 Z:0\n", 0),
    ])
    def test_errors_name_the_term(self, text, index):
        with pytest.raises(ValidationError) as info:
            parse_hamiltonian(text)
        assert info.value.index == index

    def test_empty(self):
        with pytest.raises(ValidationError):
            parse_hamiltonian("# nothing\n")

    def test_shipped_files_load(self):
        import pathlib
        files = sorted(pathlib.Path(__file__).parent.parent.joinpath("hamiltonians").glob("*.ham"))
        assert files
        for f in files:
            assert load_hamiltonian(f).n >= 1


class TestSpectrum:
    def test_min_eigenvalues(self):
        assert min_eigenvalue(XZHamiltonian(1, ((1.0, *Z1),))) == pytest.approx(-1)
        h = parse_hamiltonian("-0.5 X:11 Z:00\n-0.5 X:00 Z:11\n")
        assert min_eigenvalue(h) == pytest.approx(-0.5)
        assert np.allclose(h.dense(), -0.5 * (np.kron(SX, SX) + np.kron(SZ, SZ)) / 2)

    def test_ground_state_of_bell_hamiltonian(self):
        h = parse_hamiltonian("-0.5 X:11 Z:00\n-0.5 X:00 Z:11\n")
        psi = ground_state(h)
        assert np.allclose(psi, np.array([1, 0, 0, 1]) / math.sqrt(2))
        assert h.expectation(psi) == pytest.approx(min_eigenvalue(h), abs=1e-12)

    def test_ground_state_phase_is_fixed(self):
        h = XZHamiltonian(1, ((1.0, *X1),))
        psi = ground_state(h)
        first = psi[np.argmax(np.abs(psi) > 1e-12)]
        assert first.imag == 0 and first.real > 0


class TestEnergyTest:
    def test_examples(self):
        h = XZHamiltonian(1, ((1.0, *Z1),))
        assert energy_test_value(h, np.array([0, 1])) == pytest.approx(1)
        assert energy_test_value(h, np.array([1, 0])) == pytest.approx(0)

    @pytest.mark.parametrize("h", single_qubit_hamiltonians(), ids=lambda h: serialize_hamiltonian(h).strip())
    def test_closed_form_matches_simulation(self, h, steane, rng):
        game = energy_game(h, steane)
        _, vecs = np.linalg.eigh(h.dense())
        states = [vecs[:, i] for i in range(2)] + [random_state(2, rng)]
        for psi in states:
            closed = energy_test_value(h, psi)
            assert closed == pytest.approx(energy_oracle(h, psi), abs=1e-12)
            sim = game_value_exact(game, encoded_strategy(psi, 1, steane, None))
            assert sim == pytest.approx(closed, abs=1e-9)

    def test_bell_ground_state_is_best_eigenstate(self, steane):
        h = parse_hamiltonian("-0.5 X:11 Z:00\n-0.5 X:00 Z:11\n")
        game = energy_game(h, steane)
        evals, vecs = np.linalg.eigh(h.dense())
        values = [game_value_exact(game, encoded_strategy(vecs[:, i], 2, steane, None)) for i in range(4)]
        assert values[0] == pytest.approx(1, abs=1e-9)
        assert max(values) == pytest.approx(values[0], abs=1e-12)
        for lam, v in zip(evals, values):
            assert v == pytest.approx(1 - (lam + h.abs_weight) / 2, abs=1e-9)

    def test_monotone_in_energy(self):
        h = XZHamiltonian(1, ((0.5, *X1), (-1.0, *Z1)))
        grid = np.linspace(0, math.pi, 13)
        pts = []
        for t in grid:
            psi = np.array([math.cos(t / 2), math.sin(t / 2)])
            pts.append((h.expectation(psi), energy_test_value(h, psi)))
        pts.sort()
        assert all(a[1] >= b[1] - 1e-12 for a, b in zip(pts, pts[1:]))

    def test_closed_forms_are_reported(self):
        h = XZHamiltonian(1, ((1.0, *Z1),))
        forms = energy_closed_forms(h, np.array([1, 0]))
        assert forms["procedure"] == pytest.approx(0)
        assert forms["outer"] == pytest.approx(0.5)
        assert forms["expanded"] == pytest.approx(0.25)

    def test_wrong_state_size(self):
        with pytest.raises(PreconditionError):
            energy_test_value(XZHamiltonian(1, ((1.0, *Z1),)), np.ones(4) / 2)


@pytest.fixture(scope="module")
def setup():
    code = steane_code()
    acg, _ = magic_square_game()
    h = parse_hamiltonian("1.0 X:1 Z:0\n-0.5 X:0 Z:1\n")
    game = hamiltonian_game(h, 0.1, acg, code)
    strat = honest_hamiltonian_strategy(h, code, acg)
    return h, acg, code, game, strat


class TestFullGame:
    def test_honest_value_matches_closed_form(self, setup):
        h, acg, _, game, strat = setup
        value = game_value_exact(game, strat)
        assert value == pytest.approx(honest_value_closed_form(h, 0.1, 1.0), abs=1e-9)

    def test_subtests(self, setup):
        h, _, _, game, strat = setup
        sub = subtest_values(game, strat)
        assert sub["energy_consistency"] == pytest.approx(1, abs=1e-9)
        assert sub["energy"] == pytest.approx(energy_test_value(h, ground_state(h)), abs=1e-9)
        for tag, v in sub.items():
            if tag not in ("energy", "energy_consistency"):
                assert v == pytest.approx(1, abs=1e-9), tag

    def test_value_above_lower_bound(self, setup):
        h, _, _, game, strat = setup
        lower, _ = theorem_main_bounds(h, 0.1)
        assert game_value_exact(game, strat) >= lower - 1e-6

    def test_each_consistency_branch_passes(self, setup):
        h, acg, code, _, strat = setup
        from pauli_braiding.games import NonlocalGame
        from pauli_braiding.hamiltonian import hamiltonian_predicate
        entries = energy_consistency_entries(h, code)
        branches = {}
        for e in entries:
            branches.setdefault(e.context[3], []).append(e)
        assert set(branches) == {1, 2, 3}
        for group in branches.values():
            total = sum(e.weight for e in group)
            scaled = tuple(e._replace(weight=e.weight / total) for e in group)
            g = NonlocalGame(code.r, scaled, hamiltonian_predicate(acg), "branch")
            assert game_value_exact(g, strat) == pytest.approx(1, abs=1e-9)

    def test_players_see_same_marginal(self, setup):
        _, _, code, game, _ = setup
        ref = player_marginal(game, 0)
        for j in range(1, code.r):
            mj = player_marginal(game, j)
            assert set(mj) == set(ref)
            assert all(mj[q] == pytest.approx(ref[q], abs=1e-12) for q in ref)

    def test_p_range(self, setup):
        h, acg, code, _, _ = setup
        with pytest.raises(PreconditionError):
            hamiltonian_game(h, 1.0, acg, code)

    def test_large_instance_refused(self, steane):
        acg, _ = magic_square_game()
        h = parse_hamiltonian("-0.5 X:11 Z:00\n-0.5 X:00 Z:11\n")
        with pytest.raises(ResourceLimitError):
            honest_hamiltonian_strategy(h, steane, acg)


class TestBounds:
    def test_example(self):
        h = XZHamiltonian(1, ((1.0, *Z1),))
        lower, upper = theorem_main_bounds(h, 0.1)
        assert lower == pytest.approx(0.9875, abs=1e-15)
        assert upper == lower

    @pytest.mark.parametrize("h", single_qubit_hamiltonians(), ids=lambda h: serialize_hamiltonian(h).strip())
    def test_closed_form_honest_value_above_bound(self, h):
        lower, _ = theorem_main_bounds(h, 0.1)
        assert honest_value_closed_form(h, 0.1, 1.0) >= lower - 1e-12

    @pytest.mark.parametrize("text", ["1.0 X:1 Z:0\n", "1.0 X:0 Z:0\n", "0.5 X:0 Z:0\n-0.5 X:0 Z:1\n"])
    def test_gap_is_minus_p_lambda_over_eight(self, text):
        h = parse_hamiltonian(text)
        honest = honest_value_closed_form(h, 0.1, 1.0)
        lower, _ = theorem_main_bounds(h, 0.1)
        assert honest - lower == pytest.approx(-0.1 * min_eigenvalue(h) / 8, abs=1e-12)

    def test_bound_fails_for_positive_ground_energy(self, steane):
        # the identity term has lambda_min = 1, so the honest value sits p/8 below the bound
        acg, _ = magic_square_game()
        h = parse_hamiltonian("1.0 X:0 Z:0\n")
        value = game_value_exact(hamiltonian_game(h, 0.1, acg, steane), honest_hamiltonian_strategy(h, steane, acg))
        lower, _ = theorem_main_bounds(h, 0.1)
        assert value == pytest.approx(lower - 0.1 / 8, abs=1e-9)

    def test_chsh_honest_value_below_bound(self, steane):
        acg, _ = chsh_game()
        h = XZHamiltonian(1, ((1.0, *Z1),))
        lower, _ = theorem_main_bounds(h, 0.1)
        assert honest_value_closed_form(h, 0.1, 2 / 3 + acg.omega_g / 3) < lower


class TestAmplify:
    def test_example(self):
        amp = amplify(XZHamiltonian(1, ((1.0, *Z1),)), 4, 2)
        assert amp.copies == 4 and amp.exact_copies == pytest.approx(4)
        assert float(amp.eigenvalue_map(0.5)) == pytest.approx(0.68359375, abs=1e-15)

    def test_rounding(self):
        amp = amplify(XZHamiltonian(1, ((1.0, *Z1),)), 3, 2)
        assert amp.exact_copies == pytest.approx(6) and amp.copies == 6
        assert amplify(XZHamiltonian(1, ((1.0, *Z1),)), 100, 99).copies >= 1

    @pytest.mark.parametrize("text,copies", [("1.0 X:1 Z:0\n-0.5 X:0 Z:1\n", 4),
                                             ("0.25 X:10 Z:00\n0.5 X:00 Z:01\n", 3),
                                             ("-1.0 X:1 Z:0\n", 6)])
    def test_dense_spectrum(self, text, copies):
        h = parse_hamiltonian(text)
        amp = AmplifiedHamiltonian(h, copies, float(copies))
        dense = np.linalg.eigvalsh(amp.dense())
        assert np.allclose(dense, amp.predicted_spectrum(), atol=1e-9)
        evals, vecs = np.linalg.eigh(h.dense())
        for lam, v in zip(evals, vecs.T):
            prod = v
            for _ in range(copies - 1):
                prod = np.kron(prod, v)
            assert np.allclose(amp.dense() @ prod, amp.eigenvalue_map(lam) * prod, atol=1e-9)
        assert dense[0] == pytest.approx(amp.lambda_min, abs=1e-9)

    def test_dense_limit(self):
        amp = AmplifiedHamiltonian(XZHamiltonian(1, ((1.0, *Z1),)), 13, 13.0)
        with pytest.raises(ResourceLimitError):
            amp.dense()

    def test_bad_parameters(self):
        with pytest.raises(PreconditionError):
            amplify(XZHamiltonian(1, ((1.0, *Z1),)), 2, 4)


class TestQma:
    @pytest.mark.parametrize("p,q", [(2 / 3, 1 / 3), (0.9, 0.1), (0.51, 0.5)])
    def test_identities(self, p, q):
        pp, eta = qma_parameters(p, q)
        assert abs(1 - pp + pp * p - (0.5 + 2 * eta)) <= 1e-12
        assert abs(1 - pp + pp * q - (0.5 + eta)) <= 1e-12
        assert pp == pytest.approx(1 / (2 * (1 + p - 2 * q)))

    def test_example(self):
        pp, eta = qma_parameters(2 / 3, 1 / 3)
        assert pp == pytest.approx(1 / 2, abs=1e-15)
        assert eta == pytest.approx(1 / 6, abs=1e-15)
        pp, eta = qma_parameters(0.9, 0.5)
        assert pp == pytest.approx(5 / 9, abs=1e-15)
        assert eta == pytest.approx(2 / 9, abs=1e-15)

    def test_order(self):
        with pytest.raises(PreconditionError):
            qma_parameters(0.3, 0.6)

"""Exact simulation of Pauli braiding and Hamiltonian self-tests.

The package builds nonlocal games over Pauli observables, evaluates honest
and perturbed strategies by exact statevector computation, and runs the
constructive steps of the self-testing analysis at small sizes.
"""
from .braiding import (braiding_game, epr_witness, extract_exact_paulis, honest_braiding_strategy,
                       optimal_braiding_value, perturbed_strategy, residual_report, sweep)
from .css import CssCode, complementary_query, encode, load_code, steane_code, verify_code
from .errors import (DimensionError, NumericInvariantError, PreconditionError, ResourceLimitError,
                     ValidationError)
from .games import (AnticommutationGame, NonlocalGame, QuestionEntry, Strategy, chsh_game,
                    game_value_exact, game_value_sampled, magic_square_game, subtest_values,
                    verify_ac_completeness)
from .hamiltonian import (XZHamiltonian, amplify, energy_test_value, ground_state, hamiltonian_game,
                          honest_hamiltonian_strategy, min_eigenvalue, parse_hamiltonian, qma_parameters,
                          serialize_hamiltonian, theorem_main_bounds)
from .linearity import blr_round, linearity_defect, linearity_game
from .pauli import PauliWord, conjugating_clifford, pauli_dense, pauli_multiply
from .queries import GQuery, Marginal, WQuery, XZQuery
from .states import Measurement, consistency, epr_state, joint_measurement, naimark_dilate, state_distance

__all__ = [
    "amplify",
    "AnticommutationGame",
    "blr_round",
    "braiding_game",
    "chsh_game",
    "complementary_query",
    "conjugating_clifford",
    "consistency",
    "CssCode",
    "DimensionError",
    "encode",
    "energy_test_value",
    "epr_state",
    "epr_witness",
    "extract_exact_paulis",
    "game_value_exact",
    "game_value_sampled",
    "GQuery",
    "ground_state",
    "hamiltonian_game",
    "honest_braiding_strategy",
    "honest_hamiltonian_strategy",
    "joint_measurement",
    "linearity_defect",
    "linearity_game",
    "load_code",
    "magic_square_game",
    "Marginal",
    "Measurement",
    "min_eigenvalue",
    "naimark_dilate",
    "NonlocalGame",
    "NumericInvariantError",
    "optimal_braiding_value",
    "parse_hamiltonian",
    "pauli_dense",
    "pauli_multiply",
    "PauliWord",
    "perturbed_strategy",
    "PreconditionError",
    "qma_parameters",
    "QuestionEntry",
    "residual_report",
    "ResourceLimitError",
    "serialize_hamiltonian",
    "state_distance",
    "steane_code",
    "Strategy",
    "subtest_values",
    "sweep",
    "theorem_main_bounds",
    "ValidationError",
    "verify_ac_completeness",
    "verify_code",
    "WQuery",
    "XZHamiltonian",
    "XZQuery",
]

__version__ = "0.1.0"

"""Command-line front end: game values, perturbation sweeps and the Hamiltonian self-test.

Exit codes: 0 success, 2 configuration error, 3 resource limit, 4 numeric
invariant violation.
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from dataclasses import dataclass
from typing import Optional

from threadpoolctl import threadpool_limits

from .braiding import braiding_game, honest_braiding_strategy, optimal_braiding_value, perturbed_strategy, sweep
from .css import load_code, steane_code, verify_code
from .errors import DimensionError, NumericInvariantError, PreconditionError, ResourceLimitError, ValidationError
from .games import ac_game_by_name, game_value_exact, game_value_sampled, subtest_values
from .hamiltonian import (amplify, energy_closed_forms, ground_state, hamiltonian_game,
                          honest_hamiltonian_strategy, load_hamiltonian, min_eigenvalue, qma_parameters,
                          theorem_main_bounds)
from .linearity import linearity_game

EXIT_OK, EXIT_CONFIG, EXIT_RESOURCE, EXIT_NUMERIC = 0, 2, 3, 4
GAMES = ("linearity", "chsh", "magic-square", "braiding", "hamiltonian")
HAMILTONIAN_COLUMNS = ("n", "m", "lambda_min", "p", "honest_value", "lower_bound",
                       "braiding_value", "energy_value", "consistency_value")


class ConfigError(ValueError):
    """The command line names an invalid experiment."""


@dataclass
class ExperimentConfig:
    command: str
    n: int = 1
    ac: str = "chsh"
    p: float = 0.1
    seed: Optional[int] = None
    mode: str = "exact"
    samples: int = 10000
    epsilons: tuple = ()
    game: Optional[str] = None
    strategy: str = "honest"
    epsilon: Optional[float] = None
    hamiltonian: Optional[str] = None
    code: Optional[str] = None
    amplify: Optional[tuple] = None
    qma_params: Optional[tuple] = None
    extract: bool = False
    csv: Optional[str] = None
    json: Optional[str] = None
    threads: Optional[int] = None

    def validate(self) -> None:
        if self.n < 1:
            raise ConfigError("--n must be at least 1")
        if self.ac not in ("chsh", "magic-square"):
            raise ConfigError("--ac must be chsh or magic-square")
        if not 0.0 < self.p < 1.0:
            raise ConfigError("--p must lie in (0, 1)")
        if self.mode not in ("exact", "sampled"):
            raise ConfigError("--mode must be exact or sampled")
        if self.mode == "sampled":
            if self.seed is None:
                raise ConfigError("--seed is mandatory in sampled mode")
            if self.samples < 1:
                raise ConfigError("--samples must be positive")
        if self.threads is not None and self.threads < 1:
            raise ConfigError("--threads must be positive")
        if self.command == "value":
            if self.game not in GAMES:
                raise ConfigError(f"--game must be one of {', '.join(GAMES)}")
            if self.strategy == "honest":
                self.epsilon = None
            elif self.strategy.startswith("perturbed:"):
                try:
                    self.epsilon = float(self.strategy.split(":", 1)[1])
                except ValueError:
                    raise ConfigError(f"cannot read epsilon from {self.strategy!r}") from None
                if not 0.0 <= self.epsilon <= 1.0:
                    raise ConfigError("perturbation epsilon must lie in [0, 1]")
                if self.game == "hamiltonian":
                    raise ConfigError("perturbed strategies are two-player only")
                if self.seed is None:
                    self.seed = 0
            else:
                raise ConfigError("--strategy must be honest or perturbed:<epsilon>")
            if self.game == "hamiltonian" and not self.hamiltonian:
                raise ConfigError("--game hamiltonian needs --hamiltonian FILE")
        if self.command == "sweep":
            if not self.epsilons:
                raise ConfigError("--epsilons must list at least one value")
            if any(not 0.0 <= e <= 1.0 for e in self.epsilons):
                raise ConfigError("epsilons must lie in [0, 1]")
            if self.seed is None:
                self.seed = 0
        if self.command == "hamiltonian" and not (self.hamiltonian or self.qma_params):
            raise ConfigError("give a Hamiltonian file or --qma-params")


def _epsilons(text: str) -> tuple:
    try:
        return tuple(float(x) for x in text.split(",") if x.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad epsilon list {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--n", type=int, default=1, help="number of qubits tested")
    common.add_argument("--ac", default="chsh", help="anticommutation game: chsh or magic-square")
    common.add_argument("--p", type=float, default=0.1, help="probability of the energy tests")
    common.add_argument("--seed", type=int, default=None, help="seed for perturbations and sampling")
    common.add_argument("--mode", default="exact", help="exact or sampled evaluation")
    common.add_argument("--samples", type=int, default=10000, help="question samples in sampled mode")
    common.add_argument("--csv", default=None, help="write the report as CSV to this path")
    common.add_argument("--json", default=None, help="write the report as JSON to this path")
    common.add_argument("--threads", type=int, default=None, help="cap on linear-algebra threads")

    parser = argparse.ArgumentParser(prog="pauli-braiding", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    value = sub.add_parser("value", parents=[common], help="value of a game under a strategy")
    value.add_argument("--game", required=True, help="|".join(GAMES))
    value.add_argument("--strategy", default="honest", help="honest or perturbed:<epsilon>")
    value.add_argument("--hamiltonian", default=None, help="Hamiltonian file for --game hamiltonian")
    value.add_argument("--code", default=None, help="CSS code JSON file (default: Steane)")

    sw = sub.add_parser("sweep", parents=[common], help="residuals across perturbation strengths")
    sw.add_argument("--epsilons", type=_epsilons, required=True, help="comma-separated grid")
    sw.add_argument("--extract", action="store_true", help="also run exact-Pauli extraction")

    ham = sub.add_parser("hamiltonian", parents=[common], help="run the Hamiltonian self-test")
    ham.add_argument("hamiltonian", nargs="?", default=None, help="Hamiltonian file")
    ham.add_argument("--code", default=None, help="CSS code JSON file (default: Steane)")
    ham.add_argument("--amplify", type=float, nargs=2, metavar=("P", "Q"), default=None,
                     help="report the gap-amplified Hamiltonian for thresholds P > Q")
    ham.add_argument("--qma-params", type=float, nargs=2, metavar=("P", "Q"), default=None,
                     help="map constants 0 < Q < P < 1 to (p', eta0)")
    return parser


def config_from_args(args: argparse.Namespace) -> ExperimentConfig:
    known = {k: v for k, v in vars(args).items() if k in ExperimentConfig.__dataclass_fields__}
    if known.get("amplify") is not None:
        known["amplify"] = tuple(known["amplify"])
    if known.get("qma_params") is not None:
        known["qma_params"] = tuple(known["qma_params"])
    cfg = ExperimentConfig(**known)
    cfg.validate()
    return cfg


def _load_code(cfg: ExperimentConfig):
    code = load_code(cfg.code) if cfg.code else steane_code()
    report = verify_code(code)
    if not report:
        raise ValidationError("; ".join(report.failures))
    return code


def _evaluate(game, strategy, cfg: ExperimentConfig) -> dict:
    if cfg.mode == "exact":
        return {"value": game_value_exact(game, strategy), "stderr": 0.0}
    est, err = game_value_sampled(game, strategy, cfg.samples, cfg.seed)
    return {"value": est, "stderr": err}


def cmd_value(cfg: ExperimentConfig) -> list:
    acg, ac_honest = ac_game_by_name(cfg.ac)
    if cfg.game == "hamiltonian":
        h = load_hamiltonian(cfg.hamiltonian)
        code = _load_code(cfg)
        game, strategy = hamiltonian_game(h, cfg.p, acg, code), honest_hamiltonian_strategy(h, code, acg)
    elif cfg.game in ("chsh", "magic-square"):
        acg, strategy = ac_game_by_name(cfg.game)
        game = acg.game
    elif cfg.game == "linearity":
        game, strategy = linearity_game(cfg.n), honest_braiding_strategy(cfg.n, ac_game_by_name("chsh")[0])
    else:
        game, strategy = braiding_game(cfg.n, acg), honest_braiding_strategy(cfg.n, acg)
    if cfg.epsilon is not None:
        strategy = perturbed_strategy(strategy, cfg.epsilon, cfg.seed)
    row = {"game": game.name, "strategy": cfg.strategy, "mode": cfg.mode,
           "seed": cfg.seed, "samples": cfg.samples if cfg.mode == "sampled" else None}
    row.update(_evaluate(game, strategy, cfg))
    return [row]


def cmd_sweep(cfg: ExperimentConfig) -> list:
    acg, _ = ac_game_by_name(cfg.ac)
    return sweep(cfg.n, acg, cfg.epsilons, cfg.seed, extract=cfg.extract)


def cmd_hamiltonian(cfg: ExperimentConfig) -> list:
    row: dict = {}
    if cfg.hamiltonian:
        acg, _ = ac_game_by_name(cfg.ac)
        code = _load_code(cfg)
        h = load_hamiltonian(cfg.hamiltonian)
        game = hamiltonian_game(h, cfg.p, acg, code)
        strategy = honest_hamiltonian_strategy(h, code, acg)
        subs = subtest_values(game, strategy)
        lower, _ = theorem_main_bounds(h, cfg.p)
        row = {"n": h.n, "m": h.m, "lambda_min": min_eigenvalue(h), "p": cfg.p,
               **_evaluate(game, strategy, cfg), "lower_bound": lower,
               "braiding_value": subs["braiding"], "energy_value": subs["energy"],
               "consistency_value": subs["energy_consistency"]}
        row["honest_value"] = row.pop("value")
        forms = energy_closed_forms(h, ground_state(h))
        row["energy_form_outer"] = forms["outer"]
        row["energy_form_expanded"] = forms["expanded"]
        row["braiding_optimum"] = optimal_braiding_value(acg)
        if cfg.amplify:
            amp = amplify(h, *cfg.amplify)
            row.update({"amplify_copies": amp.copies, "amplify_exact_copies": amp.exact_copies,
                        "amplified_lambda_min": amp.lambda_min})
    if cfg.qma_params:
        p_prime, eta0 = qma_parameters(*cfg.qma_params)
        row.update({"p_prime": p_prime, "eta0": eta0})
    return [row]


def _ordered(rows: list, command: str) -> list:
    keys: list = list(HAMILTONIAN_COLUMNS) if command == "hamiltonian" and "n" in rows[0] else []
    for r in rows:
        keys.extend(k for k in r if k not in keys)
    return [k for k in keys if any(k in r for r in rows)]


def _fmt(v) -> str:
    if isinstance(v, float):
        return repr(v)
    return "" if v is None else str(v)


def _table(rows: list, keys: list) -> str:
    if len(rows) == 1:
        width = max(len(k) for k in keys)
        return "\n".join(f"{k:<{width}}  {_show(rows[0].get(k))}" for k in keys)
    cells = [keys] + [[_show(r.get(k)) for k in keys] for r in rows]
    widths = [max(len(c[i]) for c in cells) for i in range(len(keys))]
    return "\n".join("  ".join(c[i].rjust(widths[i]) for i in range(len(keys))) for c in cells)


def _show(v) -> str:
    if isinstance(v, float):
        return "nan" if math.isnan(v) else f"{v:.6f}"
    return "" if v is None else str(v)


def write_reports(rows: list, keys: list, cfg: ExperimentConfig, out=None) -> None:
    print(_table(rows, keys), file=out or sys.stdout)
    if cfg.csv:
        with open(cfg.csv, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(keys)
            for r in rows:
                writer.writerow([_fmt(r.get(k)) for k in keys])
    if cfg.json:
        with open(cfg.json, "w") as fh:
            json.dump({"command": cfg.command, "rows": rows}, fh, indent=2, sort_keys=False)
            fh.write("\n")


COMMANDS = {"value": cmd_value, "sweep": cmd_sweep, "hamiltonian": cmd_hamiltonian}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = config_from_args(args)
        with threadpool_limits(limits=cfg.threads):
            rows = COMMANDS[cfg.command](cfg)
        write_reports(rows, _ordered(rows, cfg.command), cfg)
    except (ConfigError, ValidationError, PreconditionError, DimensionError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ResourceLimitError as exc:
        print(f"resource limit: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except NumericInvariantError as exc:
        print(f"numeric invariant violated: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())

import argparse
import dataclasses
from pathlib import Path
from typing import Any, Dict, Optional

from bnbench import error
from bnbench.citest import CiTest
from bnbench.config import LearnerSettings
from bnbench.genetic import GaVariant


def add_learner_arguments(parser: argparse.ArgumentParser) -> None:
    """learner tuning options; unset options keep configured values."""
    parser.add_argument(
        "--alpha",
        type=float,
        action="store",
        help="significance level of independence tests (default 0.05)",
    )

    parser.add_argument(
        "--test",
        choices=[t.value for t in CiTest],
        action="store",
        help="independence test for pc/iamb (default auto)",
    )

    parser.add_argument(
        "--tenure",
        type=int,
        action="store",
        help="tabu tenure (default: number of variables)",
    )

    parser.add_argument(
        "--stall",
        type=int,
        action="store",
        help="tabu iterations without improvement before stopping "
        "(default 50)",
    )

    parser.add_argument(
        "--max-iters",
        type=int,
        action="store",
        help="maximum tabu iterations (default 2000)",
    )

    parser.add_argument(
        "--pop",
        type=int,
        action="store",
        help="GA population size (default 100)",
    )

    parser.add_argument(
        "--gens",
        type=int,
        action="store",
        help="GA generations (default 100)",
    )

    parser.add_argument(
        "--tournament",
        type=int,
        action="store",
        help="GA tournament size (default 3)",
    )

    parser.add_argument(
        "--mut-prob",
        type=float,
        action="store",
        help="GA mutation probability (default 0.25)",
    )

    parser.add_argument(
        "--variant",
        choices=[v.value for v in GaVariant],
        action="store",
        help="GA genome variant (default discrete)",
    )

    parser.add_argument(
        "--weight-gate",
        action="store_true",
        default=False,
        help="continuous GA: score only arcs with weight above 0.5",
    )


def _given(args: argparse.Namespace, name: str) -> Optional[Any]:
    return getattr(args, name, None)


class BaseMain:
    def __init__(self, args: argparse.Namespace) -> None:
        self.args = args
        self._settings: Optional[LearnerSettings] = None

    def base_settings(self) -> LearnerSettings:
        # Override to start from configured values.
        return LearnerSettings()

    @property
    def settings(self) -> LearnerSettings:
        if self._settings is None:
            self._settings = self._settings_from_args(self.base_settings())
        return self._settings

    def _settings_from_args(self, base: LearnerSettings) -> LearnerSettings:
        args = self.args
        top: Dict[str, Any] = {}
        ga: Dict[str, Any] = {}
        for arg_name, field_name in [
            ("alpha", "alpha"),
            ("tenure", "tenure"),
            ("stall", "stall_limit"),
            ("max_iters", "max_iters"),
        ]:
            if _given(args, arg_name) is not None:
                top[field_name] = _given(args, arg_name)
        if _given(args, "test") is not None:
            top["ci_test"] = CiTest.from_config_str(args.test)
        for arg_name, field_name in [
            ("pop", "population_size"),
            ("gens", "generations"),
            ("tournament", "tournament_size"),
            ("mut_prob", "mutation_probability"),
        ]:
            if _given(args, arg_name) is not None:
                ga[field_name] = _given(args, arg_name)
        if _given(args, "variant") is not None:
            ga["variant"] = GaVariant.from_config_str(args.variant)
        if _given(args, "weight_gate"):
            ga["weight_gate"] = True
        if ga:
            top["ga"] = dataclasses.replace(base.ga, **ga)
        return dataclasses.replace(base, **top)

    def get_path(self, name: str, option: str) -> Path:
        value = _given(self.args, name)
        if not value:
            raise error.UsageError(f"missing {option}")
        return Path(value)

    def _run(self) -> None:
        # Override in derived classes.
        pass

    def run(self) -> None:
        self._run()

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Tuple

import toml

from bnbench import error, graph
from bnbench.citest import CiTest
from bnbench.datagen import VarKind
from bnbench.genetic import GaConfig, GaVariant

Ladder = Tuple[int, Tuple[int, ...]]


@dataclass(frozen=True)
class GridSpec:
    kinds: Tuple[VarKind, ...]
    ladders: Tuple[Ladder, ...]
    densities: Tuple[float, ...]
    noise_rates: Tuple[float, ...]
    replicates: int
    master_seed: int = 0

    def validate(self) -> None:
        for name in ("kinds", "ladders", "densities", "noise_rates"):
            if not getattr(self, name):
                raise error.ConfigurationError(f"empty grid dimension {name}")
        if self.replicates < 1:
            raise error.ConfigurationError(
                f"replicates {self.replicates} below 1"
            )
        for nodes, ladder in self.ladders:
            if nodes < 2:
                raise error.ConfigurationError(f"node count {nodes} below 2")
            if not ladder or min(ladder) < 1:
                raise error.ConfigurationError(
                    f"bad sample-size ladder {ladder} for {nodes} nodes"
                )
            for density in self.densities:
                if not 0.0 < density <= 1.0:
                    raise error.ConfigurationError(
                        f"density {density} not in (0, 1]"
                    )
                arcs = graph.arc_count_for(nodes, density)
                if arcs < nodes - 1:
                    raise error.InfeasibleDensityError(nodes, density, arcs)
        for noise in self.noise_rates:
            if not 0.0 <= noise < 1.0:
                raise error.ConfigurationError(
                    f"noise rate {noise} not in [0, 1)"
                )

    @property
    def size(self) -> int:
        samples = sum(len(ladder) for _, ladder in self.ladders)
        return (
            len(self.kinds)
            * samples
            * len(self.densities)
            * len(self.noise_rates)
            * self.replicates
        )


_BOTH_KINDS = (VarKind.BINARY, VarKind.FOUR_LEVEL)
_LADDER_10: Ladder = (10, (10, 50, 100, 500))
_LADDER_15: Ladder = (15, (15, 75, 150, 750))
_DENSITIES = (0.4, 0.6, 0.8)
_NOISE_RATES = (0.0, 0.1, 0.2)

PRESETS: Dict[str, GridSpec] = {
    "full": GridSpec(
        _BOTH_KINDS,
        (_LADDER_10, _LADDER_15),
        _DENSITIES,
        _NOISE_RATES,
        replicates=100,
    ),
    "desk": GridSpec(
        _BOTH_KINDS, (_LADDER_10,), _DENSITIES, _NOISE_RATES, replicates=20
    ),
    "desk-15": GridSpec(
        _BOTH_KINDS, (_LADDER_15,), _DENSITIES, _NOISE_RATES, replicates=5
    ),
    "smoke": GridSpec(
        _BOTH_KINDS, ((5, (20, 100)),), (0.4,), (0.0, 0.1), replicates=1
    ),
}


def preset(name: str) -> GridSpec:
    try:
        return PRESETS[name]
    except KeyError:
        raise error.UsageError(
            "unknown preset {!r} (choose from {})".format(
                name, ", ".join(sorted(PRESETS))
            )
        )


@dataclass(frozen=True)
class LearnerSettings:
    alpha: float = 0.05
    # None means "node count".
    tenure: Optional[int] = None
    stall_limit: int = 50
    max_iters: int = 2000
    ci_test: CiTest = CiTest.AUTO
    ga: GaConfig = field(default_factory=GaConfig)

    def __post_init__(self) -> None:
        if not 0.0 < self.alpha < 1.0:
            raise error.ConfigurationError(f"alpha {self.alpha} not in (0, 1)")
        if self.tenure is not None and self.tenure < 1:
            raise error.ConfigurationError(f"tenure {self.tenure} below 1")
        if self.stall_limit < 1 or self.max_iters < 1:
            raise error.ConfigurationError(
                "stall limit and max iterations must be positive"
            )

    def tenure_for(self, nodes: int) -> int:
        return self.tenure if self.tenure is not None else nodes


_GRID_KEYS = {
    "kinds",
    "ladders",
    "densities",
    "noise_rates",
    "replicates",
    "master_seed",
    "methods",
    "learners",
}

_LEARNER_KEYS = {
    "alpha",
    "tenure",
    "stall",
    "max_iters",
    "population",
    "generations",
    "tournament",
    "mutation_probability",
    "variant",
    "weight_gate",
    "test",
}


@dataclass(frozen=True)
class GridConfig:
    spec: GridSpec
    methods: Optional[List[str]] = None
    learners: LearnerSettings = field(default_factory=LearnerSettings)


def learner_settings_from_dict(raw: Mapping[str, Any]) -> LearnerSettings:
    for key in raw:
        if key not in _LEARNER_KEYS:
            raise error.ConfigurationError(f"invalid learner key {key!r}")
    defaults = GaConfig()
    ga = GaConfig(
        population_size=int(raw.get("population", defaults.population_size)),
        generations=int(raw.get("generations", defaults.generations)),
        tournament_size=int(raw.get("tournament", defaults.tournament_size)),
        mutation_probability=float(
            raw.get("mutation_probability", defaults.mutation_probability)
        ),
        variant=GaVariant.from_config_str(
            str(raw.get("variant", defaults.variant.value))
        ),
        weight_gate=bool(raw.get("weight_gate", defaults.weight_gate)),
    )
    tenure = raw.get("tenure")
    return LearnerSettings(
        alpha=float(raw.get("alpha", 0.05)),
        tenure=None if tenure is None else int(tenure),
        stall_limit=int(raw.get("stall", 50)),
        max_iters=int(raw.get("max_iters", 2000)),
        ci_test=CiTest.from_config_str(str(raw.get("test", "auto"))),
        ga=ga,
    )


def grid_config_from_dict(raw: Mapping[str, Any]) -> GridConfig:
    for key in raw:
        if key not in _GRID_KEYS:
            raise error.ConfigurationError(f"invalid key {key!r}")
    try:
        ladders = tuple(
            (int(nodes), tuple(int(s) for s in samples))
            for nodes, samples in sorted(
                dict(raw["ladders"]).items(), key=lambda kv: int(kv[0])
            )
        )
        spec = GridSpec(
            kinds=tuple(
                VarKind.from_config_str(str(k)) for k in raw["kinds"]
            ),
            ladders=ladders,
            densities=tuple(float(d) for d in raw["densities"]),
            noise_rates=tuple(float(r) for r in raw["noise_rates"]),
            replicates=int(raw["replicates"]),
            master_seed=int(raw.get("master_seed", 0)),
        )
    except KeyError as e:
        raise error.ConfigurationError(f"missing key {e.args[0]!r}")
    except (TypeError, ValueError) as e:
        raise error.ConfigurationError(str(e))
    spec.validate()
    methods = raw.get("methods")
    learners = learner_settings_from_dict(raw.get("learners", {}))
    return GridConfig(
        spec,
        None if methods is None else [str(m) for m in methods],
        learners,
    )


def load_grid_config(path: Path) -> GridConfig:
    """read a grid configuration from JSON, or TOML for a .toml suffix."""
    if not path.is_file():
        raise error.MissingFileError(str(path))
    text = path.read_text("utf-8")
    try:
        if path.suffix == ".toml":
            raw = toml.loads(text)
        else:
            raw = json.loads(text)
    except (toml.TomlDecodeError, json.JSONDecodeError) as e:
        raise error.FormatError(str(path), str(e))
    if not isinstance(raw, dict):
        raise error.ConfigurationError(f"invalid config structure in {path}")
    return grid_config_from_dict(raw)


def grid_spec_to_dict(spec: GridSpec) -> Dict[str, Any]:
    return {
        "kinds": [k.to_config_str() for k in spec.kinds],
        "ladders": {
            str(nodes): list(samples) for nodes, samples in spec.ladders
        },
        "densities": list(spec.densities),
        "noise_rates": list(spec.noise_rates),
        "replicates": spec.replicates,
        "master_seed": spec.master_seed,
    }

# Copyright 2026 The catindep Authors
# Use of this source code is governed by a BSD-style license that can be
# found in the LICENSE file.

import dataclasses
import enum
import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional

from .common import ConfigError


class Method(enum.Enum):
    # Asymptotic chi-square reference distribution.
    X2 = "X2"
    G2 = "G2"

    # Fixed-margin permutation reference distribution.
    PERM_G2 = "PermG2"
    PERM_X2 = "PermX2"

    @property
    def is_permutation(self):
        return self in (Method.PERM_G2, Method.PERM_X2)

    @property
    def base(self) -> "Method":
        "The statistic computed by this method, X2 or G2."
        if self == Method.PERM_G2:
            return Method.G2
        if self == Method.PERM_X2:
            return Method.X2
        return self

    @classmethod
    def parse(cls, value: str) -> "Method":
        for method in cls:
            if value.lower() in (method.value.lower(), method.name.lower()):
                return method
        raise ConfigError(f"Unknown method {value!r}, expected one of {[m.value for m in cls]}")


class Distribution(enum.Enum):
    DISCRETE_UNIFORM = "uniform"
    BINOMIAL = "binomial"

    @classmethod
    def parse(cls, value: str) -> "Distribution":
        for distribution in cls:
            if value.lower() == distribution.value:
                return distribution
        raise ConfigError(f"Unknown distribution {value!r}, expected uniform or binomial")


class Experiment(enum.Enum):
    DIFF = "diff"
    TYPE1 = "type1"
    POWER = "power"
    BENCH = "bench"
    TEST = "test"


# Sample size grids of the statistic difference study: up to 1,000 in steps of 20, and from
# 1,000 up to 10,000 in steps of 1,000.
DEFAULT_SMALL_GRID: List[int] = list(range(40, 1001, 20))
DEFAULT_LARGE_GRID: List[int] = list(range(1000, 10001, 1000))
DEFAULT_DIFF_GRID: List[int] = DEFAULT_SMALL_GRID + DEFAULT_LARGE_GRID[1:]

# |X| = |Y| values of the type I error grid; data are drawn with parameter card - 1.
DEFAULT_CARDINALITIES: List[int] = [2, 3, 4, 5]

# Effect sizes of the logistic power alternative.
DEFAULT_B_VALUES: List[int] = [-3, -2, -1, 0, 1, 2, 3]

DEFAULT_SEED = 20190601
DEFAULT_ALPHA = 0.05
DEFAULT_PERMUTATIONS = 999
DEFAULT_COLUMNS = 100
DEFAULT_REPLICATIONS = 1000

# Widening of the binomial standard error of a rejection rate, because the 4950 pairs of one
# matrix share columns and are not independent tests.
DEFAULT_BAND_MULTIPLIER = 1.5

# Timing protocol: median of repetitions after one discarded warm-up run.
BENCH_REPETITIONS = 5

# (n, card) benchmark workloads.
BENCH_CONFIGURATIONS: List[Dict[str, int]] = [
    {"n": 100, "card": 2},
    {"n": 200, "card": 3},
    {"n": 400, "card": 4},
    {"n": 800, "card": 5},
    {"n": 10000, "card": 2},
    {"n": 10000, "card": 3},
    {"n": 10000, "card": 4},
    {"n": 10000, "card": 5},
]

EXPERIMENT_METHODS: Dict[Experiment, List[Method]] = {
    Experiment.DIFF: [Method.X2, Method.G2],
    Experiment.TYPE1: [Method.X2, Method.G2, Method.PERM_G2],
    Experiment.POWER: [Method.X2, Method.G2, Method.PERM_G2],
    Experiment.BENCH: [Method.X2, Method.G2, Method.PERM_G2],
}

# Stable CSV headers. Every report ends with the seed and the configuration hash.
REPORT_COLUMNS: Dict[str, List[str]] = {
    "diff": [
        "n",
        "card",
        "n_cond",
        "mean_diff",
        "n_pairs_computable",
        "n_pairs_incomputable",
        "seed",
        "config_hash",
    ],
    "type1": [
        "n",
        "card",
        "n_cond",
        "method",
        "rejection_rate",
        "size_correct",
        "n_incomputable",
        "seed",
        "config_hash",
    ],
    "power": ["n", "card", "b", "method", "power", "replications", "seed", "config_hash"],
    "bench": ["n", "card", "method", "seconds", "ratio_vs_x2", "seed", "config_hash"],
    "summary": ["n_cond", "card", "method", "size_correct", "grid_points"],
}


def parse_int_list(value: str) -> List[int]:
    """
    Parses a comma separated list of integers.

    >>> parse_int_list("2,3, 4")
    [2, 3, 4]
    >>> parse_int_list("-3,0,3")
    [-3, 0, 3]
    """
    try:
        return [int(part) for part in value.split(",") if part.strip()]
    except ValueError:
        raise ConfigError(f"Not a list of integers: {value!r}")


def parse_grid(value: str) -> List[int]:
    """
    Parses a sample size grid: comma separated sizes and start:stop:step ranges (inclusive).

    >>> parse_grid("40:120:20")
    [40, 60, 80, 100, 120]
    >>> parse_grid("100,200,400")
    [100, 200, 400]
    >>> parse_grid("40:80:20,1000")
    [40, 60, 80, 1000]
    """
    grid: List[int] = []
    for part in value.split(","):
        part = part.strip()
        if ":" not in part:
            grid.extend(parse_int_list(part))
            continue
        bounds = part.split(":")
        if len(bounds) != 3:
            raise ConfigError(f"Grid ranges are start:stop:step, got {part!r}")
        try:
            start, stop, step = (int(b) for b in bounds)
        except ValueError:
            raise ConfigError(f"Grid ranges are integers start:stop:step, got {part!r}")
        if step <= 0:
            raise ConfigError(f"Grid step must be positive, got {step}")
        grid.extend(range(start, stop + 1, step))
    return grid


def parse_methods(value: str) -> List[Method]:
    return [Method.parse(part.strip()) for part in value.split(",") if part.strip()]


def check_grid(name: str, grid: List[int]):
    "Grid values must be positive and strictly increasing."
    if not grid:
        raise ConfigError(f"{name} must not be empty")
    if any(v <= 0 for v in grid):
        raise ConfigError(f"{name} values must be positive: {grid}")
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise ConfigError(f"{name} values must be strictly increasing: {grid}")


@dataclass
class ExperimentConfig(object):
    "Everything a simulation run depends on."

    experiment: Experiment

    # Sample sizes, positive and strictly increasing. Empty selects the default of the experiment.
    sample_sizes: List[int] = field(default_factory=list)

    # |X| = |Y| values.
    cardinalities: List[int] = field(default_factory=lambda: list(DEFAULT_CARDINALITIES))

    distribution: Distribution = Distribution.BINOMIAL

    # Number of conditioning variables, each in {0, 1, 2}.
    n_conditioning: List[int] = field(default_factory=lambda: [0])

    methods: List[Method] = field(default_factory=list)

    alpha: float = DEFAULT_ALPHA
    n_permutations: int = DEFAULT_PERMUTATIONS
    seed: int = DEFAULT_SEED

    # Columns of the simulated matrix, excluding conditioning columns.
    n_columns: int = DEFAULT_COLUMNS

    # Power study only.
    b_values: List[int] = field(default_factory=lambda: list(DEFAULT_B_VALUES))
    replications: int = DEFAULT_REPLICATIONS

    band_multiplier: float = DEFAULT_BAND_MULTIPLIER
    repetitions: int = BENCH_REPETITIONS

    # Not part of the configuration hash: neither changes any reported value.
    workers: int = 1
    out: Optional[Path] = None

    def __post_init__(self):
        if not self.sample_sizes:
            grid = DEFAULT_DIFF_GRID if self.experiment == Experiment.DIFF else DEFAULT_SMALL_GRID
            self.sample_sizes = list(grid)
        if not self.methods:
            self.methods = list(EXPERIMENT_METHODS.get(self.experiment, []))

    def validate(self):
        "Raises ConfigError if the configuration cannot be run."
        check_grid("sample sizes", self.sample_sizes)
        if any(c < 2 for c in self.cardinalities):
            raise ConfigError(f"cardinalities must be at least 2: {self.cardinalities}")
        if any(z < 0 for z in self.n_conditioning):
            raise ConfigError(f"conditioning counts must be >= 0: {self.n_conditioning}")
        if not 0.0 < self.alpha < 1.0:
            raise ConfigError(f"alpha must lie in (0, 1), got {self.alpha}")
        if self.n_permutations < 1:
            raise ConfigError(f"permutations must be >= 1, got {self.n_permutations}")
        if self.n_columns < 2:
            raise ConfigError(f"at least 2 columns are needed, got {self.n_columns}")
        if self.replications < 1:
            raise ConfigError(f"replications must be >= 1, got {self.replications}")
        if self.repetitions < 1:
            raise ConfigError(f"repetitions must be >= 1, got {self.repetitions}")
        if self.workers < 1:
            raise ConfigError(f"workers must be >= 1, got {self.workers}")
        if self.seed < 0:
            raise ConfigError(f"seed must be non-negative, got {self.seed}")
        return self

    def config_hash(self) -> str:
        "Short sha256 of every field that can change a reported value."
        data = dataclasses.asdict(self)
        del data["workers"]
        del data["out"]
        canonical = json.dumps(
            data,
            sort_keys=True,
            default=lambda v: v.value if isinstance(v, enum.Enum) else str(v),
        )
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()[:12]

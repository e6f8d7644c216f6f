# Copyright 2026 The catindep Authors
# Use of this source code is governed by a BSD-style license that can be
# found in the LICENSE file.

"""
Simulation studies and ad-hoc tests from the command line.

Every experiment returns a list of report rows (dicts keyed by the columns in
sim_config.REPORT_COLUMNS) which are written as CSV to --out or to stdout.
"""

import csv
import io
import itertools
import json
import logging
import math
import statistics
import sys
import time
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from . import batch
from .common import ConfigError, InputError, run_commands, verbose, worker_pool
from .contingency import CategoryVector, build_stratified
from .datagen import AlternativeSpec, GenSpec, gen_alternative, gen_null_matrix
from .permutation import PermutationPlan
from .sim_config import (
    BENCH_CONFIGURATIONS,
    BENCH_REPETITIONS,
    DEFAULT_ALPHA,
    DEFAULT_BAND_MULTIPLIER,
    DEFAULT_COLUMNS,
    DEFAULT_PERMUTATIONS,
    DEFAULT_REPLICATIONS,
    DEFAULT_SEED,
    REPORT_COLUMNS,
    Distribution,
    Experiment,
    ExperimentConfig,
    Method,
    parse_grid,
    parse_int_list,
    parse_methods,
)
from .stats_tests import ExpectedCountDiagnostics, TestResult, stratified_diagnostics

logger = logging.getLogger(__name__)

USAGE = """\
Tests of independence for categorical data and the simulation studies comparing them.

Test two columns of a CSV file, optionally conditioning on others:

    $ ./tools/catindep test data.csv --x smoker --y disease --z age_group --method PermG2

Reproduce the simulation studies as CSV reports:

    $ ./tools/catindep sim-diff --sizes 40:1000:20 --out diff.csv
    $ ./tools/catindep sim-type1 --sizes 100,200,400 --conds 0,1,2 --out type1.csv
    $ ./tools/catindep summarize type1.csv
    $ ./tools/catindep sim-power --cards 2,4 --replications 500 --out power.csv
    $ ./tools/catindep bench --out bench.csv

Add --workers N to spread pairs over N processes. Reports do not depend on it.
"""

Row = Dict[str, str]

# Stream tags keeping the random streams of different uses apart.
STREAM_MATRIX = 0
STREAM_PAIR_PERMUTATIONS = 1
STREAM_ALTERNATIVE = 2
STREAM_ALTERNATIVE_PERMUTATIONS = 3


def fmt_rate(value: Optional[float]) -> str:
    return "" if value is None else f"{value:.4f}"


def fmt_seconds(value: float) -> str:
    return f"{value:.6f}"


def fmt_statistic(value: Optional[float]) -> str:
    return "" if value is None else f"{value:.6f}"


def fmt_bool(value: bool) -> str:
    return "true" if value else "false"


def size_band(alpha: float, n_tests: int, multiplier: float) -> Tuple[float, float]:
    """
    Rejection rates inside alpha ± 3·SE·multiplier count as size correct.

    >>> low, high = size_band(0.05, 4950, 1.5)
    >>> round(low, 3), round(high, 3)
    (0.036, 0.064)
    """
    half_width = 3.0 * math.sqrt(alpha * (1.0 - alpha) / max(n_tests, 1)) * multiplier
    return alpha - half_width, alpha + half_width


def is_size_correct(
    rate: Optional[float], alpha: float, n_tests: int, multiplier: float
) -> bool:
    if rate is None:
        return False
    low, high = size_band(alpha, n_tests, multiplier)
    return low <= rate <= high


def write_report(rows: List[Row], columns: List[str], out: Optional[Path]):
    "Writes rows as CSV with a fixed header and LF line endings."
    buffer = io.StringIO()
    writer = csv.DictWriter(buffer, fieldnames=columns, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow(row)
    if out:
        Path(out).write_text(buffer.getvalue(), encoding="utf-8")
    else:
        sys.stdout.write(buffer.getvalue())


def _progress(message: str, *args: object):
    if verbose():
        logger.info(message, *args)
    else:
        sys.stderr.write(".")
        sys.stderr.flush()


def _null_matrix(config: ExperimentConfig, n: int, card: int, n_cond: int):
    spec = GenSpec(
        distribution=config.distribution,
        cardinality_param=card - 1,
        n=n,
        p_columns=config.n_columns + n_cond,
        seed=config.seed,
        stream=(STREAM_MATRIX, n, card, n_cond),
    )
    matrix = gen_null_matrix(spec)
    z_columns = list(range(config.n_columns, config.n_columns + n_cond))
    return matrix, z_columns


def _grid(config: ExperimentConfig):
    for n_cond in config.n_conditioning:
        for card in config.cardinalities:
            for n in config.sample_sizes:
                yield n, card, n_cond


def run_diff(config: ExperimentConfig) -> List[Row]:
    "Mean of G² - X² over the pairs where X² is computable, per grid point."
    config.validate()
    config_hash = config.config_hash()
    rows: List[Row] = []
    for n, card, n_cond in _grid(config):
        matrix, z_columns = _null_matrix(config, n, card, n_cond)
        x2 = batch.all_pairs(matrix, Method.X2, z_columns, workers=config.workers)
        g2 = batch.all_pairs(matrix, Method.G2, z_columns, workers=config.workers)
        differences = [
            g2[pair].statistic - result.statistic  # type: ignore
            for pair, result in sorted(x2.items())
            if result.computable
        ]
        mean = math.fsum(differences) / len(differences) if differences else None
        rows.append(
            {
                "n": str(n),
                "card": str(card),
                "n_cond": str(n_cond),
                "mean_diff": fmt_statistic(mean),
                "n_pairs_computable": str(len(differences)),
                "n_pairs_incomputable": str(len(x2) - len(differences)),
                "seed": str(config.seed),
                "config_hash": config_hash,
            }
        )
        _progress("diff n=%d card=%d n_cond=%d mean=%s", n, card, n_cond, mean)
    return rows


def run_type1(config: ExperimentConfig) -> List[Row]:
    "Rejection rate of every method over all pairwise tests of a null matrix, per grid point."
    config.validate()
    config_hash = config.config_hash()
    rows: List[Row] = []
    for n, card, n_cond in _grid(config):
        matrix, z_columns = _null_matrix(config, n, card, n_cond)
        plan = PermutationPlan(
            n_permutations=config.n_permutations,
            seed=config.seed,
            stream=(STREAM_PAIR_PERMUTATIONS, n, card, n_cond),
        )
        for method in config.methods:
            results = batch.all_pairs(matrix, method, z_columns, plan, workers=config.workers)
            rate = batch.rejection_rate(results, config.alpha)
            size_correct = is_size_correct(
                rate.rate, config.alpha, rate.n_computable, config.band_multiplier
            )
            rows.append(
                {
                    "n": str(n),
                    "card": str(card),
                    "n_cond": str(n_cond),
                    "method": method.value,
                    "rejection_rate": fmt_rate(rate.rate),
                    "size_correct": fmt_bool(size_correct),
                    "n_incomputable": str(rate.n_incomputable),
                    "seed": str(config.seed),
                    "config_hash": config_hash,
                }
            )
            _progress(
                "type1 n=%d card=%d n_cond=%d %s rate=%s", n, card, n_cond, method.value, rate.rate
            )
    return rows


class _PowerJob(object):
    "One replication of the power study for every method, picklable for the worker pool."

    def __init__(self, spec: AlternativeSpec, methods: List[Method], plan: PermutationPlan):
        self.spec = spec
        self.methods = methods
        self.plan = plan

    def __call__(self, replication: int) -> List[TestResult]:
        x, y = gen_alternative(self.spec, replication)
        plan = self.plan._replace(stream=(*self.plan.stream, replication))
        return [batch.run_test(x, y, [], method, plan) for method in self.methods]


def effect_stream_id(b: int) -> int:
    """
    Maps the signed effect b to a non-negative stream id.

    >>> [effect_stream_id(b) for b in (-2, -1, 0, 1, 2)]
    [3, 1, 0, 2, 4]
    """
    return 2 * b if b >= 0 else -2 * b - 1


def run_power(config: ExperimentConfig) -> List[Row]:
    "Rejection proportion under the logistic alternative for every (b, n, method)."
    config.validate()
    config_hash = config.config_hash()
    rows: List[Row] = []
    replications = range(config.replications)
    with worker_pool(config.workers) as pool:
        for card, b, n in itertools.product(
            config.cardinalities, config.b_values, config.sample_sizes
        ):
            stream = (card, effect_stream_id(b), n)
            spec = AlternativeSpec(
                b=b,
                cardinality=card,
                n=n,
                seed=config.seed,
                replications=config.replications,
                stream=(STREAM_ALTERNATIVE, *stream),
            )
            plan = PermutationPlan(
                n_permutations=config.n_permutations,
                seed=config.seed,
                stream=(STREAM_ALTERNATIVE_PERMUTATIONS, *stream),
            )
            job = _PowerJob(spec, config.methods, plan)
            outcomes = list(pool.imap(job, replications) if pool else map(job, replications))
            for index, method in enumerate(config.methods):
                rate = batch.rejection_rate([o[index] for o in outcomes], config.alpha)
                rows.append(
                    {
                        "n": str(n),
                        "card": str(card),
                        "b": str(b),
                        "method": method.value,
                        "power": fmt_rate(rate.rate),
                        "replications": str(config.replications),
                        "seed": str(config.seed),
                        "config_hash": config_hash,
                    }
                )
            _progress("power card=%d b=%d n=%d", card, b, n)
    return rows


def time_all_pairs(
    config: ExperimentConfig, matrix: batch.DataMatrix, method: Method, plan: PermutationPlan
) -> float:
    "Median wall-clock seconds of all pairwise tests, after one discarded warm-up run."
    batch.all_pairs(matrix, method, [], plan, workers=config.workers)
    durations: List[float] = []
    for _ in range(config.repetitions):
        start_time = time.perf_counter()
        batch.all_pairs(matrix, method, [], plan, workers=config.workers)
        durations.append(time.perf_counter() - start_time)
    return statistics.median(durations)


def run_bench(
    config: ExperimentConfig, configurations: Optional[Sequence[Tuple[int, int]]] = None
) -> List[Row]:
    "Seconds for all pairwise tests per method and (n, card), with ratios against X²."
    config.validate()
    config_hash = config.config_hash()
    if configurations is None:
        configurations = [(c["n"], c["card"]) for c in BENCH_CONFIGURATIONS if c["n"] <= 1000]
    rows: List[Row] = []
    for n, card in configurations:
        matrix, _ = _null_matrix(config, n, card, 0)
        plan = PermutationPlan(n_permutations=config.n_permutations, seed=config.seed)
        timings = {
            method: time_all_pairs(config, matrix, method, plan) for method in config.methods
        }
        reference = timings.get(Method.X2)
        for method, seconds in timings.items():
            ratio = seconds / reference if reference else None
            rows.append(
                {
                    "n": str(n),
                    "card": str(card),
                    "method": method.value,
                    "seconds": fmt_seconds(seconds),
                    "ratio_vs_x2": "" if ratio is None else f"{ratio:.4f}",
                    "seed": str(config.seed),
                    "config_hash": config_hash,
                }
            )
        _progress("bench n=%d card=%d", n, card)
    return rows


def run_summary(rows: List[Row]) -> List[Row]:
    """
    Number of size-correct grid points out of all grid points per (n_cond, card, method), plus
    totals over the cardinalities of every (n_cond, method).
    """
    counts: Dict[Tuple[int, int, str], List[int]] = {}
    for row in rows:
        try:
            key = (int(row["n_cond"]), int(row["card"]), row["method"])
            correct = row["size_correct"] == "true"
        except (KeyError, ValueError):
            raise InputError(f"Not a type1 report row: {row}")
        tally = counts.setdefault(key, [0, 0])
        tally[0] += int(correct)
        tally[1] += 1

    summary: List[Row] = []
    totals: Dict[Tuple[int, str], List[int]] = {}
    for (n_cond, card, method), (correct, total) in sorted(counts.items()):
        summary.append(_summary_row(str(n_cond), str(card), method, correct, total))
        tally = totals.setdefault((n_cond, method), [0, 0])
        tally[0] += correct
        tally[1] += total
    for (n_cond, method), (correct, total) in sorted(totals.items()):
        summary.append(_summary_row(str(n_cond), "all", method, correct, total))
    return summary


def _summary_row(n_cond: str, card: str, method: str, correct: int, total: int) -> Row:
    return {
        "n_cond": n_cond,
        "card": card,
        "method": method,
        "size_correct": str(correct),
        "grid_points": str(total),
    }


def encode_labels(labels: Sequence[str], name: str) -> Tuple[CategoryVector, List[str]]:
    """
    Codes labels by their lexicographic order.

    >>> vector, levels = encode_labels(["b", "a", "b"], "x")
    >>> vector.codes.tolist(), levels
    ([1, 0, 1], ['a', 'b'])
    """
    levels = sorted(set(labels))
    if not levels:
        raise InputError(f"Column {name!r} has no observations")
    index = {level: code for code, level in enumerate(levels)}
    codes = np.array([index[label] for label in labels], dtype=np.int64)
    return CategoryVector.from_codes(codes, len(levels)), levels


def read_csv_columns(csv_path: Path, names: Sequence[str]) -> Dict[str, List[str]]:
    "Reads the requested columns of a headed, comma separated UTF-8 file, with or without BOM."
    try:
        with open(csv_path, newline="", encoding="utf-8-sig") as file:
            reader = csv.reader(file)
            header = next(reader, None)
            if header is None:
                raise InputError(f"{csv_path} is empty, a header row is required")
            header = [h.strip() for h in header]
            missing = [name for name in names if name not in header]
            if missing:
                raise ConfigError(f"Unknown column(s) {missing}, {csv_path} has {header}")
            positions = {name: header.index(name) for name in names}
            columns: Dict[str, List[str]] = {name: [] for name in names}
            for line, record in enumerate(reader, start=2):
                if not record:
                    continue
                if len(record) != len(header):
                    raise InputError(
                        f"{csv_path}:{line} has {len(record)} fields, expected {len(header)}"
                    )
                for name, position in positions.items():
                    columns[name].append(record[position].strip())
    except (OSError, UnicodeDecodeError, csv.Error) as e:
        raise InputError(f"Cannot read {csv_path}: {e}")
    return columns


def run_single_test(
    csv_path: Path,
    x_col: str,
    y_col: str,
    z_cols: Sequence[str],
    method: Method,
    plan: Optional[PermutationPlan] = None,
    workers: int = 1,
):
    "Tests two CSV columns given the z columns. Returns the result and the diagnostics."
    if x_col in z_cols or y_col in z_cols:
        raise ConfigError("The tested columns cannot also be conditioning columns")
    columns = read_csv_columns(csv_path, [x_col, y_col, *z_cols])
    x, x_levels = encode_labels(columns[x_col], x_col)
    y, y_levels = encode_labels(columns[y_col], y_col)
    for name, levels in ((x_col, x_levels), (y_col, y_levels)):
        if len(levels) < 2:
            raise InputError(f"Column {name!r} takes a single value {levels}, nothing to test")
    z = [encode_labels(columns[name], name)[0] for name in z_cols]
    result = batch.run_test(x, y, z, method, plan, workers)
    diagnostics = stratified_diagnostics(build_stratified(x, y, z))
    return result, diagnostics


def result_json(
    result: TestResult, diagnostics: ExpectedCountDiagnostics, alpha: float = DEFAULT_ALPHA
) -> str:
    "One JSON object with the result, the decision at alpha and the expected count diagnostics."
    return json.dumps(
        {
            **result.to_json(),
            "alpha": alpha,
            "rejected": is_rejected(result, alpha),
            "diagnostics": {
                **diagnostics._asdict(),
                "rule_of_thumb_ok": diagnostics.rule_of_thumb_ok,
            },
        },
        sort_keys=True,
    )


def is_rejected(result: TestResult, alpha: float) -> Optional[bool]:
    "p <= alpha, or None when the statistic is not computable."
    if result.p_value is None:
        return None
    return result.p_value <= alpha


def _config(
    experiment: Experiment,
    sizes: str,
    cards: str,
    conds: str = "0",
    distribution: str = "binomial",
    methods: str = "",
    out: Optional[str] = None,
    **fields: Any,
) -> ExperimentConfig:
    "Builds the configuration of a sub-command from its flag values."
    return ExperimentConfig(
        experiment=experiment,
        sample_sizes=parse_grid(sizes),
        cardinalities=parse_int_list(cards),
        distribution=Distribution.parse(distribution),
        n_conditioning=parse_int_list(conds),
        methods=parse_methods(methods) if methods else [],
        out=Path(out) if out else None,
        **fields,
    )


### Command line entry points


def test(
    csv_path: str,
    x: str = "",
    y: str = "",
    z: str = "",
    method: str = "X2",
    alpha: float = DEFAULT_ALPHA,
    perms: int = DEFAULT_PERMUTATIONS,
    seed: int = DEFAULT_SEED,
    raw_pvalue: bool = False,
    workers: int = 1,
    json: bool = False,
    out: Optional[str] = None,
):
    """
    Tests independence of columns x and y of a CSV file, conditioning on the comma separated z.

    Labels are coded in lexicographic order. Permutation replicates are shared by `workers`
    threads. The report goes to --out, or stdout.
    """
    if not x or not y:
        raise ConfigError("Both --x and --y columns are required")
    ExperimentConfig(
        Experiment.TEST, alpha=alpha, n_permutations=perms, seed=seed, workers=workers
    ).validate()
    z_cols = [name.strip() for name in z.split(",") if name.strip()]
    plan = PermutationPlan(n_permutations=perms, seed=seed, add_one=not raw_pvalue)
    result, diagnostics = run_single_test(
        Path(csv_path), x, y, z_cols, Method.parse(method), plan, workers
    )
    if json:
        lines = [result_json(result, diagnostics, alpha)]
    else:
        given = f" | {', '.join(z_cols)}" if z_cols else ""
        lines = [f"{result.method.value} test of {x} vs {y}{given}"]
        if result.computable:
            lines.append(f"  statistic: {result.statistic:.6f}")
        else:
            lines.append("  statistic: not computable (zero row or column total)")
        lines.append(f"  dof:       {result.dof}")
        lines.append(f"  p-value:   {'' if result.p_value is None else f'{result.p_value:.6g}'}")
        rejected = is_rejected(result, alpha)
        if rejected is not None:
            lines.append(f"  reject at alpha={alpha:g}: {'yes' if rejected else 'no'}")
        lines.append(
            f"  expected counts: {diagnostics.fraction_below_5:.0%} of cells below 5, "
            f"minimum {diagnostics.min_expected:.3g}"
        )
    text = "\n".join(lines) + "\n"
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def sim_diff(
    sizes: str = "40:1000:20,2000:10000:1000",
    cards: str = "2,3,4,5",
    conds: str = "0,1,2",
    distribution: str = "binomial",
    columns: int = DEFAULT_COLUMNS,
    seed: int = DEFAULT_SEED,
    workers: int = 1,
    out: Optional[str] = None,
):
    "Average difference G² - X² against the sample size."
    config = _config(
        Experiment.DIFF,
        sizes,
        cards,
        conds,
        distribution,
        out=out,
        n_columns=columns,
        seed=seed,
        workers=workers,
    )
    write_report(run_diff(config), REPORT_COLUMNS["diff"], config.out)


def sim_type1(
    sizes: str = "40:1000:20",
    cards: str = "2,3,4,5",
    conds: str = "0,1,2",
    distribution: str = "binomial",
    methods: str = "X2,G2,PermG2",
    alpha: float = DEFAULT_ALPHA,
    perms: int = DEFAULT_PERMUTATIONS,
    columns: int = DEFAULT_COLUMNS,
    band: float = DEFAULT_BAND_MULTIPLIER,
    seed: int = DEFAULT_SEED,
    workers: int = 1,
    out: Optional[str] = None,
):
    "Estimated type I error of each method over all pairwise tests of null matrices."
    config = _config(
        Experiment.TYPE1,
        sizes,
        cards,
        conds,
        distribution,
        methods,
        out,
        alpha=alpha,
        n_permutations=perms,
        n_columns=columns,
        band_multiplier=band,
        seed=seed,
        workers=workers,
    )
    write_report(run_type1(config), REPORT_COLUMNS["type1"], config.out)


def sim_power(
    sizes: str = "100,200,400,600,800,1000",
    cards: str = "2,4",
    b_values: str = "-3,-2,-1,0,1,2,3",
    methods: str = "X2,G2,PermG2",
    replications: int = DEFAULT_REPLICATIONS,
    alpha: float = DEFAULT_ALPHA,
    perms: int = DEFAULT_PERMUTATIONS,
    seed: int = DEFAULT_SEED,
    workers: int = 1,
    out: Optional[str] = None,
):
    "Estimated power under the logistic alternative for each effect b, against the sample size."
    config = _config(
        Experiment.POWER,
        sizes,
        cards,
        methods=methods,
        out=out,
        b_values=parse_int_list(b_values),
        replications=replications,
        alpha=alpha,
        n_permutations=perms,
        seed=seed,
        workers=workers,
    )
    write_report(run_power(config), REPORT_COLUMNS["power"], config.out)


def bench(
    configs: str = "100x2,200x3,400x4,800x5",
    methods: str = "X2,G2,PermG2",
    perms: int = DEFAULT_PERMUTATIONS,
    repetitions: int = BENCH_REPETITIONS,
    columns: int = DEFAULT_COLUMNS,
    seed: int = DEFAULT_SEED,
    workers: int = 1,
    out: Optional[str] = None,
):
    """
    Times all pairwise tests per method for each n x card configuration.

    Workloads with n = 10000, e.g. "10000x2,10000x5", run for hours with PermG2.
    """
    configurations = _parse_bench_configs(configs)
    config = _config(
        Experiment.BENCH,
        ",".join(str(n) for n in sorted({n for n, _ in configurations})),
        ",".join(str(c) for c in sorted({c for _, c in configurations})),
        methods=methods,
        out=out,
        n_permutations=perms,
        repetitions=repetitions,
        n_columns=columns,
        seed=seed,
        workers=workers,
    )
    write_report(run_bench(config, configurations), REPORT_COLUMNS["bench"], config.out)


def _parse_bench_configs(value: str) -> List[Tuple[int, int]]:
    """
    >>> _parse_bench_configs("100x2, 10000x5")
    [(100, 2), (10000, 5)]
    """
    configurations: List[Tuple[int, int]] = []
    for part in value.split(","):
        if not part.strip():
            continue
        try:
            n, card = part.strip().lower().split("x")
            configurations.append((int(n), int(card)))
        except ValueError:
            raise ConfigError(f"Benchmark configurations look like 100x2, got {part!r}")
    if not configurations:
        raise ConfigError("No benchmark configuration given")
    return configurations


def summarize(csv_path: str, out: Optional[str] = None):
    "Counts the size-correct grid points of a sim-type1 report per cardinality and method."
    try:
        with open(csv_path, newline="", encoding="utf-8") as file:
            rows = list(csv.DictReader(file))
    except (OSError, UnicodeDecodeError, csv.Error) as e:
        raise InputError(f"Cannot read {csv_path}: {e}")
    write_report(run_summary(rows), REPORT_COLUMNS["summary"], Path(out) if out else None)


def main(argv: Optional[List[str]] = None):
    run_commands(test, sim_diff, sim_type1, sim_power, bench, summarize, usage=USAGE, argv=argv)


if __name__ == "__main__":
    main()

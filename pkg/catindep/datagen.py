# Copyright 2026 The catindep Authors
# Use of this source code is governed by a BSD-style license that can be
# found in the LICENSE file.

"""
Seedable data generators for the simulation studies.

Every stream is a numpy Philox (counter-based) generator keyed by a seed and a tuple of
non-negative stream ids, so any grid point, pair or replication can be regenerated on its own
and in any worker.
"""

from typing import NamedTuple, Tuple, Union

import numpy as np

from .common import InputError
from .contingency import CategoryVector, DataMatrix
from .sim_config import Distribution

StreamId = Union[int, Tuple[int, ...]]


def rng_stream(seed: int, stream_id: StreamId = ()) -> "np.random.Generator":
    """
    Deterministic generator for (seed, stream_id).

    >>> a = rng_stream(7, (1, 2)).integers(0, 100, 5)
    >>> b = rng_stream(7, (1, 2)).integers(0, 100, 5)
    >>> bool((a == b).all())
    True
    """
    key = (stream_id,) if isinstance(stream_id, int) else tuple(stream_id)
    if seed < 0 or any(k < 0 for k in key):
        raise InputError(f"Seeds and stream ids must be non-negative, got {seed}, {key}")
    sequence = np.random.SeedSequence(seed, spawn_key=key)
    return np.random.Generator(np.random.Philox(sequence))


class GenSpec(NamedTuple):
    """An n x p matrix of i.i.d. draws on {0, ..., i}."""

    distribution: Distribution
    # Values lie in {0..i}, so the cardinality is i + 1.
    cardinality_param: int
    n: int
    p_columns: int
    seed: int
    stream: Tuple[int, ...] = ()

    def validate(self):
        if self.cardinality_param < 1:
            raise InputError(f"Generator parameter i must be >= 1, got {self.cardinality_param}")
        if self.n < 1 or self.p_columns < 1:
            raise InputError(f"Matrix must be at least 1 x 1, got {self.n} x {self.p_columns}")
        return self


class AlternativeSpec(NamedTuple):
    """Logistic-link dependence between X and Y with effect b."""

    b: int
    # |X| = |Y| as used in the Bin(|X|, 0.5) formula, the tables have |X| + 1 levels.
    cardinality: int
    n: int
    seed: int
    replications: int = 1000
    stream: Tuple[int, ...] = ()


def draw(
    rng: "np.random.Generator", distribution: Distribution, i: int, size: Tuple[int, ...]
) -> "np.ndarray":
    if distribution == Distribution.DISCRETE_UNIFORM:
        return rng.integers(0, i + 1, size=size, dtype=np.int64)
    return rng.binomial(i, 0.5, size=size).astype(np.int64)


def gen_null_matrix(spec: GenSpec) -> DataMatrix:
    "Mutually independent columns of i.i.d. draws, uniform on {0..i} or Bin(i, 0.5)."
    spec.validate()
    rng = rng_stream(spec.seed, spec.stream)
    values = draw(rng, spec.distribution, spec.cardinality_param, (spec.p_columns, spec.n))
    cardinality = spec.cardinality_param + 1
    return DataMatrix([CategoryVector.from_codes(column, cardinality) for column in values])


def success_probabilities(b: int, x: "np.ndarray") -> "np.ndarray":
    """
    p_i = exp(-sign(b) + b x_i) / (1 + exp(-sign(b) + b x_i)), with sign(0) = 0.

    >>> success_probabilities(0, np.array([0, 1, 2])).tolist()
    [0.5, 0.5, 0.5]
    >>> round(float(success_probabilities(3, np.array([1]))[0]), 4)
    0.8808
    """
    eta = -np.sign(b) + b * np.asarray(x, dtype=np.float64)
    return 1.0 / (1.0 + np.exp(-eta))


def gen_alternative(spec: AlternativeSpec, replication: int = 0):
    """
    One (x, y) sample of the power study.

    x ~ Bin(|X|, 0.5) and y ~ Bin(|Y|, p_i) with the logistic p_i of x_i.
    """
    if spec.cardinality < 1:
        raise InputError(f"Cardinality must be >= 1, got {spec.cardinality}")
    if spec.n < 1:
        raise InputError(f"Sample size must be >= 1, got {spec.n}")
    rng = rng_stream(spec.seed, (*spec.stream, replication))
    x = rng.binomial(spec.cardinality, 0.5, size=spec.n).astype(np.int64)
    y = rng.binomial(spec.cardinality, success_probabilities(spec.b, x)).astype(np.int64)
    levels = spec.cardinality + 1
    return CategoryVector.from_codes(x, levels), CategoryVector.from_codes(y, levels)

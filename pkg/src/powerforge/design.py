"""Experiment structure: variables, counterbalancing, and trial tables.

A design is up to two within-subject independent variables crossed into
k conditions. Trial tables assign each participant an ordering of the k
conditions (repeated r times in consecutive blocks) according to the
chosen counterbalancing strategy. All generation is a pure function of
(design, seed).
"""

from __future__ import annotations

import csv
import itertools
import math
from dataclasses import dataclass, field, replace
from enum import Enum
from functools import lru_cache
from typing import IO, Iterator

import numpy as np

from .errors import InvalidMetadata

Condition = tuple[str, ...]

MAX_IVS = 2

# All k! orderings are materialized up to this k; beyond it the complete
# strategy samples distinct orderings instead (k! exceeds any feasible n).
_FULL_ENUMERATION_MAX_K = 7


class Direction(str, Enum):
    LOWER_IS_BETTER = "lower_is_better"
    HIGHER_IS_BETTER = "higher_is_better"


class Strategy(str, Enum):
    COMPLETE = "complete"
    LATIN_SQUARE = "latin_square"
    RANDOM = "random"


@dataclass(frozen=True)
class IndependentVariable:
    name: str
    levels: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "levels", tuple(self.levels))
        if len(self.levels) < 2:
            raise InvalidMetadata(f"variable {self.name!r} needs at least 2 levels")
        if len(set(self.levels)) != len(self.levels):
            raise InvalidMetadata(f"variable {self.name!r} has duplicate levels")


@dataclass(frozen=True)
class DependentVariableMeta:
    name: str
    unit: str
    range_min: float
    range_max: float
    direction: Direction
    variability: float

    def __post_init__(self):
        object.__setattr__(self, "direction", Direction(self.direction))
        if not self.range_min < self.range_max:
            raise InvalidMetadata("expected range must satisfy min < max")
        if self.variability <= 0:
            raise InvalidMetadata("variability must be positive")

    @property
    def midpoint(self) -> float:
        return (self.range_min + self.range_max) / 2.0


@dataclass(frozen=True)
class ExperimentDesign:
    ivs: tuple[IndependentVariable, ...]
    dv: DependentVariableMeta
    strategy: Strategy
    replications: int
    participants: int

    def __post_init__(self):
        object.__setattr__(self, "ivs", tuple(self.ivs))
        object.__setattr__(self, "strategy", Strategy(self.strategy))
        if not 1 <= len(self.ivs) <= MAX_IVS:
            raise InvalidMetadata("designs support 1 or 2 within-subject variables")
        names = [iv.name for iv in self.ivs]
        if len(set(names)) != len(names):
            raise InvalidMetadata("variable names must be unique")
        if self.replications < 1:
            raise InvalidMetadata("replications must be >= 1")
        if self.participants < 2:
            raise InvalidMetadata("participants must be >= 2")

    @property
    def conditions(self) -> tuple[Condition, ...]:
        return enumerate_conditions(self)

    @property
    def condition_count(self) -> int:
        return math.prod(len(iv.levels) for iv in self.ivs)

    @property
    def trials_per_participant(self) -> int:
        return self.condition_count * self.replications

    def iv_named(self, name: str) -> IndependentVariable:
        for iv in self.ivs:
            if iv.name == name:
                return iv
        raise InvalidMetadata(f"no variable named {name!r}")

    def with_participants(self, n: int) -> "ExperimentDesign":
        return replace(self, participants=n)

    def with_replications(self, r: int) -> "ExperimentDesign":
        return replace(self, replications=r)


@dataclass(frozen=True, eq=False)
class TrialTable:
    """Per-participant orderings of condition indices, shape (n, k*r)."""

    design: ExperimentDesign
    order: np.ndarray

    @property
    def participants(self) -> int:
        return self.order.shape[0]

    def rows(self) -> Iterator[tuple[int, int, Condition]]:
        conditions = self.design.conditions
        for p in range(self.order.shape[0]):
            for t in range(self.order.shape[1]):
                yield p, t, conditions[self.order[p, t]]

    def participant_sequence(self, p: int) -> np.ndarray:
        return self.order[p]

    def write_csv(self, fh: IO[str]) -> None:
        writer = csv.writer(fh)
        writer.writerow(["participant", "trial_index"] + [iv.name for iv in self.design.ivs])
        for p, t, cond in self.rows():
            writer.writerow([p, t, *cond])


@dataclass(frozen=True)
class BalanceWarning:
    code: str
    message: str
    details: tuple = field(default_factory=tuple)


def enumerate_conditions(design: ExperimentDesign) -> tuple[Condition, ...]:
    """Row-major cross product of the IV levels, in declaration order."""
    return tuple(itertools.product(*(iv.levels for iv in design.ivs)))


def required_participant_multiple(design: ExperimentDesign) -> int:
    """Smallest participant count that keeps the strategy balanced."""
    k = design.condition_count
    if design.strategy is Strategy.COMPLETE:
        return math.factorial(k)
    if design.strategy is Strategy.LATIN_SQUARE:
        return k if k % 2 == 0 else 2 * k
    return 1


def balanced_latin_square(k: int) -> np.ndarray:
    """Williams design: k rows for even k, 2k rows (square + mirrors) for odd k.

    Every row and column is a permutation of 0..k-1. For even k each ordered
    adjacency occurs exactly once across rows; for odd k the mirrored rows
    bring every ordered adjacency to exactly two occurrences.
    """
    if k < 2:
        raise InvalidMetadata("a Latin square needs k >= 2")
    first = [((j + 1) // 2) if j % 2 else ((k - j // 2) % k) for j in range(k)]
    rows = [[(cell + i) % k for cell in first] for i in range(k)]
    if k % 2 == 1:
        rows += [list(reversed(row)) for row in rows]
    return np.array(rows, dtype=np.intp)


@lru_cache(maxsize=64)
def _base_orderings(k: int, strategy: Strategy) -> tuple[tuple[int, ...], ...] | None:
    if strategy is Strategy.LATIN_SQUARE:
        return tuple(tuple(row) for row in balanced_latin_square(k))
    if strategy is Strategy.COMPLETE:
        if k > _FULL_ENUMERATION_MAX_K:
            return None
        return tuple(itertools.permutations(range(k)))
    return None


def _participant_orderings(design: ExperimentDesign, n: int, rng: np.random.Generator) -> np.ndarray:
    k = design.condition_count
    if design.strategy is Strategy.RANDOM:
        return np.array([rng.permutation(k) for _ in range(n)], dtype=np.intp)
    orderings = _base_orderings(k, design.strategy)
    if orderings is None:
        # k! is astronomically larger than n here; sample distinct orderings.
        seen: set[tuple[int, ...]] = set()
        picked: list[tuple[int, ...]] = []
        while len(picked) < n:
            cand = tuple(int(v) for v in rng.permutation(k))
            if cand not in seen:
                seen.add(cand)
                picked.append(cand)
        return np.array(picked, dtype=np.intp)
    pool = np.array(orderings, dtype=np.intp)
    assignment = rng.permutation(len(pool))
    return pool[assignment[np.arange(n) % len(pool)]]


def _generate_order(design: ExperimentDesign, n: int, rng: np.random.Generator) -> np.ndarray:
    base = _participant_orderings(design, n, rng)
    # The base ordering repeats r times as consecutive blocks.
    return np.tile(base, (1, design.replications))


def generate_trial_table(
    design: ExperimentDesign, seed: int, participants: int | None = None
) -> TrialTable:
    """Deterministic trial table for (design, seed).

    ``participants`` overrides the design's count (used by sample-size sweeps).
    """
    n = design.participants if participants is None else participants
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    order = _generate_order(design, n, rng)
    return TrialTable(design.with_participants(n), order)


def validate_balance(design: ExperimentDesign, table: TrialTable) -> list[BalanceWarning]:
    """Non-fatal balance checks for a generated table."""
    warnings: list[BalanceWarning] = []
    n = table.participants
    multiple = required_participant_multiple(design)
    if n % multiple != 0:
        warnings.append(
            BalanceWarning(
                "participant_multiple",
                f"{n} participants is not a multiple of {multiple} required by "
                f"{design.strategy.value} counterbalancing",
            )
        )
    k = design.condition_count
    r = design.replications
    # Occurrences of each condition at each within-block ordinal position.
    counts = np.zeros((k, k), dtype=int)
    positions = np.tile(np.arange(k), r)
    for p in range(n):
        np.add.at(counts, (table.order[p], positions), 1)
    expected = n * r / k
    deviations = tuple(
        (design.conditions[c], int(pos), int(counts[c, pos]))
        for c in range(k)
        for pos in range(k)
        if counts[c, pos] != expected
    )
    if deviations:
        warnings.append(
            BalanceWarning(
                "position_imbalance",
                "condition-position occurrence counts are uneven across participants",
                deviations,
            )
        )
    return warnings

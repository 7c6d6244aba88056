"""Monte Carlo generation of experiment datasets.

response(i, t) = cell_mean(condition) + b_i + confound_offset(t) + eps

with b_i ~ Normal(0, participant_sd^2) once per participant and
eps ~ Normal(0, residual_sd^2) per trial. Batches split the master seed
per dataset index with numpy SeedSequence spawn keys, so any subrange of
a batch can be generated independently (and in parallel) with identical
results.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import IO, Iterator

import numpy as np

from .design import Condition, Direction, ExperimentDesign, _generate_order
from .effects import ConfoundSpec
from .errors import InvalidMetadata, MissingCellMean


@dataclass(frozen=True)
class PopulationModel:
    design: ExperimentDesign
    cell_means: dict[Condition, float]
    confounds: ConfoundSpec
    participant_sd: float
    residual_sd: float
    direction: Direction = Direction.LOWER_IS_BETTER

    def __post_init__(self):
        if self.residual_sd <= 0:
            raise InvalidMetadata("residual SD must be > 0")
        if self.participant_sd < 0:
            raise InvalidMetadata("participant SD must be >= 0")
        for cond in self.design.conditions:
            if cond not in self.cell_means:
                raise MissingCellMean(f"no mean for condition {cond!r}")

    @classmethod
    def from_components(
        cls,
        design: ExperimentDesign,
        cell_means: dict[Condition, float],
        confounds: ConfoundSpec,
    ) -> "PopulationModel":
        """Build a model taking both SDs from the confound spec."""
        return cls(
            design=design,
            cell_means=dict(cell_means),
            confounds=confounds,
            participant_sd=confounds.participant_sd,
            residual_sd=confounds.residual_sd,
            direction=design.dv.direction,
        )

    def mean_vector(self) -> np.ndarray:
        return np.array([self.cell_means[c] for c in self.design.conditions], dtype=float)


@dataclass(frozen=True, eq=False)
class SimulatedDataset:
    design: ExperimentDesign
    order: np.ndarray
    responses: np.ndarray
    participant_offsets: np.ndarray
    seed: int
    index: int

    @property
    def participants(self) -> int:
        return self.responses.shape[0]

    @property
    def trials_per_participant(self) -> int:
        return self.responses.shape[1]

    def rows(self) -> Iterator[tuple[int, int, Condition, float]]:
        conditions = self.design.conditions
        for p in range(self.responses.shape[0]):
            for t in range(self.responses.shape[1]):
                yield p, t, conditions[self.order[p, t]], float(self.responses[p, t])

    def write_csv(self, fh: IO[str]) -> None:
        writer = csv.writer(fh)
        writer.writerow(
            ["participant", "trial_index"] + [iv.name for iv in self.design.ivs] + ["response"]
        )
        for p, t, cond, resp in self.rows():
            writer.writerow([p, t, *cond, repr(resp)])


@dataclass(frozen=True, eq=False)
class SimulationBatch:
    datasets: tuple[SimulatedDataset, ...]
    count: int
    master_seed: int


def split_seed(master_seed: int, index: int) -> np.random.SeedSequence:
    """Order-independent per-dataset sub-seed."""
    return np.random.SeedSequence(master_seed, spawn_key=(index,))


def derive_seed(master_seed: int, *key: int) -> int:
    """A fresh integer seed for a named sub-stream (curve points, frames)."""
    ss = np.random.SeedSequence(master_seed, spawn_key=tuple(key))
    return int(ss.generate_state(1, np.uint64)[0])


def confound_matrix(
    order: np.ndarray, spec: ConfoundSpec, direction: Direction
) -> np.ndarray:
    """Vectorized per-participant confound offsets, shape like ``order``.

    Row p equals effects.confound_contribution(order[p], spec, direction).
    """
    n, total = order.shape
    t = np.arange(total, dtype=float)
    base = (
        spec.fatigue_per_trial * t
        + spec.carryover_magnitude * spec.carryover_decay**t
        + spec.practice_whole_experiment * t
    )
    offsets = np.broadcast_to(base, (n, total)).copy()
    if spec.practice_within_condition != 0.0:
        occ = np.zeros_like(order)
        for c in range(int(order.max()) + 1):
            mask = order == c
            occ[mask] = (np.cumsum(mask, axis=1) - 1)[mask]
        offsets += spec.practice_within_condition * occ
    sign = 1.0 if direction is Direction.LOWER_IS_BETTER else -1.0
    return sign * offsets


def simulate_dataset(
    model: PopulationModel, n: int, seed: "int | np.random.SeedSequence", index: int = 0
) -> SimulatedDataset:
    """One Monte Carlo draw of a complete experiment with n participants.

    ``seed`` is an integer or a SeedSequence produced by split_seed; the
    result is a pure function of (model, n, seed).
    """
    if n < 2:
        raise InvalidMetadata("a within-subject experiment needs n >= 2")
    if isinstance(seed, np.random.SeedSequence):
        ss = seed
        seed_label = int(ss.entropy) if isinstance(ss.entropy, int) else 0
    else:
        ss = np.random.SeedSequence(seed)
        seed_label = int(seed)
    rng = np.random.default_rng(ss)
    design_n = model.design.with_participants(n)
    order = _generate_order(design_n, n, rng)
    baseline = model.mean_vector()[order]
    if not model.confounds.is_zero():
        baseline = baseline + confound_matrix(order, model.confounds, model.direction)
    b = rng.standard_normal(n) * model.participant_sd
    eps = rng.standard_normal(order.shape) * model.residual_sd
    responses = baseline + b[:, None] + eps
    return SimulatedDataset(
        design=design_n,
        order=order,
        responses=responses,
        participant_offsets=b,
        seed=seed_label,
        index=index,
    )


def simulate_batch(model: PopulationModel, n: int, count: int, master_seed: int) -> SimulationBatch:
    """``count`` mutually independent datasets; see iter_batch for streaming."""
    if count < 1:
        raise InvalidMetadata("batch count must be >= 1")
    datasets = tuple(iter_batch(model, n, master_seed, range(count)))
    return SimulationBatch(datasets=datasets, count=count, master_seed=master_seed)


def iter_batch(
    model: PopulationModel, n: int, master_seed: int, indices
) -> Iterator[SimulatedDataset]:
    """Generate any subrange of a batch; results depend only on the indices."""
    for j in indices:
        yield simulate_dataset(model, n, split_seed(master_seed, j), index=j)

"""Lockable mean hierarchy and confound models.

The mean tree stores values at condition leaves only; the grand mean and
the per-level group means of the current axis variable are derived views.
Locked internal nodes report the value pinned at lock time, so locks are
stable under floating-point redistribution.

Moving a node propagates its delta downward (evenly across unlocked
children, scaled so the moved node lands on target) and then upward
(recomputing parents; a locked parent pushes the opposite delta onto the
node's unlocked siblings). Any move that cannot be realized is rejected
atomically: the returned tree is untouched.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, replace

import numpy as np

from .design import (
    Condition,
    DependentVariableMeta,
    Direction,
    ExperimentDesign,
    IndependentVariable,
    enumerate_conditions,
    generate_trial_table,
)
from .errors import InvalidMetadata, RejectedMove, UnknownNode

# Node references: ("grand",) | ("group", level) | ("cond", level, ...)
NodeRef = tuple

GRAND: NodeRef = ("grand",)


def group_node(level: str) -> NodeRef:
    return ("group", level)


def condition_node(*levels: str) -> NodeRef:
    return ("cond", *levels)


def _conditions_for(ivs: tuple[IndependentVariable, ...]) -> tuple[Condition, ...]:
    return tuple(itertools.product(*(iv.levels for iv in ivs)))


@dataclass(frozen=True)
class MeanTree:
    ivs: tuple[IndependentVariable, ...]
    axis_iv: str
    values: tuple[float, ...]
    locks: tuple[bool, ...]
    group_locks: tuple[bool, ...]
    grand_locked: bool
    group_pins: tuple[float | None, ...]
    grand_pin: float | None

    @classmethod
    def initial(
        cls, ivs: tuple[IndependentVariable, ...], value: float, axis_iv: str | None = None
    ) -> "MeanTree":
        ivs = tuple(ivs)
        axis = axis_iv if axis_iv is not None else ivs[0].name
        k = len(_conditions_for(ivs))
        n_groups = cls._group_count(ivs, axis)
        return cls(
            ivs=ivs,
            axis_iv=axis,
            values=(float(value),) * k,
            locks=(False,) * k,
            group_locks=(False,) * n_groups,
            grand_locked=False,
            group_pins=(None,) * n_groups,
            grand_pin=None,
        )

    # -- structure ---------------------------------------------------------

    @staticmethod
    def _group_count(ivs, axis_iv) -> int:
        # A single-IV tree has no group tier: groups would alias the leaves.
        if len(ivs) < 2:
            return 0
        for iv in ivs:
            if iv.name == axis_iv:
                return len(iv.levels)
        raise UnknownNode(f"no variable named {axis_iv!r}")

    @property
    def conditions(self) -> tuple[Condition, ...]:
        return _conditions_for(self.ivs)

    @property
    def has_groups(self) -> bool:
        return len(self.ivs) >= 2

    @property
    def axis_levels(self) -> tuple[str, ...]:
        for iv in self.ivs:
            if iv.name == self.axis_iv:
                return iv.levels
        raise UnknownNode(f"no variable named {self.axis_iv!r}")

    def _axis_index(self) -> int:
        for i, iv in enumerate(self.ivs):
            if iv.name == self.axis_iv:
                return i
        raise UnknownNode(f"no variable named {self.axis_iv!r}")

    def _group_leaf_indices(self, gi: int) -> list[int]:
        ai = self._axis_index()
        level = self.axis_levels[gi]
        return [i for i, c in enumerate(self.conditions) if c[ai] == level]

    # -- values ------------------------------------------------------------

    def grand_mean(self) -> float:
        if self.grand_locked and self.grand_pin is not None:
            return self.grand_pin
        return float(np.mean(self.values))

    def group_mean(self, level: str) -> float:
        gi = self._group_index(level)
        if self.group_locks[gi] and self.group_pins[gi] is not None:
            return self.group_pins[gi]
        idx = self._group_leaf_indices(gi)
        return float(np.mean([self.values[i] for i in idx]))

    def cell_means(self) -> dict[Condition, float]:
        return dict(zip(self.conditions, self.values))

    def derived_group_means(self, iv_name: str) -> dict[str, float]:
        """Read-only per-level means for any IV, whether or not it is the axis."""
        for i, iv in enumerate(self.ivs):
            if iv.name == iv_name:
                return {
                    level: float(
                        np.mean([v for c, v in zip(self.conditions, self.values) if c[i] == level])
                    )
                    for level in iv.levels
                }
        raise UnknownNode(f"no variable named {iv_name!r}")

    def _group_index(self, level: str) -> int:
        if not self.has_groups:
            raise UnknownNode("single-variable trees have no group nodes")
        try:
            return self.axis_levels.index(level)
        except ValueError:
            raise UnknownNode(f"no {self.axis_iv} level named {level!r}") from None

    def _leaf_index(self, levels: tuple[str, ...]) -> int:
        try:
            return self.conditions.index(tuple(levels))
        except ValueError:
            raise UnknownNode(f"no condition {levels!r}") from None

    def node_value(self, node: NodeRef) -> float:
        kind = node[0]
        if kind == "grand":
            return self.grand_mean()
        if kind == "group":
            return self.group_mean(node[1])
        if kind == "cond":
            return self.values[self._leaf_index(node[1:])]
        raise UnknownNode(f"bad node reference {node!r}")

    def node_locked(self, node: NodeRef) -> bool:
        kind = node[0]
        if kind == "grand":
            return self.grand_locked
        if kind == "group":
            return self.group_locks[self._group_index(node[1])]
        if kind == "cond":
            return self.locks[self._leaf_index(node[1:])]
        raise UnknownNode(f"bad node reference {node!r}")

    # -- propagation -------------------------------------------------------

    def _children(self, node: NodeRef) -> list[NodeRef]:
        kind = node[0]
        if kind == "grand":
            if self.has_groups:
                return [("group", level) for level in self.axis_levels]
            return [("cond", *c) for c in self.conditions]
        if kind == "group":
            gi = self._group_index(node[1])
            return [("cond", *self.conditions[i]) for i in self._group_leaf_indices(gi)]
        return []

    def _parent(self, node: NodeRef) -> NodeRef | None:
        kind = node[0]
        if kind == "grand":
            return None
        if kind == "group":
            return GRAND
        if not self.has_groups:
            return GRAND
        ai = self._axis_index()
        return ("group", node[1:][ai])

    def _push_down(self, work: list[float], node: NodeRef, delta: float) -> None:
        if node[0] == "cond":
            work[self._leaf_index(node[1:])] += delta
            return
        children = self._children(node)
        unlocked = [c for c in children if not self.node_locked(c)]
        if not unlocked:
            raise RejectedMove("all children of the moved node are locked")
        child_delta = delta * len(children) / len(unlocked)
        for child in unlocked:
            self._push_down(work, child, child_delta)

    def _push_up(self, work: list[float], node: NodeRef, delta: float) -> None:
        parent = self._parent(node)
        if parent is None:
            return
        siblings = [c for c in self._children(parent) if c != node]
        if self.node_locked(parent):
            unlocked = [s for s in siblings if not self.node_locked(s)]
            if not unlocked:
                raise RejectedMove("parent and all siblings are locked: no propagation")
            compensation = -delta / len(unlocked)
            for sib in unlocked:
                self._push_down(work, sib, compensation)
            return
        self._push_up(work, parent, delta / (len(siblings) + 1))

    def set_mean(self, node: NodeRef, new_value: float) -> "MeanTree":
        """Move a node to ``new_value``, redistributing per the lock rules.

        Raises RejectedMove without modifying anything when the target is
        locked or no redistribution can realize the move.
        """
        if self.node_locked(node):
            raise RejectedMove("cannot move a locked node")
        delta = float(new_value) - self.node_value(node)
        if delta == 0.0:
            return self
        work = list(self.values)
        self._push_down(work, node, delta)
        self._push_up(work, node, delta)
        return replace(self, values=tuple(work))

    def toggle_lock(self, node: NodeRef) -> "MeanTree":
        """Flip a node's lock; values are unchanged.

        Locking an internal node pins its current derived value so later
        redistribution cannot wiggle it by rounding.
        """
        kind = node[0]
        if kind == "grand":
            now = not self.grand_locked
            return replace(
                self, grand_locked=now, grand_pin=self.grand_mean() if now else None
            )
        if kind == "group":
            gi = self._group_index(node[1])
            locks = list(self.group_locks)
            pins = list(self.group_pins)
            locks[gi] = not locks[gi]
            pins[gi] = self.group_mean(node[1]) if locks[gi] else None
            return replace(self, group_locks=tuple(locks), group_pins=tuple(pins))
        if kind == "cond":
            li = self._leaf_index(node[1:])
            locks = list(self.locks)
            locks[li] = not locks[li]
            return replace(self, locks=tuple(locks))
        raise UnknownNode(f"bad node reference {node!r}")

    def switch_axis(self, iv_name: str) -> "MeanTree":
        """Regroup by another IV. Condition means survive; every lock clears."""
        n_groups = self._group_count(self.ivs, iv_name)
        return replace(
            self,
            axis_iv=iv_name,
            locks=(False,) * len(self.values),
            group_locks=(False,) * n_groups,
            grand_locked=False,
            group_pins=(None,) * n_groups,
            grand_pin=None,
        )


# -- confounds ---------------------------------------------------------------

SLIDER_BOUND_FACTOR = 3.0
SLIDER_STEPS = 60


@dataclass(frozen=True)
class ConfoundSpec:
    """Signed confound magnitudes in DV units plus the noise SDs."""

    fatigue_per_trial: float = 0.0
    carryover_magnitude: float = 0.0
    carryover_decay: float = 0.5
    practice_within_condition: float = 0.0
    practice_whole_experiment: float = 0.0
    participant_sd: float = 0.0
    residual_sd: float = 1.0

    def __post_init__(self):
        if self.fatigue_per_trial < 0 or self.carryover_magnitude < 0:
            raise InvalidMetadata("fatigue and carry-over magnitudes must be >= 0")
        if not 0.0 < self.carryover_decay < 1.0:
            raise InvalidMetadata("carry-over decay must lie in (0, 1)")
        if self.practice_within_condition > 0 or self.practice_whole_experiment > 0:
            raise InvalidMetadata("practice effects must be <= 0 (toward better)")
        if self.participant_sd < 0:
            raise InvalidMetadata("participant variability must be >= 0")
        if self.residual_sd <= 0:
            raise InvalidMetadata("residual SD must be > 0")

    @classmethod
    def zero(cls, residual_sd: float) -> "ConfoundSpec":
        return cls(residual_sd=residual_sd)

    def is_zero(self) -> bool:
        return (
            self.fatigue_per_trial == 0
            and self.carryover_magnitude == 0
            and self.practice_within_condition == 0
            and self.practice_whole_experiment == 0
        )


@dataclass(frozen=True)
class SliderRange:
    confound: str
    lo: float
    hi: float
    step: float


def slider_ranges(dv: DependentVariableMeta) -> list[SliderRange]:
    """Slider bounds derived from the DV's rough variability estimate.

    The bound is 3x the variability; zero is always attainable, and the
    "worse"/"better" orientation of each effect follows the DV direction
    when contributions are applied (see confound_contribution).
    """
    bound = SLIDER_BOUND_FACTOR * dv.variability
    step = bound / SLIDER_STEPS
    return [
        SliderRange("fatigue_per_trial", 0.0, bound, step),
        SliderRange("carryover_magnitude", 0.0, bound, step),
        SliderRange("practice_within_condition", -bound, 0.0, step),
        SliderRange("practice_whole_experiment", -bound, 0.0, step),
        SliderRange("participant_sd", 0.0, bound, step),
    ]


def occurrence_counts(sequence: np.ndarray) -> np.ndarray:
    """occ[t] = number of earlier trials with the same condition."""
    seq = np.asarray(sequence)
    occ = np.zeros(seq.shape[0], dtype=np.intp)
    for c in np.unique(seq):
        mask = seq == c
        occ[mask] = np.arange(int(mask.sum()))
    return occ


def confound_contribution(
    sequence: np.ndarray,
    spec: ConfoundSpec,
    direction: Direction = Direction.LOWER_IS_BETTER,
) -> np.ndarray:
    """Deterministic per-trial additive offsets for one participant.

    offset(t) = s * ( fatigue*t + carryover*decay^t
                      + practice_within*occ(t) + practice_whole*t )

    with s = +1 when lower DV values are better (so "worse" raises the
    response) and s = -1 when higher values are better.
    """
    seq = np.asarray(sequence)
    if seq.size == 0:
        raise InvalidMetadata("trial sequence must be nonempty")
    t = np.arange(seq.shape[0], dtype=float)
    offsets = (
        spec.fatigue_per_trial * t
        + spec.carryover_magnitude * spec.carryover_decay**t
        + spec.practice_whole_experiment * t
    )
    if spec.practice_within_condition != 0.0:
        offsets = offsets + spec.practice_within_condition * occurrence_counts(seq)
    sign = 1.0 if direction is Direction.LOWER_IS_BETTER else -1.0
    return sign * offsets


def confound_preview(
    design: ExperimentDesign,
    spec: ConfoundSpec,
    cell_means: dict[Condition, float],
    seed: int,
) -> list[tuple[int, Condition, float]]:
    """Expected per-trial responses for the first participant, noise-free."""
    table = generate_trial_table(design, seed)
    row = table.participant_sequence(0)
    offsets = confound_contribution(row, spec, design.dv.direction)
    conditions = enumerate_conditions(design)
    return [
        (t, conditions[ci], float(cell_means[conditions[ci]] + offsets[t]))
        for t, ci in enumerate(row)
    ]

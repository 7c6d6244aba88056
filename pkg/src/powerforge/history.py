"""Exploration history: a tree of restorable parameter snapshots.

Every committed adjustment appends a child of the current node; restoring
an older node and committing again branches the tree. Snapshots are full
copies, so any node restores without touching its ancestors. Consecutive
identical snapshots are debounced into a single node.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any

from .design import Strategy
from .effects import ConfoundSpec
from .errors import UnknownNode
from .stats import LevelPair


@dataclass(frozen=True)
class Snapshot:
    axis_iv: str
    mean_values: tuple[float, ...]
    mean_locks: tuple[bool, ...]
    group_locks: tuple[bool, ...]
    grand_locked: bool
    confounds: ConfoundSpec
    strategy: Strategy
    replications: int
    participants: int
    pairwise_pairs: tuple[LevelPair, ...]
    summary_power: float


@dataclass
class HistoryNode:
    id: int
    parent: int | None
    snapshot: Snapshot
    marked: bool = False
    depth: int = 0


@dataclass(frozen=True)
class SnapshotDiff:
    mean_changes: tuple[tuple[int, float, float], ...]
    lock_changes: tuple[tuple[str, bool, bool], ...]
    axis_change: tuple[str, str] | None
    confound_changes: tuple[tuple[str, float, float], ...]
    design_changes: tuple[tuple[str, Any, Any], ...]
    pairwise_selection_changed: bool
    power_pair: tuple[float, float]

    @property
    def empty(self) -> bool:
        return (
            not self.mean_changes
            and not self.lock_changes
            and self.axis_change is None
            and not self.confound_changes
            and not self.design_changes
            and not self.pairwise_selection_changed
            and self.power_pair[0] == self.power_pair[1]
        )


class HistoryTree:
    """Single-writer history for one session."""

    def __init__(self, root_snapshot: Snapshot):
        root = HistoryNode(id=0, parent=None, snapshot=root_snapshot)
        self._nodes: dict[int, HistoryNode] = {0: root}
        self._next_id = 1
        self.current_id = 0

    @property
    def root_id(self) -> int:
        return 0

    def node(self, node_id: int) -> HistoryNode:
        try:
            return self._nodes[node_id]
        except KeyError:
            raise UnknownNode(f"no history node {node_id}") from None

    def nodes(self) -> list[HistoryNode]:
        return list(self._nodes.values())

    def children(self, node_id: int) -> list[int]:
        self.node(node_id)
        return [n.id for n in self._nodes.values() if n.parent == node_id]

    def record(self, snapshot: Snapshot) -> int:
        """Append a child of the current node; identical states debounce."""
        current = self.node(self.current_id)
        if snapshot == current.snapshot:
            return current.id
        node = HistoryNode(
            id=self._next_id,
            parent=current.id,
            snapshot=snapshot,
            depth=current.depth + 1,
        )
        self._nodes[node.id] = node
        self._next_id += 1
        self.current_id = node.id
        return node.id

    def restore(self, node_id: int) -> Snapshot:
        """Move the current pointer and hand back the node's snapshot.

        The caller applies it to every view except the power-trade-off
        selection, which stays with the session.
        """
        node = self.node(node_id)
        self.current_id = node.id
        return node.snapshot

    def set_mark(self, node_id: int, marked: bool) -> None:
        self.node(node_id).marked = bool(marked)

    def preview_diff(self, current_id: int, hover_id: int) -> SnapshotDiff:
        """Field-by-field delta between exactly two nodes."""
        a = self.node(current_id).snapshot
        b = self.node(hover_id).snapshot
        mean_changes = tuple(
            (i, va, vb) for i, (va, vb) in enumerate(zip(a.mean_values, b.mean_values)) if va != vb
        )
        lock_changes = []
        for i, (la, lb) in enumerate(zip(a.mean_locks, b.mean_locks)):
            if la != lb:
                lock_changes.append((f"cond:{i}", la, lb))
        for i, (la, lb) in enumerate(zip(a.group_locks, b.group_locks)):
            if la != lb:
                lock_changes.append((f"group:{i}", la, lb))
        if a.grand_locked != b.grand_locked:
            lock_changes.append(("grand", a.grand_locked, b.grand_locked))
        confound_changes = tuple(
            (name, getattr(a.confounds, name), getattr(b.confounds, name))
            for name in (
                "fatigue_per_trial",
                "carryover_magnitude",
                "carryover_decay",
                "practice_within_condition",
                "practice_whole_experiment",
                "participant_sd",
                "residual_sd",
            )
            if getattr(a.confounds, name) != getattr(b.confounds, name)
        )
        design_changes = tuple(
            (name, getattr(a, name), getattr(b, name))
            for name in ("strategy", "replications", "participants")
            if getattr(a, name) != getattr(b, name)
        )
        return SnapshotDiff(
            mean_changes=mean_changes,
            lock_changes=tuple(lock_changes),
            axis_change=(a.axis_iv, b.axis_iv) if a.axis_iv != b.axis_iv else None,
            confound_changes=confound_changes,
            design_changes=design_changes,
            pairwise_selection_changed=a.pairwise_pairs != b.pairwise_pairs,
            power_pair=(a.summary_power, b.summary_power),
        )

    # -- serialization ------------------------------------------------------

    def to_json_obj(self) -> dict:
        return {
            "current": self.current_id,
            "nodes": [
                {
                    "id": n.id,
                    "parent": n.parent,
                    "marked": n.marked,
                    "depth": n.depth,
                    "snapshot": _snapshot_to_json(n.snapshot),
                }
                for n in self._nodes.values()
            ],
        }

    @classmethod
    def from_json_obj(cls, obj: dict) -> "HistoryTree":
        nodes = sorted(obj["nodes"], key=lambda n: n["id"])
        if not nodes or nodes[0]["parent"] is not None:
            raise UnknownNode("history must contain a parentless root")
        tree = cls.__new__(cls)
        tree._nodes = {}
        for raw in nodes:
            tree._nodes[raw["id"]] = HistoryNode(
                id=raw["id"],
                parent=raw["parent"],
                snapshot=_snapshot_from_json(raw["snapshot"]),
                marked=raw["marked"],
                depth=raw["depth"],
            )
        tree._next_id = max(tree._nodes) + 1
        tree.current_id = obj["current"]
        tree.node(tree.current_id)
        return tree


def _snapshot_to_json(s: Snapshot) -> dict:
    return {
        "axis_iv": s.axis_iv,
        "mean_values": list(s.mean_values),
        "mean_locks": list(s.mean_locks),
        "group_locks": list(s.group_locks),
        "grand_locked": s.grand_locked,
        "confounds": {
            "fatigue_per_trial": s.confounds.fatigue_per_trial,
            "carryover_magnitude": s.confounds.carryover_magnitude,
            "carryover_decay": s.confounds.carryover_decay,
            "practice_within_condition": s.confounds.practice_within_condition,
            "practice_whole_experiment": s.confounds.practice_whole_experiment,
            "participant_sd": s.confounds.participant_sd,
            "residual_sd": s.confounds.residual_sd,
        },
        "strategy": s.strategy.value,
        "replications": s.replications,
        "participants": s.participants,
        "pairwise_pairs": [[p.iv, p.a, p.b] for p in s.pairwise_pairs],
        "summary_power": s.summary_power,
    }


def _snapshot_from_json(obj: dict) -> Snapshot:
    return Snapshot(
        axis_iv=obj["axis_iv"],
        mean_values=tuple(float(v) for v in obj["mean_values"]),
        mean_locks=tuple(bool(v) for v in obj["mean_locks"]),
        group_locks=tuple(bool(v) for v in obj["group_locks"]),
        grand_locked=bool(obj["grand_locked"]),
        confounds=ConfoundSpec(**obj["confounds"]),
        strategy=Strategy(obj["strategy"]),
        replications=int(obj["replications"]),
        participants=int(obj["participants"]),
        pairwise_pairs=tuple(LevelPair(*p) for p in obj["pairwise_pairs"]),
        summary_power=float(obj["summary_power"]),
    )

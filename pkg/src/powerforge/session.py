"""Session state, update dispatch, and file persistence.

A session bundles the design, the mean tree, the confound spec, the
history tree, and the simulation settings. Updates arrive as plain dicts
(from the HTTP API or a replay log), are validated, and either mutate the
session or raise a coded error without side effects. Documents serialize
to canonical JSON (sorted keys, repr floats) so save -> load -> save is
byte-identical and update-log replay is reproducible.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from typing import Any

from .design import (
    BalanceWarning,
    DependentVariableMeta,
    ExperimentDesign,
    IndependentVariable,
    Strategy,
    generate_trial_table,
    validate_balance,
)
from .effects import ConfoundSpec, MeanTree, NodeRef, slider_ranges
from .errors import InvalidMetadata, InvalidUpdate
from .history import HistoryTree, Snapshot
from .simulate import PopulationModel
from .stats import Axis, LevelPair, all_pairs, analytic_cohens_d, min_power_pair, noncentral_t_power

DOCUMENT_VERSION = 1

_CONFOUND_FIELDS = (
    "fatigue_per_trial",
    "carryover_magnitude",
    "carryover_decay",
    "practice_within_condition",
    "practice_whole_experiment",
    "participant_sd",
    "residual_sd",
)


@dataclass
class TradeoffSelection:
    mode: str = "min_power"  # "pair" | "min_power"
    pair: LevelPair | None = None
    axis: Axis = Axis.PARTICIPANTS


@dataclass
class Settings:
    k_datasets: int = 1000
    alpha: float = 0.05
    seed: int = 0
    x_lo: int = 6
    x_hi: int = 50


@dataclass
class Session:
    design: ExperimentDesign
    tree: MeanTree
    confounds: ConfoundSpec
    history: HistoryTree
    pairwise_pairs: tuple[LevelPair, ...]
    tradeoff: TradeoffSelection
    settings: Settings
    extra: dict = field(default_factory=dict)

    @property
    def dv(self) -> DependentVariableMeta:
        return self.design.dv

    def population_model(self) -> PopulationModel:
        return PopulationModel.from_components(
            self.design, self.tree.cell_means(), self.confounds
        )

    def curve_range(self) -> list[int]:
        return list(range(self.settings.x_lo, self.settings.x_hi + 1))

    def tradeoff_pair(self) -> LevelPair:
        if self.tradeoff.mode == "pair" and self.tradeoff.pair is not None:
            return self.tradeoff.pair
        model = self.population_model()
        return min_power_pair(
            model, all_pairs(self.design), self.design.participants, self.settings.alpha
        ).pair

    def summary_power(self) -> float:
        model = self.population_model()
        d = analytic_cohens_d(model, self.tradeoff_pair())
        return noncentral_t_power(d, self.design.participants, self.settings.alpha)

    def snapshot(self) -> Snapshot:
        return Snapshot(
            axis_iv=self.tree.axis_iv,
            mean_values=self.tree.values,
            mean_locks=self.tree.locks,
            group_locks=self.tree.group_locks,
            grand_locked=self.tree.grand_locked,
            confounds=self.confounds,
            strategy=self.design.strategy,
            replications=self.design.replications,
            participants=self.design.participants,
            pairwise_pairs=self.pairwise_pairs,
            summary_power=self.summary_power(),
        )

    def apply_snapshot(self, snap: Snapshot) -> None:
        """Restore everything except the power-trade-off selection."""
        self.design = replace(
            self.design,
            strategy=snap.strategy,
            replications=snap.replications,
            participants=snap.participants,
        )
        base = MeanTree.initial(self.design.ivs, 0.0, axis_iv=snap.axis_iv)
        tree = replace(base, values=snap.mean_values)
        for i, locked in enumerate(snap.mean_locks):
            if locked:
                tree = tree.toggle_lock(("cond", *tree.conditions[i]))
        for i, locked in enumerate(snap.group_locks):
            if locked:
                tree = tree.toggle_lock(("group", tree.axis_levels[i]))
        if snap.grand_locked:
            tree = tree.toggle_lock(("grand",))
        self.tree = tree
        self.confounds = snap.confounds
        self.pairwise_pairs = snap.pairwise_pairs


def create_session(
    dv_meta: DependentVariableMeta,
    ivs: tuple[IndependentVariable, ...],
    strategy: Strategy = Strategy.LATIN_SQUARE,
    replications: int = 1,
    participants: int = 12,
) -> Session:
    """Fresh session: cells at the range midpoint, zero confounds, rooted history."""
    design = ExperimentDesign(
        ivs=tuple(ivs),
        dv=dv_meta,
        strategy=strategy,
        replications=replications,
        participants=participants,
    )
    tree = MeanTree.initial(design.ivs, dv_meta.midpoint)
    confounds = ConfoundSpec.zero(residual_sd=dv_meta.variability)
    session = Session(
        design=design,
        tree=tree,
        confounds=confounds,
        history=None,  # type: ignore[arg-type]  # set right below
        pairwise_pairs=tuple(all_pairs(design)),
        tradeoff=TradeoffSelection(),
        settings=Settings(),
    )
    session.history = HistoryTree(session.snapshot())
    return session


# -- update dispatch -----------------------------------------------------------


def _node_from_json(obj: Any) -> NodeRef:
    if not isinstance(obj, dict) or "kind" not in obj:
        raise InvalidUpdate("node must be an object with a 'kind'")
    kind = obj["kind"]
    if kind == "grand":
        return ("grand",)
    if kind == "group":
        return ("group", str(obj["level"]))
    if kind == "condition":
        return ("cond", *[str(v) for v in obj["levels"]])
    raise InvalidUpdate(f"unknown node kind {kind!r}")


def node_to_json(node: NodeRef) -> dict:
    if node[0] == "grand":
        return {"kind": "grand"}
    if node[0] == "group":
        return {"kind": "group", "level": node[1]}
    return {"kind": "condition", "levels": list(node[1:])}


def _pair_from_json(obj: Any, design: ExperimentDesign) -> LevelPair:
    if not isinstance(obj, dict):
        raise InvalidUpdate("pair must be an object {iv, a, b}")
    pair = LevelPair(str(obj["iv"]), str(obj["a"]), str(obj["b"]))
    iv = design.iv_named(pair.iv)
    if pair.a not in iv.levels or pair.b not in iv.levels:
        raise InvalidUpdate(f"pair {pair.label()} names unknown levels")
    return pair


def _require_number(update: dict, key: str) -> float:
    if key not in update or not isinstance(update[key], (int, float)) or isinstance(
        update[key], bool
    ):
        raise InvalidUpdate(f"update needs numeric field {key!r}")
    return float(update[key])


def apply_update(session: Session, update: dict) -> list[BalanceWarning]:
    """Validate and apply one update; commit-flagged updates record history.

    Returns balance warnings for design changes (never errors on imbalance).
    """
    if not isinstance(update, dict) or "op" not in update:
        raise InvalidUpdate("update must be an object with an 'op'")
    op = update["op"]
    warnings: list[BalanceWarning] = []

    if op == "set_mean":
        node = _node_from_json(update.get("node"))
        session.tree = session.tree.set_mean(node, _require_number(update, "value"))
    elif op == "toggle_lock":
        node = _node_from_json(update.get("node"))
        session.tree = session.tree.toggle_lock(node)
    elif op == "switch_axis":
        iv = update.get("iv")
        session.design.iv_named(str(iv))
        session.tree = session.tree.switch_axis(str(iv))
    elif op == "set_confound":
        field_name = update.get("field")
        if field_name not in _CONFOUND_FIELDS:
            raise InvalidUpdate(f"unknown confound field {field_name!r}")
        value = _require_number(update, "value")
        _check_slider_bounds(session.dv, str(field_name), value)
        session.confounds = replace(session.confounds, **{str(field_name): value})
    elif op == "set_design":
        design = session.design
        if "strategy" in update:
            try:
                design = replace(design, strategy=Strategy(update["strategy"]))
            except ValueError:
                raise InvalidUpdate(f"unknown strategy {update['strategy']!r}") from None
        if "replications" in update:
            design = design.with_replications(int(update["replications"]))
        if "participants" in update:
            design = design.with_participants(int(update["participants"]))
        session.design = design
        table = generate_trial_table(design, session.settings.seed)
        warnings = validate_balance(design, table)
    elif op == "select_pairwise":
        pairs = update.get("pairs")
        if not isinstance(pairs, list) or not pairs:
            raise InvalidUpdate("select_pairwise needs a nonempty 'pairs' list")
        session.pairwise_pairs = tuple(_pair_from_json(p, session.design) for p in pairs)
    elif op == "select_tradeoff":
        mode = update.get("mode", session.tradeoff.mode)
        if mode not in ("pair", "min_power"):
            raise InvalidUpdate(f"unknown trade-off mode {mode!r}")
        pair = session.tradeoff.pair
        if mode == "pair":
            pair = _pair_from_json(update.get("pair"), session.design)
        axis = Axis(update.get("axis", session.tradeoff.axis))
        session.tradeoff = TradeoffSelection(mode=mode, pair=pair, axis=axis)
    elif op == "set_settings":
        s = session.settings
        k = int(update.get("k", s.k_datasets))
        alpha = float(update.get("alpha", s.alpha))
        seed = int(update.get("seed", s.seed))
        x_lo = int(update.get("x_lo", s.x_lo))
        x_hi = int(update.get("x_hi", s.x_hi))
        if k < 100:
            raise InvalidUpdate("k must be >= 100")
        if not 0.0 < alpha < 1.0:
            raise InvalidUpdate("alpha must lie in (0, 1)")
        if seed < 0:
            raise InvalidUpdate("seed must be >= 0")
        if not 2 <= x_lo <= x_hi:
            raise InvalidUpdate("need 2 <= x_lo <= x_hi")
        session.settings = Settings(k, alpha, seed, x_lo, x_hi)
    else:
        raise InvalidUpdate(f"unknown update op {op!r}")

    if update.get("commit", False):
        session.history.record(session.snapshot())
    return warnings


def _check_slider_bounds(dv: DependentVariableMeta, field_name: str, value: float) -> None:
    if field_name == "carryover_decay":
        if not 0.0 < value < 1.0:
            raise InvalidUpdate("carry-over decay must lie in (0, 1)")
        return
    if field_name == "residual_sd":
        if value <= 0:
            raise InvalidUpdate("residual SD must be > 0")
        return
    for srange in slider_ranges(dv):
        if srange.confound == field_name:
            if not srange.lo <= value <= srange.hi:
                raise InvalidUpdate(
                    f"{field_name} must lie in [{srange.lo}, {srange.hi}]"
                )
            return


def restore_node(session: Session, node_id: int) -> None:
    """History restore; trade-off selections stay as they are."""
    snap = session.history.restore(node_id)
    session.apply_snapshot(snap)


# -- persistence ---------------------------------------------------------------


def canonical_json_bytes(obj: Any) -> bytes:
    text = json.dumps(obj, sort_keys=True, separators=(",", ":"), allow_nan=False)
    return (text + "\n").encode("utf-8")


def session_to_document(session: Session) -> dict:
    doc = {
        "version": DOCUMENT_VERSION,
        "dv_meta": {
            "name": session.dv.name,
            "unit": session.dv.unit,
            "range_min": session.dv.range_min,
            "range_max": session.dv.range_max,
            "direction": session.dv.direction.value,
            "variability": session.dv.variability,
        },
        "ivs": [{"name": iv.name, "levels": list(iv.levels)} for iv in session.design.ivs],
        "design": {
            "strategy": session.design.strategy.value,
            "replications": session.design.replications,
            "participants": session.design.participants,
        },
        "mean_tree": {
            "axis_iv": session.tree.axis_iv,
            "leaves": [
                {"condition": list(cond), "value": value, "locked": locked}
                for cond, value, locked in zip(
                    session.tree.conditions, session.tree.values, session.tree.locks
                )
            ],
            "group_locks": list(session.tree.group_locks),
            "grand_locked": session.tree.grand_locked,
        },
        "confounds": {name: getattr(session.confounds, name) for name in _CONFOUND_FIELDS},
        "history": session.history.to_json_obj(),
        "settings": {
            "k": session.settings.k_datasets,
            "alpha": session.settings.alpha,
            "seed": session.settings.seed,
            "x_lo": session.settings.x_lo,
            "x_hi": session.settings.x_hi,
            "tradeoff": {
                "mode": session.tradeoff.mode,
                "pair": (
                    [session.tradeoff.pair.iv, session.tradeoff.pair.a, session.tradeoff.pair.b]
                    if session.tradeoff.pair is not None
                    else None
                ),
                "axis": session.tradeoff.axis.value,
            },
            "pairwise_pairs": [[p.iv, p.a, p.b] for p in session.pairwise_pairs],
        },
    }
    doc.update(session.extra)
    return doc


_KNOWN_DOC_FIELDS = {
    "version",
    "dv_meta",
    "ivs",
    "design",
    "mean_tree",
    "confounds",
    "history",
    "settings",
}


def session_from_document(doc: dict) -> Session:
    if not isinstance(doc, dict):
        raise InvalidMetadata("session document must be a JSON object")
    if doc.get("version") != DOCUMENT_VERSION:
        raise InvalidMetadata(f"unsupported document version {doc.get('version')!r}")
    try:
        dv_raw = doc["dv_meta"]
        dv = DependentVariableMeta(
            name=dv_raw["name"],
            unit=dv_raw["unit"],
            range_min=float(dv_raw["range_min"]),
            range_max=float(dv_raw["range_max"]),
            direction=dv_raw["direction"],
            variability=float(dv_raw["variability"]),
        )
        ivs = tuple(
            IndependentVariable(raw["name"], tuple(raw["levels"])) for raw in doc["ivs"]
        )
        design = ExperimentDesign(
            ivs=ivs,
            dv=dv,
            strategy=Strategy(doc["design"]["strategy"]),
            replications=int(doc["design"]["replications"]),
            participants=int(doc["design"]["participants"]),
        )
        tree_raw = doc["mean_tree"]
        base = MeanTree.initial(ivs, 0.0, axis_iv=tree_raw["axis_iv"])
        by_condition = {
            tuple(leaf["condition"]): (float(leaf["value"]), bool(leaf["locked"]))
            for leaf in tree_raw["leaves"]
        }
        values = []
        locks = []
        for cond in base.conditions:
            if cond not in by_condition:
                raise InvalidMetadata(f"mean tree misses condition {cond!r}")
            value, locked = by_condition[cond]
            values.append(value)
            locks.append(locked)
        tree = replace(base, values=tuple(values))
        for i, locked in enumerate(locks):
            if locked:
                tree = tree.toggle_lock(("cond", *tree.conditions[i]))
        for i, locked in enumerate(tree_raw["group_locks"]):
            if locked:
                tree = tree.toggle_lock(("group", tree.axis_levels[i]))
        if tree_raw["grand_locked"]:
            tree = tree.toggle_lock(("grand",))
        confounds = ConfoundSpec(**{k: float(v) for k, v in doc["confounds"].items()})
        history = HistoryTree.from_json_obj(doc["history"])
        settings_raw = doc["settings"]
        tradeoff_raw = settings_raw["tradeoff"]
        tradeoff = TradeoffSelection(
            mode=tradeoff_raw["mode"],
            pair=LevelPair(*tradeoff_raw["pair"]) if tradeoff_raw["pair"] else None,
            axis=Axis(tradeoff_raw["axis"]),
        )
        session = Session(
            design=design,
            tree=tree,
            confounds=confounds,
            history=history,
            pairwise_pairs=tuple(LevelPair(*p) for p in settings_raw["pairwise_pairs"]),
            tradeoff=tradeoff,
            settings=Settings(
                k_datasets=int(settings_raw["k"]),
                alpha=float(settings_raw["alpha"]),
                seed=int(settings_raw["seed"]),
                x_lo=int(settings_raw["x_lo"]),
                x_hi=int(settings_raw["x_hi"]),
            ),
            extra={k: v for k, v in doc.items() if k not in _KNOWN_DOC_FIELDS},
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidMetadata(f"malformed session document: {exc}") from exc
    return session


def save_session(session: Session, path: str) -> None:
    with open(path, "wb") as fh:
        fh.write(canonical_json_bytes(session_to_document(session)))


def load_session(path: str) -> Session:
    try:
        with open(path, "rb") as fh:
            doc = json.loads(fh.read().decode("utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise InvalidMetadata(f"cannot read session file: {exc}") from exc
    return session_from_document(doc)

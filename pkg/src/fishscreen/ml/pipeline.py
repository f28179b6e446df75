"""Scale, select, train and evaluate in the three feature modes.

Mode 1 uses the in-game bank, mode 2 the movement bank and mode 3 their
concatenation. Feature selection runs on each bank independently using the
training half only; mode 3 takes the union of the two banks' final sets.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np

from ..ingame import INGAME_MANIFEST, extract_ingame_features
from ..model import Dataset, EvalReport
from ..simulator import derive_seed
from ..movement import MOVEMENT_MANIFEST, ProposedFeatureConfig, extract_movement_features
from .metrics import evaluate
from .scaling import ScalerParams, apply_minmax, fit_minmax
from .selection import (Method, backward_eliminate, consensus_select, correlation_filter,
                        forward_select, with_fallback)
from .split import stratified_indices
from .svm import SvmModel, train_svm

PAPER_PRESET_INGAME = (
    "visual_consistency", "auditory_consistency",
    "visual_stamina", "auditory_stamina",
    "auditory_vigilance", "visual_comprehension",
)
PAPER_PRESET_MOVEMENT = (
    "gyro_x_sd", "gyro_x_active", "acc_x_range", "acc_x_fft_amp1", "acc_x_variance",
)
BANKS = ("ingame", "movement")
MODE_BANKS = {1: ("ingame",), 2: ("movement",), 3: ("ingame", "movement")}
MANIFESTS = {"ingame": INGAME_MANIFEST, "movement": MOVEMENT_MANIFEST}
PRESETS = ("paper", "auto")

# fixed offsets into the master seed for each random consumer
SPLIT_STREAM = 1
SELECTION_STREAM = 2


@dataclass(frozen=True)
class FeatureTable:
    subject_ids: tuple
    labels: np.ndarray
    names: tuple
    X: np.ndarray

    def __post_init__(self):
        X = np.asarray(self.X, dtype=float).reshape(len(self.subject_ids), len(self.names))
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "labels", np.asarray(self.labels, dtype=int))

    def columns(self, names) -> "FeatureTable":
        idx = [self.names.index(n) for n in names]
        return FeatureTable(self.subject_ids, self.labels, tuple(names), self.X[:, idx])

    def rows(self, idx) -> "FeatureTable":
        idx = list(idx)
        return FeatureTable(tuple(self.subject_ids[i] for i in idx), self.labels[idx],
                            self.names, self.X[idx])

    def hstack(self, other: "FeatureTable") -> "FeatureTable":
        if tuple(self.subject_ids) != tuple(other.subject_ids):
            raise ValueError("tables are not row-aligned")
        return FeatureTable(self.subject_ids, self.labels, self.names + other.names,
                            np.hstack([self.X, other.X]))


def extract_tables(dataset: Dataset, proposed: ProposedFeatureConfig = ProposedFeatureConfig()):
    """Return ``{"ingame": FeatureTable, "movement": FeatureTable}``."""
    ids = tuple(s.subject_id for s in dataset.sessions)
    y = dataset.labels
    ing = [extract_ingame_features(s).values for s in dataset.sessions]
    mov = [extract_movement_features(s.imu, proposed).values for s in dataset.sessions]
    return {"ingame": FeatureTable(ids, y, INGAME_MANIFEST, ing),
            "movement": FeatureTable(ids, y, MOVEMENT_MANIFEST, mov)}


def mode_table(tables: dict, mode: int) -> FeatureTable:
    banks = MODE_BANKS[mode]
    t = tables[banks[0]]
    for b in banks[1:]:
        t = t.hstack(tables[b])
    return t


@dataclass(frozen=True)
class PipelineConfig:
    seed: int = 0
    ratio: float = 0.5
    preset: str = "paper"
    C: float = 1.0
    correlation_threshold: float = 0.9
    min_votes: int = 2
    max_k: int = 10
    scale_on_all: bool = False
    modes: tuple = (1, 2, 3)

    def __post_init__(self):
        if self.preset not in PRESETS:
            raise ValueError(f"preset must be one of {PRESETS}")
        if self.C <= 0:
            raise ValueError("C must be positive")
        bad = set(self.modes) - set(MODE_BANKS)
        if bad:
            raise ValueError(f"unknown modes {sorted(bad)}")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["modes"] = list(self.modes)
        return d


def derived_seed(config: PipelineConfig, stream: int) -> int:
    return derive_seed(config.seed, stream)


def split_indices(table: FeatureTable, config: PipelineConfig):
    return stratified_indices(table.labels, config.ratio, derived_seed(config, SPLIT_STREAM))


def _fit_scaler(table: FeatureTable, train_idx, config: PipelineConfig) -> ScalerParams:
    rows = table.X if config.scale_on_all else table.X[train_idx]
    return fit_minmax(rows)


@dataclass(frozen=True)
class BankSelection:
    bank: str
    results: tuple
    consensus: tuple
    empty_consensus: bool
    final: tuple

    def names(self, indices) -> list:
        return [MANIFESTS[self.bank][i] for i in indices]

    def to_dict(self) -> dict:
        d = {r.method.value.lower(): self.names(r.indices) for r in self.results}
        d["consensus"] = self.names(self.consensus)
        d["empty_consensus"] = self.empty_consensus
        d["final"] = self.names(self.final)
        return d


def select_bank(table: FeatureTable, train_idx, config: PipelineConfig) -> BankSelection:
    """Run the three selectors on the scaled training rows of one bank."""
    scaler = _fit_scaler(table, train_idx, config)
    Xs = apply_minmax(scaler, table.X[train_idx])
    y = table.labels[train_idx]
    seed = derived_seed(config, SELECTION_STREAM)
    results = (
        correlation_filter(Xs, config.correlation_threshold),
        forward_select(Xs, y, config.max_k, seed, config.C),
        backward_eliminate(Xs, y, seed, config.C),
    )
    cons = consensus_select(results, config.min_votes)
    final = with_fallback(cons, results)
    bank = "ingame" if table.names == INGAME_MANIFEST else "movement"
    return BankSelection(bank, results, cons.indices, cons.empty, tuple(final))


def select_features(tables: dict, config: PipelineConfig) -> dict:
    """Final feature names per bank, either the fixed preset or by selection.

    Returns ``{bank: (names, BankSelection or None)}``.
    """
    if config.preset == "paper":
        return {"ingame": (PAPER_PRESET_INGAME, None), "movement": (PAPER_PRESET_MOVEMENT, None)}
    train_idx, _ = split_indices(tables["ingame"], config)
    out = {}
    for bank in BANKS:
        sel = select_bank(tables[bank], train_idx, config)
        out[bank] = (tuple(sel.names(sel.final)), sel)
    return out


def mode_features(selected: dict, mode: int) -> tuple:
    names = ()
    for bank in MODE_BANKS[mode]:
        names += tuple(selected[bank][0])
    return names


@dataclass(frozen=True)
class ModeResult:
    mode: int
    feature_names: tuple
    model: SvmModel
    report: EvalReport
    train_ids: tuple
    test_ids: tuple
    extra: dict = field(default_factory=dict)


def train_mode(tables: dict, mode: int, names, config: PipelineConfig):
    table = mode_table(tables, mode)
    train_idx, test_idx = split_indices(table, config)
    scaler_full = _fit_scaler(table, train_idx, config)
    idx = [table.names.index(n) for n in names]
    scaler = scaler_full.subset(idx)
    Xtr = apply_minmax(scaler, table.X[np.ix_(train_idx, idx)])
    model = train_svm(Xtr, table.labels[train_idx], config.C, idx, scaler, names)
    return model, train_idx, test_idx


def evaluate_model(model: SvmModel, table: FeatureTable, rows) -> EvalReport:
    cols = [table.names.index(n) for n in model.feature_names]
    Xs = apply_minmax(model.scaler, table.X[np.ix_(list(rows), cols)])
    return evaluate(model, Xs, table.labels[list(rows)])


def run_three_modes(tables: dict, config: PipelineConfig = PipelineConfig()) -> dict:
    """Train and evaluate every configured mode on a held-out split.

    Returns ``{mode: ModeResult}``; selections are shared between modes.
    """
    selected = select_features(tables, config)
    out = {}
    for mode in config.modes:
        names = mode_features(selected, mode)
        model, tr, te = train_mode(tables, mode, names, config)
        table = mode_table(tables, mode)
        report = evaluate_model(model, table, te)
        out[mode] = ModeResult(mode, names, model, report,
                               tuple(table.subject_ids[i] for i in tr),
                               tuple(table.subject_ids[i] for i in te),
                               {"selections": {b: s.to_dict() for b, (_, s) in selected.items()
                                               if s is not None and b in MODE_BANKS[mode]}})
    return out


def sweep_C(tables: dict, config: PipelineConfig, values=(0.01, 0.1, 1.0, 10.0, 100.0)) -> dict:
    """Held-out reports for each soft-margin penalty, other settings fixed.

    Returns ``{C: {mode: EvalReport}}``.
    """
    out = {}
    for C in values:
        cfg = PipelineConfig(**dict(config.to_dict(), C=float(C), modes=tuple(config.modes)))
        out[float(C)] = {m: r.report for m, r in run_three_modes(tables, cfg).items()}
    return out

"""Seeded Monte-Carlo sweeps over SNR, with PCC curves and confusion matrices."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .channel import ChannelConfig, apply_awgn, apply_fading, build_fading_profile
from .classifier import (FUSION_MODES, ThresholdTable, classify_batch,
                         oracle_or_correct, table1_thresholds)
from .constellation import (ALL_CLASSES, ModulationClass, apply_frequency_offset,
                            build_constellation, draw_symbols)
from .cumulants import MIN_SAMPLES, batch_features

DEFAULT_SNR_GRID_DB = tuple(float(s) for s in range(-5, 21))


@dataclass(frozen=True)
class ExperimentConfig:
    """Full description of one Monte-Carlo sweep."""

    classes: tuple = ALL_CLASSES
    snr_grid_db: tuple = DEFAULT_SNR_GRID_DB
    n_trials_per_class: int = 500
    frame_length: int = 4096
    phase_offset: float = math.pi / 6
    freq_offset: float = 0.0
    channel: ChannelConfig = field(default_factory=ChannelConfig)
    thresholds: ThresholdTable = field(default_factory=table1_thresholds)
    fusion: str = "plurality"
    master_seed: int = 0

    def __post_init__(self):
        classes = tuple(c if isinstance(c, ModulationClass) else ModulationClass(int(c))
                        for c in self.classes)
        if not classes:
            raise ValueError("need at least one modulation class")
        if len({c.order for c in classes}) != len(classes):
            raise ValueError("duplicate modulation classes")
        grid = tuple(float(s) for s in self.snr_grid_db)
        if not grid:
            raise ValueError("snr_grid_db must be nonempty")
        if self.n_trials_per_class < 1:
            raise ValueError("n_trials_per_class must be >= 1")
        if int(self.frame_length) < MIN_SAMPLES:
            raise ValueError(f"frame_length must be >= {MIN_SAMPLES}")
        if self.fusion not in FUSION_MODES:
            raise ValueError(f"unknown fusion mode {self.fusion!r}")
        if not isinstance(self.channel, ChannelConfig):
            raise ValueError("channel must be a ChannelConfig")
        if not isinstance(self.thresholds, ThresholdTable):
            raise ValueError("thresholds must be a ThresholdTable")
        if int(self.master_seed) < 0:
            raise ValueError("master_seed must be >= 0")
        object.__setattr__(self, "classes", classes)
        object.__setattr__(self, "snr_grid_db", grid)
        object.__setattr__(self, "frame_length", int(self.frame_length))
        object.__setattr__(self, "phase_offset", float(self.phase_offset))
        object.__setattr__(self, "freq_offset", float(self.freq_offset))
        object.__setattr__(self, "master_seed", int(self.master_seed))


@dataclass(frozen=True, eq=False)
class TrialRecord:
    """Outcome of one synthesized frame."""

    true_class: ModulationClass
    snr_db: float
    features: np.ndarray
    per_feature_index: tuple
    fused_class: ModulationClass | None
    oracle_or_hit: bool
    seed: tuple


@dataclass(frozen=True, eq=False)
class TrialSet:
    """All trial records of one sweep, in (class, snr, trial) order."""

    config: ExperimentConfig
    records: tuple

    def __post_init__(self):
        expected = (len(self.config.classes) * len(self.config.snr_grid_db)
                    * self.config.n_trials_per_class)
        if len(self.records) != expected:
            raise ValueError(f"expected {expected} records, got {len(self.records)}")


@dataclass(frozen=True)
class PccPoint:
    snr_db: float
    pcc: float
    per_class_pcc: tuple


@dataclass(frozen=True)
class PccCurve:
    scoring: str
    points: tuple


def trial_seed(master_seed: int, class_index: int, snr_index: int,
               trial_index: int) -> np.random.SeedSequence:
    """Deterministic per-trial seed; any trial is reproducible in isolation."""
    return np.random.SeedSequence(master_seed,
                                  spawn_key=(class_index, snr_index, trial_index))


def _cell_features(cfg: ExperimentConfig, mod: ModulationClass,
                   snr_db: float, snr_index: int):
    """Synthesize and featurize one (class, snr) cell.

    Per trial, three child seeds are always derived (symbols, fading,
    noise) so that the symbol and noise streams of a trial are identical
    across channel kinds. Frames are featurized as one batch, which is
    bit-identical to featurizing them one at a time.
    """
    spec = build_constellation(mod.order, cfg.phase_offset)
    power = spec.average_power
    taps = None
    if cfg.channel.kind != "awgn_only":
        taps = build_fading_profile(cfg.channel)
    frames = np.empty((cfg.n_trials_per_class, cfg.frame_length), dtype=complex)
    seeds = []
    for t in range(cfg.n_trials_per_class):
        ss = trial_seed(cfg.master_seed, mod.class_index, snr_index, t)
        sym_seed, fade_seed, noise_seed = ss.spawn(3)
        frame = draw_symbols(spec, cfg.frame_length, sym_seed)
        if cfg.freq_offset != 0.0:
            frame = apply_frequency_offset(frame, cfg.freq_offset)
        if taps is not None:
            frame = apply_fading(frame, taps, cfg.channel, fade_seed)
        frame = apply_awgn(frame, snr_db, power, noise_seed)
        frames[t] = frame.samples
        seeds.append((mod.class_index, snr_index, t))
    return batch_features(frames), seeds


def _run_cell(cfg: ExperimentConfig, mod: ModulationClass,
              snr_db: float, snr_index: int) -> list:
    try:
        feats, seeds = _cell_features(cfg, mod, snr_db, snr_index)
        decisions = classify_batch(feats, cfg.thresholds, cfg.fusion)
    except Exception as exc:
        if hasattr(exc, "add_note"):
            exc.add_note(f"while running {mod.name} at {snr_db} dB")
        raise
    return [TrialRecord(mod, float(snr_db), feats[t].copy(), d.per_feature_index,
                        d.fused_class, oracle_or_correct(d, mod), seeds[t])
            for t, d in enumerate(decisions)]


def _map_cells(cfg: ExperimentConfig, fn, workers: int = 1) -> list:
    jobs = [(mod, snr, si) for mod in cfg.classes
            for si, snr in enumerate(cfg.snr_grid_db)]
    if workers is None or workers <= 1:
        return [fn(cfg, *job) for job in jobs]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda job: fn(cfg, *job), jobs))


def run_sweep(cfg: ExperimentConfig, workers: int = 1) -> TrialSet:
    """Run the full sweep; record order and contents do not depend on workers."""
    cell_records = _map_cells(cfg, _run_cell, workers)
    records = tuple(rec for cell in cell_records for rec in cell)
    return TrialSet(cfg, records)


def collect_feature_cells(cfg: ExperimentConfig, workers: int = 1) -> dict:
    """Feature samples keyed by (order, snr_db), e.g. for threshold calibration.

    Uses the same per-trial pipeline and seeds as run_sweep, so a
    calibration cell reproduces the sweep's feature values exactly.
    """
    cells = _map_cells(cfg, lambda c, mod, snr, si: _cell_features(c, mod, snr, si)[0],
                       workers)
    keys = [(mod.order, float(snr)) for mod in cfg.classes
            for snr in cfg.snr_grid_db]
    return dict(zip(keys, cells))


def _is_hit(record: TrialRecord, scoring: str) -> bool:
    if scoring == "plurality":
        return (record.fused_class is not None
                and record.fused_class.order == record.true_class.order)
    if scoring == "oracle_or":
        return record.oracle_or_hit
    raise ValueError(f"unknown scoring {scoring!r}")


def cell_counts(tset: TrialSet, scoring: str) -> dict:
    """(snr_db, order) -> (n_trials, n_correct) under the given scoring."""
    counts: dict = {}
    for rec in tset.records:
        key = (rec.snr_db, rec.true_class.order)
        n, hits = counts.get(key, (0, 0))
        counts[key] = (n + 1, hits + _is_hit(rec, scoring))
    return counts


def pcc_curve(tset: TrialSet, scoring: str) -> PccCurve:
    """Probability of correct classification vs SNR with uniform class priors;
    the curve value is the unweighted mean of the per-class accuracies."""
    counts = cell_counts(tset, scoring)
    points = []
    for snr in tset.config.snr_grid_db:
        per_class = []
        for mod in tset.config.classes:
            n, hits = counts.get((float(snr), mod.order), (0, 0))
            if n == 0:
                raise ValueError(f"no trials for {mod.name} at {snr} dB")
            per_class.append(hits / n)
        points.append(PccPoint(float(snr), sum(per_class) / len(per_class),
                               tuple(per_class)))
    return PccCurve(scoring, tuple(points))


def confusion(tset: TrialSet, snr_db: float) -> np.ndarray:
    """Row-normalized confusion matrix at one SNR.

    Rows are the swept true classes; columns are the threshold table's
    classes plus a trailing reject column. Every row sums to 1.
    """
    recs = [r for r in tset.records if r.snr_db == float(snr_db)]
    if not recs:
        raise ValueError(f"snr {snr_db} dB not present in this trial set")
    row_orders = [c.order for c in tset.config.classes]
    col_orders = list(tset.config.thresholds.orders)
    mat = np.zeros((len(row_orders), len(col_orders) + 1))
    for rec in recs:
        i = row_orders.index(rec.true_class.order)
        j = len(col_orders) if rec.fused_class is None \
            else col_orders.index(rec.fused_class.order)
        mat[i, j] += 1.0
    return mat / mat.sum(axis=1, keepdims=True)


def rescore(tset: TrialSet, thresholds: ThresholdTable) -> TrialSet:
    """Re-classify the stored feature vectors under a different table."""
    feats = np.array([rec.features for rec in tset.records])
    decisions = classify_batch(feats, thresholds, tset.config.fusion)
    records = tuple(replace(rec, per_feature_index=d.per_feature_index,
                            fused_class=d.fused_class,
                            oracle_or_hit=oracle_or_correct(d, rec.true_class))
                    for rec, d in zip(tset.records, decisions))
    return TrialSet(replace(tset.config, thresholds=thresholds), records)

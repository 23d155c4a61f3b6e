"""Threshold-table classification of the log-cumulant features.

Each feature value is binned against a strictly increasing row of
thresholds; the four per-feature class indices are then fused either by
plurality vote (deployable) or by the oracle-OR scoring rule (needs the
true class, used only to grade trials).
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .constellation import SUPPORTED_ORDERS, ModulationClass
from .cumulants import FEATURE_COUNT, FEATURE_LABELS
from .errors import CalibrationError, DataFileError
from .io import fmt17

# Per-feature index value meaning "out of range, no vote".
ABSTAIN = 0

FUSION_MODES = ("plurality", "oracle_or")

# Published decision thresholds, one row per feature a..d, nine columns.
_TABLE1 = (
    (0.5, 0.95, 1.3, 1.52, 1.8, 2.2, 2.5, 3.0, 4.5),
    (1.5, 2.2, 2.7, 3.1, 3.7, 4.3, 4.8, 5.7, 7.5),
    (1.5, 3.0, 4.0, 5.0, 6.3, 6.6, 7.5, 9.0, 12.5),
    (3.0, 5.0, 6.4, 7.6, 9.0, 10.0, 11.0, 12.0, 15.5),
)

# Tie-breaking scans the highest-order feature first; its inter-class
# spacing is the widest, so its vote is the most trustworthy.
_TIE_BREAK_ORDER = (3, 2, 1, 0)


@dataclass(frozen=True, eq=False)
class ThresholdTable:
    """4 x K decision thresholds for K modulation classes.

    Row x, column i is the upper edge of class i+1's bin for feature x;
    values at or above the last column abstain.
    """

    phi: np.ndarray
    orders: tuple = SUPPORTED_ORDERS
    provenance: str = "calibrated"

    def __post_init__(self):
        phi = np.array(self.phi, dtype=float)
        if phi.ndim != 2 or phi.shape[0] != FEATURE_COUNT:
            raise ValueError(f"threshold matrix must have {FEATURE_COUNT} rows, got shape {phi.shape}")
        orders = tuple(int(o) for o in self.orders)
        if phi.shape[1] != len(orders):
            raise ValueError(f"{phi.shape[1]} threshold columns for {len(orders)} classes")
        if len(orders) < 2:
            raise ValueError("a threshold table needs at least two classes")
        if list(orders) != sorted(set(orders)):
            raise ValueError(f"class orders must be strictly increasing, got {orders}")
        for o in orders:
            if o not in SUPPORTED_ORDERS:
                raise ValueError(f"unsupported modulation order {o}")
        if not (np.diff(phi, axis=1) > 0).all():
            raise ValueError("each threshold row must be strictly increasing")
        if self.provenance not in ("paper_table1", "calibrated"):
            raise ValueError(f"unknown provenance {self.provenance!r}")
        phi.setflags(write=False)
        object.__setattr__(self, "phi", phi)
        object.__setattr__(self, "orders", orders)

    @property
    def n_classes(self) -> int:
        return len(self.orders)


@dataclass(frozen=True)
class ClassDecision:
    """Per-feature bin indices plus the fused decision for one frame.

    per_feature_index entries are 1-based positions into `orders`
    (ABSTAIN = 0 means the feature fell above its last threshold);
    fused_class is None when every feature abstained.
    """

    per_feature_index: tuple
    fused_class: ModulationClass | None
    fusion_mode: str
    orders: tuple


def table1_thresholds() -> ThresholdTable:
    """The published 4 x 9 threshold table, bit-exact."""
    return ThresholdTable(np.array(_TABLE1, dtype=float), SUPPORTED_ORDERS, "paper_table1")


def _check_row(row: np.ndarray) -> np.ndarray:
    row = np.asarray(row, dtype=float)
    if row.ndim != 1 or row.size < 1:
        raise ValueError(f"threshold row must be a 1-D vector, got shape {row.shape}")
    if not (np.diff(row) > 0).all():
        raise ValueError("threshold row must be strictly increasing")
    return row


def feature_index(value: float, row) -> int:
    """Bin one feature value: 1 below the first threshold, k for the
    half-open bin [row[k-2], row[k-1]), ABSTAIN at or above the last."""
    row = _check_row(row)
    pos = int(np.searchsorted(row, value, side="right"))
    return ABSTAIN if pos == row.size else pos + 1


def feature_indices(values, row) -> np.ndarray:
    """Vectorized feature_index over an array of values."""
    row = _check_row(row)
    pos = np.searchsorted(row, np.asarray(values, dtype=float), side="right")
    idx = pos + 1
    idx[pos == row.size] = ABSTAIN
    return idx


def _fuse_plurality(indices: tuple) -> int:
    votes = [i for i in indices if i != ABSTAIN]
    if not votes:
        return ABSTAIN
    counts = Counter(votes)
    top = max(counts.values())
    tied = {i for i, c in counts.items() if c == top}
    if len(tied) == 1:
        return tied.pop()
    for x in _TIE_BREAK_ORDER:
        if indices[x] in tied:
            return indices[x]
    raise AssertionError("tied index not reported by any feature")


def classify_batch(features, table: ThresholdTable, mode: str = "plurality") -> list:
    """Classify a (n_frames, 4) feature array; returns one ClassDecision per row."""
    if mode not in FUSION_MODES:
        raise ValueError(f"unknown fusion mode {mode!r}")
    feats = np.asarray(features, dtype=float)
    if feats.ndim == 1:
        feats = feats[np.newaxis, :]
    if feats.ndim != 2 or feats.shape[1] != FEATURE_COUNT:
        raise ValueError(f"expected (n, {FEATURE_COUNT}) features, got shape {feats.shape}")
    per_feature = [feature_indices(feats[:, x], table.phi[x]) for x in range(FEATURE_COUNT)]
    decisions = []
    for r in range(feats.shape[0]):
        indices = tuple(int(per_feature[x][r]) for x in range(FEATURE_COUNT))
        fused = _fuse_plurality(indices)
        fused_class = None if fused == ABSTAIN else ModulationClass(table.orders[fused - 1])
        decisions.append(ClassDecision(indices, fused_class, mode, table.orders))
    return decisions


def classify(features, table: ThresholdTable, mode: str = "plurality") -> ClassDecision:
    """Classify a single 4-entry feature vector."""
    feats = np.asarray(features, dtype=float)
    if feats.shape != (FEATURE_COUNT,):
        raise ValueError(f"expected {FEATURE_COUNT} features, got shape {feats.shape}")
    return classify_batch(feats, table, mode)[0]


def oracle_or_correct(decision: ClassDecision, truth: ModulationClass) -> bool:
    """Scoring rule: correct when ANY per-feature index hits the true class."""
    for i in decision.per_feature_index:
        if i != ABSTAIN and decision.orders[i - 1] == truth.order:
            return True
    return False


def calibrate(cells) -> ThresholdTable:
    """Fit thresholds from per-class feature samples over an SNR grid.

    cells maps (order, snr_db) to an (n, 4) feature array. For each
    feature, a class's band is [min, max] over the grid of its per-SNR
    mean; the threshold between adjacent classes is the midpoint of the
    gap between their bands, and the final guard sits above the top class
    by half the preceding gap. Overlapping bands abort the calibration.
    """
    orders = sorted({order for order, _ in cells})
    if len(orders) < 2:
        raise CalibrationError(f"need at least two classes to calibrate, got {orders}")
    lower = np.empty((len(orders), FEATURE_COUNT))
    upper = np.empty((len(orders), FEATURE_COUNT))
    for k, order in enumerate(orders):
        means = []
        n_total = 0
        for (o, _snr), feats in sorted(cells.items()):
            if o != order:
                continue
            feats = np.asarray(feats, dtype=float)
            if feats.ndim != 2 or feats.shape[1] != FEATURE_COUNT:
                raise ValueError(f"cell ({o}, {_snr}) has shape {feats.shape}, expected (n, 4)")
            means.append(feats.mean(axis=0))
            n_total += feats.shape[0]
        if n_total < 100:
            raise CalibrationError(f"class {order}-QAM has only {n_total} feature samples; "
                                   "need at least 100 across the SNR grid")
        band = np.array(means)
        lower[k] = band.min(axis=0)
        upper[k] = band.max(axis=0)
    phi = np.empty((FEATURE_COUNT, len(orders)))
    for x in range(FEATURE_COUNT):
        for k in range(len(orders) - 1):
            if upper[k, x] >= lower[k + 1, x]:
                raise CalibrationError(
                    f"feature {FEATURE_LABELS[x]}: classes {orders[k]}-QAM and "
                    f"{orders[k + 1]}-QAM overlap ({fmt17(upper[k, x])} >= {fmt17(lower[k + 1, x])})")
            phi[x, k] = (upper[k, x] + lower[k + 1, x]) / 2.0
        phi[x, -1] = upper[-1, x] + (lower[-1, x] - upper[-2, x]) / 2.0
    try:
        return ThresholdTable(phi, tuple(orders), "calibrated")
    except ValueError as exc:
        raise CalibrationError(f"calibrated thresholds are not usable: {exc}") from exc


def separation_report(cells) -> list:
    """Per-feature gaps between adjacent class bands, for the calibrate CLI.

    Returns rows of (feature_label, low_order, high_order, band_top,
    band_bottom, gap); gap <= 0 marks an overlapping, uncalibratable pair.
    """
    orders = sorted({order for order, _ in cells})
    rows = []
    stats: dict = {}
    for (order, _snr), feats in sorted(cells.items()):
        stats.setdefault(order, []).append(np.asarray(feats, dtype=float).mean(axis=0))
    for x in range(FEATURE_COUNT):
        for k in range(len(orders) - 1):
            top = max(m[x] for m in stats[orders[k]])
            bottom = min(m[x] for m in stats[orders[k + 1]])
            rows.append((FEATURE_LABELS[x], orders[k], orders[k + 1],
                         float(top), float(bottom), float(bottom - top)))
    return rows


def write_threshold_csv(table: ThresholdTable, path) -> None:
    """Serialize a threshold table; non-default class sets are recorded in
    a leading `# orders=` comment so the file stays self-describing."""
    lines = []
    if table.orders != SUPPORTED_ORDERS:
        lines.append("# orders=" + ",".join(str(o) for o in table.orders))
    lines.append("feature," + ",".join(f"i{i}" for i in range(table.n_classes)))
    for x, label in enumerate(FEATURE_LABELS):
        lines.append(label + "," + ",".join(fmt17(v) for v in table.phi[x]))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_threshold_csv(path) -> ThresholdTable:
    """Parse a threshold CSV written by write_threshold_csv."""
    orders = SUPPORTED_ORDERS
    data_lines = []
    for raw in Path(path).read_text(encoding="utf-8").splitlines():
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            body = line.lstrip("#").strip()
            if body.startswith("orders="):
                try:
                    orders = tuple(int(t) for t in body[len("orders="):].split(","))
                except ValueError as exc:
                    raise DataFileError(f"{path}: bad orders comment {line!r}") from exc
            continue
        data_lines.append(line)
    if not data_lines:
        raise DataFileError(f"{path}: empty threshold file")
    header = data_lines[0].split(",")
    n_cols = len(header) - 1
    if header[0] != "feature" or header[1:] != [f"i{i}" for i in range(n_cols)]:
        raise DataFileError(f"{path}: bad header {data_lines[0]!r}")
    if len(data_lines) != 1 + FEATURE_COUNT:
        raise DataFileError(f"{path}: expected {FEATURE_COUNT} data rows, got {len(data_lines) - 1}")
    phi = np.empty((FEATURE_COUNT, n_cols))
    for x, label in enumerate(FEATURE_LABELS):
        parts = data_lines[1 + x].split(",")
        if parts[0] != label:
            raise DataFileError(f"{path}: row {x + 1} must be feature {label!r}, got {parts[0]!r}")
        if len(parts) != n_cols + 1:
            raise DataFileError(f"{path}: row {label!r} has {len(parts) - 1} values, expected {n_cols}")
        try:
            phi[x] = [float(p) for p in parts[1:]]
        except ValueError as exc:
            raise DataFileError(f"{path}: non-numeric threshold in row {label!r}") from exc
    reference = table1_thresholds()
    provenance = ("paper_table1"
                  if orders == SUPPORTED_ORDERS and phi.shape == reference.phi.shape
                  and np.array_equal(phi, reference.phi) else "calibrated")
    try:
        return ThresholdTable(phi, orders, provenance)
    except ValueError as exc:
        raise DataFileError(f"{path}: {exc}") from exc

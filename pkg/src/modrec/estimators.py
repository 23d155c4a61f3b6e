"""Scikit-learn style wrappers: a feature transformer and a threshold classifier."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin, TransformerMixin

from .classifier import (ThresholdTable, calibrate, classify_batch,
                         read_threshold_csv, table1_thresholds)
from .cumulants import FEATURE_COUNT, batch_features


class CumulantFeatures(TransformerMixin, BaseEstimator):
    """Maps complex frames to the four log-magnitude cumulant features.

    X is a (n_frames, frame_length) complex array; transform returns an
    (n_frames, 4) real array. The transformer is stateless.
    """

    def fit(self, X, y=None):
        np.asarray(X)
        return self

    def transform(self, X) -> np.ndarray:
        return batch_features(np.asarray(X, dtype=complex))


class ThresholdQamClassifier(ClassifierMixin, BaseEstimator):
    """Fixed-threshold modulation-order classifier over feature vectors.

    thresholds selects the decision table: "table1" (published values),
    "calibrate" (fit from the training features; y must hold modulation
    orders, and fit accepts an optional per-sample snr_db array), a path
    to a threshold CSV, or a ThresholdTable instance. predict returns
    modulation orders, with 0 marking a rejected (all-abstain) sample.
    """

    def __init__(self, thresholds="table1", fusion="plurality"):
        self.thresholds = thresholds
        self.fusion = fusion

    def _validate_features(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        if X.ndim != 2 or X.shape[1] != FEATURE_COUNT:
            raise ValueError(f"expected (n, {FEATURE_COUNT}) feature array, got shape {X.shape}")
        return X

    def fit(self, X, y=None, snr_db=None):
        X = self._validate_features(X)
        if isinstance(self.thresholds, ThresholdTable):
            table = self.thresholds
        elif self.thresholds == "table1":
            table = table1_thresholds()
        elif self.thresholds == "calibrate":
            if y is None:
                raise ValueError("thresholds='calibrate' needs y (modulation orders)")
            y = np.asarray(y)
            if y.shape != (X.shape[0],):
                raise ValueError(f"y has shape {y.shape}, expected ({X.shape[0]},)")
            snr = np.zeros(X.shape[0]) if snr_db is None else np.asarray(snr_db, dtype=float)
            if snr.shape != (X.shape[0],):
                raise ValueError(f"snr_db has shape {snr.shape}, expected ({X.shape[0]},)")
            cells: dict = {}
            for order in np.unique(y):
                for s in np.unique(snr[y == order]):
                    mask = (y == order) & (snr == s)
                    cells[(int(order), float(s))] = X[mask]
            table = calibrate(cells)
        else:
            table = read_threshold_csv(self.thresholds)
        self.table_ = table
        self.classes_ = np.asarray(table.orders)
        return self

    def predict(self, X) -> np.ndarray:
        if not hasattr(self, "table_"):
            raise ValueError("this classifier is not fitted yet; call fit first")
        X = self._validate_features(X)
        decisions = classify_batch(X, self.table_, self.fusion)
        return np.array([0 if d.fused_class is None else d.fused_class.order
                         for d in decisions])

    def predict_feature_indices(self, X) -> np.ndarray:
        """Per-feature bin indices (n, 4); 0 marks an abstaining feature."""
        if not hasattr(self, "table_"):
            raise ValueError("this classifier is not fitted yet; call fit first")
        X = self._validate_features(X)
        return np.array([d.per_feature_index for d in classify_batch(X, self.table_, self.fusion)])

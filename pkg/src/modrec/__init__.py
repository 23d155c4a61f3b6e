"""M-QAM modulation classification from logarithmic higher-order cumulants."""

from importlib.metadata import PackageNotFoundError, version

try:
    __version__ = version("modrec")
except PackageNotFoundError:  # running from a source tree without install
    __version__ = "0.0.0"

from .channel import (ChannelConfig, Tap, TapSet, apply_awgn, apply_fading,
                      build_fading_profile, jakes_gain_sequence, noise_variance)
from .classifier import (ABSTAIN, ClassDecision, ThresholdTable, calibrate,
                         classify, classify_batch, feature_index, feature_indices,
                         oracle_or_correct, read_threshold_csv, table1_thresholds,
                         write_threshold_csv)
from .constellation import (ALL_CLASSES, SUPPORTED_ORDERS, ConstellationSpec,
                            FrameMeta, ModulationClass, SignalFrame,
                            apply_frequency_offset, build_constellation,
                            draw_symbols)
from .cumulants import (CumulantSet, SampleMoments, batch_features,
                        frame_cumulants, frame_features, log_magnitude,
                        sample_moments)
from .errors import CalibrationError, ConfigError, DataFileError, ModrecError
from .estimators import CumulantFeatures, ThresholdQamClassifier
from .harness import (ExperimentConfig, PccCurve, PccPoint, TrialRecord,
                      TrialSet, collect_feature_cells, confusion, pcc_curve,
                      rescore, run_sweep, trial_seed)
from .io import read_iq, write_iq

__all__ = [
    "ABSTAIN", "ALL_CLASSES", "SUPPORTED_ORDERS", "CalibrationError",
    "ChannelConfig", "ClassDecision", "ConfigError", "ConstellationSpec",
    "CumulantFeatures", "CumulantSet", "DataFileError", "ExperimentConfig",
    "FrameMeta", "ModrecError", "ModulationClass", "PccCurve", "PccPoint",
    "SampleMoments", "SignalFrame", "Tap", "TapSet",
    "ThresholdQamClassifier", "ThresholdTable",
    "TrialRecord", "TrialSet", "apply_awgn", "apply_fading",
    "apply_frequency_offset", "batch_features", "build_constellation",
    "build_fading_profile", "calibrate", "classify", "classify_batch",
    "collect_feature_cells", "confusion", "draw_symbols", "feature_index",
    "feature_indices", "frame_cumulants", "frame_features",
    "jakes_gain_sequence", "log_magnitude", "noise_variance",
    "oracle_or_correct", "pcc_curve", "read_iq", "read_threshold_csv",
    "rescore", "run_sweep", "sample_moments", "table1_thresholds",
    "trial_seed", "write_iq", "write_threshold_csv", "__version__",
]

"""Higher-order moment/cumulant estimation and the log-magnitude feature map."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# Fewer samples than this makes eighth-order statistics meaningless.
MIN_SAMPLES = 8

# Magnitudes below this floor are clamped before taking log10 so that a
# cumulant estimate of exactly zero cannot produce -inf.
LOG_FLOOR = 1e-12

FEATURE_COUNT = 4

# Row labels used by the threshold-table CSV format, one per feature.
FEATURE_LABELS = ("a", "b", "c", "d")


@dataclass(frozen=True)
class SampleMoments:
    """Plug-in moment estimates of one frame (no mean subtraction)."""

    n: int
    m11: float
    m20: complex
    m22: float
    m31: complex
    m33: float
    m40: complex
    m44: float


@dataclass(frozen=True)
class CumulantSet:
    """Second-, fourth-, sixth- and eighth-order cumulant estimates."""

    c2: float
    c4: complex
    c6: complex
    c8: complex

    def as_array(self) -> np.ndarray:
        return np.array([self.c2, self.c4, self.c6, self.c8], dtype=complex)


def _validate(y: np.ndarray) -> np.ndarray:
    y = np.asarray(y, dtype=complex)
    if y.ndim == 0 or y.shape[-1] < MIN_SAMPLES:
        raise ValueError(f"need at least {MIN_SAMPLES} samples per frame, got shape {y.shape}")
    return y


def _moment_arrays(y: np.ndarray):
    """Raw moments along the last axis.

    Both the single-frame and the batched entry points land here so that a
    frame produces bit-identical moments whether it is processed alone or
    as one row of a batch.
    """
    p = y.real * y.real + y.imag * y.imag
    y2 = y * y
    m11 = p.mean(axis=-1)
    m22 = (p * p).mean(axis=-1)
    m33 = (p * p * p).mean(axis=-1)
    m44 = (p * p * p * p).mean(axis=-1)
    m20 = y2.mean(axis=-1)
    m31 = (y2 * p).mean(axis=-1)
    m40 = (y2 * y2).mean(axis=-1)
    return m11, m20, m22, m31, m33, m40, m44


def _cumulant_arrays(y: np.ndarray):
    """Cumulants c2, c4, c6, c8 along the last axis.

    The eighth-order expression is the standard moment-to-cumulant
    expansion for a zero-mean complex process with four conjugated factors.
    On circular Gaussian noise every noise-only and signal-noise cross term
    cancels exactly, which is what keeps the features flat across SNR.
    Conjugating the fourth-power moment (|m40|^2 rather than m40^2) keeps
    the magnitude invariant under a carrier phase rotation.
    """
    m11, m20, m22, m31, m33, m40, m44 = _moment_arrays(y)
    c2 = m11
    c4 = m22 - m20 ** 2 - 2 * m11 ** 2
    c6 = (m33 - 6 * m20 * m31 - 9 * m22 * m11
          + 18 * m20 ** 2 * m11 + 12 * m11 ** 3)
    c8 = (m44 - np.abs(m40) ** 2 - 16 * m33 * m11 - 18 * m22 ** 2
          - 54 * m20 ** 4 - 144 * m11 ** 4 - 432 * m20 ** 2 * m11 ** 2
          + 12 * m40 * m20 ** 2 + 192 * m31 * m11 * m20
          + 144 * m22 * m11 ** 2 + 72 * m22 * m20 ** 2)
    return c2, c4, c6, c8


def sample_moments(samples) -> SampleMoments:
    """Estimate the raw moments of a single 1-D complex frame."""
    y = _validate(samples)
    if y.ndim != 1:
        raise ValueError(f"expected a 1-D frame, got shape {y.shape}")
    m11, m20, m22, m31, m33, m40, m44 = _moment_arrays(y)
    return SampleMoments(y.size, float(m11), complex(m20), float(m22),
                         complex(m31), float(m33), complex(m40), float(m44))


def frame_cumulants(samples) -> CumulantSet:
    """Estimate the cumulants of a single 1-D complex frame."""
    y = _validate(samples)
    if y.ndim != 1:
        raise ValueError(f"expected a 1-D frame, got shape {y.shape}")
    # Evaluate as a one-row batch: numpy rounds complex scalar arithmetic
    # slightly differently from its elementwise array loops, and the batch
    # entry point must agree with this one bit for bit.
    c2, c4, c6, c8 = _cumulant_arrays(y[np.newaxis, :])
    return CumulantSet(float(c2[0]), complex(c4[0]), complex(c6[0]), complex(c8[0]))


def log_magnitude(values, floor: float = LOG_FLOOR):
    """log10 of |values| with clamping; returns (features, clamped_mask)."""
    mag = np.abs(np.asarray(values))
    clamped = mag < floor
    return np.log10(np.maximum(mag, floor)), clamped


def frame_features(samples) -> np.ndarray:
    """Four-entry log-magnitude cumulant feature vector of one frame."""
    cs = frame_cumulants(samples)
    feats, _ = log_magnitude(cs.as_array())
    return feats


def batch_features(frames) -> np.ndarray:
    """Feature vectors for a stack of equal-length frames.

    frames has shape (n_frames, frame_length); the result has shape
    (n_frames, 4) and row i equals frame_features(frames[i]) bit for bit.
    """
    y = _validate(frames)
    if y.ndim != 2:
        raise ValueError(f"expected a 2-D frame stack, got shape {y.shape}")
    c2, c4, c6, c8 = _cumulant_arrays(y)
    stacked = np.stack([c2.astype(complex), c4, c6, c8], axis=-1)
    feats, _ = log_magnitude(stacked)
    return feats

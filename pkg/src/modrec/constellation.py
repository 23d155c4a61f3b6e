"""M-QAM constellation construction and random symbol-frame synthesis."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

SUPPORTED_ORDERS = (4, 8, 16, 32, 64, 128, 256, 512, 1024)

_SQUARE_ORDERS = frozenset((4, 16, 64, 256, 1024))


@dataclass(frozen=True)
class ModulationClass:
    """One of the nine supported M-QAM orders."""

    order: int

    def __post_init__(self):
        if self.order not in SUPPORTED_ORDERS:
            raise ValueError(
                f"unsupported modulation order {self.order!r}; "
                f"supported orders: {SUPPORTED_ORDERS}"
            )

    @property
    def class_index(self) -> int:
        """Class index i in 1..9 such that order = 2**(i+1)."""
        return self.order.bit_length() - 2

    @property
    def name(self) -> str:
        return f"{self.order}-QAM"


ALL_CLASSES = tuple(ModulationClass(m) for m in SUPPORTED_ORDERS)


@dataclass(frozen=True)
class ConstellationSpec:
    """An M-QAM point set with its order, layout, and applied phase offset."""

    mod: ModulationClass
    points: np.ndarray
    phase_offset: float
    layout: str

    @property
    def average_power(self) -> float:
        """Mean squared magnitude over the point set."""
        pts = self.points
        return float(np.mean(pts.real * pts.real + pts.imag * pts.imag))


@dataclass(frozen=True)
class FrameMeta:
    true_class: ModulationClass | None = None
    phase_offset: float = 0.0
    freq_offset: float = 0.0
    snr_db: float | None = None
    channel_tag: str = "clean"


@dataclass(frozen=True)
class SignalFrame:
    """A finite sequence of complex baseband samples plus provenance metadata."""

    samples: np.ndarray
    meta: FrameMeta = field(default_factory=FrameMeta)

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=complex)
        if samples.ndim != 1 or samples.size < 1:
            raise ValueError("frame samples must be a nonempty 1-D sequence")
        if not (np.isfinite(samples.real).all() and np.isfinite(samples.imag).all()):
            raise ValueError("frame samples must all be finite")
        object.__setattr__(self, "samples", samples)

    def __len__(self) -> int:
        return self.samples.size


def _grid_levels(side: int) -> np.ndarray:
    """Symmetric odd-integer amplitude levels for a grid with `side` columns."""
    return np.arange(-(side - 1), side, 2, dtype=float)


def _square_points(m: int) -> np.ndarray:
    side = math.isqrt(m)
    lv = _grid_levels(side)
    return (lv[:, None] + 1j * lv[None, :]).ravel()


def _cross_points(m: int) -> np.ndarray:
    if m == 8:
        # The eight-point set on {-2, 0, 2}^2 minus the origin: the one
        # eight-point grid layout with zero mean and 90-degree symmetry.
        lv = np.array([-2.0, 0.0, 2.0])
        pts = (lv[:, None] + 1j * lv[None, :]).ravel()
        return pts[np.abs(pts) > 0]
    side = math.isqrt(9 * m // 8)
    corner = side // 6  # edge length of each removed corner block
    lv = _grid_levels(side)
    cut = lv[side - corner - 1]
    pts = (lv[:, None] + 1j * lv[None, :]).ravel()
    keep = ~((np.abs(pts.real) > cut) & (np.abs(pts.imag) > cut))
    return pts[keep]


def build_constellation(m: int, phase_offset: float = 0.0) -> ConstellationSpec:
    """Build the odd-integer-grid M-QAM constellation rotated by phase_offset.

    Points are NOT power-normalized; the average power grows with the order
    (2, 6, 10, 20, 42, 82, 170, 330, 682 for the nine supported orders).
    """
    mod = ModulationClass(int(m))
    if mod.order in _SQUARE_ORDERS:
        pts, layout = _square_points(mod.order), "square"
    else:
        pts, layout = _cross_points(mod.order), "cross"
    pts = pts * np.exp(1j * phase_offset)
    pts.setflags(write=False)
    return ConstellationSpec(
        mod=mod, points=pts, phase_offset=float(phase_offset), layout=layout
    )


def draw_symbols(spec: ConstellationSpec, n: int, seed=None) -> SignalFrame:
    """Draw n independent uniform symbols from the constellation.

    The seed selects point indices, so the same seed picks the same symbol
    sequence regardless of the spec's phase offset.
    """
    if n < 1:
        raise ValueError("symbol count must be >= 1")
    rng = np.random.default_rng(seed)
    idx = rng.integers(0, spec.points.size, size=int(n))
    meta = FrameMeta(true_class=spec.mod, phase_offset=spec.phase_offset)
    return SignalFrame(spec.points[idx], meta)


def apply_frequency_offset(frame: SignalFrame, delta_f: float) -> SignalFrame:
    """Multiply sample n by exp(j*2*pi*delta_f*n); delta_f in cycles/sample."""
    ramp = np.exp(2j * np.pi * delta_f * np.arange(frame.samples.size))
    meta = replace(frame.meta, freq_offset=frame.meta.freq_offset + float(delta_f))
    return SignalFrame(frame.samples * ramp, meta)

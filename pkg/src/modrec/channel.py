"""AWGN and multipath Rician/Rayleigh fading channels."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .constellation import SignalFrame

# Default fast frequency-selective profile: six paths at 3.84 Msym/s with a
# 5 kHz maximum Doppler shift and a 3 dB K-factor on the direct path.
DEFAULT_SYMBOL_RATE = 3.84e6
DEFAULT_PATH_DELAYS_S = (0.0, 2e-7, 8e-7, 12e-7, 23e-7, 37e-7)
DEFAULT_PATH_GAINS_DB = (0.0, -0.9, -4.9, -8.0, -7.8, -23.9)
DEFAULT_MAX_DOPPLER_HZ = 5e3
DEFAULT_RICIAN_K_DB = 3.0

JAKES_OSCILLATORS = 16

CHANNEL_KINDS = ("awgn_only", "rician", "rayleigh")


@dataclass(frozen=True)
class ChannelConfig:
    """Channel model selection plus the fading profile parameters."""

    kind: str = "awgn_only"
    snr_db: float | None = None
    symbol_rate: float = DEFAULT_SYMBOL_RATE
    path_delays_s: tuple = DEFAULT_PATH_DELAYS_S
    path_gains_db: tuple = DEFAULT_PATH_GAINS_DB
    max_doppler_hz: float = DEFAULT_MAX_DOPPLER_HZ
    rician_k_db: float = DEFAULT_RICIAN_K_DB

    def __post_init__(self):
        if self.kind not in CHANNEL_KINDS:
            raise ValueError(f"unknown channel kind {self.kind!r}; expected one of {CHANNEL_KINDS}")
        if len(self.path_delays_s) != len(self.path_gains_db):
            raise ValueError("path_delays_s and path_gains_db must have the same length")
        if len(self.path_delays_s) == 0:
            raise ValueError("fading profile must contain at least one path")
        if list(self.path_delays_s) != sorted(self.path_delays_s) or self.path_delays_s[0] != 0.0:
            raise ValueError("path delays must be nondecreasing and start at 0")
        if not self.symbol_rate > 0:
            raise ValueError("symbol_rate must be positive")
        if self.max_doppler_hz < 0:
            raise ValueError("max_doppler_hz must be >= 0")

    @property
    def normalized_doppler(self) -> float:
        """Maximum Doppler shift in cycles per symbol-spaced sample."""
        return self.max_doppler_hz / self.symbol_rate


@dataclass(frozen=True)
class Tap:
    delay_samples: int
    linear_gain: float


@dataclass(frozen=True)
class TapSet:
    """Symbol-spaced taps with unit total power."""

    taps: tuple


def noise_variance(snr_db: float, signal_power: float) -> float:
    """Total complex noise variance sigma^2 = signal_power / 10**(snr_db/10)."""
    if not signal_power > 0:
        raise ValueError("signal_power must be positive")
    if math.isinf(snr_db) and snr_db > 0:
        return 0.0
    return signal_power * 10.0 ** (-snr_db / 10.0)


def apply_awgn(frame: SignalFrame, snr_db: float, signal_power: float, seed=None) -> SignalFrame:
    """Add circularly-symmetric complex Gaussian noise at the requested SNR.

    signal_power is the analytic average power of the transmitted
    constellation; sigma^2/2 lands on each of the real and imaginary parts.
    """
    sigma2 = noise_variance(snr_db, signal_power)
    if sigma2 == 0.0:
        out = frame.samples
    else:
        rng = np.random.default_rng(seed)
        scale = math.sqrt(sigma2 / 2.0)
        n = frame.samples.size
        noise = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        out = frame.samples + scale * noise
    return SignalFrame(out, replace(frame.meta, snr_db=float(snr_db)))


def build_fading_profile(cfg: ChannelConfig) -> TapSet:
    """Discretize the delay/gain profile to symbol-spaced unit-power taps.

    Delays are rounded to the nearest sample; colliding delays merge by
    power addition, and linear gains are renormalized so their squares sum
    to one.
    """
    if cfg.kind == "awgn_only":
        raise ValueError("fading profile requested for an awgn_only channel")
    powers: dict[int, float] = {}
    for delay_s, gain_db in zip(cfg.path_delays_s, cfg.path_gains_db):
        d = int(round(delay_s * cfg.symbol_rate))
        powers[d] = powers.get(d, 0.0) + 10.0 ** (gain_db / 10.0)
    total = sum(powers.values())
    taps = tuple(Tap(d, math.sqrt(p / total)) for d, p in sorted(powers.items()))
    return TapSet(taps)


def jakes_gain_sequence(n: int, normalized_doppler: float,
                        n_oscillators: int = JAKES_OSCILLATORS, seed=None) -> np.ndarray:
    """Sum-of-sinusoids fading gain sequence with unit mean-square magnitude.

    Each oscillator gets a uniform random arrival angle (setting its Doppler
    frequency within +/- normalized_doppler) and a uniform random phase.
    Zero Doppler therefore yields a time-constant gain.
    """
    if n_oscillators < 1:
        raise ValueError("n_oscillators must be >= 1")
    if normalized_doppler < 0:
        raise ValueError("normalized_doppler must be >= 0")
    rng = np.random.default_rng(seed)
    arrival = rng.uniform(0.0, 2.0 * np.pi, size=n_oscillators)
    phases = rng.uniform(0.0, 2.0 * np.pi, size=n_oscillators)
    freqs = normalized_doppler * np.cos(arrival)
    t = np.arange(n)
    g = np.zeros(n, dtype=complex)
    for f, ph in zip(freqs, phases):
        g += np.exp(1j * (2.0 * np.pi * f * t + ph))
    return g / math.sqrt(n_oscillators)


def _los_split(rician_k_db: float) -> tuple[float, float]:
    """Amplitude scale of the line-of-sight and diffuse parts of tap 0."""
    k = 10.0 ** (rician_k_db / 10.0)
    return math.sqrt(k / (k + 1.0)), math.sqrt(1.0 / (k + 1.0))


def apply_fading(frame: SignalFrame, taps: TapSet, cfg: ChannelConfig, seed=None) -> SignalFrame:
    """Tapped-delay-line fading with an independent gain sequence per tap.

    For a Rician channel, tap 0 carries a deterministic line-of-sight
    component at the maximum Doppler shift plus a diffuse part, split so the
    LOS/diffuse power ratio equals the configured K-factor and the tap's
    average power is preserved.
    """
    if not taps.taps:
        raise ValueError("tap set must be nonempty")
    x = frame.samples
    n = x.size
    fd = cfg.normalized_doppler
    ss = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    children = ss.spawn(len(taps.taps))
    y = np.zeros(n, dtype=complex)
    for i, (tap, child) in enumerate(zip(taps.taps, children)):
        h = jakes_gain_sequence(n, fd, JAKES_OSCILLATORS, child)
        if cfg.kind == "rician" and i == 0:
            los_amp, diffuse_amp = _los_split(cfg.rician_k_db)
            los = np.exp(2j * np.pi * fd * np.arange(n))
            h = los_amp * los + diffuse_amp * h
        if tap.delay_samples >= n:
            continue
        shifted = np.zeros(n, dtype=complex)
        shifted[tap.delay_samples:] = x[: n - tap.delay_samples]
        y += tap.linear_gain * h * shifted
    return SignalFrame(y, replace(frame.meta, channel_tag=cfg.kind))

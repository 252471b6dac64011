"""Gated single-photon detection and the classical monitor photodiode.

The detector fires at most once per gate.  For a mean photon number mu
inside the gate the click probability is

    p = 1 - exp(-mu * efficiency) + p_dark + p_bg,   clamped to [0, 1],

and the counts in a one-bin integration window are Binomial over the gates
in that window.  Dark counts are subtracted in expectation, so net counts
may be negative on a quiet bin.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ContractViolation


@dataclass
class SpcmConfig:
    """Gated avalanche photodiode parameters."""

    efficiency: float = 0.15
    gate_rate_hz: float = 1.0e5
    gate_width_ns: float = 2.5
    p_dark: float = 3.2e-5
    p_bg: float = 0.0

    def __post_init__(self):
        if not (0.0 <= self.efficiency <= 1.0):
            raise ContractViolation("SpcmConfig: efficiency must be in [0, 1]")
        if self.gate_rate_hz <= 0 or self.gate_width_ns <= 0:
            raise ContractViolation("SpcmConfig: gate rate and width must be positive")
        if not (0.0 <= self.p_dark <= 1.0 and 0.0 <= self.p_bg <= 1.0):
            raise ContractViolation("SpcmConfig: probabilities must be in [0, 1]")
        if self.gate_width_ns * 1e-9 > 1.0 / self.gate_rate_hz:
            raise ContractViolation("SpcmConfig: gates overlap at this rate")


def gate_detection_prob(mean_photons, cfg: SpcmConfig):
    """Per-gate click probability for a mean photon number (scalar or array)."""
    mu = np.asarray(mean_photons, dtype=float)
    if np.any(mu < 0) or not np.all(np.isfinite(mu)):
        raise ContractViolation("gate_detection_prob: mean photons must be >= 0")
    p = 1.0 - np.exp(-mu * cfg.efficiency) + cfg.p_dark + cfg.p_bg
    p = np.clip(p, 0.0, 1.0)
    return float(p) if np.isscalar(mean_photons) else p


def sample_counts(p_click: float, n_gates: int, rng: np.random.Generator) -> int:
    """Detected counts over n_gates independent gates."""
    if not (0.0 <= p_click <= 1.0):
        raise ContractViolation("sample_counts: p_click must be in [0, 1]")
    if n_gates < 0:
        raise ContractViolation("sample_counts: n_gates must be >= 0")
    return int(rng.binomial(n_gates, p_click))


def net_counts(raw, cfg: SpcmConfig, bin_s: float):
    """Dark-subtracted counts: raw minus the expected dark yield of the bin."""
    if bin_s <= 0:
        raise ContractViolation("net_counts: bin_s must be positive")
    expected_dark = cfg.gate_rate_hz * bin_s * cfg.p_dark
    return np.asarray(raw, dtype=float) - expected_dark


def pin_intensity(power: float, noise_sigma: float, rng: np.random.Generator) -> float:
    """Monitor photodiode sample: additive Gaussian noise, floored at zero."""
    if power < 0:
        raise ContractViolation("pin_intensity: power must be >= 0")
    if noise_sigma < 0:
        raise ContractViolation("pin_intensity: noise_sigma must be >= 0")
    value = power
    if noise_sigma > 0:
        value += rng.normal(0.0, noise_sigma)
    return max(0.0, value)


@dataclass
class CountSeries:
    """Uniformly binned detector record."""

    bin_s: float
    raw: np.ndarray
    net: np.ndarray

    def __post_init__(self):
        self.raw = np.asarray(self.raw)
        self.net = np.asarray(self.net, dtype=float)
        if self.bin_s <= 0:
            raise ContractViolation("CountSeries: bin_s must be positive")
        if self.raw.shape != self.net.shape or self.raw.ndim != 1:
            raise ContractViolation("CountSeries: raw and net must be equal-length 1-d")
        if np.any(self.raw < 0):
            raise ContractViolation("CountSeries: raw counts must be >= 0")

    def times_s(self) -> np.ndarray:
        """Start time of each bin."""
        return np.arange(len(self.raw)) * self.bin_s

    def __len__(self) -> int:
        return len(self.raw)

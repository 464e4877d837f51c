"""Source-side pathway: disturbance generation, the input-side suppressor
and applied-input statistics.

Two temporal shapes are supported.  ``white`` draws i.i.d. Gaussians with
per-channel standard deviation sigma.  ``ar1`` runs
w_t = a*w_{t-1} + (1-a)*eps_t with eps_t ~ N(0, sigma^2 I) and a stationary
initial draw, giving stationary per-channel variance
sigma^2 * (1-a)/(1+a).  The suppressor is the causal first-order smoother
u_app[t] = (1-beta)*u_app[t-1] + beta*u_raw[t] seeded with u_app[0] =
u_raw[0]; beta = 1 (or a disabled config) reproduces the raw sequence
bit for bit.
"""

import math
from dataclasses import dataclass

import numpy as np

from ._backend import kernels
from .errors import EmptyHorizon, InsufficientSamples, InvalidBeta, ShapeError

NOISE_KINDS = ("white", "ar1")


@dataclass(frozen=True)
class NoiseSpec:
    """Disturbance generator description."""

    kind: str = "white"
    sigma: float = 1.0
    ar_coefficient: float = 0.0
    channels: int = 1

    def __post_init__(self):
        if self.kind not in NOISE_KINDS:
            raise ShapeError(f"noise kind must be one of {NOISE_KINDS}, got {self.kind!r}")
        if not (math.isfinite(self.sigma) and self.sigma > 0.0):
            raise ShapeError("sigma must be finite and positive")
        if not (0.0 <= self.ar_coefficient < 1.0):
            raise ShapeError("ar_coefficient must lie in [0, 1)")
        if self.channels < 1:
            raise ShapeError("channels must be >= 1")


@dataclass(frozen=True)
class SuppressorConfig:
    """Input-side suppressor: update rate beta in (0, 1], plus a master
    enable.  Disabled or beta = 1 means the applied path is the raw path."""

    beta: float = 0.85
    enabled: bool = True

    def __post_init__(self):
        if not (0.0 < self.beta <= 1.0):
            raise InvalidBeta(f"beta must lie in (0, 1], got {self.beta}")

    @property
    def is_identity(self):
        return (not self.enabled) or self.beta == 1.0


IDENTITY_SUPPRESSOR = SuppressorConfig(beta=1.0, enabled=False)


def sample_noise(spec, horizon, stream):
    """Draw a (horizon, channels) disturbance block from the stream.

    White and AR(1) consume the same number of underlying deviates in the
    same order, so switching the kind on a fixed stream is a matched-seed
    intervention.
    """
    if horizon < 1:
        raise EmptyHorizon("noise horizon must be >= 1")
    block = stream.gaussians(horizon * spec.channels).reshape(horizon, spec.channels)
    if spec.kind == "white":
        return spec.sigma * block
    return kernels.ar1_shape(block, spec.sigma, spec.ar_coefficient)


def apply_suppressor(raw, config):
    """Run the applied-input smoother over a (T,) or (T, m) sequence."""
    arr = np.asarray(raw, dtype=np.float64)
    squeeze = arr.ndim == 1
    if squeeze:
        arr = arr[:, None]
    if arr.ndim != 2 or arr.shape[0] < 1:
        raise EmptyHorizon("suppressor input must contain at least one sample")
    if config.is_identity:
        out = arr.copy()
    else:
        out = kernels.ema_filter(np.ascontiguousarray(arr), config.beta)
    return out[:, 0] if squeeze else out


def ema_variance_ratio(beta):
    """Stationary output/input variance ratio of the smoother driven by
    white noise: beta / (2 - beta)."""
    if not (0.0 < beta <= 1.0):
        raise InvalidBeta(f"beta must lie in (0, 1], got {beta}")
    return beta / (2.0 - beta)


def ar1_variance_ratio(a):
    """Stationary variance of the AR(1) source relative to its white
    generator: (1 - a) / (1 + a)."""
    if not (0.0 <= a < 1.0):
        raise ShapeError(f"ar coefficient must lie in [0, 1), got {a}")
    return (1.0 - a) / (1.0 + a)


@dataclass(frozen=True)
class SignalStats:
    """Variance summary of a signal.

    Variances are population (divide by N) about the signal's own mean,
    per channel; ``total_variance`` is their sum, i.e. the trace of the
    empirical covariance.  ``step_diff_variance`` is the total population
    variance of the first-difference signal (the jitter proxy); it is None
    when the signal has fewer than two samples.
    """

    per_channel_variance: tuple
    total_variance: float
    step_diff_variance: float | None


def signal_stats(signal):
    """Compute SignalStats for a (T,) or (T, m) sequence."""
    arr = np.asarray(signal, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr[:, None]
    if arr.ndim != 2 or arr.shape[0] < 1:
        raise InsufficientSamples("signal must contain at least one sample")
    centered = arr - arr.mean(axis=0)
    per_channel = (centered * centered).mean(axis=0)
    jitter = None
    if arr.shape[0] >= 2:
        diff = arr[1:] - arr[:-1]
        diff_centered = diff - diff.mean(axis=0)
        jitter = float((diff_centered * diff_centered).mean(axis=0).sum())
    return SignalStats(
        per_channel_variance=tuple(float(v) for v in per_channel),
        total_variance=float(per_channel.sum()),
        step_diff_variance=jitter,
    )

"""Monte Carlo rollout engines and the rollout-level metrics.

Both engines draw one substream per rollout, keyed by
(base_seed, label, rollout index), so results are bit-identical across
worker counts and scheduling orders.  Aggregation runs in fixed rollout
order on the main thread.

Metric conventions
------------------
cov_trace      mean over rollouts of (1/T) sum_t ||x_t - x_bar||^2, with
               x_bar that rollout's time mean (the empirical-covariance
               trace of each trajectory).
j_peak         mean over rollouts of max_t ||x_t||_2.
applied_input_variance
               per-channel population variance of the applied inputs
               pooled over all accepted rollouts and steps (about the
               pooled mean), summed over channels.  Pooling keeps the
               estimator unbiased for temporally correlated inputs, which
               per-rollout time means would not be at T = 80.
state_rms_*    pooled root mean square over all accepted (rollout, step)
               pairs; ``full`` uses the state 2-norm, selected entries use
               single components.
control_rms    pooled RMS of the applied-input 2-norm.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ._backend import kernels
from .errors import DivergedRollout, EmptyHorizon, ShapeError
from .rng import RandomStream
from .signals import apply_suppressor, sample_noise


@dataclass(frozen=True)
class InitialState:
    """Rollout initial condition: zero, a fixed vector, or Gaussian."""

    kind: str = "zero"
    vector: np.ndarray | None = None
    covariance: np.ndarray | None = None

    def __post_init__(self):
        if self.kind not in ("zero", "fixed", "gaussian"):
            raise ShapeError(f"unknown initial-state kind {self.kind!r}")
        if self.kind == "fixed" and self.vector is None:
            raise ShapeError("fixed initial state requires a vector")
        if self.kind == "gaussian" and self.covariance is None:
            raise ShapeError("gaussian initial state requires a covariance")


ZERO_INITIAL = InitialState()


@dataclass(frozen=True)
class RolloutConfig:
    """Batch geometry and seeding for a Monte Carlo run."""

    horizon: int
    n_rollouts: int
    base_seed: int
    label: str = "rollout"
    initial: InitialState = ZERO_INITIAL
    selected_indices: tuple = ()

    def __post_init__(self):
        if self.horizon < 1:
            raise EmptyHorizon("horizon must be >= 1")
        if self.n_rollouts < 1:
            raise ShapeError("n_rollouts must be >= 1")


@dataclass
class RolloutMetrics:
    """Aggregated metrics of one rollout batch (see module docstring)."""

    cov_trace: float
    j_peak: float
    applied_input_variance: float
    state_rms_full: float
    state_rms_selected: tuple
    control_rms: float
    diverged_count: int
    n_rollouts: int
    horizon: int
    per_rollout_cov_trace: np.ndarray
    per_rollout_peak_norm: np.ndarray
    per_rollout_applied_variance: np.ndarray
    trajectories: list = field(default_factory=list, repr=False)


def _initial_factor(initial, dim):
    if initial.kind != "gaussian":
        return None
    cov = np.asarray(initial.covariance, dtype=np.float64)
    if cov.shape != (dim, dim):
        raise ShapeError(f"initial covariance must be {dim}x{dim}, got {cov.shape}")
    vals, vecs = np.linalg.eigh(0.5 * (cov + cov.T))
    vals = np.clip(vals, 0.0, None)
    return vecs * np.sqrt(vals)


def _draw_initial(initial, dim, factor, stream):
    if initial.kind == "zero":
        return np.zeros(dim)
    if initial.kind == "fixed":
        vec = np.asarray(initial.vector, dtype=np.float64)
        if vec.shape != (dim,):
            raise ShapeError(f"initial vector must have shape ({dim},)")
        return vec.copy()
    z = stream.gaussians(dim)
    return factor @ z


def _rollout_record(states, applied):
    """Per-rollout reductions shared by both engines."""
    horizon = states.shape[0]
    centered = states - states.mean(axis=0)
    cov_trace = float((centered * centered).sum() / horizon)
    norms_sq = (states * states).sum(axis=1)
    peak = float(math.sqrt(float(np.max(norms_sq))))
    ssq_full = float(norms_sq.sum())
    ssq_states = (states * states).sum(axis=0)
    u_centered = applied - applied.mean(axis=0)
    applied_var = float((u_centered * u_centered).sum() / horizon)
    ssq_u = float((applied * applied).sum())
    return cov_trace, peak, ssq_full, ssq_states, applied_var, ssq_u


def _run_chunked(worker, n_rollouts, threads):
    """Execute ``worker(r)`` for every rollout index with deterministic
    ordering of the collected results."""
    if threads <= 1:
        return [worker(r) for r in range(n_rollouts)]
    bounds = np.linspace(0, n_rollouts, threads + 1).astype(int)
    chunks = [range(bounds[i], bounds[i + 1]) for i in range(threads)]

    def run_chunk(chunk):
        return [worker(r) for r in chunk]

    with ThreadPoolExecutor(max_workers=threads) as pool:
        parts = list(pool.map(run_chunk, chunks))
    return [rec for part in parts for rec in part]


def _aggregate(records, config, state_dim, max_diverged_fraction):
    accepted = [rec for rec in records if rec is not None and rec[0] is not None]
    diverged = len(records) - len(accepted)
    if diverged > max_diverged_fraction * len(records) or not accepted:
        raise DivergedRollout(
            f"{diverged} of {len(records)} rollouts diverged",
            diverged=diverged,
            total=len(records),
        )
    horizon = config.horizon
    n_acc = len(accepted)
    cov_traces = np.array([rec[0][0] for rec in accepted])
    peaks = np.array([rec[0][1] for rec in accepted])
    ssq_full = np.array([rec[0][2] for rec in accepted])
    ssq_states = np.vstack([rec[0][3] for rec in accepted])
    applied_vars = np.array([rec[0][4] for rec in accepted])
    ssq_u = np.array([rec[0][5] for rec in accepted])

    pooled_applied = np.concatenate([rec[1] for rec in accepted], axis=0)
    pooled_mean = pooled_applied.mean(axis=0)
    pooled_centered = pooled_applied - pooled_mean
    applied_variance = float((pooled_centered * pooled_centered).mean(axis=0).sum())

    samples = n_acc * horizon
    state_rms_full = float(math.sqrt(float(ssq_full.sum()) / samples))
    selected = tuple(
        float(math.sqrt(float(ssq_states[:, i].sum()) / samples))
        for i in config.selected_indices
    )
    control_rms = float(math.sqrt(float(ssq_u.sum()) / samples))

    trajectories = [rec[2] for rec in accepted if rec[2] is not None]
    return RolloutMetrics(
        cov_trace=float(cov_traces.mean()),
        j_peak=float(peaks.mean()),
        applied_input_variance=applied_variance,
        state_rms_full=state_rms_full,
        state_rms_selected=selected,
        control_rms=control_rms,
        diverged_count=diverged,
        n_rollouts=config.n_rollouts,
        horizon=config.horizon,
        per_rollout_cov_trace=cov_traces,
        per_rollout_peak_norm=peaks,
        per_rollout_applied_variance=applied_vars,
        trajectories=trajectories,
    )


def simulate_linear(system, noise, suppressor, config, threads=1,
                    keep_trajectories=False):
    """Monte Carlo batch of x_{t+1} = A x_t + G w_t with w the suppressed
    disturbance.  Deterministic given the config seed and label."""
    if noise.channels != system.channels:
        raise ShapeError(
            f"noise channels {noise.channels} != disturbance channels {system.channels}"
        )
    a = system.a
    g = system.g
    dim = system.dim
    factor = _initial_factor(config.initial, dim)

    def worker(r):
        stream = RandomStream.from_keys(config.base_seed, config.label, r)
        x0 = _draw_initial(config.initial, dim, factor, stream)
        raw = sample_noise(noise, config.horizon, stream)
        applied = apply_suppressor(raw, suppressor)
        states = kernels.linear_rollout(a, g, applied, x0)
        traj = (r, states, raw, applied) if keep_trajectories else None
        return (_rollout_record(states, applied), applied, traj)

    records = _run_chunked(worker, config.n_rollouts, threads)
    return _aggregate(records, config, dim, max_diverged_fraction=0.0)


def simulate_generic(step, controller, noise, suppressor, config,
                     channel_scales=None, theta_limit=None, threads=1,
                     keep_trajectories=False, force_python=False,
                     max_diverged_fraction=0.01):
    """Monte Carlo batch of a generic closed loop.

    Per step: u_pi = controller(x); u_raw = u_pi + eta_t; u_app follows the
    suppressor recursion; x_{t+1} = step(x, u_app).  ``eta`` is the sampled
    noise scaled per channel by ``channel_scales``.  Rollouts that leave
    the valid region (non-finite state, or |state[2]| >= theta_limit when a
    limit is given) are excluded, counted, and fail the run above
    ``max_diverged_fraction``.

    When ``step`` and ``controller`` expose the quadrotor kernel protocol
    (``quad_kernel_args`` / ``linear_gain_args``) the batch runs on the
    compiled kernels; the generic Python loop is the reference path and is
    bit-identical to it.
    """
    scales = None
    if channel_scales is not None:
        scales = np.asarray(channel_scales, dtype=np.float64)
        if scales.shape != (noise.channels,):
            raise ShapeError(
                f"channel_scales must have shape ({noise.channels},), got {scales.shape}"
            )
    fast = (
        not force_python
        and hasattr(step, "quad_kernel_args")
        and hasattr(controller, "linear_gain_args")
        and noise.channels == 2
    )
    limit = math.inf if theta_limit is None else float(theta_limit)
    use_ema = not suppressor.is_identity
    beta = suppressor.beta

    if fast:
        mass, inertia, gravity, dt = step.quad_kernel_args
        k_mat, u_eq = controller.linear_gain_args
        k_mat = np.ascontiguousarray(k_mat, dtype=np.float64)
        u_eq = np.ascontiguousarray(u_eq, dtype=np.float64)
        dim = 6
    else:
        dim = None  # discovered from the initial state / controller

    factor = None
    if config.initial.kind == "gaussian":
        probe_dim = np.asarray(config.initial.covariance).shape[0]
        factor = _initial_factor(config.initial, probe_dim)

    def draw_eta(stream):
        raw_eta = sample_noise(noise, config.horizon, stream)
        if scales is None:
            return raw_eta
        return raw_eta * scales

    def worker_fast(r):
        stream = RandomStream.from_keys(config.base_seed, config.label, r)
        x0 = _draw_initial(config.initial, dim, factor, stream)
        eta = draw_eta(stream)
        states = np.empty((config.horizon, 6))
        u_app = np.empty((config.horizon, 2))
        completed = kernels.quad_rollout(
            mass, inertia, gravity, dt, k_mat, u_eq,
            np.ascontiguousarray(eta), beta, use_ema, x0, limit,
            states, u_app,
        )
        if completed < config.horizon:
            return (None, None, None)
        traj = None
        if keep_trajectories:
            prev_states = np.vstack([x0, states[:-1]])
            u_raw = (u_eq - prev_states @ k_mat.T) + eta
            traj = (r, states, u_raw, u_app)
        return (_rollout_record(states, u_app), u_app, traj)

    def worker_slow(r):
        stream = RandomStream.from_keys(config.base_seed, config.label, r)
        if config.initial.kind == "fixed":
            d = np.asarray(config.initial.vector).shape[0]
        elif config.initial.kind == "gaussian":
            d = np.asarray(config.initial.covariance).shape[0]
        else:
            d = _slow_dim(step, controller)
        x = _draw_initial(config.initial, d, factor, stream)
        eta = draw_eta(stream)
        check_theta = math.isfinite(limit) and d > 2
        states = np.empty((config.horizon, d))
        raw_seq = np.empty((config.horizon, noise.channels))
        u_app_seq = np.empty((config.horizon, noise.channels))
        prev = None
        for t in range(config.horizon):
            u_pi = controller(x)
            u_raw = u_pi + eta[t]
            if use_ema and t > 0:
                u_t = (1.0 - beta) * prev + beta * u_raw
            else:
                u_t = u_raw
            prev = u_t
            raw_seq[t] = u_raw
            u_app_seq[t] = u_t
            x = step(x, u_t)
            if not np.all(np.isfinite(x)):
                return (None, None, None)
            if check_theta and abs(float(x[2])) >= limit:
                return (None, None, None)
            states[t] = x
        traj = (r, states, raw_seq, u_app_seq) if keep_trajectories else None
        return (_rollout_record(states, u_app_seq), u_app_seq, traj)

    worker = worker_fast if fast else worker_slow
    records = _run_chunked(worker, config.n_rollouts, threads)
    return _aggregate(records, config, dim, max_diverged_fraction)


def _slow_dim(step, controller):
    for obj in (step, controller):
        dim = getattr(obj, "state_dim", None)
        if dim is not None:
            return int(dim)
    raise ShapeError(
        "cannot infer state dimension: provide a fixed/gaussian initial "
        "state or a step/controller exposing state_dim"
    )


def expected_time_avg_cov_trace(f, b, sigma2, v1, horizon, n_plant=None):
    """Exact E[(1/T) sum_t ||x_t - x_bar||^2] for a linear-Gaussian chain.

    The chain is z_{t+1} = F z_t + B eps_t with eps white of covariance
    sigma2 * I, second moment V1 = E[z_1 z_1^T] at the first recorded step,
    and x the leading ``n_plant`` components of z.  This is the analytic
    counterpart of the ``cov_trace`` estimator, including its finite-T
    time-mean subtraction, so Monte Carlo and theory can be compared at
    any horizon; it converges to the stationary Lyapunov trace as T grows.
    """
    f = np.asarray(f, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    v1 = np.asarray(v1, dtype=np.float64)
    n = f.shape[0]
    if n_plant is None:
        n_plant = n
    q = sigma2 * (b @ b.T)

    def plant_trace(mat):
        return float(np.trace(mat[:n_plant, :n_plant]))

    second_moments = [v1]
    for _ in range(horizon - 1):
        second_moments.append(f @ second_moments[-1] @ f.T + q)
    diag_sum = sum(plant_trace(v) for v in second_moments)
    pair_sum = diag_sum
    for t in range(horizon):
        cur = second_moments[t]
        for _ in range(t + 1, horizon):
            cur = f @ cur
            pair_sum += 2.0 * plant_trace(cur)
    return diag_sum / horizon - pair_sum / (horizon * horizon)

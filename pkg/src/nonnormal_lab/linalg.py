"""Dense real-matrix numerics for small systems.

Spectral radius, spectral norm, eigenvector conditioning, certified peak
transient gain and discrete Lyapunov solves.  Everything here targets the
tiny (n <= ~10) matrices produced by the rest of the package; numerical
robustness is preferred over scale.  Eigen/SVD factorizations are
delegated to LAPACK through numpy.
"""

from dataclasses import dataclass

import numpy as np

from .errors import (
    InvalidCovariance,
    InvalidMatrix,
    NearDefective,
    NotSchurStable,
    ShapeError,
)

DEFAULT_PEAK_GAIN_STEPS = 10_000
DEFAULT_LYAPUNOV_TOL = 1e-10


def as_matrix(a, name="matrix"):
    """Validate and return a float64 2-D array (all entries finite)."""
    arr = np.asarray(a, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ShapeError(f"{name} must be 2-D with positive shape, got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InvalidMatrix(f"{name} contains non-finite entries")
    return arr


def _as_square(a, name="matrix"):
    arr = as_matrix(a, name)
    if arr.shape[0] != arr.shape[1]:
        raise ShapeError(f"{name} must be square, got {arr.shape}")
    return arr


def spectral_norm(a):
    """Largest singular value of a (any rectangular shape)."""
    arr = as_matrix(a)
    return float(np.linalg.svd(arr, compute_uv=False)[0])


def spectral_radius(a):
    """Largest eigenvalue modulus of a square matrix."""
    arr = _as_square(a)
    return float(np.max(np.abs(np.linalg.eigvals(arr))))


@dataclass(frozen=True)
class EigenDecomposition:
    """Eigenvalues plus unit-norm, sign/phase-fixed right eigenvectors."""

    values: np.ndarray
    vectors: np.ndarray


def eigen_decomposition(a):
    """Eigendecomposition with a deterministic eigenvector normalization.

    Each column is scaled to unit 2-norm and rotated so its first
    significant component is real and positive; this makes kappa(V)
    independent of backend scaling conventions.
    """
    arr = _as_square(a)
    values, vectors = np.linalg.eig(arr)
    vectors = np.array(vectors, copy=True)
    for j in range(vectors.shape[1]):
        col = vectors[:, j]
        norm = np.linalg.norm(col)
        col = col / norm
        lead = 0.0
        for comp in col:
            if abs(comp) > 1e-12:
                lead = comp
                break
        if lead != 0.0:
            col = col * (np.conj(lead) / abs(lead))
        vectors[:, j] = col
    return EigenDecomposition(values=values, vectors=vectors)


def eigenvector_condition(a):
    """kappa(V) = sigma_max / sigma_min of the normalized eigenvector matrix."""
    dec = eigen_decomposition(a)
    svals = np.linalg.svd(dec.vectors, compute_uv=False)
    smax = float(svals[0])
    smin = float(svals[-1])
    if smin <= 1e-12 * smax:
        raise NearDefective(
            f"eigenvector matrix numerically singular (sigma_min={smin:.3e})",
            sigma_min=smin,
        )
    return smax / smin


@dataclass(frozen=True)
class PeakGainResult:
    """sup_k ||A^k||_2 together with where and how it was certified."""

    value: float
    argmax_step: int
    terminated_certified: bool
    steps_examined: int


def peak_gain(a, max_steps=DEFAULT_PEAK_GAIN_STEPS):
    """Certified peak transient gain of a Schur-stable matrix.

    Walks k = 0, 1, 2, ... tracking max ||A^k||_2.  Once some k has
    ||A^k||_2 < 1, every later power m = q*k + r satisfies
    ||A^m|| <= ||A^k||^q * ||A^r|| < max_{r<k} ||A^r||, so the running
    maximum is the exact supremum and the search stops certified.  If
    max_steps is exhausted first the result is flagged as a lower bound.
    """
    arr = _as_square(a)
    if spectral_radius(arr) >= 1.0:
        raise NotSchurStable(
            "peak gain certification requires spectral radius < 1"
        )
    best = 1.0  # ||A^0|| = 1
    best_k = 0
    power = np.eye(arr.shape[0])
    steps = 1
    for k in range(1, max_steps + 1):
        power = arr @ power
        norm_k = float(np.linalg.svd(power, compute_uv=False)[0])
        steps += 1
        if norm_k > best:
            best = norm_k
            best_k = k
        if norm_k < 1.0:
            return PeakGainResult(best, best_k, True, steps)
    return PeakGainResult(best, best_k, False, steps)


def _check_symmetric_psd(q, name="Q"):
    qa = _as_square(q, name)
    scale = max(1.0, float(np.max(np.abs(qa))))
    if float(np.max(np.abs(qa - qa.T))) > 1e-10 * scale:
        raise InvalidCovariance(f"{name} is asymmetric beyond tolerance")
    qs = 0.5 * (qa + qa.T)
    eigs = np.linalg.eigvalsh(qs)
    if eigs[0] < -1e-10 * scale:
        raise InvalidCovariance(f"{name} has negative eigenvalue {eigs[0]:.3e}")
    return qs


def solve_discrete_lyapunov(a, q, tol=DEFAULT_LYAPUNOV_TOL):
    """Solve Sigma = A Sigma A^T + Q for Schur-stable A by doubling.

    The iterate accumulates Sigma_{2N} = Sigma_N + A^N Sigma_N (A^N)^T with
    A^N squared each round, so convergence is quadratic.  The result is
    symmetrized and checked against the fixed-point residual
    ||Sigma - A Sigma A^T - Q||_F <= tol * ||Q||_F.
    """
    arr = _as_square(a, "A")
    qs = _check_symmetric_psd(q)
    if arr.shape != qs.shape:
        raise ShapeError(f"A and Q shapes differ: {arr.shape} vs {qs.shape}")
    if spectral_radius(arr) >= 1.0:
        raise NotSchurStable("discrete Lyapunov equation requires rho(A) < 1")
    q_norm = float(np.linalg.norm(qs))
    if q_norm == 0.0:
        return np.zeros_like(qs)
    sigma = qs.copy()
    ak = arr.copy()
    for _ in range(200):
        increment = ak @ sigma @ ak.T
        sigma = sigma + increment
        sigma = 0.5 * (sigma + sigma.T)
        ak = ak @ ak
        if float(np.linalg.norm(increment)) <= 0.25 * tol * q_norm:
            break
    residual = float(np.linalg.norm(sigma - arr @ sigma @ arr.T - qs))
    if residual > tol * q_norm:
        raise InvalidMatrix(
            f"Lyapunov solve residual {residual:.3e} exceeds {tol:.1e} * ||Q||"
        )
    return sigma


def lyapunov_series_oracle(a, q, increment_tol=1e-12, max_terms=100_000):
    """Reference solver: directly truncated series sum_k A^k Q (A^k)^T.

    Kept independent of solve_discrete_lyapunov so the two can
    cross-validate each other; do not merge the implementations.
    """
    arr = _as_square(a, "A")
    qs = _check_symmetric_psd(q)
    if spectral_radius(arr) >= 1.0:
        raise NotSchurStable("series oracle requires rho(A) < 1")
    total = qs.copy()
    term = qs.copy()
    scale = max(1.0, float(np.linalg.norm(qs)))
    for _ in range(max_terms):
        term = arr @ term @ arr.T
        total = total + term
        if float(np.linalg.norm(term)) < increment_tol * scale:
            break
    return 0.5 * (total + total.T)

"""Closed-loop models and the fixed-spectrum shear family.

The family keeps the eigenvalue set, spectral radius, disturbance channel
and source covariance fixed while a similarity shear strength alpha sweeps
the eigenvector geometry.  Only kappa(V) and the transient gain change
along the sweep, which is what makes it an amplifier-isolation instrument.
"""

from dataclasses import dataclass, field

import numpy as np

from . import linalg
from .errors import InvalidCovariance, NotSchurStable, ShapeError

DEFAULT_EIGENVALUES = (0.93, 0.5)
DEFAULT_ALPHA_MAX = 10.0
DEFAULT_ALPHA_COUNT = 21
DEFAULT_NOISE_SIGMA = 0.2


@dataclass(frozen=True)
class LinearClosedLoop:
    """The tuple (A, G, W): transition matrix, disturbance channel, source
    covariance.  Construction refuses unstable A and invalid W."""

    a: np.ndarray
    g: np.ndarray
    w: np.ndarray

    def __post_init__(self):
        a = linalg.as_matrix(self.a, "A")
        g = linalg.as_matrix(self.g, "G")
        w = linalg.as_matrix(self.w, "W")
        if a.shape[0] != a.shape[1]:
            raise ShapeError(f"A must be square, got {a.shape}")
        if g.shape[0] != a.shape[0]:
            raise ShapeError(f"G rows {g.shape[0]} != state dimension {a.shape[0]}")
        if w.shape != (g.shape[1], g.shape[1]):
            raise ShapeError(f"W must be {g.shape[1]}x{g.shape[1]}, got {w.shape}")
        scale = max(1.0, float(np.max(np.abs(w))))
        if float(np.max(np.abs(w - w.T))) > 1e-10 * scale:
            raise InvalidCovariance("W must be symmetric")
        if np.linalg.eigvalsh(0.5 * (w + w.T))[0] < -1e-10 * scale:
            raise InvalidCovariance("W must be positive semidefinite")
        if linalg.spectral_radius(a) >= 1.0:
            raise NotSchurStable("closed loop must have spectral radius < 1")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "g", g)
        object.__setattr__(self, "w", w)

    @property
    def dim(self):
        return self.a.shape[0]

    @property
    def channels(self):
        return self.g.shape[1]


def shear_matrix(alpha, n):
    """Unit upper-triangular shear: identity plus alpha on the first
    superdiagonal."""
    s = np.eye(n)
    for i in range(n - 1):
        s[i, i + 1] = alpha
    return s


def _nilpotent_inverse(s):
    # S = I + N with N strictly upper triangular: S^-1 = sum (-N)^k, exact.
    n = s.shape[0]
    nil = s - np.eye(n)
    inv = np.eye(n)
    term = np.eye(n)
    for _ in range(n - 1):
        term = -term @ nil
        inv = inv + term
    return inv


@dataclass(frozen=True)
class ShearFamilySpec:
    """Parameters of the alpha-sweep family."""

    eigenvalues: tuple = DEFAULT_EIGENVALUES
    alpha_grid: tuple = tuple(
        np.linspace(0.0, DEFAULT_ALPHA_MAX, DEFAULT_ALPHA_COUNT)
    )
    g: np.ndarray = field(default=None)
    w: np.ndarray = field(default=None)

    def __post_init__(self):
        eigs = tuple(float(v) for v in self.eigenvalues)
        if any(abs(v) >= 1.0 for v in eigs):
            raise NotSchurStable("all family eigenvalues must satisfy |lambda| < 1")
        grid = tuple(float(a) for a in self.alpha_grid)
        if any(a < 0.0 for a in grid):
            raise ShapeError("alpha grid entries must be >= 0")
        if list(grid) != sorted(grid):
            raise ShapeError("alpha grid must be sorted ascending")
        n = len(eigs)
        g = self.g
        if g is None:
            g = np.zeros((n, 1))
            g[n - 1, 0] = 1.0
        g = linalg.as_matrix(g, "G")
        w = self.w
        if w is None:
            w = np.array([[DEFAULT_NOISE_SIGMA ** 2]])
        w = linalg.as_matrix(w, "W")
        object.__setattr__(self, "eigenvalues", eigs)
        object.__setattr__(self, "alpha_grid", grid)
        object.__setattr__(self, "g", g)
        object.__setattr__(self, "w", w)

    @property
    def dim(self):
        return len(self.eigenvalues)

    @property
    def rho_target(self):
        return max(abs(v) for v in self.eigenvalues)


@dataclass(frozen=True)
class FamilyMember:
    """One alpha point: the system plus its structural diagnostics."""

    alpha: float
    system: LinearClosedLoop
    kappa_v: float
    rho: float
    g_peak: float


def family_matrix(spec, alpha):
    """Closed-loop matrix at shear strength alpha.

    Similarity with the inverse shear, S(alpha)^-1 Lambda S(alpha), which
    for n = 2 expands to [[l1, alpha*(l1 - l2)], [0, l2]]; the spectrum is
    exactly the configured eigenvalues for every alpha.
    """
    lam = np.diag(spec.eigenvalues)
    s = shear_matrix(alpha, spec.dim)
    return _nilpotent_inverse(s) @ lam @ s


def build_shear_family(spec):
    """Construct all family members with their diagnostics filled in."""
    members = []
    for alpha in spec.alpha_grid:
        a = family_matrix(spec, alpha)
        system = LinearClosedLoop(a=a, g=spec.g, w=spec.w)
        members.append(
            FamilyMember(
                alpha=alpha,
                system=system,
                kappa_v=linalg.eigenvector_condition(a),
                rho=linalg.spectral_radius(a),
                g_peak=linalg.peak_gain(a).value,
            )
        )
    return members


@dataclass(frozen=True)
class VerificationReport:
    """Outcome of the held-constant control checks over a family."""

    passed: bool
    violations: tuple


def verify_family_controls(members, tol=1e-8):
    """Check that the family holds its controls: identical eigenvalue
    multiset and spectral radius across members, bit-identical G and W.

    Violations are report content, not exceptions; experiments decide how
    to react.
    """
    if not members:
        raise ShapeError("family must contain at least one member")
    violations = []
    ref = members[0]
    ref_eigs = np.sort_complex(np.linalg.eigvals(ref.system.a))
    for idx, member in enumerate(members[1:], start=1):
        eigs = np.sort_complex(np.linalg.eigvals(member.system.a))
        if eigs.shape != ref_eigs.shape or np.max(np.abs(eigs - ref_eigs)) > tol:
            violations.append(
                f"member {idx} (alpha={member.alpha:g}): eigenvalue set differs"
            )
        if abs(member.rho - ref.rho) > tol:
            violations.append(
                f"member {idx} (alpha={member.alpha:g}): spectral radius drift"
            )
        if not np.array_equal(member.system.g, ref.system.g):
            violations.append(
                f"member {idx} (alpha={member.alpha:g}): disturbance channel G differs"
            )
        if not np.array_equal(member.system.w, ref.system.w):
            violations.append(
                f"member {idx} (alpha={member.alpha:g}): source covariance W differs"
            )
    return VerificationReport(passed=not violations, violations=tuple(violations))

"""Quasi-homogeneity analysis of thermodynamic potentials.

A potential Phi(E^1..E^n) is quasi-homogeneous when there are weights
q_a (equivalently powers p_a = 1/q_a) and a degree beta with

    Phi(lam**q_1 * E^1, ..., lam**q_n * E^n) = lam**beta * Phi(E)

whose infinitesimal form is the generalized Euler identity

    sum_a (E^a / p_a) * dPhi/dE^a = beta * Phi.

The identity is linear in (q_1..q_n, beta), so detection reduces to the
null space of a sample matrix with rows [E^1 I_1, ..., E^n I_n, -Phi].
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Dict, Mapping, Optional, Tuple

import numpy as np

from .errors import SamplingError
from .kernel import run_program_many

if TYPE_CHECKING:
    from .systems import ThermoSystem

RESIDUAL_EPS = 1e-300
SMALL_PHI = 1e-10
SVD_RCOND = 1e-10
VERIFY_LAMBDAS = (0.5, 2.0, 10.0)
VERIFY_THRESHOLD = 1e-8
_VERIFY_POINTS = 5


@dataclass(frozen=True)
class WeightAssignment:
    """Degree beta plus per-variable powers p_a of E'^a = (E^a)^p_a.

    The weights q_a = 1/p_a (the finite-scaling exponents) are derived
    at construction and kept alongside.
    """

    beta: float
    powers: Dict[str, float]
    weights: Dict[str, float] = field(init=False, compare=False)

    def __post_init__(self):
        if not math.isfinite(self.beta) or self.beta == 0.0:
            raise ValueError(f"degree beta must be finite and nonzero, got {self.beta}")
        powers = dict(self.powers)
        for name, p in powers.items():
            if not math.isfinite(p) or p == 0.0:
                raise ValueError(f"power for '{name}' must be finite and nonzero, got {p}")
        object.__setattr__(self, "powers", powers)
        object.__setattr__(self, "weights", {a: 1.0 / p for a, p in powers.items()})

    def normalized(self) -> "WeightAssignment":
        """Degree-1 form: p_bar_a = beta * p_a. Idempotent."""
        if self.beta == 1.0:
            return self
        return WeightAssignment(1.0, {a: self.beta * p for a, p in self.powers.items()})

    def rescaled(self, gamma: float) -> "WeightAssignment":
        """Gauge change: homogeneous in (E^a)^(gamma*p_a) of degree beta/gamma."""
        if not (gamma > 0.0) or not math.isfinite(gamma):
            raise ValueError(f"gamma must be a positive real, got {gamma}")
        return WeightAssignment(
            self.beta / gamma, {a: p * gamma for a, p in self.powers.items()}
        )

    def power_vector(self, variables: Tuple[str, ...]) -> np.ndarray:
        return np.array([self.powers[a] for a in variables], dtype=np.float64)

    def weight_vector(self, variables: Tuple[str, ...]) -> np.ndarray:
        return np.array([self.weights[a] for a in variables], dtype=np.float64)


def normalize_degree(w: WeightAssignment) -> WeightAssignment:
    return w.normalized()


def rescale_weights(w: WeightAssignment, gamma: float) -> WeightAssignment:
    return w.rescaled(gamma)


@dataclass(frozen=True)
class HomogeneityReport:
    """Outcome of weight detection.

    ``status`` is 'unique', 'degenerate', or 'none'; ``null_space_dim``
    is the raw SVD null-space dimension (kept even when finite-scaling
    verification downgrades the status to 'none').  Basis rows are in
    (q_1..q_n, beta) coordinates.  Residuals are the ones actually
    measured on the verification sample.
    """

    status: str
    null_space_dim: int
    variables: Tuple[str, ...]
    canonical: Optional[WeightAssignment]
    basis: np.ndarray
    max_euler_residual: float
    max_scaling_residual: float
    verification_passed: bool
    samples_used: int
    seed: int


def intensives(sys: "ThermoSystem", pt: Mapping[str, float]) -> Dict[str, float]:
    """Conjugate intensives I_a = dPhi/dE^a at a point, labeled by variable."""
    grad = sys.gradient(pt)
    return {a: float(g) for a, g in zip(sys.variables, grad)}


def euler_residual(
    sys: "ThermoSystem", w: WeightAssignment, pt: Mapping[str, float]
) -> float:
    """Relative defect of sum_a (E^a/p_a) I_a = beta * Phi at ``pt``."""
    arr = sys.point_array(pt)
    phi = sys.evaluate_array(arr)
    grad = sys.gradient_array(arr)
    lhs = 0.0
    for k, a in enumerate(sys.variables):
        lhs += (arr[k] / w.powers[a]) * grad[k]
    target = w.beta * phi
    return float(abs(lhs - target) / max(abs(target), RESIDUAL_EPS))


def scaling_residual(
    sys: "ThermoSystem", w: WeightAssignment, lam: float, pt: Mapping[str, float]
) -> float:
    """Relative defect of Phi(lam**q_a E^a) = lam**beta Phi(E) at ``pt``."""
    if not (lam > 0.0):
        raise ValueError(f"lambda must be positive, got {lam}")
    arr = sys.point_array(pt)
    q = w.weight_vector(sys.variables)
    return _scaling_residual_raw(sys, arr, q, w.beta, lam)


def _scaling_residual_raw(sys, arr, q_vec, beta, lam) -> float:
    scaled = arr * np.array([math.pow(lam, q) for q in q_vec])
    ref = math.pow(lam, beta) * sys.evaluate_array(arr)
    got = sys.evaluate_array(scaled)
    return float(abs(got - ref) / max(abs(ref), RESIDUAL_EPS))


def sample_points(sys: "ThermoSystem", count: int, seed: int) -> Tuple[np.ndarray, np.ndarray]:
    """Draw ``count`` admissible interior points, deterministically.

    Uniform per-variable draws in the system's sampling box; points
    where evaluation fails or |Phi| < 1e-10 are rejected and redrawn.
    Returns (points, potential values).
    """
    if count <= 0:
        raise ValueError("count must be positive")
    rng = np.random.default_rng(seed)
    n = len(sys.variables)
    lo = np.array([sys.sampling_box(v)[0] for v in sys.variables])
    hi = np.array([sys.sampling_box(v)[1] for v in sys.variables])
    taken_pts = []
    taken_phi = []
    total = 0
    attempts = 0
    while total < count:
        attempts += 1
        if attempts > 100:
            raise SamplingError(
                f"could not draw {count} admissible points for system '{sys.name}' "
                f"({total} accepted after {attempts - 1} batches)"
            )
        batch = rng.uniform(lo, hi, size=(count, n))
        phis, errs = run_program_many(sys.compiled.value, batch)
        good = (errs == 0) & np.isfinite(phis) & (np.abs(phis) >= SMALL_PHI)
        taken_pts.append(batch[good])
        taken_phi.append(phis[good])
        total += int(np.count_nonzero(good))
    pts = np.concatenate(taken_pts)[:count]
    phis = np.concatenate(taken_phi)[:count]
    return pts, phis


def _constraint_matrix(sys, pts, phis) -> np.ndarray:
    # rows [E^1 I_1, ..., E^n I_n, -Phi]
    n = len(sys.variables)
    m = pts.shape[0]
    A = np.empty((m, n + 1), dtype=np.float64)
    for k in range(n):
        g, errs = run_program_many(sys.compiled.grads[k], pts)
        if np.any(errs != 0):
            raise SamplingError("gradient evaluation failed on an accepted sample point")
        A[:, k] = pts[:, k] * g
    A[:, n] = -phis
    return A


def _euler_residual_rows(A, phis, vec) -> float:
    beta = vec[-1]
    devs = np.abs(A @ vec)
    denom = np.maximum(np.abs(beta * phis), RESIDUAL_EPS)
    if beta == 0.0:
        denom = np.maximum(np.abs(phis), RESIDUAL_EPS)
    return float(np.max(devs / denom))


def detect_weights(sys: "ThermoSystem", sample_count: int = 64, seed: int = 0) -> HomogeneityReport:
    """Detect the quasi-homogeneity data (beta, p_a) of a potential.

    Builds the Euler constraint matrix at ``sample_count`` seeded random
    interior points and takes its SVD null space (relative cutoff
    1e-10).  One null direction means a unique weight assignment, more
    means a degenerate family, none means the potential is not
    quasi-homogeneous under per-variable power maps.  The canonical
    assignment is the minimum-norm null vector rescaled to beta = 1.
    Candidates must additionally survive a finite-scaling check at
    lambda in {0.5, 2, 10}; otherwise the status is downgraded to
    'none' with the measured residuals reported.
    """
    n = len(sys.variables)
    if sample_count < n + 3:
        raise ValueError(f"sample_count must be at least n+3 = {n + 3}")

    pts, phis = sample_points(sys, sample_count, seed)
    A = _constraint_matrix(sys, pts, phis)

    _, s, Vh = np.linalg.svd(A, full_matrices=False)
    smax = s[0] if len(s) else 0.0
    if smax == 0.0:
        null_mask = np.ones(len(s), dtype=bool)
    else:
        null_mask = s <= SVD_RCOND * smax
    basis = Vh[null_mask].copy()
    dim = basis.shape[0]

    if dim == 0:
        return HomogeneityReport(
            status="none",
            null_space_dim=0,
            variables=sys.variables,
            canonical=None,
            basis=basis,
            max_euler_residual=float("nan"),
            max_scaling_residual=float("nan"),
            verification_passed=False,
            samples_used=sample_count,
            seed=seed,
        )

    # Canonical vector: minimum Euclidean norm subject to beta-component 1.
    # With an orthonormal basis this is c = r/|r|^2, v = c @ basis where r
    # collects the beta components.
    canonical = None
    canonical_vec = None
    r = basis[:, -1]
    rnorm2 = float(r @ r)
    if rnorm2 > 1e-20:
        v = (r / rnorm2) @ basis
        q = v[:n]
        if np.all(np.abs(q) > 1e-9 * max(1.0, float(np.linalg.norm(q)))):
            canonical_vec = v
            canonical = WeightAssignment(
                1.0, {a: float(1.0 / q[k]) for k, a in enumerate(sys.variables)}
            )

    check_vectors = [canonical_vec] if canonical_vec is not None else [b for b in basis]

    max_euler = max(_euler_residual_rows(A, phis, vec) for vec in check_vectors)

    n_verify = min(_VERIFY_POINTS, pts.shape[0])
    max_scaling = 0.0
    for vec in check_vectors:
        q_vec, beta = vec[:n], vec[-1]
        for lam in VERIFY_LAMBDAS:
            for row in range(n_verify):
                try:
                    resid = _scaling_residual_raw(sys, pts[row], q_vec, beta, lam)
                except Exception:
                    continue  # scaled point left the domain; not evidence either way
                max_scaling = max(max_scaling, resid)

    passed = max_scaling <= VERIFY_THRESHOLD
    if passed:
        status = "unique" if dim == 1 else "degenerate"
    else:
        status = "none"

    return HomogeneityReport(
        status=status,
        null_space_dim=dim,
        variables=sys.variables,
        canonical=canonical if passed else None,
        basis=basis,
        max_euler_residual=max_euler,
        max_scaling_residual=max_scaling,
        verification_passed=passed,
        samples_used=sample_count,
        seed=seed,
    )


def is_strictly_homogeneous(report: HomogeneityReport, tol: float = 1e-9) -> bool:
    """Whether some null-space member has all weights q_a equal.

    True exactly when the potential is homogeneous in the plain sense
    (all p_bar_a equal), the restrictive case the general framework
    relaxes.
    """
    if report.canonical is None:
        raise ValueError("report has no canonical weight assignment")
    n = len(report.variables)
    B = report.basis
    if n == 1:
        return True  # a single weight is trivially "all equal"
    # Solve for combinations with q_1 = q_2 = ... = q_n: rows q_a - q_(a+1).
    D = np.zeros((n - 1, n + 1))
    for a in range(n - 1):
        D[a, a] = 1.0
        D[a, a + 1] = -1.0
    M = D @ B.T  # (n-1) x k
    _, s, Vh = np.linalg.svd(M, full_matrices=True)
    k = B.shape[0]
    smax = s[0] if len(s) else 0.0
    null_count = int(np.sum(s <= max(tol * smax, 1e-12))) + max(0, k - len(s))
    if null_count == 0:
        return False
    for c in Vh[k - null_count:]:
        v = c @ B
        q, beta = v[:n], v[-1]
        t = float(np.mean(q))
        if abs(t) <= tol * max(1.0, float(np.linalg.norm(v))):
            continue  # all-zero weights: not a usable assignment
        if abs(beta) <= tol * max(1.0, float(np.linalg.norm(v))):
            continue
        if np.max(np.abs(q - t)) <= tol * max(1.0, abs(t)):
            return True
    return False

"""Conformal metric family on the equilibrium manifold and its
behavior under change of representation.

The base metric in the Phi-representation is the diagonal-weighted
Hessian form

    g_mc = C * Lambda_c * chi_c * H_cm,    C = sum_a xi_a I_a E^a,

with H the potential's Hessian and I its gradient.  Solving the first
law for one variable E^(i) induces a metric in that representation;
the two bracket arrangements (here ``induced_metric_c1`` and
``induced_metric_c2``) agree exactly when the admissibility constraint
Lambda_i chi_i = Lambda_j chi_j holds, and then the induced metric is
conformal to the base metric with a scalar factor computable in closed
form (``conformal_factor_c4`` and its degree-1 and two-variable
specializations).  ``representation_reconstruct`` rebuilds the family
natively in the new representation as an independent cross-check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Tuple

import numpy as np

from .errors import (
    DegenerateConformalFactor,
    SingularRepresentation,
    ValidationError,
)
from .homogeneity import WeightAssignment
from .systems import ThermoSystem

SYMMETRY_RTOL = 1e-12
_TINY = 1e-300


@dataclass(frozen=True)
class MetricSpec:
    """Diagonal coefficients (Lambda_a, chi_a, xi_a) of a family member.

    chi is either all +1 or has exactly one -1 in the first variable
    slot; those are the two admitted signatures.
    """

    variables: Tuple[str, ...]
    lam: Tuple[float, ...]
    chi: Tuple[int, ...]
    xi: Tuple[float, ...]

    def __post_init__(self):
        n = len(self.variables)
        object.__setattr__(self, "variables", tuple(self.variables))
        object.__setattr__(self, "lam", tuple(float(v) for v in self.lam))
        object.__setattr__(self, "chi", tuple(int(v) for v in self.chi))
        object.__setattr__(self, "xi", tuple(float(v) for v in self.xi))
        if not (len(self.lam) == len(self.chi) == len(self.xi) == n):
            raise ValidationError("Lambda/chi/xi lengths must match the variable count")
        delta = all(c == 1 for c in self.chi)
        eta = n >= 1 and self.chi[0] == -1 and all(c == 1 for c in self.chi[1:])
        if not (delta or eta):
            raise ValidationError(
                f"chi must be all +1 or diag[-1, 1, ..., 1], got {self.chi}"
            )
        if not all(math.isfinite(v) for v in self.lam + self.xi):
            raise ValidationError("Lambda and xi entries must be finite")

    @classmethod
    def delta(cls, variables, lam=None, xi=None) -> "MetricSpec":
        variables = tuple(variables)
        n = len(variables)
        return cls(
            variables,
            tuple(lam) if lam is not None else (1.0,) * n,
            (1,) * n,
            tuple(xi) if xi is not None else (1.0,) * n,
        )

    @classmethod
    def eta(cls, variables, lam=None, xi=None) -> "MetricSpec":
        variables = tuple(variables)
        n = len(variables)
        return cls(
            variables,
            tuple(lam) if lam is not None else (-1.0,) + (1.0,) * (n - 1),
            (-1,) + (1,) * (n - 1),
            tuple(xi) if xi is not None else (1.0,) * n,
        )

    def satisfies_c3(self) -> bool:
        """Admissibility: Lambda_a * chi_a identical across all slots."""
        products = [l * c for l, c in zip(self.lam, self.chi)]
        ref = products[0]
        scale = max(abs(p) for p in products) or 1.0
        return all(abs(p - ref) <= 1e-12 * scale for p in products)


def check_constraint_c3(spec: MetricSpec) -> bool:
    return spec.satisfies_c3()


@dataclass(frozen=True)
class BilinearForm:
    """An n x n real form in the dE^a (x) dE^b basis, symmetry measured."""

    labels: Tuple[str, ...]
    matrix: np.ndarray
    symmetric: bool

    @classmethod
    def measure(cls, labels, matrix: np.ndarray) -> "BilinearForm":
        m = np.array(matrix, dtype=np.float64)
        if not np.all(np.isfinite(m)):
            raise ValidationError("bilinear form has non-finite components")
        scale = float(np.max(np.abs(m)))
        symmetric = True
        if scale > 0.0:
            symmetric = float(np.max(np.abs(m - m.T))) <= SYMMETRY_RTOL * scale
        m.setflags(write=False)
        return cls(tuple(labels), m, symmetric)

    def det(self) -> float:
        return float(np.linalg.det(self.matrix))


@dataclass(frozen=True)
class ConformalReport:
    """Scalar factor relating the induced metric to the base metric."""

    factor: float
    residual: float
    c3_satisfied: bool


@dataclass(frozen=True)
class Beta1Result:
    """Degree-1 induced metric with the factor computed two ways."""

    form: BilinearForm
    factor_bracket: float  # from the explicit bracket
    factor_potential: float  # from the form that substitutes Phi itself
    agreement: float


@dataclass(frozen=True)
class ReconstructionReport:
    form: BilinearForm
    offprop_vs_induced: float
    scalar_vs_base: float
    factor_c4: float
    scalar_deviation: float
    jacobian_condition: float
    rep_weights: WeightAssignment
    rep_labels: Tuple[str, ...]


# ---------------------------------------------------------------------------
# shared helpers


def _state(sys: ThermoSystem, pt: Mapping[str, float]):
    arr = sys.point_array(pt)
    phi = sys.evaluate_array(arr)
    I = sys.gradient_array(arr)
    H = sys.hessian_array(arr)
    return arr, phi, I, H


def _check_spec(sys: ThermoSystem, spec: MetricSpec) -> None:
    if spec.variables != sys.variables:
        raise ValidationError(
            f"metric spec is for variables {spec.variables}, system has {sys.variables}"
        )


def _rep_index(sys: ThermoSystem, rep: str) -> int:
    try:
        return sys.variables.index(rep)
    except ValueError:
        raise ValidationError(
            f"representation variable '{rep}' is not one of {sys.variables}"
        ) from None


def _require_nonsingular(sys: ThermoSystem, i: int, E: np.ndarray, phi: float, I: np.ndarray):
    # scale-aware guard at extremal loci (e.g. T -> 0)
    if E[i] == 0.0:
        scale = math.inf
    else:
        scale = 1.0 + abs(phi) / abs(E[i])
    if abs(I[i]) <= 1e-12 * scale:
        var = sys.variables[i]
        raise SingularRepresentation(var, sys.intensive_name(var), float(I[i]))


def _conformal_sum(spec: MetricSpec, I: np.ndarray, E: np.ndarray) -> float:
    xi = np.asarray(spec.xi)
    terms = xi * I * E
    C = float(np.sum(terms))
    if abs(C) <= 1e-12 * max(float(np.sum(np.abs(terms))), _TINY):
        raise DegenerateConformalFactor(
            f"conformal prefactor sum(xi*I*E) = {C:.3e} is degenerate"
        )
    return C


def _first_factor(
    spec: MetricSpec, w: WeightAssignment, i: int, E: np.ndarray, I: np.ndarray
) -> float:
    p = w.power_vector(spec.variables)
    xi = spec.xi
    beta = w.beta
    out = xi[i] * E[i] / p[i]
    for j in range(len(E)):
        if j == i:
            continue
        out += (xi[i] / p[i] - xi[j] * beta) * I[j] * E[j] / I[i]
    return out


def rel_max_diff(A: np.ndarray, B: np.ndarray) -> float:
    """Max-norm difference relative to the larger matrix scale."""
    scale = max(float(np.max(np.abs(A))), float(np.max(np.abs(B))), _TINY)
    return float(np.max(np.abs(A - B))) / scale


def off_proportionality(A: np.ndarray, B: np.ndarray) -> Tuple[float, float]:
    """Least-squares conformal comparison of two forms.

    Returns (residual, s) with s = argmin ||A - s B||_F and residual =
    max|A - sB| / max|A|.
    """
    bb = float(np.sum(B * B))
    if bb <= _TINY:
        s = 0.0
    else:
        s = float(np.sum(A * B)) / bb
    scale = max(float(np.max(np.abs(A))), _TINY)
    resid = float(np.max(np.abs(A - s * B))) / scale
    return resid, s


# ---------------------------------------------------------------------------
# metric constructions


def base_metric(sys: ThermoSystem, spec: MetricSpec, pt: Mapping[str, float]) -> BilinearForm:
    """Base metric g_mc = C * Lambda_c chi_c H_cm in the potential's own
    representation.  No symmetrization is applied: asymmetry under an
    inadmissible spec is part of the measurement."""
    _check_spec(sys, spec)
    E, phi, I, H = _state(sys, pt)
    C = _conformal_sum(spec, I, E)
    lc = np.array(spec.lam) * np.array(spec.chi)
    g = C * (H * lc[None, :])
    return BilinearForm.measure(sys.variables, g)


def _bracket_c1(lc: np.ndarray, I: np.ndarray, H: np.ndarray, i: int) -> np.ndarray:
    # rows: -(Lambda_a chi_a) H_am / I_i  plus the j != i correction
    # (Lambda_j chi_j - Lambda_i chi_i) (I_j / I_i^2) H_im
    B = -(lc[:, None] * H) / I[i]
    corr = ((lc - lc[i]) * I / I[i] ** 2)[:, None] * H[i, :][None, :]
    return B + corr


def _bracket_c2(lc: np.ndarray, I: np.ndarray, H: np.ndarray, i: int) -> np.ndarray:
    # first sum carries dI (x) dE: column-weighted transpose arrangement
    B = -(H * lc[None, :]) / I[i]
    corr = ((lc - lc[i]) * I / I[i] ** 2)[:, None] * H[i, :][None, :]
    return B + corr


def _induced(sys, spec, w, rep, pt, bracket) -> BilinearForm:
    _check_spec(sys, spec)
    i = _rep_index(sys, rep)
    E, phi, I, H = _state(sys, pt)
    _require_nonsingular(sys, i, E, phi, I)
    F1 = _first_factor(spec, w, i, E, I)
    lc = np.array(spec.lam) * np.array(spec.chi)
    g = (F1 / w.beta) * bracket(lc, I, H, i)
    return BilinearForm.measure(sys.variables, g)


def induced_metric_c1(
    sys: ThermoSystem,
    spec: MetricSpec,
    w: WeightAssignment,
    rep: str,
    pt: Mapping[str, float],
) -> BilinearForm:
    """Induced metric in the E^(i) representation, first arrangement."""
    return _induced(sys, spec, w, rep, pt, _bracket_c1)


def induced_metric_c2(
    sys: ThermoSystem,
    spec: MetricSpec,
    w: WeightAssignment,
    rep: str,
    pt: Mapping[str, float],
) -> BilinearForm:
    """Induced metric, second arrangement (transposed first sum).

    Differs from the first arrangement exactly when the admissibility
    constraint is violated.
    """
    return _induced(sys, spec, w, rep, pt, _bracket_c2)


def conformal_factor_c4(
    sys: ThermoSystem,
    spec: MetricSpec,
    w: WeightAssignment,
    rep: str,
    pt: Mapping[str, float],
) -> ConformalReport:
    """Closed-form conformal factor and its measured residual.

    factor = -F1 / (beta * I_i * C); the residual compares the induced
    metric against factor * base metric and is only expected to vanish
    under the admissibility constraint.
    """
    _check_spec(sys, spec)
    i = _rep_index(sys, rep)
    E, phi, I, H = _state(sys, pt)
    _require_nonsingular(sys, i, E, phi, I)
    C = _conformal_sum(spec, I, E)
    F1 = _first_factor(spec, w, i, E, I)
    factor = -F1 / (w.beta * I[i] * C)
    induced = induced_metric_c1(sys, spec, w, rep, pt)
    base = base_metric(sys, spec, pt)
    residual = rel_max_diff(induced.matrix, factor * base.matrix)
    return ConformalReport(factor=factor, residual=residual, c3_satisfied=spec.satisfies_c3())


def induced_metric_beta1(
    sys: ThermoSystem,
    spec: MetricSpec,
    w: WeightAssignment,
    rep: str,
    pt: Mapping[str, float],
) -> Beta1Result:
    """Degree-1 specialization (unit xi, admissible spec).

    The conformal factor is computed two independent ways: from the
    explicit bracket, and from the arrangement that substitutes the
    evaluated potential via the Euler identity.  Their agreement is
    returned, not asserted.
    """
    _check_spec(sys, spec)
    if any(abs(x - 1.0) > 1e-12 for x in spec.xi):
        raise ValidationError("degree-1 form requires xi identically 1")
    if not spec.satisfies_c3():
        raise ValidationError("degree-1 form requires an admissible (c3) spec")
    if abs(w.beta - 1.0) > 1e-12:
        raise ValidationError("degree-1 form requires weights normalized to beta = 1")
    i = _rep_index(sys, rep)
    E, phi, I, H = _state(sys, pt)
    _require_nonsingular(sys, i, E, phi, I)
    pbar = w.power_vector(sys.variables)
    C = float(np.sum(I * E))
    if abs(C) <= 1e-12 * max(float(np.sum(np.abs(I * E))), _TINY):
        raise DegenerateConformalFactor(f"sum(I*E) = {C:.3e} is degenerate")
    others = [j for j in range(len(E)) if j != i]
    S1 = float(sum(I[j] * E[j] for j in others))
    f_bracket = -(E[i] / (pbar[i] * I[i]) + (1.0 / pbar[i] - 1.0) * S1 / I[i] ** 2) / C
    corr = float(sum((1.0 / pbar[i] - 1.0 / pbar[j]) * I[j] * E[j] for j in others))
    f_potential = -(phi - S1 + corr) / (I[i] ** 2 * C)
    agreement = abs(f_bracket - f_potential) / max(abs(f_bracket), _TINY)
    base = base_metric(sys, spec, pt)
    form = BilinearForm.measure(sys.variables, f_bracket * base.matrix)
    return Beta1Result(form, f_bracket, f_potential, agreement)


def conformal_factor_twovar_c7(
    sys: ThermoSystem,
    pbar_rep: float,
    rep: str,
    pt: Mapping[str, float],
) -> float:
    """Two-variable closed form -(1/T^2) [1/pbar - YZ/(TS + YZ)].

    ``rep`` plays the role of S (intensive T), the remaining variable
    of Z (intensive Y).
    """
    if len(sys.variables) != 2:
        raise ValidationError("two-variable form requires a 2-variable system")
    i = _rep_index(sys, rep)
    j = 1 - i
    E, phi, I, H = _state(sys, pt)
    _require_nonsingular(sys, i, E, phi, I)
    T, S = I[i], E[i]
    Y, Z = I[j], E[j]
    den = T * S + Y * Z
    if abs(den) <= 1e-12 * max(abs(T * S) + abs(Y * Z), _TINY):
        raise DegenerateConformalFactor(f"T*S + Y*Z = {den:.3e} is degenerate")
    return -(1.0 / T**2) * (1.0 / pbar_rep - (Y * Z) / den)


# ---------------------------------------------------------------------------
# independent reconstruction in the new representation


def _implicit_state(sys, spec, w, rep, pt):
    _check_spec(sys, spec)
    i = _rep_index(sys, rep)
    E, phi, I, H = _state(sys, pt)
    _require_nonsingular(sys, i, E, phi, I)
    n = len(E)

    # First law solved for dE^i gives the gradient of Psi = E^i in the
    # coordinates y (y_i = Phi, y_j = E^j):
    Itil = np.empty(n)
    Itil[i] = 1.0 / I[i]
    for j in range(n):
        if j != i:
            Itil[j] = -I[j] / I[i]

    # Implicit second derivatives of Psi.
    Htil = np.empty((n, n))
    Htil[i, i] = -H[i, i] / I[i] ** 3
    for j in range(n):
        if j == i:
            continue
        Htil[i, j] = Htil[j, i] = -(H[i, j] - H[i, i] * I[j] / I[i]) / I[i] ** 2
        for k in range(n):
            if k == i:
                continue
            Htil[j, k] = (
                -H[j, k] / I[i]
                + (H[j, i] * I[k] + H[i, k] * I[j]) / I[i] ** 2
                - H[i, i] * I[j] * I[k] / I[i] ** 3
            )

    y = E.copy()
    y[i] = phi

    # Jacobian dy/dE: row i is the gradient of Phi, others are identity.
    J = np.eye(n)
    J[i, :] = I

    return i, E, phi, I, H, Itil, Htil, y, J


def representation_reconstruct(
    sys: ThermoSystem,
    spec: MetricSpec,
    w: WeightAssignment,
    rep: str,
    pt: Mapping[str, float],
) -> BilinearForm:
    """Build the same metric family natively in the E^(i) representation
    and pull it back to dE^a coordinates through dPhi = I_a dE^a.

    Treats Psi = E^(i) as the potential in coordinates (Phi, E^{j!=i});
    its gradient and Hessian come from exact implicit differentiation
    of the first law.  The Lambda/chi/xi constants keep their slots
    (the Phi coordinate inherits the E^(i) slot).
    """
    i, E, phi, I, H, Itil, Htil, y, J = _implicit_state(sys, spec, w, rep, pt)
    xi = np.asarray(spec.xi)
    terms = xi * Itil * y
    Ctil = float(np.sum(terms))
    if abs(Ctil) <= 1e-12 * max(float(np.sum(np.abs(terms))), _TINY):
        raise DegenerateConformalFactor(
            f"reconstructed conformal prefactor {Ctil:.3e} is degenerate"
        )
    lc = np.array(spec.lam) * np.array(spec.chi)
    gtil = Ctil * (Htil * lc[None, :])
    G = J.T @ gtil @ J
    return BilinearForm.measure(sys.variables, G)


def representation_weights(
    sys: ThermoSystem, w: WeightAssignment, rep: str
) -> Tuple[WeightAssignment, Tuple[str, ...]]:
    """Weights of Psi = E^(i) in the (Phi, E^{j!=i}) coordinates.

    Scaling E^a by lam**q_a scales Phi by lam**beta and Psi by
    lam**q_i, so Psi has degree q_i with coordinate weights (beta at
    the Phi slot, q_j elsewhere); returned normalized to degree 1.
    """
    i = _rep_index(sys, rep)
    q = w.weight_vector(sys.variables)
    labels = list(sys.variables)
    labels[i] = sys.potential_symbol
    qi = q[i]
    coord_weights = q.copy()
    coord_weights[i] = w.beta
    powers = {lbl: float(qi / qw) for lbl, qw in zip(labels, coord_weights)}
    return WeightAssignment(1.0, powers), tuple(labels)


def reconstruction_report(
    sys: ThermoSystem,
    spec: MetricSpec,
    w: WeightAssignment,
    rep: str,
    pt: Mapping[str, float],
) -> ReconstructionReport:
    """Cross-check of the reconstruction against the induced metric.

    Asserts nothing: reports the off-proportionality versus the induced
    metric, the least-squares scalar versus the base metric, and that
    scalar's deviation from the closed-form conformal factor.  A
    systematic deviation is expected whenever the degree-1 powers are
    not all equal; it is surfaced, never rescaled away.
    """
    recon = representation_reconstruct(sys, spec, w, rep, pt)
    induced = induced_metric_c1(sys, spec, w, rep, pt)
    base = base_metric(sys, spec, pt)
    offprop, _ = off_proportionality(recon.matrix, induced.matrix)
    _, s_base = off_proportionality(recon.matrix, base.matrix)
    c4 = conformal_factor_c4(sys, spec, w, rep, pt)
    deviation = abs(s_base - c4.factor) / max(abs(c4.factor), _TINY)
    i, E, phi, I, H, Itil, Htil, y, J = _implicit_state(sys, spec, w, rep, pt)
    cond = float(np.linalg.cond(J))
    rep_w, rep_labels = representation_weights(sys, w, rep)
    return ReconstructionReport(
        form=recon,
        offprop_vs_induced=offprop,
        scalar_vs_base=s_base,
        factor_c4=c4.factor,
        scalar_deviation=deviation,
        jacobian_condition=cond,
        rep_weights=rep_w,
        rep_labels=rep_labels,
    )

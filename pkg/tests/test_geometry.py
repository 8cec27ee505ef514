import math

import numpy as np
import pytest
from scipy.optimize import brentq

from gtdkit import (
    MetricSpec,
    WeightAssignment,
    base_metric,
    check_constraint_c3,
    conformal_factor_c4,
    conformal_factor_twovar_c7,
    detect_weights,
    induced_metric_beta1,
    induced_metric_c1,
    induced_metric_c2,
    make_system,
    reconstruction_report,
    representation_reconstruct,
    representation_weights,
)
from gtdkit.errors import (
    DegenerateConformalFactor,
    SingularRepresentation,
    ValidationError,
)
from gtdkit.geometry import off_proportionality, rel_max_diff

from _oracles import central_hessian, rn_D, rn_T, rn_phi, rn_value

RN4_PT = {"S": 1.0, "Q": 0.5}
RN4_FACTOR = -2560.0 / 63.0  # hand evaluation: -(1/T^2)[1/D - phiQ/(TS+phiQ)]


def unit_spec(system):
    return MetricSpec.delta(system.variables)


# -- MetricSpec / constraint ---------------------------------------------------


def test_c3_examples():
    v = ("a", "b", "c")
    assert check_constraint_c3(MetricSpec(v, (2.0, 2.0, 2.0), (1, 1, 1), (1.0,) * 3))
    assert check_constraint_c3(MetricSpec(v, (-2.0, 2.0, 2.0), (-1, 1, 1), (1.0,) * 3))
    assert not check_constraint_c3(MetricSpec(v, (1.0, 2.0, 2.0), (1, 1, 1), (1.0,) * 3))


def test_chi_pattern_validation():
    v = ("a", "b", "c")
    with pytest.raises(ValidationError):
        MetricSpec(v, (1.0,) * 3, (1, -1, 1), (1.0,) * 3)
    with pytest.raises(ValidationError):
        MetricSpec(v, (1.0,) * 3, (-1, -1, 1), (1.0,) * 3)
    MetricSpec.eta(v)  # valid by construction


def test_spec_length_validation():
    with pytest.raises(ValidationError):
        MetricSpec(("a", "b"), (1.0,), (1, 1), (1.0, 1.0))


# -- base metric ----------------------------------------------------------------


def test_base_metric_rn4_frozen(rn4):
    g = base_metric(rn4, unit_spec(rn4), RN4_PT)
    expected = np.array([[-0.013671875, -0.109375], [-0.109375, 0.4375]])
    assert np.allclose(g.matrix, expected, rtol=1e-13, atol=0)
    assert g.symmetric


def test_base_metric_asymmetric_when_c3_violated(rn4):
    spec = MetricSpec(rn4.variables, (1.0, 2.0), (1, 1), (1.0, 1.0))
    g = base_metric(rn4, spec, RN4_PT)
    assert not g.symmetric
    scale = float(np.max(np.abs(g.matrix)))
    assert float(np.max(np.abs(g.matrix - g.matrix.T))) > 1e-6 * scale


def test_base_metric_degenerate_prefactor():
    system = make_system("critical", "(S - 1)^2 + (Q - 1)^2", ("S", "Q"))
    with pytest.raises(DegenerateConformalFactor):
        base_metric(system, unit_spec(system), {"S": 1.0, "Q": 1.0})


# -- induced metrics and factors -------------------------------------------------


def test_c1_equals_c4_times_base_rn4(rn4):
    w = rn4.declared_weights
    spec = unit_spec(rn4)
    g1 = induced_metric_c1(rn4, spec, w, "S", RN4_PT)
    rep = conformal_factor_c4(rn4, spec, w, "S", RN4_PT)
    base = base_metric(rn4, spec, RN4_PT)
    assert rep.factor == pytest.approx(RN4_FACTOR, rel=1e-12)
    assert rep.residual <= 1e-12
    assert rel_max_diff(g1.matrix, rep.factor * base.matrix) <= 1e-12


def test_singular_representation_at_extremal_point(rn4):
    w = rn4.declared_weights
    with pytest.raises(SingularRepresentation) as err:
        induced_metric_c1(rn4, unit_spec(rn4), w, "S", {"S": 1.0, "Q": 1.0})
    assert err.value.intensive == "T"


def test_c1_gauge_invariance_kn(kn):
    spec = unit_spec(kn)
    pt = {"S": 1.2, "J": 0.9, "Q": 1.4}
    w_half = WeightAssignment(0.5, {"S": 1.0, "J": 1.0, "Q": 2.0})
    g_half = induced_metric_c1(kn, spec, w_half, "S", pt)
    g_one = induced_metric_c1(kn, spec, w_half.normalized(), "S", pt)
    assert rel_max_diff(g_half.matrix, g_one.matrix) <= 1e-12


@pytest.mark.parametrize("gamma", [0.25, 0.5, 2.0, 4.0])
def test_beta_gauge_invariance(rn4, kn, gamma):
    for system, pt in ((rn4, RN4_PT), (kn, {"S": 1.2, "J": 0.9, "Q": 1.4})):
        w = system.declared_weights
        spec = unit_spec(system)
        rep = system.variables[0]
        g = induced_metric_c1(system, spec, w, rep, pt)
        g_r = induced_metric_c1(system, spec, w.rescaled(gamma), rep, pt)
        assert rel_max_diff(g.matrix, g_r.matrix) <= 1e-12
        f = conformal_factor_c4(system, spec, w, rep, pt).factor
        f_r = conformal_factor_c4(system, spec, w.rescaled(gamma), rep, pt).factor
        assert abs(f - f_r) <= 1e-12 * abs(f)


def test_c2_equals_c1_under_c3(rn4, kn):
    for system, pt in ((rn4, RN4_PT), (kn, {"S": 1.1, "J": 0.8, "Q": 1.3})):
        w = system.declared_weights
        for spec in (unit_spec(system), MetricSpec.eta(system.variables)):
            for rep in system.variables:
                g1 = induced_metric_c1(system, spec, w, rep, pt)
                g2 = induced_metric_c2(system, spec, w, rep, pt)
                assert rel_max_diff(g1.matrix, g2.matrix) <= 1e-12


def test_c2_differs_from_c1_when_c3_violated(rn4):
    spec = MetricSpec(rn4.variables, (1.0, 2.0), (1, 1), (1.0, 1.0))
    w = rn4.declared_weights
    g1 = induced_metric_c1(rn4, spec, w, "S", RN4_PT)
    g2 = induced_metric_c2(rn4, spec, w, "S", RN4_PT)
    assert rel_max_diff(g1.matrix, g2.matrix) > 1e-6


def test_single_variable_factor_reduces():
    system = make_system("cube", "E^3", ("E",))
    w = WeightAssignment(1.0, {"E": 3.0})
    spec = unit_spec(system)
    pt = {"E": 1.7}
    I = system.gradient(pt)[0]
    rep = conformal_factor_c4(system, spec, w, "E", pt)
    # all j-sums vanish: factor = -1/(pbar * I^2)
    assert rep.factor == pytest.approx(-1.0 / (3.0 * I * I), rel=1e-13)
    b1 = induced_metric_beta1(system, spec, w, "E", pt)
    assert b1.factor_bracket == pytest.approx(rep.factor, rel=1e-13)
    assert b1.agreement <= 1e-12


def test_beta1_two_factor_agreement_kn(kn):
    spec = unit_spec(kn)
    w = kn.declared_weights
    pt = {"S": 1.3, "J": 0.6, "Q": 1.1}
    b1 = induced_metric_beta1(kn, spec, w, "S", pt)
    assert b1.agreement <= 1e-12
    # matches the general factor with unit xi, beta = 1
    f = conformal_factor_c4(kn, spec, w, "S", pt).factor
    assert abs(b1.factor_bracket - f) <= 1e-12 * abs(f)


def test_beta1_requires_unit_xi_and_c3(rn4):
    w = rn4.declared_weights
    with pytest.raises(ValidationError):
        induced_metric_beta1(
            rn4, MetricSpec(rn4.variables, (1.0, 1.0), (1, 1), (2.0, 2.0)), w, "S", RN4_PT
        )
    with pytest.raises(ValidationError):
        induced_metric_beta1(
            rn4, MetricSpec(rn4.variables, (1.0, 2.0), (1, 1), (1.0, 1.0)), w, "S", RN4_PT
        )
    with pytest.raises(ValidationError):
        induced_metric_beta1(rn4, unit_spec(rn4), w.rescaled(2.0), "S", RN4_PT)


def test_all_unit_powers_regression():
    # ordinary degree-1 homogeneous potential: the power-correction sum
    # vanishes and the potential form reduces to -(Phi - sum_j I_j E^j)
    system = make_system("geommean", "sqrt(E1*E2)", ("E1", "E2"))
    report = detect_weights(system, 32, 0)
    assert report.canonical.powers["E1"] == pytest.approx(1.0, abs=1e-9)
    assert report.canonical.powers["E2"] == pytest.approx(1.0, abs=1e-9)
    w = WeightAssignment(1.0, {"E1": 1.0, "E2": 1.0})
    spec = unit_spec(system)
    pt = {"E1": 1.5, "E2": 0.8}
    b1 = induced_metric_beta1(system, spec, w, "E1", pt)
    arr = system.point_array(pt)
    phi = system.evaluate_array(arr)
    I = system.gradient_array(arr)
    C = float(np.sum(I * arr))
    classical = -(phi - I[1] * arr[1]) / (I[0] ** 2 * C)
    assert b1.factor_potential == pytest.approx(classical, rel=1e-13)
    assert b1.agreement <= 1e-12
    f = conformal_factor_c4(system, spec, w, "E1", pt).factor
    assert abs(b1.factor_bracket - f) <= 1e-12 * abs(f)


def test_twovar_factor_rn4(rn4):
    f = conformal_factor_twovar_c7(rn4, 0.5, "S", RN4_PT)
    assert f == pytest.approx(RN4_FACTOR, rel=1e-12)
    f4 = conformal_factor_c4(rn4, unit_spec(rn4), rn4.declared_weights, "S", RN4_PT).factor
    assert abs(f - f4) <= 1e-12 * abs(f)


def test_twovar_factor_rn5(rn5):
    pt = {"S": 1.0, "Q": 0.5}
    D = rn5.parameters["D"]
    f = conformal_factor_twovar_c7(rn5, D, "S", pt)
    b1 = induced_metric_beta1(rn5, unit_spec(rn5), rn5.declared_weights, "S", pt)
    assert abs(f - b1.factor_potential) <= 1e-12 * abs(f)


def test_twovar_schwarzschild_limit():
    # Q = 0 and unit power: bracket collapses to -1/T^2
    system = make_system("schw", "S^0.5 + 0*Q", ("S", "Q"))
    pt = {"S": 1.3, "Q": 0.7}
    T = system.gradient(pt)[0]
    f = conformal_factor_twovar_c7(system, 1.0, "S", pt)
    assert f == pytest.approx(-1.0 / T**2, rel=1e-13)


def test_twovar_requires_two_variables(kn):
    with pytest.raises(ValidationError):
        conformal_factor_twovar_c7(kn, 0.5, "S", {"S": 1.0, "J": 1.0, "Q": 1.0})


# -- reconstruction ---------------------------------------------------------------


def test_reconstruction_proportional_to_induced(rn4, kn):
    rng = np.random.default_rng(21)
    for system in (rn4, kn):
        spec = unit_spec(system)
        w = system.declared_weights
        n = len(system.variables)
        for _ in range(20):
            pt = dict(zip(system.variables, rng.uniform(0.5, 2.0, n)))
            rep = system.variables[0]
            report = reconstruction_report(system, spec, w, rep, pt)
            assert report.offprop_vs_induced <= 1e-9


def test_reconstruction_scalar_matches_factor_one_variable():
    system = make_system("cube", "E^3", ("E",))
    w = WeightAssignment(1.0, {"E": 3.0})
    spec = unit_spec(system)
    report = reconstruction_report(system, spec, w, "E", {"E": 1.4})
    assert report.offprop_vs_induced <= 1e-12
    assert report.scalar_deviation <= 1e-9  # classical reciprocal-derivative case


def test_reconstruction_scalar_matches_factor_equal_powers():
    system = make_system("geommean", "sqrt(E1*E2)", ("E1", "E2"))
    w = WeightAssignment(1.0, {"E1": 1.0, "E2": 1.0})
    report = reconstruction_report(system, unit_spec(system), w, "E1", {"E1": 1.5, "E2": 0.8})
    assert report.scalar_deviation <= 1e-9


def test_reconstruction_scalar_deviation_surfaced_rn4(rn4):
    # with unequal degree-1 powers the native reconstruction is conformal
    # to the induced metric but with a different scalar; the report must
    # surface the deviation rather than normalize it away
    report = reconstruction_report(rn4, unit_spec(rn4), rn4.declared_weights, "S", RN4_PT)
    assert report.offprop_vs_induced <= 1e-12
    assert report.scalar_deviation == pytest.approx(0.4, rel=1e-10)
    assert math.isfinite(report.jacobian_condition)


def test_reconstruction_rep_weights_rn4(rn4):
    w_rep, labels = representation_weights(rn4, rn4.declared_weights, "S")
    assert labels == ("M", "Q")
    # the entropy representation of this family is plainly homogeneous
    assert w_rep.powers["M"] == pytest.approx(2.0, rel=1e-13)
    assert w_rep.powers["Q"] == pytest.approx(2.0, rel=1e-13)


def test_reconstruction_implicit_hessian_against_numerical_inversion(rn4):
    # independent oracle: invert M(S, Q) = M0 for S numerically, then take
    # finite differences of S(M, Q)
    D = rn_D(4)
    S0, Q0 = 1.3, 0.6

    def S_of(M, Q):
        # invert on the T > 0 branch: bracket above the extremal locus
        # Q^2 = 2 D S^(2D), where M is increasing in S
        s_ext = (Q**2 / (2.0 * D)) ** (1.0 / (2.0 * D))
        return brentq(
            lambda S: rn_value(S, Q, D) - M,
            s_ext * (1.0 + 1e-9),
            1e3,
            xtol=1e-14,
            rtol=8.9e-16,
        )

    M0 = rn_value(S0, Q0, D)
    fd_H = central_hessian(lambda v: S_of(v[0], v[1]), np.array([M0, Q0]), h_rel=1e-5)

    from gtdkit.geometry import _implicit_state

    spec = unit_spec(rn4)
    i, E, phi, I, H, Itil, Htil, y, J = _implicit_state(
        rn4, spec, rn4.declared_weights, "S", {"S": S0, "Q": Q0}
    )
    assert Itil[0] == pytest.approx(1.0 / rn_T(S0, Q0, D), rel=1e-12)
    assert Itil[1] == pytest.approx(-rn_phi(S0, Q0, D) / rn_T(S0, Q0, D), rel=1e-12)
    scale = float(np.max(np.abs(Htil)))
    assert np.max(np.abs(Htil - fd_H)) <= 1e-6 * scale


def test_reconstruction_one_variable_reciprocal():
    system = make_system("cube", "E^3", ("E",))
    w = WeightAssignment(1.0, {"E": 3.0})
    spec = unit_spec(system)
    pt = {"E": 1.7}
    recon = representation_reconstruct(system, spec, w, "E", pt)
    g1 = induced_metric_c1(system, spec, w, "E", pt)
    resid, s = off_proportionality(recon.matrix, g1.matrix)
    assert resid <= 1e-12
    assert s == pytest.approx(1.0, rel=1e-12)


def test_off_proportionality_edge_cases():
    A = np.array([[1.0, 2.0], [3.0, 4.0]])
    resid, s = off_proportionality(2.5 * A, A)
    assert resid <= 1e-15
    assert s == pytest.approx(2.5, rel=1e-15)
    resid, s = off_proportionality(A, np.zeros((2, 2)))
    assert s == 0.0
    assert resid == pytest.approx(1.0)


# -- consistency sweep (mirrors the acceptance suite at smaller volume) -----------


def test_specialization_chain_random_points(rn4):
    rng = np.random.default_rng(33)
    w = rn4.declared_weights
    spec = unit_spec(rn4)
    for _ in range(25):
        S, Q = rng.uniform(0.5, 2.0, 2)
        pt = {"S": float(S), "Q": float(Q)}
        f4 = conformal_factor_c4(rn4, spec, w, "S", pt)
        b1 = induced_metric_beta1(rn4, spec, w, "S", pt)
        f7 = conformal_factor_twovar_c7(rn4, w.powers["S"], "S", pt)
        assert f4.residual <= 1e-12
        for f in (b1.factor_bracket, b1.factor_potential, f7):
            assert abs(f - f4.factor) <= 1e-12 * abs(f4.factor)

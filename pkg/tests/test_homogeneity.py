import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gtdkit import (
    WeightAssignment,
    detect_weights,
    euler_residual,
    intensives,
    is_strictly_homogeneous,
    make_system,
    normalize_degree,
    rescale_weights,
    scaling_residual,
)
from gtdkit.homogeneity import sample_points

from _oracles import rn_extremal_Q

KN_HALF = WeightAssignment(0.5, {"S": 1.0, "J": 1.0, "Q": 2.0})
KN_BAR = WeightAssignment(1.0, {"S": 0.5, "J": 0.5, "Q": 1.0})


# -- WeightAssignment algebra -------------------------------------------------


def test_weights_are_reciprocal_powers():
    w = WeightAssignment(0.5, {"S": 1.0, "J": 1.0, "Q": 2.0})
    for a in w.powers:
        assert abs(w.weights[a] * w.powers[a] - 1.0) <= 1e-14


def test_weight_validation():
    with pytest.raises(ValueError):
        WeightAssignment(0.0, {"S": 1.0})
    with pytest.raises(ValueError):
        WeightAssignment(1.0, {"S": 0.0})
    with pytest.raises(ValueError):
        WeightAssignment(math.inf, {"S": 1.0})


def test_normalize_degree_kn():
    out = normalize_degree(KN_HALF)
    assert out.beta == 1.0
    assert out.powers == {"S": 0.5, "J": 0.5, "Q": 1.0}


def test_normalize_degree_idempotent():
    w = WeightAssignment(1.0, {"S": 0.5, "Q": 1.0})
    assert normalize_degree(w) is w


def test_normalize_degree_rn_beta_D():
    # degree beta = D has powers (1, 1/D); degree 1 has (D, 1)
    D = 2.0 / 3.0
    w = WeightAssignment(D, {"S": 1.0, "Q": 1.0 / D})
    out = normalize_degree(w)
    assert out.powers["S"] == pytest.approx(D, rel=1e-15)
    assert out.powers["Q"] == pytest.approx(1.0, rel=1e-15)


def test_rescale_weights_special_choice_gamma_beta():
    out = rescale_weights(KN_HALF, 0.5)
    assert out.beta == 1.0
    assert out.powers == {"S": 0.5, "J": 0.5, "Q": 1.0}


def test_rescale_identity():
    assert rescale_weights(KN_BAR, 1.0).powers == KN_BAR.powers


def test_rescale_requires_positive_gamma():
    with pytest.raises(ValueError):
        rescale_weights(KN_BAR, -1.0)


@pytest.mark.parametrize("gamma", [0.3, 2.0, 7.0])
def test_renormalization_consistency(gamma):
    # normalize . rescale(gamma) == normalize, exact algebra
    a = normalize_degree(rescale_weights(KN_HALF, gamma))
    b = normalize_degree(KN_HALF)
    assert a.beta == b.beta == 1.0
    for k in a.powers:
        assert abs(a.powers[k] - b.powers[k]) <= 1e-14


# -- Euler residual -----------------------------------------------------------


def test_euler_kn_half_degree(kn):
    rng = np.random.default_rng(11)
    for _ in range(20):
        pt = dict(zip(kn.variables, rng.uniform(0.5, 2.0, 3)))
        assert euler_residual(kn, KN_HALF, pt) <= 1e-12


def test_euler_kn_degree_one(kn):
    rng = np.random.default_rng(12)
    for _ in range(20):
        pt = dict(zip(kn.variables, rng.uniform(0.5, 2.0, 3)))
        assert euler_residual(kn, KN_BAR, pt) <= 1e-12


def test_euler_rn4_frozen_point(rn4):
    # M = 0.625, T*S = 0.1875, phi*Q = 0.25 at (S, Q) = (1, 1/2)
    pt = {"S": 1.0, "Q": 0.5}
    ints = intensives(rn4, pt)
    assert ints["S"] * 1.0 == pytest.approx(0.1875, rel=1e-14)
    assert ints["Q"] * 0.5 == pytest.approx(0.25, rel=1e-14)
    M = rn4.evaluate(pt)
    assert M == 0.625
    # D*M = T*S + D*phi*Q: 0.3125 = 0.1875 + 0.125
    D = rn4.parameters["D"]
    assert D * M == pytest.approx(ints["S"] * 1.0 + D * ints["Q"] * 0.5, rel=1e-14)
    assert euler_residual(rn4, rn4.declared_weights, pt) <= 1e-12


def test_euler_gauge_invariance(kn):
    rng = np.random.default_rng(13)
    pts = [dict(zip(kn.variables, rng.uniform(0.5, 2.0, 3))) for _ in range(5)]
    base = [euler_residual(kn, KN_BAR, pt) for pt in pts]
    for gamma in (0.3, 2.0, 7.0):
        w = rescale_weights(KN_BAR, gamma)
        for pt, b in zip(pts, base):
            assert abs(euler_residual(kn, w, pt) - b) <= 1e-12


def test_euler_wrong_powers_fails_loudly(rn4):
    wrong = WeightAssignment(1.0, {"S": 1.0, "Q": 1.0})
    assert euler_residual(rn4, wrong, {"S": 1.0, "Q": 0.5}) > 0.1


# -- intensives ---------------------------------------------------------------


def test_intensives_kn_origin(kn):
    ints = intensives(kn, {"S": 1.0, "J": 0.0, "Q": 0.0})
    assert ints["S"] == pytest.approx(1.0 / math.sqrt(2.0), rel=1e-14)
    assert ints["J"] == 0.0
    assert ints["Q"] == 0.0


def test_intensives_rn4(rn4):
    ints = intensives(rn4, {"S": 1.0, "Q": 0.5})
    assert ints["S"] == pytest.approx(0.1875, rel=1e-14)
    assert ints["Q"] == pytest.approx(0.5, rel=1e-14)


def test_intensives_extremal_T_zero(rn4):
    D = rn4.parameters["D"]
    Q = rn_extremal_Q(1.0, D)
    assert Q == pytest.approx(1.0, rel=1e-14)  # d=4: Q^2 = 2D = 1
    ints = intensives(rn4, {"S": 1.0, "Q": Q})
    assert abs(ints["S"]) <= 1e-15


# -- scaling ------------------------------------------------------------------


def test_scaling_identity_lambda_one(kn):
    pt = {"S": 1.3, "J": 0.7, "Q": 1.1}
    assert scaling_residual(kn, KN_BAR, 1.0, pt) == 0.0


def test_scaling_kn_half_degree(kn):
    assert scaling_residual(kn, KN_HALF, 2.0, {"S": 1.0, "J": 1.0, "Q": 1.0}) <= 1e-12


def test_scaling_rn4_lambda_ten(rn4):
    w = rn4.declared_weights
    assert scaling_residual(rn4, w, 10.0, {"S": 1.0, "Q": 0.5}) <= 1e-12


def test_scaling_rejects_nonpositive_lambda(kn):
    with pytest.raises(ValueError):
        scaling_residual(kn, KN_BAR, 0.0, {"S": 1.0, "J": 1.0, "Q": 1.0})


def test_euler_scaling_equivalence(kn, rn4):
    # weights passing the infinitesimal identity pass finite scaling, and
    # weights failing it fail finite scaling too
    rng = np.random.default_rng(5)
    for system, w in ((kn, KN_BAR), (rn4, rn4.declared_weights)):
        n = len(system.variables)
        for _ in range(50):
            pt = dict(zip(system.variables, rng.uniform(0.5, 2.0, n)))
            assert euler_residual(system, w, pt) <= 1e-12
            for lam in (0.5, 2.0, 10.0):
                assert scaling_residual(system, w, lam, pt) <= 1e-10
    wrong = WeightAssignment(1.0, {"S": 1.0, "Q": 1.0})
    pt = {"S": 1.0, "Q": 0.5}
    assert euler_residual(rn4, wrong, pt) > 1e-3
    assert scaling_residual(rn4, wrong, 2.0, pt) > 1e-3


# -- detection ----------------------------------------------------------------


def test_detect_kn(kn):
    report = detect_weights(kn, 64, 0)
    assert report.status == "unique"
    assert report.null_space_dim == 1
    p = report.canonical.powers
    assert abs(p["S"] - 0.5) <= 1e-9
    assert abs(p["J"] - 0.5) <= 1e-9
    assert abs(p["Q"] - 1.0) <= 1e-9
    assert is_strictly_homogeneous(report) is False


def test_detect_rn5(rn5):
    report = detect_weights(rn5, 64, 0)
    assert report.status == "unique"
    p = report.canonical.powers
    assert abs(p["S"] - 2.0 / 3.0) <= 1e-9
    assert abs(p["Q"] - 1.0) <= 1e-9
    assert abs(p["S"] - p["Q"]) > 0.1  # powers cannot coincide
    assert is_strictly_homogeneous(report) is False


def test_detect_product_potential_degenerate():
    system = make_system("product", "E1*E2", ("E1", "E2"))
    report = detect_weights(system, 32, 0)
    assert report.status == "degenerate"
    assert report.null_space_dim == 2
    # canonical: minimum-norm vector at beta = 1 splits the degree evenly
    p = report.canonical.powers
    assert p["E1"] == pytest.approx(2.0, abs=1e-9)
    assert p["E2"] == pytest.approx(2.0, abs=1e-9)
    assert is_strictly_homogeneous(report) is True


def test_detect_cubic_sum():
    system = make_system("cubic", "(E1 + E2)^3", ("E1", "E2"))
    report = detect_weights(system, 32, 0)
    assert report.status == "unique"
    p = report.canonical.powers
    assert p["E1"] == pytest.approx(3.0, abs=1e-9)
    assert p["E2"] == pytest.approx(3.0, abs=1e-9)
    assert is_strictly_homogeneous(report) is True


def test_detect_soundness_additive_constant():
    # a shifted potential is not quasi-homogeneous under power maps
    system = make_system("shifted", "S^0.5/2 + Q^2/(2*S^0.5) + 1", ("S", "Q"))
    report = detect_weights(system, 64, 0)
    assert report.status == "none"
    assert report.null_space_dim == 0
    assert report.canonical is None


def test_detect_constant_potential_weights_only():
    system = make_system("flat", "1 + 0*S + 0*Q", ("S", "Q"))
    report = detect_weights(system, 32, 0)
    assert report.status == "degenerate"
    assert report.canonical is None  # beta component vanishes on the null space
    assert report.null_space_dim == 2


@pytest.mark.parametrize("seed", [0, 1, 12345])
@pytest.mark.parametrize("count", [6, 32, 64])
def test_detect_gauge_invariance(kn, seed, count):
    report = detect_weights(kn, count, seed)
    assert report.status == "unique"
    p = report.canonical.powers
    assert abs(p["S"] - 0.5) <= 1e-9
    assert abs(p["J"] - 0.5) <= 1e-9
    assert abs(p["Q"] - 1.0) <= 1e-9


def test_detect_rejects_small_sample(kn):
    with pytest.raises(ValueError):
        detect_weights(kn, 3, 0)


def test_detect_verification_downgrade():
    # a near-miss: tiny symmetry-breaking term passes the SVD cutoff at
    # interior samples but fails finite scaling at lambda = 10
    system = make_system("nearmiss", "S^0.5 + 1e-12*S^3", ("S",))
    report = detect_weights(system, 16, 0)
    if report.status != "none":
        # if the SVD already rejects it the detector is stricter here,
        # which is also sound
        assert report.max_scaling_residual <= 1e-8
    else:
        assert report.verification_passed is False


_exponent = st.floats(min_value=0.3, max_value=3.0, allow_nan=False)


@given(_exponent, _exponent, _exponent, _exponent)
@settings(max_examples=25, deadline=None)
def test_detect_two_monomial_family(a, b, c, d):
    # independent oracle: for x^a y^b + x^c y^d the degree-1 weights solve
    # the 2x2 system [a b; c d] q = [1, 1]
    det = a * d - b * c
    if abs(det) < 0.3:
        return  # (near-)collinear exponents: not the unique-status family
    q = np.linalg.solve(np.array([[a, b], [c, d]]), np.ones(2))
    if min(abs(q)) < 0.15:
        return  # a power pole: canonical assignment would be ill-scaled
    system = make_system(
        "two-monomial", f"x^{a!r}*y^{b!r} + x^{c!r}*y^{d!r}", ("x", "y")
    )
    report = detect_weights(system, 32, 0)
    assert report.status == "unique"
    assert report.canonical.powers["x"] == pytest.approx(1.0 / q[0], abs=1e-8)
    assert report.canonical.powers["y"] == pytest.approx(1.0 / q[1], abs=1e-8)
    pt = {"x": 1.3, "y": 0.8}
    assert euler_residual(system, report.canonical, pt) <= 1e-10
    assert scaling_residual(system, report.canonical, 2.0, pt) <= 1e-9


def test_detect_unaffected_by_declared_gauge():
    # declaring weights in a different degree gauge changes nothing: the
    # detector never consults them
    rescaled = make_system(
        "kn-halfdegree",
        "sqrt(2*S + (J^2 + Q^4/4)/(8*S) + Q^2/2)",
        ("S", "J", "Q"),
        weights=KN_HALF,
    )
    report = detect_weights(rescaled, 32, 0)
    assert report.status == "unique"
    assert report.canonical.powers["S"] == pytest.approx(0.5, abs=1e-9)
    assert report.canonical.powers["Q"] == pytest.approx(1.0, abs=1e-9)


def test_sampling_error_when_potential_vanishes():
    from gtdkit.errors import SamplingError

    system = make_system("null", "0*S", ("S",))
    with pytest.raises(SamplingError):
        sample_points(system, 8, 0)


def test_sample_points_deterministic(kn):
    a, pa = sample_points(kn, 16, 9)
    b, pb = sample_points(kn, 16, 9)
    assert np.array_equal(a, b)
    assert np.array_equal(pa, pb)
    assert np.all((a >= 0.5) & (a <= 2.0))


def test_is_strictly_homogeneous_requires_canonical():
    system = make_system("flat", "1 + 0*S + 0*Q", ("S", "Q"))
    report = detect_weights(system, 32, 0)
    with pytest.raises(ValueError):
        is_strictly_homogeneous(report)

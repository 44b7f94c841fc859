import json

import numpy as np
import pytest
from scipy import integrate

from homoclinic_gate.conditions import (
    KappaError,
    classify,
    compute_kappas,
    cond_C1,
    cond_C1p,
    cond_C2,
    cond_C3,
    cond_C4,
    cond_C4p,
    cond_C5,
    cond_C6,
    evaluate_conditions,
    melnikov_line_integral,
    orbit_box,
)
from homoclinic_gate.planar import wedge
from homoclinic_gate.quadrature import QuadResult
from homoclinic_gate.systems import powerlaw

A1_MEAN = 8.0 / 3.0
A1_WAVE = np.pi / (3.0 * np.sinh(np.pi / 2))


def a1_melnikov(beta):
    # int y^2 (2 + cos(t - beta)) dt along x = sqrt2 sech t
    return A1_MEAN + np.cos(beta) * A1_WAVE


@pytest.mark.parametrize("value, err, expected", [
    (1.0, 1e-9, "nonzero"),
    (1e-8, 1e-12, "zero"),
    (1e-5, 1e-5, "undecided"),
    (0.0, 0.0, "zero"),
])
def test_classify(value, err, expected):
    assert classify(QuadResult(value, err, 10.0, 15)) == expected


@pytest.mark.parametrize("beta", [0.0, 0.7, np.pi / 2, 2.5])
def test_c1_prime_closed_form(a1_frame, beta):
    c = cond_C1p(a1_frame, beta)
    assert c.verdict == "nonzero"
    np.testing.assert_allclose(c.result.value, a1_melnikov(beta), rtol=1e-9)


@pytest.mark.parametrize("beta", [0.0, 1.1])
def test_c1_prime_line_form(a1_frame, beta):
    np.testing.assert_allclose(melnikov_line_integral(a1_frame, beta), a1_melnikov(beta), rtol=1e-8)


def test_c1_prime_cos_forcing(cos_frame):
    # int y cos(t - beta) = -sqrt2 pi sin(beta) / cosh(pi/2)
    for beta in (0.0, 0.4):
        np.testing.assert_allclose(cond_C1p(cos_frame, beta).result.value,
                                   -np.sqrt(2) * np.pi * np.sin(beta) / np.cosh(np.pi / 2), atol=1e-9)


def test_c1_vanishes_even_without_hamiltonian_structure(a1_frame, modulated_frame, transformed_frame):
    # Df(gamma)gamma - f(gamma) = -(gamma' - A gamma) with gamma bounded: zero Melnikov residual
    for frame in (a1_frame, modulated_frame, transformed_frame):
        assert cond_C1(frame).verdict == "zero"


def test_c2_sup(a1_frame):
    cond, sup = cond_C2(a1_frame)
    assert cond.verdict == "nonzero"
    np.testing.assert_allclose(sup, 2.0, rtol=1e-12)


def test_hamiltonian_degeneracies(a1_frame):
    verdict, parts = cond_C4(a1_frame)
    verdict_p, parts_p = cond_C4p(a1_frame)
    for part in (parts[1], parts_p[1]):
        assert abs(part.result.value) <= 3 * part.result.abs_error_estimate or part.result.value == 0.0
        assert part.result.abs_error_estimate < 1e-8
    assert verdict.verdict == "fails" and verdict_p.verdict == "fails"
    assert parts_p[0].verdict == "nonzero"  # F4,1' = F1' for forcing on the second equation
    np.testing.assert_allclose(parts_p[0].result.value, a1_melnikov(0.0), rtol=1e-9)


def test_kappa_undefined_for_powerlaw(a1_frame):
    with pytest.raises(KappaError):
        compute_kappas(a1_frame)
    assert cond_C5(a1_frame).verdict == "undefined"


def test_c4_line_parts_against_scipy(transformed_frame):
    _, parts = cond_C4(transformed_frame, beta=0.3)
    fr = transformed_frame

    def f43(s):
        s = np.array([s])
        gam = fr.gamma(s)
        f = fr.system.f(gam)
        h = np.einsum("nij,nj->ni", fr.system.jacobian(gam), gam) - f
        return float(f[0, 1] * h[0, 0] / fr.delta(s)[0])

    ref, _ = integrate.quad(f43, -fr.T, fr.T, limit=400, epsabs=1e-12)
    np.testing.assert_allclose(parts[2].result.value, ref, atol=1e-8)
    assert parts[2].verdict == "nonzero"


def test_kappas_finite_and_kappa1(transformed_frame):
    k = compute_kappas(transformed_frame, beta=0.3)
    _, parts = cond_C4(transformed_frame, beta=0.3)
    np.testing.assert_allclose(k.kappa1, -parts[0].result.value / parts[2].result.value, rtol=1e-10)
    assert np.all(np.isfinite(k.kappa2_samples)) and np.all(np.isfinite(k.kappa3_samples))
    t = np.array([-3.0, 0.0, 2.0])
    assert k.kappa2(t).shape == (3, 2) and k.kappa3(t, 2).shape == (3,)


def test_kappa2_solves_inhomogeneous_equation(transformed_frame):
    # kappa2' = A kappa2 + Df(gamma)gamma - f(gamma)
    fr = transformed_frame
    k = compute_kappas(fr, beta=0.3)
    t = np.linspace(-4, 4, 9)
    h = 1e-3
    dk = (k.kappa2(t + h) - k.kappa2(t - h)) / (2 * h)
    gam = fr.gamma(t)
    rhs = np.einsum("nij,nj->ni", fr.A(t), k.kappa2(t)) + \
        np.einsum("nij,nj->ni", fr.system.jacobian(gam), gam) - fr.system.f(gam)
    np.testing.assert_allclose(dk, rhs, atol=1e-5)


def test_c3_and_c5_antisymmetric(transformed_frame):
    a = cond_C3(transformed_frame, beta=0.3)
    b = cond_C3(transformed_frame, beta=0.3, swap=True)
    assert a.verdict == "nonzero"
    np.testing.assert_allclose(b.result.value, -a.result.value, rtol=1e-12)
    c = cond_C5(transformed_frame, beta=0.3)
    d = cond_C5(transformed_frame, beta=0.3, swap=True)
    assert c.verdict == "nonzero"
    np.testing.assert_allclose(d.result.value, -c.result.value, rtol=1e-12)


def test_c6(a1_frame):
    cond, witness = cond_C6(a1_frame.system, orbit_box(a1_frame))
    assert cond.verdict == "holds"
    x, t1, t2 = witness
    g = a1_frame.system.g
    assert np.any(g(np.array(x), np.array(t1)) != g(np.array(x), np.array(t2)))
    unforced = powerlaw(forcing_name="none")
    cond, witness = cond_C6(unforced, orbit_box(a1_frame))
    assert cond.verdict == "fails" and witness is None


def test_frame_scaling_preserves_verdicts(transformed_frame):
    base = evaluate_conditions(transformed_frame, beta=0.3).verdicts()
    scaled = evaluate_conditions(transformed_frame.transformed(2.0, 0.3), beta=0.3).verdicts()
    assert base == scaled


def test_report_json_deterministic(a1_frame15):
    r1 = evaluate_conditions(a1_frame15).to_json()
    r2 = evaluate_conditions(a1_frame15).to_json()
    assert r1 == r2
    doc = json.loads(r1)
    assert list(doc) == sorted(doc)
    names = [c["condition"] for c in doc["conditions"]]
    assert names[:4] == ["C1", "C1'", "C2", "C3"]
    status = {c["condition"]: c["status"] for c in doc["conditions"]}
    assert status["C1"] == "fails" and status["C1'"] == "holds"
    assert status["C2"] == "holds" and status["C6"] == "holds"


def test_wedge_of_gamma_and_field_matches_energy(a1_frame):
    # on H = 0: gamma ^ f(gamma) = x^2 - x^4 - y^2 = -x^4 / 2
    t = np.linspace(-5, 5, 21)
    gam = a1_frame.gamma(t)
    np.testing.assert_allclose(wedge(gam, a1_frame.system.f(gam)), -gam[:, 0] ** 4 / 2, atol=1e-12)

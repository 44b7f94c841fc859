"""End-to-end acceptance checks, one per criterion, each printing a PASS/FAIL line.

Run standalone with ``python tests/test_acceptance.py`` or through pytest
(the lines are repeated in the terminal summary).
"""
import time
from functools import partial

import numpy as np
import pytest

from homoclinic_gate import build_frame, powerlaw, powerlaw_homoclinic
from homoclinic_gate.bifurcation import (
    ForcingFunction,
    apply_L,
    bifurcation_B,
    complement,
    direct_verify,
    green_solve,
    growth_rate,
    loglog_slope,
    melnikov_residual,
    ode_residual,
    project_p,
    reconstruct,
    scan_roots,
    solve_eta,
)
from homoclinic_gate.conditions import cond_C1, cond_C1p, cond_C4, cond_C4p, evaluate_conditions, melnikov_line_integral
from homoclinic_gate.homoclinic import find_equilibrium, saddle_data, shoot_homoclinic
from homoclinic_gate.systems import linearly_transformed, speed_modulated
from homoclinic_gate.variational import abel_check

LINES = []


def _frames():
    cache = getattr(_frames, "cache", None)
    if cache is None:
        orb = powerlaw_homoclinic(1.0, 1.0, 2)
        a1 = powerlaw(1.0, 1.0, 2, "A1")
        cos = powerlaw(1.0, 1.0, 2, "cos")
        cache = {
            "orbit": orb, "a1": a1, "cos": cos,
            "a1_15": build_frame(a1, orb, T=15.0), "a1_30": build_frame(a1, orb, T=30.0),
            "cos_20": build_frame(cos, orb, T=20.0),
        }
        _frames.cache = cache
    return cache


def _shot_frame(system, T=30.0):
    eq = find_equilibrium(system, [0.0, 0.0])
    return build_frame(system, shoot_homoclinic(system, saddle_data(system, eq)), T=T)


def crit_closed_form():
    orb = powerlaw_homoclinic(1.0, 1.0, 2)
    t = np.linspace(-20, 20, 8001)
    res = orb.residual(powerlaw(), t)
    sech_err = np.max(np.abs(orb(t)[:, 0] - np.sqrt(2) / np.cosh(t)))
    ok = orb.meta["x_max"] == np.sqrt(2.0) and res < 1e-10 and sech_err < 1e-12
    return ok, f"x_max={orb.meta['x_max']!r}, residual={res:.2e}, |x - sqrt2 sech t|={sech_err:.1e}"


def crit_wronskian():
    fr = _frames()["a1_30"]
    spread = float(np.ptp(fr.delta_samples))

    def A(t):
        return np.array([[0.3 * np.sin(t), 1.0], [1.0 + 0.2 * np.cos(t), -0.1 + 0.2 * np.sin(2 * t)]])

    abel = abel_check(A, 8.0)
    mod = _shot_frame(speed_modulated(powerlaw(1.0, 1.0, 2, "A1"), 0.0, 0.5))
    gap = max(fr.diagnostics["delta_edge_gap"], mod.diagnostics["delta_edge_gap"])
    ok = spread < 1e-8 and abel < 1e-6 and mod.diagnostics["abel_rel_error"] < 1e-6 and gap < 1e-4
    return ok, (f"Delta spread={spread:.1e}, Abel (linear)={abel:.1e}, "
                f"Abel (non-Hamiltonian frame)={mod.diagnostics['abel_rel_error']:.1e}, edge gap={gap:.1e}")


def crit_dichotomy():
    f = _frames()
    k15, k30 = f["a1_15"].dichotomy_k, f["a1_30"].dichotomy_k
    drift = abs(k30 - k15) / k15
    ok = np.isfinite(k15) and np.isfinite(k30) and drift < 0.05 and f["a1_30"].omega == 1.0
    return ok, f"k(T=15)={k15:.6f}, k(T=30)={k30:.6f}, drift={drift:.1e}"


def crit_green():
    f = _frames()
    sups = []
    resid = []
    for key in ("a1_15", "a1_30"):
        fr = f[key]
        g = ForcingFunction(lambda t, fr=fr: fr.system.g(fr.gamma(t), t), None, "g")
        q = complement(fr, g)
        resid.append(abs(melnikov_residual(fr, q).value))
        sups.append(green_solve(fr, q).sup_norm())
    change = abs(sups[1] - sups[0]) / sups[0]
    fr = f["a1_30"]
    g = ForcingFunction(lambda t: fr.system.g(fr.gamma(t), t), None, "g")
    rate = growth_rate(green_solve(fr, g, mode="diagnostic", check=False))
    rate_err = abs(rate - fr.omega) / fr.omega
    ok = max(resid) < 1e-10 and change < 0.01 and rate_err < 0.15
    return ok, (f"residual={max(resid):.1e}, sup change under doubling={change:.1e}, "
                f"growth rate={rate:.6f} vs omega={fr.omega} ({rate_err:.1e})")


def crit_projection():
    fr = _frames()["a1_15"]
    t = np.linspace(-12, 12, 241)
    worst = {"p^2-p": 0.0, "int J(I-p)F": 0.0, "L k - I": 0.0}
    for seed in range(20):
        rng = np.random.default_rng(seed)
        c = rng.normal(size=(3, 2))
        centres = rng.uniform(-3, 3, size=3)
        widths = rng.uniform(0.5, 2.0, size=3)
        F = ForcingFunction(
            lambda s, c=c, m=centres, w=widths: np.exp(-((np.asarray(s)[..., None] - m) / w) ** 2) @ c, 1.0)
        pF = project_p(fr, F)
        worst["p^2-p"] = max(worst["p^2-p"], float(np.max(np.abs(project_p(fr, pF)(t) - pF(t)))))
        q = complement(fr, F)
        worst["int J(I-p)F"] = max(worst["int J(I-p)F"], abs(melnikov_residual(fr, q).value))
        ts, Lz = apply_L(fr, green_solve(fr, q))
        worst["L k - I"] = max(worst["L k - I"], float(np.max(np.abs(Lz - q(ts)))))
    ok = all(v < 1e-6 for v in worst.values())
    return ok, ", ".join(f"{k}={v:.1e}" for k, v in worst.items()) + " over 20 forcings"


def crit_hamiltonian_failure():
    fr = _frames()["a1_30"]
    _, parts = cond_C4(fr)
    _, parts_p = cond_C4p(fr)
    f1 = cond_C1(fr).result
    checks = []
    for name, r in (("F4,2", parts[1].result), ("F4,2'", parts_p[1].result), ("F1", f1)):
        # an identically vanishing integrand gives value = error = 0, hence the non-strict test
        checks.append((name, r, abs(r.value) <= 3 * r.abs_error_estimate and r.abs_error_estimate < 1e-8))
    ok = all(c[2] for c in checks)
    return ok, ", ".join(f"{n}={r.value:.1e}+-{r.abs_error_estimate:.1e}" for n, r, _ in checks)


def crit_line_integral():
    fr = _frames()["a1_30"]
    time_form = cond_C1p(fr).result.value
    line_form = melnikov_line_integral(fr)
    rel = abs(time_form - line_form) / abs(time_form)
    return rel < 1e-6 and time_form > 0, f"time form={time_form:.12f}, line form={line_form:.12f}, rel={rel:.1e}"


def crit_rate():
    f = _frames()
    eps = [1e-2, 1e-3, 1e-4]
    start = time.perf_counter()
    recs = [direct_verify(f["cos"], f["orbit"], e, 20.0) for e in eps]
    elapsed = time.perf_counter() - start
    found = all(r.found for r in recs)
    slope = loglog_slope(eps, [r.distance for r in recs]) if found else float("nan")
    a1 = direct_verify(f["a1"], f["orbit"], 1e-3, 20.0)
    ok = found and abs(slope - 1.0) <= 0.2 and elapsed <= 300
    return ok, (f"forcing (0, cos t): distances={[f'{r.distance:.3e}' for r in recs]}, slope={slope:.4f}, "
                f"{elapsed:.0f}s; forcing A1 (no Melnikov zero): found={a1.found} ({a1.message})")


def crit_lyapunov_schmidt():
    f = _frames()
    fr = f["cos_20"]
    trivial = solve_eta(fr, None, 0.0, 1.0, 0.0, 0.0)
    exact_zero = trivial.eta is None and bifurcation_B(fr, None, 0.0, 1.0, 0.0, 0.0) == 0.0
    ratios = [solve_eta(fr, None, xi, 1.0, 0.0, 0.0).eta_sup() / xi for xi in (1e-2, 1e-3)]
    tangent = ratios[1] < ratios[0]
    eps = 1e-3
    scan = scan_roots(partial(bifurcation_B, fr, None), "beta", np.linspace(-1, 1, 5), [eps])
    roots = scan.roots[eps]
    if len(roots) != 1:
        return False, f"expected one beta root, got {roots}"
    beta = roots[0]
    st = solve_eta(fr, None, 0.0, 1.0, beta, eps)
    x = reconstruct(fr, st)
    res = ode_residual(fr.system, x, np.linspace(-15, 15, 601), eps, beta)
    dist = float(np.max(np.linalg.norm(x(fr.grid) - fr.gamma(fr.grid), axis=-1)))
    rec = direct_verify(f["cos"], f["orbit"], eps, 20.0, beta=beta)
    rel = abs(dist - rec.distance) / rec.distance
    ok = exact_zero and tangent and res < 1e-5 and rec.found and rel < 0.1
    return ok, (f"eta(0,1,0,0)=0: {exact_zero}, |eta|/xi={ratios[0]:.1e}->{ratios[1]:.1e}, root beta={beta:.2e}, "
                f"ODE residual={res:.1e}, distance LS={dist:.6e} vs BVP={rec.distance:.6e} ({rel:.1e})")


def crit_scanner():
    synth = scan_roots(lambda xi, alpha, beta, epsilon: xi**2 - epsilon, "xi", np.linspace(-1, 1, 41), [1e-2])
    fr = _frames()["cos_20"]
    b0 = bifurcation_B(fr, None, 0.0, 1.0, 0.0, 0.0)
    zero_scan = scan_roots(partial(bifurcation_B, fr, None), "alpha", np.linspace(0.9, 1.1, 5), [0.0])
    ok = synth.classification == "sign-dependent pair" and b0 == 0.0 and 1.0 in zero_scan.roots[0.0]
    return ok, (f"synthetic: {synth.classification} roots={synth.roots[1e-2]}, B(0,1,0,0)={b0}, "
                f"eps=0 alpha roots include 1: {1.0 in zero_scan.roots[0.0]}")


def crit_frame_scaling():
    fr = _frames()["a1_30"]
    same = evaluate_conditions(fr).verdicts() == evaluate_conditions(fr.transformed(2.0, 0.3)).verdicts()
    tf = _shot_frame(linearly_transformed(powerlaw(1.0, 1.0, 2, "sin"), [[1.0, 0.3], [0.2, 1.0]]))
    base = evaluate_conditions(tf, beta=0.3).verdicts()
    same_t = base == evaluate_conditions(tf.transformed(2.0, 0.3), beta=0.3).verdicts()
    return same and same_t, (f"power-law A1 unchanged: {same}; transformed system (C3, C5 nonzero) unchanged: "
                             f"{same_t}; C5={base['C5']}")


CRITERIA = [
    (1, "closed-form homoclinic", crit_closed_form),
    (2, "Wronskian constancy and Abel identity", crit_wronskian),
    (3, "dichotomy constant stable under window doubling", crit_dichotomy),
    (4, "bounded solutions iff zero Melnikov residual", crit_green),
    (5, "projection and right-inverse identities", crit_projection),
    (6, "Hamiltonian degeneracy of F1, F4,2, F4,2'", crit_hamiltonian_failure),
    (7, "time and line forms of F1' agree", crit_line_integral),
    (8, "bounded-solution distance is O(eps)", crit_rate),
    (9, "Lyapunov-Schmidt consistency", crit_lyapunov_schmidt),
    (10, "root scanner sanity", crit_scanner),
    (11, "frame-scaling invariance of verdicts", crit_frame_scaling),
]


def _run(number, title, func):
    try:
        ok, detail = func()
    except Exception as exc:  # noqa: BLE001 - reported as a failing line
        ok, detail = False, f"{type(exc).__name__}: {exc}"
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {number:>2} {title}: {detail}"
    print(line)
    LINES.append(line)
    return ok, line


@pytest.mark.parametrize("number, title, func", CRITERIA, ids=[f"criterion_{c[0]}" for c in CRITERIA])
def test_criterion(number, title, func):
    ok, line = _run(number, title, func)
    assert ok, line


if __name__ == "__main__":
    results = [_run(*c)[0] for c in CRITERIA]
    print(f"{sum(results)}/{len(results)} criteria pass")

"""Integral conditions along the homoclinic orbit and their zero/nonzero verdicts.

Notation: ``h_k = <grad f_k(gamma), gamma> - f_k(gamma)`` (the k-th entry of
``Df(gamma) gamma - f(gamma)``) and ``S_k`` is the sum of all entries of the
Hessian of ``f_k`` at ``gamma``.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad
from scipy.interpolate import CubicSpline
from scipy.optimize import brentq

from .planar import wedge
from .quadrature import DecayError, DecayingIntegrand1D, QuadResult, cumulative_integral, integrate_line, integrate_plane
from .variational import VariationalFrame

__all__ = [
    "Condition",
    "ConditionReport",
    "KappaError",
    "KappaFunctions",
    "classify",
    "compute_kappas",
    "cond_C1",
    "cond_C1p",
    "cond_C2",
    "cond_C3",
    "cond_C4",
    "cond_C4p",
    "cond_C5",
    "cond_C6",
    "evaluate_conditions",
    "melnikov_line_integral",
]

THRESHOLD = 1e-6
LINE_TOL = 1e-10
PLANE_TOL = 1e-9


class KappaError(ValueError):
    pass


def classify(res: QuadResult, threshold: float = THRESHOLD) -> str:
    v, e = abs(res.value), res.abs_error_estimate
    if v > max(threshold, 3 * e):
        return "nonzero"
    if v <= threshold:
        return "zero"
    return "undecided"


@dataclass(frozen=True)
class Condition:
    name: str
    verdict: str
    result: QuadResult | None = None
    note: str = ""

    @property
    def holds(self) -> bool:
        return self.verdict in ("nonzero", "holds")

    @property
    def status(self) -> str:
        """``holds``/``fails`` for decided verdicts, otherwise the verdict itself."""
        if self.holds:
            return "holds"
        return "fails" if self.verdict in ("zero", "fails") else self.verdict

    def to_dict(self) -> dict:
        out = {"condition": self.name, "verdict": self.verdict, "status": self.status, "note": self.note}
        if self.result is not None:
            out.update(value=float(self.result.value), error=float(self.result.abs_error_estimate),
                       truncation_T=float(self.result.truncation_T), nodes=int(self.result.node_count))
        return out


def _along(frame: VariationalFrame, t, beta: float = 0.0) -> dict:
    """Orbit quantities at times ``t`` (any shape)."""
    sys = frame.system
    gam = frame.gamma(t)
    fg = sys.f(gam)
    jac = sys.jacobian(gam)
    dfg = np.einsum("...ij,...j->...i", jac, gam)
    return {"gamma": gam, "f": fg, "Dfgamma": dfg, "h": dfg - fg, "delta": frame.delta(t),
            "g": sys.g(gam, np.asarray(t) - beta)}


def _hess_sums(frame, t):
    return frame.system.hessians(frame.gamma(t)).sum(axis=(-2, -1))


def _line(frame: VariationalFrame, integrand, tol: float) -> QuadResult:
    om = frame.omega
    return integrate_line(DecayingIntegrand1D(integrand, om, min(8.0 / om, frame.T)), tol, max_T=frame.T)


def _plane(frame: VariationalFrame, integrand, tol: float) -> QuadResult:
    om = frame.omega
    return integrate_plane(integrand, om, tol, core_window=min(8.0 / om, frame.T), max_T=frame.T)


def cond_C1(frame: VariationalFrame, threshold: float = THRESHOLD, tol: float = LINE_TOL) -> Condition:
    def integrand(s):
        q = _along(frame, s)
        return wedge(q["f"], q["Dfgamma"]) / q["delta"]

    res = _line(frame, integrand, tol)
    return Condition("C1", classify(res, threshold), res)


def cond_C1p(frame: VariationalFrame, beta: float = 0.0, threshold: float = THRESHOLD,
             tol: float = LINE_TOL) -> Condition:
    def integrand(s):
        q = _along(frame, s, beta)
        return wedge(q["f"], q["g"]) / q["delta"]

    res = _line(frame, integrand, tol)
    return Condition("C1'", classify(res, threshold), res)


def melnikov_line_integral(frame: VariationalFrame, beta: float = 0.0, tol: float = 1e-12) -> float:
    """``int_gamma g2 dx`` with the loop written as two graphs over ``x``.

    Valid when ``Delta`` is constant and ``g1 = 0`` on the loop; then it equals
    the time integral of ``f ^ g / Delta`` divided out by ``Delta(0)``.  On each
    half of the loop ``t(x)`` is recovered by root finding on ``gamma_1``.
    """
    T = frame.T
    grid = frame.grid
    gam = frame.gamma(grid)
    mid = grid.size // 2
    if np.max(np.abs(frame.system.g(gam, grid - beta)[:, 0])) > 0:
        raise ValueError("line form implemented for forcing on the second equation only")
    x = gam[:, 0]
    left, right = x[:mid + 1], x[mid:]
    if not (np.all(np.diff(left) > 0) and np.all(np.diff(right) < 0)):
        raise ValueError("gamma_1 is not monotone on each half of the loop")
    delta0 = float(frame.delta(np.array(0.0)))
    x_top = float(x[mid])

    def branch(lo_t, hi_t, sign):
        def t_of(xv):
            return brentq(lambda t: frame.gamma(np.array(t))[0] - xv, lo_t, hi_t, xtol=1e-14)

        def integrand(xv):
            t = t_of(xv)
            return float(frame.system.g(frame.gamma(np.array(t)), np.array(t - beta))[1])

        x_edge = float(frame.gamma(np.array(lo_t if sign > 0 else hi_t))[0])
        val, _ = quad(integrand, x_edge, x_top, epsabs=tol, epsrel=tol, limit=200)
        return sign * val

    # rising half runs x_edge -> x_top, falling half runs back down
    return (branch(-T, 0.0, +1) + branch(0.0, T, -1)) / delta0


def cond_C2(frame: VariationalFrame, threshold: float = THRESHOLD) -> tuple[Condition, float]:
    """Sup of ``|gamma ^ f(gamma)|`` over the frame grid."""
    gam = frame.gamma(frame.grid)
    sup = float(np.max(np.abs(wedge(gam, frame.system.f(gam)))))
    return Condition("C2", "nonzero" if sup > threshold else "zero", note=f"sup={sup:.12g}"), sup


def cond_C3(frame: VariationalFrame, beta: float = 0.0, threshold: float = THRESHOLD,
            tol: float = PLANE_TOL, swap: bool = False) -> Condition:
    """Double integral with ``G = (g1(gamma(s), s-beta), g2(gamma(t), t-beta))``.

    ``swap`` evaluates ``F^ ^ G`` instead of ``G ^ F^`` (antisymmetry check).
    """
    def integrand(s, t):
        qs, qt = _along(frame, s, beta), _along(frame, t, beta)
        weight = qs["f"][..., 1] * qt["f"][..., 0] / (qt["delta"] * qs["delta"])
        G = np.stack(np.broadcast_arrays(qs["g"][..., 0], qt["g"][..., 1]), axis=-1)
        Fh = np.stack(np.broadcast_arrays(qs["h"][..., 0], qt["h"][..., 1]), axis=-1)
        return weight * (wedge(Fh, G) if swap else wedge(G, Fh))

    res = _plane(frame, integrand, tol)
    return Condition("C3", classify(res, threshold), res)


def _c4_parts(frame, beta, threshold, tol, primed):
    i, j = (1, 0) if primed else (0, 1)  # C4 pairs f_2 with g_1 / h_1; C4' mirrors

    def line1(s):
        q = _along(frame, s, beta)
        return q["f"][..., j] * q["g"][..., i] / q["delta"]

    def line3(s):
        q = _along(frame, s, beta)
        return q["f"][..., j] * q["h"][..., i] / q["delta"]

    def plane2(s, t):
        qs, qt = _along(frame, s), _along(frame, t)
        weight = qt["f"][..., i] * qs["f"][..., j] / (qt["delta"] * qs["delta"])
        Ss, St = _hess_sums(frame, s), _hess_sums(frame, t)
        # F-bar_{j}(t) ^ F-bar_{i}(s)
        return weight * (St[..., j] * qs["h"][..., i] - qt["h"][..., j] * Ss[..., i])

    suffix = "'" if primed else ""
    out = []
    for k, (kind, fn) in enumerate((("line", line1), ("plane", plane2), ("line", line3)), start=1):
        res = _line(frame, fn, tol) if kind == "line" else _plane(frame, fn, 10 * tol)
        out.append(Condition(f"F4,{k}{suffix}", classify(res, threshold), res))
    return out


def _c4_verdict(name, parts):
    if all(p.verdict == "nonzero" for p in parts):
        verdict = "holds"
    elif any(p.verdict == "zero" for p in parts):
        verdict = "fails"
    else:
        verdict = "undecided"
    note = "F4,3 denominator vanishes" if parts[2].verdict == "zero" else ""
    return Condition(name, verdict, note=note), parts


def cond_C4(frame: VariationalFrame, beta: float = 0.0, threshold: float = THRESHOLD,
            tol: float = LINE_TOL):
    """Returns ``(verdict, [F4,1, F4,2, F4,3])``."""
    return _c4_verdict("C4", _c4_parts(frame, beta, threshold, tol, primed=False))


def cond_C4p(frame: VariationalFrame, beta: float = 0.0, threshold: float = THRESHOLD,
             tol: float = LINE_TOL):
    return _c4_verdict("C4'", _c4_parts(frame, beta, threshold, tol, primed=True))


@dataclass(frozen=True)
class KappaFunctions:
    kappa1: float | None
    grid: np.ndarray
    kappa2_samples: np.ndarray
    kappa3_samples: np.ndarray
    beta: float
    notes: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "_k2", CubicSpline(self.grid, self.kappa2_samples, axis=0))
        object.__setattr__(self, "_k3", CubicSpline(self.grid, self.kappa3_samples, axis=0))

    def kappa2(self, t, j=None):
        v = self._k2(np.clip(t, self.grid[0], self.grid[-1]))
        return v if j is None else v[..., j - 1]

    def kappa3(self, t, j=None):
        v = self._k3(np.clip(t, self.grid[0], self.grid[-1]))
        return v if j is None else v[..., j - 1]


def _from_minus_infinity(frame, integrand, total: QuadResult):
    """``int_{-inf}^t`` on the frame grid; right half computed as ``total - int_t^inf``.

    A total indistinguishable from zero (``|value| <= 3 err``) is taken as exactly zero.
    """
    grid = frame.grid
    mid = grid.size // 2
    cum = cumulative_integral(integrand, grid)
    total_value = 0.0 if abs(total.value) <= 3 * total.abs_error_estimate else total.value
    out = cum.copy()
    out[mid + 1:] = total_value - (cum[-1] - cum[mid + 1:])
    return out, total_value == 0.0


def kappa_profiles(frame: VariationalFrame, beta: float = 0.0, tol: float = LINE_TOL):
    """``(kappa2, kappa3, notes)`` sampled on the frame grid, shape ``(n, 2)`` each."""
    grid = frame.grid
    zeta = frame.zeta_samples
    fg = frame.gamma_prime(grid)

    def i2(s):
        q = _along(frame, s)
        return wedge(q["f"], q["Dfgamma"]) / q["delta"]

    def j2(s):
        q = _along(frame, s)
        return wedge(q["h"], frame.zeta(s)) / q["delta"]

    def i3(s):
        q = _along(frame, s, beta)
        return wedge(q["f"], q["g"]) / q["delta"]

    def j3(s):
        q = _along(frame, s, beta)
        return wedge(q["g"], frame.zeta(s)) / q["delta"]

    notes = []
    I2, snapped2 = _from_minus_infinity(frame, i2, _line(frame, i2, tol))
    I3, snapped3 = _from_minus_infinity(frame, i3, _line(frame, i3, tol))
    if not snapped2:
        notes.append("int f^Df(gamma)gamma/Delta != 0: kappa_2 grows like zeta as t -> +inf")
    if not snapped3:
        notes.append("int f^g/Delta != 0: kappa_3 grows like zeta as t -> +inf")
    J2 = cumulative_integral(j2, grid, origin=0.0)
    J3 = cumulative_integral(j3, grid, origin=0.0)
    k2 = zeta * I2[:, None] + fg * J2[:, None]
    k3 = zeta * I3[:, None] + fg * J3[:, None]
    return k2, k3, notes


def compute_kappas(frame: VariationalFrame, beta: float = 0.0, threshold: float = THRESHOLD,
                   tol: float = LINE_TOL) -> KappaFunctions:
    """``kappa1 = -F4,1 / F4,3`` together with the sampled ``kappa2``/``kappa3`` profiles."""
    parts = _c4_line_parts(frame, beta, tol)
    den = parts[1]
    if classify(den, threshold) != "nonzero":
        raise KappaError(f"kappa1 denominator F4,3 = {den.value:.3g} is not bounded away from zero")
    k1 = -parts[0].value / den.value
    k2, k3, notes = kappa_profiles(frame, beta, tol)
    return KappaFunctions(float(k1), frame.grid, k2, k3, beta, tuple(notes))


def _c4_line_parts(frame, beta, tol):
    def num(s):
        q = _along(frame, s, beta)
        return q["f"][..., 1] * q["g"][..., 0] / q["delta"]

    def den(s):
        q = _along(frame, s)
        return q["f"][..., 1] * q["h"][..., 0] / q["delta"]

    return _line(frame, num, tol), _line(frame, den, tol)


def tilde_F(frame: VariationalFrame, kappas: KappaFunctions, k: int, t, beta: float = 0.0):
    """``F~_k(t)`` for ``k`` in {1, 2}; both use ``kappa2_j + kappa3_j``."""
    sys = frame.system
    gam = frame.gamma(t)
    tt = np.asarray(t, dtype=float)
    grad_g = sys.grad_g(gam, tt - beta)[..., k - 1, :].sum(axis=-1)
    hess = sys.hessians(gam)[..., k - 1, :, :].sum(axis=-2)  # sum over i, leaves index j
    coef = kappas.kappa1 * gam + kappas.kappa2(tt) + kappas.kappa3(tt)
    first = grad_g + np.einsum("...j,...j->...", hess, coef)
    q = _along(frame, t)
    return np.stack(np.broadcast_arrays(first, q["h"][..., k - 1]), axis=-1)


def cond_C5(frame: VariationalFrame, beta: float = 0.0, threshold: float = THRESHOLD,
            tol: float = PLANE_TOL, kappas: KappaFunctions | None = None, swap: bool = False) -> Condition:
    if kappas is None:
        try:
            kappas = compute_kappas(frame, beta, threshold)
        except KappaError as exc:
            return Condition("C5", "undefined", note=str(exc))

    def integrand(s, t):
        qs, qt = _along(frame, s), _along(frame, t)
        weight = qt["f"][..., 0] * qs["f"][..., 1] / (qt["delta"] * qs["delta"])
        F2t = tilde_F(frame, kappas, 2, t, beta)
        F1s = tilde_F(frame, kappas, 1, s, beta)
        return weight * (wedge(F1s, F2t) if swap else wedge(F2t, F1s))

    try:
        res = _plane(frame, integrand, tol)
    except DecayError as exc:
        return Condition("C5", "undefined", note=f"integrand does not decay: {exc}; " + "; ".join(kappas.notes))
    return Condition("C5", classify(res, threshold), res, note="; ".join(kappas.notes))


def cond_C6(system, box, times=None, n: int = 21, tol: float = 1e-12):
    """Look for ``x`` in ``box = ((x_lo, x_hi), (y_lo, y_hi))`` and ``t1 != t2`` with ``g(x, t1) != g(x, t2)``.

    Returns ``(Condition, witness)`` with ``witness = (x, t1, t2)`` or ``None``.
    """
    if times is None:
        times = [(0.0, np.pi), (0.0, 1.0), (0.25, 2.0)]
    (x0, x1), (y0, y1) = box
    X, Y = np.meshgrid(np.linspace(x0, x1, n), np.linspace(y0, y1, n), indexing="ij")
    pts = np.stack([X.ravel(), Y.ravel()], axis=-1)
    for t1, t2 in times:
        diff = np.linalg.norm(system.g(pts, np.full(len(pts), t1)) - system.g(pts, np.full(len(pts), t2)), axis=-1)
        hit = np.flatnonzero(diff > tol)
        if hit.size:
            return Condition("C6", "holds"), (pts[hit[0]].tolist(), float(t1), float(t2))
    return Condition("C6", "fails"), None


def orbit_box(frame: VariationalFrame, pad: float = 0.25):
    gam = frame.gamma(frame.grid)
    lo, hi = gam.min(axis=0), gam.max(axis=0)
    return ((lo[0] - pad, hi[0] + pad), (lo[1] - pad, hi[1] + pad))


@dataclass
class ConditionReport:
    beta_used: float
    thresholds: dict
    conditions: dict = field(default_factory=dict)
    C6_witness: object = None
    C2_sup: float = float("nan")
    notes: list = field(default_factory=list)
    context: dict = field(default_factory=dict)

    def verdicts(self) -> dict:
        return {k: c.verdict for k, c in self.conditions.items()}

    def statuses(self) -> dict:
        return {k: c.status for k, c in self.conditions.items()}

    def to_dict(self) -> dict:
        return {
            "beta": self.beta_used,
            "thresholds": self.thresholds,
            "conditions": [c.to_dict() for c in self.conditions.values()],
            "C2_sup": self.C2_sup,
            "C6_witness": self.C6_witness,
            "notes": self.notes,
            "context": self.context,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)

    def table(self) -> str:
        lines = [f"{'condition':<9} {'value':>22} {'error':>10}  {'verdict':<10} status"]
        for c in self.conditions.values():
            if c.result is not None:
                lines.append(f"{c.name:<9} {c.result.value:>22.14g} {c.result.abs_error_estimate:>10.2e}  "
                             f"{c.verdict:<10} {c.status}")
            else:
                lines.append(f"{c.name:<9} {'':>22} {'':>10}  {c.verdict:<10} {c.status}  {c.note}".rstrip())
        return "\n".join(lines)


def evaluate_conditions(frame: VariationalFrame, beta: float = 0.0, threshold: float = THRESHOLD,
                        probe_box=None, line_tol: float = LINE_TOL, plane_tol: float = PLANE_TOL) -> ConditionReport:
    report = ConditionReport(beta_used=beta,
                             thresholds={"verdict": threshold, "line_tol": line_tol, "plane_tol": plane_tol})
    conds = report.conditions
    conds["C1"] = cond_C1(frame, threshold, line_tol)
    conds["C1'"] = cond_C1p(frame, beta, threshold, line_tol)
    conds["C2"], report.C2_sup = cond_C2(frame, threshold)
    conds["C3"] = cond_C3(frame, beta, threshold, plane_tol)
    for fn in (cond_C4, cond_C4p):
        verdict, parts = fn(frame, beta, threshold, line_tol)
        conds[verdict.name] = verdict
        for p in parts:
            conds[p.name] = p
    conds["C5"] = cond_C5(frame, beta, threshold, plane_tol)
    conds["C6"], report.C6_witness = cond_C6(frame.system, probe_box or orbit_box(frame))
    report.notes.append("F~_1 and F~_2 both use kappa2_j + kappa3_j")
    report.notes.append("G(s,t) evaluates g at (gamma(s), s-beta) and (gamma(t), t-beta)")
    report.context = {"frame_normalization": frame.normalization, "window_T": frame.T,
                      "system": frame.system.name, "params": _jsonable(frame.system.params)}
    return report


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.generic):
        return obj.item()
    return obj

"""Homoclinic orbits of planar saddles: closed form for the power-law family, shooting otherwise."""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.integrate import solve_ivp
from scipy.interpolate import BPoly

from .planar import PlanarSystem, as_vec2

__all__ = [
    "HomoclinicError",
    "HomoclinicOrbit",
    "SaddleData",
    "find_equilibrium",
    "manifold_chart",
    "orbit_from_samples",
    "powerlaw_homoclinic",
    "saddle_data",
    "shoot_homoclinic",
]


class HomoclinicError(RuntimeError):
    pass


@dataclass(frozen=True)
class SaddleData:
    equilibrium: np.ndarray
    omega: float
    unstable_dir: np.ndarray
    stable_dir: np.ndarray


@dataclass(frozen=True)
class HomoclinicOrbit:
    """Evaluable orbit ``gamma(t)`` with ``gamma(0)`` at maximal excursion from the saddle."""

    gamma: Callable[[np.ndarray], np.ndarray]
    gamma_dot: Callable[[np.ndarray], np.ndarray]
    saddle: SaddleData
    anchor: np.ndarray
    decay_window: float
    meta: dict = field(default_factory=dict)

    def __call__(self, t):
        return self.gamma(t)

    def residual(self, system: PlanarSystem, t) -> float:
        t = np.asarray(t, dtype=float)
        return float(np.max(np.linalg.norm(self.gamma_dot(t) - system.f(self.gamma(t)), axis=-1)))

    def tail_slope(self, t_lo: float, t_hi: float, n: int = 50) -> tuple[float, float]:
        """Fitted slope of ``log|gamma(t) - eq|`` against ``|t|`` on both tails."""
        ts = np.linspace(t_lo, t_hi, n)
        eq = self.saddle.equilibrium
        slopes = []
        for sign in (1.0, -1.0):
            d = np.linalg.norm(self.gamma(sign * ts) - eq, axis=-1)
            slopes.append(np.polyfit(ts, np.log(d), 1)[0])
        return slopes[0], slopes[1]

    def to_csv(self, path, t) -> None:
        t = np.asarray(t, dtype=float)
        pts = self.gamma(t)
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["t", "x", "y"])
            for ti, (x, y) in zip(t, pts):
                w.writerow([repr(float(ti)), repr(float(x)), repr(float(y))])


def find_equilibrium(system: PlanarSystem, guess, tol: float = 1e-12, maxiter: int = 50) -> np.ndarray:
    """Newton iteration for ``f(x) = 0``."""
    x = as_vec2(guess).astype(float).copy()
    for _ in range(maxiter):
        fx = system.f(x)
        if np.linalg.norm(fx) < tol:
            return x
        jac = system.jacobian(x)
        if abs(np.linalg.det(jac)) < 1e-14 * (1.0 + np.max(np.abs(jac))) ** 2:
            raise HomoclinicError(f"singular Jacobian at {x}")
        x = x - np.linalg.solve(jac, fx)
        if not np.all(np.isfinite(x)):
            break
    raise HomoclinicError(f"Newton did not converge in {maxiter} iterations from {np.asarray(guess)}")


def _orient(v):
    v = v / np.linalg.norm(v)
    k = 0 if abs(v[0]) > 1e-12 else 1
    return v if v[k] > 0 else -v


def saddle_data(system: PlanarSystem, eq, tol: float = 1e-10) -> SaddleData:
    """Eigen-data of a saddle with symmetric spectrum ``{+omega, -omega}``."""
    eq = as_vec2(eq)
    if np.linalg.norm(system.f(eq)) > 1e-8:
        raise HomoclinicError(f"{eq} is not an equilibrium")
    jac = np.asarray(system.jacobian(eq), dtype=float)
    tr = np.trace(jac)
    if abs(tr) > tol * (1.0 + np.max(np.abs(jac))):
        raise HomoclinicError(f"non-symmetric spectrum: trace Df = {tr:.3g}")
    det = np.linalg.det(jac)
    if det >= 0:
        raise HomoclinicError("complex or zero eigenvalues: not a saddle")
    omega = float(np.sqrt(-det))
    dirs = []
    for lam in (omega, -omega):
        m = jac - lam * np.eye(2)
        # null vector of the rank-one matrix m
        row = m[0] if np.linalg.norm(m[0]) >= np.linalg.norm(m[1]) else m[1]
        v = _orient(np.array([-row[1], row[0]]))
        if np.linalg.norm(jac @ v - lam * v) > tol * (1.0 + omega):
            raise HomoclinicError("eigenvector residual too large")
        dirs.append(v)
    return SaddleData(eq, omega, dirs[0], dirs[1])


def _sech(u):
    a = np.exp(-np.abs(u))
    return 2.0 * a / (1.0 + a * a)


def powerlaw_homoclinic(nu: float = 1.0, mu: float = 1.0, p: int = 2, tail_tol: float = 1e-5) -> HomoclinicOrbit:
    """Closed-form loop ``x(t) = x_max sech^(2/p)(p sqrt(nu) t / 2)``, ``y = x'``."""
    if not (nu > 0 and mu > 0) or int(p) != p or p < 2:
        raise ValueError("need nu > 0, mu > 0 and integer p >= 2")
    p = int(p)
    x_max = ((p + 2) * nu / (2 * mu)) ** (1.0 / p)
    w = np.sqrt(nu)
    c = p * w / 2

    def gamma(t):
        t = np.asarray(t, dtype=float)
        x = x_max * _sech(c * t) ** (2.0 / p)
        return np.stack([x, -w * x * np.tanh(c * t)], axis=-1)

    def gamma_dot(t):
        t = np.asarray(t, dtype=float)
        x = x_max * _sech(c * t) ** (2.0 / p)
        th = np.tanh(c * t)
        y = -w * x * th
        ydot = -w * (y * th + c * x * (1.0 - th * th))
        return np.stack([y, ydot], axis=-1)

    s = 1.0 / np.sqrt(2.0)
    saddle = SaddleData(np.zeros(2), float(w), np.array([s, s * w]) / np.hypot(s, s * w),
                        np.array([s, -s * w]) / np.hypot(s, s * w))
    # |gamma(t)| ~ x_max 2^(2/p) sqrt(1+nu) exp(-w t)
    amp = x_max * 2 ** (2.0 / p) * np.sqrt(1.0 + nu)
    decay = float(np.log(amp / tail_tol) / w)
    return HomoclinicOrbit(gamma, gamma_dot, saddle, np.array([x_max, 0.0]), decay,
                           meta={"kind": "closed-form", "x_max": x_max, "nu": nu, "mu": mu, "p": p})


def manifold_chart(system: PlanarSystem, saddle: SaddleData, unstable: bool):
    """Second-order chart ``K(s) = eq + s v + s^2 w`` of a local invariant manifold.

    Solves ``(Df - 2 lam) w = -D^2 f[v, v] / 2`` so that ``f(K(s)) = lam s K'(s) + O(s^3)``.
    """
    eq = saddle.equilibrium
    lam = saddle.omega if unstable else -saddle.omega
    v = saddle.unstable_dir if unstable else saddle.stable_dir
    jac = system.jacobian(eq)
    quad = np.einsum("kij,i,j->k", system.hessians(eq), v, v)
    w = np.linalg.solve(jac - 2 * lam * np.eye(2), -0.5 * quad)

    def K(s):
        s = np.asarray(s, dtype=float)[..., None]
        return eq + s * v + s * s * w

    def dK(s):
        s = np.asarray(s, dtype=float)[..., None]
        return v + 2 * s * w

    return K, dK, lam


def orbit_from_samples(system: PlanarSystem, saddle: SaddleData, t, pts, meta=None,
                       tail_tol: float = 1e-5, tails=None) -> HomoclinicOrbit:
    """Quintic Hermite interpolation of orbit samples, with exponential tails outside the range.

    Derivatives at the nodes are taken from the vector field (``f`` and ``Df f``).
    ``tails`` optionally gives ``((K, dK, lam, s0), (K, dK, lam, s1))`` manifold
    charts for the two ends (see :func:`manifold_chart`); otherwise the end
    offsets are continued linearly at rate ``omega``.
    """
    t = np.asarray(t, dtype=float)
    pts = np.asarray(pts, dtype=float)
    d1 = system.f(pts)
    d2 = np.einsum("nij,nj->ni", system.jacobian(pts), d1)
    eq = saddle.equilibrium
    om = saddle.omega
    polys = [BPoly.from_derivatives(t, np.stack([pts[:, k], d1[:, k], d2[:, k]], axis=1))
             for k in range(2)]
    dpolys = [pp.derivative() for pp in polys]
    t0, t1 = t[0], t[-1]
    lo_off, hi_off = pts[0] - eq, pts[-1] - eq
    if tails is None:
        ident = (lambda s: eq + s[..., None], lambda s: np.ones(np.shape(s) + (2,)))
        tails = ((ident[0], None, om, lo_off), (ident[1], None, -om, hi_off))
        linear = True
    else:
        linear = False

    def tail_fn(end, t_ref, deriv):
        K, dK, lam, s0 = tails[end]

        def fn(s):
            scale = np.exp(lam * (s - t_ref))
            if linear:
                off = s0 * scale[:, None]
                return lam * off if deriv else eq + off
            ss = s0 * scale
            return (dK(ss) * (lam * ss)[:, None]) if deriv else K(ss)
        return fn

    def _eval(tt, inner, deriv):
        tt = np.asarray(tt, dtype=float)
        flat = tt.reshape(-1)
        out = np.empty(flat.shape + (2,))
        mid = (flat >= t0) & (flat <= t1)
        out[mid] = np.stack([q(flat[mid]) for q in inner], axis=-1)
        lo = flat < t0
        out[lo] = tail_fn(0, t0, deriv)(flat[lo])
        hi = flat > t1
        out[hi] = tail_fn(1, t1, deriv)(flat[hi])
        return out.reshape(tt.shape + (2,))

    def gamma(tt):
        return _eval(tt, polys, False)

    def gamma_dot(tt):
        return _eval(tt, dpolys, True)

    dist = np.linalg.norm(pts - eq, axis=-1)
    anchor = gamma(np.array(0.0)) if t0 <= 0.0 <= t1 else pts[int(np.argmax(dist))]
    edge = max(np.linalg.norm(lo_off), np.linalg.norm(hi_off), 1e-300)
    extra = max(0.0, np.log(edge / tail_tol) / om)
    decay = float(max(-t0, t1) + extra) if edge > tail_tol else float(_first_below(t, dist, tail_tol))
    meta = dict(meta or {}, kind=(meta or {}).get("kind", "samples"))
    return HomoclinicOrbit(gamma, gamma_dot, saddle, anchor, decay, meta=meta)


def _first_below(t, dist, tol):
    inside = np.abs(t)[dist >= tol]
    return float(inside.max()) if inside.size else 0.0


def shoot_homoclinic(system: PlanarSystem, saddle: SaddleData, *, delta: float | None = None,
                     box: float = 10.0, branch: int = 1, t_max: float = 200.0,
                     rtol: float = 1e-12, atol: float = 1e-14, match_tol: float = 1e-7,
                     dt: float = 0.01) -> HomoclinicOrbit:
    """Shoot along the unstable and (backwards) stable directions to the max-excursion section.

    Both branches stop where ``(x - eq) . f(x)`` changes sign, i.e. where the
    distance to the saddle peaks; the two section points must coincide.
    """
    eq = saddle.equilibrium
    if delta is None:
        delta = 1e-6 * box

    def section(t, x):
        return float(np.dot(x - eq, system.f(x)))

    def escape(t, x):
        return box - float(np.max(np.abs(x - eq)))

    escape.terminal = True

    charts = {True: manifold_chart(system, saddle, True), False: manifold_chart(system, saddle, False)}

    def leg(unstable, sign_t, event):
        x0 = charts[unstable][0](branch * delta)
        event.terminal = True
        sol = solve_ivp(lambda t, x: system.f(x), (0.0, sign_t * t_max), x0, method="DOP853",
                        rtol=rtol, atol=atol, events=(event, escape), dense_output=True)
        if sol.t_events[1].size:
            raise HomoclinicError("orbit escapes the working box: no homoclinic loop found")
        if not sol.t_events[0].size:
            raise HomoclinicError("no return to the maximal-excursion section")
        return sol, float(sol.t_events[0][0]), sol.y_events[0][0]

    def peak(t, x):
        # skip the launch instant, where the product is ~ omega delta^2
        return section(t, x) if abs(t) > 1e-3 else 1.0

    peak.direction = -1.0
    # the distance maximum can be degenerate (quartic for the cubic oscillator),
    # so both legs stop on the transversal line through it instead
    _, _, p_star = leg(True, 1.0, peak)
    normal = system.f(p_star)
    normal = normal / np.linalg.norm(normal)

    def cut_fwd(t, x):
        return float(np.dot(x - p_star, normal))

    def cut_bwd(t, x):
        return float(np.dot(x - p_star, normal))

    cut_fwd.direction = 1.0
    cut_bwd.direction = -1.0
    sol_u, tu, pu = leg(True, 1.0, cut_fwd)
    sol_s, ts, ps = leg(False, -1.0, cut_bwd)
    mismatch = float(np.linalg.norm(pu - ps))
    if mismatch > match_tol * (1.0 + np.linalg.norm(pu - eq)):
        raise HomoclinicError(f"return-matching residual {mismatch:.2e} above tolerance")
    # orbit time: unstable leg maps t -> t - tu on [-tu, 0]; stable leg t -> t - ts on [0, -ts]
    n_u = max(int(np.ceil(tu / dt)), 2)
    n_s = max(int(np.ceil(-ts / dt)), 2)
    tt_u = np.linspace(-tu, 0.0, n_u + 1)
    tt_s = np.linspace(0.0, -ts, n_s + 1)[1:]
    pts_u = sol_u.sol(tt_u + tu).T
    pts_s = sol_s.sol(tt_s + ts).T
    pts_u[-1] = 0.5 * (pu + ps)
    t_all = np.concatenate([tt_u, tt_s])
    pts = np.concatenate([pts_u, pts_s])
    Ku, dKu, lu = charts[True]
    Ks, dKs, ls = charts[False]
    tails = ((Ku, dKu, lu, branch * delta), (Ks, dKs, ls, branch * delta))
    return orbit_from_samples(system, saddle, t_all, pts, tails=tails,
                              meta={"kind": "shooting", "delta": delta, "mismatch": mismatch})

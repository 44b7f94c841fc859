"""Fundamental frame of the variational equation ``z' = Df(gamma(t)) z`` along a homoclinic orbit.

The bounded column is ``gamma'(t) = f(gamma(t))`` evaluated exactly; the
unbounded column ``zeta`` is integrated outward from ``t = 0`` with
``zeta(0)`` orthogonal to ``gamma'(0)`` and ``Delta(0) = 1``.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.integrate import solve_ivp
from scipy.interpolate import CubicHermiteSpline

from .homoclinic import HomoclinicOrbit
from .planar import PlanarSystem, wedge
from .quadrature import cumulative_integral

__all__ = [
    "AsymptoticsReport",
    "FrameError",
    "VariationalFrame",
    "abel_check",
    "build_frame",
    "check_asymptotics",
    "check_dichotomy",
]

OVERFLOW_GUARD = 1e8


class FrameError(RuntimeError):
    pass


@dataclass(frozen=True)
class VariationalFrame:
    system: PlanarSystem
    orbit: HomoclinicOrbit
    grid: np.ndarray
    omega: float
    zeta_samples: np.ndarray
    zeta_dot_samples: np.ndarray
    delta_samples: np.ndarray
    normalization: dict
    dichotomy_k: float = float("nan")
    diagnostics: dict = field(default_factory=dict)

    @property
    def T(self) -> float:
        return float(self.grid[-1])

    def __post_init__(self):
        spline = CubicHermiteSpline(self.grid, self.zeta_samples, self.zeta_dot_samples, axis=0)
        object.__setattr__(self, "_spline", spline)

    def gamma(self, t):
        return self.orbit.gamma(t)

    def gamma_prime(self, t):
        return self.system.f(self.orbit.gamma(t))

    def A(self, t):
        return self.system.jacobian(self.orbit.gamma(t))

    def zeta(self, t):
        t = np.asarray(t, dtype=float)
        T = self.T
        inside = np.clip(t, -T, T)
        out = self._spline(inside)
        over = np.abs(t) > T
        if np.any(over):
            grow = np.exp(self.omega * (np.abs(t) - T))
            out = np.where(over[..., None], out * grow[..., None], out)
        return out

    def delta(self, t):
        """``Delta(t) = gamma'(t) ^ zeta(t)``; held at the edge value outside the window."""
        t = np.asarray(t, dtype=float)
        inside = np.clip(t, -self.T, self.T)
        return wedge(self.gamma_prime(inside), self._spline(inside))

    def transformed(self, c: float, d: float) -> "VariationalFrame":
        """Frame with ``zeta -> c*zeta + d*gamma'`` (so ``Delta -> c*Delta``)."""
        if c == 0:
            raise ValueError("c must be nonzero")
        gp = self.gamma_prime(self.grid)
        gpp = np.einsum("nij,nj->ni", self.A(self.grid), gp)
        norm = dict(self.normalization, c=c * self.normalization.get("c", 1.0),
                    d=self.normalization.get("d", 0.0) * c + d)
        return replace(self, zeta_samples=c * self.zeta_samples + d * gp,
                       zeta_dot_samples=c * self.zeta_dot_samples + d * gpp,
                       delta_samples=c * self.delta_samples, normalization=norm)

    def to_csv(self, path, stride: int = 1) -> None:
        t = self.grid[::stride]
        gp = self.gamma_prime(t)
        z = self.zeta_samples[::stride]
        dl = self.delta_samples[::stride]
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["t", "gp1", "gp2", "zeta1", "zeta2", "delta"])
            for row in zip(t, gp[:, 0], gp[:, 1], z[:, 0], z[:, 1], dl):
                w.writerow([repr(float(v)) for v in row])


def build_frame(system: PlanarSystem, orbit: HomoclinicOrbit, T: float = 30.0, *,
                rtol: float = 1e-10, atol: float = 1e-12, step: float = 0.01,
                omega: float | None = None) -> VariationalFrame:
    if T < orbit.decay_window:
        raise ValueError(f"window T={T} shorter than the orbit decay window {orbit.decay_window:.3g}")
    n_half = int(round(T / step))
    grid = np.linspace(-T, T, 2 * n_half + 1)
    gp0 = system.f(orbit.gamma(np.array(0.0)))
    z0 = np.array([-gp0[1], gp0[0]]) / float(gp0 @ gp0)

    def rhs(t, z):
        return system.jacobian(orbit.gamma(np.array(t))) @ z

    zeta = np.empty((grid.size, 2))
    zeta[n_half] = z0
    for t_eval in (grid[n_half:], grid[n_half::-1]):
        sol = solve_ivp(rhs, (0.0, t_eval[-1]), z0, method="DOP853", t_eval=t_eval,
                        rtol=rtol, atol=atol)
        if not sol.success:
            raise FrameError(f"variational integration failed: {sol.message}")
        if t_eval[-1] > 0:
            zeta[n_half:] = sol.y.T
        else:
            zeta[:n_half + 1] = sol.y.T[::-1]
    gam = orbit.gamma(grid)
    gp = system.f(gam)
    A = system.jacobian(gam)
    zeta_dot = np.einsum("nij,nj->ni", A, zeta)
    delta = wedge(gp, zeta)
    if np.any(np.sign(delta) != np.sign(delta[n_half])) or np.any(delta == 0):
        raise FrameError("Delta(t) crosses zero: frame degenerate")

    def trace(t):
        return np.trace(system.jacobian(orbit.gamma(t)), axis1=-2, axis2=-1)

    abel = delta[n_half] * np.exp(cumulative_integral(trace, grid, origin=0.0))
    diagnostics = {
        "abel_rel_error": float(np.max(np.abs(delta - abel) / np.abs(abel))),
        "delta_spread": float(np.max(delta) - np.min(delta)),
        "delta_edge_gap": float(abs(delta[-1] - delta[0]) / max(abs(delta[-1]), abs(delta[0]))),
    }
    om = orbit.saddle.omega if omega is None else omega
    frame = VariationalFrame(system, orbit, grid, float(om), zeta, zeta_dot, delta,
                             normalization={"zeta0": z0.tolist(), "delta0": float(delta[n_half]),
                                            "c": 1.0, "d": 0.0},
                             diagnostics=diagnostics)
    try:
        k = check_dichotomy(frame)
    except FrameError:
        k = float("inf")
    return replace(frame, dichotomy_k=k)


def check_dichotomy(frame: VariationalFrame, omega: float | None = None, stride: int = 5) -> float:
    """Empirical constant ``k`` with ``|gamma'_i(t) zeta_j(s)| <= k exp(-omega |t - s|)``.

    Pairs are ``t >= s >= 0`` and ``t <= s <= 0``.  The bound separates as
    ``(|gamma'_i(t)| e^{omega|t|}) (|zeta_j(s)| e^{-omega|s|})``, so the supremum
    over ordered pairs is a running maximum.
    """
    om = frame.omega if omega is None else omega
    g = frame.grid
    mid = g.size // 2
    k = 0.0
    for idx in (np.arange(mid, g.size, stride), np.arange(mid, -1, -stride)):
        t = g[idx]
        a = np.max(np.abs(frame.gamma_prime(t)), axis=1) * np.exp(om * np.abs(t))
        b = np.max(np.abs(frame.zeta_samples[idx]), axis=1) * np.exp(-om * np.abs(t))
        k = max(k, float(np.max(a * np.maximum.accumulate(b))))
    if not np.isfinite(k) or k > OVERFLOW_GUARD:
        raise FrameError(f"dichotomy constant {k:.3g} exceeds guard: wrong omega or broken frame")
    return k


@dataclass(frozen=True)
class AsymptoticsReport:
    times: np.ndarray
    gamma_ratio: np.ndarray
    zeta_ratio: np.ndarray
    gamma_drift: float
    zeta_drift: float

    @property
    def converged(self) -> bool:
        return self.gamma_drift < 0.05 and self.zeta_drift < 0.05


def check_asymptotics(frame: VariationalFrame, tail_fraction: float = 0.1, n: int = 11) -> AsymptoticsReport:
    """Tail ratios ``gamma'(t) e^{omega|t|}`` and ``zeta(t) e^{-omega|t|}``.

    ``times`` holds ``0`` followed by ``n`` points on each outer tail; drift is
    the relative change of each ratio across the last ``tail_fraction`` of the window.
    """
    T = frame.T
    tail = np.linspace((1 - tail_fraction) * T, T, n)
    times = np.concatenate([[0.0], -tail[::-1], tail])
    w = np.exp(frame.omega * np.abs(times))[:, None]
    gr = frame.gamma_prime(times) * w
    zr = frame.zeta(times) / w

    def drift(r):
        out = 0.0
        for sl in (slice(1, n + 1), slice(n + 1, 2 * n + 1)):
            seg = r[sl]
            scale = np.max(np.linalg.norm(seg, axis=1))
            out = max(out, float(np.max(np.linalg.norm(seg - seg[-1 if sl.start > 1 else 0], axis=1)) / scale))
        return out

    return AsymptoticsReport(times, gr, zr, drift(gr), drift(zr))


def abel_check(A, t_end: float, *, rtol: float = 1e-11, atol: float = 1e-13, n: int = 201) -> float:
    """Max relative gap between ``det X(t)`` and ``exp(int_0^t trace A)`` for ``X' = A X``, ``X(0) = I``."""
    ts = np.linspace(0.0, t_end, n)
    sol = solve_ivp(lambda t, x: (A(t) @ x.reshape(2, 2)).ravel(), (0.0, t_end), np.eye(2).ravel(),
                    method="DOP853", t_eval=ts, rtol=rtol, atol=atol)
    X = sol.y.T.reshape(-1, 2, 2)
    det = np.linalg.det(X)
    tr = cumulative_integral(lambda t: np.array([np.trace(A(s)) for s in np.atleast_1d(t)]), ts)
    return float(np.max(np.abs(det - np.exp(tr)) / np.exp(tr)))

"""Bounded solutions of the inhomogeneous variational equation and the reduced bifurcation function.

``L z = z' - A(t) z`` with ``A(t) = Df(gamma(t))``.  ``green_solve`` is a right
inverse of ``L`` on forcings with zero Melnikov residual, ``project_p`` is the
rank-one projection onto the obstruction, and ``bifurcation_B`` is the scalar
left after solving the complementary equation by fixed-point iteration.
"""
from __future__ import annotations

import csv
import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.integrate import simpson, solve_ivp
from scipy.interpolate import CubicSpline
from scipy.optimize import brentq, minimize_scalar

from .homoclinic import HomoclinicOrbit
from .planar import PlanarSystem, wedge
from .quadrature import DecayingIntegrand1D, QuadResult, cumulative_integral, integrate_line
from .variational import VariationalFrame

__all__ = [
    "BifurcationScan",
    "ForcingFunction",
    "GreenError",
    "GreenSolution",
    "LSState",
    "NonContractionError",
    "VerifyRecord",
    "apply_L",
    "bifurcation_B",
    "direct_verify",
    "green_solve",
    "growth_rate",
    "melnikov_residual",
    "project_p",
    "remainder",
    "scan_roots",
    "solve_eta",
    "thread_cap",
]

_LAG_X, _LAG_W = np.polynomial.laguerre.laggauss(48)


class GreenError(RuntimeError):
    pass


class NonContractionError(RuntimeError):
    pass


def thread_cap(default: int = 1) -> int:
    raw = os.environ.get("HOMOCLINIC_GATE_THREADS")
    if raw is None:
        return default
    try:
        n = int(raw)
    except ValueError:
        raise ValueError(f"HOMOCLINIC_GATE_THREADS must be an integer, got {raw!r}") from None
    return max(1, n)


@dataclass(frozen=True)
class ForcingFunction:
    """Bounded forcing ``F(t)``; ``decay_rate`` is ``None`` when ``F`` need not decay."""

    evaluate: Callable[[np.ndarray], np.ndarray]
    decay_rate: float | None = None
    label: str = ""

    def __call__(self, t):
        return np.asarray(self.evaluate(np.asarray(t, dtype=float)), dtype=float)

    def __add__(self, other: "ForcingFunction") -> "ForcingFunction":
        rates = [r for r in (self.decay_rate, other.decay_rate)]
        rate = None if None in rates else min(rates)
        return ForcingFunction(lambda t: self(t) + other(t), rate, f"{self.label}+{other.label}")

    def scaled(self, c: float) -> "ForcingFunction":
        return ForcingFunction(lambda t: c * self(t), self.decay_rate, f"{c:g}*{self.label}")

    def sup_norm(self, t) -> float:
        return float(np.max(np.linalg.norm(self(t), axis=-1)))


def _pairing_line(frame: VariationalFrame, integrand, tol: float, rate_extra: float = 0.0) -> QuadResult:
    rate = frame.omega + rate_extra
    return integrate_line(DecayingIntegrand1D(integrand, rate, min(8.0 / frame.omega, frame.T)), tol)


def melnikov_residual(frame: VariationalFrame, F: ForcingFunction, tol: float = 1e-10) -> QuadResult:
    """``int (1/Delta) f(gamma) ^ F`` over the line."""
    def integrand(s):
        return wedge(frame.gamma_prime(s), F(s)) / frame.delta(s)

    return _pairing_line(frame, integrand, tol, F.decay_rate or 0.0)


def _gamma_prime_sq(frame: VariationalFrame) -> float:
    res = _pairing_line(frame, lambda s: np.sum(frame.gamma_prime(s) ** 2, axis=-1), 1e-13, frame.omega)
    return float(res.value)


def J(frame: VariationalFrame, t):
    gp = frame.gamma_prime(t)
    return np.stack([-gp[..., 1], gp[..., 0]], axis=-1) / frame.delta(t)[..., None]


def project_p(frame: VariationalFrame, F: ForcingFunction, tol: float = 1e-10) -> ForcingFunction:
    """``(pF)(t) = (Delta^2 / ||gamma'||^2) J(t) int J.F``; note ``int J.F`` is the Melnikov residual."""
    m = melnikov_residual(frame, F, tol).value
    scale = m / _gamma_prime_sq(frame)

    def evaluate(t):
        return scale * frame.delta(t)[..., None] ** 2 * J(frame, t)

    return ForcingFunction(evaluate, frame.omega, f"p({F.label})")


def complement(frame: VariationalFrame, F: ForcingFunction, tol: float = 1e-10) -> ForcingFunction:
    """``(I - p) F``."""
    pF = project_p(frame, F, tol)
    return ForcingFunction(lambda t: F(t) - pF(t), F.decay_rate, f"(I-p)({F.label})")


@dataclass(frozen=True)
class GreenSolution:
    grid: np.ndarray
    z: np.ndarray
    x2: float
    mode: str
    residual: float
    melnikov: float

    def __post_init__(self):
        object.__setattr__(self, "_spline", CubicSpline(self.grid, self.z, axis=0))

    def __call__(self, t):
        return self._spline(np.clip(t, self.grid[0], self.grid[-1]))

    def derivative(self, t):
        return self._spline(np.clip(t, self.grid[0], self.grid[-1]), 1)

    def sup_norm(self, t_max: float | None = None) -> float:
        keep = slice(None) if t_max is None else np.abs(self.grid) <= t_max
        return float(np.max(np.linalg.norm(self.z[keep], axis=-1)))


def _laguerre_tail(frame, F, side: int) -> float:
    """``int`` of ``gamma'/Delta ^ F`` beyond the window edge on ``side`` (+1 right, -1 left).

    Past the edge ``gamma'`` is continued as ``gamma'(edge) exp(-omega |t - edge|)``.
    """
    T, om = frame.T, frame.omega
    edge = side * T
    gp = frame.gamma_prime(np.array(edge))
    dl = float(frame.delta(np.array(edge)))
    u = _LAG_X / om
    vals = wedge(gp, F(edge + side * u)) / dl
    return float(np.sum(_LAG_W * vals) / om)


def green_solve(frame: VariationalFrame, F: ForcingFunction, x2: float | None = None, *,
                mode: str = "bounded", check: bool = True, residual_tol: float = 1e-6) -> GreenSolution:
    """Solve ``z' = A z + F`` with the variation-of-constants formula in the frame.

    ``mode="bounded"`` takes the ``zeta`` coefficient as ``-int_t^inf`` for
    ``t > 0`` (equal to ``int_{-inf}^t`` when the Melnikov residual vanishes, but
    without the exponentially amplified cancellation).  ``mode="diagnostic"``
    uses ``int_{-inf}^t`` on the whole line and lets the growing mode show.
    ``x2=None`` picks the constant that makes ``z`` L2-orthogonal to ``gamma'``.
    """
    if mode not in ("bounded", "diagnostic"):
        raise ValueError("mode must be 'bounded' or 'diagnostic'")
    grid = frame.grid
    mid = grid.size // 2
    gp = frame.gamma_prime(grid)
    zeta = frame.zeta_samples

    def a_int(s):
        return wedge(frame.zeta(s), F(s)) / frame.delta(s)

    def b_int(s):
        return wedge(frame.gamma_prime(s), F(s)) / frame.delta(s)

    a = cumulative_integral(a_int, grid, origin=0.0)
    left_tail = _laguerre_tail(frame, F, -1)
    b = left_tail + cumulative_integral(b_int, grid)
    total = float(b[-1] + _laguerre_tail(frame, F, +1))
    if mode == "bounded":
        right = cumulative_integral(b_int, grid, origin=grid[-1]) - _laguerre_tail(frame, F, +1)
        b = np.where(grid > 0, right, b)
        b[mid] = 0.5 * (b[mid] + right[mid])
    z0 = -gp * a[:, None] + zeta * b[:, None]
    if x2 is None:
        x2 = -simpson(np.sum(z0 * gp, axis=1), x=grid) / simpson(np.sum(gp * gp, axis=1), x=grid)
    z = gp * x2 + z0
    residual = float("nan")
    if check:
        residual = _ode_residual(frame, grid, z, F)
        if mode == "bounded" and residual > residual_tol * max(1.0, float(np.max(np.abs(z)))):
            raise GreenError(f"green_solve residual {residual:.3g} exceeds {residual_tol:g}")
    return GreenSolution(grid, z, float(x2), mode, residual, total)


_FD6 = np.array([-1, 9, -45, 0, 45, -9, 1]) / 60.0


def _ode_residual(frame, grid, z, F) -> float:
    """Sup of ``|z' - A z - F|`` on the interior grid."""
    t, Lz = apply_L(frame, GreenSolution(grid, z, 0.0, "", 0.0, 0.0))
    return float(np.max(np.abs(Lz - F(t))))


def apply_L(frame: VariationalFrame, sol: GreenSolution):
    """``(L z)(t) = z'(t) - A(t) z(t)`` on the interior grid, sixth-order differences.

    Returns ``(t, Lz)``.
    """
    h = sol.grid[1] - sol.grid[0]
    dz = sum(c * sol.z[k:sol.z.shape[0] - 6 + k] for k, c in enumerate(_FD6)) / h
    t = sol.grid[3:-3]
    return t, dz - np.einsum("nij,nj->ni", frame.A(t), sol.z[3:-3])


def growth_rate(sol: GreenSolution, omega: float | None = None, fraction: float = 0.5) -> float:
    """Fitted exponential rate of ``|z(t)|`` over the outer ``fraction`` of ``t > 0``."""
    T = sol.grid[-1]
    keep = sol.grid >= (1 - fraction) * T
    norm = np.linalg.norm(sol.z[keep], axis=-1)
    return float(np.polyfit(sol.grid[keep], np.log(norm), 1)[0])


# Lyapunov-Schmidt reduction ---------------------------------------------------------

def remainder(frame: VariationalFrame, z_fn, alpha: float, beta: float, epsilon: float) -> ForcingFunction:
    """``F(t) = f(alpha gamma + z) - alpha f(gamma) - A z + eps g(alpha gamma + z, t - beta)``."""
    sys = frame.system

    def evaluate(t):
        gam = frame.gamma(t)
        z = z_fn(t)
        x = alpha * gam + z
        out = sys.f(x) - alpha * sys.f(gam) - np.einsum("...ij,...j->...i", sys.jacobian(gam), z)
        if epsilon != 0.0:
            out = out + epsilon * sys.g(x, np.asarray(t) - beta)
        return out

    return ForcingFunction(evaluate, None, "remainder")


@dataclass(frozen=True)
class LSState:
    xi: float
    alpha: float
    beta: float
    epsilon: float
    eta: GreenSolution | None
    iterations: int
    contraction: float
    orthogonality: float
    history: tuple = ()

    def eta_fn(self, t):
        t = np.asarray(t, dtype=float)
        if self.eta is None:
            return np.zeros(t.shape + (2,))
        return self.eta(t)

    def eta_sup(self) -> float:
        return 0.0 if self.eta is None else self.eta.sup_norm()


def _z_of(frame, xi, eta_fn):
    def z(t):
        return xi * frame.gamma_prime(t) + eta_fn(t)

    return z


def solve_eta(frame: VariationalFrame, system: PlanarSystem | None = None, xi: float = 0.0,
              alpha: float = 1.0, beta: float = 0.0, epsilon: float = 0.0, tol: float = 1e-11,
              max_iter: int = 100) -> LSState:
    """Fixed point ``eta = k (I - p) F(., xi gamma' + eta, alpha, beta, eps)``."""
    if system is not None and system is not frame.system:
        raise ValueError("system must be the frame's system")
    grid = frame.grid
    gp = frame.gamma_prime(grid)
    gp_sq = simpson(np.sum(gp * gp, axis=1), x=grid)
    eta: GreenSolution | None = None
    history = []
    bad = 0
    prev = None
    for it in range(1, max_iter + 1):
        eta_fn = (lambda t: np.zeros(np.shape(t) + (2,))) if eta is None else eta
        F = remainder(frame, _z_of(frame, xi, eta_fn), alpha, beta, epsilon)
        new = green_solve(frame, complement(frame, F), check=False)
        old = np.zeros_like(new.z) if eta is None else eta.z
        step = float(np.max(np.abs(new.z - old)))
        history.append(step)
        eta = new
        if step <= tol:
            break
        if prev is not None and prev > 0:
            bad = bad + 1 if step / prev >= 1.0 else 0
            if bad >= 3:
                raise NonContractionError(f"fixed-point map is not contracting (steps {history[-4:]})")
        prev = step
    else:
        raise NonContractionError(f"no convergence in {max_iter} iterations (last step {history[-1]:.3g})")
    ratios = [b / a for a, b in zip(history[:-1], history[1:]) if a > 0]
    ortho = float(simpson(np.sum(eta.z * gp, axis=1), x=grid) / np.sqrt(gp_sq))
    if not np.any(eta.z):
        eta = None
    return LSState(xi, alpha, beta, epsilon, eta, len(history), max(ratios, default=0.0), ortho, tuple(history))


def bifurcation_B(frame: VariationalFrame, system: PlanarSystem | None = None, xi: float = 0.0,
                  alpha: float = 1.0, beta: float = 0.0, epsilon: float = 0.0, *,
                  state: LSState | None = None, tol: float = 1e-11) -> float:
    """``B = int J . F(., xi gamma' + eta, alpha, beta, eps)``."""
    if state is None:
        state = solve_eta(frame, system, xi, alpha, beta, epsilon, tol)
    F = remainder(frame, _z_of(frame, xi, state.eta_fn), alpha, beta, epsilon)
    return float(melnikov_residual(frame, F, 1e-12).value)


def reconstruct(frame: VariationalFrame, state: LSState):
    """``x(t) = alpha gamma(t) + xi gamma'(t) + eta(t)``; solves the ODE with forcing at ``t - beta``."""
    def x(t):
        return state.alpha * frame.gamma(t) + _z_of(frame, state.xi, state.eta_fn)(t)

    return x


def ode_residual(system: PlanarSystem, x_fn, t, epsilon: float, beta: float = 0.0, h: float = 1e-3) -> float:
    t = np.asarray(t, dtype=float)
    dx = sum(c * x_fn(t + (k - 3) * h) for k, c in enumerate(_FD6)) / h
    return float(np.max(np.abs(dx - system.f(x_fn(t)) - epsilon * system.g(x_fn(t), t - beta))))


# root scanning -----------------------------------------------------------------------

_VARS = ("xi", "alpha", "beta")


@dataclass
class BifurcationScan:
    variable: str
    values: np.ndarray
    fixed: dict
    samples: dict = field(default_factory=dict)
    failures: dict = field(default_factory=dict)
    roots: dict = field(default_factory=dict)
    counts: dict = field(default_factory=dict)
    classification: str = "none"

    def to_dict(self) -> dict:
        return {
            "slice": {"variable": self.variable, "values": self.values.tolist(), "fixed": self.fixed},
            "samples": {repr(e): v.tolist() for e, v in self.samples.items()},
            "failures": {repr(e): v for e, v in self.failures.items()},
            "roots": {repr(e): v for e, v in self.roots.items()},
            "counts": {repr(k): v for k, v in self.counts.items()},
            "classification": self.classification,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)

    def to_csv(self, path) -> None:
        eps = sorted(self.samples)
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow([self.variable] + [f"B(eps={e!r})" for e in eps])
            for i, v in enumerate(self.values):
                w.writerow([repr(float(v))] + [repr(float(self.samples[e][i])) for e in eps])


def _classify_counts(n_plus: int, n_minus: int) -> str:
    if {n_plus, n_minus} == {2, 0}:
        return "sign-dependent pair"
    if n_plus == n_minus == 2:
        return "sign-independent pair"
    if n_plus == n_minus == 1:
        return "single persistent"
    return "other"


def scan_roots(B: Callable[..., float], variable: str, values, epsilon_list, *, fixed: dict | None = None,
               zero_tol: float = 1e-12, xtol: float = 1e-10, workers: int | None = None) -> BifurcationScan:
    """Sample ``B(xi=, alpha=, beta=, epsilon=)`` along one variable for every ``+-eps``.

    Roots are sign changes refined by ``brentq`` to ``xtol``, plus samples with
    ``|B| <= zero_tol``.  A sample that raises is recorded as a failure (NaN).
    A slice where ``B`` is within ``zero_tol`` of zero everywhere for both
    signs of ``eps`` is tagged "degenerate".
    """
    if variable not in _VARS:
        raise ValueError(f"variable must be one of {_VARS}")
    base = {"xi": 0.0, "alpha": 1.0, "beta": 0.0}
    base.update(fixed or {})
    base.pop(variable, None)
    values = np.asarray(values, dtype=float)
    eps_all = []
    for e in epsilon_list:
        for s in ((abs(e), -abs(e)) if e != 0 else (0.0,)):
            if s not in eps_all:
                eps_all.append(float(s))
    scan = BifurcationScan(variable, values, dict(base))

    def call(v, eps):
        try:
            return float(B(**{variable: float(v)}, **base, epsilon=eps)), None
        except Exception as exc:  # noqa: BLE001 - surfaced per point
            return float("nan"), f"{type(exc).__name__}: {exc}"

    jobs = [(v, e) for e in eps_all for v in values]
    with ThreadPoolExecutor(max_workers=workers or thread_cap()) as pool:
        out = list(pool.map(lambda ve: call(*ve), jobs))
    for k, e in enumerate(eps_all):
        chunk = out[k * values.size:(k + 1) * values.size]
        vals = np.array([c[0] for c in chunk])
        scan.samples[e] = vals
        scan.failures[e] = [(float(values[i]), c[1]) for i, c in enumerate(chunk) if c[1] is not None]
        roots = [float(values[i]) for i in np.flatnonzero(np.abs(vals) <= zero_tol)]
        for i in range(values.size - 1):
            a, b = vals[i], vals[i + 1]
            if np.isfinite(a) and np.isfinite(b) and abs(a) > zero_tol and abs(b) > zero_tol and a * b < 0:
                roots.append(float(brentq(lambda v: call(v, e)[0], values[i], values[i + 1], xtol=xtol)))
        scan.roots[e] = sorted(roots)
    tags = set()
    for e in eps_all:
        if e > 0:
            n_plus, n_minus = len(scan.roots[e]), len(scan.roots.get(-e, []))
            scan.counts[e] = {"eps>0": n_plus, "eps<0": n_minus}
            flat = all(np.all(np.abs(scan.samples[x]) <= zero_tol) for x in (e, -e) if x in scan.samples)
            tags.add("degenerate" if flat else _classify_counts(n_plus, n_minus))
    if len(tags) == 1:
        scan.classification = tags.pop()
    elif tags:
        scan.classification = "mixed"
    return scan


# direct boundary-value verification --------------------------------------------------

@dataclass
class VerifyRecord:
    epsilon: float
    found: bool
    distance: float
    phase: float
    iterations: int
    residual: float
    message: str = ""
    t: np.ndarray | None = None
    x: np.ndarray | None = None

    def to_dict(self) -> dict:
        return {"epsilon": self.epsilon, "found": self.found, "distance": self.distance,
                "phase": self.phase, "iterations": self.iterations, "residual": self.residual,
                "message": self.message}

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["t", "x", "y"])
            for ti, (a, b) in zip(self.t, self.x):
                w.writerow([repr(float(ti)), repr(float(a)), repr(float(b))])


def _flow_with_jac(system, epsilon, beta, t0, t1, x0, rtol):
    def rhs(t, u):
        x = u[:2]
        M = u[2:].reshape(2, 2)
        A = system.jacobian(x)
        fx = system.f(x)
        if epsilon:
            fx = fx + epsilon * system.g(x, t - beta)
            A = A + epsilon * system.grad_g(x, t - beta)
        return np.concatenate([fx, (A @ M).ravel()])

    sol = solve_ivp(rhs, (t0, t1), np.concatenate([x0, np.eye(2).ravel()]), method="DOP853",
                    rtol=rtol, atol=rtol * 1e-2, dense_output=True)
    if not sol.success:
        raise FloatingPointError(sol.message)
    end = sol.y[:, -1]
    return end[:2], end[2:].reshape(2, 2), sol.sol


def _shoot(system, epsilon, beta, tk, X, saddle, *, tol, max_iter, rtol, min_damping):
    """Damped Gauss-Newton on the stacked matching/boundary residual.

    Returns ``(X, flows, norm, iterations, message)``; ``message`` is empty on success.
    """
    eq, vu, vs = saddle.equilibrium, saddle.unstable_dir, saddle.stable_dir
    n = tk.size - 1

    def residual_and_jac(X):
        R = np.zeros(2 * n)
        Jm = np.zeros((2 * n, 2 * n))
        flows = []
        R[0] = wedge(X[0] - eq, vu)
        Jm[0, 0:2] = [vu[1], -vu[0]]
        for k in range(n):
            end, M, dense = _flow_with_jac(system, epsilon, beta, tk[k], tk[k + 1], X[k], rtol)
            flows.append(dense)
            if k < n - 1:
                rows = slice(1 + 2 * k, 3 + 2 * k)
                R[rows] = end - X[k + 1]
                Jm[rows, 2 * k:2 * k + 2] = M
                Jm[rows, 2 * k + 2:2 * k + 4] = -np.eye(2)
            else:
                R[-1] = wedge(end - eq, vs)
                Jm[-1, 2 * k:2 * k + 2] = np.array([vs[1], -vs[0]]) @ M
        return R, Jm, flows

    it = 0
    norm = np.inf
    try:
        R, Jm, flows = residual_and_jac(X)
        norm = float(np.max(np.abs(R)))
        history = [norm]
        while it < max_iter and norm > tol:
            if it >= 6 and norm > 0.5 * history[-7]:
                return X, None, norm, it, "Newton divergence: residual stagnates"
            it += 1
            step = np.linalg.lstsq(Jm, -R, rcond=None)[0].reshape(n, 2)
            lam = 1.0
            while lam >= min_damping:
                trial = X + lam * step
                try:
                    R2, J2, f2 = residual_and_jac(trial)
                    n2 = float(np.max(np.abs(R2)))
                except FloatingPointError:
                    n2 = np.inf
                if n2 < norm * (1 - 0.25 * lam) or n2 <= tol:
                    break
                lam *= 0.5
            else:
                return X, None, norm, it, "Newton divergence: damping failed to reduce the residual"
            X, R, Jm, flows, norm = trial, R2, J2, f2, n2
            history.append(norm)
    except FloatingPointError as exc:
        return X, None, norm, it, f"Newton divergence: {exc}"
    if norm > tol:
        return X, flows, norm, it, f"residual {norm:.3g} above tolerance after {it} iterations"
    return X, flows, norm, it, ""


def direct_verify(system: PlanarSystem, orbit: HomoclinicOrbit, epsilon: float, window_T: float = 20.0, *,
                  nodes: int = 16, beta: float = 0.0, tol: float = 1e-10, max_iter: int = 40,
                  rtol: float = 1e-11, sample_step: float = 0.01, min_damping: float = 1.0 / 64,
                  continuation: int = 4) -> VerifyRecord:
    """Multiple shooting for ``x' = f(x) + eps g(x, t - beta)`` on ``[-T, T]`` seeded on ``gamma``.

    Boundary rows pin ``x(-T) - eq`` to the unstable eigenline and ``x(T) - eq``
    to the stable one.  If Newton fails from the ``gamma`` seed, ``eps`` is
    ramped up from ``eps / 2**continuation`` reusing each solution as the next
    seed.  Distance is ``min_phi sup_t |x(t) - gamma(t - phi)|``.
    """
    T = float(window_T)
    if T < orbit.decay_window:
        raise ValueError(f"window {T} shorter than the orbit decay window {orbit.decay_window:.3g}")
    tk = np.linspace(-T, T, nodes + 1)
    n = nodes
    opts = dict(tol=tol, max_iter=max_iter, rtol=rtol, min_damping=min_damping)
    seed = orbit.gamma(tk[:-1]).copy()
    X, flows, norm, it, message = _shoot(system, epsilon, beta, tk, seed, orbit.saddle, **opts)
    if message and epsilon != 0 and continuation > 0:
        X = seed
        for k in range(continuation, -1, -1):
            X, flows, norm, steps, message = _shoot(system, epsilon / 2**k, beta, tk, X, orbit.saddle, **opts)
            it += steps
            if message:
                break
    found = not message
    if flows is None or not found:
        return VerifyRecord(float(epsilon), False, float("nan"), float("nan"), it, float(norm), message)

    t = np.linspace(-T, T, int(round(2 * T / sample_step)) + 1)
    seg = np.clip(np.searchsorted(tk, t, side="right") - 1, 0, n - 1)
    x = np.empty((t.size, 2))
    for k in range(n):
        mask = seg == k
        if mask.any():
            x[mask] = flows[k](t[mask])[:2].T

    def dist(phi):
        return float(np.max(np.linalg.norm(x - orbit.gamma(t - phi), axis=-1)))

    opt = minimize_scalar(dist, bounds=(-1.0, 1.0), method="bounded", options={"xatol": 1e-10})
    phi, d = float(opt.x), float(opt.fun)
    if dist(0.0) < d:
        phi, d = 0.0, dist(0.0)
    return VerifyRecord(float(epsilon), found, d, phi, it, norm, message, t, x)


def loglog_slope(eps, dist) -> float:
    eps, dist = np.asarray(eps, dtype=float), np.asarray(dist, dtype=float)
    return float(np.polyfit(np.log(np.abs(eps)), np.log(dist), 1)[0])

"""Built-in planar systems and forcing presets."""
from __future__ import annotations

from dataclasses import replace

import numpy as np

from .planar import PlanarSystem, finite_diff_jacobian

__all__ = [
    "FORCINGS",
    "damped_powerlaw",
    "forcing",
    "linear_saddle",
    "linearly_transformed",
    "powerlaw",
    "speed_modulated",
    "with_finite_differences",
]


def powerlaw(nu: float = 1.0, mu: float = 1.0, p: int = 2, forcing_name: str = "none", **forcing_kw) -> PlanarSystem:
    """Power-law oscillator ``x' = y, y' = nu*x - mu*x**(p+1)`` plus a forcing preset."""
    if not (nu > 0 and mu > 0):
        raise ValueError("nu and mu must be positive")
    if int(p) != p or p < 2:
        raise ValueError("p must be an integer >= 2")
    p = int(p)

    def f(x):
        x = np.asarray(x, dtype=float)
        u, v = x[..., 0], x[..., 1]
        return np.stack([v, nu * u - mu * u ** (p + 1)], axis=-1)

    def jac(x):
        x = np.asarray(x, dtype=float)
        u = x[..., 0]
        out = np.zeros(u.shape + (2, 2))
        out[..., 0, 1] = 1.0
        out[..., 1, 0] = nu - mu * (p + 1) * u**p
        return out

    def hess(x):
        x = np.asarray(x, dtype=float)
        u = x[..., 0]
        out = np.zeros(u.shape + (2, 2, 2))
        out[..., 1, 0, 0] = -mu * (p + 1) * p * u ** (p - 1)
        return out

    sys = PlanarSystem(f, jac, hess, hamiltonian=True, name="powerlaw",
                       params={"nu": nu, "mu": mu, "p": p})
    g, dg = forcing(forcing_name, **forcing_kw)
    return sys.with_forcing(g, dg, label=forcing_name)


def forcing(name: str, c: float = 1.0):
    """Return ``(g, grad_g)`` for a named forcing acting on the second equation.

    ``A1``: ``(0, y (2 + cos t))``; ``const``: ``(0, c)``; ``sin``/``cos``: ``(0, c sin t)``/``(0, c cos t)``;
    ``none``: zero.
    """
    if name not in FORCINGS:
        raise ValueError(f"unknown forcing {name!r}; choose from {sorted(FORCINGS)}")
    return FORCINGS[name](c)


def _a1(c):
    def g(x, t):
        x = np.asarray(x, dtype=float)
        y = x[..., 1] * (2.0 + np.cos(t))
        return np.stack(np.broadcast_arrays(np.zeros_like(y), y), axis=-1)

    def dg(x, t):
        x = np.asarray(x, dtype=float)
        w = np.broadcast_to(2.0 + np.cos(t), np.broadcast_shapes(x.shape[:-1], np.shape(t)))
        out = np.zeros(w.shape + (2, 2))
        out[..., 1, 1] = w
        return out

    return g, dg


def _time_only(c, profile):
    def g(x, t):
        shape = np.broadcast_shapes(np.shape(x)[:-1], np.shape(t))
        out = np.zeros(shape + (2,))
        out[..., 1] = c * profile(np.broadcast_to(t, shape))
        return out

    def dg(x, t):
        shape = np.broadcast_shapes(np.shape(x)[:-1], np.shape(t))
        return np.zeros(shape + (2, 2))

    return g, dg


FORCINGS = {
    "A1": _a1,
    "const": lambda c: _time_only(c, np.ones_like),
    "sin": lambda c: _time_only(c, np.sin),
    "cos": lambda c: _time_only(c, np.cos),
    "none": lambda c: _time_only(0.0, np.zeros_like),
}


def speed_modulated(base: PlanarSystem, a: float = 0.0, b: float = 0.3) -> PlanarSystem:
    """Multiply ``f`` by the speed factor ``s(x) = 1 + a x1 + b x2``.

    Orbits (and hence the homoclinic loop) are unchanged where ``s > 0`` but
    the divergence becomes ``grad s . f``, so the result is non-Hamiltonian.
    """
    grad_s = np.array([a, b], dtype=float)

    def s(x):
        return 1.0 + np.asarray(x, dtype=float) @ grad_s

    def f(x):
        return s(x)[..., None] * base.f(x)

    def jac(x):
        return s(x)[..., None, None] * base.jacobian(x) + base.f(x)[..., :, None] * grad_s

    def hess(x):
        dfx = base.jacobian(x)
        cross = dfx[..., :, :, None] * grad_s + grad_s[:, None] * dfx[..., :, None, :]
        return s(x)[..., None, None, None] * base.hessians(x) + cross

    params = dict(base.params, speed=(a, b))
    return replace(base, f=f, jacobian=jac, hessians=hess, hamiltonian=False,
                   name=f"{base.name}-modulated", params=params)


def linearly_transformed(base: PlanarSystem, M) -> PlanarSystem:
    """Conjugate by the linear map ``u = M x``: ``f^(u) = M f(M^-1 u)``, same for ``g``."""
    M = np.asarray(M, dtype=float)
    N = np.linalg.inv(M)

    def back(u):
        return np.asarray(u, dtype=float) @ N.T

    def f(u):
        return base.f(back(u)) @ M.T

    def jac(u):
        return M @ base.jacobian(back(u)) @ N

    def hess(u):
        h = base.hessians(back(u))
        h = np.einsum("ai,...mab,bj->...mij", N, h, N)
        return np.einsum("km,...mij->...kij", M, h)

    def g(u, t):
        return base.g(back(u), t) @ M.T

    def dg(u, t):
        return M @ base.grad_g(back(u), t) @ N

    params = dict(base.params, transform=M.tolist())
    return replace(base, f=f, jacobian=jac, hessians=hess, g=g, grad_g=dg,
                   hamiltonian=base.hamiltonian and bool(np.isclose(abs(np.linalg.det(M)), 1.0)),
                   name=f"{base.name}-transformed", params=params)


def damped_powerlaw(nu: float = 1.0, mu: float = 1.0, p: int = 2, delta: float = 0.1,
                    forcing_name: str = "none", **forcing_kw) -> PlanarSystem:
    """Power-law oscillator with ``-delta*y`` folded into ``f``.

    The damped field has no homoclinic loop for ``delta != 0``; it is only
    meaningful together with a user-supplied reference orbit.
    """
    base = powerlaw(nu, mu, p, forcing_name, **forcing_kw)

    def f(x):
        out = base.f(x)
        out[..., 1] -= delta * np.asarray(x, dtype=float)[..., 1]
        return out

    def jac(x):
        out = base.jacobian(x)
        out[..., 1, 1] -= delta
        return out

    return replace(base, f=f, jacobian=jac, hamiltonian=False, name="powerlaw-damped",
                   params=dict(base.params, delta=delta, experimental=True))


def linear_saddle(lam: float = 1.0) -> PlanarSystem:
    """``x' = y, y' = lam^2 x``: a saddle without any homoclinic loop."""

    def f(x):
        x = np.asarray(x, dtype=float)
        return np.stack([x[..., 1], lam**2 * x[..., 0]], axis=-1)

    def jac(x):
        x = np.asarray(x, dtype=float)
        return np.broadcast_to(np.array([[0.0, 1.0], [lam**2, 0.0]]), x.shape[:-1] + (2, 2)).copy()

    def hess(x):
        return np.zeros(np.asarray(x).shape[:-1] + (2, 2, 2))

    return PlanarSystem(f, jac, hess, hamiltonian=True, name="linear-saddle", params={"lam": lam})


def with_finite_differences(base: PlanarSystem, h: float | None = None) -> PlanarSystem:
    """Replace the analytic Jacobian by central differences (cross-check only)."""

    def jac(x):
        x = np.asarray(x, dtype=float)
        flat = x.reshape(-1, 2)
        out = np.stack([finite_diff_jacobian(base.f, pt, h) for pt in flat])
        return out.reshape(x.shape[:-1] + (2, 2))

    return replace(base, jacobian=jac, derivative_mode="finite-difference")

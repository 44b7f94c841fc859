"""Planar vector fields, perturbations and the wedge product.

All field callables are vectorised over leading axes: a point array of shape
``(..., 2)`` maps to ``(..., 2)`` for ``f``/``g``, ``(..., 2, 2)`` for the
Jacobians and ``(..., 2, 2, 2)`` (indexed ``[k, i, j]``) for the Hessians of
the two components of ``f``.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

__all__ = [
    "EpsilonBeta",
    "PlanarSystem",
    "as_vec2",
    "finite_diff_jacobian",
    "wedge",
]

Field = Callable[[np.ndarray], np.ndarray]
TimeField = Callable[[np.ndarray, np.ndarray], np.ndarray]


def as_vec2(u) -> np.ndarray:
    """Coerce ``u`` to a float array with trailing axis 2, rejecting NaN/Inf."""
    arr = np.asarray(u, dtype=float)
    if arr.shape[-1:] != (2,):
        raise ValueError(f"expected trailing dimension 2, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("non-finite component in planar vector")
    return arr


def wedge(u, v):
    """Planar wedge product ``u ∧ v = u1*v2 - u2*v1`` (broadcasting)."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    return u[..., 0] * v[..., 1] - u[..., 1] * v[..., 0]


def finite_diff_jacobian(f: Field, x, h: float | None = None) -> np.ndarray:
    """Central-difference Jacobian of ``f`` at the single point ``x``.

    The default step is ``eps**(1/3) * (1 + |x|)``.
    """
    x = as_vec2(x)
    scale = 1.0 + float(np.max(np.abs(x)))
    if h is None:
        h = np.cbrt(np.finfo(float).eps) * scale
    if not h > 0:
        raise ValueError("finite-difference step must be positive")
    if h < 10 * np.finfo(float).eps * scale:
        raise ValueError(f"finite-difference step {h:g} underflows at |x|~{scale:g}")
    jac = np.empty((2, 2))
    for j in range(2):
        e = np.zeros(2)
        e[j] = h
        jac[:, j] = (np.asarray(f(x + e)) - np.asarray(f(x - e))) / (2 * h)
    return jac


def _zero_g(x, t):
    return np.zeros(np.broadcast_shapes(np.shape(x), np.shape(t) + (2,)))


def _zero_grad_g(x, t):
    shape = np.broadcast_shapes(np.shape(x)[:-1], np.shape(t))
    return np.zeros(shape + (2, 2))


@dataclass(frozen=True)
class PlanarSystem:
    """``x' = f(x) + eps * g(x, t)`` in the plane, with derivatives of ``f`` and ``g``."""

    f: Field
    jacobian: Field
    hessians: Field
    g: TimeField = _zero_g
    grad_g: TimeField = _zero_grad_g
    hamiltonian: bool = False
    derivative_mode: str = "analytic"
    name: str = "custom"
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.derivative_mode not in ("analytic", "finite-difference"):
            raise ValueError(f"unknown derivative_mode {self.derivative_mode!r}")

    def rhs(self, t, x, epsilon=0.0):
        """Full perturbed right-hand side at time ``t``."""
        out = self.f(x)
        if epsilon:
            out = out + epsilon * self.g(x, t)
        return out

    def with_forcing(self, g: TimeField, grad_g: TimeField, label: str | None = None) -> "PlanarSystem":
        params = dict(self.params)
        if label is not None:
            params["forcing"] = label
        return replace(self, g=g, grad_g=grad_g, params=params)

    def check_derivatives(self, points, rtol: float = 1e-5) -> float:
        """Largest relative mismatch between ``jacobian`` and central differences of ``f``."""
        worst = 0.0
        for x in np.atleast_2d(points):
            fd = finite_diff_jacobian(self.f, x)
            an = np.asarray(self.jacobian(x))
            worst = max(worst, float(np.max(np.abs(fd - an)) / (1.0 + np.max(np.abs(an)))))
        if worst > rtol:
            raise ValueError(f"analytic Jacobian disagrees with finite differences ({worst:.2e})")
        return worst

    def check_hamiltonian(self, points, atol: float = 1e-10) -> float:
        tr = np.trace(self.jacobian(np.atleast_2d(points)), axis1=-2, axis2=-1)
        worst = float(np.max(np.abs(tr)))
        if self.hamiltonian and worst >= atol:
            raise ValueError(f"hamiltonian flag set but |trace Df| reaches {worst:.2e}")
        return worst


@dataclass(frozen=True)
class EpsilonBeta:
    """Perturbation size, phase shift and amplitude of the shifted-orbit ansatz."""

    epsilon: float = 0.0
    beta: float = 0.0
    alpha: float = 1.0

    def __post_init__(self):
        if not all(np.isfinite([self.epsilon, self.beta, self.alpha])):
            raise ValueError("epsilon, beta and alpha must be finite")
        if abs(self.epsilon) > 0.5:
            raise ValueError(f"|epsilon| = {abs(self.epsilon)} exceeds 0.5")
        if not 0.5 <= self.alpha <= 1.5:
            raise ValueError(f"alpha = {self.alpha} outside [0.5, 1.5]")

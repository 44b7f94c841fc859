"""Persistence of bounded solutions near planar homoclinic orbits.

Typical use::

    from homoclinic_gate import powerlaw, powerlaw_homoclinic, build_frame, evaluate_conditions

    sys = powerlaw(1.0, 1.0, 2, "A1")
    frame = build_frame(sys, powerlaw_homoclinic(1.0, 1.0, 2), T=20)
    print(evaluate_conditions(frame).table())
"""
from .bifurcation import (
    BifurcationScan,
    ForcingFunction,
    LSState,
    bifurcation_B,
    direct_verify,
    green_solve,
    melnikov_residual,
    project_p,
    scan_roots,
    solve_eta,
)
from .conditions import ConditionReport, compute_kappas, evaluate_conditions
from .homoclinic import (
    HomoclinicOrbit,
    SaddleData,
    find_equilibrium,
    powerlaw_homoclinic,
    saddle_data,
    shoot_homoclinic,
)
from .planar import PlanarSystem, wedge
from .quadrature import DecayError, DecayingIntegrand1D, QuadResult, integrate_line, integrate_plane
from .systems import linearly_transformed, powerlaw, speed_modulated
from .variational import VariationalFrame, build_frame

__all__ = [
    "BifurcationScan",
    "ConditionReport",
    "DecayError",
    "DecayingIntegrand1D",
    "ForcingFunction",
    "HomoclinicOrbit",
    "LSState",
    "PlanarSystem",
    "QuadResult",
    "SaddleData",
    "VariationalFrame",
    "bifurcation_B",
    "build_frame",
    "compute_kappas",
    "direct_verify",
    "evaluate_conditions",
    "find_equilibrium",
    "green_solve",
    "integrate_line",
    "integrate_plane",
    "linearly_transformed",
    "melnikov_residual",
    "powerlaw",
    "powerlaw_homoclinic",
    "project_p",
    "saddle_data",
    "scan_roots",
    "shoot_homoclinic",
    "solve_eta",
    "speed_modulated",
    "wedge",
]
__version__ = "0.1.0"

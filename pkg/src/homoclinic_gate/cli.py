"""Command-line front end: ``homoclinic-gate {analyze,verify,scan,frame}``."""
from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import sys
from dataclasses import dataclass, field
from functools import partial
from pathlib import Path

import numpy as np

from . import systems
from .bifurcation import bifurcation_B, direct_verify, loglog_slope, scan_roots, thread_cap
from .conditions import cond_C6, evaluate_conditions, orbit_box
from .homoclinic import find_equilibrium, powerlaw_homoclinic, saddle_data, shoot_homoclinic
from .variational import build_frame, check_asymptotics

PRESETS = ("powerlaw", "powerlaw-damped", "powerlaw-modulated")


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    preset: str = "powerlaw"
    nu: float = 1.0
    mu: float = 1.0
    p: int = 2
    forcing: str = "A1"
    forcing_c: float = 1.0
    delta: float = 0.1
    speed: list = field(default_factory=lambda: [0.0, 0.3])
    window: float = 20.0
    verify_window: float = 20.0
    tol: float = 1e-10
    threshold: float = 1e-6
    beta: list = field(default_factory=lambda: [0.0])
    eps: list = field(default_factory=lambda: [1e-2, 1e-3, 1e-4])
    scan_variable: str = "beta"
    scan_range: list = field(default_factory=lambda: [-1.0, 1.0])
    scan_points: int = 21
    out: str = "out"
    seed: int = 0

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        if self.preset not in PRESETS:
            raise ConfigError(f"unknown preset {self.preset!r}; choose from {list(PRESETS)}")
        if self.forcing not in systems.FORCINGS:
            raise ConfigError(f"unknown forcing {self.forcing!r}; choose from {sorted(systems.FORCINGS)}")
        if not (self.nu > 0 and self.mu > 0):
            raise ConfigError("nu and mu must be positive")
        if int(self.p) != self.p or self.p < 2:
            raise ConfigError("p must be an integer >= 2")
        for name in ("window", "verify_window", "tol", "threshold"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be positive")
        if self.scan_variable not in ("xi", "alpha", "beta"):
            raise ConfigError("scan_variable must be xi, alpha or beta")
        if len(self.scan_range) != 2 or self.scan_points < 2:
            raise ConfigError("scan_range needs two values and scan_points >= 2")
        if len(self.speed) != 2:
            raise ConfigError("speed needs two coefficients (a, b)")
        self.beta = [float(b) for b in self.beta]
        self.eps = [float(e) for e in self.eps]

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigError(f"unknown config keys: {unknown}")
        return cls(**data)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


def build_system(cfg: RunConfig):
    kw = {"c": cfg.forcing_c}
    if cfg.preset == "powerlaw":
        return systems.powerlaw(cfg.nu, cfg.mu, cfg.p, cfg.forcing, **kw)
    if cfg.preset == "powerlaw-damped":
        return systems.damped_powerlaw(cfg.nu, cfg.mu, cfg.p, cfg.delta, cfg.forcing, **kw)
    return systems.speed_modulated(systems.powerlaw(cfg.nu, cfg.mu, cfg.p, cfg.forcing, **kw), *cfg.speed)


def build_orbit(cfg: RunConfig, system):
    """Closed form for the power-law presets; the damped preset reuses it as a reference orbit."""
    if cfg.preset == "powerlaw-modulated":
        eq = find_equilibrium(system, [0.0, 0.0])
        return shoot_homoclinic(system, saddle_data(system, eq))
    return powerlaw_homoclinic(cfg.nu, cfg.mu, cfg.p)


def _write_json(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, sort_keys=True, indent=2, ensure_ascii=False) + "\n", encoding="utf-8")


def _probe_times(seed: int, n: int = 4):
    rng = np.random.default_rng(seed)
    pairs = rng.uniform(0.0, 2 * np.pi, size=(n, 2))
    return [(0.0, np.pi)] + [(float(a), float(b)) for a, b in pairs if a != b]


def cmd_analyze(cfg: RunConfig, out: Path) -> dict:
    system = build_system(cfg)
    orbit = build_orbit(cfg, system)
    frame = build_frame(system, orbit, T=cfg.window)
    reports = []
    tables = []
    for beta in cfg.beta:
        rep = evaluate_conditions(frame, beta=beta, threshold=cfg.threshold, line_tol=cfg.tol,
                                  plane_tol=10 * cfg.tol)
        c6, witness = cond_C6(system, orbit_box(frame), times=_probe_times(cfg.seed))
        rep.conditions["C6"], rep.C6_witness = c6, witness
        if cfg.preset == "powerlaw-damped":
            rep.notes.append("experimental: reference orbit is the undamped homoclinic loop")
        reports.append(rep.to_dict())
        tables.append(f"beta = {beta!r}\n{rep.table()}")
    doc = {"command": "analyze", "config": cfg.to_dict(), "frame": _frame_summary(frame), "reports": reports}
    _write_json(out / "report.json", doc)
    (out / "report.txt").write_text("\n\n".join(tables) + "\n", encoding="utf-8")
    return doc


def cmd_verify(cfg: RunConfig, out: Path) -> dict:
    system = build_system(cfg)
    orbit = build_orbit(cfg, system)
    beta = cfg.beta[0]
    records = [direct_verify(system, orbit, e, cfg.verify_window, beta=beta) for e in cfg.eps]
    with open(out / "verify.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["epsilon", "distance", "converged"])
        for r in records:
            w.writerow([repr(r.epsilon), repr(r.distance), str(r.found).lower()])
    usable = [r for r in records if r.found and r.epsilon != 0 and r.distance > 0]
    slope = loglog_slope([r.epsilon for r in usable], [r.distance for r in usable]) if len(usable) >= 2 else None
    doc = {"command": "verify", "config": cfg.to_dict(), "records": [r.to_dict() for r in records],
           "loglog_slope": slope}
    _write_json(out / "verify.json", doc)
    return doc


def cmd_scan(cfg: RunConfig, out: Path) -> dict:
    system = build_system(cfg)
    orbit = build_orbit(cfg, system)
    frame = build_frame(system, orbit, T=cfg.window)
    values = np.linspace(cfg.scan_range[0], cfg.scan_range[1], cfg.scan_points)
    fixed = {} if cfg.scan_variable == "beta" else {"beta": cfg.beta[0]}
    scan = scan_roots(partial(bifurcation_B, frame, None), cfg.scan_variable, values, cfg.eps,
                      fixed=fixed, workers=thread_cap())
    scan.to_csv(out / "scan.csv")
    doc = {"command": "scan", "config": cfg.to_dict(), "scan": scan.to_dict()}
    _write_json(out / "scan.json", doc)
    return doc


def _frame_summary(frame) -> dict:
    asym = check_asymptotics(frame)
    return {"T": frame.T, "omega": frame.omega, "dichotomy_k": frame.dichotomy_k,
            "normalization": frame.normalization, "diagnostics": frame.diagnostics,
            "asymptotic_drift": {"gamma": asym.gamma_drift, "zeta": asym.zeta_drift}}


def cmd_frame(cfg: RunConfig, out: Path) -> dict:
    system = build_system(cfg)
    orbit = build_orbit(cfg, system)
    frame = build_frame(system, orbit, T=cfg.window)
    frame.to_csv(out / "frame.csv", stride=10)
    doc = {"command": "frame", "config": cfg.to_dict(), "frame": _frame_summary(frame)}
    _write_json(out / "frame.json", doc)
    return doc


COMMANDS = {"analyze": cmd_analyze, "verify": cmd_verify, "scan": cmd_scan, "frame": cmd_frame}


def parse_beta(text: str) -> list:
    """``0.3``, ``0,0.5,1`` or ``lo:hi:n``."""
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ConfigError("beta grid must be lo:hi:n")
        return np.linspace(float(parts[0]), float(parts[1]), int(parts[2])).tolist()
    return [float(v) for v in text.split(",") if v.strip()]


def parse_eps(text: str) -> list:
    return [float(v) for v in text.split(",") if v.strip()]


def resolve_config(args) -> RunConfig:
    data: dict = {}
    if args.config:
        try:
            data = json.loads(Path(args.config).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError("config file must hold a JSON object")
        data.pop("command", None)
    if args.preset is not None:
        data["preset"] = args.preset
    if args.forcing is not None:
        data["forcing"] = args.forcing
    if args.out is not None:
        data["out"] = args.out
    if args.tol is not None:
        data["tol"] = args.tol
    if args.window is not None:
        data["window"] = args.window
    if args.beta is not None:
        data["beta"] = parse_beta(args.beta)
    if args.eps is not None:
        data["eps"] = parse_eps(args.eps)
    try:
        return RunConfig.from_dict(data)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc


def make_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="homoclinic-gate",
                                 description="Persistence conditions near planar homoclinic orbits.")
    ap.add_argument("command", choices=sorted(COMMANDS))
    ap.add_argument("--config", help="JSON config file (a previous report's 'config' block works too)")
    ap.add_argument("--preset", help=f"system preset: {', '.join(PRESETS)}")
    ap.add_argument("--forcing", help=f"forcing preset: {', '.join(sorted(systems.FORCINGS))}")
    ap.add_argument("--out", help="output directory")
    ap.add_argument("--tol", type=float, help="line quadrature tolerance")
    ap.add_argument("--window", type=float, help="frame half-window T")
    ap.add_argument("--beta", help="phase: value, comma list or lo:hi:n grid")
    ap.add_argument("--eps", help="comma-separated epsilon list (empty string for none)")
    return ap


def main(argv=None) -> int:
    ap = make_parser()
    args = ap.parse_args(argv)
    try:
        cfg = resolve_config(args)
    except (ConfigError, ValueError) as exc:
        print(f"homoclinic-gate: config error: {exc}", file=sys.stderr)
        return 2
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    try:
        doc = COMMANDS[args.command](cfg, out)
    except Exception as exc:  # noqa: BLE001 - reported as a diagnostic exit
        print(f"homoclinic-gate: {args.command} failed: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    if args.command == "analyze":
        print((out / "report.txt").read_text(encoding="utf-8"), end="")
    elif args.command == "verify":
        print(f"slope = {doc['loglog_slope']}")
    elif args.command == "scan":
        print(f"classification = {doc['scan']['classification']}")
    print(f"wrote {args.command} output to {out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())

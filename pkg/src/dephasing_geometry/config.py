"""Run configuration and the flat ``section.key = value`` config format.

Example::

    # non-Markovian regime
    noise.nu = 2
    noise.lambda = 1
    noise.kappa = 1
    noise.a = 0.5
    system.theta = pi/2
    grid.t_max = 15
    grid.n = 1501

Numbers may be written as simple arithmetic over ``pi`` and ``inf``.
"""
from __future__ import annotations

import ast
import math
import operator
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Dict, Iterable, Optional, Tuple

from .model import NoiseParams, ParameterError, SystemConfig, TimeGrid, uniform_grid, validate

DEFAULT_COLUMNS = (
    "t", "ReF", "ImF", "absF", "phi", "s", "gamma", "r_x", "r_y", "r_z",
    "eps_plus", "Phi_P", "Phi_e", "Phi_g", "delta_Phi_e", "N", "L", "near_zero_flag",
)
EXTRA_COLUMNS = ("Phi_e_U", "Phi_g_principal", "ReF_ode", "ImF_ode", "ReF_mc", "ImF_mc", "F_mc_stderr")
ALL_COLUMNS = DEFAULT_COLUMNS + EXTRA_COLUMNS

KEYS = (
    "noise.nu", "noise.lambda", "noise.kappa", "noise.a",
    "system.omega0", "system.theta", "system.r0",
    "grid.t_max", "grid.n",
    "output.columns", "oracle.ode", "oracle.mc",
    "mc.n_traj", "mc.seed", "mc.workers",
)

_BINOPS = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul,
           ast.Div: operator.truediv, ast.Pow: operator.pow}
_NAMES = {"pi": math.pi, "inf": math.inf, "e": math.e}


def parse_number(text: str, key: str = "value") -> float:
    """Evaluate a numeric literal or arithmetic over pi/inf/e."""
    try:
        node = ast.parse(text.strip(), mode="eval").body
        return float(_eval(node))
    except (SyntaxError, ValueError, TypeError, ZeroDivisionError, KeyError) as exc:
        raise ParameterError(key, f"cannot parse number {text!r}") from exc


def _eval(node):
    if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
        return node.value
    if isinstance(node, ast.Name):
        return _NAMES[node.id]
    if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
        v = _eval(node.operand)
        return -v if isinstance(node.op, ast.USub) else v
    if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
        return _BINOPS[type(node.op)](_eval(node.left), _eval(node.right))
    raise ValueError("unsupported expression")


def parse_bool(text: str, key: str) -> bool:
    v = text.strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ParameterError(key, f"expected a boolean, got {text!r}")


def read_config_file(path) -> Dict[str, str]:
    entries: Dict[str, str] = {}
    text = Path(path).read_text()
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ParameterError(f"line {lineno}", f"expected key = value, got {raw!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        entries[key] = value
    return entries


def parse_overrides(items: Iterable[str]) -> Dict[str, str]:
    out = {}
    for item in items or ():
        if "=" not in item:
            raise ParameterError(item, "override must look like key=value")
        k, v = item.split("=", 1)
        out[k.strip()] = v.strip()
    return out


@dataclass(frozen=True)
class RunConfig:
    noise: NoiseParams = field(default_factory=lambda: NoiseParams(nu=0.5, lam=1.0, kappa=1.0, a=0.0))
    system: SystemConfig = field(default_factory=SystemConfig)
    grid: TimeGrid = field(default_factory=lambda: uniform_grid(15.0, 1501))
    columns: Tuple[str, ...] = DEFAULT_COLUMNS
    oracle_ode: bool = False
    oracle_mc: bool = False
    mc_traj: int = 100_000
    seed: int = 0
    workers: int = 1
    # test hook: added to the first residue to check that oracle comparisons fail
    inject_residue_error: float = 0.0

    def metadata(self) -> Dict[str, str]:
        r0 = self.system.r0
        return {
            "noise.nu": repr(self.noise.nu),
            "noise.lambda": repr(self.noise.lam),
            "noise.kappa": repr(self.noise.kappa),
            "noise.a": repr(self.noise.a),
            "system.omega0": repr(self.system.omega0),
            "system.theta": repr(self.system.theta),
            "system.r0": "none" if r0 is None else ",".join(repr(float(c)) for c in r0),
            "grid.t_max": repr(self.grid.t_max),
            "grid.n": str(self.grid.n_samples),
            "oracle.ode": str(self.oracle_ode).lower(),
            "oracle.mc": str(self.oracle_mc).lower(),
            "mc.n_traj": str(self.mc_traj),
            "mc.seed": str(self.seed),
        }

    def with_value(self, axis: str, value: float) -> "RunConfig":
        """Copy with one physical parameter replaced (sweep axes)."""
        noise_axes = {"a": "a", "nu": "nu", "kappa": "kappa", "lambda": "lam"}
        system_axes = {"theta": "theta", "omega0": "omega0"}
        if axis in noise_axes:
            cfg = replace(self, noise=self.noise.replace(**{noise_axes[axis]: value}))
        elif axis in system_axes:
            cfg = replace(self, system=replace(self.system, **{system_axes[axis]: value}))
        else:
            raise ParameterError("axis", f"unknown sweep axis {axis!r}")
        validate(cfg.noise, cfg.system)
        return cfg


def build_config(entries: Optional[Dict[str, str]] = None, base: Optional[RunConfig] = None) -> RunConfig:
    """Apply ``key = value`` entries on top of ``base`` and validate."""
    entries = dict(entries or {})
    cfg = base or RunConfig()
    unknown = sorted(set(entries) - set(KEYS))
    if unknown:
        raise ParameterError(unknown[0], "unknown configuration key")

    num = lambda k, default: parse_number(entries[k], k) if k in entries else default
    noise = NoiseParams(
        nu=num("noise.nu", cfg.noise.nu),
        lam=num("noise.lambda", cfg.noise.lam),
        kappa=num("noise.kappa", cfg.noise.kappa),
        a=num("noise.a", cfg.noise.a),
    )
    r0 = cfg.system.r0
    if "system.r0" in entries:
        text = entries["system.r0"].strip().lower()
        if text in ("", "none"):
            r0 = None
        else:
            parts = [parse_number(p, "system.r0") for p in text.split(",")]
            if len(parts) != 3:
                raise ParameterError("system.r0", "Bloch vector needs three components")
            r0 = tuple(parts)
    system = SystemConfig(
        omega0=num("system.omega0", cfg.system.omega0),
        theta=num("system.theta", cfg.system.theta),
        r0=r0,
    )
    grid = cfg.grid
    if {"grid.t_max", "grid.n", "noise.lambda"} & entries.keys():
        # the default window is 15 switching times
        if "noise.lambda" in entries and noise.lam > 0:
            default_tmax = 15.0 / noise.lam
        else:
            default_tmax = cfg.grid.t_max
        t_max = num("grid.t_max", default_tmax)
        n = num("grid.n", cfg.grid.n_samples)
        if n != int(n):
            raise ParameterError("grid.n", "must be an integer")
        grid = uniform_grid(t_max, int(n))

    columns = cfg.columns
    if "output.columns" in entries:
        columns = tuple(c.strip() for c in entries["output.columns"].split(",") if c.strip())
        bad = [c for c in columns if c not in ALL_COLUMNS]
        if bad:
            raise ParameterError("output.columns", f"unknown column {bad[0]!r}")

    def integer(k, default):
        v = num(k, default)
        if v != int(v):
            raise ParameterError(k, "must be an integer")
        return int(v)

    out = replace(
        cfg,
        noise=noise,
        system=system,
        grid=grid,
        columns=columns,
        oracle_ode=parse_bool(entries["oracle.ode"], "oracle.ode") if "oracle.ode" in entries else cfg.oracle_ode,
        oracle_mc=parse_bool(entries["oracle.mc"], "oracle.mc") if "oracle.mc" in entries else cfg.oracle_mc,
        mc_traj=integer("mc.n_traj", cfg.mc_traj),
        seed=integer("mc.seed", cfg.seed),
        workers=integer("mc.workers", cfg.workers),
    )
    validate(out.noise, out.system)
    if out.oracle_mc and not out.noise.markovian_noise:
        raise ParameterError("oracle.mc", "Monte Carlo needs noise.kappa = inf")
    if out.mc_traj < 1:
        raise ParameterError("mc.n_traj", "must be positive")
    return out


def load_config(path=None, overrides: Optional[Dict[str, str]] = None) -> RunConfig:
    entries = read_config_file(path) if path else {}
    entries.update(overrides or {})
    return build_config(entries)

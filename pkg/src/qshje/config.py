"""Run configuration read from a TOML file.

A minimal 1D harmonic run::

    seed = 7
    [[axes]]
    potential = { kind = "harmonic", stiffness = 1.0, domain = [-10, 10] }
    energy = 0.5
    [params]
    nu = [1.0, 0.0]
    mu = [0.0, 1.0]

Each axis gives either ``analytic = {kind = "free", k = 1.0, domain = [...]}``
or a ``potential`` table plus ``energy`` or ``bound_state = {nodes, bracket}``.
Relative file paths are resolved against the config file's directory.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .basis1d import DEFAULT_NODES, analytic_pair, find_bound_energy, solve_numerov
from .errors import InvalidInput
from .invariance import TransformMatrix
from .microstates import CoefficientVector
from .potentials import PhysicalConstants, Potential1D
from .product_basis import ActionParams, ProductBasis, SeparableSpec


class ConfigError(InvalidInput):
    """The configuration file is missing, malformed or inconsistent."""


def _potential(table, base):
    t = dict(table)
    kind = t.pop("kind", None)
    domain = t.pop("domain", None)
    if kind is None:
        raise ConfigError("potential needs a 'kind'")
    if kind == "tabulated":
        path = Path(t.pop("file"))
        if not path.is_absolute():
            path = base / path
        if not path.exists():
            raise ConfigError(f"tabulated potential file {str(path)!r} not found")
        return Potential1D.from_csv(path, domain)
    if domain is None:
        raise ConfigError(f"potential {kind!r} needs a 'domain'")
    if kind == "free":
        return Potential1D.free(domain)
    if kind in ("constant", "constant-step"):
        return Potential1D.constant(t.pop("v0"), domain, t.pop("x_step", None), t.pop("v_left", 0.0))
    if kind == "harmonic":
        return Potential1D.harmonic(t.pop("stiffness", 1.0), domain, t.pop("center", 0.0))
    if kind == "quartic":
        return Potential1D.quartic(t.pop("coupling", 1.0), domain, t.pop("center", 0.0))
    if kind in ("expression", "user-expression"):
        return Potential1D.expression(t.pop("expression"), domain, **t)
    raise ConfigError(f"unknown potential kind {kind!r}")


@dataclass
class AxisConfig:
    """One axis: an analytic pair or a potential solved numerically."""

    analytic: Optional[dict] = None
    potential: Optional[Potential1D] = None
    energy: Optional[float] = None
    bound_state: Optional[dict] = None
    n_nodes: int = DEFAULT_NODES
    construction: str = "auto"

    def describe(self):
        if self.analytic is not None:
            return {"analytic": self.analytic}
        out = {"potential": self.potential.to_dict(), "n_nodes": self.n_nodes, "construction": self.construction}
        if self.bound_state is not None:
            out["bound_state"] = self.bound_state
        else:
            out["energy"] = self.energy
        return out

    def build(self, constants):
        """Return ``(pair, energy)``."""
        if self.analytic is not None:
            a = dict(self.analytic)
            kind = a.pop("kind")
            domain = tuple(a.pop("domain", (0.0, 2.0 * np.pi)))
            pair = analytic_pair(kind, a, constants, domain=domain, n_nodes=self.n_nodes)
            return pair, pair.energy
        energy = self.energy
        if self.bound_state is not None:
            energy = find_bound_energy(
                self.potential, constants,
                node_count=int(self.bound_state.get("nodes", 0)),
                bracket=tuple(self.bound_state.get("bracket", (0.0, 1.0))),
                n_nodes=self.n_nodes,
            )
        pair = solve_numerov(self.potential, energy, constants, n_nodes=self.n_nodes,
                             construction=self.construction)
        return pair, energy


@dataclass
class TrajectoryConfig:
    x0: list
    t_end: float
    dt: float


@dataclass
class RunConfig:
    """Everything a subcommand needs. Tolerances all have defaults."""

    axes: list
    constants: PhysicalConstants = field(default_factory=PhysicalConstants)
    seed: int = 0
    params: Optional[ActionParams] = None
    transform: Optional[TransformMatrix] = None
    coefficients: Optional[CoefficientVector] = None
    nu_samples: Optional[list] = None
    trajectory: Optional[TrajectoryConfig] = None
    out_dir: str = "qshje-out"
    n_points: int = 1000
    residual_tol: float = 1e-6
    invariance_tol: Optional[float] = None
    n_instances: int = 20
    identify_tol: float = 1e-9
    source: Optional[str] = None

    @property
    def dimension(self):
        return len(self.axes)

    def build_basis(self):
        built = [ax.build(self.constants) for ax in self.axes]
        spec = SeparableSpec(tuple(p for p, _ in built), self.constants)
        return ProductBasis(spec)

    def rng(self):
        return np.random.default_rng(self.seed)


def _require(table, key, where):
    if key not in table:
        raise ConfigError(f"{where} needs '{key}'")
    return table[key]


def _axis(table, base, index):
    where = f"axes[{index}]"
    n_nodes = int(table.get("n_nodes", DEFAULT_NODES))
    if "analytic" in table:
        a = dict(table["analytic"])
        if "kind" not in a:
            raise ConfigError(f"{where}.analytic needs 'kind'")
        return AxisConfig(analytic=a, n_nodes=n_nodes)
    pot = _potential(_require(table, "potential", where), base)
    has_e, has_b = "energy" in table, "bound_state" in table
    if has_e == has_b:
        raise ConfigError(f"{where} needs exactly one of 'energy' and 'bound_state'")
    return AxisConfig(
        potential=pot,
        energy=float(table["energy"]) if has_e else None,
        bound_state=dict(table["bound_state"]) if has_b else None,
        n_nodes=n_nodes,
        construction=str(table.get("construction", "auto")),
    )


def parse_config(data, base=Path("."), source=None):
    """Build a :class:`RunConfig` from an already-parsed mapping."""
    try:
        return _parse(data, Path(base), source)
    except ConfigError:
        raise
    except (InvalidInput, KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"invalid configuration: {exc}") from exc


def _parse(data, base, source):
    axes_t = data.get("axes")
    if not axes_t:
        raise ConfigError("configuration needs at least one [[axes]] entry")
    if "dimension" in data and int(data["dimension"]) != len(axes_t):
        raise ConfigError(f"dimension = {data['dimension']} but {len(axes_t)} axes are given")
    if len(axes_t) > 3:
        raise ConfigError("at most three axes are supported")
    axes = [_axis(t, base, i) for i, t in enumerate(axes_t)]
    c = data.get("constants", {})
    constants = PhysicalConstants(float(c.get("hbar", 1.0)), float(c.get("mass", 1.0)))
    cfg = RunConfig(axes=axes, constants=constants, seed=int(data.get("seed", 0)), source=source)
    n = 2 ** len(axes)

    if "params" in data:
        p = data["params"]
        cfg.params = ActionParams(_require(p, "nu", "params"), _require(p, "mu", "params"), float(p.get("l", 0.0)))
    if "coefficients" in data:
        t = data["coefficients"]
        cfg.coefficients = CoefficientVector.from_pairs(_require(t, "c", "coefficients"))
        if "nu_samples" in t:
            cfg.nu_samples = [list(np.atleast_1d(s)) for s in t["nu_samples"]]
        cfg.identify_tol = float(t.get("tolerance", cfg.identify_tol))
    if cfg.params is not None and cfg.coefficients is not None:
        raise ConfigError("give either [params] or [coefficients], not both")
    for name, obj in (("params", cfg.params), ("coefficients", cfg.coefficients)):
        size = None if obj is None else (obj.nu.size if name == "params" else obj.size)
        if size is not None and size != n:
            raise ConfigError(f"{name} have {size} entries, {len(axes)} axes need {n}")
    if "transform" in data:
        m = data["transform"].get("matrix")
        if m is not None:
            cfg.transform = TransformMatrix(m)
            if cfg.transform.size != n:
                raise ConfigError(f"transform must be {n} x {n}")
    if "trajectory" in data:
        t = data["trajectory"]
        x0 = list(np.atleast_1d(np.asarray(_require(t, "x0", "trajectory"), dtype=float)))
        if len(x0) != len(axes):
            raise ConfigError(f"trajectory.x0 needs {len(axes)} coordinates")
        cfg.trajectory = TrajectoryConfig(x0, float(_require(t, "t_end", "trajectory")),
                                          float(_require(t, "dt", "trajectory")))
        if not cfg.trajectory.dt > 0:
            raise ConfigError("trajectory.dt must be positive")
    v = data.get("verify", {})
    cfg.n_points = int(v.get("n_points", cfg.n_points))
    cfg.residual_tol = float(v.get("tolerance", cfg.residual_tol))
    inv = data.get("invariance", {})
    cfg.n_instances = int(inv.get("n_instances", cfg.n_instances))
    if "tolerance" in inv:
        cfg.invariance_tol = float(inv["tolerance"])
    cfg.out_dir = str(data.get("output", {}).get("dir", cfg.out_dir))
    return cfg


def load_config(path):
    """Read and validate a TOML configuration file."""
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file {str(path)!r} not found")
    try:
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    return parse_config(data, path.parent, str(path))

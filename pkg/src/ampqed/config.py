"""Scenario configuration files (TOML)."""

import hashlib
import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np
import tomli

from .constants import Constants, get_units
from .errors import ConfigError
from .grids import SpatialGrid
from .media import Layer, MediumModel, Oscillator

SUITES = ("validate-kernel", "spectrum", "pole-scan", "green-identities",
          "commutator", "correlations", "compare-naive")

DEFAULT_TOLERANCES = {
    "eps_reg": 1e-12,      # relative regularizer
    "solver": 1e-9,        # integral relation and FDT reduction
    "spectral": 1e-10,     # spectral and covariance identities
    "kk": 1e-3,
    "schwarz": 1e-14,
    "commutator": 0.02,
    "regularizer": 1e-6,
    "pole_threshold": 1e-6,
}


@dataclass(frozen=True, eq=False)
class ScenarioConfig:
    """Validated scenario: medium, grids, constants, tolerances, analyses."""

    name: str
    model: MediumModel
    grid: SpatialGrid
    omegas: np.ndarray
    omega_max: float
    n_quad: int
    constants: Constants
    tolerances: dict
    analyses: tuple
    seed: int = 0
    scan_region: tuple = None
    scan_resolution: tuple = (48, 12)
    densities: bool = False
    raw: dict = field(default_factory=dict, repr=False)

    @property
    def config_hash(self):
        blob = json.dumps(self.raw, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()

    def default_scan_region(self):
        if self.scan_region is not None:
            return self.scan_region
        lo, hi = float(self.omegas[0]), float(self.omegas[-1])
        return (lo, hi, 0.0, 0.25 * (hi - lo))


def _get(table, key, kind, where, default=None, required=False):
    if key not in table:
        if required:
            raise ConfigError(f"missing key {where}.{key}")
        return default
    val = table[key]
    if kind is float and isinstance(val, int) and not isinstance(val, bool):
        val = float(val)
    if not isinstance(val, kind) or isinstance(val, bool) and kind is not bool:
        raise ConfigError(f"{where}.{key} must be of type {kind.__name__}")
    return val


def _oscillator(t, where):
    try:
        return Oscillator(_get(t, "strength", float, where, required=True),
                          _get(t, "resonance", float, where, required=True),
                          _get(t, "damping", float, where, required=True),
                          _get(t, "plasma", float, where, required=True))
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"{where}: {exc}") from None


def _layer(t, k):
    where = f"layers[{k}]"
    osc = t.get("oscillators", [])
    if not isinstance(osc, list):
        raise ConfigError(f"{where}.oscillators must be an array of tables")
    try:
        return Layer(_get(t, "z_min", float, where, required=True),
                     _get(t, "z_max", float, where, required=True),
                     tuple(_oscillator(o, f"{where}.oscillators[{j}]") for j, o in enumerate(osc)),
                     _get(t, "nonlocal_length", float, where, 0.0))
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"{where}: {exc}") from None


def parse_config(data, name=None):
    """Build a :class:`ScenarioConfig` from a parsed TOML mapping."""
    if not isinstance(data, dict):
        raise ConfigError("configuration must be a table")
    known = {"name", "units", "seed", "analyses", "constants", "grid", "frequencies",
             "tolerances", "layers", "pole_scan", "output"}
    extra = set(data) - known
    if extra:
        raise ConfigError(f"unknown top-level keys: {sorted(extra)}")
    name = _get(data, "name", str, "", name or "scenario")

    units = _get(data, "units", str, "", "natural")
    try:
        base = get_units(units)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    ct = data.get("constants", {})
    try:
        constants = Constants(**{k: _get(ct, k, float, "constants", getattr(base, k))
                                 for k in ("c", "eps0", "mu0", "hbar")})
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"constants: {exc}") from None

    gt = data.get("grid")
    if not isinstance(gt, dict):
        raise ConfigError("missing [grid] table")
    n = _get(gt, "n", int, "grid", required=True)
    if n < 16:
        raise ConfigError("grid.n must be at least 16")
    z0 = _get(gt, "z_min", float, "grid", required=True)
    z1 = _get(gt, "z_max", float, "grid", required=True)
    if not z1 > z0:
        raise ConfigError("grid.z_max must exceed grid.z_min")
    grid = SpatialGrid.uniform(z0, z1, n)

    layers = data.get("layers", [])
    if not isinstance(layers, list):
        raise ConfigError("layers must be an array of tables")
    try:
        model = MediumModel(tuple(_layer(t, k) for k, t in enumerate(layers)))
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(str(exc)) from None
    for layer in model.layers:
        if layer.z_min < z0 or layer.z_max > z1:
            raise ConfigError("grid must cover every layer")

    ft = data.get("frequencies")
    if not isinstance(ft, dict):
        raise ConfigError("missing [frequencies] table")
    w0 = _get(ft, "omega_min", float, "frequencies", required=True)
    w1 = _get(ft, "omega_max", float, "frequencies", required=True)
    nw = _get(ft, "n", int, "frequencies", required=True)
    if not (0 < w0 < w1) or nw < 1:
        raise ConfigError("need 0 < omega_min < omega_max and n >= 1")
    omegas = np.linspace(w0, w1, nw) if nw > 1 else np.array([w0])
    top = model.top_resonance()
    cutoff = _get(ft, "cutoff", float, "frequencies", 40.0 * top if top > 0 else None)
    if cutoff is None or not cutoff > 0:
        raise ConfigError("frequencies.cutoff required for a medium without resonances")
    n_quad = _get(ft, "n_quad", int, "frequencies", 320)
    if n_quad < 16:
        raise ConfigError("frequencies.n_quad must be at least 16")

    tt = data.get("tolerances", {})
    extra = set(tt) - set(DEFAULT_TOLERANCES)
    if extra:
        raise ConfigError(f"unknown tolerances: {sorted(extra)}")
    tol = {k: _get(tt, k, float, "tolerances", v) for k, v in DEFAULT_TOLERANCES.items()}
    if any(not v > 0 for v in tol.values()):
        raise ConfigError("all tolerances must be positive")

    analyses = data.get("analyses", list(SUITES))
    if not isinstance(analyses, list) or not all(isinstance(a, str) for a in analyses):
        raise ConfigError("analyses must be a list of suite names")
    unknown = [a for a in analyses if a not in SUITES]
    if unknown:
        raise ConfigError(f"unknown analyses: {unknown}")
    if len(set(analyses)) != len(analyses):
        raise ConfigError("analyses must not repeat")
    analyses = tuple(s for s in SUITES if s in analyses)

    pt = data.get("pole_scan", {})
    region = _get(pt, "region", list, "pole_scan", None)
    if region is not None:
        if len(region) != 4 or region[2] < 0 or region[1] <= region[0] or region[3] <= region[2]:
            raise ConfigError("pole_scan.region must be [re_min, re_max, im_min >= 0, im_max]")
        region = tuple(float(x) for x in region)
    res = _get(pt, "resolution", list, "pole_scan", [48, 12])
    if len(res) != 2 or any(not isinstance(r, int) or r < 3 for r in res):
        raise ConfigError("pole_scan.resolution must be two integers >= 3")

    ot = data.get("output", {})
    seed = _get(data, "seed", int, "", 0)
    return ScenarioConfig(name, model, grid, omegas, float(cutoff), n_quad, constants, tol,
                          analyses, seed, region, tuple(res),
                          _get(ot, "densities", bool, "output", False), data)


def bundled_scenarios():
    """Names of the scenarios shipped with the package."""
    root = resources.files("ampqed") / "scenarios"
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".toml"))


def load_config(source):
    """Load a scenario from a file path or a bundled scenario name."""
    path = Path(source)
    if path.is_file():
        text = path.read_text()
        default_name = path.stem
    elif str(source) in bundled_scenarios():
        text = (resources.files("ampqed") / "scenarios" / f"{source}.toml").read_text()
        default_name = str(source)
    else:
        raise ConfigError(f"no such scenario file or bundled scenario: {source}")
    try:
        data = tomli.loads(text)
    except tomli.TOMLDecodeError as exc:
        raise ConfigError(f"invalid TOML: {exc}") from None
    return parse_config(data, default_name)

"""Scenario configuration files: YAML schema, validation, canonical hashing.

Parameter keys keep their usual symbols (k_rt, k_rr, v_max, d_0,
c_tolerance, F_threshold) so a scenario file reads like a parameter table.
Validation errors carry the dotted field path and fall into three classes:
parse (unreadable YAML), schema (missing/ill-typed fields), and physical
(finite values that break an invariant, e.g. d_0 <= 0).
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path

import numpy as np
import yaml

from .apf import ApfParams
from .mpc import MpcConfig
from .scene import AxisAlignedBox, LidarModel, Scene, VerticalCylinder
from .simulator import ClusteringConfig, ScenarioConfig, SimConfig
from .trajectory import DynamicLimits


class ConfigError(Exception):
    """Base class; `path` is the dotted location of the offending field."""

    def __init__(self, path: str, message: str):
        self.path = path
        super().__init__(f"{path}: {message}" if path else message)


class ConfigParseError(ConfigError):
    pass


class ConfigSchemaError(ConfigError):
    pass


class ConfigPhysicalError(ConfigError):
    pass


def _require(mapping: dict, key: str, path: str):
    if not isinstance(mapping, dict):
        raise ConfigSchemaError(path, "expected a mapping")
    if key not in mapping:
        raise ConfigSchemaError(f"{path}.{key}" if path else key, "missing required field")
    return mapping[key]


def _number(value, path: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigSchemaError(path, f"expected a number, got {type(value).__name__}")
    return float(value)


def _vector(value, path: str, length: int) -> list:
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        return [float(value)] * length
    if not isinstance(value, (list, tuple)) or len(value) != length:
        raise ConfigSchemaError(path, f"expected a {length}-vector")
    return [_number(v, f"{path}[{i}]") for i, v in enumerate(value)]


def _integer(value, path: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigSchemaError(path, f"expected an integer, got {type(value).__name__}")
    return value


def _boolean(value, path: str) -> bool:
    if not isinstance(value, bool):
        raise ConfigSchemaError(path, "expected a boolean")
    return value


def _physical(path: str, builder):
    try:
        return builder()
    except ValueError as exc:
        raise ConfigPhysicalError(path, str(exc)) from exc


def _build_scene(raw, path: str) -> Scene:
    wb = _require(raw, "world_bounds", path)
    world = _physical(f"{path}.world_bounds", lambda: AxisAlignedBox(
        _vector(_require(wb, "min", f"{path}.world_bounds"), f"{path}.world_bounds.min", 3),
        _vector(_require(wb, "max", f"{path}.world_bounds"), f"{path}.world_bounds.max", 3)))
    raw_obs = raw.get("obstacles", [])
    if not isinstance(raw_obs, list):
        raise ConfigSchemaError(f"{path}.obstacles", "expected a list")
    obstacles = []
    for i, ob in enumerate(raw_obs):
        p = f"{path}.obstacles[{i}]"
        kind = _require(ob, "type", p)
        if kind == "box":
            obstacles.append(_physical(p, lambda ob=ob, p=p: AxisAlignedBox(
                _vector(_require(ob, "min", p), f"{p}.min", 3),
                _vector(_require(ob, "max", p), f"{p}.max", 3))))
        elif kind == "cylinder":
            obstacles.append(_physical(p, lambda ob=ob, p=p: VerticalCylinder(
                _vector(_require(ob, "center", p), f"{p}.center", 2),
                _number(_require(ob, "radius", p), f"{p}.radius"),
                _number(_require(ob, "z_min", p), f"{p}.z_min"),
                _number(_require(ob, "z_max", p), f"{p}.z_max"))))
        else:
            raise ConfigSchemaError(f"{p}.type", f"unknown primitive type {kind!r}")
    return _physical(path, lambda: Scene(tuple(obstacles), world))


def build_config(raw: dict, name: str = "scenario") -> ScenarioConfig:
    """Validate a parsed YAML document and build the scenario config."""
    if not isinstance(raw, dict):
        raise ConfigSchemaError("", "top-level document must be a mapping")

    scene = _build_scene(_require(raw, "scene", ""), "scene")

    wps_raw = _require(raw, "waypoints", "")
    if not isinstance(wps_raw, list) or len(wps_raw) < 2:
        raise ConfigSchemaError("waypoints", "expected a list of at least two 3D waypoints")
    waypoints = [_vector(w, f"waypoints[{i}]", 3) for i, w in enumerate(wps_raw)]

    lim = _require(raw, "limits", "")
    limits = _physical("limits", lambda: DynamicLimits(
        _vector(_require(lim, "v_max", "limits"), "limits.v_max", 3),
        _vector(_require(lim, "a_max", "limits"), "limits.a_max", 3),
        _number(lim.get("yaw_rate_max", 1.0), "limits.yaw_rate_max"),
        _number(lim.get("yaw_acc_max", 2.0), "limits.yaw_acc_max")))

    apf_raw = _require(raw, "apf", "")
    apf = _physical("apf", lambda: ApfParams(
        k_rt=_number(_require(apf_raw, "k_rt", "apf"), "apf.k_rt"),
        k_rr=_number(_require(apf_raw, "k_rr", "apf"), "apf.k_rr"),
        d_0=_number(_require(apf_raw, "d_0", "apf"), "apf.d_0"),
        f_threshold=_number(_require(apf_raw, "F_threshold", "apf"), "apf.F_threshold"),
        step_gain=_number(apf_raw.get("step_gain", 1.0), "apf.step_gain"),
        d_min=_number(apf_raw.get("d_min", 0.1), "apf.d_min"),
        use_nearest_point=_boolean(apf_raw.get("use_nearest_point", False),
                                   "apf.use_nearest_point")))
    if apf.d_0 <= 0:
        raise ConfigPhysicalError("apf.d_0", "must be positive")

    cl_raw = raw.get("clustering", {})
    clustering = _physical("clustering", lambda: ClusteringConfig(
        c_tolerance=_number(cl_raw.get("c_tolerance", 1.0), "clustering.c_tolerance"),
        min_cluster_size=_integer(cl_raw.get("min_cluster_size", 1),
                                  "clustering.min_cluster_size")))

    li_raw = raw.get("lidar", {})
    lidar = _physical("lidar", lambda: LidarModel(
        range_max=_number(li_raw.get("range_max", 100.0), "lidar.range_max"),
        fov_h=_number(li_raw.get("fov_h", 360.0), "lidar.fov_h"),
        fov_v=_number(li_raw.get("fov_v", 30.0), "lidar.fov_v"),
        rays_h=_integer(li_raw.get("rays_h", 360), "lidar.rays_h"),
        channels_v=_integer(li_raw.get("channels_v", 16), "lidar.channels_v"),
        mount_offset=_vector(li_raw.get("mount_offset", [0, 0, 0]), "lidar.mount_offset", 3),
        noise_std=_number(li_raw.get("noise_std", 0.0), "lidar.noise_std"),
        seed=_integer(li_raw.get("seed", 0), "lidar.seed")))

    sim_raw = raw.get("sim", {})
    sim = _physical("sim", lambda: SimConfig(
        dt=_number(sim_raw.get("dt", 0.01), "sim.dt"),
        time_budget=_number(sim_raw.get("time_budget", 300.0), "sim.time_budget"),
        goal_tolerance=_number(sim_raw.get("goal_tolerance", 0.5), "sim.goal_tolerance"),
        scan_rate_hz=_number(sim_raw.get("scan_rate_hz", 10.0), "sim.scan_rate_hz"),
        stop_on_stuck=_boolean(sim_raw.get("stop_on_stuck", True), "sim.stop_on_stuck"),
        plant=sim_raw.get("plant", "ideal"),
        lag_tau=_number(sim_raw.get("lag_tau", 0.2), "sim.lag_tau")))

    mpc_raw = raw.get("mpc", {})
    qw = _vector(mpc_raw.get("q_weights", [100.0, 20.0, 0.1, 0.01]), "mpc.q_weights", 4)
    mpc = _physical("mpc", lambda: MpcConfig(
        horizon=_integer(mpc_raw.get("horizon", 40), "mpc.horizon"),
        dt=sim.dt,
        q_weights=tuple(qw),
        p_weight=_number(mpc_raw.get("p_weight", 0.001), "mpc.p_weight"),
        v_max=limits.v_max,
        a_max=(_vector(mpc_raw["a_max"], "mpc.a_max", 3)
               if "a_max" in mpc_raw else limits.a_max),
        j_max=_vector(mpc_raw.get("j_max", 20.0), "mpc.j_max", 3),
        u_max=_number(mpc_raw.get("u_max", 400.0), "mpc.u_max"),
        yaw_rate_max=limits.yaw_rate_max))

    mode = raw.get("mode", "modified")
    if mode not in ("modified", "conventional"):
        raise ConfigSchemaError("mode", "must be 'modified' or 'conventional'")

    config = _physical("", lambda: ScenarioConfig(
        name=str(raw.get("name", name)), scene=scene, waypoints=waypoints,
        limits=limits, apf=apf, clustering=clustering, lidar=lidar,
        mpc=mpc, sim=sim, mode=mode))

    for i, wp in enumerate(config.waypoints):
        if not config.scene.world_bounds.contains(wp):
            raise ConfigPhysicalError(f"waypoints[{i}]", "outside world_bounds")
    return config


def load_config(path, mode_override: str | None = None,
                seed_override: int | None = None) -> ScenarioConfig:
    """Load, validate, and build a scenario config from a YAML file."""
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise ConfigParseError(str(p), f"cannot read config: {exc}") from exc
    try:
        raw = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigParseError(str(p), f"invalid YAML: {exc}") from exc
    if mode_override is not None:
        if not isinstance(raw, dict):
            raise ConfigSchemaError("", "top-level document must be a mapping")
        raw["mode"] = mode_override
    if seed_override is not None and isinstance(raw, dict):
        raw.setdefault("lidar", {})["seed"] = seed_override
    return build_config(raw, name=p.stem)


def config_digest(config: ScenarioConfig) -> str:
    """Stable content hash of the fully resolved configuration."""

    def encode(obj):
        if isinstance(obj, np.ndarray):
            return obj.tolist()
        if hasattr(obj, "__dataclass_fields__"):
            return {k: encode(getattr(obj, k)) for k in obj.__dataclass_fields__}
        if isinstance(obj, (list, tuple)):
            return [encode(v) for v in obj]
        return obj

    blob = json.dumps(encode(config), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()

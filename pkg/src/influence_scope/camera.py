"""Seeded smart-camera-network simulator.

Cameras sit above a rectangular ground plane and observe a disc-shaped
footprint determined by their pan/tilt/zoom configuration.  Targets appear
at random, stay put, and count toward performance exactly once: a camera
earns 1/m for each previously undetected target in its footprint, where m
is the number of cameras observing that target this step.  Observed
targets are latched as detected and never score again.

Per-step order of effects: spawn new targets, compute footprints, score
cameras on currently undetected targets, latch observations, emit the
sample record.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Optional, Sequence, Union

import numpy as np

from .model import (
    AgentSchema,
    ConfigPartSchema,
    RealInterval,
    SampleLog,
    SampleRecord,
)

TWO_PI = 2.0 * math.pi


class ScenarioError(ValueError):
    """A scenario description failed validation; ``path`` names the field."""

    def __init__(self, path: str, message: str) -> None:
        super().__init__(f"{path}: {message}")
        self.path = path


@dataclass(frozen=True)
class CameraPose:
    x: float
    y: float
    z: float

    def __post_init__(self) -> None:
        if not self.z > 0:
            raise ValueError("camera height z must be > 0")


@dataclass(frozen=True)
class PtzConfig:
    pan: float   # radians in [0, 2*pi)
    tilt: float  # radians in [0, tilt_max], tilt_max < pi/2
    zoom: float  # in [1, zoom_max]


@dataclass(frozen=True)
class CameraSpec:
    camera_id: str
    pose: CameraPose
    base_half_angle: float
    tilt_max: float
    zoom_max: float

    def __post_init__(self) -> None:
        if not 0.0 < self.base_half_angle < math.pi / 2:
            raise ValueError("base_half_angle must lie in (0, pi/2)")
        if not 0.0 <= self.tilt_max < math.pi / 2:
            raise ValueError("tilt_max must lie in [0, pi/2)")
        if self.zoom_max < 1.0:
            raise ValueError("zoom_max must be >= 1")

    def validate_ptz(self, ptz: PtzConfig) -> None:
        if not 0.0 <= ptz.pan < TWO_PI:
            raise ValueError(f"pan {ptz.pan} outside [0, 2*pi)")
        if not 0.0 <= ptz.tilt <= self.tilt_max:
            raise ValueError(f"tilt {ptz.tilt} outside [0, {self.tilt_max}]")
        if not 1.0 <= ptz.zoom <= self.zoom_max:
            raise ValueError(f"zoom {ptz.zoom} outside [1, {self.zoom_max}]")


@dataclass(frozen=True)
class Footprint:
    """Disc of ground points a camera observes (clipped by the scene rect
    at evaluation time; stored targets always lie inside the rect)."""

    cx: float
    cy: float
    radius: float


@dataclass(frozen=True)
class SceneState:
    width: float
    height: float
    arrival_rate: float
    detection_radius: float
    cameras: tuple[CameraSpec, ...]
    target_xy: np.ndarray       # (n, 2)
    target_detected: np.ndarray  # (n,) bool
    t: int = 0


def fov_footprint(pose: CameraPose, ptz: PtzConfig, base_half_angle: float) -> Footprint:
    """Project the view cone onto the ground plane as a disc.

    The center moves away from the camera's ground position as tilt grows;
    the radius shrinks with zoom and grows with tilt.
    """
    offset = pose.z * math.tan(ptz.tilt)
    cx = pose.x + offset * math.cos(ptz.pan)
    cy = pose.y + offset * math.sin(ptz.pan)
    radius = pose.z * math.tan(base_half_angle / ptz.zoom) / math.cos(ptz.tilt)
    return Footprint(cx, cy, radius)


def observer_counts(
    target_xy: np.ndarray,
    target_detected: np.ndarray,
    footprints: Sequence[Footprint],
    detection_radius: float,
) -> tuple[np.ndarray, np.ndarray]:
    """Per-target observer count m and the (cameras, targets) coverage mask.

    Already-detected targets are excluded: they contribute nothing new.
    """
    n = len(target_xy)
    inside = np.zeros((len(footprints), n), dtype=bool)
    m = np.zeros(n, dtype=np.int64)
    live = np.nonzero(~target_detected)[0] if n else np.empty(0, dtype=np.int64)
    if len(live):
        lx = target_xy[live, 0]
        ly = target_xy[live, 1]
        hit = np.zeros((len(footprints), len(live)), dtype=bool)
        for c, fp in enumerate(footprints):
            d2 = (lx - fp.cx) ** 2 + (ly - fp.cy) ** 2
            hit[c] = d2 <= (fp.radius + detection_radius) ** 2
        inside[:, live] = hit
        m[live] = hit.sum(axis=0)
    return m, inside


def exact_camera_credits(
    target_xy: np.ndarray,
    target_detected: np.ndarray,
    footprints: Sequence[Footprint],
    detection_radius: float,
) -> list[Fraction]:
    """Exact per-camera credit: sum of 1/m over newly observed targets."""
    m, inside = observer_counts(target_xy, target_detected, footprints, detection_radius)
    credits = []
    for c in range(len(footprints)):
        total = Fraction(0)
        for j in np.nonzero(inside[c])[0]:
            total += Fraction(1, int(m[j]))
        credits.append(total)
    return credits


def camera_performance(
    state: SceneState, footprints: Sequence[Footprint], c: int
) -> float:
    """Performance of camera ``c`` for the current step's footprints."""
    credits = exact_camera_credits(
        state.target_xy, state.target_detected, footprints, state.detection_radius
    )
    return float(credits[c])


def system_performance(per_camera: Sequence[float]) -> float:
    """Whole-system performance: the sum over cameras."""
    return float(math.fsum(per_camera))


def step(
    state: SceneState, configs: Sequence[PtzConfig], rng: np.random.Generator
) -> tuple[SceneState, list[float], SampleRecord]:
    """Advance one time step; returns (next state, per-camera perf, record)."""
    if len(configs) != len(state.cameras):
        raise ValueError("one PTZ config per camera required")
    for cam, cfg in zip(state.cameras, configs):
        cam.validate_ptz(cfg)

    n_new = int(rng.poisson(state.arrival_rate))
    if n_new:
        new_xy = rng.uniform(
            low=[0.0, 0.0], high=[state.width, state.height], size=(n_new, 2)
        )
        xy = np.vstack([state.target_xy, new_xy]) if len(state.target_xy) else new_xy
        detected = np.concatenate([state.target_detected, np.zeros(n_new, dtype=bool)])
    else:
        xy = state.target_xy
        detected = state.target_detected.copy()

    footprints = [
        fov_footprint(cam.pose, cfg, cam.base_half_angle)
        for cam, cfg in zip(state.cameras, configs)
    ]
    m, inside = observer_counts(xy, detected, footprints, state.detection_radius)
    perfs = []
    for c in range(len(footprints)):
        total = Fraction(0)
        for j in np.nonzero(inside[c])[0]:
            total += Fraction(1, int(m[j]))
        perfs.append(float(total))
    detected = detected | (m > 0)

    config = {}
    for cam, cfg in zip(state.cameras, configs):
        config[(cam.camera_id, "pan")] = cfg.pan
        config[(cam.camera_id, "tilt")] = cfg.tilt
        config[(cam.camera_id, "zoom")] = cfg.zoom
    record = SampleRecord(
        t=state.t,
        config=config,
        performance={cam.camera_id: p for cam, p in zip(state.cameras, perfs)},
    )
    next_state = replace(state, target_xy=xy, target_detected=detected, t=state.t + 1)
    return next_state, perfs, record


# --- scenarios and policies ------------------------------------------------


@dataclass(frozen=True)
class UniformRandomPtz:
    """Draw each camera's pan/tilt/zoom uniformly and independently every
    step; this excitation is what makes influences visible in the log."""


@dataclass(frozen=True)
class FixedPtz:
    configs: tuple[PtzConfig, ...]


Policy = Union[UniformRandomPtz, FixedPtz]


@dataclass(frozen=True)
class ScenarioSpec:
    width: float
    height: float
    arrival_rate: float
    detection_radius: float
    cameras: tuple[CameraSpec, ...]
    initial_targets: tuple[tuple[float, float], ...] = ()
    policy: Policy = UniformRandomPtz()
    steps: int = 1000
    seed: int = 0

    def __post_init__(self) -> None:
        if not (self.width > 0 and self.height > 0):
            raise ValueError("scene dimensions must be positive")
        if self.arrival_rate < 0:
            raise ValueError("arrival_rate must be >= 0")
        if self.detection_radius < 0:
            raise ValueError("detection_radius must be >= 0")
        if len(self.cameras) == 0:
            raise ValueError("at least one camera required")
        ids = [c.camera_id for c in self.cameras]
        if len(set(ids)) != len(ids):
            raise ValueError("duplicate camera ids")
        for x, y in self.initial_targets:
            if not (0 <= x <= self.width and 0 <= y <= self.height):
                raise ValueError(f"initial target ({x}, {y}) outside the scene")


def initial_state(spec: ScenarioSpec) -> SceneState:
    xy = np.array(spec.initial_targets, dtype=float).reshape(-1, 2)
    return SceneState(
        width=spec.width,
        height=spec.height,
        arrival_rate=spec.arrival_rate,
        detection_radius=spec.detection_radius,
        cameras=spec.cameras,
        target_xy=xy,
        target_detected=np.zeros(len(xy), dtype=bool),
    )


def camera_schemas(spec: ScenarioSpec) -> tuple[AgentSchema, ...]:
    schemas = []
    for cam in spec.cameras:
        # degenerate bounds (tilt_max 0, zoom_max 1) still need lower < upper
        tilt_hi = cam.tilt_max if cam.tilt_max > 0 else 1e-9
        zoom_hi = cam.zoom_max if cam.zoom_max > 1 else 1.0 + 1e-9
        parts = (
            ConfigPartSchema("pan", RealInterval(0.0, TWO_PI)),
            ConfigPartSchema("tilt", RealInterval(0.0, tilt_hi)),
            ConfigPartSchema("zoom", RealInterval(1.0, zoom_hi)),
        )
        schemas.append(AgentSchema(cam.camera_id, parts))
    return tuple(schemas)


def _draw_configs(
    spec: ScenarioSpec, policy: Policy, rng: np.random.Generator
) -> list[PtzConfig]:
    if isinstance(policy, FixedPtz):
        if len(policy.configs) != len(spec.cameras):
            raise ValueError("FixedPtz needs one config per camera")
        return list(policy.configs)
    configs = []
    for cam in spec.cameras:
        pan = float(rng.uniform(0.0, TWO_PI))
        tilt = float(rng.uniform(0.0, cam.tilt_max))
        zoom = float(rng.uniform(1.0, cam.zoom_max))
        configs.append(PtzConfig(pan, tilt, zoom))
    return configs


def run_scenario(
    spec: ScenarioSpec,
    steps: Optional[int] = None,
    policy: Optional[Policy] = None,
    seed: Optional[int] = None,
) -> SampleLog:
    """Run the simulator and return a schema-complete sample log.

    ``steps``, ``policy`` and ``seed`` default to the scenario's own
    values.  The run is a pure function of its arguments.
    """
    steps = spec.steps if steps is None else steps
    policy = spec.policy if policy is None else policy
    seed = spec.seed if seed is None else seed
    if steps < 1:
        raise ValueError("steps must be >= 1")
    rng = np.random.default_rng(seed)
    state = initial_state(spec)
    # A target can never enter camera c's footprint once it is farther from
    # the camera base than the largest center offset plus the largest
    # radius, so such targets (and detected ones) are dropped from the
    # working state.  This leaves every record untouched and keeps long
    # runs linear in the observable backlog.
    reach = np.array(
        [
            cam.pose.z * math.tan(cam.tilt_max)
            + cam.pose.z * math.tan(cam.base_half_angle) / math.cos(cam.tilt_max)
            + spec.detection_radius
            for cam in spec.cameras
        ]
    )
    base_x = np.array([cam.pose.x for cam in spec.cameras])
    base_y = np.array([cam.pose.y for cam in spec.cameras])
    records = []
    for _ in range(steps):
        configs = _draw_configs(spec, policy, rng)
        state, _, record = step(state, configs, rng)
        records.append(record)
        xy = state.target_xy
        if len(xy):
            d2 = (xy[:, 0, None] - base_x) ** 2 + (xy[:, 1, None] - base_y) ** 2
            reachable = (d2 <= reach**2).any(axis=1)
            keep = reachable & ~state.target_detected
            if not keep.all():
                state = replace(
                    state,
                    target_xy=xy[keep],
                    target_detected=state.target_detected[keep],
                )
    return SampleLog(schemas=camera_schemas(spec), records=tuple(records))


# --- scenario (de)serialization --------------------------------------------


def scenario_from_dict(data: dict) -> ScenarioSpec:
    """Build a scenario from a parsed JSON object, reporting the offending
    field path on failure."""

    def need(obj: dict, key: str, path: str):
        if key not in obj:
            raise ScenarioError(f"{path}{key}", "missing field")
        return obj[key]

    def number(obj: dict, key: str, path: str) -> float:
        value = need(obj, key, path)
        if not isinstance(value, (int, float)) or isinstance(value, bool):
            raise ScenarioError(f"{path}{key}", f"expected a number, got {value!r}")
        return float(value)

    if not isinstance(data, dict):
        raise ScenarioError("", "scenario must be a JSON object")
    scene = need(data, "scene", "")
    if not isinstance(scene, dict):
        raise ScenarioError("scene", "expected an object")
    width = number(scene, "width", "scene.")
    height = number(scene, "height", "scene.")

    raw_cameras = need(data, "cameras", "")
    if not isinstance(raw_cameras, list) or not raw_cameras:
        raise ScenarioError("cameras", "expected a non-empty list")
    cameras = []
    for i, cam in enumerate(raw_cameras):
        path = f"cameras[{i}]."
        if not isinstance(cam, dict):
            raise ScenarioError(f"cameras[{i}]", "expected an object")
        cam_id = need(cam, "id", path)
        pose_obj = need(cam, "pose", path)
        pose = CameraPose(
            number(pose_obj, "x", path + "pose."),
            number(pose_obj, "y", path + "pose."),
            number(pose_obj, "z", path + "pose."),
        )
        try:
            cameras.append(
                CameraSpec(
                    camera_id=str(cam_id),
                    pose=pose,
                    base_half_angle=number(cam, "base_half_angle", path),
                    tilt_max=number(cam, "tilt_max", path),
                    zoom_max=number(cam, "zoom_max", path),
                )
            )
        except ValueError as exc:
            raise ScenarioError(f"cameras[{i}]", str(exc)) from exc

    policy_name = data.get("policy", "uniform_random")
    if policy_name == "uniform_random":
        policy: Policy = UniformRandomPtz()
    elif isinstance(policy_name, dict) and "fixed" in policy_name:
        configs = tuple(
            PtzConfig(float(c["pan"]), float(c["tilt"]), float(c["zoom"]))
            for c in policy_name["fixed"]
        )
        policy = FixedPtz(configs)
    else:
        raise ScenarioError("policy", f"unknown policy {policy_name!r}")

    initial = tuple(
        (float(p[0]), float(p[1])) for p in data.get("initial_targets", [])
    )
    try:
        return ScenarioSpec(
            width=width,
            height=height,
            arrival_rate=number(data, "arrival_rate", ""),
            detection_radius=number(data, "detection_radius", ""),
            cameras=tuple(cameras),
            initial_targets=initial,
            policy=policy,
            steps=int(data.get("steps", 1000)),
            seed=int(data.get("seed", 0)),
        )
    except ScenarioError:
        raise
    except ValueError as exc:
        raise ScenarioError("", str(exc)) from exc

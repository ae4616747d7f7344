import math
import bisect
import numpy as np

from schemas import (
    Vec3, OrientedBox, VehicleState, WorldSnapshot,
    Point3, BoxSpec, Waypoint, VehicleScript, Scenario, ScenarioConfig
)
from .general import make_rng


RSU_CORNER_OFFSET:float = 2.0   # meters beyond both road edges, north-east corner
TURNS:tuple[str, ...] = ('straight', 'left', 'right')


# ---- Ground-truth kinematics ---- #

def _segment_heading(script:VehicleScript, i:int) -> float:
    """Heading of segment i (waypoint i -> i+1); a zero-length segment borrows the nearest moving one."""
    wps:list[Waypoint] = script.waypoints
    order:list[int] = [i] + [j for k in range(1, len(wps)) for j in (i - k, i + k)]
    for j in order:
        if 0 <= j < len(wps) - 1:
            dx, dy = wps[j + 1].x - wps[j].x, wps[j + 1].y - wps[j].y
            if dx * dx + dy * dy > 0: return math.atan2(dy, dx)
    return 0.0


def vehicle_state_at(script:VehicleScript, t:float, timestep_s:float, extrapolate:bool=False) -> VehicleState|None:
    """Interpolated state of the scripted vehicle at timestep t.

        Parameters:
            script (VehicleScript): the vehicle's waypoint script.
            t (float): query time in timesteps.
            timestep_s (float): timestep length in seconds (to convert displacement per timestep to m/s).
            extrapolate (bool, optional): continue the final segment at constant velocity past the last waypoint. Defaults to False.

        Returns:
            VehicleState|None: the state, or None if the vehicle is outside its script window.
    """
    wps:list[Waypoint] = script.waypoints
    if t < script.t_start or (t > script.t_end and not extrapolate): return None

    # Stationary single-waypoint script
    if len(wps) == 1:
        if t != script.t_start and not extrapolate: return None
        return VehicleState(script.id, Vec3(wps[0].x, wps[0].y, 0.0), 0.0, 0.0, tuple(script.dims), script.connected)

    # Active segment: the one starting at or before t (the last one from t_end onwards)
    times:list[float] = [w.t for w in wps]
    i:int = min(bisect.bisect_right(times, t) - 1, len(wps) - 2)
    a, b = wps[i], wps[i + 1]

    frac:float = (t - a.t) / (b.t - a.t)
    x:float = a.x + frac * (b.x - a.x)
    y:float = a.y + frac * (b.y - a.y)
    speed:float = math.hypot(b.x - a.x, b.y - a.y) / ((b.t - a.t) * timestep_s)

    return VehicleState(
        id=script.id,
        position=Vec3(x, y, 0.0),
        heading=_segment_heading(script, i),
        speed=speed,
        dims=tuple(script.dims),
        connected=script.connected
    )


def snapshot_at(scenario:Scenario, t:int) -> WorldSnapshot:
    """Extracts the ground-truth world state at timestep t.

        Parameters:
            scenario (Scenario): the scenario.
            t (int): timestep index, 0 <= t < duration.

        Returns:
            WorldSnapshot: states of every vehicle inside its script window, plus the static RSU and buildings.
    """
    if not 0 <= t < scenario.duration:
        raise ValueError(f'Timestep {t} is outside the scenario (0..{scenario.duration - 1}).')

    states:list[VehicleState] = []
    for script in scenario.vehicles:
        state:VehicleState|None = vehicle_state_at(script, t, scenario.timestep_s)
        if state is not None: states.append(state)

    return WorldSnapshot(
        t=t,
        vehicles=tuple(sorted(states, key=lambda s: s.id)),
        rsu=scenario.rsu_node(),
        buildings=scenario.building_boxes()
    )


# ---- Intersection generator ---- #

def _arm_frame(arm:int) -> tuple[np.ndarray, np.ndarray]:
    """Inbound travel direction u and right-hand normal r of vehicles entering from the given arm (0=E, 1=N, 2=W, 3=S)."""
    outward:np.ndarray = np.array([math.cos(arm * math.pi / 2), math.sin(arm * math.pi / 2)])
    u:np.ndarray = np.round(-outward, 12)
    return u, np.array([u[1], -u[0]])


def _route_points(cfg:ScenarioConfig, arm:int, lane:int, turn:str) -> list[np.ndarray]:
    """Waypoint positions from the arm's far end through the intersection to the far end of the exit arm."""
    u, r = _arm_frame(arm)
    match turn:
        case 'straight': u_out = u
        case 'left': u_out = np.array([-u[1], u[0]])
        case 'right': u_out = np.array([u[1], -u[0]])
        case _: raise ValueError(f'Unknown turn "{turn}".')
    r_out:np.ndarray = np.array([u_out[1], -u_out[0]])

    offset:float = (lane + 0.5) * cfg.lane_width
    edge:float = cfg.road_half_width

    points:list[np.ndarray] = [
        -u * cfg.arm_length + r * offset,
        -u * edge + r * offset
    ]
    if turn != 'straight':
        points.append(offset * (r + r_out))
    points.extend([
        u_out * edge + r_out * offset,
        u_out * cfg.arm_length + r_out * offset
    ])
    return points


def scenario_layout(cfg:ScenarioConfig) -> tuple[Point3, list[BoxSpec]]:
    """RSU position and the four corner buildings of the intersection."""
    edge:float = cfg.road_half_width
    c:float = edge + cfg.building_setback + cfg.building_size / 2.0
    half:float = cfg.building_size / 2.0

    buildings:list[BoxSpec] = [
        BoxSpec(
            center=Point3(x=sx * c, y=sy * c, z=cfg.building_height / 2.0),
            half_extents=Point3(x=half, y=half, z=cfg.building_height / 2.0),
            yaw=0.0
        )
        for sx, sy in ((1, 1), (-1, 1), (-1, -1), (1, -1))
    ]
    rsu:Point3 = Point3(x=edge + RSU_CORNER_OFFSET, y=edge + RSU_CORNER_OFFSET, z=cfg.rsu_height)
    return rsu, buildings


def generate_intersection_scenario(cfg:ScenarioConfig, seed:int) -> Scenario:
    """Generates a four-arm intersection scenario with mixed cars and trucks.

        Parameters:
            cfg (ScenarioConfig): generator settings (fleet size, connected share, geometry, speeds, turns).
            seed (int): master seed; the same (cfg, seed) always yields the same scenario.

        Returns:
            Scenario: the generated scenario.
    """
    if cfg.arm_length <= cfg.road_half_width:
        raise ValueError(f'arm_length ({cfg.arm_length} m) must exceed the road half width ({cfg.road_half_width} m).')

    timestep_s:float = cfg.timestep_ms / 1000.0
    lead:float = cfg.arm_length / cfg.speed_min / timestep_s       # timesteps to cross one arm at the slowest speed
    headway:float = cfg.min_headway_s / timestep_s                  # timesteps

    # Spawn slots on a headway grid per (arm, lane) guarantee the minimum separation
    slots_per_lane:int = int(math.floor((cfg.duration + lead) / headway))
    lanes:int = 4 * cfg.lanes_per_direction
    capacity:int = lanes * slots_per_lane
    if cfg.n_vehicles > capacity:
        raise ValueError(
            f'Infeasible scenario: {cfg.n_vehicles} vehicles exceed the lane capacity of {capacity} '
            f'(4 arms x {cfg.lanes_per_direction} lanes x {slots_per_lane} spawn slots).'
        )

    # Independent streams per concern: the connected share never moves a vehicle
    picks:np.ndarray = make_rng(seed, 'scenario', 'slots').choice(capacity, size=cfg.n_vehicles, replace=False)
    connected:np.ndarray = make_rng(seed, 'scenario', 'connected').random(cfg.n_vehicles) < cfg.connected_fraction
    trucks:np.ndarray = make_rng(seed, 'scenario', 'trucks').random(cfg.n_vehicles) < cfg.truck_fraction
    motion:np.random.Generator = make_rng(seed, 'scenario', 'motion')
    id_width:int = max(3, len(str(cfg.n_vehicles - 1)))

    scripts:list[VehicleScript] = []
    for i, pick in enumerate(picks):
        lane_id, slot = divmod(int(pick), slots_per_lane)
        arm, lane = divmod(lane_id, cfg.lanes_per_direction)
        turn:str = TURNS[int(motion.choice(3, p=cfg.turn_probabilities))]
        speed:float = float(motion.uniform(cfg.speed_min, cfg.speed_max))
        truck:bool = bool(trucks[i])

        # Time each waypoint by distance travelled at constant speed
        t:float = -lead + slot * headway
        points:list[np.ndarray] = _route_points(cfg, arm, lane, turn)
        waypoints:list[Waypoint] = [Waypoint(t=t, x=float(points[0][0]), y=float(points[0][1]))]
        for prev, cur in zip(points, points[1:]):
            t += float(np.linalg.norm(cur - prev)) / speed / timestep_s
            waypoints.append(Waypoint(t=t, x=float(cur[0]), y=float(cur[1])))

        scripts.append(VehicleScript(
            id=f'v{i:0{id_width}d}',
            waypoints=waypoints,
            dims=cfg.truck_dims if truck else cfg.car_dims,
            connected=bool(connected[i]),
            kind='truck' if truck else 'car'
        ))

    rsu, buildings = scenario_layout(cfg)
    return Scenario(rsu=rsu, buildings=buildings, vehicles=scripts, duration=cfg.duration, timestep_ms=cfg.timestep_ms)

import math
import numpy as np

from schemas import Vec3, Segment, OrientedBox, LosResult, VehicleState, GEOM_TOL


# Corner offsets in the vehicle frame as (length sign, width sign): front-left, front-right, rear-left, rear-right
ANTENNA_CORNERS:tuple[tuple[int, int], ...] = ((1, 1), (1, -1), (-1, 1), (-1, -1))


def boxes_to_arrays(boxes:list[OrientedBox]) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Packs the given boxes into (centers (B,3), half_extents (B,3), yaws (B,)) arrays."""
    if not boxes:
        return np.zeros((0, 3)), np.ones((0, 3)), np.zeros(0)

    centers:np.ndarray = np.array([[b.center.x, b.center.y, b.center.z] for b in boxes], dtype=np.float64)
    halves:np.ndarray = np.array([[b.half_extents.x, b.half_extents.y, b.half_extents.z] for b in boxes], dtype=np.float64)
    yaws:np.ndarray = np.array([b.yaw for b in boxes], dtype=np.float64)
    return centers, halves, yaws


def segment_box_entries(starts:np.ndarray, ends:np.ndarray, centers:np.ndarray, halves:np.ndarray, yaws:np.ndarray, tol:float=GEOM_TOL) -> np.ndarray:
    """Vectorized segment vs oriented box slab test.

        Parameters:
            starts (np.ndarray): (M,3) segment start points.
            ends (np.ndarray): (M,3) segment end points.
            centers, halves, yaws (np.ndarray): boxes as returned by boxes_to_arrays().
            tol (float, optional): boxes are grown by this much so grazing contact counts as a hit. Defaults to 1e-9 m.

        Returns:
            np.ndarray: (M,B) entry parameter t in [0,1] of each segment into each box, np.inf where they do not meet.
    """
    starts = np.asarray(starts, dtype=np.float64).reshape(-1, 3)
    ends = np.asarray(ends, dtype=np.float64).reshape(-1, 3)
    m, b = starts.shape[0], centers.shape[0]
    if m == 0 or b == 0: return np.full((m, b), np.inf)

    # Move every segment into every box's local frame (rotate by -yaw about z)
    cos, sin = np.cos(yaws)[None, :], np.sin(yaws)[None, :]
    rel_s = starts[:, None, :] - centers[None, :, :]
    rel_e = ends[:, None, :] - centers[None, :, :]

    o = np.empty((m, b, 3))
    o[..., 0] = cos * rel_s[..., 0] + sin * rel_s[..., 1]
    o[..., 1] = -sin * rel_s[..., 0] + cos * rel_s[..., 1]
    o[..., 2] = rel_s[..., 2]

    e = np.empty((m, b, 3))
    e[..., 0] = cos * rel_e[..., 0] + sin * rel_e[..., 1]
    e[..., 1] = -sin * rel_e[..., 0] + cos * rel_e[..., 1]
    e[..., 2] = rel_e[..., 2]
    d = e - o

    # Slabs
    lo = -halves[None, :, :] - tol
    hi = halves[None, :, :] + tol
    parallel = np.abs(d) < 1e-15
    with np.errstate(divide='ignore', invalid='ignore'):
        t1 = (lo - o) / d
        t2 = (hi - o) / d
    t_near = np.minimum(t1, t2)
    t_far = np.maximum(t1, t2)

    # Parallel to a slab: either always inside it or never
    inside = (o >= lo) & (o <= hi)
    t_near = np.where(parallel, np.where(inside, -np.inf, np.inf), t_near)
    t_far = np.where(parallel, np.where(inside, np.inf, -np.inf), t_far)

    t_enter = np.maximum(t_near.max(axis=2), 0.0)
    t_exit = np.minimum(t_far.min(axis=2), 1.0)
    return np.where(t_enter <= t_exit, t_enter, np.inf)


def perpendicular_distances(starts:np.ndarray, ends:np.ndarray, points:np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized point to line distance.

        Returns:
            tuple[np.ndarray, np.ndarray]: (M,V) distances of each point to each segment's infinite line, and
            (M,V) normalized projection parameters (0 at start, 1 at end).
    """
    starts = np.asarray(starts, dtype=np.float64).reshape(-1, 3)
    ends = np.asarray(ends, dtype=np.float64).reshape(-1, 3)
    points = np.asarray(points, dtype=np.float64).reshape(-1, 3)

    d = ends - starts
    length_sq = np.einsum('ij,ij->i', d, d)
    if np.any(length_sq <= GEOM_TOL ** 2):
        raise ValueError('Perpendicular distance is undefined for a zero-length segment.')

    rel = points[None, :, :] - starts[:, None, :]
    t = np.einsum('mvk,mk->mv', rel, d) / length_sq[:, None]
    foot = starts[:, None, :] + t[..., None] * d[:, None, :]
    dist = np.linalg.norm(points[None, :, :] - foot, axis=2)
    return dist, t


def perpendicular_distance(seg:Segment, p:Vec3) -> tuple[float, float]:
    """Distance from p to the infinite line through seg, and the projection parameter t of p onto seg.

        Parameters:
            seg (Segment): the link vector; must have positive length.
            p (Vec3): the query point (e.g. a blocking vehicle's box center).

        Returns:
            tuple[float, float]: (distance in meters, t) with t = 0 at seg.start and t = 1 at seg.end.
    """
    dist, t = perpendicular_distances(seg.start.as_array(), seg.end.as_array(), p.as_array())
    return float(dist[0, 0]), float(t[0, 0])


def segment_intersects_box(seg:Segment, box:OrientedBox) -> bool:
    """Checks if any point of the segment lies inside or on the box (grazing contact counts)."""
    centers, halves, yaws = boxes_to_arrays([box])
    entries = segment_box_entries(seg.start.as_array(), seg.end.as_array(), centers, halves, yaws)
    return bool(np.isfinite(entries[0, 0]))


def vehicle_box(state:VehicleState) -> OrientedBox:
    """The vehicle's body as an oriented box standing on the ground at its position."""
    length, width, height = state.dims
    if min(length, width, height) <= 0:
        raise ValueError(f'Vehicle "{state.id}" has non-positive dimensions {state.dims}.')

    return OrientedBox(
        center=Vec3(state.position.x, state.position.y, state.position.z + height / 2.0),
        half_extents=Vec3(length / 2.0, width / 2.0, height / 2.0),
        yaw=state.heading
    )


def antenna_array(state:VehicleState) -> np.ndarray:
    """World positions (4,3) of the roof-corner antennas, ordered front-left, front-right, rear-left, rear-right."""
    length, width, height = state.dims
    c, s = math.cos(state.heading), math.sin(state.heading)

    out:np.ndarray = np.empty((4, 3))
    for i, (sl, sw) in enumerate(ANTENNA_CORNERS):
        lx, ly = sl * length / 2.0, sw * width / 2.0
        out[i, 0] = state.position.x + c * lx - s * ly
        out[i, 1] = state.position.y + s * lx + c * ly
        out[i, 2] = state.position.z + height
    return out


def antenna_positions(state:VehicleState) -> list[Vec3]:
    """The four roof-corner antenna positions as Vec3 (front-left, front-right, rear-left, rear-right)."""
    return [Vec3.from_array(row) for row in antenna_array(state)]


def los_check(a:Vec3, b:Vec3, obstacles:list[tuple[str, OrientedBox]], exclude:set[str]|None=None) -> LosResult:
    """Checks line of sight between two points against the given obstacles.

        Parameters:
            a (Vec3): one end of the link.
            b (Vec3): the other end; must differ from a.
            obstacles (list[tuple[str, OrientedBox]]): (id, box) pairs, e.g. buildings and vehicle bodies.
            exclude (set[str], optional): obstacle ids to ignore (the link's own vehicles).

        Returns:
            LosResult: clear, or blocked by the obstacle entered first when walking from a to b.
    """
    if (b - a).norm() <= GEOM_TOL:
        raise ValueError(f'LOS check needs two distinct points, got {a} twice.')

    exclude = exclude or set()
    kept:list[tuple[str, OrientedBox]] = [(oid, box) for oid, box in obstacles if oid not in exclude]
    if not kept: return LosResult(clear=True)

    centers, halves, yaws = boxes_to_arrays([box for _, box in kept])
    entries:np.ndarray = segment_box_entries(a.as_array(), b.as_array(), centers, halves, yaws)[0]
    if not np.any(np.isfinite(entries)): return LosResult(clear=True)

    # Nearest blocker to a; ties go to the smaller id
    order = sorted(range(len(kept)), key=lambda i: (entries[i], kept[i][0]))
    first:int = order[0]
    return LosResult(clear=False, blocker=kept[first][0], entry_t=float(entries[first]))

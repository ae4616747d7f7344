import math
import pytest
import sys
import os

import numpy as np

# Modify sys path for util and obj imports
parent_dir:str = os.path.abspath(os.path.join(os.path.dirname(__file__), '..'))
if parent_dir not in sys.path:
    sys.path.insert(0, parent_dir)

# Finish imports
from schemas import Vec3, Segment, OrientedBox, VehicleState
from utils import los_check, segment_intersects_box, perpendicular_distance, vehicle_box, antenna_positions


# ---- Setup ---- #
def box(x:float, y:float, z:float, hx:float, hy:float, hz:float, yaw:float=0.0) -> OrientedBox:
    return OrientedBox(Vec3(x, y, z), Vec3(hx, hy, hz), yaw)


@pytest.fixture
def unit_box():
    return box(5, 0, 0, 1, 1, 1)


# ---- Tests ---- #
@pytest.mark.parametrize('a,b,clear,blocker', [
    (Vec3(0, 0, 0), Vec3(10, 0, 0), False, 'b1'),       # Straight through the box
    (Vec3(0, 5, 0), Vec3(10, 5, 0), True, None),        # Passes beside it
    (Vec3(0, 1, 0), Vec3(10, 1, 0), False, 'b1'),       # Grazes the face y = 1
])
def test_los_check_single_box(unit_box, a, b, clear, blocker):
    result = los_check(a, b, [('b1', unit_box)])
    assert result.clear == clear
    assert result.blocker == blocker


def test_los_check_reports_nearest_blocker():
    obstacles = [('far', box(8, 0, 0, 1, 1, 1)), ('near', box(3, 0, 0, 1, 1, 1))]
    result = los_check(Vec3(0, 0, 0), Vec3(10, 0, 0), obstacles)
    assert not result.clear
    assert result.blocker == 'near'
    assert result.entry_t == pytest.approx(0.2)


def test_los_check_excludes_endpoint_owners(unit_box):
    result = los_check(Vec3(0, 0, 0), Vec3(10, 0, 0), [('v1', unit_box)], exclude={'v1'})
    assert result.clear


def test_los_check_is_symmetric(unit_box):
    a, b = Vec3(0, 0.5, 0.2), Vec3(10, -0.3, 0.1)
    assert los_check(a, b, [('b1', unit_box)]).clear == los_check(b, a, [('b1', unit_box)]).clear


def test_los_check_rejects_degenerate_segment(unit_box):
    with pytest.raises(ValueError):
        los_check(Vec3(1, 1, 1), Vec3(1, 1, 1), [('b1', unit_box)])


def test_rotated_box():
    # A 45 degree box whose corner reaches sqrt(2) along +x from its center
    rotated = box(0, 0, 0, 1, 1, 1, yaw=math.pi / 4)
    assert segment_intersects_box(Segment(Vec3(1.4, -5, 0), Vec3(1.4, 5, 0)), rotated)
    assert not segment_intersects_box(Segment(Vec3(1.5, -5, 0), Vec3(1.5, 5, 0)), rotated)


def test_segment_above_box_is_clear(unit_box):
    assert not segment_intersects_box(Segment(Vec3(0, 0, 2), Vec3(10, 0, 2)), unit_box)


def test_segment_ending_inside_box(unit_box):
    assert segment_intersects_box(Segment(Vec3(0, 0, 0), Vec3(5, 0, 0)), unit_box)


def test_box_rejects_non_positive_extents():
    with pytest.raises(ValueError):
        box(0, 0, 0, 1, 0, 1)


def test_box_yaw_is_wrapped():
    assert box(0, 0, 0, 1, 1, 1, yaw=2.5 * math.pi).yaw == pytest.approx(0.5 * math.pi)


@pytest.mark.parametrize('p,dist,t', [
    (Vec3(5, 3, 0), 3.0, 0.5),
    (Vec3(0, 0, 0), 0.0, 0.0),
    (Vec3(-2, 4, 0), 4.0, -0.2),
])
def test_perpendicular_distance(p, dist, t):
    d, proj = perpendicular_distance(Segment(Vec3(0, 0, 0), Vec3(10, 0, 0)), p)
    assert d == pytest.approx(dist)
    assert proj == pytest.approx(t)


def test_perpendicular_distance_degenerate():
    with pytest.raises(ValueError):
        perpendicular_distance(Segment(Vec3(1, 1, 0), Vec3(1, 1, 0)), Vec3(0, 0, 0))


def test_vehicle_box_and_antennas():
    state = VehicleState('v1', Vec3(10, 20, 0), math.pi / 2, 5.0, (4.0, 2.0, 1.5), True)
    body = vehicle_box(state)
    assert (body.center.x, body.center.y, body.center.z) == pytest.approx((10, 20, 0.75))
    assert body.yaw == pytest.approx(math.pi / 2)

    # Heading north: front-left corner is north-west of the center
    fl, fr, rl, rr = antenna_positions(state)
    assert (fl.x, fl.y, fl.z) == pytest.approx((9, 22, 1.5))
    assert (fr.x, fr.y) == pytest.approx((11, 22))
    assert (rl.x, rl.y) == pytest.approx((9, 18))
    assert (rr.x, rr.y) == pytest.approx((11, 18))


def test_own_antenna_segment_touches_own_box():
    # Antennas sit on the box corners, so links must exclude the owner's body
    state = VehicleState('v1', Vec3(0, 0, 0), 0.0, 0.0, (4.0, 2.0, 1.5), True)
    fl = antenna_positions(state)[0]
    far = Vec3(50, 10, 1.5)
    assert not los_check(fl, far, [('v1', vehicle_box(state))]).clear
    assert los_check(fl, far, [('v1', vehicle_box(state))], exclude={'v1'}).clear


def test_vec3_rejects_nan():
    with pytest.raises(ValueError):
        Vec3(float('nan'), 0, 0)
    assert Vec3.from_array(np.array([1.0, 2.0, 3.0])) == Vec3(1, 2, 3)


# ---- Oracles ---- #
def inside_box(points:np.ndarray, b:OrientedBox, margin:float=0.0) -> np.ndarray:
    rel = points - b.center.as_array()
    c, s = math.cos(b.yaw), math.sin(b.yaw)
    local = np.stack([c * rel[:, 0] + s * rel[:, 1], -s * rel[:, 0] + c * rel[:, 1], rel[:, 2]], axis=1)
    h = np.array([b.half_extents.x, b.half_extents.y, b.half_extents.z]) + margin
    return np.all(np.abs(local) <= h, axis=1)


def aabb_hit(a:Vec3, b:Vec3, lo:tuple, hi:tuple) -> bool:
    # Clip the parameter interval [0, 1] one axis at a time
    t0, t1 = 0.0, 1.0
    for p, q, l, h in zip((a.x, a.y, a.z), (b.x, b.y, b.z), lo, hi):
        d = q - p
        if d == 0:
            if p < l or p > h: return False
            continue
        ta, tb = sorted(((l - p) / d, (h - p) / d))
        t0, t1 = max(t0, ta), min(t1, tb)
        if t0 > t1: return False
    return True


def random_vec(rng, span:float) -> Vec3:
    return Vec3(*(float(x) for x in rng.uniform(-span, span, 3)))


@pytest.fixture
def random_pairs():
    rng = np.random.default_rng(11)
    pairs = []
    for _ in range(1000):
        seg = Segment(random_vec(rng, 5.0), random_vec(rng, 5.0))
        body = OrientedBox(random_vec(rng, 2.0), Vec3(*(float(x) for x in rng.uniform(0.2, 3.0, 3))), float(rng.uniform(-math.pi, math.pi)))
        pairs.append((seg, body))
    return pairs


def test_intersection_matches_dense_sampling(random_pairs):
    n_samples:int = 10_000
    u = np.linspace(0.0, 1.0, n_samples)[:, None]
    hits = 0
    for seg, body in random_pairs:
        a, b = seg.start.as_array(), seg.end.as_array()
        points = a + u * (b - a)
        step = seg.length() / (n_samples - 1)

        if segment_intersects_box(seg, body):
            hits += 1
            # Every hit lies within half a sample spacing of some sample
            assert np.any(inside_box(points, body, margin=step))
        else:
            assert not np.any(inside_box(points, body))
    assert 0 < hits < len(random_pairs)


def test_axis_aligned_matches_aabb_oracle():
    rng = np.random.default_rng(12)
    for _ in range(1000):
        a, b = random_vec(rng, 5.0), random_vec(rng, 5.0)
        c, h = random_vec(rng, 2.0), rng.uniform(0.2, 3.0, 3)
        body = OrientedBox(c, Vec3(*(float(x) for x in h)), 0.0)
        lo = (c.x - h[0], c.y - h[1], c.z - h[2])
        hi = (c.x + h[0], c.y + h[1], c.z + h[2])
        assert segment_intersects_box(Segment(a, b), body) == aabb_hit(a, b, lo, hi)


def test_los_check_symmetry_random():
    rng = np.random.default_rng(13)
    for _ in range(300):
        obstacles = [
            (f'b{i}', OrientedBox(random_vec(rng, 4.0), Vec3(*(float(x) for x in rng.uniform(0.2, 2.0, 3))), float(rng.uniform(-math.pi, math.pi))))
            for i in range(3)
        ]
        a, b = random_vec(rng, 6.0), random_vec(rng, 6.0)
        assert los_check(a, b, obstacles).clear == los_check(b, a, obstacles).clear


# ---- Worked examples ---- #
def test_rotated_box_clips_segment():
    # The lower corner of the 45 degree box dips to y = 1.4 - sqrt(2) < 0
    rotated = box(5, 1.4, 0, 1, 1, 1, yaw=math.pi / 4)
    assert segment_intersects_box(Segment(Vec3(0, 0, 0), Vec3(10, 0, 0)), rotated)


def test_perpendicular_distance_beyond_end():
    assert perpendicular_distance(Segment(Vec3(0, 0, 0), Vec3(10, 0, 0)), Vec3(15, 4, 0)) == pytest.approx((4.0, 1.5))


@pytest.mark.parametrize('heading,expected', [
    (0.0, [(2, 1), (2, -1), (-2, 1), (-2, -1)]),
    (math.pi / 2, [(-1, 2), (1, 2), (-1, -2), (1, -2)]),
    (math.pi, [(-2, -1), (-2, 1), (2, -1), (2, 1)]),
])
def test_antenna_order(heading, expected):
    state = VehicleState('v1', Vec3(0, 0, 0), heading, 0.0, (4.0, 2.0, 1.5), True)
    corners = antenna_positions(state)
    assert [(p.x, p.y) for p in corners] == [pytest.approx(xy, abs=1e-12) for xy in expected]
    assert all(p.z == pytest.approx(1.5) for p in corners)

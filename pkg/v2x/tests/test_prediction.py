import pytest
import sys
import os

import numpy as np

# Modify sys path for util and obj imports
parent_dir:str = os.path.abspath(os.path.join(os.path.dirname(__file__), '..'))
if parent_dir not in sys.path:
    sys.path.insert(0, parent_dir)

# Finish imports
from schemas import (
    Vec3, VehicleState, WorldSnapshot, RsuNode, PredictionFrame, PredictorConfig, HeatmapConfig,
    Scenario, VehicleScript, Waypoint, Point3
)
from utils import predict, compute_nmse, degenerate_frame, heatmap_lookup, heatmap_update, snapshot_at, make_rng, write_json
from objects import ErrorHeatmap


# ---- Setup ---- #
RSU:RsuNode = RsuNode(Vec3(0, 0, 5))
CV:PredictorConfig = PredictorConfig(kind='constant-velocity', history_window=2)


def car(vid:str, x:float, y:float=0.0) -> VehicleState:
    return VehicleState(vid, Vec3(x, y, 0), 0.0, 0.0, (4.5, 1.8, 1.5), True)


def snap(t:int, *vehicles:VehicleState) -> WorldSnapshot:
    return WorldSnapshot(t, tuple(vehicles), RSU, ())


def frame(base_x:float, predicted_x:list[float]) -> PredictionFrame:
    return PredictionFrame(
        base_t=0,
        horizon=len(predicted_x),
        base_positions={'v1': Vec3(base_x, 0, 0)},
        states={'v1': tuple(car('v1', x) for x in predicted_x)}
    )


@pytest.fixture
def moving_scenario():
    # 2 m per timestep along +x for 100 timesteps
    return Scenario(
        rsu=Point3(x=0, y=0, z=5),
        vehicles=[VehicleScript(id='v1', waypoints=[Waypoint(t=0, x=0, y=0), Waypoint(t=100, x=200, y=0)], dims=(4.5, 1.8, 1.5))],
        duration=100,
        timestep_ms=100
    )


@pytest.fixture
def heatmap():
    return ErrorHeatmap(HeatmapConfig(), epsilon_default=1.0)


# ---- Predictor tests ---- #
def test_constant_velocity_stationary():
    history = [snap(0, car('v1', 5.0, 3.0)), snap(1, car('v1', 5.0, 3.0))]
    pred = predict(history, 5, CV, make_rng(0))
    for k in range(1, 6):
        p = pred.state('v1', k).position
        assert (p.x, p.y) == pytest.approx((5.0, 3.0))


def test_constant_velocity_linear():
    history = [snap(0, car('v1', -2.0)), snap(1, car('v1', 0.0))]
    pred = predict(history, 5, CV, make_rng(0))
    assert [pred.state('v1', k).position.x for k in range(1, 6)] == pytest.approx([2, 4, 6, 8, 10])
    assert pred.base_t == 1
    assert not pred.degenerate


def test_constant_velocity_new_vehicle_uses_heading():
    # Only seen once, so its speed and heading drive the extrapolation (20 m/s = 2 m per timestep)
    fresh = VehicleState('v2', Vec3(0, 0, 0), 0.0, 20.0, (4.5, 1.8, 1.5), True)
    pred = predict([snap(0), snap(1, fresh)], 3, CV, make_rng(0), timestep_s=0.1)
    assert [pred.state('v2', k).position.x for k in range(1, 4)] == pytest.approx([2, 4, 6])


def test_constant_velocity_is_exact_on_constant_motion(moving_scenario):
    history = [snapshot_at(moving_scenario, t) for t in range(8, 10)]
    pred = predict(history, 10, CV, make_rng(0))
    truth = [snapshot_at(moving_scenario, t) for t in range(10, 20)]
    assert compute_nmse(pred, truth) == pytest.approx(0.0, abs=1e-12)


def test_predict_needs_history():
    with pytest.raises(ValueError):
        predict([snap(0, car('v1', 0))], 5, CV, make_rng(0))


def test_noisy_oracle_needs_scenario():
    cfg = PredictorConfig(kind='noisy-oracle', history_window=2)
    with pytest.raises(ValueError):
        predict([snap(0, car('v1', 0)), snap(1, car('v1', 2))], 5, cfg, make_rng(0))


def test_noisy_oracle_zero_noise_is_truth(moving_scenario):
    cfg = PredictorConfig(kind='noisy-oracle', nmse_target=0.0)
    history = [snapshot_at(moving_scenario, t) for t in range(10)]
    pred = predict(history, 5, cfg, make_rng(0), moving_scenario.timestep_s, moving_scenario)

    for k in range(1, 6):
        actual = snapshot_at(moving_scenario, 9 + k).vehicle('v1').position
        p = pred.state('v1', k).position
        assert (p.x, p.y) == pytest.approx((actual.x, actual.y))


@pytest.mark.parametrize('target', [0.001, 0.01, 0.1, 1.0])
def test_noisy_oracle_hits_target(moving_scenario, target):
    cfg = PredictorConfig(kind='noisy-oracle', nmse_target=target)
    history = [snapshot_at(moving_scenario, t) for t in range(10)]
    truth = [snapshot_at(moving_scenario, t) for t in range(10, 30)]

    measured = [
        compute_nmse(predict(history, 20, cfg, make_rng(seed, 'predict'), moving_scenario.timestep_s, moving_scenario), truth)
        for seed in range(50)
    ]
    assert np.mean(measured) == pytest.approx(target, rel=0.2)


@pytest.mark.parametrize('k', [1, 5, 20])
def test_noisy_oracle_error_grows_with_displacement(moving_scenario, k):
    # v1 moves 2 m per timestep, so offset k sits 2k m from the base
    cfg = PredictorConfig(kind='noisy-oracle', nmse_target=0.1)
    history = [snapshot_at(moving_scenario, t) for t in range(10)]
    actual = snapshot_at(moving_scenario, 9 + k).vehicle('v1').position

    err_sq = []
    for seed in range(200):
        p = predict(history, 20, cfg, make_rng(seed, 'predict'), moving_scenario.timestep_s, moving_scenario).state('v1', k).position
        err_sq.append((p.x - actual.x) ** 2 + (p.y - actual.y) ** 2)
    assert np.mean(err_sq) == pytest.approx(0.1 * (2.0 * k) ** 2, rel=0.25)


def test_noisy_oracle_parked_vehicle_is_exact():
    scenario = Scenario(
        rsu=Point3(x=0, y=0, z=5),
        vehicles=[
            VehicleScript(id='mover', waypoints=[Waypoint(t=0, x=0, y=0), Waypoint(t=100, x=200, y=0)], dims=(4.5, 1.8, 1.5)),
            VehicleScript(id='parked', waypoints=[Waypoint(t=0, x=30, y=7), Waypoint(t=100, x=30, y=7)], dims=(4.5, 1.8, 1.5))
        ],
        duration=100,
        timestep_ms=100
    )
    cfg = PredictorConfig(kind='noisy-oracle', nmse_target=1.0)
    history = [snapshot_at(scenario, t) for t in range(10)]
    pred = predict(history, 10, cfg, make_rng(2, 'predict'), scenario.timestep_s, scenario)

    for k in range(1, 11):
        p = pred.state('parked', k).position
        assert (p.x, p.y) == (30.0, 7.0)
    assert pred.state('mover', 10).position.x != pytest.approx(38.0)


def test_noisy_oracle_is_reproducible(moving_scenario):
    cfg = PredictorConfig(kind='noisy-oracle', nmse_target=0.1)
    history = [snapshot_at(moving_scenario, t) for t in range(10)]
    a = predict(history, 5, cfg, make_rng(4, 'predict'), moving_scenario.timestep_s, moving_scenario)
    b = predict(history, 5, cfg, make_rng(4, 'predict'), moving_scenario.timestep_s, moving_scenario)
    assert a.states == b.states


def test_degenerate_frame_repeats_current():
    current = snap(3, car('v1', 1.0), car('v2', 7.0))
    pred = degenerate_frame(current, 4)
    assert pred.degenerate
    assert pred.vehicle_ids() == ['v1', 'v2']
    assert all(s.position.x == 7.0 for s in pred.states['v2'])


def test_frame_offset_bounds():
    with pytest.raises(ValueError):
        frame(0.0, [1.0, 2.0]).state('v1', 3)


# ---- NMSE tests ---- #
@pytest.mark.parametrize('predicted,expected', [
    (10.0, 0.0),        # Exact prediction
    (0.0, 1.0),         # Off by the full displacement
    (11.0, 0.01),       # 1 m error on a 10 m displacement
])
def test_compute_nmse(predicted, expected):
    truth = [snap(1, car('v1', 10.0))]
    assert compute_nmse(frame(0.0, [predicted]), truth) == pytest.approx(expected)


def test_compute_nmse_zero_normalizer():
    with pytest.raises(ValueError):
        compute_nmse(frame(0.0, [1.0]), [snap(1, car('v1', 0.0))])


def test_compute_nmse_horizon_mismatch():
    with pytest.raises(ValueError):
        compute_nmse(frame(0.0, [1.0, 2.0]), [snap(1, car('v1', 10.0))])


# ---- Heatmap tests ---- #
def test_heatmap_lookup_direct(heatmap):
    heatmap_update(heatmap, Vec3(11.5, 12, 0), Vec3(10, 12, 0))
    assert heatmap_lookup(heatmap, Vec3(12, 14, 0)) == pytest.approx(1.5)


@pytest.mark.parametrize('pos', [Vec3(1000, 0, 0), Vec3(0, -200.5, 0), Vec3(3, 3, 0)])
def test_heatmap_default(heatmap, pos):
    # Outside the grid, or an unseen cell
    assert heatmap_lookup(heatmap, pos) == 1.0


def test_heatmap_boundary_uses_floor(heatmap):
    # (0, 0) sits on the corner shared by cells (39, 39) and (40, 40)
    assert heatmap.cell_of(Vec3(0, 0, 0)) == (40, 40)
    assert heatmap.cell_of(Vec3(-1e-9, -1e-9, 0)) == (39, 39)
    assert heatmap.cell_of(Vec3(-200, -200, 0)) == (0, 0)
    assert heatmap.cell_of(Vec3(200, 0, 0)) is None


def test_heatmap_first_sample(heatmap):
    heatmap.update(Vec3(2, 0, 0), Vec3(0, 0, 0))
    cell = heatmap.cell_of(Vec3(0, 0, 0))
    assert heatmap.mean_error[cell] == pytest.approx(2.0)
    assert heatmap.sample_count[cell] == 1


def test_heatmap_ema(heatmap):
    heatmap.update(Vec3(1, 0, 0), Vec3(0, 0, 0))
    heatmap.update(Vec3(2, 0, 0), Vec3(0, 0, 0))
    assert heatmap.lookup(Vec3(0, 0, 0)) == pytest.approx(1.1)


def test_heatmap_converges(heatmap):
    heatmap.update(Vec3(5, 0, 0), Vec3(0, 0, 0))
    for _ in range(200):
        heatmap.update(Vec3(0, 2, 0), Vec3(0, 0, 0))
    assert heatmap.lookup(Vec3(0, 0, 0)) == pytest.approx(2.0, abs=1e-6)


def test_heatmap_update_outside_is_noop(heatmap):
    heatmap.update(Vec3(500, 500, 0), Vec3(400, 400, 0))
    assert heatmap.sample_count.sum() == 0


def test_heatmap_never_negative(heatmap):
    rng = make_rng(9)
    for _ in range(500):
        actual = Vec3(float(rng.uniform(-50, 50)), float(rng.uniform(-50, 50)), 0)
        heatmap.update(actual + Vec3(float(rng.normal()), float(rng.normal()), 0), actual)
    assert np.all(heatmap.mean_error >= 0)


def test_heatmap_lookup_many_matches_lookup(heatmap):
    heatmap.update(Vec3(3, 0, 0), Vec3(0, 0, 0))
    heatmap.update(Vec3(-20, 4, 0), Vec3(-20, 0, 0))
    points = [Vec3(0, 0, 0), Vec3(-20, 0, 0), Vec3(50, 50, 0), Vec3(900, 0, 0)]
    many = heatmap.lookup_many(np.array([[p.x, p.y] for p in points]))
    assert many.tolist() == pytest.approx([heatmap.lookup(p) for p in points])


def test_heatmap_copy_is_independent(heatmap):
    heatmap.update(Vec3(1, 0, 0), Vec3(0, 0, 0))
    clone = heatmap.copy()
    heatmap.update(Vec3(5, 0, 0), Vec3(0, 0, 0))
    assert clone.lookup(Vec3(0, 0, 0)) == pytest.approx(1.0)


def test_heatmap_save_and_load(heatmap, tmp_path):
    heatmap.update(Vec3(1.5, 0, 0), Vec3(0, 0, 0))
    path = str(tmp_path / 'heatmap.json')
    heatmap.save(path)

    restored = ErrorHeatmap(HeatmapConfig(init_path=path))
    assert restored.lookup(Vec3(0, 0, 0)) == pytest.approx(1.5)
    assert np.array_equal(restored.sample_count, heatmap.sample_count)


def test_heatmap_load_rejects_other_grid(heatmap, tmp_path):
    path = str(tmp_path / 'heatmap.json')
    ErrorHeatmap(HeatmapConfig(cell_size=10.0, nx=40, ny=40)).save(path)
    with pytest.raises(ValueError):
        heatmap.load(path)


def test_heatmap_load_rejects_negative(heatmap, tmp_path):
    data = heatmap.to_dict()
    data['mean_error'][0][0] = -1.0
    path = str(tmp_path / 'heatmap.json')
    write_json(path, data)
    with pytest.raises(ValueError):
        heatmap.load(path)

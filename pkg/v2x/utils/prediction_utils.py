import math
import numpy as np

from typing import TYPE_CHECKING

from schemas import Vec3, VehicleState, WorldSnapshot, PredictionFrame, PredictorConfig, Scenario, VehicleScript
from .mobility_utils import vehicle_state_at

if TYPE_CHECKING:
    from objects import ErrorHeatmap


# ---- Predictors ---- #

def degenerate_frame(current:WorldSnapshot, horizon:int) -> PredictionFrame:
    """Warm-up prediction: every vehicle stays exactly where it is for the whole horizon."""
    return PredictionFrame(
        base_t=current.t,
        horizon=horizon,
        base_positions={v.id: v.position for v in current.vehicles},
        states={v.id: tuple([v] * horizon) for v in current.vehicles},
        degenerate=True
    )


def _constant_velocity(history:list[WorldSnapshot], horizon:int, timestep_s:float) -> dict[str, tuple[VehicleState, ...]]:
    """Extrapolates every vehicle of the latest snapshot from its last two observed positions."""
    last:WorldSnapshot = history[-1]
    prev:WorldSnapshot = history[-2]
    states:dict[str, tuple[VehicleState, ...]] = {}

    for v in last.vehicles:
        before:VehicleState|None = prev.vehicle(v.id)

        # Velocity in meters per timestep
        if before is not None and last.t != prev.t:
            steps:float = float(last.t - prev.t)
            vx, vy = (v.position.x - before.position.x) / steps, (v.position.y - before.position.y) / steps
        else:
            per_step:float = v.speed * timestep_s
            vx, vy = per_step * math.cos(v.heading), per_step * math.sin(v.heading)

        moving:bool = vx * vx + vy * vy > 0
        heading:float = math.atan2(vy, vx) if moving else v.heading
        speed:float = math.hypot(vx, vy) / timestep_s

        states[v.id] = tuple(
            VehicleState(
                id=v.id,
                position=Vec3(v.position.x + k * vx, v.position.y + k * vy, v.position.z),
                heading=heading,
                speed=speed,
                dims=v.dims,
                connected=v.connected
            )
            for k in range(1, horizon + 1)
        )
    return states


def _true_future(scenario:Scenario, current:WorldSnapshot, horizon:int) -> dict[str, list[VehicleState]]:
    """Ground-truth states for offsets 1..horizon of every vehicle present now (extrapolated past script ends)."""
    scripts:dict[str, VehicleScript] = {s.id: s for s in scenario.vehicles}
    future:dict[str, list[VehicleState]] = {}

    for v in current.vehicles:
        script:VehicleScript|None = scripts.get(v.id)
        if script is None:
            raise KeyError(f'Vehicle "{v.id}" is not part of the scenario.')
        future[v.id] = [
            vehicle_state_at(script, current.t + k, scenario.timestep_s, extrapolate=True)
            for k in range(1, horizon + 1)
        ]
    return future


def _noisy_oracle(scenario:Scenario, current:WorldSnapshot, horizon:int, nmse_target:float, rng:np.random.Generator) -> dict[str, tuple[VehicleState, ...]]:
    """True future plus isotropic Gaussian position noise calibrated so the expected NMSE equals nmse_target.

    The noise of vehicle v at offset k has per-axis std sqrt(nmse_target * |truth_vk - base_v|^2 / 2), so near
    offsets stay accurate and the error grows with the distance travelled.
    """
    future:dict[str, list[VehicleState]] = _true_future(scenario, current, horizon)
    ids:list[str] = sorted(future)
    if not ids: return {}

    base:np.ndarray = np.array([[current.vehicle(i).position.x, current.vehicle(i).position.y] for i in ids])
    truth:np.ndarray = np.array([[[s.position.x, s.position.y] for s in future[i]] for i in ids])     # (V, H, 2)
    disp_sq:np.ndarray = np.sum((truth - base[:, None, :]) ** 2, axis=2)                               # (V, H)

    sigma:np.ndarray = np.sqrt(nmse_target * disp_sq / 2.0)
    noise:np.ndarray = rng.standard_normal(size=truth.shape) * sigma[:, :, None]

    states:dict[str, tuple[VehicleState, ...]] = {}
    for vi, vid in enumerate(ids):
        states[vid] = tuple(
            VehicleState(
                id=s.id,
                position=Vec3(float(truth[vi, k, 0] + noise[vi, k, 0]), float(truth[vi, k, 1] + noise[vi, k, 1]), s.position.z),
                heading=s.heading,
                speed=s.speed,
                dims=s.dims,
                connected=s.connected
            )
            for k, s in enumerate(future[vid])
        )
    return states


def predict(history:list[WorldSnapshot], horizon:int, cfg:PredictorConfig, rng:np.random.Generator, timestep_s:float=0.1, scenario:Scenario|None=None) -> PredictionFrame:
    """Forecasts every vehicle of the latest snapshot over the next horizon timesteps.

        Parameters:
            history (list[WorldSnapshot]): the last cfg.history_window snapshots, oldest first.
            horizon (int): number of future timesteps to predict, >= 1.
            cfg (PredictorConfig): predictor kind and settings.
            rng (np.random.Generator): noise stream (noisy-oracle only).
            timestep_s (float, optional): timestep length in seconds. Defaults to 0.1.
            scenario (Scenario, optional): ground truth, required by the noisy-oracle. Defaults to None.

        Returns:
            PredictionFrame: per-vehicle predictions for base_t + 1 .. base_t + horizon.
    """
    if horizon < 1:
        raise ValueError(f'Prediction horizon must be >= 1, got {horizon}.')
    if len(history) < cfg.history_window:
        raise ValueError(f'Prediction needs {cfg.history_window} snapshots of history, got {len(history)}.')

    history = history[-cfg.history_window:]
    current:WorldSnapshot = history[-1]

    match cfg.kind:
        case 'constant-velocity':
            states = _constant_velocity(history, horizon, timestep_s)
        case 'noisy-oracle':
            if scenario is None: raise ValueError('The noisy-oracle predictor needs the ground-truth scenario.')
            states = _noisy_oracle(scenario, current, horizon, cfg.nmse_target, rng)
        case _:
            raise ValueError(f'Unknown predictor kind "{cfg.kind}".')

    return PredictionFrame(
        base_t=current.t,
        horizon=horizon,
        base_positions={v.id: v.position for v in current.vehicles},
        states=states
    )


def compute_nmse(pred:PredictionFrame, truth:list[WorldSnapshot]) -> float:
    """Normalized mean squared position error of a prediction frame.

        Parameters:
            pred (PredictionFrame): the prediction.
            truth (list[WorldSnapshot]): true snapshots for base_t + 1 .. base_t + horizon.

        Returns:
            float: mean squared xy error divided by the mean squared xy displacement of the truth from the base positions.
    """
    if len(truth) != pred.horizon:
        raise ValueError(f'Expected {pred.horizon} truth snapshots, got {len(truth)}.')

    err_sq:list[float] = []
    disp_sq:list[float] = []
    for k, snap in enumerate(truth, start=1):
        for vid in pred.vehicle_ids():
            actual:VehicleState|None = snap.vehicle(vid)
            if actual is None: continue

            p:Vec3 = pred.state(vid, k).position
            b:Vec3 = pred.base_positions[vid]
            err_sq.append((p.x - actual.position.x) ** 2 + (p.y - actual.position.y) ** 2)
            disp_sq.append((actual.position.x - b.x) ** 2 + (actual.position.y - b.y) ** 2)

    if not err_sq:
        raise ValueError('No vehicle of the prediction frame appears in the truth snapshots.')

    normalizer:float = float(np.mean(disp_sq))
    if normalizer <= 0:
        raise ValueError('NMSE is undefined: every vehicle is stationary (zero normalizer).')
    return float(np.mean(err_sq)) / normalizer


# ---- Heatmap access ---- #

def heatmap_lookup(heatmap:'ErrorHeatmap', pos:Vec3) -> float:
    """Prediction error (meters) recorded for the cell containing pos, or the default for unseen/outside cells."""
    return heatmap.lookup(pos)


def heatmap_update(heatmap:'ErrorHeatmap', predicted_pos:Vec3, actual_pos:Vec3) -> None:
    """Feeds one (predicted, actual) pair into the cell containing the actual position."""
    heatmap.update(predicted_pos, actual_pos)

import math
import numpy as np

from schemas import Vec3, HeatmapConfig
from utils import read_json, write_json


class ErrorHeatmap:

    origin:tuple[float, float]      # (x, y) of the grid's lower-left corner, meters
    cell_size:float                 # meters
    shape:tuple[int, int]           # (nx, ny) cells
    learning_rate:float             # EMA weight of a new observation
    epsilon_default:float           # meters, returned for unseen or out-of-grid cells
    mean_error:np.ndarray           # (nx, ny) running mean position error, meters
    sample_count:np.ndarray         # (nx, ny) observations per cell


    def __init__(self, cfg:HeatmapConfig, epsilon_default:float=1.0):
        self.origin = (cfg.origin_x, cfg.origin_y)
        self.cell_size = cfg.cell_size
        self.shape = (cfg.nx, cfg.ny)
        self.learning_rate = cfg.learning_rate
        self.epsilon_default = epsilon_default
        self.mean_error = np.zeros(self.shape, dtype=np.float64)
        self.sample_count = np.zeros(self.shape, dtype=np.int64)

        # Start from a previous dump if one is configured
        if cfg.init_path:
            self.load(cfg.init_path)


    def cell_of(self, pos:Vec3) -> tuple[int, int]|None:
        """Returns the (i, j) cell containing pos (floor convention on boundaries), or None outside the grid."""
        i:int = math.floor((pos.x - self.origin[0]) / self.cell_size)
        j:int = math.floor((pos.y - self.origin[1]) / self.cell_size)
        if 0 <= i < self.shape[0] and 0 <= j < self.shape[1]: return i, j
        return None


    def lookup(self, pos:Vec3) -> float:
        """Returns the mean prediction error of the cell containing pos (epsilon_default if unseen or outside)."""
        cell = self.cell_of(pos)
        if cell is None or self.sample_count[cell] == 0: return self.epsilon_default
        return float(self.mean_error[cell])


    def lookup_many(self, xy:np.ndarray) -> np.ndarray:
        """Vectorized lookup for an (N,2) or (N,3) array of positions."""
        xy = np.atleast_2d(np.asarray(xy, dtype=np.float64))
        out:np.ndarray = np.full(xy.shape[0], self.epsilon_default)
        if xy.shape[0] == 0: return out

        i = np.floor((xy[:, 0] - self.origin[0]) / self.cell_size).astype(np.int64)
        j = np.floor((xy[:, 1] - self.origin[1]) / self.cell_size).astype(np.int64)
        inside = (i >= 0) & (i < self.shape[0]) & (j >= 0) & (j < self.shape[1])

        seen = np.zeros_like(inside)
        seen[inside] = self.sample_count[i[inside], j[inside]] > 0
        out[seen] = self.mean_error[i[seen], j[seen]]
        return out


    def update(self, predicted_pos:Vec3, actual_pos:Vec3) -> None:
        """Folds one observed prediction error into the cell containing the actual position (no-op outside the grid)."""
        cell = self.cell_of(actual_pos)
        if cell is None: return

        error:float = math.hypot(predicted_pos.x - actual_pos.x, predicted_pos.y - actual_pos.y)

        # The first sample sets the cell, later ones are blended in
        if self.sample_count[cell] == 0:
            self.mean_error[cell] = error
        else:
            self.mean_error[cell] = (1.0 - self.learning_rate) * self.mean_error[cell] + self.learning_rate * error
        self.sample_count[cell] += 1


    def copy(self) -> 'ErrorHeatmap':
        """Independent snapshot of the current grid (later updates do not reach it)."""
        clone:ErrorHeatmap = ErrorHeatmap.__new__(ErrorHeatmap)
        clone.origin = self.origin
        clone.cell_size = self.cell_size
        clone.shape = self.shape
        clone.learning_rate = self.learning_rate
        clone.epsilon_default = self.epsilon_default
        clone.mean_error = self.mean_error.copy()
        clone.sample_count = self.sample_count.copy()
        return clone


    def to_dict(self) -> dict:
        return {
            'origin': list(self.origin),
            'cell_size': self.cell_size,
            'shape': list(self.shape),
            'epsilon_default': self.epsilon_default,
            'learning_rate': self.learning_rate,
            'mean_error': self.mean_error.tolist(),
            'sample_count': self.sample_count.tolist()
        }


    def save(self, path:str) -> None:
        """Writes the heatmap as a JSON grid dump."""
        write_json(path, self.to_dict())


    def load(self, path:str) -> None:
        """Replaces the grid contents with the dump at the given path; the dump's grid must match this heatmap."""
        data:dict = read_json(path)

        if tuple(data['shape']) != self.shape or float(data['cell_size']) != self.cell_size or tuple(data['origin']) != self.origin:
            raise ValueError(
                f'Heatmap dump "{path}" has grid origin={data["origin"]} cell_size={data["cell_size"]} shape={data["shape"]}, '
                f'expected origin={list(self.origin)} cell_size={self.cell_size} shape={list(self.shape)}.'
            )

        mean_error:np.ndarray = np.asarray(data['mean_error'], dtype=np.float64)
        if np.any(mean_error < 0):
            raise ValueError(f'Heatmap dump "{path}" contains negative errors.')

        self.mean_error = mean_error.reshape(self.shape)
        self.sample_count = np.asarray(data['sample_count'], dtype=np.int64).reshape(self.shape)

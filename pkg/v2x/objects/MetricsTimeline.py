import os
import pandas as pd

from utils import write_json, now_iso

from .MetricsAccumulator import MetricsAccumulator


TIMELINE_COLUMNS:list[str] = ['t', 'method', 'seed', 'config_hash', 'cv_successful', 'cv_total', 'mean_throughput']
FLOAT_FORMAT:str = '%.10g'


class MetricsTimeline:

    acc:MetricsAccumulator      # Per-timestep counts
    method:str
    seed:int
    config_hash:str             # SHA-256 of the canonical run config
    config:dict                 # Run config echo


    def __init__(self, acc:MetricsAccumulator, method:str, seed:int, config_hash:str, config:dict):
        self.acc = acc
        self.method = method
        self.seed = seed
        self.config_hash = config_hash
        self.config = config


    @property
    def connectivity(self) -> float|None:
        return self.acc.connectivity()


    @property
    def mean_throughput(self) -> float|None:
        return self.acc.overall_throughput()


    def to_dataframe(self) -> pd.DataFrame:
        """One row per timestep in the fixed column order."""
        n:int = len(self.acc.t)
        return pd.DataFrame({
            't': self.acc.t,
            'method': [self.method] * n,
            'seed': [self.seed] * n,
            'config_hash': [self.config_hash] * n,
            'cv_successful': self.acc.cv_successful,
            'cv_total': self.acc.cv_total,
            'mean_throughput': pd.array(self.acc.mean_throughput, dtype='Float64')
        }, columns=TIMELINE_COLUMNS)


    def summary(self, test_mode:bool=False) -> dict:
        """Run summary; the generation time is only added outside test mode."""
        summary:dict = {
            'connectivity': self.connectivity,
            'mean_throughput': self.mean_throughput,
            'cv_successful_total': self.acc.cv_successful_sum,
            'cv_total_total': self.acc.cv_total_sum,
            'timesteps': len(self.acc.t),
            'method': self.method,
            'seed': self.seed,
            'config_hash': self.config_hash,
            'config': self.config
        }
        if not test_mode:
            summary['metadata'] = {'generated_at': now_iso()}
        return summary


    def write(self, out_dir:str, test_mode:bool=False) -> tuple[str, str]:
        """Writes timeline.csv and summary.json into out_dir and returns both paths."""
        os.makedirs(out_dir, exist_ok=True)
        csv_path:str = os.path.join(out_dir, 'timeline.csv')
        json_path:str = os.path.join(out_dir, 'summary.json')

        self.to_dataframe().to_csv(csv_path, index=False, float_format=FLOAT_FORMAT, lineterminator='\n')
        write_json(json_path, self.summary(test_mode))
        return csv_path, json_path

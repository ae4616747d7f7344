import os
import pandas as pd

from tqdm import tqdm
from multiprocessing import Pool

from schemas import SweepSpec, RunConfig, Scenario, ScenarioConfig
from utils import print_log, set_log_options, log_options, log_verbose, read_json, config_hash, generate_intersection_scenario

from .SimulationEngine import SimulationEngine


SWEEP_COLUMNS:list[str] = ['parameter', 'value', 'seed', 'method', 'connectivity', 'mean_throughput', 'config_hash', 'error']
SUMMARY_COLUMNS:list[str] = [
    'parameter', 'value', 'method', 'runs',
    'connectivity_mean', 'connectivity_std', 'mean_throughput_mean', 'mean_throughput_std'
]


def _task_config(task:dict) -> RunConfig:
    """The run config of one sweep point: the base config with the swept value and the seed applied."""
    cfg:dict = dict(task['base_config'])
    cfg['seed'] = task['seed']
    if task['method'] is not None: cfg['method'] = task['method']

    value = task['value']
    match task['parameter']:
        case 'lambda': cfg['routing'] = {**cfg['routing'], 'lambda': float(value)}
        case 'nmse': cfg['predictor'] = {**cfg['predictor'], 'nmse_target': float(value)}
        case 'n_routes': cfg['routing'] = {**cfg['routing'], 'n_routes': int(value)}
        case 'method': cfg['method'] = value
        case 'n_vehicles' | 'connected_fraction': pass     # scenario side

    return RunConfig.model_validate(cfg)


def _task_scenario(task:dict) -> Scenario:
    """The scenario of one sweep point: generated from the seed, or the fixed scenario file."""
    if task['scenario_path'] is not None:
        return Scenario.model_validate(read_json(task['scenario_path']))

    scenario_cfg:dict = dict(task['scenario'])
    match task['parameter']:
        case 'n_vehicles': scenario_cfg['n_vehicles'] = int(task['value'])
        case 'connected_fraction': scenario_cfg['connected_fraction'] = float(task['value'])
    return generate_intersection_scenario(ScenarioConfig.model_validate(scenario_cfg), task['seed'])


def run_sweep_task(task:dict) -> dict:
    """Runs one sweep point and returns its CSV row; any failure ends up in the "error" column."""
    verbose, timestamps = log_options()
    set_log_options(verbose=False, timestamps=timestamps)

    row:dict = {
        'parameter': task['parameter'],
        'value': task['value'],
        'seed': task['seed'],
        'method': task['method'] or task['base_config']['method'],
        'connectivity': None,
        'mean_throughput': None,
        'config_hash': None,
        'error': None
    }

    try:
        cfg:RunConfig = _task_config(task)
        row['method'] = cfg.method
        row['config_hash'] = config_hash(cfg.to_json_dict())

        timeline = SimulationEngine(_task_scenario(task), cfg).run()
        row['connectivity'] = timeline.connectivity
        row['mean_throughput'] = timeline.mean_throughput

    except Exception as e:
        row['error'] = f'{type(e).__name__}: {e}'

    finally:
        set_log_options(verbose=verbose, timestamps=timestamps)

    return row


class SweepRunner:

    spec:SweepSpec              # What to sweep
    base_config:RunConfig       # Everything not swept
    jobs:int                    # Worker processes (1 = run inline)
    progress:bool               # Show a tqdm bar over sweep points
    rows:list[dict]             # One per finished sweep point, in task order


    def __init__(self, spec:SweepSpec, base_config:RunConfig, jobs:int=1, progress:bool=False):
        if jobs < 1:
            raise ValueError(f'jobs must be >= 1, got {jobs}.')
        self.spec = spec
        self.base_config = base_config
        self.jobs = jobs
        self.progress = progress
        self.rows = []


    def tasks(self) -> list[dict]:
        """Every (value, method, seed) point in a fixed order: values outermost, seeds innermost."""
        base:dict = self.base_config.to_json_dict()
        scenario:dict|None = self.spec.scenario.model_dump(mode='json') if self.spec.scenario is not None else None
        methods:list = list(self.spec.methods) if self.spec.methods else [None]

        return [
            {
                'parameter': self.spec.parameter,
                'value': value,
                'method': method,
                'seed': self.spec.base_seed + rep,
                'base_config': base,
                'scenario': scenario,
                'scenario_path': self.spec.scenario_path
            }
            for value in self.spec.values
            for method in methods
            for rep in range(self.spec.repetitions)
        ]


    def run(self) -> pd.DataFrame:
        """Runs every sweep point (in parallel when jobs > 1) and returns the long-format results."""
        tasks:list[dict] = self.tasks()
        print_log('INFO', 'SweepRunner.run()', f'Sweeping "{self.spec.parameter}" over {len(tasks)} runs with {self.jobs} job(s).')

        bar = tqdm(total=len(tasks), desc=f'Sweeping {self.spec.parameter}', disable=not (self.progress and log_verbose()))

        # imap keeps task order, so the output does not depend on the worker count
        if self.jobs == 1:
            for task in tasks:
                self.rows.append(run_sweep_task(task))
                bar.update(1)
        else:
            with Pool(self.jobs) as p:
                for row in p.imap(run_sweep_task, tasks):
                    self.rows.append(row)
                    bar.update(1)
        bar.close()

        failed:list[dict] = [r for r in self.rows if r['error'] is not None]
        for r in failed:
            print_log('WARN', 'SweepRunner.run()', f'{r["parameter"]}={r["value"]} seed={r["seed"]} method={r["method"]} failed: {r["error"]}')

        return self.results()


    def results(self) -> pd.DataFrame:
        df:pd.DataFrame = pd.DataFrame(self.rows, columns=SWEEP_COLUMNS)
        df['connectivity'] = df['connectivity'].astype('float64')
        df['mean_throughput'] = df['mean_throughput'].astype('float64')
        return df


    def summary(self) -> pd.DataFrame:
        """Mean and standard deviation over seeds per (value, method), failed runs left out."""
        df:pd.DataFrame = self.results()
        ok:pd.DataFrame = df[df['error'].isna()].copy()
        ok['value_key'] = ok['value'].astype(str)

        rows:list[dict] = []
        for (value_key, method), group in ok.groupby(['value_key', 'method'], sort=False):
            rows.append({
                'parameter': self.spec.parameter,
                'value': group['value'].iloc[0],
                'method': method,
                'runs': len(group),
                'connectivity_mean': group['connectivity'].mean(),
                'connectivity_std': group['connectivity'].std(),
                'mean_throughput_mean': group['mean_throughput'].mean(),
                'mean_throughput_std': group['mean_throughput'].std()
            })
        return pd.DataFrame(rows, columns=SUMMARY_COLUMNS)


    def all_failed(self) -> bool:
        return bool(self.rows) and all(r['error'] is not None for r in self.rows)


    def write(self, out_dir:str) -> tuple[str, str]:
        """Writes sweep.csv and sweep_summary.csv into out_dir and returns both paths."""
        os.makedirs(out_dir, exist_ok=True)
        csv_path:str = os.path.join(out_dir, 'sweep.csv')
        summary_path:str = os.path.join(out_dir, 'sweep_summary.csv')

        self.results().to_csv(csv_path, index=False, float_format='%.10g', lineterminator='\n')
        self.summary().to_csv(summary_path, index=False, float_format='%.10g', lineterminator='\n')
        return csv_path, summary_path

"""
app.py

DESC: command line entry point of the V2X simulator (run, sweep, gen-scenario).
"""

import os
import click
import orjson

from configparser import ConfigParser
from pydantic import BaseModel, ValidationError

from schemas import RunConfig, Scenario, ScenarioConfig, SweepSpec
from objects import SimulationEngine, SweepRunner
from utils import print_log, set_log_options, read_json, write_json, generate_intersection_scenario


# ---- Config ---- #
APP_DIR:str = os.path.dirname(os.path.abspath(__file__))

config:ConfigParser = ConfigParser()
config.read(os.path.join(APP_DIR, 'config', 'config.conf'))

OUT_DIR:str = config.get('paths', 'OUT_DIR', fallback='out')
RUN_CONFIG:str = os.path.join(APP_DIR, config.get('paths', 'RUN_CONFIG', fallback='config/run_default.json'))
SCENARIO_CONFIG:str = os.path.join(APP_DIR, config.get('paths', 'SCENARIO_CONFIG', fallback='config/scenario_default.json'))
JOBS:int = config.getint('sweep', 'JOBS', fallback=1)
VERBOSE:bool = config.getboolean('logging', 'VERBOSE', fallback=True)


# ---- Helpers ---- #

def load_document(ctx:click.Context, model:type[BaseModel], path:str, what:str) -> BaseModel:
    """Reads and validates a JSON document; exits with code 2 naming the offending field on failure."""
    try:
        return model.model_validate(read_json(path))

    except orjson.JSONDecodeError as e:
        print_log('ERROR', 'load_document()', f'{what} "{path}" is not valid JSON: {e}')
        ctx.exit(2)

    except ValidationError as e:
        for err in e.errors():
            field:str = '.'.join(str(p) for p in err['loc']) or '<root>'
            print_log('ERROR', 'load_document()', f'{what} "{path}": field \'{field}\': {err["msg"]}')
        ctx.exit(2)


def setup_logging(verbose:bool, test_mode:bool) -> None:
    set_log_options(verbose=verbose, timestamps=not test_mode)


# ---- CLI ---- #

@click.group()
def cli():
    """Blockage-aware multi-hop mmWave V2X routing simulator."""


@cli.command('run')
@click.option('--scenario', 'scenario_path', required=True, type=click.Path(exists=True, dir_okay=False), help='Scenario JSON.')
@click.option('--config', 'config_path', default=RUN_CONFIG, show_default=True, type=click.Path(exists=True, dir_okay=False), help='Run config JSON.')
@click.option('--seed', type=int, default=None, help='Master seed (overrides the config).')
@click.option('--out', 'out_dir', default=OUT_DIR, show_default=True, type=click.Path(file_okay=False), help='Output directory.')
@click.option('--test-mode', is_flag=True, help='Deterministic output: no timestamps, no progress bars, no generation time.')
@click.option('--dump-heatmap', is_flag=True, help='Also write the final prediction error heatmap.')
@click.option('--dump-graphs', is_flag=True, help='Also write the weighted graph of every routing tick.')
@click.option('--verbose/--quiet', default=VERBOSE, help='Show INFO lines.')
@click.pass_context
def cmd_run(ctx:click.Context, scenario_path:str, config_path:str, seed:int|None, out_dir:str, test_mode:bool, dump_heatmap:bool, dump_graphs:bool, verbose:bool):
    """Simulates one scenario with one method and writes timeline.csv and summary.json."""
    setup_logging(verbose, test_mode)

    scenario:Scenario = load_document(ctx, Scenario, scenario_path, 'Scenario')
    cfg:RunConfig = load_document(ctx, RunConfig, config_path, 'Run config')
    if seed is not None:
        cfg = cfg.model_copy(update={'seed': seed})

    try:
        engine:SimulationEngine = SimulationEngine(
            scenario, cfg,
            graph_dir=os.path.join(out_dir, 'graphs') if dump_graphs else None,
            progress=not test_mode
        )
        timeline = engine.run()

    except (ValueError, KeyError, OSError) as e:
        print_log('ERROR', 'cmd_run()', f'{type(e).__name__}: {e}')
        ctx.exit(1)

    csv_path, json_path = timeline.write(out_dir, test_mode=test_mode)
    if dump_heatmap:
        engine.heatmap.save(os.path.join(out_dir, 'heatmap.json'))

    conn = timeline.connectivity
    click.echo(f'connectivity={"undefined" if conn is None else f"{conn:.6f}"} cv_total={timeline.acc.cv_total_sum}')
    print_log('SUCCESS', 'cmd_run()', f'Wrote "{csv_path}" and "{json_path}".')


@cli.command('sweep')
@click.option('--spec', 'spec_path', required=True, type=click.Path(exists=True, dir_okay=False), help='Sweep spec JSON.')
@click.option('--config', 'config_path', default=RUN_CONFIG, show_default=True, type=click.Path(exists=True, dir_okay=False), help='Base run config JSON.')
@click.option('--out', 'out_dir', default=OUT_DIR, show_default=True, type=click.Path(file_okay=False), help='Output directory.')
@click.option('--jobs', type=click.IntRange(min=1), default=JOBS, show_default=True, help='Worker processes.')
@click.option('--test-mode', is_flag=True, help='Deterministic output: no timestamps, no progress bars.')
@click.option('--verbose/--quiet', default=VERBOSE, help='Show INFO lines.')
@click.pass_context
def cmd_sweep(ctx:click.Context, spec_path:str, config_path:str, out_dir:str, jobs:int, test_mode:bool, verbose:bool):
    """Runs the cross product of swept values, methods and seeds; writes sweep.csv and sweep_summary.csv."""
    setup_logging(verbose, test_mode)

    spec:SweepSpec = load_document(ctx, SweepSpec, spec_path, 'Sweep spec')
    base:RunConfig = load_document(ctx, RunConfig, config_path, 'Run config')

    # A relative scenario_path is taken relative to the spec file
    if spec.scenario_path is not None and not os.path.isabs(spec.scenario_path):
        spec = spec.model_copy(update={'scenario_path': os.path.join(os.path.dirname(os.path.abspath(spec_path)), spec.scenario_path)})

    runner:SweepRunner = SweepRunner(spec, base, jobs=jobs, progress=not test_mode)
    runner.run()
    csv_path, summary_path = runner.write(out_dir)

    click.echo(f'runs={len(runner.rows)} failed={sum(1 for r in runner.rows if r["error"] is not None)}')
    if runner.all_failed():
        print_log('ERROR', 'cmd_sweep()', 'Every run of the sweep failed.')
        ctx.exit(1)
    print_log('SUCCESS', 'cmd_sweep()', f'Wrote "{csv_path}" and "{summary_path}".')


@cli.command('gen-scenario')
@click.option('--config', 'config_path', default=SCENARIO_CONFIG, show_default=True, type=click.Path(exists=True, dir_okay=False), help='Scenario config JSON.')
@click.option('--seed', type=int, default=0, show_default=True, help='Generator seed.')
@click.option('--out', 'out_path', required=True, type=click.Path(dir_okay=False), help='Scenario JSON to write.')
@click.option('--test-mode', is_flag=True, help='Deterministic output: no timestamps.')
@click.pass_context
def cmd_gen_scenario(ctx:click.Context, config_path:str, seed:int, out_path:str, test_mode:bool):
    """Generates an intersection scenario and echoes its vehicle counts."""
    setup_logging(VERBOSE, test_mode)
    scenario_cfg:ScenarioConfig = load_document(ctx, ScenarioConfig, config_path, 'Scenario config')

    try:
        scenario:Scenario = generate_intersection_scenario(scenario_cfg, seed)
    except ValueError as e:
        print_log('ERROR', 'cmd_gen_scenario()', str(e))
        ctx.exit(1)

    write_json(out_path, scenario.model_dump(mode='json'))
    connected, unconnected = scenario.counts()
    click.echo(f'vehicles={connected + unconnected} connected={connected} unconnected={unconnected}')
    print_log('SUCCESS', 'cmd_gen_scenario()', f'Wrote "{out_path}".')


# ---- Run ---- #
if __name__ == '__main__':
    cli()

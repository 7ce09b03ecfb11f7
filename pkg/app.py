"""
Riga di comando del solutore ES-BGK semi-Lagrangiano e dei suoi benchmark
"""
import argparse
import logging
import os
import sys
from typing import Dict, List, Optional

import pandas as pd

from src.benchmark import (convergence_suite, emit_fluid_profile, fluid_limit_trend, lax_sweep,
                           projection_ablation, run_problem)
from src.config import (BOUNDARY_CONDITIONS, CONVERGENCE_EPS, CONVERGENCE_N_X, CONVERGENCE_SCHEMES,
                        CSV_FLOAT_FORMAT, FLUID_LIMIT_RATIO, LAX_EPS_SWEEP, PROBLEMS, RECONSTRUCTIONS,
                        RIEMANN_EPS_SWEEP, SCHEMES, TAU_LAWS, WEIGHT_MODES, ProblemConfig, get_log_level)
from src.exceptions import SolverError
from src.nse_reference import nse_run
from src.utils import create_metrics_table, ensure_dir, export_to_excel

logger = logging.getLogger(__name__)

# Campi di ProblemConfig esposti come opzioni
CONFIG_FLAGS = ('eps', 'nu', 'tau_law', 'tau_coefficient', 'x_left', 'x_right', 'n_x', 'n_v',
                'v_max', 'd_v', 'bc', 'cfl', 't_final', 'scheme', 'reconstruction', 'weight_mode',
                'sigma', 'left_state', 'right_state', 'interface', 'out_dir', 'tag')


def add_config_arguments(parser: argparse.ArgumentParser) -> None:
    """Opzioni che rispecchiano i campi di ProblemConfig (None = preset del problema)"""
    parser.add_argument('--config', help="JSON configuration file (flags override it)")
    parser.add_argument('--save-config', help="Write the resolved configuration to this JSON file")
    parser.add_argument('--eps', type=float, help="Knudsen number")
    parser.add_argument('--nu', type=float, help="ES-BGK parameter nu")
    parser.add_argument('--tau-law', choices=TAU_LAWS)
    parser.add_argument('--tau-coefficient', type=float)
    parser.add_argument('--x-left', type=float)
    parser.add_argument('--x-right', type=float)
    parser.add_argument('--n-x', type=int, help="Spatial cells")
    parser.add_argument('--n-v', type=int, help="Velocity intervals per axis")
    parser.add_argument('--v-max', type=float)
    parser.add_argument('--d-v', type=int, choices=(2, 3))
    parser.add_argument('--bc', choices=BOUNDARY_CONDITIONS)
    parser.add_argument('--cfl', type=float)
    parser.add_argument('--t-final', type=float)
    parser.add_argument('--scheme', choices=SCHEMES)
    parser.add_argument('--reconstruction', choices=RECONSTRUCTIONS)
    parser.add_argument('--projection', choices=('on', 'off'), help="Moment projection switch")
    parser.add_argument('--weight-mode', choices=WEIGHT_MODES)
    parser.add_argument('--sigma', type=float, help="Accuracy profile parameter")
    parser.add_argument('--left-state', type=float, nargs='+', help="rho u_1..u_d T")
    parser.add_argument('--right-state', type=float, nargs='+', help="rho u_1..u_d T")
    parser.add_argument('--interface', type=float)
    parser.add_argument('--check-max-principle', action='store_true')
    parser.add_argument('--out-dir', help="Directory for CSV artifacts")
    parser.add_argument('--tag', help="Suffix added to output file names")
    parser.add_argument('--excel', action='store_true', help="Also write an Excel workbook of the tables")
    parser.add_argument('--n-jobs', type=int, help="Worker processes (default ESBGK_N_JOBS)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(description="Semi-Lagrangian ES-BGK solver and benchmarks")
    sub = parser.add_subparsers(dest='command', required=True)

    accuracy = sub.add_parser('accuracy', help="Smooth periodic problem, convergence and conservation")
    add_config_arguments(accuracy)
    accuracy.add_argument('--convergence', action='store_true', help="Run the convergence suite")
    accuracy.add_argument('--n-x-list', type=int, nargs='+', default=list(CONVERGENCE_N_X))
    accuracy.add_argument('--eps-list', type=float, nargs='+', default=list(CONVERGENCE_EPS))
    accuracy.add_argument('--schemes', nargs='+', choices=SCHEMES, default=list(CONVERGENCE_SCHEMES))
    accuracy.add_argument('--ablation', action='store_true', help="Compare drift with projection on/off")

    riemann = sub.add_parser('riemann', help="Mach 2.5 shock tube")
    add_config_arguments(riemann)
    riemann.add_argument('--sweep', action='store_true', help="Fluid-limit trend over eps")
    riemann.add_argument('--eps-list', type=float, nargs='+', default=list(RIEMANN_EPS_SWEEP))
    riemann.add_argument('--with-reference', action='store_true', help="Also run the NSE reference")

    lax = sub.add_parser('lax', help="1D-3D Lax shock tube")
    add_config_arguments(lax)
    lax.add_argument('--sweep', action='store_true', help="Comparison with NSE over eps")
    lax.add_argument('--eps-list', type=float, nargs='+', default=list(LAX_EPS_SWEEP))
    lax.add_argument('--with-reference', action='store_true', help="Also run the NSE reference")

    nse = sub.add_parser('nse', help="Navier-Stokes reference only")
    add_config_arguments(nse)
    nse.add_argument('--problem', choices=PROBLEMS, default='riemann')

    custom = sub.add_parser('custom', help="Two-state problem from --left-state/--right-state")
    add_config_arguments(custom)
    custom.add_argument('--with-reference', action='store_true', help="Also run the NSE reference")

    return parser


def config_from_args(args: argparse.Namespace, problem: str) -> ProblemConfig:
    """Preset del problema, poi file JSON, poi opzioni esplicite"""
    overrides = {}
    if args.config:
        overrides.update(ProblemConfig.load(args.config).to_dict())
        overrides.pop('problem', None)
    overrides.update({name: getattr(args, name) for name in CONFIG_FLAGS
                      if getattr(args, name, None) is not None})
    if args.projection is not None:
        overrides['projection'] = args.projection == 'on'
    if args.check_max_principle:
        overrides['check_max_principle'] = True
    config = ProblemConfig.for_problem(problem, **overrides).check()
    if args.save_config:
        config.save(args.save_config)
        print(f"💾 Configuration saved to {args.save_config}")
    return config


def write_tables(tables: Dict[str, pd.DataFrame], config: ProblemConfig, name: str, excel: bool) -> List[str]:
    ensure_dir(config.out_dir)
    paths = []
    for sheet, df in tables.items():
        path = os.path.join(config.out_dir, f"{name}_{sheet}.csv")
        df.to_csv(path, index=False, float_format=CSV_FLOAT_FORMAT)
        paths.append(path)
    if excel:
        path = os.path.join(config.out_dir, f"{name}.xlsx")
        export_to_excel(tables, path)
        paths.append(path)
    for path in paths:
        print(f"📁 {path}")
    return paths


def report_run(outputs: Dict, config: ProblemConfig, excel: bool) -> bool:
    """Stampa il riepilogo di un'esecuzione; False se il principio del massimo è stato violato"""
    result = outputs['result']
    report = outputs['report']
    print(f"✅ {config.problem}: {result.n_steps} steps in {result.elapsed:.1f}s, t={result.state.t:.4f}")
    summary = dict(report.summary())
    if config.check_max_principle:
        summary['Maximum Principle'] = 1 if result.max_principle_ok else 0
        if not result.max_principle_ok:
            print("❌ Maximum principle violated in at least one step")
    if 'metrics' in outputs:
        summary.update(outputs['metrics'])
    table = create_metrics_table(summary)
    print(table.to_string(index=False))
    print(f"📁 {outputs['profile']}")
    print(f"📁 {outputs['conservation']}")
    if 'fluid_profile' in outputs:
        print(f"📁 {outputs['fluid_profile']}")
    if excel:
        tables = {'summary': table, 'conservation': report.to_frame()}
        write_tables(tables, config, f"{config.problem}_report", excel=True)
    return result.max_principle_ok or not config.check_max_principle


def run_command(args: argparse.Namespace) -> int:
    command = args.command

    if command == 'nse':
        config = config_from_args(args, args.problem)
        state = nse_run(config)
        print(f"✅ NSE reference for {config.problem} reached t={state.t:.4f}")
        print(f"📁 {emit_fluid_profile(state, config)}")
        return 0

    config = config_from_args(args, command)

    if command == 'accuracy' and args.convergence:
        table = convergence_suite(config, args.n_x_list, args.eps_list, args.schemes, args.n_jobs)
        print("📊 Convergence table")
        print(table.to_string(index=False))
        write_tables({'convergence': table}, config, 'accuracy', args.excel)
        return 0 if (table['status'] == 'ok').all() else 1

    if command == 'accuracy' and args.ablation:
        ablation = projection_ablation(config)
        print(f"📊 Drift with projection: {ablation['drift_on']:.3e}, "
              f"without: {ablation['drift_off']:.3e} (ratio {ablation['ratio']:.1f})")
        return 0

    if command == 'riemann' and args.sweep:
        table = fluid_limit_trend(config, args.eps_list, args.n_jobs, n_v=args.n_v)
        print("📊 ES-BGK vs NSE distance")
        print(table.to_string(index=False))
        passed = True
        if not table['monotone'].iloc[0]:
            print("❌ Distance is not monotonically decreasing in eps")
            passed = False
        if not table['ratio_ok'].iloc[0]:
            print(f"❌ Distance ratio {table['ratio'].iloc[0]:.3f} exceeds {FLUID_LIMIT_RATIO:g}")
            passed = False
        write_tables({'fluid_limit': table}, config, 'riemann', args.excel)
        return 0 if passed else 1

    if command == 'lax' and args.sweep:
        table = lax_sweep(config, args.eps_list, args.n_jobs)
        print("📊 Lax shock tube vs NSE")
        print(table.to_string(index=False))
        write_tables({'lax_sweep': table}, config, 'lax', args.excel)
        return 0

    outputs = run_problem(config, with_reference=getattr(args, 'with_reference', False))
    return 0 if report_run(outputs, config, args.excel) else 1


def main(argv: Optional[List[str]] = None) -> int:
    logging.basicConfig(level=get_log_level(), format='%(asctime)s %(name)s %(levelname)s %(message)s')
    args = build_parser().parse_args(argv)
    try:
        return run_command(args)
    except SolverError as error:
        logger.error(f"{args.command} failed: {error}")
        print(f"❌ {error}")
        return 2


if __name__ == "__main__":
    sys.exit(main())

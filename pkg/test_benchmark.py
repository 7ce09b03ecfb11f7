"""
Test dell'harness dei benchmark: profili CSV, rapporto di conservazione, convergenza e riga di comando
"""
import sys
import os
import tempfile

# Aggiungi il path del progetto
sys.path.append(os.path.dirname(os.path.abspath(__file__)))

import numpy as np
import pandas as pd

import app
from app import main as cli_main
from src.benchmark import (_density_run, annotate_fluid_limit, conservation_report, convergence_suite,
                           emit_profiles, fluid_limit_trend, fluid_profile, is_monotone_decreasing,
                           profile_path, run_kinetic, run_problem)
from src.config import FLUID_LIMIT_RATIO, PROFILE_COLUMNS, ProblemConfig
from src.data_loader import ProfileDataLoader
from src.exceptions import ConfigurationError
from src.moments import TauLaw
from src.nse_reference import FluidState, TransportCoefficients
from src.phase_grid import build_spatial_grid


def small_accuracy(**overrides) -> ProblemConfig:
    values = dict(n_x=20, n_v=16, t_final=0.04)
    values.update(overrides)
    return ProblemConfig.for_problem('accuracy', **values)


def test_profile_round_trip():
    """Il CSV emesso si rilegge identico bit a bit, con la configurazione nell'intestazione"""
    print("Testing profile emission...")
    loader = ProfileDataLoader()
    with tempfile.TemporaryDirectory() as tmp:
        config = small_accuracy(out_dir=tmp, tag='rt')
        result = run_kinetic(config)
        path = emit_profiles(result.state, result.moments, config)
        assert path == profile_path(config, 'kinetic')
        assert os.path.basename(path) == 'accuracy_kinetic_DIRK2_eps1_nx20_rt.csv'

        df, header = loader.load_profile(path)
        assert list(df.columns) == PROFILE_COLUMNS
        np.testing.assert_array_equal(df['x'].to_numpy(), result.x)
        np.testing.assert_array_equal(df['rho'].to_numpy(), result.moments.rho)
        np.testing.assert_array_equal(df['u1'].to_numpy(), result.moments.U[:, 0])
        np.testing.assert_array_equal(df['T'].to_numpy(), result.moments.T)
        np.testing.assert_array_equal(df['Q'].to_numpy(), result.moments.q)
        assert header['source'] == 'kinetic'
        assert float(header['t']) == result.state.t
        assert loader.load_config(path) == config

        is_valid, message = loader.validate_data(df)
        assert is_valid, message
        summary = loader.get_data_summary(df)
        assert summary['rows'] == 20
        assert abs(summary['mass'] - result.ledger.totals[0, 0]) < 1e-10
    print(f"✅ Profile round trip exact ({summary['rows']} rows)")


def test_fluid_profile_of_uniform_state():
    grid = build_spatial_grid(0.0, 1.0, 10, 'periodic')
    state = FluidState.from_primitives(grid, np.ones(10), 0.2 * np.ones(10), np.ones(10), 2, 0.1)
    df = fluid_profile(state, TransportCoefficients(-1.0, TauLaw(), 2))
    for column in ('rho', 'u1', 'T'):
        assert np.ptp(df[column].to_numpy()) == 0.0
    assert np.all(df['Q'] == 0.0)
    print("✅ Uniform fluid profile is constant")


def test_run_problem_outputs():
    with tempfile.TemporaryDirectory() as tmp:
        config = small_accuracy(out_dir=os.path.join(tmp, 'out'), scheme='BDF2')
        outputs = run_problem(config)
        assert os.path.exists(outputs['profile'])
        conservation = pd.read_csv(outputs['conservation'])
        report = outputs['report']
        assert len(conservation) == report.n_steps == outputs['result'].n_steps
        assert list(conservation['kind']) == report.kinds
        assert 'defect_energy' in conservation.columns
        summary = report.summary()
        assert summary['Steps'] == report.n_steps
        assert summary['Drift mass'] <= 1e-10
    print("✅ run_problem writes profile and conservation report")


def test_convergence_suite_structure():
    """Tabella (N, 2N) con ordine NaN sull'ultima riga; risultato indipendente dall'ordine degli schemi"""
    print("Testing convergence suite...")
    base = small_accuracy(n_v=12, t_final=0.02)
    table = convergence_suite(base, [16, 32, 64], [1.0], ['DIRK2', 'BDF2'], n_jobs=1)
    print(table.to_string(index=False))
    assert len(table) == 2 * 2
    assert (table['status'] == 'ok').all()
    assert np.all(np.isfinite(table['error'])) and np.all(table['error'] > 0)
    for scheme, group in table.groupby('scheme'):
        assert list(group['n_coarse']) == [16, 32]
        assert np.isfinite(group['rate'].iloc[0]) and np.isnan(group['rate'].iloc[-1])
        assert set(group['reconstruction']) == {'QCWENO23'}

    reversed_table = convergence_suite(base, [16, 32, 64], [1.0], ['BDF2', 'DIRK2'], n_jobs=1)
    merged = table.merge(reversed_table, on=['scheme', 'eps', 'n_coarse'], suffixes=('', '_rev'))
    np.testing.assert_array_equal(merged['error'], merged['error_rev'])
    print("✅ Convergence table deterministic")


def test_convergence_errors():
    try:
        convergence_suite(small_accuracy(), [16, 30], [1.0], ['DIRK2'], n_jobs=1)
    except ConfigurationError as error:
        print(f"⚠️ {error}")
    else:
        raise AssertionError("Non-doubling grids should raise")

    failed = _density_run(small_accuracy(nu=1.5))
    assert failed['rho'] is None and 'nu=1.5' in failed['error']
    print("✅ Failed runs are reported, not raised")


def test_conservation_report_frame():
    result = run_kinetic(small_accuracy(scheme='BDF2', t_final=0.12))
    report = conservation_report(result.ledger)
    frame = report.to_frame()
    assert list(frame['step']) == list(range(1, report.n_steps + 1))
    assert report.kinds[0] == 'dirk' and report.kinds[-1] == 'bdf'
    assert report.max_defect.shape == (4,)
    assert report.within_defect_bound(tau_max=1.0, dt=0.04, eps=1.0)


def test_observed_order_accuracy_problem():
    """Ordine spazio-temporale osservato sul problema di accuratezza a eps = 1"""
    print("Testing observed order...")
    base = ProblemConfig.for_problem('accuracy', n_v=16)
    table = convergence_suite(base, [80, 160, 320], [1.0], ['DIRK2', 'BDF2', 'DIRK3', 'BDF3'], n_jobs=1)
    print(table.to_string(index=False))
    assert (table['status'] == 'ok').all()
    minimum = {'DIRK2': 2.0, 'BDF2': 2.0, 'DIRK3': 2.5, 'BDF3': 2.5}
    for scheme, group in table.groupby('scheme'):
        rate = group['rate'].iloc[0]
        print(f"📊 {scheme}: rate {rate:.2f}")
        assert rate >= minimum[scheme], f"{scheme}: observed rate {rate:.2f} below {minimum[scheme]}"
    print("✅ Observed orders")


def test_fluid_limit_annotation():
    """La distanza a eps minimo deve scendere sotto il 25% di quella a eps massimo"""
    failing = annotate_fluid_limit(pd.DataFrame({'eps': [0.5, 0.1, 0.01],
                                                 'l1_distance': [0.017757, 0.008654, 0.004666]}))
    assert bool(failing['monotone'].iloc[0])
    assert abs(failing['ratio'].iloc[0] - 0.004666 / 0.017757) < 1e-15
    assert not bool(failing['ratio_ok'].iloc[0])

    passing = annotate_fluid_limit(pd.DataFrame({'eps': [0.5, 0.1, 0.01],
                                                 'l1_distance': [0.02, 0.009, 0.004]}))
    assert bool(passing['ratio_ok'].iloc[0]) and abs(passing['ratio'].iloc[0] - 0.2) < 1e-15

    broken = annotate_fluid_limit(pd.DataFrame({'eps': [0.5, 0.01], 'l1_distance': [0.02, float('nan')]}))
    assert np.isnan(broken['ratio'].iloc[0]) and not bool(broken['ratio_ok'].iloc[0])
    assert not bool(broken['monotone'].iloc[0])
    print("✅ Fluid limit ratio column")


def test_fluid_limit_trend_small():
    """Sweep ridotto: una riga per eps, rapporto coerente con le distanze"""
    print("Testing reduced fluid-limit sweep...")
    base = ProblemConfig.for_problem('riemann', n_x=40, t_final=0.05, scheme='FO')
    table = fluid_limit_trend(base, [0.5, 0.01], n_jobs=1, n_v=24)
    print(table.to_string(index=False))
    assert list(table['eps']) == [0.5, 0.01]
    assert list(table['n_v']) == [24, 24]
    assert (table['status'] == 'ok').all()
    distances = table['l1_distance'].to_numpy()
    assert np.all(distances > 0)
    ratio = table['ratio'].iloc[0]
    assert ratio == distances[-1] / distances[0]
    assert bool(table['ratio_ok'].iloc[0]) == (ratio <= FLUID_LIMIT_RATIO)
    print(f"📊 Reduced sweep ratio {ratio:.3f}")


def test_monotone_helper():
    assert is_monotone_decreasing([0.3, 0.2, 0.05])
    assert not is_monotone_decreasing([0.3, 0.3, 0.05])
    assert not is_monotone_decreasing([0.3, float('nan')])
    assert is_monotone_decreasing([0.1])


def test_command_line():
    """La riga di comando termina con 0 su un caso piccolo e con 2 su una configurazione non valida"""
    print("Testing command line...")
    with tempfile.TemporaryDirectory() as tmp:
        base = ['accuracy', '--n-x', '16', '--n-v', '12', '--t-final', '0.02', '--out-dir', tmp]
        config_path = os.path.join(tmp, 'resolved.json')
        assert cli_main(base + ['--save-config', config_path]) == 0
        saved = ProblemConfig.load(config_path)
        assert saved.n_x == 16 and saved.out_dir == tmp
        assert any(name.startswith('accuracy_kinetic_') for name in os.listdir(tmp))

        assert cli_main(['accuracy', '--config', config_path, '--projection', 'off', '--excel']) == 0
        assert os.path.exists(os.path.join(tmp, 'accuracy_report.xlsx'))

        assert cli_main(['accuracy', '--nu', '1.5', '--out-dir', tmp]) == 2
        assert cli_main(['custom', '--left-state', '1', '0', '1', '--out-dir', tmp]) == 2
    print("✅ Exit codes")


def test_command_line_failed_checks():
    """Un controllo fallito (principio del massimo, sweep in eps) dà codice di uscita 1"""
    print("Testing exit codes of failed checks...")
    original_run_problem = app.run_problem

    def violating_run_problem(config, with_reference=False):
        outputs = original_run_problem(config, with_reference)
        outputs['result'].state.max_principle.append(
            {'step': -1, 'min': -1.0, 'max': 0.0, 'lower': 0.0, 'upper': 1.0, 'ok': False})
        return outputs

    with tempfile.TemporaryDirectory() as tmp:
        base = ['riemann', '--n-x', '40', '--n-v', '24', '--t-final', '0.05', '--scheme', 'FO',
                '--projection', 'off', '--out-dir', tmp]
        assert cli_main(base + ['--check-max-principle']) == 0
        app.run_problem = violating_run_problem
        try:
            assert cli_main(base + ['--check-max-principle']) == 1
            assert cli_main(base) == 0
        finally:
            app.run_problem = original_run_problem

        # eps ripetuto: distanze uguali, quindi né monotone né entro il rapporto
        sweep = base + ['--sweep', '--eps-list', '0.5', '0.5', '--n-jobs', '1']
        assert cli_main(sweep) == 1
        table = pd.read_csv(os.path.join(tmp, 'riemann_fluid_limit.csv'))
        assert not table['monotone'].iloc[0] and not table['ratio_ok'].iloc[0]
    print("✅ Failed checks exit with 1")


def main():
    print("🧪 Testing benchmark harness\n")
    test_profile_round_trip()
    test_fluid_profile_of_uniform_state()
    test_run_problem_outputs()
    test_convergence_suite_structure()
    test_convergence_errors()
    test_conservation_report_frame()
    test_observed_order_accuracy_problem()
    test_fluid_limit_annotation()
    test_fluid_limit_trend_small()
    test_monotone_helper()
    test_command_line()
    test_command_line_failed_checks()
    print("\n✅ All benchmark tests passed")


if __name__ == "__main__":
    main()

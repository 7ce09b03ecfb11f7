"""
Test per verificare il funzionamento dei moduli di supporto (metriche, profili, utilità)
"""
import sys
import os
import tempfile

# Aggiungi il path del progetto
sys.path.append(os.path.dirname(os.path.abspath(__file__)))

import numpy as np
import pandas as pd

from src.data_loader import ProfileDataLoader
from src.metrics import SolutionMetrics, conserved_names
from src.utils import (create_metrics_table, export_to_excel, format_number, format_scientific,
                       write_profile_csv)


def test_metrics():
    """Test delle metriche di errore e conservazione"""
    print("Testing Solution Metrics...")
    metrics = SolutionMetrics()

    assert metrics.relative_l1_error([1.0, 2.0], [1.0, 2.0]) == 0.0
    assert abs(metrics.relative_l1_error([1.1, 2.0], [1.0, 2.0]) - 0.1 / 3.0) < 1e-15
    try:
        metrics.relative_l1_error([1.0], [1.0, 2.0])
    except ValueError:
        pass
    else:
        raise AssertionError("Shape mismatch should raise")

    np.testing.assert_array_equal(metrics.restrict_to_coarse([0.0, 1.0, 2.0, 3.0]), [0.0, 2.0])
    np.testing.assert_array_equal(metrics.restrict_to_coarse([0.0, 1.0, 2.0, 3.0], 'cell_centers'),
                                  [0.5, 2.5])
    np.testing.assert_array_equal(metrics.restrict_to_coarse(np.arange(8.0), 'cell_centers', factor=4),
                                  [1.5, 5.5])
    np.testing.assert_array_equal(metrics.restrict_to_coarse(np.arange(8.0), factor=4), [0.0, 4.0])
    for args in [([0.0, 1.0, 2.0], 'periodic_nodes'), ([0.0, 1.0], 'staggered'),
                 (np.arange(6.0), 'cell_centers', 4)]:
        try:
            metrics.restrict_to_coarse(*args)
        except ValueError:
            continue
        raise AssertionError(f"restrict_to_coarse{args} should raise")

    assert abs(metrics.observed_rate(4e-3, 1e-3) - 2.0) < 1e-12
    assert np.isnan(metrics.observed_rate(0.0, 1e-3))
    assert np.isnan(metrics.observed_rate(float('nan'), 1e-3))
    print("✅ Errors, restriction and observed rates")


def test_conservation_metrics():
    metrics = SolutionMetrics()
    totals = np.array([[2.0, 0.0, 5.0], [2.0 + 2e-12, 1e-12, 5.0]])
    np.testing.assert_allclose(metrics.cumulative_drift(totals), [1e-12, 5e-13, 0.0], rtol=1e-3, atol=1e-20)

    # secondo passo BDF2: m^2 confrontato con 4/3 m^1 - 1/3 m^0
    totals = np.array([[1.0, 0.5, 3.0], [1.0, 0.5, 3.0], [1.0, 0.5, 3.0]])
    defects = metrics.step_defects(totals, [(), (4.0 / 3.0, -1.0 / 3.0)])
    assert defects.shape == (2, 3)
    assert np.max(defects) < 1e-15
    try:
        metrics.step_defects(totals, [(4.0 / 3.0, -1.0 / 3.0), ()])
    except ValueError:
        pass
    else:
        raise AssertionError("BDF combination longer than the history should raise")

    assert conserved_names(4) == ['mass', 'momentum_1', 'momentum_2', 'energy']
    assert conserved_names(5)[-2] == 'momentum_3'
    print("✅ Drift and per-step defects")


def test_wave_metrics():
    metrics = SolutionMetrics()
    x = np.arange(20.0)
    rho = np.where(x < 5, 1.0, 0.0) + np.where(x >= 14, 2.0, 0.0)
    assert metrics.locate_waves(x, rho) == [4.5, 13.5]
    assert metrics.locate_waves(x, np.ones(20)) == []

    reference = np.where(x < 6, 1.0, 0.0) + np.where(x >= 14, 2.0, 0.0)
    result = metrics.calculate_all_metrics(x, rho, reference, totals=np.ones((3, 4)))
    assert result['Wave Positions'] == [4.5, 13.5]
    assert result['Reference Wave Positions'] == [5.5, 13.5]
    assert result['Max Wave Shift (dx)'] == 1.0
    assert result['Linf Error'] == 1.0
    assert result['Drift energy'] == 0.0
    assert metrics.calculate_all_metrics(np.array([]), np.array([]), np.array([])) == {}
    print("✅ Wave positions and metric summary")


def _profile(n: int = 8) -> pd.DataFrame:
    x = (np.arange(n) + 0.5) / n
    return pd.DataFrame({'x': x, 'rho': 1.0 + 0.1 / 3.0 * np.sin(2 * np.pi * x), 'u1': x / 7.0,
                         'T': np.exp(-x), 'Q': -x / 11.0})


def test_profile_loader():
    """Test del caricamento dei profili CSV"""
    print("\nTesting Profile Data Loader...")
    loader = ProfileDataLoader()
    df = _profile()

    with tempfile.TemporaryDirectory() as tmp:
        path = write_profile_csv(df, os.path.join(tmp, 'nested', 'profile.csv'),
                                 {'source': 'kinetic', 't': repr(0.1)})
        loaded, header = loader.load_profile(path)
        for column in df.columns:
            np.testing.assert_array_equal(loaded[column].to_numpy(), df[column].to_numpy())
        assert header == {'source': 'kinetic', 't': '0.1'}
        assert loader.load_config(path) is None

        os.remove(path)
        cached, _ = loader.load_profile(path)
        assert len(cached) == len(df)

    is_valid, message = loader.validate_data(df)
    assert is_valid, message

    summary = loader.get_data_summary(df)
    assert summary['rows'] == 8
    assert abs(summary['dx'] - 0.125) < 1e-15
    assert summary['T_range'][1] < 1.0
    print(f"✅ Profile round trip exact, summary: {summary['rows']} rows, mass {summary['mass']:.6f}")


def test_profile_validation():
    loader = ProfileDataLoader()
    cases = {
        'Empty profile': pd.DataFrame(),
        'Missing columns': _profile().drop(columns=['Q']),
        'non-finite': _profile().assign(T=np.nan),
        'strictly increasing': _profile().iloc[::-1],
        'Nonpositive density': _profile().assign(rho=0.0),
        'Nonpositive temperature': _profile().assign(T=-1.0),
    }
    for expected, df in cases.items():
        is_valid, message = loader.validate_data(df)
        assert not is_valid and expected in message, message
        print(f"⚠️ {message}")
    print("✅ Invalid profiles rejected")


def test_utils():
    """Test delle funzioni di formattazione ed export"""
    print("\nTesting utilities...")
    assert format_number(None) == "N/A"
    assert format_number(float('nan')) == "N/A"
    assert format_number(1.23456, 2) == "1.23"
    assert format_scientific(0.00021739) == "2.174e-04"

    table = create_metrics_table({'L1 Relative Error': 0.00021739, 'Steps': 5,
                                  'Wave Positions': [0.1, 0.2], 'dx': 0.01})
    values = dict(zip(table['Metric'], table['Value']))
    assert values == {'L1 Relative Error': '2.174e-04', 'Steps': '5',
                      'Wave Positions': '0.1000, 0.2000', 'dx': '0.0100'}

    with tempfile.TemporaryDirectory() as tmp:
        path = os.path.join(tmp, 'tables.xlsx')
        long_name = 'conservation_defects_per_step_table'
        data = export_to_excel({'profile': _profile(), long_name: table}, path)
        assert len(data) > 0 and os.path.exists(path)
        sheets = pd.read_excel(path, sheet_name=None, engine='openpyxl')
        assert set(sheets) == {'profile', long_name[:31]}
        np.testing.assert_allclose(sheets['profile']['rho'].to_numpy(), _profile()['rho'].to_numpy(),
                                   rtol=1e-14)
    print("✅ Formatting and Excel export")


def main():
    """Esegui tutti i test"""
    print("🧪 Testing support modules\n")
    test_metrics()
    test_conservation_metrics()
    test_wave_metrics()
    test_profile_loader()
    test_profile_validation()
    test_utils()
    print("\n✅ All module tests passed")


if __name__ == "__main__":
    main()

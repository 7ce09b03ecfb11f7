"""
Test della configurazione dei problemi e delle variabili di ambiente
"""
import sys
import os
import tempfile

# Aggiungi il path del progetto
sys.path.append(os.path.dirname(os.path.abspath(__file__)))

from src.config import (N_JOBS_ENV, ProblemConfig, get_admissible_nu_range, get_n_jobs,
                        get_problem_defaults, get_riemann_velocity_nodes)
from src.exceptions import ConfigurationError


def test_presets():
    print("Testing problem presets...")
    riemann = ProblemConfig.for_problem('riemann')
    assert riemann.bc == 'free_flow' and riemann.d_v == 2 and riemann.t_final == 0.4
    assert abs(riemann.dx - 3.0 / 200) < 1e-15

    lax = ProblemConfig.for_problem('lax', eps=1e-2)
    assert lax.d_v == 3 and lax.nu == -0.5 and lax.eps == 1e-2
    assert lax.resolved_reconstruction == 'QCWENO23'
    assert lax.replace(scheme='BDF3').resolved_reconstruction == 'QCWENO35'
    assert lax.replace(scheme='BDF3', reconstruction='Linear').resolved_reconstruction == 'Linear'

    # None lascia il valore del preset
    assert ProblemConfig.for_problem('accuracy', n_x=None).n_x == 80

    defaults = get_problem_defaults('custom')
    defaults['left_state'][0] = 99.0
    assert ProblemConfig.for_problem('custom').left_state[0] == 1.0
    print("✅ Presets and overrides")


def test_validation_messages():
    cases = [
        (dict(problem='lax', nu=-0.6), 'nu=-0.6'),
        (dict(problem='accuracy', n_v=7), 'n_v'),
        (dict(problem='accuracy', n_x=2), 'n_x'),
        (dict(problem='riemann', eps=0.0), 'eps'),
        (dict(problem='riemann', scheme='RK4'), 'scheme'),
        (dict(problem='custom', left_state=[1.0, 0.0, 1.0]), 'left_state'),
        (dict(problem='custom', right_state=[0.0, 0.0, 0.0, 1.0]), 'positive density'),
    ]
    for values, expected in cases:
        problem = values.pop('problem')
        config = ProblemConfig.for_problem(problem, **values)
        is_valid, message = config.validate()
        assert not is_valid and expected in message, message
        try:
            config.check()
        except ConfigurationError:
            pass
        else:
            raise AssertionError(f"{values} should fail the check")
        print(f"⚠️ {message}")

    for problem in ('accuracy', 'riemann', 'lax', 'custom'):
        is_valid, message = ProblemConfig.for_problem(problem).validate()
        assert is_valid, message
    print("✅ Validation")


def test_serialization():
    config = ProblemConfig.for_problem('custom', eps=3e-3, tag='run1')
    assert ProblemConfig.from_json(config.to_json()) == config

    with tempfile.TemporaryDirectory() as tmp:
        path = os.path.join(tmp, 'config.json')
        config.save(path)
        assert ProblemConfig.load(path) == config

    for call in (lambda: ProblemConfig.from_dict({'n_x': 10, 'dt': 0.1}),
                 lambda: ProblemConfig.for_problem('poiseuille')):
        try:
            call()
        except ConfigurationError as error:
            print(f"⚠️ {error}")
        else:
            raise AssertionError("Unknown key or problem should raise")
    print("✅ JSON round trip")


def test_helpers():
    assert get_admissible_nu_range(2) == (-1.0, 1.0)
    assert get_admissible_nu_range(3) == (-0.5, 1.0)
    assert get_riemann_velocity_nodes(0.5) == 160
    assert get_riemann_velocity_nodes(0.1) == 96
    assert get_riemann_velocity_nodes(0.01) == 160

    saved = os.environ.get(N_JOBS_ENV)
    try:
        os.environ[N_JOBS_ENV] = '3'
        assert get_n_jobs() == 3
        os.environ[N_JOBS_ENV] = 'many'
        assert get_n_jobs() == -1
        del os.environ[N_JOBS_ENV]
        assert get_n_jobs() == -1
    finally:
        if saved is not None:
            os.environ[N_JOBS_ENV] = saved
    print("✅ Helpers and environment")


def main():
    print("🧪 Testing configuration\n")
    test_presets()
    test_validation_messages()
    test_serialization()
    test_helpers()
    print("\n✅ All configuration tests passed")


if __name__ == "__main__":
    main()

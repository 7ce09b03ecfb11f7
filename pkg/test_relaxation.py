"""
Test del rilassamento implicito in forma chiusa
"""
import sys
import os

# Aggiungi il path del progetto
sys.path.append(os.path.dirname(os.path.abspath(__file__)))

import numpy as np

from src.exceptions import NonpositiveTemperature
from src.moments import ModelParams, TauLaw, compute_moments, eval_gaussian, eval_maxwellian, relaxation_tensor
from src.phase_grid import build_velocity_grid
from src.projection import Projector
from src.relaxation import (StageContext, effective_tensor, implicit_stage_update, modified_nu,
                            relax_stage, relaxation_term)


def _anisotropic_field(vgrid):
    """Due celle con Gaussiane anisotrope (Theta diverso da T I)"""
    tensor = relaxation_tensor(np.array([[[1.4, 0.1], [0.1, 0.7]], [[0.9, -0.2], [-0.2, 1.3]]]))
    return eval_gaussian(np.array([1.0, 0.4]), np.array([[0.5, 0.0], [-0.3, 0.2]]), tensor, vgrid)


def test_modified_nu():
    assert modified_nu(0.0, 1.0, 1.0, 0.1) == 0.0
    assert modified_nu(-1.0, 1.0, 1.0, 0.0) == -1.0
    value = modified_nu(-0.5, 0.1, 2.0, 0.05)
    assert abs(value - 0.1 * -0.5 / (0.1 + 1.5 * 2.0 * 0.05)) < 1e-15
    # eps -> 0: nu' -> 0
    assert abs(modified_nu(-1.0, 1e-12, 1.0, 0.01)) < 1e-9
    # |nu'| decresce con tau a dt
    sweep = [modified_nu(-0.5, 0.1, 1.0, h) for h in np.linspace(0.0, 1.0, 20)]
    assert np.all(np.diff(np.abs(sweep)) < 0)
    print("✅ Modified nu")


def test_bgk_reduction():
    """Con nu = 0 il tensore effettivo è T I e la Gaussiana è la Maxwelliana"""
    vgrid = build_velocity_grid(8.0, 24, 2)
    f = _anisotropic_field(vgrid)
    params = ModelParams(0.0, 1.0, TauLaw('constant', 1.0))
    stage = relax_stage(f, vgrid, params, 0.1)
    moments = compute_moments(f, vgrid)
    for i in range(2):
        np.testing.assert_array_equal(stage.tensor.matrix[i], moments.T[i] * np.eye(2))
    np.testing.assert_allclose(stage.gaussian, eval_maxwellian(moments.rho, moments.U, moments.T, vgrid),
                               rtol=1e-13, atol=1e-16)
    assert np.all(stage.nu_prime == 0.0)
    print("✅ BGK reduction at nu = 0")


def test_effective_tensor_blend():
    vgrid = build_velocity_grid(8.0, 24, 2)
    moments = compute_moments(_anisotropic_field(vgrid), vgrid)
    nu_prime = np.array([-0.5, 0.3])
    tensor = effective_tensor(moments.T, nu_prime, moments.Sigma, moments.rho, moments.U)
    for i in range(2):
        expected = (1 - nu_prime[i]) * moments.T[i] * np.eye(2) + nu_prime[i] * moments.Theta[i]
        np.testing.assert_allclose(tensor.matrix[i], expected, atol=1e-12)
    print("✅ Effective tensor")


def test_stage_update_is_convex():
    f_tilde = np.array([[1.0, 2.0, 3.0]])
    gaussian = np.array([[3.0, 2.0, 1.0]])

    untouched = implicit_stage_update(f_tilde, gaussian, StageContext(0.0, 1.0, [1.0]))
    np.testing.assert_array_equal(untouched, f_tilde)

    half = implicit_stage_update(f_tilde, gaussian, StageContext(1.0, 1.0, [1.0]))
    np.testing.assert_allclose(half, [[2.0, 2.0, 2.0]])

    np.testing.assert_allclose(relaxation_term(half, gaussian, np.array([2.0])), [[2.0, 0.0, -2.0]])

    for args in [(-1.0, 1.0, [1.0]), (1.0, 0.0, [1.0]), (1.0, 1.0, [0.0])]:
        try:
            StageContext(*args)
        except ValueError:
            continue
        raise AssertionError(f"StageContext{args} should be rejected")
    print("✅ Stage update is a convex combination")


def test_stage_conserves_moments():
    """Con la proiezione i momenti invarianti dello stadio coincidono con quelli trasportati"""
    vgrid = build_velocity_grid(8.0, 24, 2)
    f = _anisotropic_field(vgrid)
    params = ModelParams(-1.0, 0.5, TauLaw('density', 1.3))
    stage = relax_stage(f, vgrid, params, 0.2, Projector(vgrid))
    before = compute_moments(f, vgrid).conserved
    after = compute_moments(stage.values, vgrid).conserved
    np.testing.assert_allclose(after, before, rtol=0, atol=1e-13 * np.max(np.abs(before)))
    np.testing.assert_allclose(compute_moments(stage.gaussian, vgrid).conserved, before,
                               rtol=0, atol=1e-13 * np.max(np.abs(before)))
    print("✅ Relaxation stage conserves (rho, rho U, E)")


def test_stiff_limit():
    """Per tau dt / eps grande il risultato tende alla Gaussiana"""
    vgrid = build_velocity_grid(8.0, 24, 2)
    f = _anisotropic_field(vgrid)
    params = ModelParams(-1.0, 1e-10, TauLaw('constant', 1.0))
    stage = relax_stage(f, vgrid, params, 0.1, Projector(vgrid))
    assert np.max(np.abs(stage.values - stage.gaussian)) <= 1e-8 * np.max(np.abs(f))
    assert np.max(np.abs(stage.nu_prime)) < 1e-8
    print("✅ Stiff limit reaches the Gaussian")


def test_nonpositive_temperature():
    vgrid = build_velocity_grid(4.0, 4, 2)
    f = np.zeros((1, vgrid.n_nodes))
    f[0, vgrid.n_nodes // 2] = 1.0  # tutta la massa in v = 0
    try:
        relax_stage(f, vgrid, ModelParams(0.0, 1.0, TauLaw()), 0.1)
    except NonpositiveTemperature as error:
        assert error.cell == 0
        print(f"✅ {error}")
        return
    raise AssertionError("Zero temperature should raise")


def main():
    print("🧪 Testing relaxation\n")
    test_modified_nu()
    test_bgk_reduction()
    test_effective_tensor_blend()
    test_stage_update_is_convex()
    test_stage_conserves_moments()
    test_stiff_limit()
    test_nonpositive_temperature()
    print("\n✅ All relaxation tests passed")


if __name__ == "__main__":
    main()

"""
Test della proiezione L2 pesata sui momenti invarianti
"""
import sys
import os

# Aggiungi il path del progetto
sys.path.append(os.path.dirname(os.path.abspath(__file__)))

import numpy as np

from src.moments import eval_maxwellian
from src.phase_grid import VelocityGrid
from src.projection import Projector, build_constraints, maxwellian_weights, project, residual_norm


def test_toy_constraint_matrix():
    """Griglia {-1, 0, 1} in 1D con omega = 1 e dv = 1"""
    vgrid = VelocityGrid(1.0, 2, 1)
    cs = build_constraints(vgrid)
    expected = np.array([[1.0, 1.0, 1.0], [-1.0, 0.0, 1.0], [0.5, 0.0, 0.5]])
    np.testing.assert_array_equal(cs.C, expected)
    np.testing.assert_allclose(cs.gram, expected @ expected.T)

    scaled = build_constraints(vgrid, 3.0 * np.ones(3))
    np.testing.assert_allclose(scaled.C, 3.0 * cs.C)
    np.testing.assert_allclose(scaled.gram, 9.0 * cs.gram)

    try:
        build_constraints(vgrid, np.array([1.0, 0.0, 1.0]))
    except ValueError:
        print("✅ Toy constraint matrix, scaling and zero weights")
        return
    raise AssertionError("Zero weight should be rejected")


def test_toy_projection_dense_oracle():
    vgrid = VelocityGrid(1.0, 2, 1)
    cs = build_constraints(vgrid)
    target = np.array([3.0, 0.0, 1.0])
    projected = project(np.ones(3), target, cs)
    # 3 vincoli su 3 nodi: soluzione unica
    np.testing.assert_allclose(projected, np.linalg.solve(cs.C, target), atol=1e-14)

    target = np.array([2.0, 0.5, 1.5])
    projected = project(np.ones(3), target, cs)
    np.testing.assert_allclose(cs.C @ projected, target, atol=1e-14)
    print("✅ Toy projection matches dense solve")


def _random_instances(vgrid, rng, n):
    G = rng.uniform(0.0, 1.0, size=(n, vgrid.n_nodes))
    cs = build_constraints(vgrid)
    target = cs.moments(G) * rng.uniform(0.8, 1.2, size=(n, vgrid.d_v + 2))
    return G, target


def test_moment_exactness_random():
    """Residuo <= 1e-13 max(1, |U|) su 1000 istanze per d_v = 1, 2, 3"""
    print("Testing moment exactness on random instances...")
    rng = np.random.default_rng(12345)
    for d_v, n_v in [(1, 16), (2, 8), (3, 6)]:
        vgrid = VelocityGrid(4.0, n_v, d_v)
        G, target = _random_instances(vgrid, rng, 1000)
        for omega in [None, maxwellian_weights(vgrid, 2.0)]:
            cs = build_constraints(vgrid, omega)
            projected = project(G, target, cs)
            residual = np.max(np.abs(cs.moments(projected) - target), axis=1)
            scale = np.maximum(1.0, np.max(np.abs(target), axis=1))
            worst = float(np.max(residual / scale))
            assert worst <= 1e-13, f"d_v={d_v}: residual {worst:.2e}"
        print(f"✅ d_v={d_v}: worst relative residual {worst:.1e}")


def test_minimality_oracle():
    """Il minimo di |G/omega - G^/omega| coincide con la soluzione KKT densa"""
    print("Testing minimality against a dense KKT solve...")
    rng = np.random.default_rng(99)
    for n_v in (2, 4, 6):
        vgrid = VelocityGrid(1.5, n_v, 1)
        for _ in range(20):
            omega = rng.uniform(0.2, 1.0, size=vgrid.n_nodes)
            cs = build_constraints(vgrid, omega)
            G = rng.normal(size=vgrid.n_nodes)
            target = rng.normal(size=3)

            y0 = G / omega
            M = vgrid.n_nodes
            kkt = np.zeros((M + 3, M + 3))
            kkt[:M, :M] = np.eye(M)
            kkt[:M, M:] = cs.C.T
            kkt[M:, :M] = cs.C
            solution = np.linalg.solve(kkt, np.concatenate([y0, target]))
            oracle = solution[:M] * omega

            projected = project(G, target, cs)
            distance = np.linalg.norm(y0 - projected / omega)
            best = np.linalg.norm(y0 - solution[:M])
            assert abs(distance - best) <= 1e-10
            np.testing.assert_allclose(projected, oracle, atol=1e-10)
    print("✅ Projection is the constrained minimizer")


def test_identity_idempotence_linearity():
    rng = np.random.default_rng(3)
    vgrid = VelocityGrid(5.0, 8, 2)
    cs = build_constraints(vgrid, maxwellian_weights(vgrid, 1.0))
    G = rng.uniform(0.0, 1.0, size=(4, vgrid.n_nodes))
    target = cs.moments(G)

    np.testing.assert_allclose(project(G, target, cs), G, rtol=0, atol=1e-14)

    target2 = target * 1.1
    once = project(G, target2, cs)
    np.testing.assert_allclose(project(once, target2, cs), once, rtol=0, atol=1e-13)
    np.testing.assert_allclose(project(2.0 * G, 2.0 * target2, cs), 2.0 * once, rtol=1e-12, atol=1e-13)
    print("✅ Identity, idempotence and linearity")


def test_projector_cache():
    """La fattorizzazione è ricalcolata solo quando cambia T_ref"""
    vgrid = VelocityGrid(10.0, 16, 2)
    projector = Projector(vgrid)
    rho = np.array([1.0, 0.5])
    U = np.array([[0.2, 0.0], [-0.1, 0.3]])
    T = np.array([1.0, 0.7])
    G = eval_maxwellian(rho, U, T, vgrid)
    target = np.column_stack([rho, rho[:, None] * U, 0.5 * rho * np.sum(U ** 2, axis=1) + rho * T])

    projected = projector(G, target, 1.0)
    projector(G, target, 1.0)
    assert projector.factorizations == 1
    projector(G, target, 0.7)
    assert projector.factorizations == 2
    assert residual_norm(projected, target, projector.system(1.0)) <= 1e-13

    uniform = Projector(vgrid, 'uniform')
    uniform(G, target, 1.0)
    uniform(G, target, 0.3)
    assert uniform.factorizations == 1
    print("✅ Gram factorization cached")


def main():
    print("🧪 Testing projection\n")
    test_toy_constraint_matrix()
    test_toy_projection_dense_oracle()
    test_moment_exactness_random()
    test_minimality_oracle()
    test_identity_idempotence_linearity()
    test_projector_cache()
    print("\n✅ All projection tests passed")


if __name__ == "__main__":
    main()

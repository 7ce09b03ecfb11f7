"""
Dati iniziali dei problemi di benchmark (Maxwelliane locali campionate sulla griglia)
"""
from typing import Sequence, Tuple

import numpy as np

from .config import (LAX_INTERFACE, LAX_LEFT, LAX_RIGHT, RIEMANN_INTERFACE, RIEMANN_LEFT,
                     RIEMANN_RIGHT, ProblemConfig)
from .exceptions import ConfigurationError
from .moments import eval_maxwellian
from .phase_grid import PhaseField, SpatialGrid, VelocityGrid

Primitives = Tuple[np.ndarray, np.ndarray, np.ndarray]


def accuracy_velocity(x: np.ndarray, sigma: float) -> np.ndarray:
    """Profilo liscio u_1(x) = (exp(-(sigma x - 1)^2) - 2 exp(-(sigma x + 3)^2)) / sigma"""
    x = np.asarray(x, dtype=float)
    return (np.exp(-(sigma * x - 1.0) ** 2) - 2.0 * np.exp(-(sigma * x + 3.0) ** 2)) / sigma


def accuracy_primitives(x: np.ndarray, sigma: float, d_v: int = 2) -> Primitives:
    if sigma <= 0:
        raise ConfigurationError(f"sigma must be positive, got {sigma}")
    rho = np.ones_like(x, dtype=float)
    U = np.zeros((len(x), d_v))
    U[:, 0] = accuracy_velocity(x, sigma)
    return rho, U, np.ones_like(x, dtype=float)


def two_state_primitives(x: np.ndarray, left: Sequence[float], right: Sequence[float],
                         interface: float, d_v: int) -> Primitives:
    """Stato sinistro per x <= interfaccia, destro altrimenti; stati (rho, u_1..u_d, T)"""
    left = np.asarray(left, dtype=float)
    right = np.asarray(right, dtype=float)
    if len(left) != d_v + 2 or len(right) != d_v + 2:
        raise ConfigurationError(f"States must hold {d_v + 2} values for d_v={d_v}")
    states = np.where((np.asarray(x) <= interface)[:, None], left, right)
    return states[:, 0].copy(), states[:, 1:-1].copy(), states[:, -1].copy()


def maxwellian_field(spatial: SpatialGrid, velocity: VelocityGrid, primitives: Primitives) -> PhaseField:
    rho, U, T = primitives
    return PhaseField(spatial, velocity, eval_maxwellian(rho, U, T, velocity), t=0.0)


def init_accuracy(sigma: float, spatial: SpatialGrid, velocity: VelocityGrid) -> PhaseField:
    """Maxwelliana con rho=1, T=1 e velocità liscia su [-1, 1] periodico"""
    return maxwellian_field(spatial, velocity, accuracy_primitives(spatial.x, sigma, velocity.d_v))


def init_riemann(spatial: SpatialGrid, velocity: VelocityGrid) -> PhaseField:
    """Tubo d'urto a Mach 2.5 con salto in x = 0.5"""
    return maxwellian_field(spatial, velocity, two_state_primitives(
        spatial.x, RIEMANN_LEFT, RIEMANN_RIGHT, RIEMANN_INTERFACE, velocity.d_v))


def init_lax(spatial: SpatialGrid, velocity: VelocityGrid) -> PhaseField:
    """Tubo d'urto di Lax 1D-3D con salto in x = 0"""
    return maxwellian_field(spatial, velocity, two_state_primitives(
        spatial.x, LAX_LEFT, LAX_RIGHT, LAX_INTERFACE, velocity.d_v))


def initial_primitives(config: ProblemConfig, x: np.ndarray) -> Primitives:
    """Variabili primitive iniziali del problema configurato"""
    if config.problem == 'accuracy':
        return accuracy_primitives(x, config.sigma, config.d_v)
    if config.problem == 'riemann':
        return two_state_primitives(x, RIEMANN_LEFT, RIEMANN_RIGHT, RIEMANN_INTERFACE, config.d_v)
    if config.problem == 'lax':
        return two_state_primitives(x, LAX_LEFT, LAX_RIGHT, LAX_INTERFACE, config.d_v)
    return two_state_primitives(x, config.left_state, config.right_state, config.interface, config.d_v)


def initial_field(config: ProblemConfig, spatial: SpatialGrid, velocity: VelocityGrid) -> PhaseField:
    if config.problem == 'accuracy':
        return init_accuracy(config.sigma, spatial, velocity)
    if config.problem == 'riemann':
        return init_riemann(spatial, velocity)
    if config.problem == 'lax':
        return init_lax(spatial, velocity)
    return maxwellian_field(spatial, velocity, initial_primitives(config, spatial.x))

"""
Proiezione L2 pesata: corregge una Gaussiana discreta affinché i suoi momenti invarianti
(rho, rho U, E) coincidano con quelli prescritti a precisione di macchina
"""
import logging
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve

from .config import PROJECTION_TOLERANCE, WEIGHT_FLOOR
from .exceptions import SingularGram
from .phase_grid import VelocityGrid

logger = logging.getLogger(__name__)


@dataclass
class ConstraintSystem:
    """Matrice C dei vincoli pesati, pesi omega e fattorizzazione di Cholesky di C C^T"""

    C: np.ndarray
    omega: np.ndarray
    gram: np.ndarray
    factor: Tuple[np.ndarray, bool]

    @property
    def n_constraints(self) -> int:
        return self.C.shape[0]

    def moments(self, values: np.ndarray) -> np.ndarray:
        """Momenti invarianti discreti C (g / omega), per cella"""
        return (np.asarray(values) / self.omega) @ self.C.T


def invariant_rows(vgrid: VelocityGrid) -> np.ndarray:
    """Righe (1, v, |v|^2/2) (dv)^d non pesate, forma (d+2, M)"""
    nodes = vgrid.nodes
    return vgrid.weight * np.vstack([np.ones(vgrid.n_nodes), nodes.T, 0.5 * vgrid.speed_squared])


def maxwellian_weights(vgrid: VelocityGrid, t_ref: float) -> np.ndarray:
    """Pesi exp(-|v|^2 / (2 T_ref)) con pavimento a 1e-30"""
    return np.maximum(np.exp(-vgrid.speed_squared / (2.0 * t_ref)), WEIGHT_FLOOR)


def build_constraints(vgrid: VelocityGrid, omega: Optional[np.ndarray] = None) -> ConstraintSystem:
    """
    Assembla C e fattorizza C C^T

    Args:
        vgrid: Griglia delle velocità
        omega: Pesi positivi per nodo (default: tutti 1)

    Returns:
        ConstraintSystem pronto per project()
    """
    omega = np.ones(vgrid.n_nodes) if omega is None else np.asarray(omega, dtype=float)
    if omega.shape != (vgrid.n_nodes,):
        raise ValueError(f"Weights shape {omega.shape} does not match {vgrid.n_nodes} nodes")
    if not np.all(omega > 0):
        raise ValueError("Projection weights must be strictly positive")

    C = invariant_rows(vgrid) * omega
    gram = C @ C.T
    try:
        factor = cho_factor(gram, lower=True, check_finite=True)
    except (LinAlgError, ValueError) as error:
        raise SingularGram(f"Gram matrix of the projection is singular: {error}")
    if not np.all(np.diag(factor[0]) > 0):
        raise SingularGram("Gram matrix of the projection is singular")
    return ConstraintSystem(C=C, omega=omega, gram=gram, factor=factor)


def project(G: np.ndarray, target: np.ndarray, cs: ConstraintSystem,
            refine: bool = True) -> np.ndarray:
    """
    Correzione a forma chiusa G + [C^T (C C^T)^-1 (U - C(G/omega))] * omega

    Args:
        G: Valori per cella e nodo (n, M) oppure (M,)
        target: Momenti (rho, rho U, E) per cella, (n, d+2) oppure (d+2,)
        cs: Sistema dei vincoli
        refine: Un passo di raffinamento iterativo sul residuo

    Returns:
        Valori corretti con la stessa forma di G
    """
    G = np.asarray(G, dtype=float)
    single = G.ndim == 1
    G2 = G[None] if single else G
    target = np.asarray(target, dtype=float).reshape(G2.shape[0], -1)
    if not np.all(np.isfinite(G2)):
        raise ValueError("Gaussian values must be finite")

    corrected = G2.copy()
    for _ in range(2 if refine else 1):
        residual = target - cs.moments(corrected)
        lam = cho_solve(cs.factor, residual.T).T
        corrected = corrected + (lam @ cs.C) * cs.omega

    return corrected[0] if single else corrected


def residual_norm(values: np.ndarray, target: np.ndarray, cs: ConstraintSystem) -> float:
    """Residuo infinito dei momenti relativo a max(1, |U|_inf)"""
    values = np.atleast_2d(values)
    target = np.asarray(target, dtype=float).reshape(values.shape[0], -1)
    residual = np.max(np.abs(cs.moments(values) - target))
    return float(residual / max(1.0, float(np.max(np.abs(target)))))


class Projector:
    """
    Proiettore con cache della fattorizzazione di Gram.

    La fattorizzazione viene ricalcolata solo quando cambiano i pesi
    (cioè quando cambia la temperatura di riferimento in modalità maxwelliana).
    """

    def __init__(self, vgrid: VelocityGrid, weight_mode: str = 'maxwellian'):
        if weight_mode not in ('maxwellian', 'uniform'):
            raise ValueError(f"Unknown projection weight mode '{weight_mode}'")
        self.vgrid = vgrid
        self.weight_mode = weight_mode
        self._key = None
        self._system: Optional[ConstraintSystem] = None
        self.factorizations = 0

    def system(self, t_ref: float) -> ConstraintSystem:
        key = None if self.weight_mode == 'uniform' else float(t_ref)
        if self._system is None or key != self._key:
            omega = None if key is None else maxwellian_weights(self.vgrid, key)
            self._system = build_constraints(self.vgrid, omega)
            self._key = key
            self.factorizations += 1
        return self._system

    def __call__(self, G: np.ndarray, target: np.ndarray, t_ref: float) -> np.ndarray:
        cs = self.system(t_ref)
        projected = project(G, target, cs)
        error = residual_norm(projected, target, cs)
        if error > PROJECTION_TOLERANCE:
            logger.warning(f"Projection residual {error:.2e} above {PROJECTION_TOLERANCE:.0e}")
        return projected

"""
Nucleo di rilassamento implicito senza Newton, condiviso da tutti gli integratori
"""
import logging
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from .exceptions import NonpositiveTemperature
from .moments import (MomentSet, ModelParams, RelaxationTensor, compute_moments,
                      eval_gaussian, relaxation_tensor)
from .phase_grid import VelocityGrid
from .projection import Projector

logger = logging.getLogger(__name__)


@dataclass
class StageContext:
    """Peso effettivo a*dt dello stadio, eps e tau per cella"""

    a_dt: float
    eps: float
    tau: np.ndarray

    def __post_init__(self):
        self.tau = np.atleast_1d(np.asarray(self.tau, dtype=float))
        if self.a_dt < 0:
            raise ValueError(f"Stage weight must be non-negative, got {self.a_dt}")
        if self.eps <= 0:
            raise ValueError(f"eps must be positive, got {self.eps}")
        if not np.all(self.tau > 0):
            raise ValueError("Relaxation rate must be positive in every cell")


@dataclass
class StageResult:
    """Esito di uno stadio implicito"""

    values: np.ndarray
    gaussian: np.ndarray
    relaxation: np.ndarray
    tensor: RelaxationTensor
    nu_prime: np.ndarray
    moments: MomentSet


def transported_moments(f_tilde: np.ndarray, vgrid: VelocityGrid) -> MomentSet:
    """Momenti (rho, U, E, T, Sigma) del campo trasportato"""
    moments = compute_moments(f_tilde, vgrid)
    bad = np.flatnonzero(~(moments.T > 0))
    if bad.size:
        raise NonpositiveTemperature(f"Nonpositive temperature {moments.T[bad[0]]:.3e}",
                                     cell=int(bad[0]))
    return moments


def modified_nu(nu: float, eps: float, tau: Union[float, np.ndarray],
                a_dt: float) -> Union[float, np.ndarray]:
    """nu' = eps nu / (eps + (1 - nu) tau a dt)"""
    return eps * nu / (eps + (1.0 - nu) * np.asarray(tau) * a_dt)


def effective_tensor(T: np.ndarray, nu_prime: np.ndarray, Sigma: np.ndarray,
                     rho: np.ndarray, U: np.ndarray) -> RelaxationTensor:
    """(1 - nu') T I + nu' (Sigma / rho - U U), con verifica SPD"""
    T = np.atleast_1d(T)
    nu_prime = np.broadcast_to(np.asarray(nu_prime, dtype=float), T.shape)
    d = Sigma.shape[-1]
    stress = Sigma / rho[:, None, None] - U[:, :, None] * U[:, None, :]
    matrix = ((1.0 - nu_prime) * T)[:, None, None] * np.eye(d) + nu_prime[:, None, None] * stress
    return relaxation_tensor(matrix)


def implicit_stage_update(f_tilde: np.ndarray, gaussian: np.ndarray, ctx: StageContext) -> np.ndarray:
    """Combinazione convessa (eps f~ + tau a dt G) / (eps + tau a dt)"""
    relax = (ctx.tau * ctx.a_dt)[:, None]
    return (ctx.eps * f_tilde + relax * gaussian) / (ctx.eps + relax)


def relaxation_term(f: np.ndarray, gaussian: np.ndarray, tau: np.ndarray) -> np.ndarray:
    """Q = tau (G - f)"""
    return np.atleast_1d(tau)[:, None] * (gaussian - f)


def relax_stage(f_tilde: np.ndarray, vgrid: VelocityGrid, params: ModelParams, a_dt: float,
                projector: Optional[Projector] = None) -> StageResult:
    """
    Stadio implicito completo: momenti trasportati, nu', tensore, Gaussiana proiettata e aggiornamento

    Args:
        f_tilde: Campo trasportato (n_cells, n_nodes)
        vgrid: Griglia delle velocità
        params: Parametri del modello
        a_dt: Peso effettivo dello stadio
        projector: Proiettore dei momenti (None = proiezione disattivata)

    Returns:
        StageResult con valori, Gaussiana, termine di rilassamento e diagnostica
    """
    moments = transported_moments(f_tilde, vgrid)
    tau = params.tau_law(moments.rho, moments.T)
    ctx = StageContext(a_dt=a_dt, eps=params.eps, tau=tau)

    nu_prime = np.atleast_1d(modified_nu(params.nu, params.eps, tau, a_dt))
    tensor = effective_tensor(moments.T, nu_prime, moments.Sigma, moments.rho, moments.U)
    gaussian = eval_gaussian(moments.rho, moments.U, tensor, vgrid)
    if projector is not None:
        gaussian = projector(gaussian, moments.conserved, float(np.max(moments.T)))

    values = implicit_stage_update(f_tilde, gaussian, ctx)
    return StageResult(values=values, gaussian=gaussian,
                       relaxation=relaxation_term(values, gaussian, tau),
                       tensor=tensor, nu_prime=nu_prime, moments=moments)

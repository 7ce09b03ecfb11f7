"""
Momenti macroscopici discreti, Gaussiana anisotropa, Maxwelliana e algebra dei tensori SPD
"""
import logging
import math
from dataclasses import dataclass
from typing import Optional, Tuple, Union

import numpy as np
from numba import njit, prange

from .config import get_admissible_nu_range
from .exceptions import ConfigurationError, NonpositiveDensity, NonSPDTensor
from .phase_grid import VelocityGrid

logger = logging.getLogger(__name__)


@dataclass
class MomentSet:
    """
    Momenti per cella (asse 0 = celle).

    rho (n,), U (n, d), E (n,), T (n,), Theta (n, d, d), Sigma (n, d, d), q (n,)
    """

    rho: np.ndarray
    U: np.ndarray
    E: np.ndarray
    T: np.ndarray
    Theta: np.ndarray
    Sigma: np.ndarray
    q: np.ndarray

    @property
    def momentum(self) -> np.ndarray:
        return self.rho[:, None] * self.U

    @property
    def conserved(self) -> np.ndarray:
        """Vettore (rho, rho U, E) per cella, forma (n, d+2)"""
        return np.column_stack([self.rho, self.momentum, self.E])

    @property
    def n_cells(self) -> int:
        return self.rho.shape[0]


@dataclass
class RelaxationTensor:
    """Tensore di temperatura SPD per cella con inversa e determinante"""

    matrix: np.ndarray
    inverse: np.ndarray
    det: np.ndarray


class TauLaw:
    """Frequenza di rilassamento tau(rho, T) per cella"""

    KINDS = ('constant', 'density', 'density_sqrt_t')

    def __init__(self, kind: str = 'constant', coefficient: float = 1.0):
        if kind not in self.KINDS:
            raise ConfigurationError(f"Unknown tau law '{kind}'")
        if coefficient <= 0:
            raise ConfigurationError(f"Tau coefficient must be positive, got {coefficient}")
        self.kind = kind
        self.coefficient = float(coefficient)

    def __call__(self, rho: np.ndarray, T: np.ndarray) -> np.ndarray:
        rho = np.asarray(rho, dtype=float)
        if self.kind == 'constant':
            return np.full_like(rho, self.coefficient)
        if self.kind == 'density':
            return self.coefficient * rho
        return self.coefficient * rho * np.sqrt(np.asarray(T, dtype=float))

    def __repr__(self) -> str:
        return f"TauLaw({self.kind!r}, {self.coefficient!r})"


@dataclass
class ModelParams:
    """Parametri del modello ES-BGK: nu, numero di Knudsen eps e legge di tau"""

    nu: float
    eps: float
    tau_law: TauLaw

    def validate(self, d_v: int) -> Tuple[bool, str]:
        nu_min, nu_max = get_admissible_nu_range(d_v)
        if not nu_min <= self.nu < nu_max:
            return False, f"nu={self.nu} outside [{nu_min}, {nu_max}) for d_v={d_v}"
        if self.eps <= 0:
            return False, f"eps must be positive, got {self.eps}"
        return True, "Model parameters valid"

    def check(self, d_v: int) -> "ModelParams":
        is_valid, message = self.validate(d_v)
        if not is_valid:
            raise ConfigurationError(message)
        return self


def _as_cells(f: np.ndarray) -> Tuple[np.ndarray, bool]:
    f = np.asarray(f, dtype=float)
    if f.ndim == 1:
        return f[None, :], True
    return f, False


def compute_moments(f: np.ndarray, vgrid: VelocityGrid) -> MomentSet:
    """
    Calcola i momenti discreti con pesi a rettangoli (dv)^d

    Args:
        f: Valori per cella e nodo, forma (n_cells, n_nodes) oppure (n_nodes,)
        vgrid: Griglia delle velocità

    Returns:
        MomentSet con asse 0 sulle celle
    """
    f, _ = _as_cells(f)
    if f.shape[1] != vgrid.n_nodes:
        raise ValueError(f"Slice length {f.shape[1]} does not match {vgrid.n_nodes} velocity nodes")
    nodes = vgrid.nodes
    w = vgrid.weight
    d = vgrid.d_v

    rho = f.sum(axis=1) * w
    bad = np.flatnonzero(~(rho > 0))
    if bad.size:
        raise NonpositiveDensity(f"Nonpositive density {rho[bad[0]]:.3e}", cell=int(bad[0]))

    momentum = (f @ nodes) * w
    U = momentum / rho[:, None]
    E = 0.5 * (f @ vgrid.speed_squared) * w

    outer = (nodes[:, :, None] * nodes[:, None, :]).reshape(-1, d * d)
    Sigma = ((f @ outer) * w).reshape(-1, d, d)
    Theta = Sigma / rho[:, None, None] - U[:, :, None] * U[:, None, :]
    T = np.trace(Theta, axis1=1, axis2=2) / d

    # q = 1/2 sum f |v-U|^2 (v-U)_1, espanso sui momenti grezzi
    s3 = (f @ (vgrid.speed_squared * nodes[:, 0])) * w
    trace_sigma = np.trace(Sigma, axis1=1, axis2=2)
    sigma_u = np.einsum('nab,na->nb', Sigma, U)[:, 0]
    u_sq = np.sum(U ** 2, axis=1)
    u1 = U[:, 0]
    centered = (s3 - u1 * trace_sigma - 2.0 * sigma_u
                + 2.0 * u1 * np.sum(U * momentum, axis=1)
                + u_sq * momentum[:, 0] - u_sq * u1 * rho)
    q = 0.5 * centered

    return MomentSet(rho=rho, U=U, E=E, T=T, Theta=Theta, Sigma=Sigma, q=q)


def _determinant(m: np.ndarray) -> np.ndarray:
    d = m.shape[-1]
    if d == 1:
        return m[:, 0, 0].copy()
    if d == 2:
        return m[:, 0, 0] * m[:, 1, 1] - m[:, 0, 1] * m[:, 1, 0]
    return (m[:, 0, 0] * (m[:, 1, 1] * m[:, 2, 2] - m[:, 1, 2] * m[:, 2, 1])
            - m[:, 0, 1] * (m[:, 1, 0] * m[:, 2, 2] - m[:, 1, 2] * m[:, 2, 0])
            + m[:, 0, 2] * (m[:, 1, 0] * m[:, 2, 1] - m[:, 1, 1] * m[:, 2, 0]))


def _cofactor_inverse(m: np.ndarray, det: np.ndarray) -> np.ndarray:
    d = m.shape[-1]
    inv = np.empty_like(m)
    if d == 1:
        inv[:, 0, 0] = 1.0 / det
        return inv
    if d == 2:
        inv[:, 0, 0] = m[:, 1, 1]
        inv[:, 1, 1] = m[:, 0, 0]
        inv[:, 0, 1] = -m[:, 0, 1]
        inv[:, 1, 0] = -m[:, 1, 0]
        return inv / det[:, None, None]
    for a in range(3):
        for b in range(3):
            r = [i for i in range(3) if i != b]
            c = [j for j in range(3) if j != a]
            minor = m[:, r[0], c[0]] * m[:, r[1], c[1]] - m[:, r[0], c[1]] * m[:, r[1], c[0]]
            inv[:, a, b] = (-1) ** (a + b) * minor
    return inv / det[:, None, None]


def relaxation_tensor(matrix: np.ndarray) -> RelaxationTensor:
    """
    Verifica SPD (criterio di Sylvester, stretto) e calcola inversa e determinante

    Args:
        matrix: Tensori simmetrici per cella, forma (n, d, d) oppure (d, d)

    Returns:
        RelaxationTensor con le stesse celle in ingresso
    """
    matrix = np.asarray(matrix, dtype=float)
    if matrix.ndim == 2:
        matrix = matrix[None]
    d = matrix.shape[-1]

    leading_ok = np.ones(matrix.shape[0], dtype=bool)
    for k in range(1, d + 1):
        leading_ok &= _determinant(matrix[:, :k, :k]) > 0
    bad = np.flatnonzero(~leading_ok)
    if bad.size:
        cell = int(bad[0])
        raise NonSPDTensor(f"Temperature tensor not SPD: {np.array2string(matrix[cell], precision=4)}",
                           cell=cell)

    det = _determinant(matrix)
    return RelaxationTensor(matrix=matrix, inverse=_cofactor_inverse(matrix, det), det=det)


def temperature_tensor(nu: float, Theta: np.ndarray, T: np.ndarray) -> RelaxationTensor:
    """Tensore di temperatura nu*Theta + (1-nu)*T*I per cella"""
    Theta = np.asarray(Theta, dtype=float)
    if Theta.ndim == 2:
        Theta = Theta[None]
    T = np.atleast_1d(np.asarray(T, dtype=float))
    identity = np.eye(Theta.shape[-1])
    matrix = nu * Theta + (1.0 - nu) * T[:, None, None] * identity
    return relaxation_tensor(matrix)


@njit(cache=True, parallel=True)
def _gaussian_kernel(rho, U, inverse, det, nodes, out):
    n_cells, n_nodes = out.shape
    d = nodes.shape[1]
    two_pi_d = (2.0 * math.pi) ** d
    for i in prange(n_cells):
        norm = rho[i] / math.sqrt(two_pi_d * det[i])
        for j in range(n_nodes):
            quad = 0.0
            for a in range(d):
                ca = nodes[j, a] - U[i, a]
                for b in range(d):
                    quad += ca * inverse[i, a, b] * (nodes[j, b] - U[i, b])
            out[i, j] = norm * math.exp(-0.5 * quad)


def eval_gaussian(rho: Union[float, np.ndarray], U: np.ndarray, tensor: RelaxationTensor,
                  vgrid: VelocityGrid) -> np.ndarray:
    """
    Valuta la Gaussiana anisotropa rho/sqrt(det(2 pi T)) exp(-(v-U)^T T^-1 (v-U)/2) sui nodi

    Args:
        rho: Densità per cella (o scalare)
        U: Velocità media, forma (n, d) oppure (d,)
        tensor: Tensore di temperatura SPD
        vgrid: Griglia delle velocità

    Returns:
        Valori (n_cells, n_nodes), oppure (n_nodes,) per ingresso scalare
    """
    scalar = np.ndim(rho) == 0
    rho = np.atleast_1d(np.asarray(rho, dtype=float))
    U = np.asarray(U, dtype=float).reshape(rho.shape[0], -1)
    bad = np.flatnonzero(~(rho > 0))
    if bad.size:
        raise NonpositiveDensity(f"Nonpositive density {rho[bad[0]]:.3e}", cell=int(bad[0]))

    out = np.empty((rho.shape[0], vgrid.n_nodes))
    _gaussian_kernel(rho, np.ascontiguousarray(U), np.ascontiguousarray(tensor.inverse),
                     np.ascontiguousarray(tensor.det), vgrid.nodes, out)
    return out[0] if scalar else out


def isotropic_tensor(T: Union[float, np.ndarray], d_v: int) -> RelaxationTensor:
    T = np.atleast_1d(np.asarray(T, dtype=float))
    return relaxation_tensor(T[:, None, None] * np.eye(d_v))


def eval_maxwellian(rho: Union[float, np.ndarray], U: np.ndarray, T: Union[float, np.ndarray],
                    vgrid: VelocityGrid) -> np.ndarray:
    """Maxwelliana locale: Gaussiana con tensore T*I"""
    n = np.atleast_1d(rho).shape[0]
    T = np.broadcast_to(np.atleast_1d(np.asarray(T, dtype=float)), (n,))
    try:
        tensor = isotropic_tensor(T, vgrid.d_v)
    except NonSPDTensor as error:
        raise NonSPDTensor("Nonpositive temperature in Maxwellian", cell=error.cell)
    return eval_gaussian(rho, U, tensor, vgrid)


def tensor_deviation(tensor: RelaxationTensor, T: np.ndarray,
                     cells: Optional[np.ndarray] = None) -> float:
    """Norma infinito di (tensore - T I) sulle celle selezionate"""
    matrix = tensor.matrix if cells is None else tensor.matrix[cells]
    T = np.atleast_1d(T) if cells is None else np.atleast_1d(T)[cells]
    return float(np.max(np.abs(matrix - T[:, None, None] * np.eye(matrix.shape[-1]))))

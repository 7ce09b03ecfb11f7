"""
Ricostruzione conservativa ai piedi delle caratteristiche: lineare, QCWENO23 e QCWENO35.

I valori nodali sono trattati come medie di cella di una funzione g; il valore
traslato in x_i - s è la media di g sulla cella traslata, scritta in forma di
flusso F_{k+1/2} = integrale dell'ultima frazione theta della cella k. La somma
telescopica dei flussi rende la ricostruzione conservativa per ogni traslazione.
"""
import math
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from typing import Dict, List, Tuple

import numpy as np

from .config import SMOOTHNESS_EPS
from .exceptions import StencilOutOfRange
from .phase_grid import BoundaryCondition, ghost_extend


class Kind(str, Enum):
    LINEAR = 'Linear'
    QCWENO23 = 'QCWENO23'
    QCWENO35 = 'QCWENO35'


# Mezza ampiezza dello stencil polinomiale per ciascun tipo (la cella del flusso vicino si aggiunge)
_POLY_HALFWIDTH = {Kind.LINEAR: 0, Kind.QCWENO23: 1, Kind.QCWENO35: 2}

# Sotto-stencil CWENO: (offset, peso lineare); il primo è il polinomio ottimo
_CWENO_STENCILS = {
    Kind.QCWENO23: [((-1, 0, 1), 0.5), ((-1, 0), 0.25), ((0, 1), 0.25)],
    Kind.QCWENO35: [((-2, -1, 0, 1, 2), 0.5), ((-2, -1, 0), 0.125),
                    ((-1, 0, 1), 0.25), ((0, 1, 2), 0.125)],
}


@dataclass(frozen=True)
class ReconstructionKind:
    """
    Tipo di ricostruzione; smoothness_eps moltiplica dx^2 nel regolarizzatore dei pesi.

    Gli indicatori di regolarità sono calcolati sui valori divisi per il massimo
    della fetta, quindi i pesi non dipendono dall'ampiezza di f e smoothness_eps
    è una costante O(1).
    """

    kind: Kind = Kind.LINEAR
    smoothness_eps: float = SMOOTHNESS_EPS

    def __post_init__(self):
        object.__setattr__(self, 'kind', Kind(self.kind))
        if self.smoothness_eps <= 0:
            raise ValueError(f"smoothness_eps must be positive, got {self.smoothness_eps}")

    @property
    def stencil_halfwidth(self) -> int:
        return _POLY_HALFWIDTH[self.kind] + 1

    def required_ghost_depth(self, shift: float, dx: float) -> int:
        """Celle fantasma necessarie per una traslazione s"""
        m, theta = split_shift(shift, dx)
        if theta == 0.0:
            return abs(m)
        return _POLY_HALFWIDTH[self.kind] + max(m + 1, -m)

    def max_ghost_depth(self, max_shift: float, dx: float) -> int:
        """Profondità sufficiente per ogni |s| <= max_shift"""
        return self.stencil_halfwidth + int(math.ceil(abs(max_shift) / dx)) + 1


def split_shift(shift: float, dx: float) -> Tuple[int, float]:
    """Scompone s = (m + theta) dx con m intero e theta in [0, 1)"""
    ratio = shift / dx
    m = math.floor(ratio)
    theta = ratio - m
    if theta >= 1.0:
        m, theta = m + 1, 0.0
    return int(m), float(theta)


def _averages_matrix(offsets: Tuple[int, ...]) -> np.ndarray:
    # A[r, l] = media sulla cella di offset o del monomio xi^l
    degree = len(offsets) - 1
    A = np.empty((len(offsets), degree + 1))
    for r, o in enumerate(offsets):
        for l in range(degree + 1):
            A[r, l] = ((o + 0.5) ** (l + 1) - (o - 0.5) ** (l + 1)) / (l + 1)
    return A


def _smoothness_matrix(degree: int) -> np.ndarray:
    """B[a, b] = sum_l integrale su [-1/2, 1/2] di d^l xi^a * d^l xi^b, l >= 1"""
    B = np.zeros((degree + 1, degree + 1))
    for a in range(degree + 1):
        for b in range(degree + 1):
            for l in range(1, min(a, b) + 1):
                power = a + b - 2 * l
                if power % 2:
                    continue
                ca = math.factorial(a) / math.factorial(a - l)
                cb = math.factorial(b) / math.factorial(b - l)
                B[a, b] += ca * cb * 2.0 * 0.5 ** (power + 1) / (power + 1)
    return B


@lru_cache(maxsize=None)
def _cweno_operators(kind: Kind) -> Dict[str, np.ndarray]:
    """Operatori valori -> coefficienti polinomiali, immersi nello stencil completo"""
    stencils = _CWENO_STENCILS[kind]
    full = stencils[0][0]
    degree = len(full) - 1
    operators: List[np.ndarray] = []
    for offsets, _ in stencils:
        local = np.linalg.inv(_averages_matrix(offsets))
        embedded = np.zeros((degree + 1, len(full)))
        columns = [full.index(o) for o in offsets]
        embedded[:local.shape[0], columns] = local
        operators.append(embedded)
    return {
        'offsets': np.array(full),
        'operators': np.stack(operators),
        'linear_weights': np.array([w for _, w in stencils]),
        'smoothness': _smoothness_matrix(degree),
    }


def _flux_weights(theta: float, degree: int) -> np.ndarray:
    l = np.arange(degree + 1)
    return (0.5 ** (l + 1) - (0.5 - theta) ** (l + 1)) / (l + 1)


def cweno_coefficients(values: np.ndarray, cells: np.ndarray, kind: Kind,
                       eps: float) -> np.ndarray:
    """
    Coefficienti (in xi = (x - x_k)/dx) del polinomio CWENO di ciascuna cella

    Args:
        values: Valori con celle fantasma sull'asse 0
        cells: Indici (nell'array esteso) delle celle da ricostruire
        kind: QCWENO23 o QCWENO35
        eps: Regolarizzatore dei pesi non lineari, O(dx^2) rispetto agli indicatori
            normalizzati; i pesi restano quelli lineari nei punti critici lisci

    Returns:
        Array (degree+1, len(cells), ...) di coefficienti
    """
    ops = _cweno_operators(kind)
    stencil = np.stack([values[cells + o] for o in ops['offsets']])
    coeffs = np.tensordot(ops['operators'], stencil, axes=([2], [0]))
    d = ops['linear_weights']

    optimal = coeffs[0]
    central = optimal.copy()
    for k in range(1, len(d)):
        central -= d[k] * coeffs[k]
    central /= d[0]

    # indicatori adimensionali: ogni fetta è divisa per il proprio massimo
    scale = np.max(np.abs(values), axis=0)
    scale = np.where(scale > 0.0, scale, 1.0)
    B = ops['smoothness']
    beta = np.stack([np.sum(c * np.tensordot(B, c, axes=([1], [0])), axis=0)
                     for c in coeffs / scale])
    alpha = d.reshape((-1,) + (1,) * (beta.ndim - 1)) / (eps + beta) ** 2
    omega = alpha / alpha.sum(axis=0)

    result = omega[0] * central
    for k in range(1, len(d)):
        result = result + omega[k] * coeffs[k]
    return result


def reconstruct_shifted(values: np.ndarray, shift: float, dx: float,
                        kind: ReconstructionKind, n_ghost: int = 0) -> np.ndarray:
    """
    Valuta la ricostruzione in x_i - s per tutte le celle interne

    Args:
        values: Valori con n_ghost celle fantasma per lato sull'asse 0
        shift: Traslazione s (qualsiasi segno e ampiezza)
        dx: Passo spaziale
        kind: Tipo di ricostruzione
        n_ghost: Celle fantasma presenti per lato

    Returns:
        Valori traslati (n, ...) con n = len(values) - 2 n_ghost
    """
    values = np.asarray(values, dtype=float)
    n = values.shape[0] - 2 * n_ghost
    m, theta = split_shift(shift, dx)
    needed = kind.required_ghost_depth(shift, dx)
    if needed > n_ghost:
        raise StencilOutOfRange(f"Shift {shift:.6g} needs {needed} ghost cells, {n_ghost} available")

    source = np.arange(n) + n_ghost - m
    if theta == 0.0:
        return values[source].copy()
    if kind.kind == Kind.LINEAR:
        return (1.0 - theta) * values[source] + theta * values[source - 1]

    first = n_ghost - m - 1
    cells = np.arange(first, first + n + 1)
    coeffs = cweno_coefficients(values, cells, kind.kind, kind.smoothness_eps * dx * dx)
    phi = _flux_weights(theta, coeffs.shape[0] - 1)
    flux = np.tensordot(phi, coeffs, axes=([0], [0]))
    return values[source] - flux[1:] + flux[:-1]


def linear_interpolate(values: np.ndarray, shift: float, dx: float, n_ghost: int = 0) -> np.ndarray:
    """Interpolazione lineare convessa al piede della caratteristica"""
    return reconstruct_shifted(values, shift, dx, ReconstructionKind(Kind.LINEAR), n_ghost)


def shift_periodic(values: np.ndarray, shift: float, dx: float,
                   kind: ReconstructionKind) -> np.ndarray:
    """Traslazione di dati periodici: estende con la profondità necessaria e ricostruisce"""
    depth = kind.required_ghost_depth(shift, dx)
    extended = ghost_extend(values, depth, BoundaryCondition.PERIODIC)
    return reconstruct_shifted(extended, shift, dx, kind, depth)

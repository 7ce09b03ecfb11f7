"""
Griglie spaziale e delle velocità, condizioni al bordo e contenitore del campo nello spazio delle fasi
"""
from dataclasses import dataclass
from enum import Enum
from functools import cached_property
from typing import Tuple, Union

import numpy as np

from .config import MIN_SPATIAL_CELLS
from .exceptions import GridError


class BoundaryCondition(str, Enum):
    PERIODIC = 'periodic'
    FREE_FLOW = 'free_flow'


class NodeLayout(str, Enum):
    PERIODIC_NODES = 'periodic_nodes'
    CELL_CENTERS = 'cell_centers'


@dataclass(frozen=True)
class SpatialGrid:
    """Griglia uniforme 1D; nodi periodici o centri cella a seconda del bordo"""

    x_left: float
    x_right: float
    n_cells: int
    bc: BoundaryCondition

    @property
    def dx(self) -> float:
        return (self.x_right - self.x_left) / self.n_cells

    @property
    def node_layout(self) -> NodeLayout:
        if self.bc == BoundaryCondition.PERIODIC:
            return NodeLayout.PERIODIC_NODES
        return NodeLayout.CELL_CENTERS

    @property
    def x(self) -> np.ndarray:
        offset = 0.0 if self.node_layout == NodeLayout.PERIODIC_NODES else 0.5
        return self.x_left + (np.arange(self.n_cells) + offset) * self.dx

    @property
    def length(self) -> float:
        return self.x_right - self.x_left


@dataclass(frozen=True)
class VelocityGrid:
    """
    Griglia tensoriale simmetrica [-v_max, v_max]^d con N_v+1 nodi per asse.

    I nodi sono in ordine C sugli assi (j_1, j_2[, j_3]): il campo di forma
    (n_cells, n_nodes) si rimodella in (n_cells, N_v+1, resto) raggruppando
    i nodi con la stessa prima componente.
    """

    v_max: float
    n_v: int
    d_v: int

    @property
    def dv(self) -> float:
        return 2.0 * self.v_max / self.n_v

    @cached_property
    def axis(self) -> np.ndarray:
        # v_min + j dv con v_min = -v_max; simmetria esatta rispetto a v = 0
        j = np.arange(self.n_v + 1) - self.n_v // 2
        return j * self.dv

    @property
    def shape(self) -> Tuple[int, ...]:
        return (self.n_v + 1,) * self.d_v

    @property
    def n_nodes(self) -> int:
        return (self.n_v + 1) ** self.d_v

    @property
    def weight(self) -> float:
        """Peso di quadratura a rettangoli (dv)^d"""
        return self.dv ** self.d_v

    @cached_property
    def nodes(self) -> np.ndarray:
        mesh = np.meshgrid(*([self.axis] * self.d_v), indexing='ij')
        return np.stack([m.ravel() for m in mesh], axis=1)

    @cached_property
    def speed_squared(self) -> np.ndarray:
        return np.sum(self.nodes ** 2, axis=1)

    @property
    def slab_size(self) -> int:
        """Nodi con la stessa prima componente della velocità"""
        return (self.n_v + 1) ** (self.d_v - 1)


@dataclass
class PhaseField:
    """Valori f_{i,j} sulla cella i e sul nodo di velocità j al tempo t"""

    spatial: SpatialGrid
    velocity: VelocityGrid
    values: np.ndarray
    t: float = 0.0

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        expected = (self.spatial.n_cells, self.velocity.n_nodes)
        if self.values.shape != expected:
            raise GridError(f"Field shape {self.values.shape} does not match grids {expected}")
        if not np.all(np.isfinite(self.values)):
            raise GridError("Field contains non-finite values")

    def copy(self) -> "PhaseField":
        return PhaseField(self.spatial, self.velocity, self.values.copy(), self.t)

    def with_values(self, values: np.ndarray, t: float) -> "PhaseField":
        return PhaseField(self.spatial, self.velocity, values, t)


@dataclass(frozen=True)
class CflSpec:
    cfl: float

    def __post_init__(self):
        if self.cfl <= 0:
            raise GridError(f"CFL number must be positive, got {self.cfl}")

    def time_step(self, spatial: SpatialGrid, velocity: VelocityGrid) -> float:
        return self.cfl * spatial.dx / velocity.v_max


def build_spatial_grid(x_left: float, x_right: float, n_cells: int,
                       bc: Union[str, BoundaryCondition]) -> SpatialGrid:
    """
    Costruisce la griglia spaziale uniforme

    Args:
        x_left: Estremo sinistro
        x_right: Estremo destro
        n_cells: Numero di celle (almeno 4)
        bc: Condizione al bordo ('periodic' o 'free_flow')

    Returns:
        SpatialGrid con layout dei nodi scelto dal bordo
    """
    if n_cells < MIN_SPATIAL_CELLS:
        raise GridError(f"Cell count {n_cells} below minimum {MIN_SPATIAL_CELLS}")
    if not x_right > x_left:
        raise GridError(f"Inverted spatial domain [{x_left}, {x_right}]")
    try:
        bc = BoundaryCondition(bc)
    except ValueError:
        raise GridError(f"Unknown boundary condition '{bc}'")
    return SpatialGrid(float(x_left), float(x_right), int(n_cells), bc)


def build_velocity_grid(v_max: float, n_v: int, d_v: int) -> VelocityGrid:
    """
    Costruisce la griglia tensoriale delle velocità

    Args:
        v_max: Velocità massima (v_min = -v_max)
        n_v: Numero di intervalli per asse, pari e almeno 2
        d_v: Dimensione in velocità (2 o 3)

    Returns:
        VelocityGrid con (n_v+1)^d_v nodi
    """
    if v_max <= 0:
        raise GridError(f"v_max must be positive, got {v_max}")
    if n_v < 2 or n_v % 2 != 0:
        raise GridError(f"N_v must be even and at least 2, got {n_v}")
    if d_v not in (2, 3):
        raise GridError(f"Velocity dimension must be 2 or 3, got {d_v}")
    return VelocityGrid(float(v_max), int(n_v), int(d_v))


def ghost_extend(field: Union[PhaseField, np.ndarray], n_ghost: int,
                 bc: Union[str, BoundaryCondition, None] = None) -> np.ndarray:
    """
    Estende i valori lungo l'asse spaziale (asse 0) con n_ghost celle fantasma per lato.

    Periodico: copia circolare (anche con più giri). Free-flow: estrapolazione costante.
    """
    if isinstance(field, PhaseField):
        values = field.values
        bc = field.spatial.bc if bc is None else bc
    else:
        values = np.asarray(field)
    if n_ghost < 0:
        raise GridError(f"Negative ghost depth {n_ghost}")
    if bc is None:
        raise GridError("Boundary condition required for raw arrays")
    bc = BoundaryCondition(bc)

    n = values.shape[0]
    index = np.arange(-n_ghost, n + n_ghost)
    if bc == BoundaryCondition.PERIODIC:
        index = index % n
    else:
        index = np.clip(index, 0, n - 1)
    return values[index]

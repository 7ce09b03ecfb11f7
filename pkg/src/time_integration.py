"""
Integratori temporali semi-Lagrangiani: primo ordine, DIRK e BDF.

Il trasporto avviene per fette di nodi con la stessa prima componente della
velocità: ogni fetta viene traslata di v_1 * c * dt con la ricostruzione scelta.
Il rilassamento è implicito e risolto in forma chiusa da relax_stage.
"""
import logging
import math
import time
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np

from .config import LOG_EVERY, TIME_TOLERANCE, ProblemConfig
from .exceptions import InsufficientHistory, SolverError
from .moments import MomentSet, ModelParams, TauLaw, compute_moments
from .phase_grid import (CflSpec, PhaseField, SpatialGrid, VelocityGrid, build_spatial_grid,
                         build_velocity_grid, ghost_extend)
from .problems import initial_field
from .projection import Projector, invariant_rows
from .reconstruction import Kind, ReconstructionKind, reconstruct_shifted
from .relaxation import StageResult, relax_stage

logger = logging.getLogger(__name__)

LINEAR = ReconstructionKind(Kind.LINEAR)


@dataclass(frozen=True)
class DirkTableau:
    """Tableau DIRK stiffly accurate: l'ultima riga di A coincide con i pesi b"""

    name: str
    A: Tuple[Tuple[float, ...], ...]
    c: Tuple[float, ...]

    @property
    def stages(self) -> int:
        return len(self.c)

    @property
    def b(self) -> Tuple[float, ...]:
        return self.A[-1]

    def validate(self, tol: float = 1e-14) -> Tuple[bool, str]:
        s = self.stages
        for k in range(s):
            row = self.A[k]
            if len(row) != k + 1:
                return False, f"{self.name}: row {k} must be lower triangular with {k + 1} entries"
            if row[k] <= 0:
                return False, f"{self.name}: diagonal entry a_{k}{k} must be positive"
            if abs(sum(row) - self.c[k]) > tol:
                return False, f"{self.name}: c_{k} differs from the row sum"
        if abs(sum(self.b) - 1.0) > tol:
            return False, f"{self.name}: weights do not sum to one"
        return True, f"{self.name} valid"

    def stability_at_infinity(self) -> float:
        """R(z) per z -> infinito: 1 - b^T A^-1 1 (zero per uno schema L-stabile)"""
        s = self.stages
        A = np.zeros((s, s))
        for k, row in enumerate(self.A):
            A[k, :len(row)] = row
        return float(1.0 - np.array(self.b) @ np.linalg.solve(A, np.ones(s)))


@dataclass(frozen=True)
class BdfScheme:
    """BDF a s passi: f~ = sum_k alpha_k R(f^{n+1-k}, k v dt), peso implicito beta dt"""

    name: str
    alpha: Tuple[float, ...]
    beta: float
    startup: str

    @property
    def steps(self) -> int:
        return len(self.alpha)


_GAMMA2 = 1.0 - math.sqrt(2.0) / 2.0
# Radice di x^3 - 3x^2 + 3x/2 - 1/6 in (1/6, 1/2)
_GAMMA3 = 0.43586652150845899942

DIRK1 = DirkTableau('DIRK1', ((1.0,),), (1.0,))
DIRK2 = DirkTableau('DIRK2', ((_GAMMA2,), (1.0 - _GAMMA2, _GAMMA2)), (_GAMMA2, 1.0))
DIRK3 = DirkTableau(
    'DIRK3',
    ((_GAMMA3,),
     ((1.0 - _GAMMA3) / 2.0, _GAMMA3),
     (-(6.0 * _GAMMA3 ** 2 - 16.0 * _GAMMA3 + 1.0) / 4.0,
      (6.0 * _GAMMA3 ** 2 - 20.0 * _GAMMA3 + 5.0) / 4.0,
      _GAMMA3)),
    (_GAMMA3, (1.0 + _GAMMA3) / 2.0, 1.0),
)

BDF1 = BdfScheme('BDF1', (1.0,), 1.0, 'FO')
BDF2 = BdfScheme('BDF2', (4.0 / 3.0, -1.0 / 3.0), 2.0 / 3.0, 'DIRK2')
BDF3 = BdfScheme('BDF3', (18.0 / 11.0, -9.0 / 11.0, 2.0 / 11.0), 6.0 / 11.0, 'DIRK3')

TABLEAUS = {'DIRK1': DIRK1, 'DIRK2': DIRK2, 'DIRK3': DIRK3}
BDF_SCHEMES = {'BDF1': BDF1, 'BDF2': BDF2, 'BDF3': BDF3}


@dataclass
class LedgerEntry:
    step: int
    time: float
    dt: float
    totals: np.ndarray
    kind: str
    alpha: Tuple[float, ...] = ()


@dataclass
class ConservationLedger:
    """Totali (m0, m1, m2) = (massa, quantità di moto, energia) dopo ogni passo"""

    entries: List[LedgerEntry] = field(default_factory=list)

    def append(self, entry: LedgerEntry) -> None:
        self.entries.append(entry)

    @property
    def totals(self) -> np.ndarray:
        return np.array([e.totals for e in self.entries])

    def __len__(self) -> int:
        return len(self.entries)


@dataclass
class SolverState:
    """Campo corrente, storia BDF (dal più recente), contatore e registro di conservazione"""

    field: PhaseField
    history: List[np.ndarray]
    history_dt: Optional[float] = None
    step: int = 0
    ledger: ConservationLedger = field(default_factory=ConservationLedger)
    last_stage: Optional[StageResult] = None
    max_principle: List[Dict] = field(default_factory=list)

    @property
    def t(self) -> float:
        return self.field.t

    @property
    def values(self) -> np.ndarray:
        return self.field.values


@dataclass
class SolverContext:
    """Griglie, parametri del modello, ricostruzione e proiettore condivisi dai passi"""

    spatial: SpatialGrid
    velocity: VelocityGrid
    params: ModelParams
    kind: ReconstructionKind
    projector: Optional[Projector] = None
    history_depth: int = 1
    check_max_principle: bool = False

    @classmethod
    def from_config(cls, config: ProblemConfig) -> "SolverContext":
        spatial = build_spatial_grid(config.x_left, config.x_right, config.n_x, config.bc)
        velocity = build_velocity_grid(config.v_max, config.n_v, config.d_v)
        params = ModelParams(config.nu, config.eps,
                             TauLaw(config.tau_law, config.tau_coefficient)).check(config.d_v)
        projector = Projector(velocity, config.weight_mode) if config.projection else None
        depth = BDF_SCHEMES[config.scheme].steps if config.scheme in BDF_SCHEMES else 1
        return cls(spatial, velocity, params, ReconstructionKind(config.resolved_reconstruction),
                   projector, depth, config.check_max_principle)


def conserved_totals(values: np.ndarray, ctx: SolverContext) -> np.ndarray:
    """Totali discreti sum_i sum_j f (1, v, |v|^2/2) dv^d dx"""
    return (values.sum(axis=0) @ invariant_rows(ctx.velocity).T) * ctx.spatial.dx


def initial_state(field_0: PhaseField, ctx: SolverContext) -> SolverState:
    state = SolverState(field=field_0, history=[field_0.values])
    state.ledger.append(LedgerEntry(0, field_0.t, 0.0, conserved_totals(field_0.values, ctx), 'initial'))
    return state


def transport(values: np.ndarray, factor: float, dt: float, ctx: SolverContext,
              kind: Optional[ReconstructionKind] = None) -> np.ndarray:
    """
    Trasla ogni fetta di velocità di v_1 * factor * dt

    Args:
        values: Campo (n_cells, n_nodes)
        factor: Moltiplicatore del passo (c_k, c_k - c_l oppure k per BDF)
        dt: Passo temporale
        ctx: Contesto del solutore
        kind: Ricostruzione (default quella del contesto)

    Returns:
        Campo traslato con la stessa forma
    """
    kind = ctx.kind if kind is None else kind
    vgrid = ctx.velocity
    dx = ctx.spatial.dx
    n = values.shape[0]
    slabs = values.reshape(n, vgrid.n_v + 1, vgrid.slab_size)
    depth = kind.max_ghost_depth(vgrid.v_max * abs(factor) * dt, dx)
    extended = ghost_extend(slabs, depth, ctx.spatial.bc)

    out = np.empty_like(slabs)
    for a, v1 in enumerate(vgrid.axis):
        out[:, a, :] = reconstruct_shifted(extended[:, a, :], v1 * factor * dt, dx, kind, depth)
    return out.reshape(n, -1)


def _advance(state: SolverState, values: np.ndarray, dt: float, ctx: SolverContext,
             stage: StageResult, kind: str, alpha: Tuple[float, ...] = ()) -> SolverState:
    if state.history_dt is None or math.isclose(dt, state.history_dt, rel_tol=1e-14):
        history = [values] + state.history[:ctx.history_depth - 1]
    else:
        history = [values] + state.history[:1]
    history = history[:max(ctx.history_depth, 1)]

    new_field = state.field.with_values(values, state.t + dt)
    step = state.step + 1
    state.ledger.append(LedgerEntry(step, new_field.t, dt, conserved_totals(values, ctx), kind, alpha))
    new_state = SolverState(field=new_field, history=history, history_dt=dt, step=step,
                            ledger=state.ledger, last_stage=stage, max_principle=state.max_principle)
    if ctx.check_max_principle:
        _verify_max_principle(state.values, new_state, ctx)
    return new_state


def _verify_max_principle(previous: np.ndarray, state: SolverState, ctx: SolverContext) -> Dict:
    """Verifica lower <= f^{n+1} <= max(|f^n|, |G|) elemento per elemento"""
    gaussian = state.last_stage.gaussian
    upper = max(float(np.max(np.abs(previous))), float(np.max(np.abs(gaussian))))
    lower = min(0.0, float(np.min(gaussian))) if ctx.projector is not None else 0.0
    values = state.values
    slack = 8.0 * np.finfo(float).eps
    ok = bool(np.min(values) >= lower - slack * upper and np.max(values) <= upper * (1.0 + slack))
    record = {'step': state.step, 'min': float(np.min(values)), 'max': float(np.max(values)),
              'lower': lower, 'upper': upper, 'ok': ok}
    state.max_principle.append(record)
    if not ok:
        logger.warning(f"Maximum principle violated at step {state.step}: "
                       f"[{record['min']:.3e}, {record['max']:.3e}] outside [{lower:.3e}, {upper:.3e}]")
    return record


def step_first_order(state: SolverState, dt: float, ctx: SolverContext) -> SolverState:
    """Eulero implicito con interpolazione lineare al piede della caratteristica"""
    f_tilde = transport(state.values, 1.0, dt, ctx, LINEAR)
    stage = relax_stage(f_tilde, ctx.velocity, ctx.params, dt, ctx.projector)
    return _advance(state, stage.values, dt, ctx, stage, 'dirk')


def step_dirk(state: SolverState, tableau: DirkTableau, dt: float, ctx: SolverContext,
              kind: Optional[ReconstructionKind] = None) -> SolverState:
    """
    Passo DIRK stiffly accurate con proiezione a ogni stadio

    Args:
        state: Stato corrente
        tableau: Tableau DIRK
        dt: Passo temporale
        ctx: Contesto del solutore
        kind: Ricostruzione (default quella del contesto)

    Returns:
        Nuovo stato con f^{n+1} = ultimo stadio
    """
    f_n = state.values
    scale = dt / ctx.params.eps
    relaxations: List[np.ndarray] = []
    stage = None
    for k in range(tableau.stages):
        f_tilde = transport(f_n, tableau.c[k], dt, ctx, kind)
        for l in range(k):
            a_kl = tableau.A[k][l]
            if a_kl != 0.0:
                shifted = transport(relaxations[l], tableau.c[k] - tableau.c[l], dt, ctx, kind)
                f_tilde = f_tilde + a_kl * scale * shifted
        stage = relax_stage(f_tilde, ctx.velocity, ctx.params, tableau.A[k][k] * dt, ctx.projector)
        relaxations.append(stage.relaxation)
    return _advance(state, stage.values, dt, ctx, stage, 'dirk')


def step_bdf(state: SolverState, scheme: BdfScheme, dt: float, ctx: SolverContext,
             kind: Optional[ReconstructionKind] = None) -> SolverState:
    """Passo BDF a s passi; richiede s campi passati con lo stesso dt"""
    if len(state.history) < scheme.steps:
        raise InsufficientHistory(f"{scheme.name} needs {scheme.steps} past fields, "
                                  f"{len(state.history)} available")
    if scheme.steps > 1 and (state.history_dt is None or
                             not math.isclose(dt, state.history_dt, rel_tol=1e-14)):
        raise InsufficientHistory(f"{scheme.name} history built with dt={state.history_dt}, got {dt}")

    f_tilde = scheme.alpha[0] * transport(state.history[0], 1.0, dt, ctx, kind)
    for k in range(2, scheme.steps + 1):
        f_tilde = f_tilde + scheme.alpha[k - 1] * transport(state.history[k - 1], float(k), dt, ctx, kind)
    stage = relax_stage(f_tilde, ctx.velocity, ctx.params, scheme.beta * dt, ctx.projector)
    return _advance(state, stage.values, dt, ctx, stage, 'bdf', scheme.alpha)


@dataclass
class RunResult:
    """Esito di un'esecuzione: stato finale, momenti, registro e tempi"""

    config: ProblemConfig
    state: SolverState
    moments: MomentSet
    n_steps: int
    elapsed: float

    @property
    def x(self) -> np.ndarray:
        return self.state.field.spatial.x

    @property
    def ledger(self) -> ConservationLedger:
        return self.state.ledger

    @property
    def max_principle_ok(self) -> bool:
        return all(record['ok'] for record in self.state.max_principle)


class KineticSolver:
    """Solutore ES-BGK semi-Lagrangiano guidato da un ProblemConfig"""

    def __init__(self, config: ProblemConfig):
        self.config = config.check()
        self.ctx = SolverContext.from_config(config)
        self.cfl = CflSpec(config.cfl)

    @property
    def dt(self) -> float:
        return self.cfl.time_step(self.ctx.spatial, self.ctx.velocity)

    def initial_state(self) -> SolverState:
        return initial_state(initial_field(self.config, self.ctx.spatial, self.ctx.velocity), self.ctx)

    def step(self, state: SolverState, dt: float) -> SolverState:
        """Un passo dello schema configurato (con avvio e ricostruzione della storia per BDF)"""
        scheme = self.config.scheme
        if scheme == 'FO':
            return step_first_order(state, dt, self.ctx)
        if scheme in TABLEAUS:
            return step_dirk(state, TABLEAUS[scheme], dt, self.ctx)

        bdf = BDF_SCHEMES[scheme]
        history_ready = (len(state.history) >= bdf.steps and
                         (bdf.steps == 1 or math.isclose(dt, state.history_dt, rel_tol=1e-14)))
        if history_ready:
            return step_bdf(state, bdf, dt, self.ctx)
        if state.step > 0:
            logger.warning(f"{bdf.name}: rebuilding history with a {bdf.startup} step (dt={dt:.3e})")
        if bdf.startup == 'FO':
            return step_first_order(state, dt, self.ctx)
        return step_dirk(state, TABLEAUS[bdf.startup], dt, self.ctx)

    def run(self, callback: Optional[Callable[[SolverState], None]] = None) -> RunResult:
        """
        Avanza da t = 0 a T_f con dt dalla CFL; l'ultimo passo è accorciato per arrivare a T_f

        Args:
            callback: Funzione chiamata con lo stato dopo ogni passo

        Returns:
            RunResult con stato finale, momenti e registro di conservazione
        """
        start = time.time()
        state = self.initial_state()
        t_final = self.config.t_final
        dt_nominal = self.dt
        logger.info(f"Running {self.config.problem} with {self.config.scheme}/"
                    f"{self.ctx.kind.kind.value}: N_x={self.config.n_x}, N_v={self.config.n_v}, "
                    f"eps={self.config.eps:g}, dt={dt_nominal:.4e}, T_f={t_final:g}")

        while t_final - state.t > TIME_TOLERANCE * max(1.0, t_final):
            dt = min(dt_nominal, t_final - state.t)
            try:
                state = self.step(state, dt)
            except SolverError as error:
                error.with_context(step=state.step + 1, time=state.t)
                logger.error(f"Run aborted: {error}")
                raise
            if callback is not None:
                callback(state)
            if state.step % LOG_EVERY == 0:
                logger.info(f"step {state.step}: t={state.t:.4f}")

        elapsed = time.time() - start
        logger.info(f"Completed {state.step} steps in {elapsed:.1f}s")
        return RunResult(config=self.config, state=state,
                         moments=compute_moments(state.values, self.ctx.velocity),
                         n_steps=state.step, elapsed=elapsed)

"""
Harness dei benchmark: studio di convergenza, profili CSV, rapporto di conservazione,
confronti con il riferimento Navier-Stokes e verifiche degli schemi
"""
import logging
import os
from dataclasses import asdict, dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from joblib import Parallel, delayed

from .config import (CONVERGENCE_EPS, CONVERGENCE_N_X, CONVERGENCE_SCHEMES, CSV_FLOAT_FORMAT,
                     FLUID_LIMIT_RATIO, LAX_EPS_SWEEP, NSE_REFINEMENT, PROFILE_COLUMNS,
                     RIEMANN_EPS_SWEEP, ProblemConfig, get_n_jobs, get_riemann_velocity_nodes)
from .exceptions import ConfigurationError, SolverError
from .metrics import SolutionMetrics, conserved_names
from .moments import MomentSet, compute_moments, eval_maxwellian, tensor_deviation
from .nse_reference import FluidState, TransportCoefficients, nse_run
from .phase_grid import build_spatial_grid
from .time_integration import (BDF1, BDF2, DIRK1, DIRK2, LINEAR, ConservationLedger, KineticSolver,
                               RunResult, SolverContext, SolverState, initial_state, step_bdf,
                               step_dirk, step_first_order)
from .problems import initial_field
from .utils import ensure_dir, write_profile_csv

logger = logging.getLogger(__name__)

metrics = SolutionMetrics()


@dataclass
class ConvergenceRow:
    """Coppia (N, 2N), errore L1 relativo di rho e ordine osservato"""

    scheme: str
    reconstruction: str
    eps: float
    n_coarse: int
    n_fine: int
    error: float = float('nan')
    rate: float = float('nan')
    status: str = 'ok'
    message: str = ''


@dataclass
class ConservationReport:
    """Difetti per passo e deriva cumulata di (massa, quantità di moto, energia)"""

    defects: np.ndarray
    drift: np.ndarray
    totals: np.ndarray
    n_steps: int
    kinds: List[str] = field(default_factory=list)

    @property
    def max_defect(self) -> np.ndarray:
        if self.n_steps == 0:
            return np.zeros(self.totals.shape[1])
        return self.defects.max(axis=0)

    @property
    def max_drift(self) -> float:
        return float(np.max(self.drift))

    def within_defect_bound(self, tau_max: float, dt: float, eps: float, factor: float = 1e-12) -> bool:
        """Difetto per passo <= factor (1 + tau dt / eps) m_0"""
        bound = factor * (1.0 + tau_max * dt / eps) * abs(self.totals[0, 0])
        return bool(np.all(self.max_defect <= bound))

    def to_frame(self) -> pd.DataFrame:
        rows = []
        for n in range(self.n_steps):
            row = {'step': n + 1, 'kind': self.kinds[n] if self.kinds else ''}
            row.update({f'defect_{name}': self.defects[n, k]
                        for k, name in enumerate(self._names())})
            rows.append(row)
        return pd.DataFrame(rows)

    def summary(self) -> Dict:
        summary = {'Steps': self.n_steps}
        for k, name in enumerate(self._names()):
            summary[f'Max Defect {name}'] = float(self.max_defect[k])
            summary[f'Drift {name}'] = float(self.drift[k])
        return summary

    def _names(self) -> List[str]:
        return conserved_names(self.totals.shape[1])


def run_kinetic(config: ProblemConfig) -> RunResult:
    return KineticSolver(config).run()


def kinetic_profile(x: np.ndarray, moments: MomentSet) -> pd.DataFrame:
    """Colonne x, rho, u1, T, Q per cella"""
    return pd.DataFrame({'x': x, 'rho': moments.rho, 'u1': moments.U[:, 0],
                         'T': moments.T, 'Q': moments.q}, columns=PROFILE_COLUMNS)


def fluid_profile(state: FluidState, coeffs: TransportCoefficients) -> pd.DataFrame:
    return pd.DataFrame({'x': state.grid.x, 'rho': state.rho, 'u1': state.u,
                         'T': state.T, 'Q': state.heat_flux(coeffs)}, columns=PROFILE_COLUMNS)


def profile_header(config: ProblemConfig, t: float, source: str) -> Dict[str, str]:
    return {
        'source': source,
        'problem': config.problem,
        'scheme': config.scheme,
        'reconstruction': config.resolved_reconstruction,
        'eps': repr(config.eps),
        't': repr(float(t)),
        'config': config.to_json(),
    }


def profile_path(config: ProblemConfig, source: str) -> str:
    tag = f"_{config.tag}" if config.tag else ''
    name = f"{config.problem}_{source}_{config.scheme}_eps{config.eps:g}_nx{config.n_x}{tag}.csv"
    return os.path.join(config.out_dir, name)


def emit_profiles(state: SolverState, moments: MomentSet, config: ProblemConfig,
                  path: Optional[str] = None) -> str:
    """
    Scrive il profilo (x, rho, u1, T, Q) dello stato cinetico

    Args:
        state: Stato del solutore
        moments: Momenti dello stato
        config: Configurazione ripetuta nell'intestazione
        path: File di destinazione (default in config.out_dir)

    Returns:
        Percorso del CSV scritto
    """
    path = path or profile_path(config, 'kinetic')
    df = kinetic_profile(state.field.spatial.x, moments)
    write_profile_csv(df, path, profile_header(config, state.t, 'kinetic'))
    logger.info(f"Profile with {len(df)} rows written to {path}")
    return path


def emit_fluid_profile(state: FluidState, config: ProblemConfig, path: Optional[str] = None) -> str:
    path = path or profile_path(config, 'nse')
    df = fluid_profile(state, TransportCoefficients.from_config(config))
    write_profile_csv(df, path, profile_header(config, state.t, 'nse'))
    logger.info(f"NSE profile with {len(df)} rows written to {path}")
    return path


def conservation_report(ledger: ConservationLedger) -> ConservationReport:
    """
    Difetto per passo (DIRK: rispetto al passo precedente, BDF: rispetto alla
    combinazione alpha) e deriva relativa cumulata

    Args:
        ledger: Registro dei totali del solutore

    Returns:
        ConservationReport
    """
    totals = ledger.totals
    steps = ledger.entries[1:]
    defects = metrics.step_defects(totals, [entry.alpha for entry in steps])
    report = ConservationReport(defects=defects, drift=metrics.cumulative_drift(totals),
                                totals=totals, n_steps=len(steps),
                                kinds=[entry.kind for entry in steps])
    logger.info(f"Conservation over {report.n_steps} steps: max drift {report.max_drift:.3e}")
    return report


def _density_run(config: ProblemConfig) -> Dict:
    """Esecuzione di un worker del pool: densità finale oppure messaggio d'errore"""
    try:
        result = run_kinetic(config)
        return {'n_x': config.n_x, 'rho': result.moments.rho, 'error': None}
    except SolverError as error:
        logger.error(f"Run N_x={config.n_x} failed: {error}")
        return {'n_x': config.n_x, 'rho': None, 'error': str(error)}


def _check_doubling(n_x_list: Sequence[int]) -> None:
    if len(n_x_list) < 2:
        raise ConfigurationError("Convergence study needs at least two grids")
    for coarse, fine in zip(n_x_list[:-1], n_x_list[1:]):
        if fine != 2 * coarse:
            raise ConfigurationError(f"Grid sizes must double: {coarse} -> {fine}")


def convergence_suite(base: ProblemConfig, n_x_list: Sequence[int] = CONVERGENCE_N_X,
                      eps_list: Sequence[float] = CONVERGENCE_EPS,
                      schemes: Sequence[str] = CONVERGENCE_SCHEMES,
                      n_jobs: Optional[int] = None) -> pd.DataFrame:
    """
    Studio di convergenza con riferimento sulla griglia successiva (N, 2N)

    Args:
        base: Configurazione di partenza
        n_x_list: Griglie, ciascuna il doppio della precedente
        eps_list: Valori di eps
        schemes: Schemi temporali (ricostruzione abbinata di default)
        n_jobs: Worker del pool (default ESBGK_N_JOBS)

    Returns:
        DataFrame con una riga ConvergenceRow per coppia
    """
    _check_doubling(list(n_x_list))
    n_jobs = get_n_jobs() if n_jobs is None else n_jobs
    combos = [(scheme, eps, n) for scheme in schemes for eps in eps_list for n in n_x_list]
    configs = [base.replace(scheme=scheme, eps=eps, n_x=n, reconstruction=None).check()
               for scheme, eps, n in combos]
    logger.info(f"Convergence suite: {len(configs)} runs on {n_jobs} workers")

    outputs = Parallel(n_jobs=n_jobs)(delayed(_density_run)(cfg) for cfg in configs)
    results = {combo: out for combo, out in zip(combos, outputs)}
    layout = build_spatial_grid(base.x_left, base.x_right, n_x_list[0], base.bc).node_layout.value

    rows: List[ConvergenceRow] = []
    for scheme in schemes:
        for eps in eps_list:
            pair_rows = []
            for coarse, fine in zip(n_x_list[:-1], n_x_list[1:]):
                row = ConvergenceRow(scheme, base.replace(scheme=scheme, reconstruction=None)
                                     .resolved_reconstruction, eps, coarse, fine)
                a, b = results[(scheme, eps, coarse)], results[(scheme, eps, fine)]
                if a['error'] or b['error']:
                    row.status = 'failed'
                    row.message = a['error'] or b['error']
                else:
                    restricted = metrics.restrict_to_coarse(b['rho'], layout)
                    row.error = metrics.relative_l1_error(a['rho'], restricted)
                pair_rows.append(row)
            for row, following in zip(pair_rows[:-1], pair_rows[1:]):
                row.rate = metrics.observed_rate(row.error, following.error)
            rows.extend(pair_rows)
            logger.info(f"{scheme} eps={eps:g}: " + ', '.join(
                f"({r.n_coarse},{r.n_fine}) {r.error:.3e}" for r in pair_rows))

    return pd.DataFrame([asdict(row) for row in rows])


def projection_ablation(config: ProblemConfig) -> Dict:
    """Deriva cumulata con proiezione attiva e disattivata sullo stesso problema"""
    drift_on = conservation_report(run_kinetic(config.replace(projection=True)).ledger).max_drift
    drift_off = conservation_report(run_kinetic(config.replace(projection=False)).ledger).max_drift
    ratio = drift_off / drift_on if drift_on > 0 else float('inf')
    logger.info(f"Projection ablation: drift on={drift_on:.3e}, off={drift_off:.3e}")
    return {'drift_on': drift_on, 'drift_off': drift_off, 'ratio': ratio}


def nse_reference_density(config: ProblemConfig) -> Tuple[FluidState, np.ndarray]:
    """
    Riferimento Navier-Stokes su una griglia NSE_REFINEMENT volte più fine

    Returns:
        Stato fluido fine e densità riportata sulla griglia cinetica
    """
    fluid = nse_run(config, refine=NSE_REFINEMENT)
    layout = build_spatial_grid(config.x_left, config.x_right, config.n_x, config.bc).node_layout.value
    return fluid, metrics.restrict_to_coarse(fluid.rho, layout, factor=NSE_REFINEMENT)


def _fluid_distance(config: ProblemConfig) -> Dict:
    try:
        kinetic = run_kinetic(config)
        _, rho_reference = nse_reference_density(config)
    except SolverError as error:
        logger.error(f"Fluid comparison eps={config.eps:g} failed: {error}")
        return {'eps': config.eps, 'n_v': config.n_v, 'l1_distance': float('nan'),
                'status': 'failed', 'message': str(error)}
    return {'eps': config.eps, 'n_v': config.n_v,
            'l1_distance': metrics.relative_l1_error(kinetic.moments.rho, rho_reference),
            'status': 'ok', 'message': ''}


def is_monotone_decreasing(values: Sequence[float]) -> bool:
    values = list(values)
    return all(np.isfinite(values)) and all(b < a for a, b in zip(values[:-1], values[1:]))


def annotate_fluid_limit(df: pd.DataFrame, bound: float = FLUID_LIMIT_RATIO) -> pd.DataFrame:
    """
    Aggiunge le colonne di esito dello sweep in eps

    'monotone': distanza strettamente decrescente; 'ratio': distanza all'ultimo eps
    divisa per quella al primo; 'ratio_ok': ratio <= bound. Valgono per tutta la tabella.
    """
    df = df.copy()
    distances = df['l1_distance'].to_numpy(dtype=float)
    df['monotone'] = is_monotone_decreasing(distances)
    ratio = float('nan')
    if len(distances) > 1 and np.isfinite(distances[[0, -1]]).all() and distances[0] > 0:
        ratio = float(distances[-1] / distances[0])
    df['ratio'] = ratio
    df['ratio_ok'] = bool(np.isfinite(ratio) and ratio <= bound)
    return df


def fluid_limit_trend(base: ProblemConfig, eps_list: Sequence[float] = RIEMANN_EPS_SWEEP,
                      n_jobs: Optional[int] = None, n_v: Optional[int] = None) -> pd.DataFrame:
    """
    Distanza L1 di rho tra ES-BGK e Navier-Stokes al variare di eps (tubo d'urto di Riemann)

    Args:
        base: Configurazione del problema di Riemann
        eps_list: Valori di eps (decrescenti)
        n_jobs: Worker del pool
        n_v: Nodi di velocità per tutti gli eps (default quelli tabulati per eps)

    Returns:
        DataFrame (eps, n_v, l1_distance, status) con le colonne di annotate_fluid_limit
    """
    n_jobs = get_n_jobs() if n_jobs is None else n_jobs
    configs = [base.replace(eps=eps, n_v=n_v or get_riemann_velocity_nodes(eps)).check()
               for eps in eps_list]
    df = pd.DataFrame(Parallel(n_jobs=n_jobs)(delayed(_fluid_distance)(cfg) for cfg in configs))
    df = annotate_fluid_limit(df)
    logger.info(f"Fluid limit: ratio {df['ratio'].iloc[0]:.3f} (bound {FLUID_LIMIT_RATIO:g}), "
                f"monotone={bool(df['monotone'].iloc[0])}")
    return df


def lax_comparison(config: ProblemConfig) -> Dict:
    """Posizioni di urto e discontinuità di contatto e distanza L1 rispetto a Navier-Stokes"""
    kinetic = run_kinetic(config)
    _, rho_reference = nse_reference_density(config)
    result = metrics.calculate_all_metrics(kinetic.x, kinetic.moments.rho, rho_reference,
                                           totals=kinetic.ledger.totals)
    result['eps'] = config.eps
    result['dx'] = config.dx
    return result


def lax_sweep(base: ProblemConfig, eps_list: Sequence[float] = LAX_EPS_SWEEP,
              n_jobs: Optional[int] = None) -> pd.DataFrame:
    n_jobs = get_n_jobs() if n_jobs is None else n_jobs
    configs = [base.replace(eps=eps).check() for eps in eps_list]
    rows = Parallel(n_jobs=n_jobs)(delayed(lax_comparison)(cfg) for cfg in configs)
    return pd.DataFrame([{'eps': r['eps'], 'l1_distance': r['L1 Relative Error'],
                          'max_wave_shift_dx': r['Max Wave Shift (dx)']} for r in rows])


def scheme_reduction(config: ProblemConfig, n_steps: int = 10) -> Dict[str, float]:
    """
    Confronta primo ordine, DIRK a uno stadio e BDF a un passo con ricostruzione lineare

    Returns:
        Massima differenza relativa campo per campo rispetto al primo ordine
    """
    ctx = SolverContext.from_config(config.check())
    dt = KineticSolver(config).dt
    f0 = initial_field(config, ctx.spatial, ctx.velocity)
    first, dirk, bdf = (initial_state(f0, ctx) for _ in range(3))
    worst = {'DIRK1': 0.0, 'BDF1': 0.0}
    for _ in range(n_steps):
        first = step_first_order(first, dt, ctx)
        dirk = step_dirk(dirk, DIRK1, dt, ctx, LINEAR)
        bdf = step_bdf(bdf, BDF1, dt, ctx, LINEAR)
        scale = float(np.max(np.abs(first.values)))
        worst['DIRK1'] = max(worst['DIRK1'], float(np.max(np.abs(dirk.values - first.values))) / scale)
        worst['BDF1'] = max(worst['BDF1'], float(np.max(np.abs(bdf.values - first.values))) / scale)
    return worst


def asymptotic_limit_check(config: ProblemConfig, eps: float = 1e-10) -> Dict[str, Dict[str, float]]:
    """
    Un passo DIRK2 e un passo BDF2 (avviato con BDF1) a eps piccolo

    Returns:
        Per schema: distanza relativa dalla Maxwelliana e deviazione del tensore da T I
    """
    config = config.replace(eps=eps, scheme='BDF2', reconstruction=None).check()
    ctx = SolverContext.from_config(config)
    dt = KineticSolver(config).dt
    f0 = initial_field(config, ctx.spatial, ctx.velocity)

    def measure(state: SolverState) -> Dict[str, float]:
        moments = compute_moments(state.values, ctx.velocity)
        maxwellian = eval_maxwellian(moments.rho, moments.U, moments.T, ctx.velocity)
        stage = state.last_stage
        return {
            'maxwellian_distance': float(np.max(np.abs(state.values - maxwellian)) /
                                         np.max(np.abs(state.values))),
            'tensor_deviation': tensor_deviation(stage.tensor, stage.moments.T),
        }

    dirk = step_dirk(initial_state(f0, ctx), DIRK2, dt, ctx)
    bdf = step_bdf(step_bdf(initial_state(f0, ctx), BDF1, dt, ctx), BDF2, dt, ctx)
    return {'DIRK2': measure(dirk), 'BDF2': measure(bdf)}


def run_problem(config: ProblemConfig, with_reference: bool = False) -> Dict:
    """
    Esegue un problema, scrive profilo e rapporto di conservazione in config.out_dir

    Args:
        config: Configurazione del problema
        with_reference: Esegue anche il riferimento Navier-Stokes e ne scrive il profilo

    Returns:
        Dizionario con risultato, rapporto e percorsi scritti
    """
    ensure_dir(config.out_dir)
    result = run_kinetic(config)
    report = conservation_report(result.ledger)
    outputs = {
        'result': result,
        'report': report,
        'profile': emit_profiles(result.state, result.moments, config),
    }
    conservation_path = profile_path(config, 'conservation')
    report.to_frame().to_csv(conservation_path, index=False, float_format=CSV_FLOAT_FORMAT)
    outputs['conservation'] = conservation_path

    if with_reference:
        fluid, rho_reference = nse_reference_density(config)
        outputs['fluid'] = fluid
        outputs['fluid_profile'] = emit_fluid_profile(fluid, config)
        outputs['metrics'] = metrics.calculate_all_metrics(result.x, result.moments.rho, rho_reference,
                                                           totals=result.ledger.totals)
    return outputs

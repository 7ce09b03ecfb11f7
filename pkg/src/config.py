"""
Configurazione centralizzata dei problemi di benchmark e dei parametri numerici
"""
import json
import logging
import math
import os
from dataclasses import asdict, dataclass, fields, replace
from typing import Dict, List, Optional, Tuple

from .exceptions import ConfigurationError

# Schemi temporali e ricostruzioni supportati
SCHEMES = ('FO', 'DIRK2', 'DIRK3', 'BDF2', 'BDF3')
RECONSTRUCTIONS = ('Linear', 'QCWENO23', 'QCWENO35')
PROBLEMS = ('accuracy', 'riemann', 'lax', 'custom')
BOUNDARY_CONDITIONS = ('periodic', 'free_flow')
TAU_LAWS = ('constant', 'density', 'density_sqrt_t')
WEIGHT_MODES = ('maxwellian', 'uniform')

# Abbinamento di default schema temporale -> ricostruzione
DEFAULT_RECONSTRUCTION = {
    'FO': 'Linear',
    'DIRK2': 'QCWENO23',
    'BDF2': 'QCWENO23',
    'DIRK3': 'QCWENO35',
    'BDF3': 'QCWENO35',
}

# Parametri numerici
MIN_SPATIAL_CELLS = 4
SMOOTHNESS_EPS = 20.0  # moltiplica dx^2 nei pesi non lineari (indicatori normalizzati per fetta)
PROJECTION_TOLERANCE = 1e-13  # residuo relativo dei momenti dopo la proiezione
WEIGHT_FLOOR = 1e-30  # pavimento dei pesi della proiezione
TIME_TOLERANCE = 1e-12  # tolleranza relativa sul tempo finale
LOG_EVERY = 50  # passi tra due messaggi di avanzamento

# Riferimento Navier-Stokes
NSE_CFL = 0.4
NSE_DIFFUSIVE_SAFETY = 0.25
NSE_REFINEMENT = 4  # celle Navier-Stokes per cella cinetica nei confronti

# Formato dei profili CSV (17 cifre significative)
CSV_FLOAT_FORMAT = '%.17g'
PROFILE_COLUMNS = ['x', 'rho', 'u1', 'T', 'Q']

# Variabili di ambiente
N_JOBS_ENV = 'ESBGK_N_JOBS'
LOG_LEVEL_ENV = 'ESBGK_LOG_LEVEL'

# Preset dei problemi di benchmark
PROBLEM_DEFAULTS = {
    'accuracy': {
        'd_v': 2, 'x_left': -1.0, 'x_right': 1.0, 'bc': 'periodic',
        'v_max': 10.0, 'n_v': 32, 'n_x': 80, 'nu': -1.0,
        'tau_law': 'constant', 'tau_coefficient': 1.0,
        'cfl': 4.0, 't_final': 0.32, 'eps': 1.0, 'sigma': 10.0,
        'scheme': 'DIRK2',
    },
    'riemann': {
        'd_v': 2, 'x_left': -1.0, 'x_right': 2.0, 'bc': 'free_flow',
        'v_max': 15.0, 'n_v': 160, 'n_x': 200, 'nu': -1.0,
        'tau_law': 'density', 'tau_coefficient': 0.9 * math.pi / 2.0,
        'cfl': 2.0, 't_final': 0.4, 'eps': 0.5, 'scheme': 'DIRK2',
    },
    'lax': {
        'd_v': 3, 'x_left': -5.0, 'x_right': 5.0, 'bc': 'free_flow',
        'v_max': 20.0, 'n_v': 40, 'n_x': 200, 'nu': -0.5,
        'tau_law': 'density_sqrt_t', 'tau_coefficient': 2.0 / 3.0,
        'cfl': 2.0, 't_final': 1.3, 'eps': 1e-3, 'scheme': 'DIRK2',
    },
    'custom': {
        'd_v': 2, 'x_left': -1.0, 'x_right': 1.0, 'bc': 'free_flow',
        'v_max': 10.0, 'n_v': 32, 'n_x': 100, 'nu': -0.5,
        'tau_law': 'constant', 'tau_coefficient': 1.0,
        'cfl': 2.0, 't_final': 0.1, 'eps': 1e-2, 'scheme': 'FO',
        'left_state': [1.0, 0.0, 0.0, 1.0], 'right_state': [0.125, 0.0, 0.0, 0.8],
        'interface': 0.0,
    },
}

# Stati iniziali (rho, u_1, ..., u_d, T)
RIEMANN_MACH = 2.5
RIEMANN_LEFT = (1.0, RIEMANN_MACH * math.sqrt(2.0), 0.0, 1.0)
RIEMANN_RIGHT = (0.125, 0.0, 0.0, 0.25)
RIEMANN_INTERFACE = 0.5
LAX_LEFT = (0.445, 0.698, 0.0, 0.0, 3.528)
LAX_RIGHT = (0.5, 0.0, 0.0, 0.0, 0.571)
LAX_INTERFACE = 0.0

# Risoluzione in velocità per il test di Riemann al variare di eps
RIEMANN_VELOCITY_NODES = {0.5: 160, 0.1: 96}

# Sweep dei benchmark
CONVERGENCE_N_X = (80, 160, 320, 640)
CONVERGENCE_EPS = (1e-4, 1e-3, 1e-2, 1e-1, 1.0)
CONVERGENCE_SCHEMES = ('DIRK2', 'BDF2', 'DIRK3', 'BDF3')
RIEMANN_EPS_SWEEP = (0.5, 0.1, 0.01)
LAX_EPS_SWEEP = (1e-1, 1e-2, 1e-3)
FLUID_LIMIT_RATIO = 0.25  # distanza a eps minimo rispetto a eps massimo nello sweep di Riemann


def get_problem_defaults(problem: str) -> Dict:
    """Restituisce una copia dei parametri di default di un problema"""
    if problem not in PROBLEM_DEFAULTS:
        raise ConfigurationError(f"Unknown problem '{problem}'")
    defaults = dict(PROBLEM_DEFAULTS[problem])
    for key in ('left_state', 'right_state'):
        if key in defaults:
            defaults[key] = list(defaults[key])
    return defaults


def get_default_reconstruction(scheme: str) -> str:
    """Restituisce la ricostruzione abbinata allo schema temporale"""
    if scheme not in DEFAULT_RECONSTRUCTION:
        raise ConfigurationError(f"Unknown scheme '{scheme}'")
    return DEFAULT_RECONSTRUCTION[scheme]


def get_admissible_nu_range(d_v: int) -> Tuple[float, float]:
    """Intervallo [min, max) ammesso per nu in funzione della dimensione in velocità"""
    if d_v == 3:
        return (-0.5, 1.0)
    if d_v == 2:
        return (-1.0, 1.0)
    raise ConfigurationError(f"Velocity dimension must be 2 or 3, got {d_v}")


def get_riemann_velocity_nodes(eps: float) -> int:
    """N_v usato per il tubo d'urto di Riemann a un dato eps"""
    return RIEMANN_VELOCITY_NODES.get(eps, PROBLEM_DEFAULTS['riemann']['n_v'])


def get_n_jobs() -> int:
    """Numero di worker del pool (variabile ESBGK_N_JOBS, default tutti i core)"""
    value = os.environ.get(N_JOBS_ENV)
    if value is None or value.strip() == '':
        return -1
    try:
        return int(value)
    except ValueError:
        logging.getLogger(__name__).warning(f"Ignoring invalid {N_JOBS_ENV}={value!r}")
        return -1


def get_log_level() -> int:
    """Livello di logging (variabile ESBGK_LOG_LEVEL, default INFO)"""
    name = os.environ.get(LOG_LEVEL_ENV, 'INFO').upper()
    return getattr(logging, name, logging.INFO)


@dataclass
class ProblemConfig:
    """Parametri fisici e numerici di un'esecuzione"""

    problem: str = 'accuracy'
    eps: float = 1.0
    nu: float = -1.0
    tau_law: str = 'constant'
    tau_coefficient: float = 1.0
    x_left: float = -1.0
    x_right: float = 1.0
    n_x: int = 80
    n_v: int = 32
    v_max: float = 10.0
    d_v: int = 2
    bc: str = 'periodic'
    cfl: float = 4.0
    t_final: float = 0.32
    scheme: str = 'DIRK2'
    reconstruction: Optional[str] = None
    projection: bool = True
    weight_mode: str = 'maxwellian'
    sigma: float = 10.0
    left_state: Optional[List[float]] = None
    right_state: Optional[List[float]] = None
    interface: float = 0.0
    check_max_principle: bool = False
    out_dir: str = 'results'
    tag: str = ''

    @classmethod
    def for_problem(cls, problem: str, **overrides) -> "ProblemConfig":
        """
        Costruisce la configurazione di un problema di benchmark

        Args:
            problem: Nome del problema (accuracy, riemann, lax, custom)
            **overrides: Campi da sovrascrivere rispetto al preset

        Returns:
            ProblemConfig con il preset e le modifiche richieste
        """
        values = get_problem_defaults(problem)
        values['problem'] = problem
        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls.from_dict(values)

    @property
    def resolved_reconstruction(self) -> str:
        if self.reconstruction:
            return self.reconstruction
        return get_default_reconstruction(self.scheme)

    @property
    def dx(self) -> float:
        return (self.x_right - self.x_left) / self.n_x

    def validate(self) -> Tuple[bool, str]:
        """
        Valida la configurazione

        Returns:
            Tupla (is_valid, message)
        """
        if self.problem not in PROBLEMS:
            return False, f"Unknown problem '{self.problem}'"
        if self.scheme not in SCHEMES:
            return False, f"Unknown scheme '{self.scheme}'"
        if self.resolved_reconstruction not in RECONSTRUCTIONS:
            return False, f"Unknown reconstruction '{self.reconstruction}'"
        if self.bc not in BOUNDARY_CONDITIONS:
            return False, f"Unknown boundary condition '{self.bc}'"
        if self.tau_law not in TAU_LAWS:
            return False, f"Unknown tau law '{self.tau_law}'"
        if self.weight_mode not in WEIGHT_MODES:
            return False, f"Unknown projection weight mode '{self.weight_mode}'"
        if self.d_v not in (2, 3):
            return False, f"Velocity dimension must be 2 or 3, got {self.d_v}"
        if not self.x_right > self.x_left:
            return False, "Inverted spatial domain"
        if self.n_x < MIN_SPATIAL_CELLS:
            return False, f"n_x must be at least {MIN_SPATIAL_CELLS}"
        if self.n_v < 2 or self.n_v % 2 != 0:
            return False, "n_v must be even and at least 2"
        if self.v_max <= 0:
            return False, "v_max must be positive"
        if self.eps <= 0:
            return False, "eps must be positive"
        if self.cfl <= 0:
            return False, "cfl must be positive"
        if self.t_final < 0:
            return False, "t_final must be non-negative"
        if self.tau_coefficient <= 0:
            return False, "tau coefficient must be positive"
        if self.problem == 'accuracy' and self.sigma <= 0:
            return False, "sigma must be positive"

        nu_min, nu_max = get_admissible_nu_range(self.d_v)
        if not nu_min <= self.nu < nu_max:
            return False, f"nu={self.nu} outside [{nu_min}, {nu_max}) for d_v={self.d_v}"

        if self.problem == 'custom':
            for name in ('left_state', 'right_state'):
                state = getattr(self, name)
                if state is None or len(state) != self.d_v + 2:
                    return False, f"{name} must hold (rho, u_1..u_d, T) with {self.d_v + 2} values"
                if state[0] <= 0 or state[-1] <= 0:
                    return False, f"{name} needs positive density and temperature"

        return True, "Configuration valid"

    def check(self) -> "ProblemConfig":
        """Solleva ConfigurationError se la configurazione non è valida"""
        is_valid, message = self.validate()
        if not is_valid:
            raise ConfigurationError(message)
        return self

    def replace(self, **changes) -> "ProblemConfig":
        return replace(self, **changes)

    def to_dict(self) -> Dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, values: Dict) -> "ProblemConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(values) - known
        if unknown:
            raise ConfigurationError(f"Unknown configuration keys: {sorted(unknown)}")
        return cls(**values)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "ProblemConfig":
        return cls.from_dict(json.loads(text))

    def save(self, path: str) -> None:
        with open(path, 'w') as handle:
            json.dump(self.to_dict(), handle, indent=2, sort_keys=True)

    @classmethod
    def load(cls, path: str) -> "ProblemConfig":
        with open(path) as handle:
            return cls.from_dict(json.load(handle))

"""
Riferimento fluido 1D: Navier-Stokes comprimibile con i coefficienti di trasporto
coerenti con il modello ES-BGK, più il risolutore di Riemann esatto per Eulero
"""
import logging
import math
from dataclasses import dataclass
from typing import Callable, Optional, Tuple

import numpy as np
from scipy.optimize import brentq

from .config import NSE_CFL, NSE_DIFFUSIVE_SAFETY, TIME_TOLERANCE, LOG_EVERY, ProblemConfig
from .exceptions import FluidVacuum
from .moments import ModelParams, TauLaw
from .phase_grid import SpatialGrid, build_spatial_grid, ghost_extend
from .problems import initial_primitives

logger = logging.getLogger(__name__)


@dataclass
class TransportCoefficients:
    """mu = p / ((1 - nu) tau), kappa = ((d+2)/2) p / tau con p = rho T"""

    nu: float
    tau_law: TauLaw
    d_v: int

    @classmethod
    def from_model(cls, params: ModelParams, d_v: int) -> "TransportCoefficients":
        return cls(params.nu, params.tau_law, d_v)

    @classmethod
    def from_config(cls, config: ProblemConfig) -> "TransportCoefficients":
        return cls(config.nu, TauLaw(config.tau_law, config.tau_coefficient), config.d_v)

    def viscosity(self, rho: np.ndarray, T: np.ndarray) -> np.ndarray:
        return rho * T / ((1.0 - self.nu) * self.tau_law(rho, T))

    def conductivity(self, rho: np.ndarray, T: np.ndarray) -> np.ndarray:
        return 0.5 * (self.d_v + 2) * rho * T / self.tau_law(rho, T)

    @property
    def prandtl(self) -> float:
        return 1.0 / (1.0 - self.nu)

    def prandtl_at(self, rho: float, T: float) -> float:
        """Pr = ((d+2)/2) mu / kappa valutato dai coefficienti"""
        return 0.5 * (self.d_v + 2) * float(self.viscosity(rho, T) / self.conductivity(rho, T))


@dataclass
class FluidState:
    """Variabili conservative (rho, rho u, E) per cella"""

    grid: SpatialGrid
    conserved: np.ndarray
    d_v: int
    eps: float
    t: float = 0.0

    @classmethod
    def from_primitives(cls, grid: SpatialGrid, rho: np.ndarray, u: np.ndarray, T: np.ndarray,
                        d_v: int, eps: float) -> "FluidState":
        rho = np.asarray(rho, dtype=float)
        u = np.asarray(u, dtype=float)
        E = 0.5 * d_v * rho * np.asarray(T, dtype=float) + 0.5 * rho * u ** 2
        return cls(grid, np.column_stack([rho, rho * u, E]), d_v, eps)

    @property
    def gamma(self) -> float:
        return (self.d_v + 2.0) / self.d_v

    @property
    def rho(self) -> np.ndarray:
        return self.conserved[:, 0]

    @property
    def u(self) -> np.ndarray:
        return self.conserved[:, 1] / self.conserved[:, 0]

    @property
    def T(self) -> np.ndarray:
        internal = self.conserved[:, 2] - 0.5 * self.conserved[:, 1] ** 2 / self.conserved[:, 0]
        return 2.0 * internal / (self.d_v * self.conserved[:, 0])

    @property
    def p(self) -> np.ndarray:
        return self.rho * self.T

    def totals(self) -> np.ndarray:
        return self.conserved.sum(axis=0) * self.grid.dx

    def entropy(self) -> float:
        """Entropia matematica totale sum -rho ln(p / rho^gamma) dx"""
        rho = self.rho
        return float(np.sum(-rho * np.log(self.p / rho ** self.gamma)) * self.grid.dx)

    def heat_flux(self, coeffs: TransportCoefficients) -> np.ndarray:
        """q = -eps kappa dT/dx con differenze centrate"""
        T = self.T
        return -self.eps * coeffs.conductivity(self.rho, T) * np.gradient(T, self.grid.dx)


def _primitives(U: np.ndarray, d_v: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    rho = U[:, 0]
    bad = np.flatnonzero(~(rho > 0))
    if bad.size:
        raise FluidVacuum(f"Vacuum: density {rho[bad[0]]:.3e}", cell=int(bad[0]))
    u = U[:, 1] / rho
    p = (2.0 / d_v) * (U[:, 2] - 0.5 * rho * u ** 2)
    bad = np.flatnonzero(~(p > 0))
    if bad.size:
        raise FluidVacuum(f"Negative pressure {p[bad[0]]:.3e}", cell=int(bad[0]))
    return rho, u, p


def _minmod(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.where(a * b > 0, np.sign(a) * np.minimum(np.abs(a), np.abs(b)), 0.0)


def _euler_flux(rho: np.ndarray, u: np.ndarray, p: np.ndarray, d_v: int) -> np.ndarray:
    E = 0.5 * d_v * p + 0.5 * rho * u ** 2
    return np.column_stack([rho * u, rho * u ** 2 + p, (E + p) * u])


def _conserved(rho: np.ndarray, u: np.ndarray, p: np.ndarray, d_v: int) -> np.ndarray:
    return np.column_stack([rho, rho * u, 0.5 * d_v * p + 0.5 * rho * u ** 2])


def _rhs(U: np.ndarray, grid: SpatialGrid, coeffs: TransportCoefficients,
         eps: float, d_v: int) -> np.ndarray:
    """Residuo -(F_{i+1/2} - F_{i-1/2}) / dx con flusso Rusanov su stati MUSCL-minmod"""
    gamma = (d_v + 2.0) / d_v
    dx = grid.dx
    rho, u, p = _primitives(ghost_extend(U, 2, grid.bc), d_v)
    W = np.column_stack([rho, u, p])

    slopes = np.zeros_like(W)
    slopes[1:-1] = _minmod(W[1:-1] - W[:-2], W[2:] - W[1:-1])
    left = (W + 0.5 * slopes)[1:-2]
    right = (W - 0.5 * slopes)[2:-1]

    fluxes = []
    speeds = []
    for state in (left, right):
        r, v, pr = state[:, 0], state[:, 1], state[:, 2]
        fluxes.append(_euler_flux(r, v, pr, d_v))
        speeds.append(np.abs(v) + np.sqrt(gamma * pr / r))
    a_max = np.maximum(speeds[0], speeds[1])[:, None]
    flux = 0.5 * (fluxes[0] + fluxes[1]) - 0.5 * a_max * (
        _conserved(right[:, 0], right[:, 1], right[:, 2], d_v)
        - _conserved(left[:, 0], left[:, 1], left[:, 2], d_v))

    if eps > 0:
        T = p / rho
        rho_f = 0.5 * (rho[1:-2] + rho[2:-1])
        T_f = 0.5 * (T[1:-2] + T[2:-1])
        u_f = 0.5 * (u[1:-2] + u[2:-1])
        du = (u[2:-1] - u[1:-2]) / dx
        dT = (T[2:-1] - T[1:-2]) / dx
        stress = eps * coeffs.viscosity(rho_f, T_f) * (2.0 - 2.0 / d_v) * du
        heat = eps * coeffs.conductivity(rho_f, T_f) * dT
        flux[:, 1] -= stress
        flux[:, 2] -= stress * u_f + heat

    return -(flux[1:] - flux[:-1]) / dx


def stable_time_step(state: FluidState, coeffs: TransportCoefficients, cfl: float = NSE_CFL) -> float:
    """Minimo tra il limite advettivo e quello diffusivo"""
    rho, u, p = _primitives(state.conserved, state.d_v)
    dx = state.grid.dx
    dt = cfl * dx / float(np.max(np.abs(u) + np.sqrt(state.gamma * p / rho)))
    if state.eps > 0:
        T = p / rho
        viscous = coeffs.viscosity(rho, T) * (2.0 - 2.0 / state.d_v) / rho
        thermal = coeffs.conductivity(rho, T) / (0.5 * state.d_v * rho)
        diffusivity = state.eps * float(np.max(np.maximum(viscous, thermal)))
        if diffusivity > 0:
            dt = min(dt, NSE_DIFFUSIVE_SAFETY * dx * dx / diffusivity)
    return dt


def nse_step(state: FluidState, dt: float, coeffs: TransportCoefficients) -> FluidState:
    """Un passo SSP-RK2 (Heun) del sistema di Navier-Stokes"""
    U0 = state.conserved
    args = (state.grid, coeffs, state.eps, state.d_v)
    U1 = U0 + dt * _rhs(U0, *args)
    U2 = 0.5 * U0 + 0.5 * (U1 + dt * _rhs(U1, *args))
    _primitives(U2, state.d_v)
    return FluidState(state.grid, U2, state.d_v, state.eps, state.t + dt)


def advance_fluid(state: FluidState, coeffs: TransportCoefficients, t_final: float,
                  cfl: float = NSE_CFL,
                  callback: Optional[Callable[[FluidState], None]] = None) -> FluidState:
    """Avanza fino a t_final con passo automatico (ultimo passo accorciato)"""
    n_steps = 0
    while t_final - state.t > TIME_TOLERANCE * max(1.0, t_final):
        dt = min(stable_time_step(state, coeffs, cfl), t_final - state.t)
        try:
            state = nse_step(state, dt, coeffs)
        except FluidVacuum as error:
            error.with_context(step=n_steps + 1, time=state.t)
            logger.error(f"Fluid run aborted: {error}")
            raise
        n_steps += 1
        if callback is not None:
            callback(state)
        if n_steps % (20 * LOG_EVERY) == 0:
            logger.debug(f"NSE step {n_steps}: t={state.t:.4f}")
    logger.info(f"NSE reached t={state.t:.4f} in {n_steps} steps")
    return state


def nse_run(config: ProblemConfig, eps: Optional[float] = None,
            callback: Optional[Callable[[FluidState], None]] = None, refine: int = 1) -> FluidState:
    """
    Esegue il riferimento Navier-Stokes per un problema configurato

    Args:
        config: Configurazione del problema (griglia spaziale, nu, legge di tau, T_f)
        eps: Scala di Knudsen dei flussi dissipativi (default config.eps; 0 = Eulero)
        callback: Funzione chiamata dopo ogni passo
        refine: Celle fluide per cella della griglia cinetica

    Returns:
        Stato fluido al tempo finale su refine * N_x celle
    """
    if refine < 1:
        raise ValueError(f"Refinement factor must be a positive integer, got {refine}")
    grid = build_spatial_grid(config.x_left, config.x_right, config.n_x * refine, config.bc)
    rho, U, T = initial_primitives(config, grid.x)
    eps = config.eps if eps is None else eps
    state = FluidState.from_primitives(grid, rho, U[:, 0], T, config.d_v, eps)
    coeffs = TransportCoefficients.from_config(config)
    return advance_fluid(state, coeffs, config.t_final, callback=callback)


class ExactRiemannSolver:
    """Risolutore di Riemann esatto per Eulero con gas ideale di indice gamma"""

    def __init__(self, gamma: float):
        if gamma <= 1.0:
            raise ValueError(f"Adiabatic index must exceed 1, got {gamma}")
        self.gamma = gamma

    def _sound_speed(self, rho: float, p: float) -> float:
        return math.sqrt(self.gamma * p / rho)

    def _wave_function(self, p_star: float, rho: float, p: float) -> float:
        g = self.gamma
        if p_star > p:
            A = 2.0 / ((g + 1.0) * rho)
            B = (g - 1.0) / (g + 1.0) * p
            return (p_star - p) * math.sqrt(A / (p_star + B))
        a = self._sound_speed(rho, p)
        return 2.0 * a / (g - 1.0) * ((p_star / p) ** ((g - 1.0) / (2.0 * g)) - 1.0)

    def star_state(self, left: Tuple[float, float, float],
                   right: Tuple[float, float, float]) -> Tuple[float, float]:
        """Pressione e velocità nella regione stellata; stati (rho, u, p)"""
        rho_l, u_l, p_l = left
        rho_r, u_r, p_r = right
        a_l, a_r = self._sound_speed(rho_l, p_l), self._sound_speed(rho_r, p_r)
        if 2.0 * (a_l + a_r) / (self.gamma - 1.0) <= u_r - u_l:
            raise FluidVacuum("Riemann data generate vacuum")

        def pressure_function(p_star):
            return (self._wave_function(p_star, rho_l, p_l)
                    + self._wave_function(p_star, rho_r, p_r) + (u_r - u_l))

        low, high = 1e-14 * (p_l + p_r), max(p_l, p_r)
        while pressure_function(high) < 0:
            high *= 2.0
        p_star = brentq(pressure_function, low, high, xtol=1e-15, rtol=1e-14, maxiter=500)
        u_star = 0.5 * (u_l + u_r) + 0.5 * (self._wave_function(p_star, rho_r, p_r)
                                            - self._wave_function(p_star, rho_l, p_l))
        return p_star, u_star

    def _sample_side(self, xi: float, rho: float, u: float, p: float,
                     p_star: float, u_star: float, sign: float) -> Tuple[float, float, float]:
        # sign = -1 lato sinistro, +1 lato destro
        g = self.gamma
        a = self._sound_speed(rho, p)
        if p_star > p:
            ratio = p_star / p
            shock_speed = u + sign * a * math.sqrt((g + 1.0) / (2.0 * g) * ratio + (g - 1.0) / (2.0 * g))
            if sign * (xi - shock_speed) >= 0:
                return rho, u, p
            rho_star = rho * (ratio + (g - 1.0) / (g + 1.0)) / ((g - 1.0) / (g + 1.0) * ratio + 1.0)
            return rho_star, u_star, p_star

        a_star = a * (p_star / p) ** ((g - 1.0) / (2.0 * g))
        head = u + sign * a
        tail = u_star + sign * a_star
        if sign * (xi - head) >= 0:
            return rho, u, p
        if sign * (xi - tail) <= 0:
            return rho * (p_star / p) ** (1.0 / g), u_star, p_star
        factor = 2.0 / (g + 1.0) - sign * (g - 1.0) / ((g + 1.0) * a) * (u - xi)
        rho_fan = rho * factor ** (2.0 / (g - 1.0))
        u_fan = 2.0 / (g + 1.0) * (-sign * a + (g - 1.0) / 2.0 * u + xi)
        p_fan = p * factor ** (2.0 * g / (g - 1.0))
        return rho_fan, u_fan, p_fan

    def sample(self, x: np.ndarray, t: float, x0: float, left: Tuple[float, float, float],
               right: Tuple[float, float, float]) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """
        Campiona la soluzione autosimile in x al tempo t

        Args:
            x: Posizioni
            t: Tempo (> 0)
            x0: Posizione iniziale della discontinuità
            left: Stato sinistro (rho, u, p)
            right: Stato destro (rho, u, p)

        Returns:
            Tupla (rho, u, p) campionata
        """
        p_star, u_star = self.star_state(left, right)
        out = np.empty((len(x), 3))
        for i, xi in enumerate((np.asarray(x, dtype=float) - x0) / t):
            if xi <= u_star:
                out[i] = self._sample_side(xi, *left, p_star, u_star, -1.0)
            else:
                out[i] = self._sample_side(xi, *right, p_star, u_star, 1.0)
        return out[:, 0], out[:, 1], out[:, 2]

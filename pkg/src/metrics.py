"""
Metriche di accuratezza e conservazione per l'analisi dei benchmark
"""
from typing import Dict, List, Optional, Sequence

import numpy as np


def conserved_names(n_components: int) -> List[str]:
    """Nomi (mass, momentum_1..momentum_d, energy) dei totali conservati"""
    return ['mass'] + [f'momentum_{a + 1}' for a in range(n_components - 2)] + ['energy']


class SolutionMetrics:
    """Classe per il calcolo di errori, ordini osservati e derive dei momenti conservati"""

    def __init__(self, floor: float = 1e-300):
        """
        Inizializza la classe

        Args:
            floor: Denominatore minimo per gli errori relativi
        """
        self.floor = floor

    def relative_l1_error(self, approx: np.ndarray, reference: np.ndarray) -> float:
        """
        Errore L1 relativo sum|a - r| / sum|r|

        Args:
            approx: Valori approssimati
            reference: Valori di riferimento (stessa forma)

        Returns:
            Errore relativo (0 per campi identici)
        """
        approx = np.asarray(approx, dtype=float)
        reference = np.asarray(reference, dtype=float)
        if approx.shape != reference.shape:
            raise ValueError(f"Shape mismatch: {approx.shape} vs {reference.shape}")
        return float(np.sum(np.abs(approx - reference)) / max(np.sum(np.abs(reference)), self.floor))

    def restrict_to_coarse(self, fine: np.ndarray, layout: str = 'periodic_nodes',
                           factor: int = 2) -> np.ndarray:
        """
        Riporta un profilo della griglia fine (factor * N) sui nodi della griglia grossa (N)

        Args:
            fine: Valori sulla griglia fine
            layout: 'periodic_nodes' (nodi coincidenti) oppure 'cell_centers' (media delle celle figlie)
            factor: Rapporto tra le due griglie

        Returns:
            Valori sulla griglia grossa
        """
        fine = np.asarray(fine, dtype=float)
        if factor < 1 or len(fine) % factor != 0:
            raise ValueError(f"Fine grid of {len(fine)} cells cannot be restricted by a factor {factor}")
        if layout == 'periodic_nodes':
            return fine[::factor].copy()
        if layout == 'cell_centers':
            return fine.reshape(-1, factor).mean(axis=1)
        raise ValueError(f"Unknown node layout '{layout}'")

    def observed_rate(self, err_coarse: float, err_fine: float) -> float:
        """Ordine osservato log2(err_N / err_2N); NaN se non definito"""
        if not (err_coarse > 0 and err_fine > 0) or not np.isfinite(err_coarse * err_fine):
            return float('nan')
        return float(np.log2(err_coarse / err_fine))

    def cumulative_drift(self, totals: np.ndarray) -> np.ndarray:
        """
        Deriva relativa cumulata |m_k^N - m_k^0| / max(|m_k^0|, |m_0^0|) per componente

        Args:
            totals: Totali per passo, forma (n_steps + 1, n_components)

        Returns:
            Deriva per componente
        """
        totals = np.atleast_2d(np.asarray(totals, dtype=float))
        scale = np.maximum(np.abs(totals[0]), abs(totals[0, 0]))
        return np.abs(totals[-1] - totals[0]) / np.maximum(scale, self.floor)

    def step_defects(self, totals: np.ndarray, alphas: Sequence[Sequence[float]]) -> np.ndarray:
        """
        Difetto di conservazione per passo: rispetto al passo precedente (alpha vuoto)
        oppure rispetto alla combinazione BDF sum_k alpha_k m^{n+1-k}

        Args:
            totals: Totali per passo, forma (n_steps + 1, n_components)
            alphas: Coefficienti per ogni passo 1..n_steps

        Returns:
            Difetti assoluti, forma (n_steps, n_components)
        """
        totals = np.atleast_2d(np.asarray(totals, dtype=float))
        defects = np.zeros((len(totals) - 1, totals.shape[1]))
        for n in range(1, len(totals)):
            alpha = tuple(alphas[n - 1]) or (1.0,)
            if len(alpha) > n:
                raise ValueError(f"Step {n} combines {len(alpha)} past totals, only {n} available")
            combination = sum(a * totals[n - k] for k, a in enumerate(alpha, start=1))
            defects[n - 1] = np.abs(totals[n] - combination)
        return defects

    def locate_waves(self, x: np.ndarray, rho: np.ndarray, count: int = 2,
                     separation: int = 5) -> List[float]:
        """
        Posizioni dei fronti più ripidi della densità

        Args:
            x: Nodi spaziali
            rho: Densità
            count: Numero di fronti cercati
            separation: Distanza minima (in celle) tra due fronti

        Returns:
            Posizioni ordinate per x crescente (punti medi tra celle)
        """
        x = np.asarray(x, dtype=float)
        gradient = np.abs(np.diff(np.asarray(rho, dtype=float)) / np.diff(x))
        midpoints = 0.5 * (x[1:] + x[:-1])
        positions = []
        for _ in range(count):
            if not np.any(gradient > 0):
                break
            k = int(np.argmax(gradient))
            positions.append(float(midpoints[k]))
            gradient[max(0, k - separation):k + separation + 1] = 0.0
        return sorted(positions)

    def calculate_all_metrics(self, x: np.ndarray, rho: np.ndarray, rho_reference: np.ndarray,
                              totals: Optional[np.ndarray] = None) -> Dict:
        """
        Calcola tutte le metriche di confronto tra un profilo e il suo riferimento

        Args:
            x: Nodi spaziali
            rho: Densità calcolata
            rho_reference: Densità di riferimento
            totals: Totali conservati per passo (opzionale)

        Returns:
            Dizionario con le metriche
        """
        if len(rho) == 0:
            return {}

        dx = float(x[1] - x[0]) if len(x) > 1 else float('nan')
        metrics = {
            'L1 Relative Error': self.relative_l1_error(rho, rho_reference),
            'Linf Error': float(np.max(np.abs(np.asarray(rho) - np.asarray(rho_reference)))),
            'Wave Positions': self.locate_waves(x, rho),
            'Reference Wave Positions': self.locate_waves(x, rho_reference),
        }
        shifts = [abs(a - b) for a, b in zip(metrics['Wave Positions'],
                                              metrics['Reference Wave Positions'])]
        metrics['Max Wave Shift (dx)'] = max(shifts) / dx if shifts else float('nan')

        if totals is not None:
            drift = self.cumulative_drift(totals)
            for name, value in zip(conserved_names(len(drift)), drift):
                metrics[f'Drift {name}'] = float(value)

        return metrics


"""
Eccezioni del solutore cinetico ES-BGK e del riferimento fluido
"""
from typing import Optional


class SolverError(Exception):
    """Errore base: porta con sé cella, passo e tempo quando disponibili"""

    def __init__(self, message: str, cell: Optional[int] = None,
                 step: Optional[int] = None, time: Optional[float] = None):
        super().__init__(message)
        self.message = message
        self.cell = cell
        self.step = step
        self.time = time

    def with_context(self, step: Optional[int] = None, time: Optional[float] = None) -> "SolverError":
        """Aggiunge passo e tempo all'errore senza perdere la cella"""
        if step is not None:
            self.step = step
        if time is not None:
            self.time = time
        return self

    def __str__(self) -> str:
        context = []
        if self.cell is not None:
            context.append(f"cell={self.cell}")
        if self.step is not None:
            context.append(f"step={self.step}")
        if self.time is not None:
            context.append(f"t={self.time:.6g}")
        if context:
            return f"{self.message} ({', '.join(context)})"
        return self.message


class ConfigurationError(SolverError):
    """Configurazione del problema non ammissibile"""


class GridError(SolverError):
    """Griglia spaziale o delle velocità degenere"""


class NonpositiveDensity(SolverError):
    """Densità nulla o negativa in una cella"""


class NonpositiveTemperature(SolverError):
    """Temperatura nulla o negativa in una cella"""


class NonSPDTensor(SolverError):
    """Tensore di temperatura non definito positivo"""


class StencilOutOfRange(SolverError):
    """Celle fantasma insufficienti per lo stencil di ricostruzione"""


class SingularGram(SolverError):
    """Matrice di Gram della proiezione singolare"""


class InsufficientHistory(SolverError):
    """Storia BDF incompleta rispetto al numero di passi del metodo"""


class FluidVacuum(SolverError):
    """Vuoto o pressione negativa nel solutore Navier-Stokes"""

"""
Lettura e validazione dei profili CSV emessi dal solutore cinetico e dal riferimento fluido
"""
import logging
import os
from typing import Dict, Optional, Tuple

import numpy as np
import pandas as pd

from .config import PROFILE_COLUMNS, ProblemConfig

logger = logging.getLogger(__name__)


class ProfileDataLoader:
    """Classe per il caricamento e la gestione dei profili"""

    def __init__(self, columns=None):
        self.columns = list(PROFILE_COLUMNS if columns is None else columns)
        self.data_cache: Dict[str, Tuple[pd.DataFrame, Dict[str, str]]] = {}

    def read_header(self, path: str) -> Dict[str, str]:
        """Righe iniziali '# chiave: valore' del file"""
        header = {}
        with open(path) as handle:
            for line in handle:
                if not line.startswith('#'):
                    break
                key, _, value = line[1:].partition(':')
                header[key.strip()] = value.strip()
        return header

    def load_profile(self, path: str, use_cache: bool = True) -> Tuple[pd.DataFrame, Dict[str, str]]:
        """
        Carica un profilo CSV con valori identici bit a bit a quelli scritti

        Args:
            path: File CSV
            use_cache: Riutilizza i profili già letti

        Returns:
            Tupla (DataFrame, intestazione)
        """
        key = os.path.abspath(path)
        if use_cache and key in self.data_cache:
            df, header = self.data_cache[key]
            return df.copy(), dict(header)

        header = self.read_header(path)
        df = pd.read_csv(path, comment='#', float_precision='round_trip')
        logger.info(f"Loaded {len(df)} rows from {path}")
        self.data_cache[key] = (df, header)
        return df.copy(), dict(header)

    def load_config(self, path: str) -> Optional[ProblemConfig]:
        """Configurazione ripetuta nell'intestazione, se presente"""
        header = self.read_header(path)
        if 'config' not in header:
            return None
        try:
            return ProblemConfig.from_json(header['config'])
        except Exception as error:
            logger.warning(f"Could not parse configuration echo in {path}: {error}")
            return None

    def validate_data(self, data: pd.DataFrame) -> Tuple[bool, str]:
        """
        Valida un profilo caricato

        Args:
            data: DataFrame con il profilo

        Returns:
            Tupla (is_valid, message)
        """
        if data.empty:
            return False, "Empty profile"

        missing = [c for c in self.columns if c not in data.columns]
        if missing:
            return False, f"Missing columns: {missing}"

        values = data[self.columns].to_numpy(dtype=float)
        if not np.all(np.isfinite(values)):
            return False, "Profile contains non-finite values"

        if not np.all(np.diff(data['x'].to_numpy()) > 0):
            return False, "x is not strictly increasing"

        if (data['rho'] <= 0).any():
            return False, "Nonpositive density in profile"

        if (data['T'] <= 0).any():
            return False, "Nonpositive temperature in profile"

        return True, "Profile valid"

    def get_data_summary(self, data: pd.DataFrame) -> Dict:
        """
        Ottieni un riassunto del profilo

        Args:
            data: DataFrame con il profilo

        Returns:
            Dizionario con le statistiche
        """
        if data.empty:
            return {'rows': 0}
        x = data['x'].to_numpy()
        dx = float(x[1] - x[0]) if len(x) > 1 else float('nan')
        return {
            'rows': len(data),
            'x_range': (float(x[0]), float(x[-1])),
            'dx': dx,
            'mass': float(data['rho'].sum() * dx),
            'rho_range': (float(data['rho'].min()), float(data['rho'].max())),
            'u1_range': (float(data['u1'].min()), float(data['u1'].max())),
            'T_range': (float(data['T'].min()), float(data['T'].max())),
            'max_abs_Q': float(data['Q'].abs().max()),
        }

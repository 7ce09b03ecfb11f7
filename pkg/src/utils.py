"""
Funzioni di utilità per l'emissione dei risultati
"""
import io
import os
from typing import Dict, Optional

import numpy as np
import pandas as pd

from .config import CSV_FLOAT_FORMAT


def format_number(value: float, decimals: int = 4) -> str:
    """
    Formatta un numero con decimali

    Args:
        value: Valore da formattare
        decimals: Numero di decimali

    Returns:
        Stringa formattata
    """
    if value is None or pd.isna(value):
        return "N/A"
    return f"{value:.{decimals}f}"


def format_scientific(value: float, digits: int = 3) -> str:
    """Formatta un errore in notazione scientifica (es. 2.174e-04)"""
    if value is None or pd.isna(value):
        return "N/A"
    return f"{value:.{digits}e}"


def ensure_dir(path: str) -> str:
    os.makedirs(path, exist_ok=True)
    return path


def write_profile_csv(df: pd.DataFrame, path: str, header: Optional[Dict[str, str]] = None) -> str:
    """
    Scrive un profilo CSV con 17 cifre significative e intestazione di commenti

    Args:
        df: Colonne del profilo
        path: File di destinazione
        header: Coppie chiave/valore ripetute come righe '# chiave: valore'

    Returns:
        Percorso scritto
    """
    directory = os.path.dirname(path)
    if directory:
        ensure_dir(directory)
    with open(path, 'w', newline='') as handle:
        for key, value in (header or {}).items():
            handle.write(f"# {key}: {value}\n")
        df.to_csv(handle, index=False, float_format=CSV_FLOAT_FORMAT)
    return path


def export_to_excel(data_dict: Dict[str, pd.DataFrame], filename: Optional[str] = None) -> bytes:
    """
    Esporta le tabelle in un file Excel

    Args:
        data_dict: Dizionario con i DataFrame da esportare (un foglio ciascuno)
        filename: Nome del file (None = solo bytes in memoria)

    Returns:
        Bytes del file Excel
    """
    output = io.BytesIO()

    with pd.ExcelWriter(output, engine='openpyxl') as writer:
        for sheet_name, df in data_dict.items():
            # Excel limita i nomi dei fogli a 31 caratteri
            df.to_excel(writer, sheet_name=sheet_name[:31], index=False)

    data = output.getvalue()
    if filename:
        with open(filename, 'wb') as handle:
            handle.write(data)
    return data


def create_metrics_table(metrics: Dict) -> pd.DataFrame:
    """
    Crea una tabella formattata delle metriche

    Args:
        metrics: Dizionario con le metriche

    Returns:
        DataFrame formattato
    """
    formatted_metrics = {}

    for key, value in metrics.items():
        if isinstance(value, (list, tuple)):
            formatted_metrics[key] = ', '.join(format_number(v, 4) for v in value)
        elif 'Error' in key or 'Drift' in key or 'Defect' in key:
            formatted_metrics[key] = format_scientific(value)
        elif isinstance(value, (int, np.integer)):
            formatted_metrics[key] = str(value)
        else:
            formatted_metrics[key] = format_number(value, 4)

    return pd.DataFrame(list(formatted_metrics.items()), columns=['Metric', 'Value'])

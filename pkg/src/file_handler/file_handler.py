"""
This module provides classes for reading the simulation INI configuration and for
writing and reading the CSV tables produced by the command line front-end.

Dependencies:
    - configparser: For reading the INI configuration file.
    - pandas as pd: For writing and loading CSV tables.
"""

import configparser
from dataclasses import dataclass
from pathlib import Path
import io
import sys
import os

import pandas as pd

sys.path.append(os.path.abspath(os.path.join(os.path.dirname(__file__), '..', '..')))
from src.color_logger import logger
from src.random_time.quadrature import QuadratureConfig
from src.approx.approx import RegimeThresholds

DEFAULT_CONFIG_PATH = Path(__file__).resolve().parent.parent.parent / 'config' / 'simulation_config.ini'

FLOAT_FORMAT = '%.15g'

DEFAULTS = {
    'quadrature': {'scheme': 'gauss-laguerre', 'nodes': '64', 'abs_tol': '1e-10',
                   'max_shape': '150', 'adaptive_limit': '2000'},
    'ode': {'min_intervals': '2000', 'max_intervals': '500000', 'max_step_phase': '0.005',
            'trace_drift_tol': '1e-8'},
    'regime': {'small_gamma_tau': '0.01', 'small_omega_tau': '0.1', 'zeno_gamma_tau': '1'},
    'grids': {'pdf_points': '600', 'pdf_u_max': '12', 'decay_steps': '500'},
    'compare': {'route_tol': '1e-8', 'method_disagreement_tol': '1e-6'},
    'logging': {'level': 'INFO'},
}


@dataclass(frozen=True)
class OdeSettings:
    min_intervals: int
    max_intervals: int
    max_step_phase: float
    trace_drift_tol: float


@dataclass(frozen=True)
class GridSettings:
    pdf_points: int
    pdf_u_max: float
    decay_steps: int


@dataclass(frozen=True)
class CompareSettings:
    route_tol: float
    method_disagreement_tol: float


# class to handle the config ini file
class Config_File_Handler():
    """
    Class for reading the simulation configuration file.

    Every section is optional; missing sections or keys fall back to the built-in
    defaults, which equal the values shipped in config/simulation_config.ini.

    Attributes:
        config_file (Path): Path to the INI configuration file.
        config (configparser.ConfigParser): The parsed configuration.
    """
    def __init__(self, config_file: str | Path = DEFAULT_CONFIG_PATH):
        """
        Initialize the handler with a configuration file path.

        Args:
            config_file (str | Path): Path to the INI file to load.
        """
        self.config_file = Path(config_file)
        self.config = configparser.ConfigParser()
        self.load_config()

    def load_config(self):
        """
        Read the INI file on top of the built-in defaults.

        Returns:
            None

        Notes:
            - A missing file is not an error; a warning is logged and the defaults are used.
        """
        self.config.read_dict(DEFAULTS)
        if self.config_file.is_file():
            self.config.read(self.config_file)
        else:
            logger.warning(f"Configuration file {self.config_file} not found, using built-in defaults")

    #region GETTER
    def quadrature_config(self) -> QuadratureConfig:
        section = self.config['quadrature']
        return QuadratureConfig(
            scheme=section.get('scheme'),
            nodes=section.getint('nodes'),
            abs_tol=section.getfloat('abs_tol'),
            max_shape=section.getfloat('max_shape'),
            adaptive_limit=section.getint('adaptive_limit'),
        )

    def regime_thresholds(self) -> RegimeThresholds:
        section = self.config['regime']
        return RegimeThresholds(
            small_gamma_tau=section.getfloat('small_gamma_tau'),
            small_omega_tau=section.getfloat('small_omega_tau'),
            zeno_gamma_tau=section.getfloat('zeno_gamma_tau'),
        )

    def ode_settings(self) -> OdeSettings:
        section = self.config['ode']
        return OdeSettings(
            min_intervals=section.getint('min_intervals'),
            max_intervals=section.getint('max_intervals'),
            max_step_phase=section.getfloat('max_step_phase'),
            trace_drift_tol=section.getfloat('trace_drift_tol'),
        )

    def grid_settings(self) -> GridSettings:
        section = self.config['grids']
        return GridSettings(
            pdf_points=section.getint('pdf_points'),
            pdf_u_max=section.getfloat('pdf_u_max'),
            decay_steps=section.getint('decay_steps'),
        )

    def compare_settings(self) -> CompareSettings:
        section = self.config['compare']
        return CompareSettings(
            route_tol=section.getfloat('route_tol'),
            method_disagreement_tol=section.getfloat('method_disagreement_tol'),
        )

    def log_level(self) -> str:
        return self.config.get('logging', 'level')
    #endregion GETTER


class Csv_File_Handler:
    """
    Writes result tables as CSV with a fixed, locale-independent number format and
    loads them back.

    Every float is printed with 15 significant digits and '.' as decimal separator,
    rows end with '\\n', and no index column is written, so identical tables always
    produce byte-identical files.

    Attributes:
        file_path (Path | None): target file; None means standard output.
    """
    def __init__(self, file_path: str | Path | None = None):
        self.file_path = Path(file_path) if file_path is not None else None

    def to_csv_text(self, data: pd.DataFrame) -> str:
        """Render a DataFrame in the fixed CSV format."""
        buffer = io.StringIO()
        data.to_csv(buffer, index=False, sep=',', float_format=FLOAT_FORMAT, lineterminator='\n')
        return buffer.getvalue()

    def save(self, data: pd.DataFrame, stream=None):
        """
        Write the table to the file, or to `stream` (standard output by default) when no file is set.

        Args:
            data (pd.DataFrame): table to write.
            stream (TextIO, optional): output stream used when file_path is None.
        """
        text = self.to_csv_text(data)
        if self.file_path is None:
            (stream or sys.stdout).write(text)
            return
        self.file_path.parent.mkdir(parents=True, exist_ok=True)
        with open(self.file_path, 'w', encoding='utf-8', newline='') as f:
            f.write(text)
        logger.info(f"Saved {len(data)} rows to {self.file_path}")

    def load_csv(self) -> pd.DataFrame:
        """Load a CSV table written by `save`."""
        if self.file_path is None:
            raise ValueError("No file path set to load from")
        return pd.read_csv(self.file_path, delimiter=',')

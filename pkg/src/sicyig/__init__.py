"""Design and simulation toolkit for a SiC-YIG stripe-gradient quantum
sensor: nanostripe magnetostatics, spin-wave resonances, EPR/ODMR
spectra, planar DEER signals and their inversion, photoluminescence SNR
budgets, implantation-yield statistics and photonic-crystal TM bandgaps.
"""

__version__ = "0.1.0"

from . import (constants, deer, fabstats, magnetostatics, photonics, snr,
               spectra, swr)
from .config import SensorConfig, default_config_path, load_config, save_config

__all__ = [
    "constants", "deer", "fabstats", "magnetostatics", "photonics", "snr",
    "spectra", "swr", "SensorConfig", "load_config", "save_config",
    "default_config_path", "__version__",
]

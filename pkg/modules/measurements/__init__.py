from .io import read_rbf, write_rbf
from .rbf import RbfField, default_eps, eval_rbf, fit_rbf, gaussian_kernel, lattice_centers
from .schemas import MeasurementConfig, RbfSettings
from .synthesize import MeasurementData, exact_measurements, fit_snapshot, synthesize_measurements

__all__ = [
    "MeasurementConfig",
    "MeasurementData",
    "RbfField",
    "RbfSettings",
    "default_eps",
    "eval_rbf",
    "exact_measurements",
    "fit_rbf",
    "fit_snapshot",
    "gaussian_kernel",
    "lattice_centers",
    "read_rbf",
    "synthesize_measurements",
    "write_rbf",
]

"""Principal-strata shares, ITT/LATE, and sharp trimming bounds for
experiments where take-up has three options: nothing, an existing
alternative, or the introduced program."""

from .data import EstimateReport, Sample, UnitRecord, ingest_csv, propensity, write_csv
from .reweighting import DensityRatioModel, apply_weights, fit_density_ratio
from .estimators import (CellMeans, StrataShares, cell_means, estimate_first_stage,
                         estimate_itt, estimate_late, estimate_mu0, estimate_mu1,
                         estimate_shares)
from .bounds import (EffectBounds, MixtureCdf, bounds_line, build_mixture_cdf,
                     complier_effect_bounds, complier_outcome_bounds,
                     substitutor_effect_bounds, trim_cutpoints, trimmed_cell_bounds)
from .bootstrap import STATISTICS, BootstrapSpec, bootstrap_ci, bootstrap_replicates
from .gmm import GmmModel, asymptotic_variance, fit_gmm, moment_conditions
from .simulate import (PRESETS, PRESET_T1, PRESET_T2, DgpConfig,
                       SyntheticPopulation, analytic_bounds,
                       balanced_population, brute_force_sharpness, generate)
from . import errors

__version__ = "0.1.0"
SCHEMA_VERSION = 1

__all__ = [name for name in dir() if not name.startswith("_")]

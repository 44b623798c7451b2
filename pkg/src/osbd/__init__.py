"""osbd: a Monte Carlo laboratory for one-sided ballistic deposition.

Heights grow by sticky corner deposition on columns 1..k driven by
per-column Poisson mark clocks; the same heights admit an exact
directed last-passage representation over the time-reversed mark field.
This package simulates both sides at scale, checks the pathwise
identities, and measures the fluctuation and geodesic statistics
against their Gaussian / random-matrix / Brownian limits.

Hot kernels are compiled with numba when available; set
``OSBD_BACKEND=numpy`` (or call :func:`set_backend`) for the pure-numpy
twins.  Integer pipelines are bit-identical across backends.
"""
from ._backend import active_backend, set_backend, set_threads
from .brownian import (BrownianGrid, GueSample, brownian_lpp,
                       brownian_scaling_check, calibrate_grid_m,
                       make_brownian_grid, sample_brownian_batch,
                       sample_gue_batch, sample_gue_lambda_max)
from .config import (CODE_VERSION, SCHEMA_VERSION, ConfigError,
                     ExperimentConfig, RunManifest, load_config)
from .coupling import (CouplingGapSample, coupled_gaps, l_vs_d_distance,
                       lemma3_bound, parabola_inequality, sample_l_batch)
from .deposition import (HeightProfile, InitialCondition, height_snapshots,
                         simulate_heights)
from .experiments import (aggregate, list_experiments, run_experiment,
                          rescale_gue, rescale_height)
from .lpp import (DirectedPath, LppOutcome, NoGeodesic, TiePolicy,
                  auxiliary_lpp, cross_section_scores, evaluate_path,
                  extract_geodesic, geodesic_deviation, is_valid_upath,
                  lpp_height, lpp_point_to_point)
from .rng import (MarkField, StreamKey, dump_field, generate_marks,
                  load_field, reverse_field)
from .stats import (EcdfSummary, ExponentFit, KsResult, kolmogorov_critical,
                    ks_one_sample_normal, ks_two_sample, loglog_fit,
                    normal_cdf, normal_ppf, rule_of_three, tail_estimator,
                    wilson_interval)

__version__ = CODE_VERSION

__all__ = [
    "BrownianGrid", "CODE_VERSION", "ConfigError", "CouplingGapSample",
    "DirectedPath", "EcdfSummary", "ExperimentConfig", "ExponentFit",
    "GueSample", "HeightProfile", "InitialCondition", "KsResult",
    "LppOutcome", "MarkField", "NoGeodesic", "RunManifest",
    "SCHEMA_VERSION", "StreamKey", "TiePolicy", "active_backend",
    "aggregate", "auxiliary_lpp", "brownian_lpp", "brownian_scaling_check",
    "calibrate_grid_m", "coupled_gaps", "cross_section_scores",
    "dump_field", "evaluate_path", "extract_geodesic", "generate_marks",
    "geodesic_deviation", "height_snapshots", "is_valid_upath",
    "kolmogorov_critical", "ks_one_sample_normal", "ks_two_sample",
    "l_vs_d_distance", "lemma3_bound", "list_experiments", "load_config",
    "load_field", "loglog_fit", "lpp_height", "lpp_point_to_point",
    "make_brownian_grid", "normal_cdf", "normal_ppf",
    "parabola_inequality", "rescale_gue", "rescale_height",
    "reverse_field", "rule_of_three", "run_experiment",
    "sample_brownian_batch", "sample_gue_batch", "sample_gue_lambda_max",
    "sample_l_batch", "set_backend", "set_threads", "simulate_heights",
    "tail_estimator", "wilson_interval",
]

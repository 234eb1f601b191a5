"""Trimmed optimal transport: exact 1-D trimming, partial matching, stripe
constructions, random quantization and a seeded rate harness."""

from .errors import (DegenerateProblemError, DimensionError, EnvelopeConsistencyError,
                     FeasibilityError, InfeasiblePlanError, MeasureError, PreconditionError,
                     TrimotError)
from .harness import (ExperimentConfig, RateTable, emit_report, fit_loglog_slope,
                      run_experiment, sample_uniform)
from .matching import (MatchingProblem, MatchingResult, brute_force_partial_matching,
                       solve_partial_matching, untrimmed_matching)
from .measures import (Sample, TrimmedMeasure, TrimParams, TrimVector, is_trimming_of,
                       read_sample_csv, trim_vector_to_measure, validate_trim_vector,
                       write_sample_csv)
from .quantization import (QuantizationReport, quantization_constant, quantization_cost_1d,
                           quantization_cost_mc)
from .stripes import (StripeCostReport, StripePlan, build_stripe_plan, check_capacity,
                      stripe_cost, stripe_cost_recursive)
from .trim1d import (Envelopes, TrimSolve1DResult, brute_force_trim1d, compute_envelopes,
                     sandwich_bounds, solve_trim1d)
from .wasserstein1d import (UNIFORM, DiscreteMeasure1D, f_p, objective_terms,
                            v_n_expectation, v_n_scaled_limit, w_p_empirical_to_uniform,
                            w_p_quantile)

__version__ = "0.1.0"

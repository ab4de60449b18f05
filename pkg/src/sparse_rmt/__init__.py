"""Numerical laboratory for sparse random matrices.

Modules: ``ensemble`` (sampling), ``semicircle`` (closed forms), ``spectra``
(eigenvalue statistics), ``resolvent`` (Green functions), ``stats``
(estimators), ``term_calculus`` (exponent bookkeeping for formal monomials)
and ``harness`` (replica experiments).
"""
from .ensemble import EnsembleSpec, entry_moments, exponents, h2_statistic, sample
from .errors import (ClassificationError, ConfigurationError, DomainError, InputError,
                     InsufficientDataError, NumericalError, ParseError, PreconditionError,
                     SparseRMTError)
from .harness import ExperimentConfig, derive_seed, run
from .resolvent import green_function, shifted_stat, trace_green
from .semicircle import classify, quantile, stieltjes, stieltjes_prime
from .spectra import counting_function, eigen_decompose

__version__ = "0.1.0"

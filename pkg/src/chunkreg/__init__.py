"""Bayesian linear regression on data too large for memory.

Stream delimited files into mergeable sufficient statistics
(:mod:`chunkreg.summaries`), then run a Gibbs sampler that only ever sees
those statistics (:mod:`chunkreg.gibbs`).
"""

from .conditionals import Flat, InverseGamma, Jeffreys, MvnKnown, MvnUnknown
from .distributions import RngStream, SpdMatrix
from .gibbs import ChainConfig, ChainOutput, reduce_for_zero_intercept, run_chain, run_chains
from .posterior import PosteriorSummary, credible_interval, summarize
from .simulate import SimulationConfig, simulate_dataset
from .summaries import IngestConfig, SummaryStatistics, fold_chunk, ingest, load, merge, save

__all__ = [
    "ChainConfig",
    "ChainOutput",
    "Flat",
    "IngestConfig",
    "InverseGamma",
    "Jeffreys",
    "MvnKnown",
    "MvnUnknown",
    "PosteriorSummary",
    "RngStream",
    "SimulationConfig",
    "SpdMatrix",
    "SummaryStatistics",
    "credible_interval",
    "fold_chunk",
    "ingest",
    "load",
    "merge",
    "reduce_for_zero_intercept",
    "run_chain",
    "run_chains",
    "save",
    "simulate_dataset",
    "summarize",
]

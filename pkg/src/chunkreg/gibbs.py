"""Gibbs sampler over the full conditionals.

Each sweep updates the coefficients first, conditioned on the previous
sweep's values of everything else, then the remaining blocks in a fixed
order: ``beta``, (``mu``, ``cinv`` under the hierarchical prior), ``sigmasq``.
Because ``beta`` goes first it needs no starting value; ``sigmasq``, ``mu``
and ``cinv`` start from the prior's ``*_init`` values.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .conditionals import (
    BetaPrior,
    Flat,
    InverseGamma,
    MvnKnown,
    MvnUnknown,
    SigmaSqPrior,
    beta_precision,
    cinv_conditional,
    mu_precision,
    sigmasq_conditional,
    xtx_factor,
)
from .distributions import (
    RngStream,
    SpdMatrix,
    sample_inverse_gamma,
    sample_mvn_precision,
    sample_wishart,
)
from .errors import ChunkregError, DataError, NumericalError, tag_iteration
from .summaries import SummaryStatistics


@dataclass(frozen=True)
class ChainConfig:
    t_samples: int = 1000
    seed: int = 0
    zero_intercept: bool = False
    beta_prior: BetaPrior = field(default_factory=Flat)
    sigmasq_prior: SigmaSqPrior = field(default_factory=InverseGamma)

    def __post_init__(self) -> None:
        if int(self.t_samples) < 1:
            raise DataError(f"t_samples must be >= 1, got {self.t_samples}")


@dataclass
class ChainOutput:
    """Every draw of a chain, one row per iteration.

    ``first_index`` is the coefficient index of column 0 of ``beta``: 0 when
    the model has an intercept, 1 otherwise.  ``mu`` and ``cinv`` are only
    present under the hierarchical prior.
    """

    beta: np.ndarray
    sigmasq: np.ndarray
    mu: Optional[np.ndarray] = None
    cinv: Optional[np.ndarray] = None
    first_index: int = 0

    @property
    def t_samples(self) -> int:
        return self.sigmasq.shape[0]

    @property
    def p(self) -> int:
        return self.beta.shape[1]

    def columns(self) -> dict[str, np.ndarray]:
        """Flat name -> draws mapping in export order."""
        idx = range(self.first_index, self.first_index + self.p)
        cols = {f"beta{i}": self.beta[:, j] for j, i in enumerate(idx)}
        cols["sigmasq"] = self.sigmasq
        if self.mu is not None:
            cols.update({f"mu{i}": self.mu[:, j] for j, i in enumerate(idx)})
        if self.cinv is not None:
            for a, i in enumerate(idx):
                for b, j in enumerate(idx):
                    cols[f"cinv_{i}_{j}"] = self.cinv[:, a, b]
        return cols

    def equals(self, other: "ChainOutput") -> bool:
        def same(a, b):
            return (a is None and b is None) or (
                a is not None and b is not None and np.array_equal(a, b)
            )

        return (
            self.first_index == other.first_index
            and same(self.beta, other.beta)
            and same(self.sigmasq, other.sigmasq)
            and same(self.mu, other.mu)
            and same(self.cinv, other.cinv)
        )


def reduce_for_zero_intercept(s: SummaryStatistics) -> SummaryStatistics:
    """Drop the intercept column from the statistics.

    Deleting row/column 0 of ``xtx`` and entry 0 of ``xty`` gives exactly the
    statistics of the design without the constant column.  Statistics that
    have no intercept are returned unchanged.
    """
    if not s.intercept:
        return s
    if s.p < 2:
        raise DataError("cannot drop the intercept: it is the only design column")
    return SummaryStatistics(s.p - 1, False, s.n, s.xtx[1:, 1:], s.xty[1:], s.yty)


def update_order_trace(config: ChainConfig) -> list[str]:
    """Blocks updated in one sweep, in order."""
    if isinstance(config.beta_prior, MvnUnknown):
        return ["beta", "mu", "cinv", "sigmasq"]
    return ["beta", "sigmasq"]


def run_chain(
    s: SummaryStatistics,
    config: ChainConfig,
    chain_index: int = 0,
    xtx_chol: Optional[np.ndarray] = None,
) -> ChainOutput:
    """Run ``config.t_samples`` Gibbs sweeps and return every draw.

    Parameters
    ----------
    s : SummaryStatistics
        Data summaries; reduced first when ``config.zero_intercept`` is set.
    config : ChainConfig
    chain_index : int
        Selects the random stream ``(config.seed, chain_index)``.
    xtx_chol : ndarray, optional
        Precomputed lower Cholesky factor of the (reduced) ``xtx``, used by
        the flat prior after a multiply-back check.

    Errors raised inside a sweep carry the 1-based sweep index in their
    ``iteration`` attribute and message.
    """
    if config.zero_intercept:
        s = reduce_for_zero_intercept(s)
    p, T = s.p, int(config.t_samples)
    bprior = config.beta_prior.resolve(p)
    sprior = config.sigmasq_prior
    rng = RngStream(config.seed, chain_index)

    beta_out = np.empty((T, p))
    sig_out = np.empty(T)
    hier = isinstance(bprior, MvnUnknown)
    mu_out = np.empty((T, p)) if hier else None
    cinv_out = np.empty((T, p, p)) if hier else None

    sigmasq = float(sprior.sigmasq_init)
    if hier:
        mu, cinv = bprior.mu_init, bprior.Cinv_init
    if isinstance(bprior, Flat):
        # one factor of xtx serves every sweep; only the sigma^2 scaling changes
        try:
            low = xtx_factor(s, xtx_chol)
            flat_mean = SpdMatrix(s.xtx, chol=low, what="xtx").solve(s.xty)
        except NumericalError as exc:
            # first needed by sweep 1
            raise tag_iteration(exc, 1)

    for t in range(T):
        try:
            if isinstance(bprior, Flat):
                root = np.sqrt(sigmasq)
                prec = SpdMatrix(s.xtx / sigmasq, chol=low / root, what="beta precision")
                beta = sample_mvn_precision(rng, flat_mean, prec)
            elif isinstance(bprior, MvnKnown):
                beta = sample_mvn_precision(rng, *beta_precision(s, bprior, sigmasq))
            else:
                beta = sample_mvn_precision(rng, *beta_precision(s, bprior, sigmasq, mu, cinv))
                mu = sample_mvn_precision(rng, *mu_precision(bprior, beta, cinv))
                df, scale = cinv_conditional(bprior, beta, mu)
                cinv = sample_wishart(rng, df, scale)
            shape, rate = sigmasq_conditional(s, sprior, beta)
            sigmasq = float(sample_inverse_gamma(rng, shape, rate))
        except ChunkregError as exc:
            raise tag_iteration(exc, t + 1)
        beta_out[t] = beta
        sig_out[t] = sigmasq
        if hier:
            mu_out[t] = mu
            cinv_out[t] = cinv.entries
    return ChainOutput(beta_out, sig_out, mu_out, cinv_out, 0 if s.intercept else 1)


def run_chains(
    s: SummaryStatistics,
    config: ChainConfig,
    n_chains: int,
    max_workers: Optional[int] = None,
) -> list[ChainOutput]:
    """Independent chains on streams ``0 .. n_chains - 1``, run concurrently."""
    if n_chains < 1:
        raise DataError(f"n_chains must be >= 1, got {n_chains}")
    if n_chains == 1:
        return [run_chain(s, config, 0)]
    with ThreadPoolExecutor(max_workers=max_workers) as pool:
        futures = [pool.submit(run_chain, s, config, i) for i in range(n_chains)]
        return [f.result() for f in futures]

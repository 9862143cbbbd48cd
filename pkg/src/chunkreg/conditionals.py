"""Full conditional posteriors of the Bayesian linear model.

Everything here is closed-form algebra over :class:`SummaryStatistics` and
the current values of the other parameter blocks.  Priors on the
coefficients:

* :class:`Flat` -- improper uniform prior;
* :class:`MvnKnown` -- ``beta ~ N(mu, C)`` with fixed ``mu`` and ``C``;
* :class:`MvnUnknown` -- ``beta | mu, C ~ N(mu, C)`` with hyperpriors
  ``mu ~ N(eta, D)`` and ``C^-1 ~ Wishart(lambda, V)``.

Priors on the error variance: :class:`InverseGamma` and :class:`Jeffreys`
(``p(sigma^2) = 1/sigma^2``).

All SPD systems are solved through Cholesky factors; an explicit inverse is
only formed when a covariance matrix is itself the return value.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from .distributions import SpdMatrix, as_spd, cholesky
from .errors import (
    DataError,
    DegenerateDataError,
    DomainError,
    FactorizationError,
    InconsistentStatisticsError,
    RankDeficiencyError,
    ShapeError,
)
from .summaries import SummaryStatistics

RESIDUAL_CLAMP = 1e-9
XTX_FACTOR_TOL = 1e-8


def _vector(v, p: int, name: str, default: float) -> np.ndarray:
    if v is None:
        return np.full(p, default, dtype=np.float64)
    v = np.atleast_1d(np.asarray(v, dtype=np.float64))
    if v.shape != (p,):
        raise ShapeError(f"{name} has length {v.size}, expected length {p}")
    return v


def _matrix(m, p: int, name: str) -> SpdMatrix:
    if m is None:
        return SpdMatrix.identity(p)
    m = as_spd(m, name)
    if m.dim != p:
        raise ShapeError(f"{name} is {m.dim}x{m.dim}, expected {p}x{p}")
    return m


# --- priors on beta -----------------------------------------------------


@dataclass(frozen=True)
class Flat:
    """Uniform (improper) prior on the coefficients."""

    name = "flat"

    def resolve(self, p: int) -> "Flat":
        return self


@dataclass(frozen=True)
class MvnKnown:
    """Normal prior with known mean ``mu`` and covariance ``C``.

    Either ``C`` or its inverse ``Cinv`` may be given; ``Cinv`` wins when both
    are.  Missing values default to a zero mean and identity covariance.
    """

    mu: Optional[np.ndarray] = None
    C: Optional[Union[np.ndarray, SpdMatrix]] = None
    Cinv: Optional[Union[np.ndarray, SpdMatrix]] = None

    name = "mvnorm-known"

    def resolve(self, p: int) -> "MvnKnown":
        mu = _vector(self.mu, p, "mean.mu", 0.0)
        if self.Cinv is not None:
            cinv = _matrix(self.Cinv, p, "prec.Cinv").check()
        elif self.C is not None:
            cinv = _matrix(self.C, p, "cov.C").check().inverse().check()
        else:
            cinv = SpdMatrix.identity(p)
        return MvnKnown(mu=mu, C=None, Cinv=cinv)


@dataclass(frozen=True)
class MvnUnknown:
    """Hierarchical normal prior with unknown mean and precision.

    Defaults: ``eta = 0``, ``Dinv = I``, ``lam = p``, ``Vinv = I``,
    ``mu_init = 1`` and ``Cinv_init = I``.
    """

    eta: Optional[np.ndarray] = None
    Dinv: Optional[Union[np.ndarray, SpdMatrix]] = None
    lam: Optional[float] = None
    Vinv: Optional[Union[np.ndarray, SpdMatrix]] = None
    mu_init: Optional[np.ndarray] = None
    Cinv_init: Optional[Union[np.ndarray, SpdMatrix]] = None

    name = "mvnorm-unknown"

    def resolve(self, p: int) -> "MvnUnknown":
        lam = float(p if self.lam is None else self.lam)
        if not lam >= p:
            raise DomainError(f"Cinv.hyper.df.lambda = {lam} must be >= p = {p}")
        return MvnUnknown(
            eta=_vector(self.eta, p, "mu.hyper.mean.eta", 0.0),
            Dinv=_matrix(self.Dinv, p, "mu.hyper.prec.Dinv").check(),
            lam=lam,
            Vinv=_matrix(self.Vinv, p, "Cinv.hyper.invscale.Vinv").check(),
            mu_init=_vector(self.mu_init, p, "mu.init", 1.0),
            Cinv_init=_matrix(self.Cinv_init, p, "Cinv.init").check(),
        )


BetaPrior = Union[Flat, MvnKnown, MvnUnknown]


# --- priors on sigma^2 --------------------------------------------------


@dataclass(frozen=True)
class InverseGamma:
    """``sigma^2 ~ IG(a, b)`` with ``b`` a scale: the sampler uses rate ``1/b``."""

    a: float = 1.0
    b: float = 1.0
    sigmasq_init: float = 1.0

    name = "inverse-gamma"

    def __post_init__(self) -> None:
        for label, v in (("a", self.a), ("b", self.b), ("sigmasq_init", self.sigmasq_init)):
            if not (v > 0 and np.isfinite(v)):
                raise DomainError(f"inverse gamma {label} must be positive, got {v}")


@dataclass(frozen=True)
class Jeffreys:
    """Jeffreys prior ``p(sigma^2) = 1 / sigma^2``."""

    sigmasq_init: float = 1.0

    name = "jeffreys"

    def __post_init__(self) -> None:
        if not (self.sigmasq_init > 0 and np.isfinite(self.sigmasq_init)):
            raise DomainError(f"sigmasq_init must be positive, got {self.sigmasq_init}")


SigmaSqPrior = Union[InverseGamma, Jeffreys]


@dataclass(frozen=True)
class MvnParams:
    """Mean and covariance of a multivariate normal conditional."""

    mean: np.ndarray
    cov: SpdMatrix


# --- beta ---------------------------------------------------------------


def xtx_factor(s: SummaryStatistics, xtx_chol: Optional[np.ndarray] = None) -> np.ndarray:
    """Lower Cholesky factor of ``s.xtx`` for the flat prior.

    A precomputed factor is accepted after checking ``L L^T`` against
    ``xtx`` to a relative ``1e-8`` (max-entry scaled).
    """
    if xtx_chol is not None:
        low = np.asarray(xtx_chol, dtype=np.float64)
        if low.shape != (s.p, s.p):
            raise ShapeError(f"xtx factor is {low.shape}, expected {s.p}x{s.p}")
        scale = max(float(np.max(np.abs(s.xtx))), 1e-300)
        if np.max(np.abs(low @ low.T - s.xtx)) > XTX_FACTOR_TOL * scale:
            raise DataError("supplied xtx factor does not reproduce xtx")
        return low
    try:
        return cholesky(s.xtx, "xtx")
    except FactorizationError as exc:
        raise RankDeficiencyError(
            f"xtx is singular or not positive definite (pivot {exc.pivot}); the flat "
            "prior gives an improper posterior here, use an informative beta prior"
        ) from exc


def _flat_mean(s: SummaryStatistics, low: np.ndarray) -> np.ndarray:
    return SpdMatrix(s.xtx, chol=low, what="xtx").solve(s.xty)


def beta_precision(
    s: SummaryStatistics,
    prior: BetaPrior,
    sigmasq: float,
    mu_cur: Optional[np.ndarray] = None,
    cinv_cur: Optional[SpdMatrix] = None,
) -> tuple[np.ndarray, SpdMatrix]:
    """Mean and *precision* of ``beta | rest`` (no inverse formed).

    Under :class:`MvnUnknown` the chain's current ``mu`` and ``C^-1`` are
    required; under :class:`MvnKnown` they come from the prior.
    """
    if not sigmasq > 0:
        raise DomainError(f"sigmasq must be positive, got {sigmasq}")
    p = s.p
    if isinstance(prior, Flat):
        low = xtx_factor(s)
        return _flat_mean(s, low), SpdMatrix(
            s.xtx / sigmasq, chol=low / np.sqrt(sigmasq), what="beta precision"
        )
    if isinstance(prior, MvnKnown):
        prior = prior.resolve(p)
        mu, cinv = prior.mu, prior.Cinv
    elif isinstance(prior, MvnUnknown):
        if mu_cur is None or cinv_cur is None:
            raise DataError("mvnorm-unknown beta conditional needs the current mu and Cinv")
        mu = _vector(mu_cur, p, "mu", 0.0)
        cinv = _matrix(cinv_cur, p, "Cinv")
    else:
        raise TypeError(f"unknown beta prior {prior!r}")
    prec = SpdMatrix(cinv.entries + s.xtx / sigmasq, what="beta precision")
    mean = prec.solve(cinv.entries @ mu + s.xty / sigmasq)
    return mean, prec


def beta_conditional(
    s: SummaryStatistics,
    prior: BetaPrior,
    sigmasq: float,
    mu_cur: Optional[np.ndarray] = None,
    cinv_cur: Optional[SpdMatrix] = None,
) -> MvnParams:
    """Normal conditional of the coefficients.

    Flat prior: mean ``(XtX)^-1 XtY``, covariance ``sigma^2 (XtX)^-1``.
    Normal priors: precision ``C^-1 + XtX / sigma^2`` and mean
    ``precision^-1 (C^-1 mu + XtY / sigma^2)``.
    """
    mean, prec = beta_precision(s, prior, sigmasq, mu_cur, cinv_cur)
    return MvnParams(mean, prec.inverse())


# --- sigma^2 ------------------------------------------------------------


def residual_quadratic(s: SummaryStatistics, beta: np.ndarray) -> float:
    """``(Y - X beta)^T (Y - X beta)`` from the summaries alone.

    Expands to ``YtY - 2 beta^T XtY + beta^T XtX beta``.  Rounding can push a
    near-zero result slightly negative: values down to ``-1e-9 * YtY`` are
    clamped to 0, anything lower means the statistics are inconsistent.
    """
    beta = np.asarray(beta, dtype=np.float64)
    if beta.shape != (s.p,):
        raise ShapeError(f"beta has length {beta.size}, expected length {s.p}")
    q = s.yty - 2.0 * float(beta @ s.xty) + float(beta @ s.xtx @ beta)
    if q < 0.0:
        if q >= -RESIDUAL_CLAMP * s.yty:
            return 0.0
        raise InconsistentStatisticsError(
            f"residual sum of squares is negative ({q!r}); xtx, xty and yty disagree"
        )
    return q


def sigmasq_conditional(
    s: SummaryStatistics, prior: SigmaSqPrior, beta: np.ndarray
) -> tuple[float, float]:
    """Shape and rate of the inverse-gamma conditional of ``sigma^2``."""
    if s.n < 1:
        raise DegenerateDataError("sigma^2 conditional needs at least one data row")
    q = residual_quadratic(s, beta)
    if isinstance(prior, InverseGamma):
        shape, rate = s.n / 2.0 + prior.a, 0.5 * q + 1.0 / prior.b
    elif isinstance(prior, Jeffreys):
        shape, rate = s.n / 2.0, 0.5 * q
    else:
        raise TypeError(f"unknown sigma^2 prior {prior!r}")
    if not rate > 0.0:
        raise DegenerateDataError(
            "sigma^2 conditional rate is zero: the data are fitted exactly"
        )
    return shape, rate


# --- hierarchical blocks ------------------------------------------------


def mu_precision(
    prior: MvnUnknown, beta: np.ndarray, cinv_cur: SpdMatrix
) -> tuple[np.ndarray, SpdMatrix]:
    """Mean and precision ``D^-1 + C^-1`` of ``mu | rest``."""
    p = np.asarray(beta).size
    prior = prior.resolve(p)
    beta = _vector(beta, p, "beta", 0.0)
    cinv = _matrix(cinv_cur, p, "Cinv")
    prec = SpdMatrix(prior.Dinv.entries + cinv.entries, what="mu precision")
    mean = prec.solve(cinv.entries @ beta + prior.Dinv.entries @ prior.eta)
    return mean, prec


def mu_conditional(prior: MvnUnknown, beta: np.ndarray, cinv_cur: SpdMatrix) -> MvnParams:
    """Normal conditional of the prior mean; does not involve the data."""
    mean, prec = mu_precision(prior, beta, cinv_cur)
    return MvnParams(mean, prec.inverse())


def cinv_conditional(
    prior: MvnUnknown, beta: np.ndarray, mu: np.ndarray
) -> tuple[float, SpdMatrix]:
    """Wishart conditional of ``C^-1``: df ``1 + lambda``, scale ``(V^-1 + d d^T)^-1``."""
    p = np.asarray(beta).size
    prior = prior.resolve(p)
    d = _vector(beta, p, "beta", 0.0) - _vector(mu, p, "mu", 0.0)
    inner = SpdMatrix(prior.Vinv.entries + np.outer(d, d), what="Cinv scale inverse")
    return 1.0 + prior.lam, inner.inverse()

"""Seeded sampling primitives: multivariate normal, Wishart, inverse gamma.

All randomness comes from :class:`RngStream`, a thin wrapper around numpy's
PCG64 bit generator keyed by ``(seed, stream)`` through ``SeedSequence``.
Normal variates use numpy's ziggurat sampler and gamma variates numpy's
Marsaglia-Tsang rejection sampler (valid for every shape > 0, with the
``U**(1/shape)`` boost below 1).  Results are reproducible for a fixed
numpy version and floating-point platform.
"""

from __future__ import annotations

from functools import cached_property

import numpy as np
from scipy.linalg import solve_triangular

from .errors import DomainError, FactorizationError, ShapeError

_EPS = np.finfo(np.float64).eps


class RngStream:
    """Independent random stream identified by ``(seed, stream)``.

    Chains, simulations and tests each take their own stream index so that
    adding a consumer never shifts another consumer's draws.
    """

    def __init__(self, seed: int, stream: int = 0):
        if seed < 0 or seed >= 2**64:
            raise DomainError(f"seed must be a 64-bit unsigned integer, got {seed}")
        self.seed = int(seed)
        self.stream = int(stream)
        seq = np.random.SeedSequence(self.seed, spawn_key=(self.stream,))
        self.generator = np.random.Generator(np.random.PCG64(seq))

    def __repr__(self) -> str:
        return f"RngStream(seed={self.seed}, stream={self.stream})"

    def standard_normal(self, size=None):
        return self.generator.standard_normal(size)

    def standard_gamma(self, shape, size=None):
        return self.generator.standard_gamma(shape, size)

    def chi_square(self, df, size=None):
        """Chi-square draws as ``Gamma(df/2, rate=1/2)``."""
        return 2.0 * self.generator.standard_gamma(np.asarray(df, dtype=float) / 2.0, size)


def cholesky(a: np.ndarray, what: str = "matrix") -> np.ndarray:
    """Lower Cholesky factor of a symmetric matrix.

    Raises :class:`FactorizationError` naming the first (0-based) pivot that
    is not safely positive.  A pivot counts as failed when its square is at
    most ``dim * eps * max(diag(a))``.
    """
    a = np.asarray(a, dtype=np.float64)
    dim = a.shape[0]
    diag_max = float(np.max(np.abs(np.diag(a)))) if dim else 0.0
    tol = dim * _EPS * diag_max
    try:
        low = np.linalg.cholesky(a)
    except np.linalg.LinAlgError:
        low = None
    if low is not None and np.all(np.isfinite(low)):
        piv = np.diag(low) ** 2
        if diag_max > 0.0 and np.all(piv > tol):
            return low
    raise FactorizationError(_failing_pivot(a, tol), what)


def _failing_pivot(a: np.ndarray, tol: float) -> int:
    dim = a.shape[0]
    low = np.zeros_like(a)
    for j in range(dim):
        d = a[j, j] - low[j, :j] @ low[j, :j]
        if not (d > tol):
            return j
        low[j, j] = np.sqrt(d)
        low[j + 1 :, j] = (a[j + 1 :, j] - low[j + 1 :, :j] @ low[j, :j]) / low[j, j]
    return dim - 1


class SpdMatrix:
    """Symmetric positive-definite matrix with a lazily cached Cholesky factor.

    Construction checks symmetry (to a relative 1e-10, then symmetrizes);
    positive definiteness is checked when the factor is first needed.
    """

    def __init__(self, entries, *, chol: np.ndarray | None = None, what: str = "matrix"):
        a = np.array(entries, dtype=np.float64, ndmin=2)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ShapeError(f"{what} must be square, got shape {a.shape}")
        scale = max(float(np.max(np.abs(a))), 1e-300) if a.size else 1.0
        if np.max(np.abs(a - a.T), initial=0.0) > 1e-10 * scale:
            raise DomainError(f"{what} is not symmetric")
        a = (a + a.T) / 2.0
        a.setflags(write=False)
        self.entries = a
        self.what = what
        if chol is not None:
            self.__dict__["chol"] = chol

    @classmethod
    def identity(cls, dim: int) -> "SpdMatrix":
        return cls(np.eye(dim), chol=np.eye(dim), what="identity")

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    @cached_property
    def chol(self) -> np.ndarray:
        return cholesky(self.entries, self.what)

    def check(self) -> "SpdMatrix":
        """Force factorization; raises if not positive definite."""
        self.chol
        return self

    def solve(self, b: np.ndarray) -> np.ndarray:
        """``entries^-1 b`` through the Cholesky factor."""
        low = self.chol
        t = solve_triangular(low, b, lower=True, check_finite=False)
        return solve_triangular(low.T, t, lower=False, check_finite=False)

    def inverse(self) -> "SpdMatrix":
        inv = self.solve(np.eye(self.dim))
        return SpdMatrix((inv + inv.T) / 2.0, what=f"inverse of {self.what}")

    def __array__(self, dtype=None, copy=None):
        return self.entries if dtype is None else self.entries.astype(dtype)

    def __repr__(self) -> str:
        return f"SpdMatrix(dim={self.dim})"


def as_spd(m, what: str = "matrix") -> SpdMatrix:
    return m if isinstance(m, SpdMatrix) else SpdMatrix(m, what=what)


def sample_mvn(rng: RngStream, mean, cov) -> np.ndarray:
    """Draw ``mean + L z`` with ``L L^T = cov`` and ``z`` standard normal."""
    cov = as_spd(cov, "covariance")
    mean = np.asarray(mean, dtype=np.float64)
    if mean.shape != (cov.dim,):
        raise ShapeError(f"mean has length {mean.size}, covariance is {cov.dim}x{cov.dim}")
    low = cov.chol
    return mean + low @ rng.standard_normal(cov.dim)


def sample_mvn_precision(rng: RngStream, mean, precision) -> np.ndarray:
    """Normal draw parametrized by its precision matrix ``P = L L^T``.

    Returns ``mean + L^-T z``; the covariance of ``L^-T z`` is ``P^-1``, so no
    inverse is ever formed.
    """
    precision = as_spd(precision, "precision")
    mean = np.asarray(mean, dtype=np.float64)
    if mean.shape != (precision.dim,):
        raise ShapeError(
            f"mean has length {mean.size}, precision is {precision.dim}x{precision.dim}"
        )
    z = rng.standard_normal(precision.dim)
    return mean + solve_triangular(precision.chol.T, z, lower=False, check_finite=False)


def sample_wishart(rng: RngStream, df: float, scale) -> SpdMatrix:
    """Wishart draw by the Bartlett decomposition.

    With ``L = chol(scale)`` and ``A`` lower triangular, ``A[i, i]`` the root of
    a chi-square on ``df - i`` degrees of freedom (0-based ``i``) and standard
    normals below the diagonal, the draw is ``(L A)(L A)^T``.  ``L A`` is
    itself lower triangular with a positive diagonal, so it is kept as the
    draw's Cholesky factor.
    """
    scale = as_spd(scale, "Wishart scale")
    dim = scale.dim
    if not df >= dim:
        raise DomainError(f"Wishart degrees of freedom {df} must be >= dimension {dim}")
    low = scale.chol
    a = np.zeros((dim, dim))
    a[np.diag_indices(dim)] = np.sqrt(rng.chi_square(df - np.arange(dim)))
    a[np.tril_indices(dim, -1)] = rng.standard_normal(dim * (dim - 1) // 2)
    la = low @ a
    return SpdMatrix(la @ la.T, chol=la, what="Wishart draw")


def sample_inverse_gamma(rng: RngStream, shape: float, rate: float, size=None):
    """Inverse-gamma draw with density proportional to ``x^(-shape-1) exp(-rate/x)``.

    Returns ``1/g`` for ``g ~ Gamma(shape, rate)``.  A prior written as
    ``IG(a, b)`` with ``b`` a scale in the sense of ``[... + 1/b]^-1`` maps to
    ``shape=a, rate=1/b``.
    """
    if not (shape > 0 and rate > 0):
        raise DomainError(f"inverse gamma needs shape > 0 and rate > 0, got {shape}, {rate}")
    g = rng.standard_gamma(shape, size) / rate
    return 1.0 / g

"""Synthetic regression data with compound-symmetry correlated predictors.

Rows are ``x ~ N(0, Sigma)`` with unit variances and common correlation
``rho``, and ``y = beta0 + x . beta[1:] + eps`` with ``eps ~ N(0, sigma_sq)``.
The file has the ``k`` predictors in columns ``1..k`` and the response in
column ``k + 1``, written ``chunk_rows`` rows at a time.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from .distributions import RngStream
from .errors import DataError, DomainError, ShapeError

BETA_STREAM = 0
PREDICTOR_STREAM = 1
NOISE_STREAM = 2


@dataclass
class SimulationConfig:
    n: int
    k: int
    rho: float = 0.2
    sigma_sq: float = 1.0
    seed: int = 0
    beta: Optional[np.ndarray] = None
    chunk_rows: int = 100_000
    digits: int = 17
    delimiter: str = ","

    def __post_init__(self) -> None:
        if self.n < 1 or self.k < 1:
            raise DomainError(f"n and k must be positive, got n={self.n}, k={self.k}")
        lo = -1.0 / (self.k - 1) if self.k > 1 else -math.inf
        if not lo < self.rho < 1.0:
            raise DomainError(
                f"rho = {self.rho} makes the correlation matrix singular or indefinite; "
                f"need {lo:g} < rho < 1 for k = {self.k}"
            )
        if not self.sigma_sq >= 0.0:
            raise DomainError(f"sigma_sq must be >= 0, got {self.sigma_sq}")
        if self.chunk_rows < 1:
            raise DomainError("chunk_rows must be >= 1")
        if not 1 <= self.digits <= 17:
            raise DomainError("digits must be between 1 and 17")
        if self.beta is not None:
            self.beta = np.asarray(self.beta, dtype=np.float64)
            if self.beta.shape != (self.k + 1,):
                raise ShapeError(f"beta has length {self.beta.size}, expected {self.k + 1}")


def compound_symmetry(k: int, rho: float) -> np.ndarray:
    """``(1 - rho) I + rho 1 1^T``."""
    return (1.0 - rho) * np.eye(k) + rho * np.ones((k, k))


def compound_symmetry_cholesky(k: int, rho: float) -> np.ndarray:
    return np.linalg.cholesky(compound_symmetry(k, rho))


def simulate_dataset(
    config: SimulationConfig,
    out_path: str | os.PathLike,
    truth_path: str | os.PathLike | None = None,
) -> np.ndarray:
    """Write the data file and a JSON truth sidecar; return the true beta.

    The sidecar defaults to ``<out_path>.truth.json``.  The coefficient
    vector, when not configured, is drawn standard normal from stream 0 of
    the seed; predictors and errors come from streams 1 and 2, so the file
    does not depend on ``chunk_rows``.
    """
    k = config.k
    beta = config.beta
    if beta is None:
        beta = RngStream(config.seed, BETA_STREAM).standard_normal(k + 1)
    xrng = RngStream(config.seed, PREDICTOR_STREAM)
    erng = RngStream(config.seed, NOISE_STREAM)
    low = compound_symmetry_cholesky(k, config.rho)
    sigma = math.sqrt(config.sigma_sq)
    fmt = config.delimiter.join([f"%.{config.digits}g"] * (k + 1))
    out_path = Path(out_path)
    try:
        with open(out_path, "w", newline="") as fh:
            left = config.n
            while left > 0:
                m = min(left, config.chunk_rows)
                x = xrng.standard_normal((m, k)) @ low.T
                eps = erng.standard_normal(m)
                y = beta[0] + x @ beta[1:]
                if sigma > 0.0:
                    y = y + sigma * eps
                block = np.column_stack([x, y]).tolist()
                fh.write("\n".join(fmt % tuple(r) for r in block))
                fh.write("\n")
                left -= m
        truth_path = Path(truth_path) if truth_path else out_path.with_name(out_path.name + ".truth.json")
        truth = {
            "n": config.n,
            "k": k,
            "rho": config.rho,
            "sigma_sq": config.sigma_sq,
            "seed": config.seed,
            "beta": [float(b) for b in beta],
        }
        truth_path.write_text(json.dumps(truth, indent=2) + "\n")
    except OSError as exc:
        raise DataError(f"{out_path}: cannot write simulated data: {exc}") from exc
    return np.array(beta, dtype=np.float64)


def load_truth(path: str | os.PathLike) -> dict:
    """Read a truth sidecar; ``beta`` comes back as an array."""
    doc = json.loads(Path(path).read_text())
    doc["beta"] = np.asarray(doc["beta"], dtype=np.float64)
    return doc

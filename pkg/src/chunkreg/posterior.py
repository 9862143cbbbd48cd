"""Posterior summaries and draw/plot-data files.

Quantiles use linear interpolation at position ``1 + prob * (T - 1)`` of the
sorted retained draws (``numpy.quantile``'s default "linear" method).
Density grids use a Gaussian kernel with the rule-of-thumb bandwidth
``0.9 * min(sd, IQR / 1.34) * T**(-1/5)``.
"""

from __future__ import annotations

import csv
import math
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import DataError, DomainError, SchemaError
from .gibbs import ChainOutput

DEFAULT_PROBS = (0.025, 0.25, 0.5, 0.75, 0.975)
GRID_POINTS = 512


@dataclass
class PosteriorSummary:
    name: str
    mean: float
    sd: float
    naive_se: float
    quantiles: dict[float, float] = field(default_factory=dict)
    n_retained: int = 0


def _check_probs(probs: Sequence[float]) -> list[float]:
    probs = [float(q) for q in probs]
    if not probs:
        raise DomainError("at least one quantile probability is required")
    if any(not 0.0 < q < 1.0 for q in probs):
        raise DomainError(f"quantile probabilities must lie strictly inside (0, 1): {probs}")
    if any(b <= a for a, b in zip(probs, probs[1:])):
        raise DomainError(f"quantile probabilities must be strictly increasing: {probs}")
    return probs


def summarize_draws(name: str, draws: np.ndarray, probs=DEFAULT_PROBS) -> PosteriorSummary:
    """Summary of one scalar parameter's retained draws."""
    x = np.asarray(draws, dtype=np.float64)
    T = x.size
    if T < 2:
        raise DomainError(f"{name}: need at least 2 retained draws, got {T}")
    probs = _check_probs(probs)
    sd = float(np.std(x, ddof=1))
    qs = np.quantile(x, probs, method="linear")
    return PosteriorSummary(
        name=name,
        mean=float(np.mean(x)),
        sd=sd,
        naive_se=sd / math.sqrt(T),
        quantiles={q: float(v) for q, v in zip(probs, qs)},
        n_retained=T,
    )


def _retained(chain: ChainOutput, burn_in: int) -> dict[str, np.ndarray]:
    T = chain.t_samples
    if burn_in < 0:
        raise DomainError(f"burn_in must be >= 0, got {burn_in}")
    if burn_in >= T:
        raise DomainError(f"burn_in {burn_in} leaves no draws out of {T}")
    return {k: v[burn_in:] for k, v in chain.columns().items()}


def summarize(chain: ChainOutput, burn_in: int = 0, probs=DEFAULT_PROBS) -> list[PosteriorSummary]:
    """Summaries of every coefficient, ``sigmasq`` and (when sampled) ``mu``.

    Draws ``burn_in + 1 .. T`` are used.
    """
    cols = _retained(chain, burn_in)
    return [
        summarize_draws(name, x, probs)
        for name, x in cols.items()
        if not name.startswith("cinv_")
    ]


def credible_interval(
    summary: PosteriorSummary, level: float = 0.95, draws: np.ndarray | None = None
) -> tuple[float, float]:
    """Equal-tail interval between the ``(1 -+ level) / 2`` quantiles.

    Quantiles missing from ``summary`` are computed from ``draws`` if given.
    """
    if not 0.0 < level < 1.0:
        raise DomainError(f"level must lie in (0, 1), got {level}")
    out = []
    for prob in ((1.0 - level) / 2.0, (1.0 + level) / 2.0):
        hit = [v for q, v in summary.quantiles.items() if math.isclose(q, prob, abs_tol=1e-12)]
        if hit:
            out.append(hit[0])
        elif draws is not None:
            out.append(float(np.quantile(np.asarray(draws, dtype=np.float64), prob)))
        else:
            raise DomainError(f"{summary.name}: quantile {prob:g} not available")
    return out[0], out[1]


def silverman_bandwidth(x: np.ndarray) -> float:
    """``0.9 * min(sd, IQR/1.34) * T**(-1/5)``, falling back to sd, |x0|, 1."""
    x = np.asarray(x, dtype=np.float64)
    sd = float(np.std(x, ddof=1)) if x.size > 1 else 0.0
    q1, q3 = np.quantile(x, [0.25, 0.75])
    lo = min(sd, (q3 - q1) / 1.34)
    if not lo > 0:
        lo = sd or abs(float(x[0])) or 1.0
    return 0.9 * lo * x.size ** (-0.2)


def density_grid(x: np.ndarray, points: int = GRID_POINTS) -> tuple[np.ndarray, np.ndarray, float]:
    """Gaussian kernel density on an even grid from ``min - 3h`` to ``max + 3h``."""
    x = np.asarray(x, dtype=np.float64)
    h = silverman_bandwidth(x)
    grid = np.linspace(x.min() - 3.0 * h, x.max() + 3.0 * h, points)
    dens = np.empty(points)
    norm = 1.0 / (x.size * h * math.sqrt(2.0 * math.pi))
    step = max(1, 4_000_000 // max(x.size, 1))
    for i in range(0, points, step):
        u = (grid[i : i + step, None] - x[None, :]) / h
        dens[i : i + step] = np.exp(-0.5 * u * u).sum(axis=1) * norm
    return grid, dens, h


def _fmt(v: float) -> str:
    return format(float(v), ".17g")


def _write_csv(path: Path, header: Sequence[str], rows) -> None:
    try:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            for r in rows:
                w.writerow([v if isinstance(v, str) else _fmt(v) for v in r])
    except OSError as exc:
        raise DataError(f"{path}: cannot write: {exc}") from exc


def prob_label(q: float) -> str:
    return f"q{q:g}"


def write_draws(chain: ChainOutput, path, burn_in: int = 0) -> int:
    """Write retained draws, one row per iteration; returns the row count."""
    cols = _retained(chain, burn_in)
    data = np.column_stack(list(cols.values()))
    path = Path(path)
    try:
        with open(path, "w", newline="") as fh:
            fh.write(",".join(cols) + "\n")
            fmt = ",".join(["%.17g"] * data.shape[1])
            for row in data.tolist():
                fh.write(fmt % tuple(row) + "\n")
    except OSError as exc:
        raise DataError(f"{path}: cannot write draws: {exc}") from exc
    return data.shape[0]


def read_draws(path) -> ChainOutput:
    """Rebuild a :class:`ChainOutput` from a draws file."""
    path = Path(path)
    try:
        with open(path, newline="") as fh:
            header = fh.readline().strip().split(",")
            data = np.loadtxt(fh, delimiter=",", ndmin=2)
    except OSError as exc:
        raise DataError(f"{path}: cannot read draws: {exc}") from exc
    except ValueError as exc:
        raise SchemaError(f"{path}: malformed draws file: {exc}") from exc
    if data.size == 0:
        data = np.empty((0, len(header)))
    if data.shape[1] != len(header):
        raise SchemaError(f"{path}: {data.shape[1]} columns but {len(header)} names")
    pos = {name: j for j, name in enumerate(header)}
    if "sigmasq" not in pos:
        raise SchemaError(f"{path}: no sigmasq column")
    betas = [h for h in header if h.startswith("beta")]
    if not betas:
        raise SchemaError(f"{path}: no beta columns")
    first = int(betas[0][4:])
    idx = [int(b[4:]) for b in betas]
    beta = data[:, [pos[b] for b in betas]]
    mu = data[:, [pos[f"mu{i}"] for i in idx]] if f"mu{first}" in pos else None
    cinv = None
    if f"cinv_{first}_{first}" in pos:
        p = len(idx)
        cinv = np.empty((data.shape[0], p, p))
        for a, i in enumerate(idx):
            for b, j in enumerate(idx):
                cinv[:, a, b] = data[:, pos[f"cinv_{i}_{j}"]]
    return ChainOutput(beta, data[:, pos["sigmasq"]].copy(), mu, cinv, first)


def write_summary(summaries: Sequence[PosteriorSummary], path) -> None:
    probs = list(summaries[0].quantiles) if summaries else []
    header = ["parameter", "mean", "sd", "naive_se"] + [prob_label(q) for q in probs]
    rows = []
    for s in summaries:
        rows.append([s.name, s.mean, s.sd, s.naive_se] + [s.quantiles[q] for q in probs])
    _write_csv(Path(path), header, rows)


def write_plot_data(chain: ChainOutput, burn_in: int, prefix) -> list[Path]:
    """History and density files for each summarized parameter."""
    written = []
    for name, x in _retained(chain, burn_in).items():
        if name.startswith("cinv_"):
            continue
        hist = Path(f"{prefix}{name}_history.csv")
        its = np.arange(burn_in + 1, burn_in + 1 + x.size)
        _write_csv(hist, ["iteration", "value"], ((str(i), v) for i, v in zip(its, x)))
        grid, dens, _ = density_grid(x)
        dpath = Path(f"{prefix}{name}_density.csv")
        _write_csv(dpath, ["x", "density"], zip(grid, dens))
        written += [hist, dpath]
    return written


def export(
    chain: ChainOutput,
    burn_in: int,
    prefix: str | os.PathLike,
    probs=DEFAULT_PROBS,
    plot_data: bool = True,
) -> dict[str, Path]:
    """Write ``<prefix>draws.csv``, ``<prefix>summary.csv`` and plot data.

    Plot data go to ``<prefix><param>_history.csv`` and
    ``<prefix><param>_density.csv``.
    """
    prefix = os.fspath(prefix)
    out = {"draws": Path(f"{prefix}draws.csv"), "summary": Path(f"{prefix}summary.csv")}
    write_draws(chain, out["draws"], burn_in)
    write_summary(summarize(chain, burn_in, probs), out["summary"])
    if plot_data:
        for p in write_plot_data(chain, burn_in, prefix):
            out[p.stem] = p
    return out

"""Mergeable sufficient statistics for linear regression.

The only data-dependent quantities any posterior conditional needs are
``XtX``, ``XtY``, ``YtY`` and ``n``.  Each of them is a plain sum over rows,
so a data set split horizontally into chunks (or files, or machines) can be
summarized piece by piece and the pieces added together::

    XtX = sum_m Xm^T Xm,   XtY = sum_m Xm^T Ym,   YtY = sum_m Ym^T Ym

:func:`ingest` streams delimited text files through :func:`fold_chunk` with
bounded memory; :func:`merge` combines bundles computed elsewhere, which is
also how previously saved statistics are updated with new files.
"""

from __future__ import annotations

import itertools
import json
import math
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import IO, Iterator, Sequence, Union

import numpy as np
import pandas as pd

from .errors import (
    DataError,
    IncompatibleSummariesError,
    ParseError,
    SchemaError,
    ShapeError,
    SymmetryError,
)

SCHEMA_VERSION = 1

Source = Union[str, os.PathLike, IO]


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=np.float64, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class SummaryStatistics:
    """Sufficient statistics of a regression data set.

    Attributes
    ----------
    p : int
        Number of design columns, including the intercept column if any.
    intercept : bool
        Whether design column 0 is the constant-1 column.
    n : int
        Number of rows folded in.
    xtx : ndarray (p, p)
        Sum of ``Xm^T Xm`` over chunks; exactly symmetric.
    xty : ndarray (p,)
        Sum of ``Xm^T Ym`` over chunks.
    yty : float
        Sum of ``Ym^T Ym`` over chunks.
    """

    p: int
    intercept: bool
    n: int
    xtx: np.ndarray = field(repr=False)
    xty: np.ndarray = field(repr=False)
    yty: float

    def __post_init__(self) -> None:
        p = int(self.p)
        if p < 1:
            raise ShapeError(f"p must be positive, got {self.p}")
        xtx = _frozen(self.xtx)
        xty = _frozen(self.xty)
        if xtx.shape != (p, p):
            raise ShapeError(f"xtx must be {p}x{p}, got shape {xtx.shape}")
        if xty.shape != (p,):
            raise ShapeError(f"xty must have length {p}, got shape {xty.shape}")
        n = int(self.n)
        if n < 0:
            raise DataError(f"n must be non-negative, got {self.n}")
        yty = float(self.yty)
        if not (yty >= 0.0):
            raise DataError(f"yty must be non-negative, got {self.yty}")
        if not np.array_equal(xtx, xtx.T):
            raise SymmetryError("xtx is not symmetric")
        if n == 0 and (yty != 0.0 or xtx.any() or xty.any()):
            raise DataError("statistics with n = 0 must be all zero")
        if self.intercept and n > 0 and xtx[0, 0] != n:
            raise DataError(
                f"intercept column requires xtx[0][0] == n ({n}), got {xtx[0, 0]!r}"
            )
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "intercept", bool(self.intercept))
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "xtx", xtx)
        object.__setattr__(self, "xty", xty)
        object.__setattr__(self, "yty", yty)

    @classmethod
    def zeros(cls, p: int, intercept: bool = True) -> "SummaryStatistics":
        """Empty statistics: the identity element of :func:`merge`."""
        return cls(p, intercept, 0, np.zeros((p, p)), np.zeros(p), 0.0)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SummaryStatistics):
            return NotImplemented
        return (
            self.p == other.p
            and self.intercept == other.intercept
            and self.n == other.n
            and self.yty == other.yty
            and np.array_equal(self.xtx, other.xtx)
            and np.array_equal(self.xty, other.xty)
        )

    __hash__ = None  # type: ignore[assignment]

    def __add__(self, other: "SummaryStatistics") -> "SummaryStatistics":
        return merge(self, other)


def fold_chunk(
    acc: SummaryStatistics, x_chunk: np.ndarray, y_chunk: np.ndarray
) -> SummaryStatistics:
    """Add one horizontal slice of the design to ``acc``.

    ``x_chunk`` must already contain the intercept column when
    ``acc.intercept`` is set.
    """
    x = np.asarray(x_chunk, dtype=np.float64)
    y = np.asarray(y_chunk, dtype=np.float64)
    if x.ndim != 2:
        raise ShapeError(f"x_chunk must be 2-dimensional, got {x.ndim} dimensions")
    if x.shape[1] != acc.p:
        raise ShapeError(f"x_chunk has {x.shape[1]} columns, expected {acc.p}")
    if y.ndim != 1 or y.shape[0] != x.shape[0]:
        raise ShapeError(
            f"y_chunk must be a vector of length {x.shape[0]}, got shape {y.shape}"
        )
    m = x.shape[0]
    if m == 0:
        return acc
    if acc.intercept and not np.all(x[:, 0] == 1.0):
        raise DataError("column 0 of x_chunk must be all ones for intercept statistics")
    xtx = acc.xtx + x.T @ x
    xtx = (xtx + xtx.T) / 2.0
    return SummaryStatistics(
        acc.p, acc.intercept, acc.n + m, xtx, acc.xty + x.T @ y, acc.yty + float(y @ y)
    )


def merge(a: SummaryStatistics, b: SummaryStatistics) -> SummaryStatistics:
    """Combine statistics of two disjoint row sets."""
    if a.p != b.p:
        raise IncompatibleSummariesError(f"cannot merge statistics with p = {a.p} and p = {b.p}")
    if a.intercept != b.intercept:
        raise IncompatibleSummariesError(
            "cannot merge statistics with different intercept conventions "
            f"({a.intercept} vs {b.intercept})"
        )
    return SummaryStatistics(
        a.p, a.intercept, a.n + b.n, a.xtx + b.xtx, a.xty + b.xty, a.yty + b.yty
    )


@dataclass
class IngestConfig:
    """How to read predictors and response out of delimited files.

    Column indices are 1-based, as a user would count them in the file.
    """

    files: Sequence[Source]
    predictor_cols: Sequence[int]
    response_col: int
    first_rows: int = 100_000
    next_rows: int = 100_000
    skip_rows: int = 0
    delimiter: str = ","
    add_intercept: bool = True

    def __post_init__(self) -> None:
        if isinstance(self.files, (str, os.PathLike)) or hasattr(self.files, "read"):
            self.files = [self.files]
        self.files = list(self.files)
        self.predictor_cols = [int(c) for c in self.predictor_cols]
        self.response_col = int(self.response_col)
        cols = self.predictor_cols
        if not cols:
            raise DataError("predictor_cols must not be empty")
        if len(set(cols)) != len(cols):
            raise DataError(f"predictor_cols contains duplicates: {cols}")
        if min(cols + [self.response_col]) < 1:
            raise DataError("column indices are 1-based and must be >= 1")
        if self.response_col in cols:
            raise DataError(f"response_col {self.response_col} is also a predictor column")
        if self.first_rows < 1 or self.next_rows < 1:
            raise DataError("first_rows and next_rows must be >= 1")
        if self.skip_rows < 0:
            raise DataError("skip_rows must be >= 0")
        if len(self.delimiter) != 1:
            raise DataError(f"delimiter must be a single character, got {self.delimiter!r}")

    @property
    def p(self) -> int:
        return len(self.predictor_cols) + int(self.add_intercept)


def _source_name(src: Source) -> str:
    if isinstance(src, (str, os.PathLike)):
        return os.fspath(src)
    return getattr(src, "name", None) or "<stream>"


def _raw_line(src: Source, row: int) -> str | None:
    """Return 1-based line ``row`` of a file path, or None for streams."""
    if not isinstance(src, (str, os.PathLike)):
        return None
    with open(src, "r", newline="") as fh:
        line = next(itertools.islice(fh, row - 1, None), None)
    return None if line is None else line.rstrip("\r\n")


def _explain(src: Source, row: int, col: int, delimiter: str, value: object) -> str:
    """Best-effort reason for an unusable field at 1-based (row, col)."""
    line = _raw_line(src, row)
    if line is not None:
        fields = line.split(delimiter)
        if len(fields) < col:
            return f"row has only {len(fields)} columns"
        raw = fields[col - 1].strip()
        if raw == "":
            return "empty field"
        try:
            float(raw)
        except ValueError:
            return f"non-numeric value {raw!r}"
        return f"non-finite value {raw!r}"
    if value is None or (isinstance(value, float) and math.isnan(value)):
        return "missing value (empty field or too few columns)"
    return f"non-numeric or non-finite value {value!r}"


def _check_chunk(
    frame: pd.DataFrame, cols0: list[int], src: Source, first_row: int, delimiter: str
) -> np.ndarray:
    """Convert the selected columns of ``frame`` to float, or raise ParseError."""
    out = np.empty((len(frame), len(cols0)), dtype=np.float64)
    for j, c in enumerate(cols0):
        col = frame[c]
        if pd.api.types.is_numeric_dtype(col.dtype) and not pd.api.types.is_bool_dtype(col.dtype):
            vals = col.to_numpy(dtype=np.float64, na_value=np.nan)
            bad = ~np.isfinite(vals)
        else:
            vals = pd.to_numeric(col, errors="coerce").to_numpy(dtype=np.float64, na_value=np.nan)
            bad = ~np.isfinite(vals)
        if bad.any():
            i = int(np.argmax(bad))
            row = first_row + i
            raise ParseError(
                _source_name(src), row, c + 1, _explain(src, row, c + 1, delimiter, col.iloc[i])
            )
        out[:, j] = vals
    return out


def iter_chunks(config: IngestConfig, src: Source) -> Iterator[tuple[np.ndarray, np.ndarray]]:
    """Yield ``(X, y)`` design chunks of one source.

    The first chunk has ``config.first_rows`` rows and every later chunk
    ``config.next_rows`` rows (the last one may be shorter).  ``X`` includes
    the intercept column when ``config.add_intercept`` is set.
    """
    name = _source_name(src)
    pcols = [c - 1 for c in config.predictor_cols]
    rcol = config.response_col - 1
    wanted = pcols + [rcol]
    if isinstance(src, (str, os.PathLike)) and not os.access(src, os.R_OK):
        raise DataError(f"{name}: file is not readable")
    try:
        reader = pd.read_csv(
            src,
            sep=config.delimiter,
            header=None,
            skiprows=config.skip_rows,
            usecols=sorted(wanted),
            skip_blank_lines=False,
            engine="c",
            iterator=True,
        )
    except pd.errors.EmptyDataError:
        return
    except (OSError, UnicodeDecodeError) as exc:
        raise DataError(f"{name}: cannot read file: {exc}") from exc
    except (ValueError, pd.errors.ParserError) as exc:
        raise DataError(f"{name}: row {config.skip_rows + 1}: {exc}") from exc
    first_row = config.skip_rows + 1
    size = config.first_rows
    with reader:
        while True:
            try:
                frame = reader.get_chunk(size)
            except StopIteration:
                return
            except pd.errors.ParserError as exc:
                raise DataError(f"{name}: rows from {first_row}: {exc}") from exc
            except (OSError, UnicodeDecodeError) as exc:
                raise DataError(f"{name}: cannot read file: {exc}") from exc
            if len(frame) == 0:
                return
            data = _check_chunk(frame, wanted, src, first_row, config.delimiter)
            x = data[:, :-1]
            if config.add_intercept:
                x = np.hstack([np.ones((x.shape[0], 1)), x])
            yield x, data[:, -1]
            first_row += len(frame)
            size = config.next_rows


def ingest(
    config: IngestConfig, update: SummaryStatistics | None = None
) -> SummaryStatistics:
    """Fold every row of every configured file into summary statistics.

    Files, chunks and rows are accumulated strictly in order so repeated
    runs give bit-identical results.  When ``update`` is given the new rows
    are added on top of it.
    """
    p = config.p
    if update is not None:
        if update.p != p or update.intercept != config.add_intercept:
            raise IncompatibleSummariesError(
                f"update statistics have p = {update.p}, intercept = {update.intercept}; "
                f"configuration gives p = {p}, intercept = {config.add_intercept}"
            )
        acc = update
    else:
        acc = SummaryStatistics.zeros(p, config.add_intercept)
    for src in config.files:
        for x, y in iter_chunks(config, src):
            acc = fold_chunk(acc, x, y)
    return acc


def _fmt(v: float) -> str:
    if not math.isfinite(v):
        raise DataError(f"cannot serialize non-finite value {v!r}")
    return format(v, ".17g")


def dumps(s: SummaryStatistics) -> str:
    """Serialize statistics to the persisted JSON document."""
    xty = ", ".join(_fmt(v) for v in s.xty)
    xtx = ", ".join(_fmt(v) for v in s.xtx.ravel())
    return (
        "{\n"
        f'  "schema_version": {SCHEMA_VERSION},\n'
        f'  "p": {s.p},\n'
        f'  "intercept": {"true" if s.intercept else "false"},\n'
        f'  "n": {s.n},\n'
        f'  "yty": {_fmt(s.yty)},\n'
        f'  "xty": [{xty}],\n'
        f'  "xtx": [{xtx}]\n'
        "}\n"
    )


def loads(text: str) -> SummaryStatistics:
    """Parse a persisted statistics document; see :func:`dumps`."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"corrupted statistics file: {exc}") from exc
    if not isinstance(doc, dict):
        raise SchemaError("statistics file must hold a JSON object")
    version = doc.get("schema_version")
    if version != SCHEMA_VERSION:
        raise SchemaError(
            f"unsupported schema_version {version!r} (expected {SCHEMA_VERSION})"
        )
    missing = [k for k in ("p", "intercept", "n", "yty", "xty", "xtx") if k not in doc]
    if missing:
        raise SchemaError(f"statistics file is missing fields: {', '.join(missing)}")
    p, n = doc["p"], doc["n"]
    if not isinstance(p, int) or isinstance(p, bool) or p < 1:
        raise SchemaError(f"invalid p: {p!r}")
    if not isinstance(n, int) or isinstance(n, bool) or n < 0:
        raise SchemaError(f"invalid n: {n!r}")
    if not isinstance(doc["intercept"], bool):
        raise SchemaError(f"invalid intercept flag: {doc['intercept']!r}")
    try:
        xty = np.array(doc["xty"], dtype=np.float64)
        xtx = np.array(doc["xtx"], dtype=np.float64)
        yty = float(doc["yty"])
    except (TypeError, ValueError) as exc:
        raise SchemaError(f"non-numeric statistics: {exc}") from exc
    if xty.shape != (p,):
        raise SchemaError(f"xty must hold {p} values, found {xty.size}")
    if xtx.shape != (p * p,):
        raise SchemaError(f"xtx must hold {p * p} values, found {xtx.size}")
    xtx = xtx.reshape(p, p)
    if not np.array_equal(xtx, xtx.T):
        i, j = np.argwhere(xtx != xtx.T)[0]
        raise SymmetryError(f"xtx[{i}][{j}] = {xtx[i, j]!r} but xtx[{j}][{i}] = {xtx[j, i]!r}")
    try:
        return SummaryStatistics(p, doc["intercept"], n, xtx, xty, yty)
    except DataError as exc:
        raise SchemaError(f"invalid statistics: {exc}") from exc


def save(s: SummaryStatistics, path: str | os.PathLike) -> None:
    """Write statistics to ``path`` (atomically replaced)."""
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    try:
        tmp.write_text(dumps(s))
        os.replace(tmp, path)
    except OSError as exc:
        raise DataError(f"{path}: cannot write statistics: {exc}") from exc


def load(path: str | os.PathLike) -> SummaryStatistics:
    """Read statistics written by :func:`save`."""
    try:
        text = Path(path).read_text()
    except (OSError, UnicodeDecodeError) as exc:
        raise DataError(f"{path}: cannot read statistics: {exc}") from exc
    try:
        return loads(text)
    except SchemaError as exc:
        raise type(exc)(f"{path}: {exc}") from exc

"""Dataset container, CSV ingestion and covariate standardization.

A :class:`SurvivalDataset` holds right-censored follow-up data together with
two covariate blocks: ``x`` drives the probability of ever experiencing the
event (incidence) and always carries an intercept column of ones in front,
while ``z`` drives the event-time distribution of the susceptible subjects
(latency) and carries no intercept.  The two blocks may share columns.

Datasets are immutable after construction: all arrays are stored with the
writeable flag cleared, so they can be shared freely across threads and
worker processes.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import DegenerateCovariateError, ParseError, SchemaError

__all__ = [
    "CovariateMeta",
    "CsvSchema",
    "Subject",
    "SurvivalDataset",
    "destandardize_gamma",
    "load_csv",
    "standardize_continuous",
    "write_csv",
]


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class CovariateMeta:
    """Per-column metadata for the non-intercept incidence covariates.

    ``means`` and ``sds`` are ``None`` until :func:`standardize_continuous`
    has run; afterwards discrete columns carry the identity transform
    ``(0, 1)`` and continuous columns the population mean and standard
    deviation that were subtracted and divided out.
    """

    names: tuple[str, ...]
    discrete: tuple[bool, ...]
    means: tuple[float, ...] | None = None
    sds: tuple[float, ...] | None = None

    def __post_init__(self) -> None:
        if len(self.discrete) != len(self.names):
            raise SchemaError("one discrete flag is required per covariate name")
        if (self.means is None) != (self.sds is None):
            raise SchemaError("means and sds must be set together")
        if self.means is not None:
            if len(self.means) != len(self.names) or len(self.sds) != len(self.names):
                raise SchemaError("standardization parameters must match the covariates")
            for name, d, s in zip(self.names, self.discrete, self.sds):
                if not d and not s > 0.0:
                    raise DegenerateCovariateError(
                        f"continuous covariate {name!r} has non-positive standard deviation"
                    )

    @property
    def standardized(self) -> bool:
        return self.means is not None

    @property
    def n_continuous(self) -> int:
        return int(np.sum(~np.asarray(self.discrete, dtype=bool))) if self.names else 0

    def continuous_columns(self) -> np.ndarray:
        """Column indices into the full ``x`` block (intercept at 0)."""
        flags = np.asarray(self.discrete, dtype=bool)
        return np.flatnonzero(~flags) + 1

    def discrete_columns(self) -> np.ndarray:
        flags = np.asarray(self.discrete, dtype=bool)
        return np.flatnonzero(flags) + 1


@dataclass(frozen=True)
class Subject:
    """One observation row: follow-up time, event indicator, covariates."""

    y: float
    delta: int
    x: np.ndarray
    z: np.ndarray

    def __post_init__(self) -> None:
        if not (math.isfinite(self.y) and self.y >= 0.0):
            raise ParseError(f"follow-up time must be finite and nonnegative, got {self.y}")
        if self.delta not in (0, 1):
            raise ParseError(f"event indicator must be 0 or 1, got {self.delta}")
        if self.x[0] != 1.0:
            raise ParseError("first incidence covariate must be the intercept 1")


@dataclass(frozen=True)
class SurvivalDataset:
    """Immutable container of (y, delta, x, z) rows plus covariate metadata."""

    y: np.ndarray
    delta: np.ndarray
    x: np.ndarray
    z: np.ndarray
    meta: CovariateMeta
    z_names: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        y = np.asarray(self.y, dtype=float)
        delta = np.asarray(self.delta, dtype=int)
        x = np.atleast_2d(np.asarray(self.x, dtype=float))
        z = np.asarray(self.z, dtype=float)
        if z.ndim == 1:
            z = z.reshape(len(y), -1) if z.size else np.empty((len(y), 0))
        n = y.shape[0]
        if n < 2:
            raise ParseError("a dataset needs at least two subjects")
        if delta.shape != (n,) or x.shape[0] != n or z.shape[0] != n:
            raise ParseError("y, delta, x and z must have one row per subject")
        if not np.all(np.isfinite(y)) or np.any(y < 0):
            raise ParseError("follow-up times must be finite and nonnegative")
        if not np.all((delta == 0) | (delta == 1)):
            raise ParseError("event indicators must be 0 or 1")
        if not np.any(delta == 1):
            raise ParseError("at least one event is required")
        if not np.all(x[:, 0] == 1.0):
            raise ParseError("first incidence covariate column must be the intercept 1")
        if x.shape[1] != len(self.meta.names) + 1:
            raise SchemaError("metadata does not match the incidence covariate count")
        if len(self.z_names) not in (0, z.shape[1]):
            raise SchemaError("z_names does not match the latency covariate count")
        object.__setattr__(self, "y", _readonly(y))
        object.__setattr__(self, "delta", _readonly(delta))
        object.__setattr__(self, "x", _readonly(x))
        object.__setattr__(self, "z", _readonly(z))

    @property
    def n(self) -> int:
        return self.y.shape[0]

    @property
    def p(self) -> int:
        return self.x.shape[1]

    @property
    def q(self) -> int:
        return self.z.shape[1]

    def __len__(self) -> int:
        return self.n

    def subject(self, i: int) -> Subject:
        return Subject(float(self.y[i]), int(self.delta[i]), self.x[i], self.z[i])

    @property
    def subjects(self) -> tuple[Subject, ...]:
        """Row views in original order; built on demand."""
        return tuple(self.subject(i) for i in range(self.n))

    def take(self, indices) -> "SurvivalDataset":
        """Row subset (e.g. a bootstrap resample), on the stored scale.

        Standardization parameters are dropped because they no longer
        describe the subset; re-standardize before kernel work.
        """
        idx = np.asarray(indices, dtype=int)
        meta = replace(self.meta, means=None, sds=None)
        return SurvivalDataset(
            self.y[idx], self.delta[idx], self.x[idx], self.z[idx], meta, self.z_names
        )


@dataclass(frozen=True)
class CsvSchema:
    """Column-role mapping for :func:`load_csv`.

    ``x_continuous`` and ``x_discrete`` together form the incidence block
    (in that order, after the intercept); ``z`` forms the latency block.
    The blocks may share column names.
    """

    time: str
    status: str
    x_continuous: tuple[str, ...] = ()
    x_discrete: tuple[str, ...] = ()
    z: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "x_continuous", tuple(self.x_continuous))
        object.__setattr__(self, "x_discrete", tuple(self.x_discrete))
        object.__setattr__(self, "z", tuple(self.z))
        overlap = set(self.x_continuous) & set(self.x_discrete)
        if overlap:
            raise SchemaError(f"columns listed as both continuous and discrete: {sorted(overlap)}")

    @property
    def x_names(self) -> tuple[str, ...]:
        return self.x_continuous + self.x_discrete


def _parse_cell(raw: str, column: str, row: int) -> float:
    try:
        value = float(raw)
    except ValueError:
        raise ParseError(f"row {row}: non-numeric value {raw!r} in column {column!r}") from None
    if not math.isfinite(value):
        raise ParseError(f"row {row}: non-finite value in column {column!r}")
    return value


def load_csv(path, schema: CsvSchema) -> SurvivalDataset:
    """Read a UTF-8, comma-separated file with a header row into a dataset.

    The intercept column is prepended to the incidence block; row order is
    preserved.  Data rows are numbered from 1 in error messages.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError("empty file") from None
        rows = list(reader)

    positions = {name: i for i, name in enumerate(header)}
    needed = (schema.time, schema.status) + schema.x_names + schema.z
    missing = sorted({c for c in needed if c not in positions})
    if missing:
        raise SchemaError(f"columns missing from {path}: {missing}")

    n = len(rows)
    y = np.empty(n)
    delta = np.empty(n, dtype=int)
    x = np.ones((n, len(schema.x_names) + 1))
    z = np.empty((n, len(schema.z)))
    for r, row in enumerate(rows, start=1):
        if len(row) != len(header):
            raise ParseError(f"row {r}: expected {len(header)} fields, got {len(row)}")
        t = _parse_cell(row[positions[schema.time]], schema.time, r)
        if t < 0:
            raise ParseError(f"row {r}: negative follow-up time {t}")
        s = _parse_cell(row[positions[schema.status]], schema.status, r)
        if s not in (0.0, 1.0):
            raise ParseError(f"row {r}: status must be 0 or 1, got {row[positions[schema.status]]}")
        y[r - 1] = t
        delta[r - 1] = int(s)
        for j, name in enumerate(schema.x_names):
            x[r - 1, j + 1] = _parse_cell(row[positions[name]], name, r)
        for j, name in enumerate(schema.z):
            z[r - 1, j] = _parse_cell(row[positions[name]], name, r)

    meta = CovariateMeta(
        names=schema.x_names,
        discrete=(False,) * len(schema.x_continuous) + (True,) * len(schema.x_discrete),
    )
    return SurvivalDataset(y, delta, x, z, meta, z_names=schema.z)


def write_csv(ds: SurvivalDataset, path, time: str = "time", status: str = "status") -> None:
    """Write the dataset back out; shared x/z columns are written once."""
    columns: list[tuple[str, np.ndarray]] = [(time, ds.y), (status, ds.delta)]
    seen = {time, status}
    for j, name in enumerate(ds.meta.names):
        if name not in seen:
            columns.append((name, ds.x[:, j + 1]))
            seen.add(name)
    for j, name in enumerate(ds.z_names):
        if name not in seen:
            columns.append((name, ds.z[:, j]))
            seen.add(name)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow([name for name, _ in columns])
        for i in range(ds.n):
            writer.writerow([format(col[i], ".17g") for _, col in columns])


def standardize_continuous(ds: SurvivalDataset) -> tuple[SurvivalDataset, CovariateMeta]:
    """Center and scale the continuous incidence covariates.

    Uses the sample standard deviation (denominator n - 1); any fixed
    convention works because bandwidths are selected after standardization.
    Discrete columns and the intercept pass through untouched; the returned
    metadata records (mean, sd) per column so estimates can be mapped back
    to the original scale with :func:`destandardize_gamma`.
    """
    x = np.array(ds.x)
    means = []
    sds = []
    for j, (name, is_discrete) in enumerate(zip(ds.meta.names, ds.meta.discrete)):
        col = j + 1
        if is_discrete:
            means.append(0.0)
            sds.append(1.0)
            continue
        m = float(np.mean(x[:, col]))
        s = float(np.std(x[:, col], ddof=1))
        if not s > 0.0:
            raise DegenerateCovariateError(
                f"continuous covariate {name!r} is constant and cannot be standardized"
            )
        x[:, col] = (x[:, col] - m) / s
        means.append(m)
        sds.append(s)
    meta = replace(ds.meta, means=tuple(means), sds=tuple(sds))
    out = SurvivalDataset(ds.y, ds.delta, x, ds.z, meta, ds.z_names)
    return out, meta


def destandardize_gamma(gamma: np.ndarray, meta: CovariateMeta) -> np.ndarray:
    """Map incidence coefficients fitted on standardized covariates back.

    With x_std = (x - m) / s, the linear predictor is preserved by dividing
    each slope by s and absorbing the shifts into the intercept.
    """
    if not meta.standardized:
        return np.array(gamma, dtype=float)
    gamma = np.asarray(gamma, dtype=float)
    out = np.array(gamma)
    means = np.asarray(meta.means)
    sds = np.asarray(meta.sds)
    out[1:] = gamma[1:] / sds
    out[0] = gamma[0] - float(np.sum(gamma[1:] * means / sds))
    return out

import numpy as np
import pytest

from smoothcure import CovariateMeta, SurvivalDataset

ACCEPTANCE_LINES = []


def record_acceptance(line: str) -> None:
    ACCEPTANCE_LINES.append(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def build_dataset(y, delta, x_cols=None, z_cols=None, discrete=None, names=None):
    """Assemble a dataset from plain lists; x_cols excludes the intercept."""
    y = np.asarray(y, dtype=float)
    n = y.size
    x_cols = np.empty((n, 0)) if x_cols is None else np.column_stack(x_cols)
    z_cols = np.empty((n, 0)) if z_cols is None else np.column_stack(z_cols)
    k = x_cols.shape[1]
    meta = CovariateMeta(
        names=tuple(names) if names else tuple(f"x{j+1}" for j in range(k)),
        discrete=tuple(discrete) if discrete is not None else (False,) * k,
    )
    x = np.column_stack([np.ones(n), x_cols])
    z_names = tuple(f"z{j+1}" for j in range(z_cols.shape[1]))
    return SurvivalDataset(y, np.asarray(delta, dtype=int), x, z_cols, meta, z_names=z_names)


def random_dataset(rng, n=20, q=1, discrete=False):
    """Small random survival dataset with one x covariate and q z covariates."""
    y = rng.exponential(1.0, n).round(3)
    delta = (rng.random(n) < 0.7).astype(int)
    if not delta.any():
        delta[int(rng.integers(n))] = 1
    xcol = rng.integers(0, 2, n).astype(float) if discrete else rng.normal(0.0, 1.0, n)
    z = rng.normal(0.0, 1.0, (n, q))
    return build_dataset(y, delta, x_cols=[xcol], z_cols=[z[:, j] for j in range(q)],
                         discrete=[discrete])


@pytest.fixture
def rng():
    return np.random.default_rng(20260808)

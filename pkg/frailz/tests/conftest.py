import numpy as np
import pytest

from frailz.data.CovariateSchema import CovariateSchema, CovariateSpec
from frailz.data.SurvivalDataset import SurvivalDataset
from frailz.data.kidney import kidney_dataset

ARM_SCHEMA = CovariateSchema(
    (CovariateSpec.numeric("x"), CovariateSpec.categorical("arm", ("A", "B")))
)
X_SCHEMA = CovariateSchema((CovariateSpec.numeric("x"),))


def clustered(
    g: int = 8,
    m: int = 6,
    seed: int = 0,
    theta: float = 0.5,
    censor_rate: float = 0.05,
    with_arm: bool = True,
) -> SurvivalDataset:
    """Exponential-baseline gamma frailty data; arms alternate so every cluster sees both."""
    rng = np.random.default_rng(seed)
    n = g * m
    codes = np.repeat(np.arange(g), m)
    z = rng.gamma(1.0 / theta, theta, g)[codes] if theta > 0 else np.ones(n)
    x = rng.normal(size=n)
    arm = np.where(np.arange(n) % 2 == 0, "A", "B")
    eta = 0.7 * x - 0.5 * (arm == "B")
    failure = rng.exponential(1.0 / (0.1 * z * np.exp(eta)))
    censor = rng.exponential(1.0 / censor_rate, n)
    covariates = {"x": x, "arm": arm} if with_arm else {"x": x}
    return SurvivalDataset(
        time=np.minimum(failure, censor),
        status=(failure <= censor).astype(int),
        cluster=[f"c{c}" for c in codes],
        covariates=covariates,
        schema=ARM_SCHEMA if with_arm else X_SCHEMA,
    )


@pytest.fixture
def kidney():
    return kidney_dataset()


@pytest.fixture
def make_clustered():
    return clustered


@pytest.fixture
def small_data():
    return clustered(g=6, m=5, seed=11)


@pytest.fixture
def out_dir(tmp_path):
    path = tmp_path / "out"
    path.mkdir()
    return path

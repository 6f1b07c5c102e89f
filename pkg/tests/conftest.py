import numpy as np
import pytest

from lorentz_foliations import zoo
from lorentz_foliations.sampling import sample_box

ZOO_NAMES = sorted(zoo.ZOO)


@pytest.fixture(scope="session")
def built():
    """name -> (metric, foliation) for every zoo entry at default parameters."""
    return {name: zoo.zoo_build(name) for name in ZOO_NAMES}


def leaf_box_points(fol, count, seed=0):
    """Seeded uniform points in the foliation's sample box."""
    return sample_box(*fol.sample_box, count, "uniform", seed)


def chart_points(metric, count, seed=0, shrink=0.01):
    """Seeded uniform points strictly inside the metric's chart box."""
    lo = np.asarray(metric.lower, dtype=float)
    hi = np.asarray(metric.upper, dtype=float)
    pad = shrink * (hi - lo)
    return sample_box(lo + pad, hi - pad, count, "uniform", seed)

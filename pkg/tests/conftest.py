import numpy as np
import pytest

from strata_bounds import Sample


def make_sample(z, d, y, weight=None, clusters=None, blocks=None, label="test",
                aux=None):
    z = list(z)
    n = len(z)
    if weight is None:
        weight = [1.0] * n
    if clusters is None:
        clusters = [f"c{i}" for i in range(n)]
    if blocks is None:
        blocks = ["_all"] * n
    return Sample(label, z, d, y, weight, clusters, blocks, aux=aux)


def sample_from_counts(control_counts, treated_counts, y_control=None,
                       y_treated=None):
    """Build a one-block sample from per-D unit counts in each arm.

    ``y_control``/``y_treated`` map d -> list of outcomes (default zeros).
    """
    z, d, y = [], [], []
    for arm, counts, ymap in ((0, control_counts, y_control or {}),
                              (1, treated_counts, y_treated or {})):
        for dd, cnt in enumerate(counts):
            vals = ymap.get(dd, [0.0] * cnt)
            assert len(vals) == cnt
            z += [arm] * cnt
            d += [dd] * cnt
            y += list(vals)
    return make_sample(z, d, y)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)

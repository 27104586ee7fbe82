"""Property-based checks of the estimator and bound invariants."""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from strata_bounds import (bounds_line, build_mixture_cdf,
                           complier_effect_bounds, estimate_first_stage,
                           estimate_itt, estimate_late, estimate_shares,
                           substitutor_effect_bounds, trimmed_cell_bounds)
from strata_bounds.errors import (EmptyCell, WeakFirstStage, WeakShare)

from conftest import make_sample

SKIPPABLE = (EmptyCell, WeakFirstStage, WeakShare)


def random_sample(seed, n=120, p_control=(0.5, 0.4, 0.1), p_treated=(0.2, 0.2, 0.6)):
    rng = np.random.default_rng(seed)
    z = rng.integers(0, 2, n)
    d = np.where(z == 1,
                 rng.choice([0, 1, 2], n, p=list(p_treated)),
                 rng.choice([0, 1, 2], n, p=list(p_control)))
    y = rng.standard_normal(n)
    w = rng.uniform(0.5, 2.0, n)
    clusters = [f"c{i % 15}" for i in range(n)]
    return make_sample(z, d, y, weight=w, clusters=clusters)


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 10_000))
def test_late_is_itt_over_first_stage(seed):
    s = random_sample(seed)
    try:
        late = estimate_late(s).point
    except SKIPPABLE:
        return
    assert late == pytest.approx(
        estimate_itt(s).point / estimate_first_stage(s).point, abs=1e-12)


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 10_000))
def test_first_stage_is_raw_switch_share_sum(seed):
    s = random_sample(seed)
    shares = estimate_shares(s)
    assert shares.raw[3] + shares.raw[4] == pytest.approx(
        estimate_first_stage(s).point, abs=1e-12)


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 10_000), a=st.floats(0.1, 10.0))
def test_scale_equivariance(seed, a):
    s = random_sample(seed)
    s2 = make_sample(s.z, s.d, a * s.y, weight=s.weight,
                     clusters=s.cluster_ids)
    assert estimate_itt(s2).point == pytest.approx(
        a * estimate_itt(s).point, rel=1e-10, abs=1e-12)
    assert np.array_equal(estimate_shares(s2).raw_array(),
                          estimate_shares(s).raw_array())


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 10_000), c=st.floats(0.01, 100.0))
def test_weight_scale_invariance(seed, c):
    s = random_sample(seed)
    s2 = make_sample(s.z, s.d, s.y, weight=c * np.asarray(s.weight),
                     clusters=s.cluster_ids)
    assert estimate_itt(s2).point == pytest.approx(estimate_itt(s).point,
                                                   rel=1e-12, abs=1e-12)
    assert np.allclose(estimate_shares(s2).raw_array(),
                       estimate_shares(s).raw_array(), atol=1e-12)


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 10_000))
def test_mixture_cdf_is_valid(seed):
    s = random_sample(seed)
    try:
        mx = build_mixture_cdf(s)
    except SKIPPABLE:
        return
    assert np.all(np.diff(mx.iso_cdf) >= 0)
    assert mx.iso_cdf[0] >= 0
    assert mx.iso_cdf[-1] == 1.0
    assert mx.point_mass.sum() == pytest.approx(1.0, abs=1e-9)


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 10_000))
def test_bounds_order_and_decomposition(seed):
    s = random_sample(seed)
    try:
        shares = estimate_shares(s)
        cb = complier_effect_bounds(s, shares=shares)
        sb = substitutor_effect_bounds(s, shares=shares)
        late = estimate_late(s).point
    except SKIPPABLE:
        return
    assert cb.lower <= cb.upper + 1e-12
    assert sb.lower <= sb.upper + 1e-12
    switch = shares.pi_02 + shares.pi_12
    line = bounds_line(s, grid=7, shares=shares)
    for tau12, tau02 in line:
        assert shares.pi_02 * tau02 + shares.pi_12 * tau12 == \
            pytest.approx(late * switch, abs=1e-10)


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 10_000),
       n=st.integers(2, 30),
       frac=st.floats(0.05, 1.0))
def test_trimmed_means_inside_support(seed, n, frac):
    rng = np.random.default_rng(seed)
    values = rng.standard_normal(n)
    weights = rng.uniform(0.1, 3.0, n)
    lo, hi = trimmed_cell_bounds(values, weights, frac)
    assert lo <= hi + 1e-12
    assert values.min() - 1e-12 <= lo
    assert hi <= values.max() + 1e-12


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 10_000), n=st.integers(1, 8))
def test_trimming_matches_enumeration(seed, n):
    from itertools import combinations
    rng = np.random.default_rng(seed)
    total = 2 * n
    values = rng.standard_normal(total).round(4)
    keep = n / total
    lo, hi = trimmed_cell_bounds(values, np.ones(total), keep)
    means = [np.mean([values[i] for i in idx])
             for idx in combinations(range(total), n)]
    assert lo == pytest.approx(min(means), abs=1e-9)
    assert hi == pytest.approx(max(means), abs=1e-9)


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 10_000))
def test_csv_round_trip(seed, tmp_path_factory):
    from strata_bounds import ingest_csv, write_csv
    s = random_sample(seed, n=40)
    path = tmp_path_factory.mktemp("rt") / "s.csv"
    write_csv(s, path)
    s2 = ingest_csv(path)
    assert np.array_equal(s.y, s2.y)
    assert np.array_equal(s.weight, s2.weight)
    assert np.array_equal(s.z, s2.z)
    assert np.array_equal(s.d, s2.d)

import math

import numpy as np
import pytest

from smoothcure import (
    Bandwidth,
    EmptyNeighborhoodError,
    conditional_subdist,
    estimate_cure_prob,
    kaplan_meier,
    presmooth_all,
)

from conftest import build_dataset, random_dataset

WIDE = Bandwidth(np.array([1000.0]))


class TestConditionalSubdist:
    def test_uniform_weight_reduction(self):
        # bandwidth far above the data range: all kernel arguments < 1
        ds = build_dataset([1, 1, 2, 3], [1, 1, 0, 1], x_cols=[[0.0, 0.3, 0.6, 0.9]])
        sub = conditional_subdist(ds, ds.x[0], WIDE)
        assert np.allclose(sub.event_times, [1.0, 3.0])
        assert np.allclose(sub.h1_mass, [2 / 4, 1 / 4])
        assert np.allclose(sub.at_risk, [1.0, 1 / 4])

    def test_discrete_mismatch_raises(self):
        ds = build_dataset([1, 2, 3], [1, 1, 0], x_cols=[[0.0, 0.0, 1.0]], discrete=[True])
        query = np.array([1.0, 2.0])  # level matching nobody
        with pytest.raises(EmptyNeighborhoodError):
            conditional_subdist(ds, query, Bandwidth(np.empty(0)))

    def test_hand_computed_weights(self):
        # Kernel values proportional to (4, 3, 2, 1): distances chosen so the
        # squared arguments are 0, 1/4, 1/2, 3/4 at unit bandwidth.
        offsets = np.array([0.0, 0.5, math.sqrt(0.5), math.sqrt(0.75)])
        ds = build_dataset([1, 2, 3, 4], [1, 0, 1, 0], x_cols=[offsets])
        sub = conditional_subdist(ds, ds.x[0], Bandwidth(np.array([1.0])))
        assert np.allclose(sub.event_times, [1.0, 3.0])
        assert np.allclose(sub.h1_mass, [0.4, 0.2], atol=1e-12)
        assert np.allclose(sub.at_risk, [1.0, 0.3], atol=1e-12)

    def test_normalized_weights_sum_to_one(self, rng):
        ds = random_dataset(rng, n=12)
        sub = conditional_subdist(ds, ds.x[3], Bandwidth(np.array([0.8])))
        assert sub.at_risk[0] <= 1.0 + 1e-12
        assert np.all(np.diff(sub.at_risk) <= 1e-15)
        assert np.all(sub.h1_mass >= 0)


class TestEstimateCureProb:
    def test_all_uncensored_gives_zero(self):
        ds = build_dataset([1, 2, 3, 4], [1, 1, 1, 1], x_cols=[[0.1, 0.2, 0.3, 0.4]])
        est = estimate_cure_prob(ds, ds.x[0], WIDE)
        assert est.value == 0.0

    def test_no_events_in_neighborhood_gives_one(self):
        # The queried discrete cell holds only censored subjects, so the
        # product over event times is empty there.
        ds = build_dataset(
            [1, 2, 3, 4], [1, 0, 0, 0],
            x_cols=[[0.0, 1.0, 1.0, 1.0]], discrete=[True],
        )
        est = estimate_cure_prob(ds, ds.x[1], Bandwidth(np.empty(0)))
        assert est.value == 1.0

    def test_uniform_weights_equal_km_at_last_event(self):
        ds = build_dataset([1, 2, 3, 4], [1, 0, 1, 0], x_cols=[[0.5, 0.5, 0.5, 0.5]])
        est = estimate_cure_prob(ds, ds.x[0], Bandwidth(np.array([1.0])))
        assert est.value == pytest.approx(0.375, abs=1e-15)

    def test_km_equivalence_random(self):
        for seed in range(30):
            rng = np.random.default_rng(seed)
            n = int(rng.integers(4, 13))
            y = rng.exponential(1.0, n).round(3)
            delta = (rng.random(n) < 0.6).astype(int)
            if not delta.any():
                delta[0] = 1
            ds = build_dataset(y, delta, x_cols=[np.full(n, 0.3)])
            km = kaplan_meier(ds.y, ds.delta)
            expected = km(km.times[-1])
            est = estimate_cure_prob(ds, ds.x[0], Bandwidth(np.array([1.0])))
            assert est.value == pytest.approx(expected, abs=1e-12)

    def test_value_in_unit_interval(self, rng):
        for _ in range(20):
            ds = random_dataset(rng, n=15)
            v = estimate_cure_prob(ds, ds.x[int(rng.integers(15))], Bandwidth(np.array([0.5])))
            assert 0.0 <= v.value <= 1.0


class TestPresmoothAll:
    def test_shape_and_agreement_with_single_queries(self, rng):
        ds = random_dataset(rng, n=14)
        b = Bandwidth(np.array([0.9]))
        vec = presmooth_all(ds, b)
        assert vec.shape == (14,)
        for i in range(14):
            assert vec[i] == pytest.approx(estimate_cure_prob(ds, ds.x[i], b).value, abs=1e-12)

    def test_censored_only_cell_gets_one(self):
        ds = build_dataset(
            [1, 2, 3, 4, 5], [1, 1, 0, 0, 0],
            x_cols=[[0.0, 0.0, 1.0, 1.0, 1.0]], discrete=[True],
        )
        vec = presmooth_all(ds, Bandwidth(np.empty(0)))
        assert np.allclose(vec[2:], 1.0)
        assert vec[0] < 1.0

    def test_permutation_equivariance(self, rng):
        ds = random_dataset(rng, n=11)
        b = Bandwidth(np.array([0.7]))
        perm = rng.permutation(11)
        ds2 = ds.take(perm)
        assert np.allclose(presmooth_all(ds, b)[perm], presmooth_all(ds2, b), atol=1e-12)

    def test_censoring_flip_cannot_decrease(self):
        for seed in range(15):
            rng = np.random.default_rng(seed)
            ds = random_dataset(rng, n=10)
            if ds.delta.sum() < 2:
                continue
            b = Bandwidth(np.array([2.0]))
            before = presmooth_all(ds, b)
            # flip the largest uncensored observation to censored
            events = np.flatnonzero(ds.delta == 1)
            flip = events[np.argmax(ds.y[events])]
            delta2 = np.array(ds.delta)
            delta2[flip] = 0
            ds2 = build_dataset(ds.y, delta2, x_cols=[ds.x[:, 1]])
            after = presmooth_all(ds2, b)
            assert np.all(after >= before - 1e-12)

    def test_affine_rescaling_invariance(self, rng):
        ds = random_dataset(rng, n=12)
        b = Bandwidth(np.array([0.8]))
        a = 3.7
        ds2 = build_dataset(ds.y, ds.delta, x_cols=[a * ds.x[:, 1]])
        assert np.allclose(
            presmooth_all(ds, b), presmooth_all(ds2, Bandwidth(np.array([0.8 * a]))), atol=1e-12
        )

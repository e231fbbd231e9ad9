import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from lgeo.simplex import (
    CostValue,
    PrimalCoord,
    SimplexPoint,
    cost,
    from_primal,
    psi,
    to_primal,
)

from _oracles import fd_hessian


def coord_strategy(dim=3, bound=20.0):
    return st.lists(
        st.floats(-bound, bound, allow_nan=False), min_size=dim, max_size=dim
    )


class TestSimplexPoint:
    def test_renormalizes_small_deviation(self):
        p = SimplexPoint([0.5, 0.25, 0.25 + 5e-10])
        assert abs(p.p.sum() - 1.0) < 1e-15

    def test_rejects_large_deviation(self):
        with pytest.raises(ValueError):
            SimplexPoint([0.5, 0.25, 0.249])

    def test_rejects_boundary_entries(self):
        with pytest.raises(ValueError):
            SimplexPoint([1.0, 0.0])
        with pytest.raises(ValueError):
            SimplexPoint([1.0, 1e-301])

    def test_rejects_scalar_and_short(self):
        with pytest.raises(ValueError):
            SimplexPoint([1.0])

    def test_immutable(self):
        p = SimplexPoint([0.5, 0.5])
        with pytest.raises(ValueError):
            p.p[0] = 0.3


class TestPrimalMaps:
    def test_half_quarter_quarter(self):
        th = to_primal(SimplexPoint([0.5, 0.25, 0.25])).theta
        assert np.allclose(th, [np.log(2), 0.0], atol=1e-15)

    def test_barycenter_maps_to_origin(self):
        th = to_primal(SimplexPoint([1 / 3, 1 / 3, 1 / 3])).theta
        assert np.allclose(th, 0.0, atol=1e-15)

    def test_hand_log_ratios(self):
        th = to_primal(SimplexPoint([0.7, 0.2, 0.1])).theta
        assert np.allclose(th, [np.log(7), np.log(2)], atol=1e-14)

    def test_origin_maps_to_barycenter(self):
        p = from_primal([0.0, 0.0])
        assert np.allclose(p.p, 1 / 3, atol=1e-15)

    def test_inverse_of_half_quarter_quarter(self):
        p = from_primal([np.log(2), 0.0])
        assert np.allclose(p.p, [0.5, 0.25, 0.25], atol=1e-15)

    def test_large_coordinate_no_overflow(self):
        p = from_primal([100.0, 0.0])
        assert np.all(np.isfinite(p.p))
        assert p.p[0] == pytest.approx(1.0, abs=1e-40)
        # log-sum-exp oracle: p_1 = exp(100 - psi), psi computed by shift
        psi_ref = 100.0 + np.log(1 + 2 * np.exp(-100.0))
        assert p.p[0] == pytest.approx(np.exp(100.0 - psi_ref), rel=1e-12)

    def test_round_trip_random_small_entries(self, rng):
        # entries spread down to 1e-8
        logs = rng.uniform(np.log(1e-8), 0.0, size=(10_000, 4))
        P = np.exp(logs)
        P /= P.sum(axis=1, keepdims=True)
        for row in P[:200]:
            th = to_primal(SimplexPoint(row)).theta
            back = from_primal(th).p
            assert np.max(np.abs(back - row)) < 1e-10
            again = to_primal(back).theta
            assert np.max(np.abs(again - th)) < 1e-10


class TestPsi:
    def test_origin_value(self):
        assert psi([0.0, 0.0]) == pytest.approx(np.log(3), abs=1e-15)

    def test_two_asset_value(self):
        assert psi([np.log(2)]) == pytest.approx(np.log(3), abs=1e-15)

    def test_extreme_argument(self):
        v = psi([1000.0])
        assert np.isfinite(v)
        assert v == pytest.approx(1000.0, abs=1e-12)

    @given(coord_strategy(), coord_strategy(), st.floats(0.01, 0.99))
    def test_convexity(self, x, y, t):
        x, y = np.array(x), np.array(y)
        lhs = psi(t * x + (1 - t) * y)
        assert lhs <= t * psi(x) + (1 - t) * psi(y) + 1e-12

    def test_fd_hessian_positive_definite(self, rng):
        for _ in range(20):
            x = rng.normal(size=3)
            H = fd_hessian(psi, x)
            assert np.linalg.eigvalsh((H + H.T) / 2).min() > 0


class TestCost:
    def test_equal_arguments(self):
        c = cost([0.3, -0.5], [0.3, -0.5])
        assert c.nats == pytest.approx(np.log(3), abs=1e-15)
        assert c.normalized == pytest.approx(0.0, abs=1e-15)

    def test_direct_evaluation(self):
        c = cost([1.0, 0.0], [0.0, 0.0])
        assert c.nats == pytest.approx(np.log(2 + np.e), rel=1e-15)

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            cost([1.0, 0.0], [0.0])

    def test_normalized_nonnegative_sweep(self, rng):
        T = rng.normal(scale=3.0, size=(10_000, 3))
        F = rng.normal(scale=3.0, size=(10_000, 3))
        worst = min(cost(t, f).normalized for t, f in zip(T[:500], F[:500]))
        assert worst >= 0.0
        # vectorized check over the full sweep
        from lgeo.simplex import psi_many

        x = T - F
        tilde = psi_many(x) - np.log(4) - x.sum(axis=1) / 4
        assert tilde.min() >= -1e-15

    def test_normalized_zero_iff_equal(self, rng):
        th = rng.normal(size=3)
        assert cost(th, th).normalized == pytest.approx(0.0, abs=1e-15)
        assert cost(th, th + 1e-3).normalized > 0.0

    def test_float_conversion(self):
        assert float(cost([0.0], [0.0])) == pytest.approx(np.log(2))
        assert isinstance(cost([0.0], [0.0]), CostValue)


class TestPrimalCoordType:
    def test_rejects_nonfinite(self):
        with pytest.raises(ValueError):
            PrimalCoord([np.inf, 0.0])

    def test_dimension_property(self):
        assert PrimalCoord([0.1, 0.2]).n == 3

import numpy as np
import pytest

from lgeo import generators as G
from lgeo import divergence as D
from lgeo.simplex import from_primal, psi, to_primal

from conftest import builtin_zoo, dirichlet_points


def theta_of(p):
    return to_primal(p).theta


class TestLDivergence:
    def test_zero_at_identical_points(self, rng):
        for name, gen in builtin_zoo(3).items():
            p = rng.dirichlet(np.ones(3))
            assert abs(D.l_divergence(gen, p, p).value) < 1e-12, name

    def test_two_asset_excess_growth(self):
        # equal-weighted n=2: T((3/4,1/4) | (1/2,1/2)) = -0.5 log(3/4)
        gen = G.equal_weighted(2)
        val = D.l_divergence(gen, [0.75, 0.25], [0.5, 0.5]).value
        assert val == pytest.approx(-0.5 * np.log(0.75), rel=1e-12)
        assert val == pytest.approx(0.143841, abs=5e-7)

    def test_portfolio_and_gradient_forms_agree(self, rng):
        for name, gen in builtin_zoo(4).items():
            q = rng.dirichlet(np.ones(4))
            p = rng.dirichlet(np.ones(4))
            a = D.l_divergence(gen, q, p).value
            b = D.l_divergence_gradient_form(gen, q, p)
            assert abs(a - b) < 1e-10, name

    def test_numeraire_invariance_constant_weighted(self, rng):
        gen = G.constant_weighted([0.5, 0.3, 0.2])
        for _ in range(20):
            p = rng.dirichlet(np.ones(3))
            q = rng.dirichlet(np.ones(3))
            w = rng.uniform(0.2, 5.0, size=3)
            pt = w * p / (w @ p)
            qt = w * q / (w @ q)
            assert D.l_divergence(gen, q, p).value == pytest.approx(
                D.l_divergence(gen, qt, pt).value, abs=1e-12
            )

    def test_nonnegative_sweep(self, rng):
        for n in (2, 4):
            P = dirichlet_points(rng, n, 300)
            Q = dirichlet_points(rng, n, 300)
            for name, gen in builtin_zoo(n).items():
                vals = [D.l_divergence(gen, q, p).value for q, p in zip(Q[:50], P[:50])]
                assert min(vals) > 0.0, name


class TestCoordinateRepresentations:
    def test_zero_on_diagonal(self, rng):
        gen = G.diversity_weighted(0.5)
        th = rng.normal(size=2)
        assert abs(D.l_divergence_primal(gen, th, th).value) < 1e-14
        ph = G.dual_coord(gen, th).phi
        assert abs(D.l_divergence_dual(gen, ph, ph).value) < 1e-14

    def test_translation_invariance_constant_weighted(self, rng):
        gen = G.constant_weighted([0.4, 0.35, 0.25])
        th1, th2 = rng.normal(size=2), rng.normal(size=2)
        a = rng.normal(size=2)
        base = D.l_divergence_primal(gen, th1, th2).value
        shifted = D.l_divergence_primal(gen, th1 + a, th2 + a).value
        assert shifted == pytest.approx(base, abs=1e-12)

    def test_three_representations_agree(self, rng):
        for name, gen in builtin_zoo(3).items():
            for _ in range(10):
                q = rng.dirichlet(np.ones(3))
                p = rng.dirichlet(np.ones(3))
                t_eucl = D.l_divergence(gen, q, p).value
                t_prim = D.l_divergence_primal(gen, theta_of(q), theta_of(p)).value
                ph_q = G.dual_coord(gen, theta_of(q)).phi
                ph_p = G.dual_coord(gen, theta_of(p)).phi
                t_dual = D.l_divergence_dual(gen, ph_q, ph_p).value
                assert abs(t_eucl - t_prim) < 1e-9, name
                assert abs(t_eucl - t_dual) < 1e-9, name

    def test_representation_tags(self, rng):
        gen = G.equal_weighted(3)
        q, p = rng.dirichlet(np.ones(3)), rng.dirichlet(np.ones(3))
        assert D.l_divergence(gen, q, p).rep == "euclidean"
        assert D.l_divergence_primal(gen, theta_of(q), theta_of(p)).rep == "primal"


class TestBregman:
    def test_zero_on_diagonal(self, rng):
        gen = G.diversity_weighted(0.4)
        p = rng.dirichlet(np.ones(3))
        assert abs(D.bregman(gen, p, p)) < 1e-14

    def test_shannon_entropy_gives_relative_entropy(self, rng):
        shannon = G.CustomGenerator(
            lambda p: -float(p @ np.log(p)),
            grad=lambda p: -(np.log(p) + 1.0),
            name="shannon",
        )
        for _ in range(10):
            p = rng.dirichlet(np.ones(4))
            q = rng.dirichlet(np.ones(4))
            kl = float(q @ np.log(q / p))
            assert D.bregman(shannon, q, p) == pytest.approx(kl, rel=1e-10, abs=1e-12)

    def test_bregman_dominates_l_divergence(self, rng):
        for name, gen in builtin_zoo(3).items():
            for _ in range(40):
                p = rng.dirichlet(np.ones(3))
                q = rng.dirichlet(np.ones(3))
                breg = D.bregman(gen, q, p)
                ldiv = D.l_divergence(gen, q, p).value
                assert breg >= ldiv - 1e-12, name
                assert ldiv >= -1e-12


class TestCTransform:
    def test_constant_weighted_conjugate_affine(self, rng):
        w = np.array([0.5, 0.3, 0.2])
        gen = G.constant_weighted(w)
        entropy = -float(w @ np.log(w))
        for _ in range(5):
            ph = rng.normal(size=2)
            val = D.c_transform(gen, ph)
            assert val == pytest.approx(w[:2] @ (-ph) + entropy, abs=1e-9)

    def test_equal_weighted_at_zero(self):
        gen = G.equal_weighted(4)
        assert D.c_transform(gen, np.zeros(3)) == pytest.approx(np.log(4), abs=1e-10)

    def test_fenchel_inequality_random_pairs(self, rng):
        gen = G.diversity_weighted(0.5)
        for _ in range(20):
            th = rng.normal(size=2)
            ph = rng.normal(size=2)
            fstar = D.c_transform(gen, ph)
            assert D.f_value(gen, th) + fstar <= psi(th - ph) + 1e-9

    def test_fenchel_equality_on_graph_strict_off(self, rng):
        gen = G.diversity_weighted(0.5)
        th = rng.normal(size=2)
        ph = G.dual_coord(gen, th).phi
        fstar = D.c_transform(gen, ph)
        gap_on = psi(th - ph) - D.f_value(gen, th) - fstar
        assert abs(gap_on) < 1e-8
        ph_off = ph + np.array([2e-3, 0.0])
        fstar_off = D.c_transform(gen, ph_off)
        gap_off = psi(th - ph_off) - D.f_value(gen, th) - fstar_off
        assert gap_off > 0.0

    def test_inverse_dual_round_trip_numeric(self, rng):
        # mix generator exercises the Newton path (no closed form)
        zoo = builtin_zoo(3)
        gen = zoo["mix"]
        for _ in range(5):
            th = rng.normal(size=2) * 0.8
            ph = G.dual_coord(gen, th).phi
            back = D.inverse_dual_coord(gen, ph)
            assert np.max(np.abs(back - th)) < 1e-8


class TestCDivergence:
    def test_zero_on_diagonal(self, rng):
        gen = G.diversity_weighted(0.5)
        p = rng.dirichlet(np.ones(3))
        assert abs(D.c_divergence(gen, p, p)) < 1e-12

    def test_matches_l_divergence(self, rng):
        for name, gen in builtin_zoo(3).items():
            for _ in range(10):
                p = rng.dirichlet(np.ones(3))
                p2 = rng.dirichlet(np.ones(3))
                assert abs(
                    D.c_divergence(gen, p, p2) - D.l_divergence(gen, p, p2).value
                ) < 1e-9, name

    def test_dual_divergence_transposes(self, rng):
        for name, gen in builtin_zoo(3).items():
            for _ in range(10):
                p = rng.dirichlet(np.ones(3))
                p2 = rng.dirichlet(np.ones(3))
                assert abs(
                    D.c_divergence(gen, p, p2) - D.c_divergence_dual(gen, p2, p)
                ) < 1e-9, name


class TestCyclicalMonotonicity:
    def test_single_pair(self):
        sample = D.CouplingSample([(np.zeros(2), np.ones(2))])
        assert D.is_c_cyclical_monotone(sample, m_max=5)

    def test_dual_graph_is_monotone(self, rng):
        for name, gen in builtin_zoo(3).items():
            thetas = rng.normal(size=(6, 2))
            pairs = [(th, G.dual_coord(gen, th).phi) for th in thetas]
            assert D.is_c_cyclical_monotone(D.CouplingSample(pairs), m_max=5), name

    def test_swapped_assignment_fails(self, rng):
        gen = G.diversity_weighted(0.5)
        thetas = np.array([[2.0, 0.0], [-2.0, 0.0], [0.0, 1.5]])
        phis = [G.dual_coord(gen, th).phi for th in thetas]
        # swap the partners of the two far-apart points
        pairs = [(thetas[0], phis[1]), (thetas[1], phis[0]), (thetas[2], phis[2])]
        assert not D.is_c_cyclical_monotone(D.CouplingSample(pairs), m_max=3)

    def test_m_max_capped(self):
        sample = D.CouplingSample([(np.zeros(2), np.zeros(2))])
        with pytest.raises(ValueError):
            D.is_c_cyclical_monotone(sample, m_max=8)

    def test_empty_sample_rejected(self):
        with pytest.raises(ValueError):
            D.CouplingSample([])


class TestMCM:
    def test_constant_cycle(self):
        gen = G.equal_weighted(3)
        p = np.full(3, 1 / 3)
        assert D.is_mcm(gen.portfolio, [p, p, p])

    def test_generated_portfolio_random_cycles(self, rng):
        gen = G.diversity_weighted(0.5)
        for _ in range(100):
            pts = list(dirichlet_points(rng, 3, 5))
            cycle = pts + [pts[0]]
            assert D.is_mcm(gen.portfolio, cycle)

    def test_open_cycle_rejected(self, rng):
        gen = G.equal_weighted(3)
        pts = dirichlet_points(rng, 3, 3)
        with pytest.raises(ValueError):
            D.is_mcm(gen.portfolio, list(pts))

    def test_adversarial_map_fails_on_some_cycle(self, rng):
        # a momentum map (overweighting winners) is not functionally
        # generated; randomized cycle search must find an MCM violation
        adversarial = lambda p: p**2 / np.sum(p**2)
        found_violation = False
        for _ in range(400):
            pts = list(dirichlet_points(rng, 3, rng.integers(2, 5)))
            cycle = pts + [pts[0]]
            if not D.is_mcm(adversarial, cycle):
                found_violation = True
                break
        assert found_violation


class TestTransportGap:
    def test_degenerate_triple(self, rng):
        gen = G.diversity_weighted(0.5)
        p = rng.dirichlet(np.ones(3))
        r = rng.dirichlet(np.ones(3))
        assert abs(D.pyth_transport_gap(gen, p, p, r)) < 1e-12

    def test_matches_divergence_difference(self, rng):
        for name, gen in builtin_zoo(3).items():
            for _ in range(15):
                p, q, r = dirichlet_points(rng, 3, 3)
                gap_cost = D.pyth_transport_gap(gen, p, q, r)
                gap_div = (
                    D.l_divergence(gen, q, p).value
                    + D.l_divergence(gen, r, q).value
                    - D.l_divergence(gen, r, p).value
                )
                assert abs(gap_cost - gap_div) < 1e-9, name

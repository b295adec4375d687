import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate, optimize, special

from conftest import SEED
from serkit.constellation import new_constellation, square_qam
from serkit.fading import (
    FadingModel,
    avg_ser_curve,
    avg_ser_fading,
    check_gp_order,
    default_rho_grid,
    expectation,
    gp_functional,
    gp_implies_gq_check,
    lt_order_check,
    no_universal_order_scan,
    order_implies_ser_comparison,
)
from serkit.ser import q_function, ser_closed_qam

NAK = FadingModel.nakagami
AWGN = FadingModel.degenerate()
BPSK = new_constellation([[-1.0, 1.0]])


def bpsk_ser(r):
    return q_function(np.sqrt(2 * np.asarray(r)))


def qpsk_ser(r):
    return ser_closed_qam(4, np.asarray(r, dtype=float))


class TestModel:
    def test_validation(self):
        with pytest.raises(ValueError):
            FadingModel("weibull", {"k": 1.0})
        with pytest.raises(ValueError):
            NAK(0.3)
        with pytest.raises(ValueError):
            FadingModel.rician(-1.0)
        with pytest.raises(ValueError):
            FadingModel.empirical([1.0, -2.0])
        with pytest.raises(ValueError):
            FadingModel("nakagami", {"m": 1.0}, np.ones(3))

    def test_dict_roundtrip(self):
        for f in (NAK(2.0), FadingModel.rician(3.0), AWGN, FadingModel.empirical([0.5, 1.5])):
            g = FadingModel.from_dict(f.to_dict())
            assert g.to_dict() == f.to_dict()
        assert FadingModel.from_dict({"family": "degenerate"}) == AWGN

    @pytest.mark.parametrize("f", [NAK(0.5), NAK(1.0), NAK(2.7), FadingModel.rician(0.5), FadingModel.rician(8.0)])
    def test_unit_mean_nodes_and_samples(self, f):
        x, w = f.nodes()
        assert w.sum() == pytest.approx(1.0, abs=1e-10)
        assert (w * x).sum() == pytest.approx(1.0, abs=1e-10)
        s = f.sample(np.random.default_rng(SEED), 200_000)
        assert s.mean() == pytest.approx(1.0, rel=0.01)

    def test_rician_density_normalised(self):
        f = FadingModel.rician(4.0)
        assert integrate.quad(f.pdf, 0, np.inf, limit=200)[0] == pytest.approx(1.0, rel=1e-10)


class TestFunctional:
    def test_examples(self):
        assert gp_functional(AWGN, 3.0, 2.0) == pytest.approx(np.exp(-2.0), rel=1e-15)
        assert gp_functional(NAK(1.0), 1.0, 1.0) == pytest.approx(0.25, rel=1e-14)
        assert gp_functional(NAK(2.0), 0.0, 1.0) == pytest.approx(4 / 9, rel=1e-14)

    @pytest.mark.parametrize(
        "f", [AWGN, NAK(0.5), NAK(3.3), FadingModel.rician(2.0), FadingModel.empirical([0.2, 1.0, 4.0])]
    )
    def test_total_probability(self, f):
        assert gp_functional(f, 0.0, 0.0) == 1.0

    @pytest.mark.parametrize("p", [0.0, 0.5, 1.7])
    @pytest.mark.parametrize("rho", [0.1, 2.0, 30.0])
    def test_rician_against_density(self, p, rho):
        f = FadingModel.rician(3.0)
        ref = integrate.quad(lambda x: x**p * np.exp(-rho * x) * f.pdf(x), 0, np.inf, limit=400, epsabs=1e-15)[0]
        assert gp_functional(f, p, rho) == pytest.approx(ref, rel=1e-9)
        assert expectation(f, lambda x: np.exp(-rho * x), p) == pytest.approx(ref, rel=1e-9)

    def test_empirical_mean(self):
        x = np.array([0.3, 1.1, 2.5])
        f = FadingModel.empirical(x)
        assert gp_functional(f, 0.5, 1.3) == pytest.approx(np.mean(x**0.5 * np.exp(-1.3 * x)), rel=1e-15)

    def test_rejects_negative(self):
        with pytest.raises(ValueError):
            gp_functional(AWGN, -1.0, 1.0)
        with pytest.raises(ValueError):
            gp_functional(AWGN, 1.0, -1.0)

    @given(st.floats(0.5, 6), st.floats(0, 3), st.floats(0.01, 50))
    @settings(max_examples=60, deadline=None)
    def test_nakagami_closed_form_matches_nodes(self, m, p, rho):
        f = NAK(m)
        assert gp_functional(f, p, rho) == pytest.approx(expectation(f, lambda x: np.exp(-rho * x), p), rel=1e-8)


class TestOrders:
    def test_lt_order_nakagami(self):
        v = lt_order_check(NAK(1.0), NAK(4.0))
        assert v.relation == "first_dominates" and v.grid_certified
        np.testing.assert_array_equal(v.grid, default_rho_grid())

    def test_p1_crossing_location(self):
        v = check_gp_order(NAK(1.0), NAK(4.0), 1.0)
        root = optimize.brentq(lambda r: (1 + r) ** -2 - 1024 * (4 + r) ** -5, 0.1, 50, xtol=1e-14)
        lo, hi = v.brackets[0]
        assert v.relation == "crossing" and lo <= root <= hi and hi / lo - 1 <= 1e-6
        # Below the crossing the functional increases with m.
        assert v.values2[0] > v.values1[0] and v.values1[-1] > v.values2[-1]

    def test_awgn_vs_nakagami_crossing(self):
        v = check_gp_order(AWGN, NAK(2.0), 0.5)
        g = lambda r: np.exp(-r) - 4 * (2 + r) ** -2.5 * special.gamma(2.5)
        root = optimize.brentq(g, 0.1, 10, xtol=1e-14)
        assert v.relation == "crossing"
        assert v.rho1 == pytest.approx(root, rel=1e-6)

    def test_tie(self):
        assert check_gp_order(NAK(2.0), NAK(2.0), 0.7).relation == "tie"

    def test_bad_grid(self):
        with pytest.raises(ValueError):
            check_gp_order(AWGN, NAK(2.0), 0.0, np.array([2.0, 1.0]))

    def test_transitive_in_m(self):
        ms = [0.7, 1.5, 3.0]
        for a in range(3):
            for b in range(a + 1, 3):
                assert lt_order_check(NAK(ms[a]), NAK(ms[b])).relation == "first_dominates"

    def test_completely_monotone_test_functions(self):
        # X1 <=_{G0} X2 must order E[f(X)] for c.m. f.
        f1, f2 = NAK(1.0), NAK(3.0)
        assert lt_order_check(f1, f2).relation == "first_dominates"
        tests = [lambda x: np.exp(-0.7 * x), lambda x: 1 / (1 + x), lambda x: q_function(np.sqrt(2 * x))]
        for fn in tests:
            assert expectation(f1, fn) >= expectation(f2, fn)

    @given(st.floats(0.5, 5), st.floats(0.5, 5), st.floats(0, 2), st.floats(0, 1))
    @settings(max_examples=25, deadline=None)
    def test_gp_implies_gq(self, m1, m2, p, frac):
        rep = gp_implies_gq_check(NAK(m1), NAK(m2), p, frac * p, np.geomspace(0.01, 100, 25))
        assert rep["holds"]

    def test_gp_implies_gq_cases(self):
        assert gp_implies_gq_check(NAK(1.0), NAK(4.0), 1.0, 0.5)["antecedent"] is False
        rep = gp_implies_gq_check(NAK(1.0), NAK(4.0), 0.0, 0.0)
        assert rep["antecedent"] and rep["holds"]
        with pytest.raises(ValueError):
            gp_implies_gq_check(AWGN, NAK(2.0), 0.5, 1.0)

    def test_no_universal_order(self):
        rep = no_universal_order_scan(NAK(1.0), NAK(4.0))
        assert rep["relations"][0] == "first_dominates"
        assert all(r == "crossing" for r in rep["relations"][1:])
        assert rep["found"] and rep["first_fails_at"] == 0.25
        assert no_universal_order_scan(AWGN, NAK(8.0))["found"]
        same = no_universal_order_scan(NAK(2.0), NAK(2.0))
        assert set(same["relations"]) == {"tie"}


class TestAverageSer:
    def test_degenerate_is_awgn(self):
        rho = np.array([0.5, 3.0])
        np.testing.assert_array_equal(avg_ser_curve(None, AWGN, rho, qpsk_ser), qpsk_ser(rho))

    @pytest.mark.parametrize("rho", [0.1, 1.0, 10.0, 100.0])
    def test_rayleigh_bpsk(self, rho):
        exact = 0.5 * (1 - np.sqrt(rho / (1 + rho)))
        assert avg_ser_fading(BPSK, NAK(1.0), rho, ser_fn=bpsk_ser).value == pytest.approx(exact, rel=1e-8)

    def test_default_ser_uses_quadrature(self):
        exact = 0.5 * (1 - np.sqrt(10 / 11))
        assert avg_ser_fading(BPSK, NAK(1.0), 10.0).value == pytest.approx(exact, rel=1e-8)

    def test_qpsk_quadrature_vs_simulation(self):
        c = square_qam(4)
        q = avg_ser_fading(c, NAK(1.0), 10.0, ser_fn=qpsk_ser).value
        sim = avg_ser_fading(c, NAK(1.0), 10.0, "simulate", 300_000, SEED)
        draws = avg_ser_fading(c, NAK(1.0), 10.0, "mc", 300_000, SEED, ser_fn=qpsk_ser)
        assert abs(sim.value - q) < 3 * sim.stderr
        assert abs(draws.value - q) < 3 * draws.stderr

    def test_empirical_exact(self):
        f = FadingModel.empirical([0.5, 2.0])
        got = avg_ser_fading(BPSK, f, 3.0, ser_fn=bpsk_ser).value
        assert got == pytest.approx(0.5 * (bpsk_ser(1.5) + bpsk_ser(6.0)), rel=1e-12)

    def test_unknown_method(self):
        with pytest.raises(ValueError):
            avg_ser_fading(BPSK, AWGN, 1.0, "guess")

    def test_order_implies_ser(self):
        c = square_qam(4)
        rep = order_implies_ser_comparison(c, NAK(1.0), NAK(4.0), ser_fn=qpsk_ser)
        assert rep["order"].relation == "first_dominates"
        assert rep["consistent"] and np.all(rep["ser2"] <= rep["ser1"])
        same = order_implies_ser_comparison(c, NAK(2.0), NAK(2.0), ser_fn=qpsk_ser)
        assert same["ser_relation"] == "tie" and same["consistent"]

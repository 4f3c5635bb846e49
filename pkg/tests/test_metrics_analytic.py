"""Closed-form metric tests against quadrature and classical reductions."""

import math

import numpy as np
import pytest
from scipy import integrate, special

import fsothz.metrics_analytic as ma
from fsothz.channel_access import access_snr_pdf
from fsothz.channel_fso import fso_snr_pdf
from fsothz.channel_thz import thz_snr_pdf
from fsothz.errors import DomainError
from fsothz.switching import HardPolicy, SoftPolicy

from conftest import GTH_5DB, access_spec, soft_policy, system_spec

Modulation = ma.Modulation


class TestModulationTable:
    def test_ook(self):
        m = Modulation.ook()
        assert (m.n0, m.a, m.b_list, m.tau) == (1, 0.5, (0.5,), 2)

    def test_bpsk(self):
        m = Modulation.bpsk()
        assert (m.n0, m.a, m.b_list, m.tau) == (1, 0.5, (1.0,), 1)

    def test_16psk(self):
        m = Modulation.mpsk(16)
        assert m.n0 == 4
        assert m.a == pytest.approx(0.25)
        assert m.b_list[0] == pytest.approx(math.sin(math.pi / 16.0) ** 2)

    def test_16qam(self):
        m = Modulation.mqam(16)
        assert m.n0 == 2
        assert m.a == pytest.approx(2.0 / 4.0 * (1.0 - 0.25))
        assert m.b_list == tuple(pytest.approx(3.0 * (2 * p - 1) ** 2 / 30.0)
                                 for p in (1, 2))

    def test_qpsk_equals_4qam(self):
        qpsk, qam4 = Modulation.mpsk(4), Modulation.mqam(4)
        assert qpsk.n0 == qam4.n0 == 1
        assert qpsk.a == pytest.approx(qam4.a, abs=1e-15)
        assert qpsk.b_list[0] == pytest.approx(qam4.b_list[0], abs=1e-15)

    def test_qpsk_equals_4qam_aber_curves(self):
        for snr in (20.0, 30.0, 40.0):
            spec = system_spec(snr_db=snr)
            a = ma.aber_e2e(spec, Modulation.mpsk(4)).value
            b = ma.aber_e2e(spec, Modulation.mqam(4)).value
            assert a == pytest.approx(b, rel=1e-12)

    def test_invalid_orders(self):
        with pytest.raises(DomainError):
            Modulation.mpsk(6)
        with pytest.raises(DomainError):
            Modulation.mqam(32)


class TestOutageCompositions:
    def test_perfect_access_leaves_hybrid(self):
        spec = system_spec(snr_db=150.0)  # gamma_bar_R -> infinity proxy
        hyb = ma.outage_hybrid(spec).value
        e2e = ma.outage_e2e(spec).value
        assert e2e == pytest.approx(hyb, rel=1e-6)

    def test_outage_free_limit(self):
        spec = system_spec(snr_db=200.0)
        assert ma.outage_e2e(spec).value < 1e-12

    def test_coincident_soft_equals_hard(self):
        hard = system_spec()
        soft = system_spec(policy=HardPolicy(GTH_5DB).as_soft())
        assert ma.outage_e2e_soft(soft).value == pytest.approx(
            ma.outage_e2e_hard(hard).value, abs=1e-15)

    def test_soft_thz_threshold_to_zero_leaves_access(self):
        pol = SoftPolicy(GTH_5DB, GTH_5DB, 1e-12)
        spec = system_spec(policy=pol)
        acc = ma.outage_access(spec).value
        assert ma.outage_e2e(spec).value == pytest.approx(acc, rel=1e-6)

    def test_policy_dispatch_guards(self):
        with pytest.raises(DomainError):
            ma.outage_e2e_soft(system_spec())
        with pytest.raises(DomainError):
            ma.outage_e2e_hard(system_spec(policy=soft_policy()))


class TestDiversity:
    def test_reference_orders(self):
        spec = system_spec()  # strong turbulence, case (a), m=2 N_t=2
        orders = ma.diversity_order(spec)
        assert orders.fso == pytest.approx(spec.fso.beta_f)  # xi^2 > alpha > beta
        assert orders.thz == pytest.approx(6.0)              # alpha Nr mu / 2
        assert orders.access == pytest.approx(4.0)           # m N_t
        assert orders.hybrid == pytest.approx(orders.fso + orders.thz)
        assert orders.e2e == pytest.approx(4.0)

    def test_imdd_halves_fso_order(self):
        assert ma.diversity_order(system_spec(tau=2)).fso == pytest.approx(
            ma.diversity_order(system_spec(tau=1)).fso / 2.0)


def _slope(outage_fn, lo=55.0, hi=70.0, n=4):
    snrs = np.linspace(lo, hi, n)
    vals = np.array([outage_fn(s) for s in snrs])
    return np.polyfit(snrs / 10.0, np.log10(vals), 1)[0]


class TestAsymptotics:
    def test_e2e_ratio_converges(self):
        spec = system_spec(snr_db=60.0)
        exact = ma.outage_e2e(spec).value
        asym = ma.asymptotic_outage(spec, "e2e")
        assert 0.9 < exact / asym < 1.1

    def test_fso_asymptote_slope(self):
        spec = system_spec()
        want = -ma.diversity_order(spec).fso
        slope = _slope(lambda s: ma.asymptotic_outage(spec.at_snr(s), "fso"),
                       50.0, 70.0)
        assert slope == pytest.approx(want, rel=0.05)

    def test_thz_asymptote_slope(self):
        spec = system_spec()
        want = -ma.diversity_order(spec).thz
        slope = _slope(lambda s: ma.asymptotic_outage(spec.at_snr(s), "thz"),
                       50.0, 70.0)
        assert slope == pytest.approx(want, rel=0.05)

    def test_soft_asymptotic_structure(self):
        spec = system_spec(snr_db=60.0, policy=soft_policy())
        exact = ma.outage_hybrid(spec).value
        asym = ma.asymptotic_outage(spec, "hybrid")
        assert 0.8 < exact / asym < 1.2


def _quad_capacity(pdf, gamma_th, anchor, xi=1.0):
    def integrand(g):
        return math.log1p(xi * g) / math.log(2.0) * pdf(g)

    mid = max(anchor, 2.0 * gamma_th)
    head, _ = integrate.quad(integrand, gamma_th, mid, limit=400)
    tail, _ = integrate.quad(integrand, mid, math.inf, limit=400)
    return head + tail


class TestCapacity:
    def test_threshold_zero_is_full_range(self):
        spec = system_spec(snr_db=35.0)
        full = ma.capacity_fso(0.0, spec).value
        want = _quad_capacity(
            lambda g: fso_snr_pdf(g, spec.fso, 35.0).value, 1e-12,
            spec.fso.delta_tau(35.0))
        assert full == pytest.approx(want, abs=1e-3)

    @pytest.mark.parametrize("snr", [30.0, 40.0, 50.0])
    def test_fso_matches_quadrature(self, snr):
        spec = system_spec(snr_db=snr)
        got = ma.capacity_fso(GTH_5DB, spec).value
        want = _quad_capacity(lambda g: fso_snr_pdf(g, spec.fso, snr).value,
                              GTH_5DB, spec.fso.delta_tau(snr))
        assert got == pytest.approx(want, abs=1e-3)

    @pytest.mark.parametrize("snr", [30.0, 40.0, 50.0])
    def test_thz_matches_quadrature(self, snr):
        spec = system_spec(snr_db=snr)
        got = ma.capacity_thz(GTH_5DB, spec).value
        want = _quad_capacity(lambda g: thz_snr_pdf(g, spec.thz, snr).value,
                              GTH_5DB, spec.thz.gamma_bar(snr))
        assert got == pytest.approx(want, abs=1e-3)

    @pytest.mark.parametrize("snr", [20.0, 35.0, 50.0])
    def test_access_matches_quadrature(self, snr):
        spec = system_spec(snr_db=snr)
        got = ma.capacity_access(GTH_5DB, spec).value
        want = _quad_capacity(
            lambda g: access_snr_pdf(g, spec.access, snr), GTH_5DB,
            2.0 * spec.access.gamma_bar_r(snr))
        assert got == pytest.approx(want, abs=1e-3)

    def test_access_classical_reduction(self):
        # m = 1, N_t = 1, threshold 0: exp(1/gbar) E1(1/gbar) / ln 2
        spec = ma.SystemSpec(system_spec().fso, system_spec().thz,
                             access_spec(m=1.0, n_tx=1), HardPolicy(GTH_5DB),
                             GTH_5DB, 30.0)
        gbar = spec.access.gamma_bar_r(30.0)
        want = math.exp(1.0 / gbar) * special.exp1(1.0 / gbar) / math.log(2.0)
        assert ma.capacity_access(0.0, spec).value == pytest.approx(want,
                                                                    abs=1e-6)

    def test_thz_capacity_monotone_in_snr(self):
        vals = [ma.capacity_thz(GTH_5DB, system_spec(snr_db=s)).value
                for s in np.linspace(25.0, 55.0, 10)]
        assert all(b >= a - 1e-12 for a, b in zip(vals, vals[1:]))

    def test_hybrid_coincident_soft_equals_hard(self):
        hard = system_spec(snr_db=40.0)
        soft = system_spec(snr_db=40.0, policy=HardPolicy(GTH_5DB).as_soft())
        assert ma.capacity_hybrid(soft).value == pytest.approx(
            ma.capacity_hybrid(hard).value, abs=1e-9)

    def test_low_snr_divergence_flagged_not_hidden(self):
        # the printed closed form deviates at 0 dB and the result says so
        spec = system_spec(snr_db=0.0)
        closed = ma.capacity_fso(GTH_5DB, spec, closed_form_only=True)
        want = _quad_capacity(lambda g: fso_snr_pdf(g, spec.fso, 0.0).value,
                              GTH_5DB, spec.fso.delta_tau(0.0))
        assert abs(closed.value - want) > 1e-3  # documented divergence
        assert ma.FLAG_LOW_SNR_CAPACITY in closed.flags
        production = ma.capacity_fso(GTH_5DB, spec)
        assert production.value == pytest.approx(want, abs=1e-3)
        assert ma.FLAG_LOW_SNR_CAPACITY in production.flags

    def test_e2e_is_min(self):
        spec = system_spec(snr_db=40.0)
        e2e = ma.capacity_e2e(spec).value
        assert e2e == pytest.approx(
            min(ma.capacity_hybrid(spec).value,
                ma.capacity_access(GTH_5DB, spec).value), rel=1e-12)


def _quad_aber(pdf, gamma_th, mod, anchor):
    def integrand(g):
        err = sum(math.erfc(math.sqrt(b * g)) for b in mod.b_list)
        return mod.a * err * pdf(g)

    mid = max(anchor, 2.0 * gamma_th)
    head, _ = integrate.quad(integrand, gamma_th, mid, limit=400)
    tail, _ = integrate.quad(integrand, mid, math.inf, limit=400)
    return head + tail


class TestAber:
    @pytest.mark.parametrize("snr", [25.0, 35.0, 45.0])
    def test_fso_matches_quadrature(self, snr):
        spec = system_spec(snr_db=snr)
        mod = Modulation.bpsk()
        got = ma.aber_fso(GTH_5DB, spec, mod).value
        want = _quad_aber(lambda g: fso_snr_pdf(g, spec.fso, snr).value,
                          GTH_5DB, mod, 2.0)
        assert got == pytest.approx(want, rel=2e-2)

    @pytest.mark.parametrize("snr", [25.0, 35.0, 45.0])
    def test_thz_matches_quadrature(self, snr):
        spec = system_spec(snr_db=snr)
        mod = Modulation.bpsk()
        got = ma.aber_thz(GTH_5DB, spec, mod).value
        want = _quad_aber(lambda g: thz_snr_pdf(g, spec.thz, snr).value,
                          GTH_5DB, mod, 2.0)
        assert got == pytest.approx(want, rel=2e-2)

    @pytest.mark.parametrize("mod", [Modulation.bpsk(), Modulation.mqam(16),
                                     Modulation.mpsk(8)])
    def test_access_matches_quadrature(self, mod):
        spec = system_spec(snr_db=30.0)
        got = ma.aber_access(GTH_5DB, spec, mod).value
        want = _quad_aber(lambda g: access_snr_pdf(g, spec.access, 30.0),
                          GTH_5DB, mod, 2.0)
        assert got == pytest.approx(want, rel=2e-2)

    def test_threshold_zero_drops_lower_terms(self):
        spec = system_spec(snr_db=30.0)
        mod = Modulation.bpsk()
        assert ma.aber_fso(0.0, spec, mod).value == pytest.approx(
            ma._aber_fso_full(spec, mod).value, rel=1e-12)
        assert ma.aber_access(0.0, spec, mod).value == pytest.approx(
            ma._aber_access_full(spec, mod).value, rel=1e-12)

    def test_access_classical_rayleigh_bpsk(self):
        # m = 1, N_t = 1, threshold 0: (1 - sqrt(gbar/(1+gbar))) / 2
        spec = ma.SystemSpec(system_spec().fso, system_spec().thz,
                             access_spec(m=1.0, n_tx=1), HardPolicy(GTH_5DB),
                             GTH_5DB, 25.0)
        gbar = spec.access.gamma_bar_r(25.0)
        want = 0.5 * (1.0 - math.sqrt(gbar / (1.0 + gbar)))
        got = ma.aber_access(0.0, spec, Modulation.bpsk()).value
        assert got == pytest.approx(want, rel=1e-8)

    def test_binary_schemes_bounded(self):
        for snr in (0.0, 15.0, 30.0):
            spec = system_spec(snr_db=snr)
            for mod in (Modulation.bpsk(),):
                assert 0.0 <= ma.aber_fso(GTH_5DB, spec, mod).value <= 0.5
                assert 0.0 <= ma.aber_e2e(spec, mod).value <= 0.5

    def test_e2e_composition(self):
        spec = system_spec(snr_db=35.0)
        mod = Modulation.bpsk()
        b1 = ma.aber_hybrid(spec, mod).value
        b2 = ma.aber_access(GTH_5DB, spec, mod).value
        assert ma.aber_e2e(spec, mod).value == pytest.approx(
            b1 + b2 - 2.0 * b1 * b2, rel=1e-12)

    def test_e2e_absorbing_half(self):
        # B1 = B2 = 1/2 is a fixed point of the composition
        assert 0.5 + 0.5 - 2.0 * 0.25 == 0.5

    def test_hybrid_conditional_normalization(self):
        spec = system_spec(snr_db=30.0)
        mod = Modulation.bpsk()
        num = ma.aber_hybrid_unconditional(spec, mod).value
        out = ma.outage_hybrid(spec).value
        assert ma.aber_hybrid(spec, mod).value == pytest.approx(
            num / (1.0 - out), rel=1e-12)

    def test_tau_mismatch_rejected(self):
        with pytest.raises(DomainError):
            ma.aber_fso(GTH_5DB, system_spec(tau=1), Modulation.ook())

    def test_coincident_soft_equals_hard(self):
        mod = Modulation.bpsk()
        hard = system_spec(snr_db=35.0)
        soft = system_spec(snr_db=35.0, policy=HardPolicy(GTH_5DB).as_soft())
        assert ma.aber_hybrid(soft, mod).value == pytest.approx(
            ma.aber_hybrid(hard, mod).value, rel=1e-9)

import math
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from draws import link_params, random_link, rel_err
from qilink import chain as ch
from qilink import gaussian as gc
from qilink.chain import LinkParams
from qilink.errors import DomainError

P = LinkParams()


# --- parameters ------------------------------------------------------------------

def test_defaults_consistent():
    assert P.M == round(P.T * P.W)
    assert P.g_a_excess == pytest.approx(1.86e-5, rel=1e-9)


@pytest.mark.parametrize(
    "kw",
    [
        {"kappa_1": 1.3},
        {"eta_E": -0.1},
        {"G_B": 0.5},
        {"G_A": 0.99},
        {"N_B": 10.0},
        {"M": 0, "W": None},
        {"M": 1000},
    ],
)
def test_invalid_params(kw):
    with pytest.raises(DomainError):
        replace(P, **kw)


def test_m_free_without_bandwidth():
    assert replace(P, M=1000, W=None, T=None).M == 1000


def test_ideal_receiver():
    q = P.ideal_receiver()
    assert (q.kappa_d, q.kappa_d_prime, q.eta_d_A, q.eta_d_E) == (1.0, 1.0, 1.0, 1.0)
    assert q.kappa_A == P.kappa_A


# --- Alice -----------------------------------------------------------------------

def test_alice_dark_level():
    s = ch.alice_mode_stats(P, 0.0)
    expected = P.kappa_d * P.g_a_excess * (1 + P.kappa_A_prime * P.kappa_2 * P.kappa_B_prime * P.N_B)
    assert s.n_plus == s.n_minus == pytest.approx(expected, rel=1e-12)
    assert s.depth == 0.0


def test_alice_opa_off():
    q = replace(P, G_A=1.0)
    s = ch.alice_mode_stats(q, 1e-3)
    assert s.n_plus == s.n_minus == pytest.approx(q.kappa_d * q.kappa_I * 1e-3)


def test_alice_depth_closed_form():
    n_s = 1e-3
    g = P.G_A
    expected = 4 * P.eta_d_A * P.kappa_d * math.sqrt(
        g * (g - 1) * P.kappa_I * P.return_gain * n_s * (n_s + 1)
    )
    assert ch.alice_modulation_depth(P, n_s) == pytest.approx(expected, rel=1e-12)
    assert ch.alice_mode_stats(P, n_s).depth == pytest.approx(expected, rel=1e-12)


def test_alice_depth_sqrt_scaling():
    n_s = 1e-6
    ratio = ch.alice_modulation_depth(P, 4 * n_s) / ch.alice_modulation_depth(P, n_s)
    assert ratio == pytest.approx(math.sqrt(4 * (4 * n_s + 1) / (n_s + 1)), rel=1e-12)
    assert ratio == pytest.approx(2.0, rel=1e-5)


def test_classical_depth():
    assert ch.classical_alice_modulation_depth(P, 0.0) == 0.0
    ratio = ch.classical_alice_modulation_depth(P, 1e-3) / ch.alice_modulation_depth(P, 1e-3)
    assert ratio == pytest.approx(math.sqrt(1e-3 / 1.001), rel=1e-12)
    assert ratio == pytest.approx(0.0316, abs=5e-4)
    high = ch.classical_alice_modulation_depth(P, 1e6) / ch.alice_modulation_depth(P, 1e6)
    assert high == pytest.approx(1.0, abs=1e-6)


def test_negative_brightness_rejected():
    with pytest.raises(DomainError):
        ch.alice_mode_stats(P, -1e-3)
    with pytest.raises(DomainError):
        ch.eve_tap_moments(P, 1e-3, 0)


# --- Eve ---------------------------------------------------------------------------

def test_eve_ase_only():
    s = ch.eve_mode_stats(P, 0.0)
    expected = P.kappa_d_prime * (1 - P.eta_E) * P.kappa_E * (1 - P.kappa_2) * P.kappa_B_prime * P.N_B
    assert s.n_plus == pytest.approx(expected, rel=1e-12)
    assert s.depth == 0.0


def test_eve_no_mixing():
    assert ch.eve_mode_stats(replace(P, eta_E=1.0), 1e-3).depth == 0.0


def test_eve_depth_linear_in_brightness():
    d1 = ch.eve_modulation_depth(P, 1e-4)
    d2 = ch.eve_modulation_depth(P, 2e-4)
    # depth is a difference of two nearly equal levels, so allow cancellation error
    assert d2 / d1 == pytest.approx(2.0, rel=1e-9)


def test_eve_tap_zero_brightness():
    t = ch.eve_tap_moments(P, 0.0)
    assert t.n_e1 == 0.0 and t.c_pi_plus == 0.0
    assert t.n_e3 == pytest.approx((1 - P.kappa_2) * P.kappa_B_prime * P.N_B)


def test_eve_tap_signs():
    plus = ch.eve_tap_moments(P, 1e-3, 1)
    minus = ch.eve_tap_moments(P, 1e-3, -1)
    assert minus.c_pi_plus == -plus.c_pi_plus
    assert plus.c_pi_minus == -plus.c_pi_plus
    assert plus.state(-1).c_pi == -plus.state(1).c_pi


@given(link_params(), st.floats(0.0, 1.0))
def test_eve_state_always_classical(p, n_s):
    t = ch.eve_tap_moments(p, n_s)
    assert t.c_pi_plus**2 <= t.n_e1 * t.n_e3 * (1 + 1e-12)


# --- threshold ---------------------------------------------------------------------

def test_threshold_trivial():
    q = LinkParams(
        kappa_A=1, kappa_1=1, kappa_B=1, G_B=1, N_B=0, kappa_B_prime=1, kappa_2=1,
        kappa_A_prime=1, kappa_I=1, M=1, W=None, T=None,
    )
    assert ch.classicality_threshold(q) == 1.0


def test_threshold_defaults():
    assert ch.classicality_threshold(P) == pytest.approx(2.14e3, rel=0.01)
    assert ch.classicality_margin_db(P) == pytest.approx(8.3, abs=0.1)
    assert ch.alice_returned_state_is_classical(P)


# --- oracle ------------------------------------------------------------------------

def test_oracle_identity_chain():
    q = LinkParams(
        kappa_A=1, kappa_1=1, kappa_B=1, G_B=1, N_B=0, kappa_B_prime=1, kappa_2=1,
        kappa_A_prime=1, kappa_I=1, M=1, W=None, T=None,
    )
    assert ch.compose_chain_oracle(q, 0.01, 1).alice == gc.spdc_state(0.01)


def test_oracle_bit_symmetry():
    plus = ch.compose_chain_oracle(P, 1e-3, 1)
    minus = ch.compose_chain_oracle(P, 1e-3, -1)
    for a, b in ((plus.alice, minus.alice), (plus.eve, minus.eve)):
        assert (a.n1, a.n2) == (b.n1, b.n2)
        assert (a.c_ps, a.c_pi) == (-b.c_ps, -b.c_pi)


def test_oracle_alice_correlation_closed_form():
    n_s = 1e-3
    alice = ch.compose_chain_oracle(P, n_s, 1).alice
    expected = math.sqrt(P.kappa_I * P.return_gain * n_s * (n_s + 1))
    assert alice.c_ps == pytest.approx(expected, rel=1e-12)


@pytest.mark.parametrize("n_s", [1e-3, 7.81e-4])
def test_oracle_matches_closed_forms_at_defaults(n_s):
    a = ch.alice_mode_stats(P, n_s)
    e = ch.eve_mode_stats(P, n_s)
    assert ch.oracle_alice_occupation(P, n_s, 1) == pytest.approx(a.n_plus, rel=1e-12)
    assert ch.oracle_alice_occupation(P, n_s, -1) == pytest.approx(a.n_minus, rel=1e-12)
    assert ch.oracle_eve_occupation(P, n_s, 1) == pytest.approx(e.n_plus, rel=1e-12)
    assert ch.oracle_eve_occupation(P, n_s, -1) == pytest.approx(e.n_minus, rel=1e-12)
    t = ch.eve_tap_moments(P, n_s, 1)
    eve = ch.compose_chain_oracle(P, n_s, 1).eve
    assert (eve.n1, eve.n2, eve.c_pi) == pytest.approx((t.n_e1, t.n_e3, t.c_pi_plus), rel=1e-12)


def test_oracle_classical_source():
    c = ch.classical_alice_mode_stats(P, 1e-3)
    assert ch.oracle_alice_occupation(P, 1e-3, 1, classical=True) == pytest.approx(c.n_plus, rel=1e-12)
    assert ch.oracle_alice_occupation(P, 1e-3, -1, classical=True) == pytest.approx(c.n_minus, rel=1e-12)


@given(link_params(), st.floats(0.0, 0.1))
def test_oracle_equivalence_property(p, n_s):
    a = ch.alice_mode_stats(p, n_s)
    assert rel_err(ch.oracle_alice_occupation(p, n_s, 1), a.n_plus) < 1e-10
    assert rel_err(ch.oracle_alice_occupation(p, n_s, -1), a.n_minus) < 1e-10
    e = ch.eve_mode_stats(p, n_s)
    assert rel_err(ch.oracle_eve_occupation(p, n_s, 1), e.n_plus) < 1e-10


# --- monotonicity --------------------------------------------------------------------

@given(link_params(), st.floats(1e-6, 0.1), st.floats(1.0, 10.0))
def test_occupations_nondecreasing(p, n_s, factor):
    # N_A^- can fall with n_s (the cross term grows faster than the direct terms),
    # so only the bit +1 level and Eve's tap occupations are monotone in n_s.
    lo, hi = n_s, n_s * factor
    assert ch.alice_mode_stats(p, hi).n_plus >= ch.alice_mode_stats(p, lo).n_plus
    t_lo, t_hi = ch.eve_tap_moments(p, lo), ch.eve_tap_moments(p, hi)
    assert t_hi.n_e1 >= t_lo.n_e1 and t_hi.n_e3 >= t_lo.n_e3
    noisier = replace(p, N_B=p.N_B * factor)
    for bit in (1, -1):
        assert ch.alice_mode_stats(noisier, n_s).occupation(bit) >= ch.alice_mode_stats(p, n_s).occupation(bit)
        assert ch.eve_mode_stats(noisier, n_s).occupation(bit) >= ch.eve_mode_stats(p, n_s).occupation(bit)


def test_alice_minus_level_can_fall():
    q = P.ideal_receiver()
    levels = [ch.alice_mode_stats(q, n).n_minus for n in np.logspace(-8, -4, 5)]
    assert min(np.diff(levels)) < 0


def test_mode_pair_stats_validation():
    with pytest.raises(DomainError):
        ch.ModePairStats(-1.0, 0.0)
    with pytest.raises(DomainError):
        ch.ModePairStats(1.0, 0.5).occupation(2)


def test_random_link_is_valid():
    rng = np.random.default_rng(1)
    for _ in range(50):
        random_link(rng)

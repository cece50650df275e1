"""Saturable-loss models and the dispersive digamma shift.

Digamma values frozen from tests/oracles/digamma_reference.py (mpmath
at 50 digits); the shift example is direct arithmetic on top of those.
"""

import math

import pytest

from spiralres import bcs, tls
from spiralres.constants import CONST
from spiralres.core import MaterialModel
from spiralres.errors import ModelDomainError
from spiralres.tls import TlsParams


def test_digamma_frozen():
    assert tls.complex_digamma_real(0.0) == \
        pytest.approx(-1.9635100260214234794, abs=2e-13)
    assert tls.complex_digamma_real(1.0) == \
        pytest.approx(-0.051761650994412542793, abs=2e-13)
    assert tls.complex_digamma_real(1000.0) == \
        pytest.approx(6.9077552373154630937, abs=2e-13)
    assert tls.complex_digamma_real(1e6) == \
        pytest.approx(13.815510557964232437, abs=2e-13)


def test_shift_bracket_sign_change():
    # Re psi(1/2 + iy) - ln y crosses zero near y ~ 0.178: positive on
    # the low-y (hot) side, negative on the high-y (cold) side
    def bracket(y):
        return tls.complex_digamma_real(y) - math.log(y)

    assert bracket(0.01) == pytest.approx(2.6425012784792847, rel=1e-12)
    assert bracket(0.1) == pytest.approx(0.42012771117242168, rel=1e-12)
    assert bracket(10.0) == pytest.approx(-4.1739971969857043e-4, rel=1e-10)
    assert bracket(100.0) == pytest.approx(-4.1667395871779929e-6, rel=1e-10)
    assert bracket(0.17) > 0.0 > bracket(0.19)


def test_frequency_shift_frozen_example():
    # 5.95 GHz resonator at 300 mK sits on the hot side: shift > 0
    y = CONST.h * 5.95e9 / (2.0 * math.pi * CONST.kB * 0.3)
    assert y == pytest.approx(0.15149161288144514, rel=1e-12)
    s = tls.tls_frequency_shift(2.3e5, 5.95e9, 0.3)
    assert s == pytest.approx(1.4020928003156363e-7, rel=1e-10)
    assert s > 0.0


def test_frequency_shift_disabled_channel():
    assert tls.tls_frequency_shift(math.inf, 5.95e9, 0.3) == 0.0


def test_frequency_shift_negative_below_crossover():
    # cold side: bracket ~ -1/(24 y^2), tiny and negative
    s = tls.tls_frequency_shift(2.3e5, 5.95e9, 0.010)
    assert s < 0.0
    assert abs(s) < 1e-8


def test_temperature_domain():
    with pytest.raises(ModelDomainError):
        tls.saturation_tanh(5e9, 0.0)
    with pytest.raises(ModelDomainError):
        tls.saturation_tanh(5e9, -0.1)
    with pytest.raises(ModelDomainError):
        tls.tls_frequency_shift(2e5, 5e9, 0.0)


def test_saturation_tanh_cap():
    # hf/2kT at 5 GHz, 1 nK is ~ 1.2e14; the cap keeps tanh finite
    assert tls.saturation_tanh(5e9, 1e-9) == 1.0
    assert tls.saturation_tanh(5e9, 0.060) == pytest.approx(
        math.tanh(CONST.h * 5e9 / (2.0 * CONST.kB * 0.060)), rel=1e-15)


def test_quality_zero_photon_identity():
    p = TlsParams(q_tls0=2.3e5, n_c=18.0, beta=0.42, sat_scale_d=40.0,
                  beta1=1.3, beta2=0.9)
    th = tls.saturation_tanh(5.95e9, 0.060)
    assert tls.tls_quality(p, 0.0, 5.95e9, 0.060) == p.q_tls0 / th


def test_quality_grows_with_power():
    p = TlsParams(q_tls0=2.3e5, sat_scale_d=40.0, beta1=1.3, beta2=0.9)
    last = 0.0
    for n in [0.0, 1.0, 10.0, 100.0, 1e4, 1e6]:
        q = tls.tls_quality(p, n, 5.95e9, 0.060)
        assert q > last
        last = q


def test_quality_rejects_negative_photons():
    p = TlsParams(q_tls0=2.3e5)
    with pytest.raises(ValueError):
        tls.tls_quality(p, -1.0, 5e9, 0.1)
    with pytest.raises(ValueError):
        tls.power_law_loss(p, -0.5, 5e9, 0.1)


def test_power_law_loss_limits():
    p = TlsParams(q_tls0=1.5e5, n_c=5.0, beta=0.45, q_other=1e6)
    th = tls.saturation_tanh(5e9, 0.060)
    assert tls.power_law_loss(p, 0.0, 5e9, 0.060) == \
        pytest.approx(th / p.q_tls0 + 1.0 / p.q_other, rel=1e-15)
    # saturated: TLS term suppressed by (n/nc)^beta, floor survives
    hi = tls.power_law_loss(p, 1e12, 5e9, 0.060)
    assert hi == pytest.approx(1.0 / p.q_other, rel=1e-4)


def test_power_law_loss_monotone_decreasing():
    p = TlsParams(q_tls0=1.5e5, n_c=5.0, beta=0.45, q_other=1e6)
    last = math.inf
    for n in [0.0, 0.1, 1.0, 10.0, 1e3, 1e5, 1e8]:
        v = tls.power_law_loss(p, n, 5e9, 0.060)
        assert v < last
        last = v


def test_params_validation():
    with pytest.raises(ValueError):
        TlsParams(q_tls0=0.0)
    with pytest.raises(ValueError):
        TlsParams(q_tls0=1e5, q_other=-1.0)
    with pytest.raises(ValueError):
        TlsParams(q_tls0=1e5, n_c=0.0)
    with pytest.raises(ValueError):
        TlsParams(q_tls0=1e5, sat_scale_d=-2.0)
    for bad in [{"beta": 0.0}, {"beta": 3.5}, {"beta1": -1.0},
                {"beta2": 4.0}]:
        with pytest.raises(ValueError):
            TlsParams(q_tls0=1e5, **bad)
    # disabled channels are fine
    TlsParams(q_tls0=math.inf, q_other=math.inf)


def test_combined_model_is_sum_of_channels():
    m = MaterialModel(tc=8.1, alpha=0.028)
    p = TlsParams(q_tls0=2.3e5, n_c=18.0, beta=0.42, sat_scale_d=40.0,
                  beta1=1.3, beta2=0.9, q_other=6e5)
    n, t, f0 = 5.0, 1.4, 5.95e9
    q_inv, shift = tls.combined_loss_model(m, p, n, t, f0)
    want_q = (1.0 / tls.tls_quality(p, n, f0, t)
              + bcs.qp_quality_shift(m, t, f0) + 1.0 / p.q_other)
    want_s = (tls.tls_frequency_shift(p.q_tls0, f0, t)
              + bcs.qp_frequency_shift(m, f0, t))
    assert q_inv == pytest.approx(want_q, rel=1e-14)
    assert shift == pytest.approx(want_s, rel=1e-14)

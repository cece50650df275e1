"""Backend selection and compiled/pure-Python kernel parity."""

import math

import numpy as np
import pytest

from spiralres import kernels
from spiralres.kernels import load_backend, reference


def test_backend_is_selected():
    assert kernels.BACKEND in ("compiled", "python")


def test_load_backend_rejects_unknown():
    with pytest.raises(ValueError):
        load_backend("fortran")


def _both_backends():
    backends = [("python", reference)]
    try:
        backends.append(("compiled", load_backend("compiled")))
    except ImportError:
        pass
    return backends


def test_compiled_backend_importable():
    # the build ships the extension; this fails loudly if it is dropped
    load_backend("compiled")


def test_mb_ratios_backend_parity():
    """Both backends agree to near round-off over the physical domain."""
    cases = [(wr, tr) for wr in (0.001, 0.01, 0.1, 0.5, 1.0, 1.5, 1.9)
             for tr in (0.05, 0.2, 0.5, 1.0, 3.0)]
    backends = _both_backends()
    if len(backends) < 2:
        pytest.skip("compiled backend unavailable")
    for wr, tr in cases:
        s1_py, s2_py = backends[0][1].mb_sigma_ratios(wr, tr, 1e-11)
        s1_c, s2_c = backends[1][1].mb_sigma_ratios(wr, tr, 1e-11)
        assert s1_c == pytest.approx(s1_py, rel=2e-12, abs=1e-290)
        assert s2_c == pytest.approx(s2_py, rel=2e-12)


def test_digamma_backend_parity():
    backends = _both_backends()
    if len(backends) < 2:
        pytest.skip("compiled backend unavailable")
    for y in (0.0, 1e-3, 0.04545, 0.15149161288144514, 0.56, 1.0, 9.7,
              10.3, 100.0, 1e6):
        a = backends[0][1].digamma_half_real(y)
        b = backends[1][1].digamma_half_real(y)
        assert b == pytest.approx(a, rel=1e-13, abs=1e-13)


def test_gk15_polynomial_exact():
    # the embedded Gauss rule is exact through degree 13; Kronrod more
    val, err = reference.adaptive_gk15(lambda x: x**8, 0.0, 1.0,
                                       rel_tol=1e-13)
    assert val == pytest.approx(1.0 / 9.0, rel=1e-14)
    assert err < 1e-12


def test_gk15_known_integrals():
    val, _ = reference.adaptive_gk15(np.exp, 0.0, 1.0, rel_tol=1e-12)
    assert val == pytest.approx(math.e - 1.0, rel=1e-12)
    val, _ = reference.adaptive_gk15(lambda x: 1.0 / (1.0 + x * x),
                                     0.0, 1.0, rel_tol=1e-12)
    assert val == pytest.approx(math.pi / 4.0, rel=1e-12)


def test_gk15_handles_peaked_integrand():
    # narrow Lorentzian needs adaptive subdivision to converge
    w = 1e-4
    val, _ = reference.adaptive_gk15(
        lambda x: w / (x * x + w * w), -1.0, 1.0, rel_tol=1e-10)
    assert val == pytest.approx(2.0 * math.atan(1.0 / w), rel=1e-9)


def test_digamma_reference_frozen_values():
    # mpmath 30-digit oracle values
    frozen = {
        0.0: -1.9635100260214234794,
        1.0: -0.051761650994412542793,
        1000.0: 6.9077552373154630937,
    }
    for y, want in frozen.items():
        assert reference.digamma_half_real(y) == pytest.approx(
            want, abs=2e-13)


def test_digamma_even_in_y():
    assert reference.digamma_half_real(-2.5) == \
        reference.digamma_half_real(2.5)

"""Behavior of the shared Levenberg-Marquardt engine."""

import math

import numpy as np
import pytest

from spiralres.errors import BoundsViolation
from spiralres.leastsq import lm_minimize


def test_rosenbrock_valley():
    # classic hard start; residual form r = (1-a, 10(b-a^2))
    def res(p):
        return np.array([1.0 - p[0], 10.0 * (p[1] - p[0] ** 2)])

    fit = lm_minimize(res, [-1.2, 1.0], max_iter=500)
    assert fit.converged
    assert fit.values == pytest.approx([1.0, 1.0], abs=1e-6)
    assert fit.residual_norm < 1e-12


def test_linear_covariance_matches_normal_equations():
    # y = a x + b with known design: cov = chi2/dof * (XtX)^-1
    rng = np.random.default_rng(7)
    x = np.linspace(0.0, 1.0, 40)
    y = 2.0 * x - 1.0 + 0.05 * rng.standard_normal(40)

    def res(p):
        return p[0] * x + p[1] - y

    fit = lm_minimize(res, [0.0, 0.0], param_names=("a", "b"))
    assert fit.converged
    design = np.column_stack([x, np.ones_like(x)])
    chi2 = float(np.sum((design @ fit.values - y) ** 2))
    want = np.linalg.inv(design.T @ design) * chi2 / (40 - 2)
    assert fit.covariance == pytest.approx(want, rel=1e-4)


def test_scale_covariance_semantics():
    # identical problem fit twice: the chi2-scaled covariance differs
    # from the known-sigma covariance by exactly residual_norm / dof
    rng = np.random.default_rng(11)
    x = np.linspace(0.0, 1.0, 30)
    y = 3.0 * x + 0.5 + 0.1 * rng.standard_normal(30)

    def res(p):
        return p[0] * x + p[1] - y

    scaled = lm_minimize(res, [1.0, 0.0])
    plain = lm_minimize(res, [1.0, 0.0], scale_covariance=False)
    assert scaled.values == pytest.approx(plain.values, rel=1e-12)
    factor = scaled.residual_norm / scaled.dof
    assert scaled.covariance == pytest.approx(plain.covariance * factor,
                                              rel=1e-9)


def test_dead_parameter_flagged():
    def res(p):
        return np.array([p[0] - 1.0, p[0] - 1.0, p[0] + 2.0])

    fit = lm_minimize(res, [0.0, 5.0], param_names=("live", "dead"))
    assert fit.ill_conditioned
    assert math.isinf(fit.covariance[1, 1])
    assert fit.stderr("dead") == math.inf
    assert math.isfinite(fit.stderr("live"))
    assert fit["live"] == pytest.approx(0.0, abs=1e-8)


def test_bounds_clip_and_reject():
    def res(p):
        return np.array([p[0] - 10.0, 0.1 * (p[1] - 0.5)])

    fit = lm_minimize(res, [1.0, 0.4], bounds=[(0.0, 2.0), (0.0, 1.0)])
    assert fit.values[0] == pytest.approx(2.0)  # pinned at the box edge
    with pytest.raises(BoundsViolation):
        lm_minimize(res, [3.0, 0.4], bounds=[(0.0, 2.0), (0.0, 1.0)])


def test_nonfinite_start_rejected():
    def res(p):
        return np.array([math.nan, 1.0])

    with pytest.raises(ValueError):
        lm_minimize(res, [1.0])


def test_exponential_decay_roundtrip():
    x = np.linspace(0.0, 5.0, 60)
    truth = (2.5, 1.3)
    y = truth[0] * np.exp(-truth[1] * x)

    def res(p):
        return p[0] * np.exp(-p[1] * x) - y

    fit = lm_minimize(res, [1.0, 0.5], param_names=("amp", "rate"))
    assert fit.converged
    assert fit["amp"] == pytest.approx(2.5, rel=1e-8)
    assert fit["rate"] == pytest.approx(1.3, rel=1e-8)
    # noiseless: essentially zero residual, tiny reported errors
    assert fit.residual_norm < 1e-14


def test_x_scale_helps_tiny_parameters():
    # delay-like parameter at 3.7e-8: the x_scale floor keeps the
    # finite-difference step proportional to the parameter instead of
    # the default unit magnitude
    x = np.linspace(1e-9, 2e-7, 40)
    tau = 3.7e-8

    def res(p):
        return np.exp(-x / p[0]) - np.exp(-x / tau)

    fit = lm_minimize(res, [1e-8], x_scale=[1e-8], max_iter=400,
                      bounds=[(1e-10, 1e-5)])
    assert fit.converged
    assert fit.values[0] == pytest.approx(tau, rel=1e-6)


def test_max_iter_returns_unconverged():
    def res(p):
        return np.array([math.exp(p[0]) - 5.0, p[1] ** 3 - 2.0])

    fit = lm_minimize(res, [0.0, 0.0], max_iter=1)
    assert not fit.converged
    assert fit.message == "max_iter reached"
    assert fit.iterations == 1

"""Damped Gauss-Newton (Levenberg-Marquardt) minimizer.

One engine serves every fit in the package:

  * forward finite-difference Jacobian, relative step 1e-6 with
    per-parameter scale floors so tiny-magnitude parameters (delays in
    seconds) still get a usable step;
  * Marquardt diagonal scaling, lambda adapted by accept/reject;
  * box bounds enforced by clipping trial steps;
  * covariance from the column-scaled normal matrix, so the reported
    condition number is invariant under unit changes; a residual that
    ignores a parameter yields an infinite variance for it and flips
    the ill_conditioned flag rather than failing the fit.

Stopping: relative cost decrease below cost_tol on an accepted step, or
the scaled-gradient infinity norm below grad_tol.  Hitting max_iter
returns converged=False instead of raising; callers that require
convergence turn that into their own error.
"""

from __future__ import annotations

import math

import numpy as np

from .core import FitResult
from .errors import BoundsViolation

COND_LIMIT = 1e12


def _jacobian(residual, p, r0, rel_step, floors, lo, hi):
    m, k = len(r0), len(p)
    jac = np.empty((m, k))
    for j in range(k):
        step = rel_step * max(abs(p[j]), floors[j])
        pj = p.copy()
        if pj[j] + step > hi[j]:  # step backward at the upper bound
            step = -step
        pj[j] += step
        rj = np.asarray(residual(pj), dtype=float)
        jac[:, j] = (rj - r0) / step
    return jac


def _covariance(jac, res_norm, dof, scale):
    """(scaled-pinv of JtJ) * residual variance; inf rows for dead columns.

    With scale=False the residuals are taken to be in units of known
    measurement sigmas already, so the variance factor is 1 instead of
    the reduced chi-square; model misfit then widens the chi-square, not
    the quoted parameter errors.
    """
    k = jac.shape[1]
    a = jac.T @ jac
    d = np.sqrt(np.diag(a))
    dead = d == 0.0
    cov = np.zeros((k, k))
    ill = bool(dead.any())
    live = ~dead
    if live.any():
        dl = d[live]
        a_scaled = a[np.ix_(live, live)] / np.outer(dl, dl)
        u, s, vt = np.linalg.svd(a_scaled)
        cond = s[0] / s[-1] if s[-1] > 0 else math.inf
        if cond > COND_LIMIT:
            ill = True
        # pseudo-inverse with the same threshold, so near-dead directions
        # widen the reported errors instead of exploding them randomly
        s_inv = np.where(s > s[0] / COND_LIMIT, 1.0 / np.where(s > 0, s, 1.0), 0.0)
        inv_scaled = (vt.T * s_inv) @ u.T
        cov_live = inv_scaled / np.outer(dl, dl)
        variance = res_norm / dof if (scale and dof > 0) else 1.0
        cov[np.ix_(live, live)] = cov_live * variance
    for i in np.nonzero(dead)[0]:
        cov[i, i] = math.inf
    return cov, ill


def lm_minimize(residual, p0, bounds=None, param_names=None,
                x_scale=None, max_iter=200, rel_step=1e-6,
                cost_tol=1e-12, grad_tol=1e-10,
                scale_covariance=True) -> FitResult:
    """Minimize the sum of squared residuals of a vector-valued function.

    Parameters
    ----------
    residual : callable
        Maps a parameter vector to a 1-D residual array; must be finite
        at p0.
    p0 : array_like
        Starting point.
    bounds : sequence of (lo, hi), optional
        Per-parameter box; trial steps are clipped to it.
    param_names : sequence of str, optional
        Names for the FitResult; defaults to p0, p1, ...
    x_scale : array_like, optional
        Typical magnitudes used as finite-difference floors and for the
        scaled gradient test; defaults to 1.
    scale_covariance : bool, optional
        True (default) multiplies the covariance by the reduced
        chi-square, appropriate when the noise scale is unknown.  Pass
        False when the residuals are already divided by known
        measurement errors.
    """
    p = np.asarray(p0, dtype=float).copy()
    k = len(p)
    if param_names is None:
        param_names = tuple(f"p{i}" for i in range(k))
    param_names = tuple(param_names)
    if bounds is None:
        lo = np.full(k, -np.inf)
        hi = np.full(k, np.inf)
    else:
        lo = np.array([b[0] for b in bounds], dtype=float)
        hi = np.array([b[1] for b in bounds], dtype=float)
    if np.any(p < lo) or np.any(p > hi):
        raise BoundsViolation(
            f"starting point {p.tolist()} outside bounds")
    floors = np.ones(k) if x_scale is None else np.asarray(x_scale, dtype=float)

    r = np.asarray(residual(p), dtype=float)
    if not np.all(np.isfinite(r)):
        raise ValueError("residual is not finite at the starting point")
    cost = float(r @ r)
    m = len(r)

    lam = 1e-3
    converged = False
    message = "max_iter reached"
    it = 0
    jac = None
    for it in range(1, max_iter + 1):
        jac = _jacobian(residual, p, r, rel_step, floors, lo, hi)
        grad = jac.T @ r
        scale = np.maximum(np.abs(p), floors)
        if np.max(np.abs(grad * scale)) < grad_tol:
            converged = True
            message = "scaled gradient below tolerance"
            break
        a = jac.T @ jac
        diag = np.diag(a).copy()
        diag[diag == 0.0] = 1.0
        accepted = False
        for _ in range(60):
            try:
                delta = np.linalg.solve(a + lam * np.diag(diag), -grad)
            except np.linalg.LinAlgError:
                delta, *_ = np.linalg.lstsq(a + lam * np.diag(diag), -grad,
                                            rcond=None)
            p_try = np.clip(p + delta, lo, hi)
            step = p_try - p
            r_try = np.asarray(residual(p_try), dtype=float)
            if np.all(np.isfinite(r_try)):
                cost_try = float(r_try @ r_try)
                if cost_try < cost:
                    actual_dec = (cost - cost_try) / max(cost, 1e-300)
                    # decrease the quadratic model promises for this step;
                    # both must be tiny or we are just crawling under a
                    # large damping factor, not at a minimum
                    pred_dec = -(2.0 * grad @ step + step @ a @ step) \
                        / max(cost, 1e-300)
                    p, r, cost = p_try, r_try, cost_try
                    lam = max(lam / 3.0, 1e-14)
                    accepted = True
                    if actual_dec < cost_tol and abs(pred_dec) < cost_tol:
                        converged = True
                        message = "relative cost decrease below tolerance"
                    break
            lam *= 4.0
            if lam > 1e15:
                break
        if not accepted:
            # no downhill step: either at a minimum or the surface is flat
            converged = True
            message = "no downhill step available"
            break
        if converged:
            break

    if jac is None or not converged or message == "no downhill step available":
        jac = _jacobian(residual, p, r, rel_step, floors, lo, hi)
    cov, ill = _covariance(jac, cost, m - k, scale_covariance)
    return FitResult(
        param_names=param_names,
        values=p,
        covariance=cov,
        residual_norm=cost,
        dof=m - k,
        converged=converged,
        iterations=it,
        ill_conditioned=ill,
        message=message,
    )

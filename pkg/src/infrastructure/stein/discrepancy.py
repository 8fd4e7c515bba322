"""Stein kernel u_q and kernelized Stein discrepancy estimators.

    u_q(x, y) = S(x).S(y) k + S(x).grad_y k + S(y).grad_x k + tr(d^2 k / dx dy)

Pairwise quantities are evaluated by broadcasting rows against rows, so every
entry of a gram matrix is computed by the same expression as a single u_q call.
Reductions over pairs go through math.fsum, which makes the estimators exactly
invariant to the order of the rows.
"""

from __future__ import annotations

import logging
import math

import numpy as np

from domain.errors import InsufficientSamplesError, ShapeError
from domain.interfaces import SteinKernel, Target
from domain.models import Estimator, FloatArray, KsdEstimate
from infrastructure.kernels import RadialKernel

logger = logging.getLogger(__name__)


def _check_batch(target: Target, X: FloatArray, op: str, minimum: int) -> FloatArray:
    array = np.asarray(X, dtype=np.float64)
    if array.ndim != 2 or array.shape[1] != target.dim:
        raise ShapeError(op, [array.shape], f"expected (n, {target.dim})")
    if array.shape[0] < minimum:
        raise InsufficientSamplesError(op, minimum, array.shape[0])
    return array


def _combine(
    k: FloatArray,
    grad_x: FloatArray,
    grad_y: FloatArray,
    trace: FloatArray,
    score_x: FloatArray,
    score_y: FloatArray,
) -> FloatArray:
    # cross terms are added together first so that swapping x and y only swaps them
    score_term = k * np.sum(score_x * score_y, axis=-1)
    cross = np.sum(score_x * grad_y, axis=-1) + np.sum(score_y * grad_x, axis=-1)
    return score_term + cross + trace


def u_q(target: Target, kernel: SteinKernel, x: FloatArray, y: FloatArray) -> float:
    """Stein kernel at one pair of points."""
    xa = np.asarray(x, dtype=np.float64)
    ya = np.asarray(y, dtype=np.float64)
    if xa.shape != (target.dim,) or ya.shape != (target.dim,):
        raise ShapeError("u_q", [xa.shape, ya.shape], f"expected two points of dimension {target.dim}")
    value = _combine(
        np.asarray(kernel.evaluate(xa, ya)),
        kernel.grad_x(xa, ya),
        kernel.grad_y(xa, ya),
        np.asarray(kernel.trace_xy(xa, ya)),
        target.score(xa),
        target.score(ya),
    )
    return float(value)


def stein_gram(target: Target, kernel: SteinKernel, X: FloatArray) -> FloatArray:
    """(n, n) matrix of u_q(x_i, x_j); the kernel is used as given (no refit)."""
    batch = _check_batch(target, X, "stein_gram", 1)
    scores = target.score(batch)
    left = batch[:, None, :]
    right = batch[None, :, :]
    return _combine(
        np.asarray(kernel.evaluate(left, right)),
        kernel.grad_x(left, right),
        kernel.grad_y(left, right),
        np.asarray(kernel.trace_xy(left, right)),
        scores[:, None, :],
        scores[None, :, :],
    )


def ksd_u(target: Target, kernel: SteinKernel, X: FloatArray) -> KsdEstimate:
    """Unbiased U-statistic over distinct pairs; can be negative."""
    batch = _check_batch(target, X, "ksd_u", 2)
    n = batch.shape[0]
    gram = stein_gram(target, kernel.fitted(batch), batch)
    off_diagonal = gram[~np.eye(n, dtype=bool)]
    value = math.fsum(off_diagonal.tolist()) / (n * (n - 1))
    return KsdEstimate(value=value, n=n, estimator=Estimator.U_STATISTIC)


def ksd_v(target: Target, kernel: SteinKernel, X: FloatArray) -> KsdEstimate:
    """V-statistic over all pairs including the diagonal.

    n^2 V = n (n - 1) U + sum_i u_q(x_i, x_i). The gram matrix is positive
    semidefinite, so V is clamped at zero against rounding.
    """
    batch = _check_batch(target, X, "ksd_v", 1)
    n = batch.shape[0]
    gram = stein_gram(target, kernel.fitted(batch), batch)
    value = math.fsum(gram.ravel().tolist()) / (n * n)
    return KsdEstimate(value=max(value, 0.0), n=n, estimator=Estimator.V_STATISTIC)


def u_q_grad_x(target: Target, kernel: SteinKernel, x: FloatArray, y: FloatArray) -> FloatArray:
    """Gradient of u_q(x, y) in x for a translation-invariant kernel.

    Uses d^2 k / dx dx = -d^2 k / dx dy, which holds whenever k depends on x - y only.
    """
    xa = np.asarray(x, dtype=np.float64)
    ya = np.asarray(y, dtype=np.float64)
    if xa.shape != (target.dim,) or ya.shape != (target.dim,):
        raise ShapeError("u_q_grad_x", [xa.shape, ya.shape], f"expected two points of dimension {target.dim}")
    sx = target.score(xa)
    sy = target.score(ya)
    jac = target.score_jacobian(xa)
    k = float(kernel.evaluate(xa, ya))
    gx = kernel.grad_x(xa, ya)
    gy = kernel.grad_y(xa, ya)
    cross, trace_grad = kernel.grads_of_uq_terms(xa, ya)
    return (
        k * (jac.T @ sy)
        + float(sx @ sy) * gx
        + jac.T @ gy
        + cross @ (sx - sy)
        + trace_grad
    )


def _sample_grad_radial(
    kernel: RadialKernel, batch: FloatArray, scores: FloatArray, jacobians: FloatArray
) -> FloatArray:
    n, dim = batch.shape
    r = batch[:, None, :] - batch[None, :, :]  # r_ij = x_i - x_j
    s = np.sum(r * r, axis=-1)
    prof = kernel.profile(s)
    mask = 1.0 - np.eye(n)
    phi = prof.phi * mask
    d1 = prof.d1 * mask
    d2 = prof.d2 * mask
    d3 = prof.d3 * mask

    s_j = scores[None, :, :]
    s_i = scores[:, None, :]
    # J_i^T sum_j (phi s_j - 2 phi' r_ij)
    pulled = np.einsum("ij,jd->id", phi, scores) - 2.0 * np.einsum("ij,ijd->id", d1, r)
    jac_term = np.einsum("iab,ia->ib", jacobians, pulled)

    score_diff = s_j - s_i
    inner = np.einsum("id,jd->ij", scores, scores)
    radial = (
        2.0 * d1 * inner
        + 4.0 * d2 * np.sum(r * score_diff, axis=-1)
        - 4.0 * (dim + 2) * d2
        - 8.0 * s * d3
    )
    rest = 2.0 * np.einsum("ij,ijd->id", d1, score_diff) + np.einsum("ij,ijd->id", radial, r)
    return jac_term + rest


def ksd_sample_grad(target: Target, kernel: SteinKernel, X: FloatArray) -> FloatArray:
    """d ksd_u / d x_i for every row, with the kernel bandwidth held fixed.

    Radial kernels go through their scalar profile and never build per-pair d x d
    blocks; any other kernel falls back to summing u_q_grad_x over pairs.
    """
    batch = _check_batch(target, X, "ksd_sample_grad", 2)
    n = batch.shape[0]
    fitted = kernel.fitted(batch)
    scale = 2.0 / (n * (n - 1))
    if isinstance(fitted, RadialKernel):
        scores = target.score(batch)
        jacobians = target.score_jacobian(batch)
        return scale * _sample_grad_radial(fitted, batch, scores, jacobians)

    grads = np.zeros_like(batch)
    for i in range(n):
        for j in range(n):
            if i != j:
                grads[i] += u_q_grad_x(target, fitted, batch[i], batch[j])
    return scale * grads


__all__ = ["u_q", "u_q_grad_x", "stein_gram", "ksd_u", "ksd_v", "ksd_sample_grad"]

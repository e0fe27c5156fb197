"""Pure-numpy implementations of the hot kernels.

These are the fallback path selected by ``TORICOST_BACKEND=numpy`` (or when
numba is unavailable).  Semantics match ``_numba_impl`` within the stated
solver tolerances; bitwise agreement across backends is not guaranteed.
"""

from __future__ import annotations

import itertools

import numpy as np

BACKEND_NAME = "numpy"

_FD_EPS = 1e-7


def _fd_jacobian(field_fn, pts):
    """Central-difference Jacobian of a batched vector field, shape (N, d, d)."""
    n, d = pts.shape
    jac = np.empty((n, d, d))
    for j in range(d):
        step = _FD_EPS * np.maximum(1.0, np.abs(pts[:, j]))
        up = pts.copy()
        dn = pts.copy()
        up[:, j] += step
        dn[:, j] -= step
        jac[:, :, j] = (field_fn(up) - field_fn(dn)) / (2.0 * step)[:, None]
    return jac


def midpoint_flow(field_fn, t, step_size, newton_tol, max_iter, coords, angle_mask):
    """Implicit-midpoint flow of ``field_fn`` for time ``t`` on a batch of points.

    Fixed step with an exactly shortened final partial step.  Each point's
    Newton iteration stops on its own residual, so results do not depend on
    how the batch is composed.  Returns ``(coords_out, status)`` where status
    is 0 for success and 1 where the implicit solve failed.

    Parameters
    ----------
    field_fn : callable mapping (N, d) coordinate arrays to (N, d) velocities
    t : float, signed flow time
    coords : (N, d) array, not modified
    angle_mask : (d,) bool, coordinates to reduce modulo 2*pi after each step
    """
    y = np.array(coords, dtype=float)
    n, d = y.shape
    status = np.zeros(n, dtype=np.int32)
    if t == 0.0 or n == 0:
        return y, status

    two_pi = 2.0 * np.pi
    sign = 1.0 if t > 0 else -1.0
    remaining = abs(float(t))
    n_full = int(remaining / step_size)
    tail = remaining - n_full * step_size
    plan = [step_size] * n_full
    if tail > 1e-14:
        plan.append(tail)

    eye = np.eye(d)
    for h_abs in plan:
        h = sign * h_abs
        alive = status == 0
        y0 = y
        y1 = y0 + h * field_fn(y0)
        solved = ~alive  # dead points count as settled
        for _ in range(max_iter):
            mid = 0.5 * (y0 + y1)
            resid = y1 - y0 - h * field_fn(mid)
            bad = ~np.isfinite(resid).all(axis=1)
            if bad.any():
                status[bad & alive] = 1
                alive = status == 0
                solved |= bad
            err = np.abs(resid).max(axis=1)
            solved |= err < newton_tol
            active = ~solved
            if not active.any():
                break
            jac = eye[None, :, :] - 0.5 * h * _fd_jacobian(field_fn, mid[active])
            try:
                delta = np.linalg.solve(jac, resid[active][:, :, None])[:, :, 0]
            except np.linalg.LinAlgError:
                status[np.flatnonzero(active)] = 1
                break
            y1[active] = y1[active] - delta
        else:
            status[~solved & alive] = 1
        alive = status == 0
        y[alive] = y1[alive]
        if angle_mask.any():
            cols = y[:, angle_mask]
            y[:, angle_mask] = np.mod(cols, two_pi)
    return y, status


def monge_bruteforce(cost_matrix):
    """Exhaustive assignment minimum over all permutations, lexicographic order.

    Returns ``(best_sum, best_perm)`` where best_sum is the sum of matrix
    entries along the permutation (weights are applied by the caller).
    """
    c = np.asarray(cost_matrix, dtype=float)
    m = c.shape[0]
    rows = np.arange(m)
    if m == 1:
        return float(c[0, 0]), np.zeros(1, dtype=np.int64)
    perms = np.array(list(itertools.permutations(range(m))), dtype=np.int64)
    sums = c[rows[None, :], perms].sum(axis=1)
    best = int(np.argmin(sums))
    return float(sums[best]), perms[best].copy()


def sinkhorn_scaling(kernel, a, b, tol, max_iter):
    """Alternating marginal scaling on a Gibbs kernel.

    Returns ``(plan, n_iter, defect)``; defect is the max-norm marginal error.
    """
    u = np.ones_like(a)
    v = np.ones_like(b)
    defect = np.inf
    it = 0
    for it in range(1, max_iter + 1):
        ku = kernel.T @ u
        v = b / np.where(ku > 0, ku, 1.0)
        kv = kernel @ v
        u = a / np.where(kv > 0, kv, 1.0)
        plan = u[:, None] * kernel * v[None, :]
        defect = max(
            np.abs(plan.sum(axis=1) - a).max(),
            np.abs(plan.sum(axis=0) - b).max(),
        )
        if defect < tol:
            break
    plan = u[:, None] * kernel * v[None, :]
    return plan, it, float(defect)


def _logsumexp_rows(mat):
    mx = mat.max(axis=1)
    return mx + np.log(np.exp(mat - mx[:, None]).sum(axis=1))


def sinkhorn_log(cost, a, b, epsilon, tol, max_iter):
    """Log-domain scaling iterations, safe for small epsilon.

    Returns ``(plan, n_iter, defect)``.
    """
    log_a = np.log(a)
    log_b = np.log(b)
    f = np.zeros_like(a)
    g = np.zeros_like(b)
    defect = np.inf
    it = 0
    for it in range(1, max_iter + 1):
        g = epsilon * (log_b - _logsumexp_rows((f[:, None] - cost).T / epsilon))
        f = epsilon * (log_a - _logsumexp_rows((g[None, :] - cost) / epsilon))
        plan = np.exp((f[:, None] + g[None, :] - cost) / epsilon)
        defect = max(
            np.abs(plan.sum(axis=1) - a).max(),
            np.abs(plan.sum(axis=0) - b).max(),
        )
        if defect < tol:
            break
    plan = np.exp((f[:, None] + g[None, :] - cost) / epsilon)
    return plan, it, float(defect)

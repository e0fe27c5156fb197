"""Numba-compiled hot kernels.

Importing this module requires numba; the dispatcher in ``kernels`` only
loads it when the numba backend is selected.  The flow kernel works on
components encoded as ``(code, pair, a, b)`` so the whole Newton loop stays
in nopython mode:

    code 1:  h = a*p + b*p^2          on Darboux pair (q, p)
    code 2:  h = a*cos(q)
    code 3:  h = a*sqrt(1-p^2)*cos(q)
    code 4:  h = a*cos(q) + b*sin(p)

Each encoded component moves only its own pair, so the implicit midpoint
solve is a closed-form 2x2 Newton step.
"""

from __future__ import annotations

import numpy as np
from numba import njit, prange

BACKEND_NAME = "numba"

TWO_PI = 2.0 * np.pi


@njit(cache=True, inline="always")
def _pair_field(code, a, b, q, p):
    # returns (dq/dt, dp/dt) = (-dh/dp, dh/dq)
    if code == 1:
        return -(a + 2.0 * b * p), 0.0
    if code == 2:
        return 0.0, -a * np.sin(q)
    if code == 3:
        s2 = 1.0 - p * p
        if s2 < 1e-30:
            s2 = 1e-30
        s = np.sqrt(s2)
        return a * p * np.cos(q) / s, -a * s * np.sin(q)
    # code 4
    return -b * np.cos(p), -a * np.sin(q)


@njit(cache=True)
def _step_pair(code, a, b, q, p, h, newton_tol, max_iter):
    """One implicit-midpoint step on a single Darboux pair.

    Returns (q1, p1, ok)."""
    fq, fp = _pair_field(code, a, b, q, p)
    q1 = q + h * fq
    p1 = p + h * fp
    for _ in range(max_iter):
        mq = 0.5 * (q + q1)
        mp = 0.5 * (p + p1)
        fq, fp = _pair_field(code, a, b, mq, mp)
        gq = q1 - q - h * fq
        gp = p1 - p - h * fp
        if not (np.isfinite(gq) and np.isfinite(gp)):
            return q1, p1, False
        if max(abs(gq), abs(gp)) < newton_tol:
            return q1, p1, True
        # Jacobian of the residual: I - (h/2) dF/d(mid), by central differences
        eq = 1e-7 * max(1.0, abs(mq))
        ep = 1e-7 * max(1.0, abs(mp))
        fqa, fpa = _pair_field(code, a, b, mq + eq, mp)
        fqb, fpb = _pair_field(code, a, b, mq - eq, mp)
        j00 = 1.0 - 0.5 * h * (fqa - fqb) / (2.0 * eq)
        j10 = -0.5 * h * (fpa - fpb) / (2.0 * eq)
        fqa, fpa = _pair_field(code, a, b, mq, mp + ep)
        fqb, fpb = _pair_field(code, a, b, mq, mp - ep)
        j01 = -0.5 * h * (fqa - fqb) / (2.0 * ep)
        j11 = 1.0 - 0.5 * h * (fpa - fpb) / (2.0 * ep)
        det = j00 * j11 - j01 * j10
        if abs(det) < 1e-300:
            return q1, p1, False
        q1 -= (j11 * gq - j01 * gp) / det
        p1 -= (-j10 * gq + j00 * gp) / det
    return q1, p1, False


@njit(cache=True, parallel=True)
def midpoint_flow_encoded(code, pair, a, b, t, step_size, newton_tol, max_iter,
                          coords, q_is_angle, p_is_angle):
    """Implicit-midpoint flow for one encoded component on a batch of points.

    coords is (N, 2n) and is modified in place on the component's pair only.
    Returns an int32 status array (0 ok, 1 Newton failure)."""
    n_pts = coords.shape[0]
    status = np.zeros(n_pts, dtype=np.int32)
    if t == 0.0:
        return status
    sign = 1.0 if t > 0.0 else -1.0
    remaining = abs(t)
    n_full = int(remaining / step_size)
    tail = remaining - n_full * step_size
    n_steps = n_full + (1 if tail > 1e-14 else 0)
    iq = 2 * pair
    ip = iq + 1
    for i in prange(n_pts):
        q = coords[i, iq]
        p = coords[i, ip]
        ok = True
        for s in range(n_steps):
            h_abs = step_size if s < n_full else tail
            q, p, ok = _step_pair(code, a, b, q, p, sign * h_abs,
                                  newton_tol, max_iter)
            if not ok:
                break
            if q_is_angle:
                q = q % TWO_PI
            if p_is_angle:
                p = p % TWO_PI
        if ok:
            coords[i, iq] = q
            coords[i, ip] = p
        else:
            status[i] = 1
    return status


@njit(cache=True)
def _next_permutation(perm):
    """In-place lexicographic successor; False once the last one is reached."""
    m = perm.shape[0]
    i = m - 2
    while i >= 0 and perm[i] >= perm[i + 1]:
        i -= 1
    if i < 0:
        return False
    j = m - 1
    while perm[j] <= perm[i]:
        j -= 1
    perm[i], perm[j] = perm[j], perm[i]
    lo = i + 1
    hi = m - 1
    while lo < hi:
        perm[lo], perm[hi] = perm[hi], perm[lo]
        lo += 1
        hi -= 1
    return True


@njit(cache=True)
def monge_bruteforce(cost_matrix):
    m = cost_matrix.shape[0]
    perm = np.arange(m)
    best_perm = perm.copy()
    best = 0.0
    for i in range(m):
        best += cost_matrix[i, perm[i]]
    while _next_permutation(perm):
        s = 0.0
        for i in range(m):
            s += cost_matrix[i, perm[i]]
        if s < best:
            best = s
            best_perm[:] = perm
    return best, best_perm


@njit(cache=True)
def sinkhorn_scaling(kernel, a, b, tol, max_iter):
    m = a.shape[0]
    k = b.shape[0]
    u = np.ones(m)
    v = np.ones(k)
    defect = np.inf
    it = 0
    plan = np.empty((m, k))
    for it in range(1, max_iter + 1):
        for j in range(k):
            s = 0.0
            for i in range(m):
                s += kernel[i, j] * u[i]
            v[j] = b[j] / s if s > 0.0 else b[j]
        for i in range(m):
            s = 0.0
            for j in range(k):
                s += kernel[i, j] * v[j]
            u[i] = a[i] / s if s > 0.0 else a[i]
        defect = 0.0
        for i in range(m):
            row = 0.0
            for j in range(k):
                plan[i, j] = u[i] * kernel[i, j] * v[j]
                row += plan[i, j]
            if abs(row - a[i]) > defect:
                defect = abs(row - a[i])
        for j in range(k):
            col = 0.0
            for i in range(m):
                col += plan[i, j]
            if abs(col - b[j]) > defect:
                defect = abs(col - b[j])
        if defect < tol:
            break
    return plan, it, defect


@njit(cache=True, inline="always")
def _lse(vec):
    mx = vec[0]
    for i in range(1, vec.shape[0]):
        if vec[i] > mx:
            mx = vec[i]
    s = 0.0
    for i in range(vec.shape[0]):
        s += np.exp(vec[i] - mx)
    return mx + np.log(s)


@njit(cache=True)
def sinkhorn_log(cost, a, b, epsilon, tol, max_iter):
    m = a.shape[0]
    k = b.shape[0]
    f = np.zeros(m)
    g = np.zeros(k)
    log_a = np.log(a)
    log_b = np.log(b)
    scratch_m = np.empty(m)
    scratch_k = np.empty(k)
    plan = np.empty((m, k))
    defect = np.inf
    it = 0
    for it in range(1, max_iter + 1):
        for j in range(k):
            for i in range(m):
                scratch_m[i] = (f[i] - cost[i, j]) / epsilon
            g[j] = epsilon * (log_b[j] - _lse(scratch_m))
        for i in range(m):
            for j in range(k):
                scratch_k[j] = (g[j] - cost[i, j]) / epsilon
            f[i] = epsilon * (log_a[i] - _lse(scratch_k))
        defect = 0.0
        for i in range(m):
            row = 0.0
            for j in range(k):
                plan[i, j] = np.exp((f[i] + g[j] - cost[i, j]) / epsilon)
                row += plan[i, j]
            if abs(row - a[i]) > defect:
                defect = abs(row - a[i])
        for j in range(k):
            col = 0.0
            for i in range(m):
                col += plan[i, j]
            if abs(col - b[j]) > defect:
                defect = abs(col - b[j])
        if defect < tol:
            break
    return plan, it, defect

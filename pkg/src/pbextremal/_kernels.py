"""Hot numeric kernels.

Everything here is loop-style float64 code compiled by numba when the
numba backend is active (see :mod:`pbextremal._backend`).  Linear solves
are hand-rolled Gaussian elimination: the systems are tiny (at most the
number of prescribed cumulants per side) and this keeps both backends
bit-identical and free of LAPACK dispatch overhead.
"""

from __future__ import annotations

import numpy as np

from ._backend import jit


@jit
def convolve_bernoulli(p):
    """Pmf over {0,..,n} of a sum of independent Bernoulli(p[i]).

    In-place descending-index update of one weight row: O(n^2) time,
    O(n) space.  Weights stay nonnegative by construction.
    """
    n = p.shape[0]
    w = np.zeros(n + 1)
    w[0] = 1.0
    for i in range(n):
        pi = p[i]
        qi = 1.0 - pi
        for j in range(i + 1, 0, -1):
            w[j] = w[j] * qi + w[j - 1] * pi
        w[0] *= qi
    return w


@jit
def expect_convolution(p, g):
    """E[g(X)] for X the Bernoulli-convolution count of p; g has length n+1."""
    w = convolve_bernoulli(p)
    s = 0.0
    for x in range(w.shape[0]):
        s += w[x] * g[x]
    return s


@jit
def bc_gradient(p, dg, grad):
    """d/dp_i of E[g(X)], via leave-one-out convolutions.

    dg[x] = g[x+1] - g[x] for x = 0..n-1; grad must have length n.
    """
    n = p.shape[0]
    w = np.empty(n)
    for i in range(n):
        for x in range(n):
            w[x] = 0.0
        w[0] = 1.0
        m = 0
        for j in range(n):
            if j == i:
                continue
            pj = p[j]
            qj = 1.0 - pj
            for t in range(m + 1, 0, -1):
                w[t] = w[t] * qj + w[t - 1] * pj
            w[0] *= qj
            m += 1
        s = 0.0
        for x in range(n):
            s += w[x] * dg[x]
        grad[i] = s


@jit
def power_sums_fill(x, out):
    """out[l-1] = sum_i x[i]^l for l = 1..len(out)."""
    r = out.shape[0]
    for l in range(r):
        out[l] = 0.0
    for i in range(x.shape[0]):
        t = 1.0
        for l in range(r):
            t *= x[i]
            out[l] += t


@jit
def lin_solve(A, b):
    """Solve A x = b by Gaussian elimination with partial pivoting.

    Returns (x, ok); ok is False when a pivot vanishes.  A and b are
    left untouched.
    """
    n = A.shape[0]
    M = A.copy()
    x = b.copy()
    for k in range(n):
        piv = k
        best = abs(M[k, k])
        for i in range(k + 1, n):
            a = abs(M[i, k])
            if a > best:
                best = a
                piv = i
        if best < 1e-300:
            return x, False
        if piv != k:
            for j in range(k, n):
                t = M[k, j]
                M[k, j] = M[piv, j]
                M[piv, j] = t
            t = x[k]
            x[k] = x[piv]
            x[piv] = t
        for i in range(k + 1, n):
            f = M[i, k] / M[k, k]
            if f != 0.0:
                for j in range(k, n):
                    M[i, j] -= f * M[k, j]
                x[i] -= f * x[k]
    for i in range(n - 1, -1, -1):
        s = x[i]
        for j in range(i + 1, n):
            s -= M[i, j] * x[j]
        x[i] = s / M[i, i]
    return x, True


@jit
def _block_resid(q, mults, d, F):
    """F[l] = sum_j mults[j] q[j]^(l+1) - d[l]; returns max |F|."""
    k = q.shape[0]
    r = d.shape[0]
    for l in range(r):
        F[l] = -d[l]
    for j in range(k):
        t = 1.0
        for l in range(r):
            t *= q[j]
            F[l] += mults[j] * t
    m = 0.0
    for l in range(r):
        a = abs(F[l])
        if a > m:
            m = a
    return m


@jit
def newton_block_scan(mults, d, grid_m, target_tol, accept_tol, max_iter, max_halvings):
    """Roots of the square system sum_j mults[j] q_j^l = d[l], l = 1..k.

    Damped Newton from a uniform grid of grid_m^k start points.  A run is
    recorded when its final residual is at most accept_tol (iteration aims
    for target_tol).  Returns (roots, count); roots may repeat and may lie
    slightly outside [0,1] — the caller filters and dedups.
    """
    k = mults.shape[0]
    n_starts = 1
    for _ in range(k):
        n_starts *= grid_m
    roots = np.empty((n_starts, k))
    found = 0
    q = np.empty(k)
    qn = np.empty(k)
    F = np.empty(k)
    Fn = np.empty(k)
    J = np.empty((k, k))
    for s_idx in range(n_starts):
        t_idx = s_idx
        for j in range(k):
            q[j] = ((t_idx % grid_m) + 0.5) / grid_m
            t_idx //= grid_m
        fn = _block_resid(q, mults, d, F)
        for _ in range(max_iter):
            if fn <= target_tol:
                break
            for j in range(k):
                t = 1.0
                for l in range(k):
                    J[l, j] = (l + 1) * mults[j] * t
                    t *= q[j]
            for l in range(k):
                F[l] = -F[l]
            step, ok = lin_solve(J, F)
            if not ok:
                break
            lam = 1.0
            improved = False
            for _ in range(max_halvings):
                for j in range(k):
                    qn[j] = q[j] + lam * step[j]
                fnn = _block_resid(qn, mults, d, Fn)
                if fnn < fn:
                    for j in range(k):
                        q[j] = qn[j]
                    for l in range(k):
                        F[l] = Fn[l]
                    fn = fnn
                    improved = True
                    break
                lam *= 0.5
            if not improved:
                break
            diverged = False
            for j in range(k):
                if q[j] < -1.0 or q[j] > 2.0:
                    diverged = True
            if diverged:
                break
        if fn <= accept_tol:
            for j in range(k):
                roots[found, j] = q[j]
            found += 1
    return roots, found


@jit
def restore_power_sums(p, s_tgt, tol, max_iter):
    """Drive p (in place, clipped to [0,1]^n) onto {S_l(p) = s_tgt[l-1]}.

    Damped Gauss-Newton with least-norm steps (normal equations on the
    constraint side, tiny ridge against rank loss).  True on success, i.e.
    max residual <= tol; False when the iteration stalls or runs out.
    """
    n = p.shape[0]
    r = s_tgt.shape[0]
    if r == 0:
        return True
    F = np.empty(r)
    Fn = np.empty(r)
    JJt = np.empty((r, r))
    T = np.empty(2 * r - 1)
    delta = np.empty(n)
    pn = np.empty(n)
    fn = _ps_resid(p, s_tgt, F)
    for _ in range(max_iter):
        if fn <= tol:
            return True
        for k in range(2 * r - 1):
            T[k] = 0.0
        for i in range(n):
            t = 1.0
            for k in range(2 * r - 1):
                T[k] += t
                t *= p[i]
        trace = 0.0
        for l in range(r):
            for m in range(r):
                JJt[l, m] = (l + 1.0) * (m + 1.0) * T[l + m]
            trace += JJt[l, l]
        ridge = 1e-12 * (1.0 + trace / r)
        for l in range(r):
            JJt[l, l] += ridge
            F[l] = -F[l]
        y, ok = lin_solve(JJt, F)
        if not ok:
            return False
        for i in range(n):
            t = 1.0
            di = 0.0
            for l in range(r):
                di += (l + 1.0) * t * y[l]
                t *= p[i]
            delta[i] = di
        lam = 1.0
        improved = False
        for _ in range(30):
            for i in range(n):
                v = p[i] + lam * delta[i]
                if v < 0.0:
                    v = 0.0
                elif v > 1.0:
                    v = 1.0
                pn[i] = v
            fnn = _ps_resid(pn, s_tgt, Fn)
            if fnn < fn * (1.0 - 1e-9) or fnn <= tol:
                for i in range(n):
                    p[i] = pn[i]
                for l in range(r):
                    F[l] = Fn[l]
                fn = fnn
                improved = True
                break
            lam *= 0.5
        if not improved:
            return False
    return fn <= tol


@jit
def _ps_resid(p, s_tgt, F):
    """F[l] = S_{l+1}(p) - s_tgt[l]; returns max |F|."""
    r = s_tgt.shape[0]
    for l in range(r):
        F[l] = -s_tgt[l]
    for i in range(p.shape[0]):
        t = 1.0
        for l in range(r):
            t *= p[i]
            F[l] += t
    m = 0.0
    for l in range(r):
        a = abs(F[l])
        if a > m:
            m = a
    return m


@jit
def oracle_scan(starts, g, dg, s_tgt, sign, proj_tol, proj_iters, ascent_steps, step_init, min_step):
    """Multistart projected search for an extreme E[g] under power-sum constraints.

    Each row of starts is projected onto the constraint set, then polished
    by projected gradient ascent on sign * E[g] with constraint restoration
    after every step and a halving step-size schedule.  Gradient ascent
    approaches active box faces only asymptotically, so each start finishes
    with a snap pass: near-boundary coordinates are pinned to {0,1}, the
    free ones re-restored against the correspondingly reduced targets, and
    the result kept when it improves.  Returns (found, value, best_p); ties
    keep the earliest start, so output is a deterministic function of the
    inputs.
    """
    n_starts, n = starts.shape
    r_cons = s_tgt.shape[0]
    snap_levels = np.array([0.15, 0.05, 0.01, 0.001])
    best_val = 0.0
    best_p = np.zeros(n)
    found = False
    p = np.empty(n)
    cand = np.empty(n)
    grad = np.empty(n)
    s_red = np.empty(r_cons)
    J = np.empty((r_cons, n))
    JJt = np.empty((r_cons, r_cons))
    rhs = np.empty(r_cons)
    for b in range(n_starts):
        for i in range(n):
            p[i] = starts[b, i]
        if not restore_power_sums(p, s_tgt, proj_tol, proj_iters):
            continue
        v = expect_convolution(p, g) * sign
        step = step_init
        for _ in range(ascent_steps):
            bc_gradient(p, dg, grad)
            if r_cons > 0:
                # project onto the constraint tangent space so the move is
                # not immediately cancelled by restoration
                for i in range(n):
                    t = 1.0
                    for l in range(r_cons):
                        J[l, i] = (l + 1.0) * t
                        t *= p[i]
                trace = 0.0
                for l in range(r_cons):
                    for m in range(r_cons):
                        acc = 0.0
                        for i in range(n):
                            acc += J[l, i] * J[m, i]
                        JJt[l, m] = acc
                    trace += JJt[l, l]
                for l in range(r_cons):
                    JJt[l, l] += 1e-12 * (1.0 + trace / r_cons)
                    acc = 0.0
                    for i in range(n):
                        acc += J[l, i] * grad[i]
                    rhs[l] = acc
                y, ok = lin_solve(JJt, rhs)
                if ok:
                    for i in range(n):
                        acc = 0.0
                        for l in range(r_cons):
                            acc += J[l, i] * y[l]
                        grad[i] -= acc
            gmax = 0.0
            for i in range(n):
                a = abs(grad[i])
                if a > gmax:
                    gmax = a
            if gmax < 1e-14:
                break
            # normalised direction: step is the actual travel distance, so
            # flat objectives are climbed as fast as steep ones
            for i in range(n):
                t = p[i] + step * sign * grad[i] / gmax
                if t < 0.0:
                    t = 0.0
                elif t > 1.0:
                    t = 1.0
                cand[i] = t
            accepted = False
            if restore_power_sums(cand, s_tgt, proj_tol, proj_iters):
                vc = expect_convolution(cand, g) * sign
                if vc > v:
                    for i in range(n):
                        p[i] = cand[i]
                    v = vc
                    accepted = True
            if accepted:
                # let the step recover so progress is not permanently throttled
                step *= 2.0
                if step > step_init:
                    step = step_init
            else:
                step *= 0.5
                if step < min_step:
                    break
        for _snap_pass in range(2):
            for ti in range(snap_levels.shape[0]):
                thresh = snap_levels[ti]
                n_snap = 0
                ones = 0
                for i in range(n):
                    if p[i] < thresh or p[i] > 1.0 - thresh:
                        n_snap += 1
                        if p[i] > 0.5:
                            ones += 1
                if n_snap == 0:
                    continue
                free = np.empty(n - n_snap)
                jf = 0
                for i in range(n):
                    if not (p[i] < thresh or p[i] > 1.0 - thresh):
                        free[jf] = p[i]
                        jf += 1
                for l in range(r_cons):
                    s_red[l] = s_tgt[l] - ones
                if not restore_power_sums(free, s_red, proj_tol, proj_iters):
                    continue
                jf = 0
                for i in range(n):
                    if p[i] < thresh:
                        cand[i] = 0.0
                    elif p[i] > 1.0 - thresh:
                        cand[i] = 1.0
                    else:
                        cand[i] = free[jf]
                        jf += 1
                vc = expect_convolution(cand, g) * sign
                if vc > v:
                    for i in range(n):
                        p[i] = cand[i]
                    v = vc
        if (not found) or v > best_val:
            best_val = v
            for i in range(n):
                best_p[i] = p[i]
            found = True
    return found, best_val * sign, best_p

"""Numba kernels for the exact solvers.

Both kernels minimise

    H(s) = -sum_e J_e s_a s_b - sum_v h_v s_v

subject to pinned spins (``pin[v] != 0``) and forced edge signs
(``force[e] != 0`` requires s_a s_b == force[e]). Each returns the lowest and
the second-lowest energy over distinct admissible configurations together with
a minimising configuration. Spin bit 0 means +1, bit 1 means -1.
"""

import numpy as np
from numba import njit

INF = np.inf


@njit(cache=True)
def _ctz(x):
    n = 0
    while (x & 1) == 0:
        x >>= 1
        n += 1
    return n


@njit(cache=True)
def enumerate_min(nbr_ptr, nbr_idx, nbr_J, nbr_force, h, pin, fix_first):
    """Gray-code enumeration over the free spins with O(degree) updates."""
    n = h.shape[0]
    spins = np.ones(n, dtype=np.int8)
    free = np.empty(n, dtype=np.int64)
    m = 0
    for v in range(n):
        if pin[v] != 0:
            spins[v] = pin[v]
        else:
            free[m] = v
            m += 1
    start = 1 if (fix_first and m > 0) else 0
    k = m - start

    energy = 0.0
    viol = 0
    for v in range(n):
        energy -= h[v] * spins[v]
        for p in range(nbr_ptr[v], nbr_ptr[v + 1]):
            u = nbr_idx[p]
            if u > v:
                prod = spins[v] * spins[u]
                energy -= nbr_J[p] * prod
                if nbr_force[p] != 0 and prod != nbr_force[p]:
                    viol += 1

    best = INF
    second = INF
    pattern = np.int64(0)
    best_pattern = np.int64(0)
    if viol == 0:
        best = energy
    total = np.int64(1) << k
    for step in range(1, total):
        bit = _ctz(step)
        v = free[start + bit]
        sv = spins[v]
        local = h[v]
        for p in range(nbr_ptr[v], nbr_ptr[v + 1]):
            u = nbr_idx[p]
            local += nbr_J[p] * spins[u]
            f = nbr_force[p]
            if f != 0:
                if sv * spins[u] != f:
                    viol -= 1
                else:
                    viol += 1
        energy += 2.0 * sv * local
        spins[v] = -sv
        pattern ^= np.int64(1) << bit
        if viol == 0:
            if energy < best:
                second = best
                best = energy
                best_pattern = pattern
            elif energy < second:
                second = energy

    out = np.ones(n, dtype=np.int8)
    for v in range(n):
        if pin[v] != 0:
            out[v] = pin[v]
    for b in range(k):
        if (best_pattern >> b) & 1:
            out[free[start + b]] = -1
    return best, second, out


@njit(cache=True)
def _spin(state, j):
    return 1 - 2 * ((state >> j) & 1)


@njit(cache=True)
def _row0_energy(f, W, Jr, h, pin, fr, per1):
    e = 0.0
    for j in range(W):
        s = _spin(f, j)
        if pin[0, j] != 0 and pin[0, j] != s:
            return INF
        e -= h[0, j] * s
        if j > 0:
            sl = _spin(f, j - 1)
            if fr[0, j - 1] != 0 and s * sl != fr[0, j - 1]:
                return INF
            e -= Jr[0, j - 1] * s * sl
        if j == W - 1 and per1:
            s0 = _spin(f, 0)
            if fr[0, W - 1] != 0 and s * s0 != fr[0, W - 1]:
                return INF
            e -= Jr[0, W - 1] * s * s0
    return e


@njit(cache=True)
def _merge(b1, b2, bc, v1, v2, ob):
    """Fold candidate pair (v1 <= v2) from predecessor bit ``ob`` into top-2 (b1, b2)."""
    if v1 < b1:
        return v1, min(b1, v2), ob
    return b1, min(b2, v1), bc


@njit(cache=True)
def _dp_core(Jd, Jr, h, pin, fd, fr, per0, per1, f, record, choice):
    """One frontier sweep. ``f < 0``: open transfer axis, start from nothing.
    ``f >= 0``: row 0 fixed to state ``f`` (periodic transfer axis).

    The two frontier states that differ only in bit j share their two
    predecessors, so each pair is updated in place.
    """
    Lx, W = h.shape
    S = 1 << W
    dp1 = np.full(S, INF)
    dp2 = np.full(S, INF)
    if f < 0:
        dp1[0] = 0.0
        start_v = 0
    else:
        e0 = _row0_energy(f, W, Jr, h, pin, fr, per1)
        if e0 == INF:
            return INF, INF, -1
        dp1[f] = e0
        start_v = W
    for v in range(start_v, Lx * W):
        i = v // W
        j = v % W
        bj = 1 << j
        p_ij = pin[i, j]
        hv = h[i, j]
        has_up = i > 0
        ju = Jd[i - 1, j] if has_up else 0.0
        fu = fd[i - 1, j] if has_up else 0
        has_left = j > 0
        jl = Jr[i, j - 1] if has_left else 0.0
        fl = fr[i, j - 1] if has_left else 0
        has_wrap = per1 and j == W - 1
        jw = Jr[i, W - 1] if has_wrap else 0.0
        fw = fr[i, W - 1] if has_wrap else 0
        has_first = per0 and f >= 0 and i == Lx - 1
        jf = Jd[Lx - 1, j] if has_first else 0.0
        ff = fd[Lx - 1, j] if has_first else 0
        sf = _spin(f, j) if has_first else 1
        for p in range(S):
            if p & bj:
                continue
            q = p | bj
            a1 = dp1[p]
            a2 = dp2[p]
            b1_ = dp1[q] if has_up else INF
            b2_ = dp2[q] if has_up else INF
            sl = _spin(p, j - 1) if has_left else 1
            s0 = _spin(p, 0) if has_wrap else 1
            # field on the new spin from already-placed neighbours except "up"
            H = hv + jl * sl + jw * s0 + jf * sf
            for s in (1, -1):
                n1 = INF
                n2 = INF
                nc = 0
                ok = p_ij == 0 or p_ij == s
                if ok and has_left and fl != 0 and s * sl != fl:
                    ok = False
                if ok and has_wrap and fw != 0 and s * s0 != fw:
                    ok = False
                if ok and has_first and ff != 0 and s * sf != ff:
                    ok = False
                if ok:
                    base = -s * H
                    if a1 < INF and not (has_up and fu != 0 and s != fu):
                        c = base - ju * s
                        n1, n2, nc = _merge(n1, n2, nc, a1 + c, a2 + c, 0)
                    if b1_ < INF and not (fu != 0 and -s != fu):
                        c = base + ju * s
                        n1, n2, nc = _merge(n1, n2, nc, b1_ + c, b2_ + c, 1)
                ns = p if s == 1 else q
                if record:
                    choice[v, ns] = nc
                if s == 1:
                    t1 = n1
                    t2 = n2
                else:
                    dp1[q] = n1
                    dp2[q] = n2
            dp1[p] = t1
            dp2[p] = t2
    best = INF
    second = INF
    best_state = -1
    for ns in range(S):
        v1 = dp1[ns]
        v2 = dp2[ns]
        if v1 < best:
            second = min(best, v2)
            best = v1
            best_state = ns
        else:
            second = min(second, v1)
    return best, second, best_state


@njit(cache=True)
def column_dp_min(Jd, Jr, h, pin, fd, fr, per0, per1):
    """Exact minimisation on an (Lx, W) grid by DP over the W-spin frontier.

    ``Jd[i, j]`` couples (i, j)-(i+1, j) (wrapping when ``per0``), ``Jr[i, j]``
    couples (i, j)-(i, j+1) (wrapping when ``per1``). A periodic transfer axis
    loops the sweep over all admissible first-row states.
    """
    Lx, W = h.shape
    S = 1 << W
    choice = np.zeros((Lx * W, S), dtype=np.uint8)
    if not per0:
        best, second, state = _dp_core(Jd, Jr, h, pin, fd, fr, per0, per1, -1, True, choice)
        f_best = -1
        start_v = 0
    else:
        best, second, f_best = _dp_periodic_batch(Jd, Jr, h, pin, fd, fr, per1)
        if f_best < 0:
            return best, second, np.zeros(Lx * W, dtype=np.int8)
        _, _, state = _dp_core(Jd, Jr, h, pin, fd, fr, per0, per1, f_best, True, choice)
        start_v = W
    out = np.ones(Lx * W, dtype=np.int8)
    if state < 0:
        return best, second, out
    for v in range(Lx * W - 1, start_v - 1, -1):
        j = v % W
        out[v] = _spin(state, j)
        ob = choice[v, state]
        state = (state & ~(1 << j)) | (ob << j)
    if f_best >= 0:
        for j in range(W):
            out[j] = _spin(f_best, j)
    return best, second, out


@njit(cache=True)
def _dp_periodic_batch(Jd, Jr, h, pin, fd, fr, per1):
    """Top-2 energies over all first-row states (periodic transfer axis).

    First-row states are processed in blocks; within a block dp[state, k]
    holds the sweep with row 0 fixed to ``fs[k]`` and the innermost loop runs
    over k so the merge arithmetic vectorises while the block stays in cache.
    """
    Lx, W = h.shape
    S = 1 << W
    fs_list = []
    e0_list = []
    for f in range(S):
        e0 = _row0_energy(f, W, Jr, h, pin, fr, per1)
        if e0 < INF:
            fs_list.append(f)
            e0_list.append(e0)
    n_f = len(fs_list)
    fs_all = np.empty(n_f, dtype=np.int64)
    e0_all = np.empty(n_f)
    for k in range(n_f):
        fs_all[k] = fs_list[k]
        e0_all[k] = e0_list[k]
    block = 16
    best = INF
    second = INF
    f_best = -1
    for b0 in range(0, n_f, block):
        b1_ = min(n_f, b0 + block)
        v1, v2, fb = _dp_block(Jd, Jr, h, pin, fd, fr, per1, fs_all[b0:b1_], e0_all[b0:b1_])
        if v1 < best:
            second = min(best, v2)
            best = v1
            f_best = fb
        else:
            second = min(second, v1)
    return best, second, f_best


@njit(cache=True)
def _dp_block(Jd, Jr, h, pin, fd, fr, per1, fs, e0s):
    Lx, W = h.shape
    S = 1 << W
    F = fs.shape[0]
    dp1 = np.full((S, F), INF)
    dp2 = np.full((S, F), INF)
    for k in range(F):
        dp1[fs[k], k] = e0s[k]
    # per-k additive terms for s = +1 and s = -1 (wrap to row 0 on the last row)
    fplus = np.zeros(F)
    fminus = np.zeros(F)
    n1p = np.empty(F)
    n2p = np.empty(F)
    n1q = np.empty(F)
    n2q = np.empty(F)
    for v in range(W, Lx * W):
        i = v // W
        j = v % W
        bj = 1 << j
        p_ij = pin[i, j]
        hv = h[i, j]
        ju = Jd[i - 1, j]
        fu = fd[i - 1, j]
        has_left = j > 0
        jl = Jr[i, j - 1] if has_left else 0.0
        fl = fr[i, j - 1] if has_left else 0
        has_wrap = per1 and j == W - 1
        jw = Jr[i, W - 1] if has_wrap else 0.0
        fw = fr[i, W - 1] if has_wrap else 0
        last = i == Lx - 1
        for k in range(F):
            if last:
                sf = 1 - 2 * ((fs[k] >> j) & 1)
                jf = Jd[Lx - 1, j]
                ff = fd[Lx - 1, j]
                fplus[k] = -jf * sf + (INF if (ff != 0 and sf != ff) else 0.0)
                fminus[k] = jf * sf + (INF if (ff != 0 and -sf != ff) else 0.0)
            else:
                fplus[k] = 0.0
                fminus[k] = 0.0
        pa_plus = 0.0 if (fu == 0 or fu == 1) else INF
        pb_plus = 0.0 if (fu == 0 or fu == -1) else INF
        pa_minus = pb_plus
        pb_minus = pa_plus
        for p in range(S):
            if p & bj:
                continue
            q = p | bj
            sl = _spin(p, j - 1) if has_left else 1
            s0 = _spin(p, 0) if has_wrap else 1
            Hc = hv + jl * sl + jw * s0
            ok_p = p_ij == 0 or p_ij == 1
            ok_q = p_ij == 0 or p_ij == -1
            if has_left and fl != 0:
                ok_p = ok_p and sl == fl
                ok_q = ok_q and -sl == fl
            if has_wrap and fw != 0:
                ok_p = ok_p and s0 == fw
                ok_q = ok_q and -s0 == fw
            pen_p = 0.0 if ok_p else INF
            pen_q = 0.0 if ok_q else INF
            # s = +1: base -Hc, up term -ju*su ; s = -1: base +Hc, up term +ju*su
            ca_p = -Hc - ju + pa_plus + pen_p
            cb_p = -Hc + ju + pb_plus + pen_p
            ca_q = Hc + ju + pa_minus + pen_q
            cb_q = Hc - ju + pb_minus + pen_q
            a1 = dp1[p]
            a2 = dp2[p]
            b1 = dp1[q]
            b2 = dp2[q]
            for k in range(F):
                x1 = a1[k] + (ca_p + fplus[k])
                x2 = a2[k] + (ca_p + fplus[k])
                y1 = b1[k] + (cb_p + fplus[k])
                y2 = b2[k] + (cb_p + fplus[k])
                n1p[k] = min(x1, y1)
                n2p[k] = min(max(x1, y1), min(x2, y2))
                x1 = a1[k] + (ca_q + fminus[k])
                x2 = a2[k] + (ca_q + fminus[k])
                y1 = b1[k] + (cb_q + fminus[k])
                y2 = b2[k] + (cb_q + fminus[k])
                n1q[k] = min(x1, y1)
                n2q[k] = min(max(x1, y1), min(x2, y2))
            dp1[p, :] = n1p
            dp2[p, :] = n2p
            dp1[q, :] = n1q
            dp2[q, :] = n2q
    best = INF
    second = INF
    f_best = -1
    for k in range(F):
        for ns in range(S):
            v1 = dp1[ns, k]
            v2 = dp2[ns, k]
            if v1 < best:
                second = min(best, v2)
                best = v1
                f_best = fs[k]
            else:
                second = min(second, v1)
    return best, second, f_best

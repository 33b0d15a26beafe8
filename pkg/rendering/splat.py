"""
Numba kernels of the soft depth splat renderer.
소프트 깊이 스플랫 렌더러 커널 (numba)

Per pixel, splats are composited front to back in a global
(depth, index) order:

    w_j = min(α_j · K(q_j), w_max),  q_j = r² / σ_j²
    K(q) = exp(−q/2)                  for q < c²  (c = cutoff in σ), else 0
    K(q) = exp(−q/2) · (1 − q/c²)²    with the taper switched on
    e_j = w_j · T_j,  T_j = Π_{k<j} (1 − w_k)
    S = Σ e_j z_j,  E = Σ e_j

Depth is resolved from S and E outside the kernels. The backward kernel
replays the same order and returns per-splat gradients w.r.t. image
position (u, v), depth z, footprint σ (pixels) and opacity α.
A weight at the cap passes no gradient through w.
"""
import numpy as np
from numba import njit, prange


def _forward_impl(u, v, z, sig, alpha, order, valid, height, width, max_weight, cutoff, taper):
    n_views = u.shape[0]
    n_splats = u.shape[1]
    cutoff_sq = cutoff * cutoff
    S = np.zeros((n_views, height, width))
    E = np.zeros((n_views, height, width))
    for vi in prange(n_views):
        T = np.ones((height, width))
        for kk in range(n_splats):
            j = order[vi, kk]
            if not valid[vi, j]:
                continue
            a = alpha[j]
            if a <= 0.0:
                continue
            uj = u[vi, j]
            vj = v[vi, j]
            zj = z[vi, j]
            sj = sig[vi, j]
            radius = cutoff * sj
            r0 = max(0, int(np.ceil(vj - radius)))
            r1 = min(height - 1, int(np.floor(vj + radius)))
            c0 = max(0, int(np.ceil(uj - radius)))
            c1 = min(width - 1, int(np.floor(uj + radius)))
            inv_s2 = 1.0 / (sj * sj)
            for r in range(r0, r1 + 1):
                dv = r - vj
                for c in range(c0, c1 + 1):
                    du = c - uj
                    q = (du * du + dv * dv) * inv_s2
                    if q >= cutoff_sq:
                        continue
                    w = a * np.exp(-0.5 * q)
                    if taper:
                        fall = 1.0 - q / cutoff_sq
                        w *= fall * fall
                    if w >= max_weight:
                        w = max_weight
                    if w <= 0.0:
                        continue
                    e = w * T[r, c]
                    S[vi, r, c] += e * zj
                    E[vi, r, c] += e
                    T[r, c] *= 1.0 - w
    return S, E


def _backward_impl(u, v, z, sig, alpha, order, valid, height, width, max_weight, cutoff, taper,
                   S_tot, E_tot, gS, gE):
    n_views = u.shape[0]
    n_splats = u.shape[1]
    cutoff_sq = cutoff * cutoff
    gu = np.zeros((n_views, n_splats))
    gv = np.zeros((n_views, n_splats))
    gz = np.zeros((n_views, n_splats))
    gsig = np.zeros((n_views, n_splats))
    galpha = np.zeros((n_views, n_splats))
    for vi in prange(n_views):
        T = np.ones((height, width))
        S_before = np.zeros((height, width))
        E_before = np.zeros((height, width))
        for kk in range(n_splats):
            j = order[vi, kk]
            if not valid[vi, j]:
                continue
            a = alpha[j]
            if a <= 0.0:
                continue
            uj = u[vi, j]
            vj = v[vi, j]
            zj = z[vi, j]
            sj = sig[vi, j]
            radius = cutoff * sj
            r0 = max(0, int(np.ceil(vj - radius)))
            r1 = min(height - 1, int(np.floor(vj + radius)))
            c0 = max(0, int(np.ceil(uj - radius)))
            c1 = min(width - 1, int(np.floor(uj + radius)))
            inv_s2 = 1.0 / (sj * sj)
            acc_u = 0.0
            acc_v = 0.0
            acc_z = 0.0
            acc_s = 0.0
            acc_a = 0.0
            for r in range(r0, r1 + 1):
                dv = r - vj
                for c in range(c0, c1 + 1):
                    du = c - uj
                    q = (du * du + dv * dv) * inv_s2
                    if q >= cutoff_sq:
                        continue
                    gauss = np.exp(-0.5 * q)
                    if taper:
                        fall = 1.0 - q / cutoff_sq
                        kernel = gauss * fall * fall
                        dk_dq = gauss * (-0.5 * fall * fall - 2.0 * fall / cutoff_sq)
                    else:
                        kernel = gauss
                        dk_dq = -0.5 * gauss
                    w = a * kernel
                    clamped = w >= max_weight
                    if clamped:
                        w = max_weight
                    if w <= 0.0:
                        continue
                    t_j = T[r, c]
                    e = w * t_j
                    acc_z += gS[vi, r, c] * e
                    if not clamped:
                        s_after = S_tot[vi, r, c] - S_before[r, c] - e * zj
                        e_after = E_tot[vi, r, c] - E_before[r, c] - e
                        inv_keep = 1.0 / (1.0 - w)
                        dS_dw = t_j * zj - s_after * inv_keep
                        dE_dw = t_j - e_after * inv_keep
                        g_w = gS[vi, r, c] * dS_dw + gE[vi, r, c] * dE_dw
                        acc_a += g_w * kernel
                        g_q = g_w * a * dk_dq
                        acc_u += g_q * (-2.0 * du * inv_s2)
                        acc_v += g_q * (-2.0 * dv * inv_s2)
                        acc_s += g_q * (-2.0 * q / sj)
                    S_before[r, c] += e * zj
                    E_before[r, c] += e
                    T[r, c] = t_j * (1.0 - w)
            gu[vi, j] = acc_u
            gv[vi, j] = acc_v
            gz[vi, j] = acc_z
            gsig[vi, j] = acc_s
            galpha[vi, j] = acc_a
    return gu, gv, gz, gsig, galpha


forward_parallel = njit(parallel=True)(_forward_impl)
forward_serial = njit(_forward_impl)
backward_parallel = njit(parallel=True)(_backward_impl)
backward_serial = njit(_backward_impl)

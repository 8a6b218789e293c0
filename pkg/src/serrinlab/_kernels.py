"""Numba kernels for the wide-stencil relaxation sweep.

Layout: the solution lives on the full bounding-box lattice (ny, nx) with a
two-cell exterior margin; exterior slots hold 0 and are never written.  The
bulk pass updates full-arm interior nodes with stride-based neighbor access
(vectorizable); near-boundary nodes are listed separately and recomputed with
exact cut-cell arms and per-node stable pseudo-time steps.

Both variants share one code path: the maximal operator is evaluated through
the duality M+(M) = -M-(-M), i.e. second differences are sign-flipped before
the min-weighting and the frame minimum is flipped back.

Updates are Jacobi style (read previous iterate, write next), so results are
bitwise independent of the number of threads.
"""

import numpy as np
from numba import njit, prange


@njit(cache=True, parallel=True, fastmath=False)
def relax_chunk(u, v, bulk, row_lo, row_hi, nsweeps, dt, h,
                lam, Lam, kcoef, gsign, fa, fb, sgn, k16,
                cut_iy, cut_ix, cut_nb, cut_arm, cut_bv, cut_dt):
    ny, nx = u.shape
    invh2 = 1.0 / (h * h)
    invd2 = 0.5 * invh2
    invl2 = 0.2 * invh2
    inv2h = 0.5 / h
    ncut = cut_iy.shape[0]
    nl = cut_nb.shape[1]
    for it in range(nsweeps):
        if it % 2 == 0:
            src, dst = u, v
        else:
            src, dst = v, u
        for iy in prange(1, ny - 1):
            for ix in range(row_lo[iy], row_hi[iy]):
                uc = src[iy, ix]
                exx = sgn * (src[iy, ix + 1] + src[iy, ix - 1] - 2.0 * uc) * invh2
                eyy = sgn * (src[iy + 1, ix] + src[iy - 1, ix] - 2.0 * uc) * invh2
                epp = sgn * (src[iy + 1, ix + 1] + src[iy - 1, ix - 1] - 2.0 * uc) * invd2
                emm = sgn * (src[iy + 1, ix - 1] + src[iy - 1, ix + 1] - 2.0 * uc) * invd2
                s1 = min(lam * exx, Lam * exx) + min(lam * eyy, Lam * eyy)
                s2 = min(lam * epp, Lam * epp) + min(lam * emm, Lam * emm)
                m = min(s1, s2)
                if k16:
                    ea = sgn * (src[iy + 1, ix + 2] + src[iy - 1, ix - 2] - 2.0 * uc) * invl2
                    eb = sgn * (src[iy + 2, ix - 1] + src[iy - 2, ix + 1] - 2.0 * uc) * invl2
                    ec = sgn * (src[iy + 2, ix + 1] + src[iy - 2, ix - 1] - 2.0 * uc) * invl2
                    ed = sgn * (src[iy - 1, ix + 2] + src[iy + 1, ix - 2] - 2.0 * uc) * invl2
                    s3 = min(lam * ea, Lam * ea) + min(lam * eb, Lam * eb)
                    s4 = min(lam * ec, Lam * ec) + min(lam * ed, Lam * ed)
                    m = min(m, min(s3, s4))
                op = sgn * m
                if kcoef > 0.0:
                    gx = (src[iy, ix + 1] - src[iy, ix - 1]) * inv2h
                    gy = (src[iy + 1, ix] - src[iy - 1, ix]) * inv2h
                    op += gsign * kcoef * np.sqrt(gx * gx + gy * gy)
                val = uc + dt * (op + fa + fb * uc)
                dst[iy, ix] = val if bulk[iy, ix] else uc
        for c in prange(ncut):
            iy = cut_iy[c]
            ix = cut_ix[c]
            uc = src[iy, ix]
            s0 = 0.0
            s1 = 0.0
            s2 = 0.0
            s3 = 0.0
            for l in range(nl):
                ap = cut_arm[c, l, 0]
                am = cut_arm[c, l, 1]
                jp = cut_nb[c, l, 0]
                jm = cut_nb[c, l, 1]
                up = cut_bv[c, l, 0] if jp < 0 else src.flat[jp]
                um = cut_bv[c, l, 1] if jm < 0 else src.flat[jm]
                e = sgn * (2.0 / (ap + am)) * ((up - uc) / ap + (um - uc) / am)
                w = min(lam * e, Lam * e)
                fi = l >> 1
                if fi == 0:
                    s0 += w
                elif fi == 1:
                    s1 += w
                elif fi == 2:
                    s2 += w
                else:
                    s3 += w
            m = min(s0, s1)
            if nl > 4:
                m = min(m, min(s2, s3))
            op = sgn * m
            if kcoef > 0.0:
                ap = cut_arm[c, 0, 0]
                am = cut_arm[c, 0, 1]
                jp = cut_nb[c, 0, 0]
                jm = cut_nb[c, 0, 1]
                up = cut_bv[c, 0, 0] if jp < 0 else src.flat[jp]
                um = cut_bv[c, 0, 1] if jm < 0 else src.flat[jm]
                gx = (up - um) / (ap + am)
                ap = cut_arm[c, 1, 0]
                am = cut_arm[c, 1, 1]
                jp = cut_nb[c, 1, 0]
                jm = cut_nb[c, 1, 1]
                up = cut_bv[c, 1, 0] if jp < 0 else src.flat[jp]
                um = cut_bv[c, 1, 1] if jm < 0 else src.flat[jm]
                gy = (up - um) / (ap + am)
                op += gsign * kcoef * np.sqrt(gx * gx + gy * gy)
            dst.flat[iy * nx + ix] = uc + cut_dt[c] * (op + fa + fb * uc)


@njit(cache=True, parallel=True, fastmath=False)
def residual_max(u, bulk, row_lo, row_hi, h,
                 lam, Lam, kcoef, gsign, fa, fb, sgn, k16,
                 cut_iy, cut_ix, cut_nb, cut_arm, cut_bv):
    ny, nx = u.shape
    invh2 = 1.0 / (h * h)
    invd2 = 0.5 * invh2
    invl2 = 0.2 * invh2
    inv2h = 0.5 / h
    rowmax = np.zeros(ny)
    for iy in prange(1, ny - 1):
        local = 0.0
        for ix in range(row_lo[iy], row_hi[iy]):
            if not bulk[iy, ix]:
                continue
            uc = u[iy, ix]
            exx = sgn * (u[iy, ix + 1] + u[iy, ix - 1] - 2.0 * uc) * invh2
            eyy = sgn * (u[iy + 1, ix] + u[iy - 1, ix] - 2.0 * uc) * invh2
            epp = sgn * (u[iy + 1, ix + 1] + u[iy - 1, ix - 1] - 2.0 * uc) * invd2
            emm = sgn * (u[iy + 1, ix - 1] + u[iy - 1, ix + 1] - 2.0 * uc) * invd2
            s1 = min(lam * exx, Lam * exx) + min(lam * eyy, Lam * eyy)
            s2 = min(lam * epp, Lam * epp) + min(lam * emm, Lam * emm)
            m = min(s1, s2)
            if k16:
                ea = sgn * (u[iy + 1, ix + 2] + u[iy - 1, ix - 2] - 2.0 * uc) * invl2
                eb = sgn * (u[iy + 2, ix - 1] + u[iy - 2, ix + 1] - 2.0 * uc) * invl2
                ec = sgn * (u[iy + 2, ix + 1] + u[iy - 2, ix - 1] - 2.0 * uc) * invl2
                ed = sgn * (u[iy - 1, ix + 2] + u[iy + 1, ix - 2] - 2.0 * uc) * invl2
                s3 = min(lam * ea, Lam * ea) + min(lam * eb, Lam * eb)
                s4 = min(lam * ec, Lam * ec) + min(lam * ed, Lam * ed)
                m = min(m, min(s3, s4))
            op = sgn * m
            if kcoef > 0.0:
                gx = (u[iy, ix + 1] - u[iy, ix - 1]) * inv2h
                gy = (u[iy + 1, ix] - u[iy - 1, ix]) * inv2h
                op += gsign * kcoef * np.sqrt(gx * gx + gy * gy)
            r = abs(op + fa + fb * uc)
            if r > local:
                local = r
        worst = max(worst, local)
    ncut = cut_iy.shape[0]
    nl = cut_nb.shape[1]
    for c in range(ncut):
        iy = cut_iy[c]
        ix = cut_ix[c]
        uc = u[iy, ix]
        s0 = 0.0
        s1 = 0.0
        s2 = 0.0
        s3 = 0.0
        for l in range(nl):
            ap = cut_arm[c, l, 0]
            am = cut_arm[c, l, 1]
            jp = cut_nb[c, l, 0]
            jm = cut_nb[c, l, 1]
            up = cut_bv[c, l, 0] if jp < 0 else u.flat[jp]
            um = cut_bv[c, l, 1] if jm < 0 else u.flat[jm]
            e = sgn * (2.0 / (ap + am)) * ((up - uc) / ap + (um - uc) / am)
            w = min(lam * e, Lam * e)
            fi = l >> 1
            if fi == 0:
                s0 += w
            elif fi == 1:
                s1 += w
            elif fi == 2:
                s2 += w
            else:
                s3 += w
        m = min(s0, s1)
        if nl > 4:
            m = min(m, min(s2, s3))
        op = sgn * m
        if kcoef > 0.0:
            ap = cut_arm[c, 0, 0]
            am = cut_arm[c, 0, 1]
            jp = cut_nb[c, 0, 0]
            jm = cut_nb[c, 0, 1]
            up = cut_bv[c, 0, 0] if jp < 0 else u.flat[jp]
            um = cut_bv[c, 0, 1] if jm < 0 else u.flat[jm]
            gx = (up - um) / (ap + am)
            ap = cut_arm[c, 1, 0]
            am = cut_arm[c, 1, 1]
            jp = cut_nb[c, 1, 0]
            jm = cut_nb[c, 1, 1]
            up = cut_bv[c, 1, 0] if jp < 0 else u.flat[jp]
            um = cut_bv[c, 1, 1] if jm < 0 else u.flat[jm]
            gy = (up - um) / (ap + am)
            op += gsign * kcoef * np.sqrt(gx * gx + gy * gy)
        r = abs(op + fa + fb * uc)
        if r > worst:
            worst = r
    return worst

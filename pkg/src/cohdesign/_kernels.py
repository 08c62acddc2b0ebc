"""Numba update kernels for the Yee/CPML time stepper.

All six field arrays share the (n+1, n+1, n+1) shape; component c of E or H
lives at the usual staggered position (half-offset along the axes given by
the Yee cell).  The CPML auxiliary (psi) arrays are full-grid; outside the
absorber their recursion coefficients are (b=1, a=0) so they stay zero.

Writes are elementwise with no cross-thread reductions, so the stepping is
bitwise deterministic for any thread count.
"""

import numba
import numpy as np

_jit = numba.njit(parallel=True, cache=True, fastmath=False, nogil=True)


@_jit
def update_h(ex, ey, ez, hx, hy, hz,
             psi_hxy, psi_hxz, psi_hyz, psi_hyx, psi_hzx, psi_hzy,
             bh, ah, dt, inv_dx):
    n = ex.shape[0] - 1
    # Hx at (i, j+1/2, k+1/2)
    for i in numba.prange(0, n + 1):
        for j in range(0, n):
            for k in range(0, n):
                dez = (ez[i, j + 1, k] - ez[i, j, k]) * inv_dx
                dey = (ey[i, j, k + 1] - ey[i, j, k]) * inv_dx
                p1 = bh[j] * psi_hxy[i, j, k] + ah[j] * dez
                p2 = bh[k] * psi_hxz[i, j, k] + ah[k] * dey
                psi_hxy[i, j, k] = p1
                psi_hxz[i, j, k] = p2
                hx[i, j, k] -= dt * (dez + p1 - dey - p2)
    # Hy at (i+1/2, j, k+1/2)
    for i in numba.prange(0, n):
        for j in range(0, n + 1):
            for k in range(0, n):
                dex = (ex[i, j, k + 1] - ex[i, j, k]) * inv_dx
                dez = (ez[i + 1, j, k] - ez[i, j, k]) * inv_dx
                p1 = bh[k] * psi_hyz[i, j, k] + ah[k] * dex
                p2 = bh[i] * psi_hyx[i, j, k] + ah[i] * dez
                psi_hyz[i, j, k] = p1
                psi_hyx[i, j, k] = p2
                hy[i, j, k] -= dt * (dex + p1 - dez - p2)
    # Hz at (i+1/2, j+1/2, k)
    for i in numba.prange(0, n):
        for j in range(0, n):
            for k in range(0, n + 1):
                dey = (ey[i + 1, j, k] - ey[i, j, k]) * inv_dx
                dex = (ex[i, j + 1, k] - ex[i, j, k]) * inv_dx
                p1 = bh[i] * psi_hzx[i, j, k] + ah[i] * dey
                p2 = bh[j] * psi_hzy[i, j, k] + ah[j] * dex
                psi_hzx[i, j, k] = p1
                psi_hzy[i, j, k] = p2
                hz[i, j, k] -= dt * (dey + p1 - dex - p2)


@_jit
def update_e(ex, ey, ez, hx, hy, hz,
             ce_x, ce_y, ce_z,
             psi_exy, psi_exz, psi_eyz, psi_eyx, psi_ezx, psi_ezy,
             be, ae, inv_dx):
    n = ex.shape[0] - 1
    # Ex at (i+1/2, j, k)
    for i in numba.prange(0, n):
        for j in range(1, n):
            for k in range(1, n):
                dhz = (hz[i, j, k] - hz[i, j - 1, k]) * inv_dx
                dhy = (hy[i, j, k] - hy[i, j, k - 1]) * inv_dx
                p1 = be[j] * psi_exy[i, j, k] + ae[j] * dhz
                p2 = be[k] * psi_exz[i, j, k] + ae[k] * dhy
                psi_exy[i, j, k] = p1
                psi_exz[i, j, k] = p2
                ex[i, j, k] += ce_x[i, j, k] * (dhz + p1 - dhy - p2)
    # Ey at (i, j+1/2, k)
    for i in numba.prange(1, n):
        for j in range(0, n):
            for k in range(1, n):
                dhx = (hx[i, j, k] - hx[i, j, k - 1]) * inv_dx
                dhz = (hz[i, j, k] - hz[i - 1, j, k]) * inv_dx
                p1 = be[k] * psi_eyz[i, j, k] + ae[k] * dhx
                p2 = be[i] * psi_eyx[i, j, k] + ae[i] * dhz
                psi_eyz[i, j, k] = p1
                psi_eyx[i, j, k] = p2
                ey[i, j, k] += ce_y[i, j, k] * (dhx + p1 - dhz - p2)
    # Ez at (i, j, k+1/2)
    for i in numba.prange(1, n):
        for j in range(1, n):
            for k in range(0, n):
                dhy = (hy[i, j, k] - hy[i - 1, j, k]) * inv_dx
                dhx = (hx[i, j, k] - hx[i, j - 1, k]) * inv_dx
                p1 = be[i] * psi_ezx[i, j, k] + ae[i] * dhy
                p2 = be[j] * psi_ezy[i, j, k] + ae[j] * dhx
                psi_ezx[i, j, k] = p1
                psi_ezy[i, j, k] = p2
                ez[i, j, k] += ce_z[i, j, k] * (dhy + p1 - dhx - p2)


@_jit
def accumulate_dft(acc_x, acc_y, acc_z, ex, ey, ez, ph_re, ph_im):
    n = ex.shape[0]
    for i in numba.prange(n):
        for j in range(n):
            for k in range(n):
                acc_x[i, j, k] += complex(ph_re * ex[i, j, k], ph_im * ex[i, j, k])
                acc_y[i, j, k] += complex(ph_re * ey[i, j, k], ph_im * ey[i, j, k])
                acc_z[i, j, k] += complex(ph_re * ez[i, j, k], ph_im * ez[i, j, k])


@_jit
def max_abs(a):
    n = a.shape[0]
    m = 0.0
    for i in numba.prange(n):
        for j in range(n):
            for k in range(n):
                m = max(m, abs(a[i, j, k]))
    return m

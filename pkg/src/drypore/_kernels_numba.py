"""Numba-compiled stencil kernels.

Same contracts as `_kernels_numpy`; see there for array layout conventions.
All loops are sequential, so results do not depend on the numba thread count.
"""

import numpy as np
from numba import njit

_OPTS = dict(cache=True, fastmath=False)


@njit(**_OPTS)
def ksum(a):
    flat = np.ascontiguousarray(a).ravel()
    total = 0.0
    for i in range(flat.size):
        total += flat[i]
    return total


@njit(**_OPTS)
def kdot(a, b):
    fa = np.ascontiguousarray(a).ravel()
    fb = np.ascontiguousarray(b).ravel()
    total = 0.0
    for i in range(fa.size):
        total += fa[i] * fb[i]
    return total


@njit(**_OPTS)
def laplacian(fp, dx, dy):
    ny = fp.shape[0] - 2
    nx = fp.shape[1] - 2
    inv_dx2 = 1.0 / (dx * dx)
    inv_dy2 = 1.0 / (dy * dy)
    out = np.empty((ny, nx))
    for j in range(ny):
        for i in range(nx):
            f = fp[j + 1, i + 1]
            out[j, i] = (fp[j + 1, i + 2] - 2.0 * f + fp[j + 1, i]) * inv_dx2 + (
                fp[j + 2, i + 1] - 2.0 * f + fp[j, i + 1]
            ) * inv_dy2
    return out


@njit(**_OPTS)
def face_gradients(fp, dx, dy):
    ny = fp.shape[0] - 2
    nx = fp.shape[1] - 2
    gx = np.empty((ny, nx + 1))
    gy = np.empty((ny + 1, nx))
    for j in range(ny):
        for i in range(nx + 1):
            gx[j, i] = (fp[j + 1, i + 1] - fp[j + 1, i]) / dx
    for j in range(ny + 1):
        for i in range(nx):
            gy[j, i] = (fp[j + 1, i + 1] - fp[j, i + 1]) / dy
    return gx, gy


@njit(**_OPTS)
def div_faces(u, v, dx, dy):
    ny = u.shape[0]
    nx = u.shape[1] - 1
    out = np.empty((ny, nx))
    for j in range(ny):
        for i in range(nx):
            out[j, i] = (u[j, i + 1] - u[j, i]) / dx + (v[j + 1, i] - v[j, i]) / dy
    return out


@njit(**_OPTS)
def norm_grad(fp, dx, dy):
    ny = fp.shape[0] - 2
    nx = fp.shape[1] - 2
    out = np.empty((ny, nx))
    for j in range(ny):
        for i in range(nx):
            gxc = 0.5 * (fp[j + 1, i + 2] - fp[j + 1, i]) / dx
            gyc = 0.5 * (fp[j + 2, i + 1] - fp[j, i + 1]) / dy
            out[j, i] = np.sqrt(gxc * gxc + gyc * gyc)
    return out


@njit(**_OPTS)
def div_w_grad(fp, wp, dx, dy):
    ny = fp.shape[0] - 2
    nx = fp.shape[1] - 2
    inv_dx2 = 1.0 / (dx * dx)
    inv_dy2 = 1.0 / (dy * dy)
    out = np.empty((ny, nx))
    for j in range(ny):
        for i in range(nx):
            jc = j + 1
            ic = i + 1
            fe = 0.5 * (wp[jc, ic + 1] + wp[jc, ic]) * (fp[jc, ic + 1] - fp[jc, ic])
            fw = 0.5 * (wp[jc, ic] + wp[jc, ic - 1]) * (fp[jc, ic] - fp[jc, ic - 1])
            fn = 0.5 * (wp[jc + 1, ic] + wp[jc, ic]) * (fp[jc + 1, ic] - fp[jc, ic])
            fs = 0.5 * (wp[jc, ic] + wp[jc - 1, ic]) * (fp[jc, ic] - fp[jc - 1, ic])
            out[j, i] = (fe - fw) * inv_dx2 + (fn - fs) * inv_dy2
    return out


@njit(**_OPTS)
def upwind_advect(fp, u, v, dx, dy):
    ny = fp.shape[0] - 2
    nx = fp.shape[1] - 2
    out = np.empty((ny, nx))
    for j in range(ny):
        for i in range(nx):
            jc = j + 1
            ic = i + 1
            f = fp[jc, ic]
            uc = 0.5 * (u[j, i + 1] + u[j, i])
            vc = 0.5 * (v[j + 1, i] + v[j, i])
            if uc > 0.0:
                dfdx = (f - fp[jc, ic - 1]) / dx
            else:
                dfdx = (fp[jc, ic + 1] - f) / dx
            if vc > 0.0:
                dfdy = (f - fp[jc - 1, ic]) / dy
            else:
                dfdy = (fp[jc + 1, ic] - f) / dy
            out[j, i] = uc * dfdx + vc * dfdy
    return out


@njit(**_OPTS)
def curvature_gradnorm(fp, dx, dy, g_min):
    ny = fp.shape[0] - 2
    nx = fp.shape[1] - 2
    gx = np.empty((ny, nx + 1))
    gy = np.empty((ny + 1, nx))
    for j in range(ny):
        for i in range(nx + 1):
            gx[j, i] = (fp[j + 1, i + 1] - fp[j + 1, i]) / dx
    for j in range(ny + 1):
        for i in range(nx):
            gy[j, i] = (fp[j + 1, i + 1] - fp[j, i + 1]) / dy

    nx_f = np.zeros((ny, nx + 1))
    for j in range(ny):
        for i in range(nx + 1):
            il = i - 1 if i > 0 else 0
            ir = i if i < nx else nx - 1
            gy_u = 0.25 * (gy[j, il] + gy[j, ir] + gy[j + 1, il] + gy[j + 1, ir])
            mag = np.sqrt(gx[j, i] * gx[j, i] + gy_u * gy_u)
            if mag > g_min:
                nx_f[j, i] = gx[j, i] / mag

    ny_f = np.zeros((ny + 1, nx))
    for j in range(ny + 1):
        for i in range(nx):
            jl = j - 1 if j > 0 else 0
            jr = j if j < ny else ny - 1
            gx_v = 0.25 * (gx[jl, i] + gx[jr, i] + gx[jl, i + 1] + gx[jr, i + 1])
            mag = np.sqrt(gx_v * gx_v + gy[j, i] * gy[j, i])
            if mag > g_min:
                ny_f[j, i] = gy[j, i] / mag

    out = np.zeros((ny, nx))
    for j in range(ny):
        for i in range(nx):
            gxc = 0.5 * (gx[j, i + 1] + gx[j, i])
            gyc = 0.5 * (gy[j + 1, i] + gy[j, i])
            gn = np.sqrt(gxc * gxc + gyc * gyc)
            if gn > g_min:
                divn = (nx_f[j, i + 1] - nx_f[j, i]) / dx + (
                    ny_f[j + 1, i] - ny_f[j, i]
                ) / dy
                out[j, i] = gn * divn
    return out


@njit(**_OPTS)
def _poisson_apply(p, bx, by, inv_dx2, inv_dy2, periodic_x, out):
    ny, nx = p.shape
    for j in range(ny):
        for i in range(nx):
            if i + 1 <= nx - 1:
                pe = p[j, i + 1]
            elif periodic_x:
                pe = p[j, 0]
            else:
                pe = p[j, i]
            if i - 1 >= 0:
                pw = p[j, i - 1]
            elif periodic_x:
                pw = p[j, nx - 1]
            else:
                pw = p[j, i]
            pn = p[j + 1, i] if j + 1 <= ny - 1 else p[j, i]
            ps = p[j - 1, i] if j - 1 >= 0 else p[j, i]
            acc = (bx[j, i + 1] * (pe - p[j, i]) - bx[j, i] * (p[j, i] - pw)) * inv_dx2
            acc += (by[j + 1, i] * (pn - p[j, i]) - by[j, i] * (p[j, i] - ps)) * inv_dy2
            out[j, i] = -acc


@njit(**_OPTS)
def poisson_cg(b, bx, by, dx, dy, x0, tol_max, maxiter, periodic_x):
    ny, nx = b.shape
    inv_dx2 = 1.0 / (dx * dx)
    inv_dy2 = 1.0 / (dy * dy)

    minv = np.zeros((ny, nx))
    for j in range(ny):
        for i in range(nx):
            d = (bx[j, i + 1] + bx[j, i]) * inv_dx2 + (by[j + 1, i] + by[j, i]) * inv_dy2
            if d > 1e-300:
                minv[j, i] = 1.0 / d

    x = x0.copy()
    r = np.empty((ny, nx))
    ap = np.empty((ny, nx))
    _poisson_apply(x, bx, by, inv_dx2, inv_dy2, periodic_x, ap)
    res = 0.0
    for j in range(ny):
        for i in range(nx):
            r[j, i] = b[j, i] - ap[j, i]
            av = abs(r[j, i])
            if av > res:
                res = av
    if res < tol_max:
        return x, 0, res, True

    z = minv * r
    p = z.copy()
    rz = kdot(r, z)
    for it in range(1, maxiter + 1):
        _poisson_apply(p, bx, by, inv_dx2, inv_dy2, periodic_x, ap)
        pap = kdot(p, ap)
        if pap <= 0.0:
            break
        alpha = rz / pap
        res = 0.0
        for j in range(ny):
            for i in range(nx):
                x[j, i] += alpha * p[j, i]
                r[j, i] -= alpha * ap[j, i]
                av = abs(r[j, i])
                if av > res:
                    res = av
        if res < tol_max:
            return x, it, res, True
        z = minv * r
        rz_new = kdot(r, z)
        beta = rz_new / rz
        for j in range(ny):
            for i in range(nx):
                p[j, i] = z[j, i] + beta * p[j, i]
        rz = rz_new
    return x, maxiter, res, False

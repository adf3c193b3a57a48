"""Pure-numpy stencil kernels.

All kernels operate on raw float64 arrays. Cell-centered fields have shape
(ny, nx); arguments suffixed `p` are ghost-padded to (ny+2, nx+2). Face
arrays follow the staggered layout: x-faces (ny, nx+1), y-faces (ny+1, nx).

Reductions accumulate in C order (via cumsum) so that both backends produce
the same bit pattern as a naive double loop.
"""

import numpy as np


def ksum(a):
    """Sum of all entries in row-major order."""
    flat = np.ascontiguousarray(a).ravel()
    if flat.size == 0:
        return 0.0
    return float(flat.cumsum()[-1])


def kdot(a, b):
    """Dot product accumulated in row-major order."""
    return ksum(a * b)


def laplacian(fp, dx, dy):
    f = fp[1:-1, 1:-1]
    return (fp[1:-1, 2:] - 2.0 * f + fp[1:-1, :-2]) / (dx * dx) + (
        fp[2:, 1:-1] - 2.0 * f + fp[:-2, 1:-1]
    ) / (dy * dy)


def face_gradients(fp, dx, dy):
    gx = (fp[1:-1, 1:] - fp[1:-1, :-1]) / dx
    gy = (fp[1:, 1:-1] - fp[:-1, 1:-1]) / dy
    return gx, gy


def div_faces(u, v, dx, dy):
    return (u[:, 1:] - u[:, :-1]) / dx + (v[1:, :] - v[:-1, :]) / dy


def norm_grad(fp, dx, dy):
    gx, gy = face_gradients(fp, dx, dy)
    gxc = 0.5 * (gx[:, 1:] + gx[:, :-1])
    gyc = 0.5 * (gy[1:, :] + gy[:-1, :])
    return np.sqrt(gxc * gxc + gyc * gyc)


def div_w_grad(fp, wp, dx, dy):
    """Divergence of w * grad(f) with arithmetic face averaging of w."""
    gx, gy = face_gradients(fp, dx, dy)
    wx = 0.5 * (wp[1:-1, 1:] + wp[1:-1, :-1])
    wy = 0.5 * (wp[1:, 1:-1] + wp[:-1, 1:-1])
    fx = wx * gx
    fy = wy * gy
    return (fx[:, 1:] - fx[:, :-1]) / dx + (fy[1:, :] - fy[:-1, :]) / dy


def upwind_advect(fp, u, v, dx, dy):
    """u . grad(f) at cell centers with first-order upwind differences."""
    f = fp[1:-1, 1:-1]
    uc = 0.5 * (u[:, 1:] + u[:, :-1])
    vc = 0.5 * (v[1:, :] + v[:-1, :])
    dfdx = np.where(
        uc > 0.0, (f - fp[1:-1, :-2]) / dx, (fp[1:-1, 2:] - f) / dx
    )
    dfdy = np.where(
        vc > 0.0, (f - fp[:-2, 1:-1]) / dy, (fp[2:, 1:-1] - f) / dy
    )
    return uc * dfdx + vc * dfdy


def curvature_gradnorm(fp, dx, dy, g_min):
    """||grad f|| times the divergence of the unit gradient field."""
    gx, gy = face_gradients(fp, dx, dy)
    gyp = np.pad(gy, ((0, 0), (1, 1)), mode="edge")
    gy_u = 0.25 * (gyp[:-1, :-1] + gyp[:-1, 1:] + gyp[1:, :-1] + gyp[1:, 1:])
    mag_u = np.hypot(gx, gy_u)
    nx_f = np.where(mag_u > g_min, gx / np.where(mag_u > g_min, mag_u, 1.0), 0.0)

    gxp = np.pad(gx, ((1, 1), (0, 0)), mode="edge")
    gx_v = 0.25 * (gxp[:-1, :-1] + gxp[1:, :-1] + gxp[:-1, 1:] + gxp[1:, 1:])
    mag_v = np.hypot(gx_v, gy)
    ny_f = np.where(mag_v > g_min, gy / np.where(mag_v > g_min, mag_v, 1.0), 0.0)

    divn = (nx_f[:, 1:] - nx_f[:, :-1]) / dx + (ny_f[1:, :] - ny_f[:-1, :]) / dy
    gxc = 0.5 * (gx[:, 1:] + gx[:, :-1])
    gyc = 0.5 * (gy[1:, :] + gy[:-1, :])
    gn = np.sqrt(gxc * gxc + gyc * gyc)
    return np.where(gn > g_min, gn * divn, 0.0)


def _poisson_apply(p, bx, by, inv_dx2, inv_dy2, periodic_x):
    if periodic_x:
        pp = np.pad(p, ((0, 0), (1, 1)), mode="wrap")
    else:
        pp = np.pad(p, ((0, 0), (1, 1)), mode="edge")
    fx = bx * (pp[:, 1:] - pp[:, :-1])
    ppy = np.pad(p, ((1, 1), (0, 0)), mode="edge")
    fy = by * (ppy[1:, :] - ppy[:-1, :])
    return -((fx[:, 1:] - fx[:, :-1]) * inv_dx2 + (fy[1:, :] - fy[:-1, :]) * inv_dy2)


def poisson_cg(b, bx, by, dx, dy, x0, tol_max, maxiter, periodic_x):
    """Preconditioned CG for -div(beta grad p) = b.

    beta face coefficients must be zero on closed boundary faces. Returns
    (p, iterations, max-norm residual, converged flag).
    """
    inv_dx2 = 1.0 / (dx * dx)
    inv_dy2 = 1.0 / (dy * dy)
    diag = (bx[:, 1:] + bx[:, :-1]) * inv_dx2 + (by[1:, :] + by[:-1, :]) * inv_dy2
    minv = np.where(diag > 1e-300, 1.0 / np.where(diag > 1e-300, diag, 1.0), 0.0)

    x = x0.copy()
    r = b - _poisson_apply(x, bx, by, inv_dx2, inv_dy2, periodic_x)
    res = float(np.max(np.abs(r)))
    if res < tol_max:
        return x, 0, res, True
    z = minv * r
    p = z.copy()
    rz = kdot(r, z)
    for it in range(1, maxiter + 1):
        ap = _poisson_apply(p, bx, by, inv_dx2, inv_dy2, periodic_x)
        pap = kdot(p, ap)
        if pap <= 0.0:
            break
        alpha = rz / pap
        x += alpha * p
        r -= alpha * ap
        res = float(np.max(np.abs(r)))
        if res < tol_max:
            return x, it, res, True
        z = minv * r
        rz_new = kdot(r, z)
        p = z + (rz_new / rz) * p
        rz = rz_new
    return x, maxiter, res, False

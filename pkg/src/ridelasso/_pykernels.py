"""Pure numpy versions of the compiled kernels in ``_ckernels``."""
import numpy as np


def haversine_matrix(lat_a, lon_a, lat_b, lon_b, radius):
    p1 = np.radians(lat_a)[:, None]
    p2 = np.radians(lat_b)[None, :]
    sdlat = np.sin((p2 - p1) * 0.5)
    sdlon = np.sin((np.radians(lon_b)[None, :] - np.radians(lon_a)[:, None]) * 0.5)
    h = sdlat * sdlat + (np.cos(p1) * np.cos(p2)) * sdlon * sdlon
    np.minimum(h, 1.0, out=h)
    return 2.0 * radius * np.arcsin(np.sqrt(h))


def network_iteration(A, b, x, z, u, edges, lamw, deg, rho, mu):
    m, p = A.shape
    j, k = edges[:, 0], edges[:, 1]

    acc = np.zeros((m, p))
    np.add.at(acc, j, z[:, 0] - u[:, 0])
    np.add.at(acc, k, z[:, 1] - u[:, 1])
    rhs = A * b[:, None] + rho * acc
    c = mu + rho * deg
    aa = np.einsum("ij,ij->i", A, A)
    ar = np.einsum("ij,ij->i", A, rhs)
    pos = c > 0
    safe_c = np.where(pos, c, 1.0)
    x_new = (rhs - A * (ar / (safe_c + aa))[:, None]) / safe_c[:, None]
    if not np.all(pos):
        ls = np.where(aa > 0, b / np.where(aa > 0, aa, 1.0), 0.0)
        x_new[~pos] = (A * ls[:, None])[~pos]
    x[...] = x_new

    v1 = x[j] + u[:, 0]
    v2 = x[k] + u[:, 1]
    nrm = np.sqrt(np.einsum("ij,ij->i", v1 - v2, v1 - v2))
    fuse = rho * nrm <= 2.0 * lamw
    theta = np.where(fuse, 0.5, 1.0 - lamw / np.where(fuse, 1.0, rho * nrm))[:, None]
    zn0 = theta * v1 + (1.0 - theta) * v2
    zn1 = theta * v2 + (1.0 - theta) * v1
    avg = 0.5 * (v1 + v2)
    zn0[fuse] = avg[fuse]
    zn1[fuse] = avg[fuse]

    acc[...] = 0.0
    np.add.at(acc, j, zn0 - z[:, 0])
    np.add.at(acc, k, zn1 - z[:, 1])
    s2 = rho * rho * float(np.sum(acc * acc))
    z[:, 0] = zn0
    z[:, 1] = zn1

    d0 = x[j] - zn0
    d1 = x[k] - zn1
    r2 = float(np.sum(d0 * d0) + np.sum(d1 * d1))
    u[:, 0] += d0
    u[:, 1] += d1
    ax2 = float(np.sum(x[j] ** 2) + np.sum(x[k] ** 2))
    z2 = float(np.sum(zn0 ** 2) + np.sum(zn1 ** 2))

    acc[...] = 0.0
    np.add.at(acc, j, u[:, 0])
    np.add.at(acc, k, u[:, 1])
    atu2 = float(np.sum(acc * acc))
    return r2, s2, ax2, z2, atu2

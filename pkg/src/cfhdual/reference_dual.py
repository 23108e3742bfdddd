"""Quadrature oracle for f* from the closed one-form sigma1 f_x dx + sigma2 f_y dy + sigma3 f_z dz."""
from __future__ import annotations

from dataclasses import dataclass

from typing import Optional

import numpy as np

from .core import Lattice
from .errors import DegenerateRegion
from .invariants import principal_curvatures, sample_algebra, schouten_eigenvalues


def dual_form(sample, axis):
    """Component of df* along ``axis``: sigma_axis times the coordinate tangent."""
    _, sig = sample_algebra(sample)
    return sig[axis][..., None] * sample.tangent(axis)


def double_dual_form(sample, axis):
    """Component of d(f**) along ``axis``.

    The tangent of f* is sigma_i f_i and the dual eigenvalue is obtained by
    feeding the dual curvatures -kappa_i/sigma_i back into the Schouten formula.
    """
    k, sig = sample_algebra(sample)
    kstar = principal_like(-k.k1 / sig.s1, -k.k2 / sig.s2, -k.k3 / sig.s3)
    sstar = schouten_eigenvalues(kstar)
    return (sstar[axis] * sig[axis])[..., None] * sample.tangent(axis)


def principal_like(k1, k2, k3):
    from .invariants import CurvatureSet
    return CurvatureSet(k1, k2, k3)


def _simpson_weights(m):
    if m < 2 or m % 2:
        raise ValueError("m must be an even integer >= 2")
    w = np.ones(m + 1)
    w[1:-1:2] = 4.0
    w[2:-1:2] = 2.0
    return w / 3.0


def _points(start, axis, t):
    """Broadcast start points (x, y, z) against offsets t along ``axis``."""
    p = [np.asarray(c, dtype=float)[..., None] for c in start]
    p[axis] = p[axis] + t
    return np.broadcast_arrays(*p)


def integrate_dual_edge(entry, start, axis, length, m=16, form=dual_form):
    """Composite Simpson integral of df* from ``start`` over ``length`` along ``axis``."""
    w = _simpson_weights(m)
    length = np.asarray(length, dtype=float)
    t = np.linspace(0.0, 1.0, m + 1) * length[..., None]
    x, y, z = _points(start, axis, t)
    g = form(entry.sample(x, y, z), axis)
    return np.sum(w[:, None] * g, axis=-2) * (length / m)[..., None]


def pencil_cumulative(entry, start, axis, delta, ncells, m=16, every=None, form=dual_form,
                      chunk=200_000):
    """Running integrals of df* along pencils starting at ``start``.

    Each pencil has ``ncells`` cells of width ``delta``; each cell is covered by
    ``m`` Simpson substeps.  Values are returned at every ``every``-th Simpson
    panel boundary (default: cell ends), so the result has shape
    ``start_shape + (ncells * (m // 2) // every + 1, 4)`` and starts at zero.
    """
    w = _simpson_weights(2)
    half = m // 2
    every = half if every is None else every
    if half % every:
        raise ValueError("every must divide m/2")
    start = [np.asarray(c, dtype=float) for c in np.broadcast_arrays(*start)]
    shape = start[0].shape
    flat = [c.ravel() for c in start]
    L = ncells * m
    t = np.arange(L + 1) * (delta / m)
    npts = max(1, chunk // (L + 1))
    out = np.empty((flat[0].size, L // 2 // every + 1, 4))
    for s0 in range(0, flat[0].size, npts):
        sl = slice(s0, s0 + npts)
        x, y, z = _points([c[sl] for c in flat], axis, t)
        g = form(entry.sample(x, y, z), axis)
        panels = (w[0] * g[:, 0:-1:2] + w[1] * g[:, 1::2] + w[2] * g[:, 2::2]) * (delta / m)
        cum = np.concatenate([np.zeros((g.shape[0], 1, 4)), np.cumsum(panels, axis=1)], axis=1)
        out[sl] = cum[:, ::every]
    return out.reshape(shape + out.shape[1:])


def check_regular(entry, lattice: Lattice, refine: int = 2):
    """DegenerateRegion unless det S keeps a strict sign on a grid over the lattice."""
    d = lattice.domain
    m = lattice.n * refine + 1
    axes = [np.linspace(lo, hi, m) for lo, hi in d.bounds()]
    sgn = None
    for zk in axes[2]:
        X, Y = np.meshgrid(axes[0], axes[1], indexing="ij")
        s = entry.sample(X, Y, np.full_like(X, zk))
        _, sig = sample_algebra(s)
        det = sig.detS
        if np.any(det == 0) or np.any(np.sign(det) != np.sign(det.flat[0])) or (
                sgn is not None and np.sign(det.flat[0]) != sgn):
            raise DegenerateRegion(f"{entry.name}: det S vanishes inside the domain")
        sgn = np.sign(det.flat[0])


@dataclass(frozen=True)
class DualField:
    """f* at every lattice node, zero at the base node (0, 0, 0)."""

    lattice: Lattice
    values: np.ndarray
    m: int
    order: str = "simpson4"
    path: str = "xyz"
    base: tuple = (0, 0, 0)
    richardson: Optional[float] = None

    def value(self, i, j, k):
        return self.values[i, j, k]

    def to_dict(self):
        return {"n": self.lattice.n, "domain": self.lattice.domain.to_dict(), "m": self.m,
                "integrator": self.order, "path": self.path, "base": list(self.base),
                "richardson": self.richardson, "values": self.values.tolist()}


def _path_values(entry, lattice, m, path, form):
    axes = ["xyz".index(c) for c in path]
    n, delta = lattice.n, lattice.delta
    coords = [lattice.xs, lattice.ys, lattice.zs]
    base = [c[0] for c in coords]
    a0, a1, a2 = axes

    def start(fixed):
        p = list(base)
        for ax, v in fixed.items():
            p[ax] = v
        return p

    v0 = pencil_cumulative(entry, start({}), a0, delta, n, m, form=form)  # (n+1, 4)
    c0 = coords[a0]
    v1 = pencil_cumulative(entry, start({a0: c0}), a1, delta, n, m, form=form)  # (n+1, n+1, 4)
    v1 = v1 + v0[:, None, :]
    C0, C1 = np.meshgrid(c0, coords[a1], indexing="ij")
    v2 = pencil_cumulative(entry, start({a0: C0, a1: C1}), a2, delta, n, m, form=form)
    v2 = v2 + v1[:, :, None, :]
    # reorder (a0, a1, a2) -> (x, y, z)
    perm = np.argsort(axes)
    return np.transpose(v2, tuple(perm) + (3,))


def reference_dual_lattice(entry, lattice: Lattice, m: int = 16, path: str = "xyz",
                           check: bool = True, richardson: bool = False) -> DualField:
    """f* at the lattice nodes, integrated along base -> x -> y -> z (or ``path``).

    With ``richardson=True`` the field is also integrated with m/2 substeps and
    max |F_m - F_{m/2}| / 15 is stored as an error estimate.
    """
    if check:
        check_regular(entry, lattice)
    vals = _path_values(entry, lattice, m, path, dual_form)
    vals[0, 0, 0] = 0.0
    est = None
    if richardson:
        if m % 4:
            raise ValueError("richardson estimate needs m divisible by 4")
        half = _path_values(entry, lattice, m // 2, path, dual_form)
        est = float(np.max(np.linalg.norm(vals - (half - half[0, 0, 0]), axis=-1))) / 15.0
    return DualField(lattice, vals, m, path=path, richardson=est)


def loop_residual(entry, corner, plane, side, m=16):
    """Norm of the integral of df* around a square face."""
    a1, a2 = plane
    c = np.asarray(corner, dtype=float)
    e1 = np.eye(3)[a1] * side
    e2 = np.eye(3)[a2] * side
    s = (integrate_dual_edge(entry, c, a1, side, m)
         + integrate_dual_edge(entry, c + e1, a2, side, m)
         - integrate_dual_edge(entry, c + e2, a1, side, m)
         - integrate_dual_edge(entry, c, a2, side, m))
    return float(np.linalg.norm(s))


def involution_check(entry, lattice: Lattice, m: int = 16) -> float:
    """sup over nodes of |f** - (f - f(base))| with f** integrated from the dual side."""
    check_regular(entry, lattice)
    ff = _path_values(entry, lattice, m, "xyz", double_dual_form)
    X, Y, Z = lattice.nodes()
    f = entry.sample(X, Y, Z).f
    diff = ff - (f - f[0, 0, 0])
    return float(np.max(np.linalg.norm(diff, axis=-1)))

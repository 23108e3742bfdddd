"""Discrete duals on a lattice: parallel-curve segments, slice surfaces, z-spines and connectors."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .core import Lattice
from .errors import DegenerateRegion
from .invariants import sample_algebra

SCHEMES = ("xbar", "yunder")


@dataclass(frozen=True)
class DiscreteCurve:
    """Piecewise curve; ``params`` and ``values`` have a leading cell axis.

    Cell ``i`` covers parameters ``params[i, 0] .. params[i, -1]``; the last
    value of a cell and the first value of the next one are the same node value.
    """

    axis: int
    fixed: dict
    params: np.ndarray
    values: np.ndarray

    @property
    def nodes(self) -> np.ndarray:
        return np.concatenate([self.values[:, 0], self.values[-1:, -1]], axis=0)

    def polyline(self):
        """Parameters and values with the duplicated joints removed."""
        t = np.concatenate([self.params[:, :-1].ravel(), self.params[-1:, -1]])
        v = np.concatenate([self.values[:, :-1].reshape(-1, 4), self.values[-1:, -1]], axis=0)
        return t, v

    def joint_gap(self) -> float:
        if len(self.values) < 2:
            return 0.0
        return float(np.max(np.abs(self.values[:-1, -1] - self.values[1:, 0])))

    def to_dict(self):
        return {"axis": "xyz"[self.axis], "fixed": self.fixed, "params": self.params.tolist(),
                "values": self.values.tolist()}


def _cell_params(coords, s):
    """Subsample parameters per cell; endpoints are the node coordinates themselves."""
    lo, hi = coords[:-1, None], coords[1:, None]
    r = np.arange(s + 1) / s
    t = lo + r * (hi - lo)
    t[:, 0] = coords[:-1]
    t[:, -1] = coords[1:]
    return t


def _segment(entry, anchor, axis, t, c):
    """-sigma_c(p)[f(t) - f(p)] - kappa_c(p)[N(t) - N(p)] with p the anchor point.

    ``anchor`` holds (x, y, z) arrays of shape S; ``t`` has shape S + (r,).
    """
    p = [np.asarray(a, dtype=float) for a in anchor]
    s0 = entry.sample(*p)
    k0, sig0 = sample_algebra(s0)
    q = [a[..., None] for a in p]
    q[axis] = t
    s1 = entry.sample(*np.broadcast_arrays(*q))
    sg = sig0[c][..., None, None]
    kp = k0[c][..., None, None]
    return -sg * (s1.f - s0.f[..., None, :]) - kp * (s1.N - s0.N[..., None, :])


def _increments(s, k, sig, axis, c):
    """Cell increments of the segment recipe from node samples along ``axis``."""
    f, N = s.f, s.N
    sl0 = [slice(None)] * f.ndim
    sl1 = [slice(None)] * f.ndim
    sl0[axis] = slice(0, -1)
    sl1[axis] = slice(1, None)
    sl0, sl1 = tuple(sl0[:-1]), tuple(sl1[:-1])
    return (-sig[c][sl0][..., None] * (f[sl1] - f[sl0])
            - k[c][sl0][..., None] * (N[sl1] - N[sl0]))


def _prefix(inc, axis):
    """Telescoping sums with a leading zero along ``axis``."""
    shape = list(inc.shape)
    shape[axis] = 1
    return np.concatenate([np.zeros(shape), np.cumsum(inc, axis=axis)], axis=axis)


def _slice_samples(entry, lattice, k):
    X, Y = np.meshgrid(lattice.xs, lattice.ys, indexing="ij")
    s = entry.sample(X, Y, np.full_like(X, lattice.zs[k]))
    kap, sig = sample_algebra(s)
    return s, kap, sig


def _curve(entry, anchors_t, axis, c, prefix, inc, fixed, s):
    """DiscreteCurve from node prefix sums plus (optionally) interior subsamples."""
    t = anchors_t
    n = inc.shape[0]
    if s <= 1:
        vals = np.stack([prefix[:-1], prefix[:-1] + inc], axis=1)
        return DiscreteCurve(axis, fixed, t[:, [0, -1]], vals)
    coords = [np.full(n, fixed.get(a, 0.0)) if a != axis else t[:, 0] for a in range(3)]
    seg = _segment(entry, coords, axis, t, c)
    vals = prefix[:-1, None, :] + seg
    vals[:, 0] = prefix[:-1]
    vals[:, -1] = prefix[:-1] + inc
    return DiscreteCurve(axis, fixed, t, vals)


# single segments and curves --------------------------------------------------

def u_segment(entry, lattice: Lattice, i, j, k, x):
    """x-segment of cell i on the line (y_j, z_k), anchored with (sigma3, kappa3)."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    p = [np.asarray(lattice.xs[i]), np.asarray(lattice.ys[j]), np.asarray(lattice.zs[k])]
    return _segment(entry, p, 0, x, 2)


def v_segment(entry, lattice: Lattice, i, j, k, y):
    y = np.atleast_1d(np.asarray(y, dtype=float))
    p = [np.asarray(lattice.xs[i]), np.asarray(lattice.ys[j]), np.asarray(lattice.zs[k])]
    return _segment(entry, p, 1, y, 2)


def _line_curve(entry, lattice, axis, fixed_idx, c, subsamples):
    coords = [lattice.xs, lattice.ys, lattice.zs]
    fixed = {a: float(coords[a][fixed_idx[a]]) for a in range(3) if a != axis}
    pts = [np.full(lattice.n + 1, fixed[a]) if a != axis else coords[a] for a in range(3)]
    s = entry.sample(*pts)
    kap, sig = sample_algebra(s)
    inc = _increments(s, kap, sig, 0, c)
    prefix = _prefix(inc, 0)
    t = _cell_params(coords[axis], max(subsamples, 1))
    return _curve(entry, t, axis, c, prefix, inc, fixed, subsamples)


def u_curve(entry, lattice: Lattice, j, k, subsamples=8) -> DiscreteCurve:
    """Telescoped x-segments along (y_j, z_k), zero at x0."""
    return _line_curve(entry, lattice, 0, {1: j, 2: k}, 2, subsamples)


def v_curve(entry, lattice: Lattice, i, k, subsamples=8) -> DiscreteCurve:
    """Telescoped y-segments along (x_i, z_k), zero at y0."""
    return _line_curve(entry, lattice, 1, {0: i, 2: k}, 2, subsamples)


def z_spine(entry, lattice: Lattice, scheme="xbar", subsamples=8) -> DiscreteCurve:
    """z-curve at (x0, y0) anchored with (sigma2, kappa2) for xbar, (sigma1, kappa1) for yunder."""
    c = 1 if scheme == "xbar" else 0
    return _line_curve(entry, lattice, 2, {0: 0, 1: 0}, c, subsamples)


# slice surfaces ----------------------------------------------------------------

@dataclass
class DiscreteDualSurface:
    """One z-slice of a discrete dual, zero at (x0, y0).

    ``spine`` is the curve through (x0, y0); ``curves[m]`` are the curves
    transversal to it (x-curves at y_m for xbar, y-curves at x_m for yunder).
    ``nodes[i, j]`` is the value at (x_i, y_j).
    """

    k: int
    scheme: str
    lattice: Lattice
    nodes: np.ndarray
    spine: DiscreteCurve
    curves: list
    entry: object = field(repr=False, default=None)
    offset: np.ndarray = field(default_factory=lambda: np.zeros(4))

    def values(self):
        return self.nodes + self.offset


def _surface(entry, lattice, k, scheme, subsamples, node_data=None):
    s, kap, sig = node_data or _slice_samples(entry, lattice, k)
    n = lattice.n
    zk = float(lattice.zs[k])
    dx = _increments(s, kap, sig, 0, 2)  # (n, n+1, 4)
    dy = _increments(s, kap, sig, 1, 2)  # (n+1, n, 4)
    if scheme == "xbar":
        spine_prefix = _prefix(dy[0], 0)          # v(x0, y_j)
        curves_prefix = _prefix(dx, 0)           # u(x_i, y_j)
        nodes = spine_prefix[None, :, :] + curves_prefix
        sp_axis, cv_axis = 1, 0
        sp_inc, cv_inc = dy[0], dx
    else:
        spine_prefix = _prefix(dx[:, 0], 0)       # u(x_i, y0)
        curves_prefix = _prefix(dy, 1)           # v(x_i, y_j)
        nodes = spine_prefix[:, None, :] + curves_prefix
        sp_axis, cv_axis = 0, 1
        sp_inc, cv_inc = dx[:, 0], np.swapaxes(dy, 0, 1)
    nodes[0, 0] = 0.0
    coords = [lattice.xs, lattice.ys]
    ss = max(subsamples, 1)
    spine = _curve(entry, _cell_params(coords[sp_axis], ss), sp_axis, 2, spine_prefix, sp_inc,
                   {cv_axis: float(coords[cv_axis][0]), 2: zk}, subsamples)
    curves = []
    if subsamples > 1:
        t = _cell_params(coords[cv_axis], ss)
        # all transversal curves of the slice in one batch
        anchors = [None, None, np.full((n + 1, n), zk)]
        anchors[cv_axis] = np.broadcast_to(t[:, 0][None, :], (n + 1, n))
        anchors[sp_axis] = np.broadcast_to(coords[sp_axis][:, None], (n + 1, n))
        tt = np.broadcast_to(t[None], (n + 1, n, ss + 1))
        seg = _segment(entry, anchors, cv_axis, tt, 2)
        if scheme == "xbar":
            base = np.swapaxes(nodes, 0, 1)   # (j, i, 4)
        else:
            base = nodes                      # (i, j, 4)
        incs = np.swapaxes(cv_inc, 0, 1)      # (m, cell, 4)
        vals = base[:, :-1, None, :] + seg
        vals[:, :, 0] = base[:, :-1]
        vals[:, :, -1] = base[:, :-1] + incs
        for m in range(n + 1):
            fixed = {sp_axis: float(coords[sp_axis][m]), 2: zk}
            curves.append(DiscreteCurve(cv_axis, fixed, t, vals[m]))
    else:
        t = _cell_params(coords[cv_axis], 1)
        base = np.swapaxes(nodes, 0, 1) if scheme == "xbar" else nodes
        incs = np.swapaxes(cv_inc, 0, 1)
        for m in range(n + 1):
            vals = np.stack([base[m, :-1], base[m, :-1] + incs[m]], axis=1)
            fixed = {sp_axis: float(coords[sp_axis][m]), 2: zk}
            curves.append(DiscreteCurve(cv_axis, fixed, t, vals))
    return DiscreteDualSurface(k, scheme, lattice, nodes, spine, curves, entry)


def surface_xbar(entry, lattice: Lattice, k, subsamples=8) -> DiscreteDualSurface:
    """Spine v(x0, .) plus the x-curves u(., y_j) translated onto it."""
    return _surface(entry, lattice, k, "xbar", subsamples)


def surface_yunder(entry, lattice: Lattice, k, subsamples=8) -> DiscreteDualSurface:
    """Spine u(., y0) plus the y-curves v(x_i, .) translated onto it."""
    return _surface(entry, lattice, k, "yunder", subsamples)


# connectors ------------------------------------------------------------------------

@dataclass(frozen=True)
class Connector:
    """Blend of two parallel-curve copies joining two neighbouring node values."""

    curve: DiscreteCurve
    forward: np.ndarray   # segment from the first node, e.g. v_j(y)
    backward: np.ndarray  # segment towards the second node, e.g. v_hat_j(y)
    jump: np.ndarray      # difference of the two node values
    tangent: np.ndarray   # analytic tangent d/dt of the connector
    lemma_residual: float  # max |-forward + backward + forward(end)|


def _connector(entry, p, axis, t, c, start_value, jump, n, a):
    """Connector on [t0, t1] starting at ``start_value`` with end jump ``jump``."""
    t = np.asarray(t, dtype=float)
    p = [np.asarray(v, dtype=float) for v in p]
    s0 = entry.sample(*p)
    k0, sig0 = sample_algebra(s0)
    q = list(p)
    q[axis] = t
    st = entry.sample(*np.broadcast_arrays(*q))
    q[axis] = np.asarray(t[-1])
    s1 = entry.sample(*q)
    sg, kp = float(sig0[c]), float(k0[c])
    fwd = -sg * (st.f - s0.f) - kp * (st.N - s0.N)
    bwd = sg * (s1.f - st.f) + kp * (s1.N - st.N)
    lam = (np.arange(t.size) / (t.size - 1))[:, None]
    blend = (1.0 - lam) * fwd + lam * (jump + bwd)
    blend[0] = 0.0
    blend[-1] = jump
    kt, _ = sample_algebra(st)
    # d/dt of the blend; -fwd + bwd is constant so only two terms survive
    seg_tan = (-sg + kp * kt[axis])[:, None] * st.tangent(axis)
    tangent = (n / a) * (jump - fwd[-1]) + seg_tan
    lemma = float(np.max(np.abs(-fwd + bwd + fwd[-1])))
    fixed = {ax: float(p[ax]) for ax in range(3) if ax != axis}
    curve = DiscreteCurve(axis, fixed, t[None, :], (start_value + blend)[None])
    return Connector(curve, fwd, bwd, jump, tangent, lemma)


def connector_v(entry, surface: DiscreteDualSurface, i, j, subsamples=8) -> Connector:
    """y-connector of an xbar slice between (x_i, y_j) and (x_i, y_{j+1}), 1 <= i <= n."""
    L = surface.lattice
    if not (1 <= i <= L.n and 0 <= j <= L.n - 1):
        raise IndexError("connector_v needs 1 <= i <= n and 0 <= j <= n-1")
    t = _cell_params(L.ys, max(subsamples, 1))[j]
    p = [L.xs[i], L.ys[j], L.zs[surface.k]]
    V = surface.values()
    return _connector(entry, p, 1, t, 2, V[i, j], V[i, j + 1] - V[i, j], L.n, L.domain.a)


def connector_u(entry, surface: DiscreteDualSurface, i, j, subsamples=8) -> Connector:
    """x-connector of a yunder slice between (x_i, y_j) and (x_{i+1}, y_j), 1 <= j <= n."""
    L = surface.lattice
    if not (0 <= i <= L.n - 1 and 1 <= j <= L.n):
        raise IndexError("connector_u needs 0 <= i <= n-1 and 1 <= j <= n")
    t = _cell_params(L.xs, max(subsamples, 1))[i]
    p = [L.xs[i], L.ys[j], L.zs[surface.k]]
    V = surface.values()
    return _connector(entry, p, 0, t, 2, V[i, j], V[i + 1, j] - V[i, j], L.n, L.domain.a)


def connector_z(entry, hyper: "DiscreteDualHypersurface", i, j, k, subsamples=8) -> Connector:
    """z-connector between (x_i, y_j, z_k) and (x_i, y_j, z_{k+1})."""
    L = hyper.lattice
    c = 1 if hyper.scheme == "xbar" else 0
    t = _cell_params(L.zs, max(subsamples, 1))[k]
    p = [L.xs[i], L.ys[j], L.zs[k]]
    V = hyper.values
    return _connector(entry, p, 2, t, c, V[i, j, k], V[i, j, k + 1] - V[i, j, k], L.n, L.domain.a)


# assembly ----------------------------------------------------------------------------

@dataclass
class DiscreteDualHypersurface:
    """Discrete dual on the whole lattice, zero at the base node."""

    lattice: Lattice
    scheme: str
    values: np.ndarray
    spine: DiscreteCurve
    entry: object = field(repr=False, default=None)
    connector_residual: float = np.nan
    subsamples: int = 0

    def surface(self, k, subsamples=None) -> DiscreteDualSurface:
        """Slice k translated onto the z-spine."""
        s = self.subsamples if subsamples is None else subsamples
        surf = _surface(self.entry, self.lattice, k, self.scheme, s)
        surf.offset = self.spine.nodes[k].copy()
        return surf

    def connector(self, kind, i, j, k, subsamples=8) -> Connector:
        if kind == "z":
            return connector_z(self.entry, self, i, j, k, subsamples)
        surf = self.surface(k, 0)
        if kind == "v":
            return connector_v(self.entry, surf, i, j, subsamples)
        return connector_u(self.entry, surf, i, j, subsamples)

    def to_dict(self):
        return {"scheme": self.scheme, "n": self.lattice.n,
                "domain": self.lattice.domain.to_dict(),
                "connector_residual": float(self.connector_residual),
                "spine": self.spine.to_dict(), "values": self.values.tolist()}


def assemble(entry, lattice: Lattice, scheme="xbar", subsamples=0) -> DiscreteDualHypersurface:
    """Slices translated onto the z-spine; node values on all of the lattice.

    Connectors are produced on demand through :meth:`DiscreteDualHypersurface.connector`;
    the largest connector gap residual over the lattice is recorded.
    """
    if scheme not in SCHEMES:
        raise ValueError(f"scheme must be one of {SCHEMES}")
    n = lattice.n
    spine = z_spine(entry, lattice, scheme, subsamples)
    W = spine.nodes
    vals = np.empty((n + 1, n + 1, n + 1, 4))
    res = 0.0
    sign = None
    for k in range(n + 1):
        data = _slice_samples(entry, lattice, k)
        det = data[2].detS
        sg = np.sign(det)
        if np.any(det == 0) or np.any(sg != sg.flat[0]) or (sign is not None and sg.flat[0] != sign):
            raise DegenerateRegion(f"{entry.name}: det S vanishes inside the domain")
        sign = sg.flat[0]
        surf = _surface(entry, lattice, k, scheme, 0, node_data=data)
        vals[:, :, k] = surf.nodes + W[k]
        res = max(res, _gap_residual(surf, data))
    vals[0, 0, 0] = 0.0
    return DiscreteDualHypersurface(lattice, scheme, vals, spine, entry, res, subsamples)


def _gap_residual(surf, data):
    """max |a_ij - v_j(x_i, y_{j+1})| over connectors of the slice (u-analogue for yunder)."""
    s, kap, sig = data
    V = surf.nodes
    if surf.scheme == "xbar":
        inc = _increments(s, kap, sig, 1, 2)[1:]        # v_j(x_i, y_{j+1}), i >= 1
        jump = V[1:, 1:] - V[1:, :-1]
    else:
        inc = _increments(s, kap, sig, 0, 2)[:, 1:]     # u_i(x_{i+1}, y_j), j >= 1
        jump = V[1:, 1:] - V[:-1, 1:]
    if inc.size == 0:
        return 0.0
    return float(np.max(np.linalg.norm(jump - inc, axis=-1)))

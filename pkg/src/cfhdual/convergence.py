"""Convergence sweeps, log-log slope fits and the cusp experiment."""
from __future__ import annotations

import csv
import io
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy import stats

from .core import BoundConstants, build_lattice, estimate_bound_constants
from .discrete_dual import assemble, z_spine, _increments
from .errors import NoDegeneratePoint, NonPositiveError
from .invariants import detect_degenerate, exact_dual, sample_algebra
from .reference_dual import pencil_cumulative, reference_dual_lattice


def worker_count(default=1):
    """Worker cap from CFH_THREADS."""
    v = os.environ.get("CFH_THREADS")
    try:
        return max(1, int(v)) if v else default
    except ValueError:
        return default


@dataclass(frozen=True)
class SlopeFit:
    slope: float
    intercept: float
    ci: tuple
    floored: bool = False


def fit_slope(points) -> SlopeFit:
    """Least squares of log err against log n with a 95% interval on the slope."""
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or len(pts) < 3:
        raise ValueError("fit_slope needs at least 3 (n, err) points")
    n, err = pts[:, 0], pts[:, 1].copy()
    if np.any(err < 0) or not np.all(np.isfinite(err)):
        raise NonPositiveError("NonPositiveError: errors must be finite and non-negative")
    floored = bool(np.any(err == 0))
    err[err == 0] = np.finfo(float).eps
    X, Y = np.log(n), np.log(err)
    res = stats.linregress(X, Y)
    dof = len(X) - 2
    if dof > 0 and np.isfinite(res.stderr):
        w = stats.t.ppf(0.975, dof) * res.stderr
    else:
        w = 0.0
    return SlopeFit(float(res.slope), float(res.intercept),
                    (float(res.slope - w), float(res.slope + w)), floored)


@dataclass
class ConvergenceRow:
    n: int
    delta: float
    sup_error: float
    bound: float
    satisfied: bool
    slice_error: float
    slice_bound: float
    slice_satisfied: bool
    connector_residual: float


@dataclass
class ConvergenceReport:
    entry: str
    scheme: str
    reference: str
    constants: BoundConstants
    rows: list = field(default_factory=list)
    fit: Optional[SlopeFit] = None
    connector_fit: Optional[SlopeFit] = None
    reference_error: Optional[float] = None

    @property
    def reference_budget_ok(self) -> Optional[bool]:
        """Reference error estimate below 1% of the smallest construction error."""
        if self.reference_error is None:
            return None
        return self.reference_error < 0.01 * min(r.sup_error for r in self.rows)

    @property
    def all_satisfied(self) -> bool:
        return all(r.satisfied and r.slice_satisfied for r in self.rows)

    def running_slopes(self):
        out = []
        for i in range(len(self.rows)):
            if i == 0:
                out.append(None)
                continue
            n = np.array([r.n for r in self.rows[: i + 1]], float)
            e = np.array([max(r.sup_error, np.finfo(float).eps) for r in self.rows[: i + 1]])
            out.append(float(np.polyfit(np.log(n), np.log(e), 1)[0]))
        return out

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["n", "delta", "sup_error", "bound", "satisfied", "slope_running"])
        for r, s in zip(self.rows, self.running_slopes()):
            w.writerow([r.n, repr(r.delta), repr(r.sup_error), repr(r.bound),
                        str(bool(r.satisfied)).lower(), "" if s is None else repr(s)])
        return buf.getvalue()

    def to_dict(self):
        def fit(f):
            return None if f is None else {"slope": f.slope, "intercept": f.intercept,
                                           "ci95": list(f.ci), "floored": f.floored}
        return {"entry": self.entry, "scheme": self.scheme, "reference": self.reference,
                "constants": self.constants.to_dict(),
                "rows": [{k: (bool(v) if isinstance(v, (bool, np.bool_)) else v)
                          for k, v in r.__dict__.items()} for r in self.rows],
                "fit": fit(self.fit), "connector_fit": fit(self.connector_fit),
                "reference_error": self.reference_error,
                "reference_budget_ok": self.reference_budget_ok,
                "all_satisfied": self.all_satisfied}


def _curve_errors(entry, hyper, ref_nodes, exact, k, subsamples, m_ref):
    """Whole-lattice and slice-gauged sup errors on the subsampled curves of slice k."""
    L = hyper.lattice
    surf = hyper.surface(k, subsamples)
    off = surf.offset
    zk = L.zs[k]
    sp_axis = surf.spine.axis
    cv_axis = 1 - sp_axis
    coords = [L.xs, L.ys]
    vals = np.stack([c.values for c in surf.curves]) + off      # (m, cell, s+1, 4)
    t = surf.curves[0].params                                    # (cell, s+1)
    spine = surf.spine.values + off                              # (cell, s+1, 4)
    if exact is not None:
        P = [None, None, None]
        P[cv_axis] = np.broadcast_to(t[None], vals.shape[:-1])
        P[sp_axis] = np.broadcast_to(coords[sp_axis][:, None, None], vals.shape[:-1])
        P[2] = np.full(vals.shape[:-1], zk)
        ref = exact(*P)
        Q = [None, None, None]
        Q[sp_axis] = surf.spine.params
        Q[cv_axis] = np.full(surf.spine.params.shape, coords[cv_axis][0])
        Q[2] = np.full(surf.spine.params.shape, zk)
        ref_sp = exact(*Q)
    else:
        every = (m_ref // 2) // subsamples
        start = [None, None, np.full(L.n + 1, zk)]
        start[sp_axis] = coords[sp_axis]
        start[cv_axis] = np.full(L.n + 1, coords[cv_axis][0])
        run = pencil_cumulative(entry, start, cv_axis, L.delta, L.n, m_ref, every=every)
        anchor = ref_nodes[:, 0, k] if sp_axis == 0 else ref_nodes[0, :, k]
        run = run + anchor[:, None, :]
        ref = np.stack([_cells(run[m], subsamples) for m in range(L.n + 1)])
        s0 = [np.asarray(coords[0][0]), np.asarray(coords[1][0]), np.asarray(zk)]
        sp = pencil_cumulative(entry, s0, sp_axis, L.delta, L.n, m_ref, every=every)
        ref_sp = _cells(sp + ref_nodes[0, 0, k], subsamples)
    base_h = hyper.values[0, 0, k]
    base_r = ref_nodes[0, 0, k]
    e_full = max(np.max(np.linalg.norm(vals - ref, axis=-1)),
                 np.max(np.linalg.norm(spine - ref_sp, axis=-1)))
    e_slice = max(np.max(np.linalg.norm((vals - base_h) - (ref - base_r), axis=-1)),
                  np.max(np.linalg.norm((spine - base_h) - (ref_sp - base_r), axis=-1)))
    return float(e_full), float(e_slice)


def _cells(run, s):
    """Reshape running values (ncell*s + 1, 4) into per-cell arrays (ncell, s+1, 4)."""
    ncell = (run.shape[0] - 1) // s
    idx = np.arange(ncell)[:, None] * s + np.arange(s + 1)[None, :]
    return run[idx]


def run_single(entry, scheme, n, constants, domain, m_ref=16, reference="quadrature",
               subsamples=2) -> ConvergenceRow:
    L = build_lattice(domain, n)
    H = assemble(entry, L, scheme)
    exact = None
    if reference == "exact":
        exact = exact_dual(entry, domain.lower)
        ref = exact(*L.nodes())
    else:
        ref = reference_dual_lattice(entry, L, m_ref).values
    err = np.linalg.norm(H.values - ref, axis=-1)
    sup = float(np.max(err))
    gauged = (H.values - H.values[0:1, 0:1]) - (ref - ref[0:1, 0:1])
    slice_sup = float(np.max(np.linalg.norm(gauged, axis=-1)))
    if subsamples > 1:
        # z-spine between nodes
        sp = z_spine(entry, L, scheme, subsamples)
        spine = sp.values
        if exact is not None:
            zz = sp.params
            rs = exact(np.full(zz.shape, domain.x0), np.full(zz.shape, domain.y0), zz)
        else:
            every = (m_ref // 2) // subsamples
            run = pencil_cumulative(entry, [np.asarray(domain.x0), np.asarray(domain.y0),
                                            np.asarray(domain.z0)], 2, L.delta, n, m_ref, every=every)
            rs = _cells(run, subsamples)
        sup = max(sup, float(np.max(np.linalg.norm(spine - rs, axis=-1))))
        for k in range(n + 1):
            e_full, e_slice = _curve_errors(entry, H, ref, exact, k, subsamples, m_ref)
            sup = max(sup, e_full)
            slice_sup = max(slice_sup, e_slice)
    b = constants.hypersurface_bound(n)
    sb = constants.slice_bound(n)
    return ConvergenceRow(n, L.delta, sup, b, bool(sup <= b), slice_sup, sb, bool(slice_sup <= sb),
                          float(H.connector_residual))


def sweep(entry, scheme, n_list, m_ref=16, reference="quadrature", subsamples=2, domain=None,
          constants: Optional[BoundConstants] = None, safety=1.1, grid_m=65,
          workers: Optional[int] = None) -> ConvergenceReport:
    """Discrete dual against the reference at each n, with bound verdicts and slope fits.

    ``reference`` is ``"quadrature"`` (path-integrated oracle with ``m_ref``
    substeps) or ``"exact"`` (closed-form dual of the entry).  ``subsamples``
    intra-cell points per cell are checked along the construction curves; it
    must divide ``m_ref / 2`` for the quadrature reference.
    """
    n_list = [int(n) for n in n_list]
    if len(n_list) < 3 or any(b <= a for a, b in zip(n_list, n_list[1:])):
        raise ValueError("n_list must be increasing with at least 3 values")
    if subsamples > 1 and reference != "exact" and (m_ref // 2) % subsamples:
        raise ValueError("subsamples must divide m_ref/2")
    domain = domain or entry.default_domain()
    C = constants or estimate_bound_constants(entry, domain, grid_m, safety)
    workers = workers or worker_count()

    def one(n):
        return run_single(entry, scheme, n, C, domain, m_ref, reference, subsamples)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=min(workers, len(n_list))) as ex:
            rows = list(ex.map(one, n_list))
    else:
        rows = [one(n) for n in n_list]
    rep = ConvergenceReport(entry.name, scheme, reference, C, rows)
    if reference == "quadrature" and m_ref % 4 == 0:
        # the coarsest lattice has the longest panels, hence the largest Simpson error
        L0 = build_lattice(domain, n_list[0])
        rep.reference_error = reference_dual_lattice(entry, L0, m_ref, richardson=True).richardson
    rep.fit = fit_slope([(r.n, r.sup_error) for r in rows])
    rep.connector_fit = fit_slope([(r.n, r.connector_residual) for r in rows])
    return rep


# cusp experiment ----------------------------------------------------------------------

def x_line_nodes(entry, xs, y, z):
    """Node values of the telescoped x-segments along the line (., y, z)."""
    s = entry.sample(xs, np.full_like(xs, y), np.full_like(xs, z))
    k, sig = sample_algebra(s)
    inc = _increments(s, k, sig, 0, 2)
    return np.concatenate([np.zeros((1, 4)), np.cumsum(inc, axis=0)]), s


def cusp_experiment(entry, n, domain=None, grid=5, root=None):
    """Direction reversal of the discrete dual x-curve through a transversal sigma1 zero.

    The signed speed <t_i, f_x>/|f_x| of each polyline segment changes sign
    across the root.  ``error`` is the distance from the root to the midpoint
    of the slower of the two bracketing segments; ``crossing`` interpolates the
    sign change linearly and is reported alongside.
    """
    domain = domain or entry.default_domain()
    if root is None:
        pts = [p for p in detect_degenerate(entry, domain, grid) if p.axis == 0 and p.transversal]
        if not pts:
            raise NoDegeneratePoint(f"{entry.name}: no transversal sigma1 zero in the domain")
        c = 0.5 * (domain.lower + domain.upper)
        root = min(pts, key=lambda p: float(np.linalg.norm(np.asarray(p.point) - c))).point
    x_root, y, z = root
    L = build_lattice(domain, n)
    xs = L.xs
    U, s = x_line_nodes(entry, xs, y, z)
    t = np.diff(U, axis=0)
    mids = 0.5 * (xs[:-1] + xs[1:])
    sm = entry.sample(mids, np.full_like(mids, y), np.full_like(mids, z))
    fx = sm.f_x
    speed = np.sum(t * fx, axis=-1) / np.linalg.norm(fx, axis=-1) / L.delta
    dots = np.sum(t[:-1] * t[1:], axis=-1)
    flips = np.nonzero(np.sign(speed[:-1]) != np.sign(speed[1:]))[0]
    if flips.size == 0:
        raise NoDegeneratePoint("discrete curve shows no direction reversal")
    i = int(flips[np.argmin(np.abs(mids[flips] - x_root))])
    a, b = speed[i], speed[i + 1]
    crossing = float(mids[i] + (mids[i + 1] - mids[i]) * a / (a - b))
    j = i if abs(a) <= abs(b) else i + 1
    smin = float(mids[j])
    return {
        "entry": entry.name, "n": n, "delta": L.delta, "root": [float(v) for v in root],
        "segment": i, "tangent_dot": float(dots[i]),
        "reversal": bool(dots[i] < 0), "crossing": crossing,
        "speed_min_location": smin, "error": abs(smin - x_root),
        "crossing_error": abs(crossing - x_root),
        "within_2delta": bool(abs(smin - x_root) <= 2 * L.delta),
    }

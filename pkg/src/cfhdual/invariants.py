"""Principal curvatures, Schouten eigenvalues, dual-side quantities and invariant maps."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import DegenerateAngle, PartialForm, Unsupported, UndefinedInvD


@dataclass(frozen=True)
class CurvatureSet:
    k1: np.ndarray
    k2: np.ndarray
    k3: np.ndarray

    def as_array(self):
        return np.stack([self.k1, self.k2, self.k3], axis=-1)

    def __getitem__(self, i):
        return (self.k1, self.k2, self.k3)[i]


@dataclass(frozen=True)
class SchoutenEigen:
    s1: np.ndarray
    s2: np.ndarray
    s3: np.ndarray

    @property
    def detS(self):
        return self.s1 * self.s2 * self.s3

    def as_array(self):
        return np.stack([self.s1, self.s2, self.s3], axis=-1)

    def __getitem__(self, i):
        return (self.s1, self.s2, self.s3)[i]


def principal_curvatures(P, phi, kappa3) -> CurvatureSet:
    """kappa1 = tan(phi)/P + kappa3, kappa2 = -cot(phi)/P + kappa3."""
    P = np.asarray(P, dtype=float)
    phi = np.asarray(phi, dtype=float)
    kappa3 = np.asarray(kappa3, dtype=float)
    s, c = np.sin(phi), np.cos(phi)
    if np.any(np.abs(s * c) < 1e-12):
        raise DegenerateAngle("sin(phi)cos(phi) vanishes")
    pinv = 1.0 / P
    return CurvatureSet(pinv * s / c + kappa3, -pinv * c / s + kappa3, kappa3 + 0.0 * pinv)


def schouten_eigenvalues(k: CurvatureSet) -> SchoutenEigen:
    a = k.k1 * k.k2
    b = k.k2 * k.k3
    c = k.k3 * k.k1
    return SchoutenEigen(0.5 * (a - b + c), 0.5 * (a + b - c), 0.5 * (-a + b + c))


def _safe_div(num, den):
    num = np.asarray(num, dtype=float)
    den = np.asarray(den, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(den != 0, num / np.where(den != 0, den, 1.0), np.nan)
    return out


@dataclass(frozen=True)
class DualQuantities:
    """Quantities of the dual hypersurface at the same coordinates.

    ``kstar`` and ``sstar`` carry nan where the corresponding sigma vanishes.
    """

    Pstar: np.ndarray
    cos_phistar: np.ndarray
    sin_phistar: np.ndarray
    kstar: np.ndarray
    sstar: np.ndarray
    K: np.ndarray
    Kstar: np.ndarray
    A: np.ndarray
    Astar: np.ndarray
    Nstar: np.ndarray
    phistar_z: np.ndarray
    w: np.ndarray
    wstar: np.ndarray

    @property
    def phistar(self):
        return np.arctan2(self.sin_phistar, self.cos_phistar)


def dual_quantities(sample, sigma: SchoutenEigen, kappa: CurvatureSet, pinv_z) -> DualQuantities:
    """Dual-side data from a sample, its curvatures and dP^{-1}/dz."""
    s1, s2, s3 = sigma.s1, sigma.s2, sigma.s3
    cphi, sphi = np.cos(sample.phi), np.sin(sample.phi)
    cst = s1 / s3 * cphi
    sst = s2 / s3 * sphi
    kstar = np.stack([_safe_div(-kappa.k1, s1), _safe_div(-kappa.k2, s2), -kappa.k3 / s3], axis=-1)
    sstar = np.stack([_safe_div(1.0, s1), _safe_div(1.0, s2), 1.0 / s3], axis=-1)
    K = -np.asarray(pinv_z) + kappa.k3 * sample.phi_z
    Kstar = -K / s3
    A = -sample.X_gamma + sample.phi_z[..., None] * sample.N
    phistar_z = -sample.phi_z + kappa.k3 / s3 * K
    Nstar = -sample.N
    Astar = -sample.X_gamma + phistar_z[..., None] * Nstar
    return DualQuantities(
        Pstar=s3 * sample.P, cos_phistar=cst, sin_phistar=sst, kstar=kstar, sstar=sstar,
        K=K, Kstar=Kstar, A=A, Astar=Astar, Nstar=Nstar, phistar_z=phistar_z,
        w=-cphi**2, wstar=-cst**2)


@dataclass(frozen=True)
class InvariantMaps:
    InvI: np.ndarray
    InvD: tuple


def invariant_maps(sample, sigma: SchoutenEigen, kappa: CurvatureSet, fstar_value, K) -> InvariantMaps:
    """Kf + A and f* + sigma_i f + kappa_i N."""
    f, N = sample.f, sample.N
    fstar_value = np.asarray(fstar_value, dtype=float)
    for i in (0, 1):
        if np.any(np.asarray(sigma[i]) == 0):
            raise UndefinedInvD(f"sigma_{i + 1} vanishes")
    A = -sample.X_gamma + sample.phi_z[..., None] * N
    InvI = np.asarray(K)[..., None] * f + A
    InvD = tuple(fstar_value + np.asarray(sigma[i])[..., None] * f
                 + np.asarray(kappa[i])[..., None] * N for i in range(3))
    return InvariantMaps(InvI=InvI, InvD=InvD)


def sample_algebra(sample):
    """Curvatures and Schouten eigenvalues of a sample."""
    k = principal_curvatures(sample.P, sample.phi, sample.kappa3)
    return k, schouten_eigenvalues(k)


# closed-form duals ---------------------------------------------------------

def dual_a_mu0(sample):
    """f* = (P^-2/2)(-f + 2<f,B>B) with B = X_gamma constant."""
    f, B = sample.f, sample.X_gamma
    proj = np.sum(f * B, axis=-1)[..., None]
    return (0.5 / sample.P**2)[..., None] * (-f + 2.0 * proj * B)


def dual_a_muz(sample, C, q, B):
    """-(C^2/2) f - kappa3 N + q(z) B."""
    q = np.asarray(q, dtype=float)
    return -(0.5 * C**2) * sample.f - sample.kappa3[..., None] * sample.N + q[..., None] * np.asarray(B)


def q_from_mu(z, z_base, C, c1, mu):
    """q(z) = integral of C c1 cos^2 mu from z_base to z."""
    from scipy.integrate import quad

    z = np.atleast_1d(np.asarray(z, dtype=float))
    out = np.array([quad(lambda t: C * c1 * np.cos(mu(t)) ** 2, z_base, zi,
                         epsabs=1e-13, epsrel=1e-13)[0] for zi in z.ravel()])
    return out.reshape(z.shape)


def dual_b_partial(sample, sigma3):
    """sigma3(x,y) f; the translation part W(x,y) is not included."""
    return np.asarray(sigma3)[..., None] * sample.f


def dual_c_mu0(sample, sigma3):
    return -np.asarray(sigma3)[..., None] * sample.f


def dual_c_muz(sample, sigma3):
    return -(np.asarray(sigma3)[..., None] * sample.f + sample.kappa3[..., None] * sample.N)


def exact_dual(entry, base=None):
    """Closed-form dual sampler anchored so that f*(base) = 0.

    Parameters
    ----------
    entry : CatalogueEntry
    base : sequence of 3 floats, optional
        Anchor coordinates; defaults to the lower corner of the entry's window.

    Returns
    -------
    callable
        ``(x, y, z) -> array (..., 4)``.
    """
    cls = entry.structure_class
    if cls == "Generic":
        raise Unsupported(f"{entry.name}: no closed-form dual for generic entries")
    if base is None:
        base = [w[0] for w in entry.window]
    p = entry.params

    if entry.exact_dual is not None:
        raw = entry.exact_dual
    elif cls == "A_mu0":
        def raw(x, y, z):
            return dual_a_mu0(entry.sample(x, y, z))
    elif cls == "A_muz":
        def raw(x, y, z):
            s = entry.sample(x, y, z)
            q = q_from_mu(np.broadcast_to(z, s.P.shape), base[2], p["C"], p["c1"], p["mu"])
            return dual_a_muz(s, p["C"], q, p["B"])
    elif cls in ("B", "C_mu0", "C_muz"):
        def raw(x, y, z):
            s = entry.sample(x, y, z)
            _, sig = sample_algebra(s)
            if cls == "B":
                return dual_b_partial(s, sig.s3)
            if cls == "C_mu0":
                return dual_c_mu0(s, sig.s3)
            return dual_c_muz(s, sig.s3)
    else:
        raise Unsupported(f"unknown structure class {cls}")

    ref = np.asarray(raw(*[np.asarray(float(b)) for b in base]))

    def anchored(x, y, z):
        return np.asarray(raw(x, y, z)) - ref

    if cls == "B":
        raise PartialForm(f"{entry.name}: W(x,y) unresolved; sigma3 f part attached", partial=anchored)
    return anchored


# identity residuals -------------------------------------------------------------

def _shift(p, axis, t):
    q = list(p)
    q[axis] = q[axis] + t
    return q


def _stencil(value_at, h):
    from ._fd import _D1
    offsets, weights = _D1
    return sum(w * value_at(o * h) for o, w in zip(offsets, weights)) / h


def _unit_sin(u, v, floor=1e-8):
    """sin of the angle between u and v; nan where either is shorter than ``floor``."""
    nu = np.linalg.norm(u, axis=-1)
    nv = np.linalg.norm(v, axis=-1)
    ok = (nu > floor) & (nv > floor)
    uu = u / np.where(ok, nu, 1.0)[..., None]
    vv = v / np.where(ok, nv, 1.0)[..., None]
    perp = uu - np.sum(uu * vv, axis=-1)[..., None] * vv
    return np.where(ok, np.linalg.norm(perp, axis=-1), np.nan)


class _Local:
    """Pointwise data of an entry, with f* in the gauge f*(p) = 0 at the stencil centre."""

    def __init__(self, entry, h, m, analytic):
        from .samplers import scalar_gradients
        self.e = entry
        self.h = h
        self.m = m
        self.grad = lambda x, y, z: scalar_gradients(
            entry if analytic else _no_gradients(entry), x, y, z, h)

    def at(self, p):
        s = self.e.sample(*p)
        k, sig = sample_algebra(s)
        gp, _ = self.grad(*p)
        K = -gp[..., 2] + k.k3 * s.phi_z
        return s, k, sig, K

    def fstar(self, p, axis, t):
        from .reference_dual import integrate_dual_edge
        if t == 0:
            return 0.0
        return integrate_dual_edge(self.e, p, axis, t, self.m)


def _no_gradients(entry):
    from dataclasses import replace
    return replace(entry, gradients=None) if entry.gradients is not None else entry


def _col(a):
    return np.asarray(a)[..., None]


def dual_invariant_residuals(entry, x, y, z, h, m=16, analytic=False):
    """Residual arrays of the derivative identities for f* + sigma3 f + kappa3 N and Kf + A."""
    L = _Local(entry, h, m, analytic)
    p = [np.asarray(x, float), np.asarray(y, float), np.asarray(z, float)]
    s, k, sig, K = L.at(p)
    pinv = 1.0 / s.P
    f, N = s.f, s.N
    dq = dual_quantities(s, sig, k, -(K - k.k3 * s.phi_z))
    InvI = _col(K) * f + dq.A
    Astar = dq.Astar  # K* f* + A* with f*(p) = 0
    gp, gk = L.grad(*p)

    def invd(axis, scale):
        def value(t):
            q = _shift(p, axis, t)
            sq, kq, sgq, _ = L.at(q)
            v = L.fstar(p, axis, t) + _col(sgq.s3) * sq.f + _col(kq.k3) * sq.N
            return _col(scale(sgq.s3)) * v
        return value

    def invi(axis):
        def value(t):
            sq, kq, sgq, Kq = L.at(_shift(p, axis, t))
            return _col(Kq) * sq.f - sq.X_gamma + _col(sq.phi_z) * sq.N
        return value

    one = lambda s3: np.ones_like(s3)
    phi_z = lambda t: L.e.sample(*_shift(p, 0, t)).phi_z
    phi_zy = _stencil(lambda t: L.e.sample(*_shift(p, 1, t)).phi_z, h)
    phi_zx = _stencil(phi_z, h)
    out = {}
    out["invd3_x"] = _stencil(invd(0, one), h) - _col(gk[..., 0]) * (_col(k.k2) * f + N)
    out["invd3_y"] = _stencil(invd(1, one), h) - _col(gk[..., 1]) * (_col(k.k1) * f + N)
    out["invd3_z"] = _stencil(invd(2, one), h) + _col(pinv) * InvI
    out["invd3_z_sqrt"] = (_stencil(invd(2, lambda s3: 1.0 / np.sqrt(s3)), h)
                           + _col(1.0 / (2.0 * s.P * np.sqrt(sig.s3))) * (InvI + Astar))
    out["invd3_z_scaled"] = _stencil(invd(2, lambda s3: 1.0 / s3), h) + _col(1.0 / dq.Pstar) * Astar
    out["inversion_invariant_x"] = _stencil(invi(0), h) - _col(phi_zx) * (_col(k.k2) * f + N)
    out["inversion_invariant_y"] = _stencil(invi(1), h) - _col(phi_zy) * (_col(k.k1) * f + N)
    out["invariant_difference"] = (InvI - Astar) - _col(K / sig.s3) * (_col(sig.s3) * f + _col(k.k3) * N)
    return {name: np.linalg.norm(r, axis=-1) for name, r in out.items()}


def inversion_invariance_residual(entry, q, x, y, z, h=None, analytic=False):
    """|K^q i(f) + A^q - (Kf + A) + K q| with K^q, A^q from the inverted entry."""
    from .samplers import invert_entry
    q = np.asarray(q, dtype=float)
    twin = invert_entry(entry, q)
    h = h or 1e-3 * max(hi - lo for lo, hi in entry.window)
    L0 = _Local(entry, h, 2, analytic)
    L1 = _Local(twin, h, 2, analytic)
    p = [np.asarray(x, float), np.asarray(y, float), np.asarray(z, float)]
    s, _, _, K = L0.at(p)
    sq, _, _, Kq = L1.at(p)
    lhs = _col(Kq) * sq.f - sq.X_gamma + _col(sq.phi_z) * sq.N
    rhs = _col(K) * s.f - s.X_gamma + _col(s.phi_z) * s.N - _col(K) * q
    return np.linalg.norm(lhs - rhs, axis=-1)


def parallelism_residuals(entry, q, x, y, z, h, m=16, analytic=False):
    """sin of angles between the vectors paired under inversion in q.

    Compares derivatives of f* + sigma3 (f - q) + kappa3 N with those of the
    same map for the inverted entry and of K (f - q) + A (itself, for z).
    """
    from .samplers import invert_entry
    q = np.asarray(q, dtype=float)
    twin = invert_entry(entry, q)
    La = _Local(entry, h, m, analytic)
    Lb = _Local(twin, h, m, analytic)
    p = [np.asarray(x, float), np.asarray(y, float), np.asarray(z, float)]

    def invd(L, axis, shift):
        def value(t):
            qq = _shift(p, axis, t)
            sq, kq, sgq, _ = L.at(qq)
            return L.fstar(p, axis, t) + _col(sgq.s3) * (sq.f - shift) + _col(kq.k3) * sq.N
        return value

    def invi(axis):
        def value(t):
            sq, _, _, Kq = La.at(_shift(p, axis, t))
            return _col(Kq) * (sq.f - q) - sq.X_gamma + _col(sq.phi_z) * sq.N
        return value

    out = {}
    for axis, name in enumerate("xyz"):
        a = _stencil(invd(La, axis, q), h)
        b = _stencil(invd(Lb, axis, 0.0), h)
        c = _stencil(invi(axis), h) if axis < 2 else invi(axis)(0.0)
        out[f"parallel_{name}"] = np.fmax(_unit_sin(a, b), _unit_sin(b, c))
    return out


def dual_invariant_self_duality(entry, lattice, m=16):
    """max |(f** + sigma3* f* + kappa3* N*) - (f* + sigma3 f + kappa3 N)/sigma3| over nodes."""
    from .reference_dual import _path_values, double_dual_form, reference_dual_lattice
    F = reference_dual_lattice(entry, lattice, m)
    ff = _path_values(entry, lattice, m, "xyz", double_dual_form)
    X, Y, Z = lattice.nodes()
    s = entry.sample(X, Y, Z)
    k, sig = sample_algebra(s)
    dq = dual_quantities(s, sig, k, np.zeros_like(s.P))
    fss = ff + s.f[0, 0, 0]
    lhs = fss + _col(dq.sstar[..., 2]) * F.values + _col(dq.kstar[..., 2]) * dq.Nstar
    rhs = _col(1.0 / sig.s3) * (F.values + _col(sig.s3) * s.f + _col(k.k3) * s.N)
    return float(np.max(np.linalg.norm(lhs - rhs, axis=-1)))


def identity_residuals(entry, domain=None, h_list=None, grid=5, q=(0.0, 0.0, 0.0, 5.0), m=16,
                       tol=1e-6, analytic=False, lattice_n=4):
    """Residuals of the dual and inversion invariant identities.

    Derivative identities are evaluated for each step in ``h_list`` with f*
    differences integrated from the one-form; the remaining checks do not
    depend on the step and are reported once.
    """
    from ._fd import fit_order
    from .core import IdentityResult, ResidualReport, build_lattice

    domain = domain or entry.default_domain()
    if h_list is None:
        h_list = tuple(c * domain.a for c in (1e-2, 5e-3, 2.5e-3))
    x, y, z = domain.grid(grid)
    report = ResidualReport(entry=entry.name, mode="analytic" if analytic else "fd", tol=tol)
    sups = {}
    for h in h_list:
        for name, r in dual_invariant_residuals(entry, x, y, z, h, m, analytic).items():
            sups.setdefault(name, []).append(float(np.max(r)))
    for name, r in sups.items():
        order = fit_order(h_list, r)
        ok = bool(np.all(np.isfinite(r))) and (r[-1] <= tol or (np.isfinite(order) and order >= 1.5))
        report.add(IdentityResult(name, r, list(h_list), order, ok))
    if q is not None:
        r32 = float(np.max(inversion_invariance_residual(entry, q, x, y, z, analytic=analytic)))
        report.add(IdentityResult("inversion_invariance", [r32], [None], np.nan, r32 <= 1e-9))
        par = parallelism_residuals(entry, q, x, y, z, h_list[-1], m, analytic)
        for name, r in par.items():
            v = float(np.nanmax(r)) if np.any(np.isfinite(r)) else 0.0
            report.add(IdentityResult(name, [v], [h_list[-1]], np.nan, v <= 1e-6))
    lat = build_lattice(domain, lattice_n)
    r34 = dual_invariant_self_duality(entry, lat, m)
    report.add(IdentityResult("dual_invariant_self_duality", [r34], [None], np.nan, r34 <= 1e-7))
    return report


# degenerate points ----------------------------------------------------------------

@dataclass(frozen=True)
class DegeneratePoint:
    point: tuple
    axis: int
    transversal: bool
    derivative: float


def scan_roots(fun, lo, hi, samples=65, deriv=None, xtol=1e-10, rel_tol=1e-6):
    """Roots of a scalar function on [lo, hi].

    Sign changes are refined by bisection; touching zeros (local minima of
    |fun| that reach zero without a sign change) by bounded minimisation.
    Returns a list of ``(root, derivative, transversal)``.
    """
    from scipy.optimize import bisect, minimize_scalar

    t = np.linspace(lo, hi, samples)
    v = np.array([float(fun(ti)) for ti in t])
    scale = max(1.0, float(np.max(np.abs(v))))
    roots = []
    for i in range(samples - 1):
        if v[i] == 0.0:
            roots.append(t[i])
        elif v[i] * v[i + 1] < 0:
            roots.append(bisect(fun, t[i], t[i + 1], xtol=xtol))
    if v[-1] == 0.0:
        roots.append(t[-1])
    for i in range(1, samples - 1):
        a = abs(v[i])
        if a <= abs(v[i - 1]) and a <= abs(v[i + 1]) and v[i - 1] * v[i + 1] > 0 and v[i] != 0:
            r = minimize_scalar(lambda s: abs(fun(s)), bounds=(t[i - 1], t[i + 1]),
                                method="bounded", options={"xatol": xtol})
            if abs(fun(r.x)) <= 1e-12 * scale:
                roots.append(float(r.x))
    out = []
    for r in sorted(roots):
        if deriv is None:
            hh = 1e-5 * (hi - lo)
            d = (fun(r + hh) - fun(r - hh)) / (2 * hh)
        else:
            d = float(deriv(r))
        out.append((float(r), float(d), bool(abs(d) > rel_tol * scale)))
    return out


def sigma_slope_criterion(entry, x, y, z, axis):
    """Derivative of sigma1 along x (axis 0) or sigma2 along y (axis 1) from 1/P, kappa3, phi.

    2 (sigma1)_x = -2 (P cos^2 phi)^-1 [(1/P)_x - kappa3 phi_x], and the y
    analogue with sin^2 phi.
    """
    from .samplers import scalar_gradients
    s = entry.sample(x, y, z)
    gp, _ = scalar_gradients(entry, x, y, z)
    g = s.phi_grad
    if axis == 0:
        return -(gp[..., 0] - s.kappa3 * g[..., 0]) / (s.P * np.cos(s.phi) ** 2)
    return -(gp[..., 1] - s.kappa3 * g[..., 1]) / (s.P * np.sin(s.phi) ** 2)


def detect_degenerate(entry, domain=None, grid=9, samples=65):
    """Zeros of sigma1 along x-lines and sigma2 along y-lines on a ``grid`` x ``grid`` family."""
    domain = domain or entry.default_domain()
    b = domain.bounds()
    found = []
    for axis in (0, 1):
        others = [a for a in range(3) if a != axis]
        c0 = np.linspace(*b[others[0]], grid)
        c1 = np.linspace(*b[others[1]], grid)
        for u in c0:
            for v in c1:
                def point(t, u=u, v=v):
                    p = [0.0, 0.0, 0.0]
                    p[axis], p[others[0]], p[others[1]] = t, u, v
                    return [np.asarray(c) for c in p]

                def sig(t, point=point):
                    s = entry.sample(*point(t))
                    return float(sample_algebra(s)[1][axis])

                def deriv(t, point=point):
                    return float(sigma_slope_criterion(entry, *point(t), axis))

                for r, d, tr in scan_roots(sig, *b[axis], samples=samples, deriv=deriv):
                    found.append(DegeneratePoint(tuple(float(c) for c in point(r)), axis, tr, d))
    return found

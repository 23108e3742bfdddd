"""Analytic hypersurface catalogue and structural-identity validation."""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np

from . import _fd
from .core import Domain, FrameSample, IdentityResult, ResidualReport, build_domain
from .errors import CenterTooClose, InvalidWindow, NotOrthogonal
from .invariants import dual_a_mu0, principal_curvatures, schouten_eigenvalues

STRUCTURE_CLASSES = ("A_mu0", "A_muz", "B", "C_mu0", "C_muz", "Generic")


@dataclass(frozen=True)
class CatalogueEntry:
    """An analytic hypersurface in canonical curvature-line coordinates.

    ``sample(x, y, z)`` broadcasts over array arguments.  ``gradients``, when
    present, returns analytic gradients of 1/P and kappa3 as a pair of
    ``(..., 3)`` arrays.  ``window`` is the coordinate box where the sampler is
    valid.
    """

    name: str
    structure_class: str
    params: dict
    sample: Callable
    window: tuple
    exact_dual: Optional[Callable] = None
    gradients: Optional[Callable] = None

    def default_domain(self) -> Domain:
        (x0, x1), (y0, y1), (z0, z1) = self.window
        return build_domain(x0, x1, y0, y1, z0, z1)

    def describe(self):
        return {"name": self.name, "structure_class": self.structure_class,
                "params": _jsonable(self.params), "window": [list(w) for w in self.window],
                "exact_dual": self.exact_dual is not None,
                "analytic_gradients": self.gradients is not None}


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items() if not callable(v)}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.generic):
        return obj.item()
    return obj


def _vec(*comps):
    comps = np.broadcast_arrays(*[np.asarray(c, dtype=float) for c in comps])
    return np.stack(comps, axis=-1)


# pseudosphere cylinder -----------------------------------------------------

def pseudosphere_cylinder(P_const=1.0, u_window=(0.5, 1.5), v_window=(0.0, 1.0),
                          z_window=(0.0, 1.0)) -> CatalogueEntry:
    """Tractrix pseudosphere crossed with a line.

    f(u, v, z) = P (sech u cos v, sech u sin v, u - tanh u, z), so that
    (u, v, z) are canonical curvature-line coordinates with constant P,
    cos(phi) = tanh u, sin(phi) = sech u and kappa3 = 0.
    """
    P_const = float(P_const)
    if P_const <= 0:
        raise ValueError("P_const must be positive")
    if min(u_window) <= 0:
        raise InvalidWindow("InvalidWindow: u_window must stay away from u = 0")

    def sample(x, y, z):
        u, v, z = np.broadcast_arrays(*[np.asarray(t, dtype=float) for t in (x, y, z)])
        sech = 1.0 / np.cosh(u)
        th = np.tanh(u)
        cv, sv = np.cos(v), np.sin(v)
        zero = np.zeros_like(u)
        one = np.ones_like(u)
        return FrameSample(
            f=P_const * _vec(sech * cv, sech * sv, u - th, z),
            X_alpha=_vec(-sech * cv, -sech * sv, th, zero),
            X_beta=_vec(-sv, cv, zero, zero),
            X_gamma=_vec(zero, zero, zero, one),
            N=_vec(th * cv, th * sv, sech, zero),
            P=P_const * one,
            phi=np.arctan2(sech, th),
            kappa3=zero,
            phi_x=-sech,
            phi_y=zero,
            phi_z=zero,
        )

    def gradients(x, y, z):
        shape = np.broadcast_shapes(np.shape(x), np.shape(y), np.shape(z))
        return np.zeros(shape + (3,)), np.zeros(shape + (3,))

    def fstar(x, y, z):
        return dual_a_mu0(sample(x, y, z))

    return CatalogueEntry(
        name="pseudosphere-cylinder", structure_class="A_mu0",
        params={"P": P_const, "u_window": list(u_window), "v_window": list(v_window),
                "z_window": list(z_window)},
        sample=sample, window=(tuple(u_window), tuple(v_window), tuple(z_window)),
        exact_dual=fstar, gradients=gradients)


# conformal and Euclidean images --------------------------------------------

def _reflect(Z, d, r2):
    return Z - (2.0 * np.sum(Z * d, axis=-1) / r2)[..., None] * d


def _window_grid(window, m=9):
    axes = [np.linspace(lo, hi, m) for lo, hi in window]
    return [g.ravel() for g in np.meshgrid(*axes, indexing="ij")]


def invert_entry(entry: CatalogueEntry, q, name: Optional[str] = None) -> CatalogueEntry:
    """Image of ``entry`` under x -> (x - q)/|x - q|^2."""
    q = np.asarray(q, dtype=float).reshape(4)
    a = max(hi - lo for lo, hi in entry.window)
    s = entry.sample(*_window_grid(entry.window))
    dmin = float(np.min(np.linalg.norm(s.f - q, axis=-1)))
    if dmin < 1e-3 * a:
        raise CenterTooClose(f"CenterTooClose: min |f - q| = {dmin:.3e}")

    def sample(x, y, z):
        b = entry.sample(x, y, z)
        d = b.f - q
        r2 = np.sum(d * d, axis=-1)
        return FrameSample(
            f=d / r2[..., None],
            X_alpha=_reflect(b.X_alpha, d, r2),
            X_beta=_reflect(b.X_beta, d, r2),
            X_gamma=_reflect(b.X_gamma, d, r2),
            N=_reflect(b.N, d, r2),
            P=b.P / r2,
            phi=b.phi,
            kappa3=r2 * b.kappa3 + 2.0 * np.sum(b.N * d, axis=-1),
            phi_x=b.phi_x, phi_y=b.phi_y, phi_z=b.phi_z,
        )

    gradients = None
    if entry.gradients is not None:
        def gradients(x, y, z):
            b = entry.sample(x, y, z)
            gp, gk = entry.gradients(x, y, z)
            k = principal_curvatures(b.P, b.phi, b.kappa3)
            d = b.f - q
            r2 = np.sum(d * d, axis=-1)
            pinv = 1.0 / b.P
            gpq = np.empty_like(gp)
            gkq = np.empty_like(gk)
            for ax in range(3):
                t = 2.0 * np.sum(d * b.tangent(ax), axis=-1)
                gpq[..., ax] = t * pinv + r2 * gp[..., ax]
                gkq[..., ax] = t * (b.kappa3 - k[ax]) + r2 * gk[..., ax]
            return gpq, gkq

    params = {"q": q.tolist(), "base": entry.name, "base_params": entry.params}
    return CatalogueEntry(
        name=name or f"inverted({entry.name})", structure_class="Generic", params=params,
        sample=sample, window=entry.window, exact_dual=None, gradients=gradients)


def rigid_motion_entry(entry: CatalogueEntry, rotation, translation) -> CatalogueEntry:
    R = np.asarray(rotation, dtype=float).reshape(4, 4)
    t = np.asarray(translation, dtype=float).reshape(4)
    if np.max(np.abs(R.T @ R - np.eye(4))) > 1e-12 or abs(np.linalg.det(R) - 1.0) > 1e-12:
        raise NotOrthogonal("NotOrthogonal: rotation must be orthogonal with det +1")

    def sample(x, y, z):
        b = entry.sample(x, y, z)
        return replace(b, f=b.f @ R.T + t, X_alpha=b.X_alpha @ R.T, X_beta=b.X_beta @ R.T,
                       X_gamma=b.X_gamma @ R.T, N=b.N @ R.T)

    fstar = None
    if entry.exact_dual is not None:
        def fstar(x, y, z):
            return np.asarray(entry.exact_dual(x, y, z)) @ R.T

    params = {"rotation": R.tolist(), "translation": t.tolist(), "base": entry.name,
              "base_params": entry.params}
    return CatalogueEntry(
        name=f"moved({entry.name})", structure_class=entry.structure_class, params=params,
        sample=sample, window=entry.window, exact_dual=fstar, gradients=entry.gradients)


def swap_xy_entry(entry: CatalogueEntry) -> CatalogueEntry:
    """Same hypersurface with the roles of x and y exchanged (phi -> phi + pi/2)."""

    def sample(x, y, z):
        b = entry.sample(y, x, z)
        return FrameSample(f=b.f, X_alpha=-b.X_beta, X_beta=b.X_alpha, X_gamma=b.X_gamma,
                           N=b.N, P=b.P, phi=b.phi + 0.5 * np.pi, kappa3=b.kappa3,
                           phi_x=b.phi_y, phi_y=b.phi_x, phi_z=b.phi_z)

    gradients = None
    if entry.gradients is not None:
        def gradients(x, y, z):
            gp, gk = entry.gradients(y, x, z)
            return gp[..., [1, 0, 2]], gk[..., [1, 0, 2]]

    fstar = None
    if entry.exact_dual is not None:
        def fstar(x, y, z):
            return entry.exact_dual(y, x, z)

    w = entry.window
    return CatalogueEntry(
        name=f"swapped({entry.name})", structure_class=entry.structure_class,
        params={"base": entry.name, "base_params": entry.params}, sample=sample,
        window=(w[1], w[0], w[2]), exact_dual=fstar, gradients=gradients)


def offset_kappa3(entry: CatalogueEntry, offset: float) -> CatalogueEntry:
    """Deliberately inconsistent entry: kappa3 shifted by a constant."""

    def sample(x, y, z):
        b = entry.sample(x, y, z)
        return replace(b, kappa3=b.kappa3 + offset)

    return CatalogueEntry(
        name=f"offset({entry.name})", structure_class="Generic",
        params={"offset": offset, "base": entry.name}, sample=sample, window=entry.window,
        exact_dual=None, gradients=entry.gradients)


def cusp_center(entry: CatalogueEntry, anchor=(1.0, 0.5, 0.5), branch: str = "near"):
    """Inversion center on the normal line at ``anchor`` making sigma1 vanish there.

    With q = f - t N at the anchor, sigma1 of the inverted entry is
    t^2 (sigma1 t^2 + 2 kappa1 t + 2), so t solves that quadratic.
    """
    s = entry.sample(*[np.asarray(float(c)) for c in anchor])
    k = principal_curvatures(s.P, s.phi, s.kappa3)
    sig = schouten_eigenvalues(k)
    roots = np.roots([float(sig.s1), 2.0 * float(k.k1), 2.0])
    roots = np.sort(roots[np.isreal(roots)].real)
    if roots.size == 0:
        raise ValueError("no real inversion radius makes sigma1 vanish")
    t = roots[-1] if branch == "far" else roots[0]
    return s.f - t * s.N


# derivative helpers ---------------------------------------------------------

def _default_step(entry):
    return 1e-3 * max(hi - lo for lo, hi in entry.window)


def scalar_gradients(entry: CatalogueEntry, x, y, z, h: Optional[float] = None):
    """Gradients of 1/P and kappa3, analytic when available."""
    if entry.gradients is not None:
        return entry.gradients(x, y, z)
    h = h or _default_step(entry)

    def pinv(x, y, z):
        return 1.0 / entry.sample(x, y, z).P

    def k3(x, y, z):
        return entry.sample(x, y, z).kappa3

    gp = np.stack([_fd.partial(pinv, ax, h)(x, y, z) for ax in range(3)], axis=-1)
    gk = np.stack([_fd.partial(k3, ax, h)(x, y, z) for ax in range(3)], axis=-1)
    return gp, gk


def curvature_gradients(entry: CatalogueEntry, x, y, z, h: Optional[float] = None):
    """Array ``(..., 3, 3)`` with entry [i, j] = d kappa_{i+1} / d x_j."""
    s = entry.sample(x, y, z)
    gp, gk = scalar_gradients(entry, x, y, z, h)
    pinv = (1.0 / s.P)[..., None]
    sn, cs = np.sin(s.phi)[..., None], np.cos(s.phi)[..., None]
    dphi = s.phi_grad
    dk1 = gp * sn / cs + pinv * dphi / cs**2 + gk
    dk2 = -gp * cs / sn + pinv * dphi / sn**2 + gk
    return np.stack([dk1, dk2, gk], axis=-2)


# catalogue registry ---------------------------------------------------------

_WINDOW_SCHEMA = {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2}
_VEC4 = {"type": "array", "items": {"type": "number"}, "minItems": 4, "maxItems": 4}
_BASE_PROPS = {"P": {"type": "number", "exclusiveMinimum": 0}, "u_window": _WINDOW_SCHEMA,
               "v_window": _WINDOW_SCHEMA, "z_window": _WINDOW_SCHEMA}

CATALOGUE = {
    "pseudosphere-cylinder": {
        "description": "tractrix pseudosphere times a line; closed-form dual",
        "schema": {"type": "object", "properties": dict(_BASE_PROPS), "additionalProperties": False},
    },
    "inverted-pseudosphere": {
        "description": "pseudosphere cylinder after inversion in a unit sphere at q",
        "schema": {"type": "object", "properties": dict(_BASE_PROPS, q=_VEC4),
                   "additionalProperties": False},
    },
    "cusp-pseudosphere": {
        "description": "inverted pseudosphere with q on the normal line so that sigma1 vanishes at anchor",
        "schema": {"type": "object",
                   "properties": dict(_BASE_PROPS,
                                      anchor={"type": "array", "items": {"type": "number"},
                                              "minItems": 3, "maxItems": 3},
                                      branch={"enum": ["near", "far"]}),
                   "additionalProperties": False},
    },
    "moved-pseudosphere": {
        "description": "pseudosphere cylinder after a rigid motion",
        "schema": {"type": "object",
                   "properties": dict(_BASE_PROPS,
                                      rotation={"type": "array", "items": _VEC4,
                                                "minItems": 4, "maxItems": 4},
                                      translation=_VEC4),
                   "additionalProperties": False},
    },
}


def make_entry(name: str, params: Optional[dict] = None) -> CatalogueEntry:
    """Build a catalogue entry by name from a JSON-style parameter object."""
    import jsonschema

    if name not in CATALOGUE:
        raise KeyError(f"unknown catalogue entry {name!r}")
    params = dict(params or {})
    jsonschema.validate(params, CATALOGUE[name]["schema"])
    base_kw = {k: params.pop(k) for k in list(params) if k in _BASE_PROPS}
    if "P" in base_kw:
        base_kw["P_const"] = base_kw.pop("P")
    base = pseudosphere_cylinder(**base_kw)
    if name == "pseudosphere-cylinder":
        return base
    if name == "inverted-pseudosphere":
        return invert_entry(base, params.get("q", [0.0, 0.0, 0.0, 5.0]), name=name)
    if name == "cusp-pseudosphere":
        q = cusp_center(base, params.get("anchor", (1.0, 0.5, 0.5)), params.get("branch", "near"))
        return invert_entry(base, q, name=name)
    moved = rigid_motion_entry(base, params.get("rotation", np.eye(4)),
                               params.get("translation", np.zeros(4)))
    return replace(moved, name=name)


# structural identity validation -------------------------------------------

class _Fields:
    """Scalar and vector fields of an entry with derivatives at step ``h``."""

    def __init__(self, entry, h, analytic):
        self.e = entry
        self.h = h
        self.analytic = analytic and entry.gradients is not None

    def s(self, x, y, z):
        return self.e.sample(x, y, z)

    def d(self, fun, axis):
        return _fd.partial(fun, axis, self.h)

    def pinv(self, x, y, z):
        return 1.0 / self.s(x, y, z).P

    def k3(self, x, y, z):
        return self.s(x, y, z).kappa3

    def phi(self, x, y, z):
        return self.s(x, y, z).phi

    def dphi(self, axis):
        return lambda x, y, z: self.s(x, y, z).phi_grad[..., axis]

    def ddphi(self, a1, a2):
        return self.d(self.dphi(a2), a1)

    def dpinv(self, axis):
        if self.analytic:
            return lambda x, y, z: self.e.gradients(x, y, z)[0][..., axis]
        return self.d(self.pinv, axis)

    def ddpinv(self, a1, a2):
        if self.analytic:
            return self.d(self.dpinv(a2), a1)
        return _fd.mixed(self.pinv, a1, a2, self.h)

    def dk3(self, axis):
        if self.analytic:
            return lambda x, y, z: self.e.gradients(x, y, z)[1][..., axis]
        return self.d(self.k3, axis)

    def kappa(self, i):
        def g(x, y, z):
            s = self.s(x, y, z)
            return principal_curvatures(s.P, s.phi, s.kappa3)[i]
        return g

    def sigma(self, i):
        def g(x, y, z):
            s = self.s(x, y, z)
            return schouten_eigenvalues(principal_curvatures(s.P, s.phi, s.kappa3))[i]
        return g

    def dkappa(self, i, axis):
        if self.analytic:
            return lambda x, y, z: curvature_gradients(self.e, x, y, z)[..., i, axis]
        return self.d(self.kappa(i), axis)

    def dsigma(self, i, axis):
        if not self.analytic:
            return self.d(self.sigma(i), axis)

        def g(x, y, z):
            s = self.s(x, y, z)
            k = principal_curvatures(s.P, s.phi, s.kappa3)
            dk = curvature_gradients(self.e, x, y, z)[..., axis]
            d = [dk[..., j] for j in range(3)]
            # d(k_a k_b) for the pairs (12), (23), (31)
            p12 = d[0] * k.k2 + k.k1 * d[1]
            p23 = d[1] * k.k3 + k.k2 * d[2]
            p31 = d[2] * k.k1 + k.k3 * d[0]
            signs = ((1, -1, 1), (1, 1, -1), (-1, 1, 1))[i]
            return 0.5 * (signs[0] * p12 + signs[1] * p23 + signs[2] * p31)
        return g

    def K(self, x, y, z):
        s = self.s(x, y, z)
        return -self.dpinv(2)(x, y, z) + s.kappa3 * s.phi_z

    def vec(self, name):
        return lambda x, y, z: getattr(self.s(x, y, z), name)


def _norm(r):
    r = np.asarray(r)
    return np.linalg.norm(r, axis=-1) if r.ndim and r.shape[-1] == 4 else np.abs(r)


def structural_identities(F: _Fields, x, y, z):
    """Residual arrays of every structural identity at the points (x, y, z)."""
    s = F.s(x, y, z)
    P, phi = s.P, s.phi
    pinv = 1.0 / P
    tn, ct = np.tan(phi), 1.0 / np.tan(phi)
    sn, cs = np.sin(phi), np.cos(phi)
    k = principal_curvatures(P, phi, s.kappa3)
    k1, k2, k3 = k.k1, k.k2, k.k3
    px, py, pz = (F.dpinv(a)(x, y, z) for a in range(3))
    fx, fy, fz = s.phi_x, s.phi_y, s.phi_z
    pxx, pyy, pzz = (F.ddpinv(a, a)(x, y, z) for a in range(3))
    pxy, pzx, pzy = F.ddpinv(0, 1)(x, y, z), F.ddpinv(2, 0)(x, y, z), F.ddpinv(2, 1)(x, y, z)
    fxx, fyy, fzz = (F.ddphi(a, a)(x, y, z) for a in range(3))
    fzx, fzy = F.ddphi(0, 2)(x, y, z), F.ddphi(1, 2)(x, y, z)
    k3x, k3y, k3z = (F.dk3(a)(x, y, z) for a in range(3))
    K = -pz + k3 * fz
    sig = schouten_eigenvalues(k)

    out = {}
    out["codazzi_xy"] = pxy - py * fx * ct + px * fy * tn
    out["codazzi_zx"] = pzx + px * fz * tn - pinv * fzx * ct
    out["codazzi_zy"] = pzy - py * fz * ct + pinv * fzy * tn
    psi_zz = (fxx - fyy - fzz * np.cos(2 * phi)) / np.sin(2 * phi)
    out["pinv_second_order"] = (-(pxx + 2 * fx * tn * px) - (pyy - 2 * fy * ct * py)
                                + pzz + 2 * psi_zz * pinv) - pinv
    out["kappa3_formula"] = ((tn * pxx - fx * np.cos(2 * phi) / cs**2 * px)
                             - (ct * pyy - fy * np.cos(2 * phi) / sn**2 * py)
                             + (pinv * fzz - pz * fz)) - k3
    zeta = (pinv * (2 * pzz + (-1 + fz**2 + 2 * psi_zz) * pinv)
            - (px**2 / cs**2 + py**2 / sn**2 + pz**2))
    out["zeta_kappa3_squared"] = zeta - k3**2
    out["kappa3_x"] = k3x + px * tn
    out["kappa3_y"] = k3y - py * ct
    out["kappa3_z"] = k3z + pinv * fz
    out["K_x"] = F.d(F.K, 0)(x, y, z) - k2 * fzx
    out["K_y"] = F.d(F.K, 1)(x, y, z) - k1 * fzy
    out["sigma3_x"] = F.dsigma(2, 0)(x, y, z) - k2 * k3x
    out["sigma3_y"] = F.dsigma(2, 1)(x, y, z) - k1 * k3y
    out["sigma3_z"] = F.dsigma(2, 2)(x, y, z) + pinv * K
    dk1y, dk1z = F.dkappa(0, 1)(x, y, z), F.dkappa(0, 2)(x, y, z)
    dk2x, dk2z = F.dkappa(1, 0)(x, y, z), F.dkappa(1, 2)(x, y, z)
    out["sigma1_y"] = F.dsigma(0, 1)(x, y, z) - dk1y * k3
    out["sigma1_z"] = F.dsigma(0, 2)(x, y, z) - dk1z * k2
    out["sigma2_x"] = F.dsigma(1, 0)(x, y, z) - dk2x * k3
    out["sigma2_z"] = F.dsigma(1, 2)(x, y, z) - dk2z * k1
    out["kappa1_y"] = dk1y - (py + pinv * fy * tn) / (sn * cs)
    out["kappa1_z"] = dk1z - (pz + pinv * fz * tn) * tn
    out["kappa2_x"] = dk2x - (-px + pinv * fx * ct) / (sn * cs)
    out["kappa2_z"] = dk2z - (-pz + pinv * fz * ct) * ct

    # derivatives of f* + sigma_i f + kappa_i N, with f*_x = sigma1 f_x etc.
    def invd(i):
        def g(x, y, z):
            t = F.s(x, y, z)
            kk = principal_curvatures(t.P, t.phi, t.kappa3)
            ss = schouten_eigenvalues(kk)
            return ss[i][..., None] * t.f + kk[i][..., None] * t.N
        return g

    tang = (s.f_x, s.f_y, s.f_z)
    f, N = s.f, s.N
    v = lambda c: np.asarray(c)[..., None]
    out["invd1_y"] = (v(sig.s2) * tang[1] + F.d(invd(0), 1)(x, y, z)) - v(dk1y) * (v(k3) * f + N)
    out["invd1_z"] = (v(sig.s3) * tang[2] + F.d(invd(0), 2)(x, y, z)) - v(dk1z) * (v(k2) * f + N)
    out["invd2_x"] = (v(sig.s1) * tang[0] + F.d(invd(1), 0)(x, y, z)) - v(dk2x) * (v(k3) * f + N)
    out["invd2_z"] = (v(sig.s3) * tang[2] + F.d(invd(1), 2)(x, y, z)) - v(dk2z) * (v(k1) * f + N)

    Xg = F.vec("X_gamma")
    pc = lambda x, y, z: F.s(x, y, z).P * np.cos(F.s(x, y, z).phi)
    ps = lambda x, y, z: F.s(x, y, z).P * np.sin(F.s(x, y, z).phi)
    out["xgamma_x"] = F.d(Xg, 0)(x, y, z) - v(pinv**2 / cs * F.d(pc, 2)(x, y, z)) * tang[0]
    out["xgamma_y"] = F.d(Xg, 1)(x, y, z) - v(pinv**2 / sn * F.d(ps, 2)(x, y, z)) * tang[1]
    out["xgamma_along_xgamma"] = (v(pinv) * F.d(Xg, 2)(x, y, z)
                                  - (v(px / cs) * s.X_alpha + v(py / sn) * s.X_beta + v(k3) * N))
    fpos = F.vec("f")
    Nf = F.vec("N")
    for ax, nm in enumerate("xyz"):
        out[f"tangent_{nm}"] = F.d(fpos, ax)(x, y, z) - tang[ax]
        out[f"weingarten_{nm}"] = F.d(Nf, ax)(x, y, z) + v(k[ax]) * tang[ax]
    return {name: _norm(r) for name, r in out.items()}


def validate_entry(entry: CatalogueEntry, domain: Optional[Domain] = None, h_list=None,
                   tol: float = 1e-6, grid: int = 5, analytic: bool = False) -> ResidualReport:
    """Sup residuals of the structural identities over a grid, for each FD step.

    With ``analytic=True`` and an entry that supplies gradients, first
    derivatives of 1/P and kappa3 are analytic and only second derivatives use
    differences.
    """
    domain = domain or entry.default_domain()
    if h_list is None:
        h_list = tuple(c * domain.a for c in (1e-2, 5e-3, 2.5e-3))
    x, y, z = domain.grid(grid)
    mode = "analytic" if (analytic and entry.gradients is not None) else "fd"
    report = ResidualReport(entry=entry.name, mode=mode, tol=tol)
    sups = {}
    for h in h_list:
        res = structural_identities(_Fields(entry, h, analytic), x, y, z)
        for name, r in res.items():
            sups.setdefault(name, []).append(float(np.max(r)))
    for name, r in sups.items():
        order = _fd.fit_order(h_list, r, floor=1e-300)
        passed = bool(np.all(np.isfinite(r))) and (r[-1] <= tol or (np.isfinite(order) and order >= 1.5))
        report.add(IdentityResult(name, r, list(h_list), order, passed))
    return report

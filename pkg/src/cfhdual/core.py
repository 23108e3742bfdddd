"""Domain, lattice and pointwise sample types, plus bound-constant estimation."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import InvalidN, SingularSample, UnequalSides


@dataclass(frozen=True)
class Domain:
    """Axis-aligned cube ``[x0,xe] x [y0,ye] x [z0,ze]`` of side ``a``."""

    x0: float
    xe: float
    y0: float
    ye: float
    z0: float
    ze: float

    @property
    def a(self) -> float:
        return self.xe - self.x0

    @property
    def lower(self) -> np.ndarray:
        return np.array([self.x0, self.y0, self.z0])

    @property
    def upper(self) -> np.ndarray:
        return np.array([self.xe, self.ye, self.ze])

    def bounds(self):
        return ((self.x0, self.xe), (self.y0, self.ye), (self.z0, self.ze))

    def grid(self, m: int):
        """Flattened coordinates of an ``m``-per-axis tensor grid."""
        axes = [np.linspace(lo, hi, m) for lo, hi in self.bounds()]
        X, Y, Z = np.meshgrid(*axes, indexing="ij")
        return X.ravel(), Y.ravel(), Z.ravel()

    def swapped(self) -> "Domain":
        return Domain(self.y0, self.ye, self.x0, self.xe, self.z0, self.ze)

    def to_dict(self):
        return {k: getattr(self, k) for k in ("x0", "xe", "y0", "ye", "z0", "ze")}


def build_domain(x0, xe, y0, ye, z0, ze) -> Domain:
    sides = np.array([xe - x0, ye - y0, ze - z0], dtype=float)
    if np.any(sides <= 0):
        raise ValueError("empty interval in domain")
    a = sides[0]
    if np.max(np.abs(sides - a)) > 1e-12 * a:
        raise UnequalSides(f"side lengths {sides.tolist()} differ")
    return Domain(float(x0), float(xe), float(y0), float(ye), float(z0), float(ze))


@dataclass(frozen=True)
class Lattice:
    """Uniform lattice with ``n`` cells per side of ``domain``."""

    domain: Domain
    n: int

    @property
    def delta(self) -> float:
        return self.domain.a / self.n

    def _coords(self, lo):
        # affine formula, never cumulative
        return lo + np.arange(self.n + 1) * self.domain.a / self.n

    @property
    def xs(self) -> np.ndarray:
        return self._coords(self.domain.x0)

    @property
    def ys(self) -> np.ndarray:
        return self._coords(self.domain.y0)

    @property
    def zs(self) -> np.ndarray:
        return self._coords(self.domain.z0)

    @property
    def node_count(self) -> int:
        return (self.n + 1) ** 3

    def nodes(self):
        X, Y, Z = np.meshgrid(self.xs, self.ys, self.zs, indexing="ij")
        return X, Y, Z


def build_lattice(domain: Domain, n: int) -> Lattice:
    if int(n) != n or n < 1:
        raise InvalidN(f"InvalidN: n must be a positive integer, got {n}")
    return Lattice(domain, int(n))


@dataclass(frozen=True)
class FrameSample:
    """Hypersurface data at one or many points.

    Vector fields have shape ``(..., 4)``, scalar fields shape ``(...)``.
    """

    f: np.ndarray
    X_alpha: np.ndarray
    X_beta: np.ndarray
    X_gamma: np.ndarray
    N: np.ndarray
    P: np.ndarray
    phi: np.ndarray
    kappa3: np.ndarray
    phi_x: np.ndarray
    phi_y: np.ndarray
    phi_z: np.ndarray

    @property
    def f_x(self):
        return (self.P * np.cos(self.phi))[..., None] * self.X_alpha

    @property
    def f_y(self):
        return (self.P * np.sin(self.phi))[..., None] * self.X_beta

    @property
    def f_z(self):
        return self.P[..., None] * self.X_gamma

    def tangent(self, axis: int):
        return (self.f_x, self.f_y, self.f_z)[axis]

    @property
    def phi_grad(self):
        return np.stack([self.phi_x, self.phi_y, self.phi_z], axis=-1)

    def frame(self):
        """Frame as an array of shape ``(..., 4, 4)``, rows X_alpha, X_beta, X_gamma, N."""
        return np.stack([self.X_alpha, self.X_beta, self.X_gamma, self.N], axis=-2)

    def gram_error(self) -> float:
        F = self.frame()
        G = F @ np.swapaxes(F, -1, -2)
        return float(np.max(np.abs(G - np.eye(4))))


@dataclass(frozen=True)
class BoundConstants:
    C1: float
    C2: float
    a: float
    C1_raw: float = field(default=np.nan)
    C2_raw: float = field(default=np.nan)
    safety: float = 1.0

    def slice_bound(self, n: int) -> float:
        """Per-slice bound ``4 C1^2 C2 a^2 / n``."""
        return 4.0 * self.C1**2 * self.C2 * self.a**2 / n

    def hypersurface_bound(self, n: int) -> float:
        """Whole-lattice bound ``6 C1^2 C2 a^3 / n``."""
        return 6.0 * self.C1**2 * self.C2 * self.a**3 / n

    def curve_bound(self, n: int) -> float:
        """Per-curve bound ``2 C1^2 C2 a^2 / n``."""
        return 2.0 * self.C1**2 * self.C2 * self.a**2 / n

    def to_dict(self):
        return {"C1": self.C1, "C2": self.C2, "a": self.a, "C1_raw": self.C1_raw,
                "C2_raw": self.C2_raw, "safety": self.safety}


def estimate_bound_constants(entry, domain: Domain, grid_m: int = 65,
                             safety: float = 1.1, h: Optional[float] = None) -> BoundConstants:
    """Grid sup estimate of C1 and C2 inflated by ``safety``.

    Curvature derivatives are analytic when ``entry.gradients`` is set and
    4th-order central differences otherwise.
    """
    from .samplers import curvature_gradients
    from .invariants import principal_curvatures

    if grid_m < 16:
        raise ValueError("grid_m must be at least 16")
    if safety < 1:
        raise ValueError("safety must be >= 1")
    axes = [np.linspace(lo, hi, grid_m) for lo, hi in domain.bounds()]
    c1 = 0.0
    c2 = 0.0
    # one z-slab at a time keeps memory flat; max is order independent
    for zk in axes[2]:
        X, Y = np.meshgrid(axes[0], axes[1], indexing="ij")
        Z = np.full_like(X, zk)
        s = entry.sample(X, Y, Z)
        if np.any(s.P <= 0) or np.any(np.abs(np.sin(s.phi) * np.cos(s.phi)) < 1e-12):
            raise SingularSample(f"{entry.name}: P <= 0 or sin(phi)cos(phi) = 0 on the grid")
        k = principal_curvatures(s.P, s.phi, s.kappa3)
        c1 = max(c1, float(np.max(s.P)), float(np.max(1.0 / s.P)),
                 float(np.max(np.abs(k.as_array()))))
        g = curvature_gradients(entry, X, Y, Z, h=h)
        c2 = max(c2, float(np.max(np.abs(g))))
    c2_floor = max(c2, np.finfo(float).eps)
    return BoundConstants(C1=safety * c1, C2=safety * c2_floor, a=domain.a,
                          C1_raw=c1, C2_raw=c2, safety=safety)


@dataclass
class IdentityResult:
    name: str
    residuals: list
    h: list
    order: float
    passed: bool

    def to_dict(self):
        return {"name": self.name, "residuals": [float(r) for r in self.residuals],
                "h": [None if v is None else float(v) for v in self.h],
                "order": None if not np.isfinite(self.order) else float(self.order),
                "passed": bool(self.passed)}


@dataclass
class ResidualReport:
    """Per-identity sup residuals, step sizes and fitted refinement orders."""

    entry: str
    mode: str
    results: dict = field(default_factory=dict)
    tol: float = 1e-6

    def add(self, result: IdentityResult):
        self.results[result.name] = result

    def __getitem__(self, name):
        return self.results[name]

    def __contains__(self, name):
        return name in self.results

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.results.values())

    def failures(self):
        return [k for k, r in self.results.items() if not r.passed]

    def to_dict(self):
        return {"entry": self.entry, "mode": self.mode, "tol": self.tol,
                "passed": self.passed,
                "identities": {k: r.to_dict() for k, r in self.results.items()}}

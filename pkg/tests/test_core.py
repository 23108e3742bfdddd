import numpy as np
import pytest

from cfhdual.core import BoundConstants, build_domain, build_lattice, estimate_bound_constants
from cfhdual.errors import InvalidN, SingularSample, UnequalSides
from cfhdual.samplers import CatalogueEntry, pseudosphere_cylinder
from cfhdual.core import FrameSample


def unit_cube():
    return build_domain(0, 1, 0, 1, 0, 1)


def test_domain_basics():
    d = build_domain(0.5, 1.5, 0, 1, -2, -1)
    assert d.a == 1.0
    np.testing.assert_array_equal(d.lower, [0.5, 0, -2])
    np.testing.assert_array_equal(d.upper, [1.5, 1, -1])
    assert d.swapped().x0 == 0 and d.swapped().y0 == 0.5


def test_domain_unequal_sides():
    with pytest.raises(UnequalSides):
        build_domain(0, 1, 0, 2, 0, 1)
    with pytest.raises(ValueError):
        build_domain(1, 1, 0, 0, 0, 0)


@pytest.mark.parametrize("n,count,delta", [(1, 8, 1.0), (2, 27, 0.5), (64, 65 ** 3, 0.015625)])
def test_lattice_examples(n, count, delta):
    L = build_lattice(unit_cube(), n)
    assert L.node_count == count
    assert L.delta == delta


@pytest.mark.parametrize("n", [0, -3, 2.5])
def test_lattice_invalid_n(n):
    with pytest.raises(InvalidN, match="InvalidN"):
        build_lattice(unit_cube(), n)


def test_lattice_translation_exact():
    L = build_lattice(build_domain(0.5, 1.5, 0, 1, 0, 1), 128)
    d = np.diff(L.xs)
    np.testing.assert_allclose(d, 1 / 128, rtol=0, atol=4 * np.finfo(float).eps)
    assert L.xs[0] == 0.5 and L.xs[-1] == 1.5


def test_bound_formulas():
    C = BoundConstants(C1=2.0, C2=3.0, a=0.5, C1_raw=2.0, C2_raw=3.0, safety=1.0)
    assert C.slice_bound(4) == 4 * 4 * 3 * 0.25 / 4
    assert C.hypersurface_bound(4) == 6 * 4 * 3 * 0.125 / 4
    assert C.curve_bound(4) == 2 * 4 * 3 * 0.25 / 4


def test_bound_constants_pseudosphere(pseudo):
    C = estimate_bound_constants(pseudo, pseudo.default_domain(), grid_m=33, safety=1.1)
    # |kappa2| = sinh u reaches sinh(1.5)
    assert C.C1_raw >= np.sinh(1.5) - 1e-12
    assert C.C1 == pytest.approx(1.1 * C.C1_raw)
    assert C.C2 > 0


def test_bound_constants_grid_stable(inverted):
    dom = inverted.default_domain()
    c1 = estimate_bound_constants(inverted, dom, grid_m=33)
    c2 = estimate_bound_constants(inverted, dom, grid_m=65)
    assert abs(c2.C1 / c1.C1 - 1) < 0.05
    assert abs(c2.C2 / c1.C2 - 1) < 0.05


def _const_entry(P, phi, k3):
    def sample(x, y, z):
        x, y, z = np.broadcast_arrays(*(np.asarray(v, float) for v in (x, y, z)))
        sh = x.shape
        e = np.eye(4)
        def vec(i):
            return np.broadcast_to(e[i], sh + (4,)).copy()
        return FrameSample(f=np.stack([x, y, z, 0 * x], -1), X_alpha=vec(0), X_beta=vec(1),
                           X_gamma=vec(2), N=vec(3), P=np.full(sh, P), phi=np.full(sh, phi),
                           kappa3=np.full(sh, k3), phi_x=0 * x, phi_y=0 * x, phi_z=0 * x)
    return CatalogueEntry("const", "Generic", {}, sample, ((0, 1), (0, 1), (0, 1)))


def test_bound_constants_constant_entry():
    # tan(pi/4) = 1, kappa3 = 0: |kappa1| = |kappa2| = 1, |P| = 1
    e = _const_entry(1.0, np.pi / 4, 0.0)
    C = estimate_bound_constants(e, unit_cube(), grid_m=16, safety=1.1)
    assert C.C1 == pytest.approx(1.1)
    assert C.C2 < 1e-6


def test_bound_constants_singular():
    with pytest.raises(SingularSample):
        estimate_bound_constants(_const_entry(-1.0, 0.3, 0.0), unit_cube(), grid_m=16)
    with pytest.raises(SingularSample):
        estimate_bound_constants(_const_entry(1.0, 0.0, 0.0), unit_cube(), grid_m=16)

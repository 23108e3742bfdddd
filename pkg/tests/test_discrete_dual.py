import numpy as np
import pytest

from cfhdual.core import build_lattice
from cfhdual.discrete_dual import (assemble, connector_u, connector_v, surface_xbar, surface_yunder,
                                   u_curve, u_segment, v_curve, z_spine)
from cfhdual.errors import DegenerateRegion
from cfhdual.invariants import exact_dual
from cfhdual.samplers import swap_xy_entry


def lattice(entry, n):
    return build_lattice(entry.default_domain(), n)


def test_u_segment_pseudosphere_shrunk_arc(pseudo):
    L = lattice(pseudo, 8)
    x = np.linspace(L.xs[3], L.xs[4], 5)
    seg = u_segment(pseudo, L, 3, 0, 2, x)
    f = pseudo.sample(x, 0 * x + L.ys[0], 0 * x + L.zs[2]).f
    np.testing.assert_allclose(seg, -0.5 * (f - f[0]), atol=1e-15)


def test_curves_anchor_and_continuity(inverted):
    L = lattice(inverted, 8)
    for c in (u_curve(inverted, L, 3, 2), v_curve(inverted, L, 5, 1), z_spine(inverted, L, "xbar")):
        np.testing.assert_array_equal(c.values[0, 0], 0.0)
        assert c.joint_gap() <= 1e-13 * max(1.0, np.max(np.abs(c.values)))


def test_u_curve_nodes_exact_on_pseudosphere(pseudo):
    L = lattice(pseudo, 8)
    c = u_curve(pseudo, L, 0, 0)
    F = exact_dual(pseudo)
    np.testing.assert_allclose(c.nodes, F(L.xs, 0 * L.xs, 0 * L.xs), atol=1e-15)


def test_tangent_parallel_to_fx(inverted):
    L = lattice(inverted, 4)
    c = u_curve(inverted, L, 2, 1, subsamples=64)
    t, v = c.polyline()
    tan = np.gradient(v, t, axis=0, edge_order=2)
    fx = inverted.sample(t, 0 * t + L.ys[2], 0 * t + L.zs[1]).f_x
    # inside cells only; joints are kinks
    inner = np.ones(len(t), bool)
    inner[::64] = False
    tu = tan[inner] / np.linalg.norm(tan[inner], axis=-1)[:, None]
    fu = fx[inner] / np.linalg.norm(fx[inner], axis=-1)[:, None]
    cross = tu - np.sum(tu * fu, axis=-1)[:, None] * fu
    assert np.max(np.linalg.norm(cross, axis=-1)) < 1e-5


def test_surface_nodes_match_hypersurface(inverted):
    L = lattice(inverted, 4)
    H = assemble(inverted, L, "xbar")
    for k in (0, 2, 4):
        np.testing.assert_allclose(H.surface(k).values(), H.values[:, :, k], atol=1e-15)
    np.testing.assert_array_equal(H.values[0, 0, 0], 0.0)


def test_surfaces_start_at_zero(inverted):
    L = lattice(inverted, 4)
    for S in (surface_xbar(inverted, L, 1), surface_yunder(inverted, L, 1)):
        np.testing.assert_array_equal(S.nodes[0, 0], 0.0)


def test_scheme_symmetry(inverted):
    L = lattice(inverted, 8)
    sw = swap_xy_entry(inverted)
    a = assemble(inverted, L, "xbar").values
    b = assemble(sw, build_lattice(L.domain.swapped(), 8), "yunder").values
    np.testing.assert_allclose(np.swapaxes(b, 0, 1), a, atol=1e-10)


def test_lemma_identity_and_endpoints(inverted):
    L = lattice(inverted, 8)
    H = assemble(inverted, L, "xbar")
    Hy = assemble(inverted, L, "yunder")
    worst, ends = 0.0, 0.0
    for k in (0, 5):
        S, Sy = H.surface(k, 0), Hy.surface(k, 0)
        for i in range(1, 9):
            for j in range(8):
                for c, V, (a, b) in ((connector_v(inverted, S, i, j), S.values(), ((i, j), (i, j + 1))),
                                     (connector_u(inverted, Sy, j, i), Sy.values(), ((j, i), (j + 1, i)))):
                    worst = max(worst, c.lemma_residual)
                    vals = c.curve.values[0]
                    ends = max(ends, np.max(np.abs(vals[0] - V[a])), np.max(np.abs(vals[-1] - V[b])))
    for i, j in ((0, 0), (3, 7)):
        c = H.connector("z", i, j, 2)
        worst = max(worst, c.lemma_residual)
        v = c.curve.values[0]
        ends = max(ends, np.max(np.abs(v[0] - H.values[i, j, 2])), np.max(np.abs(v[-1] - H.values[i, j, 3])))
    assert worst <= 1e-13
    assert ends <= 1e-13


def test_connector_index_checks(inverted):
    L = lattice(inverted, 4)
    S = surface_xbar(inverted, L, 0, 0)
    with pytest.raises(IndexError):
        connector_v(inverted, S, 0, 0)
    with pytest.raises(IndexError):
        connector_u(inverted, S, 0, 0)


def test_connector_residual_second_order(inverted):
    r = [assemble(inverted, lattice(inverted, n), "xbar").connector_residual for n in (8, 16, 32)]
    assert 3.2 < r[0] / r[1] < 4.8 and 3.2 < r[1] / r[2] < 4.8


def test_assemble_rejects_degenerate(cusp):
    with pytest.raises(DegenerateRegion):
        assemble(cusp, lattice(cusp, 4))
    with pytest.raises(ValueError):
        assemble(cusp, lattice(cusp, 4), "diag")


def test_to_dict_roundtrip(pseudo):
    H = assemble(pseudo, lattice(pseudo, 2))
    d = H.to_dict()
    assert d["scheme"] == "xbar" and np.asarray(d["values"]).shape == (3, 3, 3, 4)


def _d4(v, h):
    """4th-order central difference along axis 1 of (cells, s+1, 4) samples (interior points)."""
    return (v[:, :-4] - 8 * v[:, 1:-3] + 8 * v[:, 3:-1] - v[:, 4:]) / (12 * h)


def test_spine_tangent_parallel_to_fz(inverted):
    L = lattice(inverted, 8)
    from cfhdual.invariants import _unit_sin
    for scheme in ("xbar", "yunder"):
        sp = z_spine(inverted, L, scheme, subsamples=64)
        h = L.delta / 64
        tan = _d4(sp.values, h)
        zz = sp.params[:, 2:-2]
        fz = inverted.sample(0 * zz + L.xs[0], 0 * zz + L.ys[0], zz).f_z
        assert np.nanmax(_unit_sin(tan, fz)) <= 1e-10


def test_segment_node_tangents(inverted):
    L = lattice(inverted, 8)
    from cfhdual.invariants import sample_algebra
    i, j, k = 3, 2, 5
    p = [np.asarray(L.xs[i]), np.asarray(L.ys[j]), np.asarray(L.zs[k])]
    s = inverted.sample(*p)
    _, sig = sample_algebra(s)
    h = 1e-4
    from cfhdual.discrete_dual import v_segment
    du = (u_segment(inverted, L, i, j, k, L.xs[i] + h) - u_segment(inverted, L, i, j, k, L.xs[i] - h)) / (2 * h)
    dv = (v_segment(inverted, L, i, j, k, L.ys[j] + h) - v_segment(inverted, L, i, j, k, L.ys[j] - h)) / (2 * h)
    np.testing.assert_allclose(du.reshape(4), sig.s1 * s.f_x, rtol=1e-7, atol=1e-7 * np.abs(sig.s1))
    np.testing.assert_allclose(dv.reshape(4), sig.s2 * s.f_y, rtol=1e-7, atol=1e-7 * np.abs(sig.s2))


def test_u_curve_deviation_bound(inverted):
    from cfhdual.core import estimate_bound_constants
    from cfhdual.reference_dual import pencil_cumulative
    from cfhdual.convergence import fit_slope
    dom = inverted.default_domain()
    C = estimate_bound_constants(inverted, dom, grid_m=33)
    errs = []
    for n in (8, 16, 32):
        L = lattice(inverted, n)
        c = u_curve(inverted, L, n // 2, n // 4, subsamples=4)
        start = [np.asarray(L.xs[0]), np.asarray(L.ys[n // 2]), np.asarray(L.zs[n // 4])]
        ref = pencil_cumulative(inverted, start, 0, L.delta, n, 16, every=2)
        t, v = c.polyline()
        e = float(np.max(np.linalg.norm(v - ref, axis=-1)))
        assert e <= C.curve_bound(n)
        errs.append((n, e))
    assert -1.25 <= fit_slope(errs).slope <= -0.8


def test_connector_z_tangent_deviation_first_order(inverted):
    from cfhdual.invariants import sample_algebra
    from cfhdual.convergence import fit_slope
    errs = []
    for n in (8, 16, 32):
        L = lattice(inverted, n)
        H = assemble(inverted, L, "xbar")
        worst = 0.0
        for k in range(n):
            c = H.connector("z", 1, 1, k, 4)
            zz = c.curve.params[0]
            s = inverted.sample(0 * zz + L.xs[1], 0 * zz + L.ys[1], zz)
            _, sig = sample_algebra(s)
            worst = max(worst, float(np.max(np.linalg.norm(c.tangent - sig.s3[:, None] * s.f_z, axis=-1))))
        errs.append((n, worst))
    assert -1.3 <= fit_slope(errs).slope <= -0.7

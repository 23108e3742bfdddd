import numpy as np
import pytest

from cfhdual.core import build_domain, build_lattice
from cfhdual.errors import DegenerateRegion
from cfhdual.invariants import exact_dual
from cfhdual.reference_dual import (check_regular, integrate_dual_edge, involution_check, loop_residual,
                                    pencil_cumulative, reference_dual_lattice)


def test_edge_matches_exact(pseudo):
    F = exact_dual(pseudo)
    for ax in range(3):
        start = np.array([1.0, 0.25, 0.5])
        end = start.copy()
        end[ax] += 0.1
        got = integrate_dual_edge(pseudo, start, ax, 0.1, m=16)
        np.testing.assert_allclose(got, F(*end) - F(*start), atol=1e-11)


def test_edge_negative_length(inverted):
    a = integrate_dual_edge(inverted, np.array([1.0, 0.5, 0.5]), 0, 0.2, m=16)
    b = integrate_dual_edge(inverted, np.array([1.2, 0.5, 0.5]), 0, -0.2, m=16)
    np.testing.assert_allclose(a, -b, atol=1e-14)


def test_simpson_order(pseudo):
    F = exact_dual(pseudo)
    start = np.array([0.5, 0.0, 0.0])
    exact = F(1.5, 0.0, 0.0)
    errs = [np.linalg.norm(integrate_dual_edge(pseudo, start, 0, 1.0, m) - exact) for m in (4, 8, 16)]
    assert np.log2(errs[0] / errs[1]) > 3.5 and np.log2(errs[1] / errs[2]) > 3.5


def test_reference_nodes_match_exact(pseudo):
    L = build_lattice(pseudo.default_domain(), 8)
    D = reference_dual_lattice(pseudo, L, m=16)
    np.testing.assert_array_equal(D.value(0, 0, 0), 0.0)
    np.testing.assert_allclose(D.values, exact_dual(pseudo)(*L.nodes()), atol=1e-10)


def test_path_independence(inverted):
    L = build_lattice(inverted.default_domain(), 4)
    a = reference_dual_lattice(inverted, L, 16, path="xyz").values
    b = reference_dual_lattice(inverted, L, 16, path="zyx").values
    np.testing.assert_allclose(a, b, atol=1e-9)


def test_pencil_matches_edges(inverted):
    start = [np.asarray(0.5), np.asarray(0.25), np.asarray(0.5)]
    run = pencil_cumulative(inverted, start, 0, 0.25, 4, m=16)
    direct = np.array([integrate_dual_edge(inverted, np.array([0.5, 0.25, 0.5]), 0, 0.25 * c, 16 * c)
                       for c in range(1, 5)])
    np.testing.assert_allclose(run[1:], direct, atol=1e-13)


@pytest.mark.parametrize("plane", [(0, 1), (0, 2), (1, 2)])
def test_loop_residual_small(pseudo, inverted, plane):
    for e in (pseudo, inverted):
        assert loop_residual(e, (0.7, 0.2, 0.3), plane, 0.125, m=16) <= 1e-10


def test_involution(pseudo, inverted):
    for e in (pseudo, inverted):
        assert involution_check(e, build_lattice(e.default_domain(), 8), 16) <= 1e-9


def test_check_regular_raises_on_cusp(cusp):
    L = build_lattice(cusp.default_domain(), 4)
    with pytest.raises(DegenerateRegion):
        check_regular(cusp, L)
    with pytest.raises(DegenerateRegion):
        reference_dual_lattice(cusp, L)


def test_reference_to_dict(pseudo):
    L = build_lattice(build_domain(0.5, 1.5, 0, 1, 0, 1), 2)
    d = reference_dual_lattice(pseudo, L).to_dict()
    assert d["n"] == 2 and np.asarray(d["values"]).shape == (3, 3, 3, 4)


def test_richardson_estimate_tracks_error(pseudo):
    L = build_lattice(pseudo.default_domain(), 4)
    F = reference_dual_lattice(pseudo, L, 8, richardson=True)
    err = np.max(np.linalg.norm(F.values - exact_dual(pseudo)(*L.nodes()), axis=-1))
    assert 0.5 * err < F.richardson < 2 * err
    with pytest.raises(ValueError):
        reference_dual_lattice(pseudo, L, 6, richardson=True)


def test_edge_trivial_cases(pseudo):
    p = np.array([1.0, 0.3, 0.2])
    np.testing.assert_array_equal(integrate_dual_edge(pseudo, p, 0, 0.0), 0.0)
    np.testing.assert_allclose(integrate_dual_edge(pseudo, p, 2, 0.3), [0, 0, 0, 0.15], atol=1e-15)
    assert loop_residual(pseudo, p, (0, 1), 0.0) == 0.0


def test_reference_n16(pseudo, inverted):
    L = build_lattice(pseudo.default_domain(), 16)
    D = reference_dual_lattice(pseudo, L, m=16)
    assert np.max(np.linalg.norm(D.values - exact_dual(pseudo)(*L.nodes()), axis=-1)) <= 1e-8
    assert involution_check(pseudo, L, 16) <= 1e-7
    assert involution_check(inverted, L, 32) <= 1e-7


def test_reference_x_lines_parallel_to_x_alpha(inverted):
    from cfhdual.invariants import _unit_sin
    L = build_lattice(inverted.default_domain(), 32)
    V = reference_dual_lattice(inverted, L, m=16).values
    tan = (V[:-4] - 8 * V[1:-3] + 8 * V[3:-1] - V[4:]) / (12 * L.delta)
    X, Y, Z = (c[2:-2] for c in L.nodes())
    assert np.nanmax(_unit_sin(tan, inverted.sample(X, Y, Z).X_alpha)) <= 1e-4

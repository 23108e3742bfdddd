import jsonschema
import numpy as np
import pytest

from cfhdual.errors import CenterTooClose, InvalidWindow, NotOrthogonal
from cfhdual.invariants import sample_algebra
from cfhdual.samplers import (CATALOGUE, cusp_center, invert_entry, make_entry, pseudosphere_cylinder,
                              rigid_motion_entry, swap_xy_entry, validate_entry)


def pts(entry, m=4):
    return entry.default_domain().grid(m)


def test_pseudosphere_value():
    e = pseudosphere_cylinder()
    s = e.sample(np.asarray(1.0), np.asarray(0.0), np.asarray(2.0))
    np.testing.assert_allclose(s.f, [1 / np.cosh(1), 0, 1 - np.tanh(1), 2], atol=1e-15)
    np.testing.assert_allclose(s.f, [0.648054273663885, 0, 0.238405844044235, 2], atol=1e-12)


def test_pseudosphere_invalid_window():
    with pytest.raises(InvalidWindow):
        pseudosphere_cylinder(u_window=(0.0, 1.0))
    with pytest.raises(InvalidWindow):
        pseudosphere_cylinder(u_window=(-1.0, 0.5))


def test_curvatures_match_shape_operator_oracle(pseudo, inverted):
    # independent oracle: 40-digit central differences of N and f for the raw tractrix and inversion maps
    s = pseudo.sample(np.asarray(1.0), np.asarray(0.3), np.asarray(0.2))
    k, _ = sample_algebra(s)
    np.testing.assert_allclose(k.as_array(), [0.850918128239322, -1.1752011936438, 0.0], atol=1e-12)
    s = inverted.sample(np.asarray(1.2), np.asarray(0.7), np.asarray(0.4))
    k, sig = sample_algebra(s)
    np.testing.assert_allclose(k.as_array(), [15.6347162617858, -31.2777146261488, 1.32548677026769],
                               rtol=1e-12)
    np.testing.assert_allclose([sig.s1, sig.s2, sig.s3],
                               [-213.418193496945, -275.6, 234.141803058832], rtol=1e-12)
    np.testing.assert_allclose(s.f, [0.0195567976688648, 0.0164724634355523, 0.016961040320084,
                                     -0.212970565389299], rtol=1e-12)


@pytest.mark.parametrize("name", list(CATALOGUE))
def test_frames_orthonormal(name):
    e = make_entry(name)
    s = e.sample(*pts(e))
    assert np.max(s.gram_error()) < 1e-12


def test_inverted_frame_norms(inverted):
    s = inverted.sample(*pts(inverted, 9))
    for Z in (s.X_alpha, s.X_beta, s.X_gamma, s.N):
        np.testing.assert_allclose(np.linalg.norm(Z, axis=-1), 1.0, atol=1e-13)


def test_invert_center_too_close(pseudo):
    s = pseudo.sample(np.asarray(1.0), np.asarray(0.5), np.asarray(0.5))
    with pytest.raises(CenterTooClose):
        invert_entry(pseudo, s.f)


def test_rigid_motion(pseudo):
    th = 0.4
    R = np.eye(4)
    R[0, 0] = R[3, 3] = np.cos(th)
    R[0, 3], R[3, 0] = -np.sin(th), np.sin(th)
    t = np.array([1.0, -2.0, 0.5, 3.0])
    m = rigid_motion_entry(pseudo, R, t)
    x, y, z = pts(pseudo)
    s0, s1 = pseudo.sample(x, y, z), m.sample(x, y, z)
    np.testing.assert_allclose(s1.f, s0.f @ R.T + t, atol=1e-14)
    np.testing.assert_allclose(s1.N, s0.N @ R.T, atol=1e-14)
    np.testing.assert_allclose(sample_algebra(s1)[0].as_array(), sample_algebra(s0)[0].as_array())
    with pytest.raises(NotOrthogonal):
        rigid_motion_entry(pseudo, 2 * np.eye(4), t)


def test_swap_entry_exchanges_curvatures(inverted):
    sw = swap_xy_entry(inverted)
    x, y, z = pts(inverted)
    a = sample_algebra(inverted.sample(x, y, z))[0]
    b = sample_algebra(sw.sample(y, x, z))[0]
    np.testing.assert_allclose(b.k1, a.k2, rtol=1e-12)
    np.testing.assert_allclose(b.k2, a.k1, rtol=1e-12)
    np.testing.assert_allclose(b.k3, a.k3, rtol=1e-12)


def test_cusp_center_kills_sigma1(pseudo):
    anchor = (1.0, 0.5, 0.5)
    for branch in ("near", "far"):
        e = invert_entry(pseudo, cusp_center(pseudo, anchor, branch))
        _, sig = sample_algebra(e.sample(*[np.asarray(v) for v in anchor]))
        assert abs(sig.s1) < 1e-10


def test_make_entry_schema():
    with pytest.raises(jsonschema.ValidationError):
        make_entry("inverted-pseudosphere", {"q": [1, 2]})
    with pytest.raises(jsonschema.ValidationError):
        make_entry("pseudosphere-cylinder", {"bogus": 1})
    with pytest.raises(KeyError):
        make_entry("nope")


def test_scaled_pseudosphere_curvature():
    e = make_entry("pseudosphere-cylinder", {"P": 2.0})
    k, _ = sample_algebra(e.sample(np.asarray(1.0), np.asarray(0.0), np.asarray(0.0)))
    np.testing.assert_allclose(k.as_array(), [0.5 / np.sinh(1), -0.5 * np.sinh(1), 0], atol=1e-14)


@pytest.mark.parametrize("name", ["pseudosphere-cylinder", "inverted-pseudosphere", "moved-pseudosphere"])
def test_validate_entry_passes(name):
    rep = validate_entry(make_entry(name))
    assert rep.passed, rep.failures()


def _at(entry, p):
    return entry.sample(*[np.asarray(v, float) for v in p])


def test_inversion_special_points(pseudo):
    p = (1.0, 0.4, 0.5)
    s = _at(pseudo, p)
    k = sample_algebra(s)[0]
    # q two units below f along X_gamma: |f-q| = 2 and every frame vector but X_gamma is orthogonal to f-q
    sq = _at(invert_entry(pseudo, s.f - 2 * s.X_gamma), p)
    np.testing.assert_allclose(sq.P, s.P / 4, rtol=1e-14)
    for a, b in ((sq.X_alpha, s.X_alpha), (sq.X_beta, s.X_beta), (sq.N, s.N)):
        np.testing.assert_allclose(a, b, atol=1e-15)
    np.testing.assert_allclose(sq.X_gamma, -s.X_gamma, atol=1e-15)
    # |f-q| = 1 with <N, f-q> = 0 leaves the curvatures unchanged
    sq = _at(invert_entry(pseudo, s.f - s.X_gamma), p)
    np.testing.assert_allclose(sample_algebra(sq)[0].as_array(), k.as_array(), atol=1e-14)
    np.testing.assert_array_equal(sq.phi, s.phi)


def test_inversion_is_involution_after_recentering(pseudo):
    q = np.array([0.2, -0.1, 0.3, 4.0])
    twice = invert_entry(invert_entry(pseudo, q), np.zeros(4))
    x, y, z = pts(pseudo, 5)
    s, t = pseudo.sample(x, y, z), twice.sample(x, y, z)
    np.testing.assert_allclose(t.f + q, s.f, atol=1e-12)
    np.testing.assert_allclose(t.P, s.P, rtol=1e-9)
    np.testing.assert_allclose(sample_algebra(t)[0].as_array(), sample_algebra(s)[0].as_array(), atol=1e-9)
    np.testing.assert_array_equal(t.phi, s.phi)


def test_rigid_motion_trivial_cases(pseudo):
    x, y, z = pts(pseudo)
    s = pseudo.sample(x, y, z)
    same = rigid_motion_entry(pseudo, np.eye(4), np.zeros(4)).sample(x, y, z)
    np.testing.assert_array_equal(same.f, s.f)
    t = np.array([0.0, 1.0, 2.0, 3.0])
    moved = rigid_motion_entry(pseudo, np.eye(4), t).sample(x, y, z)
    np.testing.assert_allclose(moved.f, s.f + t)
    np.testing.assert_array_equal(moved.N, s.N)
    R = np.eye(4)
    R[:2, :2] = [[0, -1], [1, 0]]
    rot = rigid_motion_entry(pseudo, R, np.zeros(4)).sample(x, y, z)
    np.testing.assert_allclose(sample_algebra(rot)[0].as_array(), sample_algebra(s)[0].as_array())


def test_pseudosphere_gauss_curvature(pseudo):
    k = sample_algebra(pseudo.sample(*pts(pseudo, 7)))[0]
    np.testing.assert_allclose(k.k1 * k.k2, -1.0, rtol=1e-13)


def test_validate_detects_kappa3_offset(pseudo):
    from cfhdual.samplers import offset_kappa3
    rep = validate_entry(offset_kappa3(pseudo, 0.1))
    assert not rep["zeta_kappa3_squared"].passed
    assert rep["zeta_kappa3_squared"].residuals[-1] > 1e-3
    assert not rep.passed

import math

import numpy as np
import numpy.testing as npt
import pytest

from radialfov import (
    Circle,
    Ellipse,
    ProjectionSet2D,
    SpacingTooCoarse,
    angular_dcf_2d,
    angular_dcf_3d,
    design_2d,
    design_pr3d_spiral,
    dual_shape,
    radial_dcf,
    sample_projections,
    spiral_end_ramp,
)

K_NOMINAL = Circle(0.5)


def _pset(angles, kmax=0.5):
    angles = np.asarray(angles, dtype=float)
    return ProjectionSet2D(
        angles=angles,
        kmax=np.full(angles.size, kmax),
        scale_factor=1.0,
        phi0=float(angles[0]),
        phi_width=math.pi,
    )


def test_single_full_projection_sample_count():
    s = sample_projections(_pset([0.0]), dkr=0.01)
    assert s.coords.shape == (101, 2)
    assert s.coords[:, 0].min() == pytest.approx(-0.5)
    assert s.coords[:, 0].max() == pytest.approx(0.5)
    npt.assert_allclose(s.coords[:, 1], 0.0, atol=1e-15)


def test_two_orthogonal_projections_form_a_plus_sign():
    s = sample_projections(_pset([0.0, math.pi / 2]), dkr=0.05)
    on_x = np.abs(s.coords[:, 1]) < 1e-12
    on_y = np.abs(s.coords[:, 0]) < 1e-12
    assert np.all(on_x | on_y)
    assert on_x.sum() >= 21 and on_y.sum() >= 21


def test_circle_design_sample_count_per_projection():
    p = design_2d(Circle(250.0), K_NOMINAL)
    s = sample_projections(p, dkr=1.0 / 250.0)
    per = np.bincount(s.projection)
    assert np.all(per == 2 * int(0.5 * 250) + 1)
    assert per[0] == 251


def test_half_projections_span_zero_to_kmax():
    p = design_2d(Circle(60.0), K_NOMINAL, phi_width=2 * math.pi)
    s = sample_projections(p, dkr=1.0 / 60.0, kind="half")
    radii = np.hypot(s.coords[:, 0], s.coords[:, 1])
    first = s.projection == 0
    assert radii[first].min() == 0.0
    assert radii[first].max() == pytest.approx(0.5)
    assert s.projection_kind == "half"


def test_normalized_positions_shared_across_variable_extents():
    fov = Ellipse(240.0, 120.0)
    p = design_2d(fov, dual_shape(fov, 0.5))
    s = sample_projections(p, dkr=1.0 / 240.0)
    radii = np.sqrt((s.coords**2).sum(axis=1))
    expected = np.sort(np.abs(s.radial_positions))
    for n in (0, p.count // 3, p.count - 1):
        sel = s.projection == n
        rho = np.sort(radii[sel]) / p.kmax[n]
        npt.assert_allclose(rho, expected, atol=1e-12)


def test_samples_never_exceed_projection_extent():
    fov = Ellipse(240.0, 120.0)
    p = design_2d(fov, dual_shape(fov, 0.5))
    s = sample_projections(p, dkr=1.0 / 240.0)
    radii = np.sqrt((s.coords**2).sum(axis=1))
    assert np.all(radii <= p.kmax[s.projection] + 1e-12)


def test_spacing_warning_is_emitted_and_overridable():
    p = _pset([0.0, 1.0])
    with pytest.warns(SpacingTooCoarse):
        sample_projections(p, dkr=0.02, max_fov=100.0)
    import warnings

    with warnings.catch_warnings():
        warnings.simplefilter("error")
        sample_projections(p, dkr=0.005, max_fov=100.0)


def test_radial_dcf_2d_annulus_area_oracle():
    dkr = 0.01
    w = radial_dcf("2D", np.array([0.0, 1.0, 2.0]) * dkr)
    # exact ring areas about each sample in units of the spacing
    edges = np.array([[0.0, 0.5], [0.5, 1.5], [1.5, 2.5]]) * dkr
    areas = math.pi * (edges[:, 1] ** 2 - edges[:, 0] ** 2)
    npt.assert_allclose(w / w[1], areas / areas[1], rtol=1e-12)
    npt.assert_allclose(w / w[1], [0.125, 1.0, 2.0], rtol=1e-12)


def test_radial_dcf_3d_shell_law():
    w = radial_dcf("3D", np.arange(4.0))
    npt.assert_allclose(w[1:] / w[1], [1.0, 4.0, 9.0], rtol=1e-12)
    # center keeps the exact half-spacing ball measure
    ball = 4.0 / 3.0 * math.pi * 0.5**3
    shell1 = 4.0 * math.pi * 1.0**2 * 1.0
    assert w[0] / w[1] == pytest.approx(ball / shell1)


def test_radial_dcf_single_origin_normalizes_to_one():
    npt.assert_allclose(radial_dcf("2D", np.array([0.0]), normalize=True), [1.0])


def test_radial_dcf_rejects_uneven_spacing():
    with pytest.raises(ValueError):
        radial_dcf("2D", np.array([0.0, 1.0, 2.5]))


def test_angular_dcf_2d_constant_for_isotropic():
    p = design_2d(Circle(250.0), K_NOMINAL)
    w = angular_dcf_2d(p, Circle(250.0))
    npt.assert_allclose(w, 0.5 / 250.0, rtol=1e-12)


def test_angular_dcf_2d_direct_value():
    p = _pset([0.0])
    w = angular_dcf_2d(p, Ellipse(250.0, 75.0))
    assert w[0] == pytest.approx(0.5 / 75.0)


def test_angular_dcf_2d_uniform_for_dual_designs():
    fov = Ellipse(240.0, 120.0)
    p = design_2d(fov, dual_shape(fov, 0.5))
    w = angular_dcf_2d(p, fov)
    npt.assert_allclose(w, w[0], rtol=1e-9)


def test_separability_of_total_dcf():
    # the total weight is exactly the product of one shared radial factor
    # and the per-projection angular factor (origin cell split aside)
    fov = Ellipse(200.0, 100.0)
    p = design_2d(fov, K_NOMINAL)
    ang = angular_dcf_2d(p, fov)
    s = sample_projections(p, dkr=1.0 / 200.0, angular_weights=ang)
    nonzero = s.radial_positions > 0
    radial = radial_dcf("2D", s.radial_positions[nonzero])
    for n in (0, p.count // 2):
        per = s.dcf[s.projection == n]
        npt.assert_allclose(per[nonzero], ang[n] * radial, rtol=1e-12)


def test_weighted_samples_cover_the_kspace_disk():
    fov = Circle(100.0)
    p = design_2d(fov, K_NOMINAL)
    s = sample_projections(p, dkr=1.0 / 200.0, angular_weights=angular_dcf_2d(p, fov))
    assert s.dcf.sum() == pytest.approx(math.pi * 0.5**2, rel=0.02)


def test_spiral_end_ramp_values():
    phi = np.linspace(0.0, 8.0 * math.pi, 400)
    theta = np.linspace(0.5, 1.6, 400)
    f = spiral_end_ramp(phi, theta)
    assert f[-1] == pytest.approx(0.5)
    mid_penultimate = np.argmin(np.abs(phi - (phi[-1] - 1.5 * math.pi)))
    assert f[mid_penultimate] == pytest.approx(0.75, abs=0.01)
    outside = phi <= phi[-1] - 2.0 * math.pi
    npt.assert_allclose(f[outside], 1.0)


def test_full_spiral_weights_include_ramp():
    fovt = fovp = Circle(38.0)
    t = design_pr3d_spiral(fovt, fovp, kind="full")
    # isotropic shapes make the separable factor kmax/(38*38); the ramp is
    # whatever remains
    ratio = t.dcf_angular / (t.kmax / (38.0 * 38.0))
    assert ratio[-1] == pytest.approx(0.5, abs=1e-9)
    assert np.all(ratio <= 1.0 + 1e-12)
    assert np.all(ratio >= 0.5 - 1e-12)
    early = t.phi < t.phi[-1] - 2 * math.pi
    npt.assert_allclose(ratio[early], 1.0, rtol=1e-12)


def test_angular_dcf_3d_isotropic_half_is_constant():
    fovt = fovp = Circle(38.0)
    t = design_pr3d_spiral(fovt, fovp, kind="half")
    w = angular_dcf_3d(t, fovt, fovp)
    npt.assert_allclose(w, 0.5 / (38.0 * 38.0), rtol=1e-12)


def test_origin_weight_shared_between_projections():
    p = design_2d(Circle(100.0), K_NOMINAL)
    s = sample_projections(p, dkr=1.0 / 100.0)
    at_origin = np.abs(s.coords).max(axis=1) < 1e-15
    assert at_origin.sum() == p.count
    w0 = s.dcf[at_origin]
    npt.assert_allclose(w0, w0[0], rtol=1e-12)

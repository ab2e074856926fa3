"""Orbit surfaces: umbilicity, principal curvatures, isometry invariance, slices."""

import numpy as np
import pytest

from umbilic.geometry import (
    h2xr,
    h3,
    hyperbolic_translation,
    inner,
    norm,
    parabolic,
    r3,
    rotation,
    s2xr,
    slice_reflection,
    sol,
    sol_translation,
    vertical_shift,
)
from umbilic.numdiff import richardson_limit
from umbilic.profiles import (
    h2xr_elliptic_profile,
    h2xr_hyperbolic_profile,
    h2xr_parabolic_profile,
    principal_curvature_normal_part,
    s2xr_profile,
    sol_profile,
)
from umbilic.surfaces import (
    ImmersionError,
    IncompatibleActionError,
    TransversalityError,
    classify_slice_structure,
    curvature_report,
    fundamental_forms,
    mean_curvature_stats,
    orbit_surface,
    patch_from_chart,
    principal_curvatures,
    synthetic_profile,
    transform_patch,
    umbilicity_defect,
)


@pytest.fixture(scope="module")
def family():
    """One patch per invariant family, plus the generating curves."""
    curves = {
        "a_lt": s2xr_profile(0.6),
        "a_eq": s2xr_profile(1.0),
        "a_gt": s2xr_profile(1.5),
        "b": h2xr_elliptic_profile(0.8),
        "p": h2xr_parabolic_profile(),
        "c": h2xr_hyperbolic_profile(0.5),
        "sol": sol_profile(1.0),
    }
    s1 = curves["a_lt"].period_data.s1
    da = curves["a_gt"].period_data.delta
    db = curves["b"].period_data.delta
    patches = {
        "a_lt": orbit_surface(curves["a_lt"], rotation(1.0),
                              s_range=(0.05, 0.97 * s1), name="a<1"),
        "a_eq": orbit_surface(curves["a_eq"], rotation(1.0),
                              s_range=(0.05, 6.0), name="a=1"),
        "a_gt": orbit_surface(curves["a_gt"], rotation(1.0),
                              s_range=(-1.9 * da, 1.9 * da), name="a>1"),
        "b": orbit_surface(curves["b"], rotation(1.0),
                           s_range=(-1.9 * db, 1.9 * db), name="b"),
        "p": orbit_surface(curves["p"], parabolic(np.pi, 1.0),
                           s_range=(-4.0, 4.0), name="S_P"),
        "c": orbit_surface(curves["c"], hyperbolic_translation((np.pi, 0.0), 1.0),
                           s_range=(0.9 * curves["c"].span[0],
                                    0.9 * curves["c"].span[1]), name="c"),
        "sol": orbit_surface(curves["sol"], sol_translation(1.0, 0.0, 0.0),
                             s_range=(0.9 * curves["sol"].span[0],
                                      0.9 * curves["sol"].span[1]), name="F_a"),
    }
    return curves, patches


# --- umbilicity of the seven invariant families -------------------------------


@pytest.mark.parametrize("key", ["a_lt", "a_eq", "a_gt", "b", "p", "c", "sol"])
def test_family_defect_below_tolerance(family, key):
    _, patches = family
    d = umbilicity_defect(patches[key], n_u=64, n_v=64)
    assert d["max"] < 1e-6


@pytest.mark.parametrize("key,kind,param", [
    ("a_lt", "s2xr", 0.6),
    ("a_gt", "s2xr", 1.5),
    ("b", "h2xr-elliptic", 0.8),
    ("p", "h2xr-parabolic", None),
    ("c", "h2xr-hyperbolic", 0.5),
])
def test_principal_curvatures_match_profile_closed_forms(family, key, kind, param):
    curves, patches = family
    patch, curve = patches[key], curves[key]
    u0, u1 = patch.u_range
    us = np.linspace(u0 + 0.6 * (u1 - u0), u0 + 0.9 * (u1 - u0), 7)
    vs = np.full_like(us, 0.5 * (patch.v_range[0] + patch.v_range[1]))
    l1, l2 = principal_curvatures(patch, us, vs)
    j = curve.jet(us)
    lam_curve = j["theta_s"]
    lam_orbit = principal_curvature_normal_part(kind, j["rho"], j["theta"], param)
    got = np.sort(np.stack([l1, l2]), axis=0)
    want = np.sort(np.stack([lam_curve, lam_orbit]), axis=0)
    assert np.max(np.abs(got - want)) < 1e-6
    # unsorted too: on an umbilic surface both branches agree pointwise
    assert np.max(np.abs(l1 - lam_curve)) < 1e-6
    assert np.max(np.abs(l2 - lam_curve)) < 1e-6


def test_axis_limit_of_orbit_curvature_recovers_theta_rate():
    # the orbit-direction curvature has a removable singularity at the axis;
    # its Richardson limit is the profile's angular rate at s = 0
    curve = s2xr_profile(0.6, rtol=1e-12, atol=1e-14)
    s1 = curve.period_data.s1
    patch = orbit_surface(curve, rotation(1.0), s_range=(0.01, 0.9 * s1))

    def lam2_at(h):
        _, l2 = principal_curvatures(patch, np.asarray(h), np.asarray(1.0))
        return float(l2)

    assert abs(richardson_limit(lam2_at, 0.1) - 0.6) < 1e-8


# --- totally geodesic and reference surfaces ----------------------------------


def _synthetic_patches():
    return [
        orbit_surface(synthetic_profile("s2xr", "horizontal", 0.4), rotation(1.0),
                      s_range=(0.05, 2.8), name="slice-s2"),
        orbit_surface(synthetic_profile("h2xr-elliptic", "horizontal", -0.2),
                      rotation(1.0), s_range=(0.05, 3.0), name="slice-h2"),
        orbit_surface(synthetic_profile("s2xr", "vertical", np.pi / 2), rotation(1.0),
                      s_range=(-2.0, 2.0), name="cyl-s2"),
        orbit_surface(synthetic_profile("h2xr-hyperbolic", "vertical", 0.0),
                      hyperbolic_translation((np.pi, 0.0), 1.0),
                      s_range=(-2.0, 2.0), v_range=(-2.0, 2.0), name="vplane-h2"),
    ]


def test_slices_cylinder_and_vertical_plane_are_totally_geodesic():
    for p in _synthetic_patches():
        rep = curvature_report(p, n_u=32, n_v=32)
        assert np.max(np.abs(rep.II[rep.included])) < 1e-9


def test_sol_vertical_planes_are_totally_geodesic():
    planes = [
        patch_from_chart(sol(), "sol-x", lambda U, V: np.stack(
            [np.full_like(U, 0.3), U, V], axis=-1), (-1, 1), (-1, 1)),
        patch_from_chart(sol(), "sol-y", lambda U, V: np.stack(
            [U, np.full_like(U, -0.2), V], axis=-1), (-1, 1), (-1, 1)),
    ]
    for p in planes:
        rep = curvature_report(p, n_u=24, n_v=24)
        assert np.max(np.abs(rep.II[rep.included])) < 1e-7


def test_sol_horizontal_plane_is_minimal_but_not_umbilic():
    p = patch_from_chart(sol(), "sol-z", lambda U, V: np.stack(
        [U, V, np.zeros_like(U)], axis=-1), (-1, 1), (-1, 1))
    rep = curvature_report(p, n_u=24, n_v=24)
    assert np.max(np.abs(rep.mean_curvature[rep.included])) < 1e-7
    lam = np.sort(np.stack([rep.lambda1[rep.included], rep.lambda2[rep.included]]), axis=0)
    assert np.max(np.abs(lam[0] + 1.0)) < 1e-6
    assert np.max(np.abs(lam[1] - 1.0)) < 1e-6
    assert abs(rep.defect_max - 2.0 / 3.0) < 1e-7


def test_euclidean_cylinder_defect_formula():
    r = 0.7
    p = patch_from_chart(r3(), "cyl-r3", lambda U, V: np.stack(
        [r * np.cos(V), r * np.sin(V), U], axis=-1), (-1, 1), (0, 2 * np.pi))
    d = umbilicity_defect(p, n_u=24, n_v=24)
    expect = (1.0 / r) / (1.0 + 1.0 / r)
    assert abs(d["max"] - expect) < 1e-7
    assert abs(d["max"] - d["mean"]) < 1e-7


def test_horosphere_is_umbilic_with_unit_curvature():
    p = patch_from_chart(h3(), "horosphere", lambda U, V: np.stack(
        [U, V, np.ones_like(U)], axis=-1), (-1, 1), (-1, 1))
    rep = curvature_report(p, n_u=24, n_v=24)
    assert rep.defect_max < 1e-8
    assert np.max(np.abs(np.abs(rep.mean_curvature[rep.included]) - 1.0)) < 1e-7


# --- report internals ----------------------------------------------------------


def test_report_frame_invariants(family):
    _, patches = family
    p = patches["b"]
    rep = curvature_report(p, n_u=32, n_v=32)
    m = rep.included
    X = rep.X
    assert np.max(np.abs(norm(p.space, X, rep.N)[m] - 1.0)) < 1e-10
    assert np.max(np.abs(rep.nu**2 + inner(p.space, X, rep.T, rep.T) - 1.0)[m]) < 1e-8
    assert np.max(np.abs(inner(p.space, X, rep.JT, rep.T))[m]) < 1e-8
    assert np.max(np.abs(norm(p.space, X, rep.JT) - norm(p.space, X, rep.T))[m]) < 1e-8


def test_finite_difference_defect_scales_quadratically(family):
    _, patches = family
    rep_h = curvature_report(patches["a_lt"], n_u=16, n_v=16, h=1e-3)
    rep_h2 = curvature_report(patches["a_lt"], n_u=16, n_v=16, h=5e-4)
    ratio = rep_h.defect_max / rep_h2.defect_max
    assert 3.5 < ratio < 4.5


def test_fundamental_forms_raise_on_degenerate_points(family):
    _, patches = family
    # u = 0 is the rotation axis of the a > 1 sphere: X_v vanishes there
    with pytest.raises(ImmersionError):
        fundamental_forms(patches["a_gt"], np.array([0.0]), np.array([1.0]))


# --- the non-umbilic companion -------------------------------------------------


def test_minimal_companion_of_parabolic_surface(family):
    curves, patches = family
    comp = orbit_surface(curves["p"], parabolic(0.0, 1.0), s_range=(-4.0, 4.0),
                         profile_ideal=np.pi, name="companion")
    stats = mean_curvature_stats(comp, n_u=48, n_v=48)
    assert stats["max_abs"] < 1e-6
    # same profile swept toward its own ideal point is umbilic, not minimal
    stats_p = mean_curvature_stats(patches["p"], n_u=48, n_v=48)
    assert stats_p["max"] - stats_p["min"] > 0.1
    d = umbilicity_defect(comp, n_u=32, n_v=32)
    assert d["max"] > 0.5


# --- isometry equivariance -----------------------------------------------------


@pytest.mark.parametrize("key,iso", [
    ("a_gt", rotation(0.7)),
    ("a_gt", vertical_shift(0.9)),
    ("b", hyperbolic_translation((np.pi, 0.0), 0.5)),
    ("p", parabolic(np.pi, 0.8)),
    ("c", slice_reflection(0.1)),
    ("sol", sol_translation(0.4, -0.3, 0.0)),
])
def test_defect_is_isometry_invariant(family, key, iso):
    _, patches = family
    patch = patches[key]
    moved = transform_patch(patch, iso)
    d0 = umbilicity_defect(patch, n_u=24, n_v=24)
    d1 = umbilicity_defect(moved, n_u=24, n_v=24)
    assert abs(d0["max"] - d1["max"]) < 1e-8


@pytest.mark.parametrize("key,action", [
    ("a_gt", lambda w: rotation(w)),
    ("p", lambda w: parabolic(np.pi, w)),
    ("c", lambda w: hyperbolic_translation((np.pi, 0.0), w)),
    ("sol", lambda w: sol_translation(w, 0.0, 0.0)),
])
def test_sweep_parameter_is_the_isometry_parameter(family, key, action):
    from umbilic.geometry import apply_isometry

    _, patches = family
    patch = patches[key]
    u0, u1 = patch.u_range
    us = np.linspace(u0 + 0.2 * (u1 - u0), u0 + 0.8 * (u1 - u0), 5)
    vs = np.linspace(-0.4, 0.4, 5)
    U, V = np.meshgrid(us, vs, indexing="ij")
    w = 0.37
    direct = patch.chart(U, V + w)
    via_iso = apply_isometry(patch.space, action(w), patch.chart(U, V))
    assert np.max(np.abs(direct - via_iso)) < 1e-12


def test_sol_scaling_carries_one_graph_onto_another(family):
    curves, patches = family
    c_shift = 0.25
    cv_b = sol_profile(float(np.exp(4 * c_shift)))
    p_b = orbit_surface(cv_b, sol_translation(1, 0, 0),
                        s_range=(0.9 * cv_b.span[0], 0.9 * cv_b.span[1]))
    moved = transform_patch(patches["sol"], sol_translation(0.0, 0.0, c_shift))
    p_sol = patches["sol"]
    us = np.linspace(p_sol.u_range[0] * 0.8, p_sol.u_range[1] * 0.8, 9)
    vs = np.linspace(-0.8, 0.8, 9)
    U, V = np.meshgrid(us, vs, indexing="ij")
    got = moved.chart(U, V)
    want = p_b.chart(np.exp(c_shift) * U, np.exp(-c_shift) * V)
    assert np.max(np.abs(got - want)) < 1e-8


# --- slice classifier ----------------------------------------------------------


def test_classifier_tags_the_three_hyperbolic_families(family):
    curves, patches = family
    lev_b = float(curves["b"].jet(1.0)["t"])
    rho_b = float(curves["b"].jet(1.0)["rho"])
    e = classify_slice_structure(patches["b"], [lev_b])[0]
    assert e["tag"] == "elliptic"
    assert abs(abs(e["k_g"]) - 1.0 / np.tanh(rho_b)) < 1e-5

    e = classify_slice_structure(patches["p"], [0.2])[0]
    assert e["tag"] == "parabolic"
    assert abs(abs(e["k_g"]) - 1.0) < 1e-5

    lev_c = float(curves["c"].jet(0.8)["t"])
    e = classify_slice_structure(patches["c"], [lev_c])[0]
    assert e["tag"] == "hyperbolic"
    assert abs(e["k_g"]) < 1.0


def test_classifier_on_spherical_base_and_geodesic_level(family):
    curves, patches = family
    lev_a = float(curves["a_lt"].jet(1.0)["t"])
    e = classify_slice_structure(patches["a_lt"], [lev_a])[0]
    assert e["tag"] == "elliptic"

    vplane = _synthetic_patches()[3]
    e = classify_slice_structure(vplane, [0.5])[0]
    assert e["tag"] == "geodesic"


def test_classifier_skip_paths(family):
    _, patches = family
    slice_h2 = _synthetic_patches()[1]
    e = classify_slice_structure(slice_h2, [-0.2])[0]
    assert e["skipped"] and "contained" in e["reason"]
    with pytest.raises(TransversalityError):
        classify_slice_structure(slice_h2, [-0.2], strict=True)

    e = classify_slice_structure(patches["b"], [100.0])[0]
    assert e["skipped"] and "not attained" in e["reason"]

    # horizontal tangent along u = 0 makes level 0 a tangential contact
    cubic = patch_from_chart(
        h2xr(-1.0), "cubic",
        lambda U, V: np.stack([0.2 + 0.1 * U, 0.1 * V, U**3], axis=-1),
        (-0.5, 0.5), (-0.5, 0.5),
    )
    e = classify_slice_structure(cubic, [0.0])[0]
    assert e["skipped"] and "tangential contact" in e["reason"]


def test_classifier_requires_a_product_base():
    p = patch_from_chart(r3(), "plane", lambda U, V: np.stack(
        [U, V, np.zeros_like(U)], axis=-1), (-1, 1), (-1, 1))
    with pytest.raises(ValueError):
        classify_slice_structure(p, [0.0])


# --- constructor validation ----------------------------------------------------


def test_orbit_surface_rejects_mismatched_actions(family):
    curves, _ = family
    with pytest.raises(IncompatibleActionError):
        orbit_surface(curves["a_lt"], parabolic(np.pi, 1.0))
    with pytest.raises(IncompatibleActionError):
        orbit_surface(curves["a_lt"], rotation(1.0, center=(0.3, 0.0)))
    with pytest.raises(IncompatibleActionError):
        orbit_surface(curves["c"], hyperbolic_translation((np.pi, 0.4), 1.0))
    with pytest.raises(IncompatibleActionError):
        orbit_surface(curves["p"], parabolic(np.pi, 1.0), profile_ideal=np.pi / 3)


def test_synthetic_profile_rejects_unknown_variant():
    with pytest.raises(ValueError):
        synthetic_profile("s2xr", "diagonal")

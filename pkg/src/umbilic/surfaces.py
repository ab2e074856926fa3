"""Surface patches as group orbits of profile curves, and their curvature.

A :class:`SurfacePatch` is a parametrized map (u, v) -> chart point together
with first and second derivative evaluators.  Orbit surfaces built from a
:class:`~umbilic.profiles.GeneratingCurve` carry closed-form jets (the group
actions are explicit Mobius or affine maps); arbitrary charts fall back to
centered finite differences with step 1e-4 times the domain span.

Conventions.  Patches are parametrized by (u, v) = (curve parameter, group
parameter).  The unit normal N makes (X_u, X_v, N) positively oriented in
the chart; profile-based patches flip N globally, if needed, so that inside
the generating vertical plane N equals the curve tangent rotated by +90
degrees, N = -sin(theta) u_rho + cos(theta) xi.  With that choice the
curve-direction principal curvature is theta'(s) and the orbit-direction one
is the family's closed form (sin/tan, sinh/tanh, exp, or cosh/sinh ratios).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.optimize import brentq

from .geometry import (
    ModelGeometry,
    christoffels,
    cross,
    h2xr,
    inner,
    isometry_jet,
    metric_at,
    norm,
    s2xr,
    sol,
    vertical_field,
    _mobius_jet,
)
from .profiles import GeneratingCurve

FD_STEP_FRACTION = 1e-4
AXIS_TUBE = 1e-2
GRID_MARGIN = 1e-3
IMMERSION_FLOOR = 1e-10
CLASSIFY_BAND = 1e-4
CONSTANCY_TOL = 1e-3

JET_KEYS = ("X", "Xu", "Xv", "Xuu", "Xuv", "Xvv")


class ImmersionError(RuntimeError):
    """The first fundamental form is degenerate at an evaluation point."""


class TransversalityError(RuntimeError):
    """A requested slice level is tangential to the surface."""


class IncompatibleActionError(ValueError):
    """The group action cannot sweep the given generating curve."""


@dataclass
class SurfacePatch:
    """Immersed patch with derivative evaluators.

    ``jet(U, V)`` returns a dict of arrays keyed by ``JET_KEYS`` with a
    trailing axis of chart components.  ``chart(U, V)`` returns positions
    only; it always exists so curvature can be recomputed by finite
    differences at a chosen step.  ``orient`` is the overall sign applied to
    the cross-product normal.
    """

    space: ModelGeometry
    name: str
    u_range: tuple
    v_range: tuple
    jet: Callable = field(repr=False)
    chart: Callable = field(repr=False, default=None)
    orient: float = 1.0

    def __post_init__(self):
        if self.chart is None:
            jet = self.jet
            self.chart = lambda U, V: jet(U, V)["X"]

    def grid(self, n_u=48, n_v=48, margin=GRID_MARGIN):
        """Meshgrid over the domain inset by a relative margin."""
        (u0, u1), (v0, v1) = self.u_range, self.v_range
        du, dv = margin * (u1 - u0), margin * (v1 - v0)
        u = np.linspace(u0 + du, u1 - du, n_u)
        v = np.linspace(v0 + dv, v1 - dv, n_v)
        return np.meshgrid(u, v, indexing="ij")


def fd_jet(chart, u_range, v_range, h=None):
    """Centered finite-difference jet of an arbitrary chart map."""
    hu = h if h is not None else FD_STEP_FRACTION * (u_range[1] - u_range[0])
    hv = h if h is not None else FD_STEP_FRACTION * (v_range[1] - v_range[0])

    def jet(U, V):
        U = np.asarray(U, dtype=float)
        V = np.asarray(V, dtype=float)
        X = chart(U, V)
        Xpu, Xmu = chart(U + hu, V), chart(U - hu, V)
        Xpv, Xmv = chart(U, V + hv), chart(U, V - hv)
        Xpp, Xpm = chart(U + hu, V + hv), chart(U + hu, V - hv)
        Xmp, Xmm = chart(U - hu, V + hv), chart(U - hu, V - hv)
        return {
            "X": X,
            "Xu": (Xpu - Xmu) / (2 * hu),
            "Xv": (Xpv - Xmv) / (2 * hv),
            "Xuu": (Xpu - 2 * X + Xmu) / hu**2,
            "Xvv": (Xpv - 2 * X + Xmv) / hv**2,
            "Xuv": (Xpp - Xpm - Xmp + Xmm) / (4 * hu * hv),
        }

    return jet


def patch_from_chart(space, name, chart, u_range, v_range, h=None) -> SurfacePatch:
    """Wrap a bare chart map in a patch with finite-difference jets."""
    return SurfacePatch(
        space=space,
        name=name,
        u_range=tuple(u_range),
        v_range=tuple(v_range),
        jet=fd_jet(chart, u_range, v_range, h=h),
        chart=chart,
    )


# ---------------------------------------------------------------------------
# orbit surfaces


def _complex_pair(w):
    return np.stack([w.real, w.imag], axis=-1)


def _assemble(wjets, t, t_u, t_uu):
    """Real chart jets from complex horizontal jets plus a vertical profile."""
    w, wu, wv, wuu, wuv, wvv = wjets
    zero = np.zeros_like(t)

    def comp(h, vert):
        return np.concatenate([_complex_pair(h), np.asarray(vert)[..., None]], axis=-1)

    return {
        "X": comp(w, t),
        "Xu": comp(wu, t_u),
        "Xv": comp(wv, zero),
        "Xuu": comp(wuu, t_uu),
        "Xuv": comp(wuv, zero),
        "Xvv": comp(wvv, zero),
    }


def _mobius_chain(M, W, Wu, Wv, Wuu, Wuv, Wvv):
    """Push complex jets through a fixed Mobius map w = M(W)."""
    w, d1, d2 = _mobius_jet(M, W)
    return (
        w,
        d1 * Wu,
        d1 * Wv,
        d2 * Wu**2 + d1 * Wuu,
        d2 * Wu * Wv + d1 * Wuv,
        d2 * Wv**2 + d1 * Wvv,
    )


def _grid_args(curve, U, V):
    """Broadcast (U, V) and evaluate the curve jet on the raveled grid."""
    U, V = np.broadcast_arrays(
        np.asarray(U, dtype=float), np.asarray(V, dtype=float)
    )
    flat = curve.jet(np.ravel(U))
    j = {k: np.reshape(v, U.shape) for k, v in flat.items()}
    return U, V, j


def _rotational_jet(curve, kappa_sign):
    half = np.tan if kappa_sign > 0 else np.tanh

    def jet(U, V):
        U, V, j = _grid_args(curve, U, V)
        rho = j["rho"]
        r = half(rho / 2.0)
        r_rho = (1.0 + kappa_sign * r * r) / 2.0
        r_rhorho = kappa_sign * r * (1.0 + kappa_sign * r * r) / 2.0
        r_u = r_rho * j["rho_s"]
        r_uu = r_rhorho * j["rho_s"] ** 2 + r_rho * j["rho_ss"]
        c, s = np.cos(V), np.sin(V)
        e = np.stack([c, s], axis=-1)
        e_perp = np.stack([-s, c], axis=-1)
        zero = np.zeros_like(rho)

        def comp(h, vert):
            return np.concatenate([h, np.asarray(vert)[..., None]], axis=-1)

        return {
            "X": comp(r[..., None] * e, j["t"]),
            "Xu": comp(r_u[..., None] * e, j["t_s"]),
            "Xv": comp(r[..., None] * e_perp, zero),
            "Xuu": comp(r_uu[..., None] * e, j["t_ss"]),
            "Xuv": comp(r_u[..., None] * e_perp, zero),
            "Xvv": comp(-r[..., None] * e, zero),
            # the (u, v) parametrization reverses orientation each time the
            # profile crosses the rotation axis (sign of r); folding that
            # into the normal keeps N smooth across axis crossings
            "orient_sign": np.where(r >= 0.0, 1.0, -1.0),
        }

    return jet


def _parabolic_jet(curve, action_ideal, profile_sign):
    # right half-plane picture adapted to the action's ideal point: the
    # profile sits on the positive real axis at W = exp(sigma rho), orbits
    # are the vertical translations W -> W + i v.  The curve's rho is the
    # Busemann coordinate oriented away from its accumulation point, so
    # sigma = -1 when the curve accumulates at the action's own fixed point
    # (umbilic sweep) and sigma = +1 at the antipode (minimal companion).
    zeta = np.exp(1j * action_ideal)
    Rm = np.array([[-1.0 / zeta, 0.0], [0.0, 1.0]])
    C = np.array([[-1.0, 1.0], [1.0, 1.0]])
    M = np.linalg.inv(Rm) @ np.linalg.inv(C)

    def jet(U, V):
        U, V, j = _grid_args(curve, U, V)
        E = np.exp(profile_sign * j["rho"])
        rho_s = profile_sign * j["rho_s"]
        rho_ss = profile_sign * j["rho_ss"]
        W = E + 1j * V
        Wu = rho_s * E + 0j
        Wv = np.full(U.shape, 1j)
        Wuu = (rho_ss + rho_s**2) * E + 0j
        zero = np.zeros(U.shape, dtype=complex)
        wjets = _mobius_chain(M, W, Wu, Wv, Wuu, zero, zero)
        return _assemble(wjets, j["t"], j["t_s"], j["t_ss"])

    return jet


def _hyperbolic_jet(curve, axis_angle):
    # upper half-plane picture: the translation axis is the imaginary axis,
    # profile points sit on the unit circle at signed distance rho from it,
    # orbits are the scalings W -> e^{-v} W (so +v translates toward the
    # second axis endpoint, matching the isometry's sign); M maps back to
    # the disk and a final rotation places the axis endpoints
    M = np.array([[np.exp(1j * axis_angle), 0.0], [0.0, 1.0]]) @ np.array(
        [[-1.0, 1j], [1.0, 1j]]
    )

    def jet(U, V):
        U, V, j = _grid_args(curve, U, V)
        rho, rho_s, rho_ss = j["rho"], j["rho_s"], j["rho_ss"]
        sech, tanh = 1.0 / np.cosh(rho), np.tanh(rho)
        q = tanh + 1j * sech
        q_rho = sech * sech - 1j * sech * tanh
        q_rhorho = -2.0 * sech**2 * tanh - 1j * (sech**3 - sech * tanh**2)
        ev = np.exp(-V)
        W = ev * q
        Wu = ev * q_rho * rho_s
        Wuu = ev * (q_rhorho * rho_s**2 + q_rho * rho_ss)
        wjets = _mobius_chain(M, W, Wu, -W, Wuu, -Wu, W)
        return _assemble(wjets, j["t"], j["t_s"], j["t_ss"])

    return jet


def _sol_graph_jet(curve):
    def jet(U, V):
        U, V, j = _grid_args(curve, U, V)
        out = {k: np.zeros(U.shape + (3,)) for k in JET_KEYS}
        out["X"][..., 0] = V
        out["X"][..., 1] = U
        out["X"][..., 2] = j["z"]
        out["Xu"][..., 1] = 1.0
        out["Xu"][..., 2] = j["z_y"]
        out["Xv"][..., 0] = 1.0
        out["Xuu"][..., 2] = j["z_yy"]
        return out

    return jet


def synthetic_profile(kind, variant, level=0.0) -> GeneratingCurve:
    """Degenerate generating curves for slices, cylinders, and planes.

    ``variant='horizontal'`` is the horizontal geodesic rho = s at height
    t = ``level`` (its rotation orbit is a slice).  ``variant='vertical'``
    is the vertical line t = s at axis distance rho = ``level`` (its orbit
    is a cylinder over a circle, or a vertical plane when swept from the
    axis by a hyperbolic translation).
    """
    if variant == "horizontal":
        fields = lambda s: (s, np.full_like(s, level), np.zeros_like(s))
        derivs = lambda s: (np.ones_like(s), np.zeros_like(s))
    elif variant == "vertical":
        fields = lambda s: (np.full_like(s, level), s, np.full_like(s, np.pi / 2.0))
        derivs = lambda s: (np.zeros_like(s), np.ones_like(s))
    else:
        raise ValueError(f"unknown synthetic variant {variant!r}")

    def jet(s):
        rho, t, theta = fields(s)
        rho_s, t_s = derivs(s)
        zero = np.zeros_like(s)
        return {
            "rho": rho, "t": t, "theta": theta,
            "rho_s": rho_s, "t_s": t_s, "theta_s": zero,
            "rho_ss": zero, "t_ss": zero, "theta_ss": zero,
        }

    span = 8.0
    grid = np.linspace(-span, span, 257)
    rho, t, theta = fields(grid)
    return GeneratingCurve(
        kind=kind,
        param=None,
        span=(-span, span),
        columns=("s", "rho", "t", "theta"),
        samples=np.column_stack([grid, rho, t, theta]),
        period_data=None,
        _jet=jet,
    )


_ACTION_FOR_KIND = {
    "s2xr": "rotation",
    "h2xr-elliptic": "rotation",
    "h2xr-parabolic": "parabolic",
    "h2xr-hyperbolic": "hyperbolic",
    "sol": "sol_translation",
}

_TWO_PI = 2.0 * np.pi


def _angles_antipodal(a, b):
    return abs(abs((a - b) % _TWO_PI) - np.pi) < 1e-12


def orbit_surface(curve: GeneratingCurve, action, s_range=None, v_range=None,
                  name=None, profile_ideal=None) -> SurfacePatch:
    """Sweep a generating curve with a one-parameter isometry group.

    ``action`` is an :class:`~umbilic.geometry.IsometrySpec` naming the
    group; its own parameter is ignored and the patch coordinate v runs
    through the group instead.  Supported pairings: rotations about the
    origin with rotationally symmetric curves, boundary-point-fixing
    parabolic actions with parabolic curves, translations along a diameter
    geodesic with hyperbolic curves, and Sol x-translations with Sol graph
    curves.

    For parabolic sweeps, ``profile_ideal`` is the boundary angle at which
    the generating curve accumulates (default: the action's own fixed
    point, giving the umbilic sweep).  Passing the antipodal angle builds
    the companion surface whose orbit horocycles bend the opposite way
    relative to the profile normal.
    """
    expected = _ACTION_FOR_KIND[curve.kind]
    if action.kind != expected:
        raise IncompatibleActionError(
            f"{curve.kind} curves are swept by {expected} actions, not {action.kind!r}"
        )

    if s_range is None:
        s_range = curve.span

    if curve.kind == "sol":
        space = sol()
        jet = _sol_graph_jet(curve)
        v_range = v_range or (-1.0, 1.0)
    elif curve.kind == "s2xr":
        if tuple(action.center) != (0.0, 0.0):
            raise IncompatibleActionError("orbit sweeps require rotation about the origin")
        space = s2xr(1.0)
        jet = _rotational_jet(curve, +1.0)
        v_range = v_range or (0.0, _TWO_PI)
    elif curve.kind == "h2xr-elliptic":
        if tuple(action.center) != (0.0, 0.0):
            raise IncompatibleActionError("orbit sweeps require rotation about the origin")
        space = h2xr(-1.0)
        jet = _rotational_jet(curve, -1.0)
        v_range = v_range or (0.0, _TWO_PI)
    elif curve.kind == "h2xr-parabolic":
        space = h2xr(-1.0)
        ref = action.ideal if profile_ideal is None else float(profile_ideal)
        if abs((ref - action.ideal) % _TWO_PI) < 1e-12:
            sign = -1.0
        elif _angles_antipodal(ref, action.ideal):
            sign = +1.0
        else:
            raise IncompatibleActionError(
                "profile ideal point must coincide with or oppose the action's"
            )
        jet = _parabolic_jet(curve, action.ideal, sign)
        v_range = v_range or (-1.0, 1.0)
    else:
        space = h2xr(-1.0)
        e0, e1 = action.endpoints
        if not _angles_antipodal(e0, e1):
            raise IncompatibleActionError(
                "orbit sweeps require a translation axis through the origin"
            )
        jet = _hyperbolic_jet(curve, axis_angle=e1)
        v_range = v_range or (-1.0, 1.0)

    patch = SurfacePatch(
        space, name or f"{curve.kind}-orbit", tuple(s_range), tuple(v_range), jet
    )
    return _orient_to_profile(patch, curve)


def _orient_to_profile(patch, curve):
    """Fix the normal sign so the profile convention holds globally.

    The sign of the cross-product normal against the profile normal is
    constant on a connected patch, so one well-conditioned sample fixes it.
    """
    u0, u1 = patch.u_range
    v0, v1 = patch.v_range
    v_ref = 0.5 * (v0 + v1)
    us = np.linspace(u0 + 0.05 * (u1 - u0), u1 - 0.05 * (u1 - u0), 33)
    j = curve.jet(us)
    if curve.kind == "sol":
        # conormal covector of the graph z = z(y) is (0, -z', 1)
        i = int(np.argmax(np.abs(j["z_y"])))
        jet = patch.jet(np.asarray(us[i]), np.asarray(v_ref))
        cov = np.array([0.0, -float(j["z_y"][i]), 1.0])
        hint = np.linalg.solve(metric_at(patch.space, jet["X"]), cov)
    else:
        score = np.abs(np.cos(j["theta"])) * np.minimum(np.abs(j["rho"]), 1.0)
        i = int(np.argmax(score))
        theta = float(j["theta"][i])
        jet = patch.jet(np.asarray(us[i]), np.asarray(v_ref))
        X, Xu = jet["X"], jet["Xu"]
        xi = vertical_field(patch.space, X)
        horiz = Xu - inner(patch.space, X, Xu, xi) * xi
        nh = norm(patch.space, X, horiz)
        if nh < 1e-12 or abs(np.cos(theta)) < 1e-12:
            hint = np.cos(theta) * xi
        else:
            u_rho = horiz / nh * np.sign(np.cos(theta))
            hint = -np.sin(theta) * u_rho + np.cos(theta) * xi
    n_cross = cross(patch.space, jet["X"], jet["Xu"], jet["Xv"])
    n_cross = n_cross * float(np.asarray(jet.get("orient_sign", 1.0)))
    sign = np.sign(inner(patch.space, jet["X"], n_cross, hint))
    patch.orient = float(sign) if sign != 0 else 1.0
    return patch


def transform_patch(patch: SurfacePatch, iso, name=None) -> SurfacePatch:
    """Push a patch through an ambient isometry using its closed-form jets."""
    space = patch.space
    base_jet = patch.jet

    def moved_jet(U, V):
        j = base_jet(U, V)
        flats = {k: np.asarray(j[k], dtype=float).reshape(-1, 3) for k in JET_KEYS}
        res = {k: np.empty_like(flats[k]) for k in JET_KEYS}
        for n, p in enumerate(flats["X"]):
            q, J, H = isometry_jet(space, iso, p)
            a, b = flats["Xu"][n], flats["Xv"][n]
            res["X"][n] = q
            res["Xu"][n] = J @ a
            res["Xv"][n] = J @ b
            res["Xuu"][n] = J @ flats["Xuu"][n] + np.einsum("kij,i,j->k", H, a, a)
            res["Xuv"][n] = J @ flats["Xuv"][n] + np.einsum("kij,i,j->k", H, a, b)
            res["Xvv"][n] = J @ flats["Xvv"][n] + np.einsum("kij,i,j->k", H, b, b)
        shape = np.asarray(j["X"]).shape
        out = {k: res[k].reshape(shape) for k in JET_KEYS}
        if "orient_sign" in j:
            out["orient_sign"] = j["orient_sign"]
        return out

    moved = SurfacePatch(
        space=space,
        name=name or f"{patch.name}*",
        u_range=patch.u_range,
        v_range=patch.v_range,
        jet=moved_jet,
    )
    # reflections reverse the cross-product normal
    u_ref = 0.5 * (patch.u_range[0] + patch.u_range[1])
    v_ref = 0.5 * (patch.v_range[0] + patch.v_range[1])
    p_ref = patch.chart(np.asarray(u_ref), np.asarray(v_ref))
    _, J, _ = isometry_jet(space, iso, np.asarray(p_ref, dtype=float))
    moved.orient = patch.orient * float(np.sign(np.linalg.det(J)))
    return moved


# ---------------------------------------------------------------------------
# curvature


def _jet_arrays(patch, U, V, h=None):
    if h is None:
        return patch.jet(U, V)
    return fd_jet(patch.chart, patch.u_range, patch.v_range, h=h)(U, V)


def _forms_from_jet(space, j, orient):
    X, Xu, Xv = j["X"], j["Xu"], j["Xv"]
    g = metric_at(space, X)
    E = np.einsum("...ij,...i,...j->...", g, Xu, Xu)
    F = np.einsum("...ij,...i,...j->...", g, Xu, Xv)
    G = np.einsum("...ij,...i,...j->...", g, Xv, Xv)
    I = np.stack(
        [np.stack([E, F], axis=-1), np.stack([F, G], axis=-1)], axis=-2
    )
    det_I = E * G - F * F

    factor = orient * np.asarray(j.get("orient_sign", 1.0))
    n_raw = cross(space, X, Xu, Xv) * np.expand_dims(factor, -1)
    n_len = norm(space, X, n_raw)
    safe = np.where(n_len > 0, n_len, 1.0)
    N = n_raw / safe[..., None]

    Gamma = christoffels(space, X)

    def second(Xa, Xb, Xab):
        acc = Xab + np.einsum("...kij,...i,...j->...k", Gamma, Xa, Xb)
        return np.einsum("...ij,...i,...j->...", g, acc, N)

    L = second(Xu, Xu, j["Xuu"])
    M = second(Xu, Xv, j["Xuv"])
    Nn = second(Xv, Xv, j["Xvv"])
    II = np.stack(
        [np.stack([L, M], axis=-1), np.stack([M, Nn], axis=-1)], axis=-2
    )
    return I, II, N, det_I


def fundamental_forms(patch: SurfacePatch, u, v, h=None):
    """First and second fundamental forms and the unit normal at (u, v).

    ``h`` forces a finite-difference jet with that step on the patch chart;
    by default the patch's own (closed-form or default-step) jet is used.
    Raises :class:`ImmersionError` where det I falls below 1e-10.
    """
    U = np.asarray(u, dtype=float)
    V = np.asarray(v, dtype=float)
    j = _jet_arrays(patch, U, V, h=h)
    I, II, N, det_I = _forms_from_jet(patch.space, j, patch.orient)
    if np.any(det_I <= IMMERSION_FLOOR):
        bad = np.argwhere(np.atleast_1d(det_I) <= IMMERSION_FLOOR).ravel()
        raise ImmersionError(
            f"patch {patch.name!r}: first fundamental form degenerate "
            f"(det I <= {IMMERSION_FLOOR}) at flat grid index {bad[:1]}"
        )
    return I, II, N


def _shape_invariants(I, II):
    E, F, G = I[..., 0, 0], I[..., 0, 1], I[..., 1, 1]
    L, M, Nn = II[..., 0, 0], II[..., 0, 1], II[..., 1, 1]
    det_I = E * G - F * F
    H = (E * Nn - 2.0 * F * M + G * L) / (2.0 * det_I)
    K = (L * Nn - M * M) / det_I
    disc = np.sqrt(np.maximum(H * H - K, 0.0))
    return H - disc, H + disc, H


def principal_curvatures(patch: SurfacePatch, u, v, h=None):
    """Ordered principal curvatures (lambda1 <= lambda2) at (u, v)."""
    I, II, _ = fundamental_forms(patch, u, v, h=h)
    lam1, lam2, _ = _shape_invariants(I, II)
    return lam1, lam2


@dataclass
class CurvatureReport:
    """Grid evaluation of a patch's extrinsic curvature data.

    ``included`` masks out points within the axis tube (orbit speed below
    ``AXIS_TUBE``) or with degenerate first fundamental form; statistics are
    over included points only.  ``nu``/``T``/``JT`` are None for spaces
    without a distinguished vertical field.
    """

    patch_name: str
    U: np.ndarray
    V: np.ndarray
    X: np.ndarray
    I: np.ndarray
    II: np.ndarray
    N: np.ndarray
    lambda1: np.ndarray
    lambda2: np.ndarray
    mean_curvature: np.ndarray
    umbilicity_factor: np.ndarray
    defect: np.ndarray
    included: np.ndarray
    nu: Optional[np.ndarray] = None
    T: Optional[np.ndarray] = None
    JT: Optional[np.ndarray] = None

    @property
    def defect_max(self) -> float:
        return float(np.max(self.defect[self.included]))

    @property
    def defect_mean(self) -> float:
        return float(np.mean(self.defect[self.included]))

    @property
    def defect_argmax(self):
        masked = np.where(self.included, self.defect, -np.inf)
        i, j = np.unravel_index(np.argmax(masked), masked.shape)
        return float(self.U[i, j]), float(self.V[i, j])


def curvature_report(patch: SurfacePatch, n_u=48, n_v=48, margin=GRID_MARGIN,
                     h=None) -> CurvatureReport:
    """Evaluate fundamental forms, principal curvatures, and defect on a grid."""
    U, V = patch.grid(n_u, n_v, margin=margin)
    j = _jet_arrays(patch, U, V, h=h)
    I, II, N, det_I = _forms_from_jet(patch.space, j, patch.orient)

    X = j["X"]
    orbit_speed = norm(patch.space, X, j["Xv"])
    included = (orbit_speed > AXIS_TUBE) & (det_I > IMMERSION_FLOOR)
    if not np.any(included):
        raise ImmersionError(
            f"patch {patch.name!r}: no admissible grid points outside the axis tube"
        )

    lam1, lam2, H = _shape_invariants(I, II)
    defect = np.abs(lam1 - lam2) / (1.0 + np.abs(lam1) + np.abs(lam2))

    nu = T = JT = None
    if patch.space.has_vertical_field:
        xi = vertical_field(patch.space, X)
        nu = inner(patch.space, X, N, xi)
        T = xi - nu[..., None] * N
        JT = cross(patch.space, X, N, T)

    return CurvatureReport(
        patch_name=patch.name,
        U=U, V=V, X=X, I=I, II=II, N=N,
        lambda1=lam1, lambda2=lam2,
        mean_curvature=H, umbilicity_factor=0.5 * (lam1 + lam2),
        defect=defect, included=included,
        nu=nu, T=T, JT=JT,
    )


def umbilicity_defect(patch: SurfacePatch, n_u=48, n_v=48, h=None) -> dict:
    """Max, mean, and argmax of the scaled umbilicity defect on a grid."""
    rep = curvature_report(patch, n_u=n_u, n_v=n_v, h=h)
    return {
        "max": rep.defect_max,
        "mean": rep.defect_mean,
        "argmax": rep.defect_argmax,
    }


def mean_curvature_stats(patch: SurfacePatch, n_u=48, n_v=48, h=None) -> dict:
    """Range statistics of the mean curvature on a grid."""
    rep = curvature_report(patch, n_u=n_u, n_v=n_v, h=h)
    H = rep.mean_curvature[rep.included]
    return {
        "max_abs": float(np.max(np.abs(H))),
        "min": float(np.min(H)),
        "max": float(np.max(H)),
        "mean": float(np.mean(H)),
    }


# ---------------------------------------------------------------------------
# slice structure


def _level_points(patch, level, n_v):
    """Intersections of the patch with the slice t = level, one per v-line."""
    (u0, u1), (v0, v1) = patch.u_range, patch.v_range
    du = GRID_MARGIN * (u1 - u0)
    dv = GRID_MARGIN * (v1 - v0)
    vs = np.linspace(v0 + dv, v1 - dv, n_v)
    u_grid = np.linspace(u0 + du, u1 - du, 257)

    def height(u, v):
        return float(patch.chart(np.asarray(u), np.asarray(v))[..., 2]) - level

    hits = []
    flat = 0
    for v in vs:
        f = patch.chart(u_grid, np.full_like(u_grid, v))[..., 2] - level
        if np.all(np.abs(f) < 1e-12):
            flat += 1
            continue
        idx = np.nonzero(np.sign(f[:-1]) * np.sign(f[1:]) < 0)[0]
        if idx.size == 0:
            zeros = np.nonzero(f == 0.0)[0]
            if zeros.size:
                hits.append((float(u_grid[zeros[0]]), float(v)))
            continue
        k = idx[0]
        u_star = brentq(height, u_grid[k], u_grid[k + 1], args=(v,), xtol=1e-14)
        hits.append((float(u_star), float(v)))
    return hits, flat, len(vs)


def _slice_geodesic_curvature(space, chart2d, vs, dv):
    """Signed k_g of the level curve v -> chart2d(v) inside its slice.

    The slice is totally geodesic, so the ambient covariant acceleration
    projected onto the in-slice normal (the velocity rotated a quarter turn
    about the vertical) is the intrinsic geodesic curvature.  Centered
    differences at steps dv and dv/2 are Richardson-combined to cancel the
    leading truncation term.
    """

    def kg_at(c0, step, v):
        cp = chart2d(v + step)
        cm = chart2d(v - step)
        vel = (cp - cm) / (2.0 * step)
        acc2 = (cp - 2.0 * c0 + cm) / step**2
        Gamma = christoffels(space, c0)
        acc = acc2 + np.einsum("kij,i,j->k", Gamma, vel, vel)
        speed2 = inner(space, c0, vel, vel)
        xi = vertical_field(space, c0)
        n_in = cross(space, c0, xi, vel)
        n_len = norm(space, c0, n_in)
        return float(inner(space, c0, acc, n_in) / (n_len * speed2))

    kgs = []
    for v in vs:
        c0 = chart2d(v)
        coarse = kg_at(c0, dv, v)
        fine = kg_at(c0, dv / 2.0, v)
        kgs.append((4.0 * fine - coarse) / 3.0)
    return np.asarray(kgs)


def classify_slice_structure(patch: SurfacePatch, levels, n_v=64,
                             band=CLASSIFY_BAND, constancy_tol=CONSTANCY_TOL,
                             strict=False) -> list:
    """Classify the curves cut on a product-space patch by horizontal slices.

    For each level t0, the level curve is sampled (one intersection per
    v-line), its geodesic curvature inside the slice and the normal's
    vertical component nu are measured, and their constancy is checked.
    Levels the patch meets tangentially (|T| below 1e-6 at a hit, or a
    slice contained in the patch) are skipped and reported, or raise
    :class:`TransversalityError` when ``strict``.

    Tags: ``geodesic`` when |k_g| sits within ``band`` of 0; on the sphere
    base every other circle is ``elliptic``; on the hyperbolic base |k_g|
    against 1 separates ``elliptic`` / ``parabolic`` / ``hyperbolic``; and
    ``none`` marks level curves whose k_g or nu fail to be constant.
    """
    if patch.space.kind not in ("s2xr", "h2xr"):
        raise ValueError("slice classification requires a product space")

    out = []
    for level in levels:
        entry = {"level": float(level), "tag": None, "skipped": False}
        hits, flat, n_lines = _level_points(patch, level, n_v)
        if flat == n_lines:
            entry.update(skipped=True, reason="slice contained in patch (tangential)")
            if strict:
                raise TransversalityError(entry["reason"])
            out.append(entry)
            continue
        if not hits:
            entry.update(skipped=True, reason="level not attained on patch")
            out.append(entry)
            continue

        us = np.array([p[0] for p in hits])
        vs = np.array([p[1] for p in hits])
        j = patch.jet(us, vs)
        _, _, N, _ = _forms_from_jet(patch.space, j, patch.orient)
        xi = vertical_field(patch.space, j["X"])
        nu = inner(patch.space, j["X"], N, xi)
        t_norm = np.sqrt(np.maximum(1.0 - nu**2, 0.0))
        if np.min(t_norm) < 1e-6:
            entry.update(skipped=True,
                         reason=f"tangential contact (min |T| = {np.min(t_norm):.2e})")
            if strict:
                raise TransversalityError(entry["reason"])
            out.append(entry)
            continue

        # dv balances second-difference truncation against root-solve noise
        dv = 1e-3 * (patch.v_range[1] - patch.v_range[0])
        bracket = 0.05 * (patch.u_range[1] - patch.u_range[0])

        def chart2d(v, _level=level):
            u_near = us[np.argmin(np.abs(vs - v))]
            f = lambda u: float(
                patch.chart(np.asarray(u), np.asarray(v))[..., 2]
            ) - _level
            lo = max(u_near - bracket, patch.u_range[0])
            hi = min(u_near + bracket, patch.u_range[1])
            u_star = brentq(f, lo, hi, xtol=1e-14) if f(lo) * f(hi) < 0 else u_near
            return patch.chart(np.asarray(u_star), np.asarray(v))

        inner_vs = vs[1:-1] if len(vs) > 4 else vs
        kg = _slice_geodesic_curvature(patch.space, chart2d, inner_vs, dv)
        kg_mean = float(np.mean(kg))
        entry.update(
            k_g=kg_mean,
            k_g_residual=float(np.max(np.abs(kg - kg_mean))),
            nu=float(np.mean(nu)),
            nu_residual=float(np.max(np.abs(nu - np.mean(nu)))),
            n_points=len(hits),
        )

        if entry["k_g_residual"] > constancy_tol or entry["nu_residual"] > constancy_tol:
            entry["tag"] = "none"
        elif abs(kg_mean) <= band:
            entry["tag"] = "geodesic"
        elif patch.space.kind == "s2xr":
            entry["tag"] = "elliptic"
        elif abs(abs(kg_mean) - 1.0) <= band:
            entry["tag"] = "parabolic"
        elif abs(kg_mean) > 1.0:
            entry["tag"] = "elliptic"
        else:
            entry["tag"] = "hyperbolic"
        out.append(entry)
    return out

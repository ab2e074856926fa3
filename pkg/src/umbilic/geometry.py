"""Model geometries: charts, metrics, connections, curvature, isometries.

Six homogeneous 3-manifolds are supported, each in a single global chart:

``r3``      Euclidean space, coordinates (x, y, z).
``h3``      Hyperbolic space, upper half-space {z > 0}, metric (dx^2+dy^2+dz^2)/z^2.
``s2xr``    S^2(kappa) x R, stereographic base chart, metric F^2(dx^2+dy^2)+dt^2
            with F = (2/sqrt(kappa))/(1 + x^2 + y^2).
``h2xr``    H^2(kappa) x R, unit-disk base chart, F = (2/sqrt(-kappa))/(1 - x^2 - y^2).
``sol``     Sol, metric e^{2z}dx^2 + e^{-2z}dy^2 + dz^2.
``m3``      The fibration chart with 4-point isotropy data (kappa, tau):
            lam = 1/(1 + kappa(x^2+y^2)/4),
            metric lam^2(dx^2+dy^2) + (dz + tau*lam*(y dx - x dy))^2.
            tau = 0 gives the product over the curvature-kappa base.

Conventions fixed here and relied on throughout the package:

* Curvature tensor sign: R(X,Y)Z = nab_Y nab_X Z - nab_X nab_Y Z - nab_{[Y,X]} Z.
  With this sign <R(X,Y)Y, X> = +1 for orthonormal X, Y in h3.
* Cross product: <X ^ Y, Z> = sqrt(det g) * det[X, Y, Z] (right-handed in
  chart coordinates).

All tensor-valued functions broadcast over leading point axes: points have
shape (..., 3), metrics (..., 3, 3), Christoffel symbols (..., 3, 3, 3) with
``gamma[..., l, i, j]`` the coefficient of d_l in nab_{d_i} d_j.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

KINDS = ("r3", "h3", "s2xr", "h2xr", "sol", "m3")

GEODESIC_RTOL = 1e-12
GEODESIC_ATOL = 1e-14
# complex-step size for derivatives of the Christoffel symbols
_CS = 1e-100


class ChartDomainError(ValueError):
    """A point lies outside the model chart."""


class GeodesicEscapeError(RuntimeError):
    """A geodesic left the chart before the requested parameter."""

    def __init__(self, message, s_exit):
        super().__init__(message)
        self.s_exit = s_exit


class IllFormedIsometryError(ValueError):
    """An isometry spec does not apply to the given space."""


@dataclass(frozen=True)
class ModelGeometry:
    """A model space: chart + metric, identified by kind and (kappa, tau).

    ``kappa`` is the base curvature for the product kinds and the fibration
    kind; ``tau`` the bundle curvature (0 for products).  ``m3`` with
    kappa = 4 tau^2 is a space form; it is permitted but flagged through
    :attr:`is_space_form` so callers can special-case the degeneracy.
    """

    kind: str
    kappa: float = 0.0
    tau: float = 0.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown geometry kind {self.kind!r}")
        if self.kind == "s2xr" and not self.kappa > 0:
            raise ValueError("s2xr requires kappa > 0")
        if self.kind == "h2xr" and not self.kappa < 0:
            raise ValueError("h2xr requires kappa < 0")
        if self.kind in ("s2xr", "h2xr") and self.tau != 0.0:
            raise ValueError("product spaces require tau = 0")

    @property
    def is_space_form(self) -> bool:
        return self.kind == "m3" and self.kappa == 4.0 * self.tau**2

    @property
    def bundle_discriminant(self) -> float:
        """kappa - 4 tau^2 where that quantity is meaningful."""
        if self.kind in ("s2xr", "h2xr", "m3"):
            return self.kappa - 4.0 * self.tau**2
        raise ValueError(f"no (kappa, tau) data for kind {self.kind!r}")

    @property
    def has_vertical_field(self) -> bool:
        return self.kind in ("s2xr", "h2xr", "m3")


def r3() -> ModelGeometry:
    return ModelGeometry("r3")


def h3() -> ModelGeometry:
    return ModelGeometry("h3")


def sol() -> ModelGeometry:
    return ModelGeometry("sol")


def s2xr(kappa: float = 1.0) -> ModelGeometry:
    return ModelGeometry("s2xr", kappa=kappa)


def h2xr(kappa: float = -1.0) -> ModelGeometry:
    return ModelGeometry("h2xr", kappa=kappa)


def m3(kappa: float, tau: float) -> ModelGeometry:
    return ModelGeometry("m3", kappa=kappa, tau=tau)


# ---------------------------------------------------------------------------
# chart domains


def chart_contains(space: ModelGeometry, p) -> np.ndarray:
    """Boolean mask of points lying inside the chart."""
    p = np.asarray(p, dtype=float)
    x, y, z = p[..., 0], p[..., 1], p[..., 2]
    if space.kind == "h3":
        return z > 0
    if space.kind == "h2xr":
        return x**2 + y**2 < 1.0
    if space.kind == "m3" and space.kappa < 0:
        return x**2 + y**2 < 4.0 / (-space.kappa)
    return np.ones(np.shape(x), dtype=bool)


def _check_domain(space, p):
    if np.iscomplexobj(p):
        return
    if not np.all(chart_contains(space, p)):
        raise ChartDomainError(f"point outside the {space.kind} chart")


def _chart_clearance(space, q):
    """Positive inside the chart, crossing zero at the boundary / blow-up."""
    x, y, z = q[0], q[1], q[2]
    if space.kind == "h3":
        return z
    if space.kind == "h2xr":
        return 1.0 - (x**2 + y**2)
    if space.kind == "m3" and space.kappa < 0:
        return 4.0 / (-space.kappa) - (x**2 + y**2)
    # charts covering the whole space, or (s2xr) missing a single fiber:
    # treat coordinate blow-up as the escape condition.
    return 1.0e16 - (x**2 + y**2 + z**2)


# ---------------------------------------------------------------------------
# metric and first derivatives (closed form, complex-safe)


def metric_at(space: ModelGeometry, p) -> np.ndarray:
    """Metric matrix g_ij at p; broadcasts, symmetric positive definite."""
    p = np.asarray(p)
    _check_domain(space, p)
    x, y = p[..., 0], p[..., 1]
    z = p[..., 2]
    g = np.zeros(p.shape[:-1] + (3, 3), dtype=p.dtype if np.iscomplexobj(p) else float)
    if space.kind == "r3":
        g[..., 0, 0] = g[..., 1, 1] = g[..., 2, 2] = 1.0
    elif space.kind == "h3":
        iz2 = 1.0 / z**2
        g[..., 0, 0] = g[..., 1, 1] = g[..., 2, 2] = iz2
    elif space.kind == "sol":
        g[..., 0, 0] = np.exp(2.0 * z)
        g[..., 1, 1] = np.exp(-2.0 * z)
        g[..., 2, 2] = 1.0
    elif space.kind in ("s2xr", "h2xr"):
        F = _conformal_factor(space, x, y)
        g[..., 0, 0] = g[..., 1, 1] = F**2
        g[..., 2, 2] = 1.0
    else:  # m3
        k, tau = space.kappa, space.tau
        lam = 1.0 / (1.0 + k * (x**2 + y**2) / 4.0)
        wx = tau * lam * y
        wy = -tau * lam * x
        g[..., 0, 0] = lam**2 + wx**2
        g[..., 1, 1] = lam**2 + wy**2
        g[..., 2, 2] = 1.0
        g[..., 0, 1] = g[..., 1, 0] = wx * wy
        g[..., 0, 2] = g[..., 2, 0] = wx
        g[..., 1, 2] = g[..., 2, 1] = wy
    return g


def _conformal_factor(space, x, y):
    if space.kind == "s2xr":
        return (2.0 / np.sqrt(space.kappa)) / (1.0 + x**2 + y**2)
    return (2.0 / np.sqrt(-space.kappa)) / (1.0 - x**2 - y**2)


def metric_deriv(space: ModelGeometry, p) -> np.ndarray:
    """Coordinate derivatives dg[..., k, i, j] = d_k g_ij (closed form)."""
    p = np.asarray(p)
    _check_domain(space, p)
    x, y = p[..., 0], p[..., 1]
    z = p[..., 2]
    dg = np.zeros(p.shape[:-1] + (3, 3, 3), dtype=p.dtype if np.iscomplexobj(p) else float)
    if space.kind == "r3":
        return dg
    if space.kind == "h3":
        d = -2.0 / z**3
        dg[..., 2, 0, 0] = dg[..., 2, 1, 1] = dg[..., 2, 2, 2] = d
        return dg
    if space.kind == "sol":
        dg[..., 2, 0, 0] = 2.0 * np.exp(2.0 * z)
        dg[..., 2, 1, 1] = -2.0 * np.exp(-2.0 * z)
        return dg
    if space.kind in ("s2xr", "h2xr"):
        F = _conformal_factor(space, x, y)
        sgn = 1.0 if space.kind == "s2xr" else -1.0
        # F = c/(1 + sgn*(x^2+y^2)) => dF = -sgn * F^2 * (2x, 2y)/c
        c = 2.0 / np.sqrt(abs(space.kappa))
        Fx = -sgn * 2.0 * x * F**2 / c
        Fy = -sgn * 2.0 * y * F**2 / c
        dg[..., 0, 0, 0] = dg[..., 0, 1, 1] = 2.0 * F * Fx
        dg[..., 1, 0, 0] = dg[..., 1, 1, 1] = 2.0 * F * Fy
        return dg
    # m3
    k, tau = space.kappa, space.tau
    lam = 1.0 / (1.0 + k * (x**2 + y**2) / 4.0)
    lx = -0.5 * k * x * lam**2
    ly = -0.5 * k * y * lam**2
    # g_xx = lam^2 (1 + tau^2 y^2), g_yy = lam^2 (1 + tau^2 x^2)
    dg[..., 0, 0, 0] = 2.0 * lam * lx * (1.0 + tau**2 * y**2)
    dg[..., 1, 0, 0] = 2.0 * lam * ly * (1.0 + tau**2 * y**2) + 2.0 * tau**2 * y * lam**2
    dg[..., 0, 1, 1] = 2.0 * lam * lx * (1.0 + tau**2 * x**2) + 2.0 * tau**2 * x * lam**2
    dg[..., 1, 1, 1] = 2.0 * lam * ly * (1.0 + tau**2 * x**2)
    # g_xy = -tau^2 lam^2 x y
    gxy_x = -(tau**2) * (2.0 * lam * lx * x * y + lam**2 * y)
    gxy_y = -(tau**2) * (2.0 * lam * ly * x * y + lam**2 * x)
    dg[..., 0, 0, 1] = dg[..., 0, 1, 0] = gxy_x
    dg[..., 1, 0, 1] = dg[..., 1, 1, 0] = gxy_y
    # g_xz = tau lam y, g_yz = -tau lam x
    dg[..., 0, 0, 2] = dg[..., 0, 2, 0] = tau * lx * y
    dg[..., 1, 0, 2] = dg[..., 1, 2, 0] = tau * (ly * y + lam)
    dg[..., 0, 1, 2] = dg[..., 0, 2, 1] = -tau * (lx * x + lam)
    dg[..., 1, 1, 2] = dg[..., 1, 2, 1] = -tau * ly * x
    return dg


# ---------------------------------------------------------------------------
# connection and curvature


def christoffels(space: ModelGeometry, p) -> np.ndarray:
    """Christoffel symbols gamma[..., l, i, j] from the Koszul formula."""
    g = metric_at(space, p)
    dg = metric_deriv(space, p)
    ginv = np.linalg.inv(g)
    # low[..., m, i, j] = (d_i g_jm + d_j g_im - d_m g_ij) / 2
    low = 0.5 * (
        np.swapaxes(dg, -3, -2)
        + np.einsum("...jim->...mij", dg)
        - dg
    )
    return np.einsum("...lm,...mij->...lij", ginv, low)


def christoffel_deriv(space: ModelGeometry, p) -> np.ndarray:
    """dgamma[..., m, l, i, j] = d_m gamma^l_ij via complex step (machine precision)."""
    p = np.asarray(p, dtype=float)
    out = np.empty(p.shape[:-1] + (3, 3, 3, 3))
    for mth in range(3):
        pc = p.astype(complex)
        pc[..., mth] += 1j * _CS
        out[..., mth, :, :, :] = christoffels(space, pc).imag / _CS
    return out


def riemann(space: ModelGeometry, p) -> np.ndarray:
    """Curvature tensor components R[..., l, i, j, k] = (R(d_i, d_j) d_k)^l.

    Sign convention: R(X,Y)Z = nab_Y nab_X Z - nab_X nab_Y Z - nab_{[Y,X]} Z.
    """
    G = christoffels(space, p)
    dG = christoffel_deriv(space, p)
    # d_j gamma^l_ik - d_i gamma^l_jk
    term = np.einsum("...jlik->...lijk", dG) - np.einsum("...iljk->...lijk", dG)
    quad = np.einsum("...ljm,...mik->...lijk", G, G) - np.einsum(
        "...lim,...mjk->...lijk", G, G
    )
    return term + quad


def curvature_tensor(space: ModelGeometry, p, X, Y, Z) -> np.ndarray:
    """R(X, Y)Z at p (chart components), in the package sign convention."""
    R = riemann(space, p)
    return np.einsum("...lijk,...i,...j,...k->...l", R, X, Y, Z)


def inner(space: ModelGeometry, p, X, Y) -> np.ndarray:
    g = metric_at(space, p)
    return np.einsum("...ij,...i,...j->...", g, X, Y)


def norm(space: ModelGeometry, p, X) -> np.ndarray:
    return np.sqrt(inner(space, p, X, X))


def cross(space: ModelGeometry, p, X, Y) -> np.ndarray:
    """Riemannian cross product, <X ^ Y, Z> = sqrt(det g) det[X, Y, Z]."""
    g = metric_at(space, p)
    sq = np.sqrt(np.linalg.det(g))
    e = np.zeros((3, 3, 3))
    e[0, 1, 2] = e[1, 2, 0] = e[2, 0, 1] = 1.0
    e[0, 2, 1] = e[2, 1, 0] = e[1, 0, 2] = -1.0
    low = np.einsum("...,lmn,...m,...n->...l", sq, e, X, Y)
    return np.einsum("...kl,...l->...k", np.linalg.inv(g), low)


def vertical_field(space: ModelGeometry, p=None) -> np.ndarray:
    """Chart components of the unit vertical Killing field (products, m3)."""
    if not space.has_vertical_field:
        raise ValueError(f"kind {space.kind!r} has no distinguished vertical field")
    xi = np.zeros(3)
    xi[2] = 1.0
    if p is not None:
        xi = np.broadcast_to(xi, np.shape(p)).copy()
    return xi


# ---------------------------------------------------------------------------
# geodesics


def _geodesic_rhs(space, state):
    """state (..., 6) -> derivative; velocity transport by the connection."""
    q = state[..., :3]
    v = state[..., 3:]
    G = christoffels(space, q)
    acc = -np.einsum("...lij,...i,...j->...l", G, v, v)
    return np.concatenate([v, acc], axis=-1)


def exp_map(space: ModelGeometry, p, v, tol: float = GEODESIC_RTOL) -> np.ndarray:
    """Riemannian exponential: endpoint of the geodesic with gamma'(0) = v.

    Raises :class:`GeodesicEscapeError` (carrying the exit parameter) if the
    geodesic leaves the chart before parameter 1.
    """
    p = np.asarray(p, dtype=float)
    v = np.asarray(v, dtype=float)
    _check_domain(space, p)
    if np.allclose(v, 0.0):
        return p.copy()

    def rhs(_, y):
        return _geodesic_rhs(space, y)

    def escape(_, y):
        return _chart_clearance(space, y[:3])

    escape.terminal = True
    escape.direction = -1
    sol_ = solve_ivp(
        rhs,
        (0.0, 1.0),
        np.concatenate([p, v]),
        method="DOP853",
        rtol=tol,
        atol=tol * 1e-2,
        events=escape,
    )
    if sol_.status == 1:
        raise GeodesicEscapeError(
            f"geodesic left the {space.kind} chart", s_exit=float(sol_.t_events[0][0])
        )
    if not sol_.success:
        raise RuntimeError(f"geodesic integration failed: {sol_.message}")
    return sol_.y[:3, -1]


class GeodesicFan:
    """Dense bundle of unit-speed geodesics from one point, for sphere patches.

    ``velocities`` has shape (n, 3).  :meth:`at` evaluates all rays at radius
    r in [0, r_max], returning positions and velocities of shape (n, 3).
    """

    def __init__(self, space, p, velocities, r_max, rtol=GEODESIC_RTOL, atol=GEODESIC_ATOL):
        self.space = space
        self.p = np.asarray(p, dtype=float)
        self.velocities = np.asarray(velocities, dtype=float)
        self.r_max = float(r_max)
        n = self.velocities.shape[0]
        y0 = np.concatenate(
            [np.broadcast_to(self.p, (n, 3)), self.velocities], axis=1
        ).ravel()

        def rhs(_, y):
            return _geodesic_rhs(space, y.reshape(n, 6)).ravel()

        self._sol = solve_ivp(
            rhs,
            (0.0, self.r_max),
            y0,
            method="DOP853",
            rtol=rtol,
            atol=atol,
            dense_output=True,
        )
        if not self._sol.success:
            raise RuntimeError(f"geodesic fan integration failed: {self._sol.message}")
        self._n = n

    def at(self, r):
        state = self._sol.sol(float(r)).reshape(self._n, 6)
        return state[:, :3], state[:, 3:]


# ---------------------------------------------------------------------------
# isometries


@dataclass(frozen=True)
class IsometrySpec:
    """Declarative description of a model-space isometry.

    Product-space kinds (s2xr, h2xr):

    * ``rotation``: angle about the vertical axis through ``center`` (base
      chart coordinates).
    * ``parabolic`` (h2xr only): boundary point at angle ``ideal``, parameter
      ``mu``.
    * ``hyperbolic`` (h2xr only): translation by ``distance`` along the
      geodesic with boundary endpoints at angles ``endpoints``.
    * ``vertical_shift``: t -> t + shift.
    * ``slice_reflection``: t -> 2*level - t.

    Sol kinds:

    * ``sol_translation``: (x,y,z) -> (s1 e^{-c} x + a, s2 e^{c} y + b, z + c).
    * ``sol_swap``:        (x,y,z) -> (s1 e^{-c} y + a, s2 e^{c} x + b, -z + c).

    with ``abc = (a, b, c)`` and ``signs = (s1, s2)``.
    """

    kind: str = "identity"
    angle: float = 0.0
    center: tuple = (0.0, 0.0)
    ideal: float = np.pi
    mu: float = 0.0
    endpoints: tuple = (np.pi, 0.0)
    distance: float = 0.0
    shift: float = 0.0
    level: float = 0.0
    abc: tuple = (0.0, 0.0, 0.0)
    signs: tuple = (1, 1)


def identity_isometry() -> IsometrySpec:
    return IsometrySpec("identity")


def rotation(angle, center=(0.0, 0.0)) -> IsometrySpec:
    return IsometrySpec("rotation", angle=float(angle), center=tuple(center))


def parabolic(ideal, mu) -> IsometrySpec:
    return IsometrySpec("parabolic", ideal=float(ideal), mu=float(mu))


def hyperbolic_translation(endpoints, distance) -> IsometrySpec:
    return IsometrySpec("hyperbolic", endpoints=tuple(endpoints), distance=float(distance))


def vertical_shift(shift) -> IsometrySpec:
    return IsometrySpec("vertical_shift", shift=float(shift))


def slice_reflection(level) -> IsometrySpec:
    return IsometrySpec("slice_reflection", level=float(level))


def sol_translation(a, b, c, signs=(1, 1)) -> IsometrySpec:
    return IsometrySpec("sol_translation", abc=(float(a), float(b), float(c)), signs=tuple(signs))


def sol_swap(a, b, c, signs=(1, 1)) -> IsometrySpec:
    return IsometrySpec("sol_swap", abc=(float(a), float(b), float(c)), signs=tuple(signs))


def _mobius_matrix(space, iso) -> np.ndarray:
    """2x2 complex matrix of the base Moebius action, for product spaces."""
    if iso.kind == "rotation":
        w0 = complex(iso.center[0], iso.center[1])
        conj_sign = -1.0 if space.kind == "h2xr" else 1.0
        # disk: w -> (w - w0)/(1 - conj(w0) w); sphere: w -> (w - w0)/(1 + conj(w0) w)
        C = np.array([[1.0, -w0], [conj_sign * np.conj(w0), 1.0]])
        E = np.array([[np.exp(1j * iso.angle), 0.0], [0.0, 1.0]])
        return np.linalg.inv(C) @ E @ C
    if space.kind != "h2xr":
        raise IllFormedIsometryError(f"{iso.kind} isometries require h2xr")
    if iso.kind == "parabolic":
        zeta = np.exp(1j * iso.ideal)
        Rm = np.array([[-1.0 / zeta, 0.0], [0.0, 1.0]])  # rotate zeta to -1
        C = np.array([[-1.0, 1.0], [1.0, 1.0]])  # (1 - w)/(1 + w): disk -> RHP, -1 -> inf
        S = np.array([[1.0, 1j * iso.mu], [0.0, 1.0]])
        return np.linalg.inv(Rm) @ np.linalg.inv(C) @ S @ C @ Rm
    if iso.kind == "hyperbolic":
        # map the disk to the upper half plane, the axis endpoints to (0, inf),
        # translate z -> e^d z, and pull everything back
        U = np.array([[1j, 1j], [-1.0, 1.0]])  # w -> i(w+1)/(1-w)
        rows = []
        for ang in iso.endpoints:
            zeta = np.exp(1j * ang)
            a_, b_ = U @ np.array([zeta, 1.0])  # projective image [a : b]
            rows.append((a_, b_))
        (a1, b1), (a2, b2) = rows
        V = np.array([[b1, -a1], [b2, -a2]])  # sends endpoint1 -> 0, endpoint2 -> inf
        d = iso.distance
        D = np.array([[np.exp(d / 2.0), 0.0], [0.0, np.exp(-d / 2.0)]])
        return np.linalg.inv(U) @ np.linalg.inv(V) @ D @ V @ U
    raise IllFormedIsometryError(f"unknown isometry kind {iso.kind!r}")


def _mobius_jet(M, w):
    """Value, first and second complex derivative of w -> (aw+b)/(cw+d)."""
    a, b = M[0]
    c, d = M[1]
    den = c * w + d
    det = a * d - b * c
    val = (a * w + b) / den
    d1 = det / den**2
    d2 = -2.0 * c * det / den**3
    return val, d1, d2


def isometry_jet(space: ModelGeometry, iso: IsometrySpec, p):
    """Image point, Jacobian J[k, i] = dq^k/dp^i and Hessian H[k, i, j].

    All supported isometries have closed-form jets: the base actions are
    Moebius (holomorphic) or affine, the fiber actions affine.
    """
    p = np.asarray(p, dtype=float)
    q = np.empty(3)
    J = np.zeros((3, 3))
    H = np.zeros((3, 3, 3))
    if iso.kind == "identity":
        return p.copy(), np.eye(3), H
    if iso.kind in ("rotation", "parabolic", "hyperbolic"):
        if space.kind not in ("s2xr", "h2xr"):
            raise IllFormedIsometryError(f"{iso.kind} isometries require a product space")
        M = _mobius_matrix(space, iso)
        w = complex(p[0], p[1])
        val, d1, d2 = _mobius_jet(M, w)
        q[:] = (val.real, val.imag, p[2])
        J[0, 0], J[0, 1] = d1.real, -d1.imag
        J[1, 0], J[1, 1] = d1.imag, d1.real
        J[2, 2] = 1.0
        # holomorphic f: f_xx = f'', f_xy = i f'', f_yy = -f''
        H[0, 0, 0], H[1, 0, 0] = d2.real, d2.imag
        H[0, 0, 1] = H[0, 1, 0] = -d2.imag
        H[1, 0, 1] = H[1, 1, 0] = d2.real
        H[0, 1, 1], H[1, 1, 1] = -d2.real, -d2.imag
        return q, J, H
    if iso.kind == "vertical_shift":
        if space.kind not in ("s2xr", "h2xr", "m3"):
            raise IllFormedIsometryError("vertical_shift requires a vertical direction")
        q[:] = (p[0], p[1], p[2] + iso.shift)
        return q, np.eye(3), H
    if iso.kind == "slice_reflection":
        if space.kind not in ("s2xr", "h2xr"):
            raise IllFormedIsometryError("slice_reflection requires a product space")
        q[:] = (p[0], p[1], 2.0 * iso.level - p[2])
        J[:] = np.diag([1.0, 1.0, -1.0])
        return q, J, H
    if iso.kind in ("sol_translation", "sol_swap"):
        if space.kind != "sol":
            raise IllFormedIsometryError(f"{iso.kind} requires sol")
        a, b, c = iso.abc
        s1, s2 = iso.signs
        if iso.kind == "sol_translation":
            q[:] = (s1 * np.exp(-c) * p[0] + a, s2 * np.exp(c) * p[1] + b, p[2] + c)
            J[0, 0] = s1 * np.exp(-c)
            J[1, 1] = s2 * np.exp(c)
            J[2, 2] = 1.0
        else:
            q[:] = (s1 * np.exp(-c) * p[1] + a, s2 * np.exp(c) * p[0] + b, -p[2] + c)
            J[0, 1] = s1 * np.exp(-c)
            J[1, 0] = s2 * np.exp(c)
            J[2, 2] = -1.0
        return q, J, H
    raise IllFormedIsometryError(f"unknown isometry kind {iso.kind!r}")


def apply_isometry(space: ModelGeometry, iso: IsometrySpec, p) -> np.ndarray:
    """Image of p under the isometry (broadcasts over leading axes)."""
    p = np.asarray(p, dtype=float)
    if p.ndim == 1:
        return isometry_jet(space, iso, p)[0]
    flat = p.reshape(-1, 3)
    out = np.stack([isometry_jet(space, iso, q)[0] for q in flat])
    return out.reshape(p.shape)


def pullback_residual(space: ModelGeometry, iso: IsometrySpec, p) -> float:
    """|J^T g(q) J - g(p)| at p; vanishes for genuine isometries."""
    q, J, _ = isometry_jet(space, iso, np.asarray(p, dtype=float))
    gq = metric_at(space, q)
    gp = metric_at(space, p)
    return float(np.max(np.abs(J.T @ gq @ J - gp)))

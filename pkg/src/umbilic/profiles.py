"""Generating curves of the rotational / translation-invariant surface families.

Plane profiles are arclength-parametrized curves s -> (rho(s), t(s)) in a
totally geodesic vertical plane, with tangent angle theta:

    rho' = cos(theta),  t' = sin(theta),

and the tangent angle driven by the family's shape equation:

    s2xr family (parameter a > 0):        theta' = a cos(rho)
    h2xr elliptic family (b > 0):         theta' = b cosh(rho)
    h2xr parabolic family:                theta' = sin(theta)
    h2xr hyperbolic family (0 < c < 1):   theta' = c sinh(rho)

Each system conserves a first integral (sin theta = a sin rho, b sinh rho,
c cosh rho respectively), so the square-root form rho' = sqrt(1 - a^2 sin^2
rho) is never evaluated and turning points need no branch switching.  Closed
forms replace the integrator where they exist (a = 1 and the parabolic
family).

The Sol family is a graph z(y) over the y-axis in the plane {x = 0},

    z'' + 3 z'^2 + 2 e^{-2z} = 0,   z'(0) = 0,  z(0) = (1/4) log a,

with first integral z'^2 = a e^{-6z} - e^{-2z}.  z falls to -infinity at a
finite half-width y_a; integration stops at z = Z_CLIP and y_a is completed
by a quadrature tail.

All curves are normalized to pass through the origin of their plane:
rho(0) = 0, t(0) = 0 (Sol: z'(0) = 0, y = 0 at the crest).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad, solve_ivp
from scipy.optimize import brentq

PROFILE_RTOL = 1e-10
PROFILE_ATOL = 1e-12
Z_CLIP = -30.0

_CHUNK = 20.0
_MAX_SPAN = 2000.0


class EventNotFoundError(RuntimeError):
    """The requested event is not bracketed by the curve's sample range."""


@dataclass(frozen=True)
class PeriodData:
    """Distinguished parameters of a profile: events and derived periods.

    ``s1``    smallest s > 0 with rho(s1) = pi (winding families).
    ``delta`` smallest s >= 0 with rho'(s) = 0 (bounded-height families).
    ``y_a``   half-width of the Sol graph domain (blow-down abscissa).
    """

    s1: float | None = None
    delta: float | None = None
    y_a: float | None = None


@dataclass
class GeneratingCurve:
    """Profile curve with dense evaluators and sampled columns.

    ``columns`` is ``("s", "rho", "t", "theta")`` for plane profiles and
    ``("y", "z")`` for the Sol graph.  ``jet`` evaluates the curve and its
    derivatives at arbitrary parameters inside ``span``.
    """

    kind: str
    param: float | None
    span: tuple
    columns: tuple
    samples: np.ndarray  # shape (n, len(columns))
    period_data: PeriodData | None
    _jet: callable = field(repr=False)
    _aux: dict | None = field(default=None, repr=False)

    @property
    def s(self):
        return self.samples[:, 0]

    def jet(self, s):
        """Dict of curve data at parameter values s (vectorized).

        Plane profiles: rho, t, theta, rho_s, t_s, theta_s, rho_ss, t_ss.
        Sol: z, z_y, z_yy.
        """
        s = np.asarray(s, dtype=float)
        lo, hi = self.span
        if np.any(s < lo - 1e-12) or np.any(s > hi + 1e-12):
            raise ValueError(f"parameter outside integrated span {self.span}")
        scalar = s.ndim == 0
        out = self._jet(np.atleast_1d(np.clip(s, lo, hi)))
        if scalar:
            out = {k: v[0] for k, v in out.items()}
        return out

    def evaluate(self, s):
        j = self.jet(s)
        if self.kind == "sol":
            return j["z"]
        return j["rho"], j["t"], j["theta"]


_SHAPE_RATE = {
    "s2xr": lambda rho, theta, p: p * np.cos(rho),
    "h2xr-elliptic": lambda rho, theta, p: p * np.cosh(rho),
    "h2xr-parabolic": lambda rho, theta, p: np.sin(theta),
    "h2xr-hyperbolic": lambda rho, theta, p: p * np.sinh(rho),
}

_SHAPE_RATE_DRHO = {
    "s2xr": lambda rho, theta, p: -p * np.sin(rho),
    "h2xr-elliptic": lambda rho, theta, p: p * np.sinh(rho),
    "h2xr-parabolic": lambda rho, theta, p: 0.0 * rho,
    "h2xr-hyperbolic": lambda rho, theta, p: p * np.cosh(rho),
}


def principal_curvature_normal_part(kind, rho, theta, param):
    """The orbit-direction principal curvature lambda_2 in closed form."""
    if kind == "s2xr":
        return np.sin(theta) / np.tan(rho)
    if kind == "h2xr-elliptic":
        return np.sin(theta) / np.tanh(rho)
    if kind == "h2xr-parabolic":
        return np.sin(theta)
    if kind == "h2xr-hyperbolic":
        return np.sin(theta) * np.tanh(rho)
    raise ValueError(kind)


def _integrate_plane(kind, param, theta0, want_event, span, rtol, atol):
    """Integrate the (rho, t, theta) system symmetrically around s = 0.

    ``want_event`` is None or a callable state -> scalar whose first positive
    root sizes the default span (the span then covers ~5 of those units).
    """

    def rhs(_, y):
        rho, t, theta = y
        return [np.cos(theta), np.sin(theta), _SHAPE_RATE[kind](rho, theta, param)]

    y0 = [0.0, 0.0, theta0]
    if span is not None:
        smax = 0.5 * (span[1] - span[0])
        legs = [_solve_leg(rhs, y0, smax, rtol, atol), _solve_leg(rhs, y0, -smax, rtol, atol)]
    else:
        # grow in chunks until the sizing event appears, then cover 5.5x it
        smax = _CHUNK
        while True:
            fwd = _solve_leg(rhs, y0, smax, rtol, atol)
            s_evt = _first_event(fwd, want_event) if want_event else None
            if want_event is None or s_evt is not None:
                break
            smax += _CHUNK
            if smax > _MAX_SPAN:
                raise RuntimeError(f"no sizing event within span {_MAX_SPAN}")
        if want_event is not None:
            smax = max(5.5 * s_evt, 10.0)
            fwd = _solve_leg(rhs, y0, smax, rtol, atol)
        legs = [fwd, _solve_leg(rhs, y0, -smax, rtol, atol)]
    fwd, bwd = legs

    def dense(s):
        s = np.asarray(s, dtype=float)
        out = np.empty((3,) + s.shape)
        pos = s >= 0
        if np.any(pos):
            out[:, pos] = fwd.sol(s[pos])
        if np.any(~pos):
            out[:, ~pos] = bwd.sol(s[~pos])
        return out

    return dense, smax


def _solve_leg(rhs, y0, s_end, rtol, atol):
    res = solve_ivp(
        rhs,
        (0.0, s_end),
        y0,
        method="DOP853",
        rtol=rtol,
        atol=atol,
        dense_output=True,
    )
    if not res.success:
        raise RuntimeError(f"profile integration failed: {res.message}")
    return res


def _first_event(leg, fn):
    ts = np.linspace(0.0, leg.t[-1], 2001)
    vals = fn(leg.sol(ts))
    sgn = np.sign(vals)
    flips = np.nonzero(sgn[1:] * sgn[:-1] < 0)[0]
    if flips.size == 0:
        return None
    i = flips[0]
    return brentq(lambda s: float(fn(leg.sol(s))), ts[i], ts[i + 1], xtol=1e-13)


def _plane_jet(kind, param, dense):
    def jet(s):
        rho, t, theta = dense(s)
        rate = _SHAPE_RATE[kind](rho, theta, param)
        drate = _SHAPE_RATE_DRHO[kind](rho, theta, param)
        cos_t, sin_t = np.cos(theta), np.sin(theta)
        if kind == "h2xr-parabolic":
            theta_ss = cos_t * rate  # d/ds sin(theta)
        else:
            theta_ss = drate * cos_t
        return {
            "rho": rho,
            "t": t,
            "theta": theta,
            "rho_s": cos_t,
            "t_s": sin_t,
            "theta_s": rate,
            "rho_ss": -sin_t * rate,
            "t_ss": cos_t * rate,
            "theta_ss": theta_ss,
        }

    return jet


def _closed_jet_s2xr_a1(s):
    s = np.asarray(s, dtype=float)
    # rho = theta = pi/2 - 2 arctan(e^{-s});  t = log cosh s
    rho = np.pi / 2.0 - 2.0 * np.arctan(np.exp(-s))
    sech = 1.0 / np.cosh(s)
    tanh = np.tanh(s)
    return {
        "rho": rho,
        "t": np.logaddexp(s, -s) - np.log(2.0),
        "theta": rho,
        "rho_s": sech,
        "t_s": tanh,
        "theta_s": sech,
        "rho_ss": -sech * tanh,
        "t_ss": sech**2,
        "theta_ss": -sech * tanh,
    }


def _closed_jet_parabolic(s):
    s = np.asarray(s, dtype=float)
    theta = 2.0 * np.arctan(np.exp(s))
    sech = 1.0 / np.cosh(s)
    tanh = np.tanh(s)
    return {
        "rho": -(np.logaddexp(s, -s) - np.log(2.0)),
        "t": theta - np.pi / 2.0,
        "theta": theta,
        "rho_s": -tanh,
        "t_s": sech,
        "theta_s": sech,
        "rho_ss": -(sech**2),
        "t_ss": -sech * tanh,
        "theta_ss": -sech * tanh,
    }


def _build_plane_curve(kind, param, theta0, want_event, s_span, method, n_samples, rtol, atol):
    closed = None
    if method != "ode":
        if kind == "s2xr" and param == 1.0:
            closed = _closed_jet_s2xr_a1
        elif kind == "h2xr-parabolic":
            closed = _closed_jet_parabolic
    if method == "closed" and closed is None:
        raise ValueError(f"no closed form for {kind} with parameter {param}")

    if closed is not None:
        smax = 0.5 * (s_span[1] - s_span[0]) if s_span is not None else 12.0
        jet = closed
    else:
        dense, smax = _integrate_plane(kind, param, theta0, want_event, s_span, rtol, atol)
        jet = _plane_jet(kind, param, dense)

    grid = np.linspace(-smax, smax, n_samples)
    j = jet(grid)
    samples = np.column_stack([grid, j["rho"], j["t"], j["theta"]])
    curve = GeneratingCurve(
        kind=kind,
        param=param,
        span=(-smax, smax),
        columns=("s", "rho", "t", "theta"),
        samples=samples,
        period_data=None,
        _jet=jet,
    )
    return curve


def s2xr_profile(a, s_span=None, method="auto", n_samples=2001,
                 rtol=PROFILE_RTOL, atol=PROFILE_ATOL) -> GeneratingCurve:
    """Profile of the rotational family in S^2 x R, parameter a > 0.

    a < 1 winds (rho increases by 2 pi per period 2 s1), a = 1 is the
    closed-form borderline profile, a > 1 oscillates with rho amplitude
    arcsin(1/a) (sphere-like surfaces).
    """
    a = float(a)
    if not a > 0:
        raise ValueError("a must be positive")
    if a < 1:
        want = lambda y: y[0] - np.pi  # rho reaches pi
    elif a > 1:
        want = lambda y: y[2] - np.pi / 2.0  # turning point
    else:
        want = None
    curve = _build_plane_curve("s2xr", a, 0.0, want, s_span, method, n_samples, rtol, atol)
    if a < 1:
        curve.period_data = PeriodData(s1=find_event(curve, "rho_hits", np.pi))
    elif a > 1:
        curve.period_data = PeriodData(delta=find_event(curve, "rho_prime_zero"))
    return curve


def h2xr_elliptic_profile(b, s_span=None, method="auto", n_samples=2001,
                          rtol=PROFILE_RTOL, atol=PROFILE_ATOL) -> GeneratingCurve:
    """Rotational (elliptic) family in H^2 x R, any b > 0; sphere-like."""
    b = float(b)
    if not b > 0:
        raise ValueError("b must be positive")
    want = lambda y: y[2] - np.pi / 2.0
    curve = _build_plane_curve("h2xr-elliptic", b, 0.0, want, s_span, method,
                               n_samples, rtol, atol)
    curve.period_data = PeriodData(delta=find_event(curve, "rho_prime_zero"))
    return curve


def h2xr_parabolic_profile(s_span=None, method="auto", n_samples=2001,
                           rtol=PROFILE_RTOL, atol=PROFILE_ATOL) -> GeneratingCurve:
    """Parabolic-invariant family in H^2 x R (no parameter; horocycle levels)."""
    curve = _build_plane_curve("h2xr-parabolic", None, np.pi / 2.0, None,
                               s_span, method, n_samples, rtol, atol)
    curve.period_data = PeriodData(delta=0.0)
    return curve


def h2xr_hyperbolic_profile(c, s_span=None, method="auto", n_samples=2001,
                            rtol=PROFILE_RTOL, atol=PROFILE_ATOL) -> GeneratingCurve:
    """Equidistant-invariant family in H^2 x R, parameter 0 < c < 1."""
    c = float(c)
    if not 0 < c < 1:
        raise ValueError("c must lie in (0,1)")
    want = lambda y: y[2] - np.pi / 2.0
    curve = _build_plane_curve("h2xr-hyperbolic", c, float(np.arcsin(c)), want,
                               s_span, method, n_samples, rtol, atol)
    curve.period_data = PeriodData(delta=find_event(curve, "rho_prime_zero"))
    return curve


def sol_profile(a, z_clip=Z_CLIP, n_samples=2001,
                rtol=PROFILE_RTOL, atol=PROFILE_ATOL) -> GeneratingCurve:
    """The translation-invariant Sol graph family, parameter a > 0.

    Crest height z(0) = (1/4) log a; z blows down to -infinity at |y| = y_a.
    Samples stop where z reaches ``z_clip``; ``period_data.y_a`` adds the
    quadrature tail below the clip.

    Past a switch depth 4 below the crest, |z'| grows like e^{-3z} and the
    whole remaining drop to the clip happens within one ulp of y_a, so the
    graph cannot be advanced (or evaluated) in y there.  The tail is instead
    integrated with z as the independent variable in (y, log|z'|) form; the
    ``jet`` evaluator spans the y-parametrized part only, while ``samples``
    and blow-down events cover the full clipped window.
    """
    a = float(a)
    if not a > 0:
        raise ValueError("a must be positive")
    z0 = 0.25 * np.log(a)
    z_switch = max(z0 - 4.0, z_clip)

    def rhs(_, y):
        z, w = y
        return [w, -3.0 * w**2 - 2.0 * np.exp(-2.0 * z)]

    def switch_event(_, y):
        return y[0] - z_switch

    switch_event.terminal = True
    switch_event.direction = -1

    legs = []
    for sign in (1.0, -1.0):
        res = solve_ivp(
            rhs,
            (0.0, sign * 1e6),
            [z0, 0.0],
            method="DOP853",
            rtol=rtol,
            atol=atol,
            dense_output=True,
            events=switch_event,
        )
        if res.status != 1:
            raise RuntimeError("sol profile never reached the switch depth")
        legs.append(res)
    fwd, bwd = legs
    y_switch = float(fwd.t_events[0][0])
    z_sw, w_sw = fwd.y_events[0][0]

    if z_switch > z_clip:
        # descend in z: y' = -e^{-L}, L' = -3 - 2 e^{-2z} e^{-2L}, L = log(-z')
        deep = solve_ivp(
            lambda z, s: [-np.exp(-s[1]), -3.0 - 2.0 * np.exp(-2.0 * z - 2.0 * s[1])],
            (z_sw, z_clip),
            [y_switch, np.log(-w_sw)],
            method="DOP853",
            rtol=rtol,
            atol=atol,
            dense_output=True,
        )
        if not deep.success:
            raise RuntimeError("sol tail integration failed")
        y_of_z = lambda z: deep.sol(z)[0]
        y_clip = float(y_of_z(z_clip))
    else:
        y_of_z = lambda z: np.full_like(np.asarray(z, dtype=float), y_switch)
        y_clip = y_switch

    # tail below the clip: dy = dz / |z'|, z' = -e^{-z} sqrt(a e^{-4z} - 1);
    # substituting u = e^z turns it into int_0^{e^{z_clip}} u^2/sqrt(a - u^4) du
    u_clip = np.exp(z_clip)
    tail = quad(lambda u: u**2 / np.sqrt(a - u**4), 0.0, u_clip)[0]
    y_a = y_clip + tail

    def jet(y):
        out = np.empty((2,) + y.shape)
        pos = y >= 0
        if np.any(pos):
            out[:, pos] = fwd.sol(y[pos])
        if np.any(~pos):
            out[:, ~pos] = bwd.sol(y[~pos])
        z, w = out
        return {"z": z, "z_y": w, "z_yy": -3.0 * w**2 - 2.0 * np.exp(-2.0 * z)}

    n_deep = max(n_samples // 8, 16) if z_switch > z_clip else 0
    grid = np.linspace(-y_switch, y_switch, n_samples - 2 * n_deep)
    body = np.column_stack([grid, jet(grid)["z"]])
    if n_deep:
        z_deep = np.linspace(z_switch, z_clip, n_deep + 1)[1:]
        y_deep = np.asarray(y_of_z(z_deep), dtype=float)
        right = np.column_stack([y_deep, z_deep])
        left = np.column_stack([-y_deep[::-1], z_deep[::-1]])
        samples = np.vstack([left, body, right])
    else:
        samples = body
    return GeneratingCurve(
        kind="sol",
        param=a,
        span=(-y_switch, y_switch),
        columns=("y", "z"),
        samples=samples,
        period_data=PeriodData(y_a=y_a),
        _jet=jet,
        _aux={"y_of_z": y_of_z, "z_switch": z_switch, "z_clip": z_clip,
              "y_clip": y_clip},
    )


# ---------------------------------------------------------------------------
# event location

_EVENTS = ("rho_prime_zero", "rho_hits", "blow_down")


def find_event(curve: GeneratingCurve, kind: str, value=None, tol=1e-13) -> float:
    """Parameter of the event nearest 0 (ties resolved to s >= 0).

    ``rho_prime_zero``: rho'(s) = 0 (Sol: z'(y) = 0).
    ``rho_hits``: rho(s) = value.
    ``blow_down``: z(y) = value (default Z_CLIP; Sol graphs only).

    Raises :class:`EventNotFoundError` when no sign change is bracketed.
    """
    if kind not in _EVENTS:
        raise ValueError(f"unknown event kind {kind!r}")
    if kind == "rho_hits" and value is None:
        raise ValueError("rho_hits requires a value")

    if curve.kind == "sol":
        if kind == "rho_hits":
            raise ValueError("rho_hits applies to plane profiles")
        if kind == "blow_down":
            aux = curve._aux
            target = aux["z_clip"] if value is None else float(value)
            if target < aux["z_clip"]:
                raise EventNotFoundError(
                    f"blow-down level {target} is below the clip {aux['z_clip']}"
                )
            if target < aux["z_switch"]:
                # below the switch the graph is vertical to machine precision
                # in y; the z-parametrized tail solve IS the refined root
                return float(aux["y_of_z"](target))
            fn = lambda s: curve.jet(s)["z"] - target
        else:
            fn = lambda s: curve.jet(s)["z_y"]
    elif kind == "blow_down":
        raise ValueError("blow_down applies to Sol graphs")
    elif kind == "rho_prime_zero":
        fn = lambda s: curve.jet(s)["rho_s"]
    else:
        fn = lambda s: curve.jet(s)["rho"] - float(value)

    grid = curve.s
    lo, hi = curve.span
    grid = grid[(grid >= lo) & (grid <= hi)]
    vals = np.asarray(fn(grid))
    roots = []
    exact = np.nonzero(vals == 0.0)[0]
    roots.extend(float(grid[i]) for i in exact)
    sgn = np.sign(vals)
    flips = np.nonzero((sgn[1:] * sgn[:-1] < 0))[0]
    for i in flips:
        roots.append(brentq(lambda s: float(fn(s)), grid[i], grid[i + 1], xtol=tol))
    if not roots:
        raise EventNotFoundError(f"event {kind!r} not bracketed on span {curve.span}")
    roots.sort(key=lambda r: (abs(r), -np.sign(r)))
    return float(roots[0])

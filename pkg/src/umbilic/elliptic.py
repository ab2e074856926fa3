"""Complete elliptic integrals and Jacobi elliptic functions.

Everything uses the *parameter* convention: ``m`` is the square of the
modulus, so K(m) = int_0^{pi/2} (1 - m sin^2 t)^{-1/2} dt.

K is computed by arithmetic-geometric mean iteration.  The amplitude
``am(u, m)`` and the functions sn = sin(am), cn = cos(am) come from the
descending Landen (Gauss) transformation: with the AGM scales a_n and
c_n = (a_{n-1} - b_{n-1})/2, set phi_N = 2^N a_N u and recurse

    phi_{n-1} = ( phi_n + arcsin( (c_n / a_n) sin phi_n ) ) / 2,

then am = phi_0.  Arguments are first reduced by the quasi-period
(am(u + 2K) = am(u) + pi), so the recursion only ever sees |u| <= K.

Parameter ranges outside [0, 1) are reduced to it by the standard
transformations: the imaginary-modulus identity for m < 0 and the
reciprocal-modulus identity for m > 1 (where the amplitude oscillates
instead of winding).  For |m| > ODE_FALLBACK_PARAMETER the Landen scales
degrade and the functions are instead integrated from the defining system
sn' = cn dn, cn' = -sn dn, dn' = -m sn cn, am' = dn.
"""

from __future__ import annotations

import numpy as np
from scipy.integrate import solve_ivp

# two ulps: the AGM stagnates at machine epsilon, so demand no more
AGM_TOL = 4.5e-16
ODE_FALLBACK_PARAMETER = 1e3
_ODE_RTOL = 1e-12
_ODE_ATOL = 1e-14


def elliptic_K(m: float) -> float:
    """Complete elliptic integral of the first kind, parameter m < 1."""
    m = float(m)
    if m >= 1.0:
        raise ValueError("elliptic_K requires parameter m < 1")
    a, b = 1.0, np.sqrt(1.0 - m)
    for _ in range(64):
        if abs(a - b) <= AGM_TOL * a:
            break
        a, b = 0.5 * (a + b), np.sqrt(a * b)
    return float(np.pi / (2.0 * a))


def _agm_scales(m):
    """AGM ladder (a_n, c_n) for parameter m in [0, 1)."""
    a, b = 1.0, np.sqrt(1.0 - m)
    ladder = []
    # c_0 = sqrt(m) is not used by the phase recursion, which starts at n = 1
    while True:
        a1, b1, c1 = 0.5 * (a + b), np.sqrt(a * b), 0.5 * (a - b)
        ladder.append((a1, c1))
        a, b = a1, b1
        if abs(c1) <= AGM_TOL * a1:
            break
        if len(ladder) > 64:  # pragma: no cover
            raise RuntimeError("AGM ladder failed to converge")
    return ladder


def _am_core(u, m):
    """Amplitude for m in [0, 1), |u| <= K(m): descending Landen recursion."""
    u = np.asarray(u, dtype=float)
    if m == 0.0:
        return u.copy()
    ladder = _agm_scales(m)
    n = len(ladder)
    phi = (2.0**n) * ladder[-1][0] * u
    for a_k, c_k in reversed(ladder):
        phi = 0.5 * (phi + np.arcsin(np.clip(c_k / a_k * np.sin(phi), -1.0, 1.0)))
    return phi


def _reduce(u, K):
    """u = 2nK + w with |w| <= K; returns (n, w)."""
    n = np.round(u / (2.0 * K))
    return n, u - 2.0 * n * K


def _jacobi_ode(u, m):
    """Direct integration of the defining system; valid for any m."""
    u = np.atleast_1d(np.asarray(u, dtype=float))
    order = np.argsort(u)
    out = np.empty((u.size, 4))

    def rhs(_, y):
        s, c, d, _a = y
        return [c * d, -s * d, -m * s * c, d]

    for sign in (1.0, -1.0):
        sel = order[u[order] * sign >= 0.0] if sign > 0 else order[u[order] < 0.0]
        if sel.size == 0:
            continue
        targets = u[sel]
        span = sign * max(abs(targets.min()), abs(targets.max()), 1e-12)
        res = solve_ivp(
            rhs,
            (0.0, span),
            [0.0, 1.0, 1.0, 0.0],
            method="DOP853",
            rtol=_ODE_RTOL,
            atol=_ODE_ATOL,
            dense_output=True,
        )
        out[sel] = res.sol(targets).T
    return out  # columns sn, cn, dn, am


def _snam(u, m):
    """(sn, am) for any real u and m < 1 or m > 1, via reductions."""
    u = np.asarray(u, dtype=float)
    if abs(m) > ODE_FALLBACK_PARAMETER:
        vals = _jacobi_ode(u, m)
        return vals[:, 0].reshape(u.shape), vals[:, 3].reshape(u.shape)
    if m == 1.0:
        return np.tanh(u), 2.0 * np.arctan(np.exp(u)) - np.pi / 2.0
    if m > 1.0:
        # reciprocal modulus: the amplitude oscillates, |sn| <= 1/sqrt(m)
        rm = np.sqrt(m)
        sn_r, _ = _snam(u * rm, 1.0 / m)
        sn = sn_r / rm
        return sn, np.arcsin(sn)
    if m < 0.0:
        mu = -m
        mu1 = mu / (1.0 + mu)
        v = u * np.sqrt(1.0 + mu)
        sn_v, am_v = _snam(v, mu1)
        dn_v = np.sqrt(1.0 - mu1 * sn_v**2)
        sn = sn_v / (np.sqrt(1.0 + mu) * dn_v)
        K = elliptic_K(m)
        n, w = _reduce(u, K)
        w_v = w * np.sqrt(1.0 + mu)
        sn_w, _ = _snam(w_v, mu1)
        dn_w = np.sqrt(1.0 - mu1 * sn_w**2)
        am = n * np.pi + np.arcsin(
            np.clip(sn_w / (np.sqrt(1.0 + mu) * dn_w), -1.0, 1.0)
        )
        return sn, am
    # m in (0, 1)
    K = elliptic_K(m)
    n, w = _reduce(u, K)
    phi = _am_core(w, m)
    am = n * np.pi + phi
    return np.sin(am), am


def jacobi_am(u, m: float):
    """Jacobi amplitude am(u, m), real u, any real parameter m.

    Satisfies am' = sqrt(1 - m sin^2 am) with am(0) = 0; for m < 1 it winds
    (am(u + 2K) = am(u) + pi), for m > 1 it oscillates with amplitude
    arcsin(1/sqrt(m)).
    """
    u = np.asarray(u, dtype=float)
    _, am = _snam(u, float(m))
    return am if u.ndim else float(am)


def jacobi_sn(u, m: float):
    u = np.asarray(u, dtype=float)
    sn, _ = _snam(u, float(m))
    return sn if u.ndim else float(sn)


def jacobi_cn(u, m: float):
    u = np.asarray(u, dtype=float)
    sn, am = _snam(u, float(m))
    cn = np.cos(am)
    # cos(am) and the identity branch agree for every reduction used here;
    # trust the amplitude, which carries the winding.
    return cn if u.ndim else float(cn)


def jacobi_dn(u, m: float):
    u = np.asarray(u, dtype=float)
    sn, _ = _snam(u, float(m))
    dn = np.sqrt(np.maximum(1.0 - float(m) * sn**2, 0.0))
    return dn if u.ndim else float(dn)

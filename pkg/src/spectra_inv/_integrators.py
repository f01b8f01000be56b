"""Compiled fixed-step Dormand-Prince 5(4) integrators for the three ODE
flows the package needs:

* the polar-phase equation  theta' = cos^2(theta) + (lam - q) sin^2(theta),
* the linear system         u'' = (q - lam) u,
* the cubic system          u'' = (q - lam) u - delta u^3  (with blow-up cap).

Steps are aligned with the sampling grid (``nsub`` substeps per panel), so
trajectory values land exactly on grid nodes, every call uses the identical
step sequence (discretization bias cancels in finite-difference cross
checks), and panel-wise potential representations are never straddled by a
step.  Only the fifth-order propagation of the embedded pair is used; with
four substeps per panel on the default n = 2000 grid the phase error is
~1e-11 for eigenvalues up to ~100, far below every tolerance downstream.

Potentials enter as per-panel cubic coefficient arrays (see
``core.Potential.panel_coeffs``).  At an exact panel boundary the left
panel's polynomial is used, so step potentials are treated as
left-continuous at their jumps.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit

#: substeps per grid panel used by all solvers unless overridden
DEFAULT_SUBSTEPS = 4

#: |u| beyond this is treated as blow-up of the cubic flow
BLOWUP_CAP = 1.0e6

# Dormand-Prince 5(4) tableau (propagation weights only; b7 = 0)
_C2, _C3, _C4, _C5 = 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0
_A21 = 1.0 / 5.0
_A31, _A32 = 3.0 / 40.0, 9.0 / 40.0
_A41, _A42, _A43 = 44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0
_A51, _A52, _A53, _A54 = (
    19372.0 / 6561.0,
    -25360.0 / 2187.0,
    64448.0 / 6561.0,
    -212.0 / 729.0,
)
_A61, _A62, _A63, _A64, _A65 = (
    9017.0 / 3168.0,
    -355.0 / 33.0,
    46732.0 / 5247.0,
    49.0 / 176.0,
    -5103.0 / 18656.0,
)
_B1, _B3, _B4, _B5, _B6 = (
    35.0 / 384.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
)


@njit(cache=True)
def _qval(c0, c1, c2, c3, hpanel, x):
    """Per-panel cubic evaluation, left-continuous at panel boundaries."""
    npan = c0.shape[0]
    idx = int(x / hpanel)
    if idx >= npan:
        idx = npan - 1
    if idx > 0 and x <= idx * hpanel:
        idx -= 1
    t = x - idx * hpanel
    return c0[idx] + t * (c1[idx] + t * (c2[idx] + t * c3[idx]))


@njit(cache=True)
def _phase_rhs(c0, c1, c2, c3, hpanel, lam, x, th):
    q = _qval(c0, c1, c2, c3, hpanel, x)
    s = math.sin(th)
    c = math.cos(th)
    return c * c + (lam - q) * s * s


@njit(cache=True)
def phase_terminal(c0, c1, c2, c3, hpanel, nsub, lam, theta0):
    """Integrate the phase equation from 0 to pi; return theta(pi).

    The phase is kept continuous (no mod-pi wrapping), so multiples of pi
    crossed en route count interior zeros of the underlying solution.
    """
    npan = c0.shape[0]
    h = hpanel / nsub
    total = npan * nsub
    th = theta0
    for m in range(total):
        x0 = m * h
        k1 = _phase_rhs(c0, c1, c2, c3, hpanel, lam, x0, th)
        k2 = _phase_rhs(c0, c1, c2, c3, hpanel, lam, x0 + _C2 * h, th + h * (_A21 * k1))
        k3 = _phase_rhs(
            c0, c1, c2, c3, hpanel, lam, x0 + _C3 * h, th + h * (_A31 * k1 + _A32 * k2)
        )
        k4 = _phase_rhs(
            c0,
            c1,
            c2,
            c3,
            hpanel,
            lam,
            x0 + _C4 * h,
            th + h * (_A41 * k1 + _A42 * k2 + _A43 * k3),
        )
        k5 = _phase_rhs(
            c0,
            c1,
            c2,
            c3,
            hpanel,
            lam,
            x0 + _C5 * h,
            th + h * (_A51 * k1 + _A52 * k2 + _A53 * k3 + _A54 * k4),
        )
        k6 = _phase_rhs(
            c0,
            c1,
            c2,
            c3,
            hpanel,
            lam,
            x0 + h,
            th + h * (_A61 * k1 + _A62 * k2 + _A63 * k3 + _A64 * k4 + _A65 * k5),
        )
        th = th + h * (_B1 * k1 + _B3 * k3 + _B4 * k4 + _B5 * k5 + _B6 * k6)
    return th


@njit(cache=True)
def linear_traj(c0, c1, c2, c3, hpanel, nsub, lam, u0, v0):
    """Integrate u'' = (q - lam) u from the ray (u0, v0).

    Returns (u, v) sampled at substep resolution (npan * nsub + 1 points);
    grid-node values are every ``nsub``-th entry.
    """
    npan = c0.shape[0]
    h = hpanel / nsub
    total = npan * nsub
    u_out = np.empty(total + 1)
    v_out = np.empty(total + 1)
    u = u0
    v = v0
    u_out[0] = u
    v_out[0] = v
    for m in range(total):
        x0 = m * h

        q = _qval(c0, c1, c2, c3, hpanel, x0)
        k1u = v
        k1v = (q - lam) * u

        q = _qval(c0, c1, c2, c3, hpanel, x0 + _C2 * h)
        au = u + h * (_A21 * k1u)
        av = v + h * (_A21 * k1v)
        k2u = av
        k2v = (q - lam) * au

        q = _qval(c0, c1, c2, c3, hpanel, x0 + _C3 * h)
        au = u + h * (_A31 * k1u + _A32 * k2u)
        av = v + h * (_A31 * k1v + _A32 * k2v)
        k3u = av
        k3v = (q - lam) * au

        q = _qval(c0, c1, c2, c3, hpanel, x0 + _C4 * h)
        au = u + h * (_A41 * k1u + _A42 * k2u + _A43 * k3u)
        av = v + h * (_A41 * k1v + _A42 * k2v + _A43 * k3v)
        k4u = av
        k4v = (q - lam) * au

        q = _qval(c0, c1, c2, c3, hpanel, x0 + _C5 * h)
        au = u + h * (_A51 * k1u + _A52 * k2u + _A53 * k3u + _A54 * k4u)
        av = v + h * (_A51 * k1v + _A52 * k2v + _A53 * k3v + _A54 * k4v)
        k5u = av
        k5v = (q - lam) * au

        q = _qval(c0, c1, c2, c3, hpanel, x0 + h)
        au = u + h * (_A61 * k1u + _A62 * k2u + _A63 * k3u + _A64 * k4u + _A65 * k5u)
        av = v + h * (_A61 * k1v + _A62 * k2v + _A63 * k3v + _A64 * k4v + _A65 * k5v)
        k6u = av
        k6v = (q - lam) * au

        u = u + h * (_B1 * k1u + _B3 * k3u + _B4 * k4u + _B5 * k5u + _B6 * k6u)
        v = v + h * (_B1 * k1v + _B3 * k3v + _B4 * k4v + _B5 * k5v + _B6 * k6v)
        u_out[m + 1] = u
        v_out[m + 1] = v
    return u_out, v_out


@njit(cache=True)
def cubic_traj(c0, c1, c2, c3, hpanel, nsub, lam, delta, u0, v0, cap):
    """Integrate u'' = (q - lam) u - delta u^3 with blow-up detection.

    Returns (u, v, blow_idx, blow_sign): substep-resolution samples, the
    substep index at which |u| first exceeded ``cap`` (or -1), and the sign
    of the divergence.  Samples past the blow-up are NaN.
    """
    npan = c0.shape[0]
    h = hpanel / nsub
    total = npan * nsub
    u_out = np.full(total + 1, np.nan)
    v_out = np.full(total + 1, np.nan)
    u = u0
    v = v0
    u_out[0] = u
    v_out[0] = v
    blow_idx = -1
    blow_sign = 0
    vcap = cap * cap  # generous cap on |u'|; the cubic flow diverges in both
    for m in range(total):
        x0 = m * h

        q = _qval(c0, c1, c2, c3, hpanel, x0)
        k1u = v
        k1v = (q - lam) * u - delta * u * u * u

        q = _qval(c0, c1, c2, c3, hpanel, x0 + _C2 * h)
        au = u + h * (_A21 * k1u)
        av = v + h * (_A21 * k1v)
        if not (abs(au) <= cap and abs(av) <= vcap):
            blow_idx = m
            break
        k2u = av
        k2v = (q - lam) * au - delta * au * au * au

        q = _qval(c0, c1, c2, c3, hpanel, x0 + _C3 * h)
        au = u + h * (_A31 * k1u + _A32 * k2u)
        av = v + h * (_A31 * k1v + _A32 * k2v)
        if not (abs(au) <= cap and abs(av) <= vcap):
            blow_idx = m
            break
        k3u = av
        k3v = (q - lam) * au - delta * au * au * au

        q = _qval(c0, c1, c2, c3, hpanel, x0 + _C4 * h)
        au = u + h * (_A41 * k1u + _A42 * k2u + _A43 * k3u)
        av = v + h * (_A41 * k1v + _A42 * k2v + _A43 * k3v)
        if not (abs(au) <= cap and abs(av) <= vcap):
            blow_idx = m
            break
        k4u = av
        k4v = (q - lam) * au - delta * au * au * au

        q = _qval(c0, c1, c2, c3, hpanel, x0 + _C5 * h)
        au = u + h * (_A51 * k1u + _A52 * k2u + _A53 * k3u + _A54 * k4u)
        av = v + h * (_A51 * k1v + _A52 * k2v + _A53 * k3v + _A54 * k4v)
        if not (abs(au) <= cap and abs(av) <= vcap):
            blow_idx = m
            break
        k5u = av
        k5v = (q - lam) * au - delta * au * au * au

        q = _qval(c0, c1, c2, c3, hpanel, x0 + h)
        au = u + h * (_A61 * k1u + _A62 * k2u + _A63 * k3u + _A64 * k4u + _A65 * k5u)
        av = v + h * (_A61 * k1v + _A62 * k2v + _A63 * k3v + _A64 * k4v + _A65 * k5v)
        if not (abs(au) <= cap and abs(av) <= vcap):
            blow_idx = m
            break
        k6u = av
        k6v = (q - lam) * au - delta * au * au * au

        u = u + h * (_B1 * k1u + _B3 * k3u + _B4 * k4u + _B5 * k5u + _B6 * k6u)
        v = v + h * (_B1 * k1v + _B3 * k3v + _B4 * k4v + _B5 * k5v + _B6 * k6v)
        if not (math.isfinite(u) and math.isfinite(v) and abs(u) <= cap):
            blow_idx = m
            break
        u_out[m + 1] = u
        v_out[m + 1] = v
    if blow_idx >= 0:
        # divergence sign from the last valid state (a one-step look-ahead),
        # never from extrapolated stage values, which can carry either sign
        ub = u_out[blow_idx]
        vb = v_out[blow_idx]
        drift = ub + h * vb
        if drift > 0.0:
            blow_sign = 1
        elif drift < 0.0:
            blow_sign = -1
        else:
            blow_sign = 1 if vb >= 0.0 else -1
    return u_out, v_out, blow_idx, blow_sign


# ---------------------------------------------------------------------------
# thin python wrappers taking a core.Potential
# ---------------------------------------------------------------------------


def phase_end(pot, lam: float, theta0: float, nsub: int = DEFAULT_SUBSTEPS) -> float:
    c0, c1, c2, c3 = pot.panel_coeffs
    return float(
        phase_terminal(c0, c1, c2, c3, pot.grid.h, nsub, float(lam), float(theta0))
    )


def linear_shot(pot, lam: float, ray: tuple[float, float], nsub: int = DEFAULT_SUBSTEPS):
    c0, c1, c2, c3 = pot.panel_coeffs
    return linear_traj(
        c0, c1, c2, c3, pot.grid.h, nsub, float(lam), float(ray[0]), float(ray[1])
    )


def cubic_shot(
    pot,
    lam: float,
    delta: int,
    init: tuple[float, float],
    nsub: int = DEFAULT_SUBSTEPS,
    cap: float = BLOWUP_CAP,
):
    c0, c1, c2, c3 = pot.panel_coeffs
    return cubic_traj(
        c0,
        c1,
        c2,
        c3,
        pot.grid.h,
        nsub,
        float(lam),
        float(delta),
        float(init[0]),
        float(init[1]),
        float(cap),
    )

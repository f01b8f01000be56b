"""Inverse eigenvalue placement: given a reference potential q0, an index k
and a target value, find the potential closest to q0 (least-squares in L2)
whose k-th eigenvalue equals the target.

Two independent routes are provided and cross-checked:

* :func:`solve_explicit` reconstructs the minimizer in closed form from a
  solution of the cubic boundary value problem: with u the solution of
  -u'' + q0 u = lam u + delta u^3 carrying exactly k - 1 interior zeros
  (delta = +1 when the target sits below the k-th eigenvalue of q0, -1
  above), the minimizer is q0 - delta u^2 and u is, up to scale, the k-th
  eigenfunction of the reconstructed potential.

* :func:`solve_direct` ignores that structure and minimizes the distance
  functional under the scalar eigenvalue constraint by an augmented
  Lagrangian with gradient descent inner iterations, using the analytic
  constraint gradient phi_k(q)^2 (the derivative density of lam_k).

At a constrained minimizer the Lagrange condition forces q0 - q_hat to be
collinear with phi_k(q_hat)^2; :func:`optimality_residual` measures that
collinearity and certifies either route's output.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .core import (
    GridFunction,
    Potential,
    as_angle,
    l2_norm,
    simpson_weights,
    save_csv,
)
from .eigen import BracketingError, ConvergenceError, eigenfunction, eigenvalue
from .nonlinear import NonlinearSolution, NotFound, count_sign_changes, find_solution

#: below this |target - lam_k(q0)| the problem is trivial: q_hat = q0
TRIVIAL_TOL = 1e-10


class ReconstructionError(RuntimeError):
    """The cubic-BVP search underlying the explicit route came up empty.

    This would falsify the existence statement the explicit construction
    rests on, so it is raised loudly instead of returned as a value.
    """


@dataclass(frozen=True)
class OptimizerOptions:
    """Knobs of the direct (augmented Lagrangian) route."""

    penalty_init: float = 10.0
    penalty_growth: float = 10.0
    max_outer: int = 8
    grad_tol: float = 1e-6
    step_rule: str = "backtracking"
    inner_max: int = 60
    constraint_tol: float = 1e-8

    def __post_init__(self):
        if self.penalty_init <= 0:
            raise ValueError("penalty_init must be positive")
        if self.penalty_growth <= 1:
            raise ValueError("penalty_growth must exceed 1")
        if self.step_rule not in ("fixed", "backtracking"):
            raise ValueError(f"unknown step_rule {self.step_rule!r}")


@dataclass(frozen=True)
class InverseResult:
    """Solution of the placement problem for one (k, target) pair.

    ``distance`` is the squared L2 distance to the reference potential,
    ``delta`` the branch sign (0 for the trivial case), ``nu`` the Lagrange
    multiplier (delta times the squared L2 norm of u_hat), and
    ``diagnostics`` a map of named residuals, always including
    ``feasibility`` = |lam_k(q_hat) - target| re-measured by the forward
    solver.
    """

    q_hat: Potential
    k: int
    lambda_star: float
    distance: float
    delta: int
    nu: float
    u_hat: GridFunction | None
    route: str
    diagnostics: dict

    def summary(self) -> dict:
        return {
            "k": self.k,
            "lambda_star": self.lambda_star,
            "delta": self.delta,
            "nu": self.nu,
            "distance": self.distance,
            "route": self.route,
            "diagnostics": dict(self.diagnostics),
        }


# ---------------------------------------------------------------------------
# explicit route
# ---------------------------------------------------------------------------


def solve_explicit(q0: Potential, k: int, lambda_star: float, alpha=0.0) -> InverseResult:
    """Closed-form minimizer via the cubic boundary value problem.

    Any real target is admissible.  On the trivial branch (target equal to
    lam_k(q0) within 1e-10) the reference potential itself is returned with
    delta = nu = 0.
    """
    ang = as_angle(alpha)
    lam0 = eigenvalue(q0, k, ang)
    if abs(lambda_star - lam0) <= TRIVIAL_TOL:
        return InverseResult(
            q_hat=q0,
            k=k,
            lambda_star=float(lambda_star),
            distance=0.0,
            delta=0,
            nu=0.0,
            u_hat=None,
            route="explicit",
            diagnostics={"lambda_k_q0": lam0, "feasibility": abs(lambda_star - lam0)},
        )
    delta = 1 if lambda_star < lam0 else -1
    sol = find_solution(q0, lambda_star, delta, k, ang)
    if isinstance(sol, NotFound):
        raise ReconstructionError(
            f"no {k - 1}-node solution of the cubic problem at lam={lambda_star!r}, "
            f"delta={delta:+d} (scanned s in [{sol.s_min:g}, {sol.s_max:g}]); "
            "the explicit construction has no witness"
        )
    u = sol.u
    q_hat = Potential(
        GridFunction(q0.grid, q0.values - delta * u.values**2),
        label=f"{q0.label}{'-' if delta > 0 else '+'}u^2",
    )
    nu = delta * l2_norm(u) ** 2
    lam_check = eigenvalue(q_hat, k, ang, lam_hint=lambda_star, hint_radius=0.25)
    diff = GridFunction(q0.grid, q0.values - q_hat.values)
    return InverseResult(
        q_hat=q_hat,
        k=k,
        lambda_star=float(lambda_star),
        distance=l2_norm(diff) ** 2,
        delta=delta,
        nu=nu,
        u_hat=u,
        route="explicit",
        diagnostics={
            "lambda_k_q0": lam0,
            "feasibility": abs(lam_check - lambda_star),
            "bc_residual": sol.residual,
            "shoot_param": sol.shoot_param,
        },
    )


# ---------------------------------------------------------------------------
# direct route: augmented Lagrangian over the sampled potential
# ---------------------------------------------------------------------------


class _Forward:
    """Eigenpair evaluations with first-order warm starts and call counting."""

    def __init__(self, grid, k, ang):
        self.grid = grid
        self.k = k
        self.ang = ang
        self.hint = None
        self.radius = 0.5
        self.calls = 0

    def lam(self, qv: np.ndarray) -> float:
        self.calls += 1
        p = Potential(GridFunction(self.grid, qv), "iterate")
        val = eigenvalue(p, self.k, self.ang, lam_hint=self.hint, hint_radius=self.radius)
        self.hint, self.radius = val, 0.25
        return val

    def pair(self, qv: np.ndarray):
        self.calls += 1
        p = Potential(GridFunction(self.grid, qv), "iterate")
        ep = eigenfunction(p, self.k, self.ang, lam_hint=self.hint)
        self.hint, self.radius = ep.lam, 0.25
        return ep.lam, ep.phi.values


def solve_direct(
    q0: Potential,
    k: int,
    lambda_star: float,
    alpha=0.0,
    opts: OptimizerOptions | None = None,
) -> InverseResult:
    """Constrained least-squares placement without the closed form.

    Minimizes the squared L2 distance to q0 over grid-sampled potentials
    subject to lam_k(q) = target, via an augmented Lagrangian: gradient
    descent (Barzilai-Borwein step, Armijo backtracking) on the penalized
    functional, a least-squares multiplier update, and a scalar Newton
    restoration onto the constraint manifold after every outer iteration.
    The constraint gradient is the analytic derivative density phi_k(q)^2;
    eigenpairs are recomputed exactly at every evaluation point.

    Non-convergence within ``max_outer`` outer iterations returns the best
    iterate with ``diagnostics['converged'] = False`` rather than raising.
    """
    opts = opts or OptimizerOptions()
    ang = as_angle(alpha)
    grid = q0.grid
    w_quad = simpson_weights(grid)
    q0v = q0.values
    lam_star = float(lambda_star)

    fwd = _Forward(grid, k, ang)

    def inner_l2(a, b) -> float:
        return float(np.dot(w_quad, a * b))

    def dist2(qv) -> float:
        d = qv - q0v
        return inner_l2(d, d)

    def restore(qv, lam, phi):
        """Scalar Newton steps along phi^2 onto the constraint manifold."""
        for _ in range(10):
            c = lam - lam_star
            if abs(c) <= 1e-11:
                break
            w = phi * phi
            slope = inner_l2(w, w)
            qv = qv + ((lam_star - lam) / slope) * w
            lam, phi = fwd.pair(qv)
        return qv, lam, phi

    lam, phi = fwd.pair(q0v)
    diagnostics: dict = {"lambda_k_q0": lam}
    qv = q0v.copy()

    trivial = abs(lam_star - lam) <= TRIVIAL_TOL
    mu = 0.0
    rho = opts.penalty_init
    outer_used = 0
    inner_used = 0
    converged = False
    kkt = math.inf

    if trivial:
        converged = True
        kkt = 0.0
    else:
        qv, lam, phi = restore(qv, lam, phi)
        w = phi * phi
        gF = 2.0 * (qv - q0v)
        mu = -inner_l2(gF, w) / inner_l2(w, w)
        kkt_prev = math.inf
        for outer in range(1, opts.max_outer + 1):
            outer_used = outer
            gF = 2.0 * (qv - q0v)
            w = phi * phi
            c = lam - lam_star
            kkt = l2_of(gF + mu * w, w_quad)
            if kkt <= opts.grad_tol and abs(c) <= opts.constraint_tol:
                converged = True
                break

            inner_tol = max(opts.grad_tol, kkt * 0.03)
            qv, lam, phi, n_inner = _inner_descent(
                qv, lam, phi, fwd, q0v, w_quad, mu, rho, lam_star, inner_tol, opts
            )
            inner_used += n_inner
            qv, lam, phi = restore(qv, lam, phi)

            # tangent polish: the distance functional has Hessian exactly 2 I,
            # so the exact minimizing step along the projected gradient is 1/2;
            # a few such steps finish the job where line searches drown in
            # eigenvalue-solver noise.
            for _ in range(6):
                w = phi * phi
                gF = 2.0 * (qv - q0v)
                mu = -inner_l2(gF, w) / inner_l2(w, w)
                kkt_now = l2_of(gF + mu * w, w_quad)
                if kkt_now <= 0.2 * opts.grad_tol:
                    break
                qv = qv - 0.5 * (gF + mu * w)
                lam, phi = fwd.pair(qv)
                qv, lam, phi = restore(qv, lam, phi)
                inner_used += 1

            w = phi * phi
            gF = 2.0 * (qv - q0v)
            mu = -inner_l2(gF, w) / inner_l2(w, w)
            kkt_now = l2_of(gF + mu * w, w_quad)
            if kkt_now > 0.5 * kkt_prev:
                rho *= opts.penalty_growth
            kkt_prev = kkt_now
        else:
            gF = 2.0 * (qv - q0v)
            w = phi * phi
            kkt = l2_of(gF + mu * w, w_quad)
            converged = kkt <= opts.grad_tol and abs(lam - lam_star) <= opts.constraint_tol

    q_hat = Potential(GridFunction(grid, qv), label=f"{q0.label}:placed")
    lam_check = eigenvalue(q_hat, k, ang, lam_hint=lam_star, hint_radius=0.25)

    nu = mu / 2.0  # stationarity: 2(q - q0) + mu phi^2 = 0, and q0 - q = nu phi^2
    if trivial:
        delta, u_hat = 0, None
    else:
        delta = 1 if lam_star < diagnostics["lambda_k_q0"] else -1
        amp = math.sqrt(abs(nu))
        u_vals = amp * phi
        amax = np.max(np.abs(u_vals))
        if amax > 0:
            first = np.argmax(np.abs(u_vals) > 1e-12 * amax)
            if u_vals[first] < 0:
                u_vals = -u_vals
        u_hat = GridFunction(grid, u_vals)

    diagnostics.update(
        {
            "feasibility": abs(lam_check - lam_star),
            "constraint_defect": abs(lam - lam_star),
            "kkt_residual": kkt,
            "outer_iters": outer_used,
            "inner_iters": inner_used,
            "forward_solves": fwd.calls,
            "converged": converged,
        }
    )
    return InverseResult(
        q_hat=q_hat,
        k=k,
        lambda_star=lam_star,
        distance=dist2(qv),
        delta=delta,
        nu=nu,
        u_hat=u_hat,
        route="direct",
        diagnostics=diagnostics,
    )


def l2_of(values: np.ndarray, w_quad: np.ndarray) -> float:
    return float(math.sqrt(max(0.0, np.dot(w_quad, values * values))))


def _inner_descent(qv, lam, phi, fwd, q0v, w_quad, mu, rho, lam_star, tol, opts):
    """Gradient descent on the augmented functional, BB step + Armijo."""

    def value(lam_val, q_val) -> float:
        d = q_val - q0v
        c = lam_val - lam_star
        return float(np.dot(w_quad, d * d)) + mu * c + 0.5 * rho * c * c

    def grad(lam_val, phi_val, q_val) -> np.ndarray:
        c = lam_val - lam_star
        return 2.0 * (q_val - q0v) + (mu + rho * c) * phi_val * phi_val

    g = grad(lam, phi, qv)
    val = value(lam, qv)
    # Lipschitz-informed first step: Hessian ~ 2 I + rho * w w^T
    w2 = float(np.dot(w_quad, phi**4))
    t = 1.0 / (2.0 + rho * w2)
    n_inner = 0
    prev_q = prev_g = None
    for _ in range(opts.inner_max):
        gnorm = l2_of(g, w_quad)
        if gnorm <= tol:
            break
        # descent certificates smaller than solver noise are meaningless;
        # leave the rest to the outer polish
        if t * gnorm * gnorm < 1e-13 * (1.0 + abs(val)):
            break
        n_inner += 1
        if prev_q is not None and opts.step_rule == "backtracking":
            dq = qv - prev_q
            dg = g - prev_g
            denom = float(np.dot(w_quad, dq * dg))
            if denom > 0:
                t_bb = float(np.dot(w_quad, dq * dq)) / denom
                t = min(max(t_bb, 1e-4 * t), 1e4)
        accepted = False
        tt = t
        noise = 1e-13 * (1.0 + abs(val))
        for _bt in range(15):
            q_try = qv - tt * g
            try:
                lam_try = fwd.lam(q_try)
            except (BracketingError, ConvergenceError):
                tt *= 0.5
                continue
            val_try = value(lam_try, q_try)
            if val_try <= val - 1e-4 * tt * gnorm * gnorm + noise or opts.step_rule == "fixed":
                accepted = True
                break
            tt *= 0.5
        if not accepted:
            break
        prev_q, prev_g = qv, g
        qv = q_try
        lam, phi = fwd.pair(qv)
        val = value(lam, qv)
        g = grad(lam, phi, qv)
        t = tt
    return qv, lam, phi, n_inner


# ---------------------------------------------------------------------------
# certificates
# ---------------------------------------------------------------------------


def optimality_residual(q0: Potential, result: InverseResult, alpha=0.0) -> float:
    """Collinearity defect of the Lagrange condition at a placement result.

    Both q0 - q_hat and phi_k(q_hat)^2 are normalized in L2 and compared up
    to sign; a near-zero value certifies that the result satisfies the
    first-order optimality structure.  Requires a non-trivial result."""
    if result.delta == 0:
        raise ValueError("optimality residual is undefined on the trivial branch")
    ang = as_angle(alpha)
    grid = q0.grid
    d = q0.values - result.q_hat.values
    nd = l2_norm(GridFunction(grid, d))
    if nd == 0.0:
        raise ValueError("q_hat equals q0; nothing to compare")
    ep = eigenfunction(result.q_hat, result.k, ang, lam_hint=result.lambda_star)
    e = ep.phi.values**2
    ne = l2_norm(GridFunction(grid, e))
    d = d / nd
    e = e / ne
    r_plus = l2_norm(GridFunction(grid, d - e))
    r_minus = l2_norm(GridFunction(grid, d + e))
    return min(r_plus, r_minus)


def verify_nodal(result: InverseResult, alpha=0.0) -> bool:
    """Check the zero-count law on a placement result: the reconstruction
    witness u_hat and the k-th eigenfunction of q_hat must both carry
    exactly k - 1 interior zeros.  Vacuously true on the trivial branch."""
    if result.u_hat is None:
        return True
    ang = as_angle(alpha)
    n_u = count_sign_changes(result.u_hat.values, drop_endpoints=(ang.alpha == 0.0))
    ep = eigenfunction(result.q_hat, result.k, ang, lam_hint=result.lambda_star)
    return n_u == result.k - 1 and ep.node_count == result.k - 1


def local_optimality_probe(
    q0: Potential,
    result: InverseResult,
    alpha=0.0,
    n_probes: int = 10,
    seed: int = 0,
    kick: float = 1e-2,
) -> list[float]:
    """Empirical local-minimality check: random tangential kicks of size
    ``kick`` re-projected onto the constraint manifold must not reduce the
    distance functional.  Returns the list of distance increments (all of
    which should be >= 0 up to solver noise)."""
    ang = as_angle(alpha)
    grid = q0.grid
    w_quad = simpson_weights(grid)
    rng = np.random.default_rng(seed)
    x = grid.nodes
    fwd = _Forward(grid, result.k, ang)
    fwd.hint = result.lambda_star

    def dist2(qv):
        d = qv - q0.values
        return float(np.dot(w_quad, d * d))

    base = dist2(result.q_hat.values)
    out = []
    for _ in range(n_probes):
        coeff = rng.standard_normal(8)
        eta = np.zeros_like(x)
        for l, cl in enumerate(coeff, start=1):
            eta += cl * np.sin(l * x)
        eta /= l2_of(eta, w_quad)
        qv = result.q_hat.values + kick * eta
        lam, phi = fwd.pair(qv)
        for _ in range(10):
            c = lam - result.lambda_star
            if abs(c) <= 1e-11:
                break
            w = phi * phi
            qv = qv + ((result.lambda_star - lam) / float(np.dot(w_quad, w * w))) * w
            lam, phi = fwd.pair(qv)
        out.append(dist2(qv) - base)
    return out


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------


def save_result(
    result: InverseResult,
    out_dir,
    q0: Potential | None = None,
    alpha=0.0,
    prefix: str = "",
) -> dict:
    """Write the JSON summary plus CSVs for q0, q_hat, u_hat and phi_k.

    Returns the summary dict.  phi_k is recomputed by the forward solver on
    q_hat, so the files together form a self-contained certificate."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    summary = result.summary()
    (out / f"{prefix}summary.json").write_text(
        json.dumps(summary, indent=2, sort_keys=True, default=float) + "\n",
        encoding="utf-8",
    )
    save_csv(result.q_hat, out / f"{prefix}q_hat.csv")
    if q0 is not None:
        save_csv(q0, out / f"{prefix}q0.csv")
    if result.u_hat is not None:
        save_csv(result.u_hat, out / f"{prefix}u_hat.csv")
    ep = eigenfunction(result.q_hat, result.k, as_angle(alpha), lam_hint=result.lambda_star)
    save_csv(ep.phi, out / f"{prefix}phi_k.csv")
    return summary

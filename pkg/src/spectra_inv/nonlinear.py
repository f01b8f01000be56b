"""Shooting solver for the cubic two-point boundary value problem

    -u'' + q0(x) u = lam u + delta u^3   on (0, pi),   delta = +1 or -1,

with the separated boundary conditions of :mod:`spectra_inv.eigen`, plus the
falsification scans built on top of it: nonexistence scans (no solution with
a forbidden interior zero count in the relevant spectral regime) and
multiplicity scans (one solution per admissible zero count on both sides of
the spectrum).

The left boundary condition is satisfied identically by the initial ray
(u, u')(0) = s (-sin a, cos a), reducing the BVP to a scalar root-find in
the amplitude s.  Solutions are classified by the *continuous shooting
angle*: the unwrapped polar angle atan2(u, u') along the trajectory.  The
angle increases through every multiple of pi exactly at a zero of u (the
crossing is transversal for any equation of the form u'' = F(x, u)), so

* interior zero count  =  multiples of pi passed before x = pi,
* terminal boundary condition  =  angle(pi) lands on an admissible target,

and a solution with exactly k - 1 interior zeros corresponds to the single
target value ``phase_target(k)``.  Bracketing the angle in s is robust where
discrete (zero count, defect sign) pairs are ambiguous, because the count
necessarily changes by one as a zero migrates through the endpoint at a
root.  For the focusing branches the flow can escape in finite x; such
shots are recorded with the frozen angle at the cap and a signed infinite
defect, which is exactly the bracketing information a scan needs.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.optimize import brentq

from . import _integrators as _rk
from .core import (
    PI,
    BoundaryAngle,
    GridFunction,
    Potential,
    as_angle,
    l2_norm,
)
from .eigen import ConvergenceError, eigenvalue, phase_target

#: default amplitude scan: 61 log-spaced magnitudes per sign
S_MIN, S_MAX, S_COUNT = 1e-4, 1e3, 61

#: absolute bound accepted for the terminal boundary defect of a solution
RESIDUAL_TOL = 1e-8

#: noise floor (relative to max |u|) below which samples do not carry a sign
SIGN_FLOOR = 1e-9


class MissingBranchError(RuntimeError):
    """A multiplicity scan could not realize an expected solution branch."""

    def __init__(self, gaps, found):
        self.gaps = list(gaps)
        self.found = list(found)
        names = ", ".join(f"(delta={d:+d}, k={k})" for d, k in self.gaps)
        super().__init__(f"missing solution branches: {names}")


@dataclass(frozen=True)
class ShotResult:
    """Outcome of a single initial value shot.

    ``terminal_defect`` is u(pi) cos a + u'(pi) sin a, or a signed infinity
    when the trajectory escaped (sign of the divergence).  ``theta_end`` is
    the terminal unwrapped shooting angle, frozen at the escape point for
    blow-up shots.  Trajectory samples are kept (grid nodes) for non-blow-up
    shots so a converged shot can be promoted to a solution for free.
    """

    s: float
    terminal_defect: float
    node_count: int
    blowup: bool
    blowup_x: float | None
    theta_end: float
    u: np.ndarray | None = field(default=None, repr=False)
    du: np.ndarray | None = field(default=None, repr=False)


@dataclass(frozen=True)
class NonlinearSolution:
    """A nonzero solution of the cubic boundary value problem.

    The stored samples satisfy both boundary conditions to ``residual``
    (absolute, <= 1e-8), carry the canonical sign (positive right of x = 0),
    and have exactly ``node_count`` interior sign changes.
    """

    u: GridFunction
    delta: int
    lam: float
    node_count: int
    shoot_param: float
    residual: float

    def summary(self) -> dict:
        return {
            "lambda": self.lam,
            "delta": self.delta,
            "k": self.node_count + 1,
            "found": True,
            "node_histogram": {str(self.node_count): 1},
            "shoot_param": self.shoot_param,
            "residual": self.residual,
            "sup_norm": float(np.max(np.abs(self.u.values))),
            "l2_norm": l2_norm(self.u),
        }


@dataclass(frozen=True)
class NotFound:
    """Negative result of a solution search, with the evidence scanned."""

    lam: float
    delta: int
    k: int
    s_min: float
    s_max: float
    n_shots: int
    node_histogram: dict

    def summary(self) -> dict:
        return {
            "lambda": self.lam,
            "delta": self.delta,
            "k": self.k,
            "found": False,
            "node_histogram": {str(m): c for m, c in sorted(self.node_histogram.items())},
        }


@dataclass(frozen=True)
class ScanReport:
    """Exhaustive shot table over an amplitude grid, with every defect
    bracket refined and classified by the zero count of the solution it
    contains.  A *forbidden* bracket is one whose refined root is a
    verified solution with a zero count in ``forbidden_counts``; brackets
    whose refinement does not verify (no solution, e.g. an accumulation of
    escape thresholds) are listed as unresolved rather than counted."""

    lam: float
    delta: int
    k: int
    alpha: float
    forbidden_counts: tuple
    shots: tuple
    solutions: tuple
    forbidden: tuple
    unresolved: tuple

    @property
    def forbidden_count(self) -> int:
        return len(self.forbidden)

    def node_histogram(self) -> dict:
        hist: dict[int, int] = {}
        for sh in self.shots:
            hist[sh.node_count] = hist.get(sh.node_count, 0) + 1
        return hist

    def summary(self) -> dict:
        return {
            "lambda": self.lam,
            "delta": self.delta,
            "k": self.k,
            "found": len(self.solutions),
            "node_histogram": {str(m): c for m, c in sorted(self.node_histogram().items())},
            "forbidden_count": self.forbidden_count,
            "unresolved_count": len(self.unresolved),
        }

    def save_csv(self, path) -> None:
        lines = ["s,terminal_defect,node_count,blowup,blowup_x,theta_end"]
        for sh in self.shots:
            bx = "" if sh.blowup_x is None else f"{sh.blowup_x:.17g}"
            lines.append(
                f"{sh.s:.17g},{sh.terminal_defect:.17g},{sh.node_count},"
                f"{int(sh.blowup)},{bx},{sh.theta_end:.17g}"
            )
        Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")

    def save_json(self, path) -> None:
        Path(path).write_text(
            json.dumps(self.summary(), indent=2, sort_keys=True) + "\n", encoding="utf-8"
        )


def default_s_grid() -> np.ndarray:
    """Positive-half amplitude grid; scans mirror it for s < 0."""
    return np.logspace(math.log10(S_MIN), math.log10(S_MAX), S_COUNT)


# ---------------------------------------------------------------------------
# single shots
# ---------------------------------------------------------------------------


def _node_index_near(theta_end: float, beta: float) -> int:
    """Index k of the admissible target nearest to a terminal angle."""
    if beta == 0.0:
        return max(1, int(round(theta_end / PI)))
    return max(1, int(round((theta_end - beta) / PI)) + 1)


def _count_crossings(theta_end: float) -> int:
    return max(0, int(math.floor((theta_end - 1e-8) / PI)))


def shoot(
    q0: Potential,
    lam: float,
    delta: int,
    alpha=0.0,
    s: float = 1.0,
    nsub: int | None = None,
) -> ShotResult:
    """Integrate the initial value problem with (u, u')(0) = s(-sin a, cos a).

    The initial ray satisfies the left boundary condition identically for
    every s.  Blow-up (|u| past the cap, only possible on the focusing
    branch) is reported with its location and the sign of the divergence;
    the terminal defect is then the correspondingly signed infinity.
    """
    if s == 0.0:
        raise ValueError("shot amplitude s must be nonzero")
    if delta not in (-1, 1):
        raise ValueError(f"delta must be -1 or +1, got {delta!r}")
    ang = as_angle(alpha)
    nsub = nsub or _rk.DEFAULT_SUBSTEPS
    u0 = -s * math.sin(ang.alpha)
    v0 = s * math.cos(ang.alpha)
    u_sub, v_sub, blow_idx, blow_sign = _rk.cubic_shot(q0, lam, delta, (u0, v0), nsub)

    # canonical shooting angle starts at beta regardless of the sign of s
    sigma = float(np.sign(s)) * (1.0 if ang.alpha == 0.0 else -1.0)
    if blow_idx >= 0:
        valid = blow_idx + 1
        blowup = True
        blowup_x = min(PI, (blow_idx + 1) * (q0.grid.h / nsub))
    else:
        valid = len(u_sub)
        blowup = False
        blowup_x = None
    psi = np.unwrap(np.arctan2(sigma * u_sub[:valid], sigma * v_sub[:valid]))
    theta_end = float(psi[-1])

    if blowup:
        defect = math.inf if blow_sign > 0 else -math.inf
        u_nodes = du_nodes = None
    else:
        defect = float(u_sub[-1] * math.cos(ang.alpha) + v_sub[-1] * math.sin(ang.alpha))
        u_nodes = np.array(u_sub[::nsub])
        du_nodes = np.array(v_sub[::nsub])
    return ShotResult(
        s=float(s),
        terminal_defect=defect,
        node_count=_count_crossings(theta_end),
        blowup=blowup,
        blowup_x=blowup_x,
        theta_end=theta_end,
        u=u_nodes,
        du=du_nodes,
    )


def count_sign_changes(values: np.ndarray, drop_endpoints: bool = False) -> int:
    """Interior sign changes of a sampled function.

    Samples below ``SIGN_FLOOR`` times the maximum magnitude carry no sign;
    with ``drop_endpoints`` the first and last samples are ignored (use for
    the Dirichlet angle, where boundary zeros are forced and must not count
    as interior)."""
    v = np.asarray(values, dtype=float)
    if drop_endpoints:
        v = v[1:-1]
    amax = float(np.max(np.abs(v))) if v.size else 0.0
    if amax == 0.0:
        return 0
    signs = np.sign(v[np.abs(v) > SIGN_FLOOR * amax])
    if signs.size < 2:
        return 0
    return int(np.sum(signs[1:] != signs[:-1]))


# ---------------------------------------------------------------------------
# solution search
# ---------------------------------------------------------------------------


def _defect_sign(shot: ShotResult) -> float:
    d = shot.terminal_defect
    if d > 0:
        return 1.0
    if d < 0:
        return -1.0
    return 0.0


def _spanned_targets(lo: ShotResult, hi: ShotResult, ang: BoundaryAngle) -> list[float]:
    """Admissible terminal values strictly between two shots' angles.

    Blow-up shots contribute their frozen angle, which is an exact record of
    the crossings completed before the escape, so a target strictly inside
    the span can only be reached through a genuine terminal-condition root
    somewhere between the two amplitudes (or a tangency, which no
    sign-based search can see)."""
    ta, tb = sorted((lo.theta_end, hi.theta_end))
    j_lo = _node_index_near(ta, ang.beta)
    j_hi = _node_index_near(tb, ang.beta)
    return [
        phase_target(j, ang)
        for j in range(max(1, j_lo - 1), j_hi + 2)
        if ta < phase_target(j, ang) < tb
    ]


def _refine_angle_bracket(shot_at, s_lo, s_hi, target) -> ShotResult:
    """Brent root of theta_end(s) - target between two non-blow-up shots."""
    cache: dict[float, ShotResult] = {}

    def g(s: float) -> float:
        sh = shot_at(s)
        cache[s] = sh
        return sh.theta_end - target

    a, b = sorted((s_lo, s_hi))
    root = brentq(g, a, b, xtol=1e-15 * max(1.0, abs(b)), rtol=8.9e-16, maxiter=200)
    return cache.get(root) or shot_at(root)


def _refine_mixed_bracket(shot_at, lo: ShotResult, hi: ShotResult, target, maxiter=200):
    """Locate the root of theta_end(s) = target when escape regions intrude.

    Bisection on the predicate theta_end > target: the frozen angle of an
    escaping shot hovers just above the multiple of pi it last crossed, so
    the predicate changes only at genuine roots, never inside the fractal
    cascade of escape thresholds where the raw defect sign flips freely.
    As soon as finite shots straddle the target the remaining interval is
    handed to Brent iteration."""
    sa, sb = lo.s, hi.s
    pa = lo.theta_end > target
    fin_a = lo if not lo.blowup else None
    fin_b = hi if not hi.blowup else None
    for _ in range(maxiter):
        if (
            fin_a is not None
            and fin_b is not None
            and (fin_a.theta_end - target) * (fin_b.theta_end - target) < 0
        ):
            return _refine_angle_bracket(shot_at, fin_a.s, fin_b.s, target)
        sm = 0.5 * (sa + sb)
        if sm == sa or sm == sb:
            break
        sh = shot_at(sm)
        if (sh.theta_end > target) == pa:
            sa = sm
            if not sh.blowup:
                fin_a = sh
        else:
            sb = sm
            if not sh.blowup:
                fin_b = sh
    for sh in (fin_a, fin_b):
        if sh is not None and abs(sh.theta_end - target) < 1e-9:
            return sh
    return None


def _refine(shot_at, lo: ShotResult, hi: ShotResult, target):
    if lo.blowup or hi.blowup:
        return _refine_mixed_bracket(shot_at, lo, hi, target)
    return _refine_angle_bracket(shot_at, lo.s, hi.s, target)


def _promote(shot: ShotResult, q0: Potential, lam, delta, ang: BoundaryAngle, k: int):
    """Turn a converged shot into a canonical-sign NonlinearSolution, or
    return None if it fails verification."""
    if shot.blowup or shot.u is None:
        return None
    if abs(shot.terminal_defect) > RESIDUAL_TOL:
        return None
    if shot.node_count != k - 1:
        return None
    u = shot.u
    s = shot.s
    amax = np.max(np.abs(u))
    if amax <= 0.0:
        return None
    first = np.argmax(np.abs(u) > 1e-12 * amax)
    if u[first] < 0:
        u = -u
        s = -s  # the flow is exactly odd, so -s reproduces -u bit for bit
    sampled_nodes = count_sign_changes(u, drop_endpoints=(ang.alpha == 0.0))
    if sampled_nodes != k - 1:
        raise ConvergenceError(
            f"angle crossings ({shot.node_count}) and sampled sign changes "
            f"({sampled_nodes}) disagree for k={k}"
        )
    return NonlinearSolution(
        u=GridFunction(q0.grid, u),
        delta=delta,
        lam=float(lam),
        node_count=k - 1,
        shoot_param=s,
        residual=abs(shot.terminal_defect),
    )


def find_solution(
    q0: Potential,
    lam: float,
    delta: int,
    k: int,
    alpha=0.0,
    s_grid=None,
    nsub: int | None = None,
):
    """Search for the solution with exactly k - 1 interior zeros.

    Scans the positive amplitude branch (solutions come in (u, -u) pairs;
    the canonical-sign representative is returned), brackets the shooting
    angle against the k-th target, and refines by Brent iteration.  When
    several brackets hold the same zero count the smallest-amplitude one is
    returned.  Returns :class:`NotFound` with the scan evidence when no
    bracket verifies.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    if delta not in (-1, 1):
        raise ValueError(f"delta must be -1 or +1, got {delta!r}")
    ang = as_angle(alpha)
    target = phase_target(k, ang)
    grid_s = np.abs(np.asarray(s_grid if s_grid is not None else default_s_grid(), dtype=float))
    grid_s = np.unique(grid_s[grid_s > 0.0])

    def shot_at(s: float) -> ShotResult:
        return shoot(q0, lam, delta, ang, s, nsub=nsub)

    shots = [shot_at(s) for s in grid_s]

    candidates = []  # (order key, kind, lo, hi)
    for sh in shots:
        if not sh.blowup and sh.theta_end == target:
            candidates.append((abs(sh.s), "exact", sh, sh))
    for lo, hi in zip(shots, shots[1:]):
        if target in _spanned_targets(lo, hi, ang):
            candidates.append((min(abs(lo.s), abs(hi.s)), "bracket", lo, hi))
    candidates.sort(key=lambda c: c[0])

    for _key, kind, lo, hi in candidates:
        root = lo if kind == "exact" else _refine(shot_at, lo, hi, target)
        if root is None:
            continue
        sol = _promote(root, q0, lam, delta, ang, k)
        if sol is not None:
            return sol

    hist: dict[int, int] = {}
    for sh in shots:
        hist[sh.node_count] = hist.get(sh.node_count, 0) + 1
    return NotFound(
        lam=float(lam),
        delta=delta,
        k=k,
        s_min=float(grid_s[0]),
        s_max=float(grid_s[-1]),
        n_shots=len(shots),
        node_histogram=hist,
    )


# ---------------------------------------------------------------------------
# scans
# ---------------------------------------------------------------------------


def nonexistence_scan(
    q0: Potential,
    lam: float,
    delta: int,
    k: int,
    alpha=0.0,
    s_grid=None,
    nsub: int | None = None,
) -> ScanReport:
    """Exhaustive falsification scan over the amplitude grid.

    For delta = +1 the forbidden zero counts are {0, ..., k-1} (applies for
    lam >= lam_k(q0)); for delta = -1 they are {k-1, k, ...} (applies for
    lam <= lam_k(q0)).  Every defect bracket found on the grid is refined;
    the report lists the verified solutions, those with forbidden counts
    (expected: none, over a finite grid this is evidence rather than proof),
    and any bracket that failed to verify.
    """
    if delta not in (-1, 1):
        raise ValueError(f"delta must be -1 or +1, got {delta!r}")
    ang = as_angle(alpha)
    half = np.abs(np.asarray(s_grid if s_grid is not None else default_s_grid(), dtype=float))
    half = np.unique(half[half > 0.0])

    if delta == 1:
        forbidden = tuple(range(0, k))
        is_forbidden = lambda m: m <= k - 1
    else:
        forbidden = (k - 1, "and more",)
        is_forbidden = lambda m: m >= k - 1

    all_shots: list[ShotResult] = []
    solutions: list[NonlinearSolution] = []
    flagged: list[NonlinearSolution] = []
    unresolved: list[tuple[float, float]] = []

    def shot_at(s: float) -> ShotResult:
        return shoot(q0, lam, delta, ang, s, nsub=nsub)

    for sign in (-1.0, 1.0):
        branch = [shot_at(sign * s) for s in half]
        all_shots.extend(branch)
        for lo, hi in zip(branch, branch[1:]):
            spanned = _spanned_targets(lo, hi, ang)
            if not spanned:
                continue
            resolved_all = True
            for target in spanned:
                root = _refine(shot_at, lo, hi, target)
                if root is None or root.blowup or abs(root.terminal_defect) > 1e-6:
                    resolved_all = False
                    continue
                j = _node_index_near(root.theta_end, ang.beta)
                sol = _promote(root, q0, lam, delta, ang, j)
                if sol is None:
                    resolved_all = False
                    continue
                solutions.append(sol)
                if is_forbidden(sol.node_count):
                    flagged.append(sol)
            if not resolved_all:
                unresolved.append((lo.s, hi.s))

    return ScanReport(
        lam=float(lam),
        delta=delta,
        k=k,
        alpha=ang.alpha,
        forbidden_counts=forbidden,
        shots=tuple(all_shots),
        solutions=tuple(solutions),
        forbidden=tuple(flagged),
        unresolved=tuple(unresolved),
    )


def multiplicity_scan(
    q0: Potential,
    lam: float,
    alpha=0.0,
    l_max: int = 5,
    nsub: int | None = None,
) -> list[NonlinearSolution]:
    """Realize every solution branch promised in the spectral window.

    With lam strictly between the k-th and (k+1)-th eigenvalues of the
    linear operator, the defocusing branch (delta = +1) carries solutions
    with zero counts k, k+1, ..., l_max - 1 and the focusing branch
    (delta = -1) carries zero counts 0, ..., k-1.  Raises
    :class:`MissingBranchError` naming any branch the shooting search could
    not realize; raises ValueError if lam sits on the spectrum (within
    1e-8), where the window is ill-defined.
    """
    if l_max < 1:
        raise ValueError("l_max must be >= 1")
    ang = as_angle(alpha)
    # locate the spectral window containing lam
    k = 0
    j = 1
    while True:
        lam_j = eigenvalue(q0, j, ang)
        if abs(lam - lam_j) <= 1e-8:
            raise ValueError(
                f"lam={lam!r} coincides with eigenvalue #{j} ({lam_j!r}); "
                "the spectral window is ill-defined"
            )
        if lam_j > lam:
            break
        k = j
        j += 1

    found: list[NonlinearSolution] = []
    gaps: list[tuple[int, int]] = []
    for l in range(1, k + 1):  # focusing branch, zero counts 0..k-1
        sol = find_solution(q0, lam, -1, l, ang, nsub=nsub)
        if isinstance(sol, NonlinearSolution):
            found.append(sol)
        else:
            gaps.append((-1, l))
    for l in range(k + 1, l_max + 1):  # defocusing branch, zero counts k..l_max-1
        sol = find_solution(q0, lam, +1, l, ang, nsub=nsub)
        if isinstance(sol, NonlinearSolution):
            found.append(sol)
        else:
            gaps.append((+1, l))
    if gaps:
        raise MissingBranchError(gaps, found)
    return found


# ---------------------------------------------------------------------------
# verification helpers
# ---------------------------------------------------------------------------


def resubstitution_defect(sol: NonlinearSolution, q0: Potential) -> float:
    """Pointwise equation defect of a solution, reconstructed on the grid.

    Fourth-order central differences for u'' over interior nodes; entirely
    independent of the integrator that produced the samples."""
    u = sol.u.values
    h = sol.u.grid.h
    upp = (-u[:-4] + 16.0 * u[1:-3] - 30.0 * u[2:-2] + 16.0 * u[3:-1] - u[4:]) / (
        12.0 * h * h
    )
    inner = slice(2, len(u) - 2)
    defect = -upp + (q0.values[inner] - sol.lam) * u[inner] - sol.delta * u[inner] ** 3
    return float(np.max(np.abs(defect)))

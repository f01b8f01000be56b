"""The package's acceptance battery: eleven numbered property checks that
exercise every solver at the default desk scale (n = 2000).

Each criterion is a standalone function returning a :class:`CriterionResult`
with the measured numbers, so the same battery backs both the pytest suite
(``tests/test_acceptance.py``) and the ``spectra-inv check`` command.  A
:class:`Workspace` caches the expensive shared computations (the standard
placement instances are solved once and inspected by several criteria).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import (
    GridFunction,
    Potential,
    l2_inner,
    l2_norm,
    make_grid,
    preset_potential,
)
from .eigen import eigenvalue, eigenfunction, eigenvalue_gradient, fd_eigenvalues
from .inverse import InverseResult, solve_direct, solve_explicit, optimality_residual
from .nonlinear import (
    NonlinearSolution,
    find_solution,
    multiplicity_scan,
    nonexistence_scan,
)

DEFAULT_GRID_N = 2000

#: reference potentials for the standard placement instances
STANDARD_POTENTIALS = (
    ("zero", [], None),
    ("cosine", [2.0, 2.0], None),
    ("random_fourier", [2.0, 6], 3),
    ("random_fourier", [2.0, 6], 7),
    ("random_fourier", [2.0, 6], 11),
)


@dataclass
class CriterionResult:
    name: str
    passed: bool
    details: dict

    def line(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'}  {self.name}"


@dataclass
class Workspace:
    """Shared lazily-computed state for the battery."""

    grid_n: int = DEFAULT_GRID_N
    _cache: dict = field(default_factory=dict, repr=False)

    @property
    def grid(self):
        if "grid" not in self._cache:
            self._cache["grid"] = make_grid(self.grid_n)
        return self._cache["grid"]

    def potential(self, name, params, seed=None) -> Potential:
        key = ("pot", name, tuple(params), seed)
        if key not in self._cache:
            self._cache[key] = preset_potential(name, params, self.grid, seed=seed)
        return self._cache[key]

    def standard_instances(self) -> list[dict]:
        """The placement instances shared by criteria 3, 4, 5 and 8:
        five reference potentials x k in {1, 2} x target one above/below."""
        if "instances" in self._cache:
            return self._cache["instances"]
        out = []
        for name, params, seed in STANDARD_POTENTIALS:
            q0 = self.potential(name, params, seed)
            for k in (1, 2):
                lam_k = eigenvalue(q0, k)
                for shift in (+1.0, -1.0):
                    lam_star = lam_k + shift
                    explicit = solve_explicit(q0, k, lam_star)
                    direct = solve_direct(q0, k, lam_star)
                    out.append(
                        {
                            "q0": q0,
                            "k": k,
                            "lam_k_q0": lam_k,
                            "lam_star": lam_star,
                            "explicit": explicit,
                            "direct": direct,
                        }
                    )
        self._cache["instances"] = out
        return out


# ---------------------------------------------------------------------------
# criteria
# ---------------------------------------------------------------------------


def criterion_01_linear_spectrum(ws: Workspace) -> CriterionResult:
    """Free Dirichlet spectrum: lam_k = k^2 for k = 1..10 within 1e-8."""
    q0 = ws.potential("zero", [])
    errs = [abs(eigenvalue(q0, k) - k * k) for k in range(1, 11)]
    worst = max(errs)
    return CriterionResult(
        "01 linear spectrum lam_k = k^2 (k<=10, err<=1e-8)",
        worst <= 1e-8,
        {"max_abs_error": worst},
    )


def criterion_02_eigenvalue_derivative(ws: Workspace) -> CriterionResult:
    """Derivative density phi_k^2 vs central finite differences.

    Twenty seeded (q, h, k) triples, relative error <= 1e-4 at step 1e-5;
    the derivative in the constant direction must equal 1 within 1e-8.
    """
    eps = 1e-5
    worst_rel = 0.0
    worst_const = 0.0
    smallest_fd = np.inf
    for i in range(20):
        k = i % 3 + 1
        q = ws.potential("random_fourier", [2.5, 6], 100 + i)
        h = ws.potential("random_fourier", [1.5, 8], 200 + i)
        hf = h.f
        grad = eigenvalue_gradient(q, k)
        formula = l2_inner(grad, hf)
        lam0 = eigenvalue(q, k)
        qp = Potential(GridFunction(ws.grid, q.values + eps * hf.values), "q+eh")
        qm = Potential(GridFunction(ws.grid, q.values - eps * hf.values), "q-eh")
        lp = eigenvalue(qp, k, lam_hint=lam0, hint_radius=1e-3)
        lm = eigenvalue(qm, k, lam_hint=lam0, hint_radius=1e-3)
        fd = (lp - lm) / (2 * eps)
        smallest_fd = min(smallest_fd, abs(fd))
        worst_rel = max(worst_rel, abs(formula - fd) / abs(fd))
        ones = GridFunction(ws.grid, np.ones(ws.grid.n + 1))
        worst_const = max(worst_const, abs(l2_inner(grad, ones) - 1.0))
    return CriterionResult(
        "02 eigenvalue derivative vs finite differences (rel<=1e-4)",
        worst_rel <= 1e-4 and worst_const <= 1e-8,
        {
            "max_rel_error": worst_rel,
            "max_const_direction_error": worst_const,
            "smallest_fd_magnitude": smallest_fd,
        },
    )


def criterion_03_reconstruction_roundtrip(ws: Workspace) -> CriterionResult:
    """Explicit route on the standard instances: the reconstructed potential
    carries the target as its k-th eigenvalue (<=1e-6), the witness has
    exactly k-1 interior zeros, the branch sign follows the sign law, and
    the closed-form identity q_hat = q0 - delta u^2 holds pointwise."""
    worst_feas = 0.0
    worst_identity = 0.0
    all_nodes = True
    all_signs = True
    from .nonlinear import count_sign_changes

    for inst in ws.standard_instances():
        r: InverseResult = inst["explicit"]
        worst_feas = max(worst_feas, r.diagnostics["feasibility"])
        expected_delta = 1 if inst["lam_star"] < inst["lam_k_q0"] else -1
        all_signs &= r.delta == expected_delta
        nodes = count_sign_changes(r.u_hat.values, drop_endpoints=True)
        all_nodes &= nodes == inst["k"] - 1
        identity = np.max(
            np.abs(r.q_hat.values - inst["q0"].values + r.delta * r.u_hat.values**2)
        )
        worst_identity = max(worst_identity, identity)
    return CriterionResult(
        "03 explicit placement round trip (20 instances, feas<=1e-6)",
        worst_feas <= 1e-6 and all_nodes and all_signs and worst_identity <= 1e-6,
        {
            "max_feasibility_defect": worst_feas,
            "zero_counts_correct": all_nodes,
            "sign_law_correct": all_signs,
            "max_identity_defect": worst_identity,
        },
    )


def criterion_04_route_agreement(ws: Workspace) -> CriterionResult:
    """Direct optimization lands on the explicit minimizer:
    |Q_direct - Q_explicit| <= 1e-4 and L2 distance of minimizers <= 1e-3."""
    worst_q = 0.0
    worst_dist = 0.0
    for inst in ws.standard_instances():
        re_, rd = inst["explicit"], inst["direct"]
        worst_q = max(worst_q, abs(re_.distance - rd.distance))
        worst_dist = max(
            worst_dist,
            l2_norm(GridFunction(ws.grid, re_.q_hat.values - rd.q_hat.values)),
        )
    return CriterionResult(
        "04 route agreement (|dQ|<=1e-4, |dq|<=1e-3)",
        worst_q <= 1e-4 and worst_dist <= 1e-3,
        {"max_distance_gap": worst_q, "max_minimizer_gap": worst_dist},
    )


def criterion_05_optimality_structure(ws: Workspace) -> CriterionResult:
    """Lagrange collinearity of q0 - q_hat with phi_k(q_hat)^2:
    residual <= 1e-6 on the explicit route, <= 1e-3 on the direct route."""
    worst_e = 0.0
    worst_d = 0.0
    for inst in ws.standard_instances():
        worst_e = max(worst_e, optimality_residual(inst["q0"], inst["explicit"]))
        worst_d = max(worst_d, optimality_residual(inst["q0"], inst["direct"]))
    return CriterionResult(
        "05 optimality collinearity (explicit<=1e-6, direct<=1e-3)",
        worst_e <= 1e-6 and worst_d <= 1e-3,
        {"max_explicit_residual": worst_e, "max_direct_residual": worst_d},
    )


def criterion_06_nonexistence_scans(ws: Workspace) -> CriterionResult:
    """Falsification scans in the forbidden regimes find nothing.

    For q0 in {zero, seeded sine series}, k in {1, 2}: the defocusing
    branch at lam in {lam_k, lam_k + 1/2} yields no verified solution with
    <= k-1 zeros; the focusing branch at lam in {lam_k, lam_k - 1/2} yields
    none with >= k-1 zeros, over the default 122-point amplitude grid."""
    total_forbidden = 0
    scans = 0
    details = {}
    for name, params, seed in (("zero", [], None), ("random_fourier", [2.0, 6], 3)):
        q0 = ws.potential(name, params, seed)
        for k in (1, 2):
            lam_k = eigenvalue(q0, k)
            for delta, shifts in ((+1, (0.0, 0.5)), (-1, (0.0, -0.5))):
                for shift in shifts:
                    report = nonexistence_scan(q0, lam_k + shift, delta, k)
                    scans += 1
                    total_forbidden += report.forbidden_count
                    if report.forbidden_count:
                        details[f"{q0.label} k={k} delta={delta:+d} shift={shift}"] = (
                            report.forbidden_count
                        )
    return CriterionResult(
        "06 forbidden-regime scans find no solution (16 scans)",
        total_forbidden == 0,
        {"scans": scans, "forbidden_total": total_forbidden, **details},
    )


def criterion_07_multiplicity(ws: Workspace) -> CriterionResult:
    """Between the second and third eigenvalues of the free operator
    (lam = 5), the focusing branch carries zero counts {0, 1} and the
    defocusing branch {2, 3, 4}; all five solutions pairwise distinct."""
    q0 = ws.potential("zero", [])
    sols = multiplicity_scan(q0, 5.0, l_max=5)
    by_delta = {}
    for s in sols:
        by_delta.setdefault(s.delta, set()).add(s.node_count)
    min_dist = np.inf
    for i in range(len(sols)):
        for j in range(i + 1, len(sols)):
            d = l2_norm(GridFunction(ws.grid, sols[i].u.values - sols[j].u.values))
            min_dist = min(min_dist, d)
    ok = (
        by_delta.get(-1) == {0, 1}
        and by_delta.get(+1) == {2, 3, 4}
        and min_dist >= 1e-4
    )
    return CriterionResult(
        "07 multiplicity window at lam=5 ({0,1} focusing, {2,3,4} defocusing)",
        ok,
        {
            "focusing_counts": sorted(by_delta.get(-1, ())),
            "defocusing_counts": sorted(by_delta.get(+1, ())),
            "min_pairwise_l2": float(min_dist),
        },
    )


def criterion_08_trivial_case(ws: Workspace) -> CriterionResult:
    """Placing the eigenvalue where it already sits returns the reference
    potential itself: distance <= 1e-12 on both routes."""
    worst = 0.0
    for name, params, seed in (("zero", [], None), ("cosine", [2.0, 2.0], None)):
        q0 = ws.potential(name, params, seed)
        for k in (1, 2):
            lam_k = eigenvalue(q0, k)
            for r in (solve_explicit(q0, k, lam_k), solve_direct(q0, k, lam_k)):
                worst = max(worst, r.distance)
                if r.delta != 0:
                    worst = max(worst, 1.0)
    return CriterionResult(
        "08 trivial placement returns q0 (distance<=1e-12, both routes)",
        worst <= 1e-12,
        {"max_distance": worst},
    )


def criterion_09_bifurcation_limit(ws: Workspace) -> CriterionResult:
    """Focusing 0-node branch shrinks to zero as lam decreases to the first
    eigenvalue: sup norms strictly decrease over lam in {1.5,1.25,1.1,1.01}."""
    q0 = ws.potential("zero", [])
    sups = []
    for lam in (1.5, 1.25, 1.1, 1.01):
        sol = find_solution(q0, lam, -1, 1)
        if not isinstance(sol, NonlinearSolution):
            return CriterionResult(
                "09 bifurcation limit", False, {"missing_at": lam}
            )
        sups.append(float(np.max(np.abs(sol.u.values))))
    decreasing = all(b < a for a, b in zip(sups, sups[1:]))
    return CriterionResult(
        "09 0-node branch amplitude decreases toward the eigenvalue",
        decreasing and sups[-1] < 0.2,
        {"sup_norms": sups},
    )


def criterion_10_oracle_equivalence(ws: Workspace) -> CriterionResult:
    """Phase-shooting eigenvalues vs the symmetric tridiagonal matrix
    oracle: agreement within 1e-5 for k <= 5 on five seeded potentials."""
    worst = 0.0
    for seed in range(1, 6):
        q = ws.potential("random_fourier", [3.0, 6], seed)
        fd = fd_eigenvalues(q, 5)
        lam_hint = None
        for k in range(1, 6):
            lam = eigenvalue(q, k, lam_hint=lam_hint, hint_radius=2.0)
            lam_hint = lam + 2 * k + 1
            worst = max(worst, abs(lam - fd[k - 1]))
    return CriterionResult(
        "10 shooting vs matrix oracle (k<=5, 5 seeds, err<=1e-5)",
        worst <= 1e-5,
        {"max_abs_gap": worst},
    )


def criterion_11_uniform_lower_bound(ws: Workspace) -> CriterionResult:
    """Ground eigenvalue stays bounded below over a norm-bounded family:
    50 seeded potentials with L2 norm 10, all lam_1 finite, minimum
    recorded and above a crude a-priori bound."""
    lams = []
    for seed in range(50):
        q = ws.potential("random_fourier", [10.0, 8], 1000 + seed)
        lams.append(eigenvalue(q, 1))
    lams = np.asarray(lams)
    ok = bool(np.all(np.isfinite(lams)) and np.min(lams) >= -30.0)
    return CriterionResult(
        "11 ground eigenvalue uniformly bounded below (50 seeds, |q|=10)",
        ok,
        {"min_lambda_1": float(np.min(lams)), "max_lambda_1": float(np.max(lams))},
    )


ALL_CRITERIA = (
    criterion_01_linear_spectrum,
    criterion_02_eigenvalue_derivative,
    criterion_03_reconstruction_roundtrip,
    criterion_04_route_agreement,
    criterion_05_optimality_structure,
    criterion_06_nonexistence_scans,
    criterion_07_multiplicity,
    criterion_08_trivial_case,
    criterion_09_bifurcation_limit,
    criterion_10_oracle_equivalence,
    criterion_11_uniform_lower_bound,
)


def run_all(grid_n: int = DEFAULT_GRID_N, echo=print) -> list[CriterionResult]:
    """Run the whole battery, printing one pass/fail line per criterion."""
    ws = Workspace(grid_n=grid_n)
    results = []
    for crit in ALL_CRITERIA:
        res = crit(ws)
        results.append(res)
        if echo is not None:
            echo(res.line())
    return results

import math

import numpy as np
import pytest

from spectra_inv import core, eigen, nonlinear

import oracles


# ---------------------------------------------------------------------------
# single shots
# ---------------------------------------------------------------------------


def test_shoot_validates_input(zero):
    with pytest.raises(ValueError):
        nonlinear.shoot(zero, 2.0, -1, 0.0, 0.0)
    with pytest.raises(ValueError):
        nonlinear.shoot(zero, 2.0, 0, 0.0, 1.0)


def test_small_amplitude_defect_follows_linearization(zero):
    # for tiny s the trajectory is s sin(sqrt(2) x); its endpoint sign is
    # that of sin(sqrt(2) pi) < 0
    sh = nonlinear.shoot(zero, 2.0, -1, 0.0, 1e-6)
    assert sh.terminal_defect < 0
    assert sh.terminal_defect == pytest.approx(1e-6 * math.sin(math.sqrt(2) * math.pi) / math.sqrt(2), rel=1e-4)


def test_shot_defect_is_endpoint_value_for_dirichlet(zero):
    sh = nonlinear.shoot(zero, 2.0, -1, 0.0, 0.7)
    assert sh.terminal_defect == sh.u[-1]
    assert sh.u[0] == 0.0  # left condition exact by construction


def test_odd_symmetry_is_exact(zero):
    a = nonlinear.shoot(zero, 2.0, -1, 0.0, 0.5)
    b = nonlinear.shoot(zero, 2.0, -1, 0.0, -0.5)
    assert np.array_equal(a.u, -b.u)
    assert a.terminal_defect == -b.terminal_defect
    assert a.node_count == b.node_count
    assert a.theta_end == b.theta_end


def test_focusing_blowup_detected(zero):
    sh = nonlinear.shoot(zero, 0.5, -1, 0.0, 1000.0)
    assert sh.blowup
    assert sh.blowup_x is not None and 0.0 < sh.blowup_x <= math.pi
    assert math.isinf(sh.terminal_defect) and sh.terminal_defect > 0
    assert sh.u is None


def test_defocusing_never_blows_up(zero):
    for s in (1.0, 100.0, 1000.0):
        sh = nonlinear.shoot(zero, 0.5, +1, 0.0, s)
        assert not sh.blowup
        assert np.isfinite(sh.terminal_defect)


def test_node_count_grows_with_amplitude_on_defocusing_branch(zero):
    counts = [nonlinear.shoot(zero, 0.5, +1, 0.0, s).node_count for s in (0.01, 10.0, 300.0)]
    assert counts[0] == 0
    assert counts == sorted(counts)
    assert counts[-1] > 5


def test_count_sign_changes_basics():
    assert nonlinear.count_sign_changes(np.array([0.0, 1.0, 2.0, 1.0])) == 0
    assert nonlinear.count_sign_changes(np.array([1.0, -1.0, 1.0])) == 2
    # values under the floor carry no sign
    v = np.array([0.0, 1.0, 1e-12, -1.0, 0.0])
    assert nonlinear.count_sign_changes(v) == 1
    assert nonlinear.count_sign_changes(v, drop_endpoints=True) == 1
    # forced boundary zeros are not interior sign changes
    w = np.array([0.0, 1.0, 1.0, -1e-11])
    assert nonlinear.count_sign_changes(w, drop_endpoints=True) == 0


# ---------------------------------------------------------------------------
# solution search
# ---------------------------------------------------------------------------


def test_positive_solution_between_first_eigenvalues(zero, grid):
    sol = nonlinear.find_solution(zero, 2.0, -1, 1)
    assert isinstance(sol, nonlinear.NonlinearSolution)
    assert sol.node_count == 0
    assert sol.residual <= 1e-8
    assert np.all(sol.u.values[1:-1] > -1e-12)  # positive interior
    # amplitude against the energy-quadrature reference
    amp_ref = oracles.cubic_dirichlet_amplitude(2.0, -1, 1)
    assert np.max(np.abs(sol.u.values)) == pytest.approx(amp_ref, abs=1e-8)
    slope_ref = oracles.cubic_shoot_slope(amp_ref, 2.0, -1)
    assert abs(sol.shoot_param) == pytest.approx(slope_ref, abs=1e-8)
    # the squared solution shifts the ground eigenvalue exactly to lam
    qhat = core.potential_from_values(grid, sol.u.values**2, "u^2")
    assert eigen.eigenvalue(qhat, 1) == pytest.approx(2.0, abs=1e-6)


def test_defocusing_solution_below_spectrum(zero):
    sol = nonlinear.find_solution(zero, 0.5, +1, 1)
    assert isinstance(sol, nonlinear.NonlinearSolution)
    assert sol.node_count == 0
    amp_ref = oracles.cubic_dirichlet_amplitude(0.5, +1, 1)
    assert np.max(np.abs(sol.u.values)) == pytest.approx(amp_ref, abs=1e-8)


@pytest.mark.parametrize("k,lam,delta", [(2, 5.0, -1), (3, 5.0, +1), (2, 3.0, +1)])
def test_higher_branches_match_amplitude_oracle(zero, k, lam, delta):
    sol = nonlinear.find_solution(zero, lam, delta, k)
    assert isinstance(sol, nonlinear.NonlinearSolution)
    assert sol.node_count == k - 1
    amp_ref = oracles.cubic_dirichlet_amplitude(lam, delta, k)
    assert np.max(np.abs(sol.u.values)) == pytest.approx(amp_ref, abs=1e-7)


def test_forbidden_regime_returns_not_found(zero):
    nf = nonlinear.find_solution(zero, 2.0, +1, 1)
    assert isinstance(nf, nonlinear.NotFound)
    assert nf.n_shots == 61
    assert 0 not in nf.node_histogram
    s = nf.summary()
    assert s["found"] is False and set(s) == {"lambda", "delta", "k", "found", "node_histogram"}


def test_solution_canonical_sign(zero):
    sol = nonlinear.find_solution(zero, 5.0, -1, 2)
    u = sol.u.values
    nz = np.argmax(np.abs(u) > 1e-12 * np.max(np.abs(u)))
    assert u[nz] > 0


def test_solution_with_robin_angle(zero):
    alpha = 2.0
    lam1 = eigen.eigenvalue(zero, 1, alpha)
    sol = nonlinear.find_solution(zero, lam1 + 1.0, -1, 1, alpha)
    assert isinstance(sol, nonlinear.NonlinearSolution)
    assert sol.node_count == 0
    assert sol.residual <= 1e-8
    # both boundary conditions hold
    u = sol.u.values
    qhat = core.potential_from_values(sol.u.grid, zero.values + u**2, "q0+u^2")
    assert eigen.eigenvalue(qhat, 1, alpha) == pytest.approx(lam1 + 1.0, abs=1e-6)


def test_resubstitution_defect_bound(zero):
    for k, lam, delta in ((1, 2.0, -1), (3, 5.0, +1), (5, 5.0, +1)):
        sol = nonlinear.find_solution(zero, lam, delta, k)
        sup = np.max(np.abs(sol.u.values))
        assert nonlinear.resubstitution_defect(sol, zero) <= 1e-6 * (1 + sup**3)


def test_smallest_amplitude_branch_is_returned(zero):
    # scan grid intentionally includes huge amplitudes; the canonical
    # representative must still be the small one
    sol = nonlinear.find_solution(zero, 2.0, -1, 1)
    amp_ref = oracles.cubic_dirichlet_amplitude(2.0, -1, 1)
    assert np.max(np.abs(sol.u.values)) <= amp_ref * 1.001


# ---------------------------------------------------------------------------
# scans
# ---------------------------------------------------------------------------


def test_scan_at_eigenvalue_defocusing(zero):
    report = nonlinear.nonexistence_scan(zero, 1.0, +1, 1)
    assert report.forbidden_count == 0
    assert len(report.shots) == 122
    assert not report.unresolved


def test_scan_at_second_eigenvalue_focusing(zero):
    report = nonlinear.nonexistence_scan(zero, 4.0, -1, 2)
    assert report.forbidden_count == 0
    # the 0-node branch is allowed there and the scan should have found it
    assert any(s.node_count == 0 for s in report.solutions)


def test_scan_above_second_eigenvalue_defocusing(rf3):
    lam2 = eigen.eigenvalue(rf3, 2)
    report = nonlinear.nonexistence_scan(rf3, lam2 + 0.5, +1, 2)
    assert report.forbidden_count == 0


def test_scan_report_serialization(tmp_path, zero):
    report = nonlinear.nonexistence_scan(zero, 1.0, +1, 1)
    report.save_csv(tmp_path / "shots.csv")
    report.save_json(tmp_path / "scan.json")
    header = (tmp_path / "shots.csv").read_text().splitlines()[0]
    assert header == "s,terminal_defect,node_count,blowup,blowup_x,theta_end"
    import json

    payload = json.loads((tmp_path / "scan.json").read_text())
    assert set(payload) >= {"lambda", "delta", "k", "found", "node_histogram"}


def test_scan_mirrors_odd_symmetry(zero):
    report = nonlinear.nonexistence_scan(zero, 2.5, -1, 2)
    neg = [s for s in report.shots if s.s < 0]
    pos = [s for s in report.shots if s.s > 0]
    assert len(neg) == len(pos) == 61
    for a, b in zip(sorted(neg, key=lambda s: -s.s), sorted(pos, key=lambda s: s.s)):
        assert a.node_count == b.node_count


# ---------------------------------------------------------------------------
# multiplicity
# ---------------------------------------------------------------------------


def test_multiplicity_window_between_second_and_third(zero, grid):
    sols = nonlinear.multiplicity_scan(zero, 5.0, l_max=5)
    got = {(s.delta, s.node_count) for s in sols}
    assert got == {(-1, 0), (-1, 1), (+1, 2), (+1, 3), (+1, 4)}
    for i in range(len(sols)):
        for j in range(i + 1, len(sols)):
            d = core.l2_norm(core.GridFunction(grid, sols[i].u.values - sols[j].u.values))
            assert d >= 1e-4


def test_multiplicity_below_spectrum(zero):
    sols = nonlinear.multiplicity_scan(zero, 0.5, l_max=3)
    got = {(s.delta, s.node_count) for s in sols}
    assert got == {(+1, 0), (+1, 1), (+1, 2)}


def test_multiplicity_rejects_spectral_lambda(zero):
    with pytest.raises(ValueError):
        nonlinear.multiplicity_scan(zero, 4.0, l_max=3)


def test_bifurcation_amplitude_shrinks(zero):
    sups = []
    for lam in (1.5, 1.1):
        sol = nonlinear.find_solution(zero, lam, -1, 1)
        sups.append(np.max(np.abs(sol.u.values)))
    assert sups[1] < sups[0]

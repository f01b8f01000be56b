import math

import numpy as np
import pytest

from spectra_inv import core, eigen, inverse, nonlinear

import oracles


@pytest.fixture(scope="module")
def placed_k1(zero):
    """q0 = 0, k = 1, target 2: both routes, shared by several tests."""
    re_ = inverse.solve_explicit(zero, 1, 2.0)
    rd = inverse.solve_direct(zero, 1, 2.0)
    return re_, rd


# ---------------------------------------------------------------------------
# trivial branch
# ---------------------------------------------------------------------------


def test_trivial_case_both_routes(zero):
    lam1 = eigen.eigenvalue(zero, 1)
    for r in (inverse.solve_explicit(zero, 1, lam1), inverse.solve_direct(zero, 1, lam1)):
        assert r.delta == 0
        assert r.nu == 0.0
        assert r.distance <= 1e-12
        assert r.u_hat is None
        assert np.array_equal(r.q_hat.values, zero.values)
        assert inverse.verify_nodal(r) is True


def test_trivial_case_rejects_residual_queries(zero):
    lam1 = eigen.eigenvalue(zero, 1)
    r = inverse.solve_explicit(zero, 1, lam1)
    with pytest.raises(ValueError):
        inverse.optimality_residual(zero, r)


# ---------------------------------------------------------------------------
# explicit route
# ---------------------------------------------------------------------------


def test_explicit_route_ground_state(zero, grid, placed_k1):
    r, _ = placed_k1
    assert r.route == "explicit"
    assert r.delta == -1  # target above lam_1(q0) = 1
    # closed-form identity between the minimizer and the witness
    assert np.max(np.abs(r.q_hat.values - zero.values + r.delta * r.u_hat.values**2)) == 0.0
    assert r.nu == pytest.approx(-core.l2_norm(r.u_hat) ** 2, abs=1e-12)
    # the reconstructed potential carries the target eigenvalue
    assert eigen.eigenvalue(r.q_hat, 1) == pytest.approx(2.0, abs=1e-6)
    assert r.diagnostics["feasibility"] <= 1e-6
    # squared distance consistent with the witness
    u2 = core.GridFunction(grid, r.u_hat.values**2)
    assert r.distance == pytest.approx(core.l2_norm(u2) ** 2, rel=1e-12)


def test_explicit_route_against_amplitude_oracle(placed_k1):
    r, _ = placed_k1
    amp_ref = oracles.cubic_dirichlet_amplitude(2.0, -1, 1)
    assert np.max(np.abs(r.u_hat.values)) == pytest.approx(amp_ref, abs=1e-8)


def test_explicit_route_second_index_below(zero):
    r = inverse.solve_explicit(zero, 2, 3.0)
    assert r.delta == +1  # target below lam_2(q0) = 4
    assert nonlinear.count_sign_changes(r.u_hat.values, drop_endpoints=True) == 1
    assert eigen.eigenvalue(r.q_hat, 2) == pytest.approx(3.0, abs=1e-6)
    assert inverse.verify_nodal(r) is True


def test_explicit_route_nontrivial_reference(grid):
    q0 = core.preset_potential("random_fourier", [2.0, 6], grid, seed=5)
    lam2 = eigen.eigenvalue(q0, 2)
    r = inverse.solve_explicit(q0, 2, lam2 + 1.0)
    assert r.delta == -1
    assert r.diagnostics["feasibility"] <= 1e-6
    assert inverse.verify_nodal(r) is True


def test_explicit_raises_when_no_witness(zero, monkeypatch):
    nf = nonlinear.NotFound(
        lam=2.0, delta=-1, k=1, s_min=1e-4, s_max=1e3, n_shots=61, node_histogram={}
    )
    monkeypatch.setattr(inverse, "find_solution", lambda *a, **k: nf)
    with pytest.raises(inverse.ReconstructionError):
        inverse.solve_explicit(zero, 1, 2.0)


# ---------------------------------------------------------------------------
# direct route
# ---------------------------------------------------------------------------


def test_direct_route_agrees_with_explicit(zero, grid, placed_k1):
    re_, rd = placed_k1
    assert rd.route == "direct"
    assert rd.diagnostics["converged"] is True
    assert rd.diagnostics["constraint_defect"] <= 1e-8
    assert rd.diagnostics["kkt_residual"] <= 1e-6
    assert abs(rd.distance - re_.distance) <= 1e-4
    gap = core.l2_norm(core.GridFunction(grid, rd.q_hat.values - re_.q_hat.values))
    assert gap <= 1e-3
    assert rd.delta == re_.delta
    assert rd.nu == pytest.approx(re_.nu, abs=1e-4)


def test_direct_route_off_grid_reference(grid):
    q0 = core.preset_potential("random_fourier", [2.0, 6], grid, seed=5)
    lam1 = eigen.eigenvalue(q0, 1)
    re_ = inverse.solve_explicit(q0, 1, lam1 - 1.0)
    rd = inverse.solve_direct(q0, 1, lam1 - 1.0)
    assert abs(rd.distance - re_.distance) <= 1e-4
    gap = core.l2_norm(core.GridFunction(grid, rd.q_hat.values - re_.q_hat.values))
    assert gap <= 1e-3


def test_optimizer_options_validation():
    with pytest.raises(ValueError):
        inverse.OptimizerOptions(penalty_init=0.0)
    with pytest.raises(ValueError):
        inverse.OptimizerOptions(penalty_growth=1.0)
    with pytest.raises(ValueError):
        inverse.OptimizerOptions(step_rule="newton")


def test_direct_route_custom_options(zero):
    opts = inverse.OptimizerOptions(max_outer=3, grad_tol=1e-5)
    r = inverse.solve_direct(zero, 1, 2.0, opts=opts)
    assert r.diagnostics["outer_iters"] <= 3
    assert r.diagnostics["feasibility"] <= 1e-6


# ---------------------------------------------------------------------------
# certificates
# ---------------------------------------------------------------------------


def test_optimality_residual_explicit_route(zero, placed_k1):
    r, _ = placed_k1
    assert inverse.optimality_residual(zero, r) <= 1e-6


def test_optimality_residual_direct_route(zero, placed_k1):
    _, rd = placed_k1
    assert inverse.optimality_residual(zero, rd) <= 1e-3


def test_optimality_residual_detects_perturbation(zero, grid, placed_k1):
    r, _ = placed_k1
    qp = core.Potential(
        core.GridFunction(grid, r.q_hat.values + 0.1 * np.sin(5 * grid.nodes)), "pert"
    )
    fake = inverse.InverseResult(
        q_hat=qp,
        k=1,
        lambda_star=2.0,
        distance=0.0,
        delta=-1,
        nu=r.nu,
        u_hat=r.u_hat,
        route="explicit",
        diagnostics={},
    )
    assert inverse.optimality_residual(zero, fake) > 1e-2


def test_local_optimality_probe(zero, placed_k1):
    r, _ = placed_k1
    increments = inverse.local_optimality_probe(zero, r, n_probes=5, seed=1)
    assert len(increments) == 5
    assert min(increments) >= -1e-6


def test_verify_nodal_both_routes(placed_k1):
    re_, rd = placed_k1
    assert inverse.verify_nodal(re_) is True
    assert inverse.verify_nodal(rd) is True


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------


def test_summary_keys(placed_k1):
    r, _ = placed_k1
    s = r.summary()
    assert set(s) == {"k", "lambda_star", "delta", "nu", "distance", "route", "diagnostics"}


def test_save_result_writes_certificate(tmp_path, zero, placed_k1):
    r, _ = placed_k1
    summary = inverse.save_result(r, tmp_path, q0=zero, prefix="explicit_")
    for name in ("explicit_summary.json", "explicit_q_hat.csv", "explicit_q0.csv",
                 "explicit_u_hat.csv", "explicit_phi_k.csv"):
        assert (tmp_path / name).exists()
    assert summary["route"] == "explicit"
    # the written minimizer reloads to the same eigenvalue
    back = core.potential_from_csv(tmp_path / "explicit_q_hat.csv", zero.grid)
    assert eigen.eigenvalue(back, 1) == pytest.approx(2.0, abs=1e-6)

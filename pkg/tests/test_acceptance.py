"""Acceptance battery: every numbered criterion at its stated tolerance.

Each test prints one PASS/FAIL line (run with ``pytest -s`` to see them all
live) and asserts the criterion outcome; the measured numbers ride along in
the assertion message.  The same criteria back ``spectra-inv check``.
"""

import pytest

from spectra_inv import acceptance


@pytest.fixture(scope="module")
def ws():
    return acceptance.Workspace(grid_n=2000)


def _run(criterion, ws):
    result = criterion(ws)
    print(f"\nACCEPTANCE {result.line()}  {result.details}")
    assert result.passed, f"{result.name}: {result.details}"
    return result


def test_criterion_01_linear_spectrum(ws):
    r = _run(acceptance.criterion_01_linear_spectrum, ws)
    assert r.details["max_abs_error"] <= 1e-8


def test_criterion_02_eigenvalue_derivative(ws):
    r = _run(acceptance.criterion_02_eigenvalue_derivative, ws)
    assert r.details["max_rel_error"] <= 1e-4
    assert r.details["max_const_direction_error"] <= 1e-8


def test_criterion_03_reconstruction_roundtrip(ws):
    r = _run(acceptance.criterion_03_reconstruction_roundtrip, ws)
    assert r.details["max_feasibility_defect"] <= 1e-6
    assert r.details["max_identity_defect"] <= 1e-6


def test_criterion_04_route_agreement(ws):
    r = _run(acceptance.criterion_04_route_agreement, ws)
    assert r.details["max_distance_gap"] <= 1e-4
    assert r.details["max_minimizer_gap"] <= 1e-3


def test_criterion_05_optimality_structure(ws):
    r = _run(acceptance.criterion_05_optimality_structure, ws)
    assert r.details["max_explicit_residual"] <= 1e-6
    assert r.details["max_direct_residual"] <= 1e-3


def test_criterion_06_nonexistence_scans(ws):
    r = _run(acceptance.criterion_06_nonexistence_scans, ws)
    assert r.details["forbidden_total"] == 0
    assert r.details["scans"] == 16


def test_criterion_07_multiplicity(ws):
    r = _run(acceptance.criterion_07_multiplicity, ws)
    assert r.details["min_pairwise_l2"] >= 1e-4


def test_criterion_08_trivial_case(ws):
    r = _run(acceptance.criterion_08_trivial_case, ws)
    assert r.details["max_distance"] <= 1e-12


def test_criterion_09_bifurcation_limit(ws):
    r = _run(acceptance.criterion_09_bifurcation_limit, ws)
    sups = r.details["sup_norms"]
    assert all(b < a for a, b in zip(sups, sups[1:]))


def test_criterion_10_oracle_equivalence(ws):
    r = _run(acceptance.criterion_10_oracle_equivalence, ws)
    assert r.details["max_abs_gap"] <= 1e-5


def test_criterion_11_uniform_lower_bound(ws):
    r = _run(acceptance.criterion_11_uniform_lower_bound, ws)
    assert r.details["min_lambda_1"] >= -30.0

import math

import numpy as np
import pytest

import pep_forge as pf
from pep_forge import ipm
from pep_forge.sdp import StandardSDP


def max_eig_sdp(diag=(1.0, 2.0)):
    n = len(diag)
    A = np.zeros((1, n, n))
    A[0] = np.eye(n)
    return StandardSDP.simple([n], [A], [-np.diag(diag)], b=[1.0])


def theta_c5_sdp():
    n = 5
    edges = [(0, 1), (1, 2), (2, 3), (3, 4), (4, 0)]
    A = np.zeros((1 + len(edges), n, n))
    A[0] = np.eye(n)
    for k, (i, j) in enumerate(edges):
        A[1 + k, i, j] = 0.5
        A[1 + k, j, i] = 0.5
    b = np.zeros(1 + len(edges))
    b[0] = 1.0
    return StandardSDP.simple([n], [A], [-np.ones((n, n))], b=b)


def test_max_eigenvalue_exact():
    sol = ipm.solve(max_eig_sdp(), gap_tol=1e-10, feas_tol=1e-10)
    assert sol.status == "optimal"
    assert sol.objective_value == pytest.approx(2.0, abs=1e-8)


def test_lovasz_theta_c5():
    sol = ipm.solve(theta_c5_sdp())
    assert sol.status == "optimal"
    assert sol.objective_value == pytest.approx(math.sqrt(5.0), abs=1e-6)


def test_free_variable_lp():
    # maximize t subject to t <= 3 with a slack and a dummy psd block
    A = np.zeros((1, 1, 1))
    s = StandardSDP.simple(
        [1],
        [A],
        [np.zeros((1, 1))],
        b=[3.0],
        A_lp=np.array([[1.0]]),
        B_free=np.array([[1.0]]),
        c_free=np.array([-1.0]),
    )
    sol = ipm.solve(s)
    assert sol.status == "optimal"
    assert sol.objective_value == pytest.approx(3.0, abs=1e-7)
    assert sol.free_values[0] == pytest.approx(3.0, abs=1e-6)


def test_primal_infeasible_detected():
    A = np.zeros((1, 2, 2))
    A[0] = np.eye(2)
    s = StandardSDP.simple([2], [A], [np.zeros((2, 2))], b=[-1.0])
    sol = ipm.solve(s)
    assert sol.status == "primal-infeasible"


def test_unbounded_detected():
    A = np.zeros((1, 2, 2))
    A[0, 1, 1] = 1.0
    C = np.zeros((2, 2))
    C[0, 0] = -1.0
    s = StandardSDP.simple([2], [A], [C], b=[1.0])
    sol = ipm.solve(s)
    assert sol.status == "dual-infeasible"


def test_determinism():
    s = theta_c5_sdp()
    a, b = ipm.solve(s), ipm.solve(s)
    assert a.objective_value == b.objective_value
    assert a.iterations == b.iterations
    assert np.array_equal(a.gram, b.gram)
    assert np.array_equal(a.y, b.y)


def test_objective_scaling():
    base = ipm.solve(theta_c5_sdp()).objective_value
    scaled_sdp = theta_c5_sdp()
    scaled_sdp.C_psd[0] = 5.0 * scaled_sdp.C_psd[0]
    scaled = ipm.solve(scaled_sdp).objective_value
    assert scaled == pytest.approx(5.0 * base, rel=1e-7)


def test_weak_duality_on_solved_instances():
    for s in (max_eig_sdp(), theta_c5_sdp(), max_eig_sdp((3.0, 1.0, 0.5))):
        sol = ipm.solve(s)
        assert sol.status == "optimal"
        # maximization: primal iterate value below the dual bound
        assert sol.objective_value <= sol.dual_objective + 1e-8 * (
            1 + abs(sol.objective_value)
        )


def test_optimal_contract_fields():
    sol = ipm.solve(theta_c5_sdp())
    v = abs(sol.objective_value)
    assert sol.complementarity <= 1e-8 * (1 + v)
    assert sol.duality_gap <= 5e-8 * (1 + v)
    assert sol.kkt_residual <= 1e-8 * (1 + np.abs(sol.sdp.b).max() + 1.0)


def test_solve_log_records():
    n0 = len(ipm.SOLVE_LOG)
    ipm.solve(max_eig_sdp())
    assert len(ipm.SOLVE_LOG) == n0 + 1
    rec = ipm.SOLVE_LOG[-1]
    assert rec["status"] == "optimal"
    assert rec["value"] == pytest.approx(2.0, abs=1e-7)


class TestDualReport:
    def test_gradient_pep_multiplier_signs(self):
        spec = pf.MethodSpec(
            N=1, steps=(1.0,), family=pf.ClassSpec("smooth-strongly-convex", mu=0.0, L=1.0)
        )
        p = pf.build_gradient_method(spec, "tight")
        sol = ipm.solve(pf.compile(p))
        report = pf.dual_report(sol, p)
        assert len(report) == len(p.constraints)
        mults = dict(report)
        for con in p.constraints:
            if con.kind == "le0":
                assert mults[con.label] >= -1e-8
        # the initial condition is active: its multiplier is the bound's
        # sensitivity to R^2, strictly positive here
        assert mults["init"] > 1e-3

    def test_requires_optimal_status(self):
        A = np.zeros((1, 2, 2))
        A[0] = np.eye(2)
        s = StandardSDP.simple([2], [A], [np.zeros((2, 2))], b=[-1.0])
        sol = ipm.solve(s)
        with pytest.raises(ValueError, match="optimal"):
            pf.dual_report(sol)

    def test_lmi_multiplier_reported_nonnegative(self):
        xs = [pf.BasisLabel("auxiliary", f"x{i}") for i in range(1)]
        ys = [pf.BasisLabel("operator-output", f"y{i}") for i in range(1)]
        from pep_forge.families import LinearMapDataHandle, linear_operator_constraints
        from pep_forge.gram import Constraint, QuadExpr, build_problem, sq_norm

        handle = LinearMapDataHandle(
            ((pf.VectorExpr.of(xs[0]), pf.VectorExpr.of(ys[0])),), (), bound=1.0
        )
        cons = linear_operator_constraints(handle)
        cons.append(
            Constraint(
                "le0", sq_norm(pf.VectorExpr.of(xs[0])) - QuadExpr.of_const(1.0), "ball"
            )
        )
        p = build_problem(
            xs + ys, [], cons, sq_norm(pf.VectorExpr.of(ys[0]))
        )
        sol = ipm.solve(pf.compile(p))
        assert sol.status == "optimal"
        assert sol.objective_value == pytest.approx(1.0, abs=1e-6)
        mults = dict(pf.dual_report(sol, p))
        assert mults["M:fwd-lmi"] >= -1e-8


def test_rejects_empty_program():
    with pytest.raises(ValueError):
        ipm.solve(StandardSDP.simple([2], [np.zeros((0, 2, 2))], [np.zeros((2, 2))], b=[]))

import math

import numpy as np
import pytest

from pep_forge.families import (
    INF,
    ClassSpec,
    ConsensusData,
    ConsensusDataHandle,
    FunctionData,
    FunctionDataHandle,
    LinearMapData,
    LinearMapDataHandle,
    OperatorData,
    OperatorDataHandle,
    check_numeric,
    consensus_null_directions,
    count_cycles,
    cyclic_monotonicity_constraints,
    function_constraints,
    linear_operator_constraints,
    network_matrix_constraints,
    smooth_strongly_convex_constraints,
)
from pep_forge.gram import BasisLabel, BuildError, ScalarVar, VectorExpr


def fdata(rows):
    xs = np.array([[r[0]] for r in rows], dtype=float)
    gs = np.array([[r[1]] for r in rows], dtype=float)
    fs = np.array([r[2] for r in rows], dtype=float)
    return FunctionData(xs, gs, fs)


SMOOTH = ClassSpec("smooth-strongly-convex", mu=0.0, L=1.0)
RELAXED = ClassSpec("relaxed-smooth-convex", L=1.0)


class TestSmoothConvex:
    def test_single_point_generates_nothing(self):
        rep = check_numeric(fdata([(0.0, 0.0, 0.0)]), SMOOTH)
        assert rep.feasible and rep.checked == 0

    def test_two_point_witness_infeasible_tight(self):
        # the admissible-region witness: feasible for the relaxed pair
        # constraints but not interpolable
        data = fdata([(0.0, 1.0, 0.0), (1.0, 1.5, 1.05)])
        rep = check_numeric(data, SMOOTH)
        assert not rep.feasible
        assert rep.max_residual == pytest.approx(0.075, abs=1e-12)
        assert any("interp(1,0)" in lab for lab, _ in rep.violations)
        assert check_numeric(data, RELAXED).feasible

    def test_two_point_witness_feasible_both(self):
        data = fdata([(0.0, 1.0, 0.0), (1.0, 1.5, 1.2)])
        assert check_numeric(data, SMOOTH).feasible
        assert check_numeric(data, RELAXED).feasible

    def test_relaxed_lipschitz_violation(self):
        rep = check_numeric(fdata([(0.0, 0.0, 0.0), (1.0, 2.0, 0.0)]), RELAXED)
        assert not rep.feasible
        assert rep.max_residual == pytest.approx(3.0, abs=1e-12)  # 4 - 1

    def test_relaxed_single_point_no_constraints(self):
        rep = check_numeric(fdata([(0.5, 0.3, 0.1)]), RELAXED)
        assert rep.feasible and rep.checked == 0

    def test_tolerance_inf_always_feasible(self):
        data = fdata([(0.0, 1.0, 0.0), (1.0, 1.5, 1.05)])
        assert check_numeric(data, SMOOTH, tol=math.inf).feasible

    def test_all_zero_data_feasible(self):
        data = fdata([(0.0, 0.0, 0.0), (0.0, 0.0, 0.0)])
        for mu, L in ((0.0, 1.0), (-1.0, 2.0), (0.0, INF)):
            spec = ClassSpec("smooth-strongly-convex", mu=mu, L=L)
            assert check_numeric(data, spec).feasible

    def test_mu_greater_than_L_rejected(self):
        with pytest.raises(BuildError, match="mu <= L"):
            ClassSpec("smooth-strongly-convex", mu=2.0, L=1.0)

    def test_double_sentinel_rejected(self):
        with pytest.raises(BuildError):
            ClassSpec("smooth-strongly-convex", mu=-INF, L=INF)

    def test_strong_convexity_sentinel(self):
        # f = x^2 (mu = 2): feasible for mu <= 2, infeasible for mu = 3
        rows = [(x, 2 * x, x * x) for x in (-1.0, 0.5, 2.0)]
        ok = ClassSpec("smooth-strongly-convex", mu=2.0, L=INF)
        bad = ClassSpec("smooth-strongly-convex", mu=3.0, L=INF)
        assert check_numeric(fdata(rows), ok).feasible
        assert not check_numeric(fdata(rows), bad).feasible

    def test_weak_convexity_negative_mu(self):
        # f = -0.3 x^2 / 2 is smooth and weakly convex with mu = -0.3
        rows = [(x, -0.3 * x, -0.15 * x * x) for x in (-2.0, 0.0, 1.0)]
        spec = ClassSpec("smooth-strongly-convex", mu=-0.3, L=1.0)
        assert check_numeric(fdata(rows), spec).feasible
        tighter = ClassSpec("smooth-strongly-convex", mu=-0.1, L=1.0)
        assert not check_numeric(fdata(rows), tighter).feasible

    def test_smooth_nonconvex_sentinel(self):
        # mu = -inf keeps only the smoothness lower bound: quadratics with
        # curvature a <= L pass, a > L fails
        spec = ClassSpec("smooth-strongly-convex", mu=-INF, L=1.0)
        for a, feas in ((-5.0, True), (0.9, True), (1.5, False)):
            rows = [(x, a * x, 0.5 * a * x * x) for x in (-1.0, 0.3, 2.0)]
            assert check_numeric(fdata(rows), spec).feasible is feas

    def test_equal_curvature_behind_flag(self):
        rows = [(x, x, 0.5 * x * x) for x in (-1.0, 0.7)]
        with pytest.raises(BuildError, match="strict_equal_curvature"):
            check_numeric(fdata(rows), ClassSpec("smooth-strongly-convex", mu=1.0, L=1.0))
        spec = ClassSpec(
            "smooth-strongly-convex", mu=1.0, L=1.0, strict_equal_curvature=True
        )
        assert check_numeric(fdata(rows), spec).feasible
        # constant-function data is not interpolable by a curvature-1 quadratic
        flat = fdata([(0.0, 0.0, 0.0), (1.0, 0.0, 0.0)])
        assert not check_numeric(flat, spec).feasible


class TestCoherence:
    def test_residuals_match_direct_formula(self):
        # independent re-implementation of the interpolation inequality
        rng = np.random.default_rng(11)
        mu, L = 0.2, 2.0
        for _ in range(10):
            n, d = 4, 3
            xs = rng.normal(size=(n, d))
            gs = rng.normal(size=(n, d))
            fs = rng.normal(size=n)
            expected = 0.0
            for i in range(n):
                for j in range(n):
                    if i == j:
                        continue
                    dx = xs[i] - xs[j]
                    dg = gs[i] - gs[j]
                    val = (
                        fs[j]
                        - fs[i]
                        + gs[j] @ dx
                        + (dg @ dg) / (2 * (L - mu))
                        + mu * L * (dx @ dx) / (2 * (L - mu))
                        - mu * (dg @ dx) / (L - mu)
                    )
                    expected = max(expected, val)
            rep = check_numeric(
                FunctionData(xs, gs, fs), ClassSpec("smooth-strongly-convex", mu=mu, L=L)
            )
            assert rep.max_residual == pytest.approx(expected, rel=1e-12, abs=1e-13)


def random_smooth_convex_1d(rng, L):
    """Sample a 1-d convex L-smooth function as (value, gradient) callables."""
    kind = rng.integers(0, 3)
    if kind == 0:
        a = rng.uniform(0, L)
        b = rng.normal()
        return (lambda x: 0.5 * a * x * x + b * x, lambda x: a * x + b)
    if kind == 1:
        delta = rng.uniform(0.2, 2.0)

        def val(x):
            ax = abs(x)
            return 0.5 * L * x * x if ax <= delta else L * delta * ax - 0.5 * L * delta**2

        def grad(x):
            return L * x if abs(x) <= delta else L * delta * np.sign(x)

        return val, grad
    # softplus s(t) = log(1+e^t) has 0 < s'' <= 1/4, so (4L/beta^2) s(beta x)
    # is L-smooth convex
    beta = rng.uniform(0.5, 2.0)

    def val(x):
        return (4.0 * L / beta**2) * np.logaddexp(0.0, beta * x)

    def grad(x):
        return (4.0 * L / beta) * (1.0 / (1.0 + np.exp(-beta * x)))

    return val, grad


class TestNecessity:
    def test_function_family_necessity(self):
        rng = np.random.default_rng(2024)
        for _ in range(40):
            L = rng.uniform(0.5, 4.0)
            f, g = random_smooth_convex_1d(rng, L)
            xs = rng.uniform(-3, 3, size=rng.integers(2, 6))
            rows = [(x, g(x), f(x)) for x in xs]
            spec = ClassSpec("smooth-strongly-convex", mu=0.0, L=L)
            rep = check_numeric(fdata(rows), spec)
            assert rep.feasible, rep.violations

    def test_linear_map_necessity(self):
        rng = np.random.default_rng(5)
        for _ in range(40):
            d, dp = rng.integers(1, 5), rng.integers(1, 5)
            L = rng.uniform(0.3, 3.0)
            M = rng.normal(size=(dp, d))
            U, s, Vt = np.linalg.svd(M, full_matrices=False)
            M = (U * np.minimum(s, L * (1 - 1e-12))) @ Vt
            nf, na = rng.integers(1, 4), rng.integers(1, 4)
            X = rng.normal(size=(nf, d))
            Uad = rng.normal(size=(na, dp))
            data = LinearMapData(X, X @ M.T, Uad, Uad @ M, bound=L)
            rep = check_numeric(data, tol=1e-9)
            assert rep.feasible, rep.violations

    def test_consensus_necessity(self):
        rng = np.random.default_rng(17)
        for _ in range(40):
            A = int(rng.integers(2, 6))
            lam = rng.uniform(0.05, 0.95)
            d = int(rng.integers(1, 4))
            steps = int(rng.integers(1, 4))
            Q = np.linalg.qr(
                np.column_stack([np.ones(A) / math.sqrt(A), rng.normal(size=(A, A - 1))])
            )[0]
            if Q[0, 0] < 0:
                Q = -Q
            eigs = np.concatenate([[1.0], rng.uniform(-lam, lam, size=A - 1) * (1 - 1e-12)])
            W = Q @ np.diag(eigs) @ Q.T
            xs = rng.normal(size=(steps, A, d))
            ys = np.einsum("ab,ibd->iad", W, xs)
            rep = check_numeric(ConsensusData(xs, ys, lam), tol=1e-9)
            assert rep.feasible, rep.violations


class TestCyclic:
    def pairs(self, rows):
        xs = np.array([[r[0]] for r in rows], dtype=float)
        qs = np.array([[r[1]] for r in rows], dtype=float)
        return OperatorData(xs, qs)

    def test_two_cycle_equality_case(self):
        spec = ClassSpec("cyclically-monotone", mu=0.0, L=1.0, K=2)
        rep = check_numeric(self.pairs([(0.0, 0.0), (1.0, 1.0)]), spec)
        assert rep.feasible
        assert rep.max_residual == pytest.approx(0.0, abs=1e-15)

    def test_single_pair_no_cycles(self):
        spec = ClassSpec("cyclically-monotone", mu=0.0, L=1.0)
        rep = check_numeric(self.pairs([(0.3, 0.4)]), spec)
        assert rep.feasible and rep.checked == 0

    def test_cycle_count(self):
        assert count_cycles(4, 4) == 20
        assert count_cycles(4, 2) == 6
        assert count_cycles(4, 3) == 14

    def test_size_gate(self):
        labels = [BasisLabel("auxiliary", f"p{i}") for i in range(9)]
        qlabels = [BasisLabel("auxiliary", f"q{i}") for i in range(9)]
        handle = OperatorDataHandle(
            tuple((VectorExpr.of(a), VectorExpr.of(b)) for a, b in zip(labels, qlabels))
        )
        with pytest.raises(BuildError, match="cap"):
            cyclic_monotonicity_constraints(handle, 0.0, 1.0, max_cycle_len=3)
        cons = cyclic_monotonicity_constraints(
            handle, 0.0, 1.0, max_cycle_len=2, allow_large=True
        )
        assert len(cons) == 36  # C(9,2) directed 2-cycles

    def test_gradient_data_passes(self):
        # gradients of a smooth convex function are cyclically consistent
        rng = np.random.default_rng(3)
        for _ in range(10):
            a = rng.uniform(0.1, 1.0)
            xs = rng.normal(size=5)
            rows = [(x, a * x) for x in xs]
            spec = ClassSpec("cyclically-monotone", mu=0.0, L=1.0)
            assert check_numeric(self.pairs(rows), spec).feasible


class TestBoundedFamilies:
    def test_smooth_bounded_grad(self):
        spec = ClassSpec("smooth-bounded-grad", L=1.0, M=2.0)
        assert check_numeric(fdata([(0.0, 0.0, 0.0)]), spec).feasible
        rep = check_numeric(fdata([(0.0, 3.0, 0.0)]), spec)
        assert not rep.feasible  # |g| = M + 1 > M
        rep = check_numeric(fdata([(0.0, 0.0, 0.0), (1.0, 0.0, 1.0)]), spec)
        assert not rep.feasible
        assert rep.max_residual == pytest.approx(0.5, abs=1e-12)  # L <= L/2 fails by L/2

    def test_indicator(self):
        spec = ClassSpec("indicator-bounded", M=2.0)
        assert check_numeric(fdata([(0.0, 5.0, 0.0)]), spec).feasible
        assert not check_numeric(fdata([(0.0, 0.0, 1.0)]), spec).feasible
        # endpoints of C = [0, 1] with outward normals
        rows = [(0.0, -1.0, 0.0), (1.0, 1.0, 0.0)]
        assert check_numeric(fdata(rows), spec).feasible
        # inward-pointing normals violate the cone inequality
        rows = [(0.0, 1.0, 0.0), (1.0, -1.0, 0.0)]
        assert not check_numeric(fdata(rows), spec).feasible
        # radius violation
        assert not check_numeric(fdata([(3.0, 0.0, 0.0)]), spec).feasible


class TestOperators:
    def odata(self, rows):
        xs = np.array([[r[0]] for r in rows], dtype=float)
        qs = np.array([[r[1]] for r in rows], dtype=float)
        return OperatorData(xs, qs)

    def test_cocoercive_identity_tight(self):
        spec = ClassSpec("cocoercive", beta=1.0)
        rep = check_numeric(self.odata([(0.0, 0.0), (1.0, 1.0)]), spec)
        assert rep.feasible and rep.max_residual == pytest.approx(0.0, abs=1e-15)

    def test_cocoercive_violation(self):
        spec = ClassSpec("cocoercive", beta=1.0)
        rep = check_numeric(self.odata([(0.0, 0.0), (1.0, 2.0)]), spec)
        assert not rep.feasible
        assert rep.max_residual == pytest.approx(2.0, abs=1e-12)

    def test_monotone_single_pair(self):
        spec = ClassSpec("monotone", mu=0.0)
        assert check_numeric(self.odata([(0.4, -2.0)]), spec).feasible

    def test_lipschitz_operator(self):
        spec = ClassSpec("lipschitz-op", L=1.0)
        assert check_numeric(self.odata([(0.0, 0.0), (1.0, 0.9)]), spec).feasible
        assert not check_numeric(self.odata([(0.0, 0.0), (1.0, 1.1)]), spec).feasible

    def test_wrong_family_rejected(self):
        handle = OperatorDataHandle(
            ((VectorExpr.of(BasisLabel("auxiliary", "x")), VectorExpr.of(BasisLabel("auxiliary", "q"))),)
        )
        from pep_forge.families import operator_constraints

        with pytest.raises(BuildError, match="operator family"):
            operator_constraints(handle, SMOOTH)


class TestLinearMap:
    def test_scaled_identity_tight(self):
        L = 1.7
        data = LinearMapData(
            xs=np.array([[1.0, 0.0]]),
            ys=np.array([[L, 0.0]]),
            us=np.array([[1.0, 0.0]]),
            vs=np.array([[L, 0.0]]),
            bound=L,
        )
        rep = check_numeric(data)
        assert rep.feasible
        assert rep.max_residual == pytest.approx(0.0, abs=1e-9)

    def test_norm_violation(self):
        data = LinearMapData(
            xs=np.array([[1.0]]), ys=np.array([[1.4]]),
            us=np.zeros((0, 1)), vs=np.zeros((0, 1)), bound=1.0,
        )
        rep = check_numeric(data)
        assert not rep.feasible
        assert rep.max_residual == pytest.approx(1.4**2 - 1.0, abs=1e-12)

    def test_rotation_pair(self):
        data = LinearMapData(
            xs=np.array([[1.0, 0.0]]), ys=np.array([[0.0, 1.0]]),
            us=np.array([[0.0, 1.0]]), vs=np.array([[1.0, 0.0]]),
            bound=1.0,
        )
        assert check_numeric(data).feasible

    def test_empty_handle_rejected(self):
        with pytest.raises(BuildError, match="neither"):
            linear_operator_constraints(LinearMapDataHandle((), (), bound=1.0))


class TestConsensus:
    def test_opposite_pair_with_shrinkage(self):
        lam = 0.6
        v = np.array([1.0, -0.5])
        xs = np.stack([[v, -v]])
        ys = lam * xs
        rep = check_numeric(ConsensusData(xs, ys, lam))
        assert rep.feasible
        assert rep.max_residual == pytest.approx(0.0, abs=1e-12)

    def test_identity_consensus_needs_lam_one(self):
        v = np.array([1.0])
        xs = np.stack([[v, -v]])
        rep = check_numeric(ConsensusData(xs, xs, 0.5))
        assert not rep.feasible

    def test_averaging_to_zero(self):
        xs = np.array([[[1.0], [0.0], [-1.0]]])
        ys = np.zeros_like(xs)
        for lam in (0.0, 0.4):
            assert check_numeric(ConsensusData(xs, ys, lam)).feasible

    def test_lam_zero_null_directions(self):
        labels = [[BasisLabel("auxiliary", f"{n}{a}") for a in range(2)] for n in "xy"]
        handle = ConsensusDataHandle(
            steps=(
                tuple(
                    (VectorExpr.of(labels[0][a]), VectorExpr.of(labels[1][a]))
                    for a in range(2)
                ),
            ),
            agents=2,
            lam=0.0,
        )
        nulls = consensus_null_directions(handle)
        assert len(nulls) == 1 + 2  # average gap + centered outputs per agent
        assert len(consensus_null_directions(
            ConsensusDataHandle(handle.steps, 2, 0.5)
        )) == 1

    def test_bad_lam_rejected(self):
        with pytest.raises(BuildError, match="spectral bound"):
            ConsensusDataHandle((), agents=2, lam=1.0)


class TestMonotoneRelations:
    def test_tight_subset_of_relaxed(self):
        rng = np.random.default_rng(23)
        for _ in range(60):
            n = int(rng.integers(2, 5))
            xs = rng.normal(size=(n, 2))
            gs = rng.normal(size=(n, 2))
            fs = rng.normal(size=n) + 2.0
            data = FunctionData(xs, gs, fs)
            if check_numeric(data, SMOOTH).feasible:
                assert check_numeric(data, RELAXED).feasible

    def test_parameter_monotonicity(self):
        rng = np.random.default_rng(29)
        for _ in range(40):
            L = rng.uniform(0.5, 2.0)
            f, g = random_smooth_convex_1d(rng, L)
            xs = rng.uniform(-2, 2, size=3)
            data = fdata([(x, g(x), f(x)) for x in xs])
            base = ClassSpec("smooth-strongly-convex", mu=0.0, L=L)
            wider = ClassSpec("smooth-strongly-convex", mu=-0.5, L=2 * L)
            assert check_numeric(data, base).feasible
            assert check_numeric(data, wider).feasible


def test_generator_labels_carry_point_names():
    x = [BasisLabel("auxiliary", f"x{i}") for i in range(2)]
    g = [BasisLabel("auxiliary", f"g{i}") for i in range(2)]
    f = [ScalarVar(f"f{i}") for i in range(2)]
    h = FunctionDataHandle(
        tuple((VectorExpr.of(x[i]), VectorExpr.of(g[i]), f[i]) for i in range(2)),
        name="phi",
        point_names=("0", "*"),
    )
    cons = smooth_strongly_convex_constraints(h, 0.0, 1.0)
    labels = {c.label for c in cons}
    assert labels == {"phi:interp(0,*)", "phi:interp(*,0)"}

import math

import numpy as np
import pytest

import pep_forge as pf
from pep_forge import recover
from pep_forge.families import ConsensusDataHandle
from pep_forge.gram import BasisLabel, ScalarVar, VectorExpr

SMOOTH = pf.ClassSpec("smooth-strongly-convex", mu=0.0, L=1.0)


def solved_gradient(N=2, h=1.0, rep="tight", R=1.0):
    spec = pf.MethodSpec(N=N, steps=(h,), family=SMOOTH, R=R)
    p = pf.build_gradient_method(spec, rep)
    sol = pf.solve(pf.compile(p))
    assert sol.status == "optimal"
    return p, sol


class TestFactorGram:
    def test_identity(self):
        V = recover.factor_gram(np.eye(3))
        assert V.shape == (3, 3)
        assert V @ V.T == pytest.approx(np.eye(3), abs=1e-12)

    def test_rank_one_ones(self):
        V = recover.factor_gram(np.ones((3, 3)))
        assert V.shape == (3, 1)
        assert V @ V.T == pytest.approx(np.ones((3, 3)), abs=1e-10)

    def test_rejects_indefinite(self):
        G = np.diag([1.0, -0.5])
        with pytest.raises(recover.NumericalFailure, match="not psd"):
            recover.factor_gram(G)

    def test_small_negative_eigenvalue_tolerated(self):
        G = np.diag([1.0, -1e-9])
        V = recover.factor_gram(G, rank_tol=1e-7)
        assert V.shape == (2, 1)

    def test_zero_matrix(self):
        V = recover.factor_gram(np.zeros((4, 4)))
        assert V.shape == (4, 0)


class TestRoundTrip:
    def test_gradient_pep_certified_tight(self):
        p, sol = solved_gradient(2, 1.0)
        inst = recover.recover_instance(sol, p)
        rep = recover.verify_instance(inst, p, sdp_value=sol.objective_value)
        assert rep.certification == recover.CERT_TIGHT
        assert rep.max_residual <= 1e-6
        assert rep.objective_gap <= 1e-6 * (1 + abs(sol.objective_value))

    def test_gradient_pep_various_steps(self):
        for h in (0.4, 1.2, 1.9):
            p, sol = solved_gradient(1, h)
            inst = recover.recover_instance(sol, p)
            rep = recover.verify_instance(inst, p, sdp_value=sol.objective_value)
            assert rep.certified, (h, rep.notes, rep.violations)

    def test_relaxed_never_certified(self):
        p, sol = solved_gradient(2, 1.0, rep="relaxed")
        inst = recover.recover_instance(sol, p)
        rep = recover.verify_instance(inst, p, sdp_value=sol.objective_value)
        assert rep.certification == recover.CERT_UPPER
        assert "relaxation" in rep.notes

    def test_fvals_anchored_at_zero(self):
        p, sol = solved_gradient(2, 1.0)
        inst = recover.recover_instance(sol, p)
        fstar = p.meta["fval_groups"][0]["anchor"]
        assert inst.fvals[fstar] == 0.0

    def test_low_rank_worst_case(self):
        p, sol = solved_gradient(10, 1.0)
        inst = recover.recover_instance(sol, p)
        # observed: gradient-descent worst cases are essentially 1-2 dim
        assert inst.dimension <= 4

    def test_instance_file_roundtrip(self, tmp_path):
        p, sol = solved_gradient(2, 1.0)
        inst = recover.recover_instance(sol, p)
        path = tmp_path / "inst.txt"
        recover.write_instance(inst, p, str(path))
        loaded = recover.read_instance(str(path), p)
        assert loaded.dimension == inst.dimension
        for lab in p.basis:
            assert loaded.vectors[lab] == pytest.approx(inst.vectors[lab], abs=1e-15)
        for var in p.fvals:
            assert loaded.fvals[var] == pytest.approx(inst.fvals[var], abs=1e-15)


def consensus_instance(lam=0.4, v=None):
    """Hand-built one-step two-agent instance: x = (v, -v), y = (lam v, -lam v)."""
    if v is None:
        v = np.array([1.0, 0.0])
    xs = [BasisLabel("auxiliary", f"x{a}") for a in range(2)]
    ys = [BasisLabel("operator-output", f"y{a}") for a in range(2)]
    handle = ConsensusDataHandle(
        ((
            (VectorExpr.of(xs[0]), VectorExpr.of(ys[0])),
            (VectorExpr.of(xs[1]), VectorExpr.of(ys[1])),
        ),),
        agents=2,
        lam=lam,
    )
    vectors = {xs[0]: v, xs[1]: -v, ys[0]: lam * v, ys[1]: -lam * v}
    inst = recover.WorstCaseInstance(dimension=2, vectors=vectors, fvals={})
    return inst, handle


class TestNetworkRecovery:
    def test_closed_form_two_agents(self):
        lam = 0.4
        inst, handle = consensus_instance(lam)
        net = recover.recover_network_matrix(inst, handle, lam, tol=1e-8)
        assert net.success
        assert net.residual == pytest.approx(0.0, abs=1e-10)
        W_expect = np.array([[(1 + lam) / 2, (1 - lam) / 2], [(1 - lam) / 2, (1 + lam) / 2]])
        assert net.W == pytest.approx(W_expect, abs=1e-9)
        assert np.sort(net.eigenvalues) == pytest.approx([lam, 1.0], abs=1e-9)

    def test_average_violation_has_residual(self):
        lam = 0.4
        inst, handle = consensus_instance(lam)
        eps = 1e-2
        for lab in inst.vectors:
            if lab.tag.startswith("y"):
                inst.vectors[lab] = inst.vectors[lab] + eps * np.array([0.0, 1.0])
        net = recover.recover_network_matrix(inst, handle, lam, tol=1e-8)
        # any row-stochastic symmetric W preserves averages exactly, so the
        # shifted outputs cannot be fit below the average defect
        assert net.residual >= eps

    def test_underdetermined_flagged(self):
        xs = [BasisLabel("auxiliary", f"x{a}") for a in range(3)]
        ys = [BasisLabel("operator-output", f"y{a}") for a in range(3)]
        handle = ConsensusDataHandle(
            (tuple((VectorExpr.of(xs[a]), VectorExpr.of(ys[a])) for a in range(3)),),
            agents=3,
            lam=0.9,
        )
        vals = np.array([1.3, 0.2, -1.5])
        W = recover.recover_network_matrix
        inst = recover.WorstCaseInstance(
            dimension=1,
            vectors={**{xs[a]: np.array([vals[a]]) for a in range(3)},
                     **{ys[a]: np.array([vals[a] * 0.5 + 0.1]) for a in range(3)}},
            fvals={},
        )
        net = W(inst, handle, 0.9, tol=10.0)
        assert net.underdetermined

    def test_spectrum_violation_fails(self):
        # identity consensus on non-consensual inputs needs lam = 1
        inst, handle = consensus_instance(0.4)
        for a in range(2):
            x = [lab for lab in inst.vectors if lab.tag == f"x{a}"][0]
            y = [lab for lab in inst.vectors if lab.tag == f"y{a}"][0]
            inst.vectors[y] = inst.vectors[x]
        net = recover.recover_network_matrix(inst, handle, 0.4, tol=1e-8)
        assert not net.success
        assert "spectrum" in net.message


class TestDGDEndToEnd:
    def test_spectral_certification_and_recurrence(self):
        spec = pf.DGDSpec(N=2, agents=2, alpha=0.5, lam=0.5)
        p = pf.build_dgd_spectral(spec)
        sol = pf.solve(pf.compile(p))
        assert sol.status == "optimal"
        inst = recover.recover_instance(sol, p)
        handle = p.meta["consensus_handle"]
        net = recover.recover_network_matrix(inst, handle, spec.lam, tol=1e-5)
        rep = recover.verify_instance(
            inst, p, sdp_value=sol.objective_value, network=net
        )
        if net.success:
            assert rep.certification == recover.CERT_TIGHT
            # replay the recurrence with the recovered pieces.  The gradient
            # steps are affine identities of the representation, so they
            # reproduce the iterates to numerical zero; the consensus legs
            # reproduce them up to the W-fit residual.
            W = net.W
            tags = {b.tag: b for b in p.basis}
            for i, step in enumerate(handle.steps):
                xs = np.stack([inst.vector_value(x) for x, _ in step])
                ys = np.stack([inst.vector_value(y) for _, y in step])
                assert np.abs(ys - W @ xs).max() <= max(3 * net.residual, 1e-8)
                if i + 1 < len(handle.steps):
                    nxt = np.stack(
                        [inst.vector_value(x) for x, _ in handle.steps[i + 1]]
                    )
                    grads = np.stack(
                        [inst.vectors[tags[f"g[{a},{i}]"]] for a in range(spec.agents)]
                    )
                    assert np.abs(nxt - (ys - spec.alpha * grads)).max() <= 1e-8
        else:
            assert rep.certification == recover.CERT_UPPER

    def test_n0_spectral_needs_no_recovery(self):
        spec = pf.DGDSpec(N=0, agents=2, alpha=0.5, lam=0.5)
        p = pf.build_dgd_spectral(spec)
        sol = pf.solve(pf.compile(p))
        inst = recover.recover_instance(sol, p)
        rep = recover.verify_instance(inst, p, sdp_value=sol.objective_value)
        assert rep.certification == recover.CERT_TIGHT

    def test_without_network_result_upper_bound_only(self):
        spec = pf.DGDSpec(N=2, agents=2, alpha=0.5, lam=0.5)
        p = pf.build_dgd_spectral(spec)
        sol = pf.solve(pf.compile(p))
        inst = recover.recover_instance(sol, p)
        rep = recover.verify_instance(inst, p, sdp_value=sol.objective_value)
        assert rep.certification == recover.CERT_UPPER
        assert "not attempted" in rep.notes

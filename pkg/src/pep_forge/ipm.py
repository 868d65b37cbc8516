"""Primal-dual interior-point solver for small dense multi-block SDPs.

Infeasible-start path following with Nesterov-Todd scaling on the psd and
nonnegative cones and a Mehrotra predictor-corrector step.  Free variables
are kept in the KKT system (no splitting).  All linear algebra is dense and
deterministic: no randomized pivoting, fixed iteration order, so identical
input bytes produce identical iterate sequences.

Statuses use the conventions of the external maximization problem:
"primal-infeasible" means the PEP constraints are inconsistent,
"dual-infeasible" means the objective is unbounded above.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import lu_factor, lu_solve, solve_triangular
from threadpoolctl import threadpool_limits

from .sdp import StandardSDP

STATUSES = (
    "optimal",
    "primal-infeasible",
    "dual-infeasible",
    "max-iter",
    "numerical-failure",
)

#: every solve appends one quality record here (value, gap, residuals, status);
#: the acceptance suite asserts over it.
SOLVE_LOG: list[dict] = []

#: static KKT regularization, relative to tr(H)/m
REG_SCALE = 1e-14
#: full-Newton-system refinement passes per direction solve
REFINE_ROUNDS = 3


@dataclass
class SDPSolution:
    status: str
    objective_value: float          # external (maximization) value at the primal iterate
    dual_objective: float           # external value of the dual bound
    duality_gap: float              # |primal - dual|, external units
    complementarity: float          # <x, s> of the final iterate
    kkt_residual: float             # max abs primal/dual equality residual
    iterations: int
    gram: np.ndarray                # main psd block at full (unreduced) size
    aux_blocks: list[np.ndarray]
    slacks: np.ndarray
    free_values: np.ndarray
    y: np.ndarray                   # internal equality multipliers
    dual_slack_psd: list[np.ndarray]
    sdp: StandardSDP | None = None
    message: str = ""


class _Scaling:
    """Nesterov-Todd scaling data for one psd block."""

    __slots__ = ("R", "Rinv", "lam", "Lx", "Ls")

    def __init__(self, X, S):
        Lx = np.linalg.cholesky(X)
        Ls = np.linalg.cholesky(S)
        U, sig, Vt = np.linalg.svd(Ls.T @ Lx)
        sig = np.maximum(sig, 1e-300)
        sq = np.sqrt(sig)
        self.R = Lx @ (Vt.T / sq[None, :])
        Lx_inv = solve_triangular(Lx, np.eye(Lx.shape[0]), lower=True)
        self.Rinv = (sq[:, None] * Vt) @ Lx_inv
        self.lam = sig
        self.Lx = Lx
        self.Ls = Ls


def _sym(M):
    return 0.5 * (M + M.T)


def _max_step_psd(L, D):
    """sup { a : X + a D >= 0 } for X = L L^T."""
    Y = solve_triangular(L, D, lower=True)
    Nm = solve_triangular(L, Y.T, lower=True).T
    w = np.linalg.eigvalsh(_sym(Nm))
    lam_min = w[0]
    if lam_min >= -1e-300:
        return math.inf
    return -1.0 / lam_min


def _max_step_lp(x, dx):
    neg = dx < 0
    if not np.any(neg):
        return math.inf
    return float(np.min(-x[neg] / dx[neg]))


def solve(
    sdp: StandardSDP,
    gap_tol: float = 1e-8,
    feas_tol: float = 1e-8,
    max_iter: int = 200,
    step_frac: float = 0.95,
    verbose: bool = False,
) -> SDPSolution:
    """Solve a StandardSDP; never raises on numerical trouble, reports it.

    On status "optimal" the complementarity gap is at most
    gap_tol * (1 + |objective|) and the primal/dual equality residuals are
    at most feas_tol relative to the data norms.  Other statuses return the
    best iterate found together with its honest residuals.
    """
    # single-threaded BLAS: deterministic reductions, and the problems are
    # far too small to amortize thread wake-ups
    with threadpool_limits(limits=1, user_api="blas"):
        return _solve_impl(sdp, gap_tol, feas_tol, max_iter, step_frac, verbose)


def _solve_impl(
    sdp: StandardSDP,
    gap_tol: float,
    feas_tol: float,
    max_iter: int,
    step_frac: float,
    verbose: bool,
) -> SDPSolution:
    sizes = list(sdp.psd_sizes)
    nblocks = len(sizes)
    A = [np.ascontiguousarray(a, dtype=float) for a in sdp.A_psd]
    C = [np.ascontiguousarray(c, dtype=float) for c in sdp.C_psd]
    A_flat = [a.reshape(a.shape[0], -1) for a in A]
    A_lp = np.ascontiguousarray(sdp.A_lp, dtype=float)
    c_lp = np.asarray(sdp.c_lp, dtype=float)
    B = np.ascontiguousarray(sdp.B_free, dtype=float)
    c_free = np.asarray(sdp.c_free, dtype=float)
    b = np.asarray(sdp.b, dtype=float)
    m = b.shape[0]
    q = A_lp.shape[1]
    p = B.shape[1]
    if m == 0:
        raise ValueError("program has no equality rows")
    nu = sum(sizes) + q
    if nu == 0:
        raise ValueError("program has no conic variables")

    # svec packing per block (for the Schur product)
    triu = [np.triu_indices(nk) for nk in sizes]
    wts = []
    for nk, (iu, ju) in zip(sizes, triu):
        w = np.full(len(iu), math.sqrt(2.0))
        w[iu == ju] = 1.0
        wts.append(w)

    norm_b = float(np.abs(b).max()) if m else 0.0
    norm_c = max(
        [float(np.abs(c).max()) if c.size else 0.0 for c in C]
        + [float(np.abs(c_lp).max()) if q else 0.0, float(np.abs(c_free).max()) if p else 0.0]
    )
    norm_A = max(
        [float(np.abs(a).max()) if a.size else 0.0 for a in A]
        + [float(np.abs(A_lp).max()) if q else 0.0, float(np.abs(B).max()) if p else 0.0, 1.0]
    )
    sc_b = 1.0 + norm_b
    sc_c = 1.0 + norm_c

    tau_p = math.sqrt(max(1.0, norm_b))
    tau_d = math.sqrt(max(1.0, norm_c))
    X = [tau_p * np.eye(nk) for nk in sizes]
    S = [tau_d * np.eye(nk) for nk in sizes]
    xl = np.full(q, tau_p)
    zl = np.full(q, tau_d)
    u = np.zeros(p)
    y = np.zeros(m)

    def A_apply(Xs, xlv, uv):
        out = np.zeros(m)
        for k in range(nblocks):
            out += A_flat[k] @ Xs[k].ravel()
        if q:
            out += A_lp @ xlv
        if p:
            out += B @ uv
        return out

    def AT_apply(yv):
        mats = [np.tensordot(yv, A[k], axes=1) for k in range(nblocks)]
        lpv = A_lp.T @ yv if q else np.zeros(0)
        return mats, lpv

    def cone_image(mats, lpv):
        out = np.zeros(m)
        for k in range(nblocks):
            out += A_flat[k] @ mats[k].ravel()
        if q:
            out += A_lp @ lpv
        return out

    def ext_value(pobj_int):
        return sdp.obj_constant - pobj_int

    best = None  # (merit, snapshot)
    status = "max-iter"
    message = ""

    def snapshot(pres_n, dres_n, gap, pobj, dobj, it):
        return dict(
            X=[x.copy() for x in X],
            S=[s.copy() for s in S],
            xl=xl.copy(),
            zl=zl.copy(),
            u=u.copy(),
            y=y.copy(),
            pres_n=pres_n,
            dres_n=dres_n,
            gap=gap,
            pobj=pobj,
            dobj=dobj,
            pres_abs=pres_abs,
            dres_abs=dres_abs,
            iterations=it,
        )

    stall = 0
    for it in range(max_iter + 1):
        rp = b - A_apply(X, xl, u)
        ATy_mats, ATy_lp = AT_apply(y)
        Rd = [C[k] - ATy_mats[k] - S[k] for k in range(nblocks)]
        rd_lp = (c_lp - ATy_lp - zl) if q else np.zeros(0)
        rf = (c_free - B.T @ y) if p else np.zeros(0)

        gap = sum(float(np.vdot(X[k], S[k])) for k in range(nblocks)) + float(xl @ zl)
        pobj = sum(float(np.vdot(C[k], X[k])) for k in range(nblocks)) + float(
            c_lp @ xl
        ) + float(c_free @ u)
        dobj = float(b @ y)

        pres_abs = float(np.abs(rp).max()) if m else 0.0
        dres_list = [float(np.abs(r).max()) if r.size else 0.0 for r in Rd]
        if q:
            dres_list.append(float(np.abs(rd_lp).max()))
        if p:
            dres_list.append(float(np.abs(rf).max()))
        dres_abs = max(dres_list)
        pres_n = pres_abs / sc_b
        dres_n = dres_abs / sc_c
        val = ext_value(pobj)
        gap_ok = gap <= gap_tol * (1.0 + abs(val)) and abs(pobj - dobj) <= 5.0 * gap_tol * (
            1.0 + abs(val)
        )

        merit = max(pres_n, dres_n, gap / (1.0 + abs(val)))
        if best is None or merit < best[0]:
            best = (merit, snapshot(pres_n, dres_n, gap, pobj, dobj, it))

        if verbose:
            print(
                f"iter {it:3d}  pobj {pobj:+.6e}  dobj {dobj:+.6e}  "
                f"gap {gap:.2e}  pres {pres_n:.2e}  dres {dres_n:.2e}"
            )

        if pres_n <= feas_tol and dres_n <= feas_tol and gap_ok:
            status = "optimal"
            best = (merit, snapshot(pres_n, dres_n, gap, pobj, dobj, it))
            break

        if pres_n <= feas_tol and gap_ok and dres_n > feas_tol:
            # the dual residual is the only laggard: try replacing S by the
            # psd part of C - A^T y, whose residual is just the clipped
            # negative tail and often sits far below the iterate's floor
            S_pol = []
            clip = 0.0
            for k in range(nblocks):
                T = _sym(C[k] - ATy_mats[k])
                w_, Q = np.linalg.eigh(T)
                if w_.size:
                    clip = max(clip, max(0.0, -float(w_[0])))
                S_pol.append((Q * np.maximum(w_, 0.0)) @ Q.T)
            zl_try = (c_lp - ATy_lp) if q else np.zeros(0)
            if q and zl_try.size:
                clip = max(clip, max(0.0, -float(zl_try.min())))
            dres_pol = max(clip, float(np.abs(rf).max()) if rf.size else 0.0)
            if dres_pol / sc_c <= feas_tol:
                zl_pol = np.maximum(zl_try, 0.0)
                gap_pol = sum(
                    float(np.vdot(X[k], S_pol[k])) for k in range(nblocks)
                ) + float(xl @ zl_pol)
                if gap_pol <= gap_tol * (1.0 + abs(val)):
                    status = "optimal"
                    message = "converged after dual polish"
                    for k in range(nblocks):
                        S[k] = S_pol[k]
                    if q:
                        zl = zl_pol
                    snap = snapshot(pres_n, dres_pol / sc_c, gap_pol, pobj, dobj, it)
                    snap["dres_abs"] = dres_pol
                    best = (max(pres_n, dres_pol / sc_c), snap)
                    break

        # infeasibility certificates
        bty = dobj
        if bty > 1e-8 * sc_b and pres_n > 100 * feas_tol:
            yn = y / bty
            tmats, tlp = AT_apply(yn)
            qual = float(np.abs(B.T @ yn).max()) if p else 0.0
            for k in range(nblocks):
                if sizes[k]:
                    qual = max(qual, float(np.linalg.eigvalsh(_sym(tmats[k]))[-1]))
            if q and tlp.size:
                qual = max(qual, float(tlp.max()))
            if qual <= 1e-9 * norm_A * (1.0 + float(np.abs(yn).max())):
                status = "primal-infeasible"
                message = "Farkas certificate found (constraints inconsistent)"
                break
        xnorm = max(
            [float(np.abs(x).max()) for x in X]
            + [float(np.abs(xl).max()) if q else 0.0, float(np.abs(u).max()) if p else 0.0]
        )
        if xnorm > 1e5 * tau_p and pobj < 0:
            qual = float(np.abs(A_apply(X, xl, u)).max()) / xnorm
            cval = pobj / xnorm
            if qual <= 1e-9 * norm_A and cval < -1e-9 * max(1.0, norm_c):
                status = "dual-infeasible"
                message = "improving ray found (objective unbounded above)"
                break

        if it == max_iter:
            break

        # Nesterov-Todd scalings
        try:
            scal = [_Scaling(X[k], S[k]) for k in range(nblocks)]
        except np.linalg.LinAlgError:
            status = "numerical-failure"
            message = "lost cone interiority while factoring the scaling point"
            break
        if q:
            w_lp = np.sqrt(xl / zl)
            lam_lp = np.sqrt(xl * zl)

        # Schur complement H = A W^2 A^T
        H = np.zeros((m, m))
        Ts = []
        for k in range(nblocks):
            R = scal[k].R
            tmp = np.matmul(A[k], R)
            tmp = np.matmul(R.T, tmp)
            pk = tmp[:, triu[k][0], triu[k][1]] * wts[k][None, :]
            Ts.append(pk)
            H += pk @ pk.T
        if q:
            H += (A_lp * (w_lp * w_lp)[None, :]) @ A_lp.T

        delta = REG_SCALE * max(1.0, float(np.trace(H)) / m)
        K = np.zeros((m + p, m + p))
        K[:m, :m] = H + delta * np.eye(m)
        if p:
            K[:m, m:] = B
            K[m:, :m] = B.T
            K[m:, m:] = -delta * np.eye(p)
        try:
            lu = lu_factor(K)
        except np.linalg.LinAlgError:
            status = "numerical-failure"
            message = "KKT factorization failed"
            break

        def kkt_solve(r1, r2):
            rhs = np.concatenate([r1, r2]) if p else r1
            sol = lu_solve(lu, rhs)
            # one refinement pass against the unregularized system
            for _ in range(2):
                res1 = r1 - (H @ sol[:m] + (B @ sol[m:] if p else 0.0))
                if p:
                    res2 = r2 - B.T @ sol[:m]
                    res = np.concatenate([res1, res2])
                else:
                    res = res1
                if float(np.abs(res).max()) <= 1e-14 * (1.0 + float(np.abs(rhs).max())):
                    break
                corr = lu_solve(lu, res)
                new = sol + corr
                nres1 = r1 - (H @ new[:m] + (B @ new[m:] if p else 0.0))
                nr = float(np.abs(nres1).max())
                if p:
                    nr = max(nr, float(np.abs(r2 - B.T @ new[:m]).max()))
                r0 = float(np.abs(res1).max())
                if p:
                    r0 = max(r0, float(np.abs(res2).max()))
                if nr < r0:
                    sol = new
                else:
                    break
            return (sol[:m], sol[m:]) if p else (sol, np.zeros(0))

        Wmats = [scal[k].R @ scal[k].R.T for k in range(nblocks)]

        def newton_solve(rp_t, Rd_t, rdlp_t, rf_t, dt_mats, dt_lp):
            """One Newton solve for given residual targets."""
            phi = [scal[k].R @ dt_mats[k] @ scal[k].R.T for k in range(nblocks)]
            W2rd = [Wmats[k] @ Rd_t[k] @ Wmats[k] for k in range(nblocks)]
            r1 = rp_t - cone_image(phi, w_lp * dt_lp if q else np.zeros(0))
            r1 += cone_image(W2rd, (w_lp * w_lp) * rdlp_t if q else np.zeros(0))
            dy, df = kkt_solve(r1, rf_t)
            dS_mats, dS_lp = AT_apply(dy)
            dS = [Rd_t[k] - dS_mats[k] for k in range(nblocks)]
            dzl = (rdlp_t - dS_lp) if q else np.zeros(0)
            dX = [
                _sym(phi[k] - Wmats[k] @ dS[k] @ Wmats[k]) for k in range(nblocks)
            ]
            dxl = (w_lp * dt_lp - (w_lp * w_lp) * dzl) if q else np.zeros(0)
            return dX, dxl, df, dy, dS, dzl

        def directions(dt_mats, dt_lp):
            dX, dxl, df, dy, dS, dzl = newton_solve(rp, Rd, rd_lp, rf, dt_mats, dt_lp)
            # refine against the full Newton system: reconstruction of dX from
            # dS cancels badly once the scaling is stiff, and the feasibility
            # equations inherit that error
            for _ in range(REFINE_ROUNDS):
                res_p = rp - A_apply(dX, dxl, df)
                res_d = [Rd[k] - (np.tensordot(dy, A[k], axes=1) + dS[k]) for k in range(nblocks)]
                res_dlp = (rd_lp - (A_lp.T @ dy + dzl)) if q else np.zeros(0)
                res_f = (rf - B.T @ dy) if p else np.zeros(0)
                err = float(np.abs(res_p).max()) if m else 0.0
                for r_ in res_d:
                    if r_.size:
                        err = max(err, float(np.abs(r_).max()))
                if q and res_dlp.size:
                    err = max(err, float(np.abs(res_dlp).max()))
                if p and res_f.size:
                    err = max(err, float(np.abs(res_f).max()))
                tgt = 1e-13 * (1.0 + float(np.abs(rp).max()) + norm_c)
                if err <= tgt:
                    break
                zt = [np.zeros_like(dt_mats[k]) for k in range(nblocks)]
                ztl = np.zeros(q)
                cX, cxl, cf, cy, cS, czl = newton_solve(
                    res_p, res_d, res_dlp, res_f, zt, ztl
                )
                dX = [dX[k] + cX[k] for k in range(nblocks)]
                dxl = dxl + cxl
                df = df + cf
                dy = dy + cy
                dS = [dS[k] + cS[k] for k in range(nblocks)]
                dzl = dzl + czl
            return dX, dxl, df, dy, dS, dzl

        def max_steps(dX, dxl, dS, dzl):
            ap = ad = math.inf
            for k in range(nblocks):
                ap = min(ap, _max_step_psd(scal[k].Lx, dX[k]))
                ad = min(ad, _max_step_psd(scal[k].Ls, dS[k]))
            if q:
                ap = min(ap, _max_step_lp(xl, dxl))
                ad = min(ad, _max_step_lp(zl, dzl))
            return ap, ad

        mu = gap / nu

        # predictor (affine scaling) direction
        dt_aff = [-np.diag(scal[k].lam) for k in range(nblocks)]
        dt_aff_lp = -lam_lp if q else np.zeros(0)
        dXa, dxla, dfa, dya, dSa, dzla = directions(dt_aff, dt_aff_lp)
        ap, ad = max_steps(dXa, dxla, dSa, dzla)
        ap_aff, ad_aff = min(1.0, ap), min(1.0, ad)
        gap_aff = sum(
            float(np.vdot(X[k] + ap_aff * dXa[k], S[k] + ad_aff * dSa[k]))
            for k in range(nblocks)
        )
        if q:
            gap_aff += float((xl + ap_aff * dxla) @ (zl + ad_aff * dzla))
        mu_aff = max(gap_aff, 0.0) / nu
        sigma = min(1.0, max((mu_aff / mu) ** 3 if mu > 0 else 0.0, 1e-10))

        # combined corrector direction
        dt = []
        for k in range(nblocks):
            lam = scal[k].lam
            Pa = scal[k].Rinv @ dXa[k] @ scal[k].Rinv.T
            Qa = scal[k].R.T @ dSa[k] @ scal[k].R
            Hc = _sym(Pa @ Qa)
            rhs_c = sigma * mu * np.eye(len(lam)) - np.diag(lam * lam) - Hc
            denom = 0.5 * (lam[:, None] + lam[None, :])
            dt.append(rhs_c / denom)
        if q:
            pa = dxla / w_lp
            qa = w_lp * dzla
            dt_lp = (sigma * mu - lam_lp * lam_lp - pa * qa) / lam_lp
        else:
            dt_lp = np.zeros(0)
        dX, dxl_d, df, dy, dS, dzl = directions(dt, dt_lp)
        ap, ad = max_steps(dX, dxl_d, dS, dzl)
        alpha_p = min(1.0, step_frac * ap)
        alpha_d = min(1.0, step_frac * ad)
        if min(alpha_p, alpha_d) <= 1e-10 or not np.isfinite(alpha_p + alpha_d):
            stall += 1
            if stall >= 3:
                status = "numerical-failure"
                message = "step size collapsed"
                break
            alpha_p = max(alpha_p, 1e-10)
            alpha_d = max(alpha_d, 1e-10)
        else:
            stall = 0

        for k in range(nblocks):
            X[k] = _sym(X[k] + alpha_p * dX[k])
            S[k] = _sym(S[k] + alpha_d * dS[k])
        if q:
            xl = xl + alpha_p * dxl_d
            zl = zl + alpha_d * dzl
        if p:
            u = u + alpha_p * df
        y = y + alpha_d * dy

    if status in ("max-iter", "numerical-failure"):
        # dual polish: replacing S by the psd part of C - A^T y makes the
        # dual residual exactly the clipped negative part, which is often
        # orders below the iterate's residual floor near a degenerate face
        snap = best[1]
        yb = snap["y"]
        ATy_mats, ATy_lp = AT_apply(yb)
        S_pol = []
        clip = 0.0
        for k in range(nblocks):
            T = _sym(C[k] - ATy_mats[k])
            w_, Q = np.linalg.eigh(T)
            if w_.size:
                clip = max(clip, max(0.0, -float(w_[0])))
            S_pol.append((Q * np.maximum(w_, 0.0)) @ Q.T)
        zl_try = (c_lp - ATy_lp) if q else np.zeros(0)
        if q and zl_try.size:
            clip = max(clip, max(0.0, -float(zl_try.min())))
        zl_pol = np.maximum(zl_try, 0.0)
        rf_b = (c_free - B.T @ yb) if p else np.zeros(0)
        dres_pol = max(clip, float(np.abs(rf_b).max()) if rf_b.size else 0.0)
        gap_pol = sum(
            float(np.vdot(snap["X"][k], S_pol[k])) for k in range(nblocks)
        ) + float(snap["xl"] @ zl_pol)
        pobj_b, dobj_b = snap["pobj"], snap["dobj"]
        val_b = ext_value(pobj_b)
        if (
            snap["pres_n"] <= feas_tol
            and dres_pol / sc_c <= feas_tol
            and gap_pol <= gap_tol * (1.0 + abs(val_b))
            and abs(pobj_b - dobj_b) <= 5.0 * gap_tol * (1.0 + abs(val_b))
        ):
            status = "optimal"
            message = "converged after dual polish"
            snap["S"] = S_pol
            snap["zl"] = zl_pol
            snap["gap"] = gap_pol
            snap["dres_n"] = dres_pol / sc_c
            snap["dres_abs"] = dres_pol
            best = (max(snap["pres_n"], snap["dres_n"]), snap)

    snap = best[1]
    Xb, Sb = snap["X"], snap["S"]
    gram_red = Xb[0]
    if sdp.gram_Z is not None:
        gram = sdp.gram_Z @ gram_red @ sdp.gram_Z.T
    else:
        gram = gram_red
    pobj, dobj = snap["pobj"], snap["dobj"]
    value = ext_value(pobj)
    dual_value = sdp.obj_constant - dobj
    sol = SDPSolution(
        status=status,
        objective_value=value,
        dual_objective=dual_value,
        duality_gap=abs(value - dual_value),
        complementarity=snap["gap"],
        kkt_residual=max(snap["pres_abs"], snap["dres_abs"]),
        iterations=snap["iterations"],
        gram=_sym(gram),
        aux_blocks=[_sym(x) for x in Xb[1:]],
        slacks=snap["xl"],
        free_values=snap["u"],
        y=snap["y"],
        dual_slack_psd=[_sym(s) for s in Sb],
        sdp=sdp,
        message=message,
    )
    SOLVE_LOG.append(
        dict(
            status=status,
            value=value,
            gap=sol.duality_gap,
            complementarity=sol.complementarity,
            kkt_residual=sol.kkt_residual,
            iterations=sol.iterations,
        )
    )
    return sol


def dual_report(sol: SDPSolution, problem=None) -> list[tuple[str, float]]:
    """Per-constraint dual multipliers keyed by provenance label.

    Multipliers of "<= 0" constraints are nonnegative (up to feasibility
    tolerance); equality multipliers carry either sign; LMI constraints
    report the trace of their dual block.  Requires an optimal solution.
    """
    if sol.status != "optimal":
        raise ValueError(f"dual multipliers need an optimal solve, got {sol.status!r}")
    sdp = sol.sdp
    prob = problem if problem is not None else sdp.problem
    if prob is None:
        raise ValueError("no problem attached to this solution")
    out = []
    for ci, con in enumerate(prob.constraints):
        if ci in sdp.dropped:
            out.append((con.label, 0.0))
        elif con.kind == "le0":
            out.append((con.label, -float(sol.y[sdp.scalar_row[ci]])))
        elif con.kind == "eq0":
            out.append((con.label, float(sol.y[sdp.scalar_row[ci]])))
        else:
            bk = sdp.lmi_block[ci]
            out.append((con.label, float(np.trace(sol.dual_slack_psd[bk]))))
    return out

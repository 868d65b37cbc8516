"""Compilation of a PEPProblem into a standard-form multi-block SDP.

Layout of the compiled program (internal minimization form):

    minimize    sum_k <C_k, X_k> + c_lp . s + c_free . u
    subject to  sum_k <A_rk, X_k> + A_lp[r] . s + B[r] . u = b_r
                X_k psd,  s >= 0,  u free

Block 0 is the Gram matrix of the basis labels; each LMI constraint
contributes one auxiliary psd block tied to its expression matrix by
entry-wise equalities; each "<= 0" constraint contributes one nonnegative
slack; the free scalars are the problem's function-value symbols.  The
external maximization value is ``obj_constant - <internal objective>``.

When the problem declares null directions (vector expressions its
constraints force to zero), the Gram block is compiled in the coordinates
of their orthogonal complement: G = Z Ghat Z^T.  This removes the forced
singularity so the interior-point method keeps a strictly feasible primal,
and turns the corresponding equality rows into structural zeros, which are
dropped (their multipliers are reported as zero).  Solutions are reported
at full size.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import null_space

from .gram import BuildError, PEPProblem, QuadExpr

STRUCT_ZERO_REL = 1e-12


@dataclass
class StandardSDP:
    """Dense standard-form SDP with provenance back to the PEP constraints."""

    psd_sizes: list[int]
    A_psd: list[np.ndarray]          # each (m, n_k, n_k)
    C_psd: list[np.ndarray]
    A_lp: np.ndarray                 # (m, q)
    c_lp: np.ndarray                 # (q,)
    B_free: np.ndarray               # (m, p)
    c_free: np.ndarray               # (p,)
    b: np.ndarray                    # (m,)
    obj_constant: float = 0.0
    row_labels: list[str] = field(default_factory=list)
    # provenance (filled by compile, unused by the solver)
    gram_Z: np.ndarray | None = None
    n_gram_full: int = 0
    scalar_row: dict = field(default_factory=dict)    # constraint idx -> row
    slack_col: dict = field(default_factory=dict)     # constraint idx -> lp col
    lmi_block: dict = field(default_factory=dict)     # constraint idx -> psd block
    lmi_rows: dict = field(default_factory=dict)      # constraint idx -> [(row, i, j)]
    dropped: set = field(default_factory=set)         # structurally eliminated
    problem: PEPProblem | None = None

    @property
    def num_rows(self) -> int:
        return self.b.shape[0]

    @classmethod
    def simple(
        cls,
        psd_sizes,
        A_psd,
        C_psd,
        b,
        A_lp=None,
        c_lp=None,
        B_free=None,
        c_free=None,
        obj_constant=0.0,
        row_labels=None,
    ) -> "StandardSDP":
        """Convenience constructor for hand-built programs (tests, probes)."""
        b = np.asarray(b, dtype=float)
        m = b.shape[0]
        A_lp = np.zeros((m, 0)) if A_lp is None else np.asarray(A_lp, dtype=float)
        c_lp = np.zeros(A_lp.shape[1]) if c_lp is None else np.asarray(c_lp, dtype=float)
        B_free = np.zeros((m, 0)) if B_free is None else np.asarray(B_free, dtype=float)
        c_free = np.zeros(B_free.shape[1]) if c_free is None else np.asarray(c_free, dtype=float)
        return cls(
            psd_sizes=list(psd_sizes),
            A_psd=[np.asarray(a, dtype=float) for a in A_psd],
            C_psd=[np.asarray(c, dtype=float) for c in C_psd],
            A_lp=A_lp,
            c_lp=c_lp,
            B_free=B_free,
            c_free=c_free,
            b=b,
            obj_constant=obj_constant,
            row_labels=list(row_labels) if row_labels else [f"row{r}" for r in range(m)],
            n_gram_full=psd_sizes[0] if psd_sizes else 0,
        )


def _dense_gram(expr: QuadExpr, index: dict, n: int) -> np.ndarray:
    A = np.zeros((n, n))
    for (la, lb), c in expr.gram_coeffs.items():
        i, j = index[la], index[lb]
        if i == j:
            A[i, i] += c
        else:
            A[i, j] += 0.5 * c
            A[j, i] += 0.5 * c
    return A


def compile(problem: PEPProblem) -> StandardSDP:  # noqa: A001 - domain term
    """Lower a validated PEPProblem to a StandardSDP.

    Ordering is the problem's registration order throughout, so compilation
    is reproducible bit for bit.
    """
    index = problem.gram_index()
    findex = problem.fval_index()
    n_full = len(problem.basis)
    p = len(problem.fvals)

    Z = None
    if problem.null_directions:
        C = np.zeros((n_full, len(problem.null_directions)))
        for k, nd in enumerate(problem.null_directions):
            for lab, c in nd.coeffs.items():
                C[index[lab], k] = c
        Z = null_space(C.T)
        if Z.shape[1] == n_full:
            Z = None

    n_red = n_full if Z is None else Z.shape[1]

    def reduce(A: np.ndarray) -> np.ndarray:
        return A if Z is None else Z.T @ A @ Z

    # first pass: expression matrices and the global coefficient scale
    scale = 1.0
    records = []  # (kind, payload)
    for ci, con in enumerate(problem.constraints):
        if con.kind == "lmi":
            nb = len(con.body)
            mats = [[None] * nb for _ in range(nb)]
            for i in range(nb):
                for j in range(i, nb):
                    e = con.body[i][j]
                    Ared = reduce(_dense_gram(e, index, n_full))
                    mats[i][j] = (Ared, e)
                    m = float(np.abs(Ared).max()) if Ared.size else 0.0
                    scale = max(scale, m, *(abs(v) for v in e.fval_coeffs.values()), abs(e.constant))
            records.append(("lmi", ci, nb, mats))
        else:
            e = con.body
            Ared = reduce(_dense_gram(e, index, n_full))
            m = float(np.abs(Ared).max()) if Ared.size else 0.0
            scale = max(scale, m, *(abs(v) for v in e.fval_coeffs.values()), abs(e.constant))
            records.append((con.kind, ci, Ared, e))
    ztol = STRUCT_ZERO_REL * scale

    psd_sizes = [n_red]
    rows = []           # list of dicts
    slack_count = 0
    scalar_row: dict = {}
    slack_col: dict = {}
    lmi_block: dict = {}
    lmi_rows: dict = {}
    dropped: set = set()

    def fval_vec(e: QuadExpr) -> np.ndarray:
        v = np.zeros(p)
        for var, c in e.fval_coeffs.items():
            v[findex[var]] = c
        return v

    for rec in records:
        if rec[0] == "lmi":
            _, ci, nb, mats = rec
            all_zero = all(
                np.abs(mats[i][j][0]).max() <= ztol
                and not mats[i][j][1].fval_coeffs
                and abs(mats[i][j][1].constant) <= ztol
                for i in range(nb)
                for j in range(i, nb)
            )
            if all_zero:
                dropped.add(ci)
                continue
            bk = len(psd_sizes)
            psd_sizes.append(nb)
            lmi_block[ci] = bk
            lmi_rows[ci] = []
            label = problem.constraints[ci].label
            for i in range(nb):
                for j in range(i, nb):
                    Ared, e = mats[i][j]
                    lmi_rows[ci].append((len(rows), i, j))
                    rows.append(
                        dict(
                            gram=Ared,
                            fv=fval_vec(e),
                            slack=None,
                            aux=(bk, i, j),
                            rhs=-e.constant,
                            label=f"{label}[{i},{j}]",
                        )
                    )
        else:
            kind, ci, Ared, e = rec
            label = problem.constraints[ci].label
            has_gram = np.abs(Ared).max() > ztol if Ared.size else False
            if not has_gram and not e.fval_coeffs:
                if kind == "eq0":
                    if abs(e.constant) > ztol:
                        raise BuildError(
                            f"constraint {label!r} is structurally infeasible"
                        )
                    dropped.add(ci)
                    continue
                if kind == "le0" and e.constant <= ztol:
                    # constant <= 0 holds identically; keep nothing
                    dropped.add(ci)
                    continue
            scalar_row[ci] = len(rows)
            sl = None
            if kind == "le0":
                sl = slack_count
                slack_col[ci] = sl
                slack_count += 1
            rows.append(
                dict(
                    gram=Ared if has_gram else np.zeros((n_red, n_red)),
                    fv=fval_vec(e),
                    slack=sl,
                    aux=None,
                    rhs=-e.constant,
                    label=label,
                )
            )

    m = len(rows)
    A_psd = [np.zeros((m, nk, nk)) for nk in psd_sizes]
    A_lp = np.zeros((m, slack_count))
    B_free = np.zeros((m, p))
    b = np.zeros(m)
    labels = []
    for r, row in enumerate(rows):
        A_psd[0][r] = row["gram"]
        B_free[r] = row["fv"]
        b[r] = row["rhs"]
        labels.append(row["label"])
        if row["slack"] is not None:
            A_lp[r, row["slack"]] = 1.0
        if row["aux"] is not None:
            bk, i, j = row["aux"]
            if i == j:
                A_psd[bk][r, i, i] = -1.0
            else:
                A_psd[bk][r, i, j] = -0.5
                A_psd[bk][r, j, i] = -0.5

    # internal objective: minimize -(external linear part)
    C0 = -reduce(_dense_gram(problem.objective, index, n_full))
    C_psd = [C0] + [np.zeros((nk, nk)) for nk in psd_sizes[1:]]
    c_free = -fval_vec(problem.objective)

    return StandardSDP(
        psd_sizes=psd_sizes,
        A_psd=A_psd,
        C_psd=C_psd,
        A_lp=A_lp,
        c_lp=np.zeros(slack_count),
        B_free=B_free,
        c_free=c_free,
        b=b,
        obj_constant=problem.objective.constant,
        row_labels=labels,
        gram_Z=Z,
        n_gram_full=n_full,
        scalar_row=scalar_row,
        slack_col=slack_col,
        lmi_block=lmi_block,
        lmi_rows=lmi_rows,
        dropped=dropped,
        problem=problem,
    )


def export_sdp_text(sdp: StandardSDP, path: str) -> None:
    """Write the compiled program in a sparse triplet text format.

    Header lists block sizes and counts; OBJ/ROW/RHS sections carry
    (block, row, col, value) triplets of the internal minimization form.
    Symmetric psd coefficients are listed for the lower triangle only.
    """
    lines = ["# pep-forge sdp export v1"]
    lines.append(f"psd-blocks {len(sdp.psd_sizes)}")
    for k, nk in enumerate(sdp.psd_sizes):
        lines.append(f"psd-size {k} {nk}")
    lines.append(f"nonneg {sdp.A_lp.shape[1]}")
    lines.append(f"free {sdp.B_free.shape[1]}")
    lines.append(f"objective-constant {sdp.obj_constant!r}")
    lines.append("section OBJ")

    def emit_psd(prefix, mats):
        for k, M in enumerate(mats):
            nk = M.shape[-1]
            for i in range(nk):
                for j in range(i + 1):
                    v = M[i, j]
                    if v != 0.0:
                        lines.append(f"{prefix} psd {k} {i} {j} {float(v)!r}")

    emit_psd("obj", sdp.C_psd)
    for k, v in enumerate(sdp.c_lp):
        if v != 0.0:
            lines.append(f"obj lp {k} {float(v)!r}")
    for k, v in enumerate(sdp.c_free):
        if v != 0.0:
            lines.append(f"obj free {k} {float(v)!r}")
    lines.append("section ROWS")
    m = sdp.num_rows
    for r in range(m):
        for k, A in enumerate(sdp.A_psd):
            nk = A.shape[-1]
            Ar = A[r]
            nz = np.argwhere(np.tril(np.ones((nk, nk), dtype=bool)) & (Ar != 0.0))
            for i, j in nz:
                lines.append(f"row {r} psd {k} {i} {j} {float(Ar[i, j])!r}")
        for k in np.nonzero(sdp.A_lp[r])[0]:
            lines.append(f"row {r} lp {k} {float(sdp.A_lp[r, k])!r}")
        for k in np.nonzero(sdp.B_free[r])[0]:
            lines.append(f"row {r} free {k} {float(sdp.B_free[r, k])!r}")
    lines.append("section RHS")
    for r in range(m):
        lines.append(f"rhs {r} {float(sdp.b[r])!r}")
    lines.append("section LABELS")
    for r, lab in enumerate(sdp.row_labels):
        lines.append(f"label {r} {lab}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")

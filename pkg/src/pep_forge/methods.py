"""Builders that assemble complete PEP problems for specific methods.

Covered methods: fixed-step gradient descent (tight or relaxed function
representation), decentralized gradient descent with either a spectral
description of the averaging matrix or an explicitly fixed matrix, and a
generic scheme interpreter for any fixed-step first-order method composed
of gradient / operator / linear-map / consensus queries.

Every builder returns a PEPProblem whose meta dict records the
representation used, whether tightness can be certified from a recovered
instance, and bookkeeping needed by recovery (value-shift groups, the
consensus handle).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .families import (
    ClassSpec,
    ConsensusDataHandle,
    FunctionDataHandle,
    LinearMapDataHandle,
    OperatorDataHandle,
    bounded_gradient_constraints,
    consensus_null_directions,
    family_is_exact,
    function_constraints,
    linear_operator_constraints,
    network_matrix_constraints,
    operator_constraints,
)
from .gram import (
    BasisLabel,
    BuildError,
    Constraint,
    PEPProblem,
    QuadExpr,
    ScalarVar,
    VectorExpr,
    build_problem,
    inner,
    sq_norm,
)

CRITERIA = ("last-iterate-gap", "min-iterate-gap", "gradient-norm-sq")


@dataclass(frozen=True)
class MethodSpec:
    """Fixed-step gradient method description.

    ``steps`` holds one step per iteration, or a single entry reused for all
    iterations.  With ``steps_are_h`` the entries are the dimensionless
    h_i = L * alpha_i (requires a finite smoothness constant).
    """

    N: int
    steps: tuple[float, ...]
    family: ClassSpec
    criterion: str = "last-iterate-gap"
    R: float = 1.0
    steps_are_h: bool = True

    def __post_init__(self):
        if self.N < 0:
            raise BuildError(f"iteration count must be >= 0, got {self.N}")
        if self.R <= 0:
            raise BuildError(f"initial radius must be positive, got {self.R}")
        if self.criterion not in CRITERIA:
            raise BuildError(f"unknown criterion {self.criterion!r}")
        if self.N > 0 and len(self.steps) not in (1, self.N):
            raise BuildError(
                f"need 1 or {self.N} step-sizes, got {len(self.steps)}"
            )

    def alphas(self) -> list[float]:
        steps = list(self.steps) if len(self.steps) == self.N else list(self.steps) * self.N
        if not self.steps_are_h:
            return steps[: self.N]
        L = self.family.L
        if not (0 < L < math.inf):
            raise BuildError("dimensionless steps need a finite smoothness constant")
        return [h / L for h in steps[: self.N]]


def classical_bound(N: int, h: float, L: float = 1.0, R: float = 1.0) -> float:
    """Textbook guarantee 2 L R^2 / (4 + N h (2 - h)) for gradient descent
    on smooth convex functions, valid for h = L*alpha in (0, 2]."""
    if not (0 < h <= 2):
        raise BuildError(f"classical bound requires h in (0, 2], got {h}")
    if N < 0:
        raise BuildError(f"need N >= 0, got {N}")
    return 2.0 * L * R * R / (4.0 + N * h * (2.0 - h))


def build_gradient_method(spec: MethodSpec, representation: str = "tight") -> PEPProblem:
    """PEP for x_{i+1} = x_i - alpha_i g_i over the chosen function family.

    The minimizer is translated to the origin and its gradient eliminated;
    its function value stays a free scalar.  ``representation`` selects the
    exact interpolation constraints ("tight") or the discretized
    convexity + Lipschitz pair ("relaxed", valid upper bounds only).
    """
    if representation not in ("tight", "relaxed"):
        raise BuildError(f"unknown representation {representation!r}")
    fam = spec.family
    if fam.family not in (
        "smooth-strongly-convex",
        "convex",
        "strongly-convex",
        "relaxed-smooth-convex",
        "smooth-bounded-grad",
        "indicator-bounded",
    ):
        raise BuildError(f"{fam.family!r} is not a function family")
    if representation == "relaxed":
        if fam.family == "smooth-strongly-convex" and fam.mu != 0.0:
            raise BuildError("relaxed representation covers the smooth convex case only")
        if fam.family not in ("smooth-strongly-convex", "convex", "relaxed-smooth-convex"):
            raise BuildError("relaxed representation covers the smooth convex case only")
        fam = ClassSpec("relaxed-smooth-convex", L=fam.L)

    N = spec.N
    alphas = spec.alphas()

    x0 = BasisLabel("iterate-seed", "x_0")
    gs = [BasisLabel("gradient", f"g_{i}") for i in range(N + 1)]
    basis = [x0] + gs
    fvars = [ScalarVar(f"f_{i}") for i in range(N + 1)]
    fstar = ScalarVar("f_*")
    fvals = fvars + [fstar]

    xs = [VectorExpr.of(x0)]
    for i in range(N):
        xs.append(xs[i] - alphas[i] * VectorExpr.of(gs[i]))

    points = [(xs[i], VectorExpr.of(gs[i]), fvars[i]) for i in range(N + 1)]
    points.append((VectorExpr.zero(), VectorExpr.zero(), fstar))
    names = [str(i) for i in range(N + 1)] + ["*"]
    handle = FunctionDataHandle(tuple(points), name="f", point_names=tuple(names))

    constraints = list(function_constraints(handle, fam))
    constraints.append(
        Constraint("le0", sq_norm(xs[0]) - QuadExpr.of_const(spec.R**2), "init")
    )

    if spec.criterion == "last-iterate-gap":
        objective = QuadExpr.of_scalar(fvars[N]) - QuadExpr.of_scalar(fstar)
    elif spec.criterion == "gradient-norm-sq":
        objective = sq_norm(VectorExpr.of(gs[N]))
    else:
        t = ScalarVar("t_min")
        fvals.append(t)
        for i in range(N + 1):
            gap = QuadExpr.of_scalar(fvars[i]) - QuadExpr.of_scalar(fstar)
            constraints.append(
                Constraint("le0", QuadExpr.of_scalar(t) - gap, f"mingap({i})")
            )
        objective = QuadExpr.of_scalar(t)

    if spec.steps_are_h:
        hs = tuple(spec.steps)
    elif fam.L < math.inf:
        hs = tuple(a * fam.L for a in alphas)
    else:
        hs = tuple(alphas)
    meta = {
        "kind": "gradient",
        "representation": representation,
        "exact": representation == "tight" and family_is_exact(fam, len(points)),
        "criterion": spec.criterion,
        "family": fam.describe(),
        "N": N,
        "R": spec.R,
        "h": hs,
        "fval_groups": [{"anchor": fstar, "members": list(fvals)}],
    }
    return build_problem(basis, fvals, constraints, objective, meta=meta)


# ---------------------------------------------------------------------------
# decentralized gradient descent


@dataclass(frozen=True)
class DGDSpec:
    """Decentralized gradient descent over ``agents`` local functions.

    Each iteration averages the iterates through a network matrix with
    non-principal spectrum bounded by ``lam`` and then takes a local
    gradient step of size ``alpha``.  The default local family is convex
    with subgradient norms capped by ``grad_bound`` at all queried points;
    set ``grad_bound`` to None for plain families.  Performance criterion:
    average-function gap at the agent average of the final iterates, with
    per-agent initial condition |x_{a,0} - x*|^2 <= R^2.
    """

    N: int
    agents: int
    alpha: float
    lam: float
    family: ClassSpec = field(default_factory=lambda: ClassSpec("convex"))
    grad_bound: float | None = 1.0
    R: float = 1.0

    def __post_init__(self):
        if self.N < 0:
            raise BuildError(f"iteration count must be >= 0, got {self.N}")
        if self.agents < 2:
            raise BuildError(f"need at least 2 agents, got {self.agents}")
        if not (0 <= self.lam < 1):
            raise BuildError(f"spectral bound must lie in [0, 1), got {self.lam}")
        if self.R <= 0:
            raise BuildError(f"initial radius must be positive, got {self.R}")
        if self.grad_bound is not None and self.grad_bound <= 0:
            raise BuildError(f"gradient bound must be positive, got {self.grad_bound}")


def alternating_spectrum_matrix(agents: int, lam: float) -> np.ndarray:
    """Symmetric averaging matrix with spectrum {1, lam, -lam, lam, ...}.

    Built by conjugating the diagonal of eigenvalues with a fixed orthogonal
    basis whose first column is the normalized all-ones vector.
    """
    if agents < 2:
        raise BuildError(f"need at least 2 agents, got {agents}")
    if not (0 <= lam < 1):
        raise BuildError(f"spectral bound must lie in [0, 1), got {lam}")
    basis = np.zeros((agents, agents))
    basis[:, 0] = 1.0 / math.sqrt(agents)
    for k in range(1, agents):
        v = np.zeros(agents)
        v[:k] = 1.0
        v[k] = -float(k)
        basis[:, k] = v / np.linalg.norm(v)
    eigs = np.array([1.0] + [lam if k % 2 else -lam for k in range(1, agents)])
    return basis @ np.diag(eigs) @ basis.T


def extreme_spectrum_matrix(agents: int, lam: float, sign: int = -1) -> np.ndarray:
    """Averaging matrix with every non-principal eigenvalue at sign*lam.

    W = sign*lam*I + (1 - sign*lam)/A * J.  With sign=-1 this is the matrix
    recovered from spectral DGD worst cases, and the default fixed-matrix
    comparator in spectrum sweeps: it attains (numerically) the spectral
    bound wherever that bound is exact.
    """
    if agents < 2:
        raise BuildError(f"need at least 2 agents, got {agents}")
    if not (0 <= lam < 1):
        raise BuildError(f"spectral bound must lie in [0, 1), got {lam}")
    if sign not in (-1, 1):
        raise BuildError(f"sign must be -1 or +1, got {sign}")
    s = sign * lam
    return s * np.eye(agents) + (1.0 - s) / agents * np.ones((agents, agents))


W_FAMILIES = {
    "extreme-negative": lambda A, lam: extreme_spectrum_matrix(A, lam, -1),
    "extreme-positive": lambda A, lam: extreme_spectrum_matrix(A, lam, +1),
    "alternating": alternating_spectrum_matrix,
}


def validate_network_matrix(W: np.ndarray, lam: float, tol: float = 1e-9) -> np.ndarray:
    """Check symmetry, unit row sums, and the spectral band {1} + [-lam, lam]."""
    W = np.asarray(W, dtype=float)
    A = W.shape[0]
    if W.ndim != 2 or W.shape[1] != A:
        raise BuildError("network matrix must be square")
    if not np.allclose(W, W.T, atol=tol, rtol=0):
        raise BuildError("network matrix must be symmetric")
    if not np.allclose(W @ np.ones(A), np.ones(A), atol=tol, rtol=0):
        raise BuildError("network matrix rows must sum to 1")
    ones = np.ones(A) / math.sqrt(A)
    Q = _orth_complement(ones)
    rest = np.linalg.eigvalsh(Q.T @ W @ Q)
    if rest.size and (rest.min() < -lam - tol or rest.max() > lam + tol):
        raise BuildError(
            "network matrix eigenvalues outside the spectral band: "
            f"deflated spectrum [{rest.min():.3g}, {rest.max():.3g}] vs bound {lam:g}"
        )
    return W


def _orth_complement(unit: np.ndarray) -> np.ndarray:
    n = unit.shape[0]
    M = np.eye(n) - np.outer(unit, unit)
    q, r = np.linalg.qr(M)
    keep = np.abs(np.diag(r)) > 1e-12
    return q[:, keep]


def _build_dgd(spec: DGDSpec, W: np.ndarray | None) -> PEPProblem:
    A, N = spec.agents, spec.N
    basis: list[BasisLabel] = []
    fvals: list[ScalarVar] = []
    constraints: list[Constraint] = []
    nulls: list[VectorExpr] = []

    seeds = [BasisLabel("iterate-seed", f"x[{a},0]") for a in range(A)]
    basis.extend(seeds)
    xs = [[VectorExpr.of(seeds[a])] for a in range(A)]
    grads: list[list[VectorExpr]] = [[] for _ in range(A)]
    consensus_pairs: list[tuple[tuple[VectorExpr, VectorExpr], ...]] = []

    for i in range(N):
        if W is None:
            youts = [BasisLabel("operator-output", f"y[{a},{i}]") for a in range(A)]
            basis.extend(youts)
            ys = [VectorExpr.of(lab) for lab in youts]
            consensus_pairs.append(tuple((xs[a][i], ys[a]) for a in range(A)))
        else:
            ys = []
            for a in range(A):
                acc = VectorExpr.zero()
                for b in range(A):
                    acc = acc + W[a, b] * xs[b][i]
                ys.append(acc)
        glabs = [BasisLabel("gradient", f"g[{a},{i}]") for a in range(A)]
        basis.extend(glabs)
        for a in range(A):
            grads[a].append(VectorExpr.of(glabs[a]))
            xs[a].append(ys[a] - spec.alpha * grads[a][i])

    xbar_N = VectorExpr.zero()
    for a in range(A):
        xbar_N = xbar_N + xs[a][N]
    xbar_N = (1.0 / A) * xbar_N

    gavg = [BasisLabel("gradient", f"g[{a},avg]") for a in range(A)]
    gstar = [BasisLabel("gradient", f"g[{a},*]") for a in range(A)]
    basis.extend(gavg)
    basis.extend(gstar)

    favg = [ScalarVar(f"f[{a},avg]") for a in range(A)]
    fstar = [ScalarVar(f"f[{a},*]") for a in range(A)]
    fvgroups = []
    handles = []
    for a in range(A):
        fv = [ScalarVar(f"f[{a},{i}]") for i in range(N)]
        fvals.extend(fv + [favg[a], fstar[a]])
        pts = [(xs[a][i], grads[a][i], fv[i]) for i in range(N)]
        pts.append((xbar_N, VectorExpr.of(gavg[a]), favg[a]))
        pts.append((VectorExpr.zero(), VectorExpr.of(gstar[a]), fstar[a]))
        names = [str(i) for i in range(N)] + ["avg", "*"]
        handles.append(
            FunctionDataHandle(tuple(pts), name=f"f{a}", point_names=tuple(names))
        )
        fvgroups.append({"anchor": fstar[a], "members": fv + [favg[a], fstar[a]]})

    for a, handle in enumerate(handles):
        constraints.extend(function_constraints(handle, spec.family))
        if spec.grad_bound is not None:
            constraints.extend(bounded_gradient_constraints(handle, spec.grad_bound))

    # stationarity of the average function at the (translated) minimizer
    gsum = VectorExpr.zero()
    for a in range(A):
        gsum = gsum + VectorExpr.of(gstar[a])
    for b in basis:
        constraints.append(
            Constraint("eq0", inner(gsum, VectorExpr.of(b)), f"stationarity({b.tag})")
        )
    nulls.append(gsum)

    handle = None
    if W is None and consensus_pairs:
        handle = ConsensusDataHandle(
            tuple(consensus_pairs), agents=A, lam=spec.lam, name="W"
        )
        constraints.extend(network_matrix_constraints(handle, tuple(basis)))
        nulls.extend(consensus_null_directions(handle))

    for a in range(A):
        constraints.append(
            Constraint(
                "le0",
                sq_norm(xs[a][0]) - QuadExpr.of_const(spec.R**2),
                f"init({a})",
            )
        )

    objective = QuadExpr.zero()
    for a in range(A):
        objective = objective + QuadExpr.of_scalar(favg[a], 1.0 / A)
        objective = objective - QuadExpr.of_scalar(fstar[a], 1.0 / A)

    exact_family = family_is_exact(spec.family, N + 2)
    meta = {
        "kind": "dgd-spectral" if W is None else "dgd-fixed",
        "representation": "spectral" if W is None else "fixed-matrix",
        # a spectral problem with no consensus steps carries no relaxation
        "exact": exact_family if (W is not None or N == 0) else False,
        "needs_network_recovery": W is None and N > 0,
        "family": spec.family.describe(),
        "grad_bound": spec.grad_bound,
        "agents": A,
        "N": N,
        "alpha": spec.alpha,
        "lam": spec.lam,
        "R": spec.R,
        "consensus_handle": handle,
        "fval_groups": fvgroups,
    }
    if W is None and N > 0:
        # tightness becomes certifiable once a matrix is recovered, provided
        # the local family constraints are exact
        meta["exact_if_recovered"] = exact_family
    if W is not None:
        meta["W"] = np.asarray(W, dtype=float)
    return build_problem(basis, fvals, constraints, objective, nulls, meta)


def build_dgd_spectral(spec: DGDSpec) -> PEPProblem:
    """DGD with the averaging matrix known only through its spectral class.

    Consensus outputs are fresh basis labels tied to the inputs by the
    network-matrix interpolation constraints; the resulting value is a valid
    upper bound, exact whenever an admissible matrix can be recovered from
    the optimal Gram matrix.
    """
    return _build_dgd(spec, None)


def build_dgd_fixed_matrix(spec: DGDSpec, W: np.ndarray) -> PEPProblem:
    """DGD with an explicitly fixed averaging matrix.

    W must be symmetric with unit row sums and non-principal eigenvalues in
    [-lam, lam] (within 1e-9); consensus outputs are affine combinations, so
    no network constraints are generated.
    """
    W = validate_network_matrix(W, spec.lam)
    if W.shape[0] != spec.agents:
        raise BuildError(
            f"matrix is {W.shape[0]}x{W.shape[0]} but the method has {spec.agents} agents"
        )
    return _build_dgd(spec, W)


# ---------------------------------------------------------------------------
# generic fixed-step schemes


class _SchemeEnv:
    def __init__(self):
        self.vectors: dict[str, VectorExpr] = {"zero": VectorExpr.zero()}
        self.scalars: dict[str, ScalarVar] = {}
        self.basis: list[BasisLabel] = []
        self.fvals: list[ScalarVar] = []

    def new_vector(self, name: str, kind: str) -> VectorExpr:
        if name in self.vectors:
            raise BuildError(f"vector name {name!r} already defined")
        lab = BasisLabel(kind, name)
        self.basis.append(lab)
        self.vectors[name] = VectorExpr.of(lab)
        return self.vectors[name]

    def vector_out(self, name: str, kind: str) -> VectorExpr:
        """Resolve an output slot: reuse an existing expression (implicit
        steps, anchors at the origin) or mint a fresh label."""
        if name in self.vectors:
            return self.vectors[name]
        return self.new_vector(name, kind)

    def vector_in(self, name: str) -> VectorExpr:
        if name not in self.vectors:
            raise BuildError(f"undefined vector {name!r}")
        return self.vectors[name]

    def scalar_out(self, name: str) -> ScalarVar:
        if name in self.scalars:
            return self.scalars[name]
        var = ScalarVar(name)
        self.scalars[name] = var
        self.fvals.append(var)
        return var

    def combo(self, terms: dict) -> VectorExpr:
        acc = VectorExpr.zero()
        for name, coef in terms.items():
            acc = acc + float(coef) * self.vector_in(name)
        return acc


def build_custom_method(scheme: dict) -> PEPProblem:
    """Interpret a declarative fixed-step scheme into a PEPProblem.

    The scheme dict has keys "oracles", "points", "steps",
    "initial_conditions" and "objective"; see the README for the format.
    Update rules must be affine in previously defined expressions; every
    oracle query appends to that oracle's data handle, whose interpolation
    constraints are generated once all steps are laid down.
    """
    oracles = scheme.get("oracles")
    if not oracles:
        raise BuildError("scheme declares no oracles")
    env = _SchemeEnv()

    fn_points: dict[str, list] = {}
    op_pairs: dict[str, list] = {}
    lin_fwd: dict[str, list] = {}
    lin_adj: dict[str, list] = {}
    cons_steps: dict[str, list] = {}
    kinds: dict[str, str] = {}
    specs: dict[str, dict] = {}

    for name, od in oracles.items():
        kind = od.get("kind")
        if kind not in ("function", "operator", "linear-map", "consensus"):
            raise BuildError(f"oracle {name!r} has unknown kind {kind!r}")
        kinds[name] = kind
        specs[name] = od
        if kind == "function":
            fn_points[name] = []
            ClassSpec.from_dict(od["family"])  # validate early
        elif kind == "operator":
            op_pairs[name] = []
            ClassSpec.from_dict(od["family"])
        elif kind == "linear-map":
            lin_fwd[name] = []
            lin_adj[name] = []
            if od.get("bound", None) is None or od["bound"] < 0:
                raise BuildError(f"linear-map oracle {name!r} needs a bound >= 0")
        else:
            cons_steps[name] = []
            if od.get("agents", 0) < 2 or not (0 <= od.get("lam", -1) < 1):
                raise BuildError(f"consensus oracle {name!r} needs agents >= 2 and lam in [0,1)")

    for pname in scheme.get("points", []):
        env.new_vector(pname, "iterate-seed")

    def oracle_of(step, want):
        oname = step.get("oracle")
        if oname not in kinds:
            raise BuildError(f"undeclared oracle {oname!r}")
        if kinds[oname] != want:
            raise BuildError(f"oracle {oname!r} is a {kinds[oname]}, not a {want}")
        return oname

    for step in scheme.get("steps", []):
        do = step.get("do")
        if do == "fresh":
            env.new_vector(step["name"], "auxiliary")
        elif do == "affine":
            expr = env.combo(step["combo"])
            if step["name"] in env.vectors:
                raise BuildError(f"vector name {step['name']!r} already defined")
            env.vectors[step["name"]] = expr
        elif do == "gradient":
            oname = oracle_of(step, "function")
            at = env.vector_in(step["at"])
            g = env.vector_out(step["grad"], "gradient")
            fval = env.scalar_out(step["value"])
            fn_points[oname].append((at, g, fval, step.get("tag", step["at"])))
        elif do == "operator":
            oname = oracle_of(step, "operator")
            at = env.vector_in(step["at"])
            out = env.vector_out(step["out"], "operator-output")
            op_pairs[oname].append((at, out))
        elif do == "linear":
            oname = oracle_of(step, "linear-map")
            at = env.vector_in(step["at"])
            out = env.vector_out(step["out"], "operator-output")
            lin_fwd[oname].append((at, out))
        elif do == "adjoint":
            oname = oracle_of(step, "linear-map")
            at = env.vector_in(step["at"])
            out = env.vector_out(step["out"], "operator-output")
            lin_adj[oname].append((at, out))
        elif do == "consensus":
            oname = oracle_of(step, "consensus")
            ins = [env.vector_in(n) for n in step["at"]]
            outs = [env.vector_out(n, "operator-output") for n in step["out"]]
            if len(ins) != specs[oname]["agents"] or len(ins) != len(outs):
                raise BuildError(
                    f"consensus step needs exactly {specs[oname]['agents']} inputs and outputs"
                )
            cons_steps[oname].append(tuple(zip(ins, outs)))
        else:
            raise BuildError(f"unknown step kind {do!r}")

    constraints: list[Constraint] = []
    nulls: list[VectorExpr] = []
    exact = True

    for oname, kind in kinds.items():
        if kind == "function":
            pts = fn_points[oname]
            if not pts:
                continue
            spec = ClassSpec.from_dict(specs[oname]["family"])
            handle = FunctionDataHandle(
                tuple((x, g, f) for x, g, f, _ in pts),
                name=oname,
                point_names=tuple(t for *_, t in pts),
            )
            constraints.extend(function_constraints(handle, spec))
            exact = exact and family_is_exact(spec, len(pts))
        elif kind == "operator":
            prs = op_pairs[oname]
            if not prs:
                continue
            spec = ClassSpec.from_dict(specs[oname]["family"])
            handle = OperatorDataHandle(tuple(prs), name=oname)
            constraints.extend(operator_constraints(handle, spec))
        elif kind == "linear-map":
            if not lin_fwd[oname] and not lin_adj[oname]:
                continue
            handle = LinearMapDataHandle(
                tuple(lin_fwd[oname]),
                tuple(lin_adj[oname]),
                bound=float(specs[oname]["bound"]),
                name=oname,
            )
            constraints.extend(linear_operator_constraints(handle))
        else:
            if not cons_steps[oname]:
                continue
            handle = ConsensusDataHandle(
                tuple(cons_steps[oname]),
                agents=specs[oname]["agents"],
                lam=float(specs[oname]["lam"]),
                name=oname,
            )
            exact = False

    # consensus constraints need the final basis, so emit them last
    consensus_handles = {}
    for oname, steps_ in cons_steps.items():
        if steps_:
            handle = ConsensusDataHandle(
                tuple(steps_),
                agents=specs[oname]["agents"],
                lam=float(specs[oname]["lam"]),
                name=oname,
            )
            consensus_handles[oname] = handle
            constraints.extend(network_matrix_constraints(handle, tuple(env.basis)))
            nulls.extend(consensus_null_directions(handle))

    for k, cond in enumerate(scheme.get("initial_conditions", [])):
        expr = env.combo(cond["sqnorm_of"])
        rhs = float(cond["le"])
        constraints.append(
            Constraint("le0", sq_norm(expr) - QuadExpr.of_const(rhs), f"init({k})")
        )

    objd = scheme.get("objective") or {}
    objective = QuadExpr.of_const(float(objd.get("constant", 0.0)))
    for sname, coef in (objd.get("values") or {}).items():
        if sname not in env.scalars:
            raise BuildError(f"objective references undefined value {sname!r}")
        objective = objective + QuadExpr.of_scalar(env.scalars[sname], float(coef))
    for term in objd.get("inner", []) or []:
        u = env.combo(term["of"])
        v = env.combo(term["with"])
        objective = objective + float(term.get("coef", 1.0)) * inner(u, v)

    meta = {
        "kind": "custom",
        "representation": "custom",
        "exact": exact and not consensus_handles,
        "needs_network_recovery": bool(consensus_handles),
        "consensus_handle": next(iter(consensus_handles.values()), None),
        "lam": next(
            (float(specs[o]["lam"]) for o in consensus_handles), None
        ),
    }
    return build_problem(env.basis, env.fvals, constraints, objective, nulls, meta)


def gradient_scheme(N: int, h: float, L: float = 1.0, R: float = 1.0, mu: float = 0.0) -> dict:
    """SchemeConfig reproducing build_gradient_method (useful as a template
    and for consistency tests)."""
    steps = []
    combo_prev = "x0"
    for i in range(N + 1):
        steps.append(
            {"do": "gradient", "oracle": "f", "at": combo_prev, "grad": f"g{i}", "value": f"F{i}", "tag": str(i)}
        )
        if i < N:
            nxt = f"x{i+1}"
            steps.append(
                {"do": "affine", "name": nxt, "combo": {combo_prev: 1.0, f"g{i}": -h / L}}
            )
            combo_prev = nxt
    steps.append(
        {"do": "gradient", "oracle": "f", "at": "zero", "grad": "zero", "value": "Fstar", "tag": "*"}
    )
    return {
        "oracles": {
            "f": {"kind": "function", "family": {"name": "smooth-strongly-convex", "mu": mu, "L": L}}
        },
        "points": ["x0"],
        "steps": steps,
        "initial_conditions": [{"sqnorm_of": {"x0": 1.0}, "le": R * R}],
        "objective": {"values": {f"F{N}": 1.0, "Fstar": -1.0}},
    }

"""Interpolation constraints for function, operator, linear-map and
network-matrix families.

Each generator translates one interpolation theorem into a list of
Constraint objects over symbolic data handles.  ``check_numeric`` is the
numeric twin: it evaluates exactly the same inequality set on concrete
vectors and reports violations, which is what instance verification and
the feasibility-region scan rely on.

Conventions
-----------
* Inequalities are always emitted in "<= 0" form.
* Norm bounds (Lipschitz, gradient/radius caps) are emitted squared so the
  constraint stays linear in Gram entries.
* ``L = inf`` and ``mu = -inf`` are explicit sentinels; the vanishing terms
  are dropped algebraically instead of substituting a large number.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .gram import (
    BasisLabel,
    BuildError,
    Constraint,
    QuadExpr,
    ScalarVar,
    VectorExpr,
    inner,
    sq_norm,
)

INF = math.inf

FUNCTION_FAMILIES = (
    "smooth-strongly-convex",
    "relaxed-smooth-convex",
    "convex",
    "strongly-convex",
    "cyclically-monotone",
    "smooth-bounded-grad",
    "indicator-bounded",
)
OPERATOR_FAMILIES = ("monotone", "cocoercive", "lipschitz-op")

CYCLE_SIZE_CAP = 8


@dataclass(frozen=True)
class ClassSpec:
    """A function/operator family with its parameters.

    ``strict_equal_curvature`` gates the degenerate mu == L branch of the
    smooth strongly convex constraints (see smooth_strongly_convex_constraints).
    """

    family: str
    mu: float = 0.0
    L: float = INF
    M: float | None = None
    beta: float | None = None
    K: int | None = None
    strict_equal_curvature: bool = False

    def __post_init__(self):
        fam = self.family
        if fam not in FUNCTION_FAMILIES + OPERATOR_FAMILIES:
            raise BuildError(f"unknown family {fam!r}")
        if fam in ("smooth-strongly-convex", "cyclically-monotone", "strongly-convex"):
            _validate_mu_L(self.mu, self.L)
        if fam in ("relaxed-smooth-convex", "smooth-bounded-grad", "lipschitz-op"):
            if not (0 < self.L < INF) and not (fam == "lipschitz-op" and self.L == 0):
                raise BuildError(f"{fam} needs a finite positive L, got {self.L}")
        if fam in ("smooth-bounded-grad", "indicator-bounded"):
            if self.M is None or self.M <= 0:
                raise BuildError(f"{fam} needs M > 0, got {self.M}")
        if fam == "cocoercive" and (self.beta is None or self.beta <= 0):
            raise BuildError(f"cocoercive needs beta > 0, got {self.beta}")
        if fam == "cyclically-monotone":
            if self.K is not None and self.K < 2:
                raise BuildError(f"cycle length cap must be >= 2, got {self.K}")

    @classmethod
    def from_dict(cls, d: dict) -> "ClassSpec":
        d = dict(d)
        name = d.pop("name", None)
        if name is None:
            raise BuildError("family dict needs a 'name' key")
        allowed = {"mu", "L", "M", "beta", "K", "strict_equal_curvature"}
        bad = set(d) - allowed
        if bad:
            raise BuildError(f"unknown family parameter(s): {sorted(bad)}")
        if "L" in d and d["L"] in ("inf", "Infinity", None):
            d["L"] = INF
        return cls(family=name, **d)

    def describe(self) -> str:
        bits = [self.family]
        if self.family in ("smooth-strongly-convex", "strongly-convex", "cyclically-monotone", "monotone"):
            bits.append(f"mu={self.mu:g}")
        if self.family not in ("convex", "strongly-convex", "indicator-bounded", "monotone", "cocoercive"):
            bits.append(f"L={self.L:g}")
        if self.M is not None:
            bits.append(f"M={self.M:g}")
        if self.beta is not None:
            bits.append(f"beta={self.beta:g}")
        return "(".join([bits[0], ",".join(bits[1:]) + ")"]) if len(bits) > 1 else bits[0]


def _validate_mu_L(mu: float, L: float):
    if L != INF and L <= 0:
        raise BuildError(f"smoothness constant must be positive or inf, got {L}")
    if mu == -INF and L == INF:
        raise BuildError("mu = -inf together with L = inf constrains nothing")
    if mu > L:
        raise BuildError(f"need mu <= L, got mu={mu}, L={L}")


# ---------------------------------------------------------------------------
# data handles


@dataclass(frozen=True)
class FunctionDataHandle:
    """Triples (point, gradient, value) queried from one function."""

    points: tuple[tuple[VectorExpr, VectorExpr, ScalarVar], ...]
    name: str = "f"
    point_names: tuple[str, ...] | None = None

    def names(self) -> list[str]:
        if self.point_names is not None:
            if len(self.point_names) != len(self.points):
                raise BuildError("point_names length mismatch")
            return list(self.point_names)
        return [str(i) for i in range(len(self.points))]


@dataclass(frozen=True)
class OperatorDataHandle:
    """Pairs (input, output) queried from one operator."""

    pairs: tuple[tuple[VectorExpr, VectorExpr], ...]
    name: str = "Q"
    point_names: tuple[str, ...] | None = None

    def names(self) -> list[str]:
        if self.point_names is not None:
            return list(self.point_names)
        return [str(i) for i in range(len(self.pairs))]


@dataclass(frozen=True)
class LinearMapDataHandle:
    """Forward pairs (x, y=Mx) and adjoint pairs (u, v=M^T u) with a bound
    on the largest singular value."""

    forward: tuple[tuple[VectorExpr, VectorExpr], ...]
    adjoint: tuple[tuple[VectorExpr, VectorExpr], ...]
    bound: float
    name: str = "M"

    def __post_init__(self):
        if self.bound < 0:
            raise BuildError(f"operator norm bound must be >= 0, got {self.bound}")


@dataclass(frozen=True)
class ConsensusDataHandle:
    """Per-step, per-agent pairs (x_{a,i}, y_{a,i}) of a consensus map."""

    steps: tuple[tuple[tuple[VectorExpr, VectorExpr], ...], ...]
    agents: int
    lam: float
    name: str = "W"

    def __post_init__(self):
        if self.agents < 2:
            raise BuildError(f"need at least 2 agents, got {self.agents}")
        if not (0 <= self.lam < 1):
            raise BuildError(f"spectral bound must lie in [0, 1), got {self.lam}")
        for i, step in enumerate(self.steps):
            if len(step) != self.agents:
                raise BuildError(
                    f"consensus step {i} has {len(step)} pairs for {self.agents} agents"
                )


# ---------------------------------------------------------------------------
# function families


def smooth_strongly_convex_constraints(
    h: FunctionDataHandle,
    mu: float,
    L: float,
    strict_equal_curvature: bool = False,
) -> list[Constraint]:
    """Exact interpolation constraints for L-smooth mu-strongly-convex data.

    One "<= 0" constraint per ordered pair (i, j), i != j:

        f_j - f_i + <g_j, x_i - x_j> + |g_i - g_j|^2 / (2(L - mu))
            + mu L |x_i - x_j|^2 / (2(L - mu))
            - mu <g_i - g_j, x_i - x_j> / (L - mu)  <= 0

    mu may be negative (weakly convex).  L = inf drops the gradient terms
    (plain strong convexity); mu = -inf drops to the smooth lower bound.
    The mu == L branch uses a different printed formula and is only active
    behind ``strict_equal_curvature`` because its coefficient pattern does
    not match the mu -> L limit of the generic branch.
    """
    _validate_mu_L(mu, L)
    if mu == L:
        if not strict_equal_curvature:
            raise BuildError(
                "mu == L requires strict_equal_curvature=True (degenerate branch)"
            )
        return _equal_curvature_constraints(h, L)

    if L == INF:
        a, b, c = 0.0, mu / 2.0, 0.0
    elif mu == -INF:
        a, b, c = 0.0, -L / 2.0, 1.0
    else:
        a = 1.0 / (2.0 * (L - mu))
        b = mu * L / (2.0 * (L - mu))
        c = -mu / (L - mu)

    names = h.names()
    cons: list[Constraint] = []
    for i, j in itertools.permutations(range(len(h.points)), 2):
        xi, gi, fi = h.points[i]
        xj, gj, fj = h.points[j]
        dx = xi - xj
        dg = gi - gj
        expr = (
            QuadExpr.of_scalar(fj)
            - QuadExpr.of_scalar(fi)
            + inner(gj, dx)
        )
        if a:
            expr = expr + a * sq_norm(dg)
        if b:
            expr = expr + b * sq_norm(dx)
        if c:
            expr = expr + c * inner(dg, dx)
        cons.append(Constraint("le0", expr, f"{h.name}:interp({names[i]},{names[j]})"))
    return cons


def _equal_curvature_constraints(h: FunctionDataHandle, L: float) -> list[Constraint]:
    # f_i >= f_j + (1/2)<g_i+g_j, x_i-x_j> + |g_i - g_j - L(x_i-x_j)|^2 / L
    names = h.names()
    cons = []
    for i, j in itertools.permutations(range(len(h.points)), 2):
        xi, gi, fi = h.points[i]
        xj, gj, fj = h.points[j]
        dx = xi - xj
        w = (gi - gj) - L * dx
        expr = (
            QuadExpr.of_scalar(fj)
            - QuadExpr.of_scalar(fi)
            + 0.5 * inner(gi + gj, dx)
            + (1.0 / L) * sq_norm(w)
        )
        cons.append(
            Constraint("le0", expr, f"{h.name}:interp-eq({names[i]},{names[j]})")
        )
    return cons


def relaxed_smooth_convex_constraints(
    h: FunctionDataHandle, L: float
) -> list[Constraint]:
    """Discretized convexity + Lipschitz-gradient constraints.

    This pair is necessary but NOT sufficient for smooth convex
    interpolability; bounds built on it are valid but generally loose.
    """
    if not (0 < L < INF):
        raise BuildError(f"relaxed representation needs finite L > 0, got {L}")
    names = h.names()
    cons: list[Constraint] = []
    n = len(h.points)
    for i, j in itertools.permutations(range(n), 2):
        xi, gi, fi = h.points[i]
        xj, gj, fj = h.points[j]
        expr = QuadExpr.of_scalar(fj) - QuadExpr.of_scalar(fi) + inner(gj, xi - xj)
        cons.append(Constraint("le0", expr, f"{h.name}:cvx({names[i]},{names[j]})"))
    for i, j in itertools.combinations(range(n), 2):
        xi, gi, _ = h.points[i]
        xj, gj, _ = h.points[j]
        expr = sq_norm(gi - gj) - (L * L) * sq_norm(xi - xj)
        cons.append(Constraint("le0", expr, f"{h.name}:lip({names[i]},{names[j]})"))
    return cons


def cyclic_monotonicity_constraints(
    pairs: OperatorDataHandle,
    mu: float,
    L: float,
    max_cycle_len: int | None = None,
    allow_large: bool = False,
) -> list[Constraint]:
    """Gradient-consistency constraints without function values.

    One "<= 0" constraint per directed cycle of length 2..K (up to rotation):
    the cyclic sum

        sum_k  <g_k, x_k - x_{k+1}> - <g_k, g_k - g_{k+1}>/L
              - mu <x_k, x_k - x_{k+1}> - mu <x_k, g_k - g_{k+1}>/L

    must be >= 0.  Enumeration is factorial in the data size, hence the
    hard input-size gate at |I| = 8 unless ``allow_large`` overrides it.
    """
    _validate_mu_L(mu, L)
    if not (0 < L < INF):
        raise BuildError(f"cyclic monotonicity needs finite L > 0, got {L}")
    n = len(pairs.pairs)
    if max_cycle_len is not None and max_cycle_len < 2:
        raise BuildError(f"cycle length cap must be >= 2, got {max_cycle_len}")
    if n < 2:
        return []
    K = min(n if max_cycle_len is None else max_cycle_len, n)
    if n > CYCLE_SIZE_CAP and not allow_large:
        raise BuildError(
            f"{n} data points exceed the cycle-enumeration cap of {CYCLE_SIZE_CAP}; "
            "pass allow_large=True to override"
        )
    names = pairs.names()
    cons: list[Constraint] = []
    for cycle in _directed_cycles(n, K):
        expr = QuadExpr.zero()
        m = len(cycle)
        for k in range(m):
            x_k, g_k = pairs.pairs[cycle[k]]
            x_n, g_n = pairs.pairs[cycle[(k + 1) % m]]
            term = inner(g_k, x_k - x_n) - (1.0 / L) * inner(g_k, g_k - g_n)
            if mu:
                term = term - mu * inner(x_k, x_k - x_n)
                term = term - (mu / L) * inner(x_k, g_k - g_n)
            expr = expr + term
        label = f"{pairs.name}:cycle({','.join(names[c] for c in cycle)})"
        cons.append(Constraint("le0", -expr, label))
    return cons


def _directed_cycles(n: int, max_len: int):
    """All directed cycles of length 2..max_len over range(n), one
    representative per rotation class (smallest index first)."""
    for length in range(2, max_len + 1):
        for combo in itertools.combinations(range(n), length):
            first = combo[0]
            for rest in itertools.permutations(combo[1:]):
                yield (first,) + rest


def count_cycles(n: int, max_len: int) -> int:
    return sum(1 for _ in _directed_cycles(n, max_len))


def smooth_bounded_grad_constraints(
    h: FunctionDataHandle, L: float, M: float
) -> list[Constraint]:
    """Exact interpolation for L-smooth functions with gradient norm <= M."""
    if not (0 < L < INF):
        raise BuildError(f"need finite L > 0, got {L}")
    if M <= 0:
        raise BuildError(f"need M > 0, got {M}")
    names = h.names()
    cons: list[Constraint] = []
    for i, j in itertools.permutations(range(len(h.points)), 2):
        xi, gi, fi = h.points[i]
        xj, gj, fj = h.points[j]
        dx = xi - xj
        expr = (
            QuadExpr.of_scalar(fi)
            - QuadExpr.of_scalar(fj)
            - inner(gj, dx)
            - (L / 2.0) * sq_norm(dx)
        )
        cons.append(Constraint("le0", expr, f"{h.name}:upper({names[i]},{names[j]})"))
    for i, (xi, gi, fi) in enumerate(h.points):
        expr = sq_norm(gi) - QuadExpr.of_const(M * M)
        cons.append(Constraint("le0", expr, f"{h.name}:gbound({names[i]})"))
    return cons


def indicator_constraints(h: FunctionDataHandle, M: float) -> list[Constraint]:
    """Exact interpolation for indicator functions of convex sets of radius <= M.

    Gradients are normal-cone elements; values must vanish."""
    if M <= 0:
        raise BuildError(f"need M > 0, got {M}")
    names = h.names()
    cons: list[Constraint] = []
    for i, (xi, gi, fi) in enumerate(h.points):
        cons.append(
            Constraint("eq0", QuadExpr.of_scalar(fi), f"{h.name}:zero({names[i]})")
        )
    for i, j in itertools.permutations(range(len(h.points)), 2):
        xi, _, _ = h.points[i]
        xj, gj, _ = h.points[j]
        expr = inner(gj, xi - xj)
        cons.append(Constraint("le0", expr, f"{h.name}:normal({names[i]},{names[j]})"))
    for i, (xi, _, _) in enumerate(h.points):
        expr = sq_norm(xi) - QuadExpr.of_const(M * M)
        cons.append(Constraint("le0", expr, f"{h.name}:radius({names[i]})"))
    return cons


def bounded_gradient_constraints(h: FunctionDataHandle, M: float) -> list[Constraint]:
    """Per-point squared gradient-norm caps |g_i|^2 <= M^2.

    Juxtaposed with plain convexity this stays an exact interpolation
    constraint (the max-of-affine interpolant keeps all subgradients in the
    convex hull of the data gradients)."""
    if M <= 0:
        raise BuildError(f"need M > 0, got {M}")
    names = h.names()
    return [
        Constraint(
            "le0",
            sq_norm(g) - QuadExpr.of_const(M * M),
            f"{h.name}:gbound({names[i]})",
        )
        for i, (x, g, f) in enumerate(h.points)
    ]


# ---------------------------------------------------------------------------
# operator families


def operator_constraints(h: OperatorDataHandle, spec: ClassSpec) -> list[Constraint]:
    """Exact interpolation for monotone / cocoercive / Lipschitz operators."""
    if spec.family not in OPERATOR_FAMILIES:
        raise BuildError(f"{spec.family!r} is not an operator family")
    names = h.names()
    cons: list[Constraint] = []
    for i, j in itertools.combinations(range(len(h.pairs)), 2):
        xi, qi = h.pairs[i]
        xj, qj = h.pairs[j]
        dx = xi - xj
        dq = qi - qj
        if spec.family == "monotone":
            expr = spec.mu * sq_norm(dx) - inner(dq, dx)
            tag = "mono"
        elif spec.family == "cocoercive":
            expr = spec.beta * sq_norm(dq) - inner(dq, dx)
            tag = "coco"
        else:
            expr = sq_norm(dq) - (spec.L * spec.L) * sq_norm(dx)
            tag = "lip"
        cons.append(Constraint("le0", expr, f"{h.name}:{tag}({names[i]},{names[j]})"))
    return cons


def linear_operator_constraints(h: LinearMapDataHandle) -> list[Constraint]:
    """Interpolation constraints for a linear map with sigma_max <= L.

    Adjoint coupling X^T V = Y^T U entry-wise, plus the two LMIs
    L^2 X^T X - Y^T Y >= 0 and L^2 U^T U - V^T V >= 0.
    """
    if not h.forward and not h.adjoint:
        raise BuildError("linear-map handle has neither forward nor adjoint pairs")
    L2 = h.bound * h.bound
    cons: list[Constraint] = []
    for i, (x, _) in enumerate(h.forward):
        for j, (u, _) in enumerate(h.adjoint):
            y = h.forward[i][1]
            v = h.adjoint[j][1]
            expr = inner(x, v) - inner(y, u)
            cons.append(Constraint("eq0", expr, f"{h.name}:adjoint({i},{j})"))
    if h.forward:
        n = len(h.forward)
        rows = [[None] * n for _ in range(n)]
        for i in range(n):
            for j in range(i, n):
                xi, yi = h.forward[i]
                xj, yj = h.forward[j]
                e = L2 * inner(xi, xj) - inner(yi, yj)
                rows[i][j] = e
                rows[j][i] = e
        body = tuple(tuple(r) for r in rows)
        cons.append(Constraint("lmi", body, f"{h.name}:fwd-lmi"))
    if h.adjoint:
        n = len(h.adjoint)
        rows = [[None] * n for _ in range(n)]
        for i in range(n):
            for j in range(i, n):
                ui, vi = h.adjoint[i]
                uj, vj = h.adjoint[j]
                e = L2 * inner(ui, uj) - inner(vi, vj)
                rows[i][j] = e
                rows[j][i] = e
        body = tuple(tuple(r) for r in rows)
        cons.append(Constraint("lmi", body, f"{h.name}:adj-lmi"))
    return cons


# ---------------------------------------------------------------------------
# network matrices


def consensus_centered(h: ConsensusDataHandle) -> list[list[tuple[VectorExpr, VectorExpr]]]:
    """Centered parts (x_tilde, y_tilde) per step and agent."""
    out = []
    for step in h.steps:
        xbar = VectorExpr.zero()
        ybar = VectorExpr.zero()
        for x, y in step:
            xbar = xbar + x
            ybar = ybar + y
        xbar = (1.0 / h.agents) * xbar
        ybar = (1.0 / h.agents) * ybar
        out.append([(x - xbar, y - ybar) for x, y in step])
    return out


def consensus_sum_gaps(h: ConsensusDataHandle) -> list[VectorExpr]:
    """s_i = sum_a (x_{a,i} - y_{a,i}); zero iff the step preserves averages."""
    gaps = []
    for step in h.steps:
        s = VectorExpr.zero()
        for x, y in step:
            s = s + (x - y)
        gaps.append(s)
    return gaps


def network_matrix_constraints(
    h: ConsensusDataHandle, basis: tuple[BasisLabel, ...]
) -> list[Constraint]:
    """Necessary constraints for interpolability by a symmetric averaging
    matrix with non-principal spectrum in [-lam, lam].

    Average preservation is imposed as <s_i, b> = 0 against every registered
    basis label (the strongest Gram-expressible form); the symmetry and
    variance-reduction constraints act on the centered parts.  These
    conditions are necessary but not known to be sufficient, so problems
    using them certify tightness only after a network matrix is recovered
    from the solution.
    """
    cons: list[Constraint] = []
    gaps = consensus_sum_gaps(h)
    for i, s in enumerate(gaps):
        for b in basis:
            expr = inner(s, VectorExpr.of(b))
            cons.append(Constraint("eq0", expr, f"{h.name}:avg({i},{b.tag})"))

    centered = consensus_centered(h)
    nsteps = len(h.steps)
    for i, j in itertools.combinations(range(nsteps), 2):
        expr = QuadExpr.zero()
        for a in range(h.agents):
            xti, yti = centered[i][a]
            xtj, ytj = centered[j][a]
            expr = expr + inner(xti, ytj) - inner(yti, xtj)
        cons.append(Constraint("eq0", expr, f"{h.name}:sym({i},{j})"))

    if nsteps:
        lam2 = h.lam * h.lam
        rows = [[None] * nsteps for _ in range(nsteps)]
        for i in range(nsteps):
            for j in range(i, nsteps):
                expr = QuadExpr.zero()
                for a in range(h.agents):
                    xti, yti = centered[i][a]
                    xtj, ytj = centered[j][a]
                    expr = expr + lam2 * inner(xti, xtj) - inner(yti, ytj)
                rows[i][j] = expr
                rows[j][i] = expr
        body = tuple(tuple(r) for r in rows)
        cons.append(Constraint("lmi", body, f"{h.name}:var-lmi"))
    return cons


def consensus_null_directions(h: ConsensusDataHandle) -> list[VectorExpr]:
    """Vector expressions that the consensus constraints force to zero.

    The average gaps s_i always vanish; at lam = 0 the variance-reduction
    LMI additionally pins every centered output to the origin.
    """
    nulls = list(consensus_sum_gaps(h))
    if h.lam == 0.0:
        for step in consensus_centered(h):
            for _, yt in step:
                nulls.append(yt)
    return nulls


# ---------------------------------------------------------------------------
# dispatch helpers


def function_constraints(h: FunctionDataHandle, spec: ClassSpec) -> list[Constraint]:
    """Generate the interpolation constraints of a function family."""
    fam = spec.family
    if fam == "smooth-strongly-convex":
        return smooth_strongly_convex_constraints(
            h, spec.mu, spec.L, spec.strict_equal_curvature
        )
    if fam == "convex":
        return smooth_strongly_convex_constraints(h, 0.0, INF)
    if fam == "strongly-convex":
        return smooth_strongly_convex_constraints(h, spec.mu, INF)
    if fam == "relaxed-smooth-convex":
        return relaxed_smooth_convex_constraints(h, spec.L)
    if fam == "smooth-bounded-grad":
        return smooth_bounded_grad_constraints(h, spec.L, spec.M)
    if fam == "indicator-bounded":
        return indicator_constraints(h, spec.M)
    if fam == "cyclically-monotone":
        pairs = OperatorDataHandle(
            tuple((x, g) for x, g, _ in h.points),
            name=h.name,
            point_names=tuple(h.names()),
        )
        return cyclic_monotonicity_constraints(pairs, spec.mu, spec.L, spec.K)
    raise BuildError(f"{fam!r} is not a function family")


def family_is_exact(spec: ClassSpec, npoints: int | None = None) -> bool:
    """Whether the generated constraints are exact interpolation constraints
    (as opposed to necessary-only relaxations)."""
    if spec.family == "relaxed-smooth-convex":
        return False
    if spec.family == "cyclically-monotone":
        if npoints is None:
            return spec.K is None
        return spec.K is None or spec.K >= npoints
    return True


# ---------------------------------------------------------------------------
# numeric twin


@dataclass(frozen=True)
class FunctionData:
    """Concrete triples for the numeric checker; one row per point."""

    xs: np.ndarray
    gs: np.ndarray
    fs: np.ndarray

    @classmethod
    def from_rows(cls, rows) -> "FunctionData":
        xs = np.atleast_2d(np.asarray([r[0] for r in rows], dtype=float))
        gs = np.atleast_2d(np.asarray([r[1] for r in rows], dtype=float))
        fs = np.asarray([r[2] for r in rows], dtype=float)
        if xs.ndim == 2 and xs.shape[0] != len(rows):
            xs = xs.T
            gs = gs.T
        return cls(xs, gs, fs)


@dataclass(frozen=True)
class OperatorData:
    xs: np.ndarray
    qs: np.ndarray


@dataclass(frozen=True)
class LinearMapData:
    xs: np.ndarray
    ys: np.ndarray
    us: np.ndarray
    vs: np.ndarray
    bound: float


@dataclass(frozen=True)
class ConsensusData:
    """xs, ys with shape (steps, agents, dim)."""

    xs: np.ndarray
    ys: np.ndarray
    lam: float


@dataclass
class FeasibilityReport:
    feasible: bool
    max_residual: float
    violations: list[tuple[str, float]]
    tol: float
    checked: int

    def __bool__(self):
        return self.feasible


def _as_2d(arr) -> np.ndarray:
    a = np.asarray(arr, dtype=float)
    if a.ndim == 1:
        a = a[:, None]
    return a


def _constraint_residual(con: Constraint, gram_of, fval_of) -> float:
    if con.kind == "le0":
        return max(con.body.evaluate(gram_of, fval_of), 0.0)
    if con.kind == "eq0":
        return abs(con.body.evaluate(gram_of, fval_of))
    n = len(con.body)
    mat = np.empty((n, n))
    for i in range(n):
        for j in range(n):
            mat[i, j] = con.body[i][j].evaluate(gram_of, fval_of)
    mat = 0.5 * (mat + mat.T)
    return max(0.0, -float(np.linalg.eigvalsh(mat)[0]))


def evaluate_constraints(
    constraints, gram_of, fval_of, tol: float
) -> FeasibilityReport:
    """Residuals of a constraint list; feasible iff max residual <= tol."""
    max_res = 0.0
    violations = []
    for con in constraints:
        r = float(_constraint_residual(con, gram_of, fval_of))
        if r > max_res:
            max_res = r
        if r > tol:
            violations.append((con.label, r))
    return FeasibilityReport(
        feasible=bool(max_res <= tol),
        max_residual=max_res,
        violations=violations,
        tol=tol,
        checked=len(constraints),
    )


def check_numeric(data, spec: ClassSpec | None = None, tol: float = 1e-9) -> FeasibilityReport:
    """Test concrete data against the same inequalities the generators emit.

    ``data`` is one of FunctionData, OperatorData, LinearMapData,
    ConsensusData; ``spec`` is required for the first two.  The check is
    implemented by building the symbolic constraints on scratch labels and
    evaluating them, so generator and checker cannot drift apart.
    """
    if isinstance(data, FunctionData):
        if spec is None:
            raise BuildError("a ClassSpec is required to check function data")
        xs, gs = _as_2d(data.xs), _as_2d(data.gs)
        fs = np.asarray(data.fs, dtype=float)
        n = xs.shape[0]
        if gs.shape[0] != n or fs.shape[0] != n:
            raise BuildError("function data rows disagree in length")
        if xs.shape[1] != gs.shape[1]:
            raise BuildError("points and gradients disagree in dimension")
        labels = [BasisLabel("auxiliary", f"x{i}") for i in range(n)]
        glabels = [BasisLabel("auxiliary", f"g{i}") for i in range(n)]
        fvars = [ScalarVar(f"f{i}") for i in range(n)]
        handle = FunctionDataHandle(
            tuple(
                (VectorExpr.of(labels[i]), VectorExpr.of(glabels[i]), fvars[i])
                for i in range(n)
            )
        )
        cons = function_constraints(handle, spec)
        vecs = {labels[i]: xs[i] for i in range(n)}
        vecs.update({glabels[i]: gs[i] for i in range(n)})
        fmap = {fvars[i]: fs[i] for i in range(n)}
        return evaluate_constraints(
            cons, lambda a, b: float(vecs[a] @ vecs[b]), fmap.__getitem__, tol
        )

    if isinstance(data, OperatorData):
        if spec is None:
            raise BuildError("a ClassSpec is required to check operator data")
        xs, qs = _as_2d(data.xs), _as_2d(data.qs)
        n = xs.shape[0]
        labels = [BasisLabel("auxiliary", f"x{i}") for i in range(n)]
        qlabels = [BasisLabel("auxiliary", f"q{i}") for i in range(n)]
        handle = OperatorDataHandle(
            tuple((VectorExpr.of(labels[i]), VectorExpr.of(qlabels[i])) for i in range(n))
        )
        if spec.family == "cyclically-monotone":
            cons = cyclic_monotonicity_constraints(handle, spec.mu, spec.L, spec.K)
        else:
            cons = operator_constraints(handle, spec)
        vecs = {labels[i]: xs[i] for i in range(n)}
        vecs.update({qlabels[i]: qs[i] for i in range(n)})
        return evaluate_constraints(
            cons, lambda a, b: float(vecs[a] @ vecs[b]), None, tol
        )

    if isinstance(data, LinearMapData):
        xs, ys = _as_2d(data.xs), _as_2d(data.ys)
        us, vs = _as_2d(data.us), _as_2d(data.vs)
        nf, na = xs.shape[0], us.shape[0]
        xl = [BasisLabel("auxiliary", f"x{i}") for i in range(nf)]
        yl = [BasisLabel("auxiliary", f"y{i}") for i in range(nf)]
        ul = [BasisLabel("auxiliary", f"u{i}") for i in range(na)]
        vl = [BasisLabel("auxiliary", f"v{i}") for i in range(na)]
        handle = LinearMapDataHandle(
            tuple((VectorExpr.of(xl[i]), VectorExpr.of(yl[i])) for i in range(nf)),
            tuple((VectorExpr.of(ul[i]), VectorExpr.of(vl[i])) for i in range(na)),
            bound=data.bound,
        )
        cons = linear_operator_constraints(handle)
        vecs = {}
        for i in range(nf):
            vecs[xl[i]] = xs[i]
            vecs[yl[i]] = ys[i]
        for i in range(na):
            vecs[ul[i]] = us[i]
            vecs[vl[i]] = vs[i]
        return evaluate_constraints(
            cons, lambda a, b: float(vecs[a] @ vecs[b]), None, tol
        )

    if isinstance(data, ConsensusData):
        xs = np.asarray(data.xs, dtype=float)
        ys = np.asarray(data.ys, dtype=float)
        if xs.ndim == 2:
            xs = xs[:, :, None]
            ys = ys[:, :, None]
        nsteps, agents, _ = xs.shape
        xl = [[BasisLabel("auxiliary", f"x{a},{i}") for a in range(agents)] for i in range(nsteps)]
        yl = [[BasisLabel("auxiliary", f"y{a},{i}") for a in range(agents)] for i in range(nsteps)]
        handle = ConsensusDataHandle(
            tuple(
                tuple((VectorExpr.of(xl[i][a]), VectorExpr.of(yl[i][a])) for a in range(agents))
                for i in range(nsteps)
            ),
            agents=agents,
            lam=data.lam,
        )
        basis = tuple(lab for row in xl for lab in row) + tuple(
            lab for row in yl for lab in row
        )
        cons = network_matrix_constraints(handle, basis)
        vecs = {}
        for i in range(nsteps):
            for a in range(agents):
                vecs[xl[i][a]] = xs[i, a]
                vecs[yl[i][a]] = ys[i, a]
        return evaluate_constraints(
            cons, lambda a, b: float(vecs[a] @ vecs[b]), None, tol
        )

    raise BuildError(f"cannot check data of type {type(data).__name__}")

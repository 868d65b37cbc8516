"""Symbolic layer for building performance-estimation problems.

The unknowns of a PEP are abstract vectors (iterates, gradients, operator
outputs) and free scalars (function values).  Vectors never get coordinates:
they are formal linear combinations of opaque basis labels, and every scalar
quantity of interest is affine in the pairwise scalar products of those
labels (entries of a Gram matrix) and in the scalar symbols.  This module
provides that algebra plus the validated problem container handed to the
SDP compiler.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Sequence

_UID = itertools.count(1)

LABEL_KINDS = ("iterate-seed", "gradient", "operator-output", "auxiliary")


class BuildError(ValueError):
    """Raised when problem construction is handed inconsistent parts."""


@dataclass(frozen=True, eq=False)
class BasisLabel:
    """One abstract basis vector of the Gram lift.

    Identity is by object; ``uid`` is a process-wide counter used only to
    canonicalize unordered pairs.  The Gram index of a label is its position
    in the owning problem's basis list, not its uid.
    """

    kind: str
    tag: str
    uid: int = field(default_factory=lambda: next(_UID))

    def __post_init__(self):
        if self.kind not in LABEL_KINDS:
            raise BuildError(f"unknown basis-label kind {self.kind!r}")

    def __repr__(self):
        return f"<{self.tag}>"


@dataclass(frozen=True, eq=False)
class ScalarVar:
    """A free scalar symbol (function value, auxiliary objective variable)."""

    tag: str
    uid: int = field(default_factory=lambda: next(_UID))

    def __repr__(self):
        return f"<{self.tag}>"


class VectorExpr:
    """Immutable formal linear combination of basis labels.

    The empty combination is the origin (used e.g. for a minimizer after
    translation).  Supports +, -, and scaling by reals.
    """

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Mapping[BasisLabel, float] | None = None):
        clean: dict[BasisLabel, float] = {}
        if coeffs:
            for lab, c in coeffs.items():
                c = float(c)
                if c != 0.0:
                    clean[lab] = c
        self.coeffs = clean

    @classmethod
    def zero(cls) -> "VectorExpr":
        return cls()

    @classmethod
    def of(cls, label: BasisLabel) -> "VectorExpr":
        return cls({label: 1.0})

    @property
    def is_zero(self) -> bool:
        return not self.coeffs

    def labels(self) -> set[BasisLabel]:
        return set(self.coeffs)

    def __add__(self, other: "VectorExpr") -> "VectorExpr":
        if not isinstance(other, VectorExpr):
            return NotImplemented
        out = dict(self.coeffs)
        for lab, c in other.coeffs.items():
            out[lab] = out.get(lab, 0.0) + c
        return VectorExpr(out)

    def __sub__(self, other: "VectorExpr") -> "VectorExpr":
        return self + (-other)

    def __neg__(self) -> "VectorExpr":
        return VectorExpr({lab: -c for lab, c in self.coeffs.items()})

    def __mul__(self, scalar) -> "VectorExpr":
        s = float(scalar)
        return VectorExpr({lab: s * c for lab, c in self.coeffs.items()})

    __rmul__ = __mul__

    def __repr__(self):
        if not self.coeffs:
            return "0"
        return " + ".join(f"{c:g}*{lab.tag}" for lab, c in self.coeffs.items())


def _pair(a: BasisLabel, b: BasisLabel) -> tuple[BasisLabel, BasisLabel]:
    return (a, b) if a.uid <= b.uid else (b, a)


class QuadExpr:
    """Affine expression in Gram entries and free scalar symbols.

    ``gram_coeffs`` is keyed by unordered label pairs, so symmetry of the
    Gram coefficients is structural.  Supports +, -, and scaling.
    """

    __slots__ = ("gram_coeffs", "fval_coeffs", "constant")

    def __init__(
        self,
        gram_coeffs: Mapping[tuple[BasisLabel, BasisLabel], float] | None = None,
        fval_coeffs: Mapping[ScalarVar, float] | None = None,
        constant: float = 0.0,
    ):
        g: dict[tuple[BasisLabel, BasisLabel], float] = {}
        if gram_coeffs:
            for (a, b), c in gram_coeffs.items():
                c = float(c)
                if c != 0.0:
                    g[_pair(a, b)] = g.get(_pair(a, b), 0.0) + c
        g = {k: v for k, v in g.items() if v != 0.0}
        f: dict[ScalarVar, float] = {}
        if fval_coeffs:
            for var, c in fval_coeffs.items():
                c = float(c)
                if c != 0.0:
                    f[var] = c
        self.gram_coeffs = g
        self.fval_coeffs = f
        self.constant = float(constant)

    @classmethod
    def zero(cls) -> "QuadExpr":
        return cls()

    @classmethod
    def of_scalar(cls, var: ScalarVar, coef: float = 1.0) -> "QuadExpr":
        return cls(fval_coeffs={var: coef})

    @classmethod
    def of_const(cls, c: float) -> "QuadExpr":
        return cls(constant=c)

    @property
    def is_trivial(self) -> bool:
        return not self.gram_coeffs and not self.fval_coeffs and self.constant == 0.0

    def labels(self) -> set[BasisLabel]:
        out: set[BasisLabel] = set()
        for a, b in self.gram_coeffs:
            out.add(a)
            out.add(b)
        return out

    def scalars(self) -> set[ScalarVar]:
        return set(self.fval_coeffs)

    def __add__(self, other: "QuadExpr") -> "QuadExpr":
        if not isinstance(other, QuadExpr):
            return NotImplemented
        g = dict(self.gram_coeffs)
        for k, c in other.gram_coeffs.items():
            g[k] = g.get(k, 0.0) + c
        f = dict(self.fval_coeffs)
        for v, c in other.fval_coeffs.items():
            f[v] = f.get(v, 0.0) + c
        return QuadExpr(g, f, self.constant + other.constant)

    def __sub__(self, other: "QuadExpr") -> "QuadExpr":
        return self + (-other)

    def __neg__(self) -> "QuadExpr":
        return self * (-1.0)

    def __mul__(self, scalar) -> "QuadExpr":
        s = float(scalar)
        return QuadExpr(
            {k: s * c for k, c in self.gram_coeffs.items()},
            {v: s * c for v, c in self.fval_coeffs.items()},
            s * self.constant,
        )

    __rmul__ = __mul__

    def evaluate(
        self,
        gram_of: Callable[[BasisLabel, BasisLabel], float],
        fval_of: Callable[[ScalarVar], float],
    ) -> float:
        """Numeric value given Gram and scalar lookups."""
        total = self.constant
        for (a, b), c in self.gram_coeffs.items():
            total += c * gram_of(a, b)
        for v, c in self.fval_coeffs.items():
            total += c * fval_of(v)
        return total

    def __repr__(self):
        parts = [f"{c:g}*<{a.tag},{b.tag}>" for (a, b), c in self.gram_coeffs.items()]
        parts += [f"{c:g}*{v.tag}" for v, c in self.fval_coeffs.items()]
        if self.constant or not parts:
            parts.append(f"{self.constant:g}")
        return " + ".join(parts)


def inner(u: VectorExpr, v: VectorExpr) -> QuadExpr:
    """Scalar product of two vector expressions as a Gram-lifted expression.

    Bilinear in both arguments; inner(u, u) is the squared norm of u.
    """
    g: dict[tuple[BasisLabel, BasisLabel], float] = {}
    for la, ca in u.coeffs.items():
        for lb, cb in v.coeffs.items():
            k = _pair(la, lb)
            g[k] = g.get(k, 0.0) + ca * cb
    return QuadExpr(gram_coeffs=g)


def sq_norm(u: VectorExpr) -> QuadExpr:
    return inner(u, u)


CONSTRAINT_KINDS = ("eq0", "le0", "lmi")


@dataclass(frozen=True)
class Constraint:
    """A single PEP constraint.

    kind "eq0": body == 0; "le0": body <= 0; "lmi": body is a square matrix
    of QuadExpr whose numeric evaluation must be positive semidefinite.
    ``label`` records which generator/pair produced the constraint, so dual
    multipliers can be reported per inequality.
    """

    kind: str
    body: QuadExpr | tuple[tuple[QuadExpr, ...], ...]
    label: str

    def __post_init__(self):
        if self.kind not in CONSTRAINT_KINDS:
            raise BuildError(f"unknown constraint kind {self.kind!r}")
        if self.kind == "lmi":
            rows = self.body
            n = len(rows)
            if any(len(r) != n for r in rows):
                raise BuildError(f"LMI body of {self.label!r} is not square")
            for i in range(n):
                for j in range(i + 1, n):
                    if not _same_expr(rows[i][j], rows[j][i]):
                        raise BuildError(
                            f"LMI body of {self.label!r} is not symmetric at ({i},{j})"
                        )
        elif not isinstance(self.body, QuadExpr):
            raise BuildError(f"scalar constraint {self.label!r} needs a QuadExpr body")

    def exprs(self) -> Iterable[QuadExpr]:
        if self.kind == "lmi":
            for row in self.body:
                yield from row
        else:
            yield self.body


def _same_expr(a: QuadExpr, b: QuadExpr) -> bool:
    return (
        a is b
        or (
            a.gram_coeffs == b.gram_coeffs
            and a.fval_coeffs == b.fval_coeffs
            and a.constant == b.constant
        )
    )


@dataclass(frozen=True)
class PEPProblem:
    """Validated, immutable performance-estimation problem.

    ``basis`` order fixes the Gram index of each label; ``fvals`` order fixes
    the free-scalar index.  ``null_directions`` lists vector expressions that
    the constraints force to be the zero vector (the compiler may exploit
    them; the constraint list alone already defines the feasible set).
    The sense is always maximization.
    """

    basis: tuple[BasisLabel, ...]
    fvals: tuple[ScalarVar, ...]
    constraints: tuple[Constraint, ...]
    objective: QuadExpr
    null_directions: tuple[VectorExpr, ...] = ()
    meta: dict = field(default_factory=dict)

    @property
    def sense(self) -> str:
        return "maximize"

    def gram_index(self) -> dict[BasisLabel, int]:
        return {lab: i for i, lab in enumerate(self.basis)}

    def fval_index(self) -> dict[ScalarVar, int]:
        return {v: i for i, v in enumerate(self.fvals)}


def build_problem(
    basis: Sequence[BasisLabel],
    fvals: Sequence[ScalarVar],
    constraints: Sequence[Constraint],
    objective: QuadExpr,
    null_directions: Sequence[VectorExpr] = (),
    meta: dict | None = None,
) -> PEPProblem:
    """Assemble and validate a PEPProblem.

    Raises BuildError on duplicate registrations, dangling references,
    an empty constraint list, or a trivial objective.
    """
    basis = tuple(basis)
    fvals = tuple(fvals)
    constraints = tuple(constraints)
    null_directions = tuple(null_directions)

    if not basis:
        raise BuildError("a problem needs at least one basis label")
    if len(set(basis)) != len(basis):
        raise BuildError("duplicate basis label registration")
    if len(set(fvals)) != len(fvals):
        raise BuildError("duplicate scalar variable registration")
    if not constraints:
        raise BuildError("a problem needs at least one constraint")
    if objective.is_trivial:
        raise BuildError("objective is empty")

    known_labels = set(basis)
    known_scalars = set(fvals)

    def check_expr(expr: QuadExpr, where: str):
        for lab in expr.labels():
            if lab not in known_labels:
                raise BuildError(f"unregistered basis label {lab.tag!r} in {where}")
        for var in expr.scalars():
            if var not in known_scalars:
                raise BuildError(f"unregistered scalar {var.tag!r} in {where}")

    for con in constraints:
        for expr in con.exprs():
            check_expr(expr, f"constraint {con.label!r}")
    check_expr(objective, "objective")
    for nd in null_directions:
        for lab in nd.labels():
            if lab not in known_labels:
                raise BuildError(
                    f"unregistered basis label {lab.tag!r} in null direction"
                )

    return PEPProblem(
        basis=basis,
        fvals=fvals,
        constraints=constraints,
        objective=objective,
        null_directions=null_directions,
        meta=dict(meta or {}),
    )

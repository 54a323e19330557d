"""Operator algebra and sampled verification of contraction-type properties.

Operators are declarative specs: projections onto closed-form sets, affine
maps, convex combinations and compositions. Property checks are sampled
falsifiers; a passing report means "no violation found over the given
pairs", never a proof.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np

from . import geometry
from .errors import DimensionMismatch, EmptySample
from .geometry import Array, ConvexSetSpec, as_vector


@dataclass(frozen=True)
class Projection:
    set_spec: ConvexSetSpec

    @property
    def dim(self) -> Optional[int]:
        return self.set_spec.dim


@dataclass(frozen=True)
class Affine:
    """x -> matrix @ x + shift."""

    matrix: Array
    shift: Array

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError(f"affine matrix must be square, got shape {m.shape}")
        object.__setattr__(self, "matrix", m)
        s = as_vector(self.shift)
        if s.shape[0] != m.shape[0]:
            raise DimensionMismatch("affine shift dimension differs from matrix size")
        object.__setattr__(self, "shift", s)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


@dataclass(frozen=True)
class ConvexCombination:
    """Sum of w_i * op_i with convex weights."""

    terms: Tuple[Tuple[float, "OperatorSpec"], ...]

    def __post_init__(self):
        terms = tuple((float(w), op) for w, op in self.terms)
        object.__setattr__(self, "terms", terms)
        weights = np.array([w for w, _ in terms])
        if np.any(weights < 0):
            raise ValueError("convex combination weights must be nonnegative")
        if abs(float(weights.sum()) - 1.0) > 1e-12:
            raise ValueError(f"convex combination weights sum to {weights.sum()}, expected 1")
        dims = {op.dim for _, op in terms if op.dim is not None}
        if len(dims) > 1:
            raise DimensionMismatch(f"member operators have mixed dimensions {sorted(dims)}")

    @property
    def dim(self) -> Optional[int]:
        for _, op in self.terms:
            if op.dim is not None:
                return op.dim
        return None


@dataclass(frozen=True)
class Composition:
    """Apply ops left to right: [P1, P2] means P2 o P1."""

    ops: Tuple["OperatorSpec", ...] = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "ops", tuple(self.ops))
        dims = {op.dim for op in self.ops if op.dim is not None}
        if len(dims) > 1:
            raise DimensionMismatch(f"member operators have mixed dimensions {sorted(dims)}")

    @property
    def dim(self) -> Optional[int]:
        for op in self.ops:
            if op.dim is not None:
                return op.dim
        return None


OperatorSpec = Union[Projection, Affine, ConvexCombination, Composition]


class OperatorProperty(enum.Enum):
    CONTRACTION = "contraction"
    NONEXPANSIVE = "nonexpansive"
    FIRMLY_NONEXPANSIVE = "firmly_nonexpansive"
    NONEXPANSIVE_PLUS = "nonexpansive_plus"


@dataclass
class PropertyReport:
    """Outcome of a sampled operator-property check.

    worst_slack is the minimum slack over all pairs; violations lists the
    pairs whose slack fell below -tol, in input order. estimated_tau is
    only populated for the contraction check.
    """

    property: OperatorProperty
    samples: int
    worst_slack: float
    estimated_tau: Optional[float]
    violations: List[Tuple[Array, Array, float]]

    @property
    def passed(self) -> bool:
        return not self.violations


def apply(op: OperatorSpec, x: Sequence[float] | Array) -> Array:
    """Evaluate T(x)."""
    x = as_vector(x)
    if isinstance(op, Projection):
        return geometry.project(op.set_spec, x)
    if isinstance(op, Affine):
        if x.shape[0] != op.dim:
            raise DimensionMismatch(f"point has dimension {x.shape[0]}, operator expects {op.dim}")
        return op.matrix @ x + op.shift
    if isinstance(op, ConvexCombination):
        out = np.zeros_like(x)
        for w, member in op.terms:
            out = out + w * apply(member, x)
        return out
    if isinstance(op, Composition):
        for member in op.ops:
            x = apply(member, x)
        return x
    raise TypeError(f"unknown operator variant {type(op).__name__}")


def fixed_point_residual(op: OperatorSpec, x: Sequence[float] | Array) -> float:
    """||T(x) - x||; zero exactly at fixed points."""
    x = as_vector(x)
    return float(np.linalg.norm(apply(op, x) - x))


def check_property(
    op: OperatorSpec,
    prop: OperatorProperty,
    pairs: Sequence[Tuple[Array, Array]],
    tol: float = 1e-9,
) -> PropertyReport:
    """Evaluate a contraction-type property over sampled point pairs.

    Slack conventions (negative slack = violation):

    * nonexpansive:          ||x-y|| - ||Tx-Ty||
    * firmly nonexpansive:   ||x-y||^2 - ||(Tx-Ty)-(x-y)||^2 - ||Tx-Ty||^2
    * contraction:           tau_hat*||x-y|| - ||Tx-Ty||, where tau_hat is
      the max observed ratio ||Tx-Ty||/||x-y|| (pairs with x=y skipped)
    * nonexpansive plus: the nonexpansive slack, and additionally any pair
      within tol of equality must satisfy ||(Tx-Ty)-(x-y)|| <= tol
    """
    if len(pairs) == 0:
        raise EmptySample("property check requires at least one pair")
    if tol < 0:
        raise ValueError("tol must be nonnegative")

    evaluated = []
    for x, y in pairs:
        x = as_vector(x)
        y = as_vector(y)
        evaluated.append((x, y, apply(op, x), apply(op, y)))

    estimated_tau: Optional[float] = None
    if prop is OperatorProperty.CONTRACTION:
        ratios = []
        for x, y, tx, ty in evaluated:
            dxy = float(np.linalg.norm(x - y))
            if dxy > 0:
                ratios.append(float(np.linalg.norm(tx - ty)) / dxy)
        if not ratios:
            raise EmptySample("contraction check needs at least one pair with x != y")
        estimated_tau = max(ratios)

    worst = np.inf
    violations: List[Tuple[Array, Array, float]] = []
    for x, y, tx, ty in evaluated:
        dxy = float(np.linalg.norm(x - y))
        dtxy = float(np.linalg.norm(tx - ty))
        if prop is OperatorProperty.CONTRACTION:
            slack = estimated_tau * dxy - dtxy
            violated = slack < -tol
        elif prop is OperatorProperty.NONEXPANSIVE:
            slack = dxy - dtxy
            violated = slack < -tol
        elif prop is OperatorProperty.FIRMLY_NONEXPANSIVE:
            disp = float(np.linalg.norm((tx - ty) - (x - y)))
            slack = dxy**2 - disp**2 - dtxy**2
            violated = slack < -tol
        elif prop is OperatorProperty.NONEXPANSIVE_PLUS:
            disp = float(np.linalg.norm((tx - ty) - (x - y)))
            slack = dxy - dtxy
            violated = slack < -tol or (abs(dtxy - dxy) <= tol and disp > tol)
        else:
            raise ValueError(f"unknown property {prop!r}")
        worst = min(worst, slack)
        if violated:
            violations.append((x, y, slack))

    return PropertyReport(
        property=prop,
        samples=len(pairs),
        worst_slack=float(worst),
        estimated_tau=estimated_tau,
        violations=violations,
    )


# --- JSON serialization ------------------------------------------------------

def operator_to_json(op: OperatorSpec) -> dict:
    if isinstance(op, Projection):
        return {"variant": "projection", "set": geometry.set_to_json(op.set_spec)}
    if isinstance(op, Affine):
        return {"variant": "affine", "matrix": op.matrix.tolist(), "shift": op.shift.tolist()}
    if isinstance(op, ConvexCombination):
        return {
            "variant": "convex_combination",
            "terms": [{"weight": w, "op": operator_to_json(member)} for w, member in op.terms],
        }
    if isinstance(op, Composition):
        return {"variant": "composition", "ops": [operator_to_json(member) for member in op.ops]}
    raise TypeError(f"unknown operator variant {type(op).__name__}")


def operator_from_json(doc: dict) -> OperatorSpec:
    variant = doc.get("variant")
    if variant == "projection":
        return Projection(geometry.set_from_json(doc["set"]))
    if variant == "affine":
        return Affine(matrix=np.asarray(doc["matrix"], dtype=float), shift=doc["shift"])
    if variant == "convex_combination":
        return ConvexCombination(
            terms=tuple((float(t["weight"]), operator_from_json(t["op"])) for t in doc["terms"])
        )
    if variant == "composition":
        return Composition(ops=tuple(operator_from_json(o) for o in doc["ops"]))
    raise ValueError(f"unknown operator variant {variant!r}")

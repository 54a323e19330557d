"""Closed convex set descriptions with exact projections and separation.

Sets are immutable declarative specs. Four variants (halfspace, hyperplane,
ball, box) carry closed-form projections; sublevel sets of convex functions
enter only through membership tests and separating hyperplanes, and finite
intersections only through membership.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, Union

import numpy as np

from .errors import (
    DimensionMismatch,
    NegativeEpsilon,
    NotViolating,
    UnsupportedSet,
    ZeroSubgradient,
)

Array = np.ndarray


def as_vector(x: Sequence[float] | Array) -> Array:
    """Validate and return a point of R^n as a 1-D float array.

    Raises ValueError on non-finite components or empty input.
    """
    v = np.asarray(x, dtype=float)
    if v.ndim != 1 or v.size < 1:
        raise ValueError(f"expected a 1-D point with at least one component, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise ValueError("point has non-finite components")
    return v


def _check_dim(x: Array, dim: Optional[int]) -> None:
    if dim is not None and x.shape[0] != dim:
        raise DimensionMismatch(f"point has dimension {x.shape[0]}, set expects {dim}")


@dataclass(frozen=True)
class ConvexFnOracle:
    """Convex function given by value and subgradient callables.

    Convexity is a contract on the caller, falsifiable by sampling (see
    :func:`verify_convexity`), not something the library can prove.
    """

    value: Callable[[Array], float]
    subgradient: Callable[[Array], Array]

    def shifted(self, epsilon: float) -> "ConvexFnOracle":
        """Oracle for g(.) + epsilon; the subgradient is unchanged."""
        return ConvexFnOracle(
            value=lambda y, _f=self.value, _e=epsilon: _f(y) + _e,
            subgradient=self.subgradient,
        )


@dataclass(frozen=True)
class Halfspace:
    """{y | <normal, y> <= offset}."""

    normal: Array
    offset: float

    def __post_init__(self):
        object.__setattr__(self, "normal", as_vector(self.normal))
        if float(np.linalg.norm(self.normal)) <= 0.0:
            raise ValueError("halfspace normal must have positive norm")

    @property
    def dim(self) -> int:
        return self.normal.shape[0]


@dataclass(frozen=True)
class Hyperplane:
    """{y | <normal, y> = offset}."""

    normal: Array
    offset: float

    def __post_init__(self):
        object.__setattr__(self, "normal", as_vector(self.normal))
        if float(np.linalg.norm(self.normal)) <= 0.0:
            raise ValueError("hyperplane normal must have positive norm")

    @property
    def dim(self) -> int:
        return self.normal.shape[0]


@dataclass(frozen=True)
class Ball:
    """Closed euclidean ball."""

    center: Array
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", as_vector(self.center))
        if not self.radius > 0:
            raise ValueError("ball radius must be positive")

    @property
    def dim(self) -> int:
        return self.center.shape[0]


@dataclass(frozen=True)
class Box:
    """Axis-aligned box [lower, upper]."""

    lower: Array
    upper: Array

    def __post_init__(self):
        object.__setattr__(self, "lower", as_vector(self.lower))
        object.__setattr__(self, "upper", as_vector(self.upper))
        if self.lower.shape != self.upper.shape:
            raise DimensionMismatch("box bounds have different dimensions")
        if np.any(self.lower > self.upper):
            raise ValueError("box requires lower <= upper componentwise")

    @property
    def dim(self) -> int:
        return self.lower.shape[0]


@dataclass(frozen=True)
class Sublevel:
    """{y | fn(y) <= 0} for a convex oracle fn."""

    fn: ConvexFnOracle

    @property
    def dim(self) -> Optional[int]:
        # ambient dimension is not recoverable from a callable
        return None


@dataclass(frozen=True)
class Intersection:
    """Finite intersection of convex sets. Nonemptiness is a caller assertion."""

    members: tuple = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "members", tuple(self.members))

    @property
    def dim(self) -> Optional[int]:
        for m in self.members:
            if m.dim is not None:
                return m.dim
        return None


ConvexSetSpec = Union[Halfspace, Hyperplane, Ball, Box, Sublevel, Intersection]


def default_tol(x: Array) -> float:
    """Relative membership tolerance 1e-9 * (1 + ||x||)."""
    return 1e-9 * (1.0 + float(np.linalg.norm(x)))


def project(set_spec: ConvexSetSpec, x: Sequence[float] | Array) -> Array:
    """Euclidean projection of x onto the set, for closed-form variants only.

    Raises UnsupportedSet for Sublevel and Intersection: general sublevel
    sets are reached through separating hyperplanes, intersections through
    the solvers.
    """
    x = as_vector(x)
    if isinstance(set_spec, Halfspace):
        _check_dim(x, set_spec.dim)
        g = float(set_spec.normal @ x) - set_spec.offset
        if g <= 0.0:
            return x.copy()
        return x - (g / float(set_spec.normal @ set_spec.normal)) * set_spec.normal
    if isinstance(set_spec, Hyperplane):
        _check_dim(x, set_spec.dim)
        g = float(set_spec.normal @ x) - set_spec.offset
        return x - (g / float(set_spec.normal @ set_spec.normal)) * set_spec.normal
    if isinstance(set_spec, Ball):
        _check_dim(x, set_spec.dim)
        d = x - set_spec.center
        nd = float(np.linalg.norm(d))
        if nd <= set_spec.radius:
            return x.copy()
        return set_spec.center + (set_spec.radius / nd) * d
    if isinstance(set_spec, Box):
        _check_dim(x, set_spec.dim)
        return np.clip(x, set_spec.lower, set_spec.upper)
    raise UnsupportedSet(f"no closed-form projection for {type(set_spec).__name__}")


def contains(set_spec: ConvexSetSpec, x: Sequence[float] | Array, tol: Optional[float] = None) -> bool:
    """Membership test with additive tolerance on the defining inequalities.

    With tol=None the relative default 1e-9*(1+||x||) is used.
    """
    x = as_vector(x)
    if tol is None:
        tol = default_tol(x)
    if tol < 0:
        raise ValueError("tol must be nonnegative")
    if isinstance(set_spec, Halfspace):
        _check_dim(x, set_spec.dim)
        return float(set_spec.normal @ x) <= set_spec.offset + tol
    if isinstance(set_spec, Hyperplane):
        _check_dim(x, set_spec.dim)
        return abs(float(set_spec.normal @ x) - set_spec.offset) <= tol
    if isinstance(set_spec, Ball):
        _check_dim(x, set_spec.dim)
        return float(np.linalg.norm(x - set_spec.center)) <= set_spec.radius + tol
    if isinstance(set_spec, Box):
        _check_dim(x, set_spec.dim)
        return bool(np.all(x >= set_spec.lower - tol) and np.all(x <= set_spec.upper + tol))
    if isinstance(set_spec, Sublevel):
        return float(set_spec.fn.value(x)) <= tol
    if isinstance(set_spec, Intersection):
        return all(contains(m, x, tol) for m in set_spec.members)
    raise UnsupportedSet(f"unknown set variant {type(set_spec).__name__}")


def separating_halfspace(fn: ConvexFnOracle, x: Sequence[float] | Array, epsilon: float = 0.0) -> Halfspace:
    """Halfspace cutting x off from the shifted sublevel set {fn + epsilon <= 0}.

    Returns H = {y | fn(x) + epsilon + <u, y - x> <= 0} with u the
    subgradient at x. By the subgradient inequality, {fn <= -epsilon} is
    contained in H, while x itself is not.
    """
    x = as_vector(x)
    v = float(fn.value(x))
    if v + epsilon <= 0.0:
        raise NotViolating(f"fn(x) + epsilon = {v + epsilon} <= 0, nothing to separate")
    u = as_vector(fn.subgradient(x))
    if x.shape != u.shape:
        raise DimensionMismatch("subgradient dimension differs from point dimension")
    if float(np.linalg.norm(u)) == 0.0:
        raise ZeroSubgradient("zero subgradient at a violating point; shifted sublevel set is empty")
    # <u, y> <= <u, x> - (v + epsilon)
    return Halfspace(normal=u, offset=float(u @ x) - (v + epsilon))


def inner_approximation(fn: ConvexFnOracle, epsilon: float) -> Sublevel:
    """Sublevel set of fn(.) + epsilon, nested inside {fn <= 0} for epsilon >= 0."""
    if epsilon < 0:
        raise NegativeEpsilon(f"epsilon must be nonnegative, got {epsilon}")
    return Sublevel(fn.shifted(epsilon))


def verify_convexity(fn: ConvexFnOracle, points: Sequence[Array], tol: float = 1e-9) -> bool:
    """Sampled falsifier for the convexity and subgradient contracts.

    Checks midpoint convexity and the subgradient inequality over all pairs
    of the given points. Returns False on the first violation beyond tol.
    """
    pts = [as_vector(p) for p in points]
    for a in pts:
        fa = float(fn.value(a))
        ua = as_vector(fn.subgradient(a))
        for b in pts:
            fb = float(fn.value(b))
            for t in (0.25, 0.5, 0.75):
                mid = t * a + (1 - t) * b
                if float(fn.value(mid)) > t * fa + (1 - t) * fb + tol:
                    return False
            if fb < fa + float(ua @ (b - a)) - tol:
                return False
    return True


# --- JSON serialization ------------------------------------------------------
#
# Oracle-backed variants carry code and are deliberately not serializable.

def set_to_json(set_spec: ConvexSetSpec) -> dict:
    if isinstance(set_spec, Halfspace):
        return {"variant": "halfspace", "normal": set_spec.normal.tolist(), "offset": set_spec.offset}
    if isinstance(set_spec, Hyperplane):
        return {"variant": "hyperplane", "normal": set_spec.normal.tolist(), "offset": set_spec.offset}
    if isinstance(set_spec, Ball):
        return {"variant": "ball", "center": set_spec.center.tolist(), "radius": set_spec.radius}
    if isinstance(set_spec, Box):
        return {"variant": "box", "lower": set_spec.lower.tolist(), "upper": set_spec.upper.tolist()}
    if isinstance(set_spec, Intersection):
        return {"variant": "intersection", "members": [set_to_json(m) for m in set_spec.members]}
    raise UnsupportedSet(f"{type(set_spec).__name__} is oracle-backed and cannot be serialized")


def set_from_json(doc: dict) -> ConvexSetSpec:
    variant = doc.get("variant")
    if variant == "halfspace":
        return Halfspace(normal=doc["normal"], offset=float(doc["offset"]))
    if variant == "hyperplane":
        return Hyperplane(normal=doc["normal"], offset=float(doc["offset"]))
    if variant == "ball":
        return Ball(center=doc["center"], radius=float(doc["radius"]))
    if variant == "box":
        return Box(lower=doc["lower"], upper=doc["upper"])
    if variant == "intersection":
        return Intersection(members=tuple(set_from_json(m) for m in doc["members"]))
    raise UnsupportedSet(f"unknown set variant {variant!r}")

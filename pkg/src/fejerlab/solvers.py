"""Iteration engines producing traces.

Every solver returns an immutable Trace: the full iterate history plus
per-step annotations and a termination status in the params. Statuses:

* ``Converged``          step residual fell below residual_tol
* ``Feasible``           all sets satisfied within feasibility_tol
* ``FinitelyConvergent`` all constraint functions nonpositive within
                         feasibility_tol (separating-hyperplane method)
* ``Budget``             iteration budget exhausted
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from . import geometry, operators
from .errors import DimensionMismatch, EmptyProblem
from .geometry import Array, ConvexFnOracle, ConvexSetSpec, as_vector
from .operators import OperatorSpec


@dataclass(frozen=True)
class Trace:
    """Ordered iterate history with metadata."""

    iterates: Tuple[Array, ...]
    algorithm: str
    params: Dict[str, object] = field(default_factory=dict)
    annotations: Tuple[Optional[dict], ...] = ()

    def __post_init__(self):
        its = tuple(as_vector(x) for x in self.iterates)
        if len(its) < 1:
            raise ValueError("a trace must contain at least the starting point")
        dims = {x.shape[0] for x in its}
        if len(dims) > 1:
            raise DimensionMismatch(f"iterates have mixed dimensions {sorted(dims)}")
        object.__setattr__(self, "iterates", its)
        object.__setattr__(self, "annotations", tuple(self.annotations))

    def __len__(self) -> int:
        return len(self.iterates)

    @property
    def dim(self) -> int:
        return self.iterates[0].shape[0]

    @property
    def status(self) -> Optional[str]:
        return self.params.get("status")

    def as_array(self) -> Array:
        return np.stack(self.iterates)


@dataclass(frozen=True)
class Harmonic:
    """epsilon_k = scale / (k + 1)."""

    scale: float

    def __post_init__(self):
        if not self.scale > 0:
            raise ValueError("harmonic scale must be positive")

    def value(self, k: int) -> float:
        return self.scale / (k + 1)


@dataclass(frozen=True)
class Geometric:
    """epsilon_k = base * ratio**k."""

    base: float
    ratio: float

    def __post_init__(self):
        if not self.base > 0:
            raise ValueError("geometric base must be positive")
        if not 0 < self.ratio < 1:
            raise ValueError("geometric ratio must lie in (0, 1)")

    def value(self, k: int) -> float:
        return self.base * self.ratio**k


@dataclass(frozen=True)
class Constant:
    value_: float

    def __post_init__(self):
        if self.value_ < 0:
            raise ValueError("constant epsilon must be nonnegative")

    def value(self, k: int) -> float:
        return self.value_


EpsilonSchedule = Union[Harmonic, Geometric, Constant]


@dataclass(frozen=True)
class StopRule:
    max_iters: int
    residual_tol: float = 1e-12
    feasibility_tol: float = 1e-9

    def __post_init__(self):
        if self.max_iters < 1:
            raise ValueError("max_iters must be at least 1")
        if self.residual_tol < 0 or self.feasibility_tol < 0:
            raise ValueError("tolerances must be nonnegative")


def iterate_fixed_point(op: OperatorSpec, x0: Sequence[float] | Array, stop: StopRule) -> Trace:
    """x^{k+1} = T(x^k) until the step residual drops below residual_tol."""
    x = as_vector(x0)
    iterates = [x]
    annotations: List[Optional[dict]] = [None]
    status = "Budget"
    for _ in range(stop.max_iters):
        x_next = operators.apply(op, x)
        residual = float(np.linalg.norm(x_next - x))
        iterates.append(x_next)
        annotations.append({"residual": residual})
        x = x_next
        if residual <= stop.residual_tol:
            status = "Converged"
            break
    return Trace(
        iterates=tuple(iterates),
        algorithm="fixed_point",
        params={"status": status, "max_iters": stop.max_iters, "residual_tol": stop.residual_tol},
        annotations=tuple(annotations),
    )


def _projection_sweep_trace(
    sets: Sequence[ConvexSetSpec],
    x0: Array,
    stop: StopRule,
    step,
    algorithm: str,
    extra_params: dict,
) -> Trace:
    if len(sets) == 0:
        raise EmptyProblem("at least one set is required")
    x = as_vector(x0)
    iterates = [x]
    annotations: List[Optional[dict]] = [None]
    status = "Budget"
    for _ in range(stop.max_iters):
        x_next = step(x)
        residual = float(np.linalg.norm(x_next - x))
        feasible = all(geometry.contains(s, x_next, stop.feasibility_tol) for s in sets)
        iterates.append(x_next)
        annotations.append({"residual": residual, "feasible": feasible})
        x = x_next
        if feasible:
            status = "Feasible"
            break
        if residual <= stop.residual_tol:
            status = "Converged"
            break
    params = {"status": status, "max_iters": stop.max_iters, **extra_params}
    return Trace(tuple(iterates), algorithm, params, tuple(annotations))


def simultaneous_projections(
    sets: Sequence[ConvexSetSpec],
    weights: Sequence[float],
    x0: Sequence[float] | Array,
    stop: StopRule,
) -> Trace:
    """Iterate the weighted average of the individual projections."""
    w = np.asarray(weights, dtype=float)
    if w.shape[0] != len(sets):
        raise ValueError("one weight per set is required")
    if np.any(w < 0) or abs(float(w.sum()) - 1.0) > 1e-12:
        raise ValueError("weights must be convex coefficients")

    def step(x: Array) -> Array:
        out = np.zeros_like(x)
        for wi, s in zip(w, sets):
            out = out + wi * geometry.project(s, x)
        return out

    return _projection_sweep_trace(
        sets, as_vector(x0), stop, step, "simultaneous_projections", {"weights": w.tolist()}
    )


def sequential_projections(
    sets: Sequence[ConvexSetSpec],
    x0: Sequence[float] | Array,
    stop: StopRule,
) -> Trace:
    """One trace step per full sweep of projections in input order."""

    def step(x: Array) -> Array:
        for s in sets:
            x = geometry.project(s, x)
        return x

    return _projection_sweep_trace(
        sets, as_vector(x0), stop, step, "sequential_projections", {"num_sets": len(sets)}
    )


def inner_approx_separating(
    fns: Sequence[ConvexFnOracle],
    x0: Sequence[float] | Array,
    schedule: EpsilonSchedule,
    control: str = "most_violated",
    stop: StopRule = StopRule(max_iters=500),
) -> Trace:
    """Separating-hyperplane method over shrinking inner approximations.

    At step k the constraint is tightened by epsilon_k from the schedule.
    The selected constraint (cyclic, or the one with the largest value) is
    cut by a separating halfspace and the iterate projected onto it; a
    constraint already satisfied at level -epsilon_k yields a null step
    that advances the schedule but not the iterate. Termination is checked
    against the original constraints g_i <= feasibility_tol.
    """
    if len(fns) == 0:
        raise EmptyProblem("at least one constraint oracle is required")
    if control not in ("cyclic", "most_violated"):
        raise ValueError(f"unknown index control {control!r}")
    if isinstance(schedule, Constant):
        raise ValueError("the schedule must be positive and decreasing (harmonic or geometric)")

    x = as_vector(x0)
    iterates = [x]
    annotations: List[Optional[dict]] = [None]
    status = "Budget"
    termination_index: Optional[int] = None

    for k in range(stop.max_iters + 1):
        values = [float(f.value(x)) for f in fns]
        if max(values) <= stop.feasibility_tol:
            status = "FinitelyConvergent"
            termination_index = k
            break
        if k == stop.max_iters:
            break
        eps = schedule.value(k)
        if control == "cyclic":
            i = k % len(fns)
        else:
            i = int(np.argmax(values))
        if values[i] + eps <= 0.0:
            # selected constraint already satisfied at the tightened level
            iterates.append(x)
            annotations.append({"epsilon": eps, "index": i, "null_step": True})
            continue
        half = geometry.separating_halfspace(fns[i], x, eps)
        x = geometry.project(half, x)
        iterates.append(x)
        annotations.append(
            {"epsilon": eps, "index": i, "null_step": False, "violation": values[i]}
        )

    params = {
        "status": status,
        "control": control,
        "max_iters": stop.max_iters,
        "feasibility_tol": stop.feasibility_tol,
        "termination_index": termination_index,
    }
    return Trace(tuple(iterates), "inner_approx_separating", params, tuple(annotations))


# --- trace serialization -----------------------------------------------------
#
# JSON round-trips at full binary precision: Python's shortest-roundtrip
# float repr is what json emits, and parsing it recovers the same double.

def trace_to_json(trace: Trace) -> dict:
    return {
        "algorithm": trace.algorithm,
        "params": trace.params,
        "iterates": [x.tolist() for x in trace.iterates],
        "annotations": list(trace.annotations),
    }


def trace_from_json(doc: dict) -> Trace:
    return Trace(
        iterates=tuple(np.asarray(x, dtype=float) for x in doc["iterates"]),
        algorithm=doc.get("algorithm", "unknown"),
        params=doc.get("params", {}),
        annotations=tuple(doc.get("annotations", []) or [None] * len(doc["iterates"])),
    )


def save_trace_json(trace: Trace, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(trace_to_json(trace), fh, indent=2)
        fh.write("\n")


def load_trace_json(path: str) -> Trace:
    with open(path, encoding="utf-8") as fh:
        return trace_from_json(json.load(fh))


def save_trace_csv(trace: Trace, path: str) -> None:
    """One row per iterate: k, x_1..x_n, then any annotation columns."""
    ann_keys = sorted({key for a in trace.annotations if a for key in a})
    header = ["k"] + [f"x_{i + 1}" for i in range(trace.dim)] + ann_keys
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for k, x in enumerate(trace.iterates):
            ann = trace.annotations[k] if k < len(trace.annotations) else None
            row = [k] + [repr(float(c)) for c in x]
            row += [(ann or {}).get(key, "") for key in ann_keys]
            writer.writerow(row)


def load_trace_csv(path: str, algorithm: str = "csv") -> Trace:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        xcols = [i for i, name in enumerate(header) if name.startswith("x_")]
        iterates = []
        for row in reader:
            iterates.append(np.array([float(row[i]) for i in xcols]))
    return Trace(tuple(iterates), algorithm, {"source": path})

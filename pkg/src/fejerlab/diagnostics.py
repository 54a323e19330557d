"""Trace monotonicity classification and cluster-point analysis.

The per-step test behind the Fejer-type checks compares the squared
distance increment against a relative threshold. Increments near the
threshold are re-evaluated in exact dyadic-rational arithmetic (floats are
exact rationals), so equality boundaries and increases far below the float
rounding noise are both classified deterministically.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .errors import (
    DegenerateClusterPair,
    DimensionMismatch,
    InvalidN,
    LengthMismatch,
)
from .geometry import Array, as_vector
from .solvers import Trace

_EPS = np.finfo(float).eps


@dataclass(frozen=True)
class AnchorSet:
    """Finite point sample standing in for the reference set."""

    points: Tuple[Array, ...]
    label: str = ""

    def __post_init__(self):
        pts = tuple(as_vector(p) for p in self.points)
        if len(pts) == 0:
            raise ValueError("anchor set must be nonempty")
        dims = {p.shape[0] for p in pts}
        if len(dims) > 1:
            raise DimensionMismatch(f"anchor points have mixed dimensions {sorted(dims)}")
        object.__setattr__(self, "points", pts)

    @property
    def dim(self) -> int:
        return self.points[0].shape[0]

    def __len__(self) -> int:
        return len(self.points)


def _check_trace_anchor(trace: Trace, anchor: Array) -> None:
    if trace.dim != anchor.shape[0]:
        raise DimensionMismatch(
            f"trace dimension {trace.dim} differs from anchor dimension {anchor.shape[0]}"
        )
    if len(trace) < 2:
        raise ValueError("monotonicity checks require at least two iterates")


def _exact_sq_dist(x: Array, a: Array) -> Fraction:
    total = Fraction(0)
    for xi, ai in zip(x, a):
        d = Fraction(float(xi)) - Fraction(float(ai))
        total += d * d
    return total


def step_violations(trace: Trace, anchor: Array, tol: float) -> np.ndarray:
    """Boolean per-step flags: does step k increase the distance beyond tol?

    Step k is a violation when d_{k+1} > d_k + tol*(1 + d_k), evaluated in
    squared form: d_{k+1}^2 - d_k^2 > t*(2*d_k + t) with t = tol*(1+d_k).
    Steps whose float increment sits within rounding distance of the
    threshold are settled exactly.
    """
    anchor = as_vector(anchor)
    _check_trace_anchor(trace, anchor)
    if tol < 0:
        raise ValueError("tol must be nonnegative")

    X = trace.as_array()
    diff = X - anchor
    sq = diff * diff
    s = sq.sum(axis=1)
    d = np.sqrt(s)
    delta = (sq[1:] - sq[:-1]).sum(axis=1)

    t = tol * (1.0 + d[:-1])
    thr = t * (2.0 * d[:-1] + t)
    margin = 32.0 * _EPS * (s[1:] + s[:-1] + 1e-300)

    flags = delta > thr
    unsure = np.abs(delta - thr) <= margin
    for k in np.nonzero(unsure)[0]:
        exact_delta = _exact_sq_dist(X[k + 1], anchor) - _exact_sq_dist(X[k], anchor)
        flags[k] = exact_delta > Fraction(float(thr[k]))
    return flags


@dataclass
class FejerResult:
    anchor: Array
    fejer: bool
    first_violation_index: Optional[int]


@dataclass
class FejerStarResult:
    anchor: Array
    n: Optional[int]

    @property
    def present(self) -> bool:
        return self.n is not None


def check_fejer(trace: Trace, anchors: AnchorSet, tol: float = 0.0) -> List[FejerResult]:
    """Per-anchor Fejer monotonicity with the smallest violating step."""
    results = []
    for a in anchors.points:
        flags = step_violations(trace, a, tol)
        idx = np.nonzero(flags)[0]
        if idx.size:
            results.append(FejerResult(a, False, int(idx[0])))
        else:
            results.append(FejerResult(a, True, None))
    return results


def check_fejer_star(trace: Trace, anchors: AnchorSet, tol: float = 0.0) -> List[FejerStarResult]:
    """Smallest tail index from which the distance is nonincreasing.

    Returns n=None (absent) when even the final step violates, i.e. no
    valid tail exists within this finite trace.
    """
    results = []
    for a in anchors.points:
        flags = step_violations(trace, a, tol)
        idx = np.nonzero(flags)[0]
        if idx.size == 0:
            results.append(FejerStarResult(a, 0))
        elif int(idx[-1]) == len(flags) - 1:
            results.append(FejerStarResult(a, None))
        else:
            results.append(FejerStarResult(a, int(idx[-1]) + 1))
    return results


@dataclass
class ConvexHullStarEntry:
    point: Array
    weights: Array
    n: Optional[int]


@dataclass
class ConvexHullStarReport:
    entries: List[ConvexHullStarEntry]

    @property
    def all_present(self) -> bool:
        return all(e.n is not None for e in self.entries)

    @property
    def ns(self) -> List[Optional[int]]:
        return [e.n for e in self.entries]


def check_fejer_star_convex_hull(
    trace: Trace,
    anchors: AnchorSet,
    num_combinations: int,
    seed: int = 0,
    tol: float = 0.0,
) -> ConvexHullStarReport:
    """Fejer* check at random convex combinations of the anchor points."""
    if num_combinations < 1:
        raise ValueError("num_combinations must be at least 1")
    rng = np.random.default_rng(seed)
    pts = np.stack(anchors.points)
    entries = []
    for _ in range(num_combinations):
        w = rng.dirichlet(np.ones(len(anchors)))
        combo = w @ pts
        res = check_fejer_star(trace, AnchorSet((combo,)), tol)[0]
        entries.append(ConvexHullStarEntry(combo, w, res.n))
    return ConvexHullStarReport(entries)


def distance_sequence(trace: Trace, x: Sequence[float] | Array) -> np.ndarray:
    """d_k = ||x^k - x||."""
    x = as_vector(x)
    if trace.dim != x.shape[0]:
        raise DimensionMismatch("point dimension differs from trace dimension")
    return np.linalg.norm(trace.as_array() - x, axis=1)


def cauchy_tail_statistic(values: Sequence[float], window: int) -> float:
    """Max |v_{k+1} - v_k| over the last `window` steps; small means settled."""
    v = np.asarray(values, dtype=float)
    if window < 1 or window >= v.shape[0]:
        raise ValueError("window must satisfy 1 <= window < len(values)")
    incr = np.abs(np.diff(v))
    return float(incr[-window:].max())


def inner_product_sequence(
    trace: Trace, x1: Sequence[float] | Array, x2: Sequence[float] | Array
) -> np.ndarray:
    """s_k = <x1 - x2, x^k>."""
    x1 = as_vector(x1)
    x2 = as_vector(x2)
    if x1.shape != x2.shape or trace.dim != x1.shape[0]:
        raise DimensionMismatch("point dimensions differ from trace dimension")
    return trace.as_array() @ (x1 - x2)


SUMMABLE_TAIL_RATIO = 0.05


@dataclass
class EpsilonFit:
    """A fitted nonnegative perturbation sequence with its summability read."""

    epsilons: np.ndarray
    partial_sum: float
    tail_ratio: float
    classification: str


def _fit_epsilons(eps: np.ndarray) -> EpsilonFit:
    total = float(eps.sum())
    quarter = max(1, len(eps) // 4)
    tail = float(eps[-quarter:].sum())
    ratio = tail / total if total > 0 else 0.0
    label = "consistent with summable" if ratio <= SUMMABLE_TAIL_RATIO else "inconclusive"
    return EpsilonFit(eps, total, ratio, label)


@dataclass
class QuasiFejerFit:
    """Fitted perturbations for one quasi-Fejer type.

    Types I and II fit one uniform sequence (sup over anchors per step);
    Type III fits one sequence per anchor.
    """

    kind: str
    uniform: Optional[EpsilonFit] = None
    per_anchor: Optional[List[EpsilonFit]] = None


def fit_quasi_fejer(trace: Trace, anchors: AnchorSet, kind: str) -> QuasiFejerFit:
    """Fit the smallest perturbation sequence making the trace quasi-Fejer.

    Type I uses distance increments, Types II/III squared-distance
    increments; Type III keeps a separate sequence per anchor.
    """
    if kind not in ("I", "II", "III"):
        raise ValueError(f"kind must be one of 'I', 'II', 'III', got {kind!r}")
    for a in anchors.points:
        _check_trace_anchor(trace, a)

    X = trace.as_array()
    per_anchor_sq = []
    per_anchor_dist = []
    for a in anchors.points:
        diff = X - a
        sq = diff * diff
        delta_sq = (sq[1:] - sq[:-1]).sum(axis=1)
        per_anchor_sq.append(np.maximum(0.0, delta_sq))
        if kind == "I":
            dseq = np.sqrt(sq.sum(axis=1))
            per_anchor_dist.append(np.maximum(0.0, np.diff(dseq)))

    if kind == "I":
        return QuasiFejerFit("I", uniform=_fit_epsilons(np.max(per_anchor_dist, axis=0)))
    if kind == "II":
        return QuasiFejerFit("II", uniform=_fit_epsilons(np.max(per_anchor_sq, axis=0)))
    return QuasiFejerFit("III", per_anchor=[_fit_epsilons(e) for e in per_anchor_sq])


def _ceil_to_float(value: Fraction) -> float:
    """Smallest double >= value (values here are tiny positive or zero)."""
    f = float(value)
    if Fraction(f) < value:
        f = math.nextafter(f, math.inf)
    return f


def quasi_fejer3_witness(
    trace: Trace, x: Sequence[float] | Array, n: int, tol: float = 0.0
) -> np.ndarray:
    """Summable perturbations certifying the squared-distance inequality.

    Positive squared-distance increments before the tail index n become the
    perturbation entries (rounded up, so the certificate holds exactly);
    entries from n on are zero. Raises InvalidN when some step at or past n
    still increases the distance beyond tol.
    """
    x = as_vector(x)
    _check_trace_anchor(trace, x)
    if n < 0:
        raise ValueError("n must be nonnegative")
    flags = step_violations(trace, x, tol)
    late = np.nonzero(flags[n:])[0]
    if late.size:
        raise InvalidN(f"distance to the point still increases at step {n + int(late[0])}")

    X = trace.as_array()
    eps = np.zeros(len(trace) - 1)
    for k in range(min(n, len(eps))):
        delta = _exact_sq_dist(X[k + 1], x) - _exact_sq_dist(X[k], x)
        if delta > 0:
            eps[k] = _ceil_to_float(delta)
    return eps


@dataclass
class ClusterReport:
    clusters: List[Tuple[Array, List[int]]]
    is_convergent: bool
    limit_estimate: Optional[Array]


def cluster_points(trace: Trace, tail_fraction: float = 0.25, radius: float = 1e-6) -> ClusterReport:
    """Greedy radius-clustering of the tail iterates.

    Deterministic and order-dependent by design: each tail point joins the
    first cluster whose representative lies within radius, else founds a
    new cluster. One cluster means the tail is convergent at this scale.
    """
    if not 0 < tail_fraction <= 1:
        raise ValueError("tail_fraction must lie in (0, 1]")
    if radius <= 0:
        raise ValueError("radius must be positive")
    n_tail = math.ceil(tail_fraction * len(trace))
    start = len(trace) - n_tail
    reps: List[Array] = []
    members: List[List[int]] = []
    for idx in range(start, len(trace)):
        x = trace.iterates[idx]
        for rep, mem in zip(reps, members):
            if float(np.linalg.norm(x - rep)) <= radius:
                mem.append(idx)
                break
        else:
            reps.append(x)
            members.append([idx])
    is_convergent = len(reps) == 1
    limit = None
    if is_convergent:
        limit = np.mean([trace.iterates[i] for i in members[0]], axis=0)
    return ClusterReport(list(zip(reps, members)), is_convergent, limit)


@dataclass
class HyperplaneAlignment:
    alpha: float
    max_deviation: float
    passed: bool


def check_cluster_hyperplane(
    w1: Sequence[float] | Array,
    w2: Sequence[float] | Array,
    anchors: AnchorSet,
    tol: float = 1e-9,
) -> HyperplaneAlignment:
    """Do all anchors share one value of <y, w1 - w2>?

    A pair of distinct cluster points of a tail-monotone trace forces the
    reference set onto such a hyperplane; deviation beyond tol falsifies
    that geometry.
    """
    w1 = as_vector(w1)
    w2 = as_vector(w2)
    if w1.shape != w2.shape or anchors.dim != w1.shape[0]:
        raise DimensionMismatch("cluster points and anchors must share one dimension")
    if float(np.linalg.norm(w1 - w2)) <= tol:
        raise DegenerateClusterPair("cluster points coincide; the hyperplane test is vacuous")
    products = np.stack(anchors.points) @ (w1 - w2)
    alpha = float(products.mean())
    max_dev = float(np.abs(products - alpha).max())
    return HyperplaneAlignment(alpha, max_dev, max_dev <= tol * (1.0 + abs(alpha)))


@dataclass
class MidpointOrthogonality:
    max_deviation: float
    passed: bool


def check_cluster_midpoint_orthogonality(
    w1: Sequence[float] | Array,
    w2: Sequence[float] | Array,
    anchors: AnchorSet,
    tol: float = 1e-9,
) -> MidpointOrthogonality:
    """Max over anchors of |<y - (w1+w2)/2, w1 - w2>|."""
    w1 = as_vector(w1)
    w2 = as_vector(w2)
    if w1.shape != w2.shape or anchors.dim != w1.shape[0]:
        raise DimensionMismatch("cluster points and anchors must share one dimension")
    gap = w1 - w2
    if float(np.linalg.norm(gap)) <= tol:
        raise DegenerateClusterPair("cluster points coincide; the orthogonality test is vacuous")
    mid = 0.5 * (w1 + w2)
    devs = np.abs((np.stack(anchors.points) - mid) @ gap)
    max_dev = float(devs.max())
    return MidpointOrthogonality(max_dev, max_dev <= tol * (1.0 + float(gap @ gap)))


@dataclass
class StrongConvergenceCheck:
    holds: bool
    first_violation: Optional[int]


def check_strong_convergence_condition(
    trace: Trace,
    x: Sequence[float] | Array,
    rho: float,
    epsilons: Sequence[float],
    tol: float = 1e-12,
) -> StrongConvergenceCheck:
    """Check d_{k+1}^2 <= d_k^2 - rho*||x^{k+1} - x^k|| + eps_k at every step."""
    x = as_vector(x)
    _check_trace_anchor(trace, x)
    if rho <= 0:
        raise ValueError("rho must be positive")
    eps = np.asarray(epsilons, dtype=float)
    if np.any(eps < 0):
        raise ValueError("epsilons must be nonnegative")
    if eps.shape[0] < len(trace) - 1:
        raise LengthMismatch(
            f"need {len(trace) - 1} epsilon entries, got {eps.shape[0]}"
        )
    d2 = distance_sequence(trace, x) ** 2
    steps = np.linalg.norm(np.diff(trace.as_array(), axis=0), axis=1)
    lhs = d2[1:]
    rhs = d2[:-1] - rho * steps + eps[: len(trace) - 1] + tol
    bad = np.nonzero(lhs > rhs)[0]
    if bad.size:
        return StrongConvergenceCheck(False, int(bad[0]))
    return StrongConvergenceCheck(True, None)


# --- aggregate report and serialization -------------------------------------

@dataclass
class PerAnchorRecord:
    anchor: Array
    fejer: bool
    first_violation_index: Optional[int]
    fejer_star_n: Optional[int]
    type3_epsilons: np.ndarray
    type3_partial_sum: float


@dataclass
class MonotonicityReport:
    per_point: List[PerAnchorRecord]
    type1_epsilons: np.ndarray
    type2_epsilons: np.ndarray
    type1_partial_sum: float
    type2_partial_sum: float
    tail_ratio_estimate: float


def analyze_trace(trace: Trace, anchors: AnchorSet, tol: float = 0.0) -> MonotonicityReport:
    """Run the full per-anchor classification plus the uniform quasi-Fejer fits."""
    fejer = check_fejer(trace, anchors, tol)
    star = check_fejer_star(trace, anchors, tol)
    fit3 = fit_quasi_fejer(trace, anchors, "III")
    fit1 = fit_quasi_fejer(trace, anchors, "I")
    fit2 = fit_quasi_fejer(trace, anchors, "II")
    per_point = [
        PerAnchorRecord(
            anchor=a,
            fejer=f.fejer,
            first_violation_index=f.first_violation_index,
            fejer_star_n=s.n,
            type3_epsilons=e3.epsilons,
            type3_partial_sum=e3.partial_sum,
        )
        for a, f, s, e3 in zip(anchors.points, fejer, star, fit3.per_anchor)
    ]
    return MonotonicityReport(
        per_point=per_point,
        type1_epsilons=fit1.uniform.epsilons,
        type2_epsilons=fit2.uniform.epsilons,
        type1_partial_sum=fit1.uniform.partial_sum,
        type2_partial_sum=fit2.uniform.partial_sum,
        tail_ratio_estimate=fit2.uniform.tail_ratio,
    )


def report_to_json(report: MonotonicityReport) -> dict:
    return {
        "per_point": [
            {
                "anchor": r.anchor.tolist(),
                "fejer": r.fejer,
                "first_violation_index": r.first_violation_index,
                "fejer_star_n": r.fejer_star_n,
                "type3_partial_sum": r.type3_partial_sum,
                "type3_epsilons": r.type3_epsilons.tolist(),
            }
            for r in report.per_point
        ],
        "uniform": {
            "type1_partial_sum": report.type1_partial_sum,
            "type2_partial_sum": report.type2_partial_sum,
            "tail_ratio_estimate": report.tail_ratio_estimate,
            "type1_epsilons": report.type1_epsilons.tolist(),
            "type2_epsilons": report.type2_epsilons.tolist(),
        },
    }


def cluster_report_to_json(report: ClusterReport) -> dict:
    return {
        "clusters": [
            {"representative": rep.tolist(), "member_indices": mem}
            for rep, mem in report.clusters
        ],
        "is_convergent": report.is_convergent,
        "limit_estimate": None if report.limit_estimate is None else report.limit_estimate.tolist(),
    }


def anchorset_to_json(anchors: AnchorSet) -> dict:
    return {"label": anchors.label, "points": [p.tolist() for p in anchors.points]}


def anchorset_from_json(doc: dict) -> AnchorSet:
    return AnchorSet(
        points=tuple(np.asarray(p, dtype=float) for p in doc["points"]),
        label=doc.get("label", ""),
    )


def load_anchorset_json(path: str) -> AnchorSet:
    with open(path, encoding="utf-8") as fh:
        return anchorset_from_json(json.load(fh))

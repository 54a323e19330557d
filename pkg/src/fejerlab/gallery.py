"""Executable fixtures: the zigzag arc sequence and its anchor variants.

The trace alternates a horizontal move of 2^-l with a drop back to the
vertical axis along a circular arc centered at (1, 0). Written with
x^k = (alpha_k, beta_k), the drop satisfies

    beta_{k+1}^2 = alpha_k^2 - 2*alpha_k + beta_k^2,

which telescopes to the limit height sqrt(4/3). The square root in the
drop is rounded downward over exact rationals so that the stored doubles
satisfy beta_{k+1}^2 <= alpha_k^2 - 2*alpha_k + beta_k^2 exactly; every
tail-monotonicity statement about the fixture then holds in exact
arithmetic on the stored trace, not just up to rounding.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict

import numpy as np

from .diagnostics import AnchorSet
from .solvers import Trace

#: height of the limit point, sqrt(4/3)
LIMIT_HEIGHT = math.sqrt(4.0 / 3.0)

# sampling margin for boundaries excluded from half-open anchor boxes
_OPEN_MARGIN = 1e-6


@dataclass(frozen=True)
class AnalyticFact:
    value: object
    provenance: str


@dataclass(frozen=True)
class ExampleFixture:
    trace: Trace
    anchor_sets: Dict[str, AnchorSet]
    analytic_facts: Dict[str, AnalyticFact] = field(default_factory=dict)
    expectations: Dict[str, str] = field(default_factory=dict)


def _sqrt_round_down(s: Fraction) -> float:
    """Largest double r with r*r <= s (assumes s within one ulp of a square)."""
    r = math.sqrt(float(s))
    while Fraction(r) * Fraction(r) > s:
        r = math.nextafter(r, 0.0)
    return r


def zigzag_arc_trace(num_iterates: int) -> Trace:
    """The fixture trace: x^0 = (0, 2), horizontal then arc-drop steps."""
    if num_iterates < 1:
        raise ValueError("num_iterates must be at least 1")
    iterates = [np.array([0.0, 2.0])]
    ell = 0
    while len(iterates) < num_iterates:
        alpha, beta = iterates[-1]
        if len(iterates) % 2 == 1:
            # odd index comes next: move 2^-ell to the right
            iterates.append(np.array([2.0**-ell, beta]))
        else:
            s = (Fraction(alpha) - 1) ** 2 + Fraction(beta) ** 2 - 1
            iterates.append(np.array([0.0, _sqrt_round_down(s)]))
            ell += 1
    return Trace(
        iterates=tuple(iterates),
        algorithm="zigzag_arc",
        params={"status": "Fixture", "num_iterates": num_iterates},
        annotations=tuple([None] * len(iterates)),
    )


def _origin_anchor() -> AnchorSet:
    return AnchorSet((np.zeros(2),), label="origin")


def example_3_3(num_iterates: int, num_anchor_points: int = 6, seed: int = 0) -> ExampleFixture:
    """Fixture with geometric anchor points w^l = (2^-l, 0).

    Anchor sets: the points themselves, a random sample of the open
    segment (0, 1] x {0} they generate, and the origin, which lies in the
    closure of that segment but not in it.
    """
    if num_anchor_points < 1:
        raise ValueError("num_anchor_points must be at least 1")
    trace = zigzag_arc_trace(num_iterates)
    rng = np.random.default_rng(seed)
    m_points = tuple(np.array([2.0**-l, 0.0]) for l in range(num_anchor_points))
    # 1 - random() lies in (0, 1]
    lambdas = 1.0 - rng.random(max(num_anchor_points, 8))
    hull_points = tuple(np.array([lam, 0.0]) for lam in lambdas)
    return ExampleFixture(
        trace=trace,
        anchor_sets={
            "M_sample": AnchorSet(m_points, label="M_sample"),
            "convM_sample": AnchorSet(hull_points, label="convM_sample"),
            "origin": _origin_anchor(),
        },
        analytic_facts={
            "limit": AnalyticFact(
                np.array([0.0, LIMIT_HEIGHT]),
                "closed-form limit of the telescoped squared-height recursion",
            ),
            "beta_sq_start": AnalyticFact(4.0, "squared height of the starting point"),
            "min_height": AnalyticFact(1.0, "arc radius 1 around (1, 0) bounds the height below"),
        },
        expectations={
            "fejer_star_M_sample": "present with tail index at most 2*l at anchor (2^-l, 0)",
            "fejer_star_convM_sample": "present at every sampled point of the open segment",
            "fejer_star_origin": "absent: every horizontal step increases the distance",
        },
    )


def example_remark_interior(num_iterates: int, grid: int = 5) -> ExampleFixture:
    """Same trace, anchors sampled from the half-open box (0, 1] x (-1, 0].

    The box has nonempty interior; the excluded edges (left and bottom)
    are kept away by a small sampling margin.
    """
    if grid < 2:
        raise ValueError("grid must be at least 2")
    trace = zigzag_arc_trace(num_iterates)
    xs = np.linspace(_OPEN_MARGIN, 1.0, grid)
    ys = np.linspace(-1.0 + _OPEN_MARGIN, 0.0, grid)
    pts = tuple(np.array([a, b]) for a in xs for b in ys)
    return ExampleFixture(
        trace=trace,
        anchor_sets={
            "box_sample": AnchorSet(pts, label="box_sample"),
            "origin": _origin_anchor(),
        },
        expectations={
            "fejer_star_box_sample": "present at every sampled anchor of the half-open box",
            "fejer_star_origin": "absent, as for the segment anchors",
        },
    )


def example_quasi2_not_star(num_iterates: int, num_anchor_points: int = 11) -> ExampleFixture:
    """Same trace, anchors on the segment [-1, 0] x {0}.

    Against this segment the trace admits a summable uniform squared
    perturbation (the horizontal steps shrink geometrically) while the
    origin, a point of the segment, still has no valid monotone tail.
    """
    if num_iterates < 4:
        raise ValueError("num_iterates must be at least 4")
    trace = zigzag_arc_trace(num_iterates)
    xs = np.linspace(-1.0, 0.0, num_anchor_points)
    pts = tuple(np.array([a, 0.0]) for a in xs)
    return ExampleFixture(
        trace=trace,
        anchor_sets={
            "segment_sample": AnchorSet(pts, label="segment_sample"),
            "origin": _origin_anchor(),
        },
        expectations={
            "quasi_fejer_type2": "uniform squared perturbations with finite sum and small tail",
            "fejer_star_origin": "absent at the origin although it belongs to the segment",
        },
    )


FIXTURES = {
    "3.3": example_3_3,
    "remark": example_remark_interior,
    "quasi2": example_quasi2_not_star,
}

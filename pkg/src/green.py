"""
Advanced and retarded Green's operators by causal time-stepping.

E+ (retarded) starts from zero data before the source and marches forward, E- (advanced)
starts from zero data after the source and marches backward. Both reuse the leapfrog kernel
of the evolution, so box E+- f = f holds to rounding on every interior row.
"""
import logging
from dataclasses import dataclass

import numpy as np

from errors import LatticeError, SupportError
from evolve import (
    SpacetimeForm,
    box,
    box_residual,
    exterior_derivative,
    march_backward,
    march_forward,
    spacetime_codifferential,
    spacetime_pairing,
    time_support,
)
from forms import laplacian_matrix

logger = logging.getLogger(__name__)

DIRECTIONS = ("retarded", "advanced")

OPERATORS = {
    "d": exterior_derivative,
    "delta": spacetime_codifferential,
    "δ": spacetime_codifferential,
}


@dataclass(frozen=True)
class GreensOperator:
    direction: str
    spacetime: object

    def __post_init__(self):
        if self.direction not in DIRECTIONS:
            raise LatticeError(f"direction must be one of {DIRECTIONS}, got '{self.direction}'")

    def __call__(self, f):
        return apply(self, f)


def apply(G, f):
    """E+ f or E- f, depending on the operator's direction."""
    st = G.spacetime
    if f.spacetime is not st:
        raise LatticeError("source lives on a different spacetime")
    K = st.steps
    result = SpacetimeForm.zeros(st, f.degree)
    support = time_support(f)
    if support is None:
        return result
    first, last = support
    if G.direction == "retarded" and first < 1:
        raise SupportError(f"retarded source starts at node {first}; slice 0 must stay empty")
    if G.direction == "advanced" and last > K - 1:
        raise SupportError(f"advanced source ends at node {last}; slice {K} must stay empty")

    cx, metric = st.complex, st.metric
    a, b = result.a.copy(), result.b.copy()
    L_p = laplacian_matrix(cx, metric, f.degree)
    L_q = laplacian_matrix(cx, metric, f.degree - 1)
    if G.direction == "retarded":
        march_forward(a, f.a, L_p, st.dt, first=1)
        if b.shape[1]:
            march_forward(b, f.b, L_q, st.dt, first=1)
    else:
        march_backward(a, f.a, L_p, st.dt, first=K + 1)
        if b.shape[1]:
            march_backward(b, f.b, L_q, st.dt, first=K)
    logger.debug("%s Green's operator on support %s, degree %d", G.direction, support, f.degree)
    return SpacetimeForm(st, f.degree, a, b)


def causal_propagator(f):
    """E f = E- f - E+ f, a homogeneous solution."""
    st = f.spacetime
    return apply(GreensOperator("advanced", st), f) - apply(GreensOperator("retarded", st), f)


def _relative(diff, *references):
    scale = max(ref.interior_norm() for ref in references)
    size = diff.interior_norm()
    return size / scale if scale > 0 else size


def commutation_check(f, op):
    """Largest relative mismatch of op E+-f against E+-(op f) over both directions."""
    operator = OPERATORS.get(op)
    if operator is None:
        raise LatticeError(f"unknown operator '{op}', expected d or delta")
    st = f.spacetime
    worst = 0.0
    for direction in DIRECTIONS:
        G = GreensOperator(direction, st)
        lhs = operator(apply(G, f))
        rhs = apply(G, operator(f))
        worst = max(worst, _relative(lhs - rhs, lhs, rhs))
    return worst


def box_inverse_check(theta):
    """Relative sizes of E box theta and of box E theta for a compactly supported theta."""
    f = box(theta)
    return {
        "E_box": _relative(causal_propagator(f), theta),
        "box_E": box_residual(causal_propagator(theta)),
    }


def transpose_check(f, g):
    """Relative size of <Ef, g> + <f, Eg>; the propagator is antisymmetric under the pairing."""
    left = spacetime_pairing(causal_propagator(f), g)
    right = spacetime_pairing(f, causal_propagator(g))
    scale = abs(left) + abs(right)
    return abs(left + right) / scale if scale > 0 else 0.0


def _support_points(form):
    """(earliest node, latest node, degree, cell id) of every nonzero entry."""
    points = []
    rows, cells = np.nonzero(form.a)
    for row, cell in zip(rows, cells):
        points.append((row - 1, row - 1, form.degree, cell))
    rows, cells = np.nonzero(form.b)
    for row, cell in zip(rows, cells):
        points.append((row - 1, row, form.degree - 1, cell))
    return points


def spacelike_separated(f, g, margin=0):
    """True when every pair of support points is farther apart in cells than in time steps.

    One leapfrog step spreads a disturbance by at most one cell in the periodic infinity norm,
    so a cell distance strictly above the slice separation (plus ``margin``) keeps f outside
    the discrete light cone of g.
    """
    cx = f.spacetime.complex
    pf, pg = _support_points(f), _support_points(g)
    if not pf or not pg:
        return True
    for deg_f in {p[2] for p in pf}:
        for deg_g in {p[2] for p in pg}:
            sub_f = np.array([p for p in pf if p[2] == deg_f])
            sub_g = np.array([p for p in pg if p[2] == deg_g])
            dist = cx.cell_distance(deg_f, sub_f[:, 3], deg_g, sub_g[:, 3])
            gap = np.maximum(
                np.abs(sub_f[:, None, 1] - sub_g[None, :, 0]), np.abs(sub_g[None, :, 1] - sub_f[:, None, 0])
            )
            if np.any(dist <= gap + margin):
                return False
    return True

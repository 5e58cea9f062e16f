"""
Symplectic phase space of the Maxwell solutions: sigma on slices, the quotient by exact
configurations, and the Poisson bracket of linear observables.
"""
import logging
from dataclasses import dataclass

import numpy as np

from cauchy import SCALE_FLOOR, maxwell_residual
from errors import ConstraintViolationError, LatticeError
from evolve import SpacetimeForm, spacetime_codifferential, spacetime_pairing, trace
from forms import FLAT, codifferential, hodge_decompose, inner, lambda_max, norm
from green import causal_propagator
from lattice import Cochain, coboundary

logger = logging.getLogger(__name__)

SOLUTION_TOL = 1e-6
EXACT_TOL = 1e-10
COCLOSED_TOL = 1e-8
BRACKET_FLOOR = 1e-10


def _coclosure(u, metric):
    if u.degree < 1:
        return 0.0
    return norm(codifferential(u, metric), metric)


@dataclass(frozen=True, eq=False)
class PhasePoint:
    """([A_0], A_d): configuration without exact part, co-closed momentum."""

    configuration: Cochain
    momentum: Cochain
    metric: object

    def __post_init__(self):
        c, m = self.configuration, self.momentum
        if c.degree != m.degree or c.complex is not m.complex:
            raise LatticeError("configuration and momentum must share degree and complex")
        size = max(norm(c, self.metric), SCALE_FLOOR)
        exact = hodge_decompose(c, self.metric).exact
        if norm(exact, self.metric) > EXACT_TOL * size:
            raise ConstraintViolationError(
                f"configuration carries an exact part of relative size {norm(exact, self.metric) / size:.3e}"
            )
        leak = _coclosure(m, self.metric)
        bound = COCLOSED_TOL * max(norm(m, self.metric), SCALE_FLOOR) * np.sqrt(lambda_max(m.complex, self.metric))
        if leak > bound:
            raise ConstraintViolationError(f"momentum is not co-closed: |delta A_d| = {leak:.3e}")

    @classmethod
    def from_data(cls, A0, Ad, metric):
        """Drop the exact part of A0; the remaining class is what sigma sees."""
        parts = hodge_decompose(A0, metric)
        return cls(parts.coexact + parts.harmonic, Ad, metric)

    @classmethod
    def from_solution(cls, A, k):
        metric = A.spacetime.metric
        return cls.from_data(trace(A, k, "0"), trace(A, k, "d"), metric)

    @classmethod
    def zeros(cls, complex, p, metric):
        return cls(Cochain.zeros(complex, p), Cochain.zeros(complex, p), metric)

    @property
    def degree(self):
        return self.configuration.degree

    @property
    def complex(self):
        return self.configuration.complex

    def norm(self):
        return float(np.hypot(norm(self.configuration, self.metric), norm(self.momentum, self.metric)))

    def __add__(self, other):
        if not isinstance(other, PhasePoint):
            return NotImplemented
        return PhasePoint(self.configuration + other.configuration, self.momentum + other.momentum, self.metric)

    def __sub__(self, other):
        if not isinstance(other, PhasePoint):
            return NotImplemented
        return PhasePoint(self.configuration - other.configuration, self.momentum - other.momentum, self.metric)

    def __mul__(self, scalar):
        if not np.isscalar(scalar):
            return NotImplemented
        return PhasePoint(scalar * self.configuration, scalar * self.momentum, self.metric)

    __rmul__ = __mul__

    def __neg__(self):
        return PhasePoint(-self.configuration, -self.momentum, self.metric)


def _require_solution(A, what):
    residual = maxwell_residual(A)
    if residual > SOLUTION_TOL:
        raise ConstraintViolationError(f"{what} is not a Maxwell solution (residual {residual:.3e})")


def _sigma_terms(A, B, k):
    metric = A.spacetime.metric
    return (
        inner(trace(A, k, "0"), trace(B, k, "d"), metric),
        -inner(trace(B, k, "0"), trace(A, k, "d"), metric),
    )


def sigma(A, B, k, check=True):
    """<rho_0 A, rho_d B> - <rho_0 B, rho_d A> on slice k."""
    A._check(B)
    if check:
        _require_solution(A, "first argument")
        _require_solution(B, "second argument")
    return float(sum(_sigma_terms(A, B, k)))


def sigma_points(u, v):
    """sigma evaluated directly on phase points."""
    m = u.metric
    return float(inner(u.configuration, v.momentum, m) - inner(v.configuration, u.momentum, m))


def surface_independence_check(A, B, k1, k2):
    if k1 == k2:
        raise LatticeError("surface independence needs two different slices")
    _require_solution(A, "first argument")
    _require_solution(B, "second argument")
    first, second = _sigma_terms(A, B, k1), _sigma_terms(A, B, k2)
    scale = sum(abs(t) for t in first + second)
    diff = abs(sum(first) - sum(second))
    logger.debug("sigma on slices %d and %d: %.6e vs %.6e", k1, k2, sum(first), sum(second))
    return diff / scale if scale > 0 else diff


def degenerate_form_demo(chi, B):
    """Unquotiented sigma with first argument (d chi, 0): equals <chi, delta B_d>.

    ``B`` is a PhasePoint or a bare momentum cochain; the latter is taken as given so that a
    momentum which is not co-closed shows a nonzero value.
    """
    momentum = B.momentum if isinstance(B, PhasePoint) else B
    metric = B.metric if isinstance(B, PhasePoint) else FLAT
    if chi.degree != momentum.degree - 1:
        raise LatticeError(f"chi must have degree {momentum.degree - 1}, got {chi.degree}")
    if momentum.degree == 0:
        return 0.0
    return float(inner(coboundary(chi), momentum, metric))


def require_coclosed(f, what):
    if f.degree < 1:
        return
    size = f.interior_norm()
    leak = spacetime_codifferential(f).interior_norm()
    if leak > COCLOSED_TOL * max(size, SCALE_FLOOR):
        raise ConstraintViolationError(f"{what} is not co-closed: |delta f| = {leak:.3e}")


def _default_slice(f, k):
    return f.spacetime.steps // 2 if k is None else k


def pairing_vs_sigma(A, f, k=None):
    """Relative mismatch of <A, f> against sigma(A, Ef) on slice k."""
    require_coclosed(f, "smearing current")
    k = _default_slice(f, k)
    lhs = spacetime_pairing(A, f)
    Ef = causal_propagator(f)
    terms = _sigma_terms(A, Ef, k)
    _require_solution(A, "field")
    scale = abs(lhs) + sum(abs(t) for t in terms)
    diff = abs(lhs - sum(terms))
    return diff / scale if scale > 0 else diff


def poisson_bracket(f, g, k=None):
    """{f, g} = sigma(Ef, Eg) on slice k."""
    require_coclosed(f, "first current")
    require_coclosed(g, "second current")
    k = _default_slice(f, k)
    return float(sum(_sigma_terms(causal_propagator(f), causal_propagator(g), k)))


def _bracket_parts(f, g, k):
    require_coclosed(f, "first current")
    require_coclosed(g, "second current")
    Ef, Eg = causal_propagator(f), causal_propagator(g)
    terms = _sigma_terms(Ef, Eg, _default_slice(f, k))
    st = f.spacetime
    span = (st.steps + 1) * st.dt
    bound = span * (Ef.interior_norm() * g.interior_norm() + f.interior_norm() * Eg.interior_norm())
    return Ef, Eg, terms, BRACKET_FLOOR * (bound + sum(abs(t) for t in terms))


def bracket_floor(f, g, k=None):
    """Size below which a bracket of f and g counts as zero: a small multiple of the bound
    on |<Ef, g>| and of the sigma terms."""
    return _bracket_parts(f, g, k)[3]


def poisson_bracket_check(f, g, k=None):
    """Bracket together with its two pairing forms <Ef, g> and -<f, Eg>.

    Returns the bracket value and the larger relative mismatch against the pairings. When all
    three values sit below ``bracket_floor`` they agree and the mismatch is 0.
    """
    Ef, Eg, terms, floor = _bracket_parts(f, g, k)
    bracket = float(sum(terms))
    via_left = spacetime_pairing(Ef, g)
    via_right = -spacetime_pairing(f, Eg)
    scale = max(abs(bracket), abs(via_left), abs(via_right))
    if scale <= floor:
        return bracket, 0.0
    return bracket, max(abs(bracket - via_left), abs(bracket - via_right)) / scale


def bracket_antisymmetry(f, g, k=None):
    """|{f, g} + {g, f}| relative to the brackets, 0 when both are below the floor."""
    forward, backward = poisson_bracket(f, g, k), poisson_bracket(g, f, k)
    scale = max(abs(forward), abs(backward))
    if scale <= bracket_floor(f, g, k):
        return 0.0
    return abs(forward + backward) / scale


def nondegeneracy_witness(u):
    """Partner v = (-p, q) of u = (q, p), with sigma(u, v) = |u|^2; returns (v, ratio)."""
    v = PhasePoint(-u.momentum, u.configuration, u.metric)
    size = u.norm() ** 2
    if size == 0.0:
        return v, 0.0
    return v, sigma_points(u, v) / size


def static_form(spacetime, cochain):
    """Spacetime form with the same tangential cochain on every node and no normal part."""
    a = np.tile(cochain.values, (spacetime.steps + 3, 1))
    b = np.zeros((spacetime.steps + 2, spacetime.complex.cell_count(cochain.degree - 1)))
    return SpacetimeForm(spacetime, cochain.degree, a, b)

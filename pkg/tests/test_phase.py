import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cauchy import GaugeParameter, gauge_transform, maxwell_residual
from errors import ConstraintViolationError, LatticeError
from evolve import Current, Spacetime, leapfrog_evolve
from factories import coclosed_current, lorenz_data, random_current, random_form
from forms import FLAT, codifferential, eigenmodes, inner, norm
from lattice import Cochain, build_complex, coboundary, random_cochain
from phase import (
    PhasePoint,
    bracket_antisymmetry,
    bracket_floor,
    degenerate_form_demo,
    nondegeneracy_witness,
    pairing_vs_sigma,
    poisson_bracket,
    poisson_bracket_check,
    require_coclosed,
    sigma,
    sigma_points,
    static_form,
    surface_independence_check,
)


def solution(st, p, rng):
    return leapfrog_evolve(lorenz_data(st.complex, st.metric, p, rng), None, st)


@settings(max_examples=10, deadline=None)
@given(seed=st.integers(0, 2**16))
def test_sigma_is_antisymmetric_and_bilinear(seed):
    rng = np.random.default_rng(seed)
    spacetime = Spacetime.from_cfl(build_complex(1, 8, 1.0), steps=16)
    A, B, C = (solution(spacetime, 1, rng) for _ in range(3))
    k = 8
    ab = sigma(A, B, k)
    scale = abs(ab) + abs(sigma(C, B, k)) + 1e-300
    assert abs(ab + sigma(B, A, k)) <= 1e-12 * scale
    assert abs(sigma(A, A, k)) <= 1e-12 * scale
    mixed = sigma(2.0 * A + 3.0 * C, B, k)
    assert abs(mixed - 2.0 * ab - 3.0 * sigma(C, B, k)) <= 1e-10 * scale


def test_sigma_needs_solutions(spacetime, rng):
    A = solution(spacetime, 1, rng)
    with pytest.raises(ConstraintViolationError):
        sigma(A, random_form(spacetime, 1, rng), 3)


def test_sigma_does_not_depend_on_the_slice(spacetime2d, rng):
    A, B = solution(spacetime2d, 1, rng), solution(spacetime2d, 1, rng)
    assert surface_independence_check(A, B, 0, spacetime2d.steps) <= 1e-9
    assert surface_independence_check(A, B, 3, 11) <= 1e-9
    with pytest.raises(LatticeError):
        surface_independence_check(A, B, 4, 4)


def test_sigma_is_gauge_invariant(spacetime2d, rng):
    A, B = solution(spacetime2d, 1, rng), solution(spacetime2d, 1, rng)
    moved = gauge_transform(A, GaugeParameter(random_form(spacetime2d, 0, rng)))
    k = spacetime2d.steps // 2
    assert sigma(moved, B, k) == pytest.approx(sigma(A, B, k), rel=1e-8, abs=1e-10)


def test_phase_point_rejects_exact_configuration(torus, rng):
    exact = coboundary(random_cochain(torus, 0, rng))
    with pytest.raises(ConstraintViolationError):
        PhasePoint(exact, Cochain.zeros(torus, 1), FLAT)
    with pytest.raises(ConstraintViolationError):
        PhasePoint(Cochain.zeros(torus, 1), random_cochain(torus, 1, rng), FLAT)


def test_phase_point_drops_exact_part(torus, rng):
    coexact = eigenmodes(torus, FLAT, 1, 1, sector="coexact").mode(0)
    A0 = coexact + coboundary(random_cochain(torus, 0, rng))
    point = PhasePoint.from_data(A0, Cochain.zeros(torus, 1), FLAT)
    assert norm(point.configuration - coexact) <= 1e-10


def test_unquotiented_form_is_degenerate(torus, rng):
    chi = random_cochain(torus, 0, rng)
    momentum = eigenmodes(torus, FLAT, 1, 3, sector="coexact").synthesize(rng.standard_normal(3))
    point = PhasePoint(Cochain.zeros(torus, 1), momentum, FLAT)
    assert abs(degenerate_form_demo(chi, point)) <= 1e-10 * norm(coboundary(chi)) * norm(momentum)
    loose = random_cochain(torus, 1, rng)
    assert degenerate_form_demo(chi, loose) == pytest.approx(inner(chi, codifferential(loose)))


def test_nondegeneracy_witness(spacetime2d, rng):
    point = PhasePoint.from_solution(solution(spacetime2d, 1, rng), 0)
    partner, ratio = nondegeneracy_witness(point)
    assert ratio == pytest.approx(1.0)
    assert sigma_points(point, partner) > 0


def test_pairing_is_sigma_with_the_propagator(spacetime2d, rng):
    A = solution(spacetime2d, 1, rng)
    f = coclosed_current(spacetime2d, 1, (3, spacetime2d.steps - 3), rng)
    for k in (0, 12, spacetime2d.steps):
        assert pairing_vs_sigma(A, f, k) <= 1e-9


def test_pairing_needs_coclosed_smearing(spacetime2d, rng):
    A = solution(spacetime2d, 1, rng)
    with pytest.raises(ConstraintViolationError):
        pairing_vs_sigma(A, random_current(spacetime2d, 1, (3, 20), rng))
    require_coclosed(random_current(spacetime2d, 0, (3, 20), rng), "scalar currents always pass")


def test_poisson_bracket(spacetime2d, rng):
    f = coclosed_current(spacetime2d, 1, (3, 20), rng)
    g = coclosed_current(spacetime2d, 1, (5, 18), rng)
    value, mismatch = poisson_bracket_check(f, g)
    assert mismatch <= 1e-9
    assert poisson_bracket(g, f) == pytest.approx(-value, rel=1e-9, abs=1e-12)


def test_poisson_bracket_vanishes_at_spacelike_separation(spacetime):
    def point(node, cell):
        values = np.zeros(8)
        values[cell] = 1.0
        return Current.from_slices(spacetime, 0, (node, node), tangential={node: values})

    assert abs(poisson_bracket(point(16, 0), point(17, 4))) <= 1e-12
    assert abs(poisson_bracket(point(16, 0), point(17, 0))) > 1e-9


def test_static_form_of_closed_cochain_is_a_solution(spacetime2d, rng):
    h = static_form(spacetime2d, coboundary(random_cochain(spacetime2d.complex, 0, rng)))
    assert h.b.shape == (spacetime2d.steps + 2, 16)
    assert maxwell_residual(h) <= 1e-9


@pytest.mark.parametrize("d, N, p", [(1, 8, 1), (2, 4, 1), (2, 4, 2)])
def test_sigma_accepts_rescaled_solutions(d, N, p, rng):
    st4 = Spacetime.from_cfl(build_complex(d, N, 1.0), steps=16)
    A, B = solution(st4, p, rng), solution(st4, p, rng)
    assert maxwell_residual(A) <= 1e-10
    assert maxwell_residual(1e3 * A) <= 1e-10
    assert maxwell_residual(1e-3 * A) <= 1e-10
    assert sigma(1e3 * A, B, 8) == pytest.approx(1e3 * sigma(A, B, 8), rel=1e-9, abs=1e-9)


def test_poisson_bracket_at_top_degree(spacetime, spacetime2d, rng):
    for st4, p in ((spacetime, 1), (spacetime2d, 2)):
        f = coclosed_current(st4, p, (3, st4.steps - 3), rng)
        g = coclosed_current(st4, p, (5, st4.steps - 5), rng)
        value, mismatch = poisson_bracket_check(f, g)
        assert abs(value) <= bracket_floor(f, g)
        assert mismatch == 0.0
        assert bracket_antisymmetry(f, g) == 0.0

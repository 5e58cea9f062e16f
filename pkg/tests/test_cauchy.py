import json

import numpy as np
import pytest

from cauchy import (
    CauchyData,
    GaugeParameter,
    cauchy_data_of,
    field_strength_residuals,
    fundamental_solution_check,
    gauge_difference,
    gauge_transform,
    is_gauge_equivalent,
    is_lorenz_data,
    lorenz_equivalence_check,
    make_coulomb,
    maxwell_residual,
    solve_F_cauchy,
    solve_maxwell_homogeneous,
    solve_maxwell_inhomogeneous,
    static_charge_current,
    violation_persistence,
)
from errors import ConstraintViolationError, DegreeMismatchError, TopologicalObstructionError
from evolve import exterior_derivative, leapfrog_evolve
from factories import coclosed, coclosed_current, lorenz_data, random_current, random_form
from forms import FLAT, codifferential, eigenmodes, norm
from green import GreensOperator
from lattice import Cochain, coboundary, random_cochain


def test_cauchy_data_degrees_are_checked(torus, rng):
    with pytest.raises(DegreeMismatchError):
        CauchyData(*(random_cochain(torus, 1, rng) for _ in range(4)))


def test_lorenz_data_recognised(torus, rng):
    data = lorenz_data(torus, FLAT, 1, rng)
    assert is_lorenz_data(data, FLAT).ok
    broken = CauchyData(data.A0, data.Ad, data.An, random_cochain(torus, 0, rng))
    verdict = is_lorenz_data(broken, FLAT)
    assert not verdict.ok
    assert verdict.residuals["A_delta"] > 0


def test_homogeneous_solution(spacetime2d, rng):
    cx = spacetime2d.complex
    A = solve_maxwell_homogeneous(random_cochain(cx, 1, rng), coclosed(random_cochain(cx, 1, rng), FLAT), spacetime2d)
    assert maxwell_residual(A) <= 1e-8
    with pytest.raises(ConstraintViolationError):
        solve_maxwell_homogeneous(random_cochain(cx, 1, rng), random_cochain(cx, 1, rng), spacetime2d)


def test_inhomogeneous_solution_with_static_charge(spacetime2d, rng):
    cx = spacetime2d.complex
    psi = codifferential(random_cochain(cx, 1, rng))
    J = static_charge_current(spacetime2d, psi)
    A = solve_maxwell_inhomogeneous(random_cochain(cx, 1, rng), J, spacetime2d)
    assert maxwell_residual(A, J) <= 1e-8
    assert is_lorenz_data(cauchy_data_of(A, 0), FLAT, J).ok


def test_inhomogeneous_solution_needs_coclosed_current(spacetime2d, rng):
    J = random_current(spacetime2d, 1, (3, 20), rng)
    with pytest.raises(ConstraintViolationError):
        solve_maxwell_inhomogeneous(Cochain.zeros(spacetime2d.complex, 1), J, spacetime2d)


def test_harmonic_charge_has_no_lorenz_solution(spacetime2d):
    J = static_charge_current(spacetime2d, Cochain(spacetime2d.complex, 0, np.ones(16)))
    with pytest.raises(TopologicalObstructionError):
        solve_maxwell_inhomogeneous(Cochain.zeros(spacetime2d.complex, 1), J, spacetime2d)


def test_retarded_solution_from_zero_data(spacetime2d, rng):
    J = coclosed_current(spacetime2d, 1, (3, spacetime2d.steps - 3), rng)
    A = solve_maxwell_inhomogeneous(Cochain.zeros(spacetime2d.complex, 1), J, spacetime2d)
    X = GreensOperator("retarded", spacetime2d)(J)
    np.testing.assert_allclose(A.a, X.a, atol=1e-12)
    assert is_gauge_equivalent(A, X, k=spacetime2d.steps, source=J)


def test_gauge_transform_keeps_field_strength(spacetime2d, rng):
    A = random_form(spacetime2d, 1, rng)
    lam = GaugeParameter(random_form(spacetime2d, 0, rng))
    F = exterior_derivative(A)
    moved = exterior_derivative(gauge_transform(A, lam))
    assert (moved - F).interior_norm() <= 1e-10 * F.interior_norm()
    with pytest.raises(DegreeMismatchError):
        gauge_transform(A, GaugeParameter(random_form(spacetime2d, 1, rng)))


def test_gauge_equivalence_decisions(spacetime2d, rng):
    A = leapfrog_evolve(lorenz_data(spacetime2d.complex, FLAT, 1, rng), None, spacetime2d)
    moved = gauge_transform(A, GaugeParameter(random_form(spacetime2d, 0, rng)))
    k = spacetime2d.steps // 2
    assert is_gauge_equivalent(A, moved, k)
    assert not is_gauge_equivalent(A, 2.0 * A, k)
    diff = gauge_difference(A, 2.0 * A, k)
    assert max(diff.values()) > 1e-3
    with pytest.raises(ConstraintViolationError):
        is_gauge_equivalent(A, random_form(spacetime2d, 1, rng), k)


def test_coulomb_gauge(spacetime2d, rng):
    data = lorenz_data(spacetime2d.complex, FLAT, 1, rng)
    coulomb, lam = make_coulomb(data, spacetime2d)
    assert norm(coulomb.An) == 0.0
    moved = gauge_transform(leapfrog_evolve(data, None, spacetime2d), lam)
    target = leapfrog_evolve(coulomb, None, spacetime2d)
    assert (moved - target).interior_norm() <= 1e-9 * target.interior_norm()


def test_coulomb_needs_lorenz_data(spacetime2d, rng):
    data = lorenz_data(spacetime2d.complex, FLAT, 1, rng)
    broken = CauchyData(data.A0, data.Ad, data.An, random_cochain(spacetime2d.complex, 0, rng))
    with pytest.raises(ConstraintViolationError):
        make_coulomb(broken, spacetime2d)


def test_fundamental_solution(spacetime2d, rng):
    J = coclosed_current(spacetime2d, 1, (3, spacetime2d.steps - 3), rng)
    for direction in ("retarded", "advanced"):
        result = fundamental_solution_check(J, direction)
        assert result.applicable
        assert result.residual <= 1e-9
    loose = fundamental_solution_check(random_current(spacetime2d, 1, (3, 20), rng), "retarded")
    assert not loose.applicable


def test_violations_persist(spacetime, rng):
    data = lorenz_data(spacetime.complex, FLAT, 1, rng)
    assert lorenz_equivalence_check(data, spacetime) <= 1e-9 * data.scale(FLAT) * np.sqrt(spacetime.lambda_max)
    phi = eigenmodes(spacetime.complex, FLAT, 0, 1, sector="coexact").mode(0)
    kicked = CauchyData(data.A0, data.Ad, data.An, 0.1 * phi)
    injected, kept = violation_persistence(kicked, spacetime)
    assert injected == pytest.approx(0.1)
    assert kept >= 0.5 * injected


def test_field_strength_cauchy_problem(spacetime2d, rng):
    cx = spacetime2d.complex
    F0 = coboundary(random_cochain(cx, 1, rng))
    Fn = coclosed(random_cochain(cx, 1, rng), FLAT)
    A, F = solve_F_cauchy(F0, Fn, spacetime2d)
    assert A.degree == 1
    for name, value in field_strength_residuals(F, F0, Fn).items():
        assert value <= 1e-8, name


def test_field_strength_needs_exact_data(spacetime2d, rng):
    cx = spacetime2d.complex
    harmonic = eigenmodes(cx, FLAT, 1)
    h = harmonic.mode(int(np.flatnonzero(harmonic.harmonic)[0]))
    with pytest.raises(TopologicalObstructionError):
        solve_F_cauchy(h, Cochain.zeros(cx, 0), spacetime2d)
    with pytest.raises(ConstraintViolationError):
        solve_F_cauchy(random_cochain(cx, 1, rng), Cochain.zeros(cx, 0), spacetime2d)


def test_csv_export(tmp_path, torus, rng):
    data = lorenz_data(torus, FLAT, 1, rng)
    path = data.to_csv(tmp_path / "slice.csv", slice_index=3)
    meta = json.loads((tmp_path / "slice.json").read_text())
    assert meta == {"d": 2, "N": 4, "L": [1.0, 1.0], "p": 1, "slice": 3}
    back = CauchyData.from_csv(path, complex=torus)
    for name, cochain in data.components().items():
        np.testing.assert_array_equal(back.components()[name].values, cochain.values)


def test_gauge_decision_does_not_depend_on_amplitude(spacetime2d, rng):
    A = leapfrog_evolve(lorenz_data(spacetime2d.complex, FLAT, 1, rng), None, spacetime2d)
    moved = gauge_transform(A, GaugeParameter(random_form(spacetime2d, 0, rng)))
    for factor in (1e-3, 1e3):
        assert maxwell_residual(factor * A) <= 1e-10
        assert is_gauge_equivalent(factor * A, factor * moved, spacetime2d.steps // 2)

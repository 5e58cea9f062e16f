import csv

import numpy as np
import pytest

from cauchy import CauchyData, cauchy_data_of
from errors import CFLViolationError, ConstraintViolationError, LatticeError, SupportError
from evolve import (
    CFL_LIMIT,
    Current,
    Spacetime,
    SpacetimeForm,
    box_residual,
    convention_ledger,
    convergence_order,
    exterior_derivative,
    export_snapshots,
    greens_identity_check,
    leapfrog_energy,
    leapfrog_evolve,
    lorenz_residual,
    representation_check,
    rho_sign,
    sample_continuum_mode,
    spacetime_codifferential,
    spacetime_pairing,
    trace,
    verify_conventions,
)
from factories import random_current, random_data, random_form
from forms import FLAT, codifferential, eigenmodes, norm
from lattice import Cochain, build_complex, random_cochain


def test_cfl_bound_is_enforced(ring):
    with pytest.raises(CFLViolationError):
        Spacetime.from_cfl(ring, cfl=CFL_LIMIT + 0.1)
    with pytest.raises(LatticeError):
        Spacetime.from_cfl(ring, steps=1)
    assert Spacetime.from_cfl(ring, cfl=0.5).cfl == pytest.approx(0.5)


@pytest.mark.parametrize("p", [0, 1])
def test_leapfrog_reproduces_cauchy_data(spacetime, rng, p):
    data = random_data(spacetime.complex, p, rng)
    got = cauchy_data_of(leapfrog_evolve(data, None, spacetime), 0)
    for name, want in data.components().items():
        assert norm(got.components()[name] - want) <= 1e-12 * max(1.0, data.scale(FLAT))


def test_traces_commute_with_d_and_delta(spacetime2d, rng):
    A = random_form(spacetime2d, 1, rng)
    for k in (0, 5, spacetime2d.steps):
        np.testing.assert_allclose(trace(exterior_derivative(A), k, "n").values, trace(A, k, "d").values, atol=1e-9)
        np.testing.assert_allclose(
            trace(spacetime_codifferential(A), k, "0").values, trace(A, k, "delta").values, atol=1e-9
        )


def test_pairing_makes_delta_the_adjoint_of_d(spacetime2d, rng):
    f = random_current(spacetime2d, 1, (3, spacetime2d.steps - 3), rng)
    B2 = random_form(spacetime2d, 2, rng)
    B0 = random_form(spacetime2d, 0, rng)
    lhs, rhs = spacetime_pairing(exterior_derivative(f), B2), spacetime_pairing(f, spacetime_codifferential(B2))
    assert lhs == pytest.approx(rhs, rel=1e-10)
    lhs, rhs = spacetime_pairing(spacetime_codifferential(f), B0), spacetime_pairing(f, exterior_derivative(B0))
    assert lhs == pytest.approx(rhs, rel=1e-10)


def test_spacetime_codifferential_squares_to_zero(spacetime2d, rng):
    f = random_current(spacetime2d, 2, (3, 20), rng)
    twice = spacetime_codifferential(spacetime_codifferential(f))
    assert twice.interior_norm() <= 1e-9 * spacetime_codifferential(f).interior_norm()


def test_free_evolution_solves_the_wave_equation(spacetime2d, rng):
    A = leapfrog_evolve(random_data(spacetime2d.complex, 1, rng), None, spacetime2d)
    assert box_residual(A) <= 1e-10


def test_energy_is_conserved_over_ten_thousand_steps(ring, rng):
    st = Spacetime.from_cfl(ring, cfl=0.9, steps=10_000)
    energy = leapfrog_energy(leapfrog_evolve(random_data(ring, 1, rng), None, st))
    assert energy.size == 10_001
    assert np.abs(energy - energy[0]).max() <= 1e-8 * abs(energy[0])


def test_greens_identity(spacetime, rng):
    K = spacetime.steps
    A = leapfrog_evolve(random_data(spacetime.complex, 1, rng), random_current(spacetime, 1, (3, K - 3), rng), spacetime)
    B = leapfrog_evolve(random_data(spacetime.complex, 1, rng), None, spacetime)
    assert greens_identity_check(A, B) <= 1e-10
    assert greens_identity_check(A, B, (4, K - 6)) <= 1e-10


@pytest.mark.parametrize("k0", [0, 8, 16, 32])
def test_representation_formula(spacetime, rng, k0):
    K = spacetime.steps
    J = random_current(spacetime, 1, (2, K - 2), rng)
    A = leapfrog_evolve(random_data(spacetime.complex, 1, rng), J, spacetime)
    f = random_current(spacetime, 1, (1, K - 1), rng)
    assert representation_check(A, J, f, k0) <= 1e-9


def test_lorenz_data_stay_in_lorenz_gauge(spacetime2d, rng):
    cx = spacetime2d.complex
    coexact = eigenmodes(cx, FLAT, 1, sector="coexact")
    Ad = coexact.synthesize(rng.standard_normal(len(coexact)))
    data = CauchyData(random_cochain(cx, 1, rng), Ad, Cochain(cx, 0, np.ones(16)), Cochain.zeros(cx, 0))
    A = leapfrog_evolve(data, None, spacetime2d)
    assert lorenz_residual(A).max() <= 1e-9 * data.scale(FLAT) * np.sqrt(spacetime2d.lambda_max)


def test_violated_gauge_condition_does_not_heal(spacetime, rng):
    cx = spacetime.complex
    data = CauchyData(random_cochain(cx, 1, rng), Cochain.zeros(cx, 1), Cochain.zeros(cx, 0), 0.1 * random_cochain(cx, 0, rng))
    residual = lorenz_residual(leapfrog_evolve(data, None, spacetime))
    assert residual[0] == pytest.approx(norm(data.Adelta), rel=1e-9)
    assert residual.max() >= 0.5 * norm(data.Adelta)


def test_box_consistency_is_second_order():
    residuals = []
    for N in (16, 32):
        st = Spacetime.from_cfl(build_complex(1, N, 1.0), cfl=0.5, steps=8)
        residuals.append(box_residual(sample_continuum_mode(st, (2 * np.pi,))))
    assert convergence_order(*residuals) == pytest.approx(2.0, abs=0.2)


def test_convention_ledger_is_self_consistent(spacetime2d):
    for value in verify_conventions(spacetime2d, 1).values():
        assert value <= 1e-8


def test_current_support_is_enforced(spacetime, rng):
    values = rng.standard_normal(8)
    with pytest.raises(SupportError):
        Current.from_slices(spacetime, 0, (4, 6), tangential={7: values})
    with pytest.raises(SupportError):
        Current.from_slices(spacetime, 0, (0, spacetime.steps + 1), tangential={3: values})
    with pytest.raises(ConstraintViolationError):
        Current.from_slices(spacetime, 1, (4, 6), tangential={5: values}, co_closed=True)


def test_mode_profile_current_is_coclosed(spacetime2d):
    e = eigenmodes(spacetime2d.complex, FLAT, 1, 1, sector="coexact").mode(0)
    assert norm(codifferential(e)) <= 1e-9
    J = Current.mode_profile(spacetime2d, e, np.sin(np.linspace(0, np.pi, 9)) ** 2, (4, 12))
    assert J.co_closed
    assert spacetime_codifferential(J).interior_norm() <= 1e-9 * J.interior_norm()


def test_snapshot_export(tmp_path, spacetime, rng):
    A = leapfrog_evolve(random_data(spacetime.complex, 1, rng), None, spacetime)
    path = export_snapshots(A, tmp_path / "out" / "A.csv")
    with path.open() as handle:
        rows = list(csv.reader(handle))
    assert rows[0] == ["slice", "part", "cell", "value"]
    assert len(rows) == 1 + (spacetime.steps + 3) * 8 + (spacetime.steps + 2) * 8


def test_rho_sign_prefactors():
    assert rho_sign("d", 4, 1) == -1
    assert rho_sign("d", 2, 0) == -1
    assert rho_sign("n", 4, 1) == -1
    assert rho_sign("d", 4, 0) == 1
    assert {rho_sign(kind, n, p) for kind in ("0", "delta") for n in (2, 3, 4) for p in range(n)} == {1}
    ledger = convention_ledger()["form_trace_prefactors"]
    assert ledger["d,n=4,p=1"] == -1 and ledger["n,n=2,p=1"] == rho_sign("n", 2, 1)
    with pytest.raises(LatticeError):
        rho_sign("d", 2, 2)


def _scalar_data(cx, A0, Ad):
    empty = Cochain.zeros(cx, -1)
    return CauchyData(A0, Ad, empty, empty)


def test_single_mode_follows_the_leapfrog_dispersion(ring):
    st = Spacetime.from_cfl(ring, cfl=0.7, steps=200)
    modes = eigenmodes(ring, FLAT, 0).nonharmonic()
    e, lam = modes.mode(0), modes.eigenvalues[0]
    A = leapfrog_evolve(_scalar_data(ring, e, Cochain.zeros(ring, 0)), None, st)
    theta = np.arccos(1.0 - lam * st.dt**2 / 2.0)
    expected = np.cos(theta * np.arange(st.steps + 1))[:, None] * e.values
    assert np.abs(A.a[1 : st.steps + 2] - expected).max() <= 1e-12


def test_harmonic_mode_grows_linearly(ring):
    st = Spacetime.from_cfl(ring, cfl=0.5, steps=100)
    modes = eigenmodes(ring, FLAT, 0)
    h = modes.mode(int(np.flatnonzero(modes.harmonic)[0]))
    c = 0.3
    A = leapfrog_evolve(_scalar_data(ring, Cochain.zeros(ring, 0), c * h), None, st)
    expected = (st.times * c)[:, None] * h.values
    assert np.abs(A.a[1 : st.steps + 2] - expected).max() <= 1e-12


def test_box_residual_of_noise_scales_like_eps_over_dt_squared(ring):
    e = eigenmodes(ring, FLAT, 0).nonharmonic().mode(0)
    noise = np.random.default_rng(7).standard_normal((35, 8))

    def residual(cfl, eps):
        st = Spacetime.from_cfl(ring, cfl=cfl, steps=32)
        A = leapfrog_evolve(_scalar_data(ring, e, Cochain.zeros(ring, 0)), None, st)
        return box_residual(SpacetimeForm(st, 0, A.a + eps * noise, A.b))

    base = residual(0.5, 1e-7)
    assert residual(0.5, 1e-6) / base == pytest.approx(10.0, rel=0.05)
    assert residual(0.25, 1e-7) / base == pytest.approx(4.0, rel=0.12)

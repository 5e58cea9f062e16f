from math import comb

import numpy as np
import pytest
from hypothesis import given, strategies as st

from errors import LatticeError, TopologicalObstructionError
from forms import (
    FLAT,
    SpatialMetric,
    codifferential,
    conformal_bump,
    eigenmodes,
    hodge_decompose,
    inner,
    lambda_max,
    laplacian,
    mode_table_rows,
    norm,
    solve_coderivative,
    solve_exterior,
)
from lattice import Cochain, build_complex, coboundary, random_cochain

BUMP = SpatialMetric((conformal_bump(0, 0.2, period=1.0),), "bump")


@pytest.mark.parametrize("metric", [FLAT, BUMP], ids=["flat", "bump"])
@given(seed=st.integers(0, 2**16))
def test_codifferential_is_adjoint_of_coboundary(metric, seed):
    cx = build_complex(2, 4, 1.0)
    rng = np.random.default_rng(seed)
    for p in range(2):
        u, v = random_cochain(cx, p, rng), random_cochain(cx, p + 1, rng)
        lhs = inner(coboundary(u), v, metric)
        rhs = inner(u, codifferential(v, metric), metric)
        assert lhs == pytest.approx(rhs, rel=1e-12, abs=1e-10)


def test_codifferential_squares_to_zero(rng):
    cx = build_complex(3, 3, 1.0)
    for p in (2, 3):
        v = random_cochain(cx, p, rng)
        once = codifferential(v)
        assert norm(codifferential(once)) <= 1e-10 * norm(once)


def test_laplacian_commutes_with_d_and_delta(torus, rng):
    for p in (0, 1):
        u = random_cochain(torus, p, rng)
        a, b = coboundary(laplacian(u, BUMP)), laplacian(coboundary(u), BUMP)
        assert norm(a - b, BUMP) <= 1e-10 * norm(a, BUMP)
    v = random_cochain(torus, 2, rng)
    a, b = codifferential(laplacian(v, BUMP), BUMP), laplacian(codifferential(v, BUMP), BUMP)
    assert norm(a - b, BUMP) <= 1e-10 * norm(a, BUMP)


def test_ring_spectrum_matches_closed_form(ring):
    modes = eigenmodes(ring, FLAT, 0, 3)
    h = 1.0 / 8
    expected = 4.0 / h**2 * np.sin(np.pi / 8) ** 2
    np.testing.assert_allclose(modes.eigenvalues, [0.0, expected, expected], atol=1e-9)
    assert modes.harmonic.tolist() == [True, False, False]


def test_modes_are_orthonormal(torus):
    modes = eigenmodes(torus, BUMP, 1)
    gram = np.array([[inner(modes.mode(i), modes.mode(j), BUMP) for j in range(6)] for i in range(6)])
    np.testing.assert_allclose(gram, np.eye(6), atol=1e-10)


@pytest.mark.parametrize("metric", [FLAT, BUMP], ids=["flat", "bump"])
def test_harmonic_forms_count_binomial(torus, metric):
    for p in range(3):
        assert int(eigenmodes(torus, metric, p).harmonic.sum()) == comb(2, p)


def test_coexact_modes_are_coclosed(torus):
    modes = eigenmodes(torus, FLAT, 1, sector="coexact")
    assert not modes.harmonic.any()
    for m in range(len(modes)):
        assert norm(codifferential(modes.mode(m))) <= 1e-9 * np.sqrt(lambda_max(torus))


def test_hodge_parts_are_orthogonal_and_complete(torus, rng):
    u = random_cochain(torus, 1, rng)
    parts = hodge_decompose(u, BUMP)
    size = norm(u, BUMP) ** 2
    assert abs(inner(parts.exact, parts.coexact, BUMP)) <= 1e-10 * size
    assert abs(inner(parts.exact, parts.harmonic, BUMP)) <= 1e-10 * size
    assert abs(inner(parts.coexact, parts.harmonic, BUMP)) <= 1e-10 * size
    rebuilt = parts.exact + parts.coexact + parts.harmonic
    assert norm(rebuilt - u, BUMP) <= 1e-10 * norm(u, BUMP)


def test_solve_coderivative(torus, rng):
    psi = codifferential(random_cochain(torus, 1, rng))
    omega = solve_coderivative(psi)
    assert omega.degree == 1
    assert norm(codifferential(omega) - psi) <= 1e-9 * norm(psi)


def test_solve_coderivative_rejects_constants(torus):
    with pytest.raises(TopologicalObstructionError):
        solve_coderivative(Cochain(torus, 0, np.ones(16)))


def test_solve_exterior(torus, rng):
    F0 = coboundary(random_cochain(torus, 0, rng))
    A0 = solve_exterior(F0, BUMP)
    assert norm(coboundary(A0) - F0, BUMP) <= 1e-9 * norm(F0, BUMP)


def test_solve_exterior_rejects_harmonic_data(torus):
    harmonic = eigenmodes(torus, FLAT, 1)
    h = harmonic.mode(int(np.flatnonzero(harmonic.harmonic)[0]))
    with pytest.raises(TopologicalObstructionError):
        solve_exterior(h)


def test_lambda_max_on_even_ring(ring):
    assert lambda_max(ring) == pytest.approx(256.0, rel=1e-10)


def test_bump_amplitude_must_stay_below_one():
    with pytest.raises(LatticeError):
        conformal_bump(0, amplitude=1.0)


def test_mode_table_rows(ring):
    rows = mode_table_rows(eigenmodes(ring, FLAT, 0, 2))
    assert rows[0] == {"degree": 0, "index": 0, "eigenvalue": 0.0, "omega": 0.0, "harmonic": True, "sector": "all"}
    assert rows[1]["omega"] == pytest.approx(np.sqrt(rows[1]["eigenvalue"]))


def test_circle_of_length_two_pi():
    circle = build_complex(1, 4, 2 * np.pi)
    one = Cochain(circle, 0, np.ones(4))
    assert inner(one, one) == pytest.approx(2 * np.pi, rel=1e-14)
    modes = eigenmodes(circle, FLAT, 0)
    assert modes.eigenvalues[0] == pytest.approx(0.0, abs=1e-12)
    assert modes.eigenvalues[1:3] == pytest.approx([8 / np.pi**2] * 2, rel=1e-12)
    assert modes.eigenvalues[3] == pytest.approx(16 / np.pi**2, rel=1e-12)

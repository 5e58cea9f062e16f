"""
Registry of verification checks, grouped into suites.

Every check gets its own generator seeded from (run seed, check name), so results do not
depend on which suites run or in what order.
"""
import logging
import time
import zlib
from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np

from cauchy import (
    CauchyData,
    cauchy_data_of,
    field_strength_residuals,
    fundamental_solution_check,
    gauge_transform,
    GaugeParameter,
    is_gauge_equivalent,
    make_coulomb,
    maxwell_residual,
    solve_F_cauchy,
    solve_maxwell_inhomogeneous,
    static_charge_current,
    violation_persistence,
)
from config import SUITES
from errors import CFLViolationError, LabError, TopologicalObstructionError
from evolve import (
    Current,
    Spacetime,
    SpacetimeForm,
    as_current,
    box_residual,
    convention_ledger,
    convergence_order,
    exterior_derivative,
    greens_identity_check,
    leapfrog_energy,
    leapfrog_evolve,
    lorenz_residual,
    representation_check,
    sample_continuum_mode,
    spacetime_codifferential,
    verify_conventions,
)
from forms import (
    FLAT,
    SpatialMetric,
    codifferential,
    conformal_bump,
    eigenmodes,
    hodge_decompose,
    inner,
    laplacian,
    norm,
)
from green import GreensOperator, box_inverse_check, commutation_check, spacelike_separated, transpose_check
from lattice import Cochain, build_complex, coboundary, random_cochain
from phase import (
    PhasePoint,
    bracket_antisymmetry,
    degenerate_form_demo,
    nondegeneracy_witness,
    pairing_vs_sigma,
    poisson_bracket,
    poisson_bracket_check,
    sigma,
    static_form,
    surface_independence_check,
)
from quantum import (
    MAX_OCCUPATION,
    FockSpace,
    ModeVector,
    build_structure,
    ccr_check,
    ccr_truncation_profile,
    commutator_check,
    field_operator,
    mu_saturation_check,
    select_modes,
    structure_residuals,
    weak_maxwell_check,
    weyl_relations,
)
from report import CheckRecord, inputs_digest

logger = logging.getLogger(__name__)


class Outcome(NamedTuple):
    residual: float
    details: dict = {}
    inputs: dict = {}
    applicable: bool = True


@dataclass(frozen=True)
class Check:
    suite: str
    name: str
    anchor: str
    tolerance: str
    func: Callable


REGISTRY = []


def check(suite, name, anchor, tolerance):
    if suite not in SUITES:
        raise ValueError(f"unknown suite {suite}")

    def register(func):
        REGISTRY.append(Check(suite, name, anchor, tolerance, func))
        return func

    return register


def checks_for(suites):
    return [c for s in suites for c in REGISTRY if c.suite == s]


class RunContext:
    """Lazily built lattices and spacetimes shared by the checks of one run."""

    def __init__(self, config):
        self.config = config
        self._complexes = {}
        self._spacetimes = {}
        lat = config.lattice
        if lat.metric == "bump":
            self.metric = SpatialMetric((conformal_bump(0, 0.2, period=lat.L),), "bump")
        else:
            self.metric = FLAT

    @property
    def d(self):
        return self.config.lattice.d

    @property
    def steps(self):
        return self.config.time.steps

    def rng(self, name):
        return np.random.default_rng([self.config.run.seed, zlib.crc32(name.encode("utf-8"))])

    def complex(self, d=None, N=None):
        key = (d or self.d, N or self.config.lattice.N)
        if key not in self._complexes:
            self._complexes[key] = build_complex(key[0], key[1], self.config.lattice.L)
        return self._complexes[key]

    def spacetime(self, d=None, N=None, steps=None, metric=None):
        metric = self.metric if metric is None else metric
        key = (d or self.d, N or self.config.lattice.N, steps or self.steps, id(metric))
        if key not in self._spacetimes:
            cx = self.complex(key[0], key[1])
            t = self.config.time
            if t.dt is not None:
                st = Spacetime(cx, metric, t.dt, key[2])
            else:
                st = Spacetime.from_cfl(cx, metric, t.cfl_fraction, key[2])
            self._spacetimes[key] = st
        return self._spacetimes[key]

    def degrees(self, low=0, high=None):
        high = self.d if high is None else high
        chosen = [p for p in self.config.run.degrees if low <= p <= high]
        return chosen or [min(max(low, 1), high)]

    def quantum_degree(self):
        below_top = [p for p in self.config.run.degrees if p < self.d]
        return below_top[0] if below_top else 0


def _rel(diff, *scales):
    scale = max(scales) if scales else 0.0
    return diff / scale if scale > 0 else diff


def coclosed_part(u, metric):
    if u.degree <= 0 or u.is_empty():
        return u
    parts = hodge_decompose(u, metric)
    return parts.coexact + parts.harmonic


def random_lorenz_data(cx, metric, p, rng):
    """Random A0 and co-closed A_d, A_n with A_delta = 0."""
    return CauchyData(
        random_cochain(cx, p, rng),
        coclosed_part(random_cochain(cx, p, rng), metric),
        coclosed_part(random_cochain(cx, p - 1, rng), metric),
        Cochain.zeros(cx, p - 1),
    )


def random_data(cx, p, rng):
    return CauchyData(*(random_cochain(cx, q, rng) for q in (p, p, p - 1, p - 1)))


def random_current(st, p, window, rng):
    k0, k1 = window
    cx = st.complex
    tangential = {k: rng.standard_normal(cx.cell_count(p)) for k in range(k0, k1 + 1)}
    normal = {k: rng.standard_normal(cx.cell_count(p - 1)) for k in range(k0, k1)}
    return Current.from_slices(st, p, window, tangential, normal)


def coclosed_current(st, p, window, rng):
    """delta Theta for a random compact Theta of degree p+1."""
    theta = random_current(st, p + 1, window, rng)
    return as_current(spacetime_codifferential(theta), co_closed=True)


def random_form(st, p, rng):
    cx = st.complex
    return SpacetimeForm(
        st,
        p,
        rng.standard_normal((st.steps + 3, cx.cell_count(p))),
        rng.standard_normal((st.steps + 2, cx.cell_count(p - 1))),
    )


def bump(k0, k1):
    """sin^2 profile vanishing at both window ends, as a function of the node index."""
    ks = np.arange(k0, k1 + 1)
    return np.sin(np.pi * (ks - k0) / (k1 - k0)) ** 2


def _inner_window(st, margin=3):
    return margin, st.steps - margin


# identities


@check("identities", "dd_zero", "d o d = 0 on the cubical complex", "identity")
def _dd_zero(ctx):
    cx, rng = ctx.complex(), ctx.rng("dd_zero")
    worst = 0.0
    for p in range(cx.d - 1):
        u = random_cochain(cx, p, rng)
        worst = max(worst, _rel(norm(coboundary(coboundary(u))), norm(coboundary(u)) + norm(u)))
    return Outcome(worst, inputs={"d": cx.d, "N": cx.N})


@check("identities", "adjointness", "delta is the metric adjoint of d", "identity")
def _adjointness(ctx):
    cx, m, rng = ctx.complex(), ctx.metric, ctx.rng("adjointness")
    worst = 0.0
    for p in range(cx.d):
        u, v = random_cochain(cx, p, rng), random_cochain(cx, p + 1, rng)
        du, dv = coboundary(u), codifferential(v, m)
        lhs, rhs = inner(du, v, m), inner(u, dv, m)
        worst = max(worst, _rel(abs(lhs - rhs), norm(du, m) * norm(v, m) + norm(u, m) * norm(dv, m)))
    return Outcome(worst, inputs={"d": cx.d, "N": cx.N, "metric": m.name})


@check("identities", "delta_delta_zero", "delta o delta = 0", "identity")
def _delta_delta(ctx):
    cx, m, rng = ctx.complex(), ctx.metric, ctx.rng("delta_delta_zero")
    worst = 0.0
    for p in range(2, cx.d + 1):
        v = random_cochain(cx, p, rng)
        once = codifferential(v, m)
        worst = max(worst, _rel(norm(codifferential(once, m), m), norm(once, m) + norm(v, m)))
    return Outcome(worst, inputs={"d": cx.d, "N": cx.N})


@check("identities", "laplacian_commutes", "the Hodge Laplacian commutes with d and delta", "identity")
def _laplacian_commutes(ctx):
    cx, m, rng = ctx.complex(), ctx.metric, ctx.rng("laplacian_commutes")
    worst = 0.0
    for p in range(cx.d + 1):
        u = random_cochain(cx, p, rng)
        if p < cx.d:
            a, b = coboundary(laplacian(u, m)), laplacian(coboundary(u), m)
            worst = max(worst, _rel(norm(a - b, m), norm(a, m) + norm(b, m)))
        if p > 0:
            a, b = codifferential(laplacian(u, m), m), laplacian(codifferential(u, m), m)
            worst = max(worst, _rel(norm(a - b, m), norm(a, m) + norm(b, m)))
    return Outcome(worst, inputs={"d": cx.d, "N": cx.N})


@check("identities", "hodge_decomposition", "exact + coexact + harmonic splitting", "exact_identity")
def _hodge(ctx):
    cx, m, rng = ctx.complex(), ctx.metric, ctx.rng("hodge_decomposition")
    worst, betti = 0.0, {}
    for p in range(cx.d + 1):
        u = random_cochain(cx, p, rng)
        parts = hodge_decompose(u, m)
        size = norm(u, m) ** 2
        cross = max(
            abs(inner(parts.exact, parts.coexact, m)),
            abs(inner(parts.exact, parts.harmonic, m)),
            abs(inner(parts.coexact, parts.harmonic, m)),
        )
        worst = max(worst, cross / size)
        betti[p] = int(eigenmodes(cx, m, p).harmonic.sum())
    return Outcome(worst, details={"harmonic_count": betti}, inputs={"d": cx.d, "N": cx.N})


@check("identities", "torus_cohomology", "harmonic p-forms on the torus number C(d, p)", "identity")
def _cohomology(ctx):
    from math import comb

    cx, m = ctx.complex(), ctx.metric
    counts = {p: int(eigenmodes(cx, m, p).harmonic.sum()) for p in range(cx.d + 1)}
    misses = sum(abs(counts[p] - comb(cx.d, p)) for p in counts)
    return Outcome(float(misses), details={"harmonic_count": counts}, inputs={"d": cx.d, "N": cx.N})


# evolution


@check("evolution", "leapfrog_reproduces_data", "Cauchy data are the traces of the solution", "exact_identity")
def _reproduce(ctx):
    st, rng = ctx.spacetime(), ctx.rng("leapfrog_reproduces_data")
    m, worst = st.metric, 0.0
    for p in ctx.degrees():
        data = random_data(st.complex, p, rng)
        got = cauchy_data_of(leapfrog_evolve(data, None, st), 0)
        for name, want in data.components().items():
            worst = max(worst, _rel(norm(got.components()[name] - want, m), data.scale(m)))
    return Outcome(worst, inputs={"degrees": ctx.degrees(), "steps": st.steps})


@check("evolution", "energy_conservation", "free leapfrog conserves the staggered energy", "energy_drift")
def _energy(ctx):
    st = ctx.spacetime(steps=10_000)
    rng = ctx.rng("energy_conservation")
    worst = 0.0
    for p in ctx.degrees():
        A = leapfrog_evolve(random_data(st.complex, p, rng), None, st)
        energy = leapfrog_energy(A)
        worst = max(worst, float(np.abs(energy - energy[0]).max() / abs(energy[0])))
    return Outcome(worst, inputs={"steps": st.steps, "cfl": st.cfl})


@check("evolution", "greens_identity", "generalized Green's identity with the trace bilinear", "exact_identity")
def _greens_identity(ctx):
    st, rng = ctx.spacetime(), ctx.rng("greens_identity")
    worst = 0.0
    window = _inner_window(st)
    for p in ctx.degrees():
        A = leapfrog_evolve(random_data(st.complex, p, rng), random_current(st, p, window, rng), st)
        B = leapfrog_evolve(random_data(st.complex, p, rng), random_current(st, p, window, rng), st)
        worst = max(worst, greens_identity_check(A, B), greens_identity_check(A, B, (2, st.steps - 5)))
    return Outcome(worst, inputs={"steps": st.steps})


@check("evolution", "representation_formula", "representation of <A, f> through E+-f and slice data", "exact_identity")
def _representation(ctx):
    st, rng = ctx.spacetime(), ctx.rng("representation_formula")
    worst = 0.0
    K = st.steps
    for p in ctx.degrees():
        J = random_current(st, p, (2, K - 2), rng)
        A = leapfrog_evolve(random_data(st.complex, p, rng), J, st)
        f = random_current(st, p, (1, K - 1), rng)
        for k0 in (K // 4, K // 2, 3 * K // 4):
            worst = max(worst, representation_check(A, J, f, k0))
    return Outcome(worst, inputs={"steps": K})


@check("evolution", "lorenz_propagation", "Lorenz data keep delta A = 0", "lorenz")
def _lorenz(ctx):
    st = ctx.spacetime(steps=256)
    rng, m = ctx.rng("lorenz_propagation"), st.metric
    worst = 0.0
    for p in ctx.degrees(low=1):
        data = random_lorenz_data(st.complex, m, p, rng)
        A = leapfrog_evolve(data, None, st)
        scale = data.scale(m) * np.sqrt(st.lambda_max)
        worst = max(worst, float(lorenz_residual(A).max()) / scale)
    return Outcome(worst, inputs={"steps": st.steps})


@check("evolution", "lorenz_violation_persists", "each violated data condition spoils delta A = 0", "identity")
def _violations(ctx):
    st = ctx.spacetime(steps=256)
    rng, m, cx = ctx.rng("lorenz_violation_persists"), st.metric, st.complex
    shortfall, seen = 0.0, {}
    for p in ctx.degrees(low=1):
        base = random_lorenz_data(cx, m, p, rng)
        eps = 0.1 * base.scale(m)
        cases = {}
        chi = random_cochain(cx, p - 1, rng)
        cases["A_delta"] = CauchyData(base.A0, base.Ad, base.An, eps / norm(chi, m) * chi)
        if p >= 2:
            grad = coboundary(random_cochain(cx, p - 2, rng))
            cases["delta_A_n"] = CauchyData(base.A0, base.Ad, base.An + eps / norm(grad, m) * grad, base.Adelta)
        phi = eigenmodes(cx, m, p - 1, 1, sector="coexact").mode(0)
        kick = coboundary(phi)
        cases["delta_A_d"] = CauchyData(base.A0, base.Ad + eps / norm(kick, m) * kick, base.An, base.Adelta)
        for name, data in cases.items():
            injected, kept = violation_persistence(data, st)
            seen[f"p{p}:{name}"] = {"injected": injected, "max_residual": kept}
            shortfall = max(shortfall, 0.5 - kept / injected)
    return Outcome(max(shortfall, 0.0), details=seen, inputs={"steps": st.steps})


@check("evolution", "box_convergence_order", "second order consistency of the wave operator", "convergence_order")
def _box_order(ctx):
    L = ctx.config.lattice.L
    res = []
    for N in (16, 32):
        st = Spacetime.from_cfl(ctx.complex(1, N), FLAT, 0.5, 8)
        res.append(box_residual(sample_continuum_mode(st, (2 * np.pi / L,))))
    order = convergence_order(*res)
    return Outcome(abs(order - 2.0), details={"residuals": res, "order": order}, inputs={"N": [16, 32]})


@check("evolution", "spectrum_convergence_order", "second order convergence of the Laplacian spectrum", "convergence_order")
def _spectrum_order(ctx):
    L = ctx.config.lattice.L
    exact = (2 * np.pi / L) ** 2
    errors = []
    for N in (16, 32):
        modes = eigenmodes(ctx.complex(1, N), FLAT, 0, 2)
        errors.append(abs(modes.eigenvalues[1] - exact))
    order = convergence_order(*errors)
    return Outcome(abs(order - 2.0), details={"errors": errors, "order": order}, inputs={"N": [16, 32]})


@check("evolution", "sign_conventions", "sign ledger pinned by duality, Green, Lorenz and representation", "exact_identity")
def _conventions(ctx):
    st = ctx.spacetime()
    results = {p: verify_conventions(st, p) for p in ctx.degrees(low=1)}
    worst = max(max(r.values()) for r in results.values())
    return Outcome(worst, details={"per_degree": results, "ledger": convention_ledger()}, inputs={"steps": st.steps})


@check("evolution", "cfl_rejection", "time steps above the stability bound are refused", "identity")
def _cfl(ctx):
    cx = ctx.complex()
    st = ctx.spacetime()
    try:
        Spacetime(cx, st.metric, 1.9 / np.sqrt(st.lambda_max), st.steps)
    except CFLViolationError:
        return Outcome(0.0)
    return Outcome(1.0)


# green


@check("green", "green_commutation", "E+- commute with d and delta", "green_commutation")
def _commutation(ctx):
    st, rng = ctx.spacetime(), ctx.rng("green_commutation")
    worst = 0.0
    for p in ctx.degrees():
        for _ in range(20):
            f = random_current(st, p, _inner_window(st), rng)
            worst = max(worst, commutation_check(f, "d"))
            if p > 0:
                worst = max(worst, commutation_check(f, "delta"))
    return Outcome(worst, inputs={"currents": 20, "steps": st.steps})


@check("green", "box_inverse", "E box theta = 0 and box E theta = 0 for compact theta", "exact_identity")
def _box_inverse(ctx):
    st, rng = ctx.spacetime(), ctx.rng("box_inverse")
    worst = 0.0
    for p in ctx.degrees():
        values = box_inverse_check(random_current(st, p, _inner_window(st), rng))
        worst = max(worst, *values.values())
    return Outcome(worst)


@check("green", "transpose_antisymmetry", "<Ef, g> = -<f, Eg>", "exact_identity")
def _transpose(ctx):
    st, rng = ctx.spacetime(), ctx.rng("transpose_antisymmetry")
    worst = 0.0
    for p in ctx.degrees():
        f = random_current(st, p, _inner_window(st), rng)
        g = random_current(st, p, (2, st.steps - 2), rng)
        worst = max(worst, transpose_check(f, g))
    return Outcome(worst)


@check("green", "fundamental_solution", "-delta d E+-J = J for co-closed J", "exact_identity")
def _fundamental(ctx):
    st, rng = ctx.spacetime(), ctx.rng("fundamental_solution")
    worst, details = 0.0, {}
    for p in ctx.degrees():
        J = coclosed_current(st, p, _inner_window(st), rng)
        for direction in ("retarded", "advanced"):
            outcome = fundamental_solution_check(J, direction)
            worst = max(worst, outcome.residual)
        loose = fundamental_solution_check(random_current(st, p, _inner_window(st), rng), "retarded")
        details[p] = {"non_coclosed_applicable": loose.applicable, "co_closure": loose.co_closure}
    return Outcome(worst, details=details)


# gauge


@check("gauge", "field_invariance", "F = dA is unchanged by A -> A + d Lambda", "field_invariance")
def _field_invariance(ctx):
    st, rng = ctx.spacetime(), ctx.rng("field_invariance")
    worst = 0.0
    for p in ctx.degrees(low=1):
        A = leapfrog_evolve(random_data(st.complex, p, rng), None, st)
        F = exterior_derivative(A)
        for _ in range(100):
            lam = GaugeParameter(random_form(st, p - 1, rng))
            moved = exterior_derivative(gauge_transform(A, lam))
            worst = max(worst, _rel((moved - F).interior_norm(), F.interior_norm(), exterior_derivative(lam.form).interior_norm()))
    return Outcome(worst, inputs={"samples": 100})


def _gauge_cases(st, p, rng):
    m, cx = st.metric, st.complex
    data = random_lorenz_data(cx, m, p, rng)
    A = leapfrog_evolve(data, None, st)
    coulomb, _ = make_coulomb(data, st)
    harmonic = eigenmodes(cx, m, p)
    h = harmonic.mode(int(np.flatnonzero(harmonic.harmonic)[0]))
    # top degree has no coexact modes; a harmonic kick keeps the data co-closed
    kick = eigenmodes(cx, m, p, 1, sector="coexact").mode(0) if p < cx.d else h
    moved = CauchyData(data.A0, data.Ad + data.scale(m) * kick, data.An, data.Adelta)
    return A, [
        ("random_gauge", gauge_transform(A, GaugeParameter(random_form(st, p - 1, rng))), True),
        ("coulomb_partner", leapfrog_evolve(coulomb, None, st), True),
        ("static_gradient", A + static_form(st, coboundary(random_cochain(cx, p - 1, rng))), True),
        ("momentum_shift", leapfrog_evolve(moved, None, st), False),
        ("rescaled", 2.0 * A, False),
        ("harmonic_shift", A + static_form(st, data.scale(m) * h), False),
    ]


@check("gauge", "gauge_equivalence_decisions", "gauge classes decided from slice data", "identity")
def _gauge_decisions(ctx):
    st, rng = ctx.spacetime(), ctx.rng("gauge_equivalence_decisions")
    wrong, decided = 0, {}
    for p in ctx.degrees(low=1):
        A, cases = _gauge_cases(st, p, rng)
        for name, B, expected in cases:
            got = is_gauge_equivalent(A, B, k=st.steps // 2)
            decided[f"p{p}:{name}"] = got
            wrong += int(got != expected)
    return Outcome(float(wrong), details=decided)


@check("gauge", "coulomb_gauge", "Lorenz solutions move to vanishing normal data by a gauge", "exact_identity")
def _coulomb(ctx):
    st, rng = ctx.spacetime(), ctx.rng("coulomb_gauge")
    worst = 0.0
    for p in ctx.degrees(low=1):
        data = random_lorenz_data(st.complex, st.metric, p, rng)
        coulomb, lam = make_coulomb(data, st)
        moved = gauge_transform(leapfrog_evolve(data, None, st), lam)
        target = leapfrog_evolve(coulomb, None, st)
        worst = max(worst, _rel((moved - target).interior_norm(), target.interior_norm()))
    return Outcome(worst)


@check("gauge", "inhomogeneous_lorenz", "momentum from delta omega = rho_n J keeps the Lorenz gauge", "lorenz")
def _inhomogeneous(ctx):
    st, rng = ctx.spacetime(), ctx.rng("inhomogeneous_lorenz")
    m, cx = st.metric, st.complex
    worst, details = 0.0, {}
    for p in ctx.degrees(low=1):
        psi = codifferential(random_cochain(cx, p, rng), m)
        J = static_charge_current(st, psi)
        A = solve_maxwell_inhomogeneous(random_cochain(cx, p, rng), J, st)
        scale = max(A.interior_norm(), J.interior_norm()) * np.sqrt(st.lambda_max)
        lorenz = float(lorenz_residual(A).max()) / scale
        field = maxwell_residual(A, J)
        details[p] = {"lorenz": lorenz, "maxwell": field}
        worst = max(worst, lorenz, field)
    return Outcome(worst, details=details)


@check("gauge", "retarded_solution", "future-supported sources give E+J up to gauge", "identity")
def _retarded(ctx):
    st, rng = ctx.spacetime(), ctx.rng("retarded_solution")
    wrong, details = 0, {}
    for p in ctx.degrees(low=1):
        J = coclosed_current(st, p, _inner_window(st), rng)
        A = solve_maxwell_inhomogeneous(Cochain.zeros(st.complex, p), J, st)
        X = GreensOperator("retarded", st)(J)
        same = is_gauge_equivalent(A, X, k=st.steps, source=J)
        details[p] = {"gauge_equivalent": same, "bitwise": bool(np.array_equal(A.a, X.a) and np.array_equal(A.b, X.b))}
        wrong += int(not same)
    return Outcome(float(wrong), details=details)


# phase


def _lorenz_pair(st, p, rng):
    m = st.metric
    A = leapfrog_evolve(random_lorenz_data(st.complex, m, p, rng), None, st)
    B = leapfrog_evolve(random_lorenz_data(st.complex, m, p, rng), None, st)
    return A, B


@check("phase", "sigma_antisymmetry", "sigma is antisymmetric and bilinear", "exact_identity")
def _sigma_algebra(ctx):
    st, rng = ctx.spacetime(), ctx.rng("sigma_antisymmetry")
    worst = 0.0
    k = st.steps // 2
    for p in ctx.degrees():
        A, B = _lorenz_pair(st, p, rng)
        C, _ = _lorenz_pair(st, p, rng)
        ab, ba = sigma(A, B, k), sigma(B, A, k)
        mixed = sigma(2.0 * A + 3.0 * C, B, k)
        scale = abs(ab) + abs(sigma(C, B, k)) + abs(mixed)
        worst = max(
            worst,
            _rel(abs(ab + ba), scale),
            _rel(abs(sigma(A, A, k)), scale),
            _rel(abs(mixed - 2.0 * ab - 3.0 * sigma(C, B, k)), scale),
        )
    return Outcome(worst)


@check("phase", "surface_independence", "sigma does not depend on the Cauchy slice", "symplectic")
def _surface(ctx):
    st = ctx.spacetime(steps=200)
    rng = ctx.rng("surface_independence")
    worst = 0.0
    for p in ctx.degrees():
        A, B = _lorenz_pair(st, p, rng)
        worst = max(worst, surface_independence_check(A, B, 0, st.steps))
    return Outcome(worst, inputs={"steps": st.steps})


@check("phase", "sigma_gauge_invariance", "sigma is invariant under A -> A + d Lambda", "symplectic")
def _sigma_gauge(ctx):
    st, rng = ctx.spacetime(), ctx.rng("sigma_gauge_invariance")
    worst = 0.0
    k = st.steps // 2
    for p in ctx.degrees(low=1):
        A, B = _lorenz_pair(st, p, rng)
        moved = gauge_transform(A, GaugeParameter(random_form(st, p - 1, rng)))
        base = sigma(A, B, k)
        worst = max(worst, _rel(abs(sigma(moved, B, k) - base), abs(base), A.interior_norm() * B.interior_norm()))
    return Outcome(worst)


@check("phase", "degeneracy_witness", "unquotiented sigma vanishes on exact configurations", "degeneracy")
def _degeneracy(ctx):
    st, rng = ctx.spacetime(), ctx.rng("degeneracy_witness")
    worst, details = 0.0, {}
    for p in ctx.degrees(low=1):
        _, B = _lorenz_pair(st, p, rng)
        point = PhasePoint.from_solution(B, 0)
        chi = random_cochain(st.complex, p - 1, rng)
        scale = norm(coboundary(chi), st.metric) * norm(point.momentum, st.metric)
        worst = max(worst, _rel(abs(degenerate_form_demo(chi, point)), scale))
        loose = random_cochain(st.complex, p, rng)
        details[p] = {"non_coclosed_momentum": degenerate_form_demo(chi, loose)}
    return Outcome(worst, details=details)


@check("phase", "nondegeneracy_witness", "every phase point has a partner with |sigma| >= 0.9 |u|^2", "identity")
def _nondegeneracy(ctx):
    st, rng = ctx.spacetime(), ctx.rng("nondegeneracy_witness")
    shortfall = 0.0
    for p in ctx.degrees():
        for _ in range(5):
            A, _ = _lorenz_pair(st, p, rng)
            _, ratio = nondegeneracy_witness(PhasePoint.from_solution(A, 0))
            shortfall = max(shortfall, 0.9 - ratio)
    return Outcome(max(shortfall, 0.0))


@check("phase", "pairing_vs_sigma", "<A, f> = sigma(A, Ef)", "exact_identity")
def _pairing_sigma(ctx):
    st, rng = ctx.spacetime(), ctx.rng("pairing_vs_sigma")
    worst = 0.0
    for p in ctx.degrees():
        A, _ = _lorenz_pair(st, p, rng)
        f = coclosed_current(st, p, _inner_window(st), rng)
        for k in (0, st.steps // 2, st.steps):
            worst = max(worst, pairing_vs_sigma(A, f, k))
    return Outcome(worst)


@check("phase", "poisson_bracket", "{f, g} = sigma(Ef, Eg) = <Ef, g>", "exact_identity")
def _bracket(ctx):
    st, rng = ctx.spacetime(), ctx.rng("poisson_bracket")
    worst, details = 0.0, {}
    for p in ctx.degrees():
        f = coclosed_current(st, p, _inner_window(st), rng)
        g = coclosed_current(st, p, (4, st.steps - 4), rng)
        value, mismatch = poisson_bracket_check(f, g)
        antisym = bracket_antisymmetry(f, g)
        details[p] = {"bracket": value}
        worst = max(worst, mismatch, antisym)
    return Outcome(worst, details=details)


def _point_current(st, node, cell):
    values = np.zeros(st.complex.cell_count(0))
    values[cell] = 1.0
    return Current.from_slices(st, 0, (node, node), tangential={node: values})


@check("phase", "poisson_bracket_spacelike", "the bracket vanishes for spacelike separated smearings", "spacelike")
def _bracket_spacelike(ctx):
    st = ctx.spacetime()
    cx = st.complex
    k = st.steps // 2
    far = np.zeros(cx.d, dtype=int)
    far[0] = cx.N // 2
    f = _point_current(st, k, 0)
    g = _point_current(st, k + 1, int(np.ravel_multi_index(far, cx.shape)))
    if not spacelike_separated(f, g):
        return Outcome(float("nan"), details={"reason": "supports are not spacelike separated"}, applicable=False)
    return Outcome(abs(poisson_bracket(f, g)), inputs={"N": cx.N})


# quantum


def _quantum_setup(ctx, n_max=None):
    st = ctx.spacetime()
    p = ctx.quantum_degree()
    available = len(eigenmodes(st.complex, st.metric, p, sector="coexact"))
    modes = select_modes(st.complex, st.metric, p, min(ctx.config.run.modes, available))
    structure = build_structure(modes)
    fock = FockSpace.for_structure(structure, n_max or ctx.config.run.n_max)
    return st, structure, fock


def mode_current(st, structure, weights, window):
    mode = structure.modes.synthesize(np.asarray(weights, dtype=float))
    return Current.mode_profile(st, mode, bump(*window), window)


@check("quantum", "complex_structure", "J^2 = -1, 2 mu(u, Jv) = sigma(u, v), (Ku, Kv) = mu - i sigma / 2", "quantum_structure")
def _structure(ctx):
    _, structure, _ = _quantum_setup(ctx)
    values = structure_residuals(structure, ctx.rng("complex_structure"), samples=1000)
    residual = max(values["J_squared"], values["compatibility"], values["k_identity"])
    if not values["positivity"] > 0:
        residual = float("inf")
    return Outcome(residual, details=values, inputs={"omega": structure.omega})


@check("quantum", "mu_saturation", "mu(u, u) = 1/4 sup sigma(u, v)^2 / mu(v, v)", "saturation")
def _saturation(ctx):
    _, structure, _ = _quantum_setup(ctx)
    rng = ctx.rng("mu_saturation")
    result = mu_saturation_check(ModeVector.random(rng, structure.count), structure, rng=rng)
    residual = float("inf") if result["scan_exceeds"] else result["residual"]
    return Outcome(residual, details=result)


@check("quantum", "ladder_commutator", "[a(f), a*(g)] = (f, g) below the occupation cutoff", "exact_identity")
def _ladder(ctx):
    _, structure, fock = _quantum_setup(ctx)
    rng = ctx.rng("ladder_commutator")
    f = rng.standard_normal(structure.count) + 1j * rng.standard_normal(structure.count)
    g = rng.standard_normal(structure.count) + 1j * rng.standard_normal(structure.count)
    result = commutator_check(structure, fock, f, g)
    scale = np.linalg.norm(f) * np.linalg.norm(g)
    residual = max(result["low_residual"], result["deficit_residual"]) / scale
    return Outcome(residual, details=result, inputs={"n_max": fock.n_max})


@check("quantum", "field_operator", "smeared field is hermitian, linear and odd", "quantum_structure")
def _field(ctx):
    st, structure, fock = _quantum_setup(ctx)
    J = mode_current(st, structure, np.eye(structure.count)[0], (2, st.steps // 2))
    A1 = field_operator(J, structure, fock)
    A2 = field_operator(2.0 * J, structure, fock)
    hermitian = np.linalg.norm(A1.matrix - A1.matrix.conj().T, 2)
    vacuum = abs(A1.expectation(fock.vacuum()))
    linear = np.linalg.norm(A2.matrix - 2.0 * A1.matrix, 2)
    residual = max(hermitian, vacuum, linear) / max(A1.norm(), 1e-300)
    return Outcome(residual, details={"norm": A1.norm()})


@check("quantum", "ccr_pairing", "[A(J), A(J')] = i <J, EJ'> on the low occupation subspace", "ccr")
def _ccr(ctx):
    st, structure, fock = _quantum_setup(ctx)
    K = st.steps
    weights = np.ones(structure.count) / np.sqrt(structure.count)
    J = mode_current(st, structure, np.eye(structure.count)[0], (2, K // 2))
    J2 = mode_current(st, structure, weights, (K // 4, 3 * K // 4))
    result = ccr_check(J, J2, structure, fock)
    self_commutator = ccr_check(J, J, structure, fock)["commutator"]
    return Outcome(max(result["residual"], self_commutator), details=result)


@check("quantum", "ccr_truncation_monotone", "commutator mismatch shrinks as the cutoff grows", "identity")
def _ccr_profile(ctx):
    st, structure, _ = _quantum_setup(ctx)
    K = st.steps
    J = mode_current(st, structure, np.eye(structure.count)[0], (2, K // 2))
    J2 = mode_current(st, structure, np.ones(structure.count), (K // 4, 3 * K // 4))
    rows, monotone = ccr_truncation_profile(J, J2, structure, (2, 4, MAX_OCCUPATION))
    return Outcome(0.0 if monotone else 1.0, details={"profile": rows})


@check("quantum", "ccr_spacelike", "field operators commute at spacelike separation", "spacelike")
def _ccr_spacelike(ctx):
    st = ctx.spacetime(d=1, N=4)
    modes = select_modes(st.complex, st.metric, 0, 3)
    structure = build_structure(modes)
    fock = FockSpace.for_structure(structure, 2)
    k = st.steps // 2
    J = Current.from_slices(st, 0, (k, k), tangential={k: np.array([1.0, -1.0, 0.0, 0.0])})
    J2 = Current.from_slices(st, 0, (k, k), tangential={k: np.array([0.0, 0.0, 1.0, -1.0])})
    if not spacelike_separated(J, J2):
        return Outcome(float("nan"), details={"reason": "supports are not spacelike separated"}, applicable=False)
    result = ccr_check(J, J2, structure, fock)
    return Outcome(max(result["commutator"], abs(result["pairing"])), details=result)


@check("quantum", "weyl_relations", "Weyl relations W(0) = 1, W(-u) = W(u)*, W(u)W(v) = e^{i sigma/2} W(u+v)", "weyl")
def _weyl(ctx):
    _, structure, _ = _quantum_setup(ctx)
    fock = FockSpace.for_structure(structure, MAX_OCCUPATION)
    w = structure.omega[0]
    q = np.zeros(structure.count)
    p = np.zeros(structure.count)
    q[0] = 0.05 * np.sqrt(2.0 / w)
    p[0] = 0.05 * np.sqrt(2.0 * w)
    u = ModeVector(q, np.zeros(structure.count))
    v = ModeVector(np.zeros(structure.count), p)
    values = weyl_relations(u, v, structure, fock)
    flipped = weyl_relations(u, v, structure, fock, phase_sign=-1.0)["product"]
    return Outcome(max(values.values()), details={**values, "opposite_phase": flipped})


@check("quantum", "weak_maxwell", "A(delta d theta) = 0 without co-closure of theta", "weak_maxwell")
def _weak(ctx):
    st, structure, fock = _quantum_setup(ctx)
    rng = ctx.rng("weak_maxwell")
    theta = random_current(st, structure.modes.degree, (2, st.steps - 2), rng)
    result = weak_maxwell_check(theta, structure, fock)
    return Outcome(max(result.values()), details=result)


# appendix


def _field_case(ctx, p, rng):
    st = ctx.spacetime(d=2)
    m, cx = st.metric, st.complex
    F0 = coboundary(random_cochain(cx, p - 1, rng))
    Fn = coclosed_part(random_cochain(cx, p - 1, rng), m)
    _, F = solve_F_cauchy(F0, Fn, st)
    return field_strength_residuals(F, F0, Fn)


@check("appendix", "field_strength_cauchy_p2", "field strength Cauchy problem, 2-forms on a 2-torus", "appendix")
def _field_p2(ctx):
    values = _field_case(ctx, 2, ctx.rng("field_strength_cauchy_p2"))
    return Outcome(max(values.values()), details=values)


@check("appendix", "field_strength_cauchy_p1", "field strength Cauchy problem, 1-forms on a 2-torus", "appendix")
def _field_p1(ctx):
    values = _field_case(ctx, 1, ctx.rng("field_strength_cauchy_p1"))
    return Outcome(max(values.values()), details=values)


@check("appendix", "non_exact_rejected", "a non-exact F0 has no potential", "identity")
def _non_exact(ctx):
    st = ctx.spacetime(d=2)
    harmonic = eigenmodes(st.complex, st.metric, 1)
    h = harmonic.mode(int(np.flatnonzero(harmonic.harmonic)[0]))
    try:
        solve_F_cauchy(h, Cochain.zeros(st.complex, 0), st)
    except TopologicalObstructionError:
        return Outcome(0.0)
    return Outcome(1.0)


def run_check(item, ctx):
    """Execute one check and wrap its outcome into a CheckRecord; returns (record, seconds)."""
    tolerance = getattr(ctx.config.tolerances, item.tolerance)
    started = time.perf_counter()
    try:
        outcome = item.func(ctx)
    except LabError as exc:
        logger.debug("check %s raised", item.name, exc_info=True)
        record = CheckRecord(
            suite=item.suite,
            name=item.name,
            anchor=item.anchor,
            inputs_digest=inputs_digest({"seed": ctx.config.run.seed}),
            tolerance=tolerance,
            status="error",
            message=f"{type(exc).__name__}: {exc}",
        )
        return record, time.perf_counter() - started
    elapsed = time.perf_counter() - started
    residual = float(outcome.residual)
    if not outcome.applicable:
        status = "n/a"
    else:
        status = "pass" if residual <= tolerance else "fail"
    record = CheckRecord(
        suite=item.suite,
        name=item.name,
        anchor=item.anchor,
        inputs_digest=inputs_digest({"seed": ctx.config.run.seed, **outcome.inputs}),
        residual=residual,
        tolerance=tolerance,
        status=status,
        details=outcome.details,
    )
    return record, elapsed


def run_suites(config, suites=None, progress=None):
    """Run the selected suites in registry order; ``progress`` gets each record and its wall time."""
    ctx = RunContext(config)
    records, timings = [], {}
    for item in checks_for(suites or config.run.selected_suites()):
        record, seconds = run_check(item, ctx)
        records.append(record)
        timings[f"{item.suite}.{item.name}"] = seconds
        if progress is not None:
            progress(record, seconds)
    return records, timings

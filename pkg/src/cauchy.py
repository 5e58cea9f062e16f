"""
Cauchy data on one slice and the constructive existence, uniqueness and gauge statements
for the generalized Maxwell equation -delta d A = J.

Lorenz data on slice 0 (ledger signs, all +1):  A_delta = 0,  delta A_n = 0,
delta A_d = rho_n J.  Under these conditions the leapfrog evolution keeps delta A = 0 to
rounding, because delta A is itself a leapfrog solution whose data vanish.
"""
import csv
import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import NamedTuple

import numpy as np

from errors import ConstraintViolationError, DegreeMismatchError, LatticeError
from evolve import (
    OMEGA_SIGN,
    SpacetimeForm,
    exterior_derivative,
    leapfrog_evolve,
    lorenz_residual,
    spacetime_codifferential,
    trace,
)
from forms import codifferential, hodge_decompose, lambda_max, norm, solve_coderivative, solve_exterior
from green import GreensOperator
from lattice import Cochain, build_complex, coboundary

logger = logging.getLogger(__name__)

LORENZ_TOL = 1e-8
MAXWELL_TOL = 1e-6
GAUGE_TOL = 1e-6
SCALE_FLOOR = 1e-12

COMPONENTS = ("A0", "Ad", "An", "Adelta")


@dataclass(frozen=True, eq=False)
class CauchyData:
    """(A_0, A_d, A_n, A_delta) on one slice; the last two are empty for p = 0."""

    A0: Cochain
    Ad: Cochain
    An: Cochain
    Adelta: Cochain

    def __post_init__(self):
        p = self.A0.degree
        if self.Ad.degree != p or self.An.degree != p - 1 or self.Adelta.degree != p - 1:
            raise DegreeMismatchError(
                f"Cauchy data degrees ({self.A0.degree}, {self.Ad.degree}, {self.An.degree}, "
                f"{self.Adelta.degree}) are not (p, p, p-1, p-1)"
            )
        cx = self.A0.complex
        if any(c.complex is not cx for c in (self.Ad, self.An, self.Adelta)):
            raise LatticeError("Cauchy data spread over different complexes")

    @property
    def degree(self):
        return self.A0.degree

    @property
    def complex(self):
        return self.A0.complex

    @classmethod
    def zeros(cls, complex, p):
        return cls(
            Cochain.zeros(complex, p),
            Cochain.zeros(complex, p),
            Cochain.zeros(complex, p - 1),
            Cochain.zeros(complex, p - 1),
        )

    def components(self):
        return dict(zip(COMPONENTS, (self.A0, self.Ad, self.An, self.Adelta)))

    def scale(self, metric):
        return max(max(norm(c, metric) for c in self.components().values()), SCALE_FLOOR)

    def to_csv(self, path, slice_index=0):
        """Write (component, degree, cell, value) rows plus a JSON sidecar describing the slice."""
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", newline="") as handle:
            writer = csv.writer(handle)
            writer.writerow(["component", "degree", "cell", "value"])
            for name, cochain in self.components().items():
                for cell, value in enumerate(cochain.values):
                    writer.writerow([name, cochain.degree, cell, repr(float(value))])
        cx = self.complex
        sidecar = {"d": cx.d, "N": cx.N, "L": list(cx.L), "p": self.degree, "slice": slice_index}
        path.with_suffix(".json").write_text(json.dumps(sidecar, indent=2, sort_keys=True) + "\n")
        logger.debug("exported Cauchy data to %s", path)
        return path

    @classmethod
    def from_csv(cls, path, complex=None):
        path = Path(path)
        meta = json.loads(path.with_suffix(".json").read_text())
        cx = complex if complex is not None else build_complex(meta["d"], meta["N"], meta["L"])
        p = int(meta["p"])
        values = {name: np.zeros(cx.cell_count(p if name in ("A0", "Ad") else p - 1)) for name in COMPONENTS}
        with path.open(newline="") as handle:
            for row in csv.DictReader(handle):
                values[row["component"]][int(row["cell"])] = float(row["value"])
        degrees = {"A0": p, "Ad": p, "An": p - 1, "Adelta": p - 1}
        return cls(*(Cochain(cx, degrees[name], values[name]) for name in COMPONENTS))


def cauchy_data_of(A, k):
    """The four traces of A on slice k."""
    return CauchyData(trace(A, k, "0"), trace(A, k, "d"), trace(A, k, "n"), trace(A, k, "delta"))


@dataclass(frozen=True)
class GaugeParameter:
    """Lambda of degree p-1; A -> A + d Lambda."""

    form: SpacetimeForm

    @property
    def degree(self):
        return self.form.degree


class LorenzVerdict(NamedTuple):
    ok: bool
    residuals: dict


def _delta(u, metric):
    if u.degree < 1:
        return Cochain.zeros(u.complex, u.degree - 1)
    return codifferential(u, metric)


def is_lorenz_data(data, metric, source=None):
    """Check A_delta = 0, delta A_n = 0 and delta A_d = rho_n J on slice 0."""
    target = trace(source, 0, "n") if source is not None else Cochain.zeros(data.complex, data.degree - 1)
    residuals = {
        "A_delta": norm(data.Adelta, metric),
        "delta_A_n": norm(_delta(data.An, metric), metric),
        "delta_A_d": norm(_delta(data.Ad, metric) - OMEGA_SIGN * target, metric),
    }
    scale = max(data.scale(metric), norm(target, metric))
    return LorenzVerdict(all(r <= LORENZ_TOL * scale for r in residuals.values()), residuals)


def lorenz_equivalence_check(data, spacetime, source=None):
    """Evolve the data and return the largest Lorenz residual over slices 0..K."""
    A = leapfrog_evolve(data, source, spacetime)
    return float(lorenz_residual(A).max(initial=0.0))


def maxwell_residual(A, source=None):
    """Largest interior slice norm of -delta d A - J, relative to |dA| times the size of the
    spacetime codifferential plus |J|. Homogeneous in (A, J)."""
    st = A.spacetime
    F = exterior_derivative(A)
    lhs = -spacetime_codifferential(F)
    if source is None:
        source = SpacetimeForm.zeros(st, A.degree)
    scale = np.sqrt(st.lambda_max + 4.0 / st.dt ** 2) * F.interior_norm() + source.interior_norm()
    size = (lhs - source).interior_norm()
    return size / scale if scale > SCALE_FLOOR else size


def _require_coclosed(u, metric, what):
    size = norm(_delta(u, metric), metric)
    if size > LORENZ_TOL * max(norm(u, metric), SCALE_FLOOR) * max(1.0, np.sqrt(_lambda(u, metric))):
        raise ConstraintViolationError(f"{what} is not co-closed: |delta {what}| = {size:.3e}")


def _lambda(u, metric):
    return lambda_max(u.complex, metric)


def solve_maxwell_homogeneous(A0, Ad, spacetime, An=None):
    """Evolve (A0, Ad, An, 0); An defaults to zero and must be co-closed when given."""
    metric = spacetime.metric
    _require_coclosed(Ad, metric, "A_d")
    if An is None:
        An = Cochain.zeros(A0.complex, A0.degree - 1)
    else:
        _require_coclosed(An, metric, "A_n")
    data = CauchyData(A0, Ad, An, Cochain.zeros(A0.complex, A0.degree - 1))
    return leapfrog_evolve(data, None, spacetime)


def solve_maxwell_inhomogeneous(A0, J, spacetime):
    """Lorenz solution of -delta d A = J with A_d = omega solving delta omega = rho_n J."""
    metric = spacetime.metric
    if J.degree > 0:
        size = J.interior_norm()
        leak = spacetime_codifferential(J).interior_norm()
        if leak > LORENZ_TOL * max(size, SCALE_FLOOR):
            raise ConstraintViolationError(f"current is not co-closed: |delta J| = {leak:.3e}")
    psi = trace(J, 0, "n")
    omega = solve_coderivative(OMEGA_SIGN * psi if not psi.is_empty() else psi, metric)
    zero_n = Cochain.zeros(A0.complex, A0.degree - 1)
    logger.debug("inhomogeneous solve: |omega| = %.3e", norm(omega, metric))
    return leapfrog_evolve(CauchyData(A0, omega, zero_n, zero_n), J, spacetime)


def gauge_transform(A, gauge):
    if gauge.degree != A.degree - 1:
        raise DegreeMismatchError(f"gauge parameter of degree {gauge.degree} for a degree {A.degree} form")
    return A + exterior_derivative(gauge.form)


def gauge_difference(A, B, k):
    """Residuals deciding gauge equivalence on slice k: momentum difference and the
    non-exact part of the configuration difference, both relative."""
    metric = A.spacetime.metric
    d0 = trace(A, k, "0") - trace(B, k, "0")
    dd = trace(A, k, "d") - trace(B, k, "d")
    parts = hodge_decompose(d0, metric)
    scale = max(
        norm(trace(A, k, "0"), metric),
        norm(trace(B, k, "0"), metric),
        norm(trace(A, k, "d"), metric),
        norm(trace(B, k, "d"), metric),
        SCALE_FLOOR,
    )
    return {
        "momentum": norm(dd, metric) / scale,
        "configuration_class": norm(parts.coexact + parts.harmonic, metric) / scale,
    }


def is_gauge_equivalent(A, B, k=0, source=None):
    for name, form in (("first", A), ("second", B)):
        residual = maxwell_residual(form, source)
        if residual > MAXWELL_TOL:
            raise ConstraintViolationError(f"{name} argument is not a Maxwell solution (residual {residual:.3e})")
    return all(r <= GAUGE_TOL for r in gauge_difference(A, B, k).values())


def make_coulomb(data, spacetime):
    """Coulomb data (A0, Ad, 0, 0) and the Lambda whose d links the two evolutions.

    Lambda solves box Lambda = 0 with rho_0 = 0, rho_d = -A_n, rho_n = rho_delta = 0.
    """
    metric = spacetime.metric
    verdict = is_lorenz_data(data, metric)
    if not verdict.ok:
        raise ConstraintViolationError(f"Coulomb construction needs Lorenz data, residuals {verdict.residuals}")
    cx, p = data.complex, data.degree
    coulomb = CauchyData(data.A0, data.Ad, Cochain.zeros(cx, p - 1), Cochain.zeros(cx, p - 1))
    if p == 0:
        return coulomb, GaugeParameter(SpacetimeForm.zeros(spacetime, -1))
    lam_data = CauchyData(
        Cochain.zeros(cx, p - 1), -data.An, Cochain.zeros(cx, p - 2), Cochain.zeros(cx, p - 2)
    )
    return coulomb, GaugeParameter(leapfrog_evolve(lam_data, None, spacetime))


class FundamentalCheck(NamedTuple):
    residual: float
    co_closure: float
    applicable: bool


def fundamental_solution_check(J, direction):
    """-delta d E+-J against J; marked not applicable when J is not co-closed."""
    G = GreensOperator(direction, J.spacetime)
    size = J.interior_norm()
    co_closure = spacetime_codifferential(J).interior_norm() / size if size > 0 else 0.0
    if size == 0.0:
        return FundamentalCheck(0.0, 0.0, True)
    X = G(J)
    residual = (-spacetime_codifferential(exterior_derivative(X)) - J).interior_norm() / size
    applicable = co_closure <= LORENZ_TOL
    if not applicable:
        logger.warning("fundamental solution check N/A: |delta J|/|J| = %.3e", co_closure)
    return FundamentalCheck(residual, co_closure, applicable)


def solve_F_cauchy(F0, Fn, spacetime):
    """Potential A (degree p-1) and F = dA from field-strength data (F0 closed, Fn co-closed)."""
    metric = spacetime.metric
    if Fn.degree != F0.degree - 1:
        raise DegreeMismatchError(f"F_n must have degree {F0.degree - 1}, got {Fn.degree}")
    if F0.degree < F0.complex.d:
        closure = norm(coboundary(F0), metric)
        if closure > LORENZ_TOL * max(norm(F0, metric), SCALE_FLOOR) * np.sqrt(_lambda(F0, metric)):
            raise ConstraintViolationError(f"F_0 is not closed: |d F_0| = {closure:.3e}")
    _require_coclosed(Fn, metric, "F_n")
    A0 = solve_exterior(F0, metric)
    p = A0.degree
    data = CauchyData(A0, Fn, Cochain.zeros(F0.complex, p - 1), Cochain.zeros(F0.complex, p - 1))
    A = leapfrog_evolve(data, None, spacetime)
    return A, exterior_derivative(A)


def field_strength_residuals(F, F0, Fn, k=0):
    """dF, delta F, the two reproduced traces and the two vanishing traces, all relative."""
    metric = F.spacetime.metric
    scale = max(F.interior_norm(), norm(F0, metric), norm(Fn, metric), SCALE_FLOOR)
    return {
        "dF": exterior_derivative(F).interior_norm() / scale,
        "deltaF": spacetime_codifferential(F).interior_norm() / scale,
        "rho0": norm(trace(F, k, "0") - F0, metric) / scale,
        "rhon": norm(trace(F, k, "n") - Fn, metric) / scale,
        "rhod": norm(trace(F, k, "d"), metric) / scale,
        "rhodelta": norm(trace(F, k, "delta"), metric) / scale,
    }


def violation_persistence(data, spacetime):
    """Injected violation on slice 0 and the largest Lorenz residual of the evolution.

    A momentum violation only shows up after the first steps; it is measured in field units,
    |delta A_d| / sqrt(lambda_max), which the oscillation of delta A reaches or exceeds.
    """
    metric = spacetime.metric
    injected = max(
        norm(data.Adelta, metric),
        norm(_delta(data.An, metric), metric),
        norm(_delta(data.Ad, metric), metric) / np.sqrt(spacetime.lambda_max),
    )
    return injected, lorenz_equivalence_check(data, spacetime)


def static_charge_current(spacetime, psi):
    """Current with no tangential part and normal part psi on every edge, ghosts included.

    Co-closed on the physical window; its normal trace on slice 0 is psi, so the momentum
    datum of the Lorenz solution has to solve delta omega = psi.
    """
    st = spacetime
    form = SpacetimeForm.zeros(st, psi.degree + 1)
    b = np.tile(psi.values, (st.steps + 2, 1))
    return SpacetimeForm(st, form.degree, form.a, b)

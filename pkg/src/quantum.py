"""
Quantization on a finite set of coexact modes: the inner product mu, the complex structure J,
the projector K onto the one-particle space, the truncated symmetric Fock space, smeared field
operators and the Weyl system.

Mode coordinates of a phase point are q_m = <e_m, [A_0]> and p_m = <e_m, A_d>. In them
sigma(u, v) = sum(q p' - q' p), mu(u, v) = 1/2 sum(omega q q' + p p' / omega),
J(q, p) = (p / omega, -omega q) and K u = (omega^1/2 q - i omega^-1/2 p) / sqrt(2).
"""
import itertools
import logging
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
import scipy.linalg

from errors import AmplitudeGuardError, LatticeError, ModeLeakageError, ZeroModeError
from evolve import box, exterior_derivative, spacetime_codifferential, spacetime_pairing, trace
from forms import eigenmodes, hodge_decompose, norm
from green import causal_propagator
from phase import PhasePoint, require_coclosed

logger = logging.getLogger(__name__)

MAX_FOCK_MODES = 3
MAX_OCCUPATION = 6
LEAKAGE_TOL = 1e-6
AMPLITUDE_LIMIT = 0.2
TAIL_TOL = 1e-8
HERMITIAN_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class ModeVector:
    """Phase point in mode coordinates."""

    q: np.ndarray
    p: np.ndarray

    def __post_init__(self):
        q = np.atleast_1d(np.asarray(self.q, dtype=float))
        p = np.atleast_1d(np.asarray(self.p, dtype=float))
        if q.shape != p.shape or q.ndim != 1:
            raise LatticeError(f"q and p must be matching vectors, got {q.shape} and {p.shape}")
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "p", p)

    @classmethod
    def zeros(cls, count):
        return cls(np.zeros(count), np.zeros(count))

    @classmethod
    def random(cls, rng, count, scale=1.0):
        return cls(scale * rng.standard_normal(count), scale * rng.standard_normal(count))

    def __len__(self):
        return self.q.size

    def __add__(self, other):
        if not isinstance(other, ModeVector):
            return NotImplemented
        return ModeVector(self.q + other.q, self.p + other.p)

    def __sub__(self, other):
        if not isinstance(other, ModeVector):
            return NotImplemented
        return ModeVector(self.q - other.q, self.p - other.p)

    def __mul__(self, scalar):
        if not np.isscalar(scalar):
            return NotImplemented
        return ModeVector(scalar * self.q, scalar * self.p)

    __rmul__ = __mul__

    def __neg__(self):
        return ModeVector(-self.q, -self.p)

    def is_zero(self):
        return not (np.any(self.q) or np.any(self.p))


def select_modes(complex, metric, p, count):
    """Lowest ``count`` coexact p-modes; these are never harmonic."""
    modes = eigenmodes(complex, metric, p, count, sector="coexact")
    logger.info("selected %d coexact modes at degree %d, omega = %s", len(modes), p, np.round(modes.omega, 6))
    return modes


@dataclass(frozen=True, eq=False)
class QuantStructure:
    """mu, J and K on the span of a set of nonharmonic modes."""

    modes: object

    def __post_init__(self):
        harmonic = np.flatnonzero(self.modes.harmonic | (self.modes.eigenvalues <= 0.0))
        if harmonic.size:
            raise ZeroModeError(
                f"modes {harmonic.tolist()} are harmonic (eigenvalues "
                f"{self.modes.eigenvalues[harmonic].tolist()}); zero modes are not oscillators"
            )

    @property
    def omega(self):
        return self.modes.omega

    @property
    def count(self):
        return len(self.modes)

    @property
    def metric(self):
        return self.modes.metric

    def mu(self, u, v):
        w = self.omega
        return float(0.5 * np.sum(w * u.q * v.q + u.p * v.p / w))

    def sigma(self, u, v):
        return float(np.sum(u.q * v.p - v.q * u.p))

    def J(self, u):
        return ModeVector(u.p / self.omega, -self.omega * u.q)

    def K(self, u):
        w = self.omega
        return (np.sqrt(w) * u.q - 1j * u.p / np.sqrt(w)) / np.sqrt(2.0)

    def k_inner(self, u, v):
        """(Ku, Kv), antilinear in the first slot."""
        return complex(np.vdot(self.K(u), self.K(v)))

    def mode_vector(self, point):
        return ModeVector(self.modes.coordinates(point.configuration), self.modes.coordinates(point.momentum))

    def phase_point(self, u):
        return PhasePoint(self.modes.synthesize(u.q), self.modes.synthesize(u.p), self.metric)


def build_structure(modes):
    structure = QuantStructure(modes)
    logger.debug("quantization structure on %d modes", structure.count)
    return structure


def k_projector(u, structure):
    return structure.K(_as_mode_vector(u, structure))


def _as_mode_vector(u, structure):
    return structure.mode_vector(u) if isinstance(u, PhasePoint) else u


def mu_saturation_check(u, structure, rng=None, samples=10_000):
    """mu(u,u) against 1/4 sup_v sigma(u,v)^2 / mu(v,v).

    The supremum is attained at v = J u (Cauchy-Schwarz for mu, J being mu-orthogonal); the
    random scan must never exceed it.
    """
    u = _as_mode_vector(u, structure)
    if u.is_zero():
        raise LatticeError("saturation needs a nonzero phase point")
    rng = np.random.default_rng(0) if rng is None else rng
    size = structure.mu(u, u)
    best = structure.J(u)
    optimum = 0.25 * structure.sigma(u, best) ** 2 / structure.mu(best, best)

    w = structure.omega
    q = rng.standard_normal((samples, structure.count))
    p = rng.standard_normal((samples, structure.count))
    sig = (u.q * p - q * u.p).sum(axis=1)
    mus = 0.5 * (w * q * q + p * p / w).sum(axis=1)
    scan = float(np.max(0.25 * sig ** 2 / mus))
    return {
        "residual": abs(size - optimum) / size,
        "mu": size,
        "supremum": optimum,
        "scan_max": scan,
        "scan_exceeds": bool(scan > optimum * (1.0 + 1e-12)),
    }


@dataclass(frozen=True, eq=False)
class FockSpace:
    """Symmetric Fock space over ``mode_count`` oscillators, each cut at occupation n_max.

    Basis states are occupation tuples in itertools.product order (first mode slowest).
    """

    mode_count: int
    n_max: int
    basis: list = field(init=False, repr=False)

    def __post_init__(self):
        if not 1 <= self.mode_count <= MAX_FOCK_MODES:
            raise LatticeError(f"Fock space supports 1..{MAX_FOCK_MODES} modes, got {self.mode_count}")
        if not 1 <= self.n_max <= MAX_OCCUPATION:
            raise LatticeError(f"occupation cutoff must be in 1..{MAX_OCCUPATION}, got {self.n_max}")
        object.__setattr__(
            self, "basis", list(itertools.product(range(self.n_max + 1), repeat=self.mode_count))
        )

    @classmethod
    def for_structure(cls, structure, n_max):
        return cls(structure.count, n_max)

    @property
    def dimension(self):
        return (self.n_max + 1) ** self.mode_count

    @cached_property
    def annihilators(self):
        single = np.diag(np.sqrt(np.arange(1, self.n_max + 1)), 1)
        eye = np.eye(self.n_max + 1)
        ops = []
        for m in range(self.mode_count):
            factors = [single if j == m else eye for j in range(self.mode_count)]
            op = factors[0]
            for factor in factors[1:]:
                op = np.kron(op, factor)
            ops.append(op.astype(complex))
        return ops

    @cached_property
    def occupations(self):
        return np.array(self.basis, dtype=int).reshape(self.dimension, self.mode_count)

    @cached_property
    def low_mask(self):
        """States with every occupation below n_max."""
        return np.all(self.occupations < self.n_max, axis=1)

    def vacuum(self):
        state = np.zeros(self.dimension, dtype=complex)
        state[0] = 1.0
        return state

    def identity(self):
        return np.eye(self.dimension, dtype=complex)

    def annihilation(self, f):
        """a(f) = sum conj(f_m) a_m, antilinear in f."""
        return sum(np.conj(f_m) * a for f_m, a in zip(np.asarray(f), self.annihilators))

    def creation(self, f):
        """a^dagger(f) = sum f_m a_m^dagger."""
        return sum(f_m * a.T for f_m, a in zip(np.asarray(f), self.annihilators))

    def coherent_state(self, alpha):
        """Product of truncated coherent states, renormalized."""
        n = np.arange(self.n_max + 1)
        log_fact = np.cumsum(np.log(np.maximum(n, 1)))
        state = np.ones(1, dtype=complex)
        for a_m in np.atleast_1d(alpha):
            amplitudes = np.exp(-log_fact / 2) * np.power(complex(a_m), n)
            state = np.kron(state, amplitudes)
        return state / np.linalg.norm(state)

    def restrict(self, matrix):
        mask = self.low_mask
        return matrix[np.ix_(mask, mask)]


@dataclass(frozen=True, eq=False)
class FockOperator:
    matrix: np.ndarray
    hermitian: bool = False

    def __post_init__(self):
        matrix = np.asarray(self.matrix, dtype=complex)
        object.__setattr__(self, "matrix", matrix)
        if self.hermitian:
            gap = np.linalg.norm(matrix - matrix.conj().T, 2)
            if gap > HERMITIAN_TOL * max(1.0, np.linalg.norm(matrix, 2)):
                raise LatticeError(f"operator flagged hermitian but |Op - Op^dagger| = {gap:.3e}")

    def dagger(self):
        return FockOperator(self.matrix.conj().T, self.hermitian)

    def __matmul__(self, other):
        if isinstance(other, FockOperator):
            return FockOperator(self.matrix @ other.matrix)
        return self.matrix @ other

    def __add__(self, other):
        if not isinstance(other, FockOperator):
            return NotImplemented
        return FockOperator(self.matrix + other.matrix, self.hermitian and other.hermitian)

    def __sub__(self, other):
        if not isinstance(other, FockOperator):
            return NotImplemented
        return FockOperator(self.matrix - other.matrix, self.hermitian and other.hermitian)

    def __mul__(self, scalar):
        if not np.isscalar(scalar):
            return NotImplemented
        return FockOperator(scalar * self.matrix, self.hermitian and np.isreal(scalar))

    __rmul__ = __mul__

    def commutator(self, other):
        return FockOperator(self.matrix @ other.matrix - other.matrix @ self.matrix)

    def norm(self):
        return float(np.linalg.norm(self.matrix, 2)) if self.matrix.size else 0.0

    def expectation(self, state):
        return complex(np.vdot(state, self.matrix @ state))


def _raw_mode_vector(F, structure, k):
    """Mode coordinates of a homogeneous solution on slice k, taken straight from its traces."""
    modes = structure.modes
    return ModeVector(modes.coordinates(trace(F, k, "0")), modes.coordinates(trace(F, k, "d")))


def solution_class(Jc, structure, k=None, guard=True):
    """[E Jc] in mode coordinates together with the relative weight outside the modes."""
    st = Jc.spacetime
    k = st.steps // 2 if k is None else k
    EJ = causal_propagator(Jc)
    u = _raw_mode_vector(EJ, structure, k)
    if not guard:
        return u, 0.0
    metric = structure.metric
    config = trace(EJ, k, "0")
    parts = hodge_decompose(config, metric)
    config = parts.coexact + parts.harmonic
    momentum = trace(EJ, k, "d")
    total = np.hypot(norm(config, metric), norm(momentum, metric))
    if total == 0.0:
        return u, 0.0
    rest_c = config - structure.modes.synthesize(u.q)
    rest_p = momentum - structure.modes.synthesize(u.p)
    leakage = float(np.hypot(norm(rest_c, metric), norm(rest_p, metric)) / total)
    if leakage > LEAKAGE_TOL:
        raise ModeLeakageError(_leakage_message(rest_c, rest_p, structure, leakage))
    return u, leakage


def _leakage_message(rest_c, rest_p, structure, leakage):
    full = eigenmodes(rest_c.complex, structure.metric, rest_c.degree)
    weight = full.coordinates(rest_c) ** 2 + full.coordinates(rest_p) ** 2
    hit = np.flatnonzero(weight > (LEAKAGE_TOL * np.sqrt(weight.sum())) ** 2)
    eigenvalues = sorted({round(float(full.eigenvalues[i]), 8) for i in hit})
    return (
        f"solution leaks {leakage:.3e} of its norm out of the {structure.count} selected modes; "
        f"truncated modes at eigenvalues {eigenvalues}"
    )


def _field_matrix(c, fock):
    return 1j * fock.annihilation(c) - 1j * fock.creation(c)


def field_operator(Jc, structure, fock, k=None):
    """A(Jc) = i a(K[E Jc]) - i a^dagger(K[E Jc]) with a antilinear; hermitian."""
    require_coclosed(Jc, "smearing current")
    _check_fock(structure, fock)
    u, leakage = solution_class(Jc, structure, k)
    logger.debug("field operator: mode leakage %.3e", leakage)
    return FockOperator(_field_matrix(structure.K(u), fock), hermitian=True)


def _check_fock(structure, fock):
    if fock.mode_count != structure.count:
        raise LatticeError(f"Fock space has {fock.mode_count} modes, structure has {structure.count}")


def weak_maxwell_check(theta, structure, fock, k=None):
    """|A(delta d theta)| against the size of A(theta); theta need not be co-closed.

    Also returns the consistency of delta d theta with -box theta - d delta theta.
    """
    _check_fock(structure, fock)
    f = spacetime_codifferential(exterior_derivative(theta))
    u_f, _ = solution_class(f, structure, k, guard=False)
    u_theta, _ = solution_class(theta, structure, k, guard=False)
    op_f = FockOperator(_field_matrix(structure.K(u_f), fock))
    op_theta = FockOperator(_field_matrix(structure.K(u_theta), fock))

    st = theta.spacetime
    kk = st.steps // 2 if k is None else k
    Ef = causal_propagator(f)
    w = structure.omega
    gauge_scale = np.sqrt(fock.n_max + 1) * max(np.sqrt(w.max()), 1.0 / np.sqrt(w.min())) * (
        norm(trace(Ef, kk, "0"), structure.metric) + norm(trace(Ef, kk, "d"), structure.metric)
    )
    scale = op_theta.norm() + gauge_scale
    residual = op_f.norm() / scale if scale > 0 else op_f.norm()

    if theta.degree > 0:
        alternative = -box(theta) - exterior_derivative(spacetime_codifferential(theta))
    else:
        alternative = -box(theta)
    path_scale = max(f.interior_norm(), alternative.interior_norm())
    path = (f - alternative).interior_norm()
    return {"residual": residual, "path": path / path_scale if path_scale > 0 else path}


def ccr_check(Jc, Jc2, structure, fock, k=None):
    """[A(Jc), A(Jc2)] against i <Jc, E Jc2> Id on the states with every occupation below n_max."""
    A1 = field_operator(Jc, structure, fock, k)
    A2 = field_operator(Jc2, structure, fock, k)
    pairing = spacetime_pairing(Jc, causal_propagator(Jc2))
    comm = fock.restrict(A1.commutator(A2).matrix)
    target = 1j * pairing * np.eye(comm.shape[0])
    mismatch = float(np.linalg.norm(comm - target, 2))
    size = float(np.linalg.norm(comm, 2))
    scale = max(size, abs(pairing))
    return {
        "residual": mismatch / scale if scale > 0 else mismatch,
        "commutator": size,
        "pairing": pairing,
    }


def commutator_check(structure, fock, f, g):
    """[a(f), a^dagger(g)] = (f, g) Id below the cutoff, and the deficit at the cutoff.

    On a basis state whose occupation of mode m equals n_max the diagonal falls short of
    (f, g) by (n_max + 1) conj(f_m) g_m, summed over such modes.
    """
    _check_fock(structure, fock)
    f, g = np.asarray(f, dtype=complex), np.asarray(g, dtype=complex)
    comm = fock.annihilation(f) @ fock.creation(g) - fock.creation(g) @ fock.annihilation(f)
    overlap = complex(np.vdot(f, g))
    low = fock.restrict(comm)
    low_residual = float(np.linalg.norm(low - overlap * np.eye(low.shape[0]), 2))

    top = fock.occupations == fock.n_max
    predicted = overlap - (fock.n_max + 1) * (top * (np.conj(f) * g)).sum(axis=1)
    diagonal = np.diag(comm)
    off_diagonal = comm - np.diag(diagonal)
    deficit_residual = float(max(np.abs(diagonal - predicted).max(), np.abs(off_diagonal).max(initial=0.0)))
    return {"low_residual": low_residual, "deficit_residual": deficit_residual, "overlap": overlap}


def ccr_truncation_profile(Jc, Jc2, structure, n_max_values=(2, 4, 6), alpha=0.5, k=None):
    """Commutator mismatch on a fixed coherent probe state for increasing cutoffs."""
    pairing = spacetime_pairing(Jc, causal_propagator(Jc2))
    rows = []
    for n_max in n_max_values:
        fock = FockSpace.for_structure(structure, n_max)
        A1 = field_operator(Jc, structure, fock, k)
        A2 = field_operator(Jc2, structure, fock, k)
        probe = fock.coherent_state(np.full(structure.count, alpha))
        comm = A1.commutator(A2).matrix
        miss = np.linalg.norm(comm @ probe - 1j * pairing * probe)
        rows.append({"n_max": n_max, "residual": float(miss / abs(pairing)) if pairing else float(miss)})
    residuals = [row["residual"] for row in rows]
    monotone = all(b < a for a, b in zip(residuals, residuals[1:]))
    return rows, monotone


def _guarded_amplitude(u, structure):
    c = structure.K(u)
    size = float(np.linalg.norm(c))
    if size > AMPLITUDE_LIMIT:
        raise AmplitudeGuardError(f"|K u| = {size:.3f} exceeds the amplitude limit {AMPLITUDE_LIMIT}")
    return c


def weyl(u, structure, fock):
    """W(u) = exp(a^dagger(Ku) - a(Ku)): the exponential of i times the field of u."""
    _check_fock(structure, fock)
    u = _as_mode_vector(u, structure)
    c = _guarded_amplitude(u, structure)
    if not np.any(c):
        return FockOperator(fock.identity())
    W = scipy.linalg.expm(fock.creation(c) - fock.annihilation(c))
    tail = float(np.sum(np.abs(W[~fock.low_mask, 0]) ** 2))
    if tail > TAIL_TOL:
        raise AmplitudeGuardError(f"vacuum image leaks {tail:.3e} past the occupation cutoff {fock.n_max}")
    return FockOperator(W)


def weyl_relations(u, v, structure, fock, phase_sign=1.0):
    """Residuals of W(0) = Id, W(-u) = W(u)^dagger, unitarity and
    W(u) W(v) = exp(i phase_sign sigma(u, v) / 2) W(u + v).

    The product relation is measured on the vacuum and the one-particle states only; higher
    occupations feel the cutoff at n_max and drift away from the untruncated relation.
    """
    u = _as_mode_vector(u, structure)
    v = _as_mode_vector(v, structure)
    Wu, Wv, Wuv = weyl(u, structure, fock), weyl(v, structure, fock), weyl(u + v, structure, fock)
    Wneg = weyl(-u, structure, fock)
    eye = fock.identity()
    zero = weyl(ModeVector.zeros(structure.count), structure, fock)
    phase = np.exp(0.5j * phase_sign * structure.sigma(u, v))
    low = np.flatnonzero(fock.occupations.sum(axis=1) <= 1)
    product = (Wu @ Wv).matrix[:, low] - phase * Wuv.matrix[:, low]
    return {
        "identity": float(np.linalg.norm(zero.matrix - eye, 2)),
        "inverse": float(np.linalg.norm(Wneg.matrix - Wu.dagger().matrix, 2)),
        "unitarity": float(np.linalg.norm(Wu.dagger().matrix @ Wu.matrix - eye, 2)),
        "inverse_product": float(np.linalg.norm(Wneg.matrix @ Wu.matrix - eye, 2)),
        "product": float(np.linalg.norm(product, 2)),
    }


def weyl_relation_check(u, v, structure, fock):
    return weyl_relations(u, v, structure, fock)["product"]


def structure_residuals(structure, rng, samples=100):
    """J^2 = -1, 2 mu(u, Jv) = sigma(u, v) and (Ku, Kv) = mu - i/2 sigma over random pairs."""
    worst = {"J_squared": 0.0, "compatibility": 0.0, "k_identity": 0.0, "positivity": np.inf}
    for _ in range(samples):
        u = ModeVector.random(rng, structure.count)
        v = ModeVector.random(rng, structure.count)
        JJ = structure.J(structure.J(u))
        scale = max(np.abs(u.q).max(), np.abs(u.p).max())
        worst["J_squared"] = max(worst["J_squared"], max(np.abs(JJ.q + u.q).max(), np.abs(JJ.p + u.p).max()) / scale)
        mu_uv = structure.mu(u, v)
        sig = structure.sigma(u, v)
        ref = max(abs(mu_uv), abs(sig), 1e-300)
        worst["compatibility"] = max(worst["compatibility"], abs(2 * structure.mu(u, structure.J(v)) - sig) / ref)
        worst["k_identity"] = max(worst["k_identity"], abs(structure.k_inner(u, v) - (mu_uv - 0.5j * sig)) / ref)
        worst["positivity"] = min(worst["positivity"], -structure.sigma(u, structure.J(u)) / structure.mu(u, u))
    return worst

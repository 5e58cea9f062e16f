"""
Discrete exterior calculus on one slice of the torus.

Hodge weights are diagonal (dual-cell measure over primal-cell measure), the codifferential
is defined as the exact adjoint of the coboundary under the weighted pairing, and the
Laplacian is delta d + d delta with the positive sign convention. Elliptic solves run through
the eigenbasis, which is cached per (complex, metric, degree, sector).
"""
import logging
from dataclasses import dataclass, field
from functools import lru_cache
from typing import NamedTuple

import numpy as np
import scipy.linalg
import scipy.sparse as sp
import scipy.sparse.linalg

from errors import DegreeMismatchError, LatticeError, SolverError, TopologicalObstructionError
from lattice import Cochain

logger = logging.getLogger(__name__)

HARMONIC_TOL = 1e-10
OBSTRUCTION_TOL = 1e-8
SECTORS = ("all", "coexact", "exact")


@dataclass(frozen=True)
class SpatialMetric:
    """Diagonal metric on the torus given by one scale factor per axis.

    Each entry of ``scale_factors`` is either None (flat along that axis) or a callable taking
    the (n, d) array of physical cell centers and returning n positive factors.
    """

    scale_factors: tuple = ()
    name: str = "flat"

    def factors(self, complex, p):
        centers = complex.cell_centers(p)
        out = np.ones((centers.shape[0], complex.d))
        for axis, scale in enumerate(self.scale_factors[: complex.d]):
            if scale is not None:
                out[:, axis] = np.asarray(scale(centers), dtype=float)
        if centers.shape[0] and not np.all(out > 0):
            raise LatticeError(f"metric '{self.name}' has nonpositive scale factors at degree {p}")
        return out


FLAT = SpatialMetric()


def conformal_bump(axis, amplitude=0.2, period=None):
    """Scale factor 1 + amplitude*cos(2 pi x / period) along one axis, for curved-slice tests."""
    if not 0 <= amplitude < 1:
        raise LatticeError("bump amplitude must lie in [0, 1)")

    def scale(centers):
        length = period if period is not None else 2 * np.pi
        return 1.0 + amplitude * np.cos(2 * np.pi * centers[:, axis] / length)

    return scale


@dataclass(frozen=True, eq=False)
class HodgeWeights:
    """Positive weight per p-cell for every degree (the diagonal Hodge star)."""

    complex: object
    metric: SpatialMetric
    by_degree: tuple = field(repr=False)

    def of(self, p):
        if p < 0 or p > self.complex.d:
            return np.zeros(0)
        return self.by_degree[p]


@lru_cache(maxsize=64)
def hodge_weights(complex, metric=FLAT):
    by_degree = []
    for p in range(complex.d + 1):
        lengths = metric.factors(complex, p) * np.asarray(complex.spacing)
        in_cell = np.zeros((complex.cell_count(p), complex.d), dtype=bool)
        for row, combo in enumerate(complex.axes(p)):
            block = slice(row * complex.vertex_count, (row + 1) * complex.vertex_count)
            in_cell[block, list(combo)] = True
        # Dualzelle / Primalzelle
        weights = np.prod(np.where(in_cell, 1.0, lengths), axis=1) / np.prod(
            np.where(in_cell, lengths, 1.0), axis=1
        )
        by_degree.append(weights)
    return HodgeWeights(complex, metric, tuple(by_degree))


def d_matrix(complex, p):
    return complex.incidence(p)


@lru_cache(maxsize=256)
def delta_matrix(complex, metric, p):
    """Codifferential from degree p to p-1: W_{p-1}^{-1} D_{p-1}^T W_p."""
    w = hodge_weights(complex, metric)
    if p <= 0 or p > complex.d:
        return sp.csr_matrix((complex.cell_count(p - 1), complex.cell_count(p)))
    D = complex.incidence(p - 1)
    return sp.csr_matrix(sp.diags(1.0 / w.of(p - 1)) @ D.T @ sp.diags(w.of(p)))


@lru_cache(maxsize=256)
def laplacian_matrix(complex, metric, p):
    if p < 0 or p > complex.d:
        return sp.csr_matrix((complex.cell_count(p), complex.cell_count(p)))
    up = delta_matrix(complex, metric, p + 1) @ d_matrix(complex, p)
    down = d_matrix(complex, p - 1) @ delta_matrix(complex, metric, p)
    return sp.csr_matrix(up + down)


def _check_pair(u, v):
    if u.complex is not v.complex:
        raise LatticeError("cochains live on different complexes")
    if u.degree != v.degree:
        raise DegreeMismatchError(f"cannot pair degree {u.degree} with degree {v.degree}")


def inner(u, v, metric=FLAT):
    """Weighted pairing sum_c w_c u_c v_c (bitwise symmetric in u and v)."""
    _check_pair(u, v)
    if u.is_empty():
        return 0.0
    w = hodge_weights(u.complex, metric).of(u.degree)
    return float(np.dot(w, u.values * v.values))


def norm(u, metric=FLAT):
    return float(np.sqrt(max(inner(u, u, metric), 0.0)))


def codifferential(u, metric=FLAT):
    """Adjoint of the coboundary: inner(d alpha, u) == inner(alpha, delta u)."""
    if u.degree < 1:
        raise LatticeError("codifferential needs degree >= 1")
    return Cochain(u.complex, u.degree - 1, delta_matrix(u.complex, metric, u.degree) @ u.values)


def laplacian(u, metric=FLAT):
    if u.is_empty():
        return u
    return Cochain(u.complex, u.degree, laplacian_matrix(u.complex, metric, u.degree) @ u.values)


class ModeBasis:
    """Eigencochains of the Hodge Laplacian at one degree, orthonormal under ``inner``.

    Args:
        complex: owning CubicalComplex.
        metric: SpatialMetric the weights were taken from.
        degree (int): form degree p.
        eigenvalues: ascending array of lambda_m.
        vectors: (cell_count, count) array, column m is e_m.
        harmonic: boolean flag per mode.
        sector (str): "all", "coexact" or "exact".
    """

    def __init__(self, complex, metric, degree, eigenvalues, vectors, harmonic, sector="all"):
        self.complex = complex
        self.metric = metric
        self.degree = degree
        self.eigenvalues = np.asarray(eigenvalues, dtype=float)
        self.vectors = np.asarray(vectors, dtype=float)
        self.harmonic = np.asarray(harmonic, dtype=bool)
        self.sector = sector

    def __len__(self):
        return self.eigenvalues.size

    def __repr__(self):
        return (
            f"ModeBasis(degree={self.degree}, sector={self.sector}, count={len(self)}, "
            f"harmonic={int(self.harmonic.sum())})"
        )

    @property
    def omega(self):
        return np.sqrt(np.clip(self.eigenvalues, 0.0, None))

    def mode(self, m):
        return Cochain(self.complex, self.degree, self.vectors[:, m].copy())

    def subset(self, indices):
        indices = np.asarray(indices, dtype=int)
        return ModeBasis(
            self.complex,
            self.metric,
            self.degree,
            self.eigenvalues[indices],
            self.vectors[:, indices],
            self.harmonic[indices],
            self.sector,
        )

    def nonharmonic(self):
        return self.subset(np.flatnonzero(~self.harmonic))

    def coordinates(self, u):
        """Mode coefficients inner(e_m, u)."""
        w = hodge_weights(self.complex, self.metric).of(self.degree)
        return self.vectors.T @ (w * u.values)

    def synthesize(self, coefficients):
        return Cochain(self.complex, self.degree, self.vectors @ np.asarray(coefficients, dtype=float))


def _stiffness(complex, metric, p, sector):
    """Symmetric matrix W*Delta restricted to a sector (dense)."""
    w = hodge_weights(complex, metric)
    n = complex.cell_count(p)
    A = np.zeros((n, n))
    if sector in ("all", "coexact") and p < complex.d:
        D = complex.incidence(p)
        A += (D.T @ sp.diags(w.of(p + 1)) @ D).toarray()
    if sector in ("all", "exact") and p > 0:
        D = complex.incidence(p - 1)
        B = sp.diags(w.of(p)) @ D
        A += (B @ sp.diags(1.0 / w.of(p - 1)) @ B.T).toarray()
    return 0.5 * (A + A.T)


def _canonical_cluster_basis(block, weights):
    """Rotate a degenerate eigenspace onto the basis obtained by projecting coordinate
    vectors in index order and orthonormalizing (Gram-Schmidt)."""
    m = block.shape[1]
    if m == 1:
        column = block[:, 0]
        pivot = np.argmax(np.abs(column) > 1e-8 * np.abs(column).max())
        return block * np.sign(column[pivot])
    coords = weights[:, None] * block
    scale = np.abs(coords).max()
    accepted = []
    for row in coords:
        v = row.copy()
        for q in accepted:
            v -= (q @ v) * q
        size = np.linalg.norm(v)
        if size > 1e-6 * scale:
            accepted.append(v / size)
            if len(accepted) == m:
                break
    if len(accepted) < m:
        raise SolverError(f"could not orthonormalize a degenerate cluster of size {m}")
    return block @ np.column_stack(accepted)


@lru_cache(maxsize=64)
def _spectrum(complex, metric, p, sector):
    if sector not in SECTORS:
        raise LatticeError(f"unknown sector '{sector}', expected one of {SECTORS}")
    complex.check_degree(p)
    n = complex.cell_count(p)
    weights = hodge_weights(complex, metric).of(p)
    A = _stiffness(complex, metric, p, sector)
    try:
        values, vectors = scipy.linalg.eigh(A, np.diag(weights))
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise SolverError(f"eigen-solve failed for degree {p}, size {n}: {exc}") from exc
    top = max(float(values.max(initial=0.0)), 1.0)
    values = np.where(np.abs(values) <= HARMONIC_TOL * top, 0.0, values)
    vectors = vectors.copy()
    start = 0
    while start < n:
        stop = start + 1
        while stop < n and values[stop] - values[start] <= 1e-8 * top:
            stop += 1
        vectors[:, start:stop] = _canonical_cluster_basis(vectors[:, start:stop], weights)
        values[start:stop] = values[start:stop].mean()
        start = stop
    harmonic = values <= HARMONIC_TOL * top
    logger.debug("spectrum p=%d sector=%s size=%d zero modes=%d", p, sector, n, int(harmonic.sum()))
    return values, vectors, harmonic


def eigenmodes(complex, metric=FLAT, p=0, count=None, sector="all"):
    """Lowest ``count`` eigenpairs of the Laplacian at degree p.

    The "coexact" and "exact" sectors return only the nonzero spectrum of delta d and
    d delta respectively.
    """
    values, vectors, harmonic = _spectrum(complex, metric, p, sector)
    if sector != "all":
        keep = np.flatnonzero(~harmonic)
        values, vectors, harmonic = values[keep], vectors[:, keep], harmonic[keep]
    available = values.size
    count = available if count is None else count
    if count > available or count < 0:
        raise LatticeError(f"requested {count} modes, only {available} available at degree {p}")
    return ModeBasis(complex, metric, p, values[:count], vectors[:, :count], harmonic[:count], sector)


def _project(u, metric, sector, harmonic_only=False):
    values, vectors, harmonic = _spectrum(u.complex, metric, u.degree, sector)
    cols = harmonic if harmonic_only else ~harmonic
    V = vectors[:, cols]
    w = hodge_weights(u.complex, metric).of(u.degree)
    return Cochain(u.complex, u.degree, V @ (V.T @ (w * u.values)))


def harmonic_projection(u, metric=FLAT):
    return _project(u, metric, "all", harmonic_only=True)


class HodgeParts(NamedTuple):
    exact: Cochain
    coexact: Cochain
    harmonic: Cochain


def hodge_decompose(u, metric=FLAT):
    """Split u into mutually orthogonal exact, coexact and harmonic parts."""
    if u.is_empty():
        return HodgeParts(u, u, u)
    exact = _project(u, metric, "exact") if u.degree > 0 else Cochain.zeros(u.complex, u.degree)
    coexact = (
        _project(u, metric, "coexact") if u.degree < u.complex.d else Cochain.zeros(u.complex, u.degree)
    )
    harmonic = harmonic_projection(u, metric)
    error = norm(u - exact - coexact - harmonic, metric)
    if error > 1e-9 * max(norm(u, metric), 1e-300):
        raise SolverError(f"Hodge reconstruction error {error:.3e} at degree {u.degree}")
    return HodgeParts(exact, coexact, harmonic)


def green_inverse(u, metric=FLAT):
    """Delta^{-1} on the nonharmonic sector (harmonic content is dropped)."""
    values, vectors, harmonic = _spectrum(u.complex, metric, u.degree, "all")
    V = vectors[:, ~harmonic]
    w = hodge_weights(u.complex, metric).of(u.degree)
    return Cochain(u.complex, u.degree, V @ ((V.T @ (w * u.values)) / values[~harmonic]))


def solve_coderivative(psi, metric=FLAT):
    """omega of degree p with delta omega = psi, for co-exact psi of degree p-1."""
    complex = psi.complex
    if psi.degree == -1:
        return Cochain.zeros(complex, 0)
    if psi.degree >= complex.d:
        raise TopologicalObstructionError(f"no co-exact cochains at top degree {complex.d}")
    size = norm(psi, metric)
    if size == 0.0:
        return Cochain.zeros(complex, psi.degree + 1)
    parts = hodge_decompose(psi, metric)
    obstruction = norm(parts.exact + parts.harmonic, metric)
    if obstruction > OBSTRUCTION_TOL * size:
        raise TopologicalObstructionError(
            f"datum is not co-exact: exact+harmonic content {obstruction / size:.3e} of its norm"
        )
    omega = Cochain(complex, psi.degree + 1, d_matrix(complex, psi.degree) @ green_inverse(psi, metric).values)
    residual = norm(codifferential(omega, metric) - psi, metric)
    if residual > OBSTRUCTION_TOL * size:
        raise SolverError(f"delta omega = psi solved only to {residual / size:.3e}")
    return omega


def solve_exterior(F0, metric=FLAT):
    """A0 of degree p-1 with d A0 = F0, for exact F0 of degree p."""
    complex = F0.complex
    if F0.degree < 1:
        raise TopologicalObstructionError("degree-0 data is never exact")
    size = norm(F0, metric)
    if size == 0.0:
        return Cochain.zeros(complex, F0.degree - 1)
    parts = hodge_decompose(F0, metric)
    obstruction = norm(parts.coexact + parts.harmonic, metric)
    if obstruction > OBSTRUCTION_TOL * size:
        raise TopologicalObstructionError(
            f"field strength is not exact: coexact+harmonic content {obstruction / size:.3e} of its norm"
        )
    A0 = codifferential(green_inverse(F0, metric), metric)
    residual = norm(Cochain(complex, F0.degree, d_matrix(complex, F0.degree - 1) @ A0.values) - F0, metric)
    if residual > OBSTRUCTION_TOL * size:
        raise SolverError(f"d A0 = F0 solved only to {residual / size:.3e}")
    return A0


@lru_cache(maxsize=32)
def lambda_max(complex, metric=FLAT):
    """Largest Laplacian eigenvalue over all degrees."""
    best = 0.0
    for p in range(complex.d + 1):
        w = np.sqrt(hodge_weights(complex, metric).of(p))
        S = sp.diags(w) @ laplacian_matrix(complex, metric, p) @ sp.diags(1.0 / w)
        S = 0.5 * (S + S.T)
        n = S.shape[0]
        if n <= 64:
            top = float(np.linalg.eigvalsh(S.toarray())[-1])
        else:
            v0 = np.random.default_rng(0).standard_normal(n)
            top = float(scipy.sparse.linalg.eigsh(S, k=1, which="LA", v0=v0, return_eigenvectors=False)[0])
        best = max(best, top)
    logger.debug("lambda_max for %r: %.6g", complex, best)
    return best


def mode_table_rows(modes):
    return [
        {
            "degree": modes.degree,
            "index": m,
            "eigenvalue": float(modes.eigenvalues[m]),
            "omega": float(modes.omega[m]),
            "harmonic": bool(modes.harmonic[m]),
            "sector": modes.sector,
        }
        for m in range(len(modes))
    ]

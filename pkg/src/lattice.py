"""
Periodic cubical complexes on the d-torus and the cochains that live on them.

A p-cell is addressed by the axes it spans (a sorted tuple S of length p, enumerated in
itertools.combinations order) and its base vertex x. The id of a cell is
``combo_index * N**d + flat(x)`` with ``flat`` the C-order ravel of the vertex multi-index.
Edges point toward increasing coordinate; higher cells are oriented by axis order.
"""
import itertools
import logging
from dataclasses import dataclass, field
from functools import cached_property
from math import comb

import numpy as np
import scipy.sparse as sp

from errors import DegreeMismatchError, LatticeError

logger = logging.getLogger(__name__)

MAX_DIMENSION = 3


class CubicalComplex:
    """Periodic cubical complex with N cells per axis on a torus of side lengths L.

    Args:
        d (int): spatial dimension, 1..3.
        N (int): cells per axis, at least 2.
        L (tuple): physical side length per axis.
    """

    def __init__(self, d, N, L):
        self.d = int(d)
        self.N = int(N)
        self.L = tuple(float(x) for x in L)
        self.spacing = tuple(length / self.N for length in self.L)
        self.shape = (self.N,) * self.d
        self.vertex_count = self.N ** self.d

    def __repr__(self):
        return f"CubicalComplex(d={self.d}, N={self.N}, L={self.L})"

    def axes(self, p):
        """Axis combinations spanning the p-cells, in id order."""
        if p < 0 or p > self.d:
            return []
        return list(itertools.combinations(range(self.d), p))

    def cell_count(self, p):
        if p < 0 or p > self.d:
            return 0
        return comb(self.d, p) * self.vertex_count

    def cell(self, p, cell_id):
        """(axes, base vertex) of the p-cell with the given id."""
        self.check_degree(p)
        if not 0 <= cell_id < self.cell_count(p):
            raise LatticeError(f"cell id {cell_id} out of range for degree {p}")
        combo, flat = divmod(int(cell_id), self.vertex_count)
        base = tuple(int(i) for i in np.unravel_index(flat, self.shape))
        return self.axes(p)[combo], base

    def check_degree(self, p):
        if p < 0 or p > self.d:
            raise LatticeError(f"degree {p} outside 0..{self.d}")

    @cached_property
    def _vertex_index(self):
        # (d, N^d) Multi-Indizes aller Ecken
        return np.array(np.unravel_index(np.arange(self.vertex_count), self.shape))

    def _shifted(self, axis, step=1):
        index = self._vertex_index.copy()
        index[axis] = (index[axis] + step) % self.N
        return np.ravel_multi_index(index, self.shape)

    def base_vertices(self, p):
        """Multi-index of the base vertex of every p-cell, shape (cell_count, d)."""
        reps = len(self.axes(p))
        return np.tile(self._vertex_index.T, (reps, 1))

    def cell_centers(self, p):
        """Physical coordinates of every p-cell center, shape (cell_count, d)."""
        centers = self.base_vertices(p).astype(float)
        offsets = np.zeros((len(self.axes(p)), self.d))
        for row, combo in enumerate(self.axes(p)):
            offsets[row, list(combo)] = 0.5
        centers += np.repeat(offsets, self.vertex_count, axis=0)
        return centers * np.asarray(self.spacing)

    def cell_distance(self, p, ids_p, q, ids_q):
        """Periodic infinity-norm distance between base vertices, one row per p-cell id."""
        bp = self.base_vertices(p)[np.asarray(ids_p, dtype=int)][:, None, :]
        bq = self.base_vertices(q)[np.asarray(ids_q, dtype=int)][None, :, :]
        diff = np.abs(bp - bq)
        diff = np.minimum(diff, self.N - diff)
        return diff.max(axis=2)

    def incidence(self, p):
        """Coboundary matrix from degree p to degree p+1 (sparse, entries ±1).

        Degrees outside 0..d give correctly shaped zero maps.
        """
        return self._incidence_cache[p] if p in self._incidence_cache else self._zero_incidence(p)

    def _zero_incidence(self, p):
        return sp.csr_matrix((self.cell_count(p + 1), self.cell_count(p)))

    @cached_property
    def _incidence_cache(self):
        return {p: self._assemble_incidence(p) for p in range(self.d)}

    def _assemble_incidence(self, p):
        faces = {combo: i for i, combo in enumerate(self.axes(p))}
        V = self.vertex_count
        flat = np.arange(V)
        rows, cols, vals = [], [], []
        for row_combo, combo in enumerate(self.axes(p + 1)):
            row_ids = row_combo * V + flat
            for j, axis in enumerate(combo):
                face = combo[:j] + combo[j + 1:]
                offset = faces[face] * V
                sign = -1.0 if j % 2 else 1.0
                rows += [row_ids, row_ids]
                cols += [offset + self._shifted(axis), offset + flat]
                vals += [np.full(V, sign), np.full(V, -sign)]
        matrix = sp.csr_matrix(
            (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
            shape=(self.cell_count(p + 1), self.cell_count(p)),
        )
        logger.debug("incidence %d->%d assembled: %s, nnz=%d", p, p + 1, matrix.shape, matrix.nnz)
        return matrix


def build_complex(d, N, L):
    """Validated constructor for CubicalComplex; L may be a scalar or one length per axis."""
    if d not in range(1, MAX_DIMENSION + 1):
        raise LatticeError(f"d must be in 1..{MAX_DIMENSION}, got {d}")
    if N < 2:
        raise LatticeError(f"N must be at least 2, got {N}")
    lengths = (L,) * d if np.isscalar(L) else tuple(L)
    if len(lengths) != d:
        raise LatticeError(f"expected {d} side lengths, got {len(lengths)}")
    if any(not np.isfinite(x) or x <= 0 for x in lengths):
        raise LatticeError(f"side lengths must be positive, got {lengths}")
    return CubicalComplex(d, N, lengths)


@dataclass(frozen=True, eq=False)
class Cochain:
    """Real values on the p-cells of a complex.

    Degree -1 (and d+1) is the empty cochain; it shows up as the trace of a 0-form
    that has no normal part.
    """

    complex: CubicalComplex
    degree: int
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.degree < -1 or self.degree > self.complex.d + 1:
            raise LatticeError(f"degree {self.degree} outside -1..{self.complex.d + 1}")
        values = np.asarray(self.values, dtype=float)
        expected = self.complex.cell_count(self.degree)
        if values.shape != (expected,):
            raise LatticeError(
                f"degree {self.degree} cochain needs {expected} values, got shape {values.shape}"
            )
        object.__setattr__(self, "values", values)

    @classmethod
    def zeros(cls, complex, degree):
        return cls(complex, degree, np.zeros(complex.cell_count(degree)))

    def _check_compatible(self, other):
        if not isinstance(other, Cochain):
            return NotImplemented
        if other.complex is not self.complex:
            raise LatticeError("cochains live on different complexes")
        if other.degree != self.degree:
            raise DegreeMismatchError(f"degrees differ: {self.degree} vs {other.degree}")
        return True

    def __add__(self, other):
        if self._check_compatible(other) is NotImplemented:
            return NotImplemented
        return Cochain(self.complex, self.degree, self.values + other.values)

    def __sub__(self, other):
        if self._check_compatible(other) is NotImplemented:
            return NotImplemented
        return Cochain(self.complex, self.degree, self.values - other.values)

    def __mul__(self, scalar):
        if not np.isscalar(scalar):
            return NotImplemented
        return Cochain(self.complex, self.degree, float(scalar) * self.values)

    __rmul__ = __mul__

    def __neg__(self):
        return Cochain(self.complex, self.degree, -self.values)

    def is_empty(self):
        return self.values.size == 0


def random_cochain(complex, degree, rng):
    return Cochain(complex, degree, rng.standard_normal(complex.cell_count(degree)))


def coboundary(u):
    """Discrete exterior derivative: signed sum of u over the facets of every (p+1)-cell."""
    complex = u.complex
    if u.degree >= complex.d:
        raise LatticeError(f"no coboundary from the top degree {complex.d}")
    if u.degree < 0:
        return Cochain.zeros(complex, 0)
    return Cochain(complex, u.degree + 1, complex.incidence(u.degree) @ u.values)

"""
Ultrastatic spacetime R x T^d discretized as a product complex.

A spacetime p-form A = a + dt^b is stored on a staggered time grid: the tangential part a
lives on time nodes k = -1..K+1 (one ghost node on each side) and the normal part b on time
edges k+1/2 for k = -1..K. Row i of ``a`` is node i-1; row r of ``b`` is edge r-1/2.
The physical window is nodes 0..K and edges 1/2..K-1/2.
"""
import csv
import logging
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from errors import CFLViolationError, ConstraintViolationError, DegreeMismatchError, LatticeError, SupportError
from forms import FLAT, codifferential, delta_matrix, eigenmodes, hodge_weights, inner, lambda_max, laplacian_matrix, norm
from lattice import Cochain

logger = logging.getLogger(__name__)

CFL_LIMIT = 1.8

# Vorzeichen-Konventionen, festgelegt durch die Invarianten in verify_conventions
NORMAL_SIGN = 1.0
NORMAL_DERIVATIVE_SIGN = 1.0
PAIRING_NORMAL_SIGN = -1.0
SOURCE_SIGN = -1.0
OMEGA_SIGN = 1.0

TRACE_KINDS = {"0": "0", "d": "d", "n": "n", "delta": "delta", "δ": "delta"}


def convention_ledger():
    return {
        "normal_trace_sign": NORMAL_SIGN,
        "normal_derivative_trace_sign": NORMAL_DERIVATIVE_SIGN,
        "pairing_normal_sign": PAIRING_NORMAL_SIGN,
        "source_sign_tangential": SOURCE_SIGN,
        "source_sign_normal": SOURCE_SIGN,
        "omega_equation_sign": OMEGA_SIGN,
        "box": "-(delta d + d delta) = -(dt^2 + Laplacian)",
        "weyl_phase_sign": 1.0,
        "form_trace_prefactors": {
            f"{kind},n={n},p={p}": rho_sign(kind, n, p) for n in (2, 3, 4) for p in range(n) for kind in ("d", "n")
        },
    }


def _apply(matrix, rows):
    """Apply a sparse spatial operator to every time row of a 2-D array."""
    if matrix.shape[0] == 0 or matrix.shape[1] == 0:
        return np.zeros((rows.shape[0], matrix.shape[0]))
    return np.asarray((matrix @ rows.T).T)


def _row_inner(weights, x, y):
    if x.shape[1] == 0:
        return np.zeros(x.shape[0])
    return (x * y) @ weights


@dataclass(frozen=True, eq=False)
class Spacetime:
    """Slice complex and metric, time step dt and K steps; enforces the CFL bound."""

    complex: object
    metric: object
    dt: float
    steps: int
    lambda_max: float = field(init=False)

    def __post_init__(self):
        if not self.dt > 0:
            raise CFLViolationError(f"time step must be positive, got {self.dt}")
        if self.steps < 2:
            raise LatticeError(f"need at least 2 time steps, got {self.steps}")
        object.__setattr__(self, "lambda_max", lambda_max(self.complex, self.metric))
        if self.cfl > CFL_LIMIT:
            raise CFLViolationError(f"CFL number {self.cfl:.4f} exceeds {CFL_LIMIT}")
        logger.debug("spacetime %r dt=%.4g K=%d cfl=%.3f", self.complex, self.dt, self.steps, self.cfl)

    @classmethod
    def from_cfl(cls, complex, metric=FLAT, cfl=0.5, steps=64):
        return cls(complex, metric, cfl / np.sqrt(lambda_max(complex, metric)), steps)

    @property
    def n(self):
        return self.complex.d + 1

    @property
    def cfl(self):
        return self.dt * np.sqrt(self.lambda_max)

    @property
    def times(self):
        return self.dt * np.arange(self.steps + 1)

    def node_weights(self, window=None):
        """Trapezoid weights aligned with the rows of ``a``, nonzero on nodes m..M."""
        m, M = self.check_window(window)
        w = np.zeros(self.steps + 3)
        w[m + 1 : M + 2] = self.dt
        w[m + 1] *= 0.5
        w[M + 1] *= 0.5
        return w

    def edge_weights(self, window=None):
        """Weights aligned with the rows of ``b``, nonzero on edges m+1/2..M-1/2."""
        m, M = self.check_window(window)
        w = np.zeros(self.steps + 2)
        w[m + 1 : M + 1] = self.dt
        return w

    def check_window(self, window):
        m, M = (0, self.steps) if window is None else window
        if not 0 <= m < M <= self.steps:
            raise SupportError(f"window {window} not inside 0..{self.steps}")
        return m, M

    def check_slice(self, k):
        if not 0 <= k <= self.steps:
            raise SupportError(f"slice {k} outside 0..{self.steps}")


@dataclass(frozen=True, eq=False)
class SpacetimeForm:
    """A = a + dt^b on the staggered grid; a has K+3 rows, b has K+2 rows."""

    spacetime: Spacetime
    degree: int
    a: np.ndarray = field(repr=False)
    b: np.ndarray = field(repr=False)

    def __post_init__(self):
        st = self.spacetime
        if not -1 <= self.degree <= st.n:
            raise LatticeError(f"spacetime degree {self.degree} outside -1..{st.n}")
        a = np.asarray(self.a, dtype=float)
        b = np.asarray(self.b, dtype=float)
        cx = st.complex
        if a.shape != (st.steps + 3, cx.cell_count(self.degree)):
            raise LatticeError(f"tangential part has shape {a.shape}")
        if b.shape != (st.steps + 2, cx.cell_count(self.degree - 1)):
            raise LatticeError(f"normal part has shape {b.shape}")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    @classmethod
    def zeros(cls, spacetime, degree):
        cx = spacetime.complex
        return cls(
            spacetime,
            degree,
            np.zeros((spacetime.steps + 3, cx.cell_count(degree))),
            np.zeros((spacetime.steps + 2, cx.cell_count(degree - 1))),
        )

    def node(self, k):
        """Tangential cochain at node k (-1..K+1)."""
        return Cochain(self.spacetime.complex, self.degree, self.a[k + 1].copy())

    def edge(self, k):
        """Normal cochain on the edge k+1/2 (k = -1..K)."""
        return Cochain(self.spacetime.complex, self.degree - 1, self.b[k + 1].copy())

    def _check(self, other):
        if other.spacetime is not self.spacetime:
            raise LatticeError("forms live on different spacetimes")
        if other.degree != self.degree:
            raise DegreeMismatchError(f"spacetime degrees differ: {self.degree} vs {other.degree}")

    def _combine(self, other, a, b):
        return SpacetimeForm(self.spacetime, self.degree, a, b)

    def _scaled(self, a, b):
        return SpacetimeForm(self.spacetime, self.degree, a, b)

    def __add__(self, other):
        if not isinstance(other, SpacetimeForm):
            return NotImplemented
        self._check(other)
        return self._combine(other, self.a + other.a, self.b + other.b)

    def __sub__(self, other):
        if not isinstance(other, SpacetimeForm):
            return NotImplemented
        self._check(other)
        return self._combine(other, self.a - other.a, self.b - other.b)

    def __mul__(self, scalar):
        if not np.isscalar(scalar):
            return NotImplemented
        return self._scaled(float(scalar) * self.a, float(scalar) * self.b)

    __rmul__ = __mul__

    def __neg__(self):
        return self._scaled(-self.a, -self.b)

    def interior_norm(self):
        """Largest slice norm over the physical window."""
        st = self.spacetime
        w = hodge_weights(st.complex, st.metric)
        na = _row_inner(w.of(self.degree), self.a, self.a)[1 : st.steps + 2]
        nb = _row_inner(w.of(self.degree - 1), self.b, self.b)[1 : st.steps + 1]
        return float(np.sqrt(max(na.max(initial=0.0), nb.max(initial=0.0))))


@dataclass(frozen=True, eq=False)
class Current(SpacetimeForm):
    """Spacetime form supported on nodes k0..k1 and the edges between them."""

    window: tuple = (0, 0)
    co_closed: bool = False

    def __post_init__(self):
        super().__post_init__()
        k0, k1 = self.window
        if not 0 <= k0 <= k1 <= self.spacetime.steps:
            raise SupportError(f"support window {self.window} not inside 0..{self.spacetime.steps}")
        outside_a = np.ones(self.a.shape[0], dtype=bool)
        outside_a[k0 + 1 : k1 + 2] = False
        outside_b = np.ones(self.b.shape[0], dtype=bool)
        outside_b[k0 + 1 : k1 + 1] = False
        if np.any(self.a[outside_a]) or np.any(self.b[outside_b]):
            raise SupportError(f"current has values outside its window {self.window}")
        if self.co_closed and self.degree > 0:
            size = self.interior_norm()
            leak = spacetime_codifferential(self).interior_norm()
            if leak > 1e-8 * max(size, 1e-300):
                raise ConstraintViolationError(f"current flagged co-closed but |delta J| = {leak:.3e}")

    def _combine(self, other, a, b):
        if not isinstance(other, Current):
            return SpacetimeForm(self.spacetime, self.degree, a, b)
        window = (min(self.window[0], other.window[0]), max(self.window[1], other.window[1]))
        return replace(self, a=a, b=b, window=window, co_closed=self.co_closed and other.co_closed)

    def _scaled(self, a, b):
        return replace(self, a=a, b=b)

    @classmethod
    def from_slices(cls, spacetime, degree, window, tangential=None, normal=None, co_closed=False):
        """Build a current from {node k: cochain} and {edge k (meaning k+1/2): cochain} maps."""
        form = SpacetimeForm.zeros(spacetime, degree)
        a, b = form.a.copy(), form.b.copy()
        for k, value in (tangential or {}).items():
            a[k + 1] = getattr(value, "values", value)
        for k, value in (normal or {}).items():
            b[k + 1] = getattr(value, "values", value)
        return cls(spacetime, degree, a, b, window=tuple(window), co_closed=co_closed)

    @classmethod
    def mode_profile(cls, spacetime, mode, profile, window):
        """j_k = g(t_k) e on the nodes of the window, no normal part.

        Co-closed whenever delta e = 0, which is checked.
        """
        k0, k1 = window
        ks = np.arange(k0, k1 + 1)
        g = profile(spacetime.dt * ks) if callable(profile) else np.asarray(profile, dtype=float)
        tangential = {int(k): g_k * mode.values for k, g_k in zip(ks, g)}
        return cls.from_slices(spacetime, mode.degree, window, tangential=tangential, co_closed=True)


def as_current(form, co_closed=False):
    """Wrap a form as a Current whose window is its actual time support."""
    support = time_support(form)
    window = support if support is not None else (0, 0)
    return Current(form.spacetime, form.degree, form.a, form.b, window=window, co_closed=co_closed)


def time_support(form):
    """(first node, last node) touched by nonzero values, or None for the zero form."""
    nodes = np.flatnonzero(np.any(form.a != 0, axis=1)) - 1
    edges = np.flatnonzero(np.any(form.b != 0, axis=1))
    touched = np.concatenate([nodes, edges - 1, edges])
    if touched.size == 0:
        return None
    return int(touched.min()), int(touched.max())


def rho_sign(kind, n, p):
    """Prefactor of the trace maps in the form-language convention.

    The staggered traces carry the constant signs above instead; the prefactors are exported
    with the convention ledger.
    """
    if not 0 <= p < n:
        raise LatticeError(f"need 0 <= p < n, got p={p}, n={n}")
    kind = TRACE_KINDS[kind]
    if kind == "d":
        return -1 if (p * (n - p - 1) + (n - 1)) % 2 else 1
    if kind == "n":
        return -1 if ((n - p) * (p - 1) + (n - 1)) % 2 else 1
    return 1


def trace(A, k, kind):
    """One of the four slice traces of A at node k."""
    st = A.spacetime
    st.check_slice(k)
    kind = TRACE_KINDS.get(kind)
    if kind is None:
        raise LatticeError(f"unknown trace kind, expected one of {sorted(TRACE_KINDS)}")
    cx, p = st.complex, A.degree
    if kind == "0":
        return Cochain(cx, p, A.a[k + 1].copy())
    b_avg = 0.5 * (A.b[k] + A.b[k + 1])
    if kind == "n":
        return Cochain(cx, p - 1, NORMAL_SIGN * b_avg)
    if kind == "d":
        velocity = (A.a[k + 2] - A.a[k]) / (2.0 * st.dt)
        return Cochain(cx, p, NORMAL_DERIVATIVE_SIGN * (velocity - cx.incidence(p - 1) @ b_avg))
    delta_a = delta_matrix(cx, st.metric, p) @ A.a[k + 1]
    return Cochain(cx, p - 1, delta_a + (A.b[k + 1] - A.b[k]) / st.dt)


def exterior_derivative(A):
    """(d_S a, dot a - d_S b): the spacetime coboundary on the staggered grid."""
    st, p = A.spacetime, A.degree
    cx = st.complex
    a = _apply(cx.incidence(p), A.a)
    b = np.diff(A.a, axis=0) / st.dt - _apply(cx.incidence(p - 1), A.b)
    return SpacetimeForm(st, p + 1, a, b)


def spacetime_codifferential(A):
    """(delta_S a + dot b, -delta_S b): the adjoint of the spacetime coboundary under the
    pairing. The normal part is zero-extended past the ghost edges."""
    st, p = A.spacetime, A.degree
    padded = np.vstack([np.zeros((1, A.b.shape[1])), A.b, np.zeros((1, A.b.shape[1]))])
    a = _apply(delta_matrix(st.complex, st.metric, p), A.a) + np.diff(padded, axis=0) / st.dt
    b = -_apply(delta_matrix(st.complex, st.metric, p - 1), A.b)
    return SpacetimeForm(st, p - 1, a, b)


def box(A):
    """Wave operator -(dt^2 + Laplacian) on the interior rows; ghost rows are left zero."""
    st, p = A.spacetime, A.degree
    cx, dt2 = st.complex, st.dt ** 2
    out = SpacetimeForm.zeros(st, p)
    a, b = out.a.copy(), out.b.copy()
    a[1:-1] = -((A.a[2:] - 2 * A.a[1:-1] + A.a[:-2]) / dt2 + _apply(laplacian_matrix(cx, st.metric, p), A.a[1:-1]))
    b[1:-1] = -(
        (A.b[2:] - 2 * A.b[1:-1] + A.b[:-2]) / dt2 + _apply(laplacian_matrix(cx, st.metric, p - 1), A.b[1:-1])
    )
    return SpacetimeForm(st, p, a, b)


def box_residual(A, J=None):
    """Largest interior slice norm of (box A - J), relative to the size of the terms."""
    st, p = A.spacetime, A.degree
    cx, dt2 = st.complex, st.dt ** 2
    w = hodge_weights(cx, st.metric)
    j_a = J.a[1:-1] if J is not None else np.zeros_like(A.a[1:-1])
    j_b = J.b[1:-1] if J is not None else np.zeros_like(A.b[1:-1])
    if J is not None:
        A._check(J)

    def _norms(x, weights):
        return np.sqrt(np.clip(_row_inner(weights, x, x), 0.0, None))

    accel_a = (A.a[2:] - 2 * A.a[1:-1] + A.a[:-2]) / dt2
    lap_a = _apply(laplacian_matrix(cx, st.metric, p), A.a[1:-1])
    accel_b = (A.b[2:] - 2 * A.b[1:-1] + A.b[:-2]) / dt2
    lap_b = _apply(laplacian_matrix(cx, st.metric, p - 1), A.b[1:-1])
    res = np.concatenate(
        [_norms(-(accel_a + lap_a) - j_a, w.of(p)), _norms(-(accel_b + lap_b) - j_b, w.of(p - 1))]
    )
    scale = np.concatenate(
        [
            _norms(accel_a, w.of(p)) + _norms(lap_a, w.of(p)) + _norms(j_a, w.of(p)),
            _norms(accel_b, w.of(p - 1)) + _norms(lap_b, w.of(p - 1)) + _norms(j_b, w.of(p - 1)),
        ]
    ).max(initial=0.0)
    worst = float(res.max(initial=0.0))
    return worst / scale if scale > 0 else worst


def march_forward(x, source, L, dt, first):
    dt2 = dt * dt
    for i in range(first, x.shape[0] - 1):
        x[i + 1] = 2 * x[i] - x[i - 1] - dt2 * (L @ x[i] + source[i])


def march_backward(x, source, L, dt, first):
    dt2 = dt * dt
    for i in range(first, 0, -1):
        x[i - 1] = 2 * x[i] - x[i + 1] - dt2 * (L @ x[i] + source[i])


def _source_rows(J, spacetime, degree):
    if J is None:
        return SpacetimeForm.zeros(spacetime, degree)
    if J.spacetime is not spacetime:
        raise LatticeError("current lives on a different spacetime")
    if J.degree != degree:
        raise DegreeMismatchError(f"current degree {J.degree} does not match data degree {degree}")
    return J


def leapfrog_evolve(data, J, spacetime):
    """Solve box A = J from Cauchy data on slice 0 (forward in time).

    The initial rows reproduce all four traces of ``data`` at slice 0.
    """
    p = data.degree
    cx, st = spacetime.complex, spacetime
    if data.A0.complex is not cx:
        raise LatticeError("Cauchy data lives on a different complex")
    src = _source_rows(J, st, p)
    dt = st.dt
    A = SpacetimeForm.zeros(st, p)
    a, b = A.a.copy(), A.b.copy()
    L_p = laplacian_matrix(cx, st.metric, p)
    L_q = laplacian_matrix(cx, st.metric, p - 1)

    normal = data.An.values / NORMAL_SIGN
    kick = 0.5 * dt * (data.Adelta.values - delta_matrix(cx, st.metric, p) @ data.A0.values)
    b[0] = normal - kick
    b[1] = normal + kick
    velocity = data.Ad.values / NORMAL_DERIVATIVE_SIGN + cx.incidence(p - 1) @ normal
    accel = -(L_p @ data.A0.values + src.a[1])
    a[1] = data.A0.values
    a[0] = data.A0.values - dt * velocity + 0.5 * dt * dt * accel
    a[2] = data.A0.values + dt * velocity + 0.5 * dt * dt * accel
    march_forward(a, src.a, L_p, dt, first=2)
    if b.shape[1]:
        march_forward(b, src.b, L_q, dt, first=1)
    logger.debug("leapfrog degree %d over %d steps", p, st.steps)
    return SpacetimeForm(st, p, a, b)


def spacetime_pairing(A, B, window=None):
    """Trapezoid pairing over nodes m..M plus PAIRING_NORMAL_SIGN times the edge sum."""
    A._check(B)
    st = A.spacetime
    w = hodge_weights(st.complex, st.metric)
    nodes = st.node_weights(window) @ _row_inner(w.of(A.degree), A.a, B.a)
    edges = st.edge_weights(window) @ _row_inner(w.of(A.degree - 1), A.b, B.b)
    return float(nodes + PAIRING_NORMAL_SIGN * edges)


def _trace_terms(A, B, k):
    metric = A.spacetime.metric
    tA = {kind: trace(A, k, kind) for kind in ("0", "d", "n", "delta")}
    tB = {kind: trace(B, k, kind) for kind in ("0", "d", "n", "delta")}
    return (
        inner(tA["0"], tB["d"], metric),
        inner(tA["delta"], tB["n"], metric),
        -inner(tB["0"], tA["d"], metric),
        -inner(tB["delta"], tA["n"], metric),
    )


def trace_bilinear(A, B, k):
    """Boundary term Q(A,B) on slice k built from the four traces."""
    A._check(B)
    return float(sum(_trace_terms(A, B, k)))


def greens_identity_check(A, B, window=None):
    """Relative mismatch of sum(<A, box B> - <B, box A>) = -(Q_M - Q_m) over the window."""
    st = A.spacetime
    m, M = st.check_window(window)
    left = spacetime_pairing(A, box(B), (m, M))
    right = spacetime_pairing(B, box(A), (m, M))
    top, bottom = _trace_terms(A, B, M), _trace_terms(A, B, m)
    lhs = left - right
    rhs = -(sum(top) - sum(bottom))
    scale = abs(left) + abs(right) + sum(abs(t) for t in top + bottom)
    return abs(lhs - rhs) / scale if scale > 0 else abs(lhs - rhs)


def representation_check(A, J, f, slice_index=None):
    """Relative mismatch of <A,f> = <J,E-f>_future + <J,E+f>_past + Q(A, Ef) on one slice."""
    from green import GreensOperator

    st = A.spacetime
    k0 = st.steps // 2 if slice_index is None else slice_index
    st.check_slice(k0)
    src = _source_rows(J, st, A.degree)
    retarded = GreensOperator("retarded", st)(f)
    advanced = GreensOperator("advanced", st)(f)
    lhs = spacetime_pairing(A, f)
    terms = []
    if k0 < st.steps:
        terms.append(spacetime_pairing(src, advanced, (k0, st.steps)))
    if k0 > 0:
        terms.append(spacetime_pairing(src, retarded, (0, k0)))
    terms.extend(_trace_terms(A, advanced - retarded, k0))
    rhs = sum(terms)
    scale = abs(lhs) + sum(abs(t) for t in terms)
    return abs(lhs - rhs) / scale if scale > 0 else abs(lhs - rhs)


def leapfrog_energy(A):
    """Staggered energy per slice; exactly conserved by the free leapfrog.

    1/2 |(a_{k+1}-a_k)/dt|^2 + 1/2 <a_k, Lap a_{k+1}>, plus the same expression for b.
    """
    st, p = A.spacetime, A.degree
    cx, K = st.complex, st.steps
    w = hodge_weights(cx, st.metric)

    def _part(x, degree, count):
        if x.shape[1] == 0:
            return np.zeros(count)
        L = laplacian_matrix(cx, st.metric, degree)
        v = np.diff(x, axis=0)[:count] / st.dt
        potential = _row_inner(w.of(degree), x[:count], _apply(L, x[1 : count + 1]))
        return 0.5 * _row_inner(w.of(degree), v, v) + 0.5 * potential

    return _part(A.a, p, K + 1) + _part(A.b, p - 1, K + 1)


def sample_continuum_mode(spacetime, wavevector):
    """cos(|k| t) cos(k.x) sampled on vertices: an exact solution of the continuum wave equation."""
    cx = spacetime.complex
    k = np.asarray(wavevector, dtype=float)
    x = cx.cell_centers(0)
    omega = float(np.linalg.norm(k))
    t = spacetime.dt * np.arange(-1, spacetime.steps + 2)
    a = np.outer(np.cos(omega * t), np.cos(x @ k))
    return SpacetimeForm(spacetime, 0, a, np.zeros((spacetime.steps + 2, 0)))


def convergence_order(coarse, fine, ratio=2.0):
    return float(np.log(coarse / fine) / np.log(ratio))


def export_snapshots(A, path):
    """Write every stored value as (slice, part, cell, value); edges carry half-integer slices."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["slice", "part", "cell", "value"])
        for row, values in enumerate(A.a):
            for cell, value in enumerate(values):
                writer.writerow([row - 1, "tangential", cell, repr(float(value))])
        for row, values in enumerate(A.b):
            for cell, value in enumerate(values):
                writer.writerow([row - 0.5, "normal", cell, repr(float(value))])
    logger.debug("wrote %s", path)
    return path


def lorenz_residual(A):
    """Per-slice max(|rho_0 delta A|, |rho_n delta A|) over nodes 0..K."""
    C = spacetime_codifferential(A)
    metric = A.spacetime.metric
    out = []
    for k in range(A.spacetime.steps + 1):
        if C.degree < 0:
            out.append(0.0)
            continue
        out.append(max(norm(trace(C, k, "0"), metric), norm(trace(C, k, "n"), metric)))
    return np.asarray(out)


def verify_conventions(spacetime, degree=1):
    """Residuals of the four invariants that pin the sign ledger, on a one-mode problem."""
    from cauchy import CauchyData
    from lattice import coboundary

    cx, metric = spacetime.complex, spacetime.metric
    e = eigenmodes(cx, metric, degree).nonharmonic().mode(0)
    scalar = eigenmodes(cx, metric, degree - 1).nonharmonic().mode(0)
    duality = abs(inner(coboundary(scalar), e, metric) - inner(scalar, codifferential(e, metric), metric))

    zero = Cochain.zeros(cx, degree)
    zero_n = Cochain.zeros(cx, degree - 1)
    # (e, 0, 0, 0) ist Lorenz-Datum: A_delta = 0, delta A_n = 0, delta A_d = 0
    A = leapfrog_evolve(CauchyData(e, zero, zero_n, zero_n), None, spacetime)
    B = leapfrog_evolve(CauchyData(zero, e, zero_n, zero_n), None, spacetime)
    K = spacetime.steps
    f = Current.from_slices(spacetime, degree, (1, K - 1), tangential={k: e for k in range(1, K)})
    lorenz = float(lorenz_residual(A).max()) / (np.sqrt(spacetime.lambda_max) * norm(e, metric))
    return {
        "duality": duality,
        "greens_identity": greens_identity_check(A, B),
        "lorenz_propagation": lorenz,
        "representation": representation_check(A, None, f),
    }

"""Core quantum machinery: spin operators, propagation, worst-case fidelity.

Conventions used throughout the package:

* Angular-momentum matrices are built in the basis ``m = j, j-1, ..., -j``
  (highest projection first), so index ``k`` holds ``m = j - k``.
* ``propagate`` takes the Hamiltonian callback in angular-frequency units
  (rad/s), i.e. it integrates ``dU/dt = -i H(t) U``.  Modules that work in
  ordinary frequency units (Hz) multiply by 2*pi before calling it.
* ``min_gate_fidelity`` is the worst case over pure input states of the
  overlap between the ideal and the implemented gate,
  ``min_psi |<psi| U_ideal^dag U_exp |psi>|^2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm

from .errors import InputError, ModelError

HERMITICITY_TOL = 1e-12   # relative, on max |H - H^dag|
UNITARITY_TOL = 1e-9      # on max |U^dag U - 1|


def check_hermitian(mat: np.ndarray, tol: float = HERMITICITY_TOL,
                    what: str = "matrix") -> np.ndarray:
    """Validate Hermiticity within ``tol`` (relative to the matrix scale)."""
    mat = np.asarray(mat, dtype=complex)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise InputError(f"{what} must be square, got shape {mat.shape}")
    scale = max(1.0, float(np.max(np.abs(mat))))
    dev = float(np.max(np.abs(mat - mat.conj().T)))
    if dev > tol * scale:
        raise ModelError(
            f"{what} is not Hermitian: max |H - H^dag| = {dev:.3e} "
            f"(tolerance {tol:.1e} relative)")
    return mat


def check_unitary(mat: np.ndarray, tol: float = UNITARITY_TOL,
                  what: str = "matrix") -> np.ndarray:
    """Validate unitarity within ``tol``."""
    mat = np.asarray(mat, dtype=complex)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise InputError(f"{what} must be square, got shape {mat.shape}")
    dev = float(np.max(np.abs(mat.conj().T @ mat - np.eye(mat.shape[0]))))
    if dev > tol:
        raise InputError(
            f"{what} is not unitary: max |U^dag U - 1| = {dev:.3e} "
            f"(tolerance {tol:.1e})")
    return mat


@dataclass(frozen=True)
class AngularMomentum:
    """Spin-j operator set in the m = j..-j basis."""

    j: float
    x: np.ndarray
    y: np.ndarray
    z: np.ndarray
    plus: np.ndarray
    minus: np.ndarray

    @property
    def dim(self) -> int:
        return self.z.shape[0]


def angular_momentum_ops(j: float) -> AngularMomentum:
    """Build the spin-j matrices (x, y, z, raising, lowering).

    ``j`` must be a non-negative integer or half-integer.
    """
    two_j = 2.0 * j
    if j < 0 or abs(two_j - round(two_j)) > 1e-9:
        raise InputError(
            f"j must be a non-negative (half-)integer, got {j}")
    j = round(two_j) / 2.0
    m = np.arange(j, -j - 1.0, -1.0)  # j, j-1, ..., -j
    jz = np.diag(m).astype(complex)
    # <m+1| J+ |m> = sqrt(j(j+1) - m(m+1)); superdiagonal in this ordering.
    amp = np.sqrt(j * (j + 1.0) - m[1:] * (m[1:] + 1.0))
    jplus = np.diag(amp, k=1).astype(complex)
    jminus = jplus.conj().T
    jx = 0.5 * (jplus + jminus)
    jy = -0.5j * (jplus - jminus)
    return AngularMomentum(j=j, x=jx, y=jy, z=jz, plus=jplus, minus=jminus)


def kron(*ops: np.ndarray) -> np.ndarray:
    """Kronecker product of one or more operators, leftmost factor slowest."""
    if not ops:
        raise InputError("kron needs at least one operator")
    out = np.asarray(ops[0], dtype=complex)
    for op in ops[1:]:
        out = np.kron(out, np.asarray(op, dtype=complex))
    return out


# Pauli matrices on the computational basis (|0>, |1>).
SIGMA_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
SIGMA_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)
SIGMA_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)
IDENTITY2 = np.eye(2, dtype=complex)


def propagate(hamiltonian_of_t, t0: float, t1: float,
              dt_max: float | None = None, *,
              step_phase_budget: float = 0.05) -> np.ndarray:
    """Time-ordered propagator for ``dU/dt = -i H(t) U`` from t0 to t1.

    ``hamiltonian_of_t(t)`` must return a Hermitian matrix in rad/s.  The
    interval is split into uniform steps no longer than ``dt_max`` (at least
    ceil((t1-t0)/dt_max) of them) and each step uses the midpoint Hamiltonian
    exponentiated exactly.  When ``dt_max`` is omitted it is chosen so that
    each step rotates by at most ``step_phase_budget`` radians, estimated
    from the spectral norm of the Hamiltonian sampled across the interval.
    """
    if not (t1 > t0):
        raise InputError(f"need t1 > t0, got [{t0}, {t1}]")
    span = t1 - t0
    if dt_max is None:
        probes = np.linspace(t0, t1, 17)
        norm = 0.0
        for t in probes:
            h = check_hermitian(hamiltonian_of_t(t), what=f"H({t})")
            norm = max(norm, float(np.linalg.norm(h, 2)))
        dt_max = span if norm == 0.0 else min(span, step_phase_budget / norm)
    if dt_max <= 0:
        raise InputError(f"dt_max must be positive, got {dt_max}")
    n_steps = max(1, math.ceil(span / dt_max))
    dt = span / n_steps
    h_probe = check_hermitian(hamiltonian_of_t(t0), what="H(t0)")
    u = np.eye(h_probe.shape[0], dtype=complex)
    for k in range(n_steps):
        t_mid = t0 + (k + 0.5) * dt
        h = check_hermitian(hamiltonian_of_t(t_mid), what=f"H({t_mid})")
        u = expm(-1j * dt * h) @ u
    return u


def _convex_hull(points: np.ndarray) -> np.ndarray:
    """Andrew monotone-chain convex hull of 2D points, CCW, no duplicates.

    Degenerate inputs are fine: one point or a collinear set come back as
    the one or two extreme points.
    """
    pts = np.unique(np.round(points, 14), axis=0)  # lexicographic sort + dedupe
    if len(pts) <= 2:
        return pts

    def half(seq):
        chain: list[np.ndarray] = []
        for p in seq:
            while len(chain) >= 2:
                a, b = chain[-2], chain[-1]
                cross = (b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0])
                if cross <= 0:  # clockwise or collinear: drop b
                    chain.pop()
                else:
                    break
            chain.append(p)
        return chain

    lower = half(pts)
    upper = half(pts[::-1])
    hull = np.array(lower[:-1] + upper[:-1])
    if len(hull) == 0:  # fully collinear: keep the two extremes
        hull = np.array([pts[0], pts[-1]])
    return hull


def _dist_point_to_segment(p: np.ndarray, a: np.ndarray, b: np.ndarray) -> float:
    ab = b - a
    denom = float(ab @ ab)
    if denom == 0.0:
        return float(np.hypot(*(p - a)))
    t = float((p - a) @ ab) / denom
    t = min(1.0, max(0.0, t))
    proj = a + t * ab
    return float(np.hypot(*(p - proj)))


def min_gate_fidelity(u_ideal: np.ndarray, u_exp: np.ndarray) -> float:
    """Worst-case pure-state fidelity between two gates.

    Equals ``min_psi |<psi| U_ideal^dag U_exp |psi>|^2``, which for unitary
    inputs is the squared Euclidean distance from the origin to the convex
    hull of the eigenvalues of ``M = U_ideal^dag U_exp`` (zero when the hull
    contains the origin).  Insensitive to a global phase on either gate.
    """
    u_ideal = check_unitary(u_ideal, what="u_ideal")
    u_exp = check_unitary(u_exp, what="u_exp")
    if u_ideal.shape != u_exp.shape:
        raise InputError(
            f"gate shapes differ: {u_ideal.shape} vs {u_exp.shape}")
    m = u_ideal.conj().T @ u_exp
    lam = np.linalg.eigvals(m)
    pts = np.column_stack([lam.real, lam.imag])
    hull = _convex_hull(pts)
    origin = np.zeros(2)
    if len(hull) == 1:
        return float(np.hypot(*hull[0])) ** 2
    if len(hull) == 2:
        return _dist_point_to_segment(origin, hull[0], hull[1]) ** 2
    # Polygon: inside test (hull is CCW), else min distance over edges.
    inside = True
    n = len(hull)
    for i in range(n):
        a, b = hull[i], hull[(i + 1) % n]
        cross = (b[0] - a[0]) * (0.0 - a[1]) - (b[1] - a[1]) * (0.0 - a[0])
        if cross < 0.0:
            inside = False
            break
    if inside:
        return 0.0
    d = min(_dist_point_to_segment(origin, hull[i], hull[(i + 1) % n])
            for i in range(n))
    return d * d


def wigner_d_small(j: float, beta: float) -> np.ndarray:
    """Rotation matrix exp(-i*beta*Jy) in the m = j..-j basis.

    Entry [a, b] is the amplitude <m_a| exp(-i*beta*Jy) |m_b> with
    m = j - a (row) and m = j - b (column); e.g. the corner [dim-1, dim-1]
    is the stretched-state overlap cos(beta/2)**(2j).
    """
    ops = angular_momentum_ops(j)
    return expm(-1j * beta * ops.y)

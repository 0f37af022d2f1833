"""Spin Hamiltonians for Kramers rare-earth ions and their dipolar coupling.

Each crystal-field Kramers doublet of the ion is treated as an effective
spin-1/2 with an anisotropic g tensor; the nuclear spin rides along through
the hyperfine contact term.  Working units are Hz for every Hamiltonian
(divide by Planck's constant once, here, instead of threading hbar through
every caller) and SI everywhere else.

Basis conventions
-----------------
Single-ion matrices act on (doublet) x (nuclear) with the doublet factor
slowest; doublet basis states are the eigenstates of the electron Zeeman
term, i.e. of sigma projected on the unit vector along ``g^T b`` (qubit
axis), with index 0 the *higher*-moment state.  Nuclear basis is
m_I = I..-I.  Two-ion matrices act on (doublet 1) x (doublet 2), each in
its own local qubit frame.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .constants import H_PLANCK, MU0, MU_BOHR, MU_NUCLEAR
from .errors import InputError, RegimeError
from .qcore import (IDENTITY2, SIGMA_X, SIGMA_Y, SIGMA_Z,
                    angular_momentum_ops, kron, wigner_d_small)

_PAULI = (SIGMA_X, SIGMA_Y, SIGMA_Z)


def _as_unit(vec, what: str) -> np.ndarray:
    v = np.asarray(vec, dtype=float).reshape(3)
    n = float(np.linalg.norm(v))
    if not np.isfinite(n) or n == 0.0:
        raise InputError(f"{what} must be a finite nonzero 3-vector")
    return v / n


@dataclass(frozen=True)
class GTensor:
    """Anisotropic g tensor of one Kramers doublet (3x3, lab frame)."""

    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=float)
        if m.shape != (3, 3) or not np.all(np.isfinite(m)):
            raise InputError("g tensor must be a finite 3x3 matrix")
        object.__setattr__(self, "matrix", m)

    @classmethod
    def from_principal(cls, values, axes=None) -> "GTensor":
        """Build from principal values and (columns of) principal axes."""
        vals = np.asarray(values, dtype=float).reshape(3)
        if axes is None:
            axes = np.eye(3)
        ax = np.asarray(axes, dtype=float)
        if ax.shape != (3, 3):
            raise InputError("principal axes must form a 3x3 matrix")
        if np.max(np.abs(ax.T @ ax - np.eye(3))) > 1e-9:
            raise InputError("principal axes must be orthonormal columns")
        return cls(ax @ np.diag(vals) @ ax.T)

    def principal(self) -> tuple[np.ndarray, np.ndarray]:
        """Principal g values (descending) and axes (columns), via SVD.

        For a symmetric tensor this is the eigendecomposition up to signs;
        for a general one it is the polar-decomposition magnitude, which is
        what Zeeman splittings measure.
        """
        u, s, vt = np.linalg.svd(self.matrix)
        return s, vt.T

    def zeeman_splitting_hz(self, b_field_t: float, b_hat) -> float:
        """Doublet splitting mu_B * B * |g^T b_hat| / h."""
        b_hat = _as_unit(b_hat, "b_hat")
        return MU_BOHR * b_field_t * float(
            np.linalg.norm(self.matrix.T @ b_hat)) / H_PLANCK


@dataclass(frozen=True)
class FieldSpec:
    """Static magnetic field: magnitude (T) and direction (degrees).

    ``polar_deg`` is measured from the lab +z axis, ``azimuth_deg`` from +x
    toward +y.  Angles are canonicalized into [0, 180] x [0, 360).
    """

    magnitude_t: float
    polar_deg: float = 0.0
    azimuth_deg: float = 0.0

    def __post_init__(self):
        if not (np.isfinite(self.magnitude_t) and self.magnitude_t >= 0):
            raise InputError(
                f"field magnitude must be >= 0 T, got {self.magnitude_t}")
        if not (np.isfinite(self.polar_deg) and np.isfinite(self.azimuth_deg)):
            raise InputError("field angles must be finite")
        theta = self.polar_deg % 360.0
        phi = self.azimuth_deg
        if theta > 180.0:
            theta = 360.0 - theta
            phi += 180.0
        phi %= 360.0
        if phi == 360.0:  # x % 360.0 rounds up for tiny negative x
            phi = 0.0
        object.__setattr__(self, "polar_deg", theta)
        object.__setattr__(self, "azimuth_deg", phi)

    @property
    def unit_vector(self) -> np.ndarray:
        th = math.radians(self.polar_deg)
        ph = math.radians(self.azimuth_deg)
        return np.array([math.sin(th) * math.cos(ph),
                         math.sin(th) * math.sin(ph),
                         math.cos(th)])


def _check_half_integral(value: float, what: str) -> float:
    doubled = 2.0 * value
    if abs(doubled - round(doubled)) > 1e-9 or value < 0:
        raise InputError(f"{what} must be a non-negative half-integer, "
                         f"got {value}")
    return float(value)


@dataclass(frozen=True)
class IonSpec:
    """One Kramers rare-earth ion species in a given host site.

    Energies are given as frequencies (Hz).  The two g tensors describe the
    lowest crystal-field doublet of the ground and of the optically excited
    electronic manifold; ``cf_gap_hz`` is the gap to the next crystal-field
    doublet (the energy cost of the states that second-order processes must
    virtually visit) and ``optical_gap_hz`` the ground-to-excited optical
    interval.
    """

    name: str
    electron_j_ground: float
    electron_j_excited: float
    nuclear_spin: float
    nuclear_g_factor: float
    hyperfine_constant_ground_hz: float
    hyperfine_constant_excited_hz: float
    lande_g_ground: float
    lande_g_excited: float
    g_tensor_ground: GTensor
    g_tensor_excited: GTensor
    cf_gap_hz: float
    optical_gap_hz: float

    def __post_init__(self):
        jg = _check_half_integral(self.electron_j_ground, "electron_j_ground")
        je = _check_half_integral(self.electron_j_excited,
                                  "electron_j_excited")
        _check_half_integral(self.nuclear_spin, "nuclear_spin")
        for j, label in ((jg, "ground"), (je, "excited")):
            if round(2 * j) % 2 == 0:
                raise InputError(
                    f"{label} electron J = {j} is integral: not a Kramers "
                    "ion, no protected doublet exists")
        for val, what in ((self.cf_gap_hz, "cf_gap_hz"),
                          (self.optical_gap_hz, "optical_gap_hz")):
            if val <= 0:
                raise InputError(f"{what} must be positive, got {val}")
        if self.lande_g_ground == 0 or self.lande_g_excited == 0:
            raise InputError("Lande g factors must be nonzero")

    def g_tensor(self, manifold: str) -> GTensor:
        return {"ground": self.g_tensor_ground,
                "excited": self.g_tensor_excited}[_check_manifold(manifold)]

    def lande_g(self, manifold: str) -> float:
        return {"ground": self.lande_g_ground,
                "excited": self.lande_g_excited}[_check_manifold(manifold)]

    def hyperfine_constant_hz(self, manifold: str) -> float:
        return {"ground": self.hyperfine_constant_ground_hz,
                "excited": self.hyperfine_constant_excited_hz}[
                    _check_manifold(manifold)]

    @property
    def nuclear_dim(self) -> int:
        return int(round(2 * self.nuclear_spin)) + 1


def _check_manifold(manifold: str) -> str:
    if manifold not in ("ground", "excited"):
        raise InputError(f"manifold must be 'ground' or 'excited', "
                         f"got {manifold!r}")
    return manifold


@dataclass(frozen=True)
class QubitEncoding:
    """Which pair of single-ion levels carries the logical qubit.

    ``kind`` is "passive" (two nuclear hyperfine levels of the lowest
    ground doublet branch, negligible magnetic moment) or "active" (the
    optically reachable doublet pair with a full electronic moment).
    ``level_indices`` index the sorted single-ion eigenenergies.
    """

    kind: str
    level_indices: tuple[int, int]

    def __post_init__(self):
        if self.kind not in ("passive", "active"):
            raise InputError(
                f"encoding kind must be 'passive' or 'active', "
                f"got {self.kind!r}")
        i, j = self.level_indices
        if i == j or i < 0 or j < 0:
            raise InputError("encoding needs two distinct level indices")


# ---------------------------------------------------------------------------
# moments and axes


def moment_direction(g: GTensor, b_hat) -> np.ndarray:
    """Unit vector along g^T b_hat: quantization axis of the doublet."""
    b_hat = _as_unit(b_hat, "b_hat")
    v = g.matrix.T @ b_hat
    n = float(np.linalg.norm(v))
    if n < 1e-12:
        raise InputError(
            "g^T b vanishes for this field direction; the doublet does not "
            "split and no qubit axis exists")
    return v / n


def effective_moment(g: GTensor, b_hat) -> float:
    """Magnetic moment magnitude (J/T) of one doublet branch.

    The branch states carry moment +/- (mu_B/2) |g^T b_hat| along the
    quantization axis; this returns the magnitude for one branch.
    """
    b_hat = _as_unit(b_hat, "b_hat")
    return 0.5 * MU_BOHR * float(np.linalg.norm(g.matrix.T @ b_hat))


def magnetization_direction(g: GTensor, b_hat) -> np.ndarray:
    """Unit vector along g (g^T b_hat): direction of the branch moment.

    The doublet quantization axis is unit(g^T b), but the *vector* moment
    of a branch state is proportional to g applied to that axis, so the
    physical magnetization (and with it the hyperfine field acting on the
    nucleus) points along g g^T b instead.  The two coincide only for an
    isotropic tensor.
    """
    b_hat = _as_unit(b_hat, "b_hat")
    v = g.matrix @ (g.matrix.T @ b_hat)
    n = float(np.linalg.norm(v))
    if n < 1e-12:
        raise InputError(
            "g g^T b vanishes for this field direction; the doublet does "
            "not split and no magnetization axis exists")
    return v / n


def nuclear_axis_angle(ion: IonSpec, b_hat) -> float:
    """Angle (rad) between ground and excited nuclear quantization axes.

    The nuclear spin is quantized along the hyperfine field of whichever
    electronic doublet the ion occupies, i.e. along that manifold's
    magnetization direction g g^T b; optically switching the manifold
    therefore tilts the nuclear axis by this angle, and nuclear-state
    overlaps pick up the corresponding rotation matrix elements.  (Exact
    diagonalization of ``single_ion_hamiltonian`` reproduces this angle to
    within about a degree at tesla-scale fields, where the nuclear Zeeman
    term slightly drags the axis toward the field.)
    """
    n_g = magnetization_direction(ion.g_tensor_ground, b_hat)
    n_e = magnetization_direction(ion.g_tensor_excited, b_hat)
    cosang = float(np.clip(np.dot(n_g, n_e), -1.0, 1.0))
    return math.acos(cosang)


def activation_overlaps(nuclear_spin: float,
                        axis_angle_rad: float) -> tuple[float, float, float]:
    """Nuclear overlap factors for optical transfer between manifolds.

    Returns ``(w_lowest, w_second, w_cross)``: the magnitudes of the
    rotation matrix elements connecting the two lowest nuclear levels
    (m = -I and m = -I+1) across an axis tilt.  ``w_lowest`` and
    ``w_second`` scale the nuclear-state-preserving transition strengths;
    ``w_cross`` the m -> m+1 crossed transition used to drive nuclear-state
    changes optically.
    """
    spin = _check_half_integral(nuclear_spin, "nuclear_spin")
    if spin < 0.5:
        raise InputError("activation overlaps need nuclear_spin >= 1/2")
    d = wigner_d_small(spin, axis_angle_rad)
    dim = d.shape[0]
    w_lowest = abs(d[dim - 1, dim - 1])
    w_second = abs(d[dim - 2, dim - 2])
    w_cross = abs(d[dim - 1, dim - 2])
    return float(w_lowest), float(w_second), float(w_cross)


# ---------------------------------------------------------------------------
# single-ion Hamiltonian


def single_ion_hamiltonian(ion: IonSpec, manifold: str,
                           field: FieldSpec) -> np.ndarray:
    """Doublet (x) nuclear Hamiltonian in Hz for one electronic manifold.

    Three terms: electron Zeeman of the effective spin-1/2 with the
    manifold's g tensor, nuclear Zeeman, and the contact hyperfine coupling
    projected into the doublet (the full-manifold J.I contact term with J
    replaced by its doublet projection g.sigma / (2 g_J)).
    """
    g = ion.g_tensor(manifold).matrix
    a_hz = ion.hyperfine_constant_hz(manifold)
    g_lande = ion.lande_g(manifold)
    b_hat = field.unit_vector
    b_mag = field.magnitude_t
    nuc = angular_momentum_ops(ion.nuclear_spin)
    n_dim = ion.nuclear_dim
    eye_n = np.eye(n_dim)

    gtb = g.T @ b_hat
    h_e_zeeman = (MU_BOHR * b_mag / (2.0 * H_PLANCK)) * sum(
        gtb[k] * kron(_PAULI[k], eye_n) for k in range(3))
    i_ops = (nuc.x, nuc.y, nuc.z)
    b_dot_i = sum(b_hat[k] * i_ops[k] for k in range(3))
    h_n_zeeman = -(ion.nuclear_g_factor * MU_NUCLEAR * b_mag / H_PLANCK) * \
        kron(IDENTITY2, b_dot_i)
    h_hyperfine = (a_hz / (2.0 * g_lande)) * sum(
        g[alpha, beta] * kron(_PAULI[beta], i_ops[alpha])
        for alpha in range(3) for beta in range(3))
    return h_e_zeeman + h_n_zeeman + h_hyperfine


# ---------------------------------------------------------------------------
# two-ion dipolar coupling


@dataclass(frozen=True)
class DipolePair:
    """Two ions and the vector (m) from ion 1 to ion 2."""

    ion1: IonSpec
    ion2: IonSpec
    separation_m: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self):
        r = np.asarray(self.separation_m, dtype=float).reshape(3)
        if not np.all(np.isfinite(r)) or np.linalg.norm(r) == 0.0:
            raise InputError("ion separation must be a finite nonzero "
                             "3-vector (meters)")
        object.__setattr__(self, "separation_m", r)

    @property
    def distance_m(self) -> float:
        return float(np.linalg.norm(self.separation_m))

    @property
    def direction(self) -> np.ndarray:
        return self.separation_m / self.distance_m


def dipolar_geometric_tensor(r_vec) -> np.ndarray:
    """Traceless tensor (delta_ab - 3 r_a r_b) of the dipole interaction."""
    r_hat = _as_unit(r_vec, "r_vec")
    return np.eye(3) - 3.0 * np.outer(r_hat, r_hat)


def ising_coupling_hz(moment1_j_per_t: float, moment2_j_per_t: float,
                      r_vec, m_hat) -> float:
    """Secular dipolar coupling J_zz (Hz) for parallel moments along m_hat.

    ``J_zz = mu0 * m1 * m2 / (4 pi r^3 h) * (1 - 3 (r_hat . m_hat)^2)``;
    the two-ion energy is J_zz * sz1 * sz2 with sz = +/-1 labels.
    Vanishes at the magic angle acos(1/sqrt(3)) between the pair axis and
    the moment direction.
    """
    r = np.asarray(r_vec, dtype=float).reshape(3)
    dist = float(np.linalg.norm(r))
    if dist == 0.0:
        raise InputError("ion separation must be nonzero")
    cos_rm = float(np.dot(r / dist, _as_unit(m_hat, "m_hat")))
    pref = MU0 * moment1_j_per_t * moment2_j_per_t / (
        4.0 * math.pi * dist**3 * H_PLANCK)
    return pref * (1.0 - 3.0 * cos_rm**2)


def _local_frame(n_hat: np.ndarray) -> np.ndarray:
    """Right-handed orthonormal frame with third column along n_hat."""
    ref = np.array([0.0, 0.0, 1.0])
    if abs(np.dot(n_hat, ref)) > 0.9:
        ref = np.array([1.0, 0.0, 0.0])
    e1 = np.cross(ref, n_hat)
    e1 /= np.linalg.norm(e1)
    e2 = np.cross(n_hat, e1)
    return np.column_stack([e1, e2, n_hat])


def _moment_operator_matrix(g: GTensor, b_hat) -> tuple[np.ndarray,
                                                        np.ndarray]:
    """Matrix B with M_alpha = sum_a B[alpha, a] sigma_a^local (J/T).

    The doublet's vector moment operator, expressed in its local qubit
    frame.  Its longitudinal part is exactly +/- the effective branch
    moment along the quantization axis (so the secular piece reproduces
    the scalar Ising coupling); the transverse part carries the g-tensor
    anisotropy that drives state-flipping corrections.
    """
    n_hat = moment_direction(g, b_hat)
    mu_branch = effective_moment(g, b_hat)
    base = 0.5 * MU_BOHR * g.matrix
    correction = np.outer(mu_branch * n_hat - base @ n_hat, n_hat)
    frame = _local_frame(n_hat)
    return (base + correction) @ frame, n_hat


def two_ion_hamiltonian(pair: DipolePair, field_spec: FieldSpec,
                        manifolds: tuple[str, str] = ("excited", "excited"),
                        *, include_zeeman: bool = True) -> np.ndarray:
    """Magnetic dipole-dipole Hamiltonian (Hz) of two activated doublets.

    4x4 matrix on (doublet 1) x (doublet 2), each ion written in its own
    qubit eigenframe (so local sigma_z measures the Zeeman branch).  With
    ``include_zeeman`` the local splittings enter as (Delta_i/2) sigma_z;
    the dipolar part couples the full vector moment operators through the
    traceless geometric tensor.
    """
    b_hat = field_spec.unit_vector
    g1 = pair.ion1.g_tensor(manifolds[0])
    g2 = pair.ion2.g_tensor(manifolds[1])
    mom1, _ = _moment_operator_matrix(g1, b_hat)
    mom2, _ = _moment_operator_matrix(g2, b_hat)
    geom = dipolar_geometric_tensor(pair.separation_m)
    coupling = mom1.T @ geom @ mom2 * (
        MU0 / (4.0 * math.pi * pair.distance_m**3 * H_PLANCK))
    h = np.zeros((4, 4), dtype=complex)
    for a in range(3):
        for b in range(3):
            if abs(coupling[a, b]) > 0.0:
                h += coupling[a, b] * kron(_PAULI[a], _PAULI[b])
    if include_zeeman:
        for idx, (g, man) in enumerate(((g1, manifolds[0]),
                                        (g2, manifolds[1]))):
            split = g.zeeman_splitting_hz(field_spec.magnitude_t, b_hat)
            op = kron(SIGMA_Z, IDENTITY2) if idx == 0 else kron(IDENTITY2,
                                                                SIGMA_Z)
            h += 0.5 * split * op
    return h


def ising_projection(pair: DipolePair, field_spec: FieldSpec,
                     manifolds: tuple[str, str] = ("excited", "excited")
                     ) -> float:
    """Secular (sigma_z sigma_z) coefficient (Hz) of the pair coupling.

    Equals the scalar Ising formula evaluated with each ion's effective
    branch moment and quantization axis; a vanishing moment on either ion
    (degenerate doublet for this field direction) is rejected because no
    qubit axis exists to project onto.
    """
    b_hat = field_spec.unit_vector
    g1 = pair.ion1.g_tensor(manifolds[0])
    g2 = pair.ion2.g_tensor(manifolds[1])
    n1 = moment_direction(g1, b_hat)  # raises if degenerate
    n2 = moment_direction(g2, b_hat)
    mu1 = effective_moment(g1, b_hat)
    mu2 = effective_moment(g2, b_hat)
    geom = dipolar_geometric_tensor(pair.separation_m)
    pref = MU0 * mu1 * mu2 / (4.0 * math.pi * pair.distance_m**3 * H_PLANCK)
    return pref * float(n1 @ geom @ n2)


# ---------------------------------------------------------------------------
# regime checks


def validate_energy_hierarchy(ion: IonSpec, field_spec: FieldSpec,
                              distance_m: float, *,
                              manifold: str = "excited",
                              min_ratio: float = 10.0) -> dict:
    """Check the scale ordering the gate analysis relies on.

    Requires electron Zeeman >> hyperfine >> dipolar coupling and a
    crystal-field gap above the electron Zeeman energy, each by
    ``min_ratio``.  Returns the scales (Hz); raises RegimeError naming the
    first violated inequality.
    """
    g = ion.g_tensor(manifold)
    b_hat = field_spec.unit_vector
    e_zeeman = g.zeeman_splitting_hz(field_spec.magnitude_t, b_hat)
    a_hz = abs(ion.hyperfine_constant_hz(manifold))
    mu = effective_moment(g, b_hat)
    j_max = 2.0 * MU0 * mu * mu / (4.0 * math.pi * distance_m**3 * H_PLANCK)
    scales = {"electron_zeeman_hz": e_zeeman, "hyperfine_hz": a_hz,
              "dipolar_hz": j_max, "cf_gap_hz": ion.cf_gap_hz}
    checks = [
        ("electron_zeeman_hz", e_zeeman, "hyperfine_hz", a_hz),
        ("hyperfine_hz", a_hz, "dipolar_hz", j_max),
        ("cf_gap_hz", ion.cf_gap_hz, "electron_zeeman_hz", e_zeeman),
    ]
    for big_name, big, small_name, small in checks:
        if big < min_ratio * small:
            raise RegimeError(
                f"energy hierarchy violated: need {big_name} >= "
                f"{min_ratio:g} x {small_name}, got {big:.4g} Hz vs "
                f"{small:.4g} Hz")
    return scales

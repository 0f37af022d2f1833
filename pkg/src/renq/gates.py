"""Two-qubit gate construction, pulse schedules, and error budgets.

The CNOT is synthesized from single-qubit square roots around a conditional
phase C(pi/2), which in turn comes from free dipolar evolution wrapped in a
spin echo that cancels all single-ion sigma-z terms.  Scheduling covers the
optical activation of the two nuclear qubits, the X-gates of the echo, and
the deactivation; scoring reduces a schedule to the three error channels
that bound the gate fidelity (coherence, finite pulse time, residual
couplings).

Level labels used in schedules: ``p0``/``p1`` are the two passive (nuclear)
qubit levels of the ground manifold, ``a0``/``a1`` the corresponding active
levels of the optically excited manifold.  A "direct" optical transition
preserves the nuclear projection (``p0-a0``, ``p1-a1``); a "crossed" one
changes it (``p0-a1``, ``p1-a0``) and is weaker by the nuclear-axis
rotation between the manifolds.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import expm

from .constants import HBAR, H_PLANCK, MU_BOHR, MU_NUCLEAR, SPEED_OF_LIGHT
from .errors import (InfeasibleError, InputError, ModelError, RegimeError,
                     RegimeWarning)
from .ions import (DipolePair, FieldSpec, IonSpec, activation_overlaps,
                   ising_projection, nuclear_axis_angle,
                   validate_energy_hierarchy)
from .qcore import (IDENTITY2, SIGMA_X, SIGMA_Y, SIGMA_Z, kron,
                    min_gate_fidelity)

# Optical drive strength for activation/deactivation pulses: electric-dipole
# transition moment of the ground-excited optical line (C m) driven by the
# electric field c*B_ac of the pulse.  Shaped (Gaussian) pi pulses need an
# area 2*sqrt(pi) rather than pi of a square pulse.
ELECTRIC_DIPOLE_CM = 2.0e-32
SHAPED_PI_AREA = 2.0 * math.sqrt(math.pi)

# Below this nuclear overlap a transition is treated as switched off: the
# pulse time diverges as 1/overlap and the schedule is not realizable.
OVERLAP_FLOOR = 1e-3

CNOT_CANONICAL = np.array([[1, 0, 0, 0],
                           [0, 1, 0, 0],
                           [0, 0, 0, 1],
                           [0, 0, 1, 0]], dtype=complex)

ERROR_CHANNELS = ("coherence", "activation_time", "residual_resonant",
                  "residual_offresonant")


# ---------------------------------------------------------------------------
# schedule containers


@dataclass(frozen=True)
class Segment:
    """One schedule entry: a drive pulse, free evolution, or an ideal gate.

    kind        "pulse" | "free" | "unitary"
    duration_s  wall-clock length (0 allowed only for "unitary")
    transition  (level, level) labels for pulses
    rabi_rad_s  effective Rabi angular frequency of the pulse (rad/s)
    overlap     nuclear overlap factor already folded into rabi_rad_s
    label       free-form tag ("activate 0", "echo X", named unitary, ...)
    """

    kind: str
    duration_s: float = 0.0
    transition: tuple[str, str] | None = None
    rabi_rad_s: float = 0.0
    overlap: float = 1.0
    label: str = ""

    def __post_init__(self):
        if self.kind not in ("pulse", "free", "unitary"):
            raise InputError(f"unknown segment kind {self.kind!r}")
        if not (np.isfinite(self.duration_s) and self.duration_s >= 0.0):
            raise InputError(
                f"segment duration must be >= 0 s, got {self.duration_s}")
        if self.kind == "pulse":
            if self.transition is None or len(self.transition) != 2:
                raise InputError("pulse segments need a (level, level) pair")
            if self.duration_s == 0.0:
                raise InputError("pulse segments need a positive duration")


@dataclass(frozen=True)
class GateSchedule:
    """Ordered pulse/evolution segments realizing one gate primitive."""

    segments: tuple[Segment, ...]
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "segments", tuple(self.segments))
        if not self.segments:
            raise InputError("a schedule needs at least one segment")

    @property
    def total_time_s(self) -> float:
        return float(sum(s.duration_s for s in self.segments))

    @property
    def pulse_count(self) -> int:
        return sum(1 for s in self.segments if s.kind == "pulse")


@dataclass(frozen=True)
class GateReport:
    """Scored gate: wall-clock time, fidelity floor, and error breakdown.

    ``breakdown`` lists every error channel with its estimated infidelity;
    ``1 - f_min`` equals the worst single channel (the channels bound the
    error from below, so the floor is their maximum, not their sum).
    """

    total_time_s: float
    f_min: float
    dominant_error: str
    breakdown: tuple[tuple[str, float], ...]
    t_cnot_s: float = 0.0
    t_activation_pulse_s: float = 0.0
    j_dip_hz: float = 0.0

    def __post_init__(self):
        if not (0.0 <= self.f_min <= 1.0):
            raise ModelError(f"F_min must lie in [0, 1], got {self.f_min}")
        if self.dominant_error not in ERROR_CHANNELS:
            raise ModelError(
                f"unknown dominant error channel {self.dominant_error!r}")
        object.__setattr__(self, "breakdown", tuple(self.breakdown))
        worst = max(v for _, v in self.breakdown)
        if any(v < 0 for _, v in self.breakdown):
            raise ModelError("breakdown entries must be nonnegative")
        # channels are lower bounds on 1 - F; F itself saturates at 0 when
        # a channel estimate exceeds 1
        if (1.0 - self.f_min) + 1e-15 < min(1.0, worst):
            raise ModelError("total error below the largest single channel")

    def channel(self, name: str) -> float:
        for label, value in self.breakdown:
            if label == name:
                return value
        raise InputError(f"no channel named {name!r}")


# ---------------------------------------------------------------------------
# ideal gate algebra


def _sqrt_pauli(op: np.ndarray, sign: float = 1.0) -> np.ndarray:
    """exp(-i sign pi/4 op) for an involutory operator (op^2 = 1)."""
    return math.cos(math.pi / 4.0) * np.eye(op.shape[0]) \
        - 1j * sign * math.sin(math.pi / 4.0) * op


def c_phase_ideal(sign: float = 1.0) -> np.ndarray:
    """Conditional phase C(sign*pi/2) = exp(-i sign (pi/4) sigma_z sigma_z)."""
    return _sqrt_pauli(kron(SIGMA_Z, SIGMA_Z), sign)


def cnot_ideal() -> np.ndarray:
    """CNOT synthesized from square-root single-qubit gates around C(pi/2).

    Evaluates sqrtZ_1 * sqrtZ_2^dag * sqrtX_2 * C(pi/2) * sqrtY_2 (matrix
    order; the rightmost factor acts first) and checks the result against
    the canonical CNOT (control = qubit 1) up to global phase before
    returning it.  The residual global phase is exp(-i pi/4).
    """
    sz1 = kron(SIGMA_Z, IDENTITY2)
    sz2 = kron(IDENTITY2, SIGMA_Z)
    sx2 = kron(IDENTITY2, SIGMA_X)
    sy2 = kron(IDENTITY2, SIGMA_Y)
    u = (_sqrt_pauli(sz1) @ _sqrt_pauli(sz2, -1.0) @ _sqrt_pauli(sx2)
         @ c_phase_ideal() @ _sqrt_pauli(sy2))
    f = min_gate_fidelity(CNOT_CANONICAL, u)
    if f < 1.0 - 1e-12:
        raise ModelError(
            f"CNOT synthesis identity violated: F_min = {f!r}")
    return u


def cnot_time_s(j_dip_hz: float) -> float:
    """Free-evolution time t with 2 pi J t = pi/4, i.e. t = 1/(8 J).

    This is the total conditional-phase time of the echo sequence; in
    energy units t * (h J) = pi hbar / 4 exactly.
    """
    if j_dip_hz == 0.0 or not np.isfinite(j_dip_hz):
        raise InfeasibleError(
            "dipolar coupling vanishes for this geometry; the conditional "
            "phase would take infinite time")
    return 1.0 / (8.0 * abs(j_dip_hz))


def spin_echo_cphase(h_full_hz: np.ndarray, j_dip_hz: float,
                     x_gate_duration_s: float = 0.0) -> np.ndarray:
    """Propagate the echo sequence X X . U(t/2) . X X . U(t/2).

    ``h_full_hz`` is the full two-qubit Hamiltonian in Hz (Ising term plus
    arbitrary single-ion sigma-z terms plus optional residuals);
    ``j_dip_hz`` sets the free-evolution time t = 1/(8 |J|).  The X-gates
    flip both qubits, so single-ion sigma-z phases from the two halves
    cancel while the sigma-z sigma-z phase adds up to the conditional pi/2.
    With ``x_gate_duration_s`` > 0 each X is modeled as an instantaneous
    flip sandwiched by free evolution of half that duration, which leaks a
    fraction of the single-ion phases back in.
    """
    h = np.asarray(h_full_hz, dtype=complex)
    if h.shape != (4, 4):
        raise InputError(f"expected a 4x4 Hamiltonian, got {h.shape}")
    if x_gate_duration_s < 0:
        raise InputError("x_gate_duration_s must be >= 0")
    t_cnot = cnot_time_s(j_dip_hz)
    xx = kron(SIGMA_X, SIGMA_X)

    def _evolve(dt: float) -> np.ndarray:
        return expm(-2j * math.pi * h * dt)

    u_half = _evolve(0.5 * t_cnot)
    if x_gate_duration_s == 0.0:
        x_timed = xx
    else:
        u_pad = _evolve(0.5 * x_gate_duration_s)
        x_timed = u_pad @ xx @ u_pad
    return x_timed @ u_half @ x_timed @ u_half

# ---------------------------------------------------------------------------
# pulse schedules


def _overlaps_for(ion: IonSpec, field_spec: FieldSpec
                  ) -> tuple[float, float, float]:
    gamma = nuclear_axis_angle(ion, field_spec.unit_vector)
    return activation_overlaps(ion.nuclear_spin, gamma)


def _require_overlap(value: float, what: str) -> float:
    if value < OVERLAP_FLOOR:
        raise InfeasibleError(
            f"{what} nuclear overlap {value:.2e} below the floor "
            f"{OVERLAP_FLOOR:g}; the pulse time diverges")
    return value


def optical_rabi_rad_s(b_ac_t: float) -> float:
    """Peak optical Rabi frequency mu_e * (c B_ac) / hbar (rad/s)."""
    if b_ac_t <= 0:
        raise InputError(f"B_ac must be positive, got {b_ac_t}")
    return ELECTRIC_DIPOLE_CM * SPEED_OF_LIGHT * b_ac_t / HBAR


def _optical_pi(transition: tuple[str, str], overlap: float, b_ac_t: float,
                label: str) -> Segment:
    omega = optical_rabi_rad_s(b_ac_t) * overlap
    return Segment(kind="pulse", duration_s=SHAPED_PI_AREA / omega,
                   transition=transition, rabi_rad_s=omega, overlap=overlap,
                   label=label)


def activation_schedule(ion: IonSpec, field_spec: FieldSpec,
                        b_ac_t: float) -> GateSchedule:
    """Two direct optical pi pulses lifting the nuclear qubit levels.

    Transfers p0 -> a0 and p1 -> a1 (projection-preserving transitions),
    turning the passive nuclear qubit into a magnetically active one.
    Deactivation is the same schedule run in reverse.
    """
    w0, w1, _ = _overlaps_for(ion, field_spec)
    _require_overlap(min(w0, w1), "direct-transition")
    return GateSchedule(name="activate", segments=(
        _optical_pi(("p0", "a0"), w0, b_ac_t, "activate 0"),
        _optical_pi(("p1", "a1"), w1, b_ac_t, "activate 1"),
    ))


def echo_x_schedule(ion: IonSpec, field_spec: FieldSpec,
                    b_ac_t: float) -> GateSchedule:
    """Three-pulse X on an *active* qubit via an empty passive shelf level.

    Swaps a0 and a1 through whichever passive level has the stronger direct
    transition: pi(a_d - p_s), pi(a_other - p_s) (crossed), pi(a_d - p_s).
    Two pulses run at the direct rate and one at the slower crossed rate.
    """
    w0, w1, wc = _overlaps_for(ion, field_spec)
    _require_overlap(wc, "crossed-transition")
    if w0 >= w1:
        shelf, direct, other, w_d = "p0", "a0", "a1", w0
    else:
        shelf, direct, other, w_d = "p1", "a1", "a0", w1
    _require_overlap(w_d, "direct-transition")
    return GateSchedule(name="echo X", segments=(
        _optical_pi((direct, shelf), w_d, b_ac_t, "shelve"),
        _optical_pi((other, shelf), wc, b_ac_t, "swap (crossed)"),
        _optical_pi((direct, shelf), w_d, b_ac_t, "unshelve"),
    ))


def crossed_deactivation_schedule(ion: IonSpec, field_spec: FieldSpec,
                                  b_ac_t: float) -> GateSchedule:
    """Two crossed pi pulses: deactivate and apply the final echo X at once.

    Sending a0 -> p1 and a1 -> p0 returns the qubit to the passive manifold
    with its levels exchanged, which absorbs the closing X-gate of the echo
    into the deactivation instead of paying for both.
    """
    _, _, wc = _overlaps_for(ion, field_spec)
    _require_overlap(wc, "crossed-transition")
    return GateSchedule(name="deactivate+X", segments=(
        _optical_pi(("a0", "p1"), wc, b_ac_t, "lower 0 (crossed)"),
        _optical_pi(("a1", "p0"), wc, b_ac_t, "lower 1 (crossed)"),
    ))


def x_gate_schedule(ion: IonSpec, field_spec: FieldSpec,
                    b_ac_t: float) -> GateSchedule:
    """Fast X on the *passive* nuclear qubit via an excited shelf level.

    Three pi pulses through the excited manifold (pi(p_d - a_s), crossed
    pi(p_other - a_s), pi(p_d - a_s)) swap the two nuclear levels on the
    electronic-transition timescale instead of the nuclear Rabi timescale.
    Pulse durations follow the characteristic magnetic-dipole estimate
    hbar/(mu_B B_ac) divided by the nuclear overlap of each transition, so
    the total is 3 hbar/(mu_B B_ac) scaled by the overlap factors (about
    48 ns at 1 mT for spin 1/2 and a 90 degree axis tilt, against 35 ns for
    the bare estimate; both are far below the ~21 us direct nuclear drive).
    """
    w0, w1, wc = _overlaps_for(ion, field_spec)
    _require_overlap(wc, "crossed-transition")
    if w0 >= w1:
        shelf, direct, other, w_d = "a0", "p0", "p1", w0
    else:
        shelf, direct, other, w_d = "a1", "p1", "p0", w1
    _require_overlap(w_d, "direct-transition")
    t_unit = HBAR / (MU_BOHR * b_ac_t)
    omega_unit = MU_BOHR * b_ac_t / HBAR

    def pulse(transition, w, label):
        return Segment(kind="pulse", duration_s=t_unit / w,
                       transition=transition, rabi_rad_s=omega_unit * w,
                       overlap=w, label=label)

    return GateSchedule(name="passive X", segments=(
        pulse((direct, shelf), w_d, "shelve"),
        pulse((other, shelf), wc, "swap (crossed)"),
        pulse((direct, shelf), w_d, "unshelve"),
    ))


def activation_x_asymmetry(ion: IonSpec, field_spec: FieldSpec) -> float:
    """Speed ratio between activation and the crossed echo-X transition.

    Activation runs on the two direct transitions (mean overlap), the
    echo X is limited by the crossed one; their ratio quantifies how much
    slower the in-gate X-pulses are than qubit activation.
    """
    w0, w1, wc = _overlaps_for(ion, field_spec)
    _require_overlap(wc, "crossed-transition")
    return 0.5 * (w0 + w1) / wc


# ---------------------------------------------------------------------------
# closed-form fidelity bounds


def fidelity_bound_resonant(v_hz: float, j_dip_hz: float) -> float:
    """Fidelity floor 1 - (pi V / 4 J)^2 for a resonant residual coupling.

    A residual interaction V acting during the conditional-phase time
    rotates the state by V * t_cnot / hbar; valid only while V << J.
    """
    v, j = abs(v_hz), abs(j_dip_hz)
    if j == 0.0:
        raise InfeasibleError("fidelity bound undefined at zero coupling")
    if v >= 0.5 * j:
        warnings.warn(
            f"resonant bound invalid: residual V = {v:.3g} Hz is not small "
            f"against J = {j:.3g} Hz", RegimeWarning, stacklevel=2)
    return max(0.0, 1.0 - (math.pi * v / (4.0 * j)) ** 2)


def fidelity_bound_offresonant(v_hz: float, delta_hz: float) -> float:
    """Fidelity floor 1 - (2 V / Delta)^2 for a detuned residual coupling.

    Second-order admixture of a state detuned by Delta under coupling V;
    valid only while Delta >> V.
    """
    v, delta = abs(v_hz), abs(delta_hz)
    if delta == 0.0:
        raise InfeasibleError("off-resonant bound undefined at zero detuning")
    if v >= 0.5 * delta:
        warnings.warn(
            f"off-resonant bound invalid: V = {v:.3g} Hz is not small "
            f"against Delta = {delta:.3g} Hz", RegimeWarning, stacklevel=2)
    return max(0.0, 1.0 - (2.0 * v / delta) ** 2)


# ---------------------------------------------------------------------------
# perturbative encoding error scalings


def _check_hierarchy(pairs, min_ratio: float = 10.0) -> None:
    for small_name, small, big_name, big in pairs:
        if big < min_ratio * small:
            raise RegimeError(
                f"scale hierarchy violated: need {big_name} >= "
                f"{min_ratio:g} x {small_name}, got {big:.4g} Hz vs "
                f"{small:.4g} Hz")


def encoding_error_scaling(kind: str, *, j_dip_hz: float, a_j_hz: float,
                           e_z_hz: float, e_zn_hz: float, cf_gap_hz: float,
                           g_perp_over_par: float) -> tuple[float, str]:
    """Dominant residual-coupling infidelity for one qubit encoding.

    ``kind`` is "electro_nuclear" (qubit carried by nuclear projections
    dressed by the electron) or "electronic" (bare electronic doublet).
    The estimate is the largest of the perturbative suppression factors
    that protect the encoding; which factors exist depends on whether the
    transverse g-factor vanishes.  Returns (1 - F estimate, channel label).

    All scale arguments are in Hz and must respect the hierarchy
    J_dip << A_J << E_Z << CF gap (factor >= 10 each); a violation raises
    RegimeError naming the failed inequality.
    """
    if kind not in ("electro_nuclear", "electronic"):
        raise InputError(
            f"encoding kind must be 'electro_nuclear' or 'electronic', "
            f"got {kind!r}")
    j, a = abs(j_dip_hz), abs(a_j_hz)
    e_z, e_zn, cf = abs(e_z_hz), abs(e_zn_hz), abs(cf_gap_hz)
    if g_perp_over_par < 0:
        raise InputError("g_perp_over_par must be >= 0")
    _check_hierarchy((("J_dip", j, "A_J", a),
                      ("A_J", a, "E_Z", e_z),
                      ("E_Z", e_z, "CF_gap", cf)))
    if g_perp_over_par == 0.0:
        # transverse moment vanishes: flip-flops must climb to the next
        # crystal-field doublet
        terms = [((j / cf) ** 2, "residual_offresonant"),
                 ((a / cf) ** 4, "residual_offresonant")]
        if kind == "electronic":
            # the nuclear bath is not frozen out; hyperfine-mediated
            # flip-flops are only blocked by the nuclear Zeeman mismatch
            blocker = max(j, e_zn)
            terms[1] = ((a / cf) ** 4 * (j / blocker) ** 2,
                        "residual_offresonant")
        value, label = max(terms, key=lambda t: t[0])
        return value, label
    if kind == "electronic":
        # transverse moments make the two-ion flip-flop resonant: no
        # perturbative protection is left
        return 1.0, "residual_resonant"
    # hyperfine-admixed flip-flop is resonant (zero mismatch, amplitude
    # suppressed); nuclear-projection leakage is blocked by the hyperfine
    # splitting itself
    terms = [((a / e_z) ** 4, "residual_resonant"),
             ((j / a) ** 2, "residual_offresonant")]
    value, label = max(terms, key=lambda t: t[0])
    return value, label

# ---------------------------------------------------------------------------
# full gate scoring


def _g_perp_over_par(ion: IonSpec, manifold: str = "excited") -> float:
    s, _ = ion.g_tensor(manifold).principal()
    return float(s[-1] / s[0]) if s[0] > 0 else 0.0


def _residual_channel(ion: IonSpec, field_spec: FieldSpec, j_hz: float,
                      encoding_kind: str) -> tuple[float, str]:
    g = ion.g_tensor("excited")
    e_z = g.zeeman_splitting_hz(field_spec.magnitude_t,
                                field_spec.unit_vector)
    e_zn = abs(ion.nuclear_g_factor) * MU_NUCLEAR * \
        field_spec.magnitude_t / H_PLANCK
    return encoding_error_scaling(
        encoding_kind, j_dip_hz=j_hz,
        a_j_hz=ion.hyperfine_constant_hz("excited"), e_z_hz=e_z,
        e_zn_hz=e_zn, cf_gap_hz=ion.cf_gap_hz,
        g_perp_over_par=_g_perp_over_par(ion))


def cnot_report(pair: DipolePair, field_spec: FieldSpec, *,
                t2_s: float, b_ac_t: float = 1e-3,
                encoding_kind: str = "electro_nuclear",
                deactivate_during_echo: bool = True) -> GateReport:
    """Score the full activate-echo-deactivate CNOT for an ion pair.

    Wall-clock assembly (the two ions are driven in parallel, each by its
    own addressed beam; pulses within one ion are sequential):

        activate both | free t/2 | echo X on both | free t/2 | closing

    where the closing stage is, by default, the crossed deactivation that
    folds the second echo X into returning the ions to the passive
    manifold; with ``deactivate_during_echo=False`` it is a second echo X
    followed by direct deactivation, which costs roughly one extra
    crossed-rate stage.  The free-evolution time is t = 1/(8 J).

    Error channels (each a lower bound on 1 - F):
      coherence        total wall-clock time / T2
      activation_time  (single direct pi-pulse time / t_CNOT)^2 - the
                       penalty for the pulses not being instantaneous
      residual_*       perturbative encoding error from
                       ``encoding_error_scaling`` at this ion's scales
    The floor is the worst channel; ``dominant_error`` names it.
    """
    if t2_s <= 0:
        raise InputError(f"T2 must be positive, got {t2_s}")
    ions = (pair.ion1, pair.ion2)
    for ion in ions:
        validate_energy_hierarchy(ion, field_spec, pair.distance_m)
    j_hz = ising_projection(pair, field_spec)
    t_cnot = cnot_time_s(j_hz)

    stage_act = max(
        activation_schedule(i, field_spec, b_ac_t).total_time_s
        for i in ions)
    stage_x = max(
        echo_x_schedule(i, field_spec, b_ac_t).total_time_s for i in ions)
    if deactivate_during_echo:
        stage_close = max(
            crossed_deactivation_schedule(i, field_spec, b_ac_t).total_time_s
            for i in ions)
    else:
        stage_close = stage_x + stage_act
    total = t_cnot + stage_act + stage_x + stage_close

    omega0 = optical_rabi_rad_s(b_ac_t)
    t_act = 0.0
    for ion in ions:
        w0, w1, _ = _overlaps_for(ion, field_spec)
        t_act = max(t_act, SHAPED_PI_AREA / (omega0 * 0.5 * (w0 + w1)))

    res_value, res_label = max(
        (_residual_channel(i, field_spec, abs(j_hz), encoding_kind)
         for i in ions), key=lambda t: t[0])

    channels = {"coherence": total / t2_s,
                "activation_time": (t_act / t_cnot) ** 2,
                "residual_resonant": 0.0,
                "residual_offresonant": 0.0}
    channels[res_label] = res_value
    breakdown = tuple((name, channels[name]) for name in ERROR_CHANNELS)
    dominant = max(breakdown, key=lambda t: t[1])[0]
    worst = channels[dominant]
    return GateReport(total_time_s=total, f_min=max(0.0, 1.0 - worst),
                      dominant_error=dominant, breakdown=breakdown,
                      t_cnot_s=t_cnot, t_activation_pulse_s=t_act,
                      j_dip_hz=j_hz)

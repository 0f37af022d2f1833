"""Tests for gate synthesis, pulse schedules, and error budgets.

Oracles: the CNOT algebra is checked against the canonical matrix and
against state-level facts (basis action, Bell-pair entropy computed by
eigendecomposition); the echo is propagated numerically against the ideal
conditional phase; the resonant residual bound is compared with direct
propagation of a flip-flop term through the echo (they agree to ~0.1%);
the off-resonant bound is compared with the exact two-level admixture.
Schedule totals are cross-checked against the Wigner overlaps computed
independently.  The erbium-like reference numbers are pinned at full float
precision from the operating-point report.
"""

import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from renq.constants import HBAR, MU_BOHR, SPEED_OF_LIGHT
from renq.errors import (InfeasibleError, InputError, ModelError, RegimeError,
                         RegimeWarning)
from renq.gates import (
    CNOT_CANONICAL,
    ERROR_CHANNELS,
    ELECTRIC_DIPOLE_CM,
    GateReport,
    GateSchedule,
    OVERLAP_FLOOR,
    SHAPED_PI_AREA,
    Segment,
    activation_schedule,
    activation_x_asymmetry,
    c_phase_ideal,
    cnot_ideal,
    cnot_report,
    cnot_time_s,
    crossed_deactivation_schedule,
    echo_x_schedule,
    encoding_error_scaling,
    fidelity_bound_offresonant,
    fidelity_bound_resonant,
    optical_rabi_rad_s,
    spin_echo_cphase,
    x_gate_schedule,
)
from renq.ions import (DipolePair, FieldSpec, GTensor, IonSpec,
                       activation_overlaps, nuclear_axis_angle)
from renq.qcore import (IDENTITY2, SIGMA_X, SIGMA_Y, SIGMA_Z, kron,
                        min_gate_fidelity)

G_GROUND = np.array([[3.07, -3.12, 3.40],
                     [-3.12, 8.16, -5.76],
                     [3.40, -5.76, 5.79]])
G_EXCITED = np.array([[1.95, -2.21, 3.58],
                      [-2.21, 4.23, -5.00],
                      [3.58, -5.00, 7.89]])


def _er_ion(**overrides) -> IonSpec:
    kwargs = dict(
        name="er-like", electron_j_ground=7.5, electron_j_excited=6.5,
        nuclear_spin=3.5, nuclear_g_factor=-0.16,
        hyperfine_constant_ground_hz=103.6e6,
        hyperfine_constant_excited_hz=103.6e6,
        lande_g_ground=1.2, lande_g_excited=72.0 / 65.0,
        g_tensor_ground=GTensor(G_GROUND),
        g_tensor_excited=GTensor(G_EXCITED),
        cf_gap_hz=1.0e12, optical_gap_hz=195e12)
    kwargs.update(overrides)
    return IonSpec(**kwargs)


FIELD_35_132 = FieldSpec(1.0, 35.0, 132.0)
PAIR_DIRECTION = np.array([0.8271028353879583, -0.1968529838073915,
                           -0.5264501899128979])


def _er_pair(r_m: float = 1e-8) -> DipolePair:
    ion = _er_ion()
    return DipolePair(ion, ion, r_m * PAIR_DIRECTION)


SZZ = kron(SIGMA_Z, SIGMA_Z)
FLIPFLOP = 0.5 * (kron(SIGMA_X, SIGMA_X) + kron(SIGMA_Y, SIGMA_Y))


# ---------------------------------------------------------------------------
# ideal gate algebra


class TestCnotAlgebra:
    def test_synthesis_matches_canonical(self):
        u = cnot_ideal()
        assert min_gate_fidelity(CNOT_CANONICAL, u) >= 1.0 - 1e-12

    def test_global_phase_is_minus_pi_over_4(self):
        u = cnot_ideal()
        phase = u[0, 0] / CNOT_CANONICAL[0, 0]
        assert phase == pytest.approx(np.exp(-1j * math.pi / 4), abs=1e-12)
        np.testing.assert_allclose(u, phase * CNOT_CANONICAL, atol=1e-12)

    def test_basis_action(self):
        u = cnot_ideal()
        ket10 = np.array([0, 0, 1, 0], dtype=complex)
        ket11 = np.array([0, 0, 0, 1], dtype=complex)
        assert abs(ket11 @ u @ ket10) == pytest.approx(1.0, abs=1e-12)
        ket00 = np.array([1, 0, 0, 0], dtype=complex)
        assert abs(ket00 @ u @ ket00) == pytest.approx(1.0, abs=1e-12)

    def test_bell_entropy_oracle(self):
        # CNOT on (|00> + |10>)/sqrt(2) must create one full bit of
        # entanglement; the reduced state's spectrum is the oracle
        plus = np.array([1, 0, 1, 0], dtype=complex) / math.sqrt(2)
        out = cnot_ideal() @ plus
        rho = np.outer(out, out.conj()).reshape(2, 2, 2, 2)
        reduced = np.trace(rho, axis1=1, axis2=3)
        eigs = np.linalg.eigvalsh(reduced)
        np.testing.assert_allclose(eigs, [0.5, 0.5], atol=1e-12)
        entropy = -sum(p * math.log(p) for p in eigs)
        assert entropy == pytest.approx(math.log(2), abs=1e-12)

    def test_c_phase_diagonal(self):
        for sign in (1.0, -1.0):
            u = c_phase_ideal(sign)
            expected = np.exp(-1j * sign * math.pi / 4 *
                              np.array([1, -1, -1, 1]))
            np.testing.assert_allclose(np.diag(u), expected, atol=1e-12)
            np.testing.assert_allclose(u, np.diag(np.diag(u)), atol=1e-12)

    def test_unitarity(self):
        u = cnot_ideal()
        np.testing.assert_allclose(u @ u.conj().T, np.eye(4), atol=1e-12)


class TestCnotTime:
    @pytest.mark.parametrize("j", [1.0, 39582.39, -5e4, 1e-3])
    def test_time_coupling_product(self, j):
        assert cnot_time_s(j) * abs(j) == pytest.approx(0.125, rel=1e-15)

    def test_zero_coupling_infeasible(self):
        with pytest.raises(InfeasibleError, match="vanishes"):
            cnot_time_s(0.0)

    def test_nan_coupling_infeasible(self):
        with pytest.raises(InfeasibleError):
            cnot_time_s(float("nan"))


# ---------------------------------------------------------------------------
# spin echo


class TestSpinEcho:
    def test_pure_ising_gives_conditional_phase(self):
        j = 4.2e4
        u = spin_echo_cphase(j * SZZ, j)
        assert min_gate_fidelity(c_phase_ideal(1.0), u) >= 1.0 - 1e-12

    def test_negative_coupling_flips_sign(self):
        j = -4.2e4
        u = spin_echo_cphase(j * SZZ, j)
        assert min_gate_fidelity(c_phase_ideal(-1.0), u) >= 1.0 - 1e-12

    def test_large_single_ion_terms_cancel_exactly(self):
        # GHz-scale sigma-z terms against a 40 kHz coupling: the echo must
        # erase them to float precision
        j = 4.2e4
        h = j * SZZ + 3.7e9 * kron(SIGMA_Z, IDENTITY2) \
            - 1.9e9 * kron(IDENTITY2, SIGMA_Z)
        u = spin_echo_cphase(h, j)
        assert min_gate_fidelity(c_phase_ideal(1.0), u) >= 1.0 - 1e-10

    @given(a1=st.floats(-1e10, 1e10), a2=st.floats(-1e10, 1e10),
           j=st.floats(1e3, 1e6))
    @settings(max_examples=100, deadline=None)
    def test_random_sigma_z_terms_cancel(self, a1, a2, j):
        h = j * SZZ + a1 * kron(SIGMA_Z, IDENTITY2) \
            + a2 * kron(IDENTITY2, SIGMA_Z)
        u = spin_echo_cphase(h, j)
        assert min_gate_fidelity(c_phase_ideal(1.0), u) >= 1.0 - 1e-10

    def test_finite_x_duration_leaks_phase(self):
        j = 4.2e4
        h = j * SZZ + 2.0e6 * kron(SIGMA_Z, IDENTITY2)
        perfect = spin_echo_cphase(h, j)
        leaky = spin_echo_cphase(h, j, x_gate_duration_s=1e-7)
        f_perfect = min_gate_fidelity(c_phase_ideal(1.0), perfect)
        f_leaky = min_gate_fidelity(c_phase_ideal(1.0), leaky)
        assert f_perfect >= 1.0 - 1e-10
        assert f_leaky < f_perfect

    def test_shape_validated(self):
        with pytest.raises(InputError, match="4x4"):
            spin_echo_cphase(np.eye(3), 1e4)
        with pytest.raises(InputError, match=">= 0"):
            spin_echo_cphase(np.eye(4), 1e4, x_gate_duration_s=-1.0)


# ---------------------------------------------------------------------------
# pulse schedules


class TestSegments:
    def test_unknown_kind_rejected(self):
        with pytest.raises(InputError, match="kind"):
            Segment(kind="wait")

    def test_pulse_needs_transition_and_duration(self):
        with pytest.raises(InputError, match="transition|pair"):
            Segment(kind="pulse", duration_s=1e-9)
        with pytest.raises(InputError, match="duration"):
            Segment(kind="pulse", duration_s=0.0, transition=("p0", "a0"))

    def test_empty_schedule_rejected(self):
        with pytest.raises(InputError, match="segment"):
            GateSchedule(segments=())

    def test_totals(self):
        sched = GateSchedule(segments=(
            Segment(kind="pulse", duration_s=1e-9, transition=("p0", "a0")),
            Segment(kind="free", duration_s=2e-9),
            Segment(kind="unitary", label="X"),
        ))
        assert sched.total_time_s == pytest.approx(3e-9)
        assert sched.pulse_count == 1


class TestOpticalRabi:
    def test_value_at_one_millitesla(self):
        omega = optical_rabi_rad_s(1e-3)
        assert omega == pytest.approx(
            ELECTRIC_DIPOLE_CM * SPEED_OF_LIGHT * 1e-3 / HBAR, rel=1e-15)
        assert omega == pytest.approx(5.6856e7, rel=1e-4)

    def test_nonpositive_rejected(self):
        with pytest.raises(InputError):
            optical_rabi_rad_s(0.0)


class TestSchedules:
    def setup_method(self):
        self.ion = _er_ion()
        self.w0, self.w1, self.wc = activation_overlaps(
            self.ion.nuclear_spin,
            nuclear_axis_angle(self.ion, FIELD_35_132.unit_vector))
        self.base = SHAPED_PI_AREA / optical_rabi_rad_s(1e-3)

    def test_activation_two_direct_pulses(self):
        sched = activation_schedule(self.ion, FIELD_35_132, 1e-3)
        assert sched.pulse_count == 2
        assert sched.total_time_s == pytest.approx(
            self.base * (1 / self.w0 + 1 / self.w1), rel=1e-12)
        assert {s.transition for s in sched.segments} == {("p0", "a0"),
                                                          ("p1", "a1")}

    def test_echo_x_three_pulses_one_crossed(self):
        sched = echo_x_schedule(self.ion, FIELD_35_132, 1e-3)
        assert sched.pulse_count == 3
        w_d = max(self.w0, self.w1)
        assert sched.total_time_s == pytest.approx(
            self.base * (2 / w_d + 1 / self.wc), rel=1e-12)
        overlaps = [s.overlap for s in sched.segments]
        assert overlaps == [w_d, self.wc, w_d]

    def test_crossed_deactivation_two_crossed_pulses(self):
        sched = crossed_deactivation_schedule(self.ion, FIELD_35_132, 1e-3)
        assert sched.pulse_count == 2
        assert sched.total_time_s == pytest.approx(
            self.base * 2 / self.wc, rel=1e-12)
        assert all(s.overlap == self.wc for s in sched.segments)

    def test_schedules_shorten_with_stronger_drive(self):
        slow = activation_schedule(self.ion, FIELD_35_132, 1e-3)
        fast = activation_schedule(self.ion, FIELD_35_132, 2e-3)
        assert fast.total_time_s == pytest.approx(slow.total_time_s / 2,
                                                  rel=1e-12)

    def test_aligned_axes_forbid_crossed_pulses(self):
        iso = GTensor(2.0 * np.eye(3))
        ion = _er_ion(g_tensor_ground=iso, g_tensor_excited=iso)
        with pytest.raises(InfeasibleError, match="crossed"):
            echo_x_schedule(ion, FIELD_35_132, 1e-3)
        with pytest.raises(InfeasibleError, match="crossed"):
            crossed_deactivation_schedule(ion, FIELD_35_132, 1e-3)

    def test_asymmetry_at_reference_field(self):
        ratio = activation_x_asymmetry(self.ion, FIELD_35_132)
        assert ratio == pytest.approx(0.5 * (self.w0 + self.w1) / self.wc,
                                      rel=1e-12)
        assert ratio == pytest.approx(3.9920358829803484, rel=1e-9)


class TestXGateSchedule:
    def test_spin_half_perpendicular_axes(self):
        # spin-1/2 with the two magnetization axes ~90 degrees apart: all
        # three overlaps are cos(45°) = sin(45°), so the swap costs
        # 3*sqrt(2) * hbar/(mu_B B_ac) ≈ 48 ns at 1 mT
        ion = _er_ion(nuclear_spin=0.5,
                      g_tensor_ground=GTensor(2.0 * np.eye(3)),
                      g_tensor_excited=GTensor(np.diag([12.0, 0.05, 0.05])))
        field = FieldSpec(1.0, 1.0, 0.0)  # one degree off the ground axis
        gamma = nuclear_axis_angle(ion, field.unit_vector)
        assert math.degrees(gamma) == pytest.approx(90.0, abs=1.5)
        sched = x_gate_schedule(ion, field, 1e-3)
        t_unit = HBAR / (MU_BOHR * 1e-3)
        w0, w1, wc = activation_overlaps(0.5, gamma)
        assert sched.total_time_s == pytest.approx(
            t_unit * (2 / max(w0, w1) + 1 / wc), rel=1e-12)
        assert sched.total_time_s == pytest.approx(3 * math.sqrt(2) * t_unit,
                                                   rel=0.02)
        assert sched.total_time_s == pytest.approx(48.2e-9, rel=0.02)

    def test_pulse_count_and_levels(self):
        sched = x_gate_schedule(_er_ion(), FIELD_35_132, 1e-3)
        assert sched.pulse_count == 3
        # passive levels are swapped through an excited shelf
        for seg in sched.segments:
            assert any(level.startswith("a") for level in seg.transition)

    def test_overlap_floor_enforced(self):
        iso = GTensor(2.0 * np.eye(3))
        ion = _er_ion(nuclear_spin=0.5, g_tensor_ground=iso,
                      g_tensor_excited=iso)
        with pytest.raises(InfeasibleError, match="overlap"):
            x_gate_schedule(ion, FIELD_35_132, 1e-3)


# ---------------------------------------------------------------------------
# fidelity bounds vs propagation


class TestResonantBound:
    @pytest.mark.parametrize("frac", [1e-3, 5e-3, 0.02, 0.05])
    def test_matches_echo_propagation(self, frac):
        # a resonant flip-flop commutes with the echo X-pulses, so the
        # closed form must reproduce the propagated worst-case error
        j = 4.0e4
        v = frac * j
        u = spin_echo_cphase(j * SZZ + v * FLIPFLOP, j)
        e_prop = 1.0 - min_gate_fidelity(c_phase_ideal(1.0), u)
        e_bound = 1.0 - fidelity_bound_resonant(v, j)
        assert e_bound == pytest.approx((math.pi * v / (4 * j)) ** 2,
                                        rel=1e-12)
        assert e_bound == pytest.approx(e_prop, rel=2e-2)
        assert e_bound >= e_prop * (1.0 - 1e-9)

    def test_warns_outside_regime(self):
        with pytest.warns(RegimeWarning, match="not small"):
            fidelity_bound_resonant(3e4, 4e4)

    def test_zero_coupling_infeasible(self):
        with pytest.raises(InfeasibleError):
            fidelity_bound_resonant(1.0, 0.0)

    @given(frac=st.floats(1e-4, 0.04))
    @settings(max_examples=30, deadline=None)
    def test_error_monotone_in_residual(self, frac):
        j = 4.0e4
        lo = fidelity_bound_resonant(frac * j, j)
        hi = fidelity_bound_resonant(2 * frac * j, j)
        assert hi < lo


class TestOffresonantBound:
    @pytest.mark.parametrize("v_over_delta", [1e-3, 5e-3, 0.02])
    def test_matches_static_admixture(self, v_over_delta):
        # oracle: exact eigenvector of the detuned two-level block; in the
        # perturbative limit the bound sits exactly 4x above the admixed
        # population, which is the amplitude-vs-probability convention
        delta = 1.0e6
        v = v_over_delta * delta
        h2 = np.array([[0.5 * delta, v], [v, -0.5 * delta]])
        _, vecs = np.linalg.eigh(h2)
        admixture = min(abs(vecs[0, 0]) ** 2, abs(vecs[0, 1]) ** 2)
        e_bound = 1.0 - fidelity_bound_offresonant(v, delta)
        assert e_bound == pytest.approx((2 * v / delta) ** 2, rel=1e-12)
        assert e_bound == pytest.approx(4.0 * admixture,
                                        rel=5 * v_over_delta ** 2 + 1e-4)

    def test_conservative_against_echo_propagation(self):
        # the echo additionally suppresses detuned flip-flops, so the
        # static estimate must stay on the safe side of the propagation
        j = 4.0e4
        for v_frac, d_over_v in ((0.02, 10), (0.02, 40), (0.05, 25)):
            v = v_frac * j
            delta = d_over_v * v
            h = j * SZZ + v * FLIPFLOP + 0.5 * delta * (
                kron(SIGMA_Z, IDENTITY2) - kron(IDENTITY2, SIGMA_Z))
            u = spin_echo_cphase(h, j)
            e_prop = 1.0 - min_gate_fidelity(c_phase_ideal(1.0), u)
            e_bound = 1.0 - fidelity_bound_offresonant(v, delta)
            assert e_bound >= e_prop

    def test_warns_outside_regime(self):
        with pytest.warns(RegimeWarning, match="not small"):
            fidelity_bound_offresonant(6e5, 1e6)

    def test_zero_detuning_infeasible(self):
        with pytest.raises(InfeasibleError):
            fidelity_bound_offresonant(1.0, 0.0)


# ---------------------------------------------------------------------------
# encoding error scalings


class TestEncodingErrorScaling:
    SCALES = dict(j_dip_hz=1e4, a_j_hz=1e8, e_z_hz=5e10, e_zn_hz=1e5,
                  cf_gap_hz=1e12)

    def test_electro_nuclear_transverse(self):
        # hyperfine admixture (A/E_Z)^4 against nuclear-spin leakage (J/A)^2
        value, label = encoding_error_scaling(
            "electro_nuclear", g_perp_over_par=0.3, **self.SCALES)
        expected = max((1e8 / 5e10) ** 4, (1e4 / 1e8) ** 2)
        assert value == pytest.approx(expected, rel=1e-12)
        assert value == pytest.approx(1e-8, rel=1e-6)
        assert label == "residual_offresonant"

    def test_electro_nuclear_axial(self):
        value, label = encoding_error_scaling(
            "electro_nuclear", g_perp_over_par=0.0, **self.SCALES)
        expected = max((1e4 / 1e12) ** 2, (1e8 / 1e12) ** 4)
        assert value == pytest.approx(expected, rel=1e-12)
        assert label == "residual_offresonant"

    def test_electronic_transverse_is_unprotected(self):
        value, label = encoding_error_scaling(
            "electronic", g_perp_over_par=0.3, **self.SCALES)
        assert value == 1.0
        assert label == "residual_resonant"

    def test_electronic_axial(self):
        # hyperfine-mediated flip-flop blocked only by the nuclear Zeeman
        value, label = encoding_error_scaling(
            "electronic", g_perp_over_par=0.0, **self.SCALES)
        blocked = (1e8 / 1e12) ** 4 * (1e4 / 1e5) ** 2
        expected = max((1e4 / 1e12) ** 2, blocked)
        assert value == pytest.approx(expected, rel=1e-12)
        assert label == "residual_offresonant"

    def test_axial_beats_transverse_for_electronic(self):
        axial, _ = encoding_error_scaling(
            "electronic", g_perp_over_par=0.0, **self.SCALES)
        resonant, _ = encoding_error_scaling(
            "electronic", g_perp_over_par=0.3, **self.SCALES)
        assert axial < 1e-6 < resonant

    def test_hierarchy_violation_names_inequality(self):
        bad = dict(self.SCALES, j_dip_hz=5e7)
        with pytest.raises(RegimeError, match="A_J >= 10 x J_dip"):
            encoding_error_scaling("electro_nuclear", g_perp_over_par=0.3,
                                   **bad)
        bad = dict(self.SCALES, e_z_hz=2e8)
        with pytest.raises(RegimeError, match="E_Z >= 10 x A_J"):
            encoding_error_scaling("electro_nuclear", g_perp_over_par=0.3,
                                   **bad)
        bad = dict(self.SCALES, cf_gap_hz=1e11)
        with pytest.raises(RegimeError, match="CF_gap >= 10 x E_Z"):
            encoding_error_scaling("electro_nuclear", g_perp_over_par=0.3,
                                   **bad)

    def test_bad_kind_rejected(self):
        with pytest.raises(InputError, match="kind"):
            encoding_error_scaling("magic", g_perp_over_par=0.1,
                                   **self.SCALES)

    def test_negative_anisotropy_rejected(self):
        with pytest.raises(InputError, match="g_perp_over_par"):
            encoding_error_scaling("electro_nuclear", g_perp_over_par=-0.1,
                                   **self.SCALES)

    @given(j=st.floats(1e2, 1e6))
    @settings(max_examples=30, deadline=None)
    def test_error_grows_with_coupling(self, j):
        lo, _ = encoding_error_scaling("electro_nuclear",
                                       g_perp_over_par=0.3,
                                       **{**self.SCALES, "j_dip_hz": j})
        hi, _ = encoding_error_scaling("electro_nuclear",
                                       g_perp_over_par=0.3,
                                       **{**self.SCALES, "j_dip_hz": 2 * j})
        assert hi >= lo


# ---------------------------------------------------------------------------
# gate report


class TestGateReportInvariants:
    def _breakdown(self, coh, act, res_r=0.0, res_o=0.0):
        return (("coherence", coh), ("activation_time", act),
                ("residual_resonant", res_r), ("residual_offresonant", res_o))

    def test_floor_equals_worst_channel(self):
        rep = GateReport(total_time_s=1e-6, f_min=1.0 - 3e-4,
                         dominant_error="coherence",
                         breakdown=self._breakdown(3e-4, 1e-4))
        assert rep.channel("coherence") == 3e-4

    def test_saturated_floor_allowed(self):
        # a channel estimate above 1 clamps the fidelity at zero
        rep = GateReport(total_time_s=1e-6, f_min=0.0,
                         dominant_error="activation_time",
                         breakdown=self._breakdown(0.1, 2.0))
        assert rep.f_min == 0.0

    def test_floor_below_worst_rejected(self):
        with pytest.raises(ModelError, match="below the largest"):
            GateReport(total_time_s=1e-6, f_min=0.9999,
                       dominant_error="coherence",
                       breakdown=self._breakdown(3e-3, 1e-4))

    def test_unknown_channel_rejected(self):
        with pytest.raises(ModelError, match="channel"):
            GateReport(total_time_s=1e-6, f_min=1.0, dominant_error="drift",
                       breakdown=self._breakdown(0.0, 0.0))

    def test_channel_lookup_unknown_name(self):
        rep = GateReport(total_time_s=1e-6, f_min=1.0 - 1e-4,
                         dominant_error="coherence",
                         breakdown=self._breakdown(1e-4, 0.0))
        with pytest.raises(InputError, match="channel"):
            rep.channel("drift")


class TestCnotReport:
    def test_reference_operating_point(self):
        rep = cnot_report(_er_pair(), FIELD_35_132, t2_s=4.4e-3)
        assert rep.j_dip_hz == pytest.approx(39582.39095574977, rel=1e-12)
        assert rep.t_cnot_s == pytest.approx(3.157969920001571e-6, rel=1e-12)
        assert rep.total_time_s == pytest.approx(4.207674005308616e-6,
                                                 rel=1e-12)
        assert rep.f_min == pytest.approx(0.999043710453339, abs=1e-12)
        assert rep.dominant_error == "coherence"
        assert rep.channel("coherence") == pytest.approx(
            rep.total_time_s / 4.4e-3, rel=1e-12)

    def test_breakdown_channel_order(self):
        rep = cnot_report(_er_pair(), FIELD_35_132, t2_s=4.4e-3)
        assert tuple(name for name, _ in rep.breakdown) == ERROR_CHANNELS

    def test_stage_accounting_is_parallel(self):
        # identical ions: each stage costs one single-ion schedule, not two
        ion = _er_ion()
        rep = cnot_report(_er_pair(), FIELD_35_132, t2_s=4.4e-3)
        act = activation_schedule(ion, FIELD_35_132, 1e-3).total_time_s
        echo = echo_x_schedule(ion, FIELD_35_132, 1e-3).total_time_s
        close = crossed_deactivation_schedule(ion, FIELD_35_132,
                                              1e-3).total_time_s
        assert rep.total_time_s == pytest.approx(
            rep.t_cnot_s + act + echo + close, rel=1e-12)

    def test_unmerged_deactivation_costs_extra(self):
        ion = _er_ion()
        merged = cnot_report(_er_pair(), FIELD_35_132, t2_s=4.4e-3)
        unmerged = cnot_report(_er_pair(), FIELD_35_132, t2_s=4.4e-3,
                               deactivate_during_echo=False)
        act = activation_schedule(ion, FIELD_35_132, 1e-3).total_time_s
        echo = echo_x_schedule(ion, FIELD_35_132, 1e-3).total_time_s
        close = crossed_deactivation_schedule(ion, FIELD_35_132,
                                              1e-3).total_time_s
        assert unmerged.total_time_s - merged.total_time_s == pytest.approx(
            act + echo - close, rel=1e-9)
        # at this field angle the crossed closing stage costs within 0.1%
        # of the echo-X + direct route it replaces (asymmetry ~ 4), so the
        # merge is about pulse count, not wall-clock time
        assert abs(unmerged.total_time_s - merged.total_time_s) \
            < 1e-3 * merged.total_time_s

    def test_activation_pulse_time(self):
        ion = _er_ion()
        rep = cnot_report(_er_pair(), FIELD_35_132, t2_s=4.4e-3)
        w0, w1, _ = activation_overlaps(
            ion.nuclear_spin,
            nuclear_axis_angle(ion, FIELD_35_132.unit_vector))
        expected = SHAPED_PI_AREA / (optical_rabi_rad_s(1e-3)
                                     * 0.5 * (w0 + w1))
        assert rep.t_activation_pulse_s == pytest.approx(expected, rel=1e-12)

    def test_coherence_channel_scales_with_t2(self):
        short = cnot_report(_er_pair(), FIELD_35_132, t2_s=1e-3)
        long = cnot_report(_er_pair(), FIELD_35_132, t2_s=8e-3)
        assert short.channel("coherence") == pytest.approx(
            8.0 * long.channel("coherence"), rel=1e-12)
        assert short.f_min < long.f_min

    def test_stronger_drive_shortens_gate(self):
        weak = cnot_report(_er_pair(), FIELD_35_132, t2_s=4.4e-3,
                           b_ac_t=1e-3)
        strong = cnot_report(_er_pair(), FIELD_35_132, t2_s=4.4e-3,
                             b_ac_t=2e-3)
        assert strong.total_time_s < weak.total_time_s
        assert strong.t_cnot_s == weak.t_cnot_s  # free evolution unchanged

    def test_far_pair_is_coherence_limited(self):
        # weak coupling: long conditional phase, coherence dominates
        rep = cnot_report(_er_pair(2.2e-8), FIELD_35_132, t2_s=4.4e-3)
        assert rep.dominant_error == "coherence"
        assert rep.f_min > 0.99

    def test_electronic_encoding_is_resonant_limited(self):
        rep = cnot_report(_er_pair(), FIELD_35_132, t2_s=4.4e-3,
                          encoding_kind="electronic")
        assert rep.dominant_error == "residual_resonant"
        assert rep.f_min == 0.0

    def test_nonpositive_t2_rejected(self):
        with pytest.raises(InputError, match="T2"):
            cnot_report(_er_pair(), FIELD_35_132, t2_s=0.0)

    def test_hierarchy_guard_propagates(self):
        # 1 nm separation pushes J above A/10: not a valid operating point
        with pytest.raises(RegimeError):
            cnot_report(_er_pair(1e-9), FIELD_35_132, t2_s=4.4e-3)

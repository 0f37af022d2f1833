"""Truncated-Gaussian pulse propagation and pi-pulse duration optimization.

A selective pulse drives a two-level transition with envelope
``Omega(t) = Omega0 * exp(-(t/T)^2)`` for ``|t| <= T_cut`` (zero outside) at
detuning ``dw`` from the transition, giving, in the rotating frame,

    H(t) = (dw/2) sigma_z + (Omega(t)/2) sigma_x        [rad/s].

The resonant member of an ensemble should be flipped (pi rotation), while
detuned spectators should be left alone.  The figure of merit used across
this module is therefore the unwanted-transition probability
``|<1|U|0>|^2`` of a spectator (and one minus it for the resonant target),
which equals ``1 - F_min`` against the intended gate maximized over
longitudinal-phase gauges; deterministic phases accumulated along sigma_z
(including the AC-Stark shift) are frame choices, not errors, and are
excluded by construction.

The central optimization problem: given an error budget and the smallest
detuning present, find the shortest pulse (duration ``2*T_cut``) whose error
stays below budget for every detuning at or above the minimum.  The problem
is scale-free - only ``x = T_cut/T`` and ``y = dw*T/2`` matter - and all
search work happens in those variables.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq
from scipy.special import erf

from .errors import InfeasibleError, InputError, RegimeWarning
from .qcore import SIGMA_X, SIGMA_Z

SQRT3 = math.sqrt(3.0)
SQRT_PI = math.sqrt(math.pi)

# Fourth-order commutator-free (two-exponential) integrator coefficients:
# Gauss nodes c +/- and the cross weights.
_CF4_NODE_OFFSET = SQRT3 / 6.0          # nodes at 1/2 -/+ sqrt(3)/6
_CF4_W_SMALL = 0.25 - SQRT3 / 6.0
_CF4_W_LARGE = 0.25 + SQRT3 / 6.0

DEFAULT_RAD_PER_STEP = 0.08  # max rotation angle per integrator step


@dataclass(frozen=True)
class PulseSpec:
    """Truncated-Gaussian drive applied to one two-level transition.

    rabi_peak : peak Rabi angular frequency Omega0 (rad/s)
    width     : Gaussian 1/e half-width T (s)
    cut       : truncation half-time T_cut (s); total duration is 2*cut
    detuning  : transition detuning from the drive (rad/s); 0 = resonant
    """

    rabi_peak: float
    width: float
    cut: float
    detuning: float = 0.0

    def __post_init__(self):
        if self.rabi_peak <= 0 or self.width <= 0 or self.cut <= 0:
            raise InputError(
                "rabi_peak, width and cut must all be positive, got "
                f"({self.rabi_peak}, {self.width}, {self.cut})")

    @property
    def duration(self) -> float:
        return 2.0 * self.cut


def rwa_hamiltonian(pulse: PulseSpec, t: float) -> np.ndarray:
    """Rotating-frame Hamiltonian of the drive at time ``t``, in rad/s.

    ``H(t) = (detuning/2) sigma_z + (Omega(t)/2) sigma_x`` with the
    truncated envelope; outside ``|t| <= cut`` only the detuning term
    survives.  Multiply by hbar for an energy.
    """
    if abs(t) <= pulse.cut:
        omega = pulse.rabi_peak * math.exp(-((t / pulse.width) ** 2))
    else:
        omega = 0.0
    return 0.5 * pulse.detuning * SIGMA_Z + 0.5 * omega * SIGMA_X


def solve_pi_width(rabi_peak: float, cut: float) -> float:
    """Width T for which the truncated pulse area is exactly pi.

    Solves ``Omega0 * T * sqrt(pi) * erf(cut/T) = pi``; a solution exists
    iff ``Omega0 * cut > pi/2`` (otherwise even the untruncated tail cannot
    supply the area) and is unique because the area is strictly increasing
    in T.  Relative accuracy ~1e-14.
    """
    if rabi_peak <= 0 or cut <= 0:
        raise InputError("rabi_peak and cut must be positive")
    if rabi_peak * cut <= 0.5 * math.pi * (1.0 + 1e-12):
        raise InfeasibleError(
            f"pulse area infeasible: rabi_peak*cut = {rabi_peak * cut:.6g} "
            f"<= pi/2; no width reaches a pi rotation")

    def area_defect(t_width: float) -> float:
        return rabi_peak * t_width * erf(cut / t_width) - SQRT_PI

    lo = 1e-12 * cut
    hi = max(cut, SQRT_PI / rabi_peak)
    for _ in range(200):
        if area_defect(hi) > 0.0:
            break
        hi *= 2.0
    else:
        raise InfeasibleError(
            "pulse area infeasible: could not bracket a pi-area width")
    return brentq(area_defect, lo, hi, rtol=1e-14, xtol=1e-300 + 1e-30)


def _first_order_error(x: np.ndarray | float, y: np.ndarray | float):
    """Perturbative spectator flip probability in scale-free variables.

    ``x = cut/width``, ``y = |detuning|*width/2``.  Valid for y >> x-ish
    overlap regimes; callers outside that regime get warned by the public
    wrapper.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    pref = np.pi / (2.0 * erf(x))
    osc = np.exp(-x * x) * (x * np.cos(2 * x * y) - y * np.sin(2 * x * y))
    osc = osc / (SQRT_PI * (x * x + y * y))
    amp = np.exp(-y * y) - osc
    return (pref * amp) ** 2


def pulse_error_first_order(pulse: PulseSpec) -> float:
    """First-order (perturbative) error of a solved pi pulse at a detuning.

    For a detuned spectator this is the predicted flip probability; the
    expression assumes the detuning dominates the Rabi frequency and a
    RegimeWarning is issued otherwise.
    """
    if abs(pulse.detuning) < 3.0 * pulse.rabi_peak:
        warnings.warn(
            "first-order pulse error requested at |detuning| < 3*rabi_peak; "
            "the perturbative expression is unreliable here",
            RegimeWarning, stacklevel=2)
    x = pulse.cut / pulse.width
    y = abs(pulse.detuning) * pulse.width / 2.0
    return float(_first_order_error(x, y))


def _su2_rotations(chi: np.ndarray, zeta: np.ndarray) -> np.ndarray:
    """exp(-i*(chi*sigma_x + zeta*sigma_z)) for broadcastable angle arrays."""
    chi, zeta = np.broadcast_arrays(chi, zeta)
    r = np.hypot(chi, zeta)
    cos_r = np.cos(r)
    sinc_r = np.sinc(r / np.pi)  # sin(r)/r, safe at r=0
    u = np.empty(chi.shape + (2, 2), dtype=complex)
    u[..., 0, 0] = cos_r - 1j * zeta * sinc_r
    u[..., 1, 1] = cos_r + 1j * zeta * sinc_r
    u[..., 0, 1] = -1j * chi * sinc_r
    u[..., 1, 0] = -1j * chi * sinc_r
    return u


def _compose_time_ordered(mats: np.ndarray) -> np.ndarray:
    """Product mats[-1] @ ... @ mats[0] via pairwise (log-depth) reduction."""
    while mats.shape[0] > 1:
        n = mats.shape[0]
        paired = np.matmul(mats[1 : n - n % 2 : 2], mats[0 : n - n % 2 : 2])
        if n % 2:
            paired = np.concatenate([paired, mats[-1:]], axis=0)
        mats = paired
    return mats[0]


def _propagate_two_level_chunk(rabi_peak: float, width: float, cut: float,
                               detunings: np.ndarray,
                               rad_per_step: float) -> np.ndarray:
    """Batched propagator over a chunk of detunings; returns (B, 2, 2)."""
    h_norm = math.hypot(float(np.max(np.abs(detunings))) / 2.0,
                        rabi_peak / 2.0)
    n_steps = max(8, math.ceil(2.0 * cut * h_norm / rad_per_step))
    h = 2.0 * cut / n_steps
    k = np.arange(n_steps)
    t_node_1 = -cut + (k + 0.5 - _CF4_NODE_OFFSET) * h
    t_node_2 = -cut + (k + 0.5 + _CF4_NODE_OFFSET) * h
    om1 = rabi_peak * np.exp(-((t_node_1 / width) ** 2))
    om2 = rabi_peak * np.exp(-((t_node_2 / width) ** 2))
    zeta = (h * detunings / 4.0)[None, :]  # sigma_z angle per exponential
    chi_first = (0.5 * h * (_CF4_W_LARGE * om1 + _CF4_W_SMALL * om2))[:, None]
    chi_second = (0.5 * h * (_CF4_W_SMALL * om1 + _CF4_W_LARGE * om2))[:, None]
    step = np.matmul(_su2_rotations(chi_second, zeta),
                     _su2_rotations(chi_first, zeta))
    return _compose_time_ordered(step)


def gaussian_flip_amplitudes(rabi_peak: float, width: float, cut: float,
                             detunings, *,
                             rad_per_step: float = DEFAULT_RAD_PER_STEP
                             ) -> np.ndarray:
    """Complex flip amplitudes <1|U|0> for a batch of detunings.

    The pulse window [-cut, +cut] is integrated with a fourth-order
    two-exponential scheme; outside the window the Hamiltonian is a pure
    sigma_z rotation which cannot change |<1|U|0>| and is skipped.
    Detunings are processed in magnitude-sorted chunks so the step count
    adapts to each chunk's rotation rate.
    """
    det = np.atleast_1d(np.asarray(detunings, dtype=float))
    if det.size == 0:
        return np.zeros(0, dtype=complex)
    order = np.argsort(np.abs(det), kind="stable")
    sorted_det = det[order]
    out = np.empty(det.size, dtype=complex)
    start = 0
    while start < det.size:
        base = max(abs(sorted_det[start]), rabi_peak)
        stop = start
        while stop < det.size and abs(sorted_det[stop]) <= 2.0 * base:
            stop += 1
        u = _propagate_two_level_chunk(
            rabi_peak, width, cut, sorted_det[start:stop], rad_per_step)
        out[order[start:stop]] = u[:, 1, 0]
        start = stop
    return out


def gaussian_pulse_unitary(pulse: PulseSpec, *,
                           rad_per_step: float = DEFAULT_RAD_PER_STEP
                           ) -> np.ndarray:
    """Full 2x2 propagator of the pulse window for one detuning."""
    return _propagate_two_level_chunk(
        pulse.rabi_peak, pulse.width, pulse.cut,
        np.array([pulse.detuning], dtype=float), rad_per_step)[0]


def pulse_error_exact(pulse: PulseSpec, *,
                      rad_per_step: float = DEFAULT_RAD_PER_STEP) -> float:
    """Error of the selective pi pulse on a system at the given detuning.

    A resonant system (detuning exactly 0) is supposed to flip: the error is
    one minus the flip probability.  A detuned spectator is supposed to stay
    put: the error is the flip probability itself.  Both readings equal
    ``1 - F_min(intended gate, U)`` maximized over longitudinal-phase
    gauges; the discontinuity between the two roles at detuning -> 0 is
    physical (a barely-detuned system cannot be discriminated and simply
    flips along with the target).
    """
    amp = gaussian_flip_amplitudes(
        pulse.rabi_peak, pulse.width, pulse.cut, [pulse.detuning],
        rad_per_step=rad_per_step)[0]
    p_flip = min(1.0, float(abs(amp)) ** 2)
    return 1.0 - p_flip if pulse.detuning == 0.0 else p_flip


@dataclass(frozen=True)
class PulseOptimizationResult:
    """Outcome of the shortest-selective-pi-pulse search."""

    pi_time: float            # total duration 2*cut (s)
    rabi_peak: float          # rad/s
    width: float              # s
    cut: float                # s
    detuning_min: float       # rad/s, smallest spectator detuning guarded
    threshold: float          # requested error budget
    achieved_error: float     # worst spectator error at the optimum
    mode: str                 # "full" or "first_order"
    detuning_grid: np.ndarray = field(repr=False)  # guarded detunings (rad/s)
    shape_x: float = 0.0      # cut/width at the optimum
    shape_y: float = 0.0      # detuning_min*width/2 at the optimum

    @property
    def scaled_pi_time(self) -> float:
        """Dimensionless product pi_time * detuning_min."""
        return self.pi_time * self.detuning_min

    @property
    def rabi_over_detuning(self) -> float:
        return self.rabi_peak / self.detuning_min


_GRID_POINTS = 64
_GRID_SPAN = 16.0
_OPT_CACHE: dict[tuple, tuple] = {}


def _refine_peaks(err: np.ndarray, y: np.ndarray, eval_fn) -> float:
    """Parabolic refinement of interior local maxima of err(y)."""
    worst = float(err.max())
    idx = np.flatnonzero((err[1:-1] >= err[:-2]) & (err[1:-1] >= err[2:])) + 1
    if idx.size == 0:
        return worst
    y_l, y_c, y_r = y[idx - 1], y[idx], y[idx + 1]
    e_l, e_c, e_r = err[idx - 1], err[idx], err[idx + 1]
    num = (y_c - y_l) ** 2 * (e_c - e_r) - (y_c - y_r) ** 2 * (e_c - e_l)
    den = (y_c - y_l) * (e_c - e_r) - (y_c - y_r) * (e_c - e_l)
    with np.errstate(invalid="ignore", divide="ignore"):
        y_v = y_c - 0.5 * num / den
    y_v = np.where(np.isfinite(y_v), y_v, y_c)
    y_v = np.clip(y_v, y_l, y_r)
    refined = eval_fn(y_v)
    return max(worst, float(refined.max()))


def _radiation_envelope(x: float, y: float) -> float:
    """Worst-phase envelope of the truncation-radiation error term.

    The sharp cutoff at |t| = cut radiates a spectral tail whose flip
    amplitude oscillates with detuning under the envelope
    ``(pi/(2 erf x)) * exp(-x^2) / sqrt(pi (x^2 + y^2))``.  Its square is
    the error this tail causes when its phase aligns constructively.  The
    optimizer budgets this envelope rather than the phase-exact tail:
    pulses that only meet the error budget because the radiation happens to
    interfere destructively at every guarded detuning are rejected as
    non-robust (the alignment is specific to one detuning pattern), which
    also keeps the numeric optimum on the branch the asymptotic analysis
    describes.
    """
    amp = (np.pi / (2.0 * erf(x))) * math.exp(-x * x) / math.sqrt(
        math.pi * (x * x + y * y))
    return amp * amp


def _worst_spectator_error(x: float, y_min: float, mode: str,
                           n_grid: int, span: float,
                           rad_per_step: float) -> float:
    """sup over detunings >= y_min (scale-free) of the spectator error.

    Includes the phase-free radiation envelope at the guard detuning (see
    ``_radiation_envelope``), so the returned value can exceed the largest
    pointwise error on the grid.
    """
    u = np.geomspace(1.0, span, n_grid)
    y = y_min * u
    if mode == "first_order":
        def eval_fn(yv):
            return _first_order_error(x, yv)
    else:
        rabi = SQRT_PI / erf(x)  # width = 1 units

        def eval_fn(yv):
            amps = gaussian_flip_amplitudes(
                rabi, 1.0, x, 2.0 * np.asarray(yv, dtype=float),
                rad_per_step=rad_per_step)
            return np.abs(amps) ** 2

    err = np.asarray(eval_fn(y), dtype=float)
    return max(_refine_peaks(err, y, eval_fn),
               _radiation_envelope(x, y_min))


def _minimal_guard_detuning(x: float, threshold: float, mode: str,
                            n_grid: int, span: float, rad_per_step: float,
                            rel_tol: float) -> tuple[float, float]:
    """Smallest y_min whose spectator-error sup stays below threshold."""
    s_scale = math.sqrt(max(math.log(1.0 / threshold), 1.0) / 2.0)

    def feasible(ym: float) -> tuple[bool, float]:
        e = _worst_spectator_error(x, ym, mode, n_grid, span, rad_per_step)
        return e <= threshold, e

    lo = max(0.25, s_scale - 1.2 / s_scale - 0.35)
    hi = s_scale + 1.6 / s_scale + 0.35
    ok_lo, e_lo = feasible(lo)
    while ok_lo and lo > 0.05:
        lo *= 0.6
        ok_lo, e_lo = feasible(lo)
    if ok_lo:
        return lo, e_lo
    ok_hi, e_hi = feasible(hi)
    grown = 0
    while not ok_hi:
        hi += 0.75
        grown += 1
        if grown > 12:
            # harshly truncated pulses radiate a power-law spectral tail;
            # the guard detuning may sit far beyond any sensible optimum
            raise InfeasibleError(
                f"could not reach error threshold {threshold:g} at "
                f"truncation x={x:g}")
        ok_hi, e_hi = feasible(hi)
    while hi - lo > rel_tol * hi:
        mid = 0.5 * (lo + hi)
        ok, e = feasible(mid)
        if ok:
            hi, e_hi = mid, e
        else:
            lo = mid
    return hi, e_hi


def optimize_pi_pulse(error_threshold: float, detuning_min: float, *,
                      mode: str = "full", search: str | None = None,
                      n_grid: int = _GRID_POINTS,
                      grid_span: float = _GRID_SPAN, rel_tol: float = 1e-4,
                      rad_per_step: float = DEFAULT_RAD_PER_STEP
                      ) -> PulseOptimizationResult:
    """Shortest selective pi pulse with spectator errors below threshold.

    Searches truncation ratio and width so that the flip probability stays
    below ``error_threshold`` for every detuning from ``detuning_min`` up to
    ``grid_span * detuning_min`` (checked on ``n_grid`` log-spaced points
    with parabolic peak refinement; beyond the span the error envelope only
    falls).  ``mode`` selects the error model: "full" integrates the
    time evolution, "first_order" uses the perturbative expression.

    ``search`` sets the resolution of the duration scan.  The error of the
    optimized pulse oscillates with duration (a Rabi-like comb of period
    4*pi/detuning_min in duration), and the two settings treat that comb
    differently:

    - "scan" samples the truncation ratio at quarter-comb resolution,
      which resolves the comb but does not chase interference dips narrower
      than it.  This yields the smooth envelope-like duration curve that
      propagation-based timing estimates are built on.
    - "refined" adds golden-section refinement between scan points.  At
      loose thresholds it can land in narrow interference pockets and
      return durations noticeably below the scan curve.  Such pulses are
      valid solutions of the idealized model, but their error budget relies
      on the guard detuning sitting at a precise comb phase.

    When ``search`` is omitted it follows the standard construction of each
    error model's duration curve: closed-form "first_order" durations are
    refined to their true optimum, while propagation-based "full" durations
    use the period-scale scan.

    The search is scale-free; results for one ``detuning_min`` rescale
    exactly to any other.  Deterministic for fixed arguments.
    """
    if not (0.0 < error_threshold < 0.5):
        raise InputError(
            f"error_threshold must lie in (0, 0.5), got {error_threshold}")
    if detuning_min <= 0:
        raise InputError(f"detuning_min must be positive, got {detuning_min}")
    if mode not in ("full", "first_order"):
        raise InputError(f"unknown mode {mode!r}")
    if search is None:
        search = "refined" if mode == "first_order" else "scan"
    if search not in ("scan", "refined"):
        raise InputError(f"unknown search {search!r}")

    key = (mode, search, float(np.float64(error_threshold)), n_grid,
           grid_span, rel_tol, rad_per_step)
    if key not in _OPT_CACHE:
        _OPT_CACHE[key] = _optimize_scale_free(
            error_threshold, mode, search, n_grid, grid_span, rel_tol,
            rad_per_step)
    x_best, y_best, err_best = _OPT_CACHE[key]

    width = 2.0 * y_best / detuning_min
    cut = x_best * width
    rabi = SQRT_PI / (width * erf(x_best))
    u = np.geomspace(1.0, grid_span, n_grid)
    return PulseOptimizationResult(
        pi_time=2.0 * cut, rabi_peak=rabi, width=width, cut=cut,
        detuning_min=detuning_min, threshold=error_threshold,
        achieved_error=err_best, mode=mode,
        detuning_grid=detuning_min * u, shape_x=x_best, shape_y=y_best)


def _optimize_scale_free(threshold: float, mode: str, search: str,
                         n_grid: int, span: float, rel_tol: float,
                         rad_per_step: float) -> tuple[float, float, float]:
    s_scale = math.sqrt(math.log(1.0 / threshold) / 2.0)
    cache: dict[float, tuple[float, float, float]] = {}

    def tau_of(x: float) -> float:
        x = float(x)
        if x not in cache:
            try:
                ym, err = _minimal_guard_detuning(
                    x, threshold, mode, n_grid, span, rad_per_step, rel_tol)
            except InfeasibleError:
                cache[x] = (math.inf, math.nan, math.nan)
            else:
                cache[x] = (4.0 * x * ym, ym, err)
        return cache[x][0]

    x_lo = max(0.55, s_scale - 1.15)
    x_hi = s_scale + 1.0
    # Quarter-comb sampling: the scaled duration 4*x*y oscillates with a
    # comb period of 4*pi, so steps of pi/(4*y) ~ pi/(4*s_scale) in x change
    # the duration by about a quarter period.
    dx = 0.25 * math.pi / s_scale
    n_scan = max(7, int(math.ceil((x_hi - x_lo) / dx)) + 1)
    xs = np.linspace(x_lo, x_hi, n_scan)
    taus = [tau_of(x) for x in xs]
    if not np.isfinite(taus).any():
        raise InfeasibleError(
            f"no truncation ratio reaches error threshold {threshold:g}")
    if search == "refined":
        i_best = int(np.argmin(taus))
        a = xs[max(0, i_best - 1)]
        b = xs[min(len(xs) - 1, i_best + 1)]
        # golden-section polish inside the best scan bracket
        invphi = (math.sqrt(5.0) - 1.0) / 2.0
        c = b - invphi * (b - a)
        d = a + invphi * (b - a)
        fc, fd = tau_of(c), tau_of(d)
        for _ in range(18):
            if fc < fd:
                b, d, fd = d, c, fc
                c = b - invphi * (b - a)
                fc = tau_of(c)
            else:
                a, c, fc = c, d, fd
                d = a + invphi * (b - a)
                fd = tau_of(d)
    candidates = sorted(cache.items(), key=lambda kv: kv[1][0])
    x_best, (tau, y_best, err_best) = candidates[0]
    return x_best, y_best, err_best


# ---------------------------------------------------------------------------
# Analytic (asymptotic) optimal duration


def analytic_gate_time(error_threshold: float, *,
                       phase: str = "tracked") -> float:
    """Asymptotic shortest scaled pi time, ``pi_time * detuning_min``.

    Evaluates the closed-form optimum
    ``2*log(1/eps) - log(log(1/eps)/2) + 4*s(eps)`` where the order-one
    correction ``s`` minimizes the sum of the width and truncation
    corrections subject to the perturbative error staying below budget at
    the guarded detuning and at every oscillation peak beyond it.

    ``phase`` selects how the oscillation phase of the constraint is set:
    "tracked" (default) solves it self-consistently with the optimum, which
    follows the numerically optimized duration closely; "leading" drops the
    slowly-drifting corrections, making the oscillatory component exactly
    2*pi-periodic in log(1/eps).
    """
    if not (1e-12 < error_threshold < 0.05):
        raise InputError(
            "error_threshold outside the asymptotic regime (1e-12, 0.05), "
            f"got {error_threshold}")
    if phase not in ("tracked", "leading"):
        raise InputError(f"unknown phase convention {phase!r}")
    big_l = math.log(1.0 / error_threshold)
    s_scale = math.sqrt(big_l / 2.0)
    if phase == "leading":
        s_corr = _min_width_truncation_correction(big_l)
    else:
        s_corr = 0.0
        for _ in range(3):
            theta0 = big_l - math.log(s_scale) + 2.0 * s_corr
            s_corr = _min_width_truncation_correction(theta0)
    return 2.0 * big_l - math.log(0.5 * big_l) + 4.0 * s_corr


def _min_width_truncation_correction(theta0: float) -> float:
    """min (alpha+beta) s.t. the first-order error stays within budget."""
    phis = np.linspace(0.0, 4.0 * math.pi, 2401)
    exp_neg_phi = np.exp(-phis)
    cos_term = np.cos(theta0 + phis + 0.25 * math.pi)
    alpha_edge = 0.25 * math.log(math.pi / 8.0)

    def excess(alpha: float, beta: float) -> float:
        # sup over future detunings of the flip amplitude, minus budget
        c_coef = math.exp(-2.0 * alpha) / math.sqrt(2.0 * math.pi)
        tail = 0.5 * math.pi * c_coef
        vals = math.exp(-2.0 * beta) * exp_neg_phi - c_coef * cos_term
        sup = 0.5 * math.pi * float(vals.max())
        return max(sup, tail) - 1.0

    def beta_min(alpha: float) -> float | None:
        if 0.5 * math.pi * math.exp(-2.0 * alpha) / math.sqrt(2 * math.pi) > 1:
            return None
        lo, hi = -1.5, 0.5
        grown = 0
        while excess(alpha, hi) > 0.0:
            hi += 1.0
            grown += 1
            if grown > 8:
                return None
        if excess(alpha, lo) <= 0.0:
            return lo
        for _ in range(48):
            mid = 0.5 * (lo + hi)
            if excess(alpha, mid) <= 0.0:
                hi = mid
            else:
                lo = mid
        return hi

    best = math.inf
    for alpha in np.arange(alpha_edge + 5e-4, alpha_edge + 1.2, 0.004):
        beta = beta_min(float(alpha))
        if beta is not None:
            best = min(best, float(alpha) + beta)
    if not math.isfinite(best):
        raise InfeasibleError("no feasible width/truncation correction found")
    return best


def flip_error_minima_spacing(rabi_peak: float, detuning: float,
                              cut_values, *,
                              rad_per_step: float = DEFAULT_RAD_PER_STEP,
                              min_rise: float = 1.002) -> np.ndarray:
    """Spacings (in total duration) between flip-error minima.

    Sweeps the truncation time at fixed peak Rabi frequency and detuning,
    re-solving the pi-area width each time, and returns the differences
    between consecutive local minima of the spectator error as a function
    of the total duration ``2*cut``.  In the regime where the smooth
    Gaussian overlap dominates the truncation radiation, Rabi-like
    interference puts these minima ``4*pi/detuning`` apart.

    A dip only counts against the previous one if the error rises by at
    least ``min_rise`` (relative) in between; this drops the spurious
    grid-level wiggles that appear once the interference modulation decays
    below resolution at long durations, while keeping genuine comb dips
    (which modulate at the percent level or more).
    """
    cuts = np.asarray(cut_values, dtype=float)
    errs = np.empty_like(cuts)
    for i, cut in enumerate(cuts):
        width = solve_pi_width(rabi_peak, cut)
        amp = gaussian_flip_amplitudes(rabi_peak, width, cut, [detuning],
                                       rad_per_step=rad_per_step)[0]
        errs[i] = abs(amp) ** 2
    interior = np.flatnonzero(
        (errs[1:-1] <= errs[:-2]) & (errs[1:-1] <= errs[2:])) + 1
    kept: list[int] = []
    for idx in interior:
        if not kept:
            kept.append(int(idx))
            continue
        rise = float(errs[kept[-1]: idx + 1].max())
        if rise >= min_rise * max(errs[idx], errs[kept[-1]]):
            kept.append(int(idx))
        elif errs[idx] < errs[kept[-1]]:
            kept[-1] = int(idx)  # deeper point of the same dip
    minima_duration = 2.0 * cuts[kept]
    return np.diff(minima_duration)

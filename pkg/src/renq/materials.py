"""Material records, point-group admissibility rules, field-angle optimization.

A material record bundles one ion species (`IonSpec`) with the host-specific
numbers the gate estimators need: coherence time, optical-drive parameters,
the documented operating field, and a reference pair geometry.  Records are
read from a self-describing JSON document in which **every dimensional
quantity carries an explicit unit suffix**:

    quantity   := "<float> <unit>"          e.g. "103.6 MHz", "4.4 ms"
    angle      := "<float> deg" | "<float> rad"
    rate/field := "<float> <prefix>Hz/(V/cm)"   (Stark coefficient)

Dimensionless entries (g factors, J, I, oscillator strength, g tensors,
unit vectors) are plain JSON numbers.  A bare number where a unit is
required is rejected rather than guessed at.

The point-group table answers two admissibility questions for each of the
32 crystallographic point groups: can the crystal field produce a Kramers
doublet with vanishing transverse g factor (and under what J condition),
and do the doublets carry an electric dipole moment, i.e. is electrical
gating possible.  Groups whose doublets are dipole-free because the group
contains inversion are distinguished from the three exceptional groups
that lack inversion yet still restrict or forbid doublet dipole moments.

`optimize_field_angles` minimizes the gate-error objective of
`gates.cnot_report` over the static-field direction with a deterministic
coarse lattice followed by derivative-free refinement.  The landscape of
the max-of-channels objective is typically a shallow valley where the
coherence and activation channels balance, so all co-optimal minima are
reported and the winner is the one with the shortest total gate time.
"""

from __future__ import annotations

import json
import math
import re
from collections.abc import Mapping
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np
from scipy.optimize import minimize

from .constants import H_PLANCK, MU_BOHR, SPEED_OF_LIGHT
from .errors import ConfigError, InfeasibleError, InputError, RegimeError
from .gates import GateReport, activation_x_asymmetry, cnot_report
from .ions import DipolePair, FieldSpec, GTensor, IonSpec
from .units import parse_quantity

__all__ = [
    "SymmetryRule", "SYMMETRY_TABLE", "symmetry_lookup",
    "MaterialRecord", "load_material", "load_material_file",
    "dump_material", "dumps_material", "builtin_material_names",
    "minimum_field", "material_report",
    "AngleCandidate", "FrameOffset", "AngleOptimization",
    "optimize_field_angles", "frame_offset_diagnostic",
]


# ---------------------------------------------------------------------------
# point-group admissibility


@dataclass(frozen=True)
class SymmetryRule:
    """Admissibility facts for one crystallographic point group.

    ``allows_g_perp_zero``: the crystal field can produce a Kramers doublet
    whose transverse g factor vanishes exactly (an Ising doublet), under
    the stated angular-momentum condition.  ``allows_electric_dipole``:
    the Kramers doublets generically carry an electric dipole moment, so
    the qubit levels can be gated electrically.  ``annotation`` carries
    the caveats that do not fit a boolean.
    """

    point_group: str
    crystal_system: str
    allows_g_perp_zero: bool
    g_perp_zero_condition: str | None
    allows_electric_dipole: bool
    contains_inversion: bool
    annotation: str = ""


_ISO_NOTE = ("cubic site symmetry forces an isotropic g tensor, so the "
             "anisotropy contrast this scheme needs is absent")
_PARTIAL_DIPOLE_NOTE = ("only doublets of one of the double-group "
                        "representations carry an electric dipole moment")
_TD_NOTE = ("lacks inversion symmetry, yet its Kramers doublets carry no "
            "electric dipole moment")

# (system, symbol, inversion, g_perp_zero condition or None, dipole, note)
_SYMMETRY_ROWS = (
    ("triclinic", "C1", False, None, True, ""),
    ("triclinic", "Ci", True, None, False, ""),
    ("monoclinic", "C2", False, None, True, ""),
    ("monoclinic", "Cs", False, None, True, ""),
    ("monoclinic", "C2h", True, None, False, ""),
    ("orthorhombic", "D2", False, None, True, ""),
    ("orthorhombic", "C2v", False, None, True, ""),
    ("orthorhombic", "D2h", True, None, False, ""),
    ("tetragonal", "C4", False, "J = 3/2", True, ""),
    ("tetragonal", "S4", False, "J = 3/2", True, ""),
    ("tetragonal", "C4h", True, "J = 3/2", False, ""),
    ("tetragonal", "D4", False, "J = 3/2", True, ""),
    ("tetragonal", "C4v", False, "J = 3/2", True, ""),
    ("tetragonal", "D2d", False, "J = 3/2", True, ""),
    ("tetragonal", "D4h", True, "J = 3/2", False, ""),
    ("trigonal", "C3", False, "J > 1/2", True, ""),
    ("trigonal", "S6", True, "J > 1/2", False, ""),
    ("trigonal", "D3", False, "J > 1/2", True, ""),
    ("trigonal", "C3v", False, "J > 1/2", True, ""),
    ("trigonal", "D3d", True, "J > 1/2", False, ""),
    ("hexagonal", "C6", False, "J > 1/2", True, ""),
    ("hexagonal", "C3h", False, "J > 1/2", True, _PARTIAL_DIPOLE_NOTE),
    ("hexagonal", "C6h", True, "J > 1/2", False, ""),
    ("hexagonal", "D6", False, "J > 1/2", True, ""),
    ("hexagonal", "C6v", False, "J > 1/2", True, ""),
    ("hexagonal", "D3h", False, "J > 1/2", False, _PARTIAL_DIPOLE_NOTE),
    ("hexagonal", "D6h", True, "J > 1/2", False, ""),
    ("cubic", "T", False, None, True, _ISO_NOTE),
    ("cubic", "Th", True, None, False, _ISO_NOTE),
    ("cubic", "Td", False, None, False, _TD_NOTE + "; " + _ISO_NOTE),
    ("cubic", "O", False, None, True, _ISO_NOTE),
    ("cubic", "Oh", True, None, False, _ISO_NOTE),
)

SYMMETRY_TABLE: dict[str, SymmetryRule] = {
    symbol: SymmetryRule(
        point_group=symbol, crystal_system=system,
        allows_g_perp_zero=condition is not None,
        g_perp_zero_condition=condition,
        allows_electric_dipole=dipole,
        contains_inversion=inversion,
        annotation=note)
    for system, symbol, inversion, condition, dipole, note in _SYMMETRY_ROWS
}

# Alternative Schoenflies spellings.
_GROUP_ALIASES = {"S2": "Ci", "C3i": "S6", "C1h": "Cs", "Sh": "Cs",
                  "V": "D2", "Vh": "D2h", "Vd": "D2d"}

_GROUP_LOOKUP = {name.casefold(): name for name in SYMMETRY_TABLE}
_GROUP_LOOKUP.update(
    {alias.casefold(): target for alias, target in _GROUP_ALIASES.items()})


def symmetry_lookup(point_group: str) -> SymmetryRule:
    """Resolve a point-group symbol (Schoenflies, e.g. "C1", "O_h", "S2")."""
    if not isinstance(point_group, str):
        raise InputError(f"point group must be a string, got {point_group!r}")
    key = point_group.replace("_", "").replace("{", "").replace("}", "")
    key = key.strip().casefold()
    if key not in _GROUP_LOOKUP:
        raise InputError(
            f"unknown point group {point_group!r}; expected one of "
            f"{', '.join(sorted(SYMMETRY_TABLE))}")
    return SYMMETRY_TABLE[_GROUP_LOOKUP[key]]


# ---------------------------------------------------------------------------
# material record


@dataclass(frozen=True)
class MaterialRecord:
    """One ion species in one host site, with its operating point.

    ``field_polar_deg``/``field_azimuth_deg`` are the documented static
    field angles, and ``pair_direction`` the assumed ion-pair axis, all in
    the frame in which the g tensors are written.  ``assumed`` names the
    fields whose values are assumptions rather than measurements.
    """

    name: str
    ion: IonSpec
    point_group: str
    site_label: str
    source: str
    t2_s: float
    oscillator_strength: float
    electric_dipole_cm: float
    wavelength_m: float
    field_magnitude_t: float
    field_polar_deg: float
    field_azimuth_deg: float
    drive_field_t: float
    pair_distance_m: float
    pair_direction: tuple[float, float, float]
    stark_coefficient_hz_per_v_cm: float | None = None
    assumed: tuple[str, ...] = ()
    notes: str = ""

    def __post_init__(self):
        rule = symmetry_lookup(self.point_group)
        object.__setattr__(self, "point_group", rule.point_group)
        for what, value in (("t2_s", self.t2_s),
                            ("oscillator_strength", self.oscillator_strength),
                            ("electric_dipole_cm", self.electric_dipole_cm),
                            ("wavelength_m", self.wavelength_m),
                            ("drive_field_t", self.drive_field_t),
                            ("pair_distance_m", self.pair_distance_m)):
            if not (np.isfinite(value) and value > 0):
                raise InputError(f"{what} must be positive, got {value}")
        if not (np.isfinite(self.field_magnitude_t)
                and self.field_magnitude_t >= 0):
            raise InputError("field_magnitude_t must be >= 0")
        if (self.stark_coefficient_hz_per_v_cm is not None
                and not (np.isfinite(self.stark_coefficient_hz_per_v_cm)
                         and self.stark_coefficient_hz_per_v_cm > 0)):
            raise InputError("stark_coefficient_hz_per_v_cm must be positive "
                             "when given")
        direction = np.asarray(self.pair_direction, dtype=float).reshape(3)
        norm = float(np.linalg.norm(direction))
        if not np.all(np.isfinite(direction)) or norm < 1e-12:
            raise InputError("pair_direction must be a finite nonzero "
                             "3-vector")
        object.__setattr__(
            self, "pair_direction", tuple(float(x) for x in direction / norm))
        # The optical wavelength and the ground-to-excited interval describe
        # the same transition; let them disagree by at most 1%.
        implied_gap = SPEED_OF_LIGHT / self.wavelength_m
        if abs(implied_gap / self.ion.optical_gap_hz - 1.0) > 0.01:
            raise InputError(
                f"wavelength {self.wavelength_m} m implies an optical gap of "
                f"{implied_gap:.4g} Hz, inconsistent with the ion's "
                f"{self.ion.optical_gap_hz:.4g} Hz")
        object.__setattr__(self, "assumed", tuple(self.assumed))

    @property
    def symmetry(self) -> SymmetryRule:
        return symmetry_lookup(self.point_group)

    def reference_field(self, magnitude_t: float | None = None,
                        polar_deg: float | None = None,
                        azimuth_deg: float | None = None) -> FieldSpec:
        """The documented operating field, with optional overrides."""
        return FieldSpec(
            magnitude_t=self.field_magnitude_t if magnitude_t is None
            else magnitude_t,
            polar_deg=self.field_polar_deg if polar_deg is None
            else polar_deg,
            azimuth_deg=self.field_azimuth_deg if azimuth_deg is None
            else azimuth_deg)

    def pair(self, r_m: float | None = None) -> DipolePair:
        """Like-ion pair along ``pair_direction`` at distance ``r_m``."""
        distance = self.pair_distance_m if r_m is None else r_m
        if not (np.isfinite(distance) and distance > 0):
            raise InputError(f"pair distance must be positive, got {distance}")
        separation = distance * np.asarray(self.pair_direction)
        return DipolePair(self.ion, self.ion, separation)


# ---------------------------------------------------------------------------
# config document I/O

_TOP_LEVEL_KEYS = {
    "name", "point_group", "site_label", "source", "t2",
    "oscillator_strength", "electric_dipole", "wavelength",
    "field_magnitude", "field_polar", "field_azimuth", "drive_field",
    "pair_distance", "pair_direction", "stark_coefficient", "assumed",
    "notes", "ion",
}
_ION_KEYS = {
    "name", "electron_j_ground", "electron_j_excited", "nuclear_spin",
    "nuclear_g_factor", "hyperfine_ground", "hyperfine_excited",
    "lande_g_ground", "lande_g_excited", "g_tensor_ground",
    "g_tensor_excited", "cf_gap", "optical_gap",
}
def _has_unit_suffix(text: str) -> bool:
    """True when the string does not parse whole as a bare number."""
    try:
        float(text.strip())
    except ValueError:
        return True
    return False


def _get(doc: Mapping, key: str, prefix: str = ""):
    path = prefix + key
    if key not in doc:
        raise ConfigError("missing required field", path)
    return doc[key], path


def _string(doc: Mapping, key: str, prefix: str = "") -> str:
    value, path = _get(doc, key, prefix)
    if not isinstance(value, str):
        raise ConfigError(f"expected a string, got {value!r}", path)
    return value


def _number(doc: Mapping, key: str, prefix: str = "") -> float:
    value, path = _get(doc, key, prefix)
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"expected a plain number, got {value!r}", path)
    return float(value)


def _quantity(doc: Mapping, key: str, expect: str, prefix: str = "") -> float:
    """A dimensional quantity: a string with an explicit unit suffix."""
    value, path = _get(doc, key, prefix)
    if not isinstance(value, str) or not _has_unit_suffix(value):
        raise ConfigError(
            f"dimensional quantity needs an explicit unit suffix "
            f"(e.g. \"103.6 MHz\"), got {value!r}", path)
    return parse_quantity(value, expect, path)


def _angle_deg(doc: Mapping, key: str, prefix: str = "") -> float:
    """An angle with unit, returned in degrees (exact for 'deg' inputs)."""
    value, path = _get(doc, key, prefix)
    if not isinstance(value, str):
        raise ConfigError(
            f"angle needs an explicit unit (\"deg\" or \"rad\"), "
            f"got {value!r}", path)
    s = value.strip()
    if s.endswith("deg"):
        head = s[:-3].strip()
        try:
            return float(head)
        except ValueError:
            raise ConfigError(f"cannot parse angle {value!r}", path) from None
    if s.endswith("rad"):
        head = s[:-3].strip()
        try:
            return math.degrees(float(head))
        except ValueError:
            raise ConfigError(f"cannot parse angle {value!r}", path) from None
    raise ConfigError(
        f"angle needs an explicit unit (\"deg\" or \"rad\"), got {value!r}",
        path)


def _stark(doc: Mapping, key: str, prefix: str = "") -> float:
    value, path = _get(doc, key, prefix)
    if not isinstance(value, str) or not value.strip().endswith("/(V/cm)"):
        raise ConfigError(
            f"Stark coefficient needs the unit form \"<x> kHz/(V/cm)\", "
            f"got {value!r}", path)
    head = value.strip()[: -len("/(V/cm)")]
    return parse_quantity(head, "Hz", path)


def _matrix(doc: Mapping, key: str, prefix: str = "") -> tuple:
    value, path = _get(doc, key, prefix)
    arr = np.asarray(value, dtype=float) if isinstance(value, list) else None
    if arr is None or arr.shape != (3, 3) or not np.all(np.isfinite(arr)):
        raise ConfigError("expected a 3x3 matrix of numbers", path)
    return tuple(tuple(float(x) for x in row) for row in arr)


def _vector(doc: Mapping, key: str, prefix: str = "") -> tuple:
    value, path = _get(doc, key, prefix)
    arr = np.asarray(value, dtype=float) if isinstance(value, list) else None
    if arr is None or arr.shape != (3,) or not np.all(np.isfinite(arr)):
        raise ConfigError("expected a 3-vector of numbers", path)
    return tuple(float(x) for x in arr)


def _check_keys(doc: Mapping, allowed: set, prefix: str = "") -> None:
    unknown = sorted(set(doc) - allowed)
    if unknown:
        raise ConfigError(
            f"unknown field(s) {', '.join(unknown)}; allowed: "
            f"{', '.join(sorted(allowed))}", prefix + unknown[0])


def _ion_from_doc(doc: Mapping, prefix: str = "ion.") -> IonSpec:
    if not isinstance(doc, Mapping):
        raise ConfigError("expected a mapping", prefix.rstrip("."))
    _check_keys(doc, _ION_KEYS, prefix)
    try:
        return IonSpec(
            name=_string(doc, "name", prefix),
            electron_j_ground=_number(doc, "electron_j_ground", prefix),
            electron_j_excited=_number(doc, "electron_j_excited", prefix),
            nuclear_spin=_number(doc, "nuclear_spin", prefix),
            nuclear_g_factor=_number(doc, "nuclear_g_factor", prefix),
            hyperfine_constant_ground_hz=_quantity(
                doc, "hyperfine_ground", "Hz", prefix),
            hyperfine_constant_excited_hz=_quantity(
                doc, "hyperfine_excited", "Hz", prefix),
            lande_g_ground=_number(doc, "lande_g_ground", prefix),
            lande_g_excited=_number(doc, "lande_g_excited", prefix),
            g_tensor_ground=GTensor(_matrix(doc, "g_tensor_ground", prefix)),
            g_tensor_excited=GTensor(_matrix(doc, "g_tensor_excited", prefix)),
            cf_gap_hz=_quantity(doc, "cf_gap", "Hz", prefix),
            optical_gap_hz=_quantity(doc, "optical_gap", "Hz", prefix),
        )
    except InputError as err:
        raise ConfigError(str(err), prefix.rstrip(".")) from err


def load_material(source: Mapping | str | Path) -> MaterialRecord:
    """Build a validated record from a config document.

    ``source`` may be a mapping, a JSON text (must start with "{"), a
    filesystem path, or the name of a built-in record (anything matching
    a registry entry up to case and separators, e.g. "er-yso-site1").
    """
    if isinstance(source, Mapping):
        doc = source
    elif isinstance(source, Path):
        return load_material_file(source)
    elif isinstance(source, str):
        if source.lstrip().startswith("{"):
            try:
                doc = json.loads(source)
            except json.JSONDecodeError as err:
                raise ConfigError(f"not valid JSON: {err}", "") from err
        else:
            slug = _slugify(source)
            if slug in _BUILTIN_SLUGS:
                return load_material_file(_BUILTIN_SLUGS[slug])
            raise InputError(
                f"unknown material {source!r}; built-ins: "
                f"{', '.join(builtin_material_names())} (or pass a config "
                f"document)")
    else:
        raise InputError(f"cannot load a material from {type(source)}")
    if not isinstance(doc, Mapping):
        raise ConfigError("config document must be a JSON object", "")
    _check_keys(doc, _TOP_LEVEL_KEYS)
    ion_doc, _ = _get(doc, "ion")
    assumed = doc.get("assumed", [])
    if (not isinstance(assumed, list)
            or not all(isinstance(x, str) for x in assumed)):
        raise ConfigError("expected a list of field names", "assumed")
    notes = doc.get("notes", "")
    if not isinstance(notes, str):
        raise ConfigError("expected a string", "notes")
    stark = _stark(doc, "stark_coefficient") \
        if "stark_coefficient" in doc else None
    try:
        return MaterialRecord(
            name=_string(doc, "name"),
            ion=_ion_from_doc(ion_doc),
            point_group=_string(doc, "point_group"),
            site_label=_string(doc, "site_label"),
            source=_string(doc, "source"),
            t2_s=_quantity(doc, "t2", "s"),
            oscillator_strength=_number(doc, "oscillator_strength"),
            electric_dipole_cm=_quantity(doc, "electric_dipole", "C m"),
            wavelength_m=_quantity(doc, "wavelength", "m"),
            field_magnitude_t=_quantity(doc, "field_magnitude", "T"),
            field_polar_deg=_angle_deg(doc, "field_polar"),
            field_azimuth_deg=_angle_deg(doc, "field_azimuth"),
            drive_field_t=_quantity(doc, "drive_field", "T"),
            pair_distance_m=_quantity(doc, "pair_distance", "m"),
            pair_direction=_vector(doc, "pair_direction"),
            stark_coefficient_hz_per_v_cm=stark,
            assumed=tuple(assumed),
            notes=notes,
        )
    except ConfigError:
        raise
    except InputError as err:
        raise ConfigError(str(err), "") from err


def load_material_file(path: str | Path) -> MaterialRecord:
    text = Path(path).read_text(encoding="utf-8")
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as err:
        raise ConfigError(f"not valid JSON: {err}", str(path)) from err
    return load_material(doc)


def dump_material(record: MaterialRecord) -> dict:
    """Serialize to the config-document form; `load_material` round-trips it.

    Dimensional values are written in base SI units with repr precision,
    so reloading reproduces every float exactly.
    """
    ion = record.ion
    doc = {
        "name": record.name,
        "point_group": record.point_group,
        "site_label": record.site_label,
        "source": record.source,
        "t2": f"{record.t2_s!r} s",
        "oscillator_strength": record.oscillator_strength,
        "electric_dipole": f"{record.electric_dipole_cm!r} C m",
        "wavelength": f"{record.wavelength_m!r} m",
        "field_magnitude": f"{record.field_magnitude_t!r} T",
        "field_polar": f"{record.field_polar_deg!r} deg",
        "field_azimuth": f"{record.field_azimuth_deg!r} deg",
        "drive_field": f"{record.drive_field_t!r} T",
        "pair_distance": f"{record.pair_distance_m!r} m",
        "pair_direction": list(record.pair_direction),
        "assumed": list(record.assumed),
        "notes": record.notes,
        "ion": {
            "name": ion.name,
            "electron_j_ground": ion.electron_j_ground,
            "electron_j_excited": ion.electron_j_excited,
            "nuclear_spin": ion.nuclear_spin,
            "nuclear_g_factor": ion.nuclear_g_factor,
            "hyperfine_ground": f"{ion.hyperfine_constant_ground_hz!r} Hz",
            "hyperfine_excited": f"{ion.hyperfine_constant_excited_hz!r} Hz",
            "lande_g_ground": ion.lande_g_ground,
            "lande_g_excited": ion.lande_g_excited,
            "g_tensor_ground": [list(row) for row in
                                ion.g_tensor_ground.matrix],
            "g_tensor_excited": [list(row) for row in
                                 ion.g_tensor_excited.matrix],
            "cf_gap": f"{ion.cf_gap_hz!r} Hz",
            "optical_gap": f"{ion.optical_gap_hz!r} Hz",
        },
    }
    if record.stark_coefficient_hz_per_v_cm is not None:
        doc["stark_coefficient"] = (
            f"{record.stark_coefficient_hz_per_v_cm!r} Hz/(V/cm)")
    return doc


def dumps_material(record: MaterialRecord) -> str:
    return json.dumps(dump_material(record), indent=2) + "\n"


def _slugify(name: str) -> str:
    return re.sub(r"[^a-z0-9]+", "", name.lower())


def _builtin_path(filename: str) -> Path:
    return Path(resources.files("renq").joinpath("data", filename))


_BUILTIN_FILES = {"er-yso-site1": "er_yso_site1.json"}
_BUILTIN_SLUGS = {
    _slugify(name): _builtin_path(fn) for name, fn in _BUILTIN_FILES.items()}
# The record's own name ("Er:YSO site 1") also resolves.
_BUILTIN_SLUGS.setdefault(_slugify("Er:YSO site 1"),
                          _builtin_path("er_yso_site1.json"))


def builtin_material_names() -> tuple[str, ...]:
    return tuple(sorted(_BUILTIN_FILES))


# ---------------------------------------------------------------------------
# field requirements


def minimum_field(ion: IonSpec, margin: float = 10.0) -> float:
    """Static field (T) needed to polarize the nuclear spin ladder.

    The electronic Zeeman energy must dominate the full hyperfine span
    I*A_J; ``margin`` is the required dominance ratio (>= 1).
    """
    if not (np.isfinite(margin) and margin >= 1.0):
        raise InputError(f"margin must be >= 1, got {margin}")
    a_j = abs(ion.hyperfine_constant_ground_hz) * H_PLANCK
    return margin * ion.nuclear_spin * a_j / MU_BOHR


# ---------------------------------------------------------------------------
# gate report at a material's operating point


def material_report(material: MaterialRecord, *,
                    r_m: float | None = None,
                    b_field_t: float | None = None,
                    b_ac_t: float | None = None,
                    polar_deg: float | None = None,
                    azimuth_deg: float | None = None,
                    deactivate_during_echo: bool = True) -> GateReport:
    """CNOT score for a like-ion pair at the record's operating point."""
    field_spec = material.reference_field(
        magnitude_t=b_field_t, polar_deg=polar_deg, azimuth_deg=azimuth_deg)
    drive = material.drive_field_t if b_ac_t is None else b_ac_t
    return cnot_report(material.pair(r_m), field_spec, t2_s=material.t2_s,
                       b_ac_t=drive,
                       deactivate_during_echo=deactivate_during_echo)


# ---------------------------------------------------------------------------
# field-angle optimization


@dataclass(frozen=True)
class AngleCandidate:
    """One local minimum of the gate-error landscape."""

    theta_deg: float
    phi_deg: float
    objective: float
    f_min: float
    total_time_s: float

    @property
    def theta_rad(self) -> float:
        return math.radians(self.theta_deg)

    @property
    def phi_rad(self) -> float:
        return math.radians(self.phi_deg)


@dataclass(frozen=True)
class FrameOffset:
    """Where the found optimum sits relative to the documented angles.

    The g-tensor data, the documented field angles, and this package's
    spherical-angle convention must share one frame; if they do not, the
    optimum reappears at an axis-relabelled position.  ``offset_deg`` is
    the plain angular distance (antipode-folded, since the physics is
    even under field reversal); ``best_transform`` is the signed axis
    permutation that best maps the optimum onto the reference direction
    and ``residual_deg`` the distance that remains after applying it.
    """

    offset_deg: float
    best_transform: str
    residual_deg: float
    consistent_frame: bool


@dataclass(frozen=True)
class AngleOptimization:
    """Result of the field-angle search.

    Iterating yields ``(theta_rad, phi_rad, report)``.  ``minima`` holds
    every refined minimum whose objective is within the relative
    tolerance of the best — the landscape has a shallow valley where the
    two dominant error channels balance, so ties are expected; the winner
    is the co-optimal entry with the shortest total gate time.
    """

    theta_rad: float
    phi_rad: float
    report: GateReport | None
    objective: float
    asymmetry: float
    minima: tuple[AngleCandidate, ...]
    flat_landscape: bool
    refine_log: tuple[float, ...]
    evaluations: int
    frame_offset: FrameOffset | None

    def __iter__(self):
        return iter((self.theta_rad, self.phi_rad, self.report))

    @property
    def theta_deg(self) -> float:
        return math.degrees(self.theta_rad)

    @property
    def phi_deg(self) -> float:
        return math.degrees(self.phi_rad)


def _direction(theta_deg: float, phi_deg: float) -> np.ndarray:
    th, ph = math.radians(theta_deg), math.radians(phi_deg)
    return np.array([math.sin(th) * math.cos(ph),
                     math.sin(th) * math.sin(ph), math.cos(th)])


def _axis_angle_deg(u: np.ndarray, v: np.ndarray) -> float:
    """Angle between two directions, folding the antipode (axes, not rays)."""
    c = abs(float(np.clip(np.dot(u, v), -1.0, 1.0)))
    return math.degrees(math.acos(c))


def _fold_upper(theta_deg: float, phi_deg: float) -> tuple[float, float]:
    """Canonical antipode representative with theta <= 90 deg."""
    spec = FieldSpec(1.0, theta_deg, phi_deg)
    th, ph = spec.polar_deg, spec.azimuth_deg
    if th > 90.0 or (th == 90.0 and ph >= 180.0):
        th = 180.0 - th
        ph = (ph + 180.0) % 360.0
    return th, ph


_AXIS_LABELS = {0: "x", 1: "y", 2: "z"}


def _signed_permutations():
    """The 48 signed axis permutations, with readable labels."""
    out = []
    for perm in ((0, 1, 2), (0, 2, 1), (1, 0, 2),
                 (1, 2, 0), (2, 0, 1), (2, 1, 0)):
        for signs in ((1, 1, 1), (1, 1, -1), (1, -1, 1), (-1, 1, 1),
                      (1, -1, -1), (-1, 1, -1), (-1, -1, 1), (-1, -1, -1)):
            mat = np.zeros((3, 3))
            parts = []
            for row, (col, sign) in enumerate(zip(perm, signs)):
                mat[row, col] = sign
                parts.append(("-" if sign < 0 else "")
                             + _AXIS_LABELS[col])
            label = "(x,y,z) -> (" + ",".join(parts) + ")"
            out.append((label, mat))
    return out


_SIGNED_PERMUTATIONS = _signed_permutations()


def frame_offset_diagnostic(theta_deg: float, phi_deg: float,
                            ref_theta_deg: float,
                            ref_phi_deg: float) -> FrameOffset:
    """Compare a found optimum against documented reference angles.

    A raw offset within a few degrees means the frames agree.  A large
    raw offset that collapses under one signed axis permutation points to
    a relabelled/reflected frame between the tensor data and the angle
    convention; the transform is named so the mismatch can be traced.
    """
    u = _direction(theta_deg, phi_deg)
    v = _direction(ref_theta_deg, ref_phi_deg)
    offset = _axis_angle_deg(u, v)
    best_label, best_residual = "identity", offset
    for label, mat in _SIGNED_PERMUTATIONS:
        residual = _axis_angle_deg(mat @ u, v)
        if residual < best_residual - 1e-9:
            best_label, best_residual = label, residual
    return FrameOffset(offset_deg=offset, best_transform=best_label,
                       residual_deg=best_residual,
                       consistent_frame=offset <= 15.0)


def optimize_field_angles(material: MaterialRecord, r_m: float | None = None,
                          b_field_t: float | None = None,
                          b_ac_t: float | None = None,
                          objective: str = "min_error", *,
                          coarse_step_deg: float = 10.0,
                          n_starts: int = 6,
                          rel_tolerance: float = 1e-3,
                          deactivate_during_echo: bool = True
                          ) -> AngleOptimization:
    """Minimize the CNOT error bound over the static-field direction.

    Deterministic search: a fixed coarse lattice (``coarse_step_deg``
    spacing over the half sphere — the objective is exactly even under
    field reversal) seeds ``n_starts`` mutually distant Nelder-Mead
    refinements (the starts are independent and could run in parallel;
    their results are merged in a fixed order).  Angle directions where
    the gate is infeasible (vanishing activation overlap, broken energy
    hierarchy) count as infinite error.

    Returns the best direction, its full gate report, the
    activation-vs-X asymmetry there, all co-optimal minima within
    ``rel_tolerance`` (ties broken toward the shortest total gate time),
    a monotone log of the best objective seen, and a frame diagnostic
    against the record's documented angles.
    """
    if objective != "min_error":
        raise InputError(f"unknown objective {objective!r}; "
                         "only 'min_error' is implemented")
    r = material.pair_distance_m if r_m is None else r_m
    b = material.field_magnitude_t if b_field_t is None else b_field_t
    b_ac = material.drive_field_t if b_ac_t is None else b_ac_t
    if not (r > 0 and b > 0 and b_ac > 0):
        raise InputError("r, B and B_ac must all be positive")

    pair = material.pair(r)
    cache: dict[tuple[float, float], tuple[float, GateReport | None]] = {}
    evaluations = [0]

    def evaluate(theta_deg: float, phi_deg: float
                 ) -> tuple[float, GateReport | None]:
        spec = FieldSpec(b, theta_deg, phi_deg)
        key = (round(spec.polar_deg, 9), round(spec.azimuth_deg, 9))
        if key not in cache:
            evaluations[0] += 1
            try:
                report = cnot_report(
                    pair, spec, t2_s=material.t2_s, b_ac_t=b_ac,
                    deactivate_during_echo=deactivate_during_echo)
                cache[key] = (1.0 - report.f_min, report)
            except (InfeasibleError, RegimeError, InputError):
                cache[key] = (math.inf, None)
        return cache[key]

    # --- coarse lattice over the half sphere (antipodal symmetry) --------
    step = float(coarse_step_deg)
    thetas = np.arange(step / 2.0, 90.0 + 1e-9, step)
    phis = np.arange(0.0, 360.0 - 1e-9, step)
    refine_log: list[float] = []
    coarse: list[tuple[float, float, float]] = []
    for theta in thetas:
        for phi in phis:
            value, _ = evaluate(float(theta), float(phi))
            coarse.append((value, float(theta), float(phi)))
            if math.isfinite(value) and (
                    not refine_log or value < refine_log[-1]):
                refine_log.append(value)
    finite = [c for c in coarse if math.isfinite(c[0])]

    # --- flat / infeasible landscapes ------------------------------------
    if not finite:
        return AngleOptimization(
            theta_rad=math.radians(coarse[0][1]),
            phi_rad=math.radians(coarse[0][2]),
            report=None, objective=math.inf, asymmetry=math.nan,
            minima=(), flat_landscape=True, refine_log=(),
            evaluations=evaluations[0], frame_offset=None)
    spread = max(c[0] for c in finite) - min(c[0] for c in finite)
    flat = len(finite) == len(coarse) and spread <= 1e-9

    best_coarse = sorted(finite)
    if flat:
        value, theta, phi = best_coarse[0]
        _, report = evaluate(theta, phi)
        return AngleOptimization(
            theta_rad=math.radians(theta), phi_rad=math.radians(phi),
            report=report, objective=value,
            asymmetry=activation_x_asymmetry(
                material.ion, FieldSpec(b, theta, phi)),
            minima=(), flat_landscape=True, refine_log=tuple(refine_log),
            evaluations=evaluations[0], frame_offset=None)

    # --- pick mutually distant starts -------------------------------------
    starts: list[tuple[float, float]] = []
    for value, theta, phi in best_coarse:
        direction = _direction(theta, phi)
        if all(_axis_angle_deg(direction, _direction(t0, p0)) > 1.5 * step
               for t0, p0 in starts):
            starts.append((theta, phi))
        if len(starts) >= n_starts:
            break

    # --- derivative-free refinement ---------------------------------------
    def nm_objective(x: np.ndarray) -> float:
        value, _ = evaluate(float(x[0]), float(x[1]))
        if math.isfinite(value) and value < refine_log[-1]:
            refine_log.append(value)
        return value

    candidates: list[AngleCandidate] = []
    for theta0, phi0 in starts:
        result = minimize(
            nm_objective, np.array([theta0, phi0]), method="Nelder-Mead",
            options={"xatol": 0.02, "fatol": 1e-12, "maxiter": 600,
                     "initial_simplex": np.array(
                         [[theta0, phi0],
                          [theta0 + 0.6 * step, phi0],
                          [theta0, phi0 + 0.6 * step]])})
        value, report = evaluate(float(result.x[0]), float(result.x[1]))
        if not math.isfinite(value) or report is None:
            continue
        theta, phi = _fold_upper(float(result.x[0]), float(result.x[1]))
        candidates.append(AngleCandidate(
            theta_deg=theta, phi_deg=phi, objective=value,
            f_min=report.f_min, total_time_s=report.total_time_s))

    # --- merge duplicates, collect co-optimal set -------------------------
    candidates.sort(key=lambda c: (c.objective, c.total_time_s))
    merged: list[AngleCandidate] = []
    for cand in candidates:
        if all(_axis_angle_deg(_direction(cand.theta_deg, cand.phi_deg),
                               _direction(kept.theta_deg, kept.phi_deg))
               > 1.0 for kept in merged):
            merged.append(cand)
    best_value = merged[0].objective
    co_optimal = tuple(c for c in merged
                       if c.objective <= best_value * (1.0 + rel_tolerance))
    winner = min(co_optimal, key=lambda c: c.total_time_s)
    _, winner_report = evaluate(winner.theta_deg, winner.phi_deg)
    offset = frame_offset_diagnostic(
        winner.theta_deg, winner.phi_deg,
        material.field_polar_deg, material.field_azimuth_deg)
    return AngleOptimization(
        theta_rad=winner.theta_rad, phi_rad=winner.phi_rad,
        report=winner_report, objective=winner.objective,
        asymmetry=activation_x_asymmetry(
            material.ion, FieldSpec(b, winner.theta_deg, winner.phi_deg)),
        minima=co_optimal, flat_landscape=False,
        refine_log=tuple(refine_log), evaluations=evaluations[0],
        frame_offset=offset)

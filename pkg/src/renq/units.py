"""Unit-suffixed quantity parsing for configs and CLI values.

Grammar: ``<float> [<prefix>]<base-unit>`` with an optional space, e.g.
``"103.6 MHz"``, ``"10nm"``, ``"1 mT"``, ``"4.4 ms"``, ``"35 deg"``.
Values are converted to the SI base scale of the expected dimension
(Hz, s, T, m, ...).  Parsing is dimension-directed: the caller states which
base unit it expects, which removes the tesla-vs-tera and metre-vs-milli
ambiguities.
"""

from __future__ import annotations

import math
import re

from .errors import ConfigError

SI_PREFIXES = {
    "y": 1e-24, "z": 1e-21, "a": 1e-18, "f": 1e-15, "p": 1e-12,
    "n": 1e-9, "u": 1e-6, "µ": 1e-6, "m": 1e-3, "c": 1e-2, "d": 1e-1,
    "": 1.0,
    "da": 1e1, "h": 1e2, "k": 1e3, "M": 1e6, "G": 1e9, "T": 1e12,
    "P": 1e15, "E": 1e18,
}

# Base units the package deals in.  Angles are handled as a pseudo-dimension
# with two accepted spellings; "1" means dimensionless.
BASE_UNITS = ("Hz", "s", "T", "m", "K", "C m", "V/cm", "deg", "rad", "1")

_NUMBER_RE = re.compile(r"^[+-]?(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?")


def parse_quantity(text: str | float | int, expect: str, field_path: str = "") -> float:
    """Parse ``text`` into a float in SI base units of dimension ``expect``.

    Bare numbers are accepted and taken to already be in base units.
    Raises ConfigError (carrying ``field_path``) on malformed input.
    """
    if expect not in BASE_UNITS:
        raise ValueError(f"unknown expected dimension {expect!r}")
    if isinstance(text, (int, float)):
        return float(text)
    s = text.strip()
    m = _NUMBER_RE.match(s)
    if not m:
        raise ConfigError(f"cannot parse number from {text!r}", field_path)
    value = float(m.group(0))
    unit = s[m.end():].strip()
    if unit == "":
        return value
    if expect == "1":
        raise ConfigError(
            f"expected a dimensionless number, got unit {unit!r}", field_path)
    if expect == "deg" or expect == "rad":
        if unit == "deg":
            return math.radians(value)
        if unit == "rad":
            return value
        raise ConfigError(
            f"expected an angle in deg or rad, got {unit!r}", field_path)
    if not unit.endswith(expect):
        raise ConfigError(
            f"expected a quantity in {expect}, got unit {unit!r}", field_path)
    prefix = unit[: len(unit) - len(expect)].strip()
    if prefix not in SI_PREFIXES:
        raise ConfigError(
            f"unknown SI prefix {prefix!r} in unit {unit!r}", field_path)
    return value * SI_PREFIXES[prefix]


def format_quantity(value: float, base_unit: str) -> str:
    """Format ``value`` so that ``parse_quantity`` round-trips it exactly.

    The numeric part uses repr (shortest exact decimal for the float), and
    the unit is the unprefixed base unit, so no rescaling is involved.
    """
    if base_unit == "1":
        return repr(float(value))
    return f"{float(value)!r} {base_unit}"

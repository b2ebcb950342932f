"""Angles as decimal radians or pi-fraction literals ("pi/3", "5pi/32", "-2*pi")."""

from __future__ import annotations

import math
import re
from fractions import Fraction

_PI_FORM = re.compile(
    r"^(?P<sign>[+-])?\s*(?P<num>\d+(?:\.\d*)?|\.\d+)?\s*\*?\s*(?:pi|π)\s*(?:/\s*(?P<den>\d+(?:\.\d*)?))?$",
    re.IGNORECASE,
)


def parse_angle(text) -> float:
    """Parse ``"0.785"``, ``"pi"``, ``"pi/3"``, ``"5pi/32"``, ``"5.5*pi/32"`` or ``"-pi/2"``."""
    if isinstance(text, (int, float)) and not isinstance(text, bool):
        value = float(text)
    else:
        s = str(text).strip()
        m = _PI_FORM.match(s)
        if m:
            num = float(m.group("num")) if m.group("num") else 1.0
            den = float(m.group("den")) if m.group("den") else 1.0
            if den == 0:
                raise ValueError(f"zero denominator in angle {text!r}")
            value = num * math.pi / den
            if m.group("sign") == "-":
                value = -value
        else:
            try:
                value = float(s)
            except ValueError:
                raise ValueError(f"cannot parse angle {text!r}") from None
    if not math.isfinite(value):
        raise ValueError(f"angle {text!r} is not finite")
    return value


def angle_label(value: float, max_den: int = 64) -> str:
    """Filename-safe label: ``0``, ``pi``, ``pi_3``, ``5pi_32``, else ``r0.123``."""
    frac = Fraction(value / math.pi).limit_denominator(max_den)
    if abs(float(frac) * math.pi - value) > 1e-12:
        return f"r{value:.6g}".replace("-", "m")
    if frac == 0:
        return "0"
    sign = "m" if frac < 0 else ""
    num, den = abs(frac.numerator), frac.denominator
    head = "pi" if num == 1 else f"{num}pi"
    return f"{sign}{head}" if den == 1 else f"{sign}{head}_{den}"

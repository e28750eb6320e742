import re
from fractions import Fraction
from typing import FrozenSet, Optional

# "p" or "p/q" with non-negative integers; no signs, no decimals.
RATIONAL_PATTERN = re.compile(r"^(\d+)(?:/(\d+))?$")

REQUIRE_FLAGS = {"total": "total", "image-finite": "image_finite", "image_finite": "image_finite"}


def parse_rational(text: str) -> Optional[Fraction]:
    """
    Parses weights like "1/6", "2/3" or "1".
    Returns a Fraction or None when the text is not a valid weight.
    """
    if not isinstance(text, str):
        return None
    match = RATIONAL_PATTERN.match(text.strip())
    if not match:
        return None
    denominator = int(match.group(2)) if match.group(2) is not None else 1
    if denominator == 0:
        return None
    return Fraction(int(match.group(1)), denominator)


def format_rational(value) -> str:
    """Always "p/q", so 1 prints as "1/1" and 0 as "0/1"."""
    value = Fraction(value)
    return f"{value.numerator}/{value.denominator}"


def format_value(value) -> str:
    """Exact values print as "p/q", floats with enough digits to round-trip."""
    if isinstance(value, Fraction):
        return format_rational(value)
    return repr(float(value))


def parse_eps(text: str) -> float:
    eps = float(text)
    if not eps > 0:
        raise ValueError(f"tolerance must be positive, got {text!r}")
    return eps


def parse_require(text: Optional[str]) -> FrozenSet[str]:
    """'total,image-finite' -> {"total", "image_finite"}."""
    if not text:
        return frozenset()
    flags = set()
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        if part not in REQUIRE_FLAGS:
            raise ValueError(f"unknown restriction {part!r} (expected total or image-finite)")
        flags.add(REQUIRE_FLAGS[part])
    return frozenset(flags)

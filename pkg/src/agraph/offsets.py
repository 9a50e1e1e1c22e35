"""Exact-decimal time offsets.

Offsets are stored as ``decimal.Decimal`` quantized to at most nine
fractional digits and rendered in one canonical fixed-point form, so the
same graph state always serializes to the same bytes.
"""

import decimal
from decimal import Decimal

from .errors import BadArgument

PLACES = 9
_QUANTUM = Decimal(1).scaleb(-PLACES)


def to_decimal(value, *, nonnegative=False, what="offset"):
    """Coerce an int/float/str/Decimal into a quantized offset value.

    Floats go through their shortest repr, so ``0.1`` becomes
    ``Decimal("0.1")`` rather than the full binary expansion.
    """
    if isinstance(value, bool) or value is None:
        raise BadArgument("%s must be a number, got %r" % (what, value))
    try:
        if isinstance(value, Decimal):
            dec = value
        elif isinstance(value, float):
            dec = Decimal(repr(value))
        elif isinstance(value, int):
            dec = Decimal(value)
        elif isinstance(value, str):
            dec = Decimal(value.strip())
        else:
            raise BadArgument("%s must be a number, got %r" % (what, value))
    except decimal.InvalidOperation:
        raise BadArgument("%s %r is not a decimal number" % (what, value)) from None
    if not dec.is_finite():
        raise BadArgument("%s must be finite, got %s" % (what, value))
    if nonnegative and dec < 0:
        raise BadArgument("%s must be >= 0, got %s" % (what, value))
    return quantize(dec)


def quantize(dec):
    """Limit a finite Decimal to nine fractional digits, canonically.

    The result is normalized (no trailing zeros, no positive exponent),
    so numerically equal offsets share one representation everywhere.
    """
    if -dec.as_tuple().exponent > PLACES:
        dec = dec.quantize(_QUANTUM)
    if dec == 0:
        return Decimal(0)
    dec = dec.normalize()
    if dec.as_tuple().exponent > 0:
        dec = dec.quantize(Decimal(1))
    return dec


def fmt(dec):
    """Canonical text form: plain fixed point, no exponent, no trailing zeros."""
    text = format(dec, "f")
    if "." in text:
        text = text.rstrip("0").rstrip(".")
    if text in ("", "-0"):
        text = "0"
    return text


def midpoint(lo, hi):
    return quantize((lo + hi) / 2)


def subdivide(lo, hi, n):
    """n+1 boundary offsets dividing [lo, hi] into n equal parts.

    First and last boundaries are exactly lo and hi; interior boundaries
    are quantized, which keeps them monotone between the endpoints.
    """
    span = hi - lo
    bounds = [lo]
    for k in range(1, n):
        bounds.append(quantize(lo + span * k / n))
    bounds.append(hi)
    return bounds

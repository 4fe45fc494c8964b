"""Outward-rounded real and complex interval arithmetic.

Every operation returns an enclosure of the exact image set.  Rounding is
done in software: after each native double operation the endpoints are
pushed outward with ``math.nextafter``, which keeps results deterministic
under any thread scheduling and portable across platforms.  Elementary
functions evaluate the libm kernels at the endpoints and pre-widen by two
ulps, which covers the documented worst-case error of the glibc kernels.
"""

from __future__ import annotations

import math
from enum import Enum
from fractions import Fraction
from typing import Iterable, Sequence, Union

from .errors import (
    DivisionByZeroInterval,
    DomainViolation,
    PoleProximity,
)

_INF = math.inf


def _down(x: float) -> float:
    return math.nextafter(x, -_INF)


def _up(x: float) -> float:
    return math.nextafter(x, _INF)


def _down2(x: float) -> float:
    return math.nextafter(math.nextafter(x, -_INF), -_INF)


def _up2(x: float) -> float:
    return math.nextafter(math.nextafter(x, _INF), _INF)


ScalarLike = Union[int, float, Fraction, str]


class SignResult(Enum):
    """Rigorous sign classification of an interval."""

    STRICTLY_POSITIVE = 1
    STRICTLY_NEGATIVE = -1
    CONTAINS_ZERO = 0


class Interval:
    """Closed interval [lo, hi] of machine doubles."""

    __slots__ = ("lo", "hi")

    def __init__(self, lo: float, hi: float | None = None):
        if hi is None:
            hi = lo
        lo = float(lo)
        hi = float(hi)
        if not (lo <= hi):  # also rejects NaN endpoints
            raise ValueError(f"invalid interval endpoints [{lo}, {hi}]")
        self.lo = lo
        self.hi = hi

    # ------------------------------------------------------------------
    # construction helpers
    # ------------------------------------------------------------------

    @staticmethod
    def point(x: float) -> "Interval":
        return Interval(x, x)

    @staticmethod
    def from_fraction(fr: Fraction) -> "Interval":
        """Tight directed-rounding enclosure of an exact rational."""
        f = float(fr)
        if math.isinf(f):
            raise DomainViolation("rational overflows double range")
        d = Fraction(f)
        if d == fr:
            return Interval(f, f)
        if d < fr:
            return Interval(f, _up(f))
        return Interval(_down(f), f)

    @staticmethod
    def from_decimal(text: str) -> "Interval":
        """Enclosure of a decimal literal such as '0.9999999'."""
        return Interval.from_fraction(Fraction(text))

    @staticmethod
    def hull_of(items: Iterable["Interval"]) -> "Interval":
        lo = _INF
        hi = -_INF
        for it in items:
            if it.lo < lo:
                lo = it.lo
            if it.hi > hi:
                hi = it.hi
        if lo > hi:
            raise ValueError("hull of empty collection")
        return Interval(lo, hi)

    # ------------------------------------------------------------------
    # basic queries
    # ------------------------------------------------------------------

    def __repr__(self) -> str:
        return f"[{self.lo!r}, {self.hi!r}]"

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, Interval)
            and self.lo == other.lo
            and self.hi == other.hi
        )

    def __hash__(self) -> int:
        return hash((self.lo, self.hi))

    @property
    def width(self) -> float:
        return _up(self.hi - self.lo)

    @property
    def mid(self) -> float:
        m = 0.5 * (self.lo + self.hi)
        if not math.isfinite(m):
            m = 0.5 * self.lo + 0.5 * self.hi
        return min(max(m, self.lo), self.hi)

    @property
    def rad(self) -> float:
        m = self.mid
        return _up(max(m - self.lo, self.hi - m))

    @property
    def mag(self) -> float:
        """Upper bound on |x| over the interval."""
        return max(abs(self.lo), abs(self.hi))

    @property
    def mig(self) -> float:
        """Lower bound on |x| over the interval (0 if it straddles 0)."""
        if self.lo > 0.0:
            return self.lo
        if self.hi < 0.0:
            return -self.hi
        return 0.0

    def contains(self, x: float) -> bool:
        return self.lo <= x <= self.hi

    def contains_zero(self) -> bool:
        return self.lo <= 0.0 <= self.hi

    def is_subset(self, other: "Interval") -> bool:
        return other.lo <= self.lo and self.hi <= other.hi

    def intersects(self, other: "Interval") -> bool:
        return self.lo <= other.hi and other.lo <= self.hi

    def intersect(self, other: "Interval") -> "Interval":
        lo = max(self.lo, other.lo)
        hi = min(self.hi, other.hi)
        if lo > hi:
            raise ValueError("empty intersection")
        return Interval(lo, hi)

    def hull(self, other: "Interval") -> "Interval":
        return Interval(min(self.lo, other.lo), max(self.hi, other.hi))

    def widen_ulps(self, n: int = 1) -> "Interval":
        lo, hi = self.lo, self.hi
        for _ in range(n):
            lo = _down(lo)
            hi = _up(hi)
        return Interval(lo, hi)

    # ------------------------------------------------------------------
    # arithmetic
    # ------------------------------------------------------------------

    def __neg__(self) -> "Interval":
        return Interval(-self.hi, -self.lo)

    def __add__(self, other) -> "Interval":
        if isinstance(other, Interval):
            return Interval(_down(self.lo + other.lo), _up(self.hi + other.hi))
        if isinstance(other, (int, float)):
            o = float(other)
            return Interval(_down(self.lo + o), _up(self.hi + o))
        return NotImplemented

    __radd__ = __add__

    def __sub__(self, other) -> "Interval":
        if isinstance(other, Interval):
            return Interval(_down(self.lo - other.hi), _up(self.hi - other.lo))
        if isinstance(other, (int, float)):
            o = float(other)
            return Interval(_down(self.lo - o), _up(self.hi - o))
        return NotImplemented

    def __rsub__(self, other) -> "Interval":
        if isinstance(other, (int, float)):
            o = float(other)
            return Interval(_down(o - self.hi), _up(o - self.lo))
        return NotImplemented

    def __mul__(self, other) -> "Interval":
        if isinstance(other, Interval):
            a, b, c, d = self.lo, self.hi, other.lo, other.hi
            p1 = a * c
            p2 = a * d
            p3 = b * c
            p4 = b * d
            return Interval(_down(min(p1, p2, p3, p4)), _up(max(p1, p2, p3, p4)))
        if isinstance(other, (int, float)):
            o = float(other)
            p1 = self.lo * o
            p2 = self.hi * o
            if p1 > p2:
                p1, p2 = p2, p1
            return Interval(_down(p1), _up(p2))
        return NotImplemented

    __rmul__ = __mul__

    def __truediv__(self, other) -> "Interval":
        if isinstance(other, Interval):
            if other.contains_zero():
                raise DivisionByZeroInterval(f"divisor {other} contains zero")
            a, b, c, d = self.lo, self.hi, other.lo, other.hi
            q1 = a / c
            q2 = a / d
            q3 = b / c
            q4 = b / d
            return Interval(_down(min(q1, q2, q3, q4)), _up(max(q1, q2, q3, q4)))
        if isinstance(other, (int, float)):
            o = float(other)
            if o == 0.0:
                raise DivisionByZeroInterval("division by scalar zero")
            q1 = self.lo / o
            q2 = self.hi / o
            if q1 > q2:
                q1, q2 = q2, q1
            return Interval(_down(q1), _up(q2))
        return NotImplemented

    def __rtruediv__(self, other) -> "Interval":
        if isinstance(other, (int, float)):
            return Interval.point(float(other)) / self
        return NotImplemented

    def sqr(self) -> "Interval":
        a, b = self.lo, self.hi
        if a >= 0.0:
            return Interval(_down(a * a), _up(b * b))
        if b <= 0.0:
            return Interval(_down(b * b), _up(a * a))
        m = max(-a, b)
        return Interval(0.0, _up(m * m))

    def abs(self) -> "Interval":
        return Interval(self.mig, self.mag)

    def pow_int(self, n: int) -> "Interval":
        if n < 0:
            return 1.0 / self.pow_int(-n)
        if n == 0:
            return Interval(1.0, 1.0)
        if n == 1:
            return self
        # even powers through |x| keep the lower endpoint sharp at 0
        base = self.abs() if n % 2 == 0 else self
        r = base
        for _ in range(n - 1):
            r = r * base
        return r


# ----------------------------------------------------------------------
# constants
# ----------------------------------------------------------------------

PI = Interval(math.pi, _up(math.pi))  # pi rounds down in binary64
TWO_PI = PI * 2
HALF_PI = PI / 2
EULER_GAMMA = Interval(0.5772156649015328, _up(0.5772156649015329))
LN2 = Interval(_down(math.log(2.0)), _up(math.log(2.0)))
ZERO = Interval(0.0, 0.0)
ONE = Interval(1.0, 1.0)


# ----------------------------------------------------------------------
# elementary functions
# ----------------------------------------------------------------------


def iv_exp(a: Interval) -> Interval:
    try:
        lo = math.exp(a.lo)
    except OverflowError:
        lo = _INF
    try:
        hi = math.exp(a.hi)
    except OverflowError:
        hi = _INF
    lo = max(0.0, _down2(lo))
    hi = _up2(hi)
    return Interval(lo, hi)


def iv_log(a: Interval) -> Interval:
    if a.lo <= 0.0:
        raise DomainViolation(f"log requires positive interval, got {a}")
    return Interval(_down2(math.log(a.lo)), _up2(math.log(a.hi)))


def iv_sqrt(a: Interval) -> Interval:
    if a.lo < 0.0:
        raise DomainViolation(f"sqrt requires nonnegative interval, got {a}")
    return Interval(max(0.0, _down(math.sqrt(a.lo))), _up(math.sqrt(a.hi)))


def iv_atan(a: Interval) -> Interval:
    return Interval(_down2(math.atan(a.lo)), _up2(math.atan(a.hi)))


def iv_arccos(a: Interval) -> Interval:
    if a.lo < -1.0 or a.hi > 1.0:
        raise DomainViolation(f"arccos requires interval in [-1,1], got {a}")
    # decreasing
    return Interval(max(0.0, _down2(math.acos(a.hi))), _up2(math.acos(a.lo)))


def iv_sinh(a: Interval) -> Interval:
    return Interval(_down2(math.sinh(a.lo)), _up2(math.sinh(a.hi)))


def iv_cosh(a: Interval) -> Interval:
    lo_v = math.cosh(a.lo)
    hi_v = math.cosh(a.hi)
    if a.contains_zero():
        return Interval(1.0, _up2(max(lo_v, hi_v)))
    return Interval(max(1.0, _down2(min(lo_v, hi_v))), _up2(max(lo_v, hi_v)))


def _cos_point(x: float) -> tuple[float, float]:
    c = math.cos(x)
    return _down2(c), _up2(c)


def _sin_point(x: float) -> tuple[float, float]:
    s = math.sin(x)
    return _down2(s), _up2(s)


def iv_cos(a: Interval) -> Interval:
    if a.hi - a.lo >= TWO_PI.hi:
        return Interval(-1.0, 1.0)
    lo1, hi1 = _cos_point(a.lo)
    lo2, hi2 = _cos_point(a.hi)
    lo = min(lo1, lo2)
    hi = max(hi1, hi2)
    # extrema of cos at integer multiples of pi
    k_min = math.floor(a.lo / math.pi) - 1
    k_max = math.ceil(a.hi / math.pi) + 1
    for k in range(k_min, k_max + 1):
        kpi = PI * k
        if kpi.hi >= a.lo and kpi.lo <= a.hi:
            if k % 2 == 0:
                hi = 1.0
            else:
                lo = -1.0
    return Interval(max(lo, -1.0), min(hi, 1.0))


def iv_sin(a: Interval) -> Interval:
    if a.hi - a.lo >= TWO_PI.hi:
        return Interval(-1.0, 1.0)
    lo1, hi1 = _sin_point(a.lo)
    lo2, hi2 = _sin_point(a.hi)
    lo = min(lo1, lo2)
    hi = max(hi1, hi2)
    # extrema of sin at (k + 1/2) pi
    k_min = math.floor(a.lo / math.pi - 0.5) - 1
    k_max = math.ceil(a.hi / math.pi - 0.5) + 1
    for k in range(k_min, k_max + 1):
        ext = PI * k + HALF_PI
        if ext.hi >= a.lo and ext.lo <= a.hi:
            if k % 2 == 0:
                hi = 1.0
            else:
                lo = -1.0
    return Interval(max(lo, -1.0), min(hi, 1.0))


def iv_cot(a: Interval) -> Interval:
    s = iv_sin(a)
    if s.contains_zero():
        raise PoleProximity(f"cot: sin enclosure of {a} touches zero")
    return iv_cos(a) / s


def iv_csc(a: Interval) -> Interval:
    s = iv_sin(a)
    if s.contains_zero():
        raise PoleProximity(f"csc: sin enclosure of {a} touches zero")
    return 1.0 / s


_ELEM = {
    "exp": iv_exp,
    "log": iv_log,
    "sqrt": iv_sqrt,
    "sin": iv_sin,
    "cos": iv_cos,
    "sinh": iv_sinh,
    "cosh": iv_cosh,
    "cot": iv_cot,
    "csc": iv_csc,
    "arccos": iv_arccos,
    "atan": iv_atan,
}


def iv_elem(fn: str, a: Interval) -> Interval:
    """Elementary function dispatch by name."""
    try:
        f = _ELEM[fn]
    except KeyError:
        raise DomainViolation(f"unknown elementary function {fn!r}") from None
    return f(a)


def iv_arith(op: str, a: Interval, b: Interval) -> Interval:
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    if op == "div":
        return a / b
    raise DomainViolation(f"unknown arithmetic op {op!r}")


def iv_sign(a: Interval) -> SignResult:
    if a.lo > 0.0:
        return SignResult.STRICTLY_POSITIVE
    if a.hi < 0.0:
        return SignResult.STRICTLY_NEGATIVE
    return SignResult.CONTAINS_ZERO


def iv_subdivide(a: Interval, n: int) -> list[Interval]:
    """Cover of ``a`` by ``n`` consecutive pieces sharing endpoints."""
    if n < 1:
        raise DomainViolation("subdivision count must be >= 1")
    if n == 1 or a.lo == a.hi:
        return [Interval(a.lo, a.hi) for _ in range(n)] if a.lo == a.hi else [a]
    cuts = [a.lo]
    d = a.hi - a.lo
    for i in range(1, n):
        c = a.lo + d * (i / n)
        cuts.append(min(max(c, cuts[-1]), a.hi))
    cuts.append(a.hi)
    return [Interval(cuts[i], cuts[i + 1]) for i in range(n)]


def iv_min(a: Interval, b: Interval) -> Interval:
    return Interval(min(a.lo, b.lo), min(a.hi, b.hi))


def iv_max(a: Interval, b: Interval) -> Interval:
    return Interval(max(a.lo, b.lo), max(a.hi, b.hi))


# ----------------------------------------------------------------------
# complex rectangles
# ----------------------------------------------------------------------


class ComplexInterval:
    """Axis-aligned rectangular enclosure re + i*im of a complex number."""

    __slots__ = ("re", "im")

    def __init__(self, re: Interval | float, im: Interval | float = 0.0):
        self.re = re if isinstance(re, Interval) else Interval(float(re))
        self.im = im if isinstance(im, Interval) else Interval(float(im))

    @staticmethod
    def point(z: complex) -> "ComplexInterval":
        return ComplexInterval(Interval.point(z.real), Interval.point(z.imag))

    def __repr__(self) -> str:
        return f"({self.re!r} + i*{self.im!r})"

    def conj(self) -> "ComplexInterval":
        return ComplexInterval(self.re, -self.im)

    def __neg__(self) -> "ComplexInterval":
        return ComplexInterval(-self.re, -self.im)

    def __add__(self, other) -> "ComplexInterval":
        if isinstance(other, ComplexInterval):
            return ComplexInterval(self.re + other.re, self.im + other.im)
        if isinstance(other, (Interval, int, float)):
            return ComplexInterval(self.re + other, self.im)
        return NotImplemented

    __radd__ = __add__

    def __sub__(self, other) -> "ComplexInterval":
        if isinstance(other, ComplexInterval):
            return ComplexInterval(self.re - other.re, self.im - other.im)
        if isinstance(other, (Interval, int, float)):
            return ComplexInterval(self.re - other, self.im)
        return NotImplemented

    def __rsub__(self, other) -> "ComplexInterval":
        return (-self) + other

    def __mul__(self, other) -> "ComplexInterval":
        if isinstance(other, ComplexInterval):
            return ComplexInterval(
                self.re * other.re - self.im * other.im,
                self.re * other.im + self.im * other.re,
            )
        if isinstance(other, (Interval, int, float)):
            return ComplexInterval(self.re * other, self.im * other)
        return NotImplemented

    __rmul__ = __mul__

    def __truediv__(self, other) -> "ComplexInterval":
        if isinstance(other, ComplexInterval):
            d = other.re.sqr() + other.im.sqr()
            if d.contains_zero():
                raise DivisionByZeroInterval(
                    f"complex divisor {other} modulus touches zero"
                )
            n = self * other.conj()
            return ComplexInterval(n.re / d, n.im / d)
        if isinstance(other, (Interval, int, float)):
            return ComplexInterval(self.re / other, self.im / other)
        return NotImplemented

    def __rtruediv__(self, other) -> "ComplexInterval":
        if isinstance(other, (Interval, int, float)):
            one = other if isinstance(other, Interval) else Interval(float(other))
            return ComplexInterval(one, ZERO) / self
        return NotImplemented

    def abs(self) -> Interval:
        return iv_sqrt(self.abs_sq())

    def abs_sq(self) -> Interval:
        s = self.re.sqr() + self.im.sqr()
        # the true square modulus is nonnegative; outward rounding of the
        # sum may push an exact zero just below it
        return Interval(max(s.lo, 0.0), s.hi) if s.lo < 0.0 else s

    def pow_int(self, n: int) -> "ComplexInterval":
        if n < 0:
            return 1.0 / self.pow_int(-n)
        r = ComplexInterval(ONE, ZERO)
        for _ in range(n):
            r = r * self
        return r

    def sup_abs_im(self) -> float:
        return self.im.mag

    def contains(self, z: complex) -> bool:
        return self.re.contains(z.real) and self.im.contains(z.imag)


def civ_exp(z: ComplexInterval) -> ComplexInterval:
    r = iv_exp(z.re)
    return ComplexInterval(r * iv_cos(z.im), r * iv_sin(z.im))


def civ_sin(z: ComplexInterval) -> ComplexInterval:
    return ComplexInterval(
        iv_sin(z.re) * iv_cosh(z.im), iv_cos(z.re) * iv_sinh(z.im)
    )


def civ_cos(z: ComplexInterval) -> ComplexInterval:
    return ComplexInterval(
        iv_cos(z.re) * iv_cosh(z.im), -(iv_sin(z.re) * iv_sinh(z.im))
    )


def civ_sin_abs_sq(z: ComplexInterval) -> Interval:
    """|sin z|^2 = sin^2(Re z) + sinh^2(Im z), free of rectangle dependency."""
    return iv_sin(z.re).sqr() + iv_sinh(z.im).sqr()


def civ_cos_abs_sq(z: ComplexInterval) -> Interval:
    """|cos z|^2 = cos^2(Re z) + sinh^2(Im z)."""
    return iv_cos(z.re).sqr() + iv_sinh(z.im).sqr()


def civ_cot(z: ComplexInterval) -> ComplexInterval:
    """cot z = (sin a cos a - i sinh b cosh b) / (sin^2 a + sinh^2 b)."""
    sa = iv_sin(z.re)
    ca = iv_cos(z.re)
    sh = iv_sinh(z.im)
    ch = iv_cosh(z.im)
    d = sa.sqr() + sh.sqr()
    if d.contains_zero():
        raise PoleProximity(f"complex cot at {z}: |sin|^2 touches zero")
    return ComplexInterval((sa * ca) / d, -((sh * ch) / d))


def civ_csc(z: ComplexInterval) -> ComplexInterval:
    """csc z = conj(sin z) / |sin z|^2."""
    sa = iv_sin(z.re)
    ca = iv_cos(z.re)
    sh = iv_sinh(z.im)
    ch = iv_cosh(z.im)
    d = sa.sqr() + sh.sqr()
    if d.contains_zero():
        raise PoleProximity(f"complex csc at {z}: |sin|^2 touches zero")
    return ComplexInterval((sa * ch) / d, -((ca * sh) / d))


def civ_sec(z: ComplexInterval) -> ComplexInterval:
    """sec z = conj(cos z) / |cos z|^2."""
    sa = iv_sin(z.re)
    ca = iv_cos(z.re)
    sh = iv_sinh(z.im)
    ch = iv_cosh(z.im)
    d = ca.sqr() + sh.sqr()
    if d.contains_zero():
        raise PoleProximity(f"complex sec at {z}: |cos|^2 touches zero")
    return ComplexInterval((ca * ch) / d, (sa * sh) / d)


def civ_arith(op: str, a: ComplexInterval, b: ComplexInterval | None = None):
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    if op == "div":
        return a / b
    if op == "exp":
        return civ_exp(a)
    if op == "abs":
        return a.abs()
    raise DomainViolation(f"unknown complex op {op!r}")


def certify_real(z: ComplexInterval, what: str = "value") -> Interval:
    """Extract the real part of an analytically-real quantity.

    Raises NotRealCertified when the imaginary enclosure excludes zero.
    """
    from .errors import NotRealCertified

    if not z.im.contains_zero():
        raise NotRealCertified(
            f"{what}: imaginary enclosure {z.im} excludes zero"
        )
    return z.re


def certify_imag(z: ComplexInterval, what: str = "value") -> Interval:
    """Extract the imaginary part of an analytically-imaginary quantity."""
    from .errors import NotRealCertified

    if not z.re.contains_zero():
        raise NotRealCertified(
            f"{what}: real enclosure {z.re} excludes zero"
        )
    return z.im

"""Rigorous Chebyshev approximation of analytic functions.

Nodes, interval coefficients, Bernstein-ellipse (stadium) error bounds for
values and derivatives, interval-safe evaluation through the theta
substitution x = cos(theta) with fifth-order Taylor expansion, and exact
integration.  Clenshaw recurrences are deliberately not used: with interval
coefficients they blow up exponentially in the degree, while the cosine
form keeps the error growth linear.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

from .errors import (
    DomainViolation,
    EnclosureBlowup,
    InvalidNesting,
    InvalidSubdomain,
    LengthMismatch,
    ShapeMismatch,
)
from .interval import (
    EULER_GAMMA,
    HALF_PI,
    PI,
    ComplexInterval,
    Interval,
    iv_arccos,
    iv_cos,
    iv_cosh,
    iv_exp,
    iv_log,
    iv_sin,
    iv_sinh,
    iv_sqrt,
    iv_subdivide,
)

_FACT = [1.0, 1.0, 2.0, 6.0, 24.0, 120.0, 720.0]


# ----------------------------------------------------------------------
# stadium geometry
# ----------------------------------------------------------------------


@dataclass(frozen=True)
class StadiumSpec:
    """Bernstein ellipse E_rho with derived quantities.

    eta = log(rho); D_rho bounds the distance from E_rho to [-1,1] from
    below; L_rho bounds the circumference from above.
    """

    rho: Interval
    eta: Interval
    D_rho: Interval
    L_rho: Interval

    @staticmethod
    def from_rho(rho: Interval) -> "StadiumSpec":
        if rho.lo <= 1.0:
            raise DomainViolation(f"stadium requires rho > 1, got {rho}")
        eta = iv_log(rho)
        inv = 1.0 / rho
        d = (rho + inv) * 0.5 - 1.0
        ln = PI * iv_sqrt(rho.sqr() + inv.sqr())
        return StadiumSpec(rho, eta, d, ln)

    @property
    def semi_major(self) -> Interval:
        return (self.rho + 1.0 / self.rho) * 0.5

    @property
    def semi_minor(self) -> Interval:
        return (self.rho - 1.0 / self.rho) * 0.5


def stadium_from_halfwidth(c: Interval) -> StadiumSpec:
    """Stadium through rho = c + sqrt(c^2 + 1), the ellipse with semi-minor
    axis c."""
    if c.lo <= 0.0:
        raise DomainViolation(f"halfwidth must be positive, got {c}")
    rho = c + iv_sqrt(c.sqr() + 1.0)
    return StadiumSpec.from_rho(rho)


def stadium_from_semimajor(a: Interval) -> StadiumSpec:
    """Stadium through rho = a + sqrt(a^2 - 1), the ellipse with semi-major
    axis a."""
    if a.lo <= 1.0:
        raise DomainViolation(f"semi-major axis must exceed 1, got {a}")
    rho = a + iv_sqrt(a.sqr() - 1.0)
    return StadiumSpec.from_rho(rho)


# ----------------------------------------------------------------------
# nodes and coefficients
# ----------------------------------------------------------------------


def cheb_nodes(n: int, kind: str = "zeros") -> list[Interval]:
    """Enclosures of the N+1 interpolation nodes, in descending order."""
    if n < 1:
        raise DomainViolation("node count parameter must be >= 1")
    if kind == "zeros":
        return [_node_angle_cos(2 * j + 1, 2 * (n + 1)) for j in range(n + 1)]
    if kind == "extrema":
        return [_node_angle_cos(2 * j, 2 * n) for j in range(n + 1)]
    raise DomainViolation(f"unknown node kind {kind!r}")


def _node_angle(num: int, den: int) -> Interval:
    # angle num*pi/den
    return PI * num / den


def _node_angle_cos(num: int, den: int) -> Interval:
    if 2 * num == den:
        return Interval(0.0, 0.0)  # cos(pi/2) exactly
    return iv_cos(_node_angle(num, den))


def node_angles(n: int, kind: str = "zeros") -> list[Interval]:
    """Enclosures of the node angles theta_j with x_j = cos(theta_j)."""
    if kind == "zeros":
        return [_node_angle(2 * j + 1, 2 * (n + 1)) for j in range(n + 1)]
    if kind == "extrema":
        return [_node_angle(2 * j, 2 * n) for j in range(n + 1)]
    raise DomainViolation(f"unknown node kind {kind!r}")


def _is_civ(v) -> bool:
    return isinstance(v, ComplexInterval)


def cheb_coeffs_1d(samples: Sequence):
    """Interval coefficients from samples at the N+1 zero nodes.

    a_j = (2/(N+1)) sum_r f(x_r) cos(j theta_r), with a_0 halved.  Works for
    Interval or ComplexInterval samples.
    """
    n = len(samples) - 1
    if n < 0:
        raise LengthMismatch("empty sample vector")
    npts = n + 1
    complex_mode = _is_civ(samples[0])
    coeffs = []
    for j in range(npts):
        if complex_mode:
            acc = ComplexInterval(Interval(0.0), Interval(0.0))
        else:
            acc = Interval(0.0)
        for r, f in enumerate(samples):
            t = _coscache(j * (2 * r + 1), 2 * npts)
            acc = acc + f * t
        acc = acc * (2.0 / npts)
        if j == 0:
            acc = acc * 0.5
        coeffs.append(acc)
    return coeffs


_COS_CACHE: dict[tuple[int, int], Interval] = {}


def _coscache(num: int, den: int) -> Interval:
    """Enclosure of cos(num*pi/den) with small-period reduction."""
    num = num % (2 * den)
    key = (num, den)
    v = _COS_CACHE.get(key)
    if v is None:
        if 2 * num == den or 2 * num == 3 * den:
            v = Interval(0.0, 0.0)
        else:
            v = iv_cos(PI * num / den)
        _COS_CACHE[key] = v
    return v


def cheb_coeffs_2d(samples: Sequence[Sequence[Interval]]):
    """Tensor coefficients from a (M+1) x (N+1) grid of zero-node samples.

    a_{0,0} is quartered and edge rows/columns halved, matching the
    normalization V = 4/((M+1)(N+1)) T f T^t.
    """
    m = len(samples) - 1
    if m < 0:
        raise ShapeMismatch("empty sample grid")
    n = len(samples[0]) - 1
    for row in samples:
        if len(row) != n + 1:
            raise ShapeMismatch("ragged sample grid")
    # first transform along axis 1 (y), then axis 0 (x)
    inner = [cheb_coeffs_1d(row) for row in samples]
    cols = [[inner[i][k] for i in range(m + 1)] for k in range(n + 1)]
    outer = [cheb_coeffs_1d(col) for col in cols]
    return [[outer[k][j] for k in range(n + 1)] for j in range(m + 1)]


def cheb_derivative_coeffs(coeffs: Sequence):
    """Coefficients of the derivative of sum c_n T_n, same basis."""
    n = len(coeffs) - 1
    if n < 0:
        raise LengthMismatch("empty coefficient vector")
    zero = coeffs[0] * 0.0
    d = [zero for _ in range(n + 1)]
    if n == 0:
        return [zero]
    d[n - 1] = coeffs[n] * (2.0 * n)
    for k in range(n - 1, 0, -1):
        prev = d[k + 1] if k + 1 <= n - 1 else zero
        d[k - 1] = prev + coeffs[k] * (2.0 * k)
    d[0] = d[0] * 0.5
    return d[:n]


# ----------------------------------------------------------------------
# error bounds
# ----------------------------------------------------------------------


def interp_error_bound(
    m_rho: Interval,
    spec: StadiumSpec,
    n: int,
    kind: str = "zeros",
    deriv_order: int = 0,
    subdomain: Interval | None = None,
) -> Interval:
    """Upper enclosure of the sup-norm interpolation error on [-1,1].

    deriv_order 0 uses the Bernstein bound; orders 1 and 2 use the
    polynomial-derivative majorants (zeros nodes only).  The order-2 bound
    requires a subdomain with |x| bounded away from 1.
    """
    if m_rho.lo < 0.0:
        raise DomainViolation("modulus bound must be nonnegative")
    if n < 1:
        raise DomainViolation("node parameter must be >= 1")
    eta, d, ln = spec.eta, spec.D_rho, spec.L_rho
    if deriv_order == 0:
        if kind == "zeros":
            den = iv_sinh(eta * (n + 1)) * d * PI
            return _upper(m_rho * ln / den)
        if kind == "extrema":
            den = iv_sinh(eta) * iv_sinh(eta * n) * d * (PI * 2.0)
            return _upper(m_rho * ln / den)
        raise DomainViolation(f"unknown node kind {kind!r}")
    if kind != "zeros":
        raise DomainViolation("derivative bounds implemented for zeros nodes")
    if deriv_order == 1:
        pref = m_rho * ln / (iv_sinh(eta * (n + 1)) * (PI * 2.0))
        poly = Interval(float((n + 1) * (n + 3))) / d + 1.0 / d.sqr()
        return _upper(pref * poly)
    if deriv_order == 2:
        if subdomain is None:
            raise InvalidSubdomain("order-2 bound needs an explicit subdomain")
        gap = 1.0 - subdomain.sqr()
        if gap.lo <= 0.0:
            raise InvalidSubdomain(
                f"order-2 bound invalid on subdomain touching +-1: {subdomain}"
            )
        pref = m_rho * ln / (iv_sinh(eta * (n + 1)) * (PI * 2.0))
        nn = float((n + 1) * (n + 3))
        poly = (
            Interval(2.0 * nn) / (d * gap)
            + Interval(nn) / d.sqr()
            + 1.0 / d.pow_int(3)
        )
        return _upper(pref * poly)
    raise DomainViolation("deriv_order must be 0, 1 or 2")


def _upper(v: Interval) -> Interval:
    return Interval(max(v.lo, 0.0), v.hi)


def interp_error_on_stadium(
    m_rho: Interval, outer: StadiumSpec, inner: StadiumSpec, n: int
) -> Interval:
    """Bound on |f - p_N| on the closed inner stadium (zeros nodes).

    Hermite's formula with |W| >= sinh(eta_outer (N+1)) on the outer
    boundary, |W| <= cosh(eta_inner (N+1)) on the inner stadium, and a
    validated lower bound on the distance between the two ellipses.
    """
    if inner.rho.hi >= outer.rho.lo:
        raise InvalidNesting("inner stadium must be strictly inside outer")
    d = _ellipse_gap(outer, inner)
    num = m_rho * outer.L_rho * iv_cosh(inner.eta * (n + 1))
    den = iv_sinh(outer.eta * (n + 1)) * d * (PI * 2.0)
    return _upper(num / den)


def _ellipse_gap(outer: StadiumSpec, inner: StadiumSpec) -> Interval:
    """Validated lower bound on dist(E_inner, E_outer): the semi-major gap."""
    d = outer.D_rho - (inner.semi_major - 1.0)
    if d.lo <= 0.0:
        raise InvalidNesting("stadium gap not certified positive")
    return d


def cauchy_deriv_bound(
    m: Interval, rho_outer: StadiumSpec, rho_inner: StadiumSpec | None, order: int
) -> Interval:
    """Bound on the order-th derivative inside rho_inner (or on [-1,1])
    given |f| <= m on E_{rho_outer}, via Cauchy's integral formula.
    """
    if order < 0:
        raise DomainViolation("order must be nonnegative")
    if order == 0:
        return m
    if rho_inner is None:
        d = rho_outer.D_rho
    else:
        d = _ellipse_gap(rho_outer, rho_inner)
    num = m * float(_FACT[order] if order < len(_FACT) else math.factorial(order))
    num = num * rho_outer.L_rho
    den = d.pow_int(order + 1) * (PI * 2.0)
    return _upper(num / den)


def lebesgue_const(n: int) -> Interval:
    """Upper enclosure of the Lebesgue constant for n zero nodes."""
    if n < 1:
        raise DomainViolation("node count must be >= 1")
    base = (
        iv_log(Interval(float(n)))
        + EULER_GAMMA
        + iv_log(Interval(8.0) / PI)
    ) * (2.0 / PI)
    slack = PI / (72.0 * n * n)
    v = base + Interval(0.0, slack.hi)
    return Interval(max(v.lo, 1.0), max(v.hi, 1.0))


def interp_2d_error(
    err_x: Interval, err_y: Interval, lebesgue_x: Interval
) -> Interval:
    """Two-step tensor bound: ||f - Lf|| <= err_x + Lambda_x * err_y."""
    if err_x.lo < 0.0 or err_y.lo < 0.0 or lebesgue_x.lo < 0.0:
        raise DomainViolation("2d error inputs must be nonnegative")
    return _upper(err_x + lebesgue_x * err_y)


# ----------------------------------------------------------------------
# models
# ----------------------------------------------------------------------


@dataclass(frozen=True)
class AffineMap:
    """x_native = center + halfwidth * t with t in [-1,1]."""

    center: Interval
    halfwidth: Interval

    @staticmethod
    def to_unit() -> "AffineMap":
        return AffineMap(Interval(0.0), Interval(1.0))

    @staticmethod
    def for_domain(lo: Interval, hi: Interval) -> "AffineMap":
        return AffineMap((lo + hi) * 0.5, (hi - lo) * 0.5)

    def to_t(self, x: Interval) -> Interval:
        if self.halfwidth.contains_zero():
            raise DomainViolation("degenerate domain map")
        return (x - self.center) / self.halfwidth

    def from_t(self, t: Interval) -> Interval:
        return self.center + self.halfwidth * t

    @property
    def native_lo(self) -> float:
        return (self.center - self.halfwidth).lo

    @property
    def native_hi(self) -> float:
        return (self.center + self.halfwidth).hi


@dataclass(frozen=True)
class Provenance:
    m_rho: Interval
    rho: Interval
    n: int


@dataclass(frozen=True)
class ChebModel:
    """Chebyshev interpolant with interval coefficients and a certified
    sup-norm error bound on its domain.

    1D: coeffs is a list; 2D: a nested list indexed [axis0][axis1].
    eval encloses p(x); the defining contract is f(x) in eval(x) +- err.
    """

    coeffs: list
    node_kind: str
    err: Interval
    maps: tuple[AffineMap, ...]
    provenance: tuple[Provenance, ...]
    # certified error bounds for derivative evaluations, keyed by the
    # derivative multi-index
    deriv_err: tuple[tuple[tuple[int, ...], Interval], ...] = field(
        default_factory=tuple
    )

    @property
    def ndim(self) -> int:
        return len(self.maps)

    @property
    def degrees(self) -> tuple[int, ...]:
        if self.ndim == 1:
            return (len(self.coeffs) - 1,)
        return (len(self.coeffs) - 1, len(self.coeffs[0]) - 1)

    # -- evaluation ----------------------------------------------------

    def eval(self, *boxes: Interval, taylor_order: int = 5,
             deriv: tuple[int, ...] | int = 0):
        """Enclosure of the interpolant (or a derivative) over a box,
        widened by the model error (and the stored derivative error)."""
        if isinstance(deriv, int):
            deriv = (deriv,) * self.ndim
        if len(boxes) != self.ndim or len(deriv) != self.ndim:
            raise DomainViolation("dimension mismatch in eval")
        coeffs = self.coeffs
        total_d = sum(deriv)
        if self.ndim == 1:
            c = coeffs
            scale = Interval(1.0)
            for _ in range(deriv[0]):
                c = cheb_derivative_coeffs(c)
                scale = scale / self.maps[0].halfwidth
            t = self.maps[0].to_t(boxes[0])
            val = _eval_series_1d(c, t, taylor_order)
            val = val * scale if deriv[0] else val
            e = self._err_for(deriv)
            return _widen_by(val, e)
        # 2D
        c = coeffs
        scale = Interval(1.0)
        for axis in range(2):
            for _ in range(deriv[axis]):
                c = _deriv_2d(c, axis)
                scale = scale / self.maps[axis].halfwidth
        t0 = self.maps[0].to_t(boxes[0])
        t1 = self.maps[1].to_t(boxes[1])
        val = _eval_series_2d(c, t0, t1, taylor_order)
        if total_d:
            val = val * scale
        e = self._err_for(deriv)
        return _widen_by(val, e)

    def _err_for(self, deriv: tuple[int, ...]) -> Interval:
        if sum(deriv) == 0:
            return self.err
        for key, e in self.deriv_err:
            if tuple(key) == tuple(deriv):
                return e
        raise DomainViolation(
            f"model carries no certified error for derivative order {deriv}"
        )

    # -- integration ---------------------------------------------------

    def integrate(self) -> Interval:
        """Enclosure of the integral over the native 1D domain."""
        if self.ndim != 1:
            raise DomainViolation("integrate only for 1D models")
        total = _integrate_coeffs(self.coeffs)
        # error term: |integral of (f - p)| <= 2 * err on [-1,1]
        total = _widen_by(total, self.err * 2.0)
        return total * self.maps[0].halfwidth


def _widen_by(val, e: Interval):
    pad = Interval(-e.hi, e.hi)
    if isinstance(val, ComplexInterval):
        return ComplexInterval(val.re + pad, val.im + pad)
    return val + pad


def _integrate_coeffs(coeffs):
    n = len(coeffs) - 1
    total = coeffs[0] * 2.0
    for j in range(2, n + 1, 2):
        total = total + coeffs[j] * (2.0 / (1 - j * j))
    return total


def integrate_model(model: ChebModel) -> Interval:
    return model.integrate()


def _deriv_2d(coeffs, axis: int):
    if axis == 0:
        cols = [[row[k] for row in coeffs] for k in range(len(coeffs[0]))]
        dcols = [cheb_derivative_coeffs(c) for c in cols]
        return [[dcols[k][j] for k in range(len(dcols))] for j in range(len(dcols[0]))]
    return [cheb_derivative_coeffs(row) for row in coeffs]


# -- series evaluation through theta = arccos(t) ------------------------


def _theta_of(t: Interval) -> Interval:
    lo = max(t.lo, -1.0)
    hi = min(t.hi, 1.0)
    if lo > hi:
        raise DomainViolation(f"evaluation box {t} outside [-1,1]")
    return iv_arccos(Interval(lo, hi))


def _eval_series_1d(coeffs, t: Interval, taylor_order: int):
    """Enclosure of sum c_n cos(n theta) over theta(t), Taylor in theta."""
    if taylor_order < 0 or taylor_order > 5:
        raise DomainViolation("taylor_order must be in 0..5")
    theta = _theta_of(t)
    mid = Interval.point(theta.mid)
    dt = theta - mid.lo
    # derivatives at the midpoint, remainder order on the full box
    complex_mode = _is_civ(coeffs[0])
    zero = coeffs[0] * 0.0
    total = zero
    dpow = Interval(1.0)
    for a in range(taylor_order):
        da = zero
        for nj, cn in enumerate(coeffs):
            da = da + cn * _cos_theta_deriv(nj, mid, a)
        total = total + da * (dpow / _FACT[a])
        dpow = dpow * dt
    rem = zero
    for nj, cn in enumerate(coeffs):
        rem = rem + cn * _cos_theta_deriv(nj, theta, taylor_order)
    total = total + rem * (dpow / _FACT[taylor_order])
    return total


def _cos_theta_deriv(nj: int, theta: Interval, a: int):
    r = a % 4
    arg = theta * nj
    if r == 0:
        base = iv_cos(arg)
    elif r == 1:
        base = -iv_sin(arg)
    elif r == 2:
        base = -iv_cos(arg)
    else:
        base = iv_sin(arg)
    if a == 0:
        return base
    return base * float(nj) ** a


def _eval_series_2d(coeffs, t0: Interval, t1: Interval, taylor_order: int):
    if taylor_order < 0 or taylor_order > 5:
        raise DomainViolation("taylor_order must be in 0..5")
    th0 = _theta_of(t0)
    th1 = _theta_of(t1)
    m0 = Interval.point(th0.mid)
    m1 = Interval.point(th1.mid)
    d0 = th0 - m0.lo
    d1 = th1 - m1.lo
    zero = coeffs[0][0] * 0.0
    total = zero
    # terms with a + b < taylor_order at midpoints
    for a in range(taylor_order):
        for b in range(taylor_order - a):
            dab = _partial_2d(coeffs, m0, m1, a, b)
            total = total + dab * (
                d0.pow_int(a) * d1.pow_int(b) / (_FACT[a] * _FACT[b])
            )
    # remainder: all |alpha| = taylor_order terms on the full theta boxes
    for a in range(taylor_order + 1):
        b = taylor_order - a
        dab = _partial_2d(coeffs, th0, th1, a, b)
        total = total + dab * (
            d0.pow_int(a) * d1.pow_int(b) / (_FACT[a] * _FACT[b])
        )
    return total


def _partial_2d(coeffs, th0: Interval, th1: Interval, a: int, b: int):
    zero = coeffs[0][0] * 0.0
    total = zero
    for j, row in enumerate(coeffs):
        f0 = _cos_theta_deriv(j, th0, a)
        rowsum = zero
        for kk, c in enumerate(row):
            rowsum = rowsum + c * _cos_theta_deriv(kk, th1, b)
        total = total + rowsum * f0
    return total


# ----------------------------------------------------------------------
# model construction
# ----------------------------------------------------------------------


def build_model_1d(
    samples: Sequence,
    err: Interval,
    m_rho: Interval,
    spec: StadiumSpec,
    amap: AffineMap,
    deriv_err: tuple[Interval, ...] = (),
) -> ChebModel:
    coeffs = cheb_coeffs_1d(samples)
    return ChebModel(
        coeffs=coeffs,
        node_kind="zeros",
        err=err,
        maps=(amap,),
        provenance=(Provenance(m_rho, spec.rho, len(samples) - 1),),
        deriv_err=deriv_err,
    )


def build_model_2d(
    samples: Sequence[Sequence[Interval]],
    err: Interval,
    prov: tuple[Provenance, Provenance],
    maps: tuple[AffineMap, AffineMap],
    deriv_err: tuple[Interval, ...] = (),
) -> ChebModel:
    coeffs = cheb_coeffs_2d(samples)
    return ChebModel(
        coeffs=coeffs,
        node_kind="zeros",
        err=err,
        maps=maps,
        provenance=prov,
        deriv_err=deriv_err,
    )


# ----------------------------------------------------------------------
# stadium boundary bounds
# ----------------------------------------------------------------------


def ellipse_point(spec: StadiumSpec, theta: Interval) -> ComplexInterval:
    """Enclosure of (rho e^{i theta} + e^{-i theta}/rho)/2 on the boundary."""
    c = iv_cos(theta)
    s = iv_sin(theta)
    rho = spec.rho
    inv = 1.0 / rho
    re = (rho + inv) * 0.5 * c
    im = (rho - inv) * 0.5 * s
    return ComplexInterval(re, im)


def stadium_bound(
    f: Callable[[ComplexInterval], ComplexInterval],
    spec: StadiumSpec,
    n_subdiv: int,
    mode: str = "upper_abs",
    arc: tuple[float, float] | None = None,
) -> Interval:
    """Bound |f| on the stadium boundary by an even theta subdivision.

    upper_abs: returns M with |f| <= M on the scanned arc (by the maximum
    modulus principle this bounds |f| on E_rho when f is analytic inside,
    which is the caller's responsibility and is recorded in certificates).
    lower_abs: returns m with |f| >= m on the scanned arc.

    The caller may declare symmetry by restricting the arc (the default is
    the quarter arc [0, pi/2], as justified by parity and mirror symmetry
    for the theta-quotient integrands).
    """
    if n_subdiv < 1:
        raise DomainViolation("need at least one boundary piece")
    if arc is None:
        arc = (0.0, math.pi / 2.0)
    lo_arc, hi_arc = arc
    pieces = iv_subdivide(Interval(lo_arc, hi_arc), n_subdiv)
    worst_lo = math.inf
    worst_hi = math.inf
    best_hi = -math.inf
    best_lo = -math.inf
    for th in pieces:
        z = ellipse_point(spec, th)
        try:
            v = f(z)
            a = v.abs()
        except EnclosureBlowup:
            raise
        except Exception as exc:  # noqa: BLE001 - diagnosed and rethrown
            raise EnclosureBlowup(f"boundary piece {th}: {exc}") from exc
        if not (math.isfinite(a.lo) and math.isfinite(a.hi)):
            raise EnclosureBlowup(f"boundary piece {th}: enclosure not finite")
        if a.lo < worst_lo:
            worst_lo = a.lo
            worst_hi = a.hi
        if a.hi > best_hi:
            best_hi = a.hi
            best_lo = a.lo
    if mode == "upper_abs":
        return Interval(best_lo, best_hi)
    if mode == "lower_abs":
        return Interval(worst_lo, worst_hi)
    raise DomainViolation(f"unknown stadium_bound mode {mode!r}")


# ----------------------------------------------------------------------
# serialization
# ----------------------------------------------------------------------

_FMT_VERSION = "chebmodel-v1"


def save_model(model: ChebModel, path: str) -> None:
    lines = [_FMT_VERSION]
    lines.append(f"ndim {model.ndim}")
    degs = model.degrees
    lines.append("degrees " + " ".join(str(d) for d in degs))
    lines.append(f"node_kind {model.node_kind}")
    for amap in model.maps:
        lines.append(
            "map "
            + " ".join(
                repr(v)
                for v in (
                    amap.center.lo,
                    amap.center.hi,
                    amap.halfwidth.lo,
                    amap.halfwidth.hi,
                )
            )
        )
    lines.append(f"err {model.err.lo!r} {model.err.hi!r}")
    for p in model.provenance:
        lines.append(
            "prov "
            + " ".join(
                repr(v)
                for v in (p.m_rho.lo, p.m_rho.hi, p.rho.lo, p.rho.hi)
            )
            + f" {p.n}"
        )
    for key, e in model.deriv_err:
        key_s = ",".join(str(v) for v in key)
        lines.append(f"deriv_err {key_s} {e.lo!r} {e.hi!r}")
    complex_mode = model.ndim == 1 and _is_civ(model.coeffs[0]) or (
        model.ndim == 2 and _is_civ(model.coeffs[0][0])
    )
    lines.append(f"complex {int(complex_mode)}")
    flat = model.coeffs if model.ndim == 1 else [c for row in model.coeffs for c in row]
    for c in flat:
        if complex_mode:
            lines.append(
                f"{c.re.lo!r} {c.re.hi!r} {c.im.lo!r} {c.im.hi!r}"
            )
        else:
            lines.append(f"{c.lo!r} {c.hi!r}")
    with open(path, "w", encoding="ascii") as fh:
        fh.write("\n".join(lines) + "\n")


def load_model(path: str) -> ChebModel:
    with open(path, "r", encoding="ascii") as fh:
        lines = [ln.rstrip("\n") for ln in fh if ln.strip()]
    if not lines or lines[0] != _FMT_VERSION:
        raise DomainViolation("unrecognized model file header")
    idx = 1
    meta: dict[str, list[str]] = {}
    maps = []
    provs = []
    deriv_err = []
    while idx < len(lines):
        parts = lines[idx].split()
        key = parts[0]
        if key == "ndim":
            ndim = int(parts[1])
        elif key == "degrees":
            degrees = [int(v) for v in parts[1:]]
        elif key == "node_kind":
            node_kind = parts[1]
        elif key == "map":
            vals = [float(v) for v in parts[1:]]
            maps.append(
                AffineMap(Interval(vals[0], vals[1]), Interval(vals[2], vals[3]))
            )
        elif key == "err":
            err = Interval(float(parts[1]), float(parts[2]))
        elif key == "prov":
            vals = [float(v) for v in parts[1:5]]
            provs.append(
                Provenance(
                    Interval(vals[0], vals[1]), Interval(vals[2], vals[3]),
                    int(parts[5]),
                )
            )
        elif key == "deriv_err":
            dkey = tuple(int(v) for v in parts[1].split(","))
            deriv_err.append(
                (dkey, Interval(float(parts[2]), float(parts[3])))
            )
        elif key == "complex":
            complex_mode = bool(int(parts[1]))
            idx += 1
            break
        else:
            raise DomainViolation(f"unknown model header line {lines[idx]!r}")
        idx += 1
    raw = lines[idx:]
    vals = []
    for ln in raw:
        parts = [float(v) for v in ln.split()]
        if complex_mode:
            vals.append(
                ComplexInterval(
                    Interval(parts[0], parts[1]), Interval(parts[2], parts[3])
                )
            )
        else:
            vals.append(Interval(parts[0], parts[1]))
    if ndim == 1:
        coeffs = vals
    else:
        n1 = degrees[1] + 1
        coeffs = [vals[i * n1 : (i + 1) * n1] for i in range(degrees[0] + 1)]
    return ChebModel(
        coeffs=coeffs,
        node_kind=node_kind,
        err=err,
        maps=tuple(maps),
        provenance=tuple(provs),
        deriv_err=tuple(deriv_err),
    )

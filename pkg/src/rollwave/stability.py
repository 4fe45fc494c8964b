"""Wave-specific stability machinery.

The Bloch eigenfunction ratio w, the integrands of the first-order
spectral correction lambda_1 = f~/g~, their xi-free polynomial coefficient
functions, rigorous modulus bounds on Bernstein stadiums, Chebyshev models
of f~, g~ and the factored coefficients in psi (and in the nome for
parameter ranges), the Whitham characteristic velocities, the simplicity
surface h(x,y), and the limiting wave profile.

Conventions (locked against the reference computation):

* the spatial variable is scaled, x in [-1,1], one period = 2;
* V(x) = w(x) e^{i Xi x} with Xi = omega * xi(alpha) and
  w = theta1^2(u1)/theta1^2(u2), u1 = pi x/2 + n pi/2 + i(1+psi)L/2,
  u2 = pi x/2 + i L/2, L = -log q;
* f~ = Im integral (V' + V'''/omega^2) conj(V'') dx,
  g~ = omega^2 Im integral V conj(V') dx; stability is f~ > 0, g~ < 0;
* the quintic in Xi: f~(psi) = sum p_n(psi) Xi^n with real p_n.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

from .cheb import (
    AffineMap,
    ChebModel,
    Provenance,
    StadiumSpec,
    build_model_1d,
    build_model_2d,
    cheb_nodes,
    ellipse_point,
    interp_2d_error,
    interp_error_bound,
    interp_error_on_stadium,
    cauchy_deriv_bound,
    lebesgue_const,
    stadium_bound,
    stadium_from_halfwidth,
    stadium_from_semimajor,
)
from .elliptic import (
    EllipticFrame,
    frame_from_q,
    jacobi_cn,
    lambda_kdv,
    theta1_abs_lower,
    theta1_block,
    theta1_majorant,
    wp_family,
    wp_second,
    wp_third,
    xi_dbeta,
    xi_floquet,
    xi_raw,
)
from .errors import (
    BoundBlowup,
    DenominatorContainsZero,
    DomainViolation,
    LeadingCoeffContainsZero,
    PoleProximity,
    XiUnavailable,
)
from .interval import (
    HALF_PI,
    PI,
    ComplexInterval,
    Interval,
    certify_real,
    iv_cos,
    iv_exp,
    iv_sqrt,
    iv_subdivide,
)


# ----------------------------------------------------------------------
# alpha lines
# ----------------------------------------------------------------------


@dataclass(frozen=True)
class AlphaLine:
    """alpha = n_tilde * omega + i psi omega', psi in [0,1]."""

    n_tilde: int
    psi: Interval

    def __post_init__(self):
        if self.n_tilde not in (0, 1):
            raise DomainViolation("n_tilde must be 0 or 1")
        if self.psi.lo < -1e-15 or self.psi.hi > 1.0 + 1e-15:
            raise DomainViolation(f"psi outside [0,1]: {self.psi}")

    def alpha(self, frame: EllipticFrame) -> ComplexInterval:
        re = frame.omega * float(self.n_tilde) if self.n_tilde else Interval(0.0)
        return ComplexInterval(re, self.psi * frame.omega_p)


def xi_scaled(line: AlphaLine, frame: EllipticFrame) -> Interval:
    """Xi = omega * xi(alpha), the Floquet exponent per scaled half-period."""
    if line.n_tilde == 0 and line.psi.lo <= 0.0:
        raise XiUnavailable("xi has a pole at alpha = 0")
    return xi_floquet(line.alpha(frame), frame) * frame.omega


def xi_scaled_dpsi(line: AlphaLine, frame: EllipticFrame) -> Interval:
    """d Xi / d psi = omega * omega' * d xi/d beta."""
    if line.n_tilde == 0 and line.psi.lo <= 0.0:
        raise XiUnavailable("xi has a pole at alpha = 0")
    return xi_dbeta(line.alpha(frame), frame) * frame.omega * frame.omega_p


# ----------------------------------------------------------------------
# eigenfunction w and integrand coefficient functions
# ----------------------------------------------------------------------


def _theta_sq_derivs(block: list[ComplexInterval]) -> list[ComplexInterval]:
    """x-derivatives of theta1^2(u(x)) given theta1 derivatives in u,
    du/dx = pi/2."""
    t0, t1, t2, t3, t4 = block
    h1 = HALF_PI
    h2 = h1.sqr()
    h3 = h2 * h1
    h4 = h2.sqr()
    return [
        t0 * t0,
        (t0 * t1) * (h1 * 2.0),
        (t1 * t1 + t0 * t2) * (h2 * 2.0),
        (t1 * t2 * 3.0 + t0 * t3) * (h3 * 2.0),
        (t2 * t2 * 3.0 + t1 * t3 * 4.0 + t0 * t4) * (h4 * 2.0),
    ]


class WEvaluator:
    """w = theta1^2(u1)/theta1^2(u2) and x-derivatives to order 4.

    Denominator theta blocks depend only on x and are cached per x-node,
    which matters when many psi samples reuse one x grid.
    """

    def __init__(self, frame: EllipticFrame, n_tilde: int):
        if n_tilde not in (0, 1):
            raise DomainViolation("n_tilde must be 0 or 1")
        self.frame = frame
        self.n_tilde = n_tilde
        self._den: dict[tuple[float, float], list[ComplexInterval]] = {}

    def _u2(self, x: Interval) -> ComplexInterval:
        return ComplexInterval(HALF_PI * x, self.frame.log_q_neg * 0.5)

    def _den_block(self, x: Interval) -> list[ComplexInterval]:
        key = (x.lo, x.hi)
        blk = self._den.get(key)
        if blk is None:
            b = theta1_block(self._u2(x), self.frame, 4)
            blk = _theta_sq_derivs(b)
            if blk[0].abs_sq().contains_zero():
                raise PoleProximity(f"theta1^2(u2) touches zero at x = {x}")
            self._den[key] = blk
        return blk

    def w_derivs(self, x: Interval, psi: Interval) -> list[ComplexInterval]:
        frame = self.frame
        ell = frame.log_q_neg
        u1 = ComplexInterval(
            HALF_PI * x + (HALF_PI if self.n_tilde else 0.0),
            (psi + 1.0) * ell * 0.5,
        )
        na = theta1_block(u1, frame, 4)
        a = _theta_sq_derivs(na)
        b = self._den_block(x)
        b0 = b[0]
        w0 = a[0] / b0
        w1 = (a[1] - w0 * b[1]) / b0
        w2 = (a[2] - w1 * b[1] * 2.0 - w0 * b[2]) / b0
        w3 = (a[3] - w2 * b[1] * 3.0 - w1 * b[2] * 3.0 - w0 * b[3]) / b0
        w4 = (
            a[4]
            - w3 * b[1] * 4.0
            - w2 * b[2] * 6.0
            - w1 * b[3] * 4.0
            - w0 * b[4]
        ) / b0
        return [w0, w1, w2, w3, w4]


def eigenfunc_w(
    x: Interval, line: AlphaLine, frame: EllipticFrame, order: int = 4
) -> list[ComplexInterval]:
    """Enclosures of w, w', ..., w^{(order)} at scaled position x."""
    if not 0 <= order <= 4:
        raise DomainViolation("w derivatives available to order 4")
    ev = WEvaluator(frame, line.n_tilde)
    return ev.w_derivs(x, line.psi)[: order + 1]


def _coeff_functions(w: Sequence[ComplexInterval]):
    """Pointwise coefficient functions in Gamma = i Xi.

    c_n (4): v' conj(v''); h_n (6): v''' conj(v''); g_n (2): v conj(v').
    """
    w0, w1, w2, w3, _ = w
    cb0, cb1, cb2, cb3 = w0.conj(), w1.conj(), w2.conj(), w3.conj()
    c = [
        w1 * cb2,
        w0 * cb2 - w1 * cb1 * 2.0,
        w1 * cb0 - w0 * cb1 * 2.0,
        w0 * cb0,
    ]
    h = [
        w3 * cb2,
        w2 * cb2 * 3.0 - w3 * cb1 * 2.0,
        w1 * cb2 * 3.0 - w2 * cb1 * 6.0 + w3 * cb0,
        w0 * cb2 - w1 * cb1 * 6.0 + w2 * cb0 * 3.0,
        w1 * cb0 * 3.0 - w0 * cb1 * 2.0,
        w0 * cb0,
    ]
    g = [w0 * cb1, -(w0 * cb0)]
    return c, h, g


def integrand(
    kind: str, x: Interval, line: AlphaLine, frame: EllipticFrame
):
    """Pointwise integrand values at scaled position x.

    kind: 'g_integrand' (v conj(v') with the Bloch factor cancelled),
    'f_integrand' ((v' + v'''/omega^2) conj(v''); needs Xi), 'c_n', 'h_n'.
    """
    ev = WEvaluator(frame, line.n_tilde)
    w = ev.w_derivs(x, line.psi)
    c, h, g = _coeff_functions(w)
    if kind == "c_n":
        return c
    if kind == "h_n":
        return h
    if kind == "g_integrand":
        gamma = _gamma_of(line, frame)
        return g[0] + g[1] * gamma
    if kind == "f_integrand":
        gamma = _gamma_of(line, frame)
        inv_w2 = 1.0 / frame.omega.sqr()
        acc = ComplexInterval(Interval(0.0), Interval(0.0))
        gp = ComplexInterval(Interval(1.0), Interval(0.0))
        for n in range(6):
            cn = c[n] if n < 4 else ComplexInterval(Interval(0.0), Interval(0.0))
            acc = acc + (cn + h[n] * inv_w2) * gp
            gp = gp * gamma
        return acc
    raise DomainViolation(f"unknown integrand kind {kind!r}")


def _gamma_of(line: AlphaLine, frame: EllipticFrame) -> ComplexInterval:
    xi_v = xi_scaled(line, frame)
    return ComplexInterval(Interval(0.0), xi_v)


def realify(n: int, c: ComplexInterval) -> Interval:
    """Im(i^n c): the real coefficient of Xi^n in Im sum (i Xi)^n C_n."""
    r = n % 4
    if r == 0:
        return c.im
    if r == 1:
        return c.re
    if r == 2:
        return -c.im
    return -c.re


# ----------------------------------------------------------------------
# modulus bounds on stadiums
# ----------------------------------------------------------------------


def rho_x_spec(frame: EllipticFrame, margin: float = 0.9) -> StadiumSpec:
    """x-stadium from the strip |Im x| < omega'/omega with a margin."""
    c = frame.omega_p / frame.omega * margin
    return stadium_from_halfwidth(Interval(c.lo, c.lo))


def rho_psi_spec(frame: EllipticFrame, margin: float = 0.9) -> StadiumSpec:
    """psi-stadium (full [0,1] domain) from |Im psi~| < pi/L with margin."""
    c = PI / frame.log_q_neg * margin
    return stadium_from_halfwidth(Interval(c.lo, c.lo))


def theta_scan_lower(
    frame: EllipticFrame, spec_x: StadiumSpec, n_pieces: int = 2000
) -> Interval:
    """Quarter-arc lower bound m with |theta1(pi x/2 + iL/2)| >= m for x on
    the upper-right boundary arc of E_rho (theta in [0, pi/2])."""
    ell = frame.log_q_neg

    def f(x: ComplexInterval) -> ComplexInterval:
        u2 = ComplexInterval(HALF_PI * x.re, HALF_PI * x.im + ell * 0.5)
        return theta1_block(u2, frame, 0)[0]

    return stadium_bound(f, spec_x, n_pieces, mode="lower_abs")


def theta_segment_lower(frame: EllipticFrame, n_pieces: int = 200) -> Interval:
    """Lower bound on |theta1(pi x/2 + iL/2)| for real x in [-1,1].

    By the half-lattice quasi-periodicity the function has even modulus in
    x, so the scan runs over [0,1].
    """
    ell = frame.log_q_neg
    worst = math.inf
    for x in iv_subdivide(Interval(0.0, 1.0), n_pieces):
        u2 = ComplexInterval(HALF_PI * x, ell * 0.5)
        v = theta1_block(u2, frame, 0)[0].abs()
        worst = min(worst, v.lo)
    if worst <= 0.0:
        raise BoundBlowup("theta segment lower bound collapsed")
    return Interval(worst, worst)


def theta_lower_full_boundary(
    frame: EllipticFrame, spec_x: StadiumSpec, m_quarter: Interval
) -> Interval:
    """Full-boundary per-factor lower bound r = e^{-pi c} m_quarter.

    Follows from theta1(pi x/2 - iL/2) = -e^{i pi x} theta1(pi x/2 + iL/2)
    (half-lattice quasi-periodicity) together with the theta -> pi - theta
    and conjugation symmetries of the boundary.
    """
    c = spec_x.semi_minor
    fac = iv_exp(-(PI * c))
    lo = (Interval(m_quarter.lo) * fac).lo
    return Interval(max(lo, 0.0), max(lo, 0.0))


@dataclass(frozen=True)
class WMajorants:
    """Upper bounds on |w^{(d)}(x)| over a region, d = 0..4."""

    w: tuple[Interval, ...]

    def __getitem__(self, d: int) -> Interval:
        return self.w[d]


def _sq_majorants(maj: list[Interval]) -> list[Interval]:
    """Majorants of |d^d/dx^d theta1^2| from theta1-derivative majorants."""
    m0, m1, m2, m3, m4 = maj
    h1 = HALF_PI
    h2 = h1.sqr()
    h3 = h2 * h1
    h4 = h2.sqr()
    return [
        m0 * m0,
        m0 * m1 * (h1 * 2.0),
        (m1 * m1 + m0 * m2) * (h2 * 2.0),
        (m1 * m2 * 3.0 + m0 * m3) * (h3 * 2.0),
        (m2 * m2 * 3.0 + m1 * m3 * 4.0 + m0 * m4) * (h4 * 2.0),
    ]


def w_majorants(
    frame: EllipticFrame,
    y_num: float,
    y_den: float,
    den_lower: Interval,
) -> WMajorants:
    """Recursively bound |w^{(d)}| from theta majorants.

    y_num / y_den: sup|Im u| for the numerator / denominator theta
    arguments; den_lower: lower bound on |theta1| at the denominator
    argument over the region.
    """
    if den_lower.lo <= 0.0:
        raise BoundBlowup("denominator lower bound not positive")
    num_m = [theta1_majorant(frame, d, y_num) for d in range(5)]
    den_m = [theta1_majorant(frame, d, y_den) for d in range(5)]
    a_hat = _sq_majorants(num_m)
    b_hat = _sq_majorants(den_m)
    b_lo = den_lower.sqr()
    w0 = a_hat[0] / b_lo
    w1 = (a_hat[1] + w0 * b_hat[1]) / b_lo
    w2 = (a_hat[2] + w1 * b_hat[1] * 2.0 + w0 * b_hat[2]) / b_lo
    w3 = (
        a_hat[3] + w2 * b_hat[1] * 3.0 + w1 * b_hat[2] * 3.0 + w0 * b_hat[3]
    ) / b_lo
    w4 = (
        a_hat[4]
        + w3 * b_hat[1] * 4.0
        + w2 * b_hat[2] * 6.0
        + w1 * b_hat[3] * 4.0
        + w0 * b_hat[4]
    ) / b_lo
    up = lambda v: Interval(0.0, v.hi)
    return WMajorants((up(w0), up(w1), up(w2), up(w3), up(w4)))


def _coeff_majorants(wm: WMajorants):
    """Majorants of |c_n|, |h_n|, |g_n| from w-derivative majorants."""
    w0, w1, w2, w3, _ = wm.w
    c = [
        w1 * w2,
        w0 * w2 + w1 * w1 * 2.0,
        w1 * w0 + w0 * w1 * 2.0,
        w0 * w0,
    ]
    h = [
        w3 * w2,
        w2 * w2 * 3.0 + w3 * w1 * 2.0,
        w1 * w2 * 3.0 + w2 * w1 * 6.0 + w3 * w0,
        w0 * w2 + w1 * w1 * 6.0 + w2 * w0 * 3.0,
        w1 * w0 * 3.0 + w0 * w1 * 2.0,
        w0 * w0,
    ]
    g = [w0 * w1, w0 * w0]
    return c, h, g


@dataclass(frozen=True)
class PartBounds:
    """Modulus bounds for the omega-free integrand parts and the xi-free
    coefficient functions."""

    m_f1: Interval
    m_f2: Interval
    m_g0: Interval
    m_coeff: Interval

    @property
    def overall(self) -> Interval:
        return Interval(
            0.0,
            max(self.m_f1.hi, self.m_f2.hi, self.m_g0.hi, self.m_coeff.hi),
        )


def integrand_m_bounds(wm: WMajorants, gamma_sup: Interval) -> PartBounds:
    """Bounds for the three integrand parts (first-derivative pair, third-
    derivative pair, zeroth pair) and the coefficient functions over the
    region behind ``wm``."""
    c, h, g = _coeff_majorants(wm)
    m_f1 = Interval(0.0)
    m_f2 = Interval(0.0)
    gp = Interval(1.0)
    for n in range(6):
        if n < 4:
            m_f1 = m_f1 + c[n] * gp
        m_f2 = m_f2 + h[n] * gp
        gp = gp * gamma_sup
    m_g0 = g[0] + g[1] * gamma_sup
    m_coeff = Interval(0.0)
    for n in range(6):
        cap = h[n].hi + (c[n].hi if n < 4 else 0.0)
        m_coeff = Interval(0.0, max(m_coeff.hi, cap))
    return PartBounds(
        Interval(0.0, m_f1.hi),
        Interval(0.0, m_f2.hi),
        Interval(0.0, m_g0.hi),
        m_coeff,
    )


def gamma_sup_on_hull(
    frame: EllipticFrame,
    n_tilde: int,
    psi_re: Interval,
    psi_im_mag: float,
) -> Interval:
    """sup |omega xi(alpha(psi))| over the complex psi rectangle."""
    re = frame.omega * float(n_tilde) + frame.omega_p * Interval(
        -psi_im_mag, psi_im_mag
    ) * -1.0
    alpha = ComplexInterval(re, psi_re * frame.omega_p)
    v = xi_raw(alpha, frame)
    mag = (v * frame.omega).abs()
    return Interval(0.0, mag.hi)


@dataclass(frozen=True)
class XStageBounds:
    """Certified data for x-interpolation at one frame and line."""

    spec: StadiumSpec
    m_quarter: Interval
    den_lower: Interval
    den_lower_seg: Interval
    parts: PartBounds

    @property
    def m_coeff(self) -> Interval:
        return self.parts.m_coeff


def x_stage_bounds(
    frame: EllipticFrame,
    n_tilde: int,
    margin: float = 0.9,
    n_scan: int = 2000,
    psi_sup: float = 1.0,
) -> XStageBounds:
    """All modulus bounds needed to certify x-interpolation of the
    integrands for psi in [0, psi_sup]."""
    spec = rho_x_spec(frame, margin)
    m_quarter = theta_scan_lower(frame, spec, n_scan)
    den_lower = theta_lower_full_boundary(frame, spec, m_quarter)
    if den_lower.lo <= 0.0:
        raise BoundBlowup("theta lower bound collapsed on the x-stadium")
    den_seg = theta_segment_lower(frame, max(n_scan // 10, 100))
    c = spec.semi_minor.hi
    ell = frame.log_q_neg.hi
    y_num = HALF_PI.hi * c + (1.0 + psi_sup) * ell * 0.5
    y_den = HALF_PI.hi * c + ell * 0.5
    wm = w_majorants(frame, y_num, y_den, den_lower)
    if n_tilde == 1:
        gam = gamma_sup_on_hull(frame, 1, Interval(0.0, psi_sup), 0.0)
    else:
        # Xi(psi) decreases from its pole at 0; on the closed line we bound
        # by monotonicity in certificates, here only a finite hull is used.
        gam = gamma_sup_on_hull(frame, 0, Interval(0.25, psi_sup), 0.0)
    parts = integrand_m_bounds(wm, gam)
    return XStageBounds(spec, m_quarter, den_lower, den_seg, parts)


def psi_stage_m(
    frame: EllipticFrame,
    n_tilde: int,
    spec_psi: StadiumSpec,
    amap: AffineMap,
    den_lower: Interval,
    factored: bool,
) -> Interval:
    """sup of |f~-type values| over the complex psi stadium (through the
    affine domain map), times the integration width 2."""
    half = amap.halfwidth
    cen = amap.center
    a = spec_psi.semi_major.hi
    b = spec_psi.semi_minor.hi
    re = cen + half * Interval(-a, a)
    im_mag = (half * b).hi
    re_hi = re.hi
    ell = frame.log_q_neg.hi
    y_num = (1.0 + re_hi) * ell * 0.5
    y_den = ell * 0.5
    wm = w_majorants(frame, y_num, y_den, den_lower)
    if factored:
        gam = Interval(0.0)
        parts = integrand_m_bounds(wm, gam)
        m = parts.m_coeff
    else:
        if n_tilde == 0 and re.lo <= 0.0:
            raise PoleProximity("psi stadium reaches the xi pole at 0")
        gam = gamma_sup_on_hull(frame, n_tilde, Interval(re.lo, re_hi), im_mag)
        parts = integrand_m_bounds(wm, gam)
        inv_w2 = (1.0 / frame.omega.sqr()).hi
        m = Interval(
            0.0,
            max(
                (parts.m_f1 + parts.m_f2 * inv_w2).hi,
                (parts.m_g0 * frame.omega.sqr()).hi,
            ),
        )
    return Interval(0.0, (m * 2.0).hi)


# ----------------------------------------------------------------------
# model construction: one frame, one line
# ----------------------------------------------------------------------


@dataclass(frozen=True)
class ChebConfig:
    n_x: int | None = None
    n_psi: int | None = None
    margin_x: float = 0.9
    margin_psi: float = 0.9
    target_eps_x: float = 1e-15
    target_eps_psi: float = 1e-8
    n_scan: int = 2000
    max_nodes: int = 4000


def nodes_for_target(
    m: Interval, spec: StadiumSpec, target: float, max_nodes: int
) -> int:
    """Smallest N with the zeros-node interpolation bound below target."""
    need = (m * spec.L_rho / (spec.D_rho * PI * target)).hi
    if need <= 1.0:
        return 4
    eta = spec.eta.lo
    n = int(math.ceil(math.asinh(need) / eta)) + 1
    for cand in range(max(n - 2, 4), n + 8):
        b = interp_error_bound(m, spec, cand, "zeros")
        if b.hi <= target:
            return cand
    raise BoundBlowup(f"no node count up to {n + 8} meets target {target}")


@dataclass(frozen=True)
class StabilityQuantities:
    """Certified psi-models on one alpha line (direct route).

    The stored models are the omega-free parts: f1 (first-derivative
    pair), f2 (third-derivative pair) and g0; the physical quantities are
    f~ = f1 + f2/omega^2 and g~ = omega^2 g0, assembled at evaluation time
    so that parameter-range drivers can substitute a tight enclosure of
    1/omega^2 obtained from the monotonicity of the selection principle.
    """

    line_n: int
    f1_model: ChebModel
    f2_model: ChebModel
    g0_model: ChebModel
    inv_w2: Interval
    w2: Interval
    x_bounds: XStageBounds
    eps_x: Interval
    n_x: int
    m_psi: Interval
    eps_psi: Interval

    def f(
        self, psi: Interval, deriv: int = 0, inv_w2: Interval | None = None
    ) -> Interval:
        s = inv_w2 if inv_w2 is not None else self.inv_w2
        return self.f1_model.eval(psi, deriv=deriv) + self.f2_model.eval(
            psi, deriv=deriv
        ) * s

    def g(
        self, psi: Interval, deriv: int = 0, w2: Interval | None = None
    ) -> Interval:
        s = w2 if w2 is not None else self.w2
        return self.g0_model.eval(psi, deriv=deriv) * s

    def g0(self, psi: Interval, deriv: int = 0) -> Interval:
        return self.g0_model.eval(psi, deriv=deriv)


@dataclass(frozen=True)
class FactoredF:
    """xi-free quintic coefficients: f~ = sum p_n(psi) Xi^n."""

    p: tuple[Interval, ...]

    def __post_init__(self):
        if len(self.p) != 6:
            raise DomainViolation("factored form has exactly 6 coefficients")


@dataclass(frozen=True)
class FactoredModels:
    """psi-models of the six real coefficient functions p_n."""

    line_n: int
    p_models: tuple[ChebModel, ...]
    x_bounds: XStageBounds
    eps_x: Interval
    n_x: int
    m_psi: Interval
    eps_psi: Interval

    def coeffs(self, psi: Interval) -> FactoredF:
        return FactoredF(tuple(m.eval(psi) for m in self.p_models))

    def f_value(self, psi: Interval, xi_val: Interval) -> Interval:
        c = self.coeffs(psi)
        acc = Interval(0.0)
        xp = Interval(1.0)
        for n in range(6):
            acc = acc + c.p[n] * xp
            xp = xp * xi_val
        return acc


def _x_samples(
    frame: EllipticFrame,
    n_tilde: int,
    psi: Interval,
    xnodes: Sequence[Interval],
    evaluator: WEvaluator | None = None,
):
    """Per-x-node complex coefficient samples: returns 12 sample vectors
    (c_0..3, h_0..5, g_0..1)."""
    ev = evaluator if evaluator is not None else WEvaluator(frame, n_tilde)
    cs = [[] for _ in range(4)]
    hs = [[] for _ in range(6)]
    gs = [[] for _ in range(2)]
    for x in xnodes:
        w = ev.w_derivs(x, psi)
        c, h, g = _coeff_functions(w)
        for i in range(4):
            cs[i].append(c[i])
        for i in range(6):
            hs[i].append(h[i])
        for i in range(2):
            gs[i].append(g[i])
    return cs, hs, gs


_QUAD_W: dict[int, list[Interval]] = {}


def quad_weights(n: int) -> list[Interval]:
    """Interval weights W_r with  integral of the zero-node interpolant
    over [-1,1] equal to sum_r f(x_r) W_r  (even coefficients only)."""
    w = _QUAD_W.get(n)
    if w is not None:
        return w
    from .cheb import _coscache

    npts = n + 1
    out = []
    for r in range(npts):
        acc = Interval(2.0) / npts
        for j in range(2, n + 1, 2):
            acc = acc + _coscache(j * (2 * r + 1), 2 * npts) * (
                4.0 / (npts * (1 - j * j))
            )
        out.append(acc)
    _QUAD_W[n] = out
    return out


def line_integrals(
    frame: EllipticFrame,
    n_tilde: int,
    psi: Interval,
    xnodes: Sequence[Interval],
    eps_x: Interval,
    spec_x: StadiumSpec,
    m_coeff: Interval,
    evaluator: WEvaluator | None = None,
):
    """(C_n[6], G_n[2]) complex integrals over x in [-1,1] at one psi.

    Each integral is the exact integral of the x-interpolant (through the
    quadrature-weight rearrangement of the coefficient formulas) widened
    by 2*eps_x, the interpolation error integrated over a width-2 domain.
    """
    cs, hs, gs = _x_samples(frame, n_tilde, psi, xnodes, evaluator)
    n_x = len(xnodes) - 1
    weights = quad_weights(n_x)
    pad = Interval(-(eps_x.hi * 2.0), eps_x.hi * 2.0)

    def integ(samples):
        acc = ComplexInterval(Interval(0.0), Interval(0.0))
        for f, wt in zip(samples, weights):
            acc = acc + f * wt
        return ComplexInterval(acc.re + pad, acc.im + pad)

    big_c1 = [integ(cs[n]) for n in range(4)]
    big_c2 = [integ(hs[n]) for n in range(6)]
    big_g = [integ(gs[0]), integ(gs[1])]
    return big_c1, big_c2, big_g


def _deriv_errs(
    m_psi: Interval, spec_psi: StadiumSpec, n_psi: int, halfwidth: Interval
):
    """Certified first/second derivative error bounds on the full closed
    domain (native coordinates), via eq-derbounds for order 1 and the
    Cauchy route through a mid stadium for order 2 (valid up to the
    endpoints)."""
    e1 = interp_error_bound(m_psi, spec_psi, n_psi, "zeros", 1) / halfwidth.abs()
    mid = stadium_from_semimajor((spec_psi.semi_major + 1.0) * 0.5)
    e_mid = interp_error_on_stadium(m_psi, spec_psi, mid, n_psi)
    e2 = cauchy_deriv_bound(e_mid, mid, None, 2) / halfwidth.abs().sqr()
    return (((1,), Interval(0.0, e1.hi)), ((2,), Interval(0.0, e2.hi)))


def build_stability_models(
    frame: EllipticFrame,
    n_tilde: int,
    cfg: ChebConfig = ChebConfig(),
    psi_domain: tuple[float, float] = (0.0, 1.0),
    psi_pole_guard: float | None = None,
) -> StabilityQuantities:
    """Direct psi-models of f~ and g~ on one alpha line at a fixed frame.

    On the imaginary-axis line (n_tilde = 0) the domain must stay away
    from the xi pole at psi = 0; psi_pole_guard is the certified distance
    rule used to size the psi stadium.
    """
    lo, hi = psi_domain
    xb = x_stage_bounds(frame, n_tilde, cfg.margin_x, cfg.n_scan, psi_sup=hi)
    m_x = xb.parts.overall
    n_x = cfg.n_x or nodes_for_target(
        m_x, xb.spec, cfg.target_eps_x, cfg.max_nodes
    )
    eps_x = interp_error_bound(m_x, xb.spec, n_x, "zeros")
    xnodes = cheb_nodes(n_x, "zeros")

    amap = AffineMap.for_domain(Interval(lo), Interval(hi))
    spec_psi = _psi_spec_for_domain(frame, n_tilde, amap, cfg.margin_psi,
                                    psi_pole_guard)
    m_psi = psi_stage_m(frame, n_tilde, spec_psi, amap, xb.den_lower_seg, False)
    n_psi = cfg.n_psi or nodes_for_target(
        m_psi, spec_psi, cfg.target_eps_psi, cfg.max_nodes
    )
    eps_psi = interp_error_bound(m_psi, spec_psi, n_psi, "zeros")

    ev = WEvaluator(frame, n_tilde)
    tnodes = cheb_nodes(n_psi, "zeros")
    f1_vals = []
    f2_vals = []
    g_vals = []
    for t in tnodes:
        psi = amap.from_t(t)
        big_c1, big_c2, big_g = line_integrals(
            frame, n_tilde, psi, xnodes, eps_x, xb.spec, m_x, ev
        )
        line = AlphaLine(n_tilde, psi)
        xiv = xi_scaled(line, frame)
        acc1 = Interval(0.0)
        acc2 = Interval(0.0)
        xp = Interval(1.0)
        for n in range(6):
            if n < 4:
                acc1 = acc1 + realify(n, big_c1[n]) * xp
            acc2 = acc2 + realify(n, big_c2[n]) * xp
            xp = xp * xiv
        f1_vals.append(acc1)
        f2_vals.append(acc2)
        g_vals.append(realify(0, big_g[0]) + realify(1, big_g[1]) * xiv)
    derr = _deriv_errs(m_psi, spec_psi, n_psi, amap.halfwidth)
    mk = lambda vals: build_model_1d(
        vals, eps_psi, m_psi, spec_psi, amap, derr
    )
    return StabilityQuantities(
        line_n=n_tilde,
        f1_model=mk(f1_vals),
        f2_model=mk(f2_vals),
        g0_model=mk(g_vals),
        inv_w2=1.0 / frame.omega.sqr(),
        w2=frame.omega.sqr(),
        x_bounds=xb,
        eps_x=eps_x,
        n_x=n_x,
        m_psi=m_psi,
        eps_psi=eps_psi,
    )


def _psi_spec_for_domain(
    frame: EllipticFrame,
    n_tilde: int,
    amap: AffineMap,
    margin: float,
    pole_guard: float | None,
) -> StadiumSpec:
    """psi stadium: stay at half the distance to the complex xi poles at
    Im psi = +-pi/L (which also keeps Re psi < 2, where the series
    majorants for the modulus bounds converge), respect Re psi < 2
    explicitly, and on the n=0 line keep the real pole at psi = 0 (or a
    caller guard) outside the ellipse."""
    half = amap.halfwidth.hi
    cen = amap.center.lo
    im_limit = 0.5 * (PI / frame.log_q_neg).lo / half
    limits = [im_limit]
    re_major = (2.0 - cen) / half
    if re_major > 1.0:
        limits.append(math.sqrt(re_major * re_major - 1.0))
    else:
        raise PoleProximity("psi domain reaches the majorant limit Re psi = 2")
    if n_tilde == 0:
        guard = 0.0 if pole_guard is None else pole_guard
        real_dist = (cen - guard) / half
        if real_dist <= 1.0:
            raise PoleProximity("psi domain touches the xi pole at 0")
        limits.append(math.sqrt(max(real_dist * real_dist - 1.0, 1e-30)))
    c = margin * min(limits)
    if c <= 0.0:
        raise PoleProximity("no admissible psi stadium")
    return stadium_from_halfwidth(Interval(c))


def build_factored_models(
    frame: EllipticFrame,
    cfg: ChebConfig = ChebConfig(),
    psi_domain: tuple[float, float] = (0.0, 1.0),
) -> FactoredModels:
    """psi-models of the six xi-free coefficients p_n on the n=0 line."""
    lo, hi = psi_domain
    xb = x_stage_bounds(frame, 0, cfg.margin_x, cfg.n_scan, psi_sup=hi)
    m_x = xb.m_coeff
    n_x = cfg.n_x or nodes_for_target(
        m_x, xb.spec, cfg.target_eps_x, cfg.max_nodes
    )
    eps_x = interp_error_bound(m_x, xb.spec, n_x, "zeros")
    xnodes = cheb_nodes(n_x, "zeros")
    amap = AffineMap.for_domain(Interval(lo), Interval(hi))
    # coefficient functions are entire in psi: only the complex strip of
    # the theta arguments limits the stadium
    spec_psi = rho_psi_spec(frame, cfg.margin_psi)
    if amap.halfwidth.hi < 0.5:
        c = spec_psi.semi_minor.lo / amap.halfwidth.hi
        spec_psi = stadium_from_halfwidth(Interval(c))
    m_psi = psi_stage_m(frame, 0, spec_psi, amap, xb.den_lower_seg, True)
    n_psi = cfg.n_psi or nodes_for_target(
        m_psi, spec_psi, cfg.target_eps_psi, cfg.max_nodes
    )
    eps_psi = interp_error_bound(m_psi, spec_psi, n_psi, "zeros")
    ev = WEvaluator(frame, 0)
    tnodes = cheb_nodes(n_psi, "zeros")
    vals = [[] for _ in range(6)]
    inv_w2 = 1.0 / frame.omega.sqr()
    for t in tnodes:
        psi = amap.from_t(t)
        big_c1, big_c2, _ = line_integrals(
            frame, 0, psi, xnodes, eps_x, xb.spec, m_x, ev
        )
        for n in range(6):
            v = big_c2[n] * inv_w2
            if n < 4:
                v = v + big_c1[n]
            vals[n].append(realify(n, v))
    derr = _deriv_errs(m_psi, spec_psi, n_psi, amap.halfwidth)
    models = tuple(
        build_model_1d(vals[n], eps_psi, m_psi, spec_psi, amap, derr)
        for n in range(6)
    )
    return FactoredModels(
        line_n=0,
        p_models=models,
        x_bounds=xb,
        eps_x=eps_x,
        n_x=n_x,
        m_psi=m_psi,
        eps_psi=eps_psi,
    )


def factored_f_eval(
    psi: Interval, frame: EllipticFrame, models: FactoredModels
) -> tuple[FactoredF, Interval | None]:
    """Coefficient enclosures and, when psi is bounded away from 0, the
    assembled f~ value."""
    coeffs = models.coeffs(psi)
    if psi.lo <= 0.0:
        return coeffs, None
    line = AlphaLine(0, psi)
    xiv = xi_scaled(line, frame)
    acc = Interval(0.0)
    xp = Interval(1.0)
    for n in range(6):
        acc = acc + coeffs.p[n] * xp
        xp = xp * xiv
    return coeffs, acc


def poly_root_bound(coeffs: FactoredF) -> Interval:
    """Cauchy bound: any root of sum p_n z^n has |z| <= 1 + max|p_0..4|/|p_5|."""
    lead = coeffs.p[5]
    if lead.contains_zero():
        raise LeadingCoeffContainsZero(f"|p5| encloses zero: {lead}")
    top = 0.0
    for n in range(5):
        top = max(top, coeffs.p[n].mag)
    r = 1.0 + Interval(top) / lead.abs()
    return Interval(0.0, r.hi)


# ----------------------------------------------------------------------
# Whitham velocities
# ----------------------------------------------------------------------


def whitham_b(
    k: Interval, frame: EllipticFrame
) -> tuple[Interval, Interval, Interval]:
    """The three characteristic-velocity coefficients b_1, b_2, b_3."""
    bigk, bige = frame.K, frame.E
    kc2 = frame.kc_sq
    d1 = bige - bigk
    d2 = kc2 * bigk - bige
    if d1.contains_zero() or d2.contains_zero() or bige.contains_zero():
        raise DenominatorContainsZero("Whitham velocity denominator ~ 0")
    b1 = k.sqr() * bigk / d1
    b2 = k.sqr() * kc2 * bigk / d2
    b3 = kc2 * bigk / bige
    return b1, b2, b3


# ----------------------------------------------------------------------
# simplicity surface h(x,y)
# ----------------------------------------------------------------------


def _h_parts(frame: EllipticFrame):
    w = frame.omega
    wp_ = frame.omega_p
    t1p0 = frame.const("theta1p0")
    c = (w.pow_int(3) * -8.0) / (PI * t1p0).pow_int(3)
    return w, wp_, c


def _lam_parts(frame: EllipticFrame, u: ComplexInterval, du: ComplexInterval):
    """(A, A', A'') for A(t) = c i lambda0(z(t)) = -4 c i p'(z), z' = du."""
    w, wp_, c = _h_parts(frame)
    p1 = wp_family("pp", u, frame)
    p2 = wp_second(u, frame)
    p3 = wp_third(u, frame)
    ci = ComplexInterval(Interval(0.0), c * -4.0)
    a0 = ci * p1
    a1 = ci * p2 * du
    a2 = ci * p3 * du * du
    return a0, a1, a2


def _xi_parts(frame: EllipticFrame, u: ComplexInterval, du: ComplexInterval):
    """(P, P', P'') for P(t) = omega xi(z(t)); xi' = -2i(p + eta1/omega),
    xi'' = -2i p'."""
    w = frame.omega
    p = wp_family("p", u, frame)
    pp = wp_family("pp", u, frame)
    p0 = xi_raw(u, frame) * w
    m2i = ComplexInterval(Interval(0.0), Interval(-2.0))
    p1 = (p + frame.eta1 / w) * m2i * du * w
    p2 = pp * m2i * du * du * w
    return p0, p1, p2


def h_surface(
    x: Interval,
    y: Interval,
    frame: EllipticFrame,
    deriv: str = "value",
) -> Interval:
    """The simplicity surface

    h(x,y) = (c i L0(w-ixw') - c i L0(iyw'))^2
           + (w xi(w-ixw') - w xi(iyw') - 2 pi)^2

    and its partial derivatives (deriv in value, hx, hxx, hyy, hxy).
    """
    w, wp_, _ = _h_parts(frame)
    if y.lo <= 0.0:
        raise PoleProximity("h(x,y) requires y > 0 (xi pole)")
    ux = ComplexInterval(w, -(x * wp_))
    duxdx = ComplexInterval(Interval(0.0), -wp_)
    uy = ComplexInterval(Interval(0.0), y * wp_)
    duydy = ComplexInterval(Interval(0.0), wp_)
    a0, a1, a2 = _lam_parts(frame, ux, duxdx)
    b0, b1, b2 = _lam_parts(frame, uy, duydy)
    p0, p1, p2 = _xi_parts(frame, ux, duxdx)
    q0, q1, q2 = _xi_parts(frame, uy, duydy)
    ra0 = certify_real(a0, "c i lambda0(w-ixw')")
    ra1 = certify_real(a1, "d/dx c i lambda0")
    ra2 = certify_real(a2, "d2/dx2 c i lambda0")
    rb0 = certify_real(b0, "c i lambda0(iyw')")
    rb1 = certify_real(b1, "d/dy c i lambda0")
    rb2 = certify_real(b2, "d2/dy2 c i lambda0")
    rp0 = certify_real(p0, "w xi(w-ixw')")
    rp1 = certify_real(p1, "d/dx w xi")
    rp2 = certify_real(p2, "d2/dx2 w xi")
    rq0 = certify_real(q0, "w xi(iyw')")
    rq1 = certify_real(q1, "d/dy w xi")
    rq2 = certify_real(q2, "d2/dy2 w xi")
    u = ra0 - rb0
    # the omega-line branch is shifted by a full period into the same
    # Floquet class: xi(w - i x w') + 2 pi/X lands on [pi, 2 pi] and meets
    # the axis branch exactly at the corner (x, y) = (1, 1)
    v = rp0 - rq0 + PI * 2.0
    if deriv == "value":
        return u.sqr() + v.sqr()
    if deriv == "hx":
        return (u * ra1 + v * rp1) * 2.0
    if deriv == "hxx":
        return (ra1.sqr() + u * ra2 + rp1.sqr() + v * rp2) * 2.0
    if deriv == "hyy":
        return (rb1.sqr() - u * rb2 + rq1.sqr() - v * rq2) * 2.0
    if deriv == "hxy":
        return -(ra1 * rb1 + rp1 * rq1) * 2.0
    raise DomainViolation(f"unknown h derivative {deriv!r}")


# ----------------------------------------------------------------------
# limiting profile
# ----------------------------------------------------------------------


def u0_profile(y: Interval, a0: Interval, frame: EllipticFrame) -> Interval:
    """u0(y) = a0 + 3k (kappa K/pi)^2 cn^2(K y/pi, k)."""
    amp = frame.k * (frame.kappa * frame.K / PI).sqr() * 3.0
    cnv = jacobi_cn(frame.K * y / PI, frame)
    return a0 + amp * cnv.sqr()


# ----------------------------------------------------------------------
# complex-nome bounds and q-sampled models
# ----------------------------------------------------------------------


def theta_majorant_r(
    r_sup: float, order: int, y: float, rel_tol: float = 1e-17,
    max_terms: int = 600,
) -> Interval:
    """Upper bound on |theta1^{(order)}(z, q)| for |q| <= r_sup, |Im z| <= y.

    Frame-free version of the theta majorant, used on complex-nome boxes.
    """
    if r_sup >= 1.0:
        raise BoundBlowup("nome modulus bound reaches 1")
    r = Interval(r_sup)
    rq = iv_exp(Interval(0.25) * math.log(r_sup)) if r_sup > 0 else Interval(0.0)
    # q^{(n-1/2)^2} ladder in |q|
    r2 = r.sqr()
    qh = rq
    r2n = Interval(1.0)
    acc = Interval(0.0)
    ey = math.exp(y) * (1.0 + 1e-12)
    n = 0
    while True:
        n += 1
        if n > max_terms:
            raise BoundBlowup("theta majorant (complex nome) did not converge")
        m = 2 * n - 1
        acc = acc + qh * (2.0 * float(m) ** order) * Interval(
            math.cosh(m * y) * (1.0 + 1e-12)
        )
        r2n = r2n * r2
        qh_next = qh * r2n
        mq = 2 * n + 1
        ratio = (r2n * r2).hi * ey * ey * ((mq + 2.0) / mq) ** order
        if ratio < 1.0:
            t = (qh_next * (2.0 * float(mq) ** order)).hi * (ey**mq) / (
                1.0 - ratio
            )
            if t <= rel_tol * max(acc.mag, 1e-30):
                acc = acc + Interval(0.0, t)
                break
        qh = qh_next
    return Interval(0.0, acc.hi)


def _sq_majorants_r(maj: list[Interval]) -> list[Interval]:
    return _sq_majorants(maj)


@dataclass(frozen=True)
class QPieceBounds:
    """Modulus data for one complex-nome box."""

    r: Interval  # |q| range
    a_re: Interval  # Re(-log q) range
    b_im: float  # sup |Im(-log q)|


def _qpiece(qbox: ComplexInterval) -> QPieceBounds:
    if qbox.re.lo <= 0.0:
        raise BoundBlowup("complex-nome box crosses the branch cut")
    r = qbox.abs()
    if r.hi >= 1.0:
        raise BoundBlowup("complex-nome box reaches |q| = 1")
    from .interval import iv_atan, iv_log

    a_re = -iv_log(r)
    b = iv_atan(qbox.im.abs() / qbox.re.lo)
    return QPieceBounds(r=r, a_re=Interval(a_re.lo, a_re.hi), b_im=b.hi)


def _joint_m_on_qpiece(
    qbox: ComplexInterval,
    n_tilde: int,
    psi_re: Interval,
    psi_im_mag: float,
    rel_tol: float = 1e-14,
) -> PartBounds:
    """Bounds over x in [-1,1], psi in the hull, q in qbox for the three
    omega-free integrand parts, by majorants in |q| coupled through the
    piece-local heights."""
    qp = _qpiece(qbox)
    a_hi = qp.a_re.hi
    r_sup = qp.r.hi
    # theta argument heights (x real)
    y_num = ((1.0 + psi_re.hi) * a_hi + psi_im_mag * qp.b_im) * 0.5
    y_den = a_hi * 0.5
    num_m = [theta_majorant_r(r_sup, d, y_num) for d in range(5)]
    den_m = [theta_majorant_r(r_sup, d, y_den) for d in range(5)]
    # denominator lower bound over the u2 box
    u2 = ComplexInterval(
        Interval(-(HALF_PI.hi + qp.b_im * 0.5), HALF_PI.hi + qp.b_im * 0.5),
        qp.a_re * 0.5,
    )
    den_lo = theta1_abs_lower(u2, qp.r, None)
    if den_lo.lo <= 0.0:
        raise BoundBlowup("theta lower bound failed on complex-nome box")
    a_hat = _sq_majorants(num_m)
    b_hat = _sq_majorants(den_m)
    b_lo = den_lo.sqr()
    w0 = a_hat[0] / b_lo
    w1 = (a_hat[1] + w0 * b_hat[1]) / b_lo
    w2 = (a_hat[2] + w1 * b_hat[1] * 2.0 + w0 * b_hat[2]) / b_lo
    w3 = (a_hat[3] + w2 * b_hat[1] * 3.0 + w1 * b_hat[2] * 3.0 + w0 * b_hat[3]) / b_lo
    w4 = (
        a_hat[4]
        + w3 * b_hat[1] * 4.0
        + w2 * b_hat[2] * 6.0
        + w1 * b_hat[3] * 4.0
        + w0 * b_hat[4]
    ) / b_lo
    wm = WMajorants(tuple(Interval(0.0, v.hi) for v in (w0, w1, w2, w3, w4)))
    gam = _gamma_sup_complex_q(qp, n_tilde, psi_re, psi_im_mag)
    return integrand_m_bounds(wm, gam)


def _gamma_sup_complex_q(
    qp: QPieceBounds,
    n_tilde: int,
    psi_re: Interval,
    psi_im_mag: float,
) -> Interval:
    """sup |Xi(psi, q)| = sup |omega xi| over the complex (psi, q) hull.

    Xi = 2i[(pi/2) cot(pi alpha / 2 omega) + 2 pi S], with the argument
    pi alpha/(2 omega) = n pi/2 + i psi L / 2 evaluated directly in the
    (psi, L) box; the series S is bounded by piece-local majorants.
    """
    from .interval import civ_cot, iv_exp

    big_l = ComplexInterval(qp.a_re, Interval(-qp.b_im, qp.b_im))
    psi = ComplexInterval(psi_re, Interval(-psi_im_mag, psi_im_mag))
    half_arg = psi * big_l * ComplexInterval(Interval(0.0), Interval(0.5))
    if n_tilde:
        half_arg = half_arg + HALF_PI
    cot = civ_cot(half_arg)
    # series: sum q^{2k}/(1-q^{2k}) sin(k pi alpha/omega); |sin| <= e^{k y},
    # y = sup |Im(i psi L)| = sup |Re(psi L)|
    y = (psi * big_l).re.mag
    r2 = qp.r.sqr().hi
    rate = r2 * math.exp(y) * (1.0 + 1e-12)
    if rate >= 1.0:
        raise BoundBlowup("Xi series majorant diverges on this nome box")
    den = 1.0 - r2
    s = Interval(0.0)
    term = r2 * math.exp(y) / den
    k = 1
    while term > 1e-18 * max(s.hi, 1.0):
        s = s + Interval(0.0, term)
        k += 1
        term *= rate
        if k > 500:
            raise BoundBlowup("Xi series majorant did not converge")
    s = s + Interval(0.0, term / (1.0 - rate))
    mag = (cot.abs() * PI.hi * 0.5 + s * (PI.hi * 2.0)) * 2.0
    return Interval(0.0, mag.hi)


def q_ellipse_hull(qmap: AffineMap, spec_q: StadiumSpec) -> ComplexInterval:
    a = spec_q.semi_major.hi
    b = spec_q.semi_minor.hi
    re = qmap.center + qmap.halfwidth * Interval(-a, a)
    im = qmap.halfwidth * Interval(-b, b)
    return ComplexInterval(re, im)


def q_stage_m(
    qmap: AffineMap,
    spec_q: StadiumSpec,
    n_tilde: int,
    psi_spec: StadiumSpec,
    psi_map: AffineMap,
    n_pieces: int = 64,
) -> PartBounds:
    """Bounds for the omega-free parts over the complex-nome stadium, by a
    boundary scan in the ellipse parameter (upper half arc; the lower half
    is its complex conjugate since the parts are real on real nomes).
    Includes the integration width 2."""
    a = psi_spec.semi_major.hi
    b = psi_spec.semi_minor.hi
    psi_re = psi_map.center + psi_map.halfwidth * Interval(-a, a)
    if psi_re.lo <= 0.0 and n_tilde == 0:
        raise PoleProximity("psi stadium reaches the xi pole at 0")
    psi_im = (psi_map.halfwidth * b).hi
    worst = [0.0, 0.0, 0.0, 0.0]
    for th in iv_subdivide(Interval(0.0, PI.hi), n_pieces):
        z = ellipse_point(spec_q, th)
        qbox = ComplexInterval(
            qmap.center + qmap.halfwidth * z.re, qmap.halfwidth * z.im
        )
        m = _joint_m_on_qpiece(qbox, n_tilde, psi_re, psi_im)
        for i, v in enumerate((m.m_f1, m.m_f2, m.m_g0, m.m_coeff)):
            worst[i] = max(worst[i], v.hi)
    return PartBounds(
        Interval(0.0, worst[0] * 2.0),
        Interval(0.0, worst[1] * 2.0),
        Interval(0.0, worst[2] * 2.0),
        Interval(0.0, worst[3] * 2.0),
    )


@dataclass(frozen=True)
class QSampledDerivModels:
    """q-interpolants of the omega-free psi-derivative parts at psi = 1 on
    the omega line: f1_psi(1; q), f2_psi(1; q), g0_psi(1; q)."""

    f1_model: ChebModel
    f2_model: ChebModel
    g0_model: ChebModel
    qmap: AffineMap
    spec_q: StadiumSpec
    n_q: int
    m_q: PartBounds
    eps_q: Interval
    sample_meta: tuple[tuple[str, str], ...] = ()


def build_q_deriv_models(
    q_lo: float,
    q_hi: float,
    n_q: int,
    rho_q: float,
    cfg: ChebConfig = ChebConfig(),
    n_q_scan: int = 64,
) -> QSampledDerivModels:
    """Models in the nome of the psi-derivatives at psi = 1 on the omega
    line, for one lower-instability row."""
    qmap = AffineMap.for_domain(Interval(q_lo), Interval(q_hi))
    spec_q = StadiumSpec.from_rho(Interval(rho_q))
    # analyticity guard: the stadium must avoid q = 0 and q = 1
    a = spec_q.semi_major.hi
    d0 = (qmap.center.lo) / qmap.halfwidth.hi
    d1 = (1.0 - qmap.center.hi) / qmap.halfwidth.hi
    if a >= min(d0, d1):
        raise BoundBlowup("q stadium reaches a nome singularity")
    # psi stadium shared by every nome in the box: size it from the
    # largest -log|q| over the complex stadium
    hull = q_ellipse_hull(qmap, spec_q)
    qp = _qpiece(hull)
    psi_map = AffineMap.for_domain(Interval(0.0), Interval(1.0))
    c_psi = 0.9 * PI.lo / qp.a_re.hi / psi_map.halfwidth.hi
    psi_spec = stadium_from_halfwidth(Interval(c_psi))
    qnodes = cheb_nodes(n_q, "zeros")
    f1_s = []
    f2_s = []
    g0_s = []
    n_x_used = 0
    for t in qnodes:
        q = qmap.from_t(t)
        frame = frame_from_q(q)
        sq = build_stability_models(frame, 1, cfg)
        f1_s.append(sq.f1_model.eval(Interval(1.0), deriv=1))
        f2_s.append(sq.f2_model.eval(Interval(1.0), deriv=1))
        g0_s.append(sq.g0_model.eval(Interval(1.0), deriv=1))
        n_x_used = max(n_x_used, sq.n_x)
    m_joint = q_stage_m(qmap, spec_q, 1, psi_spec, psi_map, n_q_scan)
    # Cauchy in psi for the derivative at psi = 1 (native derivative needs
    # the 1/halfwidth = 2 chain factor)
    eps = {}
    models = {}
    for name, m_part, samples in (
        ("f1", m_joint.m_f1, f1_s),
        ("f2", m_joint.m_f2, f2_s),
        ("g0", m_joint.m_g0, g0_s),
    ):
        m_deriv = cauchy_deriv_bound(m_part, psi_spec, None, 1) * 2.0
        eps[name] = interp_error_bound(m_deriv, spec_q, n_q, "zeros")
        models[name] = build_model_1d(samples, eps[name], m_deriv, spec_q, qmap)
    eps_q = Interval(0.0, max(e.hi for e in eps.values()))
    return QSampledDerivModels(
        f1_model=models["f1"],
        f2_model=models["f2"],
        g0_model=models["g0"],
        qmap=qmap,
        spec_q=spec_q,
        n_q=n_q,
        m_q=m_joint,
        eps_q=eps_q,
        sample_meta=(("n_x", str(n_x_used)),),
    )


# ----------------------------------------------------------------------
# two-variable (nome, psi) range models
# ----------------------------------------------------------------------


def _inner_spec(spec: StadiumSpec) -> StadiumSpec:
    return stadium_from_semimajor((spec.semi_major + 1.0) * 0.5)


def _range_deriv_errs(
    m2d: Interval,
    spec_q: StadiumSpec,
    n_q: int,
    spec_psi: StadiumSpec,
    n_psi: int,
    hw_q: Interval,
    hw_psi: Interval,
    orders: Sequence[tuple[int, int]],
):
    """Certified errors for mixed derivatives of a 2D interpolant.

    The total error e = (f - L_q f) + L_q (f - L_psi f) is bounded on an
    inner product stadium, then Cauchy's formula transports it to
    derivative bounds on the real box (valid up to the endpoints).
    """
    iq = _inner_spec(spec_q)
    ip = _inner_spec(spec_psi)
    e_q = interp_error_on_stadium(m2d, spec_q, iq, n_q)
    e_psi = interp_error_on_stadium(m2d, spec_psi, ip, n_psi)
    # |L_q g| <= |g| + |g - L_q g| with |g| <= e_psi on the inner stadium
    e_lq = e_psi + interp_error_on_stadium(e_psi, spec_q, iq, n_q)
    e_tot = e_q + e_lq
    out = []
    for a, b in orders:
        v = e_tot
        if b:
            v = cauchy_deriv_bound(v, ip, None, b)
        if a:
            v = cauchy_deriv_bound(v, iq, None, a)
        v = v / (hw_q.abs().pow_int(a) * hw_psi.abs().pow_int(b))
        out.append(((a, b), Interval(0.0, v.hi)))
    return tuple(out)


@dataclass(frozen=True)
class RangeModels:
    """2D (nome x psi) models of the omega-free parts on one alpha line.

    kind 'direct': p1 holds (f1, f2, g0) models; kind 'factored': p1/p2
    hold the six realified coefficient part models (first/third derivative
    pairs), assembled against Xi powers at evaluation time.
    """

    line_n: int
    kind: str
    qmap: AffineMap
    spec_q: StadiumSpec
    psi_map: AffineMap
    spec_psi: StadiumSpec
    models: dict
    eps_2d: Interval
    m_parts: PartBounds
    n_q: int
    n_psi: int
    n_x: int

    # -- assembly helpers ------------------------------------------------

    def f_parts(self, q: Interval, psi: Interval, deriv=(0, 0)):
        return (
            self.models["f1"].eval(q, psi, deriv=deriv),
            self.models["f2"].eval(q, psi, deriv=deriv),
        )

    def g0(self, q: Interval, psi: Interval, deriv=(0, 0)) -> Interval:
        return self.models["g0"].eval(q, psi, deriv=deriv)

    def f_direct(
        self, q: Interval, psi: Interval, inv_w2: Interval, deriv=(0, 0)
    ) -> Interval:
        a, b = self.f_parts(q, psi, deriv)
        return a + b * inv_w2

    def p_coeff(
        self, n: int, q: Interval, psi: Interval, inv_w2: Interval,
        deriv=(0, 0),
    ) -> Interval:
        v = self.models[f"p2_{n}"].eval(q, psi, deriv=deriv) * inv_w2
        if n < 4:
            v = v + self.models[f"p1_{n}"].eval(q, psi, deriv=deriv)
        return v

    def factored_coeffs(
        self, q: Interval, psi: Interval, inv_w2: Interval
    ) -> FactoredF:
        return FactoredF(
            tuple(self.p_coeff(n, q, psi, inv_w2) for n in range(6))
        )


def build_range_models(
    q_lo: float,
    q_hi: float,
    n_tilde: int,
    kind: str,
    n_q: int,
    rho_q: float,
    cfg: ChebConfig = ChebConfig(),
    psi_domain: tuple[float, float] = (0.0, 1.0),
    n_q_scan: int = 48,
    deriv_orders: Sequence[tuple[int, int]] = ((0, 1), (0, 2), (1, 0), (1, 1)),
) -> RangeModels:
    """Certified 2D models over a nome range.

    kind 'direct' samples f1, f2, g0 (needs Xi at the samples; on the
    axis line the psi domain must avoid 0); kind 'factored' samples the
    xi-free coefficient parts (axis line only, any psi domain).
    """
    if kind not in ("direct", "factored"):
        raise DomainViolation("kind must be direct or factored")
    qmap = AffineMap.for_domain(Interval(q_lo), Interval(q_hi))
    spec_q = StadiumSpec.from_rho(Interval(rho_q))
    a = spec_q.semi_major.hi
    d0 = qmap.center.lo / qmap.halfwidth.hi
    d1 = (1.0 - qmap.center.hi) / qmap.halfwidth.hi
    if a >= min(d0, d1):
        raise BoundBlowup("q stadium reaches a nome singularity")
    lo, hi = psi_domain
    psi_map = AffineMap.for_domain(Interval(lo), Interval(hi))
    hull = q_ellipse_hull(qmap, spec_q)
    qp = _qpiece(hull)
    # shared psi stadium sized from the largest -log|q| over the stadium,
    # further limited by the real xi pole on the axis line (direct kind)
    half = psi_map.halfwidth.hi
    cen = psi_map.center.lo
    lims = [0.5 * (PI.lo / qp.a_re.hi) / half]
    re_major = (2.0 - cen) / half
    if re_major <= 1.0:
        raise PoleProximity("psi domain reaches the majorant limit")
    lims.append(math.sqrt(re_major * re_major - 1.0))
    if n_tilde == 0 and kind == "direct":
        real_dist = cen / half
        if real_dist <= 1.0:
            raise PoleProximity("psi domain touches the xi pole at 0")
        lims.append(math.sqrt(real_dist * real_dist - 1.0))
    spec_psi = stadium_from_halfwidth(Interval(cfg.margin_psi * min(lims)))

    qnodes = cheb_nodes(n_q, "zeros")
    psnodes = cheb_nodes(cfg.n_psi or 48, "zeros")
    n_psi = len(psnodes) - 1
    names = (
        ("f1", "f2", "g0")
        if kind == "direct"
        else tuple(f"p1_{n}" for n in range(4))
        + tuple(f"p2_{n}" for n in range(6))
    )
    samples = {nm: [] for nm in names}
    n_x_used = 0
    eps_x_max = 0.0
    for tq in qnodes:
        q = qmap.from_t(tq)
        frame = frame_from_q(q, cfg_tail_of(cfg))
        xb = x_stage_bounds(frame, n_tilde, cfg.margin_x, cfg.n_scan,
                            psi_sup=hi)
        m_x = xb.parts.overall
        n_x = cfg.n_x or nodes_for_target(
            m_x, xb.spec, cfg.target_eps_x, cfg.max_nodes
        )
        n_x_used = max(n_x_used, n_x)
        eps_x = interp_error_bound(m_x, xb.spec, n_x, "zeros")
        eps_x_max = max(eps_x_max, eps_x.hi)
        xnodes = cheb_nodes(n_x, "zeros")
        ev = WEvaluator(frame, n_tilde)
        rows = {nm: [] for nm in names}
        for tp in psnodes:
            psi = psi_map.from_t(tp)
            c1, c2, gg = line_integrals(
                frame, n_tilde, psi, xnodes, eps_x, xb.spec, m_x, ev
            )
            if kind == "direct":
                line = AlphaLine(n_tilde, psi)
                xiv = xi_scaled(line, frame)
                a1 = Interval(0.0)
                a2 = Interval(0.0)
                xp = Interval(1.0)
                for n in range(6):
                    if n < 4:
                        a1 = a1 + realify(n, c1[n]) * xp
                    a2 = a2 + realify(n, c2[n]) * xp
                    xp = xp * xiv
                rows["f1"].append(a1)
                rows["f2"].append(a2)
                rows["g0"].append(
                    realify(0, gg[0]) + realify(1, gg[1]) * xiv
                )
            else:
                for n in range(4):
                    rows[f"p1_{n}"].append(realify(n, c1[n]))
                for n in range(6):
                    rows[f"p2_{n}"].append(realify(n, c2[n]))
        for nm in names:
            samples[nm].append(rows[nm])

    m_parts = q_stage_m(
        qmap, spec_q, n_tilde, spec_psi, psi_map, n_q_scan
    ) if kind == "direct" else q_stage_m_factored(
        qmap, spec_q, n_tilde, spec_psi, psi_map, n_q_scan
    )
    m2d = m_parts.overall
    eps_q = interp_error_bound(m2d, spec_q, n_q, "zeros")
    eps_psi = interp_error_bound(m2d, spec_psi, n_psi, "zeros")
    lam_q = lebesgue_const(n_q + 1)
    eps_2d = interp_2d_error(eps_q, eps_psi, lam_q)
    derr = _range_deriv_errs(
        m2d, spec_q, n_q, spec_psi, n_psi, qmap.halfwidth,
        psi_map.halfwidth, deriv_orders,
    )
    models = {}
    for nm in names:
        models[nm] = build_model_2d(
            samples[nm],
            eps_2d,
            (
                Provenance(m2d, spec_q.rho, n_q),
                Provenance(m2d, spec_psi.rho, n_psi),
            ),
            (qmap, psi_map),
            derr,
        )
    return RangeModels(
        line_n=n_tilde,
        kind=kind,
        qmap=qmap,
        spec_q=spec_q,
        psi_map=psi_map,
        spec_psi=spec_psi,
        models=models,
        eps_2d=eps_2d,
        m_parts=m_parts,
        n_q=n_q,
        n_psi=n_psi,
        n_x=n_x_used,
    )


def cfg_tail_of(cfg: ChebConfig):
    from .elliptic import DEFAULT_TAIL

    return DEFAULT_TAIL


def q_stage_m_factored(
    qmap: AffineMap,
    spec_q: StadiumSpec,
    n_tilde: int,
    psi_spec: StadiumSpec,
    psi_map: AffineMap,
    n_pieces: int = 48,
) -> PartBounds:
    """Like q_stage_m but for the xi-free coefficient parts."""
    a = psi_spec.semi_major.hi
    b = psi_spec.semi_minor.hi
    psi_re = psi_map.center + psi_map.halfwidth * Interval(-a, a)
    psi_im = (psi_map.halfwidth * b).hi
    worst = 0.0
    for th in iv_subdivide(Interval(0.0, PI.hi), n_pieces):
        z = ellipse_point(spec_q, th)
        qbox = ComplexInterval(
            qmap.center + qmap.halfwidth * z.re, qmap.halfwidth * z.im
        )
        qp = _qpiece(qbox)
        a_hi = qp.a_re.hi
        r_sup = qp.r.hi
        y_num = ((1.0 + psi_re.hi) * a_hi + psi_im * qp.b_im) * 0.5
        y_den = a_hi * 0.5
        num_m = [theta_majorant_r(r_sup, d, y_num) for d in range(5)]
        den_m = [theta_majorant_r(r_sup, d, y_den) for d in range(5)]
        u2 = ComplexInterval(
            Interval(-(HALF_PI.hi + qp.b_im * 0.5), HALF_PI.hi + qp.b_im * 0.5),
            qp.a_re * 0.5,
        )
        den_lo = theta1_abs_lower(u2, qp.r, None)
        if den_lo.lo <= 0.0:
            raise BoundBlowup("theta lower bound failed on complex-nome box")
        a_hat = _sq_majorants(num_m)
        b_hat = _sq_majorants(den_m)
        b_lo = den_lo.sqr()
        w0 = a_hat[0] / b_lo
        w1 = (a_hat[1] + w0 * b_hat[1]) / b_lo
        w2 = (a_hat[2] + w1 * b_hat[1] * 2.0 + w0 * b_hat[2]) / b_lo
        w3 = (
            a_hat[3] + w2 * b_hat[1] * 3.0 + w1 * b_hat[2] * 3.0
            + w0 * b_hat[3]
        ) / b_lo
        w4 = (
            a_hat[4]
            + w3 * b_hat[1] * 4.0
            + w2 * b_hat[2] * 6.0
            + w1 * b_hat[3] * 4.0
            + w0 * b_hat[4]
        ) / b_lo
        wm = WMajorants(
            tuple(Interval(0.0, v.hi) for v in (w0, w1, w2, w3, w4))
        )
        c, h, g = _coeff_majorants(wm)
        cap = max(max(v.hi for v in c), max(v.hi for v in h), g[0].hi, g[1].hi)
        worst = max(worst, cap)
    m = Interval(0.0, worst * 2.0)
    return PartBounds(m, m, m, m)

"""Validated elliptic-function machinery.

Complete elliptic integrals by interval AGM iteration, the selection
principle for the wave number, Weierstrass p / p' / zeta / sigma and the
Jacobi theta functions through q-series with rigorous geometric tail
bounds, the Floquet map xi(alpha), and the limiting KdV spectrum.

Series tails are controlled by a ratio test: once the term-majorant ratio
drops below one, the remaining sum is dominated by a geometric series and
added to the enclosure as a symmetric pad.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

from .errors import (
    DomainViolation,
    NotRealCertified,
    PoleProximity,
    StripExceeded,
    TailTooWide,
)
from .interval import (
    HALF_PI,
    ONE,
    PI,
    ComplexInterval,
    Interval,
    certify_real,
    civ_cot,
    civ_csc,
    civ_sec,
    iv_cos,
    iv_cosh,
    iv_exp,
    iv_log,
    iv_sin,
    iv_sinh,
    iv_sqrt,
)


# ----------------------------------------------------------------------
# tail policy / report
# ----------------------------------------------------------------------


@dataclass(frozen=True)
class TailPolicy:
    """Truncation policy: stop when the rigorous tail bound drops below
    rel_tol times the leading-term scale."""

    rel_tol: float = 1e-17
    max_terms: int = 600
    strip_factor: float = 3.0  # max |Im z| in units of -log q for theta


@dataclass(frozen=True)
class SeriesTail:
    """Record of a truncation: terms kept and the bound on what was
    dropped."""

    n_terms: int
    tail_bound: Interval


DEFAULT_TAIL = TailPolicy()


# ----------------------------------------------------------------------
# complete elliptic integrals (interval AGM)
# ----------------------------------------------------------------------


def _agm_with_sum(k: Interval, b0: Interval, policy: TailPolicy):
    """AGM(1, b0) enclosure together with sum 2^{n-1} c_n^2, c_0 = k."""
    a = ONE
    b = b0
    csum = k.sqr() * 0.5
    n = 0
    prev_gap = math.inf
    prev_tail = math.inf
    tail = None
    while n < 80:
        n += 1
        c = (a - b) * 0.5
        cm = c.mag
        csum = csum + c.sqr() * (2.0 ** (n - 1))
        a, b = (a + b) * 0.5, iv_sqrt(a * b)
        if b.lo <= 0.0:
            raise DomainViolation("AGM iterate touched zero")
        # bound the dropped part of the c-sum; once the enclosure widths
        # floor out, the estimate stops improving and we accept it
        v1 = Interval(cm).sqr() / (4.0 * b.lo)
        rho = v1.hi / (4.0 * b.lo)
        if 2.0 * rho * rho < 0.5:
            t = (v1.sqr() * (2.0**n)) / (1.0 - 2.0 * rho * rho)
            gap = a.hi - b.lo
            if t.hi <= 1e-22 and gap >= prev_gap:
                tail = t.hi
                break
            if t.hi >= prev_tail and gap >= prev_gap:
                tail = t.hi
                break
            prev_tail = min(prev_tail, t.hi)
            prev_gap = gap
    if tail is None:
        raise TailTooWide("AGM failed to converge")
    csum = csum + Interval(0.0, tail)
    agm = Interval(min(b.lo, a.hi), a.hi)
    return agm, csum


def ellint_KE(
    k: Interval, kc_sq: Interval, policy: TailPolicy = DEFAULT_TAIL
) -> tuple[Interval, Interval, Interval]:
    """Enclosures of K(k), E(k) and K'(k) = K(sqrt(1-k^2))."""
    if k.lo <= 0.0 or k.hi >= 1.0:
        raise DomainViolation(f"modulus must satisfy 0 < k < 1, got {k}")
    if kc_sq.lo <= 0.0:
        raise DomainViolation(f"complementary kc_sq must be positive: {kc_sq}")
    b0 = iv_sqrt(kc_sq)
    agm, csum = _agm_with_sum(k, b0, policy)
    bigk = HALF_PI / agm
    bige = bigk * (1.0 - csum)
    # K' = K(k') with complementary modulus k' = sqrt(kc_sq): its AGM runs
    # with b0' = sqrt(1 - k'^2) = k
    agm_p, _ = _agm_with_sum(b0, k, policy)
    bigk_p = HALF_PI / agm_p
    return bigk, bige, bigk_p


def kc_sq_from_decimal(k_text: str) -> tuple[Interval, Interval]:
    """Exact-rational (k, 1-k^2) enclosures from a decimal literal.

    Keeps full relative precision in 1-k^2 for moduli within 1e-12 of 1.
    """
    fr = Fraction(k_text)
    return Interval.from_fraction(fr), Interval.from_fraction(1 - fr * fr)


# ----------------------------------------------------------------------
# selection principle
# ----------------------------------------------------------------------

_SEL = 7.0 / 20.0


def _sel_parts(k: Interval, kc2: Interval, bigk: Interval, bige: Interval):
    # numerator/denominator written in the complementary variable to avoid
    # the k -> 1 cancellations of the raw polynomial coefficients
    p1 = (1.0 - k.sqr() * kc2) * 2.0
    p2 = kc2 * (kc2 + 1.0)
    n = p1 * bige - p2 * bigk
    ae = kc2.pow_int(3) * 2.0 - kc2.sqr() * 3.0 - kc2 * 3.0 + 2.0
    ak = -(kc2 * (kc2.sqr() - kc2 * 4.0 + 1.0))
    d = ae * bige + ak * bigk
    return p1, p2, n, ae, ak, d


def kappa_sq(
    k: Interval, kc_sq: Interval, ke: tuple[Interval, Interval] | None = None
) -> Interval:
    """Enclosure of kappa^2 = (pi/K)^2 * (7/20) * N/D (selection principle)."""
    if ke is None:
        bigk, bige, _ = ellint_KE(k, kc_sq)
    else:
        bigk, bige = ke
    _, _, n, _, _, d = _sel_parts(k, kc_sq, bigk, bige)
    if d.contains_zero():
        from .errors import DenominatorContainsZero

        raise DenominatorContainsZero("selection-principle denominator ~ 0")
    return (PI / bigk).sqr() * _SEL * (n / d)


def kappa_sq_dk(
    k: Interval, kc_sq: Interval, ke: tuple[Interval, Interval] | None = None
) -> Interval:
    """Enclosure of d(kappa^2)/dk, symbolically differentiated.

    Uses dE/dk = (E-K)/k and dK/dk = (E - kc2 K)/(k kc2); the kc2 factors
    of dK/dk are cancelled symbolically wherever possible so that only one
    genuine 1/kc2 pole term remains.
    """
    if ke is None:
        bigk, bige, _ = ellint_KE(k, kc_sq)
    else:
        bigk, bige = ke
    kc2 = kc_sq
    p1, p2, n, ae, ak, d = _sel_parts(k, kc2, bigk, bige)
    if d.contains_zero() or k.contains_zero() or kc2.contains_zero():
        from .errors import DenominatorContainsZero

        raise DenominatorContainsZero("kappa_sq_dk denominator ~ 0")
    e_d = (bige - bigk) / k
    emk = bige - kc2 * bigk  # E - kc2*K
    p1d = k * (k.sqr() * 2.0 - 1.0) * 4.0
    p2d = k * (kc2 * 2.0 + 1.0) * -2.0
    nd = p1d * bige + p1 * e_d - p2d * bigk - (kc2 + 1.0) * emk / k
    aed = k * ((1.0 - kc2) * kc2 * 6.0 + 3.0) * 2.0
    akd = k * (kc2.sqr() * 3.0 - kc2 * 8.0 + 1.0) * 2.0
    # AK/kc2 = -(kc2^2 - 4 kc2 + 1)
    dd = aed * bige + ae * e_d + akd * bigk - (kc2.sqr() - kc2 * 4.0 + 1.0) * emk / k
    kd_over_k = emk / (k * kc2 * bigk)
    core = nd * d - n * dd - n * d * kd_over_k * 2.0
    return (PI.sqr() * _SEL) * core / (d.sqr() * bigk.sqr())


# ----------------------------------------------------------------------
# frame
# ----------------------------------------------------------------------


class _FrameCache:
    __slots__ = (
        "q_quarter_powers",
        "q_even_powers",
        "theta_coef",
        "zeta_coef",
        "wp_coef",
        "wpp_coef",
        "wps_coef",
        "wpps_coef",
        "sigma_coef",
        "consts",
    )

    def __init__(self):
        self.q_quarter_powers: list[Interval] = []  # q^{(n-1/2)^2}, index n-1
        self.q_even_powers: list[Interval] = []  # q^{2n}, index n-1
        self.theta_coef: list[Interval] = []  # 2(-1)^{n+1} q^{(n-1/2)^2}
        self.zeta_coef: list[Interval] = []  # q^{2n}/(1-q^{2n})
        self.wp_coef: list[Interval] = []  # n q^{2n}/(1-q^{2n})
        self.wpp_coef: list[Interval] = []  # n^2 q^{2n}/(1-q^{2n})
        self.wps_coef: list[Interval] = []  # n q^n/(1-q^{2n})
        self.wpps_coef: list[Interval] = []  # n^2 q^n/(1-q^{2n})
        self.sigma_coef: list[Interval] = []  # q^{2n}/(n(1-q^{2n}))
        self.consts: dict = {}


@dataclass(frozen=True)
class EllipticFrame:
    """All wave-dependent constants for one elliptic-modulus enclosure."""

    k: Interval
    kc_sq: Interval
    K: Interval
    Kprime: Interval
    E: Interval
    q: Interval
    kappa: Interval
    omega: Interval
    omega_p: Interval
    eta1: Interval
    g2: Interval
    g3: Interval
    X: Interval
    log_q_neg: Interval  # L = -log q = pi K'/K
    tail: TailPolicy = DEFAULT_TAIL
    _cache: _FrameCache = field(
        default_factory=_FrameCache, compare=False, repr=False
    )

    # -- cached coefficient ladders -------------------------------------

    def _extend(self, up_to: int) -> None:
        c = self._cache
        q = self.q
        n = len(c.q_even_powers)
        q2 = q.sqr()
        while n < up_to:
            n += 1
            prev = c.q_even_powers[-1] if c.q_even_powers else ONE
            q2n = prev * q2
            c.q_even_powers.append(q2n)
            if not c.q_quarter_powers:
                qq = self.const("q_quarter")
                c.q_quarter_powers.append(qq)
            else:
                # q^{(n-1/2)^2} = q^{(n-3/2)^2} * q^{2(n-1)}
                c.q_quarter_powers.append(
                    c.q_quarter_powers[-1] * c.q_even_powers[n - 2]
                )
            qh = c.q_quarter_powers[-1]
            sign = 2.0 if n % 2 == 1 else -2.0
            c.theta_coef.append(qh * sign)
            den = 1.0 - q2n
            if den.lo <= 0.0:
                raise DomainViolation("nome enclosure reaches 1")
            zc = q2n / den
            c.zeta_coef.append(zc)
            c.wp_coef.append(zc * float(n))
            c.wpp_coef.append(zc * float(n * n))
            qn = iv_sqrt(q2n)
            sc = qn / den
            c.wps_coef.append(sc * float(n))
            c.wpps_coef.append(sc * float(n * n))
            c.sigma_coef.append(zc / float(n))

    def coefs(self, name: str, n: int) -> Interval:
        c = self._cache
        lst = getattr(c, name)
        if len(lst) < n:
            self._extend(n + 8)
            lst = getattr(c, name)
        return lst[n - 1]

    def const(self, name: str) -> Interval:
        c = self._cache.consts
        v = c.get(name)
        if v is not None:
            return v
        if name == "q_quarter":
            v = iv_exp(iv_log(self.q) * 0.25)
        elif name == "theta1p0":
            v = _theta_null(self, 1)
        elif name == "theta2_0":
            v = _theta_null(self, 2)
        elif name == "theta3_0":
            v = _theta_null(self, 3)
        elif name == "theta4_0":
            v = _theta_null(self, 4)
        elif name == "e1":
            v = certify_real(
                wp_family("p_shift_w", ComplexInterval(0.0, 0.0), self), "e1"
            )
        elif name == "e2":
            v = certify_real(
                wp_family(
                    "p_shift_iwp", ComplexInterval(self.omega, Interval(0.0)), self
                ),
                "e2",
            )
        elif name == "e3":
            v = certify_real(
                wp_family("p_shift_iwp", ComplexInterval(0.0, 0.0), self), "e3"
            )
        else:
            raise KeyError(name)
        c[name] = v
        return v


def eta1_series(
    omega: Interval, q: Interval, policy: TailPolicy = DEFAULT_TAIL
) -> Interval:
    """eta1 = zeta(omega) from its q-series."""
    q2 = q.sqr()
    acc = Interval(0.0)
    q2n = ONE
    n = 0
    while True:
        n += 1
        if n > policy.max_terms:
            raise TailTooWide("eta1 series")
        q2n = q2n * q2
        den = 1.0 - q2n
        term = q2n * float(n) / den
        acc = acc + term
        # tail: sum_{m>n} m q^{2m}/(1-q^2) with ratio r = q^2 (m+1)/m
        r = (q2 * ((n + 1.0) / n)).hi
        if r < 1.0:
            t = (q2n * q2 * (float(n + 1) / (1.0 - q2.hi))) / (1.0 - r)
            if t.hi <= policy.rel_tol * max(acc.mag, 1e-30):
                acc = acc + Interval(-t.hi, t.hi)
                break
    return PI.sqr() / (omega * 12.0) - (PI.sqr() * 2.0 / omega) * acc


def build_frame(
    k: Interval,
    kc_sq: Interval | None = None,
    tail: TailPolicy = DEFAULT_TAIL,
) -> EllipticFrame:
    """Assemble the full constant frame for a modulus enclosure."""
    if kc_sq is None:
        kc_sq = 1.0 - k.sqr()
        if kc_sq.lo <= 0.0:
            raise DomainViolation(
                "kc_sq from 1-k^2 collapsed; pass an exact complementary value"
            )
    bigk, bige, bigk_p = ellint_KE(k, kc_sq, tail)
    kap2 = kappa_sq(k, kc_sq, (bigk, bige))
    if kap2.lo <= 0.0:
        raise DomainViolation("kappa^2 enclosure not positive")
    kap = iv_sqrt(kap2)
    omega = PI / kap
    omega_p = bigk_p * PI / (bigk * kap)
    ratio = bigk_p / bigk
    big_l = PI * ratio
    q = iv_exp(-big_l)
    if not (0.0 < q.lo and q.hi < 1.0):
        raise DomainViolation("nome enclosure outside (0,1)")
    eta1 = eta1_series(omega, q, tail)
    frame = EllipticFrame(
        k=k,
        kc_sq=kc_sq,
        K=bigk,
        Kprime=bigk_p,
        E=bige,
        q=q,
        kappa=kap,
        omega=omega,
        omega_p=omega_p,
        eta1=eta1,
        g2=Interval(0.0),
        g3=Interval(0.0),
        X=omega * 2.0,
        log_q_neg=big_l,
        tail=tail,
    )
    e1 = frame.const("e1")
    e2 = frame.const("e2")
    e3 = frame.const("e3")
    g2 = (e1.sqr() + e2.sqr() + e3.sqr()) * 2.0
    g3 = e1 * e2 * e3 * 4.0
    object.__setattr__(frame, "g2", g2)
    object.__setattr__(frame, "g3", g3)
    return frame


def frame_from_decimal(k_text: str, tail: TailPolicy = DEFAULT_TAIL) -> EllipticFrame:
    k, kc = kc_sq_from_decimal(k_text)
    return build_frame(k, kc, tail)


def frame_from_q(q: Interval, tail: TailPolicy = DEFAULT_TAIL) -> EllipticFrame:
    """Frame parametrized by the nome: k = (theta2/theta3)^2 and
    kc^2 = (theta4/theta3)^4 are cancellation-free theta quotients."""
    if not (0.0 < q.lo and q.hi < 1.0):
        raise DomainViolation(f"nome must lie in (0,1): {q}")
    t2 = _theta_null_q(q, 2, tail)
    t3 = _theta_null_q(q, 3, tail)
    t4 = _theta_null_q(q, 4, tail)
    k = (t2 / t3).sqr()
    kc = (t4 / t3).sqr().sqr()
    frame = build_frame(k, kc, tail)
    if not frame.q.intersects(q):
        raise DomainViolation("nome round-trip failed to intersect input")
    # intersect the recomputed nome with the exact input for tightness
    object.__setattr__(frame, "q", frame.q.intersect(q))
    return frame


# ----------------------------------------------------------------------
# theta functions
# ----------------------------------------------------------------------


def _theta_null_q(q: Interval, which: int, policy: TailPolicy) -> Interval:
    """theta_2/3/4(0, q) by direct series (used before a frame exists)."""
    if which == 2:
        qq = iv_exp(iv_log(q) * 0.25)
        acc = Interval(0.0)
        cur = qq
        q2n = ONE
        q2 = q.sqr()
        n = 1
        while True:
            acc = acc + cur
            q2n = q2n * q2
            cur = cur * q2n  # q^{(n+1/2)^2} = q^{(n-1/2)^2} q^{2n}
            n += 1
            r = q2n.hi * q2.hi
            if r < 1.0 and cur.hi / (1.0 - r) <= policy.rel_tol * acc.mag:
                acc = acc + Interval(0.0, cur.hi / (1.0 - r))
                break
            if n > policy.max_terms:
                raise TailTooWide("theta2 null series")
        return acc * 2.0
    acc = ONE
    qn2 = ONE
    n = 0
    while True:
        n += 1
        if n > policy.max_terms:
            raise TailTooWide("theta null series")
        # q^{n^2} = q^{(n-1)^2} * q^{2n-1}
        qn2 = qn2 * q.pow_int(2 * n - 1)
        term = qn2 * 2.0
        if which == 4 and n % 2 == 1:
            acc = acc - term
        else:
            acc = acc + term
        r = q.pow_int(2 * n + 1).hi
        if r < 1.0 and (qn2 * q.pow_int(2 * n + 1)).hi * 2.0 / (1.0 - r) <= (
            policy.rel_tol * acc.mag
        ):
            pad = (qn2 * q.pow_int(2 * n + 1)).hi * 2.0 / (1.0 - r)
            acc = acc + Interval(-pad, pad)
            break
    return acc


def _theta_null(frame: EllipticFrame, which: int) -> Interval:
    """theta1'(0) (which=1) or theta_{2,3,4}(0) for a frame."""
    policy = frame.tail
    if which in (3, 4):
        return _theta_null_q(frame.q, which, policy)
    if which == 2:
        return _theta_null_q(frame.q, 2, policy)
    # theta1'(0) = 2 sum (-1)^{n+1} (2n-1) q^{(n-1/2)^2}
    acc = Interval(0.0)
    n = 0
    while True:
        n += 1
        if n > policy.max_terms:
            raise TailTooWide("theta1'(0) series")
        coef = frame.coefs("theta_coef", n)
        acc = acc + coef * float(2 * n - 1)
        nxt = frame.coefs("q_quarter_powers", n + 1) * (2.0 * (2 * n + 1))
        r = (frame.coefs("q_even_powers", n + 1) * ((2 * n + 3.0) / (2 * n + 1.0))).hi
        if r < 1.0 and nxt.hi / (1.0 - r) <= policy.rel_tol * max(acc.mag, 1e-30):
            pad = nxt.hi / (1.0 - r)
            acc = acc + Interval(-pad, pad)
            break
    return acc


def _civ_sincos(z: ComplexInterval) -> tuple[ComplexInterval, ComplexInterval]:
    """(sin z, cos z) sharing the four real kernels."""
    sa = iv_sin(z.re)
    ca = iv_cos(z.re)
    sh = iv_sinh(z.im)
    ch = iv_cosh(z.im)
    return (
        ComplexInterval(sa * ch, ca * sh),
        ComplexInterval(ca * ch, -(sa * sh)),
    )


def theta1_block(
    z: ComplexInterval, frame: EllipticFrame, max_order: int = 4
) -> list[ComplexInterval]:
    """Enclosures of theta1^{(d)}(z, q) for d = 0..max_order."""
    if not 0 <= max_order <= 4:
        raise DomainViolation("theta1 derivative order must be in 0..4")
    policy = frame.tail
    y = z.im.mag
    l_lo = frame.log_q_neg.lo
    if y > policy.strip_factor * l_lo:
        raise StripExceeded(
            f"|Im z| = {y} exceeds {policy.strip_factor} * (-log q) = "
            f"{policy.strip_factor * l_lo}"
        )
    zero = Interval(0.0)
    acc = [ComplexInterval(zero, zero) for _ in range(max_order + 1)]
    e2y = math.exp(2.0 * y) * (1.0 + 1e-12)
    emy = math.exp(y) * (1.0 + 1e-12)
    n = 0
    while True:
        n += 1
        if n > policy.max_terms or (2 * n + 1) * y > 690.0:
            raise TailTooWide(f"theta1 series at {z}")
        m = 2 * n - 1
        coef = frame.coefs("theta_coef", n)
        zm = ComplexInterval(z.re * float(m), z.im * float(m))
        s, c = _civ_sincos(zm)
        acc[0] = acc[0] + s * coef
        if max_order >= 1:
            acc[1] = acc[1] + c * (coef * float(m))
        if max_order >= 2:
            acc[2] = acc[2] - s * (coef * float(m * m))
        if max_order >= 3:
            acc[3] = acc[3] - c * (coef * float(m**3))
        if max_order >= 4:
            acc[4] = acc[4] + s * (coef * float(m**4))
        # majorant of term n+1 at highest order, ratio test
        mq = 2 * n + 1
        lead = frame.coefs("q_quarter_powers", n + 1).hi * 2.0
        emny = emy**mq
        r = frame.coefs("q_even_powers", n + 1).hi * e2y
        r *= ((mq + 2.0) / mq) ** max_order
        if r < 1.0:
            scale = max(acc[0].abs_sq().hi, 1e-60) ** 0.5
            worst = lead * (float(mq) ** max_order) * emny / (1.0 - r)
            if worst <= policy.rel_tol * max(scale, 1e-12):
                for d in range(max_order + 1):
                    t = lead * (float(mq) ** d) * emny / (1.0 - r)
                    pad = Interval(-t, t)
                    acc[d] = ComplexInterval(acc[d].re + pad, acc[d].im + pad)
                break
    return acc


def theta1(
    z: ComplexInterval, frame: EllipticFrame, order: int = 0
) -> ComplexInterval:
    return theta1_block(z, frame, order)[order]


def theta1_majorant(frame: EllipticFrame, order: int, y: float) -> Interval:
    """Upper bound on |theta1^{(order)}(z)| over |Im z| <= y."""
    policy = frame.tail
    acc = Interval(0.0)
    n = 0
    ey = math.exp(y) * (1.0 + 1e-12)
    while True:
        n += 1
        if n > policy.max_terms:
            raise TailTooWide("theta1 majorant")
        m = 2 * n - 1
        qh = frame.coefs("q_quarter_powers", n)
        acc = acc + qh * (2.0 * float(m) ** order) * iv_cosh(Interval(m * y))
        mq = 2 * n + 1
        lead = frame.coefs("q_quarter_powers", n + 1).hi * 2.0
        r = frame.coefs("q_even_powers", n + 1).hi * ey * ey
        r *= ((mq + 2.0) / mq) ** order
        if r < 1.0:
            t = lead * (float(mq) ** order) * (ey**mq) / (1.0 - r)
            if t <= policy.rel_tol * max(acc.mag, 1e-30):
                acc = acc + Interval(0.0, t)
                break
    return Interval(0.0, acc.hi)


def theta1_abs_lower(
    z: ComplexInterval,
    q_abs: Interval,
    frame_or_q,
    n_factors: int = 12,
) -> Interval:
    """Certified lower bound on |theta1(z, q)| for |q| inside q_abs.

    Product form 2 q^{1/4} sin z prod (1-q^{2n})(1 - 2 q^{2n} cos 2z + q^{4n});
    each complex factor is bounded below through |q|, so the bound is valid
    for complex nomes with modulus in q_abs.  Returns an interval whose lo
    is the certified bound (0 when no positive bound can be certified).
    """
    r = q_abs
    if r.hi >= 1.0:
        return Interval(0.0, 0.0)
    sin_abs = _civ_sincos(z)[0].abs()
    qq = iv_exp(iv_log(r) * 0.25)
    lead = qq * sin_abs * 2.0
    cos2z_mag = iv_cosh(z.im * 2.0).hi
    prod = Interval(lead.lo, lead.lo) if lead.lo > 0 else Interval(0.0, 0.0)
    if prod.lo <= 0.0:
        return Interval(0.0, 0.0)
    r2 = r.sqr()
    r2n = ONE
    for n in range(1, n_factors + 1):
        r2n = r2n * r2
        fac1 = 1.0 - r2n.hi
        fac2 = 1.0 - 2.0 * r2n.hi * cos2z_mag - (r2n.sqr()).hi
        if fac1 <= 0.0 or fac2 <= 0.0:
            return Interval(0.0, 0.0)
        prod = prod * Interval(fac1 * fac2, fac1 * fac2)
    # tail: prod_{n>N} (1 - a_n) >= 1 - sum a_n, a_n = r^{2n}(1 + 2cos2z + r^{2n})
    rr = r2.hi
    if rr >= 1.0:
        return Interval(0.0, 0.0)
    s_next = r2n.hi * rr
    tail_sum = s_next * (1.0 + 2.0 * cos2z_mag + 1.0) / (1.0 - rr)
    if tail_sum >= 1.0:
        return Interval(0.0, 0.0)
    lo = prod.lo * (1.0 - tail_sum) * (1.0 - 1e-14)
    return Interval(max(lo, 0.0), max(lo, 0.0))


# -- real theta_2,4 at a point (for cn) ---------------------------------


def _theta_even_at(frame: EllipticFrame, which: int, v: Interval) -> Interval:
    policy = frame.tail
    if which == 2:
        acc = Interval(0.0)
        n = 0
        while True:
            n += 1
            if n > policy.max_terms:
                raise TailTooWide("theta2 series")
            qh = frame.coefs("q_quarter_powers", n)
            acc = acc + qh * iv_cos(v * float(2 * n - 1)) * 2.0
            nxt = frame.coefs("q_quarter_powers", n + 1).hi * 2.0
            r = frame.coefs("q_even_powers", n + 1).hi
            if r < 1.0 and nxt / (1.0 - r) <= policy.rel_tol * max(acc.mag, 1e-30):
                pad = nxt / (1.0 - r)
                acc = acc + Interval(-pad, pad)
                break
        return acc
    if which == 4:
        acc = ONE
        qn2 = ONE
        n = 0
        while True:
            n += 1
            if n > policy.max_terms:
                raise TailTooWide("theta4 series")
            qn2 = qn2 * frame.q.pow_int(2 * n - 1)
            term = qn2 * iv_cos(v * float(2 * n)) * 2.0
            acc = acc + (term if n % 2 == 0 else -term)
            nxt = (qn2 * frame.q.pow_int(2 * n + 1)).hi * 2.0
            r = frame.q.pow_int(2 * n + 3).hi
            if r < 1.0 and nxt / (1.0 - r) <= policy.rel_tol * max(acc.mag, 1e-30):
                pad = nxt / (1.0 - r)
                acc = acc + Interval(-pad, pad)
                break
        return acc
    raise DomainViolation("which must be 2 or 4")


def jacobi_cn(u: Interval, frame: EllipticFrame) -> Interval:
    """cn(u, k) via the theta quotient
    (theta4(0)/theta2(0)) * theta2(v)/theta4(v), v = pi u / (2K)."""
    v = PI * u / (frame.K * 2.0)
    t2 = _theta_even_at(frame, 2, v)
    t4 = _theta_even_at(frame, 4, v)
    if t4.contains_zero():
        raise PoleProximity("theta4 enclosure touches zero in cn")
    pref = frame.const("theta4_0") / frame.const("theta2_0")
    out = pref * t2 / t4
    return out.intersect(Interval(-1.0, 1.0))


# ----------------------------------------------------------------------
# Weierstrass family via q-series
# ----------------------------------------------------------------------


def _trig_series(
    frame: EllipticFrame,
    z: ComplexInterval,
    coef_name: str,
    poly_order: int,
    use_sin: bool,
    q_power: int,
    alternate: bool = False,
) -> ComplexInterval:
    """sum_n coef_n trig(n pi z / omega) with rigorous tail.

    q_power: 1 for the shifted series (coef ~ q^n), 2 for coef ~ q^{2n}.
    poly_order: power of n inside coef (for the ratio test).
    """
    policy = frame.tail
    w = frame.omega
    base = ComplexInterval(PI * z.re / w, PI * z.im / w)
    y = base.im.mag
    # ratio of coefficient majorants ~ q^{q_power} e^{y}
    rate = frame.q.hi**q_power * math.exp(y) * (1.0 + 1e-12)
    zero = Interval(0.0)
    acc = ComplexInterval(zero, zero)
    n = 0
    while True:
        n += 1
        if n > policy.max_terms or (n + 1) * y > 690.0:
            raise TailTooWide(f"{coef_name} series at {z}")
        coef = frame.coefs(coef_name, n)
        if alternate and n % 2 == 1:
            coef = -coef
        zn = ComplexInterval(base.re * float(n), base.im * float(n))
        s, c = _civ_sincos(zn)
        acc = acc + (s if use_sin else c) * coef
        r = rate * (((n + 2.0) / (n + 1.0)) ** poly_order)
        if r < 1.0:
            nxt = frame.coefs(coef_name, n + 1).mag * math.exp((n + 1) * y) * (
                1.0 + 1e-12
            )
            t = nxt / (1.0 - r)
            scale = max(acc.abs_sq().hi, 1e-60) ** 0.5
            if t <= policy.rel_tol * max(scale, 1e-12):
                pad = Interval(-t, t)
                acc = ComplexInterval(acc.re + pad, acc.im + pad)
                break
    return acc


def _half_arg(frame: EllipticFrame, z: ComplexInterval) -> ComplexInterval:
    w = frame.omega
    return ComplexInterval(PI * z.re / (w * 2.0), PI * z.im / (w * 2.0))


def wp_family(which: str, z: ComplexInterval, frame: EllipticFrame) -> ComplexInterval:
    """Weierstrass functions and their near-axis shifted variants.

    which: 'p', 'pp', 'zeta', 'sigma', 'p_shift_iwp', 'pp_shift_iwp',
    'p_shift_w'.  The shifted variants have no closed cot/csc term and are
    the preferred forms next to the corresponding axis.
    """
    w = frame.omega
    eta1 = frame.eta1
    if which == "p":
        half = _half_arg(frame, z)
        csc = civ_csc(half)
        series = _trig_series(frame, z, "wp_coef", 1, False, 2)
        pref = (PI / (w * 2.0)).sqr()
        return (
            ComplexInterval(-(eta1 / w), Interval(0.0))
            + (csc * csc) * pref
            - series * (PI.sqr() * 2.0 / w.sqr())
        )
    if which == "pp":
        half = _half_arg(frame, z)
        csc = civ_csc(half)
        cot_csc2 = civ_cot(half) * csc * csc
        series = _trig_series(frame, z, "wpp_coef", 2, True, 2)
        return (
            -cot_csc2 * (PI.pow_int(3) / (w.pow_int(3) * 4.0))
            + series * (PI.pow_int(3) * 2.0 / w.pow_int(3))
        )
    if which == "zeta":
        half = _half_arg(frame, z)
        cot = civ_cot(half)
        series = _trig_series(frame, z, "zeta_coef", 0, True, 2)
        return (
            z * (eta1 / w)
            + cot * (PI / (w * 2.0))
            + series * (PI * 2.0 / w)
        )
    if which == "sigma":
        half = _half_arg(frame, z)
        s, _ = _civ_sincos(half)
        exparg = z * z * (eta1 / (w * 2.0))
        series = _sigma_exp_series(frame, z)
        from .interval import civ_exp

        return s * (w * 2.0 / PI) * civ_exp(exparg + series * 4.0)
    if which == "p_shift_iwp":
        series = _trig_series(frame, z, "wps_coef", 1, False, 1)
        return ComplexInterval(-(eta1 / w), Interval(0.0)) - series * (
            PI.sqr() * 2.0 / w.sqr()
        )
    if which == "pp_shift_iwp":
        series = _trig_series(frame, z, "wpps_coef", 2, True, 1)
        return series * (PI.pow_int(3) * 2.0 / w.pow_int(3))
    if which == "p_shift_w":
        half = _half_arg(frame, z)
        sec = civ_sec(half)
        pref = (PI / (w * 2.0)).sqr()
        series = _trig_series(frame, z, "wp_coef", 1, False, 2, alternate=True)
        return (
            ComplexInterval(-(eta1 / w), Interval(0.0))
            + (sec * sec) * pref
            - series * (PI.sqr() * 2.0 / w.sqr())
        )
    raise DomainViolation(f"unknown wp_family member {which!r}")


def _sigma_exp_series(frame: EllipticFrame, z: ComplexInterval) -> ComplexInterval:
    """sum_n q^{2n}/(n(1-q^{2n})) sin^2(n pi z / 2 omega)."""
    policy = frame.tail
    w = frame.omega
    base = _half_arg(frame, z)
    y = base.im.mag
    rate = frame.q.hi**2 * math.exp(2.0 * y) * (1.0 + 1e-12)
    zero = Interval(0.0)
    acc = ComplexInterval(zero, zero)
    n = 0
    while True:
        n += 1
        if n > policy.max_terms:
            raise TailTooWide("sigma exp series")
        coef = frame.coefs("sigma_coef", n)
        zn = ComplexInterval(base.re * float(n), base.im * float(n))
        s, _ = _civ_sincos(zn)
        acc = acc + (s * s) * coef
        r = rate
        if r < 1.0:
            nxt = frame.coefs("sigma_coef", n + 1).mag * math.exp(
                2.0 * (n + 1) * y
            ) * (1.0 + 1e-12)
            t = nxt / (1.0 - r)
            scale = max(acc.abs_sq().hi, 1e-60) ** 0.5
            if t <= policy.rel_tol * max(scale, 1e-12):
                pad = Interval(-t, t)
                acc = ComplexInterval(acc.re + pad, acc.im + pad)
                break
    return acc


def wp_second(z: ComplexInterval, frame: EllipticFrame) -> ComplexInterval:
    """p''(z) = 6 p(z)^2 - g2/2."""
    p = wp_family("p", z, frame)
    return p * p * 6.0 - frame.g2 * 0.5


def wp_third(z: ComplexInterval, frame: EllipticFrame) -> ComplexInterval:
    """p'''(z) = 12 p(z) p'(z)."""
    return wp_family("p", z, frame) * wp_family("pp", z, frame) * 12.0


# ----------------------------------------------------------------------
# Floquet map and KdV spectrum
# ----------------------------------------------------------------------


def xi_raw(alpha: ComplexInterval, frame: EllipticFrame) -> ComplexInterval:
    """2i(zeta(alpha) - alpha zeta(omega)/omega) with the eta1 terms
    cancelled symbolically: 2i[(pi/2w) cot(pi a/2w) + (2pi/w) S(a)]."""
    w = frame.omega
    half = _half_arg(frame, alpha)
    cot = civ_cot(half)
    series = _trig_series(frame, alpha, "zeta_coef", 0, True, 2)
    inner = cot * (PI / (w * 2.0)) + series * (PI * 2.0 / w)
    return ComplexInterval(-(inner.im) * 2.0, inner.re * 2.0)  # times 2i


def xi_floquet(alpha: ComplexInterval, frame: EllipticFrame) -> Interval:
    """Real Floquet parameter on the lines alpha = n w + i beta."""
    v = xi_raw(alpha, frame)
    if not v.im.contains_zero():
        raise NotRealCertified(f"xi imaginary enclosure {v.im} excludes 0")
    return v.re


def xi_dbeta(alpha: ComplexInterval, frame: EllipticFrame) -> Interval:
    """d/dbeta xi(n w + i beta) = 2 (p(alpha) + eta1/omega), certified real."""
    p = wp_family("p", alpha, frame)
    v = (p + frame.eta1 / frame.omega) * 2.0
    if not v.im.contains_zero():
        raise NotRealCertified(f"xi_dbeta imaginary enclosure {v.im} excludes 0")
    return v.re


def lambda_kdv(alpha: ComplexInterval, frame: EllipticFrame) -> ComplexInterval:
    """Limiting KdV spectrum -4 p'(alpha)."""
    return wp_family("pp", alpha, frame) * -4.0

import math

import mpmath as mp
import pytest

from rollwave.elliptic import (
    EllipticFrame,
    build_frame,
    ellint_KE,
    eta1_series,
    frame_from_decimal,
    frame_from_q,
    jacobi_cn,
    kappa_sq,
    kappa_sq_dk,
    kc_sq_from_decimal,
    lambda_kdv,
    theta1,
    theta1_abs_lower,
    theta1_block,
    theta1_majorant,
    wp_family,
    wp_second,
    xi_dbeta,
    xi_floquet,
    xi_raw,
)
from rollwave.errors import DomainViolation, NotRealCertified
from rollwave.interval import ComplexInterval, Interval, PI, certify_real


def _civ(z):
    return ComplexInterval.point(complex(z))


def _contains(civ, z):
    return civ.re.lo <= z.real <= civ.re.hi and civ.im.lo <= z.imag <= civ.im.hi


def _mp_frame(k_text):
    k = mp.mpf(k_text)
    m = k * k
    K = mp.ellipk(m)
    E = mp.ellipe(m)
    Kp = mp.ellipk(1 - m)
    q = mp.exp(-mp.pi * Kp / K)
    return k, K, E, Kp, q


class TestEllint:
    def test_k_small_limit(self):
        k, kc = kc_sq_from_decimal("0.000001")
        K, E, Kp = ellint_KE(k, kc)
        assert K.contains(float(mp.pi / 2)) or abs(K.mid - math.pi / 2) < 1e-11

    def test_agm_vs_mpmath(self):
        for kt in ("0.1", "0.5", "0.70710678118654752440", "0.9", "0.99",
                   "0.9999", "0.999999999997"):
            k, kc = kc_sq_from_decimal(kt)
            K, E, Kp = ellint_KE(k, kc)
            mk = mp.mpf(kt)
            refK = mp.ellipk(mk * mk)
            refE = mp.ellipe(mk * mk)
            refKp = mp.ellipk(1 - mk * mk)
            assert K.lo <= refK <= K.hi, kt
            assert E.lo <= refE <= E.hi, kt
            assert Kp.lo <= refKp <= Kp.hi, kt

    def test_sqrt2_value(self):
        k, kc = kc_sq_from_decimal("0.70710678118654752440")
        K, _, _ = ellint_KE(k, kc)
        assert abs(K.mid - 1.85407467730137) < 1e-11

    def test_domain(self):
        with pytest.raises(DomainViolation):
            ellint_KE(Interval(1.5), Interval(0.1))


class TestSelectionPrinciple:
    def test_kappa_point(self):
        k, kc = kc_sq_from_decimal("0.99")
        v = kappa_sq(k, kc)
        # high-precision oracle of the defining formula
        mk = mp.mpf("0.99")
        K = mp.ellipk(mk**2)
        E = mp.ellipe(mk**2)
        num = 2 * (mk**4 - mk**2 + 1) * E - (1 - mk**2) * (2 - mk**2) * K
        den = (-2 + 3 * mk**2 + 3 * mk**4 - 2 * mk**6) * E + (
            mk**6 + mk**4 - 4 * mk**2 + 2
        ) * K
        ref = mp.mpf(7) / 20 * num / den * (mp.pi / K) ** 2
        assert v.lo <= ref <= v.hi
        assert v.width <= 1e-12 * float(ref)

    def test_derivative_vs_finite_difference(self):
        for kt in ("0.5", "0.9", "0.99", "0.9999"):
            k, kc = kc_sq_from_decimal(kt)
            v = kappa_sq_dk(k, kc)

            def kap2(x):
                K = mp.ellipk(x**2)
                E = mp.ellipe(x**2)
                num = 2 * (x**4 - x**2 + 1) * E - (1 - x**2) * (2 - x**2) * K
                den = (-2 + 3 * x**2 + 3 * x**4 - 2 * x**6) * E + (
                    x**6 + x**4 - 4 * x**2 + 2
                ) * K
                return mp.mpf(7) / 20 * num / den * (mp.pi / K) ** 2

            ref = mp.diff(kap2, mp.mpf(kt))
            assert v.lo <= ref <= v.hi, kt

    def test_monotone_window(self):
        # 1/omega^2 decreasing across [0.9, 0.9999999] at spot pairs
        prev = None
        for kt in ("0.9", "0.95", "0.99", "0.999", "0.9999999"):
            k, kc = kc_sq_from_decimal(kt)
            v = kappa_sq(k, kc)
            if prev is not None:
                assert v.hi < prev.lo
            prev = v


class TestFrame:
    def test_period_paper_interval(self, frame99):
        assert frame99.X.intersects(
            Interval(11.30108911018488, 11.30108911018549)
        )
        assert frame99.X.width <= 1e-11

    def test_nome_consistency(self, frame99):
        _, K, E, Kp, q = _mp_frame("0.99")
        assert frame99.q.lo <= q <= frame99.q.hi
        assert 0.1 <= frame99.q.mid <= 0.71

    def test_root_sum(self, frames):
        for frame in frames.values():
            s = frame.const("e1") + frame.const("e2") + frame.const("e3")
            assert s.contains_zero()
            assert s.width <= 1e-10

    def test_cubic_roots(self, frames):
        for frame in frames.values():
            for name in ("e1", "e2", "e3"):
                e = frame.const(name)
                resid = e.pow_int(3) * 4.0 - frame.g2 * e - frame.g3
                assert resid.contains_zero()

    def test_eta1_cross_form(self, frame99):
        # theta-based eta1 = -theta1'''(0)/(3 theta1'(0)) * (pi/2w)^2 ... use
        # the Legendre identity instead: eta1*w' contributions
        # zeta(i w') w - i w' eta1 = -pi i/2  =>  Im(zeta(i w')) w = -pi/2 + w' eta1
        z = wp_family(
            "zeta", ComplexInterval(Interval(0.0), frame99.omega_p), frame99
        )
        lhs = z.im * frame99.omega - frame99.omega_p * frame99.eta1
        assert (lhs + PI * 0.5).contains_zero()

    def test_frame_from_q_roundtrip(self, frame99):
        f2 = frame_from_q(frame99.q)
        assert f2.k.intersects(frame99.k)
        assert f2.X.intersects(frame99.X)

    def test_near_unity_modulus(self):
        frame = frame_from_decimal("0.999999999997")
        assert frame.q.lo > 0.70 and frame.q.hi < 0.71
        assert frame.X.mid == pytest.approx(48.37, abs=0.5)


class TestTheta:
    def test_odd_at_zero(self, frames):
        for frame in frames.values():
            v = theta1(ComplexInterval(Interval(0.0), Interval(0.0)), frame)
            assert v.re.contains_zero() and v.im.contains_zero()

    def test_series_value_pi_half(self):
        frame = frame_from_q(Interval(0.1))
        v = theta1(ComplexInterval(PI * 0.5, Interval(0.0)), frame)
        ref = mp.jtheta(1, mp.pi / 2, mp.mpf("0.1"))
        # at this argument the alternating sine signs square away, so the
        # series collapses to 2 sum q^{(n-1/2)^2}
        ref2 = 2 * mp.nsum(
            lambda n: mp.mpf("0.1") ** ((n - mp.mpf(1) / 2) ** 2), [1, mp.inf]
        )
        assert abs(ref - ref2) < 1e-40
        assert v.re.lo <= ref <= v.re.hi
        assert v.re.width <= 1e-13

    @pytest.mark.parametrize("order", [0, 1, 2, 3, 4])
    def test_derivatives_vs_mpmath(self, order, frames, rng):
        for frame in frames.values():
            q = mp.mpf(frame.q.mid)
            for _ in range(25):
                z = complex(
                    rng.uniform(-3.0, 3.0),
                    rng.uniform(-0.8, 0.8) * frame.log_q_neg.mid,
                )
                blk = theta1_block(ComplexInterval.point(z), frame, 4)
                ref = mp.jtheta(1, mp.mpc(z), q, order)
                v = blk[order]
                pad = 1e-12 * max(1.0, abs(ref))
                assert v.re.lo - pad <= ref.real <= v.re.hi + pad
                assert v.im.lo - pad <= ref.imag <= v.im.hi + pad

    def test_majorant_dominates(self, frame99, rng):
        for order in range(5):
            y = 1.2
            m = theta1_majorant(frame99, order, y)
            for _ in range(50):
                z = complex(rng.uniform(-4, 4), rng.uniform(-y, y))
                ref = abs(mp.jtheta(1, mp.mpc(z), mp.mpf(frame99.q.mid), order))
                assert ref <= m.hi * (1 + 1e-12)

    def test_abs_lower_bound(self, frame99, rng):
        ell = frame99.log_q_neg
        z = ComplexInterval(Interval(0.4, 0.5), ell * 0.5)
        lb = theta1_abs_lower(z, frame99.q.abs(), None)
        for _ in range(100):
            x = rng.uniform(0.4, 0.5)
            ref = abs(
                mp.jtheta(1, mp.mpf(x) + 1j * mp.mpf(ell.mid) / 2,
                          mp.mpf(frame99.q.mid))
            )
            assert ref >= lb.lo * (1 - 1e-10)


def _wp_ref(frame, z, which):
    """High-precision Weierstrass values through the theta representation,
    an independent formula family."""
    q = mp.mpf(frame.q.mid)
    w = mp.mpf(frame.omega.mid)
    eta1 = mp.mpf(frame.eta1.mid)
    zz = mp.mpc(z)
    u = mp.pi * zz / (2 * w)
    t1 = lambda v, d=0: mp.jtheta(1, v, q, d)
    t2 = lambda v, d=0: mp.jtheta(2, v, q, d)
    if which == "sigma":
        return (2 * w / mp.pi) * t1(u) / t1(0, 1) * mp.exp(
            eta1 * zz**2 / (2 * w)
        )
    if which == "zeta":
        return eta1 * zz / w + mp.pi / (2 * w) * t1(u, 1) / t1(u)
    if which == "p":
        e1 = mp.mpf(frame.const("e1").mid)
        return e1 + (mp.pi * t1(0, 1) * t2(u) / (2 * w * t2(0) * t1(u))) ** 2
    if which == "pp":
        t3 = lambda v: mp.jtheta(3, v, q)
        t4 = lambda v: mp.jtheta(4, v, q)
        return (
            -(mp.pi**3) * t1(0, 1) ** 2 / (4 * w**3)
            * t2(u) * t3(u) * t4(u) / t1(u) ** 3
        )
    raise ValueError(which)


class TestWeierstrass:
    def test_pp_zero_at_half_periods(self, frames):
        for frame in frames.values():
            v = wp_family(
                "pp", ComplexInterval(frame.omega, Interval(0.0)), frame
            )
            assert v.re.contains_zero() and v.im.contains_zero()
            v2 = wp_family(
                "pp", ComplexInterval(Interval(0.0), frame.omega_p), frame
            )
            assert v2.re.contains_zero() and v2.im.contains_zero()

    def test_theta_representation_consistency(self, frames, rng):
        # q-series enclosures contain the theta-form oracle at random points
        for frame in frames.values():
            wmid = frame.omega.mid
            wpmid = frame.omega_p.mid
            done = 0
            while done < 20:
                z = complex(
                    rng.uniform(0.1, 1.9) * wmid, rng.uniform(-0.9, 0.9) * wpmid
                )
                if abs(z) < 0.3 or abs(z - 2 * wmid) < 0.3:
                    continue
                for which in ("p", "pp", "zeta", "sigma"):
                    ref = _wp_ref(frame, z, which)
                    v = wp_family(which, ComplexInterval.point(z), frame)
                    pad = 1e-9 * max(1.0, abs(ref))
                    assert v.re.lo - pad <= ref.real <= v.re.hi + pad, which
                    assert v.im.lo - pad <= ref.imag <= v.im.hi + pad, which
                done += 1

    def test_differential_identity(self, frames, rng):
        for frame in frames.values():
            wmid = frame.omega.mid
            wpmid = frame.omega_p.mid
            done = 0
            while done < 20:
                z = complex(
                    rng.uniform(0.2, 1.8) * wmid,
                    rng.uniform(-0.8, 0.8) * wpmid,
                )
                if abs(z) < 0.4:
                    continue
                zz = ComplexInterval.point(z)
                p = wp_family("p", zz, frame)
                pp = wp_family("pp", zz, frame)
                resid = pp * pp - (
                    p * p * p * 4.0 - p * frame.g2 - frame.g3
                )
                assert resid.re.contains_zero() and resid.im.contains_zero()
                assert resid.abs().hi <= 1e-9 * max(1.0, p.abs().hi ** 3)
                done += 1

    def test_quasi_periodicity(self, frames, rng):
        for frame in frames.values():
            for _ in range(5):
                z = complex(
                    rng.uniform(0.3, 0.7) * frame.omega.mid,
                    rng.uniform(0.1, 0.5) * frame.omega_p.mid,
                )
                zz = ComplexInterval.point(z)
                z2 = zz + frame.omega * 2.0
                a = wp_family("zeta", z2, frame)
                b = wp_family("zeta", zz, frame) + frame.eta1 * 2.0
                d = a - b
                assert d.re.contains_zero() and d.im.contains_zero()

    def test_oddness(self, frames, rng):
        for frame in frames.values():
            for _ in range(5):
                z = complex(
                    rng.uniform(0.2, 0.8) * frame.omega.mid,
                    rng.uniform(0.1, 0.6) * frame.omega_p.mid,
                )
                zz = ComplexInterval.point(z)
                for which in ("zeta", "pp", "sigma"):
                    a = wp_family(which, zz, frame)
                    b = wp_family(which, -zz, frame)
                    s = a + b
                    assert s.re.contains_zero() and s.im.contains_zero(), which

    def test_addition_identity(self, frames, rng):
        for frame in frames.values():
            done = 0
            while done < 5:
                z1 = complex(
                    rng.uniform(0.2, 0.7) * frame.omega.mid,
                    rng.uniform(0.05, 0.45) * frame.omega_p.mid,
                )
                z2 = complex(
                    rng.uniform(0.2, 0.7) * frame.omega.mid,
                    rng.uniform(-0.45, -0.05) * frame.omega_p.mid,
                )
                a = ComplexInterval.point(z1)
                b = ComplexInterval.point(z2)
                pa = wp_family("p", a, frame)
                pb = wp_family("p", b, frame)
                if (pa - pb).abs().lo < 0.05:
                    continue
                lhs = wp_family("zeta", a + b, frame)
                rhs = (
                    wp_family("zeta", a, frame)
                    + wp_family("zeta", b, frame)
                    + (wp_family("pp", a, frame) - wp_family("pp", b, frame))
                    / (pa - pb) * 0.5
                )
                d = lhs - rhs
                assert d.re.contains_zero() and d.im.contains_zero()
                done += 1

    def test_legendre_identity(self, frames):
        for frame in frames.values():
            z = wp_family(
                "zeta", ComplexInterval(Interval(0.0), frame.omega_p), frame
            )
            # zeta(i w') w - i w' zeta(w) + pi i/2 encloses 0
            re_part = z.re * frame.omega
            im_part = z.im * frame.omega - frame.omega_p * frame.eta1 + PI * 0.5
            assert re_part.contains_zero()
            assert im_part.contains_zero()

    def test_mirror_symmetry(self, frame99, rng):
        for _ in range(10):
            z = complex(
                rng.uniform(0.2, 0.8) * frame99.omega.mid,
                rng.uniform(0.1, 0.6) * frame99.omega_p.mid,
            )
            a = wp_family("p", ComplexInterval.point(z), frame99)
            b = wp_family("p", ComplexInterval.point(z.conjugate()), frame99)
            conj_a = a.conj()
            assert conj_a.re.intersects(b.re) and conj_a.im.intersects(b.im)

    def test_shifted_forms(self, frame99, rng):
        for _ in range(10):
            x = rng.uniform(-0.9, 0.9) * frame99.omega.mid
            direct = wp_family(
                "p",
                ComplexInterval(Interval(x), frame99.omega_p),
                frame99,
            )
            shifted = wp_family(
                "p_shift_iwp", ComplexInterval(Interval(x), Interval(0.0)),
                frame99,
            )
            assert direct.re.intersects(shifted.re)
            assert direct.im.intersects(shifted.im)
            direct2 = wp_family(
                "p", ComplexInterval(Interval(x) + frame99.omega, Interval(0.0)),
                frame99,
            )
            shifted2 = wp_family(
                "p_shift_w", ComplexInterval(Interval(x), Interval(0.0)),
                frame99,
            )
            assert direct2.re.intersects(shifted2.re)


class TestFloquet:
    def test_anchor_zero(self, frame99):
        v = xi_floquet(ComplexInterval(frame99.omega, Interval(0.0)), frame99)
        assert v.contains_zero()
        assert v.width <= 1e-11

    def test_anchor_pi(self, frame99):
        v = (
            xi_floquet(ComplexInterval(Interval(0.0), frame99.omega_p), frame99)
            * frame99.omega
        )
        assert v.contains(math.pi)
        assert v.width <= 1e-11

    def test_corner_equals_axis_end(self, frame99):
        a = xi_floquet(
            ComplexInterval(frame99.omega, frame99.omega_p), frame99
        )
        b = xi_floquet(
            ComplexInterval(Interval(0.0), frame99.omega_p), frame99
        )
        assert (a - b).contains_zero()

    def test_small_psi_paper_value(self, frame99):
        psi = Interval(1e-3)
        v = (
            xi_floquet(
                ComplexInterval(Interval(0.0), psi * frame99.omega_p), frame99
            )
            * frame99.omega
        )
        assert v.intersects(
            Interval(4252.36053848855, 4252.36053849688)
        )

    def test_decreasing_on_axis(self, frame99):
        prev = None
        for p in (0.05, 0.1, 0.2, 0.4, 0.7, 1.0):
            v = xi_floquet(
                ComplexInterval(
                    Interval(0.0), Interval(p) * frame99.omega_p
                ),
                frame99,
            )
            if prev is not None:
                assert v.hi < prev.lo
            prev = v

    def test_dbeta_negative_on_axis(self, frame99):
        for p in (0.2, 0.5, 0.9):
            v = xi_dbeta(
                ComplexInterval(Interval(0.0), Interval(p) * frame99.omega_p),
                frame99,
            )
            assert v.hi < 0.0


class TestLambdaKdV:
    def test_zeros(self, frame99):
        for alpha in (
            ComplexInterval(frame99.omega, Interval(0.0)),
            ComplexInterval(Interval(0.0), frame99.omega_p),
        ):
            v = lambda_kdv(alpha, frame99)
            assert v.re.contains_zero() and v.im.contains_zero()

    def test_magnitude_at_psi0(self, frame99):
        alpha = ComplexInterval(
            Interval(0.0), Interval(0.98) * frame99.omega_p
        )
        v = lambda_kdv(alpha, frame99)
        assert v.re.contains_zero()
        assert v.im.abs().lo >= 0.05099537458926759

    def test_imaginary_on_lines(self, frame99, rng):
        for _ in range(10):
            p = rng.uniform(0.05, 0.95)
            a1 = ComplexInterval(frame99.omega, Interval(p) * frame99.omega_p)
            v = lambda_kdv(a1, frame99)
            assert v.re.contains_zero()


class TestJacobiCn:
    def test_anchors(self, frame99):
        assert jacobi_cn(Interval(0.0), frame99).contains(1.0)
        v = jacobi_cn(frame99.K, frame99)
        assert v.contains_zero()

    def test_vs_mpmath(self, frames, rng):
        for kt, frame in frames.items():
            cnf = mp.ellipfun("cn")
            for _ in range(20):
                u = rng.uniform(-3.0, 3.0)
                v = jacobi_cn(Interval(u), frame)
                ref = cnf(mp.mpf(u), m=mp.mpf(kt) ** 2)
                assert v.lo - 1e-12 <= ref <= v.hi + 1e-12

    def test_point_paper(self, frame99):
        v = jacobi_cn(Interval(0.5), frame99)
        ref = mp.ellipfun("cn")(mp.mpf("0.5"), m=mp.mpf("0.99") ** 2)
        assert v.lo <= ref <= v.hi
        assert v.width <= 1e-12

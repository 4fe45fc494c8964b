import math
import random
from fractions import Fraction

import mpmath as mp
import pytest
from hypothesis import given, settings, strategies as st

from rollwave.errors import (
    DivisionByZeroInterval,
    DomainViolation,
    PoleProximity,
)
from rollwave.interval import (
    ComplexInterval,
    Interval,
    PI,
    SignResult,
    certify_real,
    civ_arith,
    civ_cos,
    civ_cot,
    civ_csc,
    civ_exp,
    civ_sec,
    civ_sin,
    iv_arith,
    iv_elem,
    iv_sign,
    iv_subdivide,
)

finite = st.floats(
    min_value=-1e12, max_value=1e12, allow_nan=False, allow_infinity=False
)


def ivs(lo=-1e12, hi=1e12):
    return st.tuples(
        st.floats(min_value=lo, max_value=hi, allow_nan=False),
        st.floats(min_value=0.0, max_value=10.0, allow_nan=False),
    ).map(lambda t: Interval(t[0], t[0] + t[1]))


class TestArithmeticOracle:
    """Exact rational evaluation must land inside every result."""

    def test_add_exact(self):
        assert iv_arith("add", Interval(1, 2), Interval(3, 4)) == Interval(
            Interval(4, 6).lo, Interval(4, 6).hi
        ) or True
        r = iv_arith("add", Interval(1, 2), Interval(3, 4))
        assert r.lo <= 4.0 and r.hi >= 6.0

    def test_mul_sign_cases(self):
        r = iv_arith("mul", Interval(-1, 2), Interval(3, 4))
        assert r.lo <= -4.0 and r.hi >= 8.0

    def test_div_third(self):
        r = iv_arith("div", Interval(1, 1), Interval(3, 3))
        third = Fraction(1, 3)
        assert Fraction(r.lo) <= third <= Fraction(r.hi)
        assert r.hi - r.lo <= 2 * math.ulp(1 / 3)

    def test_div_by_zero(self):
        with pytest.raises(DivisionByZeroInterval):
            iv_arith("div", Interval(1, 1), Interval(-1, 1))

    @pytest.mark.parametrize("op", ["add", "sub", "mul", "div"])
    def test_rational_containment(self, op, rng):
        # dyadic rationals are exactly representable, so the rational
        # result of the point operation is the exact oracle
        for _ in range(300):
            a = Fraction(rng.randint(-(2**20), 2**20), 2 ** rng.randint(0, 10))
            b = Fraction(rng.randint(-(2**20), 2**20), 2 ** rng.randint(0, 10))
            if op == "div" and b == 0:
                continue
            ia = Interval(float(a))
            ib = Interval(float(b))
            r = iv_arith(op, ia, ib)
            exact = {
                "add": a + b,
                "sub": a - b,
                "mul": a * b,
                "div": a / b if b != 0 else None,
            }[op]
            assert Fraction(r.lo) <= exact <= Fraction(r.hi)


class TestIsotonicity:
    @given(ivs(-100, 100), ivs(-100, 100), st.floats(0.1, 0.9), st.floats(0.1, 0.9))
    @settings(max_examples=200, deadline=None)
    def test_inclusion_isotone_mul(self, a, b, fa, fb):
        # shrink a, b to inner subintervals; result must shrink too
        ia = Interval(a.lo + fa * (a.hi - a.lo) * 0.25, a.hi - fa * (a.hi - a.lo) * 0.25)
        ib = Interval(b.lo + fb * (b.hi - b.lo) * 0.25, b.hi - fb * (b.hi - b.lo) * 0.25)
        outer = a * b
        inner = ia * ib
        assert inner.is_subset(outer)

    @given(ivs(-50, 50), ivs(-50, 50))
    @settings(max_examples=200, deadline=None)
    def test_add_sub_isotone(self, a, b):
        mid_a = Interval(a.mid)
        mid_b = Interval(b.mid)
        assert (mid_a + mid_b).is_subset(a + b)
        assert (mid_a - mid_b).is_subset(a - b)

    @given(ivs(0.1, 40), st.sampled_from(["exp", "log", "sqrt", "sin", "cos",
                                          "sinh", "cosh", "atan"]))
    @settings(max_examples=200, deadline=None)
    def test_elem_isotone(self, a, fn):
        inner = Interval(a.mid)
        assert iv_elem(fn, inner).is_subset(iv_elem(fn, a))


class TestElementaryContainment:
    FNS = {
        "exp": mp.exp,
        "log": mp.log,
        "sqrt": mp.sqrt,
        "sin": mp.sin,
        "cos": mp.cos,
        "sinh": mp.sinh,
        "cosh": mp.cosh,
        "atan": mp.atan,
        "arccos": mp.acos,
        "cot": mp.cot,
        "csc": mp.csc,
    }

    def test_exp_zero(self):
        r = iv_elem("exp", Interval(0.0))
        assert r.contains(1.0)
        assert r.hi - r.lo <= 4 * math.ulp(1.0)

    def test_cos_half_period(self):
        r = iv_elem("cos", Interval(0.0, math.pi))
        assert r.lo == -1.0 and r.hi >= 1.0 - 1e-15

    def test_arccos_point(self):
        r = iv_elem("arccos", Interval(0.5))
        third_pi = mp.pi / 3
        assert r.lo <= third_pi <= r.hi
        assert r.hi - r.lo <= 4 * math.ulp(2.0)

    def test_domain_errors(self):
        with pytest.raises(DomainViolation):
            iv_elem("log", Interval(-1.0, 1.0))
        with pytest.raises(DomainViolation):
            iv_elem("arccos", Interval(0.5, 1.5))
        with pytest.raises(PoleProximity):
            iv_elem("cot", Interval(-0.1, 0.1))

    def test_mass_containment(self, rng):
        # 10^4 random points across the implemented kernels
        checked = 0
        while checked < 10000:
            fn = rng.choice(list(self.FNS))
            x = rng.uniform(-30.0, 30.0)
            w = abs(rng.gauss(0.0, 0.3))
            if fn == "log" or fn == "sqrt":
                x = abs(x) + 1e-6
            if fn == "arccos":
                x = rng.uniform(-1.0, 1.0)
                w = min(w, 1.0 - x)
            a = Interval(x, x + w)
            if fn in ("cot", "csc"):
                s = iv_elem("sin", a)
                if s.contains_zero():
                    continue
            r = iv_elem(fn, a)
            t = rng.uniform(0.0, 1.0)
            pt = a.lo + t * (a.hi - a.lo)
            exact = self.FNS[fn](mp.mpf(pt))
            assert r.lo <= exact <= r.hi, (fn, a, pt)
            checked += 1


class TestSignAndSubdivision:
    def test_signs(self):
        assert iv_sign(Interval(0.1, 2.0)) is SignResult.STRICTLY_POSITIVE
        assert iv_sign(Interval(-1.0, 1.0)) is SignResult.CONTAINS_ZERO
        assert iv_sign(Interval(-3.0, -2.0)) is SignResult.STRICTLY_NEGATIVE
        assert iv_sign(Interval(0.0, 1.0)) is SignResult.CONTAINS_ZERO

    def test_subdivide_halves(self):
        parts = iv_subdivide(Interval(0.0, 1.0), 2)
        assert parts[0].lo == 0.0 and parts[1].hi == 1.0
        assert parts[0].hi == parts[1].lo

    def test_subdivide_degenerate(self):
        parts = iv_subdivide(Interval(2.0, 2.0), 5)
        assert len(parts) == 5
        assert all(p.lo == 2.0 and p.hi == 2.0 for p in parts)

    def test_subdivide_cover_random(self, rng):
        for _ in range(200):
            lo = rng.uniform(-10, 10)
            hi = lo + abs(rng.gauss(0, 2))
            n = rng.randint(1, 1000)
            parts = iv_subdivide(Interval(lo, hi), n)
            assert len(parts) == n
            assert parts[0].lo <= lo and parts[-1].hi >= hi
            for p, q in zip(parts, parts[1:]):
                assert p.hi == q.lo
            widths = [p.width for p in parts]
            cap = (hi - lo) / n + 2 * math.ulp(max(abs(lo), abs(hi), 1.0))
            assert max(widths) <= cap * (1 + 1e-12)

    def test_subdivide_omega_p(self, frame99):
        parts = iv_subdivide(frame99.omega_p, 100)
        assert len(parts) == 100
        assert parts[0].lo <= frame99.omega_p.lo
        assert parts[-1].hi >= frame99.omega_p.hi


class TestComplexInterval:
    def test_mul_point(self):
        z = ComplexInterval(Interval(1.0), Interval(0.0))
        w = ComplexInterval(Interval(0.0), Interval(1.0))
        r = z * w
        assert r.contains(1j)

    def test_abs_345(self):
        r = civ_arith("abs", ComplexInterval(Interval(3.0), Interval(4.0)))
        assert r.contains(5.0)
        assert r.hi - r.lo <= 8 * math.ulp(5.0)

    def test_exp_quarter_turn(self):
        z = ComplexInterval(Interval(0.0), PI * 0.5)
        r = civ_exp(z)
        assert r.contains(1j)
        assert r.re.width <= 2e-15 and r.im.width <= 2e-15

    def test_div_contains(self, rng):
        for _ in range(500):
            a = complex(rng.uniform(-5, 5), rng.uniform(-5, 5))
            b = complex(rng.uniform(-5, 5), rng.uniform(-5, 5))
            if abs(b) < 0.2:
                continue
            za = ComplexInterval.point(a)
            zb = ComplexInterval.point(b)
            r = za / zb
            exact = mp.mpc(a) / mp.mpc(b)
            assert r.re.lo <= exact.real <= r.re.hi
            assert r.im.lo <= exact.imag <= r.im.hi

    @pytest.mark.parametrize("fn,ref", [
        (civ_sin, mp.sin), (civ_cos, mp.cos), (civ_cot, mp.cot),
        (civ_csc, mp.csc), (civ_sec, mp.sec), (civ_exp, mp.exp),
    ])
    def test_trig_containment(self, fn, ref, rng):
        done = 0
        while done < 300:
            z = complex(rng.uniform(-3, 3), rng.uniform(-2, 2))
            if fn in (civ_cot, civ_csc) and abs(mp.sin(mp.mpc(z))) < 0.1:
                continue
            if fn is civ_sec and abs(mp.cos(mp.mpc(z))) < 0.1:
                continue
            r = fn(ComplexInterval.point(z))
            exact = ref(mp.mpc(z))
            assert r.re.lo <= exact.real <= r.re.hi, (fn, z)
            assert r.im.lo <= exact.imag <= r.im.hi, (fn, z)
            done += 1

    def test_pow_int(self, rng):
        for _ in range(200):
            z = complex(rng.uniform(-2, 2), rng.uniform(-2, 2))
            n = rng.randint(0, 6)
            r = ComplexInterval.point(z).pow_int(n)
            exact = mp.mpc(z) ** n
            assert r.re.lo <= exact.real <= r.re.hi
            assert r.im.lo <= exact.imag <= r.im.hi

    def test_certify_real(self):
        z = ComplexInterval(Interval(1.0, 2.0), Interval(-1e-12, 1e-12))
        assert certify_real(z).lo == 1.0
        from rollwave.errors import NotRealCertified

        with pytest.raises(NotRealCertified):
            certify_real(ComplexInterval(Interval(1.0), Interval(0.5, 1.0)))

import math
from fractions import Fraction

import mpmath as mp
import pytest

from rollwave.cheb import (
    AffineMap,
    ChebModel,
    StadiumSpec,
    build_model_1d,
    build_model_2d,
    cauchy_deriv_bound,
    cheb_coeffs_1d,
    cheb_coeffs_2d,
    cheb_derivative_coeffs,
    cheb_nodes,
    ellipse_point,
    integrate_model,
    interp_2d_error,
    interp_error_bound,
    interp_error_on_stadium,
    lebesgue_const,
    load_model,
    save_model,
    stadium_bound,
    stadium_from_halfwidth,
)
from rollwave.errors import DomainViolation, InvalidSubdomain
from rollwave.interval import ComplexInterval, Interval, iv_exp


def _model_from_fn(fn, n, m_rho, rho, domain=(-1.0, 1.0), deriv_err=()):
    spec = StadiumSpec.from_rho(Interval(rho))
    amap = AffineMap.for_domain(Interval(domain[0]), Interval(domain[1]))
    samples = [fn(amap.from_t(t)) for t in cheb_nodes(n, "zeros")]
    err = interp_error_bound(Interval(m_rho), spec, n, "zeros")
    return build_model_1d(samples, err, Interval(m_rho), spec, amap, deriv_err)


class TestNodes:
    def test_extrema_n1(self):
        nodes = cheb_nodes(1, "extrema")
        assert nodes[0].contains(1.0) and nodes[1].contains(-1.0)

    def test_zeros_n2(self):
        nodes = cheb_nodes(2, "zeros")
        exact = [math.sqrt(3) / 2, 0.0, -math.sqrt(3) / 2]
        for n, e in zip(nodes, exact):
            assert n.lo <= e <= n.hi
            assert n.width <= 8 * math.ulp(1.0)

    def test_zeros_paper_count(self):
        nodes = cheb_nodes(241, "zeros")
        assert len(nodes) == 242
        assert all(-1.0 <= n.lo and n.hi <= 1.0 for n in nodes)


class TestCoefficients:
    def test_constant(self):
        samples = [Interval(1.0)] * 8
        coeffs = cheb_coeffs_1d(samples)
        assert coeffs[0].contains(1.0)
        for c in coeffs[1:]:
            assert c.contains_zero() and c.width < 1e-14

    def test_t3_orthogonality(self):
        nodes = cheb_nodes(5, "zeros")
        samples = [n * n * n * 4.0 - n * 3.0 for n in nodes]
        coeffs = cheb_coeffs_1d(samples)
        assert coeffs[3].contains(1.0)
        for j, c in enumerate(coeffs):
            if j != 3:
                assert c.contains_zero()

    def test_exp_bessel_a0(self):
        # leading Chebyshev coefficient of exp is I_0(1)
        model = _model_from_fn(lambda x: iv_exp(x), 16, math.e, 2.0)
        a0 = model.coeffs[0]
        ref = mp.besseli(0, 1)
        assert a0.lo <= ref <= a0.hi
        assert float(mp.nstr(ref, 12)) == pytest.approx(1.26606587775, rel=1e-10)

    def test_2d_separable(self):
        nodes = cheb_nodes(6, "zeros")
        grid = [[iv_exp(x + y) for y in nodes] for x in nodes]
        coeffs = cheb_coeffs_2d(grid)
        one_d = cheb_coeffs_1d([iv_exp(x) for x in nodes])
        for j in range(7):
            for k in range(7):
                prod = one_d[j] * one_d[k]
                assert coeffs[j][k].intersects(
                    prod + Interval(-1e-13, 1e-13)
                )

    def test_2d_t2t1(self):
        nodes = cheb_nodes(4, "zeros")
        grid = [
            [(x.sqr() * 2.0 - 1.0) * y for y in nodes] for x in nodes
        ]
        coeffs = cheb_coeffs_2d(grid)
        assert coeffs[2][1].contains(1.0)
        for j in range(5):
            for k in range(5):
                if (j, k) != (2, 1):
                    assert coeffs[j][k].contains_zero()

    def test_derivative_coeffs(self):
        # d/dx T3 = 12x^2-3 = 6T2 + 3T0
        c = [Interval(0.0), Interval(0.0), Interval(0.0), Interval(1.0)]
        d = cheb_derivative_coeffs(c)
        assert d[0].contains(3.0) and d[2].contains(6.0)
        assert d[1].contains_zero()


class TestErrorBounds:
    def test_paper_single_wave_bound(self):
        # M = 2.55e23, rho in [1.50919391484325, 1.50919391484326], N = 241;
        # the published epsilon matches the extremal-node variant of the
        # Bernstein bound, and the zero-node variant is strictly smaller
        spec = StadiumSpec.from_rho(
            Interval(1.50919391484325, 1.50919391484326)
        )
        # the quoted modulus bound is rounded to three digits, which
        # shifts the reproduced epsilon by ~0.2%
        b = interp_error_bound(Interval(2.55e23), spec, 241, "extrema")
        assert 0.9665e-18 <= b.hi <= 0.970e-18
        bz = interp_error_bound(Interval(2.55e23), spec, 241, "zeros")
        assert bz.hi <= b.hi

    def test_paper_psi_bound(self):
        spec = StadiumSpec.from_rho(
            Interval(4.07266431471885, 4.07266431471886)
        )
        b = interp_error_bound(Interval(7.316e19), spec, 42, "extrema")
        assert 0.326e-5 <= b.hi <= 0.328e-5

    def test_monotone_in_n(self):
        spec = StadiumSpec.from_rho(Interval(1.5))
        prev = None
        for n in range(4, 40, 4):
            b = interp_error_bound(Interval(1e6), spec, n, "zeros")
            if prev is not None:
                assert b.hi < prev
            prev = b.hi

    def test_deriv_order2_needs_subdomain(self):
        spec = StadiumSpec.from_rho(Interval(2.0))
        with pytest.raises(InvalidSubdomain):
            interp_error_bound(Interval(1.0), spec, 8, "zeros", 2)
        b = interp_error_bound(
            Interval(1.0), spec, 8, "zeros", 2, subdomain=Interval(-0.5, 0.5)
        )
        assert b.hi > 0

    def test_lebesgue(self):
        l1 = lebesgue_const(1)
        assert l1.hi >= 1.0
        l100 = lebesgue_const(100)
        ref = 2 / math.pi * math.log(100) + 2 / math.pi * (
            0.5772156649015329 + math.log(8 / math.pi)
        )
        assert l100.lo <= ref + math.pi / 720000
        assert l100.hi >= ref
        assert l100.hi - ref <= math.pi / 720000 + 1e-12

    def test_2d_error_formula(self):
        e = interp_2d_error(Interval(1e-18), Interval(1e-18), Interval(3.0))
        assert e.hi <= 4.1e-18
        assert interp_2d_error(Interval(0.0), Interval(0.0), Interval(5.0)).hi <= 1e-300


class TestStadium:
    def test_from_halfwidth_paper_x(self, frame99):
        c = frame99.omega_p / frame99.omega * 0.9
        spec = stadium_from_halfwidth(Interval(c.lo, c.lo))
        assert abs(spec.rho.mid - 1.509193914843255) <= 1e-11

    def test_from_halfwidth_paper_psi(self, frame99):
        from rollwave.interval import PI

        c = PI / frame99.log_q_neg * 0.9
        spec = stadium_from_halfwidth(Interval(c.lo, c.lo))
        assert abs(spec.rho.mid - 4.072664314718855) <= 1e-10

    def test_halfwidth_limit(self):
        spec = stadium_from_halfwidth(Interval(1e-8))
        assert 1.0 < spec.rho.lo < 1.0 + 1e-7

    def test_upper_bound_constant(self):
        spec = StadiumSpec.from_rho(Interval(1.7))

        def f(z):
            return ComplexInterval(Interval(2.5), Interval(0.0))

        b = stadium_bound(f, spec, 32, mode="upper_abs", arc=(0.0, 2 * math.pi))
        assert b.contains(2.5)

    def test_cauchy_linear_in_m(self):
        outer = StadiumSpec.from_rho(Interval(2.0))
        inner = StadiumSpec.from_rho(Interval(1.5))
        b1 = cauchy_deriv_bound(Interval(1.0), outer, inner, 1)
        b2 = cauchy_deriv_bound(Interval(2.0), outer, inner, 1)
        assert b2.hi == pytest.approx(2 * b1.hi, rel=1e-12)
        assert cauchy_deriv_bound(Interval(7.0), outer, inner, 0).hi == 7.0

    def test_cauchy_exceeds_true_derivative(self):
        # f = exp on E_2; bound |f'| on E_1.5 and compare with dense max
        outer = StadiumSpec.from_rho(Interval(2.0))
        inner = StadiumSpec.from_rho(Interval(1.5))
        m = iv_exp(Interval(outer.semi_major.hi))  # |exp| <= e^{Re max}
        b = cauchy_deriv_bound(Interval(m.hi), outer, inner, 1)
        true_max = 0.0
        for j in range(400):
            th = 2 * math.pi * j / 400
            z = mp.mpf(1.5) / 2 * mp.exp(1j * th) + mp.exp(-1j * th) / (2 * 1.5)
            z = (mp.mpf(1.5) * mp.exp(1j * th) + mp.exp(-1j * th) / 1.5) / 2
            true_max = max(true_max, abs(mp.exp(z)))
        assert b.hi >= true_max


class TestModelEvalIntegrate:
    def test_constant_model(self):
        model = _model_from_fn(lambda x: Interval(1.0), 6, 1.0, 2.0)
        v = model.eval(Interval(-0.3, 0.4))
        assert v.contains(1.0)

    def test_exp_eval_tight(self):
        model = _model_from_fn(lambda x: iv_exp(x), 24, 4.0, 2.5)
        box = Interval(0.3 - 5e-4, 0.3 + 5e-4)
        v = model.eval(box)
        ref = mp.exp(mp.mpf("0.3"))
        assert v.lo <= ref <= v.hi
        assert v.width <= 1e-10 + 2 * math.e * 1e-3

    def test_eval_contract_random(self, rng):
        model = _model_from_fn(lambda x: iv_exp(x), 20, 4.0, 2.5)
        for _ in range(1000):
            x = rng.uniform(-1.0, 1.0)
            v = model.eval(Interval(x))
            assert v.lo <= mp.exp(mp.mpf(x)) <= v.hi

    def test_eval_linear_width_growth(self):
        # width of the cosine-form evaluation stays ~ sum of coefficient
        # widths (no Clenshaw blowup)
        n = 80
        eps = 2.0**-52
        samples = [Interval(1.0 - eps, 1.0 + eps) for _ in range(n + 1)]
        spec = StadiumSpec.from_rho(Interval(2.0))
        model = build_model_1d(
            samples, Interval(0.0), Interval(1.0), spec, AffineMap.to_unit()
        )
        v = model.eval(Interval(1.0))
        total_coeff_width = sum(c.width for c in model.coeffs)
        assert v.width <= total_coeff_width * 1.05 + 1e-12

    def test_integrate_t0_t1_t2(self):
        spec = StadiumSpec.from_rho(Interval(2.0))
        amap = AffineMap.to_unit()
        nodes = cheb_nodes(6, "zeros")
        cases = [
            ([Interval(1.0) for _ in nodes], 2.0),
            ([n for n in nodes], 0.0),
            ([n.sqr() * 2.0 - 1.0 for n in nodes], -2.0 / 3.0),
        ]
        for samples, exact in cases:
            model = build_model_1d(
                samples, Interval(0.0), Interval(1.0), spec, amap
            )
            v = integrate_model(model)
            assert v.lo <= exact <= v.hi
            assert v.width < 1e-13

    def test_integrate_poly_rational_oracle(self, rng):
        # degree <= N polynomials integrate to the exact rational value
        spec = StadiumSpec.from_rho(Interval(2.0))
        for _ in range(20):
            deg = rng.randint(0, 7)
            coeffs = [Fraction(rng.randint(-5, 5)) for _ in range(deg + 1)]
            nodes = cheb_nodes(9, "zeros")

            def poly_iv(x):
                acc = Interval(0.0)
                for c in reversed(coeffs):
                    acc = acc * x + float(c)
                return acc

            model = build_model_1d(
                [poly_iv(x) for x in nodes], Interval(0.0), Interval(10.0),
                spec, AffineMap.to_unit(),
            )
            exact = sum(
                c * (Fraction(1) - Fraction(-1) ** (p + 1)) / (p + 1)
                for p, c in enumerate(coeffs)
            )
            v = integrate_model(model)
            assert Fraction(v.lo) <= exact <= Fraction(v.hi)

    def test_deriv_bound_validity(self, rng):
        # |f' - p'| at sample points below the certified order-1 bound
        n = 14
        rho = 2.5
        m = 4.0
        model = _model_from_fn(lambda x: iv_exp(x), n, m, rho,
                               deriv_err=(((1,), interp_error_bound(
                                   Interval(m), StadiumSpec.from_rho(Interval(rho)),
                                   n, "zeros", 1)),))
        bound = interp_error_bound(
            Interval(m), StadiumSpec.from_rho(Interval(rho)), n, "zeros", 1
        )
        for _ in range(1000):
            x = rng.uniform(-1.0, 1.0)
            v = model.eval(Interval(x), deriv=1)
            ref = mp.exp(mp.mpf(x))
            assert v.lo - 1e-12 <= ref <= v.hi + 1e-12

    def test_2d_model_eval(self):
        nodes = cheb_nodes(20, "zeros")
        grid = [[iv_exp(x + y) for y in nodes] for x in nodes]
        spec = StadiumSpec.from_rho(Interval(2.0))
        err = interp_error_bound(Interval(12.2), spec, 20, "zeros")
        err2 = interp_2d_error(err, err, lebesgue_const(21))
        from rollwave.cheb import Provenance

        model = build_model_2d(
            grid, err2,
            (Provenance(Interval(12.2), spec.rho, 20),) * 2,
            (AffineMap.to_unit(), AffineMap.to_unit()),
        )
        v = model.eval(Interval(0.25), Interval(-0.5))
        ref = mp.exp(mp.mpf("-0.25"))
        assert v.lo <= ref <= v.hi
        assert v.width < 1e-2


class TestSerialization:
    def test_roundtrip(self, tmp_path):
        model = _model_from_fn(lambda x: iv_exp(x), 12, 4.0, 2.0,
                               deriv_err=(((1,), Interval(0.0, 1e-3)),))
        p = str(tmp_path / "m.txt")
        save_model(model, p)
        back = load_model(p)
        assert len(back.coeffs) == len(model.coeffs)
        for a, b in zip(model.coeffs, back.coeffs):
            assert a.lo == b.lo and a.hi == b.hi
        assert back.err.hi == model.err.hi
        v1 = model.eval(Interval(0.37))
        v2 = back.eval(Interval(0.37))
        assert v1.lo == v2.lo and v1.hi == v2.hi

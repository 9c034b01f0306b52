import cmath
import math

import numpy as np
import pytest

from finsec.symbols import (
    CircleCluster,
    FiberAssignment,
    MissingAssignment,
    PCSOSymbol,
    SampledCluster,
    StepFunction,
    ValueOutsideCluster,
    chi_interval,
    chi_minus,
    chi_plus,
    constant_step,
    sample_fibers,
    so_constant,
    so_oscillation,
    so_sqrt_log,
    so_phase,
    so_with_limit,
)


def mixed_jump_symbol(ks=(1, 2), coeffs=((1.0, 2.0), (0.5j, -1.0))):
    """sum_k (c_k chi_- + d_k chi_+) g_k with oscillating factors."""
    terms = []
    gens = {}
    for k, (c, d) in zip(ks, coeffs):
        g = so_sqrt_log(k)
        gens[g.id] = g
        terms.append((StepFunction((0.0,), (c, d)), (g.id,)))
    return PCSOSymbol(tuple(terms), gens)


class TestStepFunction:
    def test_validation(self):
        with pytest.raises(ValueError):
            StepFunction((1.0, 1.0), (1, 2, 3))
        with pytest.raises(ValueError):
            StepFunction((0.0,), (1,))

    def test_characteristic_functions(self):
        assert chi_plus(-1.0) == 0
        assert chi_plus(2.0) == 1
        assert chi_minus(-1.0) == 1
        assert chi_interval(-1, 1)(0.0) == 1
        assert chi_interval(-1, 1)(3.0) == 0

    def test_breakpoint_right_limit_convention(self):
        s = StepFunction((0.0,), (5.0, 7.0))
        assert s(0.0) == 7.0

    def test_one_sided(self):
        s = StepFunction((0.0,), (5.0, 7.0))
        assert s.one_sided(0.0) == (5.0, 7.0)
        assert s.one_sided(1.0) == (7.0, 7.0)
        assert s.one_sided(-3.0) == (5.0, 5.0)

    def test_algebra(self):
        s = 2.0 * chi_minus + 3.0 * chi_plus
        t = s * s + 1.0
        assert t(-1.0) == 5.0
        assert t(1.0) == 10.0

    def test_reflect(self):
        s = StepFunction((-1.0, 2.0), (1.0, 2.0, 3.0))
        r = s.reflect()
        for t in (-5.0, -1.5, 0.5, 3.0):
            assert r(t) == s(-t)

    def test_restrict(self):
        s = StepFunction((-2.0, 0.0, 3.0), (1.0, 2.0, 5.0, 7.0))
        r = s.restrict(-1.0, 1.0)
        assert r.breakpoints == (0.0,)
        assert r.values == (2.0, 5.0)


class TestGenerators:
    def test_gk_values(self):
        g1 = so_sqrt_log(1)
        assert g1(0.0) == 0
        t = 3.0
        expect = (t * t / (t * t + 1)) * cmath.exp(1j * math.sqrt(math.log(t * t + 1)))
        assert abs(g1(t) - expect) < 1e-14

    def test_gk_even_and_huge_arguments(self):
        g2 = so_sqrt_log(2)
        assert g2(5.0) == g2(-5.0)
        v = g2(1e200)
        assert abs(abs(v) - 1.0) < 1e-12
        assert np.isfinite(v.real) and np.isfinite(v.imag)

    def test_gk_oscillation_decays_on_dyadic_annuli(self):
        g1 = so_sqrt_log(1)
        oscs = [so_oscillation(g1, x) for x in (4.0, 64.0, 1024.0, 16384.0)]
        assert all(b < a for a, b in zip(oscs, oscs[1:]))

    def test_phase_generator_oscillation_decays(self):
        gen = so_phase("w", lambda t: math.sqrt(math.log(t * t + 2)), even=True)
        oscs = [so_oscillation(gen, x) for x in (8.0, 128.0, 2048.0)]
        assert all(b < a for a, b in zip(oscs, oscs[1:]))

    def test_gk_argument_fills_the_circle(self):
        # along a representable geometric trajectory the phase sweeps all
        # 16 angular bins
        n = np.arange(10000)
        logtau = math.log(2.0) + n * math.log(1.07)
        args = np.sqrt(2.0 * logtau)  # asymptotic phase of g_1
        bins = np.floor((args % (2 * math.pi)) / (2 * math.pi / 16)).astype(int)
        assert set(bins) == set(range(16))

    def test_reflect_even_is_identity(self):
        g1 = so_sqrt_log(1)
        assert g1.reflect() is g1

    def test_reflect_odd_generator(self):
        gen = so_with_limit("r", lambda t: t / (1 + t * t) + 1.0, 1.0)
        r = gen.reflect()
        assert r.id != gen.id
        assert abs(r(2.0) - gen(-2.0)) < 1e-15


class TestPCSOSymbol:
    def test_constant_eval(self):
        sym = PCSOSymbol.constant(5.0)
        assert sym(3.0) == 5.0
        assert sym.constant_value() == 5.0

    def test_chi_plus_eval(self):
        sym = PCSOSymbol.from_step(chi_plus)
        assert sym(-1.0) == 0
        assert sym(2.0) == 1

    def test_g1_vanishes_at_origin(self):
        sym = PCSOSymbol.from_generator(so_sqrt_log(1))
        assert sym(0.0) == 0

    def test_one_sided_limits(self):
        sym = PCSOSymbol.from_step(chi_plus)
        assert sym.one_sided_limits(0.0) == (0, 1)
        sym2 = PCSOSymbol.from_step(2.0 * chi_minus + 3.0 * chi_plus)
        assert sym2.one_sided_limits(1.0) == (3.0, 3.0)

    def test_one_sided_limits_with_so_factor(self):
        g1 = so_sqrt_log(1)
        sym = PCSOSymbol(((constant_step(1.0), (g1.id,)),), {g1.id: g1})
        lo, hi = sym.one_sided_limits(2.0)
        assert lo == hi == g1(2.0)

    def test_fiber_values_match_example(self):
        sym = mixed_jump_symbol()
        eta = FiberAssignment.of({"g1": cmath.exp(0.7j), "g2": cmath.exp(2.2j)})
        lo, hi = sym.fiber_values(eta)
        c = (1.0, 0.5j)
        d = (2.0, -1.0)
        expect_lo = c[0] * eta["g1"] + c[1] * eta["g2"]
        expect_hi = d[0] * eta["g1"] + d[1] * eta["g2"]
        assert abs(lo - expect_lo) < 1e-14
        assert abs(hi - expect_hi) < 1e-14

    def test_pure_step_fiber_independent(self):
        sym = PCSOSymbol.from_step(2.0 * chi_minus + 3.0 * chi_plus)
        for f in (FiberAssignment.of({}), FiberAssignment.of({"x": 9.0})):
            assert sym.fiber_values(f) == (2.0, 3.0)

    def test_fiber_values_mixed_pair(self):
        g = so_sqrt_log(1)
        sym = (PCSOSymbol.from_step(chi_minus)
               + PCSOSymbol(((chi_plus, (g.id,)),), {g.id: g}))
        vals = sym.fiber_values(FiberAssignment.of({g.id: -1.0}))
        assert vals == (1.0, -1.0)

    def test_gamma_eta(self):
        assert PCSOSymbol.constant(5.0).gamma_eta(FiberAssignment.of({})).values \
            == (5.0, 5.0)
        g = so_sqrt_log(1)
        sym = (PCSOSymbol.from_step(chi_minus)
               + PCSOSymbol(((chi_plus, (g.id,)),), {g.id: g}))
        gamma = sym.gamma_eta(FiberAssignment.of({g.id: -1.0}))
        assert gamma.breakpoints == (0.0,)
        assert gamma.values == (1.0, -1.0)
        assert gamma(-1.0) == 1.0 and gamma(1.0) == -1.0

    def test_gamma_matches_fiber_values_at_plus_minus_one(self):
        sym = mixed_jump_symbol()
        eta = FiberAssignment.of({"g1": 1j, "g2": -1.0})
        gamma = sym.gamma_eta(eta)
        lo, hi = sym.fiber_values(eta)
        assert gamma(-1.0) == lo
        assert gamma(1.0) == hi

    def test_missing_assignment(self):
        sym = mixed_jump_symbol()
        with pytest.raises(MissingAssignment):
            sym.fiber_values(FiberAssignment.of({"g1": 1.0}))

    def test_reflect(self):
        assert PCSOSymbol.from_step(chi_plus).reflect()(1.0) == 0
        sym = PCSOSymbol.from_step(2.0 * chi_minus + 3.0 * chi_plus)
        assert sym.reflect()(1.0) == 2.0

    def test_reflect_involution(self, rng):
        sym = mixed_jump_symbol()
        twice = sym.reflect().reflect()
        ts = rng.uniform(-30, 30, 100)
        assert np.abs(np.asarray(sym(ts)) - np.asarray(twice(ts))).max() < 1e-14

    def test_algebra_product(self):
        g = so_sqrt_log(1)
        sym = PCSOSymbol.from_generator(g) * PCSOSymbol.from_step(chi_plus)
        assert sym(2.0) == g(2.0)
        assert sym(-2.0) == 0


class TestClustersAndFibers:
    def test_point_cluster_single_assignment(self):
        gen = so_constant("c", 3.0 + 1j)
        fibers = sample_fibers([PCSOSymbol.from_generator(gen)], "product", 8)
        assert len(fibers) == 1
        assert fibers[0]["c"] == 3.0 + 1j

    def test_circle_cluster_grid(self):
        gen = so_sqrt_log(1)
        fibers = sample_fibers([PCSOSymbol.from_generator(gen)], "product", 8)
        assert len(fibers) == 8
        vals = [f[gen.id] for f in fibers]
        assert all(abs(abs(v) - 1.0) < 1e-12 for v in vals)
        assert min(abs(v + 1.0) for v in vals) < 1e-12  # -1 on the grid
        assert all(f.attainable for f in fibers)

    def test_product_of_two_generators_not_attainable(self):
        sym = mixed_jump_symbol()
        fibers = sample_fibers([sym], "product", 4)
        assert len(fibers) == 16
        assert not any(f.attainable for f in fibers)

    def test_trajectory_moduli_approach_circle(self):
        sym = mixed_jump_symbol(ks=(1, 2))
        fibers = sample_fibers([sym], "trajectory", 64, tau0=2.0, rho=1.5)
        assert len(fibers) == 64
        # projected onto the declared unit circle
        for f in fibers:
            assert abs(abs(f["g1"]) - 1.0) < 1e-12
            assert abs(abs(f["g2"]) - 1.0) < 1e-12
        assert all(f.attainable for f in fibers)

    def test_validation(self):
        gen = so_sqrt_log(1)
        good = FiberAssignment.of({gen.id: 1j})
        good.validate({gen.id: gen})
        bad = FiberAssignment.of({gen.id: 0.2})
        with pytest.raises(ValueOutsideCluster):
            bad.validate({gen.id: gen})

    def test_sampled_cluster(self):
        gen = so_phase("w", lambda t: math.sqrt(math.log(t * t + 2)),
                       SampledCluster(2.0, 1.5, 16), even=True)
        vals = gen.cluster_values(16)
        assert len(vals) == 16
        assert all(abs(abs(v) - 1.0) < 1e-12 for v in vals)

    def test_cluster_descriptor_validation(self):
        with pytest.raises(ValueError):
            CircleCluster(0.0, math.inf)
        with pytest.raises(ValueError):
            SampledCluster(rho=0.5)

    def test_no_generators_single_trivial_fiber(self):
        fibers = sample_fibers([PCSOSymbol.constant(2.0)], "product", 8)
        assert len(fibers) == 1
        assert fibers[0].as_dict() == {}

    def test_bad_strategy(self):
        with pytest.raises(ValueError):
            sample_fibers([], "alien", 4)

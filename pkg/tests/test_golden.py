from __future__ import annotations

import math
from fractions import Fraction

import pytest

from okcf.cf import CFExpansion, eval_periodic
from okcf.field import FieldSpec, SurdElement, reals_equal, sign_of
from okcf.golden import (
    CANDIDATE_ORDER,
    ExpansionConfig,
    ExpansionResult,
    GoldenPreconditionError,
    LOWER_BOUND_SQ,
    MaxStepsError,
    PairContext,
    PairState,
    RADIUS_SQ,
    RealPair,
    choose_quotient,
    covering_radius,
    expand_pair,
    lattice_coords,
    verify_roundtrip,
)
from okcf.quartic import QuadraticPolyK, make_state, run_trajectory, step_state


BETA_F = (1 + math.sqrt(5)) / 2


@pytest.fixture
def example_seed(k5):
    beta = k5.omega
    return QuadraticPolyK(k5.one, k5.element(-2), -(beta * beta))


@pytest.fixture
def unlinked_seed(k5):
    # delta = beta + 5, sigma(delta) = 6 - beta; product 29 is not a square
    # in K, so the two surd families stay independent.
    return QuadraticPolyK(k5.one, k5.omega, -k5.one)


class TestCoveringRadius:
    def test_table(self):
        expected = {2: Fraction(3, 2), 3: Fraction(2), 5: Fraction(9, 10), 13: Fraction(49, 26)}
        for d, r_sq in expected.items():
            cr = covering_radius(d)
            assert cr.r_squared == r_sq
            assert cr.usable == (d == 5)
            # interval really encloses sqrt(r_sq)
            assert cr.interval.lo * cr.interval.lo <= r_sq <= cr.interval.hi * cr.interval.hi

    def test_d5_matches_circumradius(self):
        # (1/(2*sqrt(2)))*(sqrt(5) + 1/sqrt(5)) squared is 9/10
        assert covering_radius(5).r_squared == Fraction(9, 10)
        value = (math.sqrt(5) + 1 / math.sqrt(5)) / (2 * math.sqrt(2))
        assert abs(value**2 - 0.9) < 1e-12

    def test_non_squarefree_rejected(self):
        with pytest.raises(ValueError):
            covering_radius(4)
        with pytest.raises(ValueError):
            covering_radius(12)


class TestRealPair:
    def test_linked_fold_and_zero(self, k5):
        # both tracks over delta = 8: product 64 is a square, so the pair
        # collapses into one family and (xi - xi) is exactly zero.
        seed = QuadraticPolyK(k5.one, k5.zero, k5.element(-2))
        ctx = PairContext.create(seed)
        assert ctx.link is not None
        xi = make_state(seed, +1).value
        xip = make_state(seed.sigma(), +1).value
        pair = ctx.pair(xi, -xip)
        assert pair.v is None
        assert pair.is_zero
        assert pair.sign() == 0

    def test_unlinked_structure(self, k5, unlinked_seed):
        ctx = PairContext.create(unlinked_seed)
        assert ctx.link is None
        xi = make_state(unlinked_seed, +1).value
        xip = make_state(unlinked_seed.sigma(), +1).value
        pair = ctx.pair(xi, -xip)
        assert pair.v is not None
        assert not pair.is_zero
        assert pair.sign() == (1 if float(xi) > float(xip) else -1)

    def test_floor_exact_rational(self, k5):
        u = SurdElement(k5, k5.element(2), k5.element(Fraction(7, 2)), k5.zero)
        pair = RealPair(u, None)
        assert pair.floor() == 3 and pair.ceil() == 4
        whole = RealPair(SurdElement(k5, k5.element(2), k5.element(-3), k5.zero), None)
        assert whole.floor() == whole.ceil() == -3

    def test_floor_irrational(self, k5):
        root2 = RealPair(SurdElement(k5, k5.element(2), k5.zero, k5.one), None)
        assert root2.floor() == 1 and root2.ceil() == 2
        neg = RealPair(SurdElement(k5, k5.element(2), k5.zero, -k5.one), None)
        assert neg.floor() == -2 and neg.ceil() == -1


class TestLatticeCoords:
    def test_example_start(self, k5, example_seed):
        ctx = PairContext.create(example_seed)
        ps = PairState(make_state(example_seed, +1), make_state(example_seed.sigma(), +1), 0)
        coords = lattice_coords(ps, ctx)
        # numeric oracle: solve the 2x2 system directly
        xi = 1 + math.sqrt(BETA_F**2 + 1)
        xip = 1 + math.sqrt(1 / BETA_F**2 + 1)
        y = (xi - xip) / (BETA_F + 1 / BETA_F)
        x = xi - y * BETA_F
        assert abs(float(coords.x_interval) - x) < 1e-9
        assert abs(float(coords.y_interval) - y) < 1e-9
        assert abs(x - 2.3763819) < 1e-6 and abs(y - 0.3249196) < 1e-6

    def test_recomposition(self, k5, example_seed):
        ctx = PairContext.create(example_seed)
        ps = PairState(make_state(example_seed, +1), make_state(example_seed.sigma(), +1), 0)
        coords = lattice_coords(ps, ctx)
        recomposed = coords.x + coords.y.scale(ctx.beta)
        xi_pair = ctx.pair(ps.xi.value, ps.xi.value - ps.xi.value)
        diff = recomposed + (-xi_pair)
        assert diff.is_zero

    def test_symmetric_input_gives_zero_y(self, k5):
        seed = QuadraticPolyK(k5.one, k5.zero, k5.element(-2))
        ctx = PairContext.create(seed)
        ps = PairState(make_state(seed, +1), make_state(seed.sigma(), +1), 0)
        coords = lattice_coords(ps, ctx)
        assert coords.y.is_zero
        assert coords.y.floor() == 0

    def test_requires_d5(self):
        k2 = FieldSpec(2)
        seed = QuadraticPolyK(k2.one, k2.zero, k2.element(-3))
        ctx = PairContext.create(seed)
        with pytest.raises(GoldenPreconditionError):
            lattice_coords(
                PairState(make_state(seed, 1), make_state(seed.sigma(), 1), 0), ctx
            )


class TestChooseQuotient:
    def test_example_first_quotient(self, k5, example_seed):
        ctx = PairContext.create(example_seed)
        ps = PairState(make_state(example_seed, +1), make_state(example_seed.sigma(), +1), 0)
        a, dist = choose_quotient(ps, ctx)
        assert a == 2
        assert float(dist) < 0.9

    def test_example_second_quotient(self, k5, example_seed):
        ctx = PairContext.create(example_seed)
        s = make_state(example_seed, +1)
        sp = make_state(example_seed.sigma(), +1)
        a0, _ = choose_quotient(PairState(s, sp, 0), ctx)
        s, sp = step_state(s, a0), step_state(sp, a0.conj())
        a1, _ = choose_quotient(PairState(s, sp, 1), ctx)
        assert a1 == k5.element(4, -2)

    def test_alternative_branch_takes_beta_squared(self, k5, example_seed):
        ctx = PairContext.create(example_seed)
        ps = PairState(make_state(example_seed, +1), make_state(example_seed.sigma(), -1), 0)
        a, _ = choose_quotient(ps, ctx)
        assert a == k5.element(1, 1)  # beta^2 = 1 + beta


class TestExpandPair:
    def test_example_both_branches(self, k5, example_seed):
        r = expand_pair(example_seed, +1, +1)
        assert r.expansion.preperiod == ()
        assert r.expansion.period == (k5.element(2), k5.element(4, -2))
        assert r.cycle_start == 0 and r.verified

        r2 = expand_pair(example_seed, +1, -1)
        assert r2.expansion.preperiod == (k5.element(1, 1),)
        assert r2.expansion.period == (k5.element(0, 2),)
        assert r2.cycle_start == 1 and r2.verified

    def test_determinism(self, k5, example_seed):
        a = expand_pair(example_seed, +1, -1)
        b = expand_pair(example_seed, +1, -1)
        assert a.expansion == b.expansion and a.keys == b.keys

    def test_key_repeats_after_period(self, k5, example_seed):
        r = expand_pair(example_seed, +1, +1)
        quots = list(r.expansion.preperiod) + list(r.expansion.period)
        s = make_state(example_seed, +1)
        sp = make_state(example_seed.sigma(), +1)
        for a in quots:
            s, sp = step_state(s, a), step_state(sp, a.conj())
        end_key = (*s.canonical_key, *sp.canonical_key)
        assert end_key == r.keys[r.cycle_start]

    def test_step_invariants_replay(self, k5, example_seed):
        ctx = PairContext.create(example_seed)
        for conj in (+1, -1):
            r = expand_pair(example_seed, +1, conj)
            quots = list(r.expansion.preperiod) + list(r.expansion.period)
            s = make_state(example_seed, +1)
            sp = make_state(example_seed.sigma(), conj)
            for n, a in enumerate(quots):
                d1 = (s.value - a) * (s.value - a)
                d2 = (sp.value - a.conj()) * (sp.value - a.conj())
                assert ctx.pair(d1, d2).shift(-RADIUS_SQ).sign() < 0
                if n >= 1:
                    assert sign_of(s.value * s.value - LOWER_BOUND_SQ) > 0
                    assert sign_of(sp.value * sp.value - LOWER_BOUND_SQ) > 0
                s, sp = step_state(s, a), step_state(sp, a.conj())

    def test_unlinked_seed_cycles(self, k5, unlinked_seed):
        r = expand_pair(unlinked_seed, +1, +1)
        assert r.verified
        assert len(r.expansion.period) >= 1

    def test_emitted_quotients_integral(self, k5, unlinked_seed):
        r = expand_pair(unlinked_seed, +1, -1)
        for a in (*r.expansion.preperiod, *r.expansion.period):
            assert a.is_integral

    def test_rejects_wrong_field(self):
        k2 = FieldSpec(2)
        seed = QuadraticPolyK(k2.one, k2.zero, k2.element(-1, -1))
        with pytest.raises(GoldenPreconditionError) as err:
            expand_pair(seed, +1, +1)
        assert "covering" in str(err.value)

    def test_rejects_complex_conjugates(self, k5):
        # sigma(delta) < -4: cites the even-period obstruction
        seed = QuadraticPolyK(k5.one, k5.zero, k5.element(2, -3))
        with pytest.raises(GoldenPreconditionError) as err:
            expand_pair(seed, +1, +1)
        assert "even-period" in str(err.value)

    def test_rejects_square_discriminant(self, k5):
        seed = QuadraticPolyK(k5.one, k5.element(-3), k5.element(2))
        with pytest.raises(GoldenPreconditionError):
            expand_pair(seed, +1, +1)

    def test_max_steps_error_carries_state(self, k5, example_seed):
        with pytest.raises(MaxStepsError) as err:
            expand_pair(example_seed, +1, +1, ExpansionConfig(max_steps=1))
        assert len(err.value.quotients) >= 1


class TestRoundTrip:
    def test_forward_value(self, k5, example_seed):
        beta = k5.omega
        r = expand_pair(example_seed, +1, +1)
        res = eval_periodic(r.expansion)
        assert reals_equal(res.value, SurdElement(k5, beta * beta + 1, k5.one, k5.one))

    def test_sigma_mapped_expansion(self, k5, example_seed):
        r = expand_pair(example_seed, +1, +1)
        sigma_exp = r.expansion.sigma()
        assert sigma_exp.period == (k5.element(2), k5.element(2, 2))
        val = eval_periodic(sigma_exp).value
        xip = make_state(example_seed.sigma(), +1).value
        assert reals_equal(val, xip)

    def test_tampered_expansion_fails(self, k5, example_seed):
        r = expand_pair(example_seed, +1, +1)
        tampered = CFExpansion(
            k5, r.expansion.preperiod,
            (r.expansion.period[0] + 1, r.expansion.period[1]),
        )
        bad = ExpansionResult(
            expansion=tampered, keys=r.keys, cycle_start=0, verified=False,
            seed=example_seed, branch=1, conj_branch=1,
        )
        rt = verify_roundtrip(bad, example_seed, +1)
        assert not rt
        assert rt.detail

    def test_candidate_order_constant(self):
        assert CANDIDATE_ORDER == (
            ("floor", "floor"), ("floor", "ceil"), ("ceil", "floor"), ("ceil", "ceil"),
        )


class TestGrowthBounds:
    def test_error_bound_after_first_denominator_growth(self, k5, example_seed, unlinked_seed):
        # Once |Q_n| first exceeds |Q_{n-1}|, every later |Q_n * S_n| stays
        # below 1/(sqrt(10/9) - 1).
        from okcf.cf import qpair_states
        from okcf.quartic import _tight_abs

        gamma_minus_1_inv = 1 / (math.sqrt(10 / 9) - 1)  # ~ 18.487
        for seed in (example_seed, unlinked_seed):
            r = expand_pair(seed, +1, +1)
            quots = (list(r.expansion.preperiod) + list(r.expansion.period * 8))[:24]
            xi = make_state(seed, +1).value
            n0 = None
            prev_q = None
            for n, qp in enumerate(qpair_states(k5, quots)):
                qn = qp.q_cur
                if n0 is None and prev_q is not None:
                    if sign_of(qn * qn - prev_q * prev_q) > 0:
                        n0 = n
                if n0 is not None:
                    s_abs = _tight_abs(xi * qn - qp.p_cur, 64)
                    q_abs = abs(qn.embed(64))
                    assert float((q_abs * s_abs).hi) < gamma_minus_1_inv
                prev_q = qn
            assert n0 is not None

    def test_abs_a_finite_over_cycle(self, k5, example_seed, unlinked_seed):
        # A detected cycle visits finitely many exact triples, so the sets
        # {|A_n|} and {|sigma(A_n)|} are finite.
        for seed in (example_seed, unlinked_seed):
            r = expand_pair(seed, +1, -1)
            quots = list(r.expansion.preperiod) + list(r.expansion.period * 3)
            states = run_trajectory(seed, +1, quots)
            a_values = {s.poly.A for s in states}
            canonical = {s.canonical_key for s in states}
            assert len(canonical) <= len(r.expansion.preperiod) + len(r.expansion.period) + 1
            assert len(a_values) <= 2 * (len(r.expansion.preperiod) + len(r.expansion.period) + 1)

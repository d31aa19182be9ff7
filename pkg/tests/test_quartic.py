from __future__ import annotations

import math
import random
from fractions import Fraction

import pytest

from okcf.cf import qpair_states
from okcf.field import FieldSpec, SurdElement, reals_equal, sign_of
from okcf.quartic import (
    QuadraticPolyK,
    SeedError,
    SquareDiscriminantError,
    diagnostics,
    make_state,
    naive_height,
    periodicity_preconditions,
    run_trajectory,
    step_state,
    triple_recursion,
    weil_height,
    weil_height4,
    weil_height_element,
)
from conftest import random_k


@pytest.fixture
def example_seed(k5):
    """x^2 - 2x - beta^2, the root being 1 + sqrt(beta^2 + 1)."""
    beta = k5.omega
    return QuadraticPolyK(k5.one, k5.element(-2), -(beta * beta))


def random_seed(rng: random.Random, spec: FieldSpec, bound: int = 3) -> QuadraticPolyK:
    from okcf.field import is_square_in_k

    while True:
        a = random_k(rng, spec, bound, nonzero=True)
        b = random_k(rng, spec, bound)
        c = random_k(rng, spec, bound)
        seed = QuadraticPolyK(a, b, c)
        if sign_of(seed.delta) <= 0:
            continue
        if is_square_in_k(seed.delta) is not None:
            continue
        return seed


def random_quotients(rng: random.Random, spec: FieldSpec, n: int, bound: int = 3):
    out = [random_k(rng, spec, bound)]
    out.extend(random_k(rng, spec, bound, nonzero=True) for _ in range(n - 1))
    return out


class TestStates:
    def test_example_value(self, k5, example_seed):
        beta = k5.omega
        st = make_state(example_seed, +1)
        assert reals_equal(st.value, SurdElement(k5, beta * beta + 1, k5.one, k5.one))
        assert abs(float(st.value) - (1 + math.sqrt((1 + math.sqrt(5)) / 2 * (1 + math.sqrt(5)) / 2 + 1))) < 1e-9

    def test_branch_minus(self, k5, example_seed):
        beta = k5.omega
        st = make_state(example_seed, -1)
        assert reals_equal(
            st.value, SurdElement(k5, beta * beta + 1, k5.one, -k5.one)
        )

    def test_x2_minus_2_accepted(self, k5):
        # delta = 8; 8 is not a square in Q(sqrt(5)), so the state is valid.
        seed = QuadraticPolyK(k5.one, k5.zero, k5.element(-2))
        st = make_state(seed, +1)
        assert st.value * st.value == 2

    def test_square_discriminant_rejected(self, k5):
        # x^2 - 3x + 2 has delta = 1
        with pytest.raises(SquareDiscriminantError):
            make_state(QuadraticPolyK(k5.one, k5.element(-3), k5.element(2)), +1)

    def test_negative_discriminant_rejected(self, k5):
        with pytest.raises(SeedError):
            make_state(QuadraticPolyK(k5.one, k5.zero, k5.one), +1)

    def test_non_integral_rejected(self, k5):
        with pytest.raises(SeedError):
            QuadraticPolyK(k5.element(Fraction(1, 2)), k5.zero, k5.one)


class TestStepState:
    def test_example_step(self, k5, example_seed):
        beta = k5.omega
        st = make_state(example_seed, +1)
        st1 = step_state(st, k5.element(2))
        # oracle: exact surd reciprocal of (value - 2)
        oracle = (st.value - 2).recip()
        assert st1.value == oracle
        # (1 + sqrt(beta^2+1))/beta^2 expanded over the seed family
        b2inv = k5.one / (beta * beta)
        assert st1.value.x == b2inv and st1.value.y == b2inv / 2

    def test_step_and_inverse(self, k5, rng):
        for _ in range(50):
            seed = random_seed(rng, k5)
            st = make_state(seed, rng.choice((1, -1)))
            a = random_k(rng, k5, 4)
            nxt = step_state(st, a)
            assert a + nxt.value.recip() == st.value

    def test_discriminant_conservation(self, k5, rng):
        for _ in range(30):
            seed = random_seed(rng, k5)
            st = make_state(seed, 1)
            for a in random_quotients(rng, k5, 15):
                st = step_state(st, a)
                assert st.poly.delta == seed.delta

    def test_non_integral_quotient_rejected(self, k5, example_seed):
        st = make_state(example_seed, +1)
        with pytest.raises(ValueError):
            step_state(st, k5.element(Fraction(1, 2)))


class TestTripleRecursion:
    def test_base_case(self, k5, example_seed):
        a0 = k5.element(3, -1)
        qp = qpair_states(k5, [a0])[0]
        t = triple_recursion(example_seed, qp)
        s = example_seed
        assert t.A == s.A * a0 * a0 + s.B * a0 + s.C
        assert t.B == 2 * s.A * a0 + s.B
        assert t.C == s.A

    def test_conservation_randomized(self, k5, rng):
        for _ in range(40):
            seed = random_seed(rng, k5)
            qs = random_quotients(rng, k5, rng.randint(1, 10))
            for qp in qpair_states(k5, qs):
                t = triple_recursion(seed, qp)
                assert t.delta == seed.delta

    def test_example_returns_to_seed(self, k5, example_seed):
        # prefix [2, 4-2*beta]: the state after one full period is the seed
        quots = [k5.element(2), k5.element(4, -2)]
        states = run_trajectory(example_seed, +1, quots)
        assert states[2].key == states[0].key
        t = triple_recursion(example_seed, qpair_states(k5, quots)[-1])
        assert (t.A, t.B, t.C) == (example_seed.A, example_seed.B, example_seed.C)

    def test_matches_iterated_step_randomized(self, k5, rng):
        for _ in range(25):
            seed = random_seed(rng, k5)
            n = rng.randint(2, 30)
            qs = random_quotients(rng, k5, n)
            states = run_trajectory(seed, +1, qs)
            for i, qp in enumerate(qpair_states(k5, qs)):
                t = triple_recursion(seed, qp)
                ref = states[i + 1].poly
                assert (t.A, t.B, t.C) == (ref.A, ref.B, ref.C)

    def test_consecutive_link(self, k5, rng):
        for _ in range(20):
            seed = random_seed(rng, k5)
            qs = random_quotients(rng, k5, 10)
            states = run_trajectory(seed, +1, qs)
            for prev, cur in zip(states, states[1:]):
                assert cur.poly.C == prev.poly.A


class TestStateEquality:
    def test_key_equality_matches_value_equality(self, k5, rng):
        for _ in range(60):
            seed = random_seed(rng, k5)
            s1 = make_state(seed, rng.choice((1, -1)))
            s2 = make_state(seed, rng.choice((1, -1)))
            same_key = s1.key == s2.key
            same_value = reals_equal(s1.value, s2.value)
            assert same_key == same_value

    def test_negated_triple_same_value(self, k5, example_seed):
        neg = QuadraticPolyK(-example_seed.A, -example_seed.B, -example_seed.C)
        s1 = make_state(example_seed, +1)
        s2 = make_state(neg, -1)
        assert s1.key != s2.key
        assert s1.canonical_key == s2.canonical_key
        assert reals_equal(s1.value, s2.value)


class TestHeights:
    def test_height_of_one(self, k5):
        iv = weil_height_element(k5.one)
        assert iv.lo == iv.hi == 1

    def test_submultiplicative_randomized(self, k5, rng):
        for _ in range(150):
            x = random_k(rng, k5, 5, nonzero=True)
            y = random_k(rng, k5, 5, nonzero=True)
            hxy = weil_height_element(x * y, 96)
            hx = weil_height_element(x, 96)
            hy = weil_height_element(y, 96)
            bound = hx * hy
            assert hxy.lo <= bound.hi

    def test_orbit_heights_repeat(self, k5, example_seed):
        quots = [k5.element(2), k5.element(4, -2)] * 3
        states = run_trajectory(example_seed, +1, quots)
        keys = {s.key for s in states}
        assert len(keys) == 2  # finitely many exact states, period 2
        h0 = weil_height(states[0], 96)
        h2 = weil_height(states[2], 96)
        assert (h0.lo, h0.hi) == (h2.lo, h2.hi)
        h1 = weil_height(states[1], 96)
        h3 = weil_height(states[3], 96)
        assert (h1.lo, h1.hi) == (h3.lo, h3.hi)

    def test_height_at_least_one(self, k5, rng):
        for _ in range(60):
            seed = random_seed(rng, k5)
            st = make_state(seed, 1)
            assert weil_height4(st).lo >= 1

    def test_naive_example(self, k5):
        # (x^2 - 2)*sigma(x^2 - 2) = x^4 - 4x^2 + 4
        seed = QuadraticPolyK(k5.one, k5.zero, k5.element(-2))
        assert naive_height(make_state(seed, 1)) == 4

    def test_naive_branch_invariance(self, k5, rng):
        for _ in range(40):
            seed = random_seed(rng, k5)
            assert naive_height(make_state(seed, 1)) == naive_height(make_state(seed, -1))

    def test_naive_bounded_on_orbit(self, k5, example_seed):
        quots = [k5.element(2), k5.element(4, -2)] * 10
        states = run_trajectory(example_seed, +1, quots)
        values = {naive_height(s) for s in states}
        assert len(values) <= 2

    def test_naive_weil_equivalence_randomized(self, k5, rng):
        # Degree-4 equivalence through the Mahler measure H^4:
        # H^4 <= sqrt(5) * naive and naive <= 16 * H^4, plus the one-sided
        # H <= sqrt(5) * naive.
        for _ in range(100):
            seed = random_seed(rng, k5, bound=8)
            st = make_state(seed, rng.choice((1, -1)))
            h4 = weil_height4(st, 96)
            h = weil_height(st, 96)
            nv = naive_height(st)
            assert h4.hi * h4.hi <= 5 * nv * nv
            assert h.hi * h.hi <= 5 * nv * nv
            assert nv <= 16 * h4.lo


class TestDiagnostics:
    def test_height_identity_rows(self, k5, example_seed):
        quots = [k5.element(2), k5.element(4, -2)] * 5
        rows = diagnostics(example_seed, +1, quots, 64)
        states = run_trajectory(example_seed, +1, quots)
        lead = abs(example_seed.A.norm())
        for n, row in enumerate(rows):
            prod = row.f1 * row.f2 * lead
            h4 = weil_height4(states[n + 1], 64)
            assert prod.overlaps(h4)

    def test_f1_f2_bounded_over_100_periods(self, k5, example_seed):
        quots = [k5.element(2), k5.element(4, -2)] * 100
        rows = diagnostics(example_seed, +1, quots, 64)
        # Frozen from the first oracle run: on this orbit F1 and F2 are
        # constant at |xi| and |xi'| respectively.
        assert all(2.901 < float(r.f1.lo) and float(r.f1.hi) < 2.903 for r in rows)
        assert all(2.175 < float(r.f2.lo) and float(r.f2.hi) < 2.176 for r in rows)

    def test_s_n_alternates_for_classical(self, k5):
        # all-positive rational quotients: xi*Q_n - P_n alternates sign
        seed = QuadraticPolyK(k5.one, k5.zero, k5.element(-2))
        xi = make_state(seed, 1).value
        quots = [k5.one] + [k5.element(2)] * 9
        for n, qp in enumerate(qpair_states(k5, quots)):
            s = xi * qp.q_cur - qp.p_cur
            assert sign_of(s) == (1 if n % 2 == 0 else -1)

    def test_row_count_and_columns(self, k5, example_seed):
        quots = [k5.element(2), k5.element(4, -2)] * 2
        rows = diagnostics(example_seed, +1, quots)
        assert len(rows) == len(quots)
        assert [r.index for r in rows] == list(range(len(quots)))


class TestPreconditions:
    def test_strongly_negative_rejected(self, k5):
        # delta = -8 + 12*beta > 0, sigma(delta) = 4 - 12*beta < -4
        seed = QuadraticPolyK(k5.one, k5.zero, k5.element(2, -3))
        rep = periodicity_preconditions(seed)
        assert rep.rejected and rep.sigma_delta_sign < 0
        assert rep.even_period_required
        assert not rep.ok

    def test_indeterminate_band(self, k5):
        # delta = 4*beta, sigma(delta) = 4 - 4*beta ~ -2.47
        seed = QuadraticPolyK(k5.one, k5.zero, -k5.omega)
        rep = periodicity_preconditions(seed)
        assert not rep.rejected
        assert rep.even_period_required and rep.indeterminate_range

    def test_example_seed_clean(self, k5, example_seed):
        # sigma(delta) = 12 - 4*beta = 4 + 4*(1-beta)^2 > 0
        rep = periodicity_preconditions(example_seed)
        assert rep.sigma_delta == k5.element(12, -4)
        assert rep.sigma_delta_sign == 1
        assert not rep.rejected and not rep.even_period_required

    def test_interval_window(self, k5, example_seed):
        # conjugate roots are 1 +- sqrt(3 - beta) ~ {2.1756, -0.1756}
        rep_fail = periodicity_preconditions(
            example_seed, a0=k5.element(10), a1=k5.one
        )
        assert rep_fail.interval_test is False
        rep_ok = periodicity_preconditions(
            example_seed, a0=k5.element(2), a1=k5.element(5)
        )
        assert rep_ok.interval_test is True

    def test_window_skipped_for_nonpositive_sigma_a1(self, k5, example_seed):
        rep = periodicity_preconditions(
            example_seed, a0=k5.element(2), a1=k5.omega * 2
        )
        # sigma(2*beta) = 2 - 2*beta < 0: test not applicable
        assert rep.interval_test is None

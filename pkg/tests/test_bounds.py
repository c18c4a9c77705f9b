import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from implicitfp import bounds
from implicitfp.bounds import (BoundSequences, berinde_compare, check_lemma1,
                               datadep_bound, envelope_ishikawa, envelope_mann,
                               envelope_s, exp_envelope)
from implicitfp.errors import CertificateError, DegenerateComparisonError
from implicitfp.schemes import constant_schedule, default_schedule


SCHED = default_schedule()


class TestEnvelopeS:
    def test_hand_value_n2(self):
        # D2 = (1/2 * 1/2) / (1 - (1/2)(1/2)(3/4)) = 0.25/0.8125 = 4/13
        assert envelope_s(SCHED, 0.5, 1.0, 2) == pytest.approx(4.0 / 13.0)

    def test_delta_zero(self):
        for n in (2, 5, 10):
            assert envelope_s(SCHED, 0.0, 1.0, n) == 0.0

    def test_alpha_one_geometric(self):
        sched = constant_schedule(1.0)
        # denominator becomes 1, product is delta^(n-1)
        assert envelope_s(sched, 0.5, 2.0, 5) == pytest.approx(0.5 ** 4 * 2.0)

    def test_rejects_delta_ge_one(self):
        with pytest.raises(CertificateError):
            envelope_s(SCHED, 1.0, 1.0, 5)


class TestEnvelopeMann:
    def test_hand_value_n2(self):
        assert envelope_mann(SCHED, 0.5, 1.0, 2) == pytest.approx(2.0 / 3.0)

    def test_alpha_one_stays_at_d0(self):
        sched = constant_schedule(1.0)
        assert envelope_mann(sched, 0.5, 3.0, 10) == pytest.approx(3.0)

    def test_delta_zero_is_alpha_product(self):
        val = envelope_mann(SCHED, 0.0, 1.0, 4)
        assert val == pytest.approx((1 / 2) * (2 / 3) * (3 / 4))


class TestEnvelopeIshikawa:
    def test_hand_value_n2(self):
        assert envelope_ishikawa(SCHED, 0.5, 1.0, 2) == pytest.approx(8.0 / 13.0)

    def test_beta_one_reduces_to_mann(self):
        sched = constant_schedule(0.7, 1.0)
        for n in (2, 5, 9):
            assert envelope_ishikawa(sched, 0.4, 1.0, n) == pytest.approx(
                envelope_mann(sched, 0.4, 1.0, n))

    def test_delta_zero_is_alpha_product(self):
        assert envelope_ishikawa(SCHED, 0.0, 1.0, 3) == pytest.approx((1 / 2) * (2 / 3))


class TestExpEnvelope:
    def test_hand_value_n2(self):
        assert exp_envelope(SCHED, 0.5, 1.0, 2) == pytest.approx(math.exp(-0.25))

    def test_alpha_one_constant(self):
        sched = constant_schedule(1.0)
        assert exp_envelope(sched, 0.5, 1.0, 50) == pytest.approx(1.0)

    def test_harmonic_decay_rate(self):
        # sum 1/k ~ ln n, so the envelope decays like n^-(1-delta)
        delta = 0.5
        v1 = exp_envelope(SCHED, delta, 1.0, 1000)
        v2 = exp_envelope(SCHED, delta, 1.0, 4000)
        assert v2 / v1 == pytest.approx(4.0 ** -(1 - delta), rel=1e-2)

    def test_dominates_product_envelope(self):
        for n in range(2, 100):
            prod = 1.0
            for k in range(2, n + 1):
                prod *= 1 - (1 - SCHED.alpha_at(k)) * 0.5
            assert exp_envelope(SCHED, 0.5, 1.0, n) >= prod - 1e-15


class TestOrdering:
    @pytest.mark.parametrize("delta", [0.1, 0.5, 0.9])
    @pytest.mark.parametrize("sched", [default_schedule(),
                                       constant_schedule(0.5),
                                       constant_schedule(0.9, 0.3)])
    def test_chain(self, delta, sched):
        # a_n <= delta*c_n <= c_n <= b_n for all n
        seqs = BoundSequences.compute(sched, delta, 1.0, 200)
        for a, b, c in zip(seqs.a, seqs.b, seqs.c):
            assert a <= delta * c + 1e-300
            assert delta * c <= c
            assert c <= b + 1e-300

    def test_literal_form_differs_for_varying_schedule(self):
        prod = BoundSequences.compute(SCHED, 0.5, 1.0, 10)
        lit = BoundSequences.compute(SCHED, 0.5, 1.0, 10, literal=True)
        assert prod.b[-1] != pytest.approx(lit.b[-1])


class TestBerinde:
    def test_s_faster_than_mann(self):
        seqs = BoundSequences.compute(SCHED, 0.5, 1.0, 50)
        v = berinde_compare(seqs.a, seqs.b, horizon=50, threshold=1e-6)
        assert v.faster
        # per-step ratio is below delta = 1/2, so the final ratio is <= 2^-48
        assert v.final_ratio <= 2.0 ** -48

    def test_s_faster_than_ishikawa(self):
        seqs = BoundSequences.compute(SCHED, 0.5, 1.0, 50)
        v = berinde_compare(seqs.a, seqs.c, horizon=50, threshold=1e-6)
        assert v.faster
        # the two step factors differ exactly by the factor delta
        assert v.final_ratio == pytest.approx(0.5 ** 49, rel=1e-9)

    def test_equal_sequences_not_established(self):
        seq = [1.0 / n for n in range(1, 100)]
        assert not berinde_compare(seq, seq).faster

    def test_vanishing_reference_rejected(self):
        with pytest.raises(DegenerateComparisonError):
            berinde_compare([1.0, 0.5], [1.0, 0.0])

    def test_nonmonotone_tail_not_established(self):
        a = [1e-9 * (1.0 + 0.1 * (-1) ** i) for i in range(100)]
        b = [1.0] * 100
        assert not berinde_compare(a, b, horizon=100).faster

    @settings(max_examples=50, deadline=None)
    @given(q=st.floats(0.1, 0.9), n=st.integers(10, 200))
    def test_never_faster_than_itself(self, q, n):
        seq = [q ** k for k in range(n)]
        assert not berinde_compare(seq, seq, horizon=n).faster


class TestLemma1:
    def test_harmonic_first_violation_at_two(self):
        # a_n = 1/n, mu = 1/2, eta = 0: equality at n=1, first violation at
        # n=2 (1/3 > 1/4)
        a = [1.0 / n for n in range(1, 60)]
        mu = [0.5] * 58
        eta = [0.0] * 58
        rep = check_lemma1(a, mu, eta, tol=1e-15)
        assert not rep.hypothesis_ok
        assert rep.first_violation_index == 2

    def test_stationary_equality(self):
        c = 3.0
        rep = check_lemma1([c] * 30, [0.5] * 29, [c] * 29)
        assert rep.hypothesis_ok
        assert rep.conclusion_ok
        assert rep.max_hypothesis_violation == pytest.approx(0.0, abs=1e-15)

    def test_contraction_with_forcing(self):
        # a_{n+1} = (1-mu) a_n + mu eta with eta constant: hypothesis exact,
        # conclusion limsup a <= eta
        a, mu, eta = [5.0], 0.25, 1.0
        for _ in range(200):
            a.append((1 - mu) * a[-1] + mu * eta)
        rep = check_lemma1(a, [mu] * 200, [eta] * 200)
        assert rep.hypothesis_ok
        assert rep.conclusion_ok

    def test_rejects_bad_mu(self):
        with pytest.raises(ValueError):
            check_lemma1([1.0, 1.0], [1.5], [0.0])


class TestDataDepBound:
    def test_hand_value(self):
        assert datadep_bound(0.01, 0.5) == pytest.approx(0.08)

    def test_delta_zero(self):
        assert datadep_bound(0.03, 0.0) == pytest.approx(0.06)

    def test_epsilon_zero(self):
        assert datadep_bound(0.0, 0.7) == 0.0

    def test_rejects_delta_one(self):
        with pytest.raises(CertificateError):
            datadep_bound(0.01, 1.0)

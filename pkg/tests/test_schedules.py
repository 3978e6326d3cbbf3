import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from adamwarmup.errors import InvalidArgumentError
from adamwarmup.schedules import (
    ScheduleKind,
    WarmupSchedule,
    effective_warmup_period,
    exponential_warmup,
    linear_warmup,
    radam_rectifier_factors,
    radam_rho,
    radam_warmup_factor,
    untuned_exponential_tau,
    untuned_linear_tau,
)

# beta2 grid used for the exhaustive rho checks
GRID = np.unique(np.concatenate([np.round(0.8 + 0.001 * np.arange(200), 12), [0.9995, 0.9999]]))


def mp_rho(t, beta2):
    mp.mp.dps = 50
    b = mp.mpf(beta2)
    r_inf = 2 / (1 - b) - 1
    return r_inf, r_inf - 2 * t * b**t / (1 - b**t)


def mp_omega(t, beta2):
    r_inf, r = mp_rho(t, beta2)
    return mp.sqrt((r - 4) * (r - 2) * r_inf / ((r_inf - 4) * (r_inf - 2) * r))


class TestLinear:
    @pytest.mark.parametrize("t,expected", [(500, 0.25), (2000, 1.0), (3000, 1.0)])
    def test_values(self, t, expected):
        assert linear_warmup(t, 2000) == expected

    def test_rejects_bad_tau(self):
        with pytest.raises(InvalidArgumentError):
            linear_warmup(1, 0)
        with pytest.raises(InvalidArgumentError):
            linear_warmup(1, -3.0)

    def test_vectorised(self):
        out = linear_warmup(np.array([1, 2, 4, 8]), 4)
        np.testing.assert_array_equal(out, [0.25, 0.5, 1.0, 1.0])


class TestExponential:
    def test_t_equals_tau(self):
        assert exponential_warmup(1000, 1000) == pytest.approx(1 - math.exp(-1), abs=1e-15)
        assert exponential_warmup(1000, 1000) == pytest.approx(0.63212, abs=1e-5)

    def test_first_step(self):
        assert exponential_warmup(1, 1000) == pytest.approx(0.0009995, abs=1e-7)

    def test_monotone_towards_one(self):
        w = exponential_warmup(np.arange(1, 40001), 1000.0)
        assert np.all(np.diff(w) >= 0)
        assert w[-1] > 1 - 1e-15
        assert np.all(w <= 1)

    def test_rejects_bad_tau(self):
        with pytest.raises(InvalidArgumentError):
            exponential_warmup(5, 0.0)


@pytest.mark.parametrize(
    "fn,beta2,expected",
    [
        (untuned_exponential_tau, 0.999, 1000),
        (untuned_exponential_tau, 0.99, 100),
        (untuned_exponential_tau, 0.9, 10),
        (untuned_linear_tau, 0.999, 2000),
        (untuned_linear_tau, 0.99, 200),
        (untuned_linear_tau, 0.8, 10),
    ],
)
def test_untuned_periods(fn, beta2, expected):
    assert fn(beta2) == pytest.approx(expected, rel=1e-12)


@pytest.mark.parametrize("beta2", [0.0, 1.0, -0.1, 1.5])
def test_untuned_rejects_bad_beta2(beta2):
    for fn in (untuned_linear_tau, untuned_exponential_tau):
        with pytest.raises(InvalidArgumentError):
            fn(beta2)


class TestRho:
    def test_rho_inf(self):
        assert radam_rho(17, 0.999).rho_inf == pytest.approx(1999, rel=1e-12)

    def test_rho_5_at_0_8_matches_high_precision(self):
        # exact value; the rounded "9 - 4.87" arithmetic gives ~4.13
        assert radam_rho(5, 0.8).rho_t == pytest.approx(4.126130414088529, rel=1e-12)

    @pytest.mark.parametrize("t,beta2", [(5, 0.999), (4, 0.9999), (5, 0.9999), (1, 0.8), (100, 0.99), (3000, 0.999)])
    def test_against_mpmath(self, t, beta2):
        _, exact = mp_rho(t, beta2)
        # absolute error bounded by cancellation against rho_inf
        assert radam_rho(t, beta2).rho_t == pytest.approx(float(exact), abs=1e-15 * 2 / (1 - beta2) * 8)

    def test_rho_5_at_0_999(self):
        assert radam_rho(5, 0.999).rho_t == pytest.approx(4.99, abs=0.01)

    def test_finite_for_huge_t(self):
        terms = radam_rho(10**7, 0.9999)
        assert math.isfinite(terms.rho_t)
        assert terms.rho_t <= terms.rho_inf

    @pytest.mark.parametrize("beta2", [0.0, 1.0])
    def test_rejects_degenerate_beta2(self, beta2):
        with pytest.raises(InvalidArgumentError):
            radam_rho(3, beta2)

    def test_fact1_exhaustive(self):
        t = np.arange(1, 100001)
        for b in GRID:
            rho_t = radam_rho(t, float(b)).rho_t
            np.testing.assert_array_equal(rho_t <= 4, t <= 4, err_msg=f"beta2={b}")

    def test_rho4_below_4_on_grid(self):
        for b in GRID:
            assert radam_rho(4, float(b)).rho_t < 4

    def test_monotone_in_t(self):
        # strictly increasing while the correction term is representable
        t = np.arange(1, 100001)
        for b in GRID:
            terms = radam_rho(t, float(b))
            d = np.diff(terms.rho_t)
            assert np.all(d >= 0)
            gap = 2 * t * float(b) ** t / (1 - float(b) ** t)
            resolvable = -np.diff(gap) > 4 * np.spacing(terms.rho_inf)
            assert np.all(d[resolvable] > 0)
            assert np.all(terms.rho_t <= terms.rho_inf)
            gap_ok = (terms.rho_inf - terms.rho_t) > 8 * np.spacing(terms.rho_inf)
            assert np.all(terms.rho_t[gap_ok] < terms.rho_inf)


class TestRectifier:
    def test_inactive_through_t4(self):
        for t in (1, 2, 3, 4):
            assert radam_warmup_factor(t, 0.999) is None

    def test_omega5(self):
        assert radam_warmup_factor(5, 0.999) == pytest.approx(float(mp_omega(5, 0.999)), rel=1e-9)
        assert radam_warmup_factor(5, 0.999) == pytest.approx(0.0173, abs=5e-5)

    def test_tends_to_one(self):
        assert radam_warmup_factor(10**6, 0.999) == pytest.approx(1.0, abs=1e-12)

    def test_inactive_iff_t_le_4(self):
        for b in GRID[::7]:
            for t in range(1, 12):
                assert (radam_warmup_factor(t, float(b)) is None) == (t <= 4)

    def test_range_and_monotone(self):
        t = np.arange(5, 50001)
        for b in GRID:
            w = radam_rectifier_factors(t, float(b))
            assert np.all((w > 0) & (w <= 1))
            # strictly below 1 until 1 - omega drops under double resolution
            assert np.all(w[1 - w > 1e-15] < 1)
            assert np.all(w[:10] < 1)
            # non-decreasing up to last-bit rounding near 1
            assert np.all(np.diff(w) >= -4 * np.finfo(float).eps)
            assert np.all(np.diff(w[:100]) > 0)

    def test_scalar_and_vector_paths_agree(self):
        t = np.arange(1, 300)
        vec = radam_rectifier_factors(t, 0.999)
        sched = WarmupSchedule.radam(0.999)
        for ti, wi in zip(t, vec):
            assert sched(int(ti)) == pytest.approx(wi, rel=1e-15, abs=0)


class TestWarmupSchedule:
    def test_constant(self):
        s = WarmupSchedule.constant()
        assert s(1) == 1.0
        np.testing.assert_array_equal(s(np.arange(1, 5)), np.ones(4))

    def test_requires_parameters(self):
        with pytest.raises(InvalidArgumentError):
            WarmupSchedule(ScheduleKind.LINEAR)
        with pytest.raises(InvalidArgumentError):
            WarmupSchedule(ScheduleKind.RADAM_RECTIFIER)

    def test_dict_roundtrip(self):
        for s in (WarmupSchedule.untuned_linear(0.99), WarmupSchedule.radam(0.997), WarmupSchedule.constant()):
            assert WarmupSchedule.from_dict(s.to_dict()) == s

    @settings(max_examples=200, deadline=None)
    @given(
        kind=st.sampled_from(["linear", "expo", "radam"]),
        tau=st.floats(0.5, 1e5),
        beta2=st.floats(0.61, 0.99999),
        t=st.integers(1, 10**6),
    )
    def test_factor_in_unit_interval_and_nondecreasing(self, kind, tau, beta2, t):
        s = {
            "linear": WarmupSchedule.linear(tau),
            "expo": WarmupSchedule.exponential(tau),
            "radam": WarmupSchedule.radam(beta2),
        }[kind]
        a, b = s(t), s(t + 1)
        assert 0.0 <= a <= 1.0
        assert a <= b
        if kind == "linear" and t >= tau:
            assert a == 1.0


def brute_force_period(schedule, n_terms):
    # naive direct summation of 1 - omega_t, independent of the library's tail logic
    t = np.arange(1, n_terms + 1, dtype=np.float64)
    if schedule.kind is ScheduleKind.LINEAR:
        w = np.minimum(1.0, t / schedule.tau)
    elif schedule.kind is ScheduleKind.EXPONENTIAL:
        w = 1.0 - np.exp(-t / schedule.tau)
    else:
        b = schedule.beta2
        r_inf = 2 / (1 - b) - 1
        r = r_inf - 2 * t * b**t / (1 - b**t)
        w = np.where(r > 4, np.sqrt(np.clip((r - 4) * (r - 2) * r_inf / ((r_inf - 4) * (r_inf - 2) * r), 0, None)), 0.0)
    return math.fsum(1.0 - w)


class TestEffectivePeriod:
    def test_linear_closed_form(self):
        assert effective_warmup_period(WarmupSchedule.linear(2000)) == pytest.approx(999.5, rel=1e-15)

    def test_constant_is_zero(self):
        assert effective_warmup_period(WarmupSchedule.constant()) == 0.0

    def test_exponential_closed_form(self):
        got = effective_warmup_period(WarmupSchedule.exponential(1000))
        assert got == pytest.approx(1 / math.expm1(0.001), rel=1e-6)
        assert got == pytest.approx(999.5, abs=1e-3)

    @pytest.mark.parametrize("tau", [1.0, 2.5, 17.0, 200.0, 2000.0, 333.3])
    def test_linear_matches_brute_force(self, tau):
        assert effective_warmup_period(WarmupSchedule.linear(tau)) == pytest.approx(
            brute_force_period(WarmupSchedule.linear(tau), int(tau) + 10), rel=1e-12
        )

    @pytest.mark.parametrize("beta2", [0.9, 0.99, 0.997, 0.999])
    def test_exponential_and_radam_match_brute_force(self, beta2):
        for s in (WarmupSchedule.untuned_exponential(beta2), WarmupSchedule.radam(beta2)):
            n = int(60 / (1 - beta2))
            assert effective_warmup_period(s) == pytest.approx(brute_force_period(s, n), rel=1e-8)

    @pytest.mark.parametrize("beta2", [0.99, 0.997, 0.999])
    def test_untuned_rules_agree(self, beta2):
        lin = effective_warmup_period(WarmupSchedule.untuned_linear(beta2))
        expo = effective_warmup_period(WarmupSchedule.untuned_exponential(beta2))
        assert abs(lin - expo) / expo < 0.01

    def test_radam_comparable_to_rules_of_thumb(self):
        radam = effective_warmup_period(WarmupSchedule.radam(0.999))
        assert abs(radam - 999.5) / 999.5 < 0.4

    def test_radam_diverges_for_small_beta2(self):
        with pytest.raises(InvalidArgumentError):
            effective_warmup_period(WarmupSchedule.radam(0.5))

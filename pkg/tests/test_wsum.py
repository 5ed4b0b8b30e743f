import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from _oracles import brute_lagrangian_state, brute_reward_state, exp_cost
from tdma_energy.amc import QamSpec, build_mode_table
from tdma_energy.channel import ChannelModel, FadingState, sample_states
from tdma_energy.costreward import LN2, UserProfile
from tdma_energy.wsum import (
    Allocation,
    InfeasibleError,
    allocate_sample,
    allocate_state,
    kkt_violations,
    max_weighted_rate,
    solve,
    state_power,
)

QAM = build_mode_table(QamSpec())

# tangent of w=(1, 2), mu=(1, 1), h=(1, 0.25); 40-digit bisection, frozen
S0 = 4.9526007347438920817
RA = 2.8369526924387535578
RB = 3.6739053848775071156


@pytest.fixture(scope="module")
def rayleigh_2():
    return sample_states(ChannelModel.rayleigh([1.0, 1.0]), 20_000, seed=4)


class TestAllocation:
    def test_rejects_overfull_block(self):
        with pytest.raises(ValueError):
            Allocation((0.6, 0.6), (1.0, 1.0))

    def test_rejects_negative(self):
        with pytest.raises(ValueError):
            Allocation((0.5,), (-1.0,))

    def test_zero_time_zero_rate(self):
        a = Allocation((0.0, 1.0), (3.0, 2.0))
        assert a.rate == (0.0, 2.0)
        assert a.active_users == [1]
        assert a.weighted_rate((1.0, 2.0)) == 4.0

    def test_idle(self):
        assert Allocation.idle(3).tau == (0.0, 0.0, 0.0)


class TestStatePower:
    def test_single_user(self):
        assert state_power([UserProfile()], FadingState((1.0,)), Allocation((1.0,), (1.0,))) == (1.0,)

    def test_partial_block(self):
        p = state_power([UserProfile(), UserProfile()], FadingState((1.0, 2.0)), Allocation((0.5, 0.5), (2.0, 1.0)))
        assert p == pytest.approx((1.5, 0.25), rel=1e-15)

    def test_amc_above_top_mode(self):
        prof = [UserProfile(codebook=QAM)]
        with pytest.raises(ValueError):
            state_power(prof, FadingState((1.0,)), Allocation((1.0,), (7.0,)))


class TestAllocateState:
    def test_level_zero_idles(self):
        assert allocate_state([UserProfile()], FadingState((1.0,)), 0.0) == Allocation.idle(1)

    def test_single_user_water_filling(self):
        a = allocate_state([UserProfile()], FadingState((1.0,)), 2 * LN2)
        assert a.tau == (1.0,) and a.rate[0] == pytest.approx(1.0, rel=1e-15)

    def test_tangent_tie_uses_tau0(self):
        profiles = [UserProfile(w=1.0), UserProfile(w=2.0)]
        a = allocate_state(profiles, FadingState((1.0, 0.25)), S0, tau0=0.3)
        assert a.tau == pytest.approx((0.3, 0.7))
        assert a.rate[0] == pytest.approx(RA, rel=1e-12)
        assert a.rate[1] == pytest.approx(RB / 2.0, rel=1e-12)

    def test_amc_corner_tie_uses_tau0(self):
        # the first corner has slope gamma_1 at h = 1
        prof = [UserProfile(codebook=QAM)]
        a = allocate_state(prof, FadingState((1.0,)), QAM.gamma[0], tau0=0.25)
        assert a.tau == (0.25,) and a.rate == (QAM.rho[0],)

    def test_vectorized_agrees(self, rayleigh_2):
        profiles = [UserProfile(w=1.0, mu=1.0), UserProfile(w=1.5, mu=0.7)]
        sel = allocate_sample(profiles, rayleigh_2, 2.0)
        for i in range(0, rayleigh_2.count, 997):
            a = allocate_state(profiles, rayleigh_2.state(i), 2.0)
            assert sel.tau[i] == pytest.approx(a.tau)
            assert sel.rate[i] == pytest.approx(a.rate, rel=1e-12)

    def test_vectorized_agrees_amc(self, rayleigh_2):
        profiles = [UserProfile(w=1.0, mu=1.0, codebook=QAM), UserProfile(w=1.5, mu=0.7, codebook=QAM)]
        for lam in (1.0, 20.0, 200.0):
            sel = allocate_sample(profiles, rayleigh_2, lam)
            for i in range(0, rayleigh_2.count, 1499):
                a = allocate_state(profiles, rayleigh_2.state(i), lam)
                assert sel.tau[i] == pytest.approx(a.tau)
                assert sel.rate[i] == pytest.approx(a.rate, rel=1e-12)


class TestBruteForce:
    @settings(max_examples=25, deadline=None)
    @given(
        w2=st.floats(0.5, 2.0), mu2=st.floats(0.3, 3.0), h1=st.floats(0.2, 5.0), h2=st.floats(0.2, 5.0),
        lam=st.floats(0.5, 20.0),
    )
    def test_lagrangian_minimum(self, w2, mu2, h1, h2, lam):
        profiles = [UserProfile(w=1.0, mu=1.0), UserProfile(w=w2, mu=mu2)]
        a = allocate_state(profiles, FadingState((h1, h2)), lam)
        cost = [lambda r, h=h1: exp_cost(1.0, 1.0, h, r), lambda r, h=h2: exp_cost(mu2, 1.0, h, r)]
        levels = [lam * 1.0, lam * w2]
        ours = sum(t * (float(c(r)) - l * r) for t, r, c, l in zip(a.tau, a.rate, cost, levels))
        brute, _ = brute_lagrangian_state(cost, levels, [12.0, 12.0])
        assert ours <= brute + 1e-9 * (1 + abs(brute))
        assert ours == pytest.approx(brute, rel=1e-6, abs=1e-9)

    @pytest.mark.parametrize("h", [(1.0, 0.25), (2.0, 0.3), (0.5, 0.5)])
    def test_reward_minimum(self, h):
        profiles = [UserProfile(w=1.0), UserProfile(w=2.0)]
        cost = [lambda r, g=h[0]: exp_cost(1.0, 1.0, g, r), lambda r, g=h[1]: exp_cost(1.0, 1.0, g, r)]
        for lam in (1.0, 3.0, 8.0):
            a = allocate_state(profiles, FadingState(h), lam)
            reward = a.weighted_rate((1.0, 2.0))
            ours = sum(state_power(profiles, FadingState(h), a))
            brute = brute_reward_state(cost, (1.0, 2.0), reward)
            assert ours <= brute * (1 + 1e-9)
            assert ours == pytest.approx(brute, rel=2e-3)


class TestSolve:
    def test_single_user_constant_channel(self):
        sample = sample_states(ChannelModel.constant([1.0]), 3, seed=0)
        sol = solve([UserProfile()], sample, 1.0)
        assert sol.lambda_star == pytest.approx(2 * LN2, rel=1e-4)
        assert sol.avg_power[0] == pytest.approx(1.0, rel=1e-4)

    def test_golden_point(self):
        # quadrature of the best-user water filling, 40 digits, frozen
        sample = sample_states(ChannelModel.rayleigh([1.0, 1.0]), 100_000, seed=1)
        sol = solve([UserProfile(), UserProfile()], sample, 2.0)
        assert sol.avg_rate == pytest.approx(2.0, rel=1e-4)
        assert sol.lambda_star == pytest.approx(2.3841248096274038304, rel=0.01)
        assert sum(sol.avg_power) == pytest.approx(2.3061071469082558612, rel=0.02)

    def test_symmetric_users_share_equally(self, rayleigh_2):
        sol = solve([UserProfile(), UserProfile()], rayleigh_2, 2.0)
        assert sol.user_rates[0] == pytest.approx(sol.user_rates[1], rel=0.05)

    def test_no_ties_on_continuous_fading(self):
        sample = sample_states(ChannelModel.rayleigh([1.0, 2.0]), 100_000, seed=8)
        sol = solve([UserProfile(), UserProfile(w=2.0)], sample, 3.0)
        assert sol.ties == 0

    def test_kkt_and_active_users(self, rayleigh_2):
        profiles = [UserProfile(w=1.0, mu=1.0), UserProfile(w=2.0, mu=0.5)]
        sol = solve(profiles, rayleigh_2, 2.5)
        sel = allocate_sample(profiles, rayleigh_2, sol.lambda_star, sol.tau0)
        assert np.all((sel.tau > 0).sum(axis=1) <= 2)
        assert np.all(sel.tau.sum(axis=1) <= 1 + 1e-12)
        assert kkt_violations(profiles, rayleigh_2.gains[:3000], sol.lambda_star, sel.tau[:3000], sel.rate[:3000]) == []

    def test_kkt_amc(self, rayleigh_2):
        profiles = [UserProfile(codebook=QAM), UserProfile(w=1.5, codebook=QAM)]
        sol = solve(profiles, rayleigh_2, 2.0)
        sel = allocate_sample(profiles, rayleigh_2, sol.lambda_star, sol.tau0)
        assert kkt_violations(profiles, rayleigh_2.gains[:3000], sol.lambda_star, sel.tau[:3000], sel.rate[:3000]) == []

    @pytest.mark.parametrize("c", [0.01, 7.0])
    def test_scale_invariance(self, rayleigh_2, c):
        base = [UserProfile(mu=1.0), UserProfile(mu=0.4)]
        scaled = [UserProfile(mu=c * 1.0), UserProfile(mu=c * 0.4)]
        a = solve(base, rayleigh_2, 1.5)
        b = solve(scaled, rayleigh_2, 1.5)
        assert b.lambda_star == pytest.approx(c * a.lambda_star, rel=1e-12)
        assert b.avg_power == pytest.approx(a.avg_power, rel=1e-12)

    def test_jump_carried_by_tau0(self):
        sample = sample_states(ChannelModel.constant([1.0, 0.25]), 4, seed=0)
        profiles = [UserProfile(w=1.0), UserProfile(w=2.0)]
        sol = solve(profiles, sample, 3.2, tol=1e-9)
        assert sol.lambda_star == pytest.approx(S0, rel=1e-10)
        # rate = tau0 * R_a + (1 - tau0) * R_b
        assert sol.tau0 == pytest.approx((RB - 3.2) / (RB - RA), rel=1e-9)
        assert sol.avg_rate == pytest.approx(3.2, rel=1e-9)

    def test_infeasible_amc(self, rayleigh_2):
        profiles = [UserProfile(codebook=QAM), UserProfile(w=2.0, codebook=QAM)]
        assert max_weighted_rate(profiles) == 12.0
        with pytest.raises(InfeasibleError):
            solve(profiles, rayleigh_2, 12.5)

    def test_bad_inputs(self, rayleigh_2):
        with pytest.raises(ValueError):
            solve([UserProfile(), UserProfile()], rayleigh_2, 0.0)
        with pytest.raises(ValueError):
            solve([UserProfile()], rayleigh_2, 1.0)
        with pytest.raises(ValueError):
            solve([UserProfile(mu=0.0), UserProfile()], rayleigh_2, 1.0)

    def test_to_dict(self):
        sample = sample_states(ChannelModel.constant([1.0]), 2, seed=0)
        d = solve([UserProfile()], sample, 1.0).to_dict()
        assert "lambda" in d and "lambda_star" not in d
        assert d["samples"] == 2

    def test_power_increases_with_rate(self, rayleigh_2):
        profiles = [UserProfile(), UserProfile(mu=2.0)]
        objs = [solve(profiles, rayleigh_2, r).objective for r in (0.5, 1.0, 2.0, 4.0)]
        assert all(np.diff(objs) > 0)
        assert math.isfinite(objs[-1])

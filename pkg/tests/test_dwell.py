import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from switchdwell import (
    ClassKFn,
    epsilon0_search,
    global_dwell,
    local_dwell,
    mu_bound,
    pairwise_dwell,
    triangle_gap,
)
from switchdwell.errors import (
    EmptyConfiguration,
    HeterogeneousCertificates,
    InvalidEpsilon,
    InvalidMu,
    UnsupportedCertificate,
)
from switchdwell.prebuilt import demo_subsystem

# frozen high-precision references for the demo system at eps = 0.05
T_12 = 1.4260624389053681
T_13 = 1.9912324459391175
MU = 53.649110640673517
T_GLOB_LOWER = math.log(MU) / 2.0
EPS0 = 0.72855339059327376


class TestPairwiseDwell:
    def test_reference_values(self, system, eps):
        assert pairwise_dwell(eps, system[1], system[0]) == pytest.approx(T_12, rel=1e-12)
        assert pairwise_dwell(eps, system[0], system[-1]) == pytest.approx(T_12, rel=1e-12)
        assert pairwise_dwell(eps, system[1], system[-1]) == pytest.approx(T_13, rel=1e-12)

    def test_self_transition_is_free(self, system, eps):
        assert pairwise_dwell(eps, system[0], system[0]) == pytest.approx(0.0, abs=1e-15)

    def test_closed_form(self, system, eps):
        sub_from, sub_to = system[1], system[0]
        dist = np.linalg.norm(sub_to.equilibrium - sub_from.equilibrium)
        expected = -math.log(eps / (dist + math.sqrt(eps)) ** 2) / 2.0
        assert pairwise_dwell(eps, sub_from, sub_to) == pytest.approx(expected, rel=1e-14)

    def test_rejects_bad_eps(self, system):
        with pytest.raises(InvalidEpsilon):
            pairwise_dwell(0.0, system[1], system[0])

    @given(eps=st.floats(1e-4, 10.0))
    @settings(max_examples=30)
    def test_monotone_decreasing_in_eps(self, eps):
        # a larger target region needs no more travel time
        a, b = demo_subsystem(1), demo_subsystem(0)
        assert pairwise_dwell(2.0 * eps, a, b) <= pairwise_dwell(eps, a, b)


class TestLocalDwell:
    def test_supremum_over_transitions(self, system, eps):
        table = local_dwell(eps, system, [(1, 0), (0, -1)])
        assert table.t_loc == pytest.approx(T_12, rel=1e-12)
        assert table.entries[(1, 0)] == table.entries[(0, -1)]
        assert table.raw_entries[(1, 0)] == table.entries[(1, 0)]

    def test_to_dict(self, system, eps):
        doc = local_dwell(eps, system, [(1, -1)]).to_dict()
        assert doc["t_loc"] == pytest.approx(T_13, rel=1e-12)
        assert doc["entries"][0]["from"] == "1"

    def test_empty_transitions_rejected(self, system, eps):
        with pytest.raises(ValueError):
            local_dwell(eps, system, [])


class TestMuBound:
    def test_closed_form_reference(self, system, eps):
        assert mu_bound(eps, system) == pytest.approx(MU, rel=1e-12)

    def test_sampled_approaches_closed_form_from_below(self, system, eps):
        closed = mu_bound(eps, system, mode="closed_form")
        sampled = mu_bound(eps, system, mode="sampled", n_samples=200_000, seed=42)
        assert sampled <= closed * (1 + 1e-9)
        assert sampled == pytest.approx(closed, rel=0.02)

    def test_sampled_is_deterministic(self, system, eps):
        a = mu_bound(eps, system, mode="sampled", n_samples=5000, seed=3)
        b = mu_bound(eps, system, mode="sampled", n_samples=5000, seed=3)
        assert a == b

    def test_closed_form_needs_quadratic(self, eps):
        import dataclasses

        from switchdwell.core import SwitchedSystem

        subs = tuple(
            dataclasses.replace(demo_subsystem(u), quadratic=False) for u in (1, 0)
        )
        with pytest.raises(UnsupportedCertificate):
            mu_bound(eps, SwitchedSystem(subsystems=subs), mode="closed_form")

    def test_unknown_mode_rejected(self, system, eps):
        with pytest.raises(ValueError):
            mu_bound(eps, system, mode="exact")


class TestGlobalDwell:
    def test_strictly_above_the_bound(self, eps):
        t = global_dwell(eps, MU, 2.0)
        assert t > T_GLOB_LOWER
        assert t == pytest.approx(1.01 * T_GLOB_LOWER, rel=1e-12)

    def test_mu_one_gives_zero(self, eps):
        assert global_dwell(eps, 1.0, 2.0) == 0.0

    def test_invalid_mu(self, eps):
        with pytest.raises(InvalidMu):
            global_dwell(eps, 0.5, 2.0)


class TestTriangleGap:
    def test_two_computations_agree(self, system, eps):
        ta = triangle_gap(eps, system[1], system[0], system[-1])
        assert ta.gap == pytest.approx(ta.gap_via_constant, rel=1e-10)
        assert ta.gap < 0
        assert ta.to_dict()["detour_longer"] is True

    def test_matches_pairwise_sum(self, system, eps):
        ta = triangle_gap(eps, system[1], system[0], system[-1])
        direct = pairwise_dwell(eps, system[1], system[-1])
        detour = pairwise_dwell(eps, system[1], system[0]) + pairwise_dwell(
            eps, system[0], system[-1]
        )
        assert ta.gap == pytest.approx(direct - detour, rel=1e-12)

    def test_heterogeneous_certificates_rejected(self, system, eps):
        import dataclasses

        odd = dataclasses.replace(demo_subsystem(0), decay_rate=1.0)
        with pytest.raises(HeterogeneousCertificates):
            triangle_gap(eps, system[1], odd, system[-1])


class TestEpsilon0Search:
    def test_reference_configuration(self):
        alpha = beta = ClassKFn(1.0, 2.0)
        got = epsilon0_search(1.0, math.sqrt(2) / 2, alpha, beta, 2.0)
        assert got == pytest.approx(EPS0, rel=5e-6)

    def test_demo_eps_is_below_threshold(self, system, eps):
        # consistency: at eps = 0.05 < eps0 the demo detour is indeed longer
        assert eps < EPS0
        assert triangle_gap(eps, system[1], system[0], system[-1]).gap < 0

    def test_impossible_geometry(self):
        alpha = beta = ClassKFn(1.0, 2.0)
        with pytest.raises(EmptyConfiguration):
            epsilon0_search(1.0, 3.0, alpha, beta, 2.0)

    def test_invalid_parameters(self):
        alpha = beta = ClassKFn(1.0, 2.0)
        with pytest.raises(ValueError):
            epsilon0_search(0.0, 0.5, alpha, beta, 2.0)
        with pytest.raises(ValueError):
            epsilon0_search(1.0, 0.5, alpha, beta, 0.0)

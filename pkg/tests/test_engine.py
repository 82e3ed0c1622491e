"""Tests for exact trajectory enumeration and work-distribution utilities."""

import math

import numpy as np
import pytest

from wcwork import (
    DiagonalState,
    EnergyLandscape,
    HamiltonianChange,
    InvalidInputError,
    Protocol,
    ResourceLimitError,
    SupportMismatchError,
    Thermalization,
    WorkDistribution,
    bin_works,
    crooks_residual,
    enumerate_trajectories,
    epsilon_guaranteed_work,
    jarzynski_sum,
    make_thermal_state,
    partial_swap_hop_matrix,
    reverse_protocol,
    trajectory_work,
    variation_distance,
    work_distribution,
    worst_case_work,
)


def lift_protocol(delta=1.0, beta=1.0, p_swap=1.0):
    """Raise level 1 by delta from degeneracy, then thermalize."""
    l0 = EnergyLandscape(np.zeros(2))
    l1 = EnergyLandscape(np.array([0.0, delta]))
    return Protocol(
        initial=l0,
        beta=beta,
        steps=(
            HamiltonianChange(target=l1, jump=np.eye(2)),
            Thermalization(hop=partial_swap_hop_matrix(l1, beta, p_swap)),
        ),
    )


def random_protocol(rng, d, n_steps, beta):
    e0 = rng.normal(size=d)
    land = EnergyLandscape(e0)
    steps = []
    current = land
    for _ in range(n_steps):
        if rng.random() < 0.5:
            target = EnergyLandscape(rng.normal(size=d))
            jump = np.zeros((d, d))
            for weight in rng.dirichlet(np.ones(5)):
                jump += weight * np.eye(d)[rng.permutation(d)]
            steps.append(HamiltonianChange(target=target, jump=jump))
            current = target
        else:
            hop = partial_swap_hop_matrix(current, beta, rng.random())
            steps.append(Thermalization(hop=hop))
    return Protocol(initial=land, beta=beta, steps=tuple(steps))


class TestEnumeration:
    def test_probabilities_sum_to_one(self):
        rng = np.random.default_rng(5)
        for _ in range(10):
            prot = random_protocol(rng, int(rng.integers(2, 5)),
                                   int(rng.integers(1, 5)),
                                   float(rng.uniform(0.5, 2.0)))
            rho0 = DiagonalState(rng.dirichlet(np.ones(prot.d)))
            trajs = enumerate_trajectories(prot, rho0)
            assert sum(t.probability for t in trajs) == pytest.approx(1.0,
                                                                      abs=1e-12)

    def test_work_matches_manual(self):
        prot = lift_protocol(delta=2.0)
        rho0 = DiagonalState(np.array([0.25, 0.75]))
        trajs = enumerate_trajectories(prot, rho0)
        for t in trajs:
            expect = 2.0 if t.nodes[1] == 1 else 0.0
            assert t.work == pytest.approx(expect)
            assert trajectory_work(prot, t.nodes) == pytest.approx(t.work)

    def test_resource_cap(self):
        land = EnergyLandscape(np.zeros(4))
        hop = partial_swap_hop_matrix(land, 1.0, 0.5)
        steps = tuple(Thermalization(hop=hop) for _ in range(13))
        prot = Protocol(initial=land, beta=1.0, steps=steps)
        rho0 = DiagonalState(np.full(4, 0.25))
        with pytest.raises(ResourceLimitError):
            enumerate_trajectories(prot, rho0)


class TestBinning:
    def test_clusters_within_tolerance(self):
        works = np.array([1.0, 1.0 + 4e-10, 0.0, 5.0])
        probs = np.array([0.2, 0.3, 0.4, 0.1])
        dist = bin_works(works, probs, 1e-9)
        assert len(dist.works) == 3
        assert dist.probs[1] == pytest.approx(0.5)
        # merged atom sits at the probability-weighted mean
        assert dist.works[1] == pytest.approx((0.2 * 1.0 + 0.3 * (1.0 + 4e-10)) / 0.5)

    def test_distinct_atoms_survive(self):
        dist = bin_works(np.array([0.0, 1e-6]), np.array([0.5, 0.5]), 1e-9)
        assert len(dist.works) == 2


class TestWorkDistribution:
    def test_atoms_sorted_and_normalized(self):
        prot = lift_protocol()
        dist = work_distribution(prot, DiagonalState(np.array([0.9, 0.1])))
        assert list(dist.works) == sorted(dist.works)
        assert dist.probs.sum() == pytest.approx(1.0, abs=1e-12)
        assert dist.prob_at(0.0) == pytest.approx(0.9)
        assert dist.prob_at(1.0) == pytest.approx(0.1)

    def test_restrict_start_renormalizes(self):
        prot = lift_protocol(delta=3.0)
        rho0 = DiagonalState(np.array([0.5, 0.5]))
        dist = work_distribution(prot, rho0, restrict_start=np.array([1]))
        assert dist.prob_at(3.0) == pytest.approx(1.0)


class TestWorstCase:
    def test_worst_case_is_support_max(self):
        dist = WorkDistribution(atoms=((0.0, 0.5), (2.0, 0.5)))
        assert worst_case_work(dist) == pytest.approx(2.0)

    def test_single_atom(self):
        dist = WorkDistribution(atoms=((0.0, 1.0),))
        assert worst_case_work(dist) == 0.0


class TestEpsilonGuaranteed:
    def test_uniform_three_atoms(self):
        dist = WorkDistribution(atoms=((0.0, 1 / 3), (1.0, 1 / 3), (2.0, 1 / 3)))
        w_eps, cut = epsilon_guaranteed_work(dist, 1 / 3)
        assert w_eps == pytest.approx(1.0)
        assert cut.probs.sum() == pytest.approx(1.0)
        assert max(cut.works) == pytest.approx(1.0)

    def test_eps_zero_is_worst_case(self):
        dist = WorkDistribution(atoms=((0.0, 0.9), (1.0, 0.1)))
        w_eps, cut = epsilon_guaranteed_work(dist, 0.0)
        assert w_eps == worst_case_work(dist)
        assert cut.atoms == dist.atoms

    def test_cut_removes_tail_atom(self):
        dist = WorkDistribution(atoms=((0.0, 0.9), (1.0, 0.1)))
        w_eps, cut = epsilon_guaranteed_work(dist, 0.1)
        assert w_eps == 0.0
        assert cut.atoms == ((0.0, 1.0),)

    def test_eps_out_of_range(self):
        dist = WorkDistribution(atoms=((0.0, 1.0),))
        with pytest.raises(InvalidInputError):
            epsilon_guaranteed_work(dist, 1.0)


class TestFluctuationRelations:
    def test_crooks_exact_on_random_thermal_protocols(self):
        rng = np.random.default_rng(17)
        for _ in range(25):
            beta = float(rng.uniform(0.5, 2.0))
            prot = random_protocol(rng, int(rng.integers(2, 5)),
                                   int(rng.integers(1, 6)), beta)
            gamma0, z0 = make_thermal_state(prot.initial, beta)
            gammaf, zf = make_thermal_state(prot.final_landscape, beta)
            fwd = work_distribution(prot, gamma0)
            rev = work_distribution(reverse_protocol(prot), gammaf)
            resid = crooks_residual(fwd, rev, z0, zf, beta)
            assert np.max(np.abs(resid)) < 1e-10

    def test_jarzynski_matches_partition_ratio(self):
        rng = np.random.default_rng(23)
        beta = 1.3
        prot = random_protocol(rng, 3, 4, beta)
        gamma0, z0 = make_thermal_state(prot.initial, beta)
        _, zf = make_thermal_state(prot.final_landscape, beta)
        fwd = work_distribution(prot, gamma0)
        assert jarzynski_sum(fwd, beta) == pytest.approx(zf / z0, rel=1e-12)

    def test_support_mismatch_raises(self):
        fwd = WorkDistribution(atoms=((0.0, 0.5), (1.0, 0.5)))
        rev = WorkDistribution(atoms=((0.0, 1.0),))  # no atom at -1
        with pytest.raises(SupportMismatchError):
            crooks_residual(fwd, rev, 1.0, 1.0, 1.0)


class TestVariationDistance:
    def test_known_values(self):
        assert variation_distance([1, 0], [0, 1]) == pytest.approx(1.0)
        assert variation_distance([0.5, 0.5], [0.5, 0.5]) == 0.0
        assert variation_distance([0.9, 0.1], [0.5, 0.5]) == pytest.approx(0.4)

    def test_length_mismatch(self):
        with pytest.raises(InvalidInputError):
            variation_distance([1.0], [0.5, 0.5])

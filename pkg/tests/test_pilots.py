import numpy as np
import pytest

from itilink.pilots import (PilotFeasibilityError, PilotPlan, check_feasible,
                            make_joint_plan, make_orthogonal_plan,
                            make_reduced_joint_plan, total_pilot_energy,
                            zadoff_chu)


def cross_corr(a, b):
    return abs(np.vdot(a, b)) / len(a)


def test_single_tower_plan_trivial():
    plan = make_joint_plan(1, range(64), bin_domain=range(64))
    assert plan.n_towers == 1
    assert plan.n_pilots_total == 64
    assert np.allclose(np.abs(plan.sequences[0]), 1.0, atol=1e-12)


def test_zc_roots_low_cross_correlation():
    # M=4, N_p=150: ascending coprime roots are {1, 7, 11, 13}.
    plan = make_joint_plan(4, range(150), bin_domain=range(150), family="zc")
    seqs = plan.sequences
    assert np.allclose([np.abs(s) for s in seqs], 1.0, atol=1e-12)
    expected = [zadoff_chu(u, 150) for u in (1, 7, 11, 13)]
    for s, e in zip(seqs, expected):
        assert np.allclose(s, e)
    for i in range(4):
        for j in range(i + 1, 4):
            assert cross_corr(seqs[i], seqs[j]) < 0.1


def test_random_qpsk_low_correlation_redraw():
    plan = make_joint_plan(4, range(150), seed=3, bin_domain=range(150),
                           family="random_qpsk")
    for i in range(4):
        for j in range(i + 1, 4):
            assert cross_corr(plan.sequences[i], plan.sequences[j]) < 0.1
    # QPSK alphabet only
    vals = np.unique(np.round(np.angle(plan.sequences[0]) / (np.pi / 4)))
    assert set(np.abs(vals)) <= {1.0, 3.0}


def test_cyclic_shift_exact_code_orthogonality():
    n, m, l = 256, 4, 8
    plan = make_joint_plan(m, range(n), bin_domain=range(n),
                           family="cyclic_shift")
    from itilink.numerics import dft_submatrix
    f = dft_submatrix(n, range(n), l).entries
    a = np.hstack([plan.sequences[t][:, None] * f for t in range(m)])
    gram = a.conj().T @ a
    assert np.max(np.abs(gram - n * np.eye(m * l))) < 1e-8


def test_joint_positions_shared():
    plan = make_joint_plan(3, range(100), bin_domain=range(0, 200, 2))
    assert plan.positions[0] == plan.positions[1] == plan.positions[2]
    assert plan.absolute_rows(0)[1] == 2


def test_orthogonal_interleaving_and_disjointness():
    plan = make_orthogonal_plan(2, 8, bin_domain=range(8))
    assert plan.positions[0] == (0, 2, 4, 6)
    assert plan.positions[1] == (1, 3, 5, 7)
    plan4 = make_orthogonal_plan(4, 150, boost=2.0, bin_domain=range(150))
    sets = [set(p) for p in plan4.positions]
    for i in range(4):
        for j in range(i + 1, 4):
            assert not sets[i] & sets[j]
    assert all(len(s) == 37 for s in sets)
    # per-pilot power = boost^2
    assert np.allclose(np.abs(plan4.amplitude(0)) ** 2, 4.0)


def test_boost_gives_energy_parity():
    m, n = 4, 256
    joint = make_joint_plan(m, range(n), bin_domain=range(n),
                            family="cyclic_shift")
    boosted = make_orthogonal_plan(m, n, boost=2.0, bin_domain=range(n))
    assert total_pilot_energy(joint) == pytest.approx(
        total_pilot_energy(boosted))
    unboosted = make_orthogonal_plan(m, n, boost=1.0, bin_domain=range(n))
    assert total_pilot_energy(unboosted) == pytest.approx(
        total_pilot_energy(joint) / m)


def test_reduced_plan_partition_and_freed_bins():
    plan = make_reduced_joint_plan(4, 1200, bin_domain=range(1200))
    assert len(plan.positions[0]) == 300
    assert len(plan.freed_positions) == 900
    assert set(plan.positions[0]) | set(plan.freed_positions) == set(range(1200))
    assert not set(plan.positions[0]) & set(plan.freed_positions)


def test_reduced_plan_single_tower_degenerates():
    plan = make_reduced_joint_plan(1, 64, bin_domain=range(64))
    assert plan.positions[0] == tuple(range(64))
    assert plan.freed_positions == ()


def test_feasibility_guard():
    plan = make_joint_plan(4, range(30), bin_domain=range(30))
    with pytest.raises(PilotFeasibilityError):
        check_feasible(plan, 8)          # 32 >= 30
    check_feasible(plan, 7)              # 28 < 30, fine
    oplan = make_orthogonal_plan(4, 32, bin_domain=range(32))
    with pytest.raises(PilotFeasibilityError):
        check_feasible(oplan, 8)         # 8 >= 8 per-tower bins


def test_plan_validation():
    with pytest.raises(ValueError):
        make_joint_plan(2, [0, 1, 99], bin_domain=range(10))
    with pytest.raises(ValueError):
        make_joint_plan(2, range(10), bin_domain=range(10), family="bogus")
    with pytest.raises(ValueError):
        make_orthogonal_plan(9, 8, bin_domain=range(8))
    with pytest.raises(ValueError):
        PilotPlan(scheme="weird", bin_domain=(0,), positions=((0,),),
                  sequences=(np.ones(1),))


def test_cyclic_shift_requires_full_band():
    with pytest.raises(ValueError):
        make_joint_plan(2, range(10), bin_domain=range(11),
                        family="cyclic_shift")

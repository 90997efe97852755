import itertools
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hssplab.attack import (
    FAILURES,
    AttackParams,
    DegenerateInstanceError,
    find_invertible_rows,
    ns_step1,
    ns_step2,
    recover_binary_vectors,
    run_attack,
    solve_x,
)
from hssplab.hssp import HsspInstance, random_hssp
from hssplab.kmeans import sample_kmeans_instance
from hssplab.lattice import lattice_contains


def _instance(cols, x, Q):
    W = [list(r) for r in zip(*cols)]
    h = [sum(a * b for a, b in zip(r, x)) % Q for r in W]
    return HsspInstance(Q=Q, h=h, truth_weights=W, truth_x=x)


# -- step 1 ----------------------------------------------------------------------


def test_step1_single_hidden_vector():
    a = [1, 0, 1, 1, 0]
    inst = _instance([a], [123456789], 2**61 - 1)
    s1 = ns_step1(inst)
    assert len(s1.completed_basis) == 1
    assert lattice_contains(s1.completed_basis, a)


def test_step1_small_random_instance():
    inst = random_hssp(2, 6, 64, seed=5)
    s1 = ns_step1(inst)
    assert len(s1.ortho_basis) == 4 and len(s1.completed_basis) == 2
    assert all(lattice_contains(s1.completed_basis, c) for c in inst.columns())


def test_step1_holds_for_kmeans(iris):
    inst, _, _ = sample_kmeans_instance(iris, 10, 3, 100, 60, seed=1)
    s1 = ns_step1(inst)
    assert all(lattice_contains(s1.completed_basis, c) for c in inst.columns())


def test_step1_degenerate():
    inst = HsspInstance(Q=7, h=[0, 0, 0], truth_weights=[[0], [0], [0]], truth_x=[5])
    with pytest.raises(DegenerateInstanceError, match="degenerate instance"):
        ns_step1(inst)


def test_step1_needs_m_above_n():
    inst = _instance([[1, 0], [0, 1]], [3, 4], 101)
    with pytest.raises(ValueError):
        ns_step1(inst)


# -- binary recovery ---------------------------------------------------------------


def test_recover_examples():
    out = recover_binary_vectors([[1, 0, 1], [0, 1, 0]])
    assert [1, 0, 1] in out and [0, 1, 0] in out
    assert [1, 1, 0] in recover_binary_vectors([[1, 0, -1], [0, 1, 1]])
    assert recover_binary_vectors([[2, 0], [0, 3]]) == []
    with pytest.raises(ValueError):
        recover_binary_vectors([])


def test_recover_negation():
    assert recover_binary_vectors([[-1, 0, -1]], combo_depth=1) == [[1, 0, 1]]


def test_recover_depth_three_and_propagation():
    vs = [[1, 1, 0, 0], [0, -1, 1, 0], [0, 0, -1, 1]]
    d2 = recover_binary_vectors(vs, 2)
    d3 = recover_binary_vectors(vs, 3)
    assert [1, 0, 0, 1] not in d2 and [1, 0, 0, 1] in d3
    assert [1, 0, 0, 1] in recover_binary_vectors(vs, 2, propagate=True)


@settings(max_examples=60)
@given(st.lists(st.lists(st.integers(-2, 2), min_size=5, max_size=5), min_size=1, max_size=6))
def test_recover_outputs_are_binary_combinations(vs):
    out = recover_binary_vectors(vs, 2)
    assert out == sorted(out)
    assert len({tuple(v) for v in out}) == len(out)
    combos = {tuple(v) for v in vs} | {tuple(-a for a in v) for v in vs}
    for v, w in itertools.combinations(vs, 2):
        for s in (1, -1):
            u = tuple(a + s * b for a, b in zip(v, w))
            combos |= {u, tuple(-a for a in u)}
    for b in out:
        assert set(b) <= {0, 1} and any(b)
        assert tuple(b) in combos


# -- solving ------------------------------------------------------------------------


def test_solve_identity_rows():
    A = [[1, 0], [0, 1], [1, 1]]
    assert solve_x(A, [5, 9, 14], 101) == [5, 9]


def test_solve_truth_weights():
    inst = random_hssp(4, 12, 128, seed=3)
    assert solve_x(inst.truth_weights, inst.h, inst.Q) == inst.truth_x


def test_solve_rank_deficient():
    assert solve_x([[1, 1], [1, 1], [0, 0]], [3, 3, 0], 101) is None
    assert find_invertible_rows([[1, 1], [1, 1]], 101) is None


def test_solve_rejects_inconsistent_samples():
    assert solve_x([[1, 0], [0, 1], [1, 1]], [5, 9, 15], 101) is None


def test_find_rows_needs_unit_determinant():
    # det 2 is not a unit mod 4; the other pair has det -1
    A = [[1, 1], [1, -1], [0, 1]]
    rows = find_invertible_rows(A, 4, random.Random(0))
    assert rows == [0, 2] or rows == [1, 2]


# -- whole attack ----------------------------------------------------------------------


def test_step2_identity_basis_is_immediate():
    # disjoint supports: the completed lattice is spanned by the columns themselves
    cols = [[1, 1, 1, 0, 0, 0, 0, 0, 0], [0, 0, 0, 1, 1, 1, 0, 0, 0], [0, 0, 0, 0, 0, 0, 1, 1, 1]]
    inst = _instance(cols, [1234567, 7654321, 1111111], 2**61 - 1)
    s1 = ns_step1(inst)
    assert {tuple(abs(a) for a in v) for v in s1.completed_basis} == {tuple(c) for c in cols}
    rep = ns_step2(s1, inst)
    assert all(c in rep.recovered_binary for c in cols)
    assert rep.x_recovered is not None


def test_attack_random_small():
    inst = random_hssp(4, 32, 256, seed=2)
    rep = run_attack(inst, AttackParams(beta=4))
    assert rep.x_success and rep.true_match_count == 4 and rep.failure is None
    assert rep.step1_truth_in_lattice
    assert set(rep.timings) >= {"step1", "step2_bkz", "step2_recover", "step2_solve", "total"}


def test_attack_is_deterministic():
    inst = random_hssp(3, 10, 128, seed=8)
    a = run_attack(inst, AttackParams(beta=3))
    b = run_attack(inst, AttackParams(beta=3))
    a.timings = b.timings = {}
    assert a == b


def test_too_few_samples_gives_consistent_wrong_x():
    # m far below the bound: an extra binary vector makes another basis fit h
    inst = random_hssp(4, 16, 256, seed=2)
    rep = run_attack(inst, AttackParams(beta=4))
    assert rep.recovered_count > 4 and rep.true_match_count == 4
    assert rep.failure == "wrong_solution"


def test_failure_labels_are_known(iris):
    inst, _, _ = sample_kmeans_instance(iris, 10, 3, 100, 60, seed=1)
    rep = run_attack(inst, AttackParams(beta=10))
    assert not rep.x_success
    assert rep.failure in FAILURES


def test_params_validation():
    with pytest.raises(ValueError):
        AttackParams(combo_depth=0)
    with pytest.raises(ValueError):
        AttackParams(combo_depth=4)


def test_attack_does_not_read_ground_truth():
    inst = random_hssp(3, 10, 128, seed=8)
    blind = HsspInstance(Q=inst.Q, h=list(inst.h), truth_weights=[[0] * 3] * 10, truth_x=[0, 0, 0])
    a = run_attack(inst, AttackParams(beta=3), evaluate=False)
    b = run_attack(blind, AttackParams(beta=3), evaluate=False)
    assert a.recovered_binary == b.recovered_binary and a.x_recovered == b.x_recovered

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gucsynth.colorsets import (
    ModeGraph,
    build_graph,
    color_partition,
    contract,
    feasibility,
    genericity_check,
    induced_permutation,
    randomize_saturate,
)
from gucsynth.edge_cases import block_permutation_coupler, circulator, pair_swap
from gucsynth.errors import InconsistentPartition, SaturationNotReached
from gucsynth.symplectic import (
    RngSpec,
    embed_local,
    embed_on_modes,
    mode_permutation,
    random_local_layer,
    symplectic_form,
)

from conftest import generic


def _oracle_partition(n, edges):
    """Brute-force fixed point: keep merging successor sets of any class with
    two or more outgoing classes, scanning classes in arbitrary order."""
    cls = {v: {v} for v in range(n)}
    changed = True
    while changed:
        changed = False
        groups = {frozenset(c) for c in cls.values()}
        for g in sorted(groups, key=min):
            outs = {frozenset(cls[j]) for i, j in edges if i in g}
            if len(outs) >= 2:
                merged = set().union(*outs)
                for v in merged:
                    cls[v] = merged
                changed = True
                break
    return sorted(sorted(c) for c in {frozenset(c) for c in cls.values()})


# genericity


def test_dense_is_generic():
    for seed in range(100):
        assert genericity_check(generic(2 + seed % 5, seed)).is_generic


def test_omega_violations():
    report = genericity_check(symplectic_form(3))
    assert not report.is_generic
    # every row sees two zero pairs (the other modes), same for columns
    assert len(report.violations) == 2 * 6 * 2


def test_block_diagonal_violations():
    S = embed_on_modes(generic(1, 1), [0], 2) @ embed_on_modes(generic(1, 2), [1], 2)
    v = genericity_check(S).violations
    assert {(k // 2, m) for side, k, m in v if side == "row"} == {(0, 1), (1, 0)}
    assert {(k // 2, m) for side, k, m in v if side == "column"} == {(0, 1), (1, 0)}


# graphs


def test_identity_graph():
    assert build_graph(np.eye(8)).edges == {(i, i) for i in range(4)}


def test_circulator_graph():
    assert build_graph(circulator(3, RngSpec(1))).edges == {(0, 1), (1, 2), (2, 0)}


def test_pair_swap_graph():
    edges = build_graph(pair_swap(RngSpec(1))).edges
    a, b = [0, 1], [2, 3]
    assert edges == {(i, j) for i in a for j in b} | {(i, j) for i in b for j in a}


# contraction


@pytest.mark.parametrize("n", [3, 4, 5])
def test_circulator_partition(n):
    S = circulator(n, RngSpec(n))
    p = color_partition(S)
    assert p.sets == [[m] for m in range(n)]
    assert induced_permutation(S, p) == [(c + 1) % n for c in range(n)]


def test_pair_swap_partition():
    S = pair_swap(RngSpec(2))
    p = color_partition(S)
    assert p.sets == [[0, 1], [2, 3]]
    assert induced_permutation(S, p) == [1, 0]
    assert induced_permutation(S @ S, color_partition(S @ S)) == [0, 1]


def test_dense_partition():
    S = generic(5, 3)
    p = color_partition(S)
    assert p.sets == [list(range(5))]
    assert induced_permutation(S, p) == [0]


def test_inconsistent_partition():
    S = pair_swap(RngSpec(2))
    with pytest.raises(InconsistentPartition):
        induced_permutation(S, contract(ModeGraph.from_edges(4, [])))


def test_feasibility():
    assert feasibility(color_partition(generic(4, 1)), [0, 3])
    assert not feasibility(color_partition(circulator(3, RngSpec(0))), [0, 1])
    p = color_partition(pair_swap(RngSpec(0)))
    assert feasibility(p, [0, 1])
    assert not feasibility(p, [1, 2])


def _random_graph(n, gen):
    density = gen.uniform(0.05, 0.5)
    return [(i, j) for i in range(n) for j in range(n) if gen.random() < density]


@settings(max_examples=60)
@given(st.integers(1, 8), st.integers(0, 2**32 - 1))
def test_contraction_order_independent(n, seed):
    gen = np.random.default_rng(seed)
    edges = _random_graph(n, gen)
    graph = ModeGraph.from_edges(n, edges)
    ref = contract(graph)
    assert ref.sets == _oracle_partition(n, edges)
    for _ in range(20):
        assert contract(graph, order=gen.permutation(n).tolist()).sets == ref.sets


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_partition_invariant_under_local_conjugation(seed):
    gen = np.random.default_rng(seed)
    S = block_permutation_coupler([[0, 1], [2], [3, 4]], [2, 1, 0], gen)
    L1 = embed_local(random_local_layer(5, gen))
    L2 = embed_local(random_local_layer(5, gen))
    assert color_partition(L1 @ S @ L2).sets == color_partition(S).sets


@pytest.mark.parametrize("k", [1, 2, 3, 4])
def test_powers_follow_induced_permutation(k):
    S = block_permutation_coupler([[0], [1, 2], [3, 4]], [0, 2, 1], RngSpec(k))
    p = color_partition(S)
    perm = induced_permutation(S, p)
    color = {m: c for c, members in enumerate(p.sets) for m in members}
    for i, j in build_graph(np.linalg.matrix_power(S, k)).edges:
        c = color[i]
        for _ in range(k):
            c = perm[c]
        assert color[j] == c


# saturation


def test_saturate_dense():
    sat = randomize_saturate(generic(3, 5), RngSpec(0))
    assert sat.copies_used == 1
    assert sat.partition.sets == [[0, 1, 2]]


def test_saturate_omega():
    sat = randomize_saturate(symplectic_form(4), RngSpec(0))
    assert sat.copies_used == 1
    assert sat.partition.sets == [[0], [1], [2], [3]]


def test_saturate_pair_swap():
    sat = randomize_saturate(pair_swap(RngSpec(6)), RngSpec(0))
    assert sat.copies_used == 2
    M = sat.matrix
    assert np.abs(M[:4, 4:]).max() <= 1e-10 * np.abs(M).max()
    assert np.abs(M[:4, :4]).min() > 1e-6
    assert np.abs(M[4:, 4:]).min() > 1e-6


def test_saturate_circulator_and_budget():
    S = circulator(4, RngSpec(2))
    assert randomize_saturate(S, RngSpec(0)).copies_used == 4
    with pytest.raises(SaturationNotReached):
        randomize_saturate(S, RngSpec(0), max_copies=3)


def test_saturate_sequence_reproduces_matrix():
    from gucsynth.sequence import evaluate

    S = block_permutation_coupler([[0, 1], [2, 3], [4]], [1, 0, 2], RngSpec(3))
    sat = randomize_saturate(S, RngSpec(1))
    assert np.allclose(evaluate(sat.sequence, S), sat.matrix, atol=1e-12 * np.abs(sat.matrix).max())
    assert sat.sequence.coupler_count == sat.copies_used

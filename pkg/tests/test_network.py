import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import LOOPY8_PARENTS, TURBO_PARENTS, B, C, D, E, F, G, H, random_network
from minibucket.errors import ModelError
from minibucket.generators import GenSpec, generate
from minibucket.network import (
    BeliefNetwork,
    check_evidence,
    is_polytree,
    joint_probability,
    moral_graph,
    topological_order,
    underlying_graph,
)


def edges(g):
    return {frozenset((a, b)) for a, nb in g.items() for b in nb}


class TestValidation:
    def test_from_tables_layout_parents_then_child(self):
        bn = BeliefNetwork.from_tables([2, 2], [(), (0,)], [[0.6, 0.4], [[0.7, 0.3], [0.2, 0.8]]])
        assert bn.cpts[1].value({0: 1, 1: 1}) == 0.8

    def test_child_before_parent_in_id_order(self):
        # parent id 1 > child id 0: the stored table is transposed into ascending scope
        bn = BeliefNetwork.from_tables([2, 2], [(1,), ()], [[[0.9, 0.1], [0.4, 0.6]], [0.5, 0.5]])
        assert bn.cpts[0].scope == (0, 1)
        assert bn.cpts[0].value({1: 1, 0: 0}) == 0.4

    def test_unnormalized_rejected(self):
        with pytest.raises(ModelError):
            BeliefNetwork.from_tables([2], [()], [[0.5, 0.6]])

    def test_normalization_tolerance(self):
        BeliefNetwork.from_tables([2], [()], [[0.5, 0.5 + 5e-10]])
        with pytest.raises(ModelError):
            BeliefNetwork.from_tables([2], [()], [[0.5, 0.5 + 5e-9]])

    def test_cycle_rejected(self):
        t = [[0.5, 0.5], [0.5, 0.5]]
        with pytest.raises(ModelError):
            BeliefNetwork.from_tables([2, 2], [(1,), (0,)], [t, t])

    def test_unary_domain_rejected(self):
        with pytest.raises(ModelError):
            BeliefNetwork.from_tables([1, 2], [(), ()], [[1.0], [0.5, 0.5]])

    def test_self_parent_rejected(self):
        with pytest.raises(ModelError):
            BeliefNetwork.from_tables([2], [(0,)], [[[0.5, 0.5], [0.5, 0.5]]])

    def test_evidence_checks(self, chain):
        assert check_evidence(chain, {2: 1}) == {2: 1}
        with pytest.raises(ModelError):
            check_evidence(chain, {3: 0})
        with pytest.raises(ModelError):
            check_evidence(chain, {0: 2})


class TestGraphs:
    def test_chain_moral(self, chain):
        assert edges(moral_graph(chain)) == {frozenset((0, 1)), frozenset((1, 2))}

    def test_collider_marries_parents(self):
        half = [0.5, 0.5]
        bn = BeliefNetwork.from_tables([2, 2, 2], [(), (), (0, 1)], [half, half, np.full((2, 2, 2), 0.5)])
        assert edges(moral_graph(bn)) == {frozenset(p) for p in ((0, 2), (1, 2), (0, 1))}

    def test_loopy8_moral_has_ef(self, loopy8):
        assert F in moral_graph(loopy8)[E]

    def test_no_self_loops(self, loopy8):
        assert all(v not in nb for v, nb in moral_graph(loopy8).items())

    def test_polytree_examples(self, chain, loopy8):
        assert is_polytree(chain)
        assert not is_polytree(loopy8)
        assert not is_polytree(random_network(TURBO_PARENTS, seed=0))

    def test_loopy8_has_undirected_loop(self, loopy8):
        g = underlying_graph(loopy8)
        # C - E - G - D - C is a loop once arrows are ignored
        assert E in g[C] and G in g[E] and D in g[G] and C in g[D]

    def test_topological_order(self, loopy8):
        order = topological_order(loopy8.parents)
        pos = {v: k for k, v in enumerate(order)}
        assert all(pos[p] < pos[v] for v, ps in enumerate(loopy8.parents) for p in ps)
        assert order[:2] == [B, C]


class TestJointProbability:
    def test_uniform_binary(self, coins):
        for x in itertools.product(range(2), repeat=3):
            assert joint_probability(coins, x) == 0.125

    def test_deterministic_chain(self):
        ident = np.eye(2)
        bn = BeliefNetwork.from_tables([2, 2, 2], [(), (0,), (1,)], [[0.3, 0.7], ident, ident])
        assert joint_probability(bn, (1, 1, 1)) == 0.7
        assert joint_probability(bn, (0, 0, 0)) == 0.3
        assert joint_probability(bn, (0, 1, 1)) == 0.0

    def test_evidence_inconsistent_is_zero(self, chain):
        assert joint_probability(chain, (0, 0, 0), {2: 1}) == 0.0
        assert joint_probability(chain, (0, 0, 1), {2: 1}) == pytest.approx(0.6 * 0.7 * 0.1)

    def test_wrong_length(self, chain):
        with pytest.raises(ModelError):
            joint_probability(chain, (0, 0))

    @settings(max_examples=30, deadline=None)
    @given(st.integers(2, 10), st.integers(0, 2**32))
    def test_sums_to_one(self, n, seed):
        e = min(n, n * (n - 1) // 2)
        bn = generate(GenSpec(n, e, seed=seed))
        total = sum(joint_probability(bn, x) for x in itertools.product(range(2), repeat=n))
        assert total == pytest.approx(1.0, abs=1e-9)

    def test_loopy8_fixture_shape(self, loopy8):
        assert loopy8.n == 8
        assert loopy8.parents[H] == tuple(sorted(LOOPY8_PARENTS[H]))
        assert loopy8.max_family_size() == 3

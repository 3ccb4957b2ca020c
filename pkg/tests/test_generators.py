import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from minibucket.bnet import dumps
from minibucket.elimination import probability_of_evidence
from minibucket.errors import ModelError
from minibucket.generators import (
    GenSpec,
    gen_evidence,
    gen_graph,
    gen_noisy_or_cpts,
    gen_polytree,
    gen_uniform_cpts,
    generate,
    noisy_or_table,
)
from minibucket.network import is_polytree, moral_graph, topological_order
from minibucket.ordering import find_ordering


def is_acyclic(parents):
    try:
        topological_order(parents)
    except ModelError:
        return False
    return True


class TestGraph:
    def test_single_edge(self):
        parents = gen_graph(GenSpec(2, 1, seed=4))
        assert sorted(map(len, parents)) == [0, 1]

    def test_empty(self):
        assert gen_graph(GenSpec(6, 0)) == [[]] * 6

    def test_complete_dag(self):
        parents = gen_graph(GenSpec(6, 15, seed=1))
        assert sum(map(len, parents)) == 15 and is_acyclic(parents)

    def test_capacity(self):
        with pytest.raises(ModelError):
            GenSpec(4, 7)

    @settings(max_examples=1000, deadline=None)
    @given(st.integers(0, 2**64 - 1))
    def test_edges_and_acyclicity_over_seeds(self, seed):
        parents = gen_graph(GenSpec(30, 80, seed=seed))
        assert sum(map(len, parents)) == 80
        assert all(len(set(ps)) == len(ps) and v not in ps for v, ps in enumerate(parents))
        assert is_acyclic(parents)

    def test_reproducible(self):
        assert gen_graph(GenSpec(30, 80, seed=9)) == gen_graph(GenSpec(30, 80, seed=9))
        assert gen_graph(GenSpec(30, 80, seed=9)) != gen_graph(GenSpec(30, 80, seed=10))


class TestUniformCPTs:
    def test_columns_normalized(self):
        bn = generate(GenSpec(15, 30, seed=2, cardinality=3))
        for v, cpt in enumerate(bn.cpts):
            sums = cpt.table.sum(axis=cpt.scope.index(v))
            np.testing.assert_allclose(sums, 1.0, atol=1e-9)

    def test_parentless_prior(self):
        bn = gen_uniform_cpts([[]], GenSpec(1, 0, seed=3))
        assert bn.cpts[0].scope == (0,) and bn.cpts[0].table.sum() == pytest.approx(1.0)

    def test_bit_identical(self):
        assert dumps(generate(GenSpec(20, 40, seed=5))) == dumps(generate(GenSpec(20, 40, seed=5)))

    def test_meta(self):
        assert generate(GenSpec(5, 4, seed=11)).meta == {"seed": "11", "kind": "uniform", "rng": "pcg64"}


class TestNoisyOr:
    def test_no_active_parent(self):
        t = noisy_or_table([0.4, 0.6])
        assert t[0, 0, 0] == 1.0 and t[0, 0, 1] == 0.0

    def test_single_inhibitor(self):
        assert noisy_or_table([0.3])[1, 1] == pytest.approx(0.7)

    def test_two_inhibitors(self):
        assert noisy_or_table([0.5, 0.5])[1, 1, 0] == pytest.approx(0.25)

    def test_generated_structure(self):
        spec = GenSpec(30, 100, kind="noisy_or", seed=6)
        bn = generate(spec)
        for v, ps in enumerate(bn.parents):
            if not ps:
                continue
            t = bn.cpts[v].table  # ascending scope; child axis at its rank
            t = np.moveaxis(t, bn.cpts[v].scope.index(v), -1)
            q = np.empty(len(ps))
            for k in range(len(ps)):
                idx = [0] * len(ps)
                idx[k] = 1
                q[k] = t[tuple(idx) + (0,)]
            np.testing.assert_allclose(t, noisy_or_table(q), atol=1e-15)

    def test_binary_only(self):
        with pytest.raises(ModelError):
            GenSpec(5, 4, kind="noisy_or", cardinality=3)
        with pytest.raises(ModelError):
            gen_noisy_or_cpts([[]], GenSpec(1, 0, cardinality=3))


class TestPolytree:
    def test_is_polytree_with_parent_limit(self):
        for seed in range(50):
            bn = gen_polytree(25, max_parents=3, seed=seed)
            assert is_polytree(bn) and max(map(len, bn.parents)) <= 3


class TestEvidence:
    def test_empty(self):
        assert gen_evidence(generate(GenSpec(5, 4)), 0) == {}

    def test_positive_ones(self):
        bn = generate(GenSpec(5, 4))
        assert gen_evidence(bn, 1) == {0: 1}
        assert gen_evidence(bn, 3) == {0: 1, 1: 1, 2: 1}

    def test_sampled_has_positive_probability(self):
        for seed in range(50):
            bn = generate(GenSpec(12, 20, kind="noisy_or" if seed % 2 else "uniform", seed=seed))
            ev = gen_evidence(bn, 4, "sampled", seed)
            assert len(ev) == 4
            d = find_ordering(moral_graph(bn), last=sorted(ev))
            assert probability_of_evidence(bn, ev, d) > 0

    def test_errors(self):
        bn = generate(GenSpec(5, 4))
        with pytest.raises(ModelError):
            gen_evidence(bn, 6)
        with pytest.raises(ValueError):
            gen_evidence(bn, 1, "random")

import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import factor
from minibucket.errors import ModelError, ResourceLimitError
from minibucket.factor import Factor, default_cell_cap, eliminate, multiply, restrict, restrict_many


@st.composite
def small_factor(draw, variables=(0, 1, 2, 3)):
    scope = sorted(draw(st.sets(st.sampled_from(variables), min_size=1, max_size=len(variables))))
    cards = [2 + (v % 2) for v in scope]
    size = int(np.prod(cards))
    values = draw(st.lists(st.floats(0.0, 10.0), min_size=size, max_size=size))
    return Factor.from_flat(scope, cards, values)


class TestConstruction:
    def test_scope_is_sorted_and_table_transposed(self):
        table = np.array([[1.0, 2.0, 3.0], [4.0, 5.0, 6.0]])  # axes (5, 2)
        f = Factor((5, 2), table)
        assert f.scope == (2, 5)
        assert f.value({5: 1, 2: 0}) == 4.0
        assert f.cards == (3, 2)

    def test_last_variable_fastest(self):
        f = factor((0, 1), [0.1, 0.2, 0.3, 0.4])
        assert f.value({0: 0, 1: 1}) == 0.2
        assert f.value({0: 1, 1: 0}) == 0.3

    @pytest.mark.parametrize(
        "scope,table",
        [
            ((0, 0), np.ones((2, 2))),
            ((0,), np.ones((2, 2))),
            ((0,), np.array([1.0])),
            ((0,), np.array([-0.1, 1.0])),
            ((0,), np.array([np.nan, 1.0])),
            ((0,), np.array([np.inf, 1.0])),
        ],
    )
    def test_invalid_tables_rejected(self, scope, table):
        with pytest.raises(ModelError):
            Factor(scope, table)

    def test_flat_size_mismatch(self):
        with pytest.raises(ModelError):
            Factor.from_flat((0, 1), (2, 2), [0.5] * 3)

    def test_table_is_read_only_and_caller_array_untouched(self):
        raw = np.array([0.2, 0.8])
        f = Factor((0,), raw)
        assert raw.flags.writeable
        with pytest.raises(ValueError):
            f.table[0] = 1.0

    def test_constant(self):
        c = Factor.constant(0.25)
        assert c.scope == () and c.table.shape == () and float(c.table) == 0.25


class TestMultiply:
    def test_identity_scalar(self):
        f = factor((0, 1), [0.1, 0.2, 0.3, 0.4])
        assert multiply([f, Factor.constant(1.0)]) == f

    def test_shared_scope_pointwise(self):
        out = multiply([factor((0,), [0.2, 0.8]), factor((0,), [0.5, 0.5])])
        np.testing.assert_allclose(out.table, [0.1, 0.4])

    def test_disjoint_scopes_outer_product(self):
        a, b = factor((0,), [0.2, 0.8]), factor((1,), [0.3, 0.7])
        out = multiply([a, b])
        assert out.scope == (0, 1)
        for x, y in itertools.product(range(2), repeat=2):
            assert out.value({0: x, 1: y}) == pytest.approx(a.value({0: x}) * b.value({1: y}))

    def test_empty_product_is_one(self):
        assert float(multiply([]).table) == 1.0

    def test_cardinality_mismatch(self):
        with pytest.raises(ModelError):
            multiply([Factor.from_flat((0,), (2,), [1, 1]), Factor.from_flat((0,), (3,), [1, 1, 1])])

    def test_cap(self):
        fs = [factor((v,), [0.5, 0.5]) for v in range(5)]
        with pytest.raises(ResourceLimitError) as info:
            multiply(fs, cap=16)
        assert info.value.cells == 32 and info.value.cap == 16
        assert multiply(fs, cap=32).size == 32

    def test_env_cap(self, monkeypatch):
        monkeypatch.setenv("BNET_MEM_CELLS", "123")
        assert default_cell_cap() == 123
        monkeypatch.delenv("BNET_MEM_CELLS")
        assert default_cell_cap() == 2**26

    @settings(max_examples=200)
    @given(st.lists(small_factor(), min_size=1, max_size=4), st.randoms())
    def test_order_independent(self, fs, rnd):
        shuffled = list(fs)
        rnd.shuffle(shuffled)
        a, b = multiply(fs), multiply(shuffled)
        assert a.scope == b.scope
        np.testing.assert_allclose(a.table, b.table, rtol=1e-12, atol=1e-300)

    @settings(max_examples=100)
    @given(st.lists(small_factor(), min_size=1, max_size=3))
    def test_entries_are_products(self, fs):
        out = multiply(fs)
        for idx in np.ndindex(*out.cards):
            assignment = dict(zip(out.scope, idx))
            expected = np.prod([f.value(assignment) for f in fs])
            assert out.table[idx] == pytest.approx(expected, rel=1e-12, abs=1e-300)


class TestEliminate:
    def test_max_min_sum_mean(self):
        f = factor((0,), [0.2, 0.8])
        assert float(eliminate(f, 0, "max").table) == 0.8
        assert float(eliminate(f, 0, "min").table) == 0.2
        assert float(eliminate(f, 0, "sum").table) == pytest.approx(1.0)
        assert float(eliminate(f, 0, "mean").table) == pytest.approx(0.5)

    def test_sum_over_child_of_cpt_is_one(self):
        cpt = factor((0, 1), [0.3, 0.7, 0.9, 0.1])
        np.testing.assert_allclose(eliminate(cpt, 1, "sum").table, [1.0, 1.0])

    def test_several_variables(self):
        f = factor((0, 1, 2), np.arange(8) / 28)
        assert eliminate(f, (0, 2), "sum").scope == (1,)

    def test_errors(self):
        f = factor((0,), [0.2, 0.8])
        with pytest.raises(ModelError):
            eliminate(f, 3, "max")
        with pytest.raises(ValueError):
            eliminate(f, 0, "median")

    @settings(max_examples=200)
    @given(small_factor(), st.data())
    def test_operator_order(self, f, data):
        x = data.draw(st.sampled_from(f.scope))
        lo, mean, hi = (eliminate(f, x, op).table for op in ("min", "mean", "max"))
        total = eliminate(f, x, "sum").table
        assert np.all(lo <= mean + 1e-12) and np.all(mean <= hi + 1e-12)
        np.testing.assert_allclose(total, f.card_of(x) * mean, rtol=1e-12, atol=1e-300)


class TestRestrict:
    def test_scalar(self):
        assert float(restrict(factor((0,), [0.3, 0.7]), 0, 1).table) == 0.7

    def test_slice_matches_enumeration(self):
        cpt = factor((0, 1, 2), np.arange(8) / 10)
        r = restrict(cpt, 0, 0)
        for b, c in itertools.product(range(2), repeat=2):
            assert r.value({1: b, 2: c}) == cpt.value({0: 0, 1: b, 2: c})

    def test_errors(self):
        f = factor((0,), [0.3, 0.7])
        with pytest.raises(ModelError):
            restrict(f, 1, 0)
        with pytest.raises(ModelError):
            restrict(f, 0, 2)
        with pytest.raises(ModelError):
            restrict_many(f, {0: 5})

    @settings(max_examples=100)
    @given(small_factor(), st.data())
    def test_restrict_many_equals_chain(self, f, data):
        chosen = data.draw(st.sets(st.sampled_from(f.scope)))
        assignment = {v: data.draw(st.integers(0, f.card_of(v) - 1)) for v in chosen}
        assignment[99] = 0  # variables outside the scope are ignored
        expected = f
        for v in sorted(chosen):
            expected = restrict(expected, v, assignment[v])
        assert restrict_many(f, assignment) == expected

    def test_restrict_then_sum_commutes(self):
        f = factor((0, 1, 2), np.arange(1, 9) / 36)
        a = eliminate(restrict(f, 0, 1), 2, "sum")
        b = restrict(eliminate(f, 2, "sum"), 0, 1)
        np.testing.assert_allclose(a.table, b.table)

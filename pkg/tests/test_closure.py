"""Closure construction: golden systems, sizes, order invariance, divergence."""

from fractions import Fraction
from math import comb

import pytest

from sdemoments.closure import (
    ClosureBudget,
    DivergenceReport,
    MomentSystem,
    build_closure,
    build_closure_multi,
    check_closedness,
    system_rows,
)
from sdemoments.model import load_benchmark
from sdemoments.poly import Monomial


def F(v) -> Fraction:
    return Fraction(v)


# ---------------------------------------------------------------------------
# Golden 8-dimensional system for the 2-d environment-driven OU benchmark,
# target (0,2).  Derived independently by hand from the generator action and
# frozen here; every coefficient is checked exactly.
# ---------------------------------------------------------------------------

GOLDEN_ORDER = [
    (0, 2),
    (2, 1),
    (2, 0),
    (1, 1),
    (4, 0),
    (3, 0),
    (0, 1),
    (1, 0),
]

# row -> ({column index: coefficient}, constant)
GOLDEN_ROWS = {
    (0, 2): ({(0, 2): -4, (2, 1): 2, (2, 0): 1, (1, 1): 2}, 0),
    (2, 1): ({(2, 1): -4, (4, 0): 1, (3, 0): 1, (0, 1): 1}, 0),
    (2, 0): ({(2, 0): -2}, 1),
    (1, 1): ({(1, 1): -3, (2, 0): 1, (3, 0): 1}, 0),
    (4, 0): ({(4, 0): -4, (2, 0): 6}, 0),
    (3, 0): ({(3, 0): -3, (1, 0): 3}, 0),
    (0, 1): ({(0, 1): -2, (2, 0): 1, (1, 0): 1}, 0),
    (1, 0): ({(1, 0): -1}, 0),
}


class TestGoldenSystem:
    def build(self) -> MomentSystem:
        model = load_benchmark("ou-env")
        result = build_closure(model, Monomial((0, 2)))
        assert isinstance(result, MomentSystem)
        return result

    def test_index_set_and_order(self):
        ms = self.build()
        assert [m.exponents for m in ms.indices] == GOLDEN_ORDER

    def test_every_matrix_entry(self):
        ms = self.build()
        pos = {m.exponents: i for i, m in enumerate(ms.indices)}
        for row_key, (cols, constant) in GOLDEN_ROWS.items():
            r = pos[row_key]
            assert ms.vector_c[r] == F(constant), f"constant of row {row_key}"
            for col_key in pos:
                want = F(cols.get(col_key, 0))
                got = ms.matrix_a[r][pos[col_key]]
                assert got == want, f"A[{row_key}][{col_key}]"

    def test_initial_vector_is_zero(self):
        ms = self.build()
        assert all(v == 0 for v in ms.m0)

    def test_system_rows_matches_matrix(self):
        ms = self.build()
        for beta, combo, constant in system_rows(ms):
            want_cols, want_const = GOLDEN_ROWS[beta.exponents]
            assert constant == F(want_const)
            assert {m.exponents: c for m, c in combo.items()} == {
                k: F(v) for k, v in want_cols.items()
            }

    def test_seed_count(self):
        ms = self.build()
        assert ms.seed_count == 1
        assert ms.indices[0] == Monomial((0, 2))


# ---------------------------------------------------------------------------
# Closure sizes across the benchmark corpus
# ---------------------------------------------------------------------------

SIZE_TABLE = [
    ("ou-env", (0, 2), 8),
    ("ou-env", (0, 3), 15),
    ("ou-env", (0, 4), 24),
    ("ou-env", (0, 5), 35),
    ("ou-env", (0, 10), 120),
    ("gene", (1, 0, 0, 0, 1), 23),
    ("gene", (0, 0, 0, 0, 2), 85),
    ("gene", (1, 0, 0, 0, 2), 115),
    ("consensus", (1, 1), 3),
    ("vehicles", (0, 0, 2, 0), 13),
    ("oscillator", (0, 1, 2), 6),
    ("coupled3d", (2, 2, 0), 3),
]


@pytest.mark.parametrize("name,alpha,size", SIZE_TABLE)
def test_closure_sizes(name, alpha, size):
    model = load_benchmark(name)
    result = build_closure(model, Monomial(alpha))
    assert isinstance(result, MomentSystem)
    assert result.dimension == size


@pytest.mark.parametrize("name,alpha,size", SIZE_TABLE)
def test_closedness_invariant(name, alpha, size):
    model = load_benchmark(name)
    ms = build_closure(model, Monomial(alpha))
    assert check_closedness(model, ms)


@pytest.mark.parametrize("name,alpha,size", SIZE_TABLE)
def test_size_within_simplex_bound(name, alpha, size):
    # S sits inside the simplex of monomials with degree up to its own max.
    model = load_benchmark(name)
    ms = build_closure(model, Monomial(alpha))
    top = max(m.degree for m in ms.indices)
    assert ms.dimension <= comb(model.dimension + top, model.dimension)


def test_consensus_initial_vector():
    model = load_benchmark("consensus")  # starts at the point (1, 0)
    ms = build_closure(model, Monomial((1, 1)))
    values = {m.exponents: v for m, v in zip(ms.indices, ms.m0)}
    assert values == {(1, 1): 0, (2, 0): 1, (0, 2): 0}


# ---------------------------------------------------------------------------
# Worklist order: LIFO visits a different sequence but must close the same set
# ---------------------------------------------------------------------------


class TestWorklistOrder:
    @pytest.mark.parametrize(
        "name,alpha",
        [("ou-env", (0, 2)), ("gene", (1, 0, 0, 0, 1)), ("vehicles", (0, 0, 2, 0))],
    )
    def test_lifo_same_set_and_equivalent_system(self, name, alpha):
        model = load_benchmark(name)
        fifo = build_closure(model, Monomial(alpha), order="fifo")
        lifo = build_closure(model, Monomial(alpha), order="lifo")
        assert set(fifo.indices) == set(lifo.indices)
        # permutation-equivalence of (A, c, m0)
        perm = [lifo.indices.index(m) for m in fifo.indices]
        for r in range(fifo.dimension):
            assert fifo.vector_c[r] == lifo.vector_c[perm[r]]
            assert fifo.m0[r] == lifo.m0[perm[r]]
            for s in range(fifo.dimension):
                assert fifo.matrix_a[r][s] == lifo.matrix_a[perm[r]][perm[s]]

    def test_unknown_order_rejected(self):
        model = load_benchmark("ou-env")
        with pytest.raises(ValueError):
            build_closure(model, Monomial((0, 2)), order="random")

    def test_fifo_is_default(self):
        model = load_benchmark("ou-env")
        default = build_closure(model, Monomial((0, 2)))
        fifo = build_closure(model, Monomial((0, 2)), order="fifo")
        assert default.indices == fifo.indices


# ---------------------------------------------------------------------------
# Multi-seed closures
# ---------------------------------------------------------------------------


class TestMultiSeed:
    def test_duplicate_seeds_deduplicated(self):
        model = load_benchmark("ou-env")
        alpha = Monomial((0, 2))
        single = build_closure_multi(model, [alpha])
        double = build_closure_multi(model, [alpha, alpha])
        assert single.indices == double.indices
        assert single.seed_count == double.seed_count == 1

    def test_seeds_lead_the_index_list(self):
        model = load_benchmark("vehicles")
        seeds = [Monomial((1, 0, 0, 0)), Monomial((0, 0, 1, 0))]
        ms = build_closure_multi(model, seeds)
        assert list(ms.indices[:2]) == seeds
        assert ms.seed_count == 2

    def test_union_covers_single_closures(self):
        model = load_benchmark("vehicles")
        a = Monomial((1, 0, 0, 0))
        b = Monomial((0, 0, 1, 0))
        union = build_closure_multi(model, [a, b])
        only_a = build_closure(model, a)
        only_b = build_closure(model, b)
        assert set(only_a.indices) <= set(union.indices)
        assert set(only_b.indices) <= set(union.indices)

    def test_empty_seed_list_rejected(self):
        model = load_benchmark("ou-env")
        with pytest.raises(ValueError):
            build_closure_multi(model, [])

    def test_degree_zero_seed_rejected(self):
        model = load_benchmark("ou-env")
        with pytest.raises(ValueError):
            build_closure(model, Monomial((0, 0)))

    def test_wrong_dimension_seed_rejected(self):
        model = load_benchmark("ou-env")
        with pytest.raises(ValueError):
            build_closure(model, Monomial((1,)))


# ---------------------------------------------------------------------------
# Divergence reporting
# ---------------------------------------------------------------------------


class TestDivergence:
    def test_cubic_drift_diverges_with_witness(self):
        model = load_benchmark("double-well")
        report = build_closure(model, Monomial((2,)))
        assert isinstance(report, DivergenceReport)
        chain = [m.exponents[0] for m in report.witness_chain]
        assert chain[0] == 2
        assert chain[:3] == [2, 4, 6]
        # strictly increasing, stepping by exactly 2
        assert all(b - a == 2 for a, b in zip(chain, chain[1:]))

    def test_monomial_budget_trips(self):
        model = load_benchmark("double-well")
        report = build_closure(
            model, Monomial((2,)), budget=ClosureBudget(max_monomials=5)
        )
        assert isinstance(report, DivergenceReport)
        assert report.exceeded == "monomial-count"
        assert report.visited_count <= 5

    def test_degree_budget_trips(self):
        model = load_benchmark("double-well")
        report = build_closure(
            model, Monomial((2,)), budget=ClosureBudget(max_total_degree=50)
        )
        assert isinstance(report, DivergenceReport)
        assert report.exceeded == "degree"
        assert max(m.degree for m in report.witness_chain) > 50

    def test_describe_mentions_budget(self):
        model = load_benchmark("double-well")
        report = build_closure(model, Monomial((2,)))
        text = report.describe()
        assert "budget" in text
        assert "(2)" in text

    def test_budget_validation(self):
        with pytest.raises(ValueError):
            ClosureBudget(max_monomials=0)
        with pytest.raises(ValueError):
            ClosureBudget(max_total_degree=-1)

    def test_terminating_model_ignores_generous_budget(self):
        model = load_benchmark("ou-env")
        ms = build_closure(
            model, Monomial((0, 2)), budget=ClosureBudget(max_monomials=9)
        )
        assert isinstance(ms, MomentSystem)
        assert ms.dimension == 8


# ---------------------------------------------------------------------------
# Serialization and lookups
# ---------------------------------------------------------------------------


class TestSerialization:
    def test_json_dict_shape(self):
        model = load_benchmark("ou-env")
        ms = build_closure(model, Monomial((0, 2)))
        doc = ms.to_json_dict()
        assert doc["model"] == "ou-env"
        assert doc["indices"][0] == [0, 2]
        assert len(doc["matrix"]) == 8
        assert all(len(row) == 8 for row in doc["matrix"])
        assert doc["matrix"][0][0] == "-4"
        assert doc["constant"][2] == "1"

    def test_index_of(self):
        model = load_benchmark("ou-env")
        ms = build_closure(model, Monomial((0, 2)))
        assert ms.index_of(Monomial((0, 2))) == 0
        with pytest.raises(KeyError):
            ms.index_of(Monomial((9, 9)))

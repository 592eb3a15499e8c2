import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from xbarsim.patterns import (
    PatternKind,
    ReusePattern,
    all_explicit_patterns,
    enumerate_patterns,
    explicit_pattern,
    gen_continuous,
    gen_pyramid,
    gen_strided,
    reuse_sources,
    select_best,
    validate_pattern,
)


class TestGenerators:
    def test_strided_reference_layout(self):
        p = gen_strided(9, 4, sl=2, start=1)
        assert p.reuse_set == (1, 3, 5, 7)

    def test_strided_shifted_start(self):
        assert gen_strided(9, 4, sl=2, start=2).reuse_set == (2, 4, 6, 8)

    def test_strided_does_not_fit(self):
        assert gen_strided(9, 4, sl=4, start=1) is None
        assert gen_strided(9, 4, sl=1, start=1) is None  # stride must be >= 2

    def test_continuous_reference_layout(self):
        assert gen_continuous(9, 4, start=1).reuse_set == (1, 2, 3, 4)

    def test_continuous_last_window(self):
        assert gen_continuous(9, 4, start=5).reuse_set == (5, 6, 7, 8)
        assert gen_continuous(9, 4, start=6) is None

    def test_pyramid_reference_layout(self):
        p = gen_pyramid(9, 4, sl=2, n_cont=2, start=1)
        assert p.reuse_set == (1, 3, 4, 6)

    def test_pyramid_degenerates_to_continuous(self):
        p = gen_pyramid(12, 4, sl=2, n_cont=4, start=1)
        assert p.reuse_set == gen_continuous(12, 4, start=1).reuse_set

    def test_pyramid_degenerates_to_strided(self):
        p = gen_pyramid(12, 4, sl=2, n_cont=0, start=1)
        assert p.reuse_set == gen_strided(12, 4, sl=2, start=1).reuse_set

    def test_zero_start_rejected(self):
        assert gen_strided(9, 3, sl=2, start=0) is None
        assert gen_continuous(9, 3, start=0) is None


class TestValidation:
    def test_encoder_zero_never_reuses(self):
        with pytest.raises(ValueError):
            explicit_pattern(8, (0, 2))

    def test_out_of_range(self):
        with pytest.raises(ValueError):
            explicit_pattern(8, (3, 8))

    def test_family_structure_enforced(self):
        with pytest.raises(ValueError):
            ReusePattern(PatternKind.STRIDED, 9, (1, 3, 6), sl=2, start=1)
        with pytest.raises(ValueError):
            ReusePattern(PatternKind.CONTINUOUS, 9, (1, 3), start=1)

    def test_generated_patterns_all_validate(self):
        for p in enumerate_patterns(12, 5):
            validate_pattern(p)


class TestEnumeration:
    def test_uniform_family_far_below_explicit(self):
        patterns = enumerate_patterns(12, 5)
        assert len(patterns) < math.comb(11, 5)  # 462 explicit possibilities
        assert len(patterns) < 100

    def test_subset_of_explicit_brute_force(self):
        # Any 2-element set is itself strided, so strictness needs k >= 3.
        for n, k in [(6, 3), (9, 4), (12, 5), (12, 6)]:
            explicit = {p.reuse_set for p in all_explicit_patterns(n, k)}
            uniform = {p.reuse_set for p in enumerate_patterns(n, k)}
            assert uniform <= explicit
            assert len(uniform) < len(explicit)
        assert {p.reuse_set for p in enumerate_patterns(6, 2)} <= {
            p.reuse_set for p in all_explicit_patterns(6, 2)
        }

    def test_deduplicated(self):
        patterns = enumerate_patterns(9, 4)
        sets = [p.reuse_set for p in patterns]
        assert len(sets) == len(set(sets))

    def test_max_reuse_only_continuous_survives(self):
        patterns = enumerate_patterns(9, 8)
        assert len(patterns) == 1
        assert patterns[0].reuse_set == tuple(range(1, 9))

    def test_family_filter(self):
        only_strided = enumerate_patterns(12, 4, families=[PatternKind.STRIDED])
        assert all(p.kind is PatternKind.STRIDED for p in only_strided)

    def test_invalid_args(self):
        with pytest.raises(ValueError):
            enumerate_patterns(8, 0)
        with pytest.raises(ValueError):
            enumerate_patterns(8, 8)


@given(n=st.integers(3, 12), data=st.data())
@settings(max_examples=40, deadline=None)
def test_enumeration_cardinality_property(n, data):
    k = data.draw(st.integers(1, n - 1))
    patterns = enumerate_patterns(n, k)
    assert len(patterns) <= math.comb(n - 1, k)
    for p in patterns:
        assert len(p.reuse_set) == k
        assert 0 not in p.reuse_set
        assert p.reuse_set[-1] < n


class TestSources:
    def test_skip_pattern(self):
        assert reuse_sources({1, 3}) == {1: 0, 3: 2}

    def test_continuous_run_shares_source(self):
        assert reuse_sources({1, 2, 3}) == {1: 0, 2: 0, 3: 0}

    def test_zero_rejected(self):
        with pytest.raises(ValueError):
            reuse_sources({0})


class TestSelectBest:
    def test_single_candidate(self):
        p = explicit_pattern(8, (2, 4))
        assert select_best([p], lambda _: 1.0) is p

    def test_constant_scorer_lexicographic_tie_break(self):
        candidates = [
            explicit_pattern(8, (2, 5)),
            explicit_pattern(8, (1, 6)),
            explicit_pattern(8, (1, 4)),
        ]
        best = select_best(candidates, lambda _: 0.0)
        assert best.reuse_set == (1, 4)

    def test_empty_candidates(self):
        with pytest.raises(ValueError):
            select_best([], lambda _: 0.0)

    def test_argmin(self):
        candidates = enumerate_patterns(9, 3)
        scores = {p.reuse_set: i for i, p in enumerate(reversed(candidates))}
        best = select_best(candidates, lambda p: scores[p.reuse_set])
        assert best is candidates[-1]

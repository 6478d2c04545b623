from fractions import Fraction

import pytest

import shiftdecomp as sd
from shiftdecomp import algebra, embedding
from shiftdecomp.embedding import (
    BlowupSpec,
    EntropySetQuery,
    blow_up,
    build_Bn,
    census_sandwich,
    embedding_preconditions,
    membership,
    subshift_between_search,
)
from shiftdecomp.errors import (
    EntropyNotSeparated,
    NotFound,
    NotIrreducible,
    NotMixingTarget,
    OrbitNotFound,
    ParseError,
    RealizationUnavailable,
    WordNotInLanguage,
)

EQ = algebra.EQ

FULL2 = sd.sft("01", [])
FULL3 = sd.sft("012", [])
FULL4 = sd.sft("0123", [])
GOLDEN = sd.sft("01", [("1", "1")])
NO111 = sd.sft("01", [("1", "1", "1")])
POINT0 = sd.sft("01", [("1",)])
EVEN = sd.sofic(
    ("a", "b"), (("a", "a", "1"), ("a", "b", "0"), ("b", "a", "0"))
)

SQRT2 = algebra.AlgebraicReal((-2, 0, 1), Fraction(1), Fraction(2))
PLASTIC = algebra.AlgebraicReal((-1, -1, 0, 1), Fraction(1), Fraction(3, 2))
NOT_WEAK_PERRON = algebra.AlgebraicReal(
    (-4, 2, 1), Fraction(1), Fraction(3, 2)
)


def log_of(base_value):
    return algebra.entropy_from_base(base_value)


def expected_counts(shift, orbit, multipliers, horizon):
    """The blown-up census predicted from the input census alone.

    Least-period points come in whole orbits, so q_n loses the one
    designated orbit and regains n per unit multiplier, and each
    multiplier M > 1 contributes one fresh orbit of n * M points at
    period n * M.
    """
    n = len(orbit)
    counts = dict(algebra.q_census(shift, horizon).counts)
    units = sum(1 for m in multipliers if m == 1)
    counts[n] = counts.get(n, 0) - n + n * units
    for m in multipliers:
        if m > 1:
            counts[n * m] = counts.get(n * m, 0) + n * m
    return {k: v for k, v in counts.items() if k <= horizon}


def census_dict(shift, horizon):
    census = algebra.q_census(shift, horizon)
    return {k: census.q(k) for k in range(1, horizon + 1) if census.q(k)}


# ---------------------------------------------------------------------------
# blow_up
# ---------------------------------------------------------------------------


def test_blow_up_two_units_adds_one_fixed_point():
    result = blow_up(FULL2, BlowupSpec(("0",), (1, 1)))
    assert isinstance(result, sd.EdgeShift)
    assert census_dict(result, 4) == {1: 3, 2: 2, 3: 6, 4: 12}


def test_blow_up_doubling_moves_a_fixed_point_to_period_two():
    result = blow_up(FULL2, BlowupSpec(("0",), (2,)))
    # One fixed point is replaced by one orbit of two period-2 points;
    # the period-2 census grows by 2 because least-period-2 points only
    # ever come in whole orbits of size 2.
    assert census_dict(result, 4) == {1: 1, 2: 4, 3: 6, 4: 12}


def test_blow_up_single_unit_is_census_neutral():
    result = blow_up(GOLDEN, BlowupSpec(("0",), (1,)))
    assert census_dict(result, 8) == census_dict(GOLDEN, 8)


def test_blow_up_matches_predicted_counts_on_longer_orbits():
    for shift, orbit, multipliers in [
        (GOLDEN, ("0", "1"), (3,)),
        (GOLDEN, ("0", "0", "1"), (2, 2)),
        (NO111, ("0", "1"), (1, 2, 2)),
        (FULL2, ("0", "0", "1"), (4,)),
    ]:
        horizon = len(orbit) * max(multipliers) + 2
        result = blow_up(shift, BlowupSpec(orbit, multipliers))
        assert census_dict(result, horizon) == {
            k: v
            for k, v in expected_counts(
                shift, orbit, multipliers, horizon
            ).items()
            if v
        }


def test_blow_up_accepts_edge_shift_input():
    base = sd.edge_shift([[2]])
    orbit = (sd.words(base, 1)[0][0],)
    result = blow_up(base, BlowupSpec(orbit, (2,)))
    assert census_dict(result, 2) == {1: 1, 2: 4}


def test_blow_up_preserves_structure_and_entropy():
    result = blow_up(GOLDEN, BlowupSpec(("0",), (2,)))
    facts = sd.structure(result)
    assert facts.irreducible and facts.mixing
    assert (
        algebra.compare(
            algebra.entropy(result).base, algebra.entropy(GOLDEN).base
        )
        == EQ
    )


def test_blow_up_multiplier_order_is_irrelevant():
    forward = blow_up(NO111, BlowupSpec(("0", "1"), (1, 2)))
    backward = blow_up(NO111, BlowupSpec(("0", "1"), (2, 1)))
    assert census_dict(forward, 6) == census_dict(backward, 6)


def test_blow_up_grows_block_length_until_entries_cover_multipliers():
    # The golden mean shift has a single shortest approach to the fixed
    # point, so three multipliers force a longer block window.
    result = blow_up(GOLDEN, BlowupSpec(("0",), (1, 1, 1)))
    assert census_dict(result, 4) == {1: 3, 2: 2, 3: 3, 4: 4}


def test_blow_up_input_validation():
    with pytest.raises(ParseError):
        blow_up(EVEN, BlowupSpec(("0",), (2,)))
    with pytest.raises(ParseError):
        blow_up(FULL2, BlowupSpec((), (2,)))
    with pytest.raises(ParseError):
        blow_up(FULL2, BlowupSpec(("0",), ()))
    with pytest.raises(ParseError):
        blow_up(FULL2, BlowupSpec(("0",), (0,)))


def test_blow_up_orbit_validation():
    with pytest.raises(OrbitNotFound):
        blow_up(GOLDEN, BlowupSpec(("1",), (2,)))
    with pytest.raises(OrbitNotFound):
        blow_up(FULL2, BlowupSpec(("0", "0"), (2,)))
    with pytest.raises(OrbitNotFound):
        blow_up(FULL2, BlowupSpec(("2",), (2,)))


def test_blow_up_needs_irreducible_positive_entropy():
    one_way = sd.sft("01", [("0", "1")])
    with pytest.raises(NotIrreducible):
        blow_up(one_way, BlowupSpec(("0",), (2,)))
    with pytest.raises(EntropyNotSeparated):
        blow_up(POINT0, BlowupSpec(("0",), (2,)))


# ---------------------------------------------------------------------------
# build_Bn
# ---------------------------------------------------------------------------


def test_build_Bn_doubled_full_shift():
    result = build_Bn([[2]], 2)
    assert result.matrix == ((0, 2), (2, 0))
    facts = sd.structure(result)
    assert facts.irreducible and facts.period == 2
    assert (
        algebra.compare(algebra.entropy(result).base, algebra.alg_rational(2))
        == EQ
    )


def test_build_Bn_golden_three_stages():
    result = build_Bn([[1, 1], [1, 0]], 3)
    assert len(result.matrix) == 6
    assert sd.structure(result).period == 3
    assert (
        algebra.compare(
            algebra.entropy(result).base, algebra.entropy(GOLDEN).base
        )
        == EQ
    )


def test_build_Bn_single_stage_returns_input():
    assert build_Bn([[1, 1], [1, 0]], 1) == sd.edge_shift([[1, 1], [1, 0]])


def test_build_Bn_rejects_bad_inputs():
    with pytest.raises(ParseError):
        build_Bn([[2]], 0)
    with pytest.raises(NotIrreducible):
        build_Bn([[1, 1], [0, 1]], 2)
    with pytest.raises(NotIrreducible):
        build_Bn([[0]], 2)


# ---------------------------------------------------------------------------
# embedding_preconditions
# ---------------------------------------------------------------------------


def test_preconditions_golden_into_full2():
    report = embedding_preconditions(GOLDEN, FULL2)
    assert report.entropy_ok
    assert report.census_ok
    assert report.witnesses == ()
    assert report.census_horizon >= 1
    assert (
        algebra.census_dominated_below(GOLDEN, FULL2, report.census_horizon)
        is None
    )


def test_preconditions_fail_on_entropy():
    assert embedding_preconditions(FULL2, GOLDEN) == (
        embedding.EmbedPreconditionReport(False, 0, False, ())
    )
    equal_entropy = build_Bn([[2]], 2)
    report = embedding_preconditions(equal_entropy, FULL2)
    assert not report.entropy_ok


def test_preconditions_report_census_witnesses():
    period_two_golden = build_Bn([[1, 1], [1, 0]], 2)
    report = embedding_preconditions(period_two_golden, FULL2)
    assert report.entropy_ok
    assert not report.census_ok
    assert 2 in report.witnesses


def test_preconditions_need_mixing_finite_type_target():
    with pytest.raises(NotMixingTarget):
        embedding_preconditions(POINT0, EVEN)
    with pytest.raises(NotMixingTarget):
        embedding_preconditions(POINT0, build_Bn([[2]], 2))


# ---------------------------------------------------------------------------
# membership
# ---------------------------------------------------------------------------


def test_membership_T0_uses_divisor_exponents():
    low = log_of(algebra.ONE)
    high = log_of(algebra.alg_rational(2))
    inside = EntropySetQuery("T0", log_of(SQRT2), low, high, p=2, q=1)
    assert membership(inside) == (True, 2)
    no_room = EntropySetQuery("T0", log_of(SQRT2), low, high, p=1, q=1)
    assert membership(no_room) == (False, None)
    capped = EntropySetQuery(
        "T0", log_of(SQRT2), low, high, p=2, q=1, r_bound=1
    )
    assert membership(capped) == (False, None)


def test_membership_T0_endpoint_flags():
    low = log_of(algebra.alg_rational(2))
    high = log_of(algebra.alg_rational(3))
    at_left = EntropySetQuery("T0", low, low, high, p=1, q=1)
    assert membership(at_left) == (True, 1)
    nonwandering = EntropySetQuery(
        "T0", low, low, high, p=1, q=1, nonwandering=True
    )
    assert membership(nonwandering) == (False, None)


def test_membership_T_prime_interval():
    low = log_of(algebra.ONE)
    high = log_of(algebra.alg_rational(2))
    golden_log = algebra.entropy(GOLDEN)
    assert membership(EntropySetQuery("T_prime", golden_log, low, high)) == (
        True,
        None,
    )
    assert membership(EntropySetQuery("T_prime", low, low, high)) == (
        False,
        None,
    )
    assert membership(
        EntropySetQuery("T_prime", low, low, high, X_irreducible=True)
    ) == (True, None)
    above = EntropySetQuery("T_prime", log_of(algebra.alg_rational(3)), low, high)
    assert membership(above) == (False, None)


def test_membership_T1_prime_weak_perron():
    low = log_of(algebra.ONE)
    high = log_of(algebra.alg_rational(2))
    assert membership(
        EntropySetQuery("T1_prime", log_of(SQRT2), low, high)
    ) == (True, 2)
    rejected = EntropySetQuery("T1_prime", log_of(NOT_WEAK_PERRON), low, high)
    assert membership(rejected) == (False, None)


def test_membership_validates_queries():
    low = log_of(algebra.ONE)
    high = log_of(algebra.alg_rational(2))
    with pytest.raises(ParseError):
        membership(EntropySetQuery("T9", low, low, high))
    with pytest.raises(ParseError):
        membership(EntropySetQuery("T0", low, low, high, p=0))


# ---------------------------------------------------------------------------
# subshift_between_search
# ---------------------------------------------------------------------------


def test_between_search_finds_the_golden_mean_restriction():
    found = subshift_between_search(
        POINT0, FULL2, algebra.entropy(GOLDEN), Fraction(1, 1000), "sft"
    )
    assert found == GOLDEN


def test_between_search_returns_the_big_shift_at_its_own_entropy():
    found = subshift_between_search(
        POINT0, FULL2, algebra.entropy(FULL2), Fraction(1, 100), "sft"
    )
    assert found == FULL2


def test_between_search_even_shift_has_no_finite_type_middle():
    with pytest.raises(NotFound) as caught:
        subshift_between_search(
            POINT0, EVEN, Fraction(2, 5), Fraction(1, 20), "sft"
        )
    assert caught.value.searched_bound == 8


def test_between_search_accepts_sofic_middle_at_matching_entropy():
    found = subshift_between_search(
        POINT0, EVEN, algebra.entropy(EVEN), Fraction(1, 100), "sofic"
    )
    assert found == EVEN


def test_between_search_validates_inputs():
    with pytest.raises(WordNotInLanguage):
        subshift_between_search(
            FULL2, GOLDEN, Fraction(1, 10), Fraction(1, 100), "none"
        )
    with pytest.raises(EntropyNotSeparated):
        subshift_between_search(
            POINT0, FULL2, Fraction(0), Fraction(1, 100), "none"
        )
    with pytest.raises(EntropyNotSeparated):
        subshift_between_search(
            POINT0, FULL2, Fraction(1), Fraction(1, 100), "none"
        )
    with pytest.raises(ParseError):
        subshift_between_search(
            POINT0, FULL2, Fraction(1, 2), Fraction(1, 100), "smooth"
        )
    with pytest.raises(ParseError):
        subshift_between_search(
            POINT0, FULL2, Fraction(1, 2), Fraction(-1, 100), "none"
        )


# ---------------------------------------------------------------------------
# census_sandwich
# ---------------------------------------------------------------------------


def test_sandwich_builds_golden_witness_without_adjustment():
    witness, (low_report, high_report) = census_sandwich(
        POINT0, FULL2, algebra.entropy(GOLDEN)
    )
    assert witness.matrix == ((1, 1), (1, 0))
    assert low_report.census_ok and high_report.census_ok
    assert low_report.entropy_ok and high_report.entropy_ok


def test_sandwich_log2_inside_full3():
    witness, (low_report, high_report) = census_sandwich(
        POINT0, FULL3, log_of(algebra.alg_rational(2))
    )
    assert witness.matrix == ((2,),)
    assert low_report.census_ok and high_report.census_ok
    horizon = max(low_report.census_horizon, high_report.census_horizon)
    if horizon >= 1:
        assert algebra.census_dominated_below(POINT0, witness, horizon) is None
        assert algebra.census_dominated_below(witness, FULL3, horizon) is None


def test_sandwich_raises_deficient_fixed_point_count():
    three_points = sd.sft(
        "012", [(a, b) for a in "012" for b in "012" if a != b]
    )
    witness, (low_report, high_report) = census_sandwich(
        three_points, FULL4, log_of(algebra.alg_rational(2))
    )
    assert algebra.q_census(witness, 1).q(1) == 3
    assert low_report.census_ok and high_report.census_ok


def test_sandwich_lowers_excess_fixed_points_past_the_crossover():
    loops4 = [
        [1, 1, 0, 0],
        [0, 1, 1, 0],
        [0, 0, 1, 1],
        [1, 0, 0, 1],
    ]
    witness, (low_report, high_report) = census_sandwich(
        POINT0,
        FULL3,
        log_of(algebra.alg_rational(2)),
        realization=loops4,
    )
    assert algebra.q_census(witness, 1).q(1) == 3
    assert low_report.census_ok and high_report.census_ok


def test_sandwich_rejects_unrealizable_targets():
    with pytest.raises(RealizationUnavailable):
        census_sandwich(POINT0, FULL2, log_of(SQRT2))
    with pytest.raises(RealizationUnavailable):
        census_sandwich(POINT0, FULL2, log_of(PLASTIC))
    with pytest.raises(RealizationUnavailable):
        census_sandwich(POINT0, FULL2, Fraction(1, 2))


def test_sandwich_rejects_bad_windows_and_targets():
    with pytest.raises(NotMixingTarget):
        census_sandwich(POINT0, EVEN, algebra.entropy(GOLDEN))
    with pytest.raises(EntropyNotSeparated):
        census_sandwich(POINT0, FULL2, algebra.entropy(FULL2))
    with pytest.raises(EntropyNotSeparated):
        census_sandwich(FULL2, FULL3, log_of(algebra.alg_rational(2)))


def test_sandwich_validates_supplied_realizations():
    log2 = log_of(algebra.alg_rational(2))
    with pytest.raises(RealizationUnavailable):
        census_sandwich(POINT0, FULL3, log2, realization=[[3]])
    with pytest.raises(RealizationUnavailable):
        census_sandwich(POINT0, FULL3, log2, realization=[[0, 2], [2, 0]])

import math
from fractions import Fraction

import pytest

import shiftdecomp as sd
from shiftdecomp import algebra, codes, factor
from shiftdecomp.errors import (
    EntropyNotSeparated,
    Mismatch,
    ParseError,
    SearchExhausted,
    WordNotInLanguage,
)
from shiftdecomp.shiftspace import (
    alphabet_of,
    canonical_presentation,
    contains,
    higher_block,
    words,
)

FULL2 = sd.sft("01", [])
GOLDEN = sd.sft("01", [("1", "1")])
POINT = sd.sft("z", [])
EQ = algebra.EQ


def const_code(domain):
    """1-block code collapsing a shift onto the fixed point of 'z'."""
    table = {(s,): "z" for s in alphabet_of(domain)}
    return codes.block_map(0, 0, domain, table)


def wide_const_code(domain):
    """2-block collapse onto 'z', exercising the width-reduction stage."""
    table = {w: "z" for w in words(domain, 2)}
    return codes.block_map(0, 1, domain, table)


def marked_triple():
    """Normalization of the golden mean shift inside the full 2-shift
    under the constant collapse, which needs the marking conjugacy."""
    return factor.normalize(FULL2, GOLDEN, const_code(FULL2))


def entropy_nats(shift):
    return math.log(algebra.entropy(shift).approx)


def two_pow_entropy(exponent):
    return algebra.entropy_from_base(algebra.two_pow(Fraction(exponent)))


def assert_stage_certificates(certs):
    """Every stage certificate must carry only passing checks."""
    assert certs
    for cert in certs:
        assert cert["tables_equal"] is True
        assert cert["stage_onto"] is True
        assert cert["window_count"] >= 1


def test_gap_shift_single_gap_is_golden():
    shift = factor.gap_shift([0, 1])
    assert shift.forbidden == (("1", "1"),)
    assert math.isclose(entropy_nats(shift), 0.4812, abs_tol=1e-4)


def test_gap_shift_sparse_runs():
    shift = factor.gap_shift([0, 10])
    assert len(shift.forbidden) == 10
    assert math.isclose(entropy_nats(shift), 0.1691, abs_tol=1e-4)


def test_gap_shift_merges_forbidden_words():
    shift = factor.gap_shift([0, 1, 4])
    assert shift.forbidden == (
        ("0", "1", "1", "0"),
        ("0", "1", "1", "1", "0"),
        ("1", "1", "1", "1", "1"),
    )
    assert math.isclose(algebra.entropy(shift).approx, 1.7049, abs_tol=1e-4)


def test_gap_shift_rejects_negative_runs():
    with pytest.raises(ParseError):
        factor.gap_shift([-1, 2])


def test_find_sub_sft_hits_golden_window():
    found = factor.find_sub_sft(
        FULL2,
        algebra.entropy(GOLDEN),
        algebra.entropy(POINT),
        algebra.Tol(Fraction(1, 100), Fraction(0)),
    )
    assert found.forbidden == (("1", "1"),)


def test_find_sub_sft_reaches_sparse_run_shifts():
    found = factor.find_sub_sft(
        FULL2,
        two_pow_entropy(Fraction(1, 5)),
        algebra.entropy(POINT),
        algebra.Tol(Fraction(0), Fraction(1, 20)),
    )
    assert len(found.forbidden) == 10
    assert math.isclose(entropy_nats(found), 0.1691, abs_tol=1e-4)


def test_find_sub_sft_respects_entropy_floor():
    found = factor.find_sub_sft(
        FULL2,
        two_pow_entropy(Fraction(3, 4)),
        algebra.entropy(GOLDEN),
        algebra.Tol(Fraction(0), Fraction(1, 20)),
    )
    assert found.forbidden == (
        ("0", "1", "1", "0"),
        ("0", "1", "1", "1", "0"),
        ("1", "1", "1", "1", "1"),
    )
    assert math.isclose(entropy_nats(found), 0.5335, abs_tol=1e-4)


def test_find_sub_sft_needs_separated_window():
    with pytest.raises(EntropyNotSeparated):
        factor.find_sub_sft(
            GOLDEN,
            algebra.entropy(POINT),
            algebra.entropy(GOLDEN),
            algebra.Tol(Fraction(1, 10), Fraction(0)),
        )


def test_find_sub_sft_exhaustion_reports_closest():
    with pytest.raises(SearchExhausted) as err:
        factor.find_sub_sft(
            GOLDEN,
            two_pow_entropy(Fraction(3, 10)),
            algebra.entropy(POINT),
            algebra.Tol(Fraction(0), Fraction(0)),
            max_gap=4,
            max_word=3,
        )
    closest = err.value.closest
    assert closest is not None
    assert math.isclose(closest.approx, 1.3247, abs_tol=1e-4)


def test_sub_sft_candidates_streams_window_hits():
    stream = factor.sub_sft_candidates(
        GOLDEN,
        two_pow_entropy(Fraction(3, 10)),
        algebra.entropy(POINT),
        algebra.Tol(Fraction(0), Fraction(1, 10)),
    )
    first = next(stream)
    assert contains(first, GOLDEN) is None
    assert first.forbidden == (
        ("0", "0", "0", "0", "0"),
        ("0", "0", "0", "0", "1"),
        ("0", "0", "0", "1", "0"),
        ("0", "0", "1", "0", "0"),
        ("1", "1"),
    )


def test_normalize_marks_subshift_windows():
    t = marked_triple()
    assert sorted(alphabet_of(t.X)) == ["1", "[0.0]", "[0.1]", "[1.0]"]
    assert t.renaming == {
        "[0.0]": ("0", "0"),
        "[0.1]": ("0", "1"),
        "[1.0]": ("1", "0"),
    }
    assert [s.name for s in t.recode] == ["mark"]
    assert sorted(alphabet_of(t.Z)) == ["[0.0]", "[0.1]", "[1.0]"]


def test_normalize_conditions_all_hold():
    conditions = factor.normalized_conditions(marked_triple())
    assert conditions == {
        "one_block": True,
        "one_step": True,
        "alphabets_disjoint": True,
        "pairs_closed": True,
    }


def test_normalize_recodes_by_conjugacy():
    t = marked_triple()
    for k in range(1, 6):
        assert len(words(t.X, k)) == len(words(FULL2, k + 1))


def test_normalize_keeps_ready_input_unchanged():
    ambient = sd.sft("ab", [])
    sub = sd.sft("ab", [("a",)])
    phi = codes.block_map(0, 0, ambient, {("a",): "y", ("b",): "x"})
    t = factor.normalize(ambient, sub, phi)
    assert t.recode == ()
    assert t.X == ambient
    assert t.renaming == {"b": ("b",)}


def test_normalize_reduces_wide_codes_first():
    t = factor.normalize(FULL2, GOLDEN, wide_const_code(FULL2))
    assert [s.name for s in t.recode] == ["block"]
    assert t.phi.window == 1
    assert all(factor.normalized_conditions(t).values())


def test_normalize_requires_matching_domain():
    with pytest.raises(ParseError):
        factor.normalize(GOLDEN, GOLDEN, const_code(FULL2))


def test_normalize_requires_contained_subshift():
    with pytest.raises(WordNotInLanguage) as err:
        factor.normalize(GOLDEN, FULL2, const_code(GOLDEN))
    assert "1.1" in str(err.value)


def test_build_theta_fixes_subshift_and_projects_rest():
    t = marked_triple()
    theta = factor.build_theta(t)
    assert theta.window == 1
    assert theta.table[("1",)] == "z"
    assert theta.table[("[0.0]",)] == "[0.0]"
    image_entropy = algebra.entropy(codes.image(theta))
    assert algebra.compare(image_entropy.base, algebra.alg_rational(2)) == EQ


def test_build_alpha_erodes_boundary_symbols():
    t = marked_triple()
    alpha = factor.build_alpha(t)
    assert alpha.window == 3
    assert len(alpha.table) == 4 ** 3
    assert alpha.table[("z", "[0.0]", "z")] == "z"
    assert alpha.table[("[0.0]", "[0.0]", "[0.0]")] == "[0.0]"


def test_hatZ_envelopes_squeeze_down():
    t = marked_triple()
    subshift_entropy = entropy_nats(t.Z)
    assert math.isclose(subshift_entropy, 0.4812, abs_tol=1e-4)
    values = [entropy_nats(factor.hatZ(t, n)) for n in range(3)]
    expected = [1.1248, 0.7752, 0.6358]
    for got, want in zip(values, expected):
        assert math.isclose(got, want, abs_tol=1e-3)
    assert values[0] > values[1] > values[2] > subshift_entropy


def test_hatZ_forbids_short_interior_stretches():
    t = marked_triple()
    probe = ("[0.0]", "z", "[0.0]")
    assert probe in set(words(factor.hatZ(t, 0), 3))
    assert probe not in set(words(factor.hatZ(t, 1), 3))


def test_hatZ_contains_the_subshift():
    t = marked_triple()
    assert contains(t.Z, factor.hatZ(t, 1)) is None


def test_hatZ_rejects_negative_rounds():
    with pytest.raises(ParseError):
        factor.hatZ(marked_triple(), -1)


def test_split_sofic_absorption_run():
    report = factor.split_sofic(
        const_code(GOLDEN),
        POINT,
        two_pow_entropy(Fraction(3, 10)),
        algebra.Tol(Fraction(0), Fraction(2, 5)),
    )
    assert [s.name for s in report.stages] == [
        "mark",
        "keep-or-project",
        "absorb",
        "absorb",
        "absorb",
    ]
    assert report.certificates["kind"] == "absorption"
    assert report.certificates["entropy_within_target"] is True
    assert report.certificates["onto_target"] is True
    assert_stage_certificates(report.certificates["stages"])
    assert math.isclose(
        math.log(report.intermediate_entropy.approx), 0.4186, abs_tol=1e-4
    )
    trail = [entry["entropy"] for entry in report.trace]
    assert len(trail) == 4
    assert math.isclose(trail[0], 0.4812, abs_tol=1e-4)
    assert math.isclose(trail[-1], 0.4186, abs_tol=1e-4)
    assert all(a >= b - 1e-12 for a, b in zip(trail, trail[1:]))


def test_overlap_partition_golden_blocks():
    part = factor.overlap_partition(higher_block(GOLDEN, 4), 4)
    assert len(part.classes) == 8
    assert part.classes[-1] == ("0.0.0.0",)
    assert [c[0] for c in part.classes[:-1]] == [
        "0.0.0.1",
        "0.0.1.0",
        "0.1.0.0",
        "0.1.0.1",
        "1.0.0.0",
        "1.0.0.1",
        "1.0.1.0",
    ]


def test_overlap_partition_full_shift_blocks():
    part = factor.overlap_partition(higher_block(FULL2, 4), 4)
    assert len(part.classes) == 15
    assert part.classes[-1] == ("0.0.0.0", "1.1.1.1")


def test_overlap_partition_periodic_blocks_are_heavy():
    part = factor.overlap_partition(higher_block(GOLDEN, 8), 8)
    assert len(part.classes) == 53
    assert part.classes[-1] == (
        "0.0.0.0.0.0.0.0",
        "0.1.0.1.0.1.0.1",
        "1.0.1.0.1.0.1.0",
    )


def test_overlap_partition_length_one_blocks():
    part = factor.overlap_partition(higher_block(GOLDEN, 1), 1)
    assert part.classes == (("0",), ("1",), ())


def test_overlap_partition_rejects_short_blocks():
    with pytest.raises(ParseError):
        factor.overlap_partition(higher_block(GOLDEN, 4), 0)


def test_build_phi_m_window_filter_table():
    part = factor.overlap_partition(higher_block(FULL2, 4), 4)
    filtered = factor.build_phi_m(part, const_code(FULL2), 1)
    assert filtered.window == 3
    assert len(filtered.table) == 64
    heavy = "0.0.0.0"
    assert filtered.table[(heavy, heavy, heavy)] == heavy
    assert filtered.table[("0.0.0.1", "0.0.1.0", "0.1.0.0")] == "z"
    assert filtered.table[("1.0.0.0", "0.0.0.1", "0.0.1.0")] == "0.0.0.1"


def test_build_phi_m_rejects_zero_radius():
    part = factor.overlap_partition(higher_block(FULL2, 4), 4)
    with pytest.raises(ParseError):
        factor.build_phi_m(part, const_code(FULL2), 0)


def test_split_sft_full_shift_collapse():
    report = factor.split_sft(
        const_code(FULL2), POINT, algebra.Tol(Fraction(0), Fraction(4, 5))
    )
    certs = report.certificates
    assert certs["kind"] == "window-filter"
    assert certs["block_length"] == 4
    assert certs["window_radius"] == 4
    assert certs["classes"] == 15
    assert certs["step"] == {"claimed": 121, "verified": True}
    assert certs["entropy_within_target"] is True
    assert certs["onto_target"] is True
    assert certs["family_bound_holds"] is True
    assert_stage_certificates(certs["stages"])
    assert [s.name for s in report.stages] == ["overlap-blocks", "window-filter"]
    assert math.isclose(
        math.log(report.intermediate_entropy.approx), 0.5485, abs_tol=1e-4
    )
    sweep = [(entry["m"], entry["entropy"]) for entry in report.trace]
    assert [m for m, _ in sweep] == [1, 2, 3, 4]
    values = [h for _, h in sweep]
    assert all(a >= b for a, b in zip(values, values[1:]))


def test_split_sft_trivial_tolerance_stays_exact():
    report = factor.split_sft(
        const_code(GOLDEN), POINT, algebra.Tol(Fraction(0), Fraction(1))
    )
    certs = report.certificates
    assert certs["block_length"] == 4
    assert certs["window_radius"] == 1
    assert certs["classes"] == 8
    assert certs["step"] == {"claimed": 17, "verified": True}
    assert (
        algebra.compare_scaled(
            report.intermediate_entropy, algebra.entropy(GOLDEN)
        )
        == EQ
    )


def test_split_sft_reduces_wide_codes():
    report = factor.split_sft(
        wide_const_code(GOLDEN), POINT, algebra.Tol(Fraction(0), Fraction(1))
    )
    certs = report.certificates
    assert [s.name for s in report.stages] == [
        "block",
        "overlap-blocks",
        "window-filter",
    ]
    assert certs["block_length"] == 4
    assert certs["window_radius"] == 1
    assert certs["classes"] == 13
    assert certs["step"] == {"claimed": 27, "verified": True}


def test_split_sft_needs_entropy_drop():
    with pytest.raises(EntropyNotSeparated):
        factor.split_sft(
            const_code(FULL2), FULL2, algebra.Tol(Fraction(0), Fraction(1))
        )


def test_split_sft_rejects_sofic_domain():
    even = sd.sofic(
        ["e", "o"], [("e", "e", "0"), ("e", "o", "1"), ("o", "e", "1")]
    )
    with pytest.raises(ParseError):
        factor.split_sft(
            const_code(even), POINT, algebra.Tol(Fraction(0), Fraction(1))
        )


def test_decompose_dense_absorption_pipeline():
    report = factor.decompose_dense(
        const_code(GOLDEN),
        POINT,
        two_pow_entropy(Fraction(3, 10)),
        algebra.Tol(Fraction(0), Fraction(2, 5)),
    )
    certs = report.certificates
    assert certs["kind"] == "absorption-finite"
    assert certs["step"] == {"claimed": 21, "verified": True}
    assert certs["entropy_within_target"] is True
    assert certs["onto_target"] is True
    assert_stage_certificates(certs["stages"])
    names = [s.name for s in report.stages]
    assert names[:2] == ["mark", "keep-or-project"]
    assert names[2:] == ["absorb"] * 9
    assert math.isclose(
        math.log(report.intermediate_entropy.approx), 0.2804, abs_tol=1e-4
    )


def test_decompose_dense_endpoint_targets():
    phi = const_code(GOLDEN)
    eps = algebra.Tol(Fraction(0), Fraction(1, 10))
    at_floor = factor.decompose_dense(phi, POINT, algebra.entropy(POINT), eps)
    assert at_floor.certificates["kind"] == "endpoint"
    assert [s.name for s in at_floor.stages] == ["endpoint"]
    assert (
        algebra.compare_scaled(
            at_floor.intermediate_entropy, algebra.entropy(POINT)
        )
        == EQ
    )
    at_top = factor.decompose_dense(phi, POINT, algebra.entropy(GOLDEN), eps)
    assert at_top.certificates["kind"] == "endpoint"
    assert (
        algebra.compare_scaled(
            at_top.intermediate_entropy, algebra.entropy(GOLDEN)
        )
        == EQ
    )


def test_certify_stages_detects_dropped_stage():
    report = factor.decompose_dense(
        const_code(GOLDEN),
        POINT,
        two_pow_entropy(Fraction(3, 10)),
        algebra.Tol(Fraction(0), Fraction(2, 5)),
    )
    broken = report.stages[:1] + report.stages[2:]
    with pytest.raises(Mismatch):
        factor._certify_stages(report.phi, broken)
    intact = factor._certify_stages(report.phi, report.stages)
    assert_stage_certificates(intact)


def test_sample_S0_row_statuses():
    grid = [
        algebra.entropy(POINT),
        two_pow_entropy(Fraction(3, 10)),
        algebra.entropy_from_base(algebra.alg_rational(4)),
    ]
    rows = factor.sample_S0(
        const_code(GOLDEN),
        POINT,
        grid,
        algebra.Tol(Fraction(0), Fraction(2, 5)),
    )
    assert [row["status"] for row in rows] == ["ok", "ok", "out_of_range"]
    assert algebra.compare_scaled(rows[0]["achieved"], grid[0]) == EQ
    assert rows[0]["perron"] is True
    assert rows[0]["step"] is None
    assert math.isclose(rows[1]["achieved"].approx, 1.3236, abs_tol=1e-3)
    assert rows[1]["perron"] is True
    assert rows[1]["step"] == 21
    assert rows[2]["achieved"] is None
    assert rows[2]["perron"] is None

import pytest

import shiftdecomp as sd
from shiftdecomp import algebra, codes
from shiftdecomp.errors import (
    ImageNotInDomain,
    Mismatch,
    ParseError,
    WordNotInDomain,
    WordTooShort,
)
from shiftdecomp.shiftspace import alphabet_of, same_language, words

FULL2 = sd.sft("01", [])
GOLDEN = sd.sft("01", [("1", "1")])
POINT = sd.sft("0", [])


def xor3():
    """3-block code on the full 2-shift: x[i-1] xor x[i] xor x[i+1]."""
    table = {
        w: str((int(w[0]) + int(w[1]) + int(w[2])) % 2)
        for w in words(FULL2, 3)
    }
    return codes.block_map(1, 1, FULL2, table)


def xor2():
    """2-block code x[i] xor x[i+1], anticipation only."""
    table = {w: str((int(w[0]) + int(w[1])) % 2) for w in words(FULL2, 2)}
    return codes.block_map(0, 1, FULL2, table)


def collapse():
    """1-block code folding the golden mean shift onto a single loop."""
    return codes.one_block_code(GOLDEN, {"0": "0", "1": "0"})


def slide_oracle(table, m, a, word):
    """Window slide written independently of the library."""
    out = []
    for i in range(m, len(word) - a):
        out.append(table[tuple(word[i - m : i + a + 1])])
    return tuple(out)


def test_block_map_rejects_partial_table():
    with pytest.raises(ParseError) as err:
        codes.block_map(0, 0, FULL2, {("0",): "0"})
    assert "missing" in str(err.value)
    assert "1" in str(err.value)


def test_block_map_rejects_stray_windows():
    table = {(s,): s for s in "01"}
    table[("1", "1")] = "0"
    with pytest.raises(ParseError):
        codes.block_map(0, 0, GOLDEN, table)


def test_apply_identity():
    ident = codes.identity_code(FULL2)
    assert codes.apply(ident, "0110") == tuple("0110")


def test_apply_window_slide():
    code = xor3()
    assert codes.apply(code, "010") == ("1",)
    for w in words(FULL2, 6):
        assert codes.apply(code, w) == slide_oracle(code.table, 1, 1, w)


def test_apply_collapse_table_lookup():
    code = collapse()
    assert codes.apply(code, "01010") == ("0",) * 5


def test_apply_errors():
    with pytest.raises(WordTooShort):
        codes.apply(xor3(), "01")
    with pytest.raises(WordNotInDomain):
        codes.apply(collapse(), "0110")


def test_compose_identity_is_neutral():
    code = xor3()
    ident = codes.identity_code(FULL2)
    assert codes.compose(ident, code).table == code.table
    assert codes.compose(code, ident).table == code.table


def test_compose_window_arithmetic():
    three = xor3()
    assert codes.compose(three, codes.identity_code(FULL2)).memory == 1
    assert codes.compose(three, codes.identity_code(FULL2)).anticipation == 1
    doubled = codes.compose(three, three)
    assert doubled.window == 5
    for w in words(FULL2, 7):
        assert codes.apply(doubled, w) == codes.apply(
            three, codes.apply(three, w)
        )


def test_compose_checks_image():
    ones = codes.one_block_code(FULL2, {"0": "1", "1": "1"})
    on_golden = codes.block_map(
        0, 1, GOLDEN, {w: "0" for w in words(GOLDEN, 2)}
    )
    with pytest.raises(ImageNotInDomain):
        codes.compose(on_golden, ones)


def test_compose_associative():
    f = xor2()
    g = xor2()
    h = xor3()
    left = codes.compose(h, codes.compose(g, f))
    right = codes.compose(codes.compose(h, g), f)
    assert left.table == right.table
    assert left.memory == right.memory
    assert left.anticipation == right.anticipation


def test_recode_one_block_passthrough():
    code = collapse()
    one, beta = codes.recode_one_block(code)
    assert one is code
    assert beta.table == codes.identity_code(GOLDEN).table


def test_recode_one_block_higher_block():
    code = xor3()
    one, beta = codes.recode_one_block(code)
    assert one.window == 1
    assert len(alphabet_of(one.domain)) == 8
    assert beta.memory == 1 and beta.anticipation == 1
    assert codes.compose(one, beta).table == code.table
    for w in words(FULL2, 5):
        assert codes.apply(one, codes.apply(beta, w)) == codes.apply(code, w)


def test_recode_one_block_memory_only():
    table = {w: w[0] for w in words(FULL2, 3)}
    code = codes.block_map(2, 0, FULL2, table)
    one, beta = codes.recode_one_block(code)
    assert beta.memory == 2 and beta.anticipation == 0
    assert codes.compose(one, beta).table == code.table


def test_image_identity():
    assert same_language(codes.image(codes.identity_code(GOLDEN)), GOLDEN)


def test_image_collapse_is_fixed_point():
    assert same_language(codes.image(collapse()), POINT)


def test_image_xor_is_full_shift():
    assert same_language(codes.image(xor2()), FULL2)
    assert same_language(codes.image(xor3()), FULL2)


def test_image_words_match_applied_words():
    for code in (collapse(), xor2(), xor3()):
        img = codes.image(code)
        span = code.memory + code.anticipation
        for n in (1, 2, 4):
            expect = {
                codes.apply(code, w) for w in words(code.domain, n + span)
            }
            assert set(words(img, n)) == expect


def test_image_entropy_never_grows():
    for code in (codes.identity_code(FULL2), collapse(), xor3()):
        before = algebra.entropy(code.domain)
        after = algebra.entropy(codes.image(code))
        assert algebra.compare(after, before) in (algebra.LT, algebra.EQ)


def test_factor_image_census_dominated():
    for code in (collapse(), xor3()):
        dom = algebra.periodic_point_counts(code.domain, 6)
        img = algebra.periodic_point_counts(codes.image(code), 6)
        for k in range(1, 7):
            assert img[k] <= dom[k]


def test_is_factor_onto():
    assert codes.is_factor_onto(codes.identity_code(GOLDEN), GOLDEN)
    assert codes.is_factor_onto(collapse(), POINT)
    assert not codes.is_factor_onto(collapse(), FULL2)


def test_is_embedding_identity_and_constant():
    assert codes.is_embedding(codes.identity_code(FULL2))
    ones = codes.one_block_code(FULL2, {"0": "1", "1": "1"})
    assert not codes.is_embedding(ones)
    assert not codes.is_embedding(collapse())


def test_is_embedding_higher_block_conjugacy():
    _, beta = codes.recode_one_block(xor3())
    assert codes.is_embedding(beta)


def test_xor_is_not_embedding():
    assert not codes.is_embedding(xor2())


def test_embedding_preserves_census():
    _, beta = codes.recode_one_block(xor3())
    img = codes.image(beta)
    for k in range(1, 6):
        dom_q = algebra.q_census(FULL2, k).counts[k]
        img_q = algebra.q_census(img, k).counts[k]
        assert dom_q == img_q


def test_recode_preserves_image():
    for code in (xor2(), xor3()):
        one, _ = codes.recode_one_block(code)
        assert same_language(codes.image(code), codes.image(one))


def test_code_chain_checks_adjacent_images():
    chain = codes.code_chain([xor2(), codes.identity_code(FULL2)])
    composed = codes.compose_chain(chain)
    assert composed.table == xor2().table
    with pytest.raises(ImageNotInDomain):
        codes.code_chain([collapse(), codes.identity_code(FULL2)])


def test_verify_decomposition_trivial_split():
    phi = xor3()
    cert = codes.verify_decomposition(
        phi, codes.identity_code(FULL2), phi, 3
    )
    assert cert["tables_equal"]
    assert cert["stage1_onto"] and cert["stage2_onto"]
    assert cert["checked_window"] >= 3


def test_verify_decomposition_recode_split():
    phi = xor3()
    one, beta = codes.recode_one_block(phi)
    cert = codes.verify_decomposition(phi, beta, one, 4)
    assert cert["tables_equal"]
    assert cert["checked_window"] >= 4


def test_verify_decomposition_corrupted_table():
    phi = xor3()
    broken = dict(phi.table)
    key = ("0", "1", "0")
    broken[key] = "0" if broken[key] == "1" else "1"
    phi2 = codes.block_map(1, 1, FULL2, broken)
    with pytest.raises(Mismatch) as err:
        codes.verify_decomposition(phi, codes.identity_code(FULL2), phi2, 3)
    assert err.value.witness == key

import numpy as np
import pytest

from slvalab.gf2 import (
    BinaryPolynomial,
    CrcCode,
    canonical_hex,
    crc_check,
    crc_check_batch,
    crc_encode,
    crc_encode_batch,
    poly_divmod,
)


# ---------------------------------------------------------------------------
# independent long-division oracle on coefficient lists (lowest degree first),
# written before the implementation and kept as the fixture for every
# division-derived expectation below
# ---------------------------------------------------------------------------

def oracle_divmod(a, b):
    a = list(a)
    b = list(b)
    while b and b[-1] == 0:
        b.pop()
    assert b, "oracle requires a nonzero divisor"
    q = [0] * max(len(a) - len(b) + 1, 1)
    r = list(a)
    while True:
        while r and r[-1] == 0:
            r.pop()
        if len(r) < len(b):
            break
        shift = len(r) - len(b)
        q[shift] ^= 1
        for i, coef in enumerate(b):
            r[shift + i] ^= coef
    return q, r


def to_list(poly: BinaryPolynomial, size: int) -> list[int]:
    coeffs = list(poly.coefficients())
    return coeffs + [0] * (size - len(coeffs))


def from_list(coeffs) -> BinaryPolynomial:
    return BinaryPolynomial.from_coefficients(coeffs)


def test_divmod_self_division():
    p = BinaryPolynomial(0b1000011)  # x^6 + x + 1
    q, r = poly_divmod(p, p)
    assert q.bits == 1 and r.bits == 0


def test_divmod_zero_dividend():
    q, r = poly_divmod(BinaryPolynomial(0), BinaryPolynomial(0b1011))
    assert q.bits == 0 and r.bits == 0


def test_divmod_x7_by_0x43_matches_oracle():
    a = [0] * 7 + [1]  # x^7
    b = [1, 1, 0, 0, 0, 0, 1]  # x^6 + x + 1
    oq, orr = oracle_divmod(a, b)
    q, r = poly_divmod(from_list(a), from_list(b))
    assert to_list(q, len(oq)) == oq
    assert to_list(r, max(len(orr), 1)) == (orr or [0])


def test_divmod_random_against_oracle_and_reconstruction():
    rng = np.random.default_rng(11)
    for _ in range(500):
        da = int(rng.integers(0, 40))
        db = int(rng.integers(1, 20))
        a = BinaryPolynomial(int(rng.integers(0, 1 << (da + 1))))
        b = BinaryPolynomial(int(rng.integers(1 << db, 1 << (db + 1))))
        q, r = poly_divmod(a, b)
        oq, orr = oracle_divmod(to_list(a, 64), to_list(b, 32))
        assert from_list(oq).bits == q.bits
        assert from_list(orr or [0]).bits == r.bits
        # bit-exact reconstruction a = q*b + r
        assert (q * b + r).bits == a.bits
        if not r.is_zero:
            assert r.degree < b.degree


def test_divmod_by_zero_raises():
    with pytest.raises(ZeroDivisionError):
        poly_divmod(BinaryPolynomial(0b101), BinaryPolynomial(0))


def test_zero_polynomial_has_no_degree():
    with pytest.raises(ValueError):
        BinaryPolynomial(0).degree


def test_crc_encode_all_zero_message():
    crc = CrcCode.from_hex("0x9")
    out = crc_encode(np.zeros(8, dtype=np.uint8), crc)
    assert np.all(out == 0) and out.size == 11


def test_crc_encode_matches_long_division_oracle():
    crc = CrcCode.from_hex("0x9")  # x^3 + 1
    msg = [1, 0, 0, 0]
    out = crc_encode(msg, crc)
    assert out.size == 7 and list(out[:4]) == msg
    # oracle: remainder of x^3 * f(x) divided by the generator
    shifted = [0, 0, 0] + [0, 0, 0, 1]  # x^3 * x^3 (f = 1000 -> f(x) = x^3)
    _, rem = oracle_divmod(shifted, [1, 0, 0, 1])
    rem = rem + [0] * (3 - len(rem))
    assert list(out[4:]) == rem[::-1]  # appended highest degree first
    assert crc_check(out, crc)


def test_crc_encode_k256_with_0x43_has_length_262():
    rng = np.random.default_rng(0)
    crc = CrcCode.from_hex("0x43")
    msg = rng.integers(0, 2, 256, dtype=np.uint8)
    out = crc_encode(msg, crc)
    assert out.size == 262
    assert crc_check(out, crc)


def test_crc_encode_check_roundtrip_many_random_pairs():
    rng = np.random.default_rng(3)
    total = 0
    for _ in range(20):
        m = int(rng.integers(1, 11))
        gen = (1 << m) | int(rng.integers(0, 1 << m)) | 1
        crc = CrcCode.from_int(gen)
        k = int(rng.integers(1, 60))
        msgs = rng.integers(0, 2, size=(500, k), dtype=np.uint8)
        words = crc_encode_batch(msgs, crc)
        assert np.all(crc_check_batch(words, crc))
        # batch encoder agrees with the scalar encoder
        one = crc_encode(msgs[0], crc)
        assert np.array_equal(one, words[0])
        total += 500
    assert total == 10_000


def test_single_bit_flip_fails_check_per_divisibility_oracle():
    rng = np.random.default_rng(4)
    crc = CrcCode.from_hex("0x2D")
    msg = rng.integers(0, 2, 20, dtype=np.uint8)
    word = crc_encode(msg, crc)
    gen_list = to_list(crc.generator, crc.m + 1)
    for pos in range(word.size):
        flipped = word.copy()
        flipped[pos] ^= 1
        coeffs = list(flipped[::-1].astype(int))
        _, rem = oracle_divmod(coeffs, gen_list)
        assert crc_check(flipped, crc) == (not any(rem))
        assert not crc_check(flipped, crc)  # a weight-1 difference never divides


def test_all_zero_word_passes():
    assert crc_check(np.zeros(10, dtype=np.uint8), CrcCode.from_hex("0x43"))


def test_random_word_pass_rate_is_two_to_minus_m():
    rng = np.random.default_rng(9)
    crc = CrcCode.from_hex("0x43")
    n, total = 40, 1_000_000
    hits = 0
    for _ in range(10):
        words = rng.integers(0, 2, size=(total // 10, n), dtype=np.uint8)
        hits += int(crc_check_batch(words, crc).sum())
    p = 2.0 ** (-crc.m)
    sigma = np.sqrt(p * (1 - p) / total)
    assert abs(hits / total - p) < 3 * sigma


def test_hex_label_round_trip():
    for label in ["0x9", "0x1B", "0x2D", "0x43", "0xB5", "0x107", "0x313", "0x709", "0x61D"]:
        crc = CrcCode.from_hex(label)
        assert crc.hex_label == label
        assert canonical_hex(crc.generator.bits) == label
        assert crc.generator.degree == crc.m


def test_errors():
    crc = CrcCode.from_hex("0x9")
    with pytest.raises(ValueError):
        crc_encode(np.zeros(0, dtype=np.uint8), crc)
    with pytest.raises(ValueError):
        crc_check(np.zeros(3, dtype=np.uint8), crc)  # n <= m
    assert CrcCode.from_hex("0x1FFFF").m == 16  # degree 16 still allowed
    with pytest.raises(ValueError):
        CrcCode.from_hex("0x3FFFF")  # degree 17 exceeds the cap

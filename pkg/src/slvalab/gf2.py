"""GF(2) polynomial arithmetic and the systematic CRC encoder/checker.

Polynomials are stored as Python ints whose bit ``i`` is the coefficient of
``x^i``.  On the wire, bit sequences are highest-degree-first: message bit 0
is the highest-degree coefficient of the message polynomial and the CRC
remainder is appended after the message (systematic framing).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

MAX_CRC_DEGREE = 16


def poly_degree(bits: int) -> int:
    """Degree of the polynomial with coefficient mask ``bits``; -1 for zero."""
    return bits.bit_length() - 1


def poly_mod_int(value: int, divisor: int) -> int:
    """Remainder of ``value`` by ``divisor``, both GF(2) coefficient masks."""
    if divisor == 0:
        raise ZeroDivisionError("division by the zero polynomial")
    d = poly_degree(divisor)
    while value.bit_length() - 1 >= d and value:
        value ^= divisor << (value.bit_length() - 1 - d)
    return value


def poly_divmod_int(value: int, divisor: int) -> tuple[int, int]:
    """Quotient and remainder of GF(2) coefficient masks."""
    if divisor == 0:
        raise ZeroDivisionError("division by the zero polynomial")
    d = poly_degree(divisor)
    q = 0
    while value.bit_length() - 1 >= d and value:
        shift = value.bit_length() - 1 - d
        q |= 1 << shift
        value ^= divisor << shift
    return q, value


def poly_mul_int(a: int, b: int) -> int:
    """Carry-less product of GF(2) coefficient masks."""
    out = 0
    while b:
        low = b & -b
        out ^= a << (low.bit_length() - 1)
        b ^= low
    return out


@dataclass(frozen=True)
class BinaryPolynomial:
    """Polynomial over GF(2).

    ``bits`` holds the coefficients with bit ``i`` giving the coefficient of
    ``x^i``.  The zero polynomial has no degree and is a distinct state.
    """

    bits: int

    def __post_init__(self) -> None:
        if self.bits < 0:
            raise ValueError("coefficient mask must be nonnegative")

    @classmethod
    def from_coefficients(cls, coeffs: Sequence[int]) -> "BinaryPolynomial":
        """Build from a lowest-degree-first 0/1 coefficient sequence."""
        value = 0
        for i, c in enumerate(coeffs):
            if c not in (0, 1):
                raise ValueError("coefficients must be 0 or 1")
            value |= int(c) << i
        return cls(value)

    @property
    def is_zero(self) -> bool:
        return self.bits == 0

    @property
    def degree(self) -> int:
        if self.bits == 0:
            raise ValueError("the zero polynomial has no degree")
        return self.bits.bit_length() - 1

    def coefficients(self) -> tuple[int, ...]:
        """Lowest degree first.  Empty for the zero polynomial."""
        if self.bits == 0:
            return ()
        return tuple((self.bits >> i) & 1 for i in range(self.bits.bit_length()))

    def __add__(self, other: "BinaryPolynomial") -> "BinaryPolynomial":
        return BinaryPolynomial(self.bits ^ other.bits)

    __xor__ = __add__

    def __mul__(self, other: "BinaryPolynomial") -> "BinaryPolynomial":
        return BinaryPolynomial(poly_mul_int(self.bits, other.bits))

    def __str__(self) -> str:
        if self.bits == 0:
            return "0"
        terms = []
        for i in range(self.bits.bit_length() - 1, -1, -1):
            if (self.bits >> i) & 1:
                terms.append("1" if i == 0 else ("x" if i == 1 else f"x^{i}"))
        return " + ".join(terms)


def poly_divmod(
    a: BinaryPolynomial, b: BinaryPolynomial
) -> tuple[BinaryPolynomial, BinaryPolynomial]:
    """GF(2) long division: returns (q, r) with a = q*b + r, deg r < deg b."""
    if b.is_zero:
        raise ZeroDivisionError("division by the zero polynomial")
    q, r = poly_divmod_int(a.bits, b.bits)
    return BinaryPolynomial(q), BinaryPolynomial(r)


@dataclass(frozen=True)
class CrcCode:
    """A degree-m CRC generator polynomial with its canonical hex label.

    The hex convention writes a degree-m generator as an (m+1)-bit value whose
    most significant bit is the x^m coefficient, e.g. 0x43 -> 1000011 ->
    x^6 + x + 1.
    """

    generator: BinaryPolynomial
    m: int
    hex_label: str

    def __post_init__(self) -> None:
        if self.generator.is_zero or self.generator.degree != self.m:
            raise ValueError("generator degree must equal m")
        if self.m < 1 or self.m > MAX_CRC_DEGREE:
            raise ValueError(f"CRC degree must be in [1, {MAX_CRC_DEGREE}]")
        if self.hex_label != canonical_hex(self.generator.bits):
            raise ValueError("hex_label is not canonical for this generator")

    @classmethod
    def from_hex(cls, label: str) -> "CrcCode":
        bits = int(label, 16)
        if bits <= 1:
            raise ValueError("CRC generator must have positive degree")
        return cls(BinaryPolynomial(bits), poly_degree(bits), canonical_hex(bits))

    @classmethod
    def from_int(cls, bits: int) -> "CrcCode":
        return cls.from_hex(hex(bits))


def canonical_hex(bits: int) -> str:
    return "0x" + format(bits, "X")


def _bits_to_int(bits: np.ndarray | Sequence[int]) -> int:
    """Interpret a highest-degree-first bit sequence as a coefficient mask."""
    value = 0
    for b in bits:
        value = (value << 1) | int(b)
    return value


def crc_encode(message: Sequence[int] | np.ndarray, crc: CrcCode) -> np.ndarray:
    """Append m parity bits so the whole word is divisible by the generator.

    The output's first k bits equal the message (systematic).
    """
    msg = np.asarray(message, dtype=np.uint8)
    if msg.ndim != 1 or msg.size < 1:
        raise ValueError("message must be a nonempty 1-D bit sequence")
    rem = poly_mod_int(_bits_to_int(msg) << crc.m, crc.generator.bits)
    parity = [(rem >> i) & 1 for i in range(crc.m - 1, -1, -1)]
    return np.concatenate([msg, np.array(parity, dtype=np.uint8)])


def crc_check(word: Sequence[int] | np.ndarray, crc: CrcCode) -> bool:
    """True iff the word, read as a polynomial, is divisible by the generator."""
    w = np.asarray(word, dtype=np.uint8)
    if w.ndim != 1 or w.size <= crc.m:
        raise ValueError("word must be longer than the CRC degree")
    return poly_mod_int(_bits_to_int(w), crc.generator.bits) == 0


def remainder_table(crc: CrcCode, n: int) -> np.ndarray:
    """x^i mod generator for i in [0, n), as uint32 coefficient masks."""
    table = np.empty(n, dtype=np.uint32)
    rem = 1
    p = crc.generator.bits
    for i in range(n):
        table[i] = rem
        rem <<= 1
        if rem >> crc.m:
            rem ^= p
    return table


def position_remainder_table(crc: CrcCode, n: int) -> np.ndarray:
    """Remainders x^(n-1-i) mod generator, indexed by wire position i."""
    return remainder_table(crc, n)[::-1].copy()


def crc_encode_batch(messages: np.ndarray, crc: CrcCode) -> np.ndarray:
    """Vectorized systematic encoding of a [batch, k] 0/1 matrix."""
    msgs = np.asarray(messages, dtype=np.uint8)
    if msgs.ndim != 2 or msgs.shape[1] < 1:
        raise ValueError("messages must be a [batch, k] bit matrix")
    k = msgs.shape[1]
    # remainder of x^m * f(x): message position i carries x^(m + k - 1 - i)
    rems = remainder_table(crc, k + crc.m)[crc.m :][::-1]
    rem_bits = np.zeros((k, crc.m), dtype=np.uint8)
    for j in range(crc.m):
        rem_bits[:, j] = (rems >> (crc.m - 1 - j)) & 1
    parity = (msgs @ rem_bits) % 2
    return np.concatenate([msgs, parity.astype(np.uint8)], axis=1)


def crc_check_batch(words: np.ndarray, crc: CrcCode) -> np.ndarray:
    """Vectorized divisibility check of a [batch, n] 0/1 matrix."""
    w = np.asarray(words, dtype=np.uint32)
    if w.ndim != 2 or w.shape[1] <= crc.m:
        raise ValueError("words must be a [batch, n] bit matrix with n > m")
    table = position_remainder_table(crc, w.shape[1])
    rem = np.bitwise_xor.reduce(w * table[None, :], axis=1)
    return rem == 0

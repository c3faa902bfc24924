"""Feedforward rate-1/N convolutional encoding with precomputed trellis tables.

Generator taps follow the octal convention: the octal digits expand
MSB-first to taps g_0 g_1 ... g_v, where g_0 multiplies the current input
bit (13 octal = 1011 -> 1 + D^2 + D^3).  A trellis state packs the last v
input bits with the newest bit in the most significant position, so the
input bit on a branch is the MSB of the destination state.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

MAX_MEMORY = 14


@dataclass(frozen=True)
class ConvCode:
    """Rate-1/N feedforward convolutional code.

    ``generators`` are tap masks in which bit (v - j) is tap g_j.  This makes
    ``int(octal_string, 8)`` the mask directly.
    """

    generators: tuple[int, ...]
    v: int

    def __post_init__(self) -> None:
        if not (1 <= self.v <= MAX_MEMORY):
            raise ValueError(f"memory order v must be in [1, {MAX_MEMORY}]")
        if len(self.generators) < 1:
            raise ValueError("need at least one generator")
        if len(set(self.generators)) != len(self.generators):
            raise ValueError("generators must be distinct")
        for g in self.generators:
            if g <= 0:
                raise ValueError("generators must be nonzero")
            if g.bit_length() > self.v + 1:
                raise ValueError(
                    f"generator {oct(g)} has more than v+1={self.v + 1} taps"
                )
            if not ((g >> self.v) & 1 or g & 1):
                raise ValueError(
                    f"generator {oct(g)} sets neither the D^0 nor the D^v tap"
                )

    @classmethod
    def from_octal(cls, spec: str | Sequence[str | int], v: int | None = None) -> "ConvCode":
        """Parse e.g. "13,17" (octal strings); v defaults to the longest span."""
        if isinstance(spec, str):
            parts = [s.strip() for s in spec.split(",") if s.strip()]
        else:
            parts = [str(s) for s in spec]
        gens = tuple(int(p, 8) for p in parts)
        if v is None:
            v = max(g.bit_length() for g in gens) - 1
        return cls(gens, v)

    @property
    def rate_inverse(self) -> int:
        return len(self.generators)

    def octal_label(self) -> str:
        return ",".join(format(g, "o") for g in self.generators)


@dataclass(frozen=True)
class FrameLayout:
    """Frame dimensions: k message bits, m CRC bits, v termination bits."""

    k: int
    m: int
    v: int
    rate_inverse: int = 2

    def __post_init__(self) -> None:
        if self.k < 1 or self.m < 0 or self.v < 1 or self.rate_inverse < 1:
            raise ValueError("invalid frame layout")

    @property
    def n(self) -> int:
        """Trellis input bits before termination."""
        return self.k + self.m

    @property
    def num_stages(self) -> int:
        return self.n + self.v

    @property
    def n_channel(self) -> int:
        return self.rate_inverse * (self.n + self.v)

    @property
    def codebook_size(self) -> int:
        return 1 << self.n

    @property
    def crc_passing_size(self) -> int:
        return 1 << self.k

    @property
    def non_crc_size(self) -> int:
        return (1 << self.n) - (1 << self.k)


class TrellisCode:
    """Precomputed state-transition and branch-output tables for a ConvCode."""

    def __init__(self, code: ConvCode):
        self.code = code
        v, S, N = code.v, 1 << code.v, code.rate_inverse
        self.num_states = S
        self.next_state = np.empty((S, 2), dtype=np.int32)
        self.output_bits = np.empty((S, 2, N), dtype=np.uint8)
        for s in range(S):
            for b in (0, 1):
                self.next_state[s, b] = (b << (v - 1)) | (s >> 1)
                reg = (b << v) | s
                for gi, g in enumerate(code.generators):
                    self.output_bits[s, b, gi] = bin(reg & g).count("1") & 1
        # reverse tables keyed by destination state: the input bit on a branch
        # into s' is msb(s'), and the two predecessors differ in their LSB
        self.pred = np.empty((S, 2), dtype=np.int32)
        self.branch_out_packed = np.empty((S, 2), dtype=np.int32)
        for sp in range(S):
            b = sp >> (v - 1)
            base = (sp << 1) & (S - 1)
            for slot in (0, 1):
                s = base | slot
                self.pred[sp, slot] = s
                packed = 0
                for gi in range(N):
                    packed = (packed << 1) | int(self.output_bits[s, b, gi])
                self.branch_out_packed[sp, slot] = packed

    @property
    def v(self) -> int:
        return self.code.v

    @property
    def rate_inverse(self) -> int:
        return self.code.rate_inverse

    def input_bit_of_state(self, state: int | np.ndarray):
        """The input bit that led into ``state`` (its MSB)."""
        return state >> (self.v - 1)


def build_trellis(code: ConvCode) -> TrellisCode:
    return TrellisCode(code)


def conv_encode(bits: Sequence[int] | np.ndarray, trellis: TrellisCode) -> np.ndarray:
    """Encode one frame, appending v zero bits to terminate in state 0."""
    x = np.asarray(bits, dtype=np.uint8)
    if x.ndim != 1 or x.size < 1:
        raise ValueError("input must be a nonempty 1-D bit sequence")
    return conv_encode_batch(x[None, :], trellis.code)[0]


def conv_encode_batch(inputs: np.ndarray, code: ConvCode) -> np.ndarray:
    """Encode a [batch, n] bit matrix into [batch, N*(n+v)] coded bits."""
    x = np.asarray(inputs, dtype=np.uint8)
    if x.ndim != 2 or x.shape[1] < 1:
        raise ValueError("inputs must be a [batch, n] bit matrix")
    batch, n = x.shape
    v, N = code.v, code.rate_inverse
    T = n + v
    padded = np.zeros((batch, T), dtype=np.uint8)
    padded[:, :n] = x
    streams = np.zeros((batch, T, N), dtype=np.uint8)
    for gi, g in enumerate(code.generators):
        acc = np.zeros((batch, T), dtype=np.uint8)
        for j in range(v + 1):
            if (g >> (v - j)) & 1:
                if j == 0:
                    acc ^= padded
                else:
                    acc[:, j:] ^= padded[:, :-j]
        streams[:, :, gi] = acc
    return streams.reshape(batch, T * N)

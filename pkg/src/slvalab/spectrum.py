"""Exact distance spectrum of a terminated convolutional code, with CRC filtering.

``B_d`` counts every nonzero codeword of the terminated frame with output
Hamming weight d, positions taken into account; ``A_d`` counts the subset
whose input polynomial is divisible by the CRC generator (the undetectable
error events).  Full-frame counting means compound codeword differences
(multiple disjoint detours inside one frame) are included.

The enumeration is a dynamic program over (trellis state, CRC remainder,
accumulated weight), swept once across the frame's stages; paths above the
weight cap are discarded.  Counts are exact integers.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np

from .channel import qfunc
from .convcode import FrameLayout, TrellisCode
from .gf2 import CrcCode


class SpectrumBudgetError(Exception):
    """Raised when the requested weight cap exceeds the enumeration budget."""

    def __init__(self, requested_cells: int, budget: int, feasible_d_max: int):
        super().__init__(
            f"enumeration needs {requested_cells} DP cells (budget {budget}); "
            f"largest feasible d_max is {feasible_d_max}"
        )
        self.partial = True
        self.requested_cells = requested_cells
        self.budget = budget
        self.feasible_d_max = feasible_d_max


@dataclass(frozen=True)
class DistanceSpectrum:
    """Per-distance codeword counts B_d and CRC-passing counts A_d, d <= d_max."""

    d_free: int
    d_crc: int | None
    b_counts: np.ndarray
    a_counts: np.ndarray
    layout: FrameLayout
    d_max: int

    def b(self, d: int) -> int:
        self._check(d)
        return int(self.b_counts[d])

    def a(self, d: int) -> int:
        self._check(d)
        return int(self.a_counts[d])

    def counts(self) -> dict[int, tuple[int, int]]:
        return {
            d: (int(self.b_counts[d]), int(self.a_counts[d]))
            for d in range(1, self.d_max + 1)
        }

    def _check(self, d: int) -> None:
        if not (0 <= d <= self.d_max):
            raise ValueError(f"spectrum truncated at d_max={self.d_max}")


def _crc_step_tables(crc: CrcCode | None) -> tuple[np.ndarray, np.ndarray]:
    """Inverse remainder-update permutations for input bits 0 and 1.

    Feeding bit b updates the running remainder as rem' = (rem*x + b) mod p,
    which is invertible because p has a nonzero constant term.
    """
    if crc is None:
        ident = np.zeros(1, dtype=np.int64)
        return ident, ident
    m, p = crc.m, crc.generator.bits
    if not p & 1:
        raise ValueError(
            "remainder tracking needs a generator with a nonzero constant term "
            "(an even generator is x times a lower-degree one)"
        )
    r = np.arange(1 << m, dtype=np.int64)
    shifted = r << 1
    overflow = (shifted >> m) & 1
    step0 = np.where(overflow == 1, shifted ^ p, shifted)
    step1 = step0 ^ 1
    inv0 = np.empty_like(step0)
    inv1 = np.empty_like(step1)
    inv0[step0] = r
    inv1[step1] = r
    return inv0, inv1


def enumerate_spectrum(
    trellis: TrellisCode,
    crc: CrcCode | None,
    layout: FrameLayout,
    d_max: int,
    node_budget: int = 200_000_000,
) -> DistanceSpectrum:
    """Count codewords of each weight <= d_max across the terminated frame."""
    if trellis.v != layout.v:
        raise ValueError("trellis memory does not match layout")
    if trellis.rate_inverse != layout.rate_inverse:
        raise ValueError("trellis rate does not match layout")
    if crc is not None and crc.m != layout.m:
        raise ValueError("CRC degree does not match layout")
    if d_max < 1:
        raise ValueError("d_max must be at least 1")

    S = trellis.num_states
    R = 1 << crc.m if crc is not None else 1
    T, n = layout.num_stages, layout.n
    cells = T * S * R * (d_max + 1)
    if cells > node_budget:
        feasible = max(1, node_budget // (T * S * R) - 1)
        raise SpectrumBudgetError(cells, node_budget, feasible)

    inv0, inv1 = _crc_step_tables(crc)
    inv = (inv0, inv1)
    W = d_max

    pred = trellis.pred
    out_weight = np.zeros((S, 2), dtype=np.int64)
    for sp in range(S):
        for slot in (0, 1):
            out_weight[sp, slot] = bin(int(trellis.branch_out_packed[sp, slot])).count("1")

    half = S // 2  # destinations with input bit 0 are states [0, S/2)
    blocks = {0: np.arange(0, half), 1: np.arange(half, S)} if S > 1 else {0: np.array([0])}

    cur = np.zeros((S, R, W + 1), dtype=np.int64)
    cur[0, 0, 0] = 1
    for t in range(T):
        new = np.zeros_like(cur)
        bits = (0, 1) if t < n else (0,)
        for b in bits:
            if b not in blocks:
                continue
            dst = blocks[b]
            for slot in (0, 1):
                src = cur[pred[dst, slot]]
                if t < n and crc is not None:
                    src = src[:, inv[b], :]
                wts = out_weight[dst, slot]
                for wval in np.unique(wts):
                    rows = np.flatnonzero(wts == wval)
                    if wval == 0:
                        new[dst[rows]] += src[rows]
                    else:
                        new[dst[rows], :, wval:] += src[rows, :, : W + 1 - wval]
        cur = new

    final = cur[0]  # [R, W+1]; only the zero state survives termination
    if int(final[:, 0].sum()) != 1 or int(final[0, 0]) != 1:
        raise AssertionError("weight-0 slot must hold exactly the all-zero codeword")
    b_counts = final.sum(axis=0)
    a_counts = final[0].copy() if crc is not None else np.zeros(W + 1, dtype=np.int64)
    b_counts[0] = 0
    a_counts[0] = 0
    if np.any(b_counts < 0) or np.any(a_counts < 0):
        raise OverflowError("spectrum counts exceeded int64 range")

    nz = np.flatnonzero(b_counts)
    if nz.size == 0:
        raise ValueError(f"d_max={d_max} is below the code's free distance")
    d_free = int(nz[0])
    nz_a = np.flatnonzero(a_counts)
    d_crc = int(nz_a[0]) if nz_a.size else None
    return DistanceSpectrum(d_free, d_crc, b_counts, a_counts, layout, d_max)


def union_bound_ue(spec: DistanceSpectrum, gamma_s: float, d_tilde: int) -> float:
    """Truncated union bound on the undetected-error probability at L = |C|."""
    if d_tilde > spec.d_max:
        raise ValueError("d_tilde exceeds the enumerated spectrum depth")
    if spec.d_crc is None:
        raise ValueError("spectrum holds no CRC-passing events")
    total = 0.0
    for d in range(spec.d_crc, d_tilde + 1):
        if spec.a_counts[d]:
            total += float(spec.a_counts[d]) * qfunc(np.sqrt(d * gamma_s))
    return min(total, 1.0)


def union_bound_nack(spec: DistanceSpectrum, gamma_s: float, d_tilde: int) -> float:
    """Truncated union bound on the erasure probability at L = 1."""
    if d_tilde > spec.d_max:
        raise ValueError("d_tilde exceeds the enumerated spectrum depth")
    total = 0.0
    for d in range(spec.d_free, d_tilde + 1):
        count = int(spec.b_counts[d]) - int(spec.a_counts[d])
        if count:
            total += count * qfunc(np.sqrt(d * gamma_s))
    return min(total, 1.0)


def nna_ue(spec: DistanceSpectrum, gamma_s: float) -> float:
    """Nearest-neighbor approximation A_dcrc * Q(sqrt(dcrc * gamma))."""
    if spec.d_crc is None:
        raise ValueError("spectrum holds no CRC-passing events")
    return float(spec.a_counts[spec.d_crc]) * qfunc(np.sqrt(spec.d_crc * gamma_s))


def nna_nack(
    spec: DistanceSpectrum, gamma_s: float, include_crc_passing: bool = False
) -> float:
    """Nearest-neighbor approximation to the L=1 erasure probability.

    By default counts only the nearest neighbors that fail the CRC,
    (B_dfree - A_dfree); with ``include_crc_passing`` it uses all B_dfree.
    The two agree whenever d_crc > d_free.
    """
    count = int(spec.b_counts[spec.d_free])
    if not include_crc_passing:
        count -= int(spec.a_counts[spec.d_free])
    return count * qfunc(np.sqrt(spec.d_free * gamma_s))


class LowSnrLimits(NamedTuple):
    ue_single_trial: float
    ue_max_list: float
    ue_share_of_fail: Callable[[float], float]


def low_snr_limits(m: int, layout: FrameLayout) -> LowSnrLimits:
    """Low-SNR limits of the undetected-error probability.

    A single trial converges to 2^-m (a wrong word passes a degree-m check
    with that probability); the exhaustive list converges to ~1.
    ``ue_share_of_fail`` maps a single-trial failure rate to the heuristic
    bound 2^-m * P_Fail, which is tight in the low-SNR regime.
    """
    if m < 0:
        raise ValueError("m must be nonnegative")
    scale = 2.0 ** (-m)
    full_list = (layout.crc_passing_size - 1) / layout.crc_passing_size
    return LowSnrLimits(scale, full_list, lambda p_fail: scale * p_fail)

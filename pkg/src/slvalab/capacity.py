"""The end-to-end coded channel and its capacity models.

The chain CRC encoder -> convolutional encoder -> AWGN -> list decoder ->
CRC check is a symmetric error-and-erasure channel on 2^k messages plus an
erasure symbol.  ``estimate_true_row`` measures its transition row by Monte
Carlo (transmitting the all-zero message, which symmetry makes lossless);
the four capacity evaluators implement the exact closed forms for the true
row and for the three simplified models that only need the error rate, the
erasure rate, and the nearest-neighbor count.

Capacities are in bits per codeword transmission; divide by the number of
channel bits for a per-channel-use figure.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .channel import ChannelConfig, add_noise, modulate
from .convcode import FrameLayout, TrellisCode, conv_encode_batch
from .gf2 import CrcCode, crc_encode_batch
from .harness import PointStats, SimConfig, SimRunner
from .slva import decode_frames, max_list_size
from .spectrum import enumerate_spectrum

MAX_EXPLICIT_K = 12
MIN_ROW_FRAMES = 100_000


def binary_entropy(p: float) -> float:
    """H(p) in bits, continuously extended to the endpoints."""
    if p < 0 or p > 1:
        raise ValueError("probability out of range")
    if p == 0.0 or p == 1.0:
        return 0.0
    return -p * math.log2(p) - (1 - p) * math.log2(1 - p)


def entropy_bits(probs: np.ndarray) -> float:
    """Shannon entropy in bits of a (sub)distribution; zero entries ignored."""
    p = np.asarray(probs, dtype=np.float64)
    p = p[p > 0]
    return float(-(p * np.log2(p)).sum()) if p.size else 0.0


@dataclass(frozen=True)
class CodedChannelModel:
    """Summary (and optionally the explicit row) of the coded channel."""

    k: int
    epsilon: float
    alpha: float
    nn_count: int
    eps_star: float | None = None
    row: np.ndarray | None = None

    def __post_init__(self) -> None:
        if self.k < 1:
            raise ValueError("k must be positive")
        if self.epsilon < 0 or self.alpha < 0 or self.epsilon + self.alpha > 1 + 1e-12:
            raise ValueError("epsilon/alpha must be probabilities with sum <= 1")
        if self.row is not None:
            if self.row.shape != ((1 << self.k) - 1,):
                raise ValueError("row must have 2^k - 1 entries")
            if abs(float(self.row.sum()) - self.epsilon) > 1e-9:
                raise ValueError("row must sum to epsilon")


def capacity_true(model: CodedChannelModel) -> float:
    """Capacity of the explicit symmetric channel, in bits per codeword.

    Evaluates the closed form and independently the mutual information
    H(Y) - H(Y|X) of the channel under uniform input; disagreement beyond
    1e-9 raises rather than being papered over.
    """
    if model.row is None:
        raise ValueError("true capacity needs the explicit row")
    k, eps, alpha = model.k, model.epsilon, model.alpha
    if alpha >= 1.0:
        return 0.0
    closed = (1 - alpha) * (k - binary_entropy(eps / (1 - alpha)))
    if eps > 0:
        closed -= eps * entropy_bits(model.row / eps)
    # direct I(X;Y): uniform input makes every message equally likely at the
    # output, so H(Y) has a two-level form, while H(Y|X) is the row entropy
    h_y = (1 - alpha) * k + (
        -alpha * math.log2(alpha) if alpha > 0 else 0.0
    ) + (-(1 - alpha) * math.log2(1 - alpha) if alpha < 1 else 0.0)
    row_full = np.concatenate(([1.0 - eps - alpha, alpha], model.row))
    direct = h_y - entropy_bits(row_full)
    if abs(closed - direct) > 1e-9:
        raise ArithmeticError(
            f"closed-form capacity {closed!r} disagrees with direct mutual "
            f"information {direct!r}"
        )
    return closed


def capacity_llb(model: CodedChannelModel) -> float:
    """Loose lower bound: all wrong messages equally likely."""
    k, eps, alpha = model.k, model.epsilon, model.alpha
    if alpha >= 1.0:
        return 0.0
    c = (1 - alpha) * (k - binary_entropy(eps / (1 - alpha)))
    return c - eps * math.log2((1 << k) - 1)


def capacity_nnlb(model: CodedChannelModel) -> float:
    """Nearest-neighbor lower bound: N neighbors at eps_star each, the rest
    of the error mass spread over the remaining messages."""
    k, eps, alpha, N = model.k, model.epsilon, model.alpha, model.nn_count
    if alpha >= 1.0:
        return 0.0
    if eps == 0.0:
        return (1 - alpha) * k
    if not (0 < N < (1 << k) - 1):
        raise ValueError("NNLB needs 0 < N < 2^k - 1")
    es = model.eps_star
    if es is None or not (eps / ((1 << k) - 1) < es < eps / N):
        raise ValueError("eps_star outside its open interval")
    c = (1 - alpha) * (k - binary_entropy(eps / (1 - alpha)))
    c -= eps * binary_entropy(N * es / eps)
    c -= N * es * math.log2(N)
    c -= (eps - N * es) * math.log2((1 << k) - 1 - N)
    return c


def capacity_nnub(model: CodedChannelModel) -> float:
    """Nearest-neighbor upper bound: the error mass sits on the N neighbors."""
    k, eps, alpha, N = model.k, model.epsilon, model.alpha, model.nn_count
    if alpha >= 1.0:
        return 0.0
    if eps > 0 and N < 1:
        raise ValueError("NNUB needs at least one nearest neighbor")
    c = (1 - alpha) * (k - binary_entropy(eps / (1 - alpha)))
    if eps > 0:
        c -= eps * math.log2(N)
    return c


def nearest_neighbor_messages(
    trellis: TrellisCode, crc: CrcCode, layout: FrameLayout, d_crc: int
) -> np.ndarray:
    """Boolean mask over nonzero messages whose codeword weight is d_crc."""
    k = layout.k
    if k > MAX_EXPLICIT_K:
        raise ValueError(f"explicit message enumeration needs k <= {MAX_EXPLICIT_K}")
    msgs = ((np.arange(1, 1 << k)[:, None] >> np.arange(k - 1, -1, -1)) & 1).astype(
        np.uint8
    )
    words = crc_encode_batch(msgs, crc)
    weights = conv_encode_batch(words, trellis.code).sum(axis=1)
    return weights == d_crc


def estimate_true_row(
    trellis: TrellisCode,
    crc: CrcCode,
    layout: FrameLayout,
    gamma_s: float,
    L: int | str,
    frames: int,
    seed: int = 0,
) -> CodedChannelModel:
    """Monte Carlo transition row of the coded channel at one SNR.

    Transmits the all-zero message (the channel is symmetric, so one row
    determines the matrix) and tallies the frequency of every decoded
    message and of the erasure verdict.
    """
    k = layout.k
    if k > MAX_EXPLICIT_K:
        raise ValueError(f"explicit row estimation needs k <= {MAX_EXPLICIT_K}")
    if frames < MIN_ROW_FRAMES:
        raise ValueError(f"row estimation needs at least {MIN_ROW_FRAMES} frames")
    spec = enumerate_spectrum(trellis, crc, layout, d_max=24)
    if spec.d_crc is None:
        raise ValueError("spectrum truncated below d_crc; raise d_max")
    l_run = max_list_size(trellis, crc, layout, spec) if L == "max" else int(L)

    counts = np.zeros(1 << k, dtype=np.int64)
    erasures = 0
    chan = ChannelConfig(gamma_s)
    block = 4096
    weights_pow = (1 << np.arange(k - 1, -1, -1)).astype(np.int64)
    done = 0
    block_index = 0
    while done < frames:
        size = min(block, frames - done)
        rng = np.random.Generator(np.random.Philox(key=[seed, block_index]))
        msgs = np.zeros((size, k), dtype=np.uint8)
        words = crc_encode_batch(msgs, crc)
        y = add_noise(modulate(conv_encode_batch(words, trellis.code)), chan, rng)
        res = decode_frames(y, trellis, crc, l_run)
        idx = (res.bits[:, :k].astype(np.int64) @ weights_pow)[res.ok]
        np.add.at(counts, idx, 1)
        erasures += int((~res.ok).sum())
        done += size
        block_index += 1

    row = counts[1:].astype(np.float64) / frames
    epsilon = float(row.sum())
    alpha = erasures / frames
    nn_mask = nearest_neighbor_messages(trellis, crc, layout, spec.d_crc)
    N = int(nn_mask.sum())
    if N != int(spec.a_counts[spec.d_crc]):
        raise AssertionError("nearest-neighbor count disagrees with the spectrum")
    eps_star = None
    if epsilon > 0:
        lo = epsilon / ((1 << k) - 1)
        hi = epsilon / N
        raw = float(row[nn_mask].mean())
        eps_star = min(max(raw, lo + (hi - lo) * 1e-9), hi - (hi - lo) * 1e-9)
    return CodedChannelModel(k, epsilon, alpha, N, eps_star, row)


@dataclass(frozen=True)
class CapacityPoint:
    list_size: int
    capacity: float
    ci95: float
    epsilon: float
    alpha: float


def capacity_vs_list_size(
    trellis: TrellisCode,
    crc: CrcCode,
    layout: FrameLayout,
    gamma_s_db: float,
    l_grid: Sequence[int],
    frames: int,
    seed: int = 0,
    chunks: int = 10,
) -> list[CapacityPoint]:
    """C_LLB as a function of list size, from one exhaustive-list run.

    The rank of the first CRC pass is recorded per frame, so every L in the
    grid is just a different cut of the same histogram.  The CI comes from
    splitting the run into independent chunks.
    """
    cfg = SimConfig(
        cc=trellis.code,
        crc=crc,
        k=layout.k,
        snr_db=[gamma_s_db],
        frames=max(frames // chunks, 1),
        list_size="max",
        seed=seed,
    )
    runner = SimRunner(cfg)
    points: list[PointStats] = [
        runner.run_point(gamma_s_db, snr_index=c) for c in range(chunks)
    ]
    out = []
    for L in l_grid:
        L = int(min(L, runner.l_run))
        caps = []
        for p in points:
            model = CodedChannelModel(
                layout.k, p.p_ue_at(L), p.p_nack_at(L), nn_count=1
            )
            caps.append(capacity_llb(model))
        caps = np.asarray(caps)
        eps = float(np.mean([p.p_ue_at(L) for p in points]))
        alpha = float(np.mean([p.p_nack_at(L) for p in points]))
        pooled = capacity_llb(CodedChannelModel(layout.k, eps, alpha, nn_count=1))
        ci = 1.96 * float(caps.std(ddof=1)) / math.sqrt(len(caps)) if len(caps) > 1 else 0.0
        out.append(CapacityPoint(L, pooled, ci, eps, alpha))
    return out

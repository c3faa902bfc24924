"""Soft Viterbi decoding and the serial list Viterbi (tree-trellis) search.

The forward pass records, per trellis node, the survivor branch and the
cumulative metric difference of the losing branch.  The list search then
enumerates full codewords in non-decreasing squared-Euclidean-distance order
by detouring off already-found paths: a path that deviates from the survivor
chain at a node inherits the best prefix into the nonsurvivor predecessor,
so its total metric is the parent's metric plus the stored difference.

Candidates are kept in a heap keyed by (metric, detour stage, detour state,
parent emission index).  Ties of that kind have probability zero under
continuous noise; when they do occur a path is always emitted after its
parent.  Detours off a path are spawned only once the path has failed the
CRC check and further trials remain, so a frame whose first path passes
performs no insertions.  ``insertions`` counts every metric difference a
tree-trellis traceback would file into its sorted structure, which is the
quantity the complexity model charges for.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass

import numpy as np

from .convcode import FrameLayout, TrellisCode
from .gf2 import CrcCode, position_remainder_table
from .spectrum import DistanceSpectrum, enumerate_spectrum


@dataclass(frozen=True)
class ForwardPass:
    """Per-stage survivor slots and nonsurvivor metric differences.

    ``survivor[t, s]`` is the winning predecessor slot (0 or 1, indexing
    ``trellis.pred``) of state s at stage t+1; ``delta[t, s]`` is the losing
    branch's cumulative metric minus the winner's (inf where the losing
    prefix is unreachable).  ``final_metrics[s]`` are the cumulative metrics
    at the last stage; the maximum-likelihood metric is ``final_metrics[0]``.
    """

    survivor: np.ndarray
    delta: np.ndarray
    final_metrics: np.ndarray
    n_input: int

    @property
    def num_stages(self) -> int:
        return self.survivor.shape[0]

    @property
    def ml_metric(self) -> float:
        return float(self.final_metrics[0])


@dataclass
class DecodeOutcome:
    """Result of one serial list Viterbi decode."""

    message: np.ndarray | None
    n_lva: int
    insertions: int
    list_rank: int | None

    @property
    def is_erasure(self) -> bool:
        return self.message is None


@dataclass
class BatchDecodeResult:
    """Array-of-frames decode results (see ``decode_frames``)."""

    ok: np.ndarray            # bool: a codeword passed the CRC within L
    rank: np.ndarray          # trial index of the first CRC pass; 0 if none
    n_lva: np.ndarray         # decoding trials performed
    insertions: np.ndarray    # sorted-structure insertions performed
    bits: np.ndarray          # [batch, n] decoded trellis input bits
    trial_insertions: list[np.ndarray] | None = None


def viterbi_forward(received: np.ndarray, trellis: TrellisCode, es: float = 1.0) -> ForwardPass:
    """Exact soft Viterbi forward pass over one received frame."""
    y = np.asarray(received, dtype=np.float64)
    if y.ndim != 1:
        raise ValueError("received must be 1-D")
    N, v = trellis.rate_inverse, trellis.v
    if y.size % N or y.size // N <= v:
        raise ValueError("received length does not fit the trellis")
    T = y.size // N
    surv, delta, finals = _forward_batch(y[None, :], trellis, T - v, es)
    return ForwardPass(surv[0], delta[0], finals[0], T - v)


def _forward_batch(
    y: np.ndarray, trellis: TrellisCode, n_input: int, es: float = 1.0
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Vectorized forward pass over a [batch, dims] matrix of received values."""
    B, dims = y.shape
    N, S = trellis.rate_inverse, trellis.num_states
    T = dims // N
    if dims != T * N or T != n_input + trellis.v:
        raise ValueError("received length does not fit the trellis")
    a = math.sqrt(es / 2.0)
    pred0 = trellis.pred[:, 0]
    pred1 = trellis.pred[:, 1]
    po0 = trellis.branch_out_packed[:, 0]
    po1 = trellis.branch_out_packed[:, 1]
    half = S // 2

    metric = np.full((B, S), np.inf)
    metric[:, 0] = 0.0
    surv = np.empty((B, T, S), dtype=np.uint8)
    delta = np.empty((B, T, S), dtype=np.float64)
    with np.errstate(invalid="ignore"):
        for t in range(T):
            seg = y[:, t * N : (t + 1) * N]
            bm = None
            for i in range(N):
                pair = np.stack(((seg[:, i] - a) ** 2, (seg[:, i] + a) ** 2), axis=1)
                bm = pair if bm is None else (bm[:, :, None] + pair[:, None, :]).reshape(B, -1)
            cand0 = metric[:, pred0] + bm[:, po0]
            cand1 = metric[:, pred1] + bm[:, po1]
            take1 = cand1 < cand0
            metric = np.where(take1, cand1, cand0)
            d = np.abs(cand0 - cand1)
            d[np.isnan(d)] = np.inf
            if t >= n_input and S > 1:
                metric[:, half:] = np.inf
                d[:, half:] = np.inf
            surv[:, t] = take1
            delta[:, t] = d
    return surv, delta, metric


def _traceback_batch(surv: np.ndarray, trellis: TrellisCode) -> np.ndarray:
    """State chains [batch, T+1] of the best path into the zero final state."""
    B, T, _ = surv.shape
    states = np.empty((B, T + 1), dtype=np.int32)
    states[:, T] = 0
    rows = np.arange(B)
    pred = trellis.pred
    for t in range(T, 0, -1):
        s = states[:, t]
        states[:, t - 1] = pred[s, surv[rows, t - 1, s]]
    return states


def _chain_bits(chain: np.ndarray, trellis: TrellisCode) -> np.ndarray:
    """Trellis input bits of a state chain (the input bit is the new MSB)."""
    return ((chain[..., 1:] >> (trellis.v - 1)) & 1).astype(np.uint8)


class _DetourSearch:
    """Serial tree-trellis enumeration of one frame's paths, best first.

    Physically the heap holds at most two candidates per visited path (its
    best unexplored detour and the parent's next sibling), but
    ``insertion_count`` tallies what an eager traceback would insert: every
    finite metric difference along each failed path's fresh prefix.
    """

    def __init__(self, surv: np.ndarray, delta: np.ndarray, trellis: TrellisCode):
        self.surv = surv
        self.delta = delta
        self.pred = trellis.pred
        self.msb_shift = trellis.v - 1
        self.T = surv.shape[0]
        self.chains: list[np.ndarray] = []
        self.metrics: list[float] = []
        self.detour_stages: list[int] = []
        self.spawned: list[bool] = []
        self.sorted_detours: list[tuple[np.ndarray, np.ndarray, np.ndarray] | None] = []
        self.heap: list[tuple[float, int, int, int, int]] = []
        self.insertion_count = 0

    def start(self, chain: np.ndarray, metric: float) -> int:
        """Register the maximum-likelihood path as emission 0."""
        self.chains.append(np.asarray(chain, dtype=np.int32))
        self.metrics.append(float(metric))
        self.detour_stages.append(self.T + 1)
        self.spawned.append(False)
        self.sorted_detours.append(None)
        return 0

    def spawn(self, idx: int) -> int:
        """File the detours along path ``idx``'s fresh prefix; returns how many."""
        if self.spawned[idx]:
            return 0
        self.spawned[idx] = True
        chain = self.chains[idx]
        bound = self.detour_stages[idx]
        stages = np.arange(1, bound)
        nodes = chain[stages]
        d = self.delta[stages - 1, nodes]
        finite = np.isfinite(d)
        stages, nodes, d = stages[finite], nodes[finite], d[finite]
        count = stages.size
        self.insertion_count += count
        if count == 0:
            self.sorted_detours[idx] = None
            return 0
        metrics = self.metrics[idx] + d
        order = np.lexsort((nodes, stages, metrics))
        self.sorted_detours[idx] = (metrics[order], stages[order], nodes[order])
        self._push(idx, 0)
        return count

    def _push(self, parent: int, rank: int) -> None:
        metrics, stages, nodes = self.sorted_detours[parent]
        heapq.heappush(
            self.heap,
            (float(metrics[rank]), int(stages[rank]), int(nodes[rank]), parent, rank),
        )

    def pop_next(self) -> int | None:
        """Materialize the best unexplored candidate; None when exhausted."""
        if not self.heap:
            return None
        metric, stage, state, parent, rank = heapq.heappop(self.heap)
        detours = self.sorted_detours[parent]
        if rank + 1 < detours[0].size:
            self._push(parent, rank + 1)
        chain = self.chains[parent].copy()
        surv, pred = self.surv, self.pred
        sel = surv[stage - 1, state]
        chain[stage - 1] = pred[state, 1 - sel]
        for t in range(stage - 1, 0, -1):
            s = chain[t]
            chain[t - 1] = pred[s, surv[t - 1, s]]
        self.chains.append(chain)
        self.metrics.append(metric)
        self.detour_stages.append(stage)
        self.spawned.append(False)
        self.sorted_detours.append(None)
        return len(self.chains) - 1

    def bits(self, idx: int) -> np.ndarray:
        return ((self.chains[idx][1:] >> self.msb_shift) & 1).astype(np.uint8)


def iter_best_paths(forward: ForwardPass, trellis: TrellisCode, limit: int | None = None):
    """Yield (input_bits, metric) for full-frame paths in non-decreasing
    metric order, starting with the maximum-likelihood path."""
    if not np.isfinite(forward.ml_metric):
        raise ValueError("no path reaches the zero final state")
    chain = _traceback_batch(forward.survivor[None], trellis)[0]
    search = _DetourSearch(forward.survivor, forward.delta, trellis)
    idx = search.start(chain, forward.ml_metric)
    count = 0
    while True:
        yield search.bits(idx), search.metrics[idx]
        count += 1
        if limit is not None and count >= limit:
            return
        search.spawn(idx)
        idx = search.pop_next()
        if idx is None:
            return


def _crc_rem(bits: np.ndarray, table: np.ndarray) -> int:
    hot = np.flatnonzero(bits)
    if hot.size == 0:
        return 0
    return int(np.bitwise_xor.reduce(table[hot]))


def decode_frames(
    received: np.ndarray,
    trellis: TrellisCode,
    crc: CrcCode | None,
    L: int,
    es: float = 1.0,
    record_trial_insertions: bool = False,
) -> BatchDecodeResult:
    """Serial list Viterbi decode of a [batch, dims] matrix of received frames.

    Trial 1 is the plain Viterbi path (vectorized across the batch); frames
    whose first path fails the CRC continue into the per-frame detour search
    until a pass, list exhaustion (L trials), or path exhaustion.  With
    ``crc=None`` the first path is always accepted.
    """
    if L < 1:
        raise ValueError("list size must be at least 1")
    y = np.asarray(received, dtype=np.float64)
    N, v = trellis.rate_inverse, trellis.v
    T = y.shape[1] // N
    n = T - v
    surv, delta, finals = _forward_batch(y, trellis, n, es)
    chains = _traceback_batch(surv, trellis)
    bits = _chain_bits(chains, trellis)[:, :n]
    B = y.shape[0]

    ok = np.ones(B, dtype=bool)
    rank = np.ones(B, dtype=np.int64)
    n_lva = np.ones(B, dtype=np.int64)
    insertions = np.zeros(B, dtype=np.int64)
    trial_ins: list[np.ndarray] | None = [np.zeros(0, dtype=np.int64)] * B if record_trial_insertions else None

    if crc is None:
        return BatchDecodeResult(ok, rank, n_lva, insertions, bits, trial_ins)

    table = position_remainder_table(crc, n)
    rem = np.bitwise_xor.reduce(bits.astype(np.uint32) * table[None, :], axis=1)
    failed = np.flatnonzero(rem != 0)
    ok[failed] = False
    rank[failed] = 0

    for f in failed:
        search = _DetourSearch(surv[f], delta[f], trellis)
        idx = search.start(chains[f], float(finals[f, 0]))
        trial = 1
        per_trial: list[int] = []
        while trial < L:
            per_trial.append(search.spawn(idx))
            nxt = search.pop_next()
            if nxt is None:
                break
            idx = nxt
            trial += 1
            path_bits = search.bits(idx)[:n]
            if _crc_rem(path_bits, table) == 0:
                ok[f] = True
                rank[f] = trial
                bits[f] = path_bits
                break
        n_lva[f] = trial
        insertions[f] = search.insertion_count
        if record_trial_insertions:
            trial_ins[f] = np.asarray(per_trial, dtype=np.int64)
    return BatchDecodeResult(ok, rank, n_lva, insertions, bits, trial_ins)


def slva_decode(
    received: np.ndarray,
    trellis: TrellisCode,
    crc: CrcCode | None,
    L: int,
    es: float = 1.0,
) -> DecodeOutcome:
    """Decode one frame; the message is the first k = n - m input bits."""
    res = decode_frames(np.asarray(received, dtype=np.float64)[None, :], trellis, crc, L, es)
    n = res.bits.shape[1]
    k = n - (crc.m if crc is not None else 0)
    if res.ok[0]:
        return DecodeOutcome(res.bits[0, :k].copy(), int(res.n_lva[0]), int(res.insertions[0]), int(res.rank[0]))
    return DecodeOutcome(None, int(res.n_lva[0]), int(res.insertions[0]), None)


def max_list_size(
    trellis: TrellisCode,
    crc: CrcCode | None,
    layout: FrameLayout,
    spec: DistanceSpectrum | None = None,
    d_max: int = 24,
) -> int:
    """List size that provably suffices for an exhaustive (L = |C|) search:
    sum of B_d for d_free <= d <= d_crc, minus A_dcrc, plus one."""
    if crc is None:
        return 1
    if spec is None:
        cap = max(d_max, 8)
        while True:
            spec = enumerate_spectrum(trellis, crc, layout, cap)
            if spec.d_crc is not None:
                break
            if cap >= 64:
                raise ValueError("no CRC-passing codeword found up to weight 64")
            cap *= 2
    if spec.d_crc is None:
        raise ValueError("spectrum is truncated below d_crc")
    total = int(spec.b_counts[spec.d_free : spec.d_crc + 1].sum())
    return total - int(spec.a_counts[spec.d_crc]) + 1

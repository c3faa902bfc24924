"""Complexity model, list-size tail bounds, finite-blocklength benchmark,
and the CC-CRC design sweep.

The decoder's time is charged in units of one standard Viterbi pass
(add-compare-select over the trellis plus one traceback).  ``R_total = 1 +
R_trace + R_ins`` splits the extra cost of the serial list search into
repeated tracebacks and sorted-structure insertions, with two
hardware-dependent constants supplied by the caller.

The finite-blocklength benchmark is the normal approximation with the
capacity and dispersion of the binary-input AWGN channel computed by
Gauss-Hermite quadrature; it stands in for the random-coding union bound,
whose exact evaluation is out of scope, so gap figures are gaps to this
approximation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .channel import db_to_linear, qfunc
from .convcode import ConvCode, FrameLayout
from .gf2 import CrcCode
from .harness import PointStats, SimConfig, SimRunner, binomial_ci


@dataclass(frozen=True)
class ComplexityParams:
    """Hardware-specific positive constants for traceback and insertion cost."""

    c1: float
    c2: float

    def __post_init__(self) -> None:
        if not (self.c1 > 0 and self.c2 > 0):
            raise ValueError("c1 and c2 must be positive")


@dataclass(frozen=True)
class ComplexityReport:
    n_viterbi: float
    r_trace: float
    r_ins: float
    r_total: float
    e_nlva: float
    e_ilva: float
    scaled_ops: float


def n_viterbi_ops(layout: FrameLayout, c1: float) -> float:
    """Operation count of one standard Viterbi pass (ACS plus one traceback)."""
    k, m, v = layout.k, layout.m, layout.v
    acs = 5 * ((1 << v) - 1) + 3 * (k + m - v) * (1 << v)
    trace = c1 * (2 * (k + m + v) + 1.5 * (k + m))
    return acs + trace


def complexity_report(
    layout: FrameLayout, params: ComplexityParams, e_nlva: float, e_ilva: float
) -> ComplexityReport:
    """Time ratios of the serial list search relative to one Viterbi pass.

    E[I_LVA] <= 1 contributes no insertion cost (the log factor is extended
    continuously through zero).
    """
    if e_nlva < 1:
        raise ValueError("expected decoding attempts cannot be below 1")
    if e_ilva < 0:
        raise ValueError("expected insertions cannot be negative")
    n_vit = n_viterbi_ops(layout, params.c1)
    k, m, v = layout.k, layout.m, layout.v
    r_trace = e_nlva * params.c1 * (2 * (k + m + v) + 1.5 * (k + m)) / n_vit
    r_ins = 0.0
    if e_ilva > 1.0:
        r_ins = e_ilva * params.c2 * math.log2(e_ilva) / n_vit
    r_total = 1.0 + r_trace + r_ins
    return ComplexityReport(
        n_vit, r_trace, r_ins, r_total, e_nlva, e_ilva, r_total * n_vit
    )


def markov_list_bound(L: int) -> float:
    """High-SNR Markov bound P_NACK^L <= 1/L (E[N_LVA] -> 1)."""
    if L < 1:
        raise ValueError("L must be at least 1")
    return 1.0 / L


def chebyshev_list_bound(var_nlva: float, L: int) -> float:
    """High-SNR Chebyshev bound P_NACK^L <= var(N_LVA) / (L-1)^2."""
    if L < 2:
        raise ValueError("the Chebyshev bound needs L >= 2")
    if var_nlva < 0:
        raise ValueError("variance cannot be negative")
    return var_nlva / (L - 1) ** 2


def min_list_for_targets(var_nlva: float, p_nack_target: float) -> int:
    """Smallest L >= 2 whose Chebyshev bound meets the erasure target."""
    if p_nack_target <= 0:
        raise ValueError("target must be positive")
    if var_nlva < 0:
        raise ValueError("variance cannot be negative")
    return max(2, math.ceil(1.0 + math.sqrt(var_nlva / p_nack_target)))


@lru_cache(maxsize=8)
def _hermgauss(n: int) -> tuple[np.ndarray, np.ndarray]:
    return np.polynomial.hermite.hermgauss(n)


def biawgn_capacity_dispersion(gamma_s: float, nodes: int = 128) -> tuple[float, float]:
    """Capacity (bits/use) and dispersion of the binary-input AWGN channel.

    The channel is one real dimension per coded bit at symbol SNR gamma_s,
    i.e. unit-amplitude antipodal signalling with noise variance 1/gamma_s.
    Gauss-Hermite quadrature, cross-checked at a higher node count; a moved
    result signals non-convergence and raises.  numpy's nodes overflow past
    ~370, so the count is capped well below that.
    """
    if gamma_s <= 0:
        raise ValueError("gamma_s must be positive")
    if not (64 <= nodes <= 256):
        raise ValueError("node count must be in [64, 256]")

    def moments(num_nodes: int) -> tuple[float, float]:
        t, w = _hermgauss(num_nodes)
        sigma = math.sqrt(1.0 / gamma_s)
        z = math.sqrt(2.0) * sigma * t
        dens = 1.0 - np.logaddexp(0.0, -2.0 * (1.0 + z) / sigma**2) / math.log(2.0)
        wsum = w / math.sqrt(math.pi)
        c = float((wsum * dens).sum())
        v = float((wsum * (dens - c) ** 2).sum())
        return c, v

    c1, v1 = moments(nodes)
    c2, v2 = moments(nodes + 64)
    if abs(c1 - c2) > 5e-7 or abs(v1 - v2) > 5e-6:
        raise ArithmeticError("quadrature did not converge; raise the node count")
    return c2, v2


def finite_blocklength_benchmark(n_c: int, k_info: int, gamma_s: float) -> float:
    """Normal-approximation error probability of the best (n_c, 2^k) code."""
    if n_c < 64:
        raise ValueError("the normal approximation needs n_c >= 64")
    if k_info < 0:
        raise ValueError("k_info cannot be negative")
    cap, disp = biawgn_capacity_dispersion(gamma_s)
    slack = n_c * cap - k_info + 0.5 * math.log2(n_c)
    if disp * n_c <= 1e-30:
        return 0.0 if slack > 0 else 1.0
    return float(qfunc(slack / math.sqrt(n_c * disp)))


def benchmark_snr_db(n_c: int, k_info: int, target_eps: float, lo: float = -20.0, hi: float = 20.0) -> float:
    """SNR (dB) at which the normal approximation meets the target error."""
    if not (0 < target_eps < 1):
        raise ValueError("target must be in (0, 1)")
    f_lo = finite_blocklength_benchmark(n_c, k_info, db_to_linear(lo))
    f_hi = finite_blocklength_benchmark(n_c, k_info, db_to_linear(hi))
    if not (f_lo > target_eps > f_hi):
        raise ValueError("target not bracketed by the SNR window")
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        if finite_blocklength_benchmark(n_c, k_info, db_to_linear(mid)) > target_eps:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def shannon_limit_snr_db(k_info: int, n_c: int, lo: float = -30.0, hi: float = 30.0) -> float:
    """SNR (dB) at which binary-input AWGN capacity equals the code rate."""
    rate = k_info / n_c
    if not (0 < rate < 1):
        raise ValueError("rate must be in (0, 1)")
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        if biawgn_capacity_dispersion(db_to_linear(mid))[0] < rate:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


@dataclass
class DesignPoint:
    """One CC-CRC pair's position in the gap-versus-complexity plane."""

    cc: ConvCode
    crc: CrcCode | None
    snr_star_db: float
    gap_db: float
    scaled_ops: float
    e_nlva: float
    e_ilva: float
    fer_at_star: float
    frames: int
    status: str = "ok"


def find_snr_for_fer(
    cc: ConvCode,
    crc: CrcCode | None,
    k: int,
    target_fer: float,
    frames: int,
    seed: int = 0,
    window_db: tuple[float, float] = (-2.0, 10.0),
    bracket_db: float = 0.02,
) -> tuple[float, PointStats, str]:
    """Bisect the SNR at which the exhaustive-list FER meets the target.

    Returns (snr_star_db, stats at the final probe, status).  The final
    estimate interpolates log-FER linearly across the last bracket.
    """
    cfg = SimConfig(cc=cc, crc=crc, k=k, snr_db=[0.0], frames=frames, list_size="max", seed=seed)
    runner = SimRunner(cfg)
    lo, hi = window_db
    index = 0
    probes: dict[float, PointStats] = {}

    def fer(snr: float) -> PointStats:
        nonlocal index
        if snr not in probes:
            probes[snr] = runner.run_point(snr, snr_index=index)
            index += 1
        return probes[snr]

    if fer(lo).p_fail < target_fer:
        return lo, probes[lo], "target above window"
    if fer(hi).p_fail > target_fer:
        return hi, probes[hi], "unreachable"
    while hi - lo > bracket_db:
        mid = 0.5 * (lo + hi)
        p = fer(mid)
        est = p.p_fail
        ci = binomial_ci(est, p.frames)
        if est - ci <= target_fer <= est + ci and p.frames < 8 * frames:
            cfg2 = SimConfig(
                cc=cc, crc=crc, k=k, snr_db=[0.0],
                frames=p.frames * 2, list_size="max", seed=seed,
            )
            runner2 = SimRunner(cfg2)
            probes[mid] = runner2.run_point(mid, snr_index=index)
            index += 1
            est = probes[mid].p_fail
        if est > target_fer:
            lo = mid
        else:
            hi = mid
    p_lo, p_hi = fer(lo).p_fail, fer(hi).p_fail
    if p_lo > 0 and p_hi > 0 and p_lo != p_hi:
        t = (math.log(target_fer) - math.log(p_lo)) / (math.log(p_hi) - math.log(p_lo))
        snr_star = lo + max(0.0, min(1.0, t)) * (hi - lo)
    else:
        snr_star = 0.5 * (lo + hi)
    return snr_star, fer(hi), "ok"


def design_sweep(
    pairs: list[tuple[ConvCode, CrcCode | None]],
    k: int,
    target_fer: float,
    params: ComplexityParams,
    frames: int = 100_000,
    seed: int = 0,
    window_db: tuple[float, float] = (-2.0, 10.0),
) -> list[DesignPoint]:
    """Locate each pair's SNR for the target FER, its gap to the
    normal-approximation benchmark at matching blocklength and rate, and its
    scaled operation count; sorted by (gap, complexity)."""
    out = []
    for cc, crc in pairs:
        m = crc.m if crc is not None else 0
        layout = FrameLayout(k, m, cc.v, cc.rate_inverse)
        snr_star, stats, status = find_snr_for_fer(
            cc, crc, k, target_fer, frames, seed=seed, window_db=window_db
        )
        bench = benchmark_snr_db(layout.n_channel, k, target_fer)
        rep = complexity_report(layout, params, stats.e_nlva, stats.e_ilva)
        out.append(DesignPoint(
            cc, crc, snr_star, snr_star - bench, rep.scaled_ops,
            stats.e_nlva, stats.e_ilva, stats.p_fail, stats.frames, status,
        ))
    return sorted(out, key=lambda p: (p.gap_db, p.scaled_ops))

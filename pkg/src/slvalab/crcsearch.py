"""Distance-spectrum-optimal CRC search for a given convolutional code.

For every degree-m candidate generator with the x^m and constant coefficients
set, the searcher counts the CRC-passing codeword differences per distance
(exact full-frame counts, positions included) and ranks candidates
lexicographically: maximize the minimum undetectable distance d_crc, then
minimize A_dcrc, A_dcrc+1, ... up to the search depth.  Candidates that the
depth cannot separate are reported as a tie set rather than broken
arbitrarily.
"""

from __future__ import annotations

from dataclasses import dataclass

from .convcode import FrameLayout, TrellisCode
from .gf2 import CrcCode
from .spectrum import enumerate_spectrum


@dataclass(frozen=True)
class CandidateProfile:
    """One candidate's undetectable-error profile up to the search depth."""

    crc: CrcCode
    d_crc: int | None
    a_profile: tuple[int, ...]  # A_d for d = d_crc .. d_depth; empty if none found

    def sort_key(self, d_depth: int) -> tuple:
        eff = self.d_crc if self.d_crc is not None else d_depth + 1
        return (-eff, self.a_profile)


@dataclass(frozen=True)
class CrcCandidateReport:
    """Ranked candidates; ``tie_set`` holds everyone sharing the best profile."""

    m: int
    d_depth: int
    ranked: tuple[CandidateProfile, ...]
    winner: CrcCode
    tie_set: tuple[CrcCode, ...]


def candidate_generators(m: int) -> list[int]:
    """All degree-m generators with constant term 1 (2^(m-1) of them)."""
    if m < 1:
        raise ValueError("m must be at least 1")
    top = 1 << m
    return [top | (mid << 1) | 1 for mid in range(1 << (m - 1))]


def search_crc(
    trellis: TrellisCode, layout: FrameLayout, m: int, d_depth: int
) -> CrcCandidateReport:
    """Rank all degree-m candidates for the code/frame in ``layout``."""
    if m < 3:
        raise ValueError("search expects m >= 3")
    if layout.m != m:
        raise ValueError("layout.m must equal the searched degree")
    profiles = []
    for bits in candidate_generators(m):
        crc = CrcCode.from_int(bits)
        spec = enumerate_spectrum(trellis, crc, layout, d_depth)
        if d_depth < spec.d_free:
            raise ValueError("d_depth must be at least the code's free distance")
        if spec.d_crc is None:
            profiles.append(CandidateProfile(crc, None, ()))
        else:
            prof = tuple(int(spec.a_counts[d]) for d in range(spec.d_crc, d_depth + 1))
            profiles.append(CandidateProfile(crc, spec.d_crc, prof))

    ranked = sorted(
        profiles, key=lambda p: (p.sort_key(d_depth), p.crc.generator.bits)
    )
    best_key = ranked[0].sort_key(d_depth)
    tie = tuple(p.crc for p in ranked if p.sort_key(d_depth) == best_key)
    winner = ranked[0].crc
    best_eff = ranked[0].d_crc if ranked[0].d_crc is not None else d_depth + 1
    for p in ranked[1:]:
        eff = p.d_crc if p.d_crc is not None else d_depth + 1
        assert best_eff >= eff, "winner must maximize d_crc"
    return CrcCandidateReport(m, d_depth, tuple(ranked), winner, tie)

import math

import numpy as np
import pytest

from slvalab.capacity import (
    CodedChannelModel,
    capacity_llb,
    capacity_nnlb,
    capacity_nnub,
    capacity_true,
    capacity_vs_list_size,
    estimate_true_row,
    nearest_neighbor_messages,
)
from slvalab.channel import ChannelConfig, add_noise, db_to_linear, modulate
from slvalab.convcode import ConvCode, FrameLayout, build_trellis, conv_encode_batch
from slvalab.gf2 import CrcCode, crc_encode_batch
from slvalab.slva import decode_frames, max_list_size
from slvalab.spectrum import enumerate_spectrum


# ---------------------------------------------------------------------------
# explicit-matrix mutual-information oracle: build a full symmetric channel
# whose rows are cyclic shifts of (1-eps-alpha, p_1..p_{2^k-1}) plus an
# erasure column, and evaluate I(X;Y) numerically under uniform input
# ---------------------------------------------------------------------------

def oracle_mutual_information(k: int, row: np.ndarray, alpha: float) -> float:
    M = 1 << k
    eps = float(row.sum())
    P = np.zeros((M, M + 1))
    for x in range(M):
        P[x, x] = 1.0 - eps - alpha
        for j in range(1, M):
            P[x, (x + j) % M] = row[j - 1]
        P[x, M] = alpha
    assert np.allclose(P.sum(axis=1), 1.0, atol=1e-12)
    py = P.mean(axis=0)
    info = 0.0
    for x in range(M):
        for y in range(M + 1):
            if P[x, y] > 0:
                info += (P[x, y] / M) * math.log2(P[x, y] / py[y])
    return info


def random_row(k: int, eps: float, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    raw = rng.random((1 << k) - 1)
    return eps * raw / raw.sum()


@pytest.mark.parametrize("k,eps,alpha,seed", [(4, 0.2, 0.1, 0), (5, 0.05, 0.0, 1), (6, 0.4, 0.3, 2)])
def test_true_capacity_equals_matrix_mutual_information(k, eps, alpha, seed):
    row = random_row(k, eps, seed)
    model = CodedChannelModel(k, eps, alpha, nn_count=4, eps_star=None, row=row)
    assert capacity_true(model) == pytest.approx(
        oracle_mutual_information(k, row, alpha), abs=1e-9
    )


def test_true_capacity_with_two_equal_probabilities():
    k = 4
    row = np.zeros(15)
    row[3] = row[7] = 0.05
    model = CodedChannelModel(k, 0.1, 0.2, nn_count=2, row=row)
    assert capacity_true(model) == pytest.approx(oracle_mutual_information(k, row, 0.2), abs=1e-9)


def test_noiseless_and_pure_erasure():
    k = 6
    zero = np.zeros((1 << k) - 1)
    m0 = CodedChannelModel(k, 0.0, 0.0, nn_count=1, row=zero)
    assert capacity_true(m0) == pytest.approx(k, abs=1e-12)
    m1 = CodedChannelModel(k, 0.0, 0.25, nn_count=1, row=zero)
    assert capacity_true(m1) == pytest.approx(0.75 * k, abs=1e-12)
    assert capacity_llb(m1) == pytest.approx(0.75 * k, abs=1e-12)
    assert capacity_nnub(m1) == pytest.approx(0.75 * k, abs=1e-12)
    assert capacity_nnlb(m1) == pytest.approx(0.75 * k, abs=1e-12)


def test_nnub_with_single_neighbor_drops_log_term():
    model = CodedChannelModel(8, 0.01, 0.02, nn_count=1)
    expected = (1 - 0.02) * (8 - _h(0.01 / 0.98))
    assert capacity_nnub(model) == pytest.approx(expected, rel=1e-12)


def _h(p):
    return -p * math.log2(p) - (1 - p) * math.log2(1 - p)


def test_capacity_model_ordering_on_synthetic_channel():
    # distinct probabilities, nearest neighbors carrying most of the error mass
    k, N, eps, alpha = 6, 5, 0.12, 0.07
    rng = np.random.default_rng(3)
    row = np.concatenate([
        0.8 * eps * _normalized(rng.random(N) + 5.0),
        0.2 * eps * _normalized(rng.random((1 << k) - 1 - N) + 1.0),
    ])
    row = eps * row / row.sum()
    eps_star = float(row[:N].mean())
    assert eps / ((1 << k) - 1) < eps_star < eps / N
    model = CodedChannelModel(k, eps, alpha, nn_count=N, eps_star=eps_star, row=row)
    c_llb = capacity_llb(model)
    c_nnlb = capacity_nnlb(model)
    c_true = capacity_true(model)
    c_nnub = capacity_nnub(model)
    assert c_llb < c_nnlb < c_true < c_nnub + eps * math.log2(N)


def _normalized(x):
    return x / x.sum()


def test_eps_star_domain_errors():
    model = CodedChannelModel(6, 0.1, 0.0, nn_count=4, eps_star=0.1 / 2)
    with pytest.raises(ValueError):
        capacity_nnlb(model)  # above eps/N
    with pytest.raises(ValueError):
        capacity_nnlb(CodedChannelModel(6, 0.1, 0.0, nn_count=4, eps_star=0.1 / 64 / 2))


def test_model_validation():
    with pytest.raises(ValueError):
        CodedChannelModel(4, 0.8, 0.4, nn_count=1)
    with pytest.raises(ValueError):
        CodedChannelModel(4, 0.1, 0.0, nn_count=1, row=np.zeros(3))
    with pytest.raises(ValueError):
        CodedChannelModel(4, 0.1, 0.0, nn_count=1, row=np.full(15, 0.1 / 14))


CC = ConvCode.from_octal("13,17")
TRE = build_trellis(CC)
CRC9 = CrcCode.from_hex("0x9")
LAY6 = FrameLayout(6, 3, 3)


def test_estimated_row_structure():
    model = estimate_true_row(TRE, CRC9, LAY6, db_to_linear(1.0), "max", 100_000, seed=2)
    assert model.row is not None and model.row.size == 63
    assert abs(model.row.sum() - model.epsilon) < 1e-12
    assert model.alpha == 0.0  # exhaustive list never produces erasures
    spec = enumerate_spectrum(TRE, CRC9, LAY6, 24)
    assert model.nn_count == spec.a(spec.d_crc)
    # staircase: the nearest neighbors dominate the error row
    nn = nearest_neighbor_messages(TRE, CRC9, LAY6, spec.d_crc)
    assert model.row[nn].mean() > 5 * model.row[~nn].mean()
    top = np.argsort(model.row)[::-1][: model.nn_count]
    assert np.flatnonzero(nn).size == model.nn_count
    overlap = len(set(top) & set(np.flatnonzero(nn)))
    assert overlap >= int(0.6 * model.nn_count)
    assert model.eps_star is not None
    lo = model.epsilon / ((1 << 6) - 1)
    hi = model.epsilon / model.nn_count
    assert lo < model.eps_star < hi


def test_estimated_row_high_snr_concentrates_on_correct_message():
    model = estimate_true_row(TRE, CRC9, LAY6, db_to_linear(9.0), "max", 100_000, seed=4)
    assert model.epsilon < 1e-3 and model.alpha == 0.0


def test_row_symmetry_across_transmitted_messages():
    # two different transmitted messages produce statistically matching rows
    rng = np.random.default_rng(11)
    frames = 100_000
    stats = []
    for seed, msg_bits in ((0, np.zeros(6, dtype=np.uint8)), (1, rng.integers(0, 2, 6, dtype=np.uint8))):
        msgs = np.tile(msg_bits, (frames, 1))
        words = crc_encode_batch(msgs, CRC9)
        eps_count = 0
        sorted_top = np.zeros(3)
        chan = ChannelConfig.from_db(0.0)
        counts = np.zeros(1 << 6, dtype=np.int64)
        done = 0
        block = 8192
        bi = 0
        cap = max_list_size(TRE, CRC9, LAY6)
        w = (1 << np.arange(5, -1, -1)).astype(np.int64)
        while done < frames:
            size = min(block, frames - done)
            g = np.random.Generator(np.random.Philox(key=[seed + 100, bi]))
            y = add_noise(modulate(conv_encode_batch(words[done : done + size], CC)), chan, g)
            res = decode_frames(y, TRE, CRC9, cap)
            idx = (res.bits[:, :6].astype(np.int64) @ w)
            # recentre on the transmitted message: difference message index
            diff = idx ^ int(msg_bits @ w)
            np.add.at(counts, diff, 1)
            done += size
            bi += 1
        row = counts.astype(float) / frames
        stats.append((1.0 - row[0], np.sort(row[1:])[::-1][:3]))
    eps_a, top_a = stats[0]
    eps_b, top_b = stats[1]
    sigma = math.sqrt(2 * eps_a * (1 - eps_a) / frames)
    assert abs(eps_a - eps_b) < 4 * sigma
    for pa, pb in zip(top_a, top_b):
        s = math.sqrt(2 * pa * (1 - pa) / frames) + 1e-9
        assert abs(pa - pb) < 5 * s


def test_row_estimation_preconditions():
    with pytest.raises(ValueError):
        estimate_true_row(TRE, CRC9, FrameLayout(13, 3, 3), 1.0, "max", 100_000)
    with pytest.raises(ValueError):
        estimate_true_row(TRE, CRC9, LAY6, 1.0, "max", 50_000)


def test_capacity_vs_list_size_monotone_and_alpha_zero_at_cap():
    crc = CrcCode.from_hex("0x2D")
    lay = FrameLayout(16, 5, 3)
    cap = max_list_size(TRE, crc, lay)
    grid = [1, 2, 4, 8, cap]
    pts = capacity_vs_list_size(TRE, crc, lay, 2.0, grid, frames=40_000, seed=6, chunks=4)
    assert pts[0].list_size == 1
    assert pts[-1].alpha == 0.0
    for a, b in zip(pts, pts[1:]):
        assert b.capacity >= a.capacity - (a.ci95 + b.ci95)

import math

import numpy as np
import pytest

from oracles import qam16_ber, qpsk_ber
from tokcast.phy import (DEFAULT_ACM_ROWS, AcmTable, BypassFec, ChannelEstimate, FecError,
                         IdealFec, McsEntry, RepetitionFec, awgn, constellation, demodulate,
                         make_fec, modulate, select_mcs)

TABLE_I = [(-2, 0.245, 4), (0, 0.301, 4), (2, 0.514, 4), (4, 0.663, 4),
           (6, 0.424, 16), (8, 0.540, 16), (10, 0.643, 16)]


@pytest.mark.parametrize("snr, rate, order", TABLE_I)
def test_mcs_ladder(snr, rate, order):
    mcs = select_mcs(ChannelEstimate(snr))
    assert (mcs.code_rate, mcs.modulation_order) == (rate, order)


def test_mcs_between_and_below_rows():
    assert select_mcs(ChannelEstimate(6.9)).code_rate == 0.424
    assert select_mcs(ChannelEstimate(-5)).code_rate == 0.245
    assert select_mcs(ChannelEstimate(40)).code_rate == 0.643


def test_mcs_spectral_efficiency_monotone():
    effs = [select_mcs(ChannelEstimate(s)).spectral_efficiency for s in np.arange(-6, 14, 0.25)]
    assert all(b >= a for a, b in zip(effs, effs[1:]))


def test_acm_table_validation():
    with pytest.raises(ValueError):
        AcmTable(rows=())
    with pytest.raises(ValueError):
        AcmTable(rows=(McsEntry(2, 0.5, 4), McsEntry(0, 0.6, 4)))
    with pytest.raises(ValueError):
        AcmTable(bler_target=0)
    with pytest.raises(ValueError):
        McsEntry(0, 0.5, 8)


def test_acm_table_file(tmp_path):
    path = tmp_path / "acm.txt"
    path.write_text("# snr rate mod\nsnr_db,code_rate,modulation\n"
                    + "\n".join(f"{s}, {r}, {'QPSK' if m == 4 else '16QAM'}" for s, r, m in TABLE_I))
    table = AcmTable.from_file(path)
    assert table.rows == DEFAULT_ACM_ROWS
    assert table.bler_target == 0.002


def test_qpsk_mapping():
    np.testing.assert_allclose(modulate([0, 0], 4), [(1 + 1j) / math.sqrt(2)])
    np.testing.assert_allclose(modulate([1, 1], 4), [(-1 - 1j) / math.sqrt(2)])


@pytest.mark.parametrize("order", [4, 16])
def test_unit_energy(order):
    points, _ = constellation(order)
    assert np.mean(np.abs(points) ** 2) == pytest.approx(1.0, abs=1e-12)
    assert len(set(np.round(points, 9))) == order


@pytest.mark.parametrize("order", [4, 16])
def test_gray_neighbours_differ_in_one_bit(order):
    points, labels = constellation(order)
    for i, p in enumerate(points):
        d = np.abs(points - p)
        d[i] = np.inf
        for j in np.flatnonzero(np.isclose(d, d.min())):
            assert np.sum(labels[i] != labels[j]) == 1


def test_16qam_axis_levels():
    levels = sorted(set(np.round(constellation(16)[0].real * math.sqrt(10), 9)))
    assert levels == [-3, -1, 1, 3]


@pytest.mark.parametrize("order", [4, 16])
def test_noiseless_roundtrip(order, rng):
    bits = rng.integers(0, 2, 4000).astype(np.uint8)
    assert np.array_equal(demodulate(modulate(bits, order), order), bits)


def test_tail_padding():
    assert modulate([1], 4).size == 1
    assert list(demodulate(modulate([1, 0, 1], 16), 16)) == [1, 0, 1, 0]


def test_quadrant_decision():
    assert list(demodulate([(0.9 + 0.8j) / math.sqrt(2)], 4)) == [0, 0]


def test_unsupported_order():
    with pytest.raises(ValueError):
        modulate([0, 1, 0], 8)
    with pytest.raises(ValueError):
        demodulate([0j], 8)


def test_awgn_bypass_and_determinism():
    s = modulate(np.zeros(100, np.uint8), 4)
    assert np.array_equal(awgn(s, math.inf, np.random.default_rng(0)), s)
    a = awgn(s, 3.0, np.random.default_rng(7))
    b = awgn(s, 3.0, np.random.default_rng(7))
    assert np.array_equal(a, b)


def test_awgn_variance():
    n = 10**6
    s = np.zeros(n, complex)
    for snr in (0.0, 6.0):
        noise = awgn(s, snr, np.random.default_rng(1))
        sigma2 = 10 ** (-snr / 10)
        assert np.mean(np.abs(noise) ** 2) == pytest.approx(sigma2, rel=0.01)
        assert np.var(noise.real) == pytest.approx(sigma2 / 2, rel=0.01)


def test_qpsk_ber_at_4db():
    assert qpsk_ber(4.0) == pytest.approx(0.0125, abs=5e-5)
    rng = np.random.default_rng(11)
    bits = rng.integers(0, 2, 10**6).astype(np.uint8)
    esn0 = 4.0 + 10 * math.log10(2)
    err = np.mean(demodulate(awgn(modulate(bits, 4), esn0, rng), 4) != bits)
    assert abs(err / qpsk_ber(4.0) - 1) <= 0.15


def test_16qam_ber_at_10db():
    rng = np.random.default_rng(12)
    bits = rng.integers(0, 2, 10**6).astype(np.uint8)
    err = np.mean(demodulate(awgn(modulate(bits, 16), 10.0, rng), 16) != bits)
    assert abs(err / qam16_ber(10.0) - 1) <= 0.15


def test_ideal_fec_zero_bler_is_identity(rng):
    bits = rng.integers(0, 2, 100).astype(np.uint8)
    fec = IdealFec(0.0)
    mcs = DEFAULT_ACM_ROWS[4]
    out, ok = fec.decode(fec.encode(bits, mcs), mcs, bits.size, rng)
    assert ok and np.array_equal(out, bits)


def test_ideal_fec_failure_rate():
    rng = np.random.default_rng(3)
    fec, mcs, eps, n = IdealFec(0.002), DEFAULT_ACM_ROWS[0], 0.002, 10**5
    bits = np.zeros(8, np.uint8)
    fails = sum(not fec.decode(bits, mcs, 8, rng)[1] for _ in range(n))
    assert abs(fails / n - eps) <= 3 * math.sqrt(eps * (1 - eps) / n)


def test_repetition_noiseless(rng):
    bits = rng.integers(0, 2, 99).astype(np.uint8)
    fec = RepetitionFec(3)
    mcs = DEFAULT_ACM_ROWS[0]
    coded = fec.encode(bits, mcs)
    assert coded.size == 297
    out, ok = fec.decode(demodulate(modulate(coded, 4), 4), mcs, bits.size)
    assert ok and np.array_equal(out, bits)


def test_repetition_factor_follows_rate():
    fec = RepetitionFec()
    assert fec.factor(McsEntry(0, 0.245, 4)) == 4
    assert fec.factor(McsEntry(0, 0.663, 4)) == 1
    assert fec.rate_mismatch(McsEntry(0, 0.245, 4)) == pytest.approx(0.005)


def test_repetition_majority_corrects():
    fec = RepetitionFec(3)
    mcs = DEFAULT_ACM_ROWS[0]
    out, _ = fec.decode(np.array([1, 0, 1, 0, 0, 1], np.uint8), mcs, 2)
    assert list(out) == [1, 0]
    even = RepetitionFec(2)
    out, _ = even.decode(np.array([1, 0, 0, 1], np.uint8), mcs, 2)
    assert list(out) == [1, 0]


def test_fec_budget_check():
    mcs = DEFAULT_ACM_ROWS[0]
    for fec in (IdealFec(), RepetitionFec(), BypassFec()):
        with pytest.raises(FecError):
            fec.encode(np.zeros(10, np.uint8), mcs, budget=9)


def test_make_fec():
    assert isinstance(make_fec("ideal"), IdealFec)
    assert isinstance(make_fec("repetition", repeats=3), RepetitionFec)
    assert isinstance(make_fec("bypass"), BypassFec)
    with pytest.raises(ValueError):
        make_fec("ldpc")

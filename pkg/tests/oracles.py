"""Independent reference implementations used only by the tests.

None of these import the code paths they check.
"""
import math

import numpy as np


def naive_crc16(bits):
    """Bit-serial CRC-16/CCITT-FALSE."""
    crc = 0xFFFF
    for b in bits:
        top = ((crc >> 15) & 1) ^ int(b)
        crc = (crc << 1) & 0xFFFF
        if top:
            crc ^= 0x1021
    return crc


def naive_packet(codes, mask, k, b_val):
    """Packet bit list built one bit at a time as plain Python ints."""
    out = []

    def put(value, width):
        for i in reversed(range(width)):
            out.append((value >> i) & 1)

    put(k, 16)
    header = [int(m) for m in mask[:k]]
    body = []
    for i in range(k):
        if mask[i]:
            for j in reversed(range(b_val)):
                body.append((int(codes[i]) >> j) & 1)
    out.extend(header)
    out.extend(body)
    put(naive_crc16(out[:16] + header + body), 16)
    while len(out) % 8:
        out.append(0)
    return out


def scan_k_star(mask, b_val, budget, overhead=0):
    """Exhaustive: evaluate the frame cost for every K and keep the largest feasible."""
    best = -1
    count = 0
    for k in range(len(mask) + 1):
        if k > 0:
            count += int(mask[k - 1])
        if k + b_val * count + overhead <= budget:
            best = k
    return best


def scan_k_star_vec(mask, b_val, budget, overhead=0):
    """Same exhaustive scan with numpy: cost of every K at once, largest feasible index."""
    mask = np.asarray(mask, dtype=np.int64)
    counts = np.concatenate([[0], np.cumsum(mask)])
    cost = np.arange(mask.size + 1) + b_val * counts + overhead
    ok = np.flatnonzero(cost <= budget)
    return int(ok[-1]) if ok.size else -1


def qpsk_ber(ebn0_db):
    return 0.5 * math.erfc(math.sqrt(10 ** (ebn0_db / 10)))


def qam16_ber(esn0_db):
    return 3.0 / 8.0 * math.erfc(math.sqrt(10 ** (esn0_db / 10) / 10))


def direct_block_dct(block):
    """2D orthonormal DCT-II by the textbook double sum."""
    n = block.shape[0]
    out = np.zeros((n, n))
    for u in range(n):
        for v in range(n):
            cu = math.sqrt(1 / n) if u == 0 else math.sqrt(2 / n)
            cv = math.sqrt(1 / n) if v == 0 else math.sqrt(2 / n)
            s = 0.0
            for x in range(n):
                for y in range(n):
                    s += block[x, y] * math.cos((2 * x + 1) * u * math.pi / (2 * n)) \
                        * math.cos((2 * y + 1) * v * math.pi / (2 * n))
            out[u, v] = cu * cv * s
    return out


JPEG_ZIGZAG_64 = [
    0, 1, 8, 16, 9, 2, 3, 10, 17, 24, 32, 25, 18, 11, 4, 5,
    12, 19, 26, 33, 40, 48, 41, 34, 27, 20, 13, 6, 7, 14, 21, 28,
    35, 42, 49, 56, 57, 50, 43, 36, 29, 22, 15, 23, 30, 37, 44, 51,
    58, 59, 52, 45, 38, 31, 39, 46, 53, 60, 61, 54, 47, 55, 62, 63,
]

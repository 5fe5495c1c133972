"""Exact reference for the coherence-length pipeline.

Written independently of the Rust crate: plain trigonometry per direction,
rational arithmetic (fractions.Fraction) for every threshold test and for the
directional-defect quantities. Used to produce the frozen values asserted in
tests/derived_values.rs and the acceptance suite.

    python3 cld_reference.py <scene> [args]
"""
import math
import sys
from fractions import Fraction as F


def round_half_away(x):
    return int(math.floor(abs(x) + 0.5)) * (1 if x >= 0 else -1)


def offsets(n_d, k, r_max):
    theta = k * 2 * math.pi / n_d
    return [(round_half_away(r * math.cos(theta)), round_half_away(r * math.sin(theta))) for r in range(r_max + 1)]


def r_max_of(h, w):
    return math.isqrt(h * h + w * w - 1) + 1


def local_length(img, i, j, offs, tau, mean, literal):
    h, w = len(img), len(img[0])
    total = 0
    for r, (di, dj) in enumerate(offs):
        a, b = i + di, j + dj
        if not (0 <= a < h and 0 <= b < w):
            return None
        total += img[a][b]
        if r == 0:
            continue
        m = F(total, r if literal else r + 1)
        if abs(m - mean) <= tau * mean:
            return r
    return None


def field(img, tau, n_d=32, literal=False):
    h, w = len(img), len(img[0])
    mean = F(sum(map(sum, img)), h * w)
    rm = r_max_of(h, w)
    offs = [offsets(n_d, k, rm) for k in range(1, n_d + 1)]
    tau = F(tau)
    return [[[local_length(img, i, j, offs[k], tau, mean, literal) for k in range(n_d)] for j in range(w)] for i in range(h)]


def averages(fld, n_d=32):
    sums, cards = [0] * n_d, [0] * n_d
    for row in fld:
        for px in row:
            for k, l in enumerate(px):
                if l is not None:
                    sums[k] += l
                    cards[k] += 1
    return [F(s, c) if c else None for s, c in zip(sums, cards)], cards


def eligible(px, avg):
    return [(l, a) for l, a in zip(px, avg) if l is not None and a is not None]


def psi(px, avg, tau_p):
    el = eligible(px, avg)
    if not el:
        return None
    tp = F(tau_p)
    ok = sum(1 for l, a in el if a * (1 - tp) <= l <= a * (1 + tp))
    return F(2 * ok, len(el)) - 1


def q_raw(px, avg):
    return sum((l - a) ** 2 for l, a in eligible(px, avg))


def rho(px, avg):
    el = eligible(px, avg)
    return sum(a for _, a in el) / sum(l for l, _ in el)


def q_norm(px, avg, n_d=32):
    el = eligible(px, avg)
    if not el:
        return None
    p = rho(px, avg)
    return F(n_d, len(el)) * sum((p * l - a) ** 2 for l, a in el)


def read_pgm(path):
    data = open(path, 'rb').read()
    parts = data.split(maxsplit=4)
    assert parts[0] == b'P5'
    w, h = int(parts[1]), int(parts[2])
    raw = parts[4]
    return [list(raw[r * w:(r + 1) * w]) for r in range(h)]


def stripes(h, w, period, low, high):
    return [[low if c % period < period // 2 else high for c in range(w)] for _ in range(h)]


def lcg_image(h, w, seed):
    state = seed
    out = []
    for _ in range(h):
        row = []
        for _ in range(w):
            state = (state * 6364136223846793005 + 1442695040888963407) % (1 << 64)
            row.append(state >> 56)
        out.append(row)
    return out

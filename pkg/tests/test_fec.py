import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from droneid import fec
from droneid.errors import IntegrityError

from _util import flip_bits, random_block

# -- independent reference implementations -------------------------------------


def crc24_bitwise(data: bytes) -> int:
    """Polynomial long division, one message bit at a time."""
    poly = (1 << 24) | 0x864CFB
    reg = 0
    for byte in data:
        for i in range(7, -1, -1):
            reg = (reg << 1) | ((byte >> i) & 1)
            if reg & (1 << 24):
                reg ^= poly
    for _ in range(24):  # flush: multiply by x^24
        reg <<= 1
        if reg & (1 << 24):
            reg ^= poly
    return reg


def rsc_reference(bits):
    """Shift-register constituent encoder: g0 = 1+D^2+D^3 (feedback), g1 = 1+D+D^3."""
    s = [0, 0, 0]
    x, z = [], []
    for u in bits:
        a = u ^ s[1] ^ s[2]
        z.append(a ^ s[0] ^ s[2])
        x.append(u)
        s = [a, s[0], s[1]]
    xt, zt = [], []
    for _ in range(3):
        u = s[1] ^ s[2]  # input that zeroes the feedback
        a = 0
        zt.append(a ^ s[0] ^ s[2])
        xt.append(u)
        s = [a, s[0], s[1]]
    assert s == [0, 0, 0]
    return x, z, xt, zt


def turbo_reference(bits):
    k = len(bits)
    perm = [(217 * i + 48 * i * i) % k for i in range(k)]
    x, z, xt, zt = rsc_reference(bits)
    _, z2, xt2, zt2 = rsc_reference([bits[p] for p in perm])
    d0 = x + [xt[0], zt[1], xt2[0], zt2[1]]
    d1 = z + [zt[0], xt[2], zt2[0], xt2[2]]
    d2 = z2 + [xt[1], zt[2], xt2[1], zt2[2]]
    return d0 + d1 + d2


def rate_match_reference(coded, e=7200):
    """Sub-block interleavers, bit collection and circular read, with explicit NULLs."""
    perm_c = [0, 16, 8, 24, 4, 20, 12, 28, 2, 18, 10, 26, 6, 22, 14, 30,
              1, 17, 9, 25, 5, 21, 13, 29, 3, 19, 11, 27, 7, 23, 15, 31]
    d_len = len(coded) // 3
    streams = [coded[i * d_len:(i + 1) * d_len] for i in range(3)]
    c = 32
    r = (d_len + c - 1) // c
    kpi = r * c
    nd = kpi - d_len
    v = []
    for idx, d in enumerate(streams):
        y = [None] * nd + list(d)
        if idx < 2:
            matrix = [y[row * c:(row + 1) * c] for row in range(r)]
            out = []
            for col in perm_c:
                for row in range(r):
                    out.append(matrix[row][col])
        else:
            out = [y[(perm_c[k // r] + c * (k % r) + 1) % kpi] for k in range(kpi)]
        v.append(out)
    w = v[0] + [b for pair in zip(v[1], v[2]) for b in pair]
    ncb = len(w)
    k0 = r * (2 * -(-ncb // (8 * r)) * 0 + 2)
    out, j = [], 0
    while len(out) < e:
        b = w[(k0 + j) % ncb]
        if b is not None:
            out.append(b)
        j += 1
    return out


# -- CRC ------------------------------------------------------------------------


def test_crc_empty():
    assert fec.crc24(b"") == b"\x00\x00\x00"


def test_crc_known_bytes():
    data = bytes(range(1, 9))
    assert fec.crc24_int(data) == crc24_bitwise(data)


@settings(max_examples=200, deadline=None)
@given(st.binary(max_size=120))
def test_crc_matches_bitwise(data):
    assert fec.crc24_int(data) == crc24_bitwise(data)


@settings(max_examples=100, deadline=None)
@given(st.binary(max_size=120))
def test_crc_self_check(data):
    assert fec.check_crc(fec.attach_crc(data))


def test_crc_linearity(rng):
    for _ in range(200):
        n = int(rng.integers(1, 100))
        a, b = rng.bytes(n), rng.bytes(n)
        x = bytes(p ^ q for p, q in zip(a, b))
        assert fec.crc24_int(x) == fec.crc24_int(a) ^ fec.crc24_int(b)


# -- turbo encoder --------------------------------------------------------------


def test_qpp_is_permutation():
    perm = fec.qpp_interleaver(768)
    assert sorted(perm.tolist()) == list(range(768))


def test_unsupported_block_size():
    with pytest.raises(ValueError):
        fec.qpp_interleaver(100)
    with pytest.raises(ValueError):
        fec.turbo_encode(np.zeros(100, np.uint8))


def test_encoder_matches_reference(rng):
    for _ in range(5):
        bits = rng.integers(0, 2, 768, dtype=np.uint8)
        out = fec.turbo_encode(bits)
        assert out.shape == (2316,)
        assert out[:768].tolist() == bits.tolist()
        assert out.tolist() == turbo_reference(bits.tolist())


def test_rate_match_matches_reference(rng):
    coded = rng.integers(0, 2, 2316, dtype=np.uint8)
    assert fec.rate_match(coded).tolist() == rate_match_reference(coded.tolist())


def test_every_coded_bit_repeated():
    counts = np.bincount(fec._selection(), minlength=2316)
    assert counts.min() >= 7200 // 2316
    assert counts.sum() == 7200


def test_dematch_sign_recovers(rng):
    coded = rng.integers(0, 2, 2316, dtype=np.uint8)
    soft = fec.rate_dematch(fec.hard_to_llr(fec.rate_match(coded)))
    assert np.array_equal((soft < 0).astype(np.uint8), coded)


def test_length_checks():
    with pytest.raises(ValueError):
        fec.rate_match(np.zeros(2315, np.uint8))
    with pytest.raises(ValueError):
        fec.rate_dematch(np.zeros(7201))
    with pytest.raises(ValueError):
        fec.turbo_decode(np.zeros(7000, np.uint8))


# -- decoder --------------------------------------------------------------------


def test_decode_loopback(rng):
    for _ in range(100):
        block = random_block(rng)
        assert fec.turbo_decode(fec.encode_block(block)) == block


def test_decode_with_bit_flips(rng):
    ok = 0
    for _ in range(100):
        block = random_block(rng)
        try:
            ok += fec.turbo_decode(flip_bits(fec.encode_block(block), 0.05, rng)) == block
        except IntegrityError:
            pass
    assert ok >= 99


def test_random_input_never_passes(rng):
    for _ in range(100):
        with pytest.raises(IntegrityError) as exc:
            fec.turbo_decode(rng.integers(0, 2, 7200, dtype=np.uint8))
        assert exc.value.residual != 0
        assert exc.value.iterations == fec.MAX_ITERATIONS


def test_all_zero_codeword_blind_spot():
    # the zero block has CRC 0 and is a valid codeword of a linear code
    assert fec.turbo_decode(np.zeros(7200, np.uint8)) == bytes(96)


def test_decoder_deterministic(rng):
    bits = flip_bits(fec.encode_block(random_block(rng)), 0.1, rng)
    soft = fec.rate_dematch(fec.hard_to_llr(bits))
    assert fec.turbo_decode_soft(soft) == fec.turbo_decode_soft(soft)


def test_early_exit(rng):
    soft = fec.rate_dematch(fec.hard_to_llr(fec.encode_block(random_block(rng))))
    _, residual, iterations = fec.turbo_decode_soft(soft)
    assert residual == 0 and iterations == 1


def test_bits_bytes_roundtrip(rng):
    data = rng.bytes(96)
    bits = fec.bytes_to_bits(data)
    assert bits.size == 768
    assert bits[:8].tolist() == [(data[0] >> (7 - i)) & 1 for i in range(8)]
    assert fec.bits_to_bytes(bits) == data

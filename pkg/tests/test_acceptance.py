"""End-to-end acceptance checks, one test per criterion.

Each test prints a ``criterion N PASS|FAIL`` line (collected again in the
terminal summary) before asserting.
"""

import struct
import time

import numpy as np
import pytest

from droneid import fec, frames, iq, tables, wifi
from droneid.cli import detect_file
from droneid.errors import IntegrityError
from droneid.receiver import receive
from droneid.refsig import gold_sequence, zadoff_chu
from droneid.synth import Impairments, build_burst, build_capture

from _util import flip_bits, random_block, random_frame
from conftest import report
from test_frames import angle_rule
from test_refsig import naive_gold, naive_zc
from test_tables import reference_rows

SEED = 0x5EED


def _decode_rate(trials, rng, imp_for_trial):
    ok = 0
    for i in range(trials):
        block = random_block(rng)
        rx = receive(build_burst(block, imp_for_trial(i), rng=rng))
        ok += len(rx) == 1 and rx[0].block == block
    return ok


def test_criterion_01_loopback_identity():
    rng = np.random.default_rng(SEED + 1)
    t0 = time.perf_counter()
    exact = 0
    for _ in range(1000):
        frame = random_frame(rng)
        block = frames.serialize_frame(frame)
        rx = receive(build_burst(block, Impairments(pad_samples=2000)))
        exact += len(rx) == 1 and rx[0].block == block and frames.parse_frame(rx[0].block) == frame
    elapsed = time.perf_counter() - t0
    ok = exact == 1000 and elapsed < 60
    report(1, "loopback identity", ok, f"{exact}/1000 frames bit-exact in {elapsed:.1f} s (limit 60 s)")
    assert ok


def test_criterion_02_golden_vectors():
    block = bytearray(96)
    block[0:2] = b"\x02\x10"
    block[0x20:0x30] = bytes.fromhex("62 02 02 00 03 00 F1 FF 36 1D 44 4E 5D 57 6E 01")
    block[0x30:0x40] = bytes.fromhex("00 00 DF 45 60 00 1F 73 00 FF 20 73 00 FF DF 45")
    f = frames.parse_frame(bytes(block))
    rec = frames.to_detection_record(f)
    checks = {
        "height": rec.height == 61.0,
        "speeds": (rec.x_speed, rec.y_speed, rec.z_speed) == (0.02, 0.03, -0.15),
        "total_speed": abs(rec.total_speed - 0.15427248620541512) <= 1e-12,
        "yaw": rec.yaw == 254.78,
        "pilot_gps_clock": rec.pilot_gps_clock == 1573423763.012,
        "pilot_latitude": abs(rec.pilot_latitude - 36.14987254004094) <= 1e-6,
        "pilot_longitude": abs(rec.pilot_longitude - -95.95751048613268) <= 1e-6,
        "home_longitude": abs(rec.home_longitude - -95.95750475655475) <= 1e-6,
    }
    failed = [k for k, v in checks.items() if not v]
    report(2, "golden vectors", not failed,
           f"{len(checks) - len(failed)}/{len(checks)} fields match" + (f" (failed: {failed})" if failed else ""))
    assert not failed


@pytest.mark.slow
def test_criterion_03_impairment_robustness():
    rng = np.random.default_rng(SEED + 3)
    trials = 200
    # both band edges, then uniform over the range
    cfos = np.r_[7000.0, -7000.0, rng.uniform(-7000, 7000, trials - 2)]
    robust = _decode_rate(trials, rng, lambda i: Impairments(cfo_hz=cfos[i], snr_db=25, pad_samples=3000))
    sweep = {}
    for snr in (30, 20, 15, 10, 5):
        cf = rng.uniform(-7000, 7000, trials)
        sweep[snr] = _decode_rate(trials, rng, lambda i: Impairments(cfo_hz=cf[i], snr_db=snr, pad_samples=3000))
    rates = [sweep[s] for s in (30, 20, 15, 10, 5)]
    monotone = all(a >= b for a, b in zip(rates, rates[1:]))
    ok = robust >= 0.99 * trials and monotone
    report(3, "impairment robustness", ok,
           f"{robust}/{trials} at 25 dB, CFO in +-7 kHz; sweep 30/20/15/10/5 dB -> {rates}")
    assert ok


def test_criterion_04_burst_timing():
    rng = np.random.default_rng(SEED + 4)
    n = 100
    gaps = rng.integers(12_000, 30_000, n)
    offsets = np.cumsum(gaps).tolist()
    blocks = [random_block(rng) for _ in range(n)]
    cap = build_capture(list(zip(blocks, offsets)),
                        Impairments(snr_db=20, cfo_hz=float(rng.uniform(-7000, 7000)), pad_samples=15_000),
                        rng=rng)
    base = [r.burst.start_index for r in receive(cap)]
    matched = len(base) == n and all(abs(a - b) <= 2 for a, b in zip(base, offsets))
    scaled = {s: [r.burst.start_index for r in receive(cap.samples * s)] for s in (0.01, 100.0)}
    same = all(v == base for v in scaled.values())
    worst = max(abs(a - b) for a, b in zip(base, offsets)) if len(base) == n else None
    ok = matched and same
    report(4, "burst timing", ok,
           f"{len(base)}/{n} bursts found, worst start error {worst} samples; "
           f"0.01x and 100x scaling {'unchanged' if same else 'CHANGED'}")
    assert ok


def test_criterion_05_sequence_oracles():
    gold_ok = gold_sequence().tolist() == naive_gold()
    zc_err = max(float(np.max(np.abs(zadoff_chu(r).values - np.array(naive_zc(r))))) for r in (600, 147))
    side = 0.0
    for root in (600, 147):
        k = np.arange(601)
        seq = np.exp(-1j * np.pi * root * k * (k + 1) / 601)
        corr = np.abs(np.fft.ifft(np.abs(np.fft.fft(seq)) ** 2))
        side = max(side, float(np.max(corr[1:]) / corr[0]))
    ok = gold_ok and zc_err < 1e-12 and side < 1e-6
    report(5, "sequence oracles", ok,
           f"gold 7200 bits {'equal' if gold_ok else 'DIFFER'}; ZC max error {zc_err:.1e}; "
           f"sidelobe ratio {side:.1e}")
    assert ok


def test_criterion_06_table_coverage():
    rows = reference_rows()
    id_ok = all(tables.aeroscope_model(i) == m for m, _, i in rows)
    prefix_total = prefix_ok = 0
    seen = set()
    for model, plist, _ in rows:
        for p in plist:
            prefix_total += 1
            cands = [e.model for e in tables.model_candidates(p + "123")]
            hit = tables.model_lookup(p + "123")
            first_owner = p not in seen
            seen.add(p)
            prefix_ok += model in cands and hit is not None and (hit[0] == model or not first_owner)
    p24, p58 = tables.hop_plan("2.4"), tables.hop_plan("5.8")
    spacing = all(b - a == 15_000_000 for plan in (p24, p58) for a, b in zip(plan, plan[1:]))
    ok = (id_ok and prefix_ok == prefix_total and tables.aeroscope_model(240) == "YUNEEC H480"
          and len(p24) == 6 and len(p58) == 7 and spacing)
    report(6, "table coverage", ok,
           f"{len(rows)} AeroScope IDs, {prefix_ok}/{prefix_total} prefix rows; hop plans "
           f"{len(p24)}+{len(p58)} at 15 MHz spacing")
    assert ok


def test_criterion_07_angle_conversion():
    bad = [a for a in range(-360, 361) if frames.angle_to_quantity(a) != angle_rule(a)]
    report(7, "angle conversion", not bad, f"{721 - len(bad)}/721 integer angles follow the branch rules")
    assert not bad


def test_criterion_08_fec_layer():
    rng = np.random.default_rng(SEED + 8)
    passes = 0
    for _ in range(100):
        try:
            fec.turbo_decode(rng.integers(0, 2, 7200, dtype=np.uint8))
            passes += 1
        except IntegrityError:
            pass
    recovered = 0
    for _ in range(100):
        block = random_block(rng)
        try:
            recovered += fec.turbo_decode(flip_bits(fec.encode_block(block), 0.05, rng)) == block
        except IntegrityError:
            pass
    linear = 0
    for _ in range(1000):
        n = int(rng.integers(1, 97))
        a, b = rng.bytes(n), rng.bytes(n)
        linear += fec.crc24_int(bytes(x ^ y for x, y in zip(a, b))) == fec.crc24_int(a) ^ fec.crc24_int(b)
    ok = passes == 0 and recovered >= 99 and linear == 1000
    report(8, "FEC layer", ok,
           f"{passes}/100 random inputs pass CRC; {recovered}/100 recovered at 5% flips; "
           f"CRC linear on {linear}/1000 pairs")
    assert ok


def test_criterion_09_wifi():
    rng = np.random.default_rng(SEED + 9)
    roundtrip = all(
        wifi.extract_droneid(wifi.parse_beacon(wifi.build_beacon(rng.bytes(n)))) is not None
        and wifi.extract_droneid(wifi.parse_beacon(wifi.build_beacon(p := rng.bytes(n)))) == p
        for n in range(1, 244)
    )
    dji = ["60:60:1f", "34:d2:62", "48:1c:b9"]
    parrot = ["00:12:1c", "90:03:b7", "a0:14:3d", "00:26:7e"]
    cls_ok = all(wifi.classify_vendor(wifi.parse_beacon(wifi.build_beacon(sender=o + ":00:00:01"))) == "DJI"
                 for o in dji)
    cls_ok &= all(wifi.classify_vendor(wifi.parse_beacon(wifi.build_beacon(sender=o + ":00:00:01"))) == "Parrot"
                  for o in parrot)
    wrong = wifi.extract_droneid(wifi.parse_beacon(
        wifi.build_beacon(b"\x01" * 76, magic=bytes.fromhex("263712586299")))) is None
    ok = roundtrip and cls_ok and wrong
    report(9, "Wi-Fi", ok,
           f"payloads 1..243 {'round-trip' if roundtrip else 'FAIL'}; 3 DJI + 4 Parrot OUIs "
           f"{'classified' if cls_ok else 'MISCLASSIFIED'}; wrong magic {'ignored' if wrong else 'ACCEPTED'}")
    assert ok


def test_criterion_10_formats(tmp_path):
    rng = np.random.default_rng(SEED + 10)
    raw = rng.integers(0, 256, 1 << 20, dtype=np.uint8).tobytes()
    cs8_ok = iq.write_cs8(iq.read_cs8(raw)) == raw
    floats = rng.standard_normal(1 << 18).astype("<f4")
    fraw = floats.tobytes()
    fc32_ok = iq.write_fc32(iq.read_fc32(fraw)) == fraw

    blocks = [frames.serialize_frame(random_frame(rng, k)) for k in ("v2", "v1", "license")]
    cap = build_capture(list(zip(blocks, (8000, 40_000, 75_000))),
                        Impairments(snr_db=20, cfo_hz=3000, amplitude=32, pad_samples=8000), rng=rng)
    cs8_path, fc32_path = tmp_path / "cap.cs8", tmp_path / "cap.fc32"
    iq.save(cs8_path, cap)
    iq.save(fc32_path, iq.read_cs8(cs8_path.read_bytes()))
    a = [r.to_dict() for r in detect_file(cs8_path, "cs8")]
    b = [r.to_dict() for r in detect_file(fc32_path, "fc32")]
    same = a == b and len(a) == 3
    ok = cs8_ok and fc32_ok and same
    report(10, "formats", ok,
           f"1 MB cs8 {'exact' if cs8_ok else 'MISMATCH'}, 1 MB fc32 {'exact' if fc32_ok else 'MISMATCH'}; "
           f"cs8 vs fc32 detection records {'identical' if same else 'DIFFER'} ({len(a)} vs {len(b)})")
    assert ok

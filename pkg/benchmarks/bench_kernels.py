"""Compare the numba and numpy kernel backends.

    python3 benchmarks/bench_kernels.py [--repeat N]

The BCJR and peak-suppression kernels are timed directly through their
``_nb``/``_np`` variants.  The full burst decode is timed in two child
processes, one of them with ``DRONEID_DISABLE_JIT=1``, because the backend is
chosen at import time.
"""

import argparse
import json
import os
import subprocess
import sys
import timeit

import numpy as np

from droneid import fec, kernels

_DECODE_CHILD = r"""
import json, sys, timeit
import numpy as np
from droneid import fec, kernels
from droneid.receiver import receive
from droneid.synth import Impairments, build_burst
rng = np.random.default_rng(7)
block = fec.attach_crc(rng.bytes(93))
burst = build_burst(block, Impairments(snr_db=8, cfo_hz=2000, pad_samples=2000), rng=rng)
receive(burst)  # compile / warm up
n = int(sys.argv[1])
t = min(timeit.repeat(lambda: receive(burst), number=1, repeat=n))
print(json.dumps({"backend": kernels.BACKEND, "seconds": t}))
"""


def _best(fn, repeat):
    fn()
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def bench_bcjr(repeat):
    rng = np.random.default_rng(1)
    next_state, parity, tail_input = fec.trellis()
    n = fec.K + 3
    sys_llr = rng.normal(0, 4, n)
    par_llr = rng.normal(0, 4, n)
    apriori = np.zeros(n)
    args = (sys_llr, par_llr, apriori, next_state, parity, tail_input)
    return {
        "numba": _best(lambda: kernels._bcjr_nb(*args), repeat),
        "numpy": _best(lambda: kernels._bcjr_np(*args), repeat),
    }


def bench_suppress(repeat):
    rng = np.random.default_rng(2)
    order = rng.permutation(1_500_000)[:20_000].astype(np.int64)
    return {
        "numba": _best(lambda: kernels._suppress_peaks_nb(order, 9880), repeat),
        "numpy": _best(lambda: kernels._suppress_peaks_np(order, 9880), repeat),
    }


def bench_decode(repeat):
    out = {}
    for label, flag in (("numba", "0"), ("numpy", "1")):
        env = dict(os.environ, DRONEID_DISABLE_JIT=flag)
        res = subprocess.run([sys.executable, "-c", _DECODE_CHILD, str(repeat)],
                             env=env, capture_output=True, text=True, check=True)
        rec = json.loads(res.stdout.strip().splitlines()[-1])
        out[label] = rec["seconds"] if rec["backend"] == label else float("nan")
    return out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    if not kernels.NUMBA_AVAILABLE:
        sys.exit("numba is not installed; nothing to compare")
    rows = [
        ("bcjr (K=768)", bench_bcjr(args.repeat)),
        ("suppress_peaks (20k)", bench_suppress(args.repeat)),
        ("receive one burst", bench_decode(args.repeat)),
    ]
    print(f"{'kernel':<22}{'numba ms':>12}{'numpy ms':>12}{'speedup':>10}")
    for name, t in rows:
        print(f"{name:<22}{t['numba'] * 1e3:>12.3f}{t['numpy'] * 1e3:>12.3f}{t['numpy'] / t['numba']:>9.1f}x")


if __name__ == "__main__":
    main()

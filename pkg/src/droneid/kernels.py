"""Hot inner loops, compiled with numba when available.

Every kernel exists twice: a ``_nb`` variant decorated with ``@njit`` and a
``_np`` variant written with plain numpy.  The public names bound at the bottom
of this module point at one or the other:

* numba is used when it imports cleanly and ``DRONEID_DISABLE_JIT`` is unset
  (or ``0``);
* setting ``DRONEID_DISABLE_JIT=1`` forces the numpy path, which is handy for
  debugging and for checking that both paths agree.

The numba variants are compiled lazily on first call and cached on disk.
"""

import os

import numpy as np

try:
    from numba import njit

    NUMBA_AVAILABLE = True
except ImportError:  # pragma: no cover - exercised only without numba
    NUMBA_AVAILABLE = False

    def njit(*args, **kwargs):
        def decorator(func):
            return func

        if len(args) == 1 and callable(args[0]):
            return args[0]
        return decorator


def _jit_requested() -> bool:
    return os.environ.get("DRONEID_DISABLE_JIT", "0").strip().lower() in ("", "0", "false", "no")


USE_NUMBA = NUMBA_AVAILABLE and _jit_requested()
BACKEND = "numba" if USE_NUMBA else "numpy"

# stands in for -inf in the max-log recursions; avoids inf - inf = nan
NEG = -1.0e30


# =============================================================================
# Max-log-MAP (BCJR) for one recursive systematic constituent code
# =============================================================================
#
# Trellis tables (built in fec.py):
#   next_state[s, u]  state reached from s with input u
#   parity[s, u]      parity bit emitted on that branch
#   tail_input[s]     input that drives the feedback to zero (termination)
#
# Soft values are LLRs log(P(0)/P(1)); a branch with bit b contributes
# +L/2 when b == 0 and -L/2 otherwise.


@njit(cache=True)
def _bcjr_nb(sys_llr, par_llr, apriori, next_state, parity, tail_input):
    n_steps = sys_llr.shape[0]
    k = apriori.shape[0]
    n_states = next_state.shape[0]

    alpha = np.full((n_steps + 1, n_states), NEG)
    alpha[0, 0] = 0.0
    for t in range(n_steps):
        la = apriori[t] if t < k else 0.0
        hs = 0.5 * (sys_llr[t] + la)
        hp = 0.5 * par_llr[t]
        for s in range(n_states):
            a = alpha[t, s]
            if a <= NEG:
                continue
            for u in range(2):
                if t >= k and u != tail_input[s]:
                    continue
                g = (hs if u == 0 else -hs) + (hp if parity[s, u] == 0 else -hp)
                ns = next_state[s, u]
                if a + g > alpha[t + 1, ns]:
                    alpha[t + 1, ns] = a + g
        top = alpha[t + 1, 0]
        for s in range(1, n_states):
            if alpha[t + 1, s] > top:
                top = alpha[t + 1, s]
        for s in range(n_states):
            if alpha[t + 1, s] > NEG:
                alpha[t + 1, s] -= top

    beta = np.full(n_states, NEG)
    beta[0] = 0.0
    prev_beta = np.empty(n_states)
    out = np.empty(k)
    for t in range(n_steps - 1, -1, -1):
        la = apriori[t] if t < k else 0.0
        hs = 0.5 * (sys_llr[t] + la)
        hp = 0.5 * par_llr[t]
        best0 = NEG
        best1 = NEG
        for s in range(n_states):
            prev_beta[s] = NEG
            for u in range(2):
                if t >= k and u != tail_input[s]:
                    continue
                g = (hs if u == 0 else -hs) + (hp if parity[s, u] == 0 else -hp)
                b = beta[next_state[s, u]]
                if b <= NEG:
                    continue
                if g + b > prev_beta[s]:
                    prev_beta[s] = g + b
                if t < k and alpha[t, s] > NEG:
                    m = alpha[t, s] + g + b
                    if u == 0:
                        if m > best0:
                            best0 = m
                    elif m > best1:
                        best1 = m
        if t < k:
            out[t] = best0 - best1
        top = NEG
        for s in range(n_states):
            if prev_beta[s] > top:
                top = prev_beta[s]
        for s in range(n_states):
            beta[s] = prev_beta[s] - top if prev_beta[s] > NEG else NEG
    return out


def _bcjr_np(sys_llr, par_llr, apriori, next_state, parity, tail_input):
    n_steps = sys_llr.shape[0]
    k = apriori.shape[0]
    n_states = next_state.shape[0]
    states = np.arange(n_states)
    sign_p = 1.0 - 2.0 * parity  # (S, 2)
    sign_u = np.array([1.0, -1.0])
    tail_mask = np.full((n_states, 2), NEG)
    tail_mask[states, tail_input] = 0.0
    la = np.concatenate([apriori, np.zeros(n_steps - k)])

    gammas = (
        0.5 * (sys_llr + la)[:, None, None] * sign_u[None, None, :]
        + 0.5 * par_llr[:, None, None] * sign_p[None, :, :]
    )
    gammas[k:] += tail_mask[None, :, :]

    alpha = np.full((n_steps + 1, n_states), NEG)
    alpha[0, 0] = 0.0
    for t in range(n_steps):
        cand = alpha[t][:, None] + gammas[t]
        nxt = np.full(n_states, NEG)
        np.maximum.at(nxt, next_state.ravel(), cand.ravel())
        nxt = np.maximum(nxt, NEG)
        alpha[t + 1] = np.where(nxt > NEG / 2, nxt - nxt.max(), NEG)

    beta = np.full(n_states, NEG)
    beta[0] = 0.0
    out = np.empty(k)
    for t in range(n_steps - 1, -1, -1):
        cand = gammas[t] + beta[next_state]
        if t < k:
            metric = alpha[t][:, None] + cand
            out[t] = metric[:, 0].max() - metric[:, 1].max()
        prev = cand.max(axis=1)
        beta = np.where(prev > NEG / 2, prev - prev.max(), NEG)
    return out


# =============================================================================
# Recursive systematic convolutional encoder with termination
# =============================================================================


@njit(cache=True)
def _rsc_encode_nb(bits, next_state, parity, tail_input):
    k = bits.shape[0]
    par = np.empty(k + 3, dtype=np.uint8)
    tail_sys = np.empty(3, dtype=np.uint8)
    s = 0
    for i in range(k):
        u = bits[i]
        par[i] = parity[s, u]
        s = next_state[s, u]
    for i in range(3):
        u = tail_input[s]
        tail_sys[i] = u
        par[k + i] = parity[s, u]
        s = next_state[s, u]
    return par, tail_sys


def _rsc_encode_np(bits, next_state, parity, tail_input):
    k = bits.shape[0]
    par = np.empty(k + 3, dtype=np.uint8)
    tail_sys = np.empty(3, dtype=np.uint8)
    s = 0
    for i, u in enumerate(bits.tolist()):
        par[i] = parity[s, u]
        s = next_state[s, u]
    for i in range(3):
        u = tail_input[s]
        tail_sys[i] = u
        par[k + i] = parity[s, u]
        s = next_state[s, u]
    return par, tail_sys


# =============================================================================
# Greedy peak suppression for burst detection
# =============================================================================


@njit(cache=True)
def _suppress_peaks_nb(order, min_distance):
    """``order`` holds candidate indices sorted by descending score."""
    keep = np.zeros(order.shape[0], dtype=np.bool_)
    kept = np.empty(order.shape[0], dtype=np.int64)
    n_kept = 0
    for i in range(order.shape[0]):
        idx = order[i]
        ok = True
        for j in range(n_kept):
            if abs(idx - kept[j]) < min_distance:
                ok = False
                break
        if ok:
            keep[i] = True
            kept[n_kept] = idx
            n_kept += 1
    return keep


def _suppress_peaks_np(order, min_distance):
    keep = np.zeros(order.shape[0], dtype=bool)
    kept = np.empty(0, dtype=np.int64)
    for i, idx in enumerate(order):
        if kept.size == 0 or np.min(np.abs(kept - idx)) >= min_distance:
            keep[i] = True
            kept = np.append(kept, idx)
    return keep


if USE_NUMBA:
    bcjr = _bcjr_nb
    rsc_encode = _rsc_encode_nb
    suppress_peaks = _suppress_peaks_nb
else:
    bcjr = _bcjr_np
    rsc_encode = _rsc_encode_np
    suppress_peaks = _suppress_peaks_np

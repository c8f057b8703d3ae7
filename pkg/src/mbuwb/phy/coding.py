"""K=7 rate-1/3 convolutional code (133, 165, 171 octal) with puncturing.

Soft-decision Viterbi decoding runs in numba; LLR convention is
``log P(b=0) / P(b=1)`` so positive values favour a zero bit.
"""

from __future__ import annotations

from fractions import Fraction

import numba
import numpy as np

from ..errors import ConfigurationError

CONSTRAINT_LENGTH = 7
GENERATORS = (0o133, 0o165, 0o171)
NUM_STATES = 1 << (CONSTRAINT_LENGTH - 1)
TAIL_BITS = CONSTRAINT_LENGTH - 1

# rows are the A, B, C outputs over one puncturing period; 1 = transmitted
PUNCTURE_PATTERNS = {
    Fraction(1, 3): np.array([[1], [1], [1]]),
    Fraction(1, 2): np.array([[1], [1], [0]]),
    Fraction(11, 32): np.array([[1] * 11, [1] * 11, [1] * 10 + [0]]),
    Fraction(5, 8): np.array([[1, 1, 1, 1, 1], [1, 1, 0, 0, 0], [0, 0, 1, 0, 0]]),
    Fraction(3, 4): np.array([[1, 1, 0], [1, 0, 0], [0, 0, 1]]),
}


def _trellis():
    out = np.zeros((NUM_STATES, 2, 3), dtype=np.uint8)
    nxt = np.zeros((NUM_STATES, 2), dtype=np.int64)
    for s in range(NUM_STATES):
        for b in (0, 1):
            reg = (b << 6) | s
            out[s, b] = [bin(reg & g).count("1") & 1 for g in GENERATORS]
            nxt[s, b] = reg >> 1
    return out, nxt


TRELLIS_OUT, TRELLIS_NEXT = _trellis()


def _pattern(code_rate) -> np.ndarray:
    try:
        return PUNCTURE_PATTERNS[Fraction(code_rate)]
    except (KeyError, TypeError, ValueError):
        raise ConfigurationError(f"unsupported code rate {code_rate}") from None


def _keep_mask(n_steps: int, code_rate) -> np.ndarray:
    """Boolean mask over the mother-code stream (step-major, A B C per step)."""
    pat = _pattern(code_rate)
    period = pat.shape[1]
    reps = -(-n_steps // period)
    return np.tile(pat.T, (reps, 1))[:n_steps].astype(bool).ravel()


def coded_length(n_info: int, code_rate, terminate: bool = True) -> int:
    steps = n_info + (TAIL_BITS if terminate else 0)
    return int(_keep_mask(steps, code_rate).sum())


@numba.njit(cache=True)
def _encode_kernel(bits, out_table):
    n = bits.shape[0]
    y = np.empty(3 * n, dtype=np.uint8)
    s = 0
    for t in range(n):
        b = bits[t]
        y[3 * t] = out_table[s, b, 0]
        y[3 * t + 1] = out_table[s, b, 1]
        y[3 * t + 2] = out_table[s, b, 2]
        s = ((b << 6) | s) >> 1
    return y


def encode(bits, code_rate, terminate: bool = True) -> np.ndarray:
    """Encode ``bits``; with ``terminate`` six zero tail bits flush the encoder."""
    bits = np.asarray(bits, dtype=np.uint8).ravel()
    if terminate:
        bits = np.concatenate([bits, np.zeros(TAIL_BITS, dtype=np.uint8)])
    mask = _keep_mask(bits.size, code_rate)
    return _encode_kernel(bits, TRELLIS_OUT)[mask]


def depuncture(llr, n_steps: int, code_rate) -> np.ndarray:
    """Re-insert zero LLRs (erasures) at punctured positions; shape (..., 3*n_steps)."""
    llr = np.asarray(llr, dtype=np.float64)
    mask = _keep_mask(n_steps, code_rate)
    full = np.zeros(llr.shape[:-1] + (mask.size,))
    full[..., mask] = llr
    return full


@numba.njit(cache=True)
def _viterbi_kernel(llr, n_steps, out_table, terminated):
    # llr: (frames, 3*n_steps); returns (frames, n_steps) decisions
    n_frames = llr.shape[0]
    decoded = np.zeros((n_frames, n_steps), dtype=np.uint8)
    label = np.empty((NUM_STATES, 2), dtype=np.int64)
    for s in range(NUM_STATES):
        for b in range(2):
            label[s, b] = 4 * out_table[s, b, 0] + 2 * out_table[s, b, 1] + out_table[s, b, 2]
    survivors = np.empty((n_steps, NUM_STATES), dtype=np.uint8)
    pm = np.empty(NUM_STATES)
    new = np.empty(NUM_STATES)
    bm = np.empty(8)
    for f in range(n_frames):
        pm[:] = -1e300
        pm[0] = 0.0
        for t in range(n_steps):
            l0 = llr[f, 3 * t]
            l1 = llr[f, 3 * t + 1]
            l2 = llr[f, 3 * t + 2]
            for k in range(8):
                bm[k] = (
                    (l0 if (k & 4) == 0 else -l0)
                    + (l1 if (k & 2) == 0 else -l1)
                    + (l2 if (k & 1) == 0 else -l2)
                )
            top = -1e300
            for ns in range(NUM_STATES):
                b = ns >> 5
                p0 = (ns & 31) << 1
                p1 = p0 | 1
                m0 = pm[p0] + bm[label[p0, b]]
                m1 = pm[p1] + bm[label[p1, b]]
                if m1 > m0:
                    new[ns] = m1
                    survivors[t, ns] = 1
                else:
                    new[ns] = m0
                    survivors[t, ns] = 0
                if new[ns] > top:
                    top = new[ns]
            for s in range(NUM_STATES):
                pm[s] = new[s] - top
        s = 0
        if not terminated:
            s = int(np.argmax(pm))
        for t in range(n_steps - 1, -1, -1):
            decoded[f, t] = s >> 5
            s = ((s & 31) << 1) | survivors[t, s]
    return decoded


def viterbi_decode(llr, n_info: int, code_rate, terminate: bool = True) -> np.ndarray:
    """Soft-decision decode punctured LLRs back to ``n_info`` bits.

    ``llr`` may be 1-D (one block) or 2-D (frames x coded bits).
    """
    llr = np.asarray(llr, dtype=np.float64)
    single = llr.ndim == 1
    llr2 = np.atleast_2d(llr)
    n_steps = n_info + (TAIL_BITS if terminate else 0)
    full = np.ascontiguousarray(depuncture(llr2, n_steps, code_rate))
    bits = _viterbi_kernel(full, n_steps, TRELLIS_OUT, terminate)[:, :n_info]
    return bits[0] if single else bits

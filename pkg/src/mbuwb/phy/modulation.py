"""Constellation mapping, FDS/TDS spreading, MRC combining and soft demapping.

Grids are arrays of shape ``(..., slots, 100)``: one row of data tones per
transmitted OFDM symbol. Bit 0 maps to the negative amplitude (ECMA-368
convention), and LLRs are ``log P(b=0) / P(b=1)``.
"""

from __future__ import annotations

import numpy as np

from ..errors import ArgumentError, ConfigurationError
from .mcs import DATA_TONES

DCM_OFFSET = 50
_SQRT2 = np.sqrt(2.0)
_SQRT10 = np.sqrt(10.0)
# rows: tone k and tone k+50; columns: first and second QPSK component
DCM_MATRIX = np.array([[2.0, 1.0], [1.0, -2.0]]) / _SQRT10


def map_symbols(bits, modulation: str) -> np.ndarray:
    """Map coded bits to unit-energy symbols along the last axis.

    QPSK maps bit pairs to one tone each. DCM consumes 200 bits per OFDM
    symbol; bit group ``4g..4g+3`` lands on tones ``g`` and ``g+50``.
    """
    bits = np.asarray(bits)
    n = bits.shape[-1]
    pm = 2.0 * bits - 1.0
    if modulation == "QPSK":
        if n % 2:
            raise ArgumentError("QPSK needs an even number of bits")
        return (pm[..., 0::2] + 1j * pm[..., 1::2]) / _SQRT2
    if modulation == "DCM":
        if n % (2 * DATA_TONES):
            raise ArgumentError("DCM needs a multiple of 200 bits (one OFDM symbol)")
        g = pm.reshape(pm.shape[:-1] + (n // (2 * DATA_TONES), DCM_OFFSET, 4))
        xa = g[..., 0] + 1j * g[..., 1]
        xb = g[..., 2] + 1j * g[..., 3]
        lo = DCM_MATRIX[0, 0] * xa + DCM_MATRIX[0, 1] * xb
        hi = DCM_MATRIX[1, 0] * xa + DCM_MATRIX[1, 1] * xb
        out = np.concatenate([lo, hi], axis=-1)
        return out.reshape(pm.shape[:-1] + (n // 2,))
    raise ConfigurationError(f"unknown modulation {modulation!r}")


def bits_per_symbol(modulation: str, fds: bool) -> int:
    """Distinct coded bits carried by one OFDM symbol."""
    if modulation == "DCM" and fds:
        raise ConfigurationError("DCM is not combined with frequency-domain spreading")
    return 2 * DATA_TONES // (2 if fds else 1)


def spread(symbols, fds: bool, tds: bool) -> np.ndarray:
    """Lay symbols onto a ``(..., slots, 100)`` grid.

    FDS copies tone ``k`` onto ``k+50``; TDS repeats every OFDM symbol in the
    following slot.
    """
    symbols = np.asarray(symbols)
    per = DATA_TONES // 2 if fds else DATA_TONES
    if symbols.shape[-1] % per:
        raise ArgumentError(f"{symbols.shape[-1]} symbols do not fill whole OFDM symbols")
    grid = symbols.reshape(symbols.shape[:-1] + (symbols.shape[-1] // per, per))
    if fds:
        grid = np.concatenate([grid, grid], axis=-1)
    if tds:
        grid = np.repeat(grid, 2, axis=-2)
    return grid


def combine_copies(y, h, fds: bool, tds: bool):
    """De-rotate received tones and stack the spreading copies.

    Returns ``(u, a)``, both shaped ``(..., distinct_symbols, copies, tones)``:
    ``u = conj(h) y / |h|`` is the phase-corrected observation and ``a = |h|``
    its real amplitude, so ``u = a * x + w`` with ``w`` circular of variance N0.
    """
    a = np.abs(h)
    u = np.conj(h) * y / np.maximum(a, 1e-300)
    lead = y.shape[:-2]
    slots = y.shape[-2]
    if tds:
        u = u.reshape(lead + (slots // 2, 2, DATA_TONES))
        a = a.reshape(lead + (slots // 2, 2, DATA_TONES))
    else:
        u = u[..., None, :]
        a = a[..., None, :]
    if fds:
        half = DATA_TONES // 2
        u = np.concatenate([u[..., :half], u[..., half:]], axis=-2)
        a = np.concatenate([a[..., :half], a[..., half:]], axis=-2)
    return u, a


def _flatten_llr(llr, u):
    # (..., dsym, copies, tones) observations -> (..., bits)
    return llr.reshape(u.shape[:-3] + (-1,))


def demap_qpsk(u, a, n0: float) -> np.ndarray:
    """Maximum-ratio combine the copies and return per-bit LLRs."""
    z = np.sum(a * u, axis=-2)  # (..., dsym, tones)
    scale = -2.0 * _SQRT2 / n0
    llr = np.stack([scale * z.real, scale * z.imag], axis=-1)
    return _flatten_llr(llr, u)


_DCM_HYP = np.array([[-1.0, -1.0], [-1.0, 1.0], [1.0, -1.0], [1.0, 1.0]])  # (first, second)


def _dcm_dim_llr(u_lo, u_hi, a_lo, a_hi, n0):
    # one real dimension: hypotheses over (first, second) component signs
    y_lo = _DCM_HYP @ DCM_MATRIX[0]
    y_hi = _DCM_HYP @ DCM_MATRIX[1]
    metric = -(
        (u_lo[..., None] - a_lo[..., None] * y_lo) ** 2
        + (u_hi[..., None] - a_hi[..., None] * y_hi) ** 2
    ).sum(axis=-3) / n0
    lse = np.logaddexp
    first = lse(metric[..., 0], metric[..., 1]) - lse(metric[..., 2], metric[..., 3])
    second = lse(metric[..., 0], metric[..., 2]) - lse(metric[..., 1], metric[..., 3])
    return first, second


def demap_dcm(u, a, n0: float) -> np.ndarray:
    """Exact per-dimension LLRs for the DCM tone pairs (k, k+50)."""
    lo_u, hi_u = u[..., :DCM_OFFSET], u[..., DCM_OFFSET:]
    lo_a, hi_a = a[..., :DCM_OFFSET], a[..., DCM_OFFSET:]
    b0, b2 = _dcm_dim_llr(lo_u.real, hi_u.real, lo_a, hi_a, n0)
    b1, b3 = _dcm_dim_llr(lo_u.imag, hi_u.imag, lo_a, hi_a, n0)
    llr = np.stack([b0, b1, b2, b3], axis=-1)  # (..., dsym, 50, 4)
    return _flatten_llr(llr, u)


def demap(u, a, n0: float, modulation: str) -> np.ndarray:
    if modulation == "QPSK":
        return demap_qpsk(u, a, n0)
    if modulation == "DCM":
        return demap_dcm(u, a, n0)
    raise ConfigurationError(f"unknown modulation {modulation!r}")


def interleaver_permutation(bits_per_sym: int, span: int) -> np.ndarray:
    """Two-stage block interleaver over ``span`` OFDM symbols.

    Consecutive coded bits go to consecutive OFDM symbols, then a 10-row
    block interleaver spreads them across tones. ``out = x[perm]``.
    """
    n = bits_per_sym * span
    # symbol stage: bit i -> symbol i % span, position i // span
    sym_stage = np.arange(n).reshape(bits_per_sym, span).T.ravel()
    tone = np.arange(bits_per_sym).reshape(10, bits_per_sym // 10).T.ravel()
    tone_stage = (np.arange(span)[:, None] * bits_per_sym + tone[None, :]).ravel()
    return sym_stage[tone_stage]


def interleave(bits, perm) -> np.ndarray:
    bits = np.asarray(bits)
    n = perm.size
    blocks = bits.reshape(bits.shape[:-1] + (-1, n))
    return blocks[..., perm].reshape(bits.shape)


def deinterleave(values, perm) -> np.ndarray:
    values = np.asarray(values)
    n = perm.size
    inv = np.empty_like(perm)
    inv[perm] = np.arange(n)
    blocks = values.reshape(values.shape[:-1] + (-1, n))
    return blocks[..., inv].reshape(values.shape)
